//! Acceptance run on the default grid: one pass/fail line per criterion.

use std::time::{Duration, Instant};

use mvphi_core::suites::{criterion, SuiteConfig};

fn run(n: u8, name: &str, budget_secs: u64) {
    let start = Instant::now();
    let report = criterion(n, &SuiteConfig::default()).expect("suite ran");
    let elapsed = start.elapsed();
    let ok = report.pass && elapsed < Duration::from_secs(budget_secs);
    println!(
        "criterion {n} ({name}): {} in {:.2}s, {} assertions",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        report.assertions.len()
    );
    for a in report.assertions.iter().filter(|a| !a.pass) {
        println!("  failed {}: {}", a.id, a.detail);
    }
    assert!(report.pass, "criterion {n} failed");
    assert!(elapsed < Duration::from_secs(budget_secs), "criterion {n} exceeded {budget_secs}s");
}

#[test]
fn criterion_01_frobenius_congruence() {
    run(1, "frobenius congruence", 30);
}

#[test]
fn criterion_02_action_congruences() {
    run(2, "action congruences", 30);
}

#[test]
fn criterion_03_norm_equivariance() {
    run(3, "norm equivariance", 60);
}

#[test]
fn criterion_04_local_analyticity() {
    run(4, "local analyticity", 30);
}

#[test]
fn criterion_05_iota_fixpoint() {
    run(5, "iota fixpoint", 120);
}

#[test]
fn criterion_06_norm_comparison() {
    run(6, "norm comparison", 60);
}

#[test]
fn criterion_07_witt_oracle() {
    run(7, "witt oracle", 60);
}

#[test]
fn criterion_08_phi_decomposition() {
    run(8, "phi decomposition", 60);
}

#[test]
fn criterion_09_phi_modules() {
    run(9, "phi-modules", 30);
}

#[test]
fn criterion_10_radius_bookkeeping() {
    run(10, "radius bookkeeping", 5);
}
