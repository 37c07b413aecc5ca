use std::process::{Command, Output};

use serde_json::Value;

fn mvphi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvphi"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn phi_y_p2_matches_closed_form() {
    let out = mvphi(&["phi-y", "--p", "2", "--deg", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["phi_y"], "Y^2+2Y");
    assert_eq!(v["congruence_mod_p"], true);
}

#[test]
fn phi_y_p3_congruence_holds() {
    let v = json(&mvphi(&["phi-y", "--p", "3"]));
    assert_eq!(v["congruence_mod_p"], true);
    assert_eq!(v["constant_term_zero"], true);
}

#[test]
fn gamma_y_of_one_is_identity() {
    for index in ["0", "1"] {
        let out = mvphi(&["gamma-y", "--p", "3", "--f", "2", "--h", "2", "--a", "1", "--index", index]);
        assert_eq!(out.status.code(), Some(0));
        let v = json(&out);
        assert_eq!(v["gamma_y"], format!("Y{index}"));
    }
}

#[test]
fn gamma_y_rejects_non_units() {
    assert_eq!(mvphi(&["gamma-y", "--p", "3", "--a", "6"]).status.code(), Some(2));
}

#[test]
fn iota_digits_for_p2() {
    let out = mvphi(&["iota", "--p", "2", "--prec", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let g = &v["generators"][0];
    assert_eq!(g["digit0_is_y"], true);
    let d1 = &g["digits"][1]["terms"];
    assert_eq!(d1.as_array().unwrap().len(), 1);
    assert_eq!(d1[0]["y0"]["num"], 1);
    assert_eq!(d1[0]["y0"]["den"], 2);
    assert_eq!(v["stabilized"], true);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(mvphi(&["check", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(mvphi(&["phi-y", "--p", "4"]).status.code(), Some(2));
    assert_eq!(mvphi(&["phi-y", "--p", "3", "--f", "2", "--h", "3"]).status.code(), Some(2));
    assert_eq!(mvphi(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(mvphi(&["norm", "--s", "0"]).status.code(), Some(2));
}

#[test]
fn check_single_suites_pass() {
    for suite in ["frobenius", "witt", "radius"] {
        let out = mvphi(&["check", "--suite", suite, "--p", "3"]);
        assert_eq!(out.status.code(), Some(0), "{suite}");
        let v = json(&out);
        assert_eq!(v["pass"], true);
        assert!(!v["reports"][0]["assertions"].as_array().unwrap().is_empty());
    }
}

#[test]
fn output_is_deterministic_and_out_flag_writes_file() {
    let args = ["norm", "--p", "3", "--f", "2", "--h", "2", "--seed", "11"];
    let a = mvphi(&args);
    let b = mvphi(&args);
    assert_eq!(a.stdout, b.stdout);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("norm.json");
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    let c = mvphi(&with_out);
    assert_eq!(c.status.code(), Some(0));
    assert!(c.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), a.stdout);
    let other = mvphi(&["norm", "--p", "3", "--f", "2", "--h", "2", "--seed", "12"]);
    assert_ne!(other.stdout, a.stdout);
}

#[test]
fn emitted_elements_reparse() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&mvphi(&["norm", "--p", "5", "--seed", "3"]));
    let path = dir.path().join("x.json");
    std::fs::write(&path, v["element"].to_string()).unwrap();
    let again = json(&mvphi(&["norm", "--p", "5", "--input", path.to_str().unwrap()]));
    assert_eq!(again["element"], v["element"]);
    assert_eq!(again["norms"], v["norms"]);
}

#[test]
fn decompose_roundtrips() {
    let out = mvphi(&["decompose", "--p", "3", "--f", "2", "--h", "2", "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["roundtrip"], true);
    assert_eq!(v["components"].as_array().unwrap().len(), 9);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let toml_path = dir.path().join("run.toml");
    std::fs::write(&toml_path, "p = 3\nprec = 2\ndeg = 6\n").unwrap();
    let v = json(&mvphi(&["phi-y", "--config", toml_path.to_str().unwrap()]));
    assert_eq!(v["series"]["p"], 3);
    assert_eq!(v["series"]["N"], 2);
    let v = json(&mvphi(&["phi-y", "--config", toml_path.to_str().unwrap(), "--p", "5"]));
    assert_eq!(v["series"]["p"], 5);
    assert_eq!(v["series"]["M"], 6);

    let json_path = dir.path().join("run.json");
    std::fs::write(&json_path, r#"{"p": 2, "deg": 4}"#).unwrap();
    let v = json(&mvphi(&["phi-y", "--config", json_path.to_str().unwrap()]));
    assert_eq!(v["phi_y"], "Y^2+2Y");

    std::fs::write(&toml_path, "colour = 3\n").unwrap();
    assert_eq!(mvphi(&["phi-y", "--config", toml_path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn etale_rejects_multiplication_by_p() {
    let v = json(&mvphi(&["etale", "--p", "3", "--lambda", "2"]));
    assert_eq!(v["etale"], true);
    let mut module = v["module"].clone();
    module["tag"] = Value::String("Circ".into());
    module["P"][0][0]["terms"][0]["coeff"] = serde_json::json!([3]);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    std::fs::write(&path, module.to_string()).unwrap();
    let out = mvphi(&["etale", "--p", "3", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["etale"], false);
}

#[test]
fn oc_certificate_for_unramified_character() {
    let out = mvphi(&["oc-cert", "--p", "3", "--f", "2", "--h", "2", "--s", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["pass"], true);
    assert_eq!(v["minimal_s"], 1);
}
