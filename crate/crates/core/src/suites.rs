//! Verification suites. Each suite returns a report with one entry per
//! assertion; identifiers are stable across runs.

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coeff::{FiniteField, OEInt, Params};
use crate::embed::{iota_generators, Embedding};
use crate::error::{Error, Result};
use crate::iwasawa::{OKElement, SeriesRing, TSeries};
use crate::laurent::{Key, Laurent};
use crate::mvring::{MvRing, RingTag};
use crate::perfd::{b_val_r, member_b0r, pr_radius, BElt, PerfCtx};
use crate::phimod::{oc_certificate_check, unramified_char, MatOps, PhiModule};
use crate::witt::{eval_mod, gen_structure_polys, ghost_mod, int_to_witt, witt_to_int, PerfectRing, PrimeField, WittRing};

pub const SUITES: &[&str] = &[
    "frobenius", "action", "norms", "analytic", "iota", "witt", "decompose", "phimod", "radius",
];

pub const DEFAULT_GRID: &[(u64, usize, usize)] = &[(2, 1, 1), (3, 1, 1), (3, 2, 2), (5, 2, 2)];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub grid: Vec<(u64, usize, usize)>,
    pub prec: u32,
    pub deg: usize,
    pub band: Option<i64>,
    pub depth: Option<u32>,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            grid: DEFAULT_GRID.to_vec(),
            prec: 3,
            deg: 12,
            band: None,
            depth: None,
            seed: 0,
        }
    }
}

impl SuiteConfig {
    pub fn params(&self, (p, f, h): (u64, usize, usize), prec: u32) -> Result<Params> {
        let mut params = Params::new(p, f, h, prec, self.deg)?;
        if let Some(b) = self.band {
            params.band = b;
        }
        if let Some(k) = self.depth {
            params.depth = k;
        }
        params.validate()?;
        Ok(params)
    }

    fn rng(&self, tag: u64, point: usize) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(
            self.seed
                .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                .wrapping_add(tag << 16)
                .wrapping_add(point as u64),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assertion {
    pub id: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub pass: bool,
    pub assertions: Vec<Assertion>,
}

impl Report {
    fn new(suite: &str, assertions: Vec<Assertion>) -> Self {
        Report {
            suite: suite.into(),
            pass: assertions.iter().all(|a| a.pass),
            assertions,
        }
    }

    fn merge(suite: &str, parts: Vec<Report>) -> Self {
        Report::new(suite, parts.into_iter().flat_map(|r| r.assertions).collect())
    }
}

fn assertion(id: String, pass: bool, detail: String) -> Assertion {
    Assertion { id, pass, detail }
}

fn point_id((p, f, h): (u64, usize, usize)) -> String {
    format!("p{p}f{f}h{h}")
}

pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<Report> {
    let crits: &[u8] = match name {
        "frobenius" => &[1],
        "action" => &[2],
        "norms" => &[3],
        "analytic" => &[4],
        "iota" => &[5, 6],
        "witt" => &[7],
        "decompose" => &[8],
        "phimod" => &[9],
        "radius" => &[10],
        _ => {
            return Err(Error::InvalidParams(format!(
                "unknown suite {name}; expected one of {}",
                SUITES.join(", ")
            )))
        }
    };
    let parts = crits
        .iter()
        .map(|&c| criterion(c, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(Report::merge(name, parts))
}

/// Run one acceptance criterion (1 to 10).
pub fn criterion(n: u8, cfg: &SuiteConfig) -> Result<Report> {
    match n {
        1 => frobenius(cfg),
        2 => action(cfg),
        3 => norms(cfg),
        4 => analytic(cfg),
        5 => iota_fixpoint(cfg),
        6 => norm_comparison(cfg),
        7 => witt(cfg),
        8 => decompose(cfg),
        9 => phimod(cfg),
        10 => radius(cfg),
        _ => Err(Error::InvalidParams(format!("no criterion {n}"))),
    }
}

/// Every term of `s` lies in `p m + m^e`: constant term divisible by `p^2`
/// and terms of degree `1..e` divisible by `p`. Returns the first offender.
pub fn in_p_m_plus_m_pow(sr: &SeriesRing, s: &TSeries, e: usize) -> Option<String> {
    for (exps, c) in sr.terms(s) {
        let d: usize = exps.iter().map(|&x| x as usize).sum();
        let need = match d {
            0 => 2,
            d if d < e => 1,
            _ => 0,
        };
        if sr.ring.val(c) < need {
            return Some(format!("degree {d} term {exps:?} has valuation {}", sr.ring.val(c)));
        }
    }
    None
}

fn frobenius(cfg: &SuiteConfig) -> Result<Report> {
    let mut out = Vec::new();
    for &pt in &cfg.grid {
        let ring = MvRing::new(&cfg.params(pt, cfg.prec)?)?;
        let sr = ring.iw.out_ring();
        let f = pt.1;
        for i in 0..f {
            let s = ring.iw.phi_y(i)?;
            let target = sr.pow(&sr.var((i + f - 1) % f), pt.0 as usize);
            let diff = sr.sub(&s, &target);
            let bad = sr
                .terms(&diff)
                .find(|(_, c)| sr.ring.val(c) < 1)
                .map(|(e, _)| format!("coefficient of {e:?} is a unit"));
            let constant = sr.terms(&s).any(|(e, _)| e.iter().all(|&x| x == 0));
            let pass = bad.is_none() && !constant;
            out.push(assertion(
                format!("frobenius/{}/phi_y{i}", point_id(pt)),
                pass,
                bad.unwrap_or_else(|| {
                    if constant {
                        "nonzero constant term".into()
                    } else {
                        format!("phi(Y{i}) = Y{}^{} mod p, zero constant term", (i + f - 1) % f, pt.0)
                    }
                }),
            ));
        }
    }
    Ok(Report::new("frobenius", out))
}

fn action(cfg: &SuiteConfig) -> Result<Report> {
    let mut out = Vec::new();
    for (idx, &pt) in cfg.grid.iter().enumerate() {
        let ring = MvRing::new(&cfg.params(pt, cfg.prec)?)?;
        let sr = ring.iw.out_ring();
        let mut rng = cfg.rng(2, idx);
        let p = pt.0 as usize;
        let mut first = (0usize, None::<String>);
        for _ in 0..10 {
            let a = ring.random_unit(&mut rng);
            for i in 0..pt.1 {
                let g = ring.iw.gamma_y(&a, i)?;
                let lin = sr.scale(&sr.var(i), &ring.iw.sigma(&a, i));
                first.0 += 1;
                if let Some(e) = in_p_m_plus_m_pow(&sr, &sr.sub(&g, &lin), p) {
                    first.1.get_or_insert(format!("a={:?}, i={i}: {e}", a.0));
                }
            }
        }
        out.push(assertion(
            format!("action/{}/sigma_linear", point_id(pt)),
            first.1.is_none(),
            first.1.unwrap_or(format!("{} checks of a(Y_i) - sigma_i(a) Y_i in p m + m^p", first.0)),
        ));
        for n in 1..=2u32 {
            let e = p.pow(n);
            let mut bad = None;
            let mut count = 0;
            for _ in 0..5 {
                let a = ring.random_principal_unit(&mut rng, n);
                for i in 0..pt.1 {
                    let g = ring.iw.gamma_y(&a, i)?;
                    count += 1;
                    if let Some(msg) = in_p_m_plus_m_pow(&sr, &sr.sub(&g, &sr.var(i)), e) {
                        bad.get_or_insert(format!("a={:?}, i={i}: {msg}", a.0));
                    }
                }
            }
            out.push(assertion(
                format!("action/{}/principal_n{n}", point_id(pt)),
                bad.is_none(),
                bad.unwrap_or(format!("{count} checks of a(Y_i) - Y_i in p m + m^{e}")),
            ));
        }
    }
    Ok(Report::new("action", out))
}

/// Per-level windows `M (N - v) / N` used for random samples.
fn sample_hi(params: &Params) -> Vec<i64> {
    let n = params.prec as i64;
    let m = params.deg as i64;
    (0..n).map(|v| m * (n - v) / n).collect()
}

fn norms(cfg: &SuiteConfig) -> Result<Report> {
    let mut out = Vec::new();
    for (idx, &pt) in cfg.grid.iter().enumerate() {
        let params = cfg.params(pt, cfg.prec)?;
        let ring = MvRing::new(&params)?;
        let hi = sample_hi(&params);
        let mut rng = cfg.rng(3, idx);
        let gammas: Vec<_> = (0..4)
            .map(|_| ring.gamma_images(&ring.random_unit(&mut rng)))
            .collect::<Result<_>>()?;
        let (mut certified, mut tried, mut bad) = (0, 0, None);
        while certified < 100 && tried < 1000 {
            tried += 1;
            let x = ring.random_element(&mut rng, 6, (-2, 6), 1, &hi);
            let px = ring.apply_phi(&x)?;
            let gx = ring.apply_gamma_with(&gammas[tried % gammas.len()], &x)?;
            let vals: Vec<_> = (1..=3)
                .map(|s| (s, ring.norm_s(&x, s), ring.norm_s(&px, pt.0 as i64 * s), ring.norm_s(&gx, s)))
                .collect();
            if !vals.iter().all(|(_, a, b, c)| a.certified && b.certified && c.certified) {
                continue;
            }
            certified += 1;
            for (s, a, b, c) in vals {
                if a.value != b.value || a.value != c.value {
                    bad.get_or_insert(format!(
                        "s={s}: ||x||={:?}, ||phi x||={:?}, ||gamma x||={:?}",
                        a.value, b.value, c.value
                    ));
                }
            }
        }
        out.push(assertion(
            format!("norms/{}/equivariance", point_id(pt)),
            bad.is_none() && certified == 100,
            bad.unwrap_or(format!("{certified} certified samples of {tried}, s in 1..=3")),
        ));
    }
    Ok(Report::new("norms", out))
}

fn analytic(cfg: &SuiteConfig) -> Result<Report> {
    let mut out = Vec::new();
    for (idx, &pt) in cfg.grid.iter().enumerate() {
        let ring = MvRing::new(&cfg.params(pt, cfg.prec)?)?;
        let mut rng = cfg.rng(4, idx);
        for s in 1..=2i64 {
            let gammas: Vec<OKElement> = (0..5)
                .map(|_| ring.random_principal_unit(&mut rng, s as u32))
                .collect();
            let rows = ring.check_local_analyticity(s, &gammas)?;
            let bad = rows.iter().find(|r| !r.pass);
            out.push(assertion(
                format!("analytic/{}/s{s}", point_id(pt)),
                bad.is_none(),
                match bad {
                    Some(r) => format!("{} under {:?}: lower bound {:?}", r.generator, r.gamma.0, r.lower_bound),
                    None => format!("{} rows reach 1/(p-1)", rows.len()),
                },
            ));
        }
    }
    Ok(Report::new("analytic", out))
}

fn iota_fixpoint(cfg: &SuiteConfig) -> Result<Report> {
    let mut out = Vec::new();
    for (idx, &pt) in cfg.grid.iter().enumerate() {
        let params = cfg.params(pt, cfg.prec)?;
        let ring = MvRing::new(&params)?;
        let id = point_id(pt);
        let emb = match Embedding::new(&ring) {
            Ok(e) => e,
            Err(e) => {
                out.push(assertion(format!("iota/{id}/fixpoint"), false, e.to_string()));
                continue;
            }
        };
        let certs = &emb.gens.certificates;
        let stable = certs
            .iter()
            .enumerate()
            .all(|(n, row)| row.iter().all(|&m| m as usize > n));
        out.push(assertion(
            format!("iota/{id}/stabilization"),
            stable && certs.len() + 1 == params.prec as usize,
            format!("agreement powers per step {certs:?}"),
        ));
        let digits_ok = (0..pt.1).all(|i| {
            emb.w
                .digit0(&emb.gens.y[i])
                .is_ok_and(|d| d == emb.w.perf.y(i))
        });
        out.push(assertion(format!("iota/{id}/digit0"), digits_ok, "digit 0 of y_i is Y_i".into()));
        let mut rng = cfg.rng(5, idx);
        let seed = emb.perturbed_seed(&mut rng);
        let same = iota_generators(&ring, &emb.w, seed)
            .map(|g| (0..pt.1).all(|i| emb.w.ctx.agree(&g.y[i], &emb.gens.y[i])));
        out.push(assertion(
            format!("iota/{id}/perturbed_seed"),
            matches!(same, Ok(true)),
            format!("{same:?}"),
        ));
        let fixed = emb.verify_fixed_point();
        let gens_eq = (0..pt.1).map(|i| emb.verify_phi_equivariance(&ring.y(i))).collect::<Vec<_>>();
        out.push(assertion(
            format!("iota/{id}/generators"),
            matches!(fixed, Ok(true)) && gens_eq.iter().all(|r| matches!(r, Ok(true))),
            format!("fixed point {fixed:?}, equivariance {gens_eq:?}"),
        ));
        let hi = sample_hi(&params);
        let mut bad = None;
        for k in 0..20 {
            let x = ring.random_element(&mut rng, 3, (-1, 4), 1, &hi);
            let y = ring.random_element(&mut rng, 3, (-1, 4), 1, &hi);
            let xy = ring.ctx.mul(&x, &y)?;
            let r = emb.verify_phi_equivariance(&xy);
            let rq = emb.verify_phi_q_equivariance(&xy);
            if !matches!((&r, &rq), (Ok(true), Ok(true))) {
                bad.get_or_insert(format!("product {k}: phi {r:?}, phi_q {rq:?}"));
            }
        }
        out.push(assertion(
            format!("iota/{id}/products"),
            bad.is_none(),
            bad.unwrap_or("20 random products commute with phi and phi_q".into()),
        ));
    }
    Ok(Report::new("iota", out))
}

fn norm_comparison(cfg: &SuiteConfig) -> Result<Report> {
    let mut out = Vec::new();
    for (idx, &pt) in cfg.grid.iter().enumerate() {
        let params = cfg.params(pt, cfg.prec)?;
        let ring = MvRing::new(&params)?;
        let id = point_id(pt);
        let emb = match Embedding::new(&ring) {
            Ok(e) => e,
            Err(e) => {
                out.push(assertion(format!("iota/{id}/norm_compare"), false, e.to_string()));
                continue;
            }
        };
        let hi = sample_hi(&params);
        let mut rng = cfg.rng(6, idx);
        let (mut certified, mut tried, mut bad) = (0, 0, None);
        while certified < 20 && tried < 400 {
            tried += 1;
            let x = ring.random_element(&mut rng, 5, (-2, 6), 1, &hi);
            let cmp: Vec<_> = (1..=2).map(|s| emb.verify_norm_compare(&x, s)).collect();
            if cmp.iter().any(|c| matches!(c, Err(Error::Uncertified(_)))) {
                continue;
            }
            certified += 1;
            for c in cmp {
                match c {
                    Ok(c) if c.pass => {}
                    other => {
                        bad.get_or_insert(format!("{other:?}"));
                    }
                }
            }
        }
        out.push(assertion(
            format!("iota/{id}/norm_compare"),
            bad.is_none() && certified == 20,
            bad.unwrap_or(format!("{certified} certified samples of {tried}, s in 1..=2")),
        ));
    }
    Ok(Report::new("iota", out))
}

fn witt(cfg: &SuiteConfig) -> Result<Report> {
    let mut out = Vec::new();
    let n = cfg.prec as usize;
    let mut primes: Vec<u64> = cfg.grid.iter().map(|g| g.0).collect();
    primes.sort_unstable();
    primes.dedup();
    for &p in &primes {
        let mut rng = cfg.rng(7, p as usize);
        let sp = gen_structure_polys(p, n)?;
        let m = p.pow(n as u32 + 2);
        let mut bad = None;
        for t in 0..100 {
            let x: Vec<u64> = (0..n).map(|_| rng.gen_range(0..m)).collect();
            let y: Vec<u64> = (0..n).map(|_| rng.gen_range(0..m)).collect();
            let xy: Vec<u64> = x.iter().chain(&y).copied().collect();
            let ev = |polys: &[crate::witt::Poly]| -> Vec<u64> { polys.iter().map(|q| eval_mod(q, &xy, m)).collect() };
            let (s, pr, d) = (ev(&sp.add), ev(&sp.mul), ev(&sp.sub));
            for k in 0..n {
                let (gx, gy) = (ghost_mod(p, &x, k, m) as u128, ghost_mod(p, &y, k, m) as u128);
                let m128 = m as u128;
                let ok = ghost_mod(p, &s, k, m) as u128 == (gx + gy) % m128
                    && ghost_mod(p, &pr, k, m) as u128 == gx * gy % m128
                    && ghost_mod(p, &d, k, m) as u128 == (gx + m128 - gy) % m128;
                if !ok {
                    bad.get_or_insert(format!("tuple {t}, ghost component {k}"));
                }
            }
        }
        out.push(assertion(
            format!("witt/p{p}/ghost"),
            bad.is_none(),
            bad.unwrap_or(format!("100 tuples mod {p}^{}", n + 2)),
        ));
        let wr = WittRing::new(PrimeField(p), n)?;
        let mn = p.pow(n as u32);
        let mut bad = None;
        for _ in 0..200 {
            let (a, b) = (rng.gen_range(0..mn), rng.gen_range(0..mn));
            let (u, v) = (int_to_witt(p, n, a), int_to_witt(p, n, b));
            let ok = witt_to_int(p, n, &wr.add(&u, &v)) == (a + b) % mn
                && witt_to_int(p, n, &wr.mul(&u, &v)) == a * b % mn
                && witt_to_int(p, n, &wr.sub(&u, &v)) == (a + mn - b) % mn;
            if !ok {
                bad.get_or_insert(format!("a={a}, b={b}"));
            }
        }
        out.push(assertion(
            format!("witt/p{p}/integers"),
            bad.is_none(),
            bad.unwrap_or(format!("200 pairs in Z/{p}^{n}")),
        ));
    }
    for (idx, &pt) in cfg.grid.iter().enumerate() {
        let params = cfg.params(pt, cfg.prec)?;
        let pc = PerfCtx::new(&params, pt.1, params.depth)?;
        let field = FiniteField::new(&params);
        let wr = WittRing::new(pc.clone(), n)?;
        let mut rng = cfg.rng(17, idx);
        let mut bad = None;
        for t in 0..100 {
            let x = random_perf(&pc, &field, &mut rng);
            let y = random_perf(&pc, &field, &mut rng);
            let lhs = wr.mul(&wr.teich(&x), &wr.teich(&y));
            if lhs != wr.teich(&pc.ctx.mul(&x, &y)?) {
                bad.get_or_insert(format!("pair {t}"));
            }
        }
        out.push(assertion(
            format!("witt/{}/teichmuller", point_id(pt)),
            bad.is_none(),
            bad.unwrap_or("100 pairs with [x][y] = [xy]".into()),
        ));
    }
    Ok(Report::new("witt", out))
}

fn random_perf(pc: &PerfCtx, field: &FiniteField, rng: &mut ChaCha8Rng) -> Laurent {
    let p = pc.p as i64;
    let mut x = pc.ctx.zero();
    for _ in 0..rng.gen_range(1..4) {
        let mut exps = vec![Ratio::new(rng.gen_range(-2 * p..4 * p), p * p)];
        for _ in 1..pc.nvars() {
            exps.push(Ratio::new(rng.gen_range(-p..=p), p));
        }
        let c = field.from_index(rng.gen_range(1..field.size()));
        let m = pc.monomial(&exps, &c).expect("depth at least 2");
        x = pc.ctx.add(&x, &m).expect("exact");
    }
    x
}

fn decompose(cfg: &SuiteConfig) -> Result<Report> {
    let mut out = Vec::new();
    for (idx, &pt) in cfg.grid.iter().enumerate() {
        for prec in [1u32, cfg.prec] {
            let params = cfg.params(pt, prec)?;
            let ring = MvRing::new(&params)?;
            let hi = sample_hi(&params);
            let mut rng = cfg.rng(8 + prec as u64 * 100, idx);
            let mut bad = None;
            for t in 0..50 {
                let x = ring.fit_decomposable(&ring.random_element(&mut rng, 6, (-1, 8), 1, &hi))?;
                let r = ring
                    .phi_decompose(&x)
                    .and_then(|d| ring.recompose(&d))
                    .map(|y| ring.ctx.agree(&x, &y));
                if !matches!(r, Ok(true)) {
                    bad.get_or_insert(format!("sample {t}: {r:?}"));
                }
            }
            out.push(assertion(
                format!("decompose/{}/N{prec}/roundtrip", point_id(pt)),
                bad.is_none(),
                bad.unwrap_or("50 random elements recomposed".into()),
            ));
            let mut bad = None;
            let mut count = 0;
            for s in 1..=2i64 {
                let ps = pt.0 as i64 * s;
                for t in 0..25 {
                    let x = ring.fit_decomposable(&dagger_sample(&ring, &mut rng, ps, &hi))?;
                    count += 1;
                    match ring.phi_decompose(&x) {
                        Ok(d) => {
                            for (k, g) in &d.components {
                                let m = ring.member(g, RingTag::DaggerMinus(s));
                                if !(m.holds && m.certified) {
                                    bad.get_or_insert(format!("s={s}, sample {t}, component {k:?}: {m:?}"));
                                }
                            }
                        }
                        Err(e) => {
                            bad.get_or_insert(format!("s={s}, sample {t}: {e}"));
                        }
                    }
                }
            }
            out.push(assertion(
                format!("decompose/{}/N{prec}/overconvergent", point_id(pt)),
                bad.is_none(),
                bad.unwrap_or(format!("{count} elements of A^(ps-) have components in A^(s-)")),
            ));
        }
    }
    Ok(Report::new("decompose", out))
}

/// Random element with `ps v + n_0 >= 0` on every term.
fn dagger_sample(ring: &MvRing, rng: &mut ChaCha8Rng, ps: i64, hi: &[i64]) -> Laurent {
    let ctx = &ring.ctx;
    let n = ctx.prec() as u32;
    let mut x = ring.ctx.zero();
    for _ in 0..6 {
        let v = rng.gen_range(0..n);
        let mut key: Key = ctx.zero_key();
        key[0] = rng.gen_range(-ps * v as i64..=hi[v as usize] - 1);
        for slot in key.iter_mut().skip(1) {
            *slot = rng.gen_range(-1..=1);
        }
        let coords: Vec<u64> = (0..ring.params.h).map(|_| rng.gen_range(1..ctx.ring.p)).collect();
        let c = ctx.ring.mul_p_pow(&ctx.ring.from_coords(&coords), v);
        x = ctx.add(&x, &ctx.monomial(key, c)).expect("within band");
    }
    ctx.cap_levels(&x, hi)
}

fn phimod(cfg: &SuiteConfig) -> Result<Report> {
    let mut out = Vec::new();
    for (idx, &pt) in cfg.grid.iter().enumerate() {
        let params = cfg.params(pt, cfg.prec)?;
        let ring = MvRing::new(&params)?;
        let ctx = &ring.ctx;
        let ops = MatOps::new(&ring);
        let id = point_id(pt);
        let mut rng = cfg.rng(9, idx);
        let samples: Vec<OKElement> = (0..2).map(|_| ring.random_unit(&mut rng)).collect();
        let lam = random_oe_unit(&ring, &mut rng);
        let m = unramified_char(&ring, &lam, &samples)?;
        let etale = m.is_etale(&ring);
        let comm = m.commutation_holds(&ring);
        let oc = oc_certificate_check(&ring, &m, &ops.identity(1), 1, 1);
        out.push(assertion(
            format!("phimod/{id}/unramified"),
            matches!(etale, Ok(true)) && matches!(comm, Ok(true)) && oc.as_ref().is_ok_and(|r| r.pass),
            format!("etale {etale:?}, commutation {comm:?}, certificate pass {:?}", oc.map(|r| r.pass)),
        ));
        let pmat = vec![vec![ctx.constant(ctx.ring.from_u64(pt.0))]];
        let rejects: Vec<_> = [RingTag::Circ, RingTag::DaggerMinus(1), RingTag::DaggerIntegral(1)]
            .into_iter()
            .map(|tag| {
                PhiModule {
                    rank: 1,
                    tag,
                    p: pmat.clone(),
                    action: vec![],
                }
                .is_etale(&ring)
            })
            .collect();
        out.push(assertion(
            format!("phimod/{id}/rejects_p"),
            rejects.iter().all(|r| matches!(r, Ok(false))),
            format!("{rejects:?}"),
        ));
        let mut bad = None;
        for t in 0..20 {
            let d = rng.gen_range(1..=3usize);
            let exps: Vec<i64> = (0..d).map(|_| rng.gen_range(0..5)).collect();
            let diag: Vec<Laurent> = exps
                .iter()
                .map(|&a| {
                    let u = random_oe_unit(&ring, &mut rng);
                    let tail = ctx.scale_by(&ctx.y0_pow(a + 1), &ctx.ring.from_u64(pt.0));
                    ctx.add(&ctx.scale_by(&ctx.y0_pow(a), &u), &tail).expect("small")
                })
                .collect();
            let mut v = ops.identity(d);
            for i in 0..d {
                for j in i + 1..d {
                    let e = rng.gen_range(-2..3);
                    v[i][j] = ctx.scale_by(&ctx.y0_pow(e), &random_oe_unit(&ring, &mut rng));
                }
            }
            let pm = PhiModule {
                rank: d,
                tag: RingTag::Full,
                p: ops.mul(&ops.diag(diag), &v)?,
                action: vec![],
            };
            let expect: i64 = exps.iter().sum();
            let got = pm.integral_bound(&ring);
            if !matches!(got, Ok(r) if r == expect) {
                bad.get_or_insert(format!("matrix {t}: expected {expect}, got {got:?}"));
            }
        }
        out.push(assertion(
            format!("phimod/{id}/integral_bound"),
            bad.is_none(),
            bad.unwrap_or("20 diagonal-times-unipotent matrices, d <= 3".into()),
        ));
    }
    Ok(Report::new("phimod", out))
}

fn random_oe_unit(ring: &MvRing, rng: &mut ChaCha8Rng) -> OEInt {
    let r = &ring.ctx.ring;
    loop {
        let coords: Vec<u64> = (0..r.h).map(|_| rng.gen_range(0..r.pn)).collect();
        let c = r.from_coords(&coords);
        if r.is_unit(&c) {
            return c;
        }
    }
}

fn radius(cfg: &SuiteConfig) -> Result<Report> {
    let mut out = Vec::new();
    let radii = [Ratio::new(1, 1), Ratio::new(1, 2), Ratio::new(3, 1), Ratio::new(5, 7)];
    for &pt in &cfg.grid {
        let (p, f, _) = pt;
        let q = p.pow(f as u32) as i64;
        let mut bad = None;
        for i in 0..f {
            for &r in &radii {
                // (p-1)/(q-1) = 1/(1 + p + .. + p^{f-1}).
                let geometric: i64 = (0..f).map(|j| (p as i64).pow(j as u32)).sum();
                let expect = r / Ratio::from_integer(geometric * (p as i64).pow(i as u32));
                let got = pr_radius(p, f, i, r)?;
                if got != expect || got != Ratio::new(p as i64 - 1, q - 1) / (p as i64).pow(i as u32) * r {
                    bad.get_or_insert(format!("i={i}, r={r}: got {got}"));
                }
            }
        }
        out.push(assertion(
            format!("radius/{}/factor", point_id(pt)),
            bad.is_none(),
            bad.unwrap_or(format!("{} radii per factor", radii.len())),
        ));
        let params = cfg.params(pt, cfg.prec)?;
        let pc = PerfCtx::new(&params, f, params.depth)?;
        let wr = WittRing::new(pc.clone(), params.prec as usize)?;
        let mut digits = vec![wr.base.zero(); wr.n];
        if wr.n > 1 {
            digits[1] = wr.base.one();
        }
        let pi = wr.from_expansion(&digits);
        let mut rows = Vec::new();
        for s in 1..=3i64 {
            let at = BElt::new(pi.clone(), Ratio::new(1, s))?.with_shift(Ratio::from_integer(s));
            let past = BElt::new(pi.clone(), Ratio::new(1, s))?.with_shift(Ratio::from_integer(s + 1));
            let v = b_val_r(&wr, &at)?;
            rows.push((s, member_b0r(&wr, &at)?, member_b0r(&wr, &past)?, v.value));
        }
        let ok = wr.n > 1 && rows.iter().all(|(_, a, b, v)| *a && !*b && *v == Some(Ratio::from_integer(0)));
        out.push(assertion(
            format!("radius/{}/boundary", point_id(pt)),
            ok,
            format!("(s, pi/[Y]^s member, pi/[Y]^(s+1) member, b_val) = {rows:?}"),
        ));
    }
    if !out.iter().any(|a| a.id.contains("p3f2")) {
        let got = pr_radius(3, 2, 1, Ratio::from_integer(1))?;
        out.push(assertion(
            "radius/p3f2/example".into(),
            got == Ratio::new(1, 12),
            format!("pr_radius(3, 2, 1, 1) = {got}"),
        ));
    }
    Ok(Report::new("radius", out))
}

