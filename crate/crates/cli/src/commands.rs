//! Subcommand implementations. Each returns JSON and a pass flag.

use std::path::Path;

use mvphi_core::coeff::{OEInt, Params};
use mvphi_core::embed::{Embedding, NormCompare};
use mvphi_core::iwasawa::{OKElement, TSeriesJson};
use mvphi_core::json::Rational;
use mvphi_core::laurent::{Laurent, INF};
use mvphi_core::mvring::{MvLaurentJson, MvRing, NormJson};
use mvphi_core::perfd::PerfLaurentJson;
use mvphi_core::phimod::{oc_certificate_check, unramified_char, MatOps, Matrix, PhiModule, PhiModuleJson};
use mvphi_core::suites::{in_p_m_plus_m_pow, run_suite, Report, SUITES};
use mvphi_core::witt::WittRing;
use mvphi_core::Error;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::config::RunConfig;
use crate::{CliError, Outcome};

fn rng(cfg: &RunConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed)
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .map(|t| t.trim().parse::<T>().map_err(|_| CliError::Usage(format!("bad {what}: {t:?}"))))
        .collect()
}

fn check_index(params: &Params, index: usize) -> Result<(), CliError> {
    if index >= params.f {
        return Err(CliError::Usage(format!("index {index} must be below f = {}", params.f)));
    }
    Ok(())
}

#[derive(Serialize)]
struct PhiYOut {
    index: usize,
    phi_y: String,
    congruence_mod_p: bool,
    constant_term_zero: bool,
    series: TSeriesJson,
}

pub fn phi_y(cfg: &RunConfig, index: usize) -> Result<Outcome, CliError> {
    let params = cfg.params()?;
    check_index(&params, index)?;
    let ring = MvRing::new(&params)?;
    let sr = ring.iw.out_ring();
    let s = ring.iw.phi_y(index)?;
    let prev = (index + params.f - 1) % params.f;
    let diff = sr.sub(&s, &sr.pow(&sr.var(prev), params.p as usize));
    let congruence = sr.terms(&diff).all(|(_, c)| sr.ring.val(c) >= 1);
    let constant = !sr.terms(&s).any(|(e, _)| e.iter().all(|&x| x == 0));
    let out = PhiYOut {
        index,
        phi_y: sr.pretty(&s, "Y"),
        congruence_mod_p: congruence,
        constant_term_zero: constant,
        series: ring.iw.to_json(&s),
    };
    Outcome::new(&out, congruence && constant)
}

fn parse_unit(ring: &MvRing, a: &str) -> Result<OKElement, CliError> {
    let vals: Vec<i64> = parse_list(a, "unit")?;
    let m = ring.iw.wide().pn as i64;
    let el = match vals.as_slice() {
        [v] => ring.iw.ok_from_i64(*v),
        vs if vs.len() == ring.params.f => OKElement(vs.iter().map(|v| v.rem_euclid(m) as u64).collect()),
        _ => {
            return Err(CliError::Usage(format!(
                "--a takes one integer or {} coordinates",
                ring.params.f
            )))
        }
    };
    if !ring.iw.is_unit(&el) {
        return Err(CliError::Usage(format!("{a} is not a unit of O_K")));
    }
    Ok(el)
}

/// Largest `n <= N` with `a` in `1 + p^n O_K`.
fn principal_level(ring: &MvRing, a: &OKElement) -> u32 {
    let one = ring.iw.ok_from_i64(1);
    let m = ring.iw.wide().pn;
    let p = ring.params.p;
    let mut level = ring.params.prec;
    for (x, y) in a.0.iter().zip(&one.0) {
        let d = (x + m - y) % m;
        if d != 0 {
            level = level.min(mvphi_core::coeff::vp(p, d));
        }
    }
    level
}

#[derive(Serialize)]
struct GammaYOut {
    index: usize,
    a: OKElement,
    sigma_a: OEInt,
    gamma_y: String,
    /// `a(Y_i) - sigma_i(a) Y_i` lies in `p m + m^p`.
    congruence_linear: bool,
    /// Largest `n` with `a` in `1 + p^n O_K`.
    principal_level: u32,
    /// `a(Y_i) - Y_i` lies in `p m + m^{p^n}`; absent when `n = 0`.
    congruence_refined: Option<bool>,
    series: TSeriesJson,
}

pub fn gamma_y(cfg: &RunConfig, a: &str, index: usize) -> Result<Outcome, CliError> {
    let params = cfg.params()?;
    check_index(&params, index)?;
    let ring = MvRing::new(&params)?;
    let unit = parse_unit(&ring, a)?;
    let sr = ring.iw.out_ring();
    let g = ring.iw.gamma_y(&unit, index)?;
    let sigma = ring.iw.sigma(&unit, index);
    let p = params.p as usize;
    let lin = sr.scale(&sr.var(index), &sigma);
    let linear = in_p_m_plus_m_pow(&sr, &sr.sub(&g, &lin), p).is_none();
    let level = principal_level(&ring, &unit);
    let refined = (level > 0).then(|| {
        let e = p.saturating_pow(level).min(params.deg + 1);
        in_p_m_plus_m_pow(&sr, &sr.sub(&g, &sr.var(index)), e).is_none()
    });
    let out = GammaYOut {
        index,
        a: unit,
        sigma_a: sigma,
        gamma_y: sr.pretty(&g, "Y"),
        congruence_linear: linear,
        principal_level: level,
        congruence_refined: refined,
        series: ring.iw.to_json(&g),
    };
    Outcome::new(&out, linear && refined != Some(false))
}

#[derive(Serialize)]
struct Generator {
    index: usize,
    digits: Vec<PerfLaurentJson>,
    /// Digit `n` is exact for `Y_0`-exponents below `known_below[n]`.
    known_below: Vec<Option<Rational>>,
    digit0_is_y: bool,
}

#[derive(Serialize)]
struct IotaOut {
    generators: Vec<Generator>,
    certificates: Vec<Vec<u32>>,
    stabilized: bool,
    fixed_point: bool,
    norm_comparison: Vec<NormCompare>,
    uncertified_samples: usize,
}

pub fn iota(cfg: &RunConfig, samples: usize) -> Result<Outcome, CliError> {
    let params = cfg.params()?;
    let ring = MvRing::new(&params)?;
    let emb = Embedding::new(&ring)?;
    let wr = WittRing::new(emb.w.perf.clone(), params.prec as usize)?;
    let mut generators = Vec::new();
    let scale = emb.w.scale();
    for (i, y) in emb.gens.y.iter().enumerate() {
        // Carries only raise exponents, so digit n is exact below the
        // smallest window among levels 0..=n.
        let exact = Laurent::new(y.terms.clone(), vec![INF; y.hi.len()]);
        let digits = wr.to_expansion(&emb.w.to_witt(&wr, &exact)?)?;
        let known_below = (0..digits.len())
            .map(|n| {
                let h = y.hi[..=n].iter().copied().min().unwrap_or(INF);
                (h < INF).then(|| Rational::from(Ratio::new(h, scale)))
            })
            .collect();
        generators.push(Generator {
            index: i,
            digit0_is_y: emb.w.digit0(&exact)? == emb.w.perf.y(i),
            digits: digits.iter().map(|d| emb.w.perf.to_json(d)).collect(),
            known_below,
        });
    }
    let certs = emb.gens.certificates.clone();
    let stabilized = certs
        .iter()
        .enumerate()
        .all(|(n, row)| row.iter().all(|&m| m as usize > n));
    let fixed_point = emb.verify_fixed_point()?;
    let mut rng = rng(cfg);
    let hi: Vec<i64> = (0..params.prec as i64)
        .map(|v| params.deg as i64 * (params.prec as i64 - v) / params.prec as i64)
        .collect();
    let mut table = Vec::new();
    let mut skipped = 0;
    for _ in 0..samples {
        let x = ring.random_element(&mut rng, 5, (-2, 6), 1, &hi);
        for s in 1..=2 {
            match emb.verify_norm_compare(&x, s) {
                Ok(c) => table.push(c),
                Err(Error::Uncertified(_)) => skipped += 1,
                Err(e) => return Err(e.into()),
            }
        }
    }
    let pass = stabilized
        && fixed_point
        && generators.iter().all(|g| g.digit0_is_y)
        && table.iter().all(|c| c.pass);
    let out = IotaOut {
        generators,
        certificates: certs,
        stabilized,
        fixed_point,
        norm_comparison: table,
        uncertified_samples: skipped,
    };
    Outcome::new(&out, pass)
}

fn sample_element(cfg: &RunConfig, ring: &MvRing, input: Option<&Path>) -> Result<Laurent, CliError> {
    match input {
        Some(path) => Ok(ring.from_json(&read_json::<MvLaurentJson>(path)?)?),
        None => {
            let params = &ring.params;
            let n = params.prec as i64;
            let hi: Vec<i64> = (0..n).map(|v| params.deg as i64 * (n - v) / n).collect();
            Ok(ring.random_element(&mut rng(cfg), 6, (-2, 6), 1, &hi))
        }
    }
}

#[derive(Serialize)]
struct NormRow {
    s: i64,
    #[serde(flatten)]
    norm: NormJson,
}

#[derive(Serialize)]
struct NormOut {
    element: MvLaurentJson,
    norms: Vec<NormRow>,
}

pub fn norm(cfg: &RunConfig, input: Option<&Path>, s: &str) -> Result<Outcome, CliError> {
    let ring = MvRing::new(&cfg.params()?)?;
    let x = sample_element(cfg, &ring, input)?;
    let radii: Vec<i64> = parse_list(s, "radius")?;
    if radii.iter().any(|&r| r <= 0) {
        return Err(CliError::Usage("radii must be positive".into()));
    }
    let norms = radii
        .iter()
        .map(|&s| NormRow {
            s,
            norm: NormJson::from(&ring.norm_s(&x, s)),
        })
        .collect();
    Outcome::new(
        &NormOut {
            element: ring.to_json(&x),
            norms,
        },
        true,
    )
}

#[derive(Serialize)]
struct Component {
    basis: Vec<i64>,
    g: MvLaurentJson,
}

#[derive(Serialize)]
struct DecomposeOut {
    element: MvLaurentJson,
    components: Vec<Component>,
    roundtrip: bool,
}

pub fn decompose(cfg: &RunConfig, input: Option<&Path>) -> Result<Outcome, CliError> {
    let ring = MvRing::new(&cfg.params()?)?;
    let mut x = sample_element(cfg, &ring, input)?;
    if input.is_none() {
        x = ring.fit_decomposable(&x)?;
    }
    let d = ring.phi_decompose(&x)?;
    let roundtrip = ring.ctx.agree(&ring.recompose(&d)?, &x);
    let components = d
        .components
        .iter()
        .map(|(a, g)| Component {
            basis: a.to_vec(),
            g: ring.to_json(g),
        })
        .collect();
    Outcome::new(
        &DecomposeOut {
            element: ring.to_json(&x),
            components,
            roundtrip,
        },
        roundtrip,
    )
}

fn load_module(
    cfg: &RunConfig,
    ring: &MvRing,
    input: Option<&Path>,
    lambda: Option<&str>,
) -> Result<PhiModule, CliError> {
    if let Some(path) = input {
        return Ok(PhiModule::from_json(ring, &read_json::<PhiModuleJson>(path)?)?);
    }
    let r = &ring.ctx.ring;
    let lam = match lambda {
        Some(s) => {
            let coords: Vec<u64> = parse_list(s, "lambda")?;
            if coords.len() > ring.params.h {
                return Err(CliError::Usage(format!("lambda has more than h = {} coordinates", ring.params.h)));
            }
            r.from_coords(&coords)
        }
        None => {
            let mut rng = rng(cfg);
            loop {
                let coords: Vec<u64> = (0..ring.params.h).map(|_| rng.gen_range(0..r.pn)).collect();
                let c = r.from_coords(&coords);
                if r.is_unit(&c) {
                    break c;
                }
            }
        }
    };
    let mut rng = rng(cfg);
    let samples: Vec<OKElement> = (0..2).map(|_| ring.random_unit(&mut rng)).collect();
    Ok(unramified_char(ring, &lam, &samples)?)
}

#[derive(Serialize)]
struct EtaleOut {
    module: PhiModuleJson,
    etale: bool,
    commutation: bool,
    integral_bound: Option<i64>,
}

pub fn etale(cfg: &RunConfig, input: Option<&Path>, lambda: Option<&str>) -> Result<Outcome, CliError> {
    let ring = MvRing::new(&cfg.params()?)?;
    let m = load_module(cfg, &ring, input, lambda)?;
    let etale = m.is_etale(&ring)?;
    let commutation = m.commutation_holds(&ring)?;
    let integral_bound = match m.integral_bound(&ring) {
        Ok(b) => Some(b),
        Err(Error::ZeroDeterminant) => None,
        Err(e) => return Err(e.into()),
    };
    Outcome::new(
        &EtaleOut {
            module: m.to_json(&ring),
            etale,
            commutation,
            integral_bound,
        },
        etale && commutation,
    )
}

pub fn oc_cert(
    cfg: &RunConfig,
    input: Option<&Path>,
    lambda: Option<&str>,
    basis: Option<&Path>,
    s: i64,
    s_max: i64,
) -> Result<Outcome, CliError> {
    if s <= 0 || s_max < s {
        return Err(CliError::Usage("need 0 < s <= s-max".into()));
    }
    let ring = MvRing::new(&cfg.params()?)?;
    let m = load_module(cfg, &ring, input, lambda)?;
    let u: Matrix = match basis {
        Some(path) => {
            let rows: Vec<Vec<MvLaurentJson>> = read_json(path)?;
            if rows.len() != m.rank || rows.iter().any(|r| r.len() != m.rank) {
                return Err(CliError::Usage("basis matrix does not match the rank".into()));
            }
            rows.iter()
                .map(|r| r.iter().map(|x| ring.from_json(x)).collect::<Result<Vec<_>, _>>())
                .collect::<Result<_, _>>()?
        }
        None => MatOps::new(&ring).identity(m.rank),
    };
    let report = oc_certificate_check(&ring, &m, &u, s, s_max)?;
    let pass = report.pass;
    Outcome::new(&report, pass)
}

#[derive(Serialize)]
struct CheckOut {
    pass: bool,
    reports: Vec<Report>,
}

pub fn check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let sc = cfg.suite_config();
    let names: Vec<&str> = match &cfg.suite {
        Some(s) => vec![s.as_str()],
        None => SUITES.to_vec(),
    };
    let reports = names
        .iter()
        .map(|n| run_suite(n, &sc))
        .collect::<Result<Vec<_>, _>>()?;
    let pass = reports.iter().all(|r| r.pass);
    Outcome::new(&CheckOut { pass, reports }, pass)
}

