//! The ring `A_mv,E` of multivariable Laurent series, its overconvergent
//! subrings, the norms `||.||_s`, the induced `phi`, `phi_q`, the
//! `O_K^x`-action, and the decomposition over `phi(A)`.

use std::collections::{BTreeMap, HashMap};

use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coeff::{OEInt, Params};
use crate::error::{Error, Result};
use crate::iwasawa::{Iwasawa, OKElement, SeriesRing, TSeries};
use crate::json::{bound_from_json, bound_to_json, Rational};
use crate::laurent::{add_keys, substitute, Images, Key, Laurent, LaurentCtx, Rule, INF};

pub type MvLaurent = Laurent;

/// `p^{-value}`; `value = None` is the zero element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormValue {
    pub value: Option<Ratio<i64>>,
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormJson {
    /// `null` encodes the zero element (norm 0, exponent `+inf`).
    pub value: Option<Rational>,
    pub certified: bool,
}

impl From<&NormValue> for NormJson {
    fn from(n: &NormValue) -> Self {
        NormJson {
            value: n.value.map(Rational::from),
            certified: n.certified,
        }
    }
}

/// Subrings with a membership test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RingTag {
    /// Power-bounded elements of `A_mv,E / pi`.
    Circ,
    /// All of `A_mv,E`.
    Full,
    /// `A^{dagger, s-}`.
    DaggerMinus(i64),
    /// Integral part of `A^{dagger, s}`; same test as `DaggerMinus`.
    DaggerIntegral(i64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Membership {
    pub holds: bool,
    /// False when the unknown tail could still change the answer.
    pub certified: bool,
}

/// Components `g_a` of `x = sum_a a phi(g_a)`, keyed by the exponent key of
/// the basis monomial `a` (all entries in `0..p`).
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub components: BTreeMap<Key, Laurent>,
}

/// One row of the local analyticity table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnalyticityRow {
    pub gamma: OKElement,
    pub generator: String,
    pub measured: NormJson,
    /// Guaranteed lower bound for the exponent of `||gamma(x) - x||_s`.
    pub lower_bound: Option<Rational>,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct MvRing {
    pub params: Params,
    pub iw: Iwasawa,
    pub ctx: LaurentCtx,
    /// `F_i = phi(Y_{sigma_i})` as Laurent elements.
    pub fi: Vec<Laurent>,
    /// Whether `F_i = Y_{sigma_{i-1}}^p mod p` within the degree window.
    pub phi_congruence: Vec<bool>,
    pub phi_images: Images,
}

impl MvRing {
    pub fn new(params: &Params) -> Result<Self> {
        let iw = Iwasawa::new(params)?;
        let ctx = LaurentCtx::new(iw.out.clone(), params.f, 1, params.band);
        let f = params.f;
        let out_sr = iw.out_ring();
        let mut fi = Vec::with_capacity(f);
        let mut phi_congruence = Vec::with_capacity(f);
        for i in 0..f {
            let s = iw.phi_y(i)?;
            let prev = (i + f - 1) % f;
            let target = out_sr.pow(&out_sr.var(prev), params.p as usize);
            let cong = out_sr
                .sub(&s, &target)
                .coeffs
                .iter()
                .all(|c| iw.out.val(c) >= 1);
            let m = params.deg as i64;
            let mut hi = vec![m; params.prec as usize];
            if cong {
                hi[0] = INF;
            }
            fi.push(series_to_laurent(&ctx, &out_sr, &s, hi)?);
            phi_congruence.push(cong);
        }
        let phi_images = images_from(&ctx, &fi, params.window)?;
        Ok(MvRing {
            params: params.clone(),
            iw,
            ctx,
            fi,
            phi_congruence,
            phi_images,
        })
    }

    pub fn p(&self) -> i64 {
        self.params.p as i64
    }

    pub fn phi_rule(&self) -> Rule {
        Rule {
            alpha: self.p(),
            beta: self.p() - 1,
        }
    }

    pub fn gamma_rule() -> Rule {
        Rule { alpha: 1, beta: 0 }
    }

    /// `Y_{sigma_i}` as an element (`Y_0 * cross_i` for `i > 0`).
    pub fn y(&self, i: usize) -> Laurent {
        let mut k = self.ctx.zero_key();
        k[0] = 1;
        if i > 0 {
            k[i] = 1;
        }
        self.ctx.monomial(k, self.ctx.ring.one())
    }

    pub fn apply_phi(&self, x: &Laurent) -> Result<Laurent> {
        substitute(x, &self.phi_images, self.phi_rule(), &self.ctx)
    }

    pub fn apply_phi_q(&self, x: &Laurent) -> Result<Laurent> {
        let mut y = x.clone();
        for _ in 0..self.params.f {
            y = self.apply_phi(&y)?;
        }
        Ok(y)
    }

    /// Images of the generators under `a in O_K^x`.
    pub fn gamma_images(&self, a: &OKElement) -> Result<Images> {
        let out_sr = self.iw.out_ring();
        let m = self.params.deg as i64;
        let gi: Vec<Laurent> = (0..self.params.f)
            .map(|i| {
                let s = self.iw.gamma_y(a, i)?;
                series_to_laurent(&self.ctx, &out_sr, &s, vec![m; self.params.prec as usize])
            })
            .collect::<Result<_>>()?;
        images_from(&self.ctx, &gi, self.params.window)
    }

    pub fn apply_gamma(&self, a: &OKElement, x: &Laurent) -> Result<Laurent> {
        let imgs = self.gamma_images(a)?;
        self.apply_gamma_with(&imgs, x)
    }

    pub fn apply_gamma_with(&self, imgs: &Images, x: &Laurent) -> Result<Laurent> {
        substitute(x, imgs, Self::gamma_rule(), &self.ctx)
    }

    pub fn invert_unit(&self, x: &Laurent) -> Result<Laurent> {
        self.ctx.invert_unit(x, self.params.window)
    }

    /// `||x||_s = p^{-value}` with `value = min (v_p(c) + n_0 / s)`.
    pub fn norm_s(&self, x: &Laurent, s: i64) -> NormValue {
        let w = self.ctx.weighted(x, Ratio::from_integer(s));
        let scale = Ratio::from_integer(s);
        NormValue {
            value: w.measured.map(|m| m / scale),
            certified: w.certified(),
        }
    }

    /// A value the exponent of `||x||_s` is guaranteed to reach.
    pub fn norm_lower_bound(&self, x: &Laurent, s: i64) -> Option<Ratio<i64>> {
        let w = self.ctx.weighted(x, Ratio::from_integer(s));
        w.lower_bound().map(|b| b / Ratio::from_integer(s))
    }

    pub fn member(&self, x: &Laurent, tag: RingTag) -> Membership {
        match tag {
            RingTag::Full => Membership {
                holds: true,
                certified: true,
            },
            RingTag::Circ => {
                let holds = self.ctx.level_terms(x, 0).all(|(k, _)| k[0] >= 0);
                Membership {
                    holds,
                    certified: !holds || x.hi[0] >= 0,
                }
            }
            RingTag::DaggerMinus(s) | RingTag::DaggerIntegral(s) => {
                let holds = x
                    .terms
                    .iter()
                    .all(|(k, c)| s * self.ctx.ring.val(c) as i64 + k[0] >= 0);
                let tail_ok = x
                    .hi
                    .iter()
                    .enumerate()
                    .all(|(v, &h)| h >= INF || s * v as i64 + h >= 0);
                Membership {
                    holds,
                    certified: !holds || tail_ok,
                }
            }
        }
    }

    /// Basis monomial of the decomposition.
    pub fn basis_monomial(&self, a: &Key) -> Laurent {
        self.ctx.monomial(a.clone(), self.ctx.ring.one())
    }

    /// All `q` basis keys `[a_0, .., a_{f-1}]` with entries in `0..p`.
    pub fn basis_keys(&self) -> Vec<Key> {
        let p = self.p();
        let f = self.params.f;
        let q = self.params.q();
        (0..q)
            .map(|mut idx| {
                let mut k = self.ctx.zero_key();
                for slot in k.iter_mut().take(f) {
                    *slot = (idx % p as u64) as i64;
                    idx /= p as u64;
                }
                k
            })
            .collect()
    }

    /// Key of `phi(m)` mod `p`: plain exponents `e -> p * rot(e)`.
    pub fn phi_key(&self, m: &Key) -> Key {
        frob_key(self.p(), m)
    }

    /// Inverse of `m -> phi_key(m) / p`.
    fn phi_key_inv_div(&self, k: &Key) -> Key {
        frob_key_inv_div(k)
    }

    /// Split `x = sum_a a phi(g_a)` by bucketing exponents mod `p` and
    /// lifting pi-adically one level at a time.
    pub fn phi_decompose(&self, x: &Laurent) -> Result<Decomposition> {
        let p = self.p();
        let (parts, res) = self.decompose_levels(x)?;
        for (k, c) in &x.terms {
            let v = self.ctx.ring.val(c) as usize;
            if k[0] >= res.hi[v] {
                return Err(Error::WindowTooSmall(format!(
                    "term at Y_0-exponent {} (level {v}) lies beyond the recomposition window {}",
                    k[0], res.hi[v]
                )));
            }
        }
        let comp_hi: Vec<i64> = res
            .hi
            .iter()
            .map(|&h| if h >= INF { INF } else { (h - (p - 1)).div_euclid(p) + i64::from((h - (p - 1)).rem_euclid(p) != 0) })
            .collect();
        let mut components = BTreeMap::new();
        for (a, terms) in parts {
            components.insert(a, self.ctx.canonical(terms, comp_hi.clone())?);
        }
        Ok(Decomposition { components })
    }

    /// Per-level windows within which `x` can be decomposed exactly.
    pub fn decomposition_window(&self, x: &Laurent) -> Result<Vec<i64>> {
        Ok(self.decompose_levels(x)?.1.hi)
    }

    /// Truncate `x` until it fits its own decomposition window.
    pub fn fit_decomposable(&self, x: &Laurent) -> Result<Laurent> {
        let mut y = x.clone();
        for _ in 0..8 {
            let hi = self.decomposition_window(&y)?;
            if y.terms.iter().all(|(k, c)| k[0] < hi[self.ctx.ring.val(c) as usize]) {
                return Ok(y);
            }
            y = self.ctx.cap_levels(&y, &hi);
        }
        Err(Error::WindowTooSmall("decomposition window did not settle".into()))
    }

    #[allow(clippy::type_complexity)]
    fn decompose_levels(&self, x: &Laurent) -> Result<(BTreeMap<Key, BTreeMap<Key, OEInt>>, Laurent)> {
        let p = self.p();
        let n = self.params.prec;
        let mut parts: BTreeMap<Key, BTreeMap<Key, OEInt>> = self
            .basis_keys()
            .into_iter()
            .map(|a| (a, BTreeMap::new()))
            .collect();
        let mut phi_cache: HashMap<Key, Laurent> = HashMap::new();
        let mut res = x.clone();
        for v in 0..n {
            let level: Vec<(Key, OEInt)> = self
                .ctx
                .level_terms(&res, v)
                .map(|(k, c)| (k.clone(), c.clone()))
                .collect();
            if level.is_empty() {
                continue;
            }
            let mut correction = self.ctx.zero();
            for (k, c) in level {
                let a: Key = k.iter().map(|e| e.rem_euclid(p)).collect();
                let q: Key = k.iter().zip(&a).map(|(e, r)| (e - r) / p).collect();
                let m = self.phi_key_inv_div(&q);
                let slot = parts.get_mut(&a).expect("all residues are basis keys");
                let entry = slot.entry(m.clone()).or_insert_with(|| self.ctx.ring.zero());
                self.ctx.ring.add_assign(entry, &c);
                let phm = match phi_cache.get(&m) {
                    Some(v) => v.clone(),
                    None => {
                        let img = self.apply_phi(&self.ctx.monomial(m.clone(), self.ctx.ring.one()))?;
                        phi_cache.insert(m.clone(), img.clone());
                        img
                    }
                };
                let t = self.ctx.shift(&self.ctx.scale_by(&phm, &c), &a)?;
                correction = self.ctx.add(&correction, &t)?;
            }
            res = self.ctx.sub(&res, &correction)?;
        }
        Ok((parts, res))
    }

    /// `sum_a a phi(g_a)`.
    pub fn recompose(&self, d: &Decomposition) -> Result<Laurent> {
        let mut acc = self.ctx.zero();
        for (a, g) in &d.components {
            let t = self.ctx.shift(&self.apply_phi(g)?, a)?;
            acc = self.ctx.add(&acc, &t)?;
        }
        Ok(acc)
    }

    /// The generators used in the local analyticity check, with names.
    pub fn analyticity_generators(&self, s: i64) -> Result<Vec<(String, Laurent)>> {
        let mut out = vec![("Y0".to_string(), self.y(0))];
        let p_over = self
            .ctx
            .scale_by(&self.ctx.y0_pow(-s), &self.ctx.ring.from_u64(self.params.p));
        out.push((format!("p/Y0^{s}"), p_over));
        for i in 1..self.params.f {
            out.push((format!("Y{i}/Y0"), self.ctx.cross(i, 1)));
        }
        Ok(out)
    }

    /// `||gamma(x) - x||_s` for each sampled `gamma` and generator, checked
    /// against `p^{-1/(p-1)}`.
    pub fn check_local_analyticity(&self, s: i64, gammas: &[OKElement]) -> Result<Vec<AnalyticityRow>> {
        let target = Ratio::new(1, self.p() - 1);
        let gens = self.analyticity_generators(s)?;
        let mut rows = Vec::new();
        for g in gammas {
            let imgs = self.gamma_images(g)?;
            for (name, x) in &gens {
                let d = self.ctx.sub(&self.apply_gamma_with(&imgs, x)?, x)?;
                let measured = self.norm_s(&d, s);
                let lb = self.norm_lower_bound(&d, s);
                let pass = lb.map_or(true, |b| b >= target);
                rows.push(AnalyticityRow {
                    gamma: g.clone(),
                    generator: name.clone(),
                    measured: NormJson::from(&measured),
                    lower_bound: lb.map(Rational::from),
                    pass,
                });
            }
        }
        Ok(rows)
    }

    /// A random element with `nterms` terms, `n_0` in `n0_range`, cross
    /// exponents in `-cross..=cross` and per-level window `hi`.
    pub fn random_element<R: Rng>(
        &self,
        rng: &mut R,
        nterms: usize,
        n0_range: (i64, i64),
        cross: i64,
        hi: &[i64],
    ) -> Laurent {
        let f = self.params.f;
        let r = &self.ctx.ring;
        let mut terms = BTreeMap::new();
        for _ in 0..nterms {
            let mut k = self.ctx.zero_key();
            k[0] = rng.gen_range(n0_range.0..=n0_range.1);
            for slot in k.iter_mut().take(f).skip(1) {
                *slot = rng.gen_range(-cross..=cross);
            }
            let coords: Vec<u64> = (0..self.params.h).map(|_| rng.gen_range(0..r.pn)).collect();
            terms.insert(k, r.from_coords(&coords));
        }
        self.ctx
            .canonical(terms, hi.to_vec())
            .expect("sampled within band")
    }

    /// A random unit of `O_K`.
    pub fn random_unit<R: Rng>(&self, rng: &mut R) -> OKElement {
        let m = self.iw.wide().pn;
        loop {
            let a = OKElement((0..self.params.f).map(|_| rng.gen_range(0..m)).collect());
            if self.iw.is_unit(&a) {
                return a;
            }
        }
    }

    /// A random element of `1 + p^n O_K`.
    pub fn random_principal_unit<R: Rng>(&self, rng: &mut R, n: u32) -> OKElement {
        let m = self.iw.wide().pn;
        let pn = self.params.p.pow(n);
        let one = self.iw.ok_from_i64(1);
        OKElement(
            one.0
                .iter()
                .map(|c| (c + pn * rng.gen_range(0..m / pn.min(m))) % m)
                .collect(),
        )
    }

    pub fn to_json(&self, x: &Laurent) -> MvLaurentJson {
        laurent_to_json(&self.ctx, x)
    }

    pub fn from_json(&self, j: &MvLaurentJson) -> Result<Laurent> {
        laurent_from_json(&self.ctx, j)
    }
}

/// Exponent map of the Frobenius lift `Y_i -> Y_{i-1}^p` on keys.
pub fn frob_key(p: i64, m: &Key) -> Key {
    let f = m.len();
    let e = plain_exponents(m);
    let mut out = m.clone();
    out[0] = p * e.iter().sum::<i64>();
    for i in 1..f {
        out[i] = p * e[(i + 1) % f];
    }
    out
}

/// Inverse of `m -> frob_key(p, m) / p`.
pub fn frob_key_inv_div(k: &Key) -> Key {
    let f = k.len();
    if f == 1 {
        return k.clone();
    }
    let mut e = vec![0i64; f];
    e[0] = k[f - 1];
    for j in 2..f {
        e[j] = k[j - 1];
    }
    e[1] = k[0] - e[0] - e[2..].iter().sum::<i64>();
    let mut m = k.clone();
    m[1..f].copy_from_slice(&e[1..f]);
    m
}

/// Plain exponents of `Y_0^{n_0} prod (Y_i/Y_0)^{n_i}` in `Y_0, .., Y_{f-1}`.
pub fn plain_exponents(k: &Key) -> Vec<i64> {
    let mut e: Vec<i64> = k.iter().copied().collect();
    e[0] = k[0] - k[1..].iter().sum::<i64>();
    e
}

/// A power series in `Y_0, .., Y_{f-1}` as a Laurent element.
pub fn series_to_laurent(ctx: &LaurentCtx, sr: &SeriesRing, s: &TSeries, hi: Vec<i64>) -> Result<Laurent> {
    let mut terms = BTreeMap::new();
    for (e, c) in sr.terms(s) {
        let mut k = ctx.zero_key();
        k[0] = e.iter().map(|&d| d as i64).sum();
        for i in 1..e.len() {
            k[i] = e[i] as i64;
        }
        terms.insert(k, ctx.ring.convert(c));
    }
    ctx.canonical(terms, hi)
}

/// Images of `Y_0^{+-1}` and the cross variables given images `g_i` of
/// every `Y_{sigma_i}`.
pub fn images_from(ctx: &LaurentCtx, g: &[Laurent], window: i64) -> Result<Images> {
    let f = g.len();
    let y0_inv = ctx.invert_unit(&g[0], window)?;
    let mut cross = vec![ctx.zero(); f];
    let mut cross_inv = vec![ctx.zero(); f];
    for i in 1..f {
        cross[i] = ctx.mul(&g[i], &y0_inv)?;
        cross_inv[i] = ctx.mul(&g[0], &ctx.invert_unit(&g[i], window)?)?;
    }
    Ok(Images {
        y0: g[0].clone(),
        y0_inv,
        cross,
        cross_inv,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MvTermJson {
    pub y0: i64,
    pub cross: Vec<i64>,
    pub coeff: OEInt,
}

/// Interchange format; `window[1]` and `level_hi` entries are `null` when
/// unbounded.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MvLaurentJson {
    pub pi_prec: u32,
    pub window: (Option<i64>, Option<i64>),
    pub band: i64,
    pub level_hi: Vec<Option<i64>>,
    pub terms: Vec<MvTermJson>,
}

pub fn laurent_to_json(ctx: &LaurentCtx, x: &Laurent) -> MvLaurentJson {
    MvLaurentJson {
        pi_prec: ctx.ring.prec,
        window: (ctx.min_n0(x), bound_to_json(x.hi[0])),
        band: ctx.band,
        level_hi: x.hi.iter().map(|&h| bound_to_json(h)).collect(),
        terms: x
            .terms
            .iter()
            .map(|(k, c)| MvTermJson {
                y0: k[0],
                cross: k[1..].to_vec(),
                coeff: c.clone(),
            })
            .collect(),
    }
}

pub fn laurent_from_json(ctx: &LaurentCtx, j: &MvLaurentJson) -> Result<Laurent> {
    if j.pi_prec != ctx.ring.prec {
        return Err(Error::Parse(format!(
            "pi_prec {} does not match working precision {}",
            j.pi_prec, ctx.ring.prec
        )));
    }
    let mut terms = BTreeMap::new();
    for t in &j.terms {
        if t.cross.len() + 1 != ctx.nvars || t.coeff.0.len() != ctx.ring.h {
            return Err(Error::Parse("term shape does not match parameters".into()));
        }
        let mut k = ctx.zero_key();
        k[0] = t.y0;
        k[1..].copy_from_slice(&t.cross);
        terms.insert(k, ctx.ring.from_coords(&t.coeff.0));
    }
    let mut hi: Vec<i64> = j.level_hi.iter().map(|&h| bound_from_json(h)).collect();
    if hi.is_empty() {
        hi = vec![bound_from_json(j.window.1); ctx.prec()];
    }
    if hi.len() != ctx.prec() {
        return Err(Error::Parse("level_hi length must equal pi_prec".into()));
    }
    ctx.canonical(terms, hi)
}

/// Sum of two keys, exported for callers building monomials.
pub fn key_add(a: &Key, b: &Key) -> Key {
    add_keys(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ring(p: u64, f: usize, h: usize, n: u32, m: usize) -> MvRing {
        MvRing::new(&Params::new(p, f, h, n, m).unwrap()).unwrap()
    }

    #[test]
    fn phi_of_y_for_p_two() {
        let r = ring(2, 1, 1, 3, 8);
        let y = r.y(0);
        let phi = r.apply_phi(&y).unwrap();
        let expect = r
            .ctx
            .add(&r.ctx.y0_pow(2), &r.ctx.scale_by(&y, &r.ctx.ring.from_u64(2)))
            .unwrap();
        assert!(r.ctx.agree(&phi, &expect));
        assert_eq!(phi.terms.len(), 2);
        assert_eq!(r.apply_phi(&r.ctx.one()).unwrap(), r.ctx.one());
    }

    #[test]
    fn norm_examples() {
        let r = ring(3, 2, 2, 3, 8);
        for s in 1..4 {
            let n = r.norm_s(&r.y(0), s);
            assert_eq!(n.value, Some(Ratio::new(1, s)));
            assert!(n.certified);
            let x = r.ctx.scale_by(&r.ctx.y0_pow(-s), &r.ctx.ring.from_u64(3));
            assert_eq!(r.norm_s(&x, s).value, Some(Ratio::from_integer(0)));
            assert_eq!(r.norm_s(&r.ctx.cross(1, 1), s).value, Some(Ratio::from_integer(0)));
        }
    }

    #[test]
    fn membership_examples() {
        let r = ring(3, 1, 1, 3, 8);
        for s in 1..4 {
            let good = r.ctx.scale_by(&r.ctx.y0_pow(-s), &r.ctx.ring.from_u64(3));
            let bad = r.ctx.scale_by(&r.ctx.y0_pow(-s - 1), &r.ctx.ring.from_u64(3));
            assert!(r.member(&good, RingTag::DaggerMinus(s)).holds);
            assert!(!r.member(&bad, RingTag::DaggerMinus(s)).holds);
        }
        assert!(!r.member(&r.ctx.y0_pow(-1), RingTag::Circ).holds);
        assert!(r.member(&r.y(0), RingTag::Circ).holds);
    }

    #[test]
    fn decomposition_examples() {
        let r = ring(3, 2, 2, 1, 10);
        let d = r.phi_decompose(&r.y(0)).unwrap();
        for (a, g) in &d.components {
            if a[0] == 1 && a[1] == 0 {
                assert_eq!(*g, r.ctx.one());
            } else {
                assert!(g.terms.is_empty());
            }
        }
        let d = r.phi_decompose(&r.ctx.y0_pow(3)).unwrap();
        let zero_key = r.ctx.zero_key();
        assert!(r.ctx.agree(&d.components[&zero_key], &r.y(1)));
    }

    #[test]
    fn decomposition_roundtrip_small() {
        let r = ring(3, 1, 1, 3, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let x = r.random_element(&mut rng, 6, (-1, 4), 0, &[6, 5, 4]);
            let d = r.phi_decompose(&x).unwrap();
            let back = r.recompose(&d).unwrap();
            assert!(r.ctx.agree(&back, &x));
        }
    }

    #[test]
    fn gamma_trivial_and_norms() {
        let r = ring(3, 1, 1, 3, 10);
        let one = r.iw.ok_from_i64(1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = r.random_element(&mut rng, 4, (-2, 3), 0, &[8, 8, 8]);
        let gx = r.apply_gamma(&one, &x).unwrap();
        assert!(r.ctx.agree(&gx, &x));
        let rows = r.check_local_analyticity(1, &[one]).unwrap();
        assert!(rows.iter().all(|row| row.pass && row.measured.value.is_none()));
    }

    #[test]
    fn json_roundtrip() {
        let r = ring(3, 2, 2, 2, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = r.random_element(&mut rng, 5, (-2, 3), 2, &[5, 5]);
        let j = r.to_json(&x);
        let text = serde_json::to_string(&j).unwrap();
        let back: MvLaurentJson = serde_json::from_str(&text).unwrap();
        assert_eq!(r.from_json(&back).unwrap(), x);
    }
}
