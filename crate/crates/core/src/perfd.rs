//! Truncated perfectoid Laurent rings over the residue field, the radius
//! norms `|.|_r` on their Witt vectors, and `[0, r]` membership.

use std::collections::BTreeMap;

use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::coeff::{CoeffRing, Fe, OEInt, Params};
use crate::error::{Error, Result};
use crate::json::Rational;
use crate::laurent::{Key, Laurent, LaurentCtx, INF};
use crate::mvring::{frob_key, frob_key_inv_div, NormValue};
use crate::witt::{PerfectRing, WittRing, WittVec};

/// `F[Y_0^{1/p^k}, (Y_i/Y_0)^{+-1/p^k}][1/Y_0]` with exact terms.
/// With one variable this is the Lubin-Tate tilt `F((T^{1/p^inf}))`.
#[derive(Clone, Debug)]
pub struct PerfCtx {
    pub p: u64,
    pub depth: u32,
    pub ctx: LaurentCtx,
}

impl PerfCtx {
    pub fn new(params: &Params, nvars: usize, depth: u32) -> Result<Self> {
        let scale = params
            .p
            .checked_pow(depth)
            .filter(|s| *s < (1 << 40))
            .ok_or_else(|| Error::InvalidParams(format!("depth {depth} too large")))?;
        let ring = CoeffRing::with_prec(params, 1);
        Ok(PerfCtx {
            p: params.p,
            depth,
            ctx: LaurentCtx::new(ring, nvars, scale as i64, INF),
        })
    }

    /// The one-variable tilt with pseudo-uniformizer `T`.
    pub fn lubin_tate(params: &Params, depth: u32) -> Result<Self> {
        Self::new(params, 1, depth)
    }

    pub fn scale(&self) -> i64 {
        self.ctx.scale
    }

    pub fn nvars(&self) -> usize {
        self.ctx.nvars
    }

    fn to_units(&self, r: Ratio<i64>) -> Result<i64> {
        let x = r * Ratio::from_integer(self.scale());
        if x.is_integer() {
            Ok(x.to_integer())
        } else {
            Err(Error::DepthExhausted(format!(
                "exponent {r} is not in p^-{} Z",
                self.depth
            )))
        }
    }

    /// `c Y_0^{r_0} prod (Y_i / Y_0)^{r_i}`.
    pub fn monomial(&self, exps: &[Ratio<i64>], c: &Fe) -> Result<Laurent> {
        let mut key = self.ctx.zero_key();
        for (k, r) in key.iter_mut().zip(exps) {
            *k = self.to_units(*r)?;
        }
        Ok(self.ctx.monomial(key, self.ctx.ring.lift(c)))
    }

    /// `Y_i`.
    pub fn y(&self, i: usize) -> Laurent {
        let mut key = self.ctx.zero_key();
        key[0] = self.scale();
        if i > 0 {
            key[i] = self.scale();
        }
        self.ctx.monomial(key, self.ctx.ring.one())
    }

    /// `Y_0^{r}` for rational `r`.
    pub fn y0_pow(&self, r: Ratio<i64>) -> Result<Laurent> {
        Ok(self.ctx.y0_pow(self.to_units(r)?))
    }

    /// Embed an integral-exponent element (reduced mod `p`).
    pub fn from_integral(&self, x: &Laurent) -> Laurent {
        let mut terms = BTreeMap::new();
        for (k, c) in &x.terms {
            let c = self.ctx.ring.convert(c);
            if self.ctx.ring.is_zero(&c) {
                continue;
            }
            terms.insert(k.iter().map(|e| e * self.scale()).collect(), c);
        }
        Laurent::new(terms, vec![INF])
    }

    pub fn gauss_val(&self, x: &Laurent) -> Option<Ratio<i64>> {
        self.ctx
            .min_n0(x)
            .map(|n| Ratio::new(n, self.scale()))
    }

    fn map_keys(&self, x: &Laurent, f: impl Fn(&Key) -> Result<Key>, coeff: impl Fn(&OEInt) -> OEInt) -> Result<Laurent> {
        let mut terms = BTreeMap::new();
        for (k, c) in &x.terms {
            terms.insert(f(k)?, coeff(c));
        }
        Ok(Laurent::new(terms, vec![INF]))
    }

    fn div_key(&self, k: &Key) -> Result<Key> {
        let p = self.p as i64;
        if k.iter().any(|e| e % p != 0) {
            return Err(Error::DepthExhausted(format!(
                "exponent {k:?} has no p-th root at depth {}",
                self.depth
            )));
        }
        Ok(k.iter().map(|e| e / p).collect())
    }

    /// `Y_i -> Y_{i-1}^p`, linear over the residue field.
    pub fn phi_ainf(&self, x: &Laurent) -> Laurent {
        let p = self.p as i64;
        self.map_keys(x, |k| Ok(frob_key(p, k)), |c| c.clone())
            .expect("infallible")
    }

    pub fn phi_ainf_inv(&self, x: &Laurent) -> Result<Laurent> {
        self.map_keys(x, |k| Ok(frob_key_inv_div(&self.div_key(k)?)), |c| c.clone())
    }

    pub fn to_json(&self, x: &Laurent) -> PerfLaurentJson {
        let s = self.scale();
        PerfLaurentJson {
            depth: self.depth,
            terms: x
                .terms
                .iter()
                .map(|(k, c)| PerfTermJson {
                    y0: Ratio::new(k[0], s).into(),
                    cross: k[1..].iter().map(|&e| Ratio::new(e, s).into()).collect(),
                    coeff: self.ctx.ring.reduce(c),
                })
                .collect(),
        }
    }

    pub fn from_json(&self, j: &PerfLaurentJson) -> Result<Laurent> {
        let mut out = self.ctx.zero();
        for t in &j.terms {
            if t.cross.len() + 1 != self.nvars() {
                return Err(Error::Parse("term shape does not match parameters".into()));
            }
            let mut exps = vec![Ratio::try_from(t.y0)?];
            for r in &t.cross {
                exps.push(Ratio::try_from(*r)?);
            }
            out = self.ctx.add(&out, &self.monomial(&exps, &t.coeff)?)?;
        }
        Ok(out)
    }
}

impl PerfectRing for PerfCtx {
    type Elem = Laurent;

    fn p(&self) -> u64 {
        self.p
    }
    fn zero(&self) -> Laurent {
        self.ctx.zero()
    }
    fn one(&self) -> Laurent {
        self.ctx.one()
    }
    fn from_int(&self, n: i64) -> Laurent {
        self.ctx.constant(self.ctx.ring.from_i64(n))
    }
    fn add(&self, x: &Laurent, y: &Laurent) -> Laurent {
        self.ctx.add(x, y).expect("exact terms have no band")
    }
    fn neg(&self, x: &Laurent) -> Laurent {
        self.ctx.neg(x)
    }
    fn mul(&self, x: &Laurent, y: &Laurent) -> Laurent {
        self.ctx.mul(x, y).expect("exact terms have no band")
    }
    fn frobenius(&self, x: &Laurent) -> Laurent {
        let p = self.p as i64;
        self.map_keys(
            x,
            |k| Ok(k.iter().map(|e| e * p).collect()),
            |c| self.ctx.ring.frobenius(c),
        )
        .expect("infallible")
    }
    fn pth_root(&self, x: &Laurent) -> Result<Laurent> {
        let h = self.ctx.ring.h;
        self.map_keys(x, |k| self.div_key(k), |c| self.ctx.ring.frobenius_pow(c, h - 1))
    }
    fn is_zero(&self, x: &Laurent) -> bool {
        x.terms.is_empty()
    }
    fn gauss_val(&self, x: &Laurent) -> Option<Ratio<i64>> {
        PerfCtx::gauss_val(self, x)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerfTermJson {
    pub y0: Rational,
    pub cross: Vec<Rational>,
    pub coeff: Fe,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerfLaurentJson {
    pub depth: u32,
    pub terms: Vec<PerfTermJson>,
}

/// `w [Y_0]^{-shift}` viewed in `B_{[0, r]}`.
#[derive(Clone, Debug)]
pub struct BElt {
    pub w: WittVec<Laurent>,
    pub radius: Ratio<i64>,
    pub shift: Ratio<i64>,
}

impl BElt {
    pub fn new(w: WittVec<Laurent>, radius: Ratio<i64>) -> Result<Self> {
        if radius <= Ratio::zero() {
            return Err(Error::InvalidParams("radius must be positive".into()));
        }
        Ok(BElt {
            w,
            radius,
            shift: Ratio::zero(),
        })
    }

    pub fn with_shift(mut self, shift: Ratio<i64>) -> Self {
        self.shift = shift;
        self
    }
}

/// `min_n (gauss(d_n) + n / r) - shift`. Certified when below `N / r - shift`,
/// the least value an unrepresented integral digit could contribute.
pub fn b_val_r(wr: &WittRing<PerfCtx>, b: &BElt) -> Result<NormValue> {
    let measured = wr.b_val(&b.w, b.radius)?.map(|v| v - b.shift);
    let bound = Ratio::from_integer(wr.n as i64) / b.radius - b.shift;
    Ok(NormValue {
        value: measured,
        certified: measured.is_some_and(|m| m < bound),
    })
}

/// `|d_n| p^{-n/r} <= 1` for every digit after the shift.
pub fn member_b0r(wr: &WittRing<PerfCtx>, b: &BElt) -> Result<bool> {
    let digits = wr.to_expansion(&b.w)?;
    let r = b.radius;
    Ok(digits.iter().enumerate().all(|(n, d)| {
        wr.base
            .gauss_val(d)
            .is_none_or(|g| g + Ratio::from_integer(n as i64) / r - b.shift >= Ratio::zero())
    }))
}

/// Radius `(p - 1) / ((q - 1) p^i) r` attached to the `i`-th factor.
pub fn pr_radius(p: u64, f: usize, i: usize, r: Ratio<i64>) -> Result<Ratio<i64>> {
    if i >= f || r <= Ratio::zero() {
        return Err(Error::InvalidParams(format!("need 0 <= i < f and r > 0, got i={i}, r={r}")));
    }
    let q = (p as i64).pow(f as u32);
    let pi = (p as i64).pow(i as u32);
    Ok(Ratio::new(p as i64 - 1, (q - 1) * pi) * r)
}

/// `phi_q` on digits: the `f`-fold composite of `phi_ainf`.
pub fn phi_q_digits(pc: &PerfCtx, x: &Laurent, f: usize) -> Laurent {
    let mut y = x.clone();
    for _ in 0..f {
        y = pc.phi_ainf(&y);
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::FiniteField;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r(a: i64, b: i64) -> Ratio<i64> {
        Ratio::new(a, b)
    }

    fn random_perf(pc: &PerfCtx, field: &FiniteField, rng: &mut ChaCha8Rng, nterms: usize, lo: i64) -> Laurent {
        let mut x = pc.ctx.zero();
        for _ in 0..nterms {
            let mut exps = vec![r(rng.gen_range(lo..6), pc.p as i64)];
            for _ in 1..pc.nvars() {
                exps.push(r(rng.gen_range(-2..3), pc.p as i64));
            }
            let c = field.from_index(rng.gen_range(1..field.size()));
            x = pc.ctx.add(&x, &pc.monomial(&exps, &c).unwrap()).unwrap();
        }
        x
    }

    #[test]
    fn gauss_examples_and_phi() {
        let params = Params::new(3, 2, 2, 3, 4).unwrap();
        let pc = PerfCtx::new(&params, 2, 4).unwrap();
        assert_eq!(pc.gauss_val(&pc.y(0)), Some(r(1, 1)));
        let cross = pc.ctx.cross(1, pc.scale());
        assert_eq!(pc.gauss_val(&cross), Some(r(0, 1)));
        assert_eq!(pc.gauss_val(&pc.y0_pow(r(1, 3)).unwrap()), Some(r(1, 3)));
        assert_eq!(pc.gauss_val(&pc.ctx.zero()), None);
        let y0p = pc.ctx.pow(&pc.y(0), 3).unwrap();
        assert_eq!(pc.phi_ainf(&pc.y(1)), y0p);
        assert_eq!(pc.phi_ainf_inv(&y0p).unwrap(), pc.y(1));
        let deep = pc.y0_pow(r(1, 81)).unwrap();
        assert!(matches!(pc.phi_ainf_inv(&deep), Err(Error::DepthExhausted(_))));
        let field = FiniteField::new(&params);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let x = random_perf(&pc, &field, &mut rng, 4, 0);
            let g = pc.gauss_val(&x).unwrap();
            assert_eq!(pc.gauss_val(&pc.phi_ainf(&x)), Some(g * 3));
            assert_eq!(pc.phi_ainf_inv(&pc.phi_ainf(&x)).unwrap(), x);
            let root = pc.pth_root(&x).unwrap();
            assert_eq!(pc.frobenius(&root), x);
            assert_eq!(PerfectRing::pow(&pc, &root, 3), x);
            let y = random_perf(&pc, &field, &mut rng, 3, -2);
            let gy = pc.gauss_val(&y).unwrap();
            assert_eq!(pc.gauss_val(&pc.ctx.mul(&x, &y).unwrap()), Some(g + gy));
        }
    }

    #[test]
    fn radius_formula() {
        assert_eq!(pr_radius(3, 1, 0, r(5, 7)).unwrap(), r(5, 7));
        assert_eq!(pr_radius(3, 2, 1, r(1, 1)).unwrap(), r(1, 12));
        assert_eq!(pr_radius(5, 2, 0, r(1, 1)).unwrap(), r(4, 24));
        assert!(pr_radius(3, 2, 2, r(1, 1)).is_err());
    }

    #[test]
    fn membership_boundary() {
        let params = Params::new(3, 1, 1, 2, 4).unwrap();
        let pc = PerfCtx::lubin_tate(&params, 3).unwrap();
        let wr = WittRing::new(pc.clone(), 2).unwrap();
        let one = wr.base.one();
        let pi = wr.from_expansion(&[wr.base.zero(), one.clone()]);
        for s in 1..4 {
            let at = BElt::new(pi.clone(), r(1, s)).unwrap().with_shift(r(s, 1));
            assert!(member_b0r(&wr, &at).unwrap());
            assert_eq!(b_val_r(&wr, &at).unwrap().value, Some(r(0, 1)));
            let past = BElt::new(pi.clone(), r(1, s)).unwrap().with_shift(r(s + 1, 1));
            assert!(!member_b0r(&wr, &past).unwrap());
        }
        let t = BElt::new(wr.teich(&pc.y(0)), r(2, 1)).unwrap();
        assert_eq!(b_val_r(&wr, &t).unwrap().value, Some(r(1, 1)));
        assert!(member_b0r(&wr, &t).unwrap());
        let pone = BElt::new(pi, r(2, 1)).unwrap();
        assert_eq!(b_val_r(&wr, &pone).unwrap().value, Some(r(1, 2)));
    }

    #[test]
    fn teichmuller_is_multiplicative_over_perfectoid_ring() {
        let params = Params::new(3, 2, 2, 3, 4).unwrap();
        let pc = PerfCtx::new(&params, 2, 3).unwrap();
        let field = FiniteField::new(&params);
        let wr = WittRing::new(pc.clone(), 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let x = random_perf(&pc, &field, &mut rng, 3, -1);
            let y = random_perf(&pc, &field, &mut rng, 3, -1);
            let lhs = wr.mul(&wr.teich(&x), &wr.teich(&y));
            assert_eq!(lhs, wr.teich(&pc.ctx.mul(&x, &y).unwrap()));
        }
    }

    #[test]
    fn json_round_trip() {
        let params = Params::new(5, 2, 2, 3, 4).unwrap();
        let pc = PerfCtx::new(&params, 2, 2).unwrap();
        let field = FiniteField::new(&params);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_perf(&pc, &field, &mut rng, 5, -3);
        let j = pc.to_json(&x);
        let text = serde_json::to_string(&j).unwrap();
        let back: PerfLaurentJson = serde_json::from_str(&text).unwrap();
        assert_eq!(pc.from_json(&back).unwrap(), x);
    }
}
