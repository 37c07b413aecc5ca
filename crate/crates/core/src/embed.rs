//! The embedding of the multivariable ring into Witt vectors of the
//! perfectoid ring, computed by fixpoint iteration.
//!
//! Elements of `W_{O_E}(A_inf) / p^N` are handled in the monoid model:
//! finite sums `sum_a c_a [Y^a]` with `c_a in O_E / p^N` and exponents in
//! `p^{-k} Z`, stored as [`Laurent`] elements with `scale = p^k`. The Witt
//! Frobenius induced by the residue-linear `phi` of the perfectoid ring only
//! moves exponents, and `|.|_r` is the weighted monomial valuation with weight
//! `1 / r` per power of `p`. Conversions to and from Witt coordinates are
//! provided for cross-checks on small inputs.

use std::collections::BTreeMap;

use num_rational::Ratio;
use rand::Rng;
use serde::Serialize;

use crate::coeff::{CoeffRing, Params};
use crate::error::{Error, Result};
use crate::laurent::{substitute, Floor, Images, Key, Laurent, LaurentCtx, Rule, INF};
use crate::mvring::{frob_key, frob_key_inv_div, images_from, MvRing, NormValue};
use crate::perfd::PerfCtx;
use crate::witt::{PerfectRing, WittRing, WittVec};

/// `W_{O_E}(A_inf) / p^N` in the monoid model.
#[derive(Clone, Debug)]
pub struct WModel {
    pub params: Params,
    pub ctx: LaurentCtx,
    pub perf: PerfCtx,
}

impl WModel {
    pub fn new(params: &Params) -> Result<Self> {
        let perf = PerfCtx::new(params, params.f, params.depth)?;
        let scale = perf.scale();
        let band = params
            .band
            .checked_mul(scale)
            .ok_or_else(|| Error::InvalidParams("band too large for the depth".into()))?;
        let ctx = LaurentCtx::new(CoeffRing::new(params), params.f, scale, band);
        Ok(WModel {
            params: params.clone(),
            ctx,
            perf,
        })
    }

    pub fn scale(&self) -> i64 {
        self.ctx.scale
    }

    fn p(&self) -> i64 {
        self.params.p as i64
    }

    /// `[Y_i]`.
    pub fn teich_y(&self, i: usize) -> Laurent {
        let mut key = self.ctx.zero_key();
        key[0] = self.scale();
        if i > 0 {
            key[i] = self.scale();
        }
        self.ctx.monomial(key, self.ctx.ring.one())
    }

    /// Source errors carried through substitution of `O[[Y]]` exponents:
    /// a monomial of degree `d` lands in `[Y]^d (1 + (p / [Y]) W(A_inf^{oo}))`.
    pub fn iota_rule(&self) -> Rule {
        Rule {
            alpha: self.scale(),
            beta: self.scale(),
        }
    }

    /// Witt functoriality of `Y_i -> Y_{i-1}^p`.
    pub fn phi(&self, x: &Laurent) -> Result<Laurent> {
        let p = self.p();
        let terms: BTreeMap<Key, _> = x
            .terms
            .iter()
            .map(|(k, c)| (frob_key(p, k), c.clone()))
            .collect();
        let hi = x
            .hi
            .iter()
            .map(|&h| if h >= INF { INF } else { h * p })
            .collect();
        self.ctx.canonical_with(terms, hi, x.floor.transport(p, 0))
    }

    pub fn phi_inv(&self, x: &Laurent) -> Result<Laurent> {
        let p = self.p();
        let mut terms = BTreeMap::new();
        for (k, c) in &x.terms {
            if k.iter().any(|e| e % p != 0) {
                return Err(Error::DepthExhausted(format!(
                    "exponent {k:?} has no p-th root at depth {}",
                    self.params.depth
                )));
            }
            let div: Key = k.iter().map(|e| e / p).collect();
            terms.insert(frob_key_inv_div(&div), c.clone());
        }
        let hi = x
            .hi
            .iter()
            .map(|&h| if h >= INF { INF } else { h.div_euclid(p) + i64::from(h.rem_euclid(p) != 0) })
            .collect();
        let f = x.floor;
        let floor = Floor {
            lo: if f.lo >= INF { INF } else { f.lo.div_euclid(p) },
            slope: f.slope.div_euclid(p) + i64::from(f.slope.rem_euclid(p) != 0),
        };
        self.ctx.canonical_with(terms, hi, floor)
    }

    pub fn phi_q(&self, x: &Laurent) -> Result<Laurent> {
        let mut y = x.clone();
        for _ in 0..self.params.f {
            y = self.phi(&y)?;
        }
        Ok(y)
    }

    /// Reduction mod `p`, which is the zeroth Teichmüller digit.
    pub fn digit0(&self, x: &Laurent) -> Result<Laurent> {
        if x.hi[0] < INF {
            return Err(Error::PrecisionExhausted(
                "digit 0 is only known inside a window".into(),
            ));
        }
        self.ctx.convert(x, &self.perf.ctx)
    }

    /// `|x|_r = p^{-value}` with `value = min (v_p(c) / r + gauss)`.
    pub fn b_val(&self, x: &Laurent, r: Ratio<i64>) -> NormValue {
        let w = self.ctx.weighted(x, Ratio::from_integer(1) / r);
        NormValue {
            value: w.measured,
            certified: w.certified(),
        }
    }

    /// Witt coordinates of an exactly known element.
    pub fn to_witt(&self, wr: &WittRing<PerfCtx>, x: &Laurent) -> Result<WittVec<Laurent>> {
        if x.hi.iter().any(|&h| h < INF) {
            return Err(Error::PrecisionExhausted("element is not exact".into()));
        }
        let mut acc = wr.zero();
        for (k, c) in &x.terms {
            for (n, d) in self.ctx.ring.teich_digits(c).iter().enumerate().take(wr.n) {
                let digit = self.perf.ctx.monomial(k.clone(), self.perf.ctx.ring.lift(d));
                if digit.terms.is_empty() {
                    continue;
                }
                let mut coords = vec![wr.base.zero(); wr.n];
                let mut v = digit;
                for _ in 0..n {
                    v = wr.base.frobenius(&v);
                }
                coords[n] = v;
                acc = wr.add(&acc, &WittVec { coords });
            }
        }
        Ok(acc)
    }

    /// `sum_n p^n [d_n]`, with `[d] = lift(d^{1/p^{N-1}})^{p^{N-1}}`.
    pub fn from_witt(&self, wr: &WittRing<PerfCtx>, u: &WittVec<Laurent>) -> Result<Laurent> {
        let digits = wr.to_expansion(u)?;
        let n = self.params.prec;
        let mut acc = self.ctx.zero();
        for (j, d) in digits.iter().enumerate().take(n as usize) {
            let mut root = d.clone();
            for _ in 1..n {
                root = wr.base.pth_root(&root)?;
            }
            let lift = Laurent::new(root.terms.clone(), vec![INF; n as usize]);
            let t = self.ctx.pow(&lift, self.params.p.pow(n - 1))?;
            let c = self.ctx.ring.mul_p_pow(&self.ctx.ring.one(), j as u32);
            acc = self.ctx.add(&acc, &self.ctx.scale_by(&t, &c))?;
        }
        Ok(acc)
    }
}

/// Largest `m <= N` with `x = y mod p^m` inside the known windows.
pub fn agreement(ctx: &LaurentCtx, x: &Laurent, y: &Laurent) -> Result<u32> {
    let d = ctx.sub(x, y)?;
    Ok(d.terms
        .values()
        .map(|c| ctx.ring.val(c))
        .min()
        .unwrap_or(ctx.ring.prec)
        .min(ctx.ring.prec))
}

/// The generators `y_i = iota(Y_i)`.
#[derive(Clone, Debug)]
pub struct IotaResult {
    pub y: Vec<Laurent>,
    pub iterations: usize,
    /// `certificates[n - 1][i]`: the power of `p` modulo which step `n`
    /// agreed with step `n - 1`.
    pub certificates: Vec<Vec<u32>>,
    pub images: Images,
}

/// Comparison of `s ||x||_s` with `|iota(x)|_{1/s}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NormCompare {
    pub s: i64,
    pub lhs: Option<crate::json::Rational>,
    pub rhs: Option<crate::json::Rational>,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct Embedding {
    pub mv: MvRing,
    pub w: WModel,
    pub gens: IotaResult,
}

impl Embedding {
    pub fn new(mv: &MvRing) -> Result<Self> {
        let w = WModel::new(&mv.params)?;
        let seed: Vec<Laurent> = (0..mv.params.f).map(|i| w.teich_y(i)).collect();
        let gens = iota_generators(mv, &w, seed)?;
        Ok(Embedding {
            mv: mv.clone(),
            w,
            gens,
        })
    }

    pub fn iota(&self, x: &Laurent) -> Result<Laurent> {
        substitute(x, &self.gens.images, self.w.iota_rule(), &self.w.ctx)
    }

    /// `s ||x||_s = |iota(x)|_{1/s}`; `Uncertified` if either side is.
    pub fn verify_norm_compare(&self, x: &Laurent, s: i64) -> Result<NormCompare> {
        let lhs = self.mv.norm_s(x, s);
        let rhs = self.w.b_val(&self.iota(x)?, Ratio::new(1, s));
        if !lhs.certified || !rhs.certified {
            return Err(Error::Uncertified(format!(
                "norm comparison at s={s}: source certified={}, image certified={}",
                lhs.certified, rhs.certified
            )));
        }
        let lhs_v = lhs.value.map(|v| v * s);
        Ok(NormCompare {
            s,
            lhs: lhs_v.map(Into::into),
            rhs: rhs.value.map(Into::into),
            pass: lhs_v == rhs.value,
        })
    }

    /// `phi(iota(x)) = iota(phi(x))` at the common precision.
    pub fn verify_phi_equivariance(&self, x: &Laurent) -> Result<bool> {
        let lhs = self.w.phi(&self.iota(x)?)?;
        let rhs = self.iota(&self.mv.apply_phi(x)?)?;
        Ok(self.w.ctx.agree(&lhs, &rhs))
    }

    pub fn verify_phi_q_equivariance(&self, x: &Laurent) -> Result<bool> {
        let lhs = self.w.phi_q(&self.iota(x)?)?;
        let rhs = self.iota(&self.mv.apply_phi_q(x)?)?;
        Ok(self.w.ctx.agree(&lhs, &rhs))
    }

    /// `phi(y_i) = F_i(y_0, .., y_{f-1})` for every generator.
    pub fn verify_fixed_point(&self) -> Result<bool> {
        for (i, y) in self.gens.y.iter().enumerate() {
            let lhs = self.w.phi(y)?;
            let rhs = self.iota(&self.mv.fi[i])?;
            if !self.w.ctx.agree(&lhs, &rhs) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Seed `[Y_i] + p c [Y_0^{1 + 1/p}]` with random residues `c`.
    pub fn perturbed_seed<R: Rng>(&self, rng: &mut R) -> Vec<Laurent> {
        let field = self.w.ctx.ring.residue_field();
        let p = self.w.ctx.ring.p;
        (0..self.mv.params.f)
            .map(|i| {
                let mut key = self.w.ctx.zero_key();
                key[0] = self.w.scale() + self.w.scale() / p as i64;
                let c = field.from_index(rng.gen_range(1..field.size()));
                let c = self.w.ctx.ring.mul_p_pow(&self.w.ctx.ring.lift(&c), 1);
                let bump = self.w.ctx.monomial(key, c);
                self.w.ctx.add(&self.w.teich_y(i), &bump).expect("small exponents")
            })
            .collect()
    }
}

/// Run `y^{(n)} = phi^{-1}(F(y^{(n-1)}))` for `n = 1..N-1`, checking
/// `y^{(n)} = y^{(n-1)} mod p^n` at each step.
pub fn iota_generators(mv: &MvRing, w: &WModel, seed: Vec<Laurent>) -> Result<IotaResult> {
    let f = mv.params.f;
    let n_steps = mv.params.prec as usize - 1;
    let window = mv.params.window.saturating_mul(w.scale());
    let mut y = seed;
    let mut certificates = Vec::with_capacity(n_steps);
    for step in 1..=n_steps {
        let imgs = images_from(&w.ctx, &y, window)?;
        let mut next = Vec::with_capacity(f);
        let mut cert = Vec::with_capacity(f);
        for i in 0..f {
            let fy = substitute(&mv.fi[i], &imgs, w.iota_rule(), &w.ctx)?;
            let yi = w.phi_inv(&fy)?;
            let m = agreement(&w.ctx, &yi, &y[i])?;
            if (m as usize) < step {
                return Err(Error::StabilizationFailure {
                    step,
                    index: i,
                    detail: format!("agreement only modulo p^{m}"),
                });
            }
            cert.push(m);
            next.push(yi);
        }
        certificates.push(cert);
        y = next;
    }
    // y_i / [Y_i] lies in 1 + (p / [Y_i]) W(A_inf^oo).
    for yi in &mut y {
        yi.floor = Floor {
            lo: w.scale(),
            slope: w.scale(),
        };
    }
    let images = images_from(&w.ctx, &y, window)?;
    Ok(IotaResult {
        y,
        iterations: n_steps,
        certificates,
        images,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(p: u64, f: usize, h: usize, n: u32, m: usize) -> Embedding {
        let params = Params::new(p, f, h, n, m).unwrap();
        let mv = MvRing::new(&params).unwrap();
        Embedding::new(&mv).unwrap()
    }

    #[test]
    fn two_adic_first_step() {
        let params = Params::new(2, 1, 1, 2, 8).unwrap();
        let mv = MvRing::new(&params).unwrap();
        let w = WModel::new(&params).unwrap();
        let e = iota_generators(&mv, &w, vec![w.teich_y(0)]).unwrap();
        let s = w.scale();
        let mut expect = BTreeMap::new();
        expect.insert(Key::from_slice(&[s]), w.ctx.ring.one());
        expect.insert(Key::from_slice(&[s / 2]), w.ctx.ring.from_u64(2));
        assert_eq!(e.y[0].terms, expect);
        assert_eq!(e.certificates, vec![vec![1]]);
    }

    #[test]
    fn generators_have_teichmuller_digit_zero() {
        for (p, f, h) in [(3, 1, 1), (3, 2, 2)] {
            let emb = setup(p, f, h, 3, 12);
            for i in 0..f {
                let d0 = emb.w.digit0(&emb.gens.y[i]).unwrap();
                assert_eq!(d0, emb.w.perf.y(i));
            }
            assert!(emb.verify_fixed_point().unwrap());
            let one = emb.iota(&emb.mv.ctx.one()).unwrap();
            assert_eq!(one, emb.w.ctx.one());
        }
    }

    #[test]
    fn norm_comparison_examples() {
        let emb = setup(3, 2, 2, 3, 12);
        let ctx = &emb.mv.ctx;
        for s in 1..4 {
            let c = emb.verify_norm_compare(&emb.mv.y(0), s).unwrap();
            assert!(c.pass);
            let p_over = ctx.scale_by(&ctx.y0_pow(-s), &ctx.ring.from_u64(3));
            let c = emb.verify_norm_compare(&p_over, s).unwrap();
            assert!(c.pass);
            assert_eq!(c.lhs, Some(Ratio::from_integer(0).into()));
            let cross = emb.verify_norm_compare(&ctx.cross(1, 1), s).unwrap();
            assert!(cross.pass);
        }
    }

    #[test]
    fn perturbed_seed_converges_to_same_generators() {
        let emb = setup(3, 1, 1, 3, 12);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let seed = emb.perturbed_seed(&mut rng);
        let other = iota_generators(&emb.mv, &emb.w, seed).unwrap();
        for i in 0..emb.mv.params.f {
            assert!(emb.w.ctx.agree(&other.y[i], &emb.gens.y[i]));
        }
    }

    #[test]
    fn monoid_model_matches_witt_route() {
        let params = Params::new(3, 1, 1, 2, 6).unwrap();
        let w = WModel::new(&params).unwrap();
        let wr = WittRing::new(w.perf.clone(), 2).unwrap();
        let s = w.scale();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let random = |rng: &mut ChaCha8Rng| {
            let mut x = w.ctx.zero();
            for _ in 0..3 {
                let key = Key::from_slice(&[rng.gen_range(0..4) * s / 3]);
                let c = w.ctx.ring.from_u64(rng.gen_range(1..9));
                x = w.ctx.add(&x, &w.ctx.monomial(key, c)).unwrap();
            }
            x
        };
        for _ in 0..8 {
            let (x, y) = (random(&mut rng), random(&mut rng));
            let (u, v) = (w.to_witt(&wr, &x).unwrap(), w.to_witt(&wr, &y).unwrap());
            assert_eq!(w.from_witt(&wr, &u).unwrap(), x);
            let prod = w.from_witt(&wr, &wr.mul(&u, &v)).unwrap();
            assert_eq!(prod, w.ctx.mul(&x, &y).unwrap());
            let sum = w.from_witt(&wr, &wr.add(&u, &v)).unwrap();
            assert_eq!(sum, w.ctx.add(&x, &y).unwrap());
            for r in [Ratio::new(1, 1), Ratio::new(1, 2), Ratio::new(2, 1)] {
                assert_eq!(wr.b_val(&u, r).unwrap(), w.b_val(&x, r).value);
            }
        }
    }
}
