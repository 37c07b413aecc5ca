//! Truncated Witt vectors over perfect rings of characteristic `p`.
//!
//! Arithmetic uses the universal addition, multiplication and subtraction
//! polynomials, generated once per `(p, N)` by solving the ghost equations
//! over `Z` and checking integrality.
//!
//! For a perfect ring the Witt coordinates and the Teichmüller digits are
//! related by `x_n = d_n^{p^n}`, since `(x_0, x_1, ..) = sum_n V^n [x_n]`
//! and `V = p F^{-1}`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Debug;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::coeff::{powmod, FiniteField, Fe};
use crate::error::{Error, Result};

/// A perfect ring of characteristic `p`.
pub trait PerfectRing {
    type Elem: Clone + PartialEq + Debug;

    fn p(&self) -> u64;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_int(&self, n: i64) -> Self::Elem;
    fn add(&self, x: &Self::Elem, y: &Self::Elem) -> Self::Elem;
    fn neg(&self, x: &Self::Elem) -> Self::Elem;
    fn mul(&self, x: &Self::Elem, y: &Self::Elem) -> Self::Elem;
    fn frobenius(&self, x: &Self::Elem) -> Self::Elem;
    fn pth_root(&self, x: &Self::Elem) -> Result<Self::Elem>;
    fn is_zero(&self, x: &Self::Elem) -> bool;
    /// Valuation of the normalized Gauss norm; `None` for zero.
    fn gauss_val(&self, x: &Self::Elem) -> Option<Ratio<i64>>;

    fn sub(&self, x: &Self::Elem, y: &Self::Elem) -> Self::Elem {
        self.add(x, &self.neg(y))
    }

    fn pow(&self, x: &Self::Elem, mut e: u64) -> Self::Elem {
        let mut acc = self.one();
        let mut base = x.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }
}

/// `F_p` with elements in `0..p`.
#[derive(Clone, Debug)]
pub struct PrimeField(pub u64);

impl PerfectRing for PrimeField {
    type Elem = u64;

    fn p(&self) -> u64 {
        self.0
    }
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.0
    }
    fn from_int(&self, n: i64) -> u64 {
        n.rem_euclid(self.0 as i64) as u64
    }
    fn add(&self, x: &u64, y: &u64) -> u64 {
        (x + y) % self.0
    }
    fn neg(&self, x: &u64) -> u64 {
        (self.0 - x) % self.0
    }
    fn mul(&self, x: &u64, y: &u64) -> u64 {
        x * y % self.0
    }
    fn frobenius(&self, x: &u64) -> u64 {
        *x
    }
    fn pth_root(&self, x: &u64) -> Result<u64> {
        Ok(*x)
    }
    fn is_zero(&self, x: &u64) -> bool {
        *x == 0
    }
    fn gauss_val(&self, x: &u64) -> Option<Ratio<i64>> {
        (*x != 0).then(|| Ratio::from_integer(0))
    }
}

impl PerfectRing for FiniteField {
    type Elem = Fe;

    fn p(&self) -> u64 {
        self.p
    }
    fn zero(&self) -> Fe {
        FiniteField::zero(self)
    }
    fn one(&self) -> Fe {
        FiniteField::one(self)
    }
    fn from_int(&self, n: i64) -> Fe {
        self.from_u64(n.rem_euclid(self.p as i64) as u64)
    }
    fn add(&self, x: &Fe, y: &Fe) -> Fe {
        FiniteField::add(self, x, y)
    }
    fn neg(&self, x: &Fe) -> Fe {
        FiniteField::neg(self, x)
    }
    fn mul(&self, x: &Fe, y: &Fe) -> Fe {
        FiniteField::mul(self, x, y)
    }
    fn frobenius(&self, x: &Fe) -> Fe {
        self.frob(x)
    }
    fn pth_root(&self, x: &Fe) -> Result<Fe> {
        Ok(self.frob_inv(x))
    }
    fn is_zero(&self, x: &Fe) -> bool {
        FiniteField::is_zero(self, x)
    }
    fn gauss_val(&self, x: &Fe) -> Option<Ratio<i64>> {
        (!FiniteField::is_zero(self, x)).then(|| Ratio::from_integer(0))
    }
}

/// Integer polynomial in `2N` variables `X_0..X_{N-1}, Y_0..Y_{N-1}`.
pub type Poly = BTreeMap<Vec<u16>, BigInt>;

fn poly_add(a: &Poly, b: &Poly, sign: i32) -> Poly {
    let mut out = a.clone();
    for (m, c) in b {
        let e = out.entry(m.clone()).or_insert_with(BigInt::zero);
        if sign >= 0 {
            *e += c;
        } else {
            *e -= c;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out: Poly = BTreeMap::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let m: Vec<u16> = ma.iter().zip(mb).map(|(x, y)| x + y).collect();
            *out.entry(m).or_insert_with(BigInt::zero) += ca * cb;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn poly_pow(a: &Poly, mut e: u64, nvars: usize) -> Poly {
    let mut acc: Poly = BTreeMap::from([(vec![0; nvars], BigInt::one())]);
    let mut base = a.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mul(&acc, &base);
        }
        e >>= 1;
        if e > 0 {
            base = poly_mul(&base, &base);
        }
    }
    acc
}

fn poly_scale(a: &Poly, c: &BigInt) -> Poly {
    a.iter().map(|(m, x)| (m.clone(), x * c)).collect()
}

/// `w_n` of the variables starting at `offset`.
fn ghost(p: u64, n: usize, offset: usize, nvars: usize) -> Poly {
    let mut out = Poly::new();
    for j in 0..=n {
        let mut m = vec![0u16; nvars];
        m[offset + j] = p.pow((n - j) as u32) as u16;
        out.insert(m, BigInt::from(p).pow(j as u32));
    }
    out
}

/// Addition, multiplication and subtraction polynomials for length `N`.
#[derive(Clone, Debug)]
pub struct StructurePolys {
    pub p: u64,
    pub n: usize,
    pub add: Vec<Poly>,
    pub mul: Vec<Poly>,
    pub sub: Vec<Poly>,
}

#[derive(Clone, Copy)]
enum Op {
    Add,
    Mul,
    Sub,
}

fn solve_ghost(p: u64, n: usize, op: Op) -> Result<Vec<Poly>> {
    let nvars = 2 * n;
    let mut out: Vec<Poly> = Vec::with_capacity(n);
    for k in 0..n {
        let gx = ghost(p, k, 0, nvars);
        let gy = ghost(p, k, n, nvars);
        let mut target = match op {
            Op::Add => poly_add(&gx, &gy, 1),
            Op::Sub => poly_add(&gx, &gy, -1),
            Op::Mul => poly_mul(&gx, &gy),
        };
        for (j, prev) in out.iter().enumerate() {
            let term = poly_pow(prev, p.pow((k - j) as u32), nvars);
            target = poly_add(&target, &poly_scale(&term, &BigInt::from(p).pow(j as u32)), -1);
        }
        let d = BigInt::from(p).pow(k as u32);
        let mut next = Poly::new();
        for (m, c) in target {
            let (q, r) = c.div_rem(&d);
            if !r.is_zero() {
                return Err(Error::NonIntegral(format!(
                    "coefficient {c} of monomial {m:?} in level {k} is not divisible by {d}"
                )));
            }
            next.insert(m, q);
        }
        out.push(next);
    }
    Ok(out)
}

type PolyCache = Mutex<HashMap<(u64, usize), Arc<StructurePolys>>>;

/// Structure polynomials for `(p, N)`, generated on first use and cached.
pub fn gen_structure_polys(p: u64, n: usize) -> Result<Arc<StructurePolys>> {
    static CACHE: OnceLock<PolyCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(sp) = cache.lock().expect("cache lock").get(&(p, n)) {
        return Ok(sp.clone());
    }
    let sp = Arc::new(StructurePolys {
        p,
        n,
        add: solve_ghost(p, n, Op::Add)?,
        mul: solve_ghost(p, n, Op::Mul)?,
        sub: solve_ghost(p, n, Op::Sub)?,
    });
    cache
        .lock()
        .expect("cache lock")
        .insert((p, n), sp.clone());
    Ok(sp)
}

/// Evaluate an integer polynomial at integers modulo `m`.
pub fn eval_mod(poly: &Poly, vals: &[u64], m: u64) -> u64 {
    let mb = BigInt::from(m);
    let mut acc = BigInt::zero();
    for (mono, c) in poly {
        let mut t = c.mod_floor(&mb);
        for (v, &e) in vals.iter().zip(mono) {
            if e > 0 {
                t = (t * BigInt::from(*v).modpow(&BigInt::from(e), &mb)).mod_floor(&mb);
            }
        }
        acc = (acc + t).mod_floor(&mb);
    }
    acc.to_u64().expect("reduced modulo m")
}

/// `w_n(z)` modulo `m`.
pub fn ghost_mod(p: u64, z: &[u64], n: usize, m: u64) -> u64 {
    let mb = BigInt::from(m);
    let mut acc = BigInt::zero();
    for (j, zj) in z.iter().enumerate().take(n + 1) {
        let e = BigInt::from(p.pow((n - j) as u32));
        let t = BigInt::from(p).pow(j as u32) * BigInt::from(*zj).modpow(&e, &mb);
        acc = (acc + t).mod_floor(&mb);
    }
    acc.to_u64().expect("reduced modulo m")
}

/// Evaluate an integer polynomial over a perfect ring. Monomials containing
/// a zero variable are skipped.
pub fn eval_in<R: PerfectRing>(ring: &R, poly: &Poly, vals: &[R::Elem]) -> R::Elem {
    let zero_var: Vec<bool> = vals.iter().map(|v| ring.is_zero(v)).collect();
    let mut powers: HashMap<(usize, u16), R::Elem> = HashMap::new();
    let mut acc = ring.zero();
    let p = ring.p() as i64;
    for (mono, c) in poly {
        let cm = c.mod_floor(&BigInt::from(p)).to_i64().expect("small");
        if cm == 0 {
            continue;
        }
        if mono.iter().zip(&zero_var).any(|(&e, &z)| e > 0 && z) {
            continue;
        }
        let mut t = ring.from_int(cm);
        for (v, &e) in mono.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let pw = powers
                .entry((v, e))
                .or_insert_with(|| ring.pow(&vals[v], e as u64))
                .clone();
            t = ring.mul(&t, &pw);
        }
        acc = ring.add(&acc, &t);
    }
    acc
}

/// Witt vector of length `N`, stored in Witt coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct WittVec<E> {
    pub coords: Vec<E>,
}

/// `W(R) / p^N` for a perfect ring `R`.
#[derive(Clone, Debug)]
pub struct WittRing<R: PerfectRing> {
    pub base: R,
    pub n: usize,
    pub polys: Arc<StructurePolys>,
}

impl<R: PerfectRing> WittRing<R> {
    pub fn new(base: R, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("Witt length must be positive".into()));
        }
        let polys = gen_structure_polys(base.p(), n)?;
        Ok(WittRing { base, n, polys })
    }

    fn binary(&self, polys: &[Poly], u: &WittVec<R::Elem>, v: &WittVec<R::Elem>) -> WittVec<R::Elem> {
        let vals: Vec<R::Elem> = u.coords.iter().chain(&v.coords).cloned().collect();
        WittVec {
            coords: polys.iter().map(|q| eval_in(&self.base, q, &vals)).collect(),
        }
    }

    pub fn add(&self, u: &WittVec<R::Elem>, v: &WittVec<R::Elem>) -> WittVec<R::Elem> {
        self.binary(&self.polys.add, u, v)
    }

    pub fn sub(&self, u: &WittVec<R::Elem>, v: &WittVec<R::Elem>) -> WittVec<R::Elem> {
        self.binary(&self.polys.sub, u, v)
    }

    pub fn mul(&self, u: &WittVec<R::Elem>, v: &WittVec<R::Elem>) -> WittVec<R::Elem> {
        self.binary(&self.polys.mul, u, v)
    }

    pub fn zero(&self) -> WittVec<R::Elem> {
        WittVec {
            coords: vec![self.base.zero(); self.n],
        }
    }

    pub fn one(&self) -> WittVec<R::Elem> {
        self.teich(&self.base.one())
    }

    pub fn teich(&self, x: &R::Elem) -> WittVec<R::Elem> {
        let mut coords = vec![self.base.zero(); self.n];
        coords[0] = x.clone();
        WittVec { coords }
    }

    /// `sum_n p^n [d_n]`.
    pub fn from_expansion(&self, digits: &[R::Elem]) -> WittVec<R::Elem> {
        let mut coords = vec![self.base.zero(); self.n];
        for (n, d) in digits.iter().enumerate().take(self.n) {
            let mut x = d.clone();
            for _ in 0..n {
                x = self.base.frobenius(&x);
            }
            coords[n] = x;
        }
        WittVec { coords }
    }

    /// Teichmüller digits `d_n = x_n^{1/p^n}`.
    pub fn to_expansion(&self, u: &WittVec<R::Elem>) -> Result<Vec<R::Elem>> {
        u.coords
            .iter()
            .enumerate()
            .map(|(n, x)| {
                let mut d = x.clone();
                for _ in 0..n {
                    d = self.base.pth_root(&d)?;
                }
                Ok(d)
            })
            .collect()
    }

    /// Apply a ring endomorphism of `R` to every digit.
    pub fn map_coefficients(
        &self,
        sigma: impl Fn(&R::Elem) -> Result<R::Elem>,
        u: &WittVec<R::Elem>,
    ) -> Result<WittVec<R::Elem>> {
        Ok(WittVec {
            coords: u.coords.iter().map(&sigma).collect::<Result<_>>()?,
        })
    }

    /// `k u`, computed as repeated addition.
    pub fn mul_int(&self, u: &WittVec<R::Elem>, k: u64) -> WittVec<R::Elem> {
        let mut acc = self.zero();
        for _ in 0..k {
            acc = self.add(&acc, u);
        }
        acc
    }

    /// `|u|_r` valuation `min_n (gauss(d_n) + n / r)` over the digits.
    pub fn b_val(&self, u: &WittVec<R::Elem>, r: Ratio<i64>) -> Result<Option<Ratio<i64>>> {
        let digits = self.to_expansion(u)?;
        Ok(digits
            .iter()
            .enumerate()
            .filter_map(|(n, d)| {
                self.base
                    .gauss_val(d)
                    .map(|g| g + Ratio::new(n as i64, 1) / r)
            })
            .min())
    }
}

/// Witt coordinates of `a mod p^N` over `F_p`: its Teichmüller digits.
pub fn int_to_witt(p: u64, n: usize, a: u64) -> WittVec<u64> {
    let m = p.pow(n as u32);
    let mut rest = a % m;
    let mut coords = Vec::with_capacity(n);
    for k in 0..n {
        let mk = p.pow((n - k) as u32);
        let d = rest % p;
        coords.push(d);
        // Teichmüller lift of d modulo p^{N-k}.
        let mut t = d % mk;
        for _ in 0..n {
            t = powmod(t, p, mk);
        }
        rest = ((rest + mk - t) % mk) / p;
    }
    WittVec { coords }
}

/// Inverse of [`int_to_witt`]: `sum_n p^n [x_n]` in `Z / p^N`.
pub fn witt_to_int(p: u64, n: usize, u: &WittVec<u64>) -> u64 {
    let m = p.pow(n as u32);
    let mut acc = 0u64;
    for (k, &d) in u.coords.iter().enumerate() {
        let mut t = d % m;
        for _ in 0..n {
            t = powmod(t, p, m);
        }
        acc = (acc + t * p.pow(k as u32) % m) % m;
    }
    acc
}

/// Largest absolute coefficient, for diagnostics.
pub fn max_coeff(poly: &Poly) -> BigInt {
    poly.values().map(|c| c.abs()).max().unwrap_or_else(BigInt::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Params;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn low_degree_polynomials() {
        for p in [2u64, 3, 5] {
            let sp = gen_structure_polys(p, 2).unwrap();
            let x0y0 = |a: u16, b: u16| vec![a, 0, b, 0];
            assert_eq!(sp.add[0], Poly::from([(x0y0(1, 0), BigInt::one()), (x0y0(0, 1), BigInt::one())]));
            assert_eq!(sp.mul[0], Poly::from([(x0y0(1, 1), BigInt::one())]));
            // S_1 = X_1 + Y_1 - sum_{0<j<p} C(p,j)/p X_0^j Y_0^{p-j}
            let mut expect = Poly::from([
                (vec![0, 1, 0, 0], BigInt::one()),
                (vec![0, 0, 0, 1], BigInt::one()),
            ]);
            let mut binom = BigInt::one();
            for j in 1..p {
                binom = binom * BigInt::from(p - j + 1) / BigInt::from(j);
                expect.insert(x0y0(j as u16, (p - j) as u16), -(&binom / BigInt::from(p)));
            }
            assert_eq!(sp.add[1], expect);
        }
    }

    #[test]
    fn ghost_identities_on_random_integers() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for p in [2u64, 3, 5] {
            let n = 3;
            let sp = gen_structure_polys(p, n).unwrap();
            let m = p.pow(n as u32 + 2);
            for _ in 0..20 {
                let x: Vec<u64> = (0..n).map(|_| rng.gen_range(0..m)).collect();
                let y: Vec<u64> = (0..n).map(|_| rng.gen_range(0..m)).collect();
                let xy: Vec<u64> = x.iter().chain(&y).copied().collect();
                let s: Vec<u64> = sp.add.iter().map(|q| eval_mod(q, &xy, m)).collect();
                let pr: Vec<u64> = sp.mul.iter().map(|q| eval_mod(q, &xy, m)).collect();
                let d: Vec<u64> = sp.sub.iter().map(|q| eval_mod(q, &xy, m)).collect();
                for k in 0..n {
                    let (gx, gy) = (ghost_mod(p, &x, k, m), ghost_mod(p, &y, k, m));
                    assert_eq!(ghost_mod(p, &s, k, m), (gx + gy) % m);
                    assert_eq!(ghost_mod(p, &pr, k, m), (gx as u128 * gy as u128 % m as u128) as u64);
                    assert_eq!(ghost_mod(p, &d, k, m), (gx + m - gy) % m);
                }
            }
        }
    }

    #[test]
    fn prime_field_matches_integers() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for p in [2u64, 3, 5] {
            let n = 3;
            let w = WittRing::new(PrimeField(p), n).unwrap();
            let m = p.pow(n as u32);
            for _ in 0..30 {
                let (a, b) = (rng.gen_range(0..m), rng.gen_range(0..m));
                let (u, v) = (int_to_witt(p, n, a), int_to_witt(p, n, b));
                assert_eq!(witt_to_int(p, n, &u), a);
                assert_eq!(witt_to_int(p, n, &w.add(&u, &v)), (a + b) % m);
                assert_eq!(witt_to_int(p, n, &w.mul(&u, &v)), a * b % m);
                assert_eq!(witt_to_int(p, n, &w.sub(&u, &v)), (a + m - b) % m);
            }
        }
    }

    #[test]
    fn residue_field_teichmuller_and_expansion() {
        let params = Params::new(3, 2, 2, 3, 4).unwrap();
        let field = FiniteField::new(&params);
        let w = WittRing::new(field.clone(), 3).unwrap();
        let xs: Vec<Fe> = field.elements().collect();
        for x in xs.iter().step_by(2) {
            for y in xs.iter().step_by(3) {
                let prod = w.mul(&w.teich(x), &w.teich(y));
                assert_eq!(prod, w.teich(&field.mul(x, y)));
                let sum = w.add(&w.teich(x), &w.teich(y));
                assert_eq!(sum.coords[0], field.add(x, y));
            }
            let digits = vec![x.clone(), field.frob(x), field.one()];
            let u = w.from_expansion(&digits);
            assert_eq!(w.to_expansion(&u).unwrap(), digits);
            assert_eq!(w.add(&u, &w.zero()), u);
            assert_eq!(w.to_expansion(&w.teich(x)).unwrap()[1], field.zero());
        }
    }
}
