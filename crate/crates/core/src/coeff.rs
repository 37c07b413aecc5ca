//! Coefficient arithmetic: the residue field `F = F_{p^h}`, its subfield
//! `F_q`, and the truncated unramified ring `O_E / p^N`.
//!
//! Elements of both rings are coordinate vectors in the power basis of a
//! fixed monic defining polynomial. For `O_E / p^N` the polynomial is the
//! canonical lift of the one defining `F`, so reduction mod `p` is
//! coordinatewise.

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub type Coords = SmallVec<[u64; 4]>;

/// Global parameters of a computation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    pub p: u64,
    /// Degree `[K : Q_p]`.
    pub f: usize,
    /// Degree of the residue field `F` over `F_p`; `f` divides `h`.
    pub h: usize,
    /// pi-adic working precision `N`.
    pub prec: u32,
    /// Total-degree window `M` for power series.
    pub deg: usize,
    /// Bound on cross exponents `|n_i|`.
    pub band: i64,
    /// Depth `k` of p-power denominators for perfectoid exponents.
    pub depth: u32,
    /// Relative `Y_{sigma_0}`-window used when inverting units.
    pub window: i64,
    /// Monic defining polynomial of `F` over `F_p`, low degree first.
    pub modulus: Vec<u64>,
}

impl Params {
    /// Parameters with the default band, depth, window and defining polynomial.
    pub fn new(p: u64, f: usize, h: usize, prec: u32, deg: usize) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidParams(format!("{p} is not prime")));
        }
        if h == 0 {
            return Err(Error::InvalidParams("h must be positive".into()));
        }
        let params = Params {
            p,
            f,
            h,
            prec,
            deg,
            band: 2 * p.saturating_pow(f as u32).saturating_mul(deg as u64).min(1 << 40) as i64,
            depth: prec + 1,
            window: deg as i64,
            modulus: default_modulus(p, h),
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if !is_prime(self.p) {
            return bad(format!("{} is not prime", self.p));
        }
        if self.f == 0 || self.h == 0 || self.h % self.f != 0 {
            return bad(format!("need f >= 1 with f | h (f={}, h={})", self.f, self.h));
        }
        if self.prec == 0 || self.deg == 0 || self.band < 1 || self.depth == 0 || self.window < 1 {
            return bad("prec, deg, band, depth and window must be >= 1".into());
        }
        if self.modulus.len() != self.h + 1 || self.modulus[self.h] != 1 {
            return bad("modulus must be monic of degree h".into());
        }
        if self.modulus.iter().any(|&c| c >= self.p) {
            return bad("modulus coefficients must lie in [0, p)".into());
        }
        if !is_irreducible(self.p, &self.modulus) {
            return bad("modulus is reducible mod p".into());
        }
        // Keep p^N comfortably inside u64 even at the widened precision.
        let bits = (self.p as f64).log2() * (self.wide_prec() as f64);
        if bits > 60.0 {
            return bad("p^N too large for the kernel".into());
        }
        Ok(())
    }

    pub fn q(&self) -> u64 {
        self.p.pow(self.f as u32)
    }

    /// Precision used for group-ring computations: binomial coefficients of
    /// degree `< M` lose `v_p((M-1)!)` digits to division.
    pub fn wide_prec(&self) -> u32 {
        self.prec + vp_factorial(self.p, self.deg.saturating_sub(1) as u64)
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        Params {
            prec,
            depth: self.depth.max(prec + 1),
            ..self.clone()
        }
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// `v_p(n!)` by Legendre's formula.
pub fn vp_factorial(p: u64, n: u64) -> u32 {
    let mut v = 0;
    let mut m = n / p;
    while m > 0 {
        v += m as u32;
        m /= p;
    }
    v
}

pub fn vp(p: u64, mut n: u64) -> u32 {
    if n == 0 {
        return u32::MAX;
    }
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

#[inline]
pub(crate) fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    if m <= 1 << 32 {
        a * b % m
    } else {
        ((a as u128 * b as u128) % m as u128) as u64
    }
}

pub(crate) fn powmod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, m);
        }
        a = mulmod(a, a, m);
        e >>= 1;
    }
    r
}

/// Inverse of a unit modulo `p^k` (`m = p^k`).
pub(crate) fn invmod(a: u64, m: u64) -> Option<u64> {
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (m as i128, (a % m) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    if r != 1 {
        return None;
    }
    Some(t.rem_euclid(m as i128) as u64)
}

// Polynomials over F_p, low degree first.

fn poly_trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn poly_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let db = b.len() - 1;
    let lead_inv = invmod(b[db], p).expect("nonzero leading coefficient");
    while r.len() > db {
        let c = mulmod(*r.last().unwrap(), lead_inv, p);
        let shift = r.len() - 1 - db;
        for (i, &bi) in b.iter().enumerate() {
            r[shift + i] = (r[shift + i] + p - mulmod(c, bi, p)) % p;
        }
        poly_trim(&mut r);
    }
    r
}

/// Trial division by every monic polynomial of degree at most `deg / 2`.
pub fn is_irreducible(p: u64, poly: &[u64]) -> bool {
    let deg = poly.len() - 1;
    if deg <= 1 {
        return deg == 1;
    }
    for d in 1..=deg / 2 {
        let count = p.pow(d as u32);
        for idx in 0..count {
            let mut g = Vec::with_capacity(d + 1);
            let mut t = idx;
            for _ in 0..d {
                g.push(t % p);
                t /= p;
            }
            g.push(1);
            if poly_rem(poly, &g, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// The lexicographically first monic irreducible polynomial of degree `h`
/// (`X` itself when `h = 1`).
pub fn default_modulus(p: u64, h: usize) -> Vec<u64> {
    if h == 1 {
        return vec![0, 1];
    }
    let count = p.pow(h as u32);
    for idx in 0..count {
        let mut g = Vec::with_capacity(h + 1);
        let mut t = idx;
        for _ in 0..h {
            g.push(t % p);
            t /= p;
        }
        g.push(1);
        if is_irreducible(p, &g) {
            return g;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

/// Element of the residue field `F`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Fe(pub Coords);

/// Element of `O_E / p^N`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OEInt(pub Coords);

/// The truncated ring `(Z / p^N)[X] / (lift of the modulus)`; with `N = 1`
/// this is the residue field itself.
#[derive(Clone, Debug)]
pub struct CoeffRing {
    pub p: u64,
    pub h: usize,
    pub prec: u32,
    pub pn: u64,
    modulus: Vec<u64>,
    /// Image of the generator under the Frobenius lift.
    frob_gen: Coords,
}

impl CoeffRing {
    pub fn new(params: &Params) -> Self {
        Self::with_prec(params, params.prec)
    }

    pub fn with_prec(params: &Params, prec: u32) -> Self {
        let p = params.p;
        let mut ring = CoeffRing {
            p,
            h: params.h,
            prec,
            pn: p.pow(prec),
            modulus: params.modulus.clone(),
            frob_gen: Coords::new(),
        };
        ring.frob_gen = ring.compute_frob_gen();
        ring
    }

    /// Same ring at another precision.
    pub fn at_prec(&self, prec: u32) -> Self {
        CoeffRing {
            p: self.p,
            h: self.h,
            prec,
            pn: self.p.pow(prec),
            modulus: self.modulus.clone(),
            frob_gen: Coords::new(),
        }
        .with_frob()
    }

    fn with_frob(mut self) -> Self {
        self.frob_gen = self.compute_frob_gen();
        self
    }

    /// Root of the lifted modulus congruent to `X^p`, by Newton iteration.
    fn compute_frob_gen(&self) -> Coords {
        if self.h == 1 {
            // F = F_p with modulus X: the generator is 0.
            return smallvec::smallvec![0];
        }
        let mut gen = Coords::from_elem(0, self.h);
        gen[1] = 1;
        let gen = OEInt(gen);
        let mut z = self.pow(&gen, self.p);
        for _ in 0..=self.prec {
            let fz = self.eval_modulus(&z);
            let dz = self.eval_modulus_derivative(&z);
            let inv = self.inv(&dz).expect("separable modulus");
            z = self.sub(&z, &self.mul(&fz, &inv));
        }
        z.0
    }

    fn eval_modulus(&self, z: &OEInt) -> OEInt {
        let mut acc = self.zero();
        for &c in self.modulus.iter().rev() {
            acc = self.add(&self.mul(&acc, z), &self.from_u64(c));
        }
        acc
    }

    fn eval_modulus_derivative(&self, z: &OEInt) -> OEInt {
        let mut acc = self.zero();
        for (i, &c) in self.modulus.iter().enumerate().skip(1).rev() {
            acc = self.add(&self.mul(&acc, z), &self.from_u64(mulmod(c, i as u64, self.pn)));
        }
        acc
    }

    pub fn zero(&self) -> OEInt {
        OEInt(Coords::from_elem(0, self.h))
    }

    pub fn one(&self) -> OEInt {
        self.from_u64(1)
    }

    pub fn from_u64(&self, v: u64) -> OEInt {
        let mut c = Coords::from_elem(0, self.h);
        c[0] = v % self.pn;
        OEInt(c)
    }

    pub fn from_i64(&self, v: i64) -> OEInt {
        self.from_u64(v.rem_euclid(self.pn as i64) as u64)
    }

    pub fn from_coords(&self, coords: &[u64]) -> OEInt {
        let mut c = Coords::from_elem(0, self.h);
        for (dst, &src) in c.iter_mut().zip(coords) {
            *dst = src % self.pn;
        }
        OEInt(c)
    }

    pub fn is_zero(&self, x: &OEInt) -> bool {
        x.0.iter().all(|&c| c == 0)
    }

    pub fn add(&self, x: &OEInt, y: &OEInt) -> OEInt {
        OEInt(
            x.0.iter()
                .zip(&y.0)
                .map(|(&a, &b)| {
                    let s = a + b;
                    if s >= self.pn {
                        s - self.pn
                    } else {
                        s
                    }
                })
                .collect(),
        )
    }

    pub fn add_assign(&self, x: &mut OEInt, y: &OEInt) {
        for (a, &b) in x.0.iter_mut().zip(&y.0) {
            let s = *a + b;
            *a = if s >= self.pn { s - self.pn } else { s };
        }
    }

    pub fn neg(&self, x: &OEInt) -> OEInt {
        OEInt(x.0.iter().map(|&a| if a == 0 { 0 } else { self.pn - a }).collect())
    }

    pub fn sub(&self, x: &OEInt, y: &OEInt) -> OEInt {
        self.add(x, &self.neg(y))
    }

    pub fn scale(&self, x: &OEInt, k: u64) -> OEInt {
        let k = k % self.pn;
        OEInt(x.0.iter().map(|&a| mulmod(a, k, self.pn)).collect())
    }

    pub fn mul(&self, x: &OEInt, y: &OEInt) -> OEInt {
        let h = self.h;
        let m = self.pn;
        if h == 1 {
            return OEInt(smallvec::smallvec![mulmod(x.0[0], y.0[0], m)]);
        }
        let mut prod: SmallVec<[u64; 8]> = SmallVec::from_elem(0, 2 * h - 1);
        for (i, &a) in x.0.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in y.0.iter().enumerate() {
                prod[i + j] = (prod[i + j] + mulmod(a, b, m)) % m;
            }
        }
        for k in (h..2 * h - 1).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            for i in 0..h {
                let t = mulmod(c, self.modulus[i], m);
                prod[k - h + i] = (prod[k - h + i] + m - t) % m;
            }
        }
        OEInt(prod[..h].iter().copied().collect())
    }

    pub fn pow(&self, x: &OEInt, mut e: u64) -> OEInt {
        let mut base = x.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// `p`-adic valuation; `prec` for zero.
    pub fn val(&self, x: &OEInt) -> u32 {
        x.0.iter()
            .map(|&c| vp(self.p, c).min(self.prec))
            .min()
            .unwrap_or(self.prec)
    }

    pub fn is_unit(&self, x: &OEInt) -> bool {
        self.val(x) == 0
    }

    /// Inverse of a unit: invert mod `p` in the residue field, then Newton.
    pub fn inv(&self, x: &OEInt) -> Option<OEInt> {
        if !self.is_unit(x) {
            return None;
        }
        let field = self.residue_field();
        let r = field.inv(&self.reduce(x))?;
        let mut y = self.lift(&r);
        let two = self.from_u64(2);
        let mut correct = 1u32;
        while correct < self.prec {
            y = self.mul(&y, &self.sub(&two, &self.mul(x, &y)));
            correct *= 2;
        }
        Some(y)
    }

    /// Reduction modulo `p^k` (canonical representatives).
    pub fn reduce_to(&self, x: &OEInt, k: u32) -> OEInt {
        let m = self.p.pow(k.min(self.prec));
        OEInt(x.0.iter().map(|&c| c % m).collect())
    }

    /// Exact division by `p^k`; the quotient is defined modulo `p^{N-k}`.
    pub fn div_p_pow(&self, x: &OEInt, k: u32) -> OEInt {
        let d = self.p.pow(k);
        OEInt(x.0.iter().map(|&c| c / d).collect())
    }

    /// Multiplication by `p^k`.
    pub fn mul_p_pow(&self, x: &OEInt, k: u32) -> OEInt {
        if k >= self.prec {
            return self.zero();
        }
        self.scale(x, self.p.pow(k))
    }

    /// Change precision, reducing or re-embedding the representatives.
    pub fn convert(&self, x: &OEInt) -> OEInt {
        self.from_coords(&x.0)
    }

    pub fn residue_field(&self) -> FiniteField {
        FiniteField {
            p: self.p,
            h: self.h,
            modulus: self.modulus.clone(),
        }
    }

    pub fn reduce(&self, x: &OEInt) -> Fe {
        Fe(x.0.iter().map(|&c| c % self.p).collect())
    }

    pub fn lift(&self, x: &Fe) -> OEInt {
        OEInt(x.0.clone())
    }

    /// Teichmüller lift: `lift(x)^{p^{h n}}` stabilises after `N` rounds.
    pub fn teichmuller(&self, x: &Fe) -> OEInt {
        let q = self.p.pow(self.h as u32);
        let mut t = self.lift(x);
        for _ in 0..self.prec {
            t = self.pow(&t, q);
        }
        t
    }

    /// Digits `d_n` with `x = sum_n p^n teich(d_n)`.
    pub fn teich_digits(&self, x: &OEInt) -> Vec<Fe> {
        let mut rest = x.clone();
        let mut out = Vec::with_capacity(self.prec as usize);
        for _ in 0..self.prec {
            let d = self.reduce(&rest);
            let sub = self.sub(&rest, &self.teichmuller(&d));
            rest = self.div_p_pow(&sub, 1);
            out.push(d);
        }
        out
    }

    /// The Frobenius lift `sigma`, reducing to `x -> x^p`.
    pub fn frobenius(&self, x: &OEInt) -> OEInt {
        if self.h == 1 {
            return x.clone();
        }
        let g = OEInt(self.frob_gen.clone());
        let mut acc = self.zero();
        for &c in x.0.iter().rev() {
            acc = self.add(&self.mul(&acc, &g), &self.from_u64(c));
        }
        acc
    }

    pub fn frobenius_pow(&self, x: &OEInt, i: usize) -> OEInt {
        let mut y = x.clone();
        for _ in 0..i % self.h {
            y = self.frobenius(&y);
        }
        y
    }
}

/// The residue field `F = F_p[X] / (modulus)`.
#[derive(Clone, Debug)]
pub struct FiniteField {
    pub p: u64,
    pub h: usize,
    modulus: Vec<u64>,
}

impl FiniteField {
    pub fn new(params: &Params) -> Self {
        FiniteField {
            p: params.p,
            h: params.h,
            modulus: params.modulus.clone(),
        }
    }

    fn ring(&self) -> CoeffRing {
        CoeffRing {
            p: self.p,
            h: self.h,
            prec: 1,
            pn: self.p,
            modulus: self.modulus.clone(),
            frob_gen: Coords::new(),
        }
    }

    pub fn zero(&self) -> Fe {
        Fe(Coords::from_elem(0, self.h))
    }

    pub fn one(&self) -> Fe {
        self.from_u64(1)
    }

    pub fn from_u64(&self, v: u64) -> Fe {
        let mut c = Coords::from_elem(0, self.h);
        c[0] = v % self.p;
        Fe(c)
    }

    pub fn size(&self) -> u64 {
        self.p.pow(self.h as u32)
    }

    /// The element whose base-`p` digits are its coordinates.
    pub fn from_index(&self, mut idx: u64) -> Fe {
        let mut c = Coords::from_elem(0, self.h);
        for slot in c.iter_mut() {
            *slot = idx % self.p;
            idx /= self.p;
        }
        Fe(c)
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> + '_ {
        (0..self.size()).map(|i| self.from_index(i))
    }

    pub fn is_zero(&self, x: &Fe) -> bool {
        x.0.iter().all(|&c| c == 0)
    }

    pub fn add(&self, x: &Fe, y: &Fe) -> Fe {
        Fe(x.0.iter().zip(&y.0).map(|(&a, &b)| (a + b) % self.p).collect())
    }

    pub fn neg(&self, x: &Fe) -> Fe {
        Fe(x.0.iter().map(|&a| (self.p - a) % self.p).collect())
    }

    pub fn sub(&self, x: &Fe, y: &Fe) -> Fe {
        self.add(x, &self.neg(y))
    }

    pub fn mul(&self, x: &Fe, y: &Fe) -> Fe {
        let r = self.ring();
        Fe(r.mul(&OEInt(x.0.clone()), &OEInt(y.0.clone())).0)
    }

    pub fn pow(&self, x: &Fe, e: u64) -> Fe {
        let r = self.ring();
        Fe(r.pow(&OEInt(x.0.clone()), e).0)
    }

    pub fn inv(&self, x: &Fe) -> Option<Fe> {
        if self.is_zero(x) {
            return None;
        }
        Some(self.pow(x, self.size() - 2))
    }

    pub fn frob(&self, x: &Fe) -> Fe {
        self.pow(x, self.p)
    }

    /// Inverse Frobenius `x -> x^{1/p} = x^{p^{h-1}}`.
    pub fn frob_inv(&self, x: &Fe) -> Fe {
        self.pow(x, self.p.pow(self.h as u32 - 1))
    }

    /// Elements of the subfield `F_{p^f}`, i.e. the fixed points of `Frob^f`.
    pub fn subfield(&self, f: usize) -> Vec<Fe> {
        let q = self.p.pow(f as u32);
        self.elements().filter(|x| self.pow(x, q) == *x).collect()
    }

    pub fn mult_order(&self, x: &Fe) -> u64 {
        let one = self.one();
        let mut y = x.clone();
        let mut k = 1;
        while y != one {
            y = self.mul(&y, x);
            k += 1;
        }
        k
    }
}

/// `C(a, j) = a (a - 1) ... (a - j + 1) / j!` for `a` known modulo `p^prec`.
///
/// Returns the value together with its certified precision `prec - v_p(j!)`.
pub fn padic_binomial(p: u64, prec: u32, a: u64, j: u64) -> Result<(u64, u32)> {
    let v = vp_factorial(p, j);
    if v >= prec {
        return Err(Error::PrecisionExhausted(format!(
            "C(a, {j}) needs more than {prec} digits of a"
        )));
    }
    let m = p.pow(prec);
    let mut num = 1u64;
    let mut den_unit = 1u64;
    for i in 0..j {
        num = mulmod(num, (a % m + m - i % m) % m, m);
        let mut t = i + 1;
        while t % p == 0 {
            t /= p;
        }
        den_unit = mulmod(den_unit, t % m, m);
    }
    let out_prec = prec - v;
    let mo = p.pow(out_prec);
    let num = (num / p.pow(v)) % mo;
    let inv = invmod(den_unit % mo, mo).expect("unit part of j! is a unit");
    Ok((mulmod(num, inv, mo), out_prec))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p: u64, f: usize, h: usize, n: u32) -> Params {
        Params::new(p, f, h, n, 8).unwrap()
    }

    #[test]
    fn default_moduli() {
        assert_eq!(default_modulus(3, 2), vec![1, 0, 1]);
        assert_eq!(default_modulus(5, 2), vec![2, 0, 1]);
        assert_eq!(default_modulus(2, 2), vec![1, 1, 1]);
        assert!(!is_irreducible(5, &[1, 0, 1]));
    }

    #[test]
    fn teichmuller_of_two_mod_27() {
        let r = CoeffRing::new(&params(3, 1, 1, 3));
        let t = r.teichmuller(&Fe(smallvec::smallvec![2]));
        assert_eq!(t, r.from_i64(-1));
        assert_eq!(r.teichmuller(&r.residue_field().zero()), r.zero());
        assert_eq!(r.teichmuller(&r.residue_field().one()), r.one());
    }

    #[test]
    fn teichmuller_digits_reconstruct() {
        let params = Params::new(3, 2, 2, 3, 4).unwrap();
        let ring = CoeffRing::new(&params);
        for a in [0u64, 1, 5, 13, 26] {
            for b in [0u64, 2, 9, 20] {
                let x = ring.from_coords(&[a, b]);
                let mut acc = ring.zero();
                for (n, d) in ring.teich_digits(&x).iter().enumerate() {
                    acc = ring.add(&acc, &ring.mul_p_pow(&ring.teichmuller(d), n as u32));
                }
                assert_eq!(acc, x);
            }
        }
    }

    #[test]
    fn teichmuller_is_multiplicative_and_fixed() {
        for (p, h) in [(2, 2), (3, 2), (5, 2), (2, 3)] {
            let r = CoeffRing::new(&params(p, 1, h, 4));
            let field = r.residue_field();
            let q = field.size();
            for x in field.elements() {
                let tx = r.teichmuller(&x);
                assert_eq!(r.reduce(&tx), x);
                assert_eq!(r.pow(&tx, q), tx);
                for y in field.elements().step_by(3) {
                    let ty = r.teichmuller(&y);
                    assert_eq!(r.mul(&tx, &ty), r.teichmuller(&field.mul(&x, &y)));
                }
            }
        }
    }

    #[test]
    fn frobenius_lift_properties() {
        for (p, h) in [(3, 2), (5, 2), (2, 3)] {
            let r = CoeffRing::new(&params(p, 1, h, 4));
            let field = r.residue_field();
            assert_eq!(r.frobenius(&r.one()), r.one());
            for x in field.elements() {
                let tx = r.teichmuller(&x);
                assert_eq!(r.frobenius(&tx), r.teichmuller(&field.frob(&x)));
            }
            let a = r.from_coords(&[7, 11, 3][..h]);
            let b = r.from_coords(&[2, 40, 9][..h]);
            assert_eq!(r.frobenius_pow(&a, h), a);
            assert_eq!(
                r.frobenius(&r.mul(&a, &b)),
                r.mul(&r.frobenius(&a), &r.frobenius(&b))
            );
            assert_eq!(
                r.frobenius(&r.add(&a, &b)),
                r.add(&r.frobenius(&a), &r.frobenius(&b))
            );
            assert_eq!(r.reduce(&r.frobenius(&a)), field.frob(&r.reduce(&a)));
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(padic_binomial(3, 4, 5, 2).unwrap(), (10, 4));
        assert_eq!(padic_binomial(3, 4, 17, 0).unwrap(), (1, 4));
        // a = 1/2 in Z/3^4; C(1/2, 2) = -1/8.
        let m = 81;
        let half = invmod(2, m).unwrap();
        let (c, prec) = padic_binomial(3, 4, half, 2).unwrap();
        assert_eq!(prec, 4);
        assert_eq!(mulmod(c, 8, m), m - 1);
        // C(a, 3) at p = 3 loses one digit.
        let (c3, prec3) = padic_binomial(3, 4, half, 3).unwrap();
        assert_eq!(prec3, 3);
        // 1/2 * (-1/2) * (-3/2) / 6 = 1/16
        assert_eq!(mulmod(c3, 16, 27), 1);
        assert!(padic_binomial(2, 2, 5, 4).is_err());
    }

    #[test]
    fn pascal_recurrence() {
        let (p, prec) = (3u64, 5u32);
        let m = p.pow(prec);
        for a in [4u64, 100, 200, 242] {
            for j in 1..9u64 {
                let (c, pc) = padic_binomial(p, prec, a, j).unwrap();
                let (c1, p1) = padic_binomial(p, prec, (a + m - 1) % m, j).unwrap();
                let (c2, p2) = padic_binomial(p, prec, (a + m - 1) % m, j - 1).unwrap();
                let k = pc.min(p1).min(p2);
                let mk = p.pow(k);
                assert_eq!(c % mk, (c1 + c2) % mk, "a={a} j={j}");
            }
        }
    }

    #[test]
    fn inverse_and_valuation() {
        let r = CoeffRing::new(&params(5, 1, 2, 3));
        let x = r.from_coords(&[3, 7]);
        let y = r.inv(&x).unwrap();
        assert_eq!(r.mul(&x, &y), r.one());
        assert_eq!(r.val(&r.from_u64(50)), 2);
        assert_eq!(r.val(&r.zero()), 3);
        assert!(r.inv(&r.from_u64(5)).is_none());
    }
}
