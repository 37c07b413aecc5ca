//! The group ring `O_E[[O_K]]` as truncated power series.
//!
//! Coordinates: `O_K` is identified with `Z_p^f` through the Teichmüller
//! lifts `e_j = [g^j]` of the basis `1, g, .., g^{f-1}` of `F_q`, where `g`
//! generates `F_q^x`. The variables are `T_j = [e_j] - 1`. Series are stored
//! densely over all monomials of total degree `< M`.
//!
//! Intermediate results live at the wide precision of [`Params::wide_prec`]
//! so that binomial coefficients stay exact modulo `p^N`; outputs are
//! reduced to `N`.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::coeff::{padic_binomial, CoeffRing, Fe, FiniteField, OEInt, Params};
use crate::error::{Error, Result};

pub type Exps = Vec<u16>;

/// Dense truncated power series in `f` variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TSeries {
    pub coeffs: Vec<OEInt>,
}

/// Element of `O_K / p^{N'}` in the Teichmüller basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OKElement(pub Vec<u64>);

/// Monomial bookkeeping and arithmetic for series of total degree `< M`.
#[derive(Clone, Debug)]
pub struct SeriesRing {
    pub nvars: usize,
    pub deg: usize,
    pub ring: CoeffRing,
    pub monomials: Vec<Exps>,
    index: HashMap<Exps, usize>,
    /// `table[i * n + j]` is the index of `m_i * m_j`, or `usize::MAX`.
    table: Vec<usize>,
}

impl SeriesRing {
    pub fn new(nvars: usize, deg: usize, ring: CoeffRing) -> Self {
        let mut monomials = Vec::new();
        for d in 0..deg {
            let mut cur = vec![0u16; nvars];
            push_degree(&mut monomials, &mut cur, 0, d as u16);
        }
        let index: HashMap<Exps, usize> = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        let n = monomials.len();
        let mut table = vec![usize::MAX; n * n];
        for i in 0..n {
            for j in 0..n {
                let prod: Exps = monomials[i]
                    .iter()
                    .zip(&monomials[j])
                    .map(|(a, b)| a + b)
                    .collect();
                if let Some(&k) = index.get(&prod) {
                    table[i * n + j] = k;
                }
            }
        }
        SeriesRing {
            nvars,
            deg,
            ring,
            monomials,
            index,
            table,
        }
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn index_of(&self, e: &[u16]) -> Option<usize> {
        self.index.get(e).copied()
    }

    pub fn zero(&self) -> TSeries {
        TSeries {
            coeffs: vec![self.ring.zero(); self.len()],
        }
    }

    pub fn constant(&self, c: OEInt) -> TSeries {
        let mut s = self.zero();
        s.coeffs[0] = c;
        s
    }

    pub fn one(&self) -> TSeries {
        self.constant(self.ring.one())
    }

    pub fn var(&self, j: usize) -> TSeries {
        let mut e = vec![0u16; self.nvars];
        e[j] = 1;
        self.monomial(&e, self.ring.one())
    }

    pub fn monomial(&self, e: &[u16], c: OEInt) -> TSeries {
        let mut s = self.zero();
        if let Some(i) = self.index_of(e) {
            s.coeffs[i] = c;
        }
        s
    }

    pub fn add(&self, a: &TSeries, b: &TSeries) -> TSeries {
        TSeries {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(x, y)| self.ring.add(x, y))
                .collect(),
        }
    }

    pub fn sub(&self, a: &TSeries, b: &TSeries) -> TSeries {
        TSeries {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(x, y)| self.ring.sub(x, y))
                .collect(),
        }
    }

    pub fn scale(&self, a: &TSeries, c: &OEInt) -> TSeries {
        TSeries {
            coeffs: a.coeffs.iter().map(|x| self.ring.mul(x, c)).collect(),
        }
    }

    pub fn mul(&self, a: &TSeries, b: &TSeries) -> TSeries {
        let n = self.len();
        let mut out = self.zero();
        for (i, x) in a.coeffs.iter().enumerate() {
            if self.ring.is_zero(x) {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                let k = self.table[i * n + j];
                if k == usize::MAX || self.ring.is_zero(y) {
                    continue;
                }
                let t = self.ring.mul(x, y);
                self.ring.add_assign(&mut out.coeffs[k], &t);
            }
        }
        out
    }

    pub fn pow(&self, a: &TSeries, e: usize) -> TSeries {
        let mut acc = self.one();
        for _ in 0..e {
            acc = self.mul(&acc, a);
        }
        acc
    }

    /// `s(images_0, .., images_{f-1})`; the images must have no constant term.
    pub fn substitute(&self, s: &TSeries, images: &[TSeries]) -> TSeries {
        debug_assert!(images.iter().all(|g| self.ring.is_zero(&g.coeffs[0])));
        let powers: Vec<Vec<TSeries>> = images
            .iter()
            .map(|g| {
                let mut v = vec![self.one()];
                for e in 1..self.deg {
                    let next = self.mul(&v[e - 1], g);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = self.zero();
        for (idx, c) in s.coeffs.iter().enumerate() {
            if self.ring.is_zero(c) {
                continue;
            }
            let e = &self.monomials[idx];
            let mut term = self.constant(c.clone());
            for (j, &ej) in e.iter().enumerate() {
                if ej > 0 {
                    term = self.mul(&term, &powers[j][ej as usize]);
                }
            }
            out = self.add(&out, &term);
        }
        out
    }

    /// Coefficients reduced into another coefficient ring (typically to `N`).
    pub fn convert(&self, s: &TSeries, to: &CoeffRing) -> TSeries {
        TSeries {
            coeffs: s.coeffs.iter().map(|c| to.convert(c)).collect(),
        }
    }

    /// Nonzero terms as `(exponents, coefficient)`.
    pub fn terms<'a>(&'a self, s: &'a TSeries) -> impl Iterator<Item = (&'a Exps, &'a OEInt)> {
        self.monomials
            .iter()
            .zip(&s.coeffs)
            .filter(|(_, c)| !self.ring.is_zero(c))
    }

    /// Human-readable form, highest degree first, e.g. `Y^2+2Y`.
    pub fn pretty(&self, s: &TSeries, var: &str) -> String {
        let names: Vec<String> = if self.nvars == 1 {
            vec![var.to_string()]
        } else {
            (0..self.nvars).map(|j| format!("{var}{j}")).collect()
        };
        let mut out = String::new();
        let mut terms: Vec<_> = self.terms(s).collect();
        terms.reverse();
        for (e, c) in terms {
            let coeff = pretty_coeff(&self.ring, c);
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &d)| d > 0)
                .map(|(j, &d)| {
                    if d == 1 {
                        names[j].clone()
                    } else {
                        format!("{}^{d}", names[j])
                    }
                })
                .collect();
            if !out.is_empty() {
                out.push('+');
            }
            match (coeff.as_str(), mono.is_empty()) {
                (c, true) => out.push_str(c),
                ("1", false) => out.push_str(&mono.join("*")),
                (c, false) => {
                    let _ = write!(out, "{c}{}", mono.join("*"));
                }
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

fn push_degree(out: &mut Vec<Exps>, cur: &mut Exps, j: usize, left: u16) {
    if j + 1 == cur.len() {
        cur[j] = left;
        out.push(cur.clone());
        return;
    }
    for d in (0..=left).rev() {
        cur[j] = d;
        push_degree(out, cur, j + 1, left - d);
    }
    cur[j] = 0;
}

fn pretty_coeff(ring: &CoeffRing, c: &OEInt) -> String {
    if c.0.iter().skip(1).all(|&x| x == 0) {
        c.0[0].to_string()
    } else {
        let parts: Vec<String> = c.0.iter().map(|x| x.to_string()).collect();
        let _ = ring;
        format!("({})", parts.join(","))
    }
}

/// Gaussian elimination over `O_E / p^k` with unit pivots.
///
/// Solves `A x = b` for `A` with `rows >= cols` whose columns are independent
/// mod `p`; returns `None` if no unit pivot exists in some column.
fn solve_columns(ring: &CoeffRing, a: &[Vec<OEInt>], b: &[OEInt]) -> Option<Vec<OEInt>> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<OEInt>> = a
        .iter()
        .zip(b)
        .map(|(r, bi)| {
            let mut r = r.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let mut pivot_rows = Vec::with_capacity(cols);
    let mut used = vec![false; rows];
    for c in 0..cols {
        let pr = (0..rows).find(|&r| !used[r] && ring.is_unit(&m[r][c]))?;
        used[pr] = true;
        let inv = ring.inv(&m[pr][c])?;
        for x in m[pr].iter_mut() {
            *x = ring.mul(x, &inv);
        }
        for r in 0..rows {
            if r != pr && !ring.is_zero(&m[r][c]) {
                let factor = m[r][c].clone();
                for k in 0..=cols {
                    let t = ring.mul(&factor, &m[pr][k]);
                    m[r][k] = ring.sub(&m[r][k], &t);
                }
            }
        }
        pivot_rows.push(pr);
    }
    for r in 0..rows {
        if !used[r] && !ring.is_zero(&m[r][cols]) {
            return None;
        }
    }
    Some(pivot_rows.iter().map(|&r| m[r][cols].clone()).collect())
}

/// Inverse of a square matrix over `O_E / p^k`, `None` if singular mod `p`.
pub fn invert_matrix(ring: &CoeffRing, a: &[Vec<OEInt>]) -> Option<Vec<Vec<OEInt>>> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let e: Vec<OEInt> = (0..n)
            .map(|i| if i == j { ring.one() } else { ring.zero() })
            .collect();
        cols.push(solve_columns(ring, a, &e)?);
    }
    Some((0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect())
}

/// The group ring together with the generators `Y_{sigma_i}` and the
/// change of variables back to `T`.
#[derive(Clone, Debug)]
pub struct Iwasawa {
    pub params: Params,
    /// Series ring at the wide precision.
    pub sr: SeriesRing,
    /// Coefficient ring at the output precision `N`.
    pub out: CoeffRing,
    pub field: FiniteField,
    /// Generator of `F_q^x` inside `F`.
    pub gen: Fe,
    /// `e_j = [g^j]` as elements of `O_E`.
    pub basis: Vec<OEInt>,
    /// `Y_{sigma_i}` in the `T` variables.
    pub y_in_t: Vec<TSeries>,
    /// `T_j = G_j(Y)`.
    pub t_in_y: Vec<TSeries>,
}

impl Iwasawa {
    pub fn new(params: &Params) -> Result<Self> {
        params.validate()?;
        let wide = CoeffRing::with_prec(params, params.wide_prec());
        let out = CoeffRing::new(params);
        let field = FiniteField::new(params);
        let sub = field.subfield(params.f);
        let q = params.q();
        let gen = sub
            .iter()
            .find(|x| !field.is_zero(x) && field.mult_order(x) == q - 1)
            .cloned()
            .expect("F_q^x is cyclic");
        let mut basis = Vec::with_capacity(params.f);
        let mut gj = field.one();
        for _ in 0..params.f {
            basis.push(wide.teichmuller(&gj));
            gj = field.mul(&gj, &gen);
        }
        let sr = SeriesRing::new(params.f, params.deg, wide);
        let mut iw = Iwasawa {
            params: params.clone(),
            sr,
            out,
            field,
            gen,
            basis,
            y_in_t: Vec::new(),
            t_in_y: Vec::new(),
        };
        iw.y_in_t = (0..params.f).map(|i| iw.y_generator_t(i)).collect::<Result<_>>()?;
        iw.t_in_y = iw.y_to_t_inverse()?;
        Ok(iw)
    }

    pub fn wide(&self) -> &CoeffRing {
        &self.sr.ring
    }

    /// `sum_j x_j e_j` as an element of `O_E`.
    pub fn ok_to_oe(&self, x: &OKElement) -> OEInt {
        let r = self.wide();
        let mut acc = r.zero();
        for (xj, ej) in x.0.iter().zip(&self.basis) {
            acc = r.add(&acc, &r.scale(ej, *xj));
        }
        acc
    }

    /// Coordinates of an element of `O_K` (given inside `O_E`).
    pub fn oe_to_ok(&self, z: &OEInt) -> Result<OKElement> {
        let r = self.wide();
        let h = self.params.h;
        let a: Vec<Vec<OEInt>> = (0..h)
            .map(|row| {
                self.basis
                    .iter()
                    .map(|e| r.from_u64(e.0[row]))
                    .collect()
            })
            .collect();
        let b: Vec<OEInt> = (0..h).map(|row| r.from_u64(z.0[row])).collect();
        let sol = solve_columns(r, &a, &b)
            .ok_or_else(|| Error::InvalidParams("element does not lie in O_K".into()))?;
        Ok(OKElement(sol.iter().map(|c| c.0[0]).collect()))
    }

    pub fn ok_from_i64(&self, v: i64) -> OKElement {
        let one = self.oe_to_ok(&self.wide().one()).expect("1 lies in O_K");
        let m = self.wide().pn;
        let v = v.rem_euclid(m as i64) as u64;
        OKElement(one.0.iter().map(|c| crate::coeff::mulmod(*c, v, m)).collect())
    }

    /// Teichmüller coordinates of `[lambda]` for `lambda` in `F_q`.
    pub fn teich_ok(&self, lambda: &Fe) -> OKElement {
        self.oe_to_ok(&self.wide().teichmuller(lambda))
            .expect("Teichmüller lifts of F_q lie in O_K")
    }

    pub fn is_unit(&self, a: &OKElement) -> bool {
        self.wide().is_unit(&self.ok_to_oe(a))
    }

    /// `prod_j (1 + T_j)^{x_j}`.
    pub fn group_like(&self, x: &OKElement) -> Result<TSeries> {
        let sr = &self.sr;
        let r = &sr.ring;
        let mut acc = sr.one();
        for (j, &xj) in x.0.iter().enumerate() {
            let mut factor = sr.zero();
            let mut e = vec![0u16; sr.nvars];
            for d in 0..sr.deg {
                let (c, _) = padic_binomial(r.p, r.prec, xj, d as u64)?;
                e[j] = d as u16;
                let idx = sr.index_of(&e).expect("pure power in window");
                factor.coeffs[idx] = r.from_u64(c);
            }
            acc = sr.mul(&acc, &factor);
        }
        Ok(acc)
    }

    /// `Y_{sigma_i}` in the `T` variables.
    fn y_generator_t(&self, i: usize) -> Result<TSeries> {
        let sr = &self.sr;
        let r = &sr.ring;
        if self.params.q() == 2 {
            let one = self.ok_from_i64(1);
            return Ok(sr.sub(&self.group_like(&one)?, &sr.one()));
        }
        let mut acc = sr.zero();
        let mut lambda = self.field.one();
        for _ in 0..self.params.q() - 1 {
            let lam_i = self.field.pow(&lambda, self.params.p.pow(i as u32));
            let weight = r.teichmuller(&self.field.inv(&lam_i).expect("nonzero"));
            let gl = self.group_like(&self.teich_ok(&lambda))?;
            acc = sr.add(&acc, &sr.scale(&gl, &weight));
            lambda = self.field.mul(&lambda, &self.gen);
        }
        Ok(acc)
    }

    /// `Y_{sigma_i}` in the `T` variables, reduced to precision `N`.
    pub fn y_generator(&self, i: usize) -> TSeries {
        self.sr.convert(&self.y_in_t[i], &self.out)
    }

    /// Linear part of `T -> Y`: `jac[i][j]` is the `T_j`-coefficient of `Y_i`.
    pub fn jacobian(&self) -> Vec<Vec<OEInt>> {
        let f = self.params.f;
        (0..f)
            .map(|i| {
                (0..f)
                    .map(|j| {
                        let mut e = vec![0u16; f];
                        e[j] = 1;
                        self.y_in_t[i].coeffs[self.sr.index_of(&e).unwrap()].clone()
                    })
                    .collect()
            })
            .collect()
    }

    fn y_to_t_inverse(&self) -> Result<Vec<TSeries>> {
        invert_substitution(&self.sr, &self.y_in_t)
    }

    /// `T_j = G_j(Y)` reduced to precision `N`.
    pub fn t_in_y_out(&self) -> Vec<TSeries> {
        self.t_in_y.iter().map(|g| self.sr.convert(g, &self.out)).collect()
    }

    /// Substitution `T_j -> (1 + T_j)^p - 1`.
    pub fn phi_map(&self, s: &TSeries) -> Result<TSeries> {
        let images = self.images_for(&|x: &OKElement| {
            let m = self.wide().pn;
            OKElement(x.0.iter().map(|c| crate::coeff::mulmod(*c, self.params.p, m)).collect())
        })?;
        Ok(self.sr.substitute(s, &images))
    }

    /// Matrix of multiplication by `a` on `O_K`: column `j` holds `a e_j`.
    pub fn okx_coordinates(&self, a: &OKElement) -> Result<Vec<Vec<u64>>> {
        if !self.is_unit(a) {
            return Err(Error::NotAUnit("element of O_K reduces to 0".into()));
        }
        let r = self.wide();
        let z = self.ok_to_oe(a);
        let f = self.params.f;
        let mut cols = Vec::with_capacity(f);
        for e in &self.basis {
            cols.push(self.oe_to_ok(&r.mul(&z, e))?.0);
        }
        Ok((0..f).map(|k| (0..f).map(|j| cols[j][k]).collect()).collect())
    }

    /// Product in `O_K`.
    pub fn ok_mul(&self, a: &OKElement, b: &OKElement) -> OKElement {
        let r = self.wide();
        self.oe_to_ok(&r.mul(&self.ok_to_oe(a), &self.ok_to_oe(b)))
            .expect("O_K is a ring")
    }

    /// Substitution `T_j -> [a e_j] - 1`.
    pub fn gamma_map(&self, a: &OKElement, s: &TSeries) -> Result<TSeries> {
        let c = self.okx_coordinates(a)?;
        let f = self.params.f;
        let mut images = Vec::with_capacity(f);
        for j in 0..f {
            let col = OKElement((0..f).map(|k| c[k][j]).collect());
            images.push(self.sr.sub(&self.group_like(&col)?, &self.sr.one()));
        }
        Ok(self.sr.substitute(s, &images))
    }

    fn images_for(&self, map: &dyn Fn(&OKElement) -> OKElement) -> Result<Vec<TSeries>> {
        let f = self.params.f;
        (0..f)
            .map(|j| {
                let mut e = vec![0u64; f];
                e[j] = 1;
                let img = map(&OKElement(e));
                Ok(self.sr.sub(&self.group_like(&img)?, &self.sr.one()))
            })
            .collect()
    }

    /// Express a series in `T` through the `Y` variables, at precision `N`.
    pub fn to_y(&self, s: &TSeries) -> TSeries {
        let v = self.sr.substitute(s, &self.t_in_y);
        self.sr.convert(&v, &self.out)
    }

    /// `phi(Y_{sigma_i})` as a series in the `Y` variables.
    pub fn phi_y(&self, i: usize) -> Result<TSeries> {
        Ok(self.to_y(&self.phi_map(&self.y_in_t[i])?))
    }

    /// `a(Y_{sigma_i})` as a series in the `Y` variables.
    pub fn gamma_y(&self, a: &OKElement, i: usize) -> Result<TSeries> {
        Ok(self.to_y(&self.gamma_map(a, &self.y_in_t[i])?))
    }

    /// `sigma_i(a)` in `O_E / p^N`.
    pub fn sigma(&self, a: &OKElement, i: usize) -> OEInt {
        let z = self.wide().frobenius_pow(&self.ok_to_oe(a), i);
        self.out.convert(&z)
    }
}

/// Inverse of the change of variables `Y_i = ys_i(T)`: returns `G` with
/// `T = G(Y)` modulo degree `M`.
///
/// Splitting `Y = L T + H(T)` with `L` linear, the fixed point of
/// `G = L^{-1} (Y - H(G))` gains one degree per pass.
pub fn invert_substitution(sr: &SeriesRing, ys: &[TSeries]) -> Result<Vec<TSeries>> {
    let f = sr.nvars;
    let r = &sr.ring;
    let lin_idx: Vec<usize> = (0..f)
        .map(|j| {
            let mut e = vec![0u16; f];
            e[j] = 1;
            sr.index_of(&e).expect("linear monomials exist")
        })
        .collect();
    let jac: Vec<Vec<OEInt>> = ys
        .iter()
        .map(|y| lin_idx.iter().map(|&k| y.coeffs[k].clone()).collect())
        .collect();
    let linv = invert_matrix(r, &jac).ok_or(Error::SingularJacobian)?;
    let higher: Vec<TSeries> = ys
        .iter()
        .map(|y| {
            let mut hs = y.clone();
            hs.coeffs[0] = r.zero();
            for &k in &lin_idx {
                hs.coeffs[k] = r.zero();
            }
            hs
        })
        .collect();
    let vars: Vec<TSeries> = (0..f).map(|j| sr.var(j)).collect();
    let apply_linv = |v: &[TSeries]| -> Vec<TSeries> {
        (0..f)
            .map(|j| {
                let mut acc = sr.zero();
                for (i, vi) in v.iter().enumerate() {
                    acc = sr.add(&acc, &sr.scale(vi, &linv[j][i]));
                }
                acc
            })
            .collect()
    };
    let mut g = apply_linv(&vars);
    for _ in 1..sr.deg {
        let rhs: Vec<TSeries> = (0..f)
            .map(|i| sr.sub(&vars[i], &sr.substitute(&higher[i], &g)))
            .collect();
        let next = apply_linv(&rhs);
        if next == g {
            break;
        }
        g = next;
    }
    Ok(g)
}

/// JSON view of a series.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TSeriesJson {
    pub p: u64,
    pub f: usize,
    pub h: usize,
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(rename = "M")]
    pub m: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub exponents: Vec<u16>,
    pub coeff: OEInt,
}

impl Iwasawa {
    pub fn to_json(&self, s: &TSeries) -> TSeriesJson {
        TSeriesJson {
            p: self.params.p,
            f: self.params.f,
            h: self.params.h,
            n: self.params.prec,
            m: self.params.deg,
            terms: self
                .sr
                .terms(s)
                .map(|(e, c)| TermJson {
                    exponents: e.clone(),
                    coeff: self.out.convert(c),
                })
                .collect(),
        }
    }

    pub fn from_json(&self, j: &TSeriesJson) -> Result<TSeries> {
        let mut s = self.sr.zero();
        for t in &j.terms {
            let idx = self
                .sr
                .index_of(&t.exponents)
                .ok_or_else(|| Error::Parse(format!("monomial {:?} outside window", t.exponents)))?;
            s.coeffs[idx] = self.sr.ring.from_coords(&t.coeff.0);
        }
        Ok(s)
    }

    /// Series ring at the output precision, for inspecting results.
    pub fn out_ring(&self) -> SeriesRing {
        SeriesRing::new(self.params.f, self.params.deg, self.out.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iw(p: u64, f: usize, h: usize, n: u32, m: usize) -> Iwasawa {
        Iwasawa::new(&Params::new(p, f, h, n, m).unwrap()).unwrap()
    }

    fn coeff_of(sr: &SeriesRing, s: &TSeries, e: &[u16]) -> OEInt {
        s.coeffs[sr.index_of(e).unwrap()].clone()
    }

    #[test]
    fn group_like_examples() {
        let w = iw(3, 1, 1, 3, 6);
        let sr = w.out_ring();
        let g0 = sr.convert(&w.group_like(&OKElement(vec![0])).unwrap(), &w.out);
        assert_eq!(g0, sr.one());
        let g1 = sr.convert(&w.group_like(&OKElement(vec![1])).unwrap(), &w.out);
        assert_eq!(sr.pretty(&g1, "T"), "T+1");
        let g2 = sr.convert(&w.group_like(&OKElement(vec![2])).unwrap(), &w.out);
        assert_eq!(sr.pretty(&g2, "T"), "T^2+2T+1");
    }

    #[test]
    fn group_like_is_a_homomorphism() {
        let w = iw(3, 2, 2, 3, 7);
        let m = w.wide().pn;
        let x = OKElement(vec![5, m - 7]);
        let y = OKElement(vec![m - 1, 13]);
        let xy = OKElement(vec![(5 + m - 1) % m, (m - 7 + 13) % m]);
        let lhs = w.sr.mul(&w.group_like(&x).unwrap(), &w.group_like(&y).unwrap());
        let rhs = w.group_like(&xy).unwrap();
        assert_eq!(w.sr.convert(&lhs, &w.out), w.sr.convert(&rhs, &w.out));
    }

    #[test]
    fn y_for_q_two_is_t() {
        let w = iw(2, 1, 1, 3, 8);
        let sr = w.out_ring();
        assert_eq!(w.y_generator(0), sr.var(0));
        assert_eq!(w.t_in_y_out()[0], sr.var(0));
        let phi = w.phi_y(0).unwrap();
        assert_eq!(sr.pretty(&phi, "Y"), "Y^2+2Y");
    }

    #[test]
    fn y_for_p_three_against_direct_expansion() {
        // Weights are inverse Teichmüller lifts: Y = [1] - [-1].
        let w = iw(3, 1, 1, 3, 6);
        let sr = w.out_ring();
        let y = w.y_generator(0);
        // (1+T) - (1+T)^{-1} = 2T - T^2 + T^3 - T^4 + T^5 mod degree 6.
        let expect = [0i64, 2, -1, 1, -1, 1];
        for (d, &c) in expect.iter().enumerate() {
            assert_eq!(coeff_of(&sr, &y, &[d as u16]), w.out.from_i64(c), "degree {d}");
        }
    }

    #[test]
    fn reversion_matches_catalan_oracle() {
        // Y = -T - T^2 inverts to T = -sum C_n Y^{n+1}.
        let params = Params::new(3, 1, 1, 4, 7).unwrap();
        let sr = SeriesRing::new(1, 7, CoeffRing::new(&params));
        let t = sr.var(0);
        let y = sr.sub(&sr.zero(), &sr.add(&t, &sr.mul(&t, &t)));
        let g = invert_substitution(&sr, &[y]).unwrap();
        let catalan = [1i64, 1, 2, 5, 14, 42];
        for (n, &c) in catalan.iter().enumerate() {
            assert_eq!(coeff_of(&sr, &g[0], &[n as u16 + 1]), sr.ring.from_i64(-c));
        }
    }

    #[test]
    fn singular_jacobian_is_reported() {
        let params = Params::new(3, 1, 1, 2, 5).unwrap();
        let sr = SeriesRing::new(1, 5, CoeffRing::new(&params));
        let t = sr.var(0);
        let y = sr.add(&sr.scale(&t, &sr.ring.from_u64(3)), &sr.mul(&t, &t));
        assert_eq!(invert_substitution(&sr, &[y]), Err(Error::SingularJacobian));
    }

    #[test]
    fn roundtrip_and_constant_terms() {
        for (p, f, h) in [(2, 1, 1), (3, 1, 1), (3, 2, 2), (2, 2, 2), (5, 2, 2)] {
            let w = iw(p, f, h, 3, 6);
            for i in 0..f {
                assert!(w.out.is_zero(&w.y_generator(i).coeffs[0]));
                let back = w.to_y(&w.y_in_t[i]);
                assert_eq!(back, w.out_ring().var(i), "(p,f,h)=({p},{f},{h}) i={i}");
            }
            for j in 0..f {
                let g = w.sr.substitute(&w.t_in_y[j], &w.y_in_t);
                assert_eq!(w.sr.convert(&g, &w.out), w.out_ring().var(j));
            }
        }
    }

    #[test]
    fn okx_coordinates_examples() {
        let w = iw(3, 2, 2, 3, 4);
        let one = w.ok_from_i64(1);
        let id = w.okx_coordinates(&one).unwrap();
        let m = w.wide().pn;
        assert_eq!(id, vec![vec![1, 0], vec![0, 1]]);
        let a = OKElement(vec![2, 1]);
        let ainv_oe = w.wide().inv(&w.ok_to_oe(&a)).unwrap();
        let ainv = w.oe_to_ok(&ainv_oe).unwrap();
        let ca = w.okx_coordinates(&a).unwrap();
        let cb = w.okx_coordinates(&ainv).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let s: u64 = (0..2).map(|k| ca[i][k] as u128 * cb[k][j] as u128 % m as u128).sum::<u128>() as u64 % m;
                assert_eq!(s, u64::from(i == j));
            }
        }
        assert!(w.okx_coordinates(&OKElement(vec![3, 6])).is_err());
        let w1 = iw(5, 1, 1, 2, 3);
        assert_eq!(w1.okx_coordinates(&OKElement(vec![7])).unwrap(), vec![vec![7]]);
    }

    #[test]
    fn phi_and_gamma_commute_and_act() {
        let w = iw(3, 2, 2, 2, 6);
        let s = w.sr.add(&w.y_in_t[0], &w.sr.mul(&w.y_in_t[1], &w.sr.var(0)));
        let a = OKElement(vec![2, 1]);
        let b = OKElement(vec![1, 4]);
        let lhs = w.phi_map(&w.gamma_map(&a, &s).unwrap()).unwrap();
        let rhs = w.gamma_map(&a, &w.phi_map(&s).unwrap()).unwrap();
        assert_eq!(w.sr.convert(&lhs, &w.out), w.sr.convert(&rhs, &w.out));
        let ab = w.ok_mul(&a, &b);
        let lhs = w.gamma_map(&ab, &s).unwrap();
        let rhs = w.gamma_map(&a, &w.gamma_map(&b, &s).unwrap()).unwrap();
        assert_eq!(w.sr.convert(&lhs, &w.out), w.sr.convert(&rhs, &w.out));
        let one = w.ok_from_i64(1);
        assert_eq!(w.gamma_y(&one, 1).unwrap(), w.out_ring().var(1));
    }

    #[test]
    fn phi_y_congruence_small() {
        let w = iw(3, 1, 1, 3, 10);
        let sr = w.out_ring();
        let phi = w.phi_y(0).unwrap();
        let diff = sr.sub(&phi, &sr.pow(&sr.var(0), 3));
        assert!(diff.coeffs.iter().all(|c| w.out.val(c) >= 1));
    }
}
