//! Truncated Laurent elements in `Y_0` and cross variables `Y_i / Y_0`.
//!
//! An element is a finite set of terms plus an error module
//! `sum_v p^v Y_0^{hi[v]} O[[Y_0]]<cross>`, one `Y_0`-bound per pi-adic
//! level `v < N`, and a floor: every unrepresented term of the true element
//! at valuation `v >= N` has `Y_0`-exponent at least `lo - slope * v`. Exponents are integers measured in units of `1 / scale`,
//! so the same type carries integral exponents (`scale = 1`) and
//! exponents in `p^{-k} Z` (`scale = p^k`).

use std::collections::BTreeMap;

use num_rational::Ratio;
use smallvec::SmallVec;

use crate::coeff::{CoeffRing, OEInt};
use crate::error::{Error, Result};

/// Exponent key `[n_0, n_1, .., n_{f-1}]`.
pub type Key = SmallVec<[i64; 4]>;

/// Marker for "known to infinite `Y_0`-order".
pub const INF: i64 = i64::MAX / 4;

#[inline]
pub fn add_hi(a: i64, b: i64) -> i64 {
    if a >= INF || b >= INF {
        INF
    } else {
        (a + b).min(INF)
    }
}

/// Lower cone `n_0 >= lo - slope * v` for the terms beyond the represented
/// ones. `lo = INF` adds no terms; `lo <= -INF` means no bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Floor {
    pub lo: i64,
    pub slope: i64,
}

impl Floor {
    pub const EXACT: Floor = Floor { lo: INF, slope: 0 };

    pub fn meet(self, other: Floor) -> Floor {
        Floor {
            lo: self.lo.min(other.lo),
            slope: self.slope.max(other.slope),
        }
    }

    /// Floor of a product.
    pub fn times(self, other: Floor) -> Floor {
        Floor {
            lo: add_hi(self.lo, other.lo).max(-INF),
            slope: self.slope.max(other.slope),
        }
    }

    /// Floor after `n_0 -> alpha n_0` with an extra loss of `beta` per level.
    pub fn transport(self, alpha: i64, beta: i64) -> Floor {
        let lo = if self.lo >= INF {
            INF
        } else {
            self.lo.saturating_mul(alpha).clamp(-INF, INF)
        };
        Floor {
            lo,
            slope: self.slope.saturating_mul(alpha).max(beta),
        }
    }

    fn unbounded(self) -> bool {
        self.lo <= -INF
    }
}

#[derive(Clone, Debug)]
pub struct Laurent {
    pub terms: BTreeMap<Key, OEInt>,
    /// `hi[v]`: all terms of valuation `>= v` and `Y_0`-exponent `>= hi[v]`
    /// are unknown. Non-increasing in `v`.
    pub hi: Vec<i64>,
    /// Bound on the unrepresented terms of valuation `>= N`.
    pub floor: Floor,
}

/// Equality of truncated values; the floor is bookkeeping only.
impl PartialEq for Laurent {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms && self.hi == other.hi
    }
}

impl Eq for Laurent {}

impl Laurent {
    pub fn new(terms: BTreeMap<Key, OEInt>, hi: Vec<i64>) -> Self {
        Laurent {
            terms,
            hi,
            floor: Floor::EXACT,
        }
    }

    pub fn with_floor(mut self, floor: Floor) -> Self {
        self.floor = floor;
        self
    }
}

/// Ambient data shared by a family of elements.
#[derive(Clone, Debug)]
pub struct LaurentCtx {
    pub ring: CoeffRing,
    /// Number of variables `f` (key length).
    pub nvars: usize,
    pub scale: i64,
    pub band: i64,
}

/// Weighted valuation `min_terms (w v_p(c) + n_0 / scale)` and the bound
/// below which it is certified.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weighted {
    /// `None` when there are no terms.
    pub measured: Option<Ratio<i64>>,
    /// Smallest weight that the error module can reach (`None` = infinite).
    pub bound: Option<Ratio<i64>>,
    /// The error module has no lower bound at this weight.
    pub unbounded: bool,
}

impl Weighted {
    pub fn certified(&self) -> bool {
        if self.unbounded {
            return false;
        }
        match (&self.measured, &self.bound) {
            // Error terms cannot cancel a represented term, so a tie still
            // determines the minimum.
            (Some(m), Some(b)) => m <= b,
            (Some(_), None) => true,
            (None, None) => true,
            (None, Some(_)) => false,
        }
    }

    /// A value the true weighted valuation is guaranteed to reach.
    pub fn lower_bound(&self) -> Option<Ratio<i64>> {
        if self.unbounded {
            return None;
        }
        match (&self.measured, &self.bound) {
            (Some(m), Some(b)) => Some(*m.min(b)),
            (Some(m), None) => Some(*m),
            (None, b) => *b,
        }
    }
}

impl LaurentCtx {
    pub fn new(ring: CoeffRing, nvars: usize, scale: i64, band: i64) -> Self {
        LaurentCtx {
            ring,
            nvars,
            scale,
            band,
        }
    }

    pub fn prec(&self) -> usize {
        self.ring.prec as usize
    }

    pub fn zero_key(&self) -> Key {
        SmallVec::from_elem(0, self.nvars)
    }

    pub fn zero(&self) -> Laurent {
        Laurent::new(BTreeMap::new(), vec![INF; self.prec()])
    }

    pub fn monomial(&self, key: Key, c: OEInt) -> Laurent {
        let mut terms = BTreeMap::new();
        if !self.ring.is_zero(&c) {
            terms.insert(key, c);
        }
        Laurent::new(terms, vec![INF; self.prec()])
    }

    pub fn constant(&self, c: OEInt) -> Laurent {
        self.monomial(self.zero_key(), c)
    }

    pub fn one(&self) -> Laurent {
        self.constant(self.ring.one())
    }

    /// `Y_0^{n}` with `n` in units of `1 / scale`.
    pub fn y0_pow(&self, n: i64) -> Laurent {
        let mut k = self.zero_key();
        k[0] = n;
        self.monomial(k, self.ring.one())
    }

    /// `(Y_i / Y_0)^n`.
    pub fn cross(&self, i: usize, n: i64) -> Laurent {
        let mut k = self.zero_key();
        k[i] = n;
        self.monomial(k, self.ring.one())
    }

    /// Precision of a coefficient sitting at `Y_0`-exponent `n0`.
    pub fn prec_at(hi: &[i64], n0: i64) -> u32 {
        hi.iter().position(|&h| h <= n0).unwrap_or(hi.len()) as u32
    }

    fn normalize_hi(&self, hi: &mut [i64]) {
        for v in 1..hi.len() {
            hi[v] = hi[v].min(hi[v - 1]);
        }
        for h in hi.iter_mut() {
            *h = (*h).min(INF);
        }
    }

    /// Reduce coefficients to their certified precision, drop zeros and
    /// enforce the cross-exponent band.
    pub fn canonical(&self, terms: BTreeMap<Key, OEInt>, hi: Vec<i64>) -> Result<Laurent> {
        self.canonical_with(terms, hi, Floor::EXACT)
    }

    /// As [`Self::canonical`], keeping a floor for terms beyond `p^N`.
    pub fn canonical_with(&self, terms: BTreeMap<Key, OEInt>, mut hi: Vec<i64>, floor: Floor) -> Result<Laurent> {
        self.normalize_hi(&mut hi);
        let mut out = BTreeMap::new();
        for (k, c) in terms {
            let pr = Self::prec_at(&hi, k[0]);
            if pr == 0 {
                continue;
            }
            let c = self.ring.reduce_to(&c, pr);
            if self.ring.is_zero(&c) {
                continue;
            }
            if let Some(&e) = k[1..].iter().find(|e| e.abs() > self.band) {
                return Err(Error::BandOverflow {
                    exponent: e,
                    band: self.band,
                });
            }
            out.insert(k, c);
        }
        Ok(Laurent { terms: out, hi, floor })
    }

    /// Shrink the known window: `hi[v] <- min(hi[v], cap)`.
    pub fn cap(&self, x: &Laurent, cap: i64) -> Laurent {
        let hi: Vec<i64> = x.hi.iter().map(|&h| h.min(cap)).collect();
        self.canonical_with(x.terms.clone(), hi, x.floor)
            .expect("capping never enlarges the band")
    }

    /// Same element with every level's bound lowered to the given vector.
    pub fn cap_levels(&self, x: &Laurent, caps: &[i64]) -> Laurent {
        let hi: Vec<i64> = x.hi.iter().zip(caps).map(|(&h, &c)| h.min(c)).collect();
        self.canonical_with(x.terms.clone(), hi, x.floor)
            .expect("capping never enlarges the band")
    }

    pub fn add(&self, x: &Laurent, y: &Laurent) -> Result<Laurent> {
        let mut terms = x.terms.clone();
        for (k, c) in &y.terms {
            let e = terms.entry(k.clone()).or_insert_with(|| self.ring.zero());
            self.ring.add_assign(e, c);
        }
        let hi = x.hi.iter().zip(&y.hi).map(|(a, b)| *a.min(b)).collect();
        let slope = x.floor.slope.max(y.floor.slope);
        let mut floor = self.open_at(x, slope).meet(self.open_at(y, slope));
        // A cancelled key leaves its p^N ambiguity unrepresented.
        let n = self.prec() as i64;
        for (k, c) in &terms {
            if self.ring.is_zero(c) {
                floor.lo = floor.lo.min(k[0] + slope * n);
            }
        }
        self.canonical_with(terms, hi, floor)
    }

    pub fn neg(&self, x: &Laurent) -> Laurent {
        Laurent {
            terms: x
                .terms
                .iter()
                .map(|(k, c)| (k.clone(), self.ring.neg(c)))
                .collect(),
            hi: x.hi.clone(),
            floor: x.floor,
        }
    }

    pub fn sub(&self, x: &Laurent, y: &Laurent) -> Result<Laurent> {
        self.add(x, &self.neg(y))
    }

    pub fn scale_by(&self, x: &Laurent, c: &OEInt) -> Laurent {
        let vc = self.ring.val(c) as usize;
        let mut hi = vec![INF; self.prec()];
        for (v, h) in x.hi.iter().enumerate() {
            if v + vc < hi.len() {
                hi[v + vc] = hi[v + vc].min(*h);
            }
        }
        let terms = x
            .terms
            .iter()
            .map(|(k, a)| (k.clone(), self.ring.mul(a, c)))
            .collect();
        // The tail moves up vc levels; terms pushed past p^N join it.
        let t = self.open_at(x, x.floor.slope);
        let mut lo = if t.lo >= INF || t.unbounded() { t.lo } else { t.lo + t.slope * vc as i64 };
        for (k, a) in &x.terms {
            let v = self.ring.val(a) as i64 + vc as i64;
            if v >= self.prec() as i64 {
                lo = lo.min(k[0] + t.slope * v);
            }
        }
        let floor = Floor { lo, slope: t.slope };
        self.canonical_with(terms, hi, floor).expect("scaling keeps keys")
    }

    /// Multiply by the monomial with the given key (exact shift).
    pub fn shift(&self, x: &Laurent, key: &Key) -> Result<Laurent> {
        let terms = x
            .terms
            .iter()
            .map(|(k, c)| (add_keys(k, key), c.clone()))
            .collect();
        let hi = x.hi.iter().map(|&h| add_hi(h, key[0])).collect();
        let floor = Floor {
            lo: add_hi(x.floor.lo, key[0]).max(-INF),
            slope: x.floor.slope,
        };
        self.canonical_with(terms, hi, floor)
    }

    /// Floor covering every term of the true element: the stored floor,
    /// the represented terms and the unknown windows.
    pub fn floor(&self, x: &Laurent) -> Floor {
        self.floor_at(x, x.floor.slope)
    }

    /// [`Self::floor`] with the slope raised to at least `slope`.
    pub fn floor_at(&self, x: &Laurent, slope: i64) -> Floor {
        let slope = slope.max(x.floor.slope);
        let mut lo = self.tail_at(x, slope).lo;
        for (k, c) in &x.terms {
            lo = lo.min(k[0] + slope * self.ring.val(c) as i64);
        }
        Floor { lo: lo.max(-INF), slope }
    }

    /// Floor of everything not determined by the represented coefficients:
    /// the stored floor, the unknown windows, and the `p^N` ambiguity of
    /// each represented coefficient.
    pub fn tail_at(&self, x: &Laurent, slope: i64) -> Floor {
        let mut f = self.open_at(x, slope);
        let n = self.prec() as i64;
        for k in x.terms.keys() {
            f.lo = f.lo.min(k[0] + f.slope * n);
        }
        f
    }

    /// Floor of the stored cone and the unknown windows only.
    pub fn open_at(&self, x: &Laurent, slope: i64) -> Floor {
        let slope = slope.max(x.floor.slope);
        let mut lo = x.floor.lo;
        for (v, &h) in x.hi.iter().enumerate() {
            if h < INF {
                lo = lo.min(h.saturating_add(slope * v as i64));
            }
        }
        Floor { lo: lo.max(-INF), slope }
    }

    /// Minimal `Y_0`-exponent of the terms of exact valuation `v`, per level.
    pub fn lo_levels(&self, x: &Laurent) -> Vec<i64> {
        let mut lo = vec![INF; self.prec()];
        for (k, c) in &x.terms {
            let v = self.ring.val(c) as usize;
            if v < lo.len() {
                lo[v] = lo[v].min(k[0]);
            }
        }
        lo
    }

    pub fn mul(&self, x: &Laurent, y: &Laurent) -> Result<Laurent> {
        let n = self.prec();
        let lx = self.lo_levels(x);
        let ly = self.lo_levels(y);
        let mut hi = vec![INF; n];
        for u in 0..n {
            for v in 0..n - u {
                let w = u + v;
                let cand = add_hi(lx[v], y.hi[u])
                    .min(add_hi(ly[v], x.hi[u]))
                    .min(add_hi(x.hi[u], y.hi[v]));
                hi[w] = hi[w].min(cand);
            }
        }
        self.normalize_hi(&mut hi);
        let xs: Vec<(&Key, &OEInt, usize)> = x
            .terms
            .iter()
            .map(|(k, c)| (k, c, self.ring.val(c) as usize))
            .collect();
        let mut terms: BTreeMap<Key, OEInt> = BTreeMap::new();
        let slope = x.floor.slope.max(y.floor.slope);
        let mut dropped = INF;
        for (ky, cy) in &y.terms {
            let vy = self.ring.val(cy) as usize;
            for &(kx, cx, vx) in &xs {
                let vv = vx + vy;
                if vv >= n {
                    dropped = dropped.min(kx[0] + ky[0] + slope * vv as i64);
                    continue;
                }
                if kx[0] + ky[0] >= hi[vv] {
                    continue;
                }
                let k = add_keys(kx, ky);
                let t = self.ring.mul(cx, cy);
                match terms.get_mut(&k) {
                    Some(e) => self.ring.add_assign(e, &t),
                    None => {
                        terms.insert(k, t);
                    }
                }
            }
        }
        let (ex, ey) = (self.floor_at(x, slope), self.floor_at(y, slope));
        let (tx, ty) = (self.tail_at(x, slope), self.tail_at(y, slope));
        let mut floor = tx.times(ey).meet(ex.times(ty));
        floor.lo = floor.lo.min(dropped);
        self.canonical_with(terms, hi, floor)
    }

    pub fn pow(&self, x: &Laurent, e: u64) -> Result<Laurent> {
        let mut acc = self.one();
        let mut base = x.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base)?;
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base)?;
            }
        }
        Ok(acc)
    }

    /// True when `x` lies in the error module with bounds `e`.
    fn inside(&self, x: &Laurent, e: &[i64]) -> bool {
        x.hi.iter().zip(e).all(|(a, b)| a >= b)
            && x.terms.iter().all(|(k, c)| {
                let v = self.ring.val(c) as usize;
                v >= e.len() || k[0] >= e[v]
            })
    }

    /// The leading term `u m` of a unit: the unique valuation-0 term of
    /// minimal `Y_0`-exponent.
    pub fn leading_unit(&self, x: &Laurent) -> Result<(Key, OEInt)> {
        let mut best: Option<(&Key, &OEInt)> = None;
        let mut tie = false;
        for (k, c) in &x.terms {
            if !self.ring.is_unit(c) {
                continue;
            }
            match best {
                None => best = Some((k, c)),
                Some((bk, _)) if k[0] < bk[0] => {
                    best = Some((k, c));
                    tie = false;
                }
                Some((bk, _)) if k[0] == bk[0] => tie = true,
                _ => {}
            }
        }
        let (k, c) = best.ok_or_else(|| Error::NotAUnit("no unit coefficient".into()))?;
        if tie {
            return Err(Error::NotAUnit(
                "leading slice is not a single monomial".into(),
            ));
        }
        if x.hi[0] <= k[0] {
            return Err(Error::NotAUnit(
                "leading term is not inside the known window".into(),
            ));
        }
        Ok((k.clone(), c.clone()))
    }

    /// Inverse of `u m (1 + t)` by the geometric series in `t`.
    ///
    /// When `t` has valuation-0 terms the series is infinite; its terms are
    /// kept up to relative `Y_0`-order `window`.
    pub fn invert_unit(&self, x: &Laurent, window: i64) -> Result<Laurent> {
        let (lk, lc) = self.leading_unit(x)?;
        let uinv = self.ring.inv(&lc).expect("leading coefficient is a unit");
        let neg_key: Key = lk.iter().map(|e| -e).collect();
        let normalized = self.scale_by(&self.shift(x, &neg_key)?, &uinv);
        // (1 + t)^{-1} = sum (-t)^k; work with -t directly.
        let mut t = self.sub(&self.one(), &normalized)?;
        if t.terms.keys().zip(t.terms.values()).any(|(_, c)| self.ring.is_unit(c)) {
            t = self.cap(&t, window);
        }
        // Level-0 terms of t have positive exponent, so a cone through the
        // origin covers t and all of its powers.
        let ft = self.floor(&t);
        t.floor = if ft.unbounded() {
            ft
        } else {
            Floor {
                lo: 0,
                slope: ft.slope + (-ft.lo).max(0),
            }
        };
        let mut sum = self.one();
        let mut power = self.one();
        let limit = 4 * (window.max(1) as usize + 2) * (self.prec() + 1) + 16;
        for _ in 0..limit {
            power = self.mul(&power, &t)?;
            // Once t^k and t * E lie in the error module E of the partial
            // sum, every later power does too.
            if self.inside(&power, &sum.hi) {
                let probe = Laurent::new(BTreeMap::new(), sum.hi.clone());
                if self.inside(&self.mul(&probe, &t)?, &sum.hi) {
                    return self.finish_inverse(&sum, &uinv, &neg_key);
                }
            }
            sum = self.add(&sum, &power)?;
        }
        Err(Error::PrecisionExhausted(
            "geometric series did not close within the window".into(),
        ))
    }

    fn finish_inverse(&self, sum: &Laurent, uinv: &OEInt, neg_key: &Key) -> Result<Laurent> {
        self.shift(&self.scale_by(sum, uinv), neg_key)
    }

    /// `x == y` at the joint precision.
    pub fn agree(&self, x: &Laurent, y: &Laurent) -> bool {
        self.sub(x, y).map(|d| d.terms.is_empty()).unwrap_or(false)
    }

    /// `min_terms (w v_p(c) + n_0 / scale)` with its certification bound.
    pub fn weighted(&self, x: &Laurent, w: Ratio<i64>) -> Weighted {
        let s = Ratio::from_integer(self.scale);
        let measured = x
            .terms
            .iter()
            .map(|(k, c)| w * Ratio::from_integer(self.ring.val(c) as i64) + Ratio::from_integer(k[0]) / s)
            .min();
        let mut bound = if self.ring.prec as i64 >= INF {
            None
        } else {
            Some(w * Ratio::from_integer(self.ring.prec as i64))
        };
        if w == Ratio::from_integer(0) {
            bound = None;
        }
        let mut unbounded = false;
        if bound.is_some() {
            // Unrepresented terms beyond p^N lie above the stored cone.
            let f = x.floor;
            if f.unbounded() || w * s < Ratio::from_integer(f.slope) {
                unbounded = f.lo < INF;
                bound = None;
            } else if f.lo < INF {
                let n = Ratio::from_integer(self.ring.prec as i64);
                bound = Some(w * n + (Ratio::from_integer(f.lo) - Ratio::from_integer(f.slope) * n) / s);
            } else {
                bound = None;
            }
        }
        for (v, &h) in x.hi.iter().enumerate() {
            if h >= INF {
                continue;
            }
            let b = w * Ratio::from_integer(v as i64) + Ratio::from_integer(h) / s;
            bound = Some(match bound {
                Some(old) if old <= b => old,
                _ => b,
            });
        }
        Weighted {
            measured,
            bound,
            unbounded,
        }
    }

    /// Terms of the given valuation.
    pub fn level_terms<'a>(&'a self, x: &'a Laurent, v: u32) -> impl Iterator<Item = (&'a Key, &'a OEInt)> {
        x.terms.iter().filter(move |(_, c)| self.ring.val(c) == v)
    }

    /// Smallest `n_0` over all terms.
    pub fn min_n0(&self, x: &Laurent) -> Option<i64> {
        x.terms.keys().map(|k| k[0]).min()
    }

    /// Reduce into another context with the same key shape (e.g. mod `p`).
    pub fn convert(&self, x: &Laurent, to: &LaurentCtx) -> Result<Laurent> {
        let terms = x
            .terms
            .iter()
            .map(|(k, c)| (k.clone(), to.ring.convert(c)))
            .collect();
        let mut hi: Vec<i64> = x.hi.clone();
        hi.resize(to.prec(), *x.hi.last().unwrap_or(&INF));
        if to.prec() > self.prec() {
            for h in hi.iter_mut().skip(self.prec()) {
                *h = i64::MIN / 4;
            }
        }
        to.canonical_with(terms, hi, self.floor(x))
    }
}

/// Images of `Y_0^{+-1}` and of the cross variables `(Y_i / Y_0)^{+-1}`
/// under a ring map into some target context.
#[derive(Clone, Debug)]
pub struct Images {
    pub y0: Laurent,
    pub y0_inv: Laurent,
    /// Index 0 is unused.
    pub cross: Vec<Laurent>,
    pub cross_inv: Vec<Laurent>,
}

/// How a source error module `p^v Y_0^h O[[Y_0]]<cross>` is carried by a
/// substitution: into `sum_j p^{v+j} Y_0^{alpha h - beta j} O[[Y_0]]<cross>`
/// (target units).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rule {
    pub alpha: i64,
    pub beta: i64,
}

/// Evaluate `x` at the given images.
pub fn substitute(
    x: &Laurent,
    imgs: &Images,
    rule: Rule,
    target: &LaurentCtx,
) -> Result<Laurent> {
    let n = target.prec();
    let mut hi = vec![INF; n];
    for (v, &h) in x.hi.iter().enumerate() {
        if h >= INF {
            continue;
        }
        for j in 0..n.saturating_sub(v) {
            hi[v + j] = hi[v + j].min(rule.alpha * h - rule.beta * j as i64);
        }
    }
    // Unrepresented terms of x follow the same rule.
    let src = LaurentCtx::new(target.ring.clone(), target.nvars, 1, target.band);
    let t = if rule.alpha > 0 { rule.beta / rule.alpha } else { 0 };
    let floor = src
        .tail_at(&Laurent { terms: x.terms.clone(), hi: x.hi.clone(), floor: x.floor }, t)
        .transport(rule.alpha, rule.beta);
    let mut acc = Laurent::new(BTreeMap::new(), hi).with_floor(floor);
    let mut cache: std::collections::HashMap<(usize, i64), Laurent> = Default::default();
    for (k, c) in &x.terms {
        let mut term = target.constant(target.ring.convert(c));
        for (var, &e) in k.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let pw = power_of(target, imgs, var, e, &mut cache)?;
            term = target.mul(&term, &pw)?;
        }
        acc = target.add(&acc, &term)?;
    }
    Ok(acc)
}

fn power_of(
    ctx: &LaurentCtx,
    imgs: &Images,
    var: usize,
    e: i64,
    cache: &mut std::collections::HashMap<(usize, i64), Laurent>,
) -> Result<Laurent> {
    if let Some(v) = cache.get(&(var, e)) {
        return Ok(v.clone());
    }
    let base = match (var, e > 0) {
        (0, true) => &imgs.y0,
        (0, false) => &imgs.y0_inv,
        (i, true) => &imgs.cross[i],
        (i, false) => &imgs.cross_inv[i],
    };
    let step = e.signum();
    let out = if e == step {
        base.clone()
    } else {
        let prev = power_of(ctx, imgs, var, e - step, cache)?;
        ctx.mul(&prev, base)?
    };
    cache.insert((var, e), out.clone());
    Ok(out)
}

pub fn add_keys(a: &Key, b: &Key) -> Key {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Params;

    fn ctx(p: u64, f: usize, n: u32) -> LaurentCtx {
        let params = Params::new(p, f, f, n, 8).unwrap();
        LaurentCtx::new(CoeffRing::new(&params), f, 1, 20)
    }

    #[test]
    fn difference_of_squares() {
        let c = ctx(3, 1, 3);
        let py = c.scale_by(&c.y0_pow(-1), &c.ring.from_u64(3));
        let a = c.add(&c.one(), &py).unwrap();
        let b = c.sub(&c.one(), &py).unwrap();
        let prod = c.mul(&a, &b).unwrap();
        let expect = c
            .sub(&c.one(), &c.scale_by(&c.y0_pow(-2), &c.ring.from_u64(9)))
            .unwrap();
        assert_eq!(prod, expect);
        assert_eq!(c.mul(&a, &c.zero()).unwrap(), c.zero());
        assert_eq!(c.mul(&c.y0_pow(1), &c.y0_pow(-1)).unwrap(), c.one());
    }

    #[test]
    fn inverse_of_one_plus_p_over_y() {
        let c = ctx(3, 1, 3);
        let x = c
            .add(&c.one(), &c.scale_by(&c.y0_pow(-1), &c.ring.from_u64(3)))
            .unwrap();
        let inv = c.invert_unit(&x, 8).unwrap();
        let expect = [(0, 1i64), (-1, -3), (-2, 9)];
        assert_eq!(inv.terms.len(), 3);
        for (n0, coeff) in expect {
            let mut k = c.zero_key();
            k[0] = n0;
            assert_eq!(inv.terms[&k], c.ring.from_i64(coeff));
        }
        assert!(inv.hi.iter().all(|&h| h >= INF));
        assert_eq!(c.mul(&x, &inv).unwrap(), c.one());
    }

    #[test]
    fn inverse_of_monomials_and_series() {
        let c = ctx(5, 2, 2);
        let inv = c.invert_unit(&c.cross(1, 1), 6).unwrap();
        assert_eq!(inv, c.cross(1, -1));
        assert_eq!(c.invert_unit(&c.y0_pow(1), 6).unwrap(), c.y0_pow(-1));
        // 1 - Y: inverse is the truncated geometric series.
        let x = c.sub(&c.one(), &c.y0_pow(1)).unwrap();
        let inv = c.invert_unit(&x, 6).unwrap();
        assert_eq!(inv.hi[0], 6);
        assert_eq!(inv.terms.len(), 6);
        let prod = c.mul(&x, &inv).unwrap();
        assert!(c.agree(&prod, &c.one()));
        assert_eq!(prod.hi[0], 6);
    }

    #[test]
    fn not_a_unit() {
        let c = ctx(3, 2, 2);
        let x = c.add(&c.one(), &c.cross(1, 1)).unwrap();
        assert!(matches!(c.invert_unit(&x, 5), Err(Error::NotAUnit(_))));
        let p = c.constant(c.ring.from_u64(3));
        assert!(matches!(c.invert_unit(&p, 5), Err(Error::NotAUnit(_))));
    }

    #[test]
    fn band_overflow() {
        let mut c = ctx(3, 2, 2);
        c.band = 2;
        let x = c.cross(1, 2);
        assert_eq!(
            c.mul(&x, &x),
            Err(Error::BandOverflow {
                exponent: 4,
                band: 2
            })
        );
    }

    #[test]
    fn error_propagation_is_conservative() {
        // (Y + O(Y^4)) * (p Y^{-2}) = p Y^{-1} + p O(Y^2)
        let c = ctx(3, 1, 3);
        let x = c.cap(&c.y0_pow(1), 4);
        let y = c.scale_by(&c.y0_pow(-2), &c.ring.from_u64(3));
        let prod = c.mul(&x, &y).unwrap();
        assert_eq!(prod.hi, vec![INF, 2, 2]);
        assert_eq!(prod.terms.len(), 1);
    }
}
