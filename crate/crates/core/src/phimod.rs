//! Étale `phi_q`-modules given by matrices over the truncated ring, with
//! sampled `O_K^x`-actions, base change and overconvergence certificates.
//!
//! Column convention: `phi_q(e_j) = sum_i P[i][j] e_i`, likewise for `G_a`.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::coeff::OEInt;
use crate::error::{Error, Result};
use crate::iwasawa::OKElement;
use crate::json::Rational;
use crate::laurent::{Laurent, INF};
use crate::mvring::{MvLaurentJson, MvRing, RingTag};

/// Row-major square matrix.
pub type Matrix = Vec<Vec<Laurent>>;

#[derive(Clone, Debug)]
pub struct PhiModule {
    pub rank: usize,
    pub tag: RingTag,
    pub p: Matrix,
    pub action: Vec<(OKElement, Matrix)>,
}

/// Matrix arithmetic over one [`MvRing`].
pub struct MatOps<'a> {
    pub ring: &'a MvRing,
}

impl<'a> MatOps<'a> {
    pub fn new(ring: &'a MvRing) -> Self {
        MatOps { ring }
    }

    pub fn identity(&self, d: usize) -> Matrix {
        let ctx = &self.ring.ctx;
        (0..d)
            .map(|i| (0..d).map(|j| if i == j { ctx.one() } else { ctx.zero() }).collect())
            .collect()
    }

    pub fn diag(&self, entries: Vec<Laurent>) -> Matrix {
        let d = entries.len();
        let mut m = self.zeros(d);
        for (i, e) in entries.into_iter().enumerate() {
            m[i][i] = e;
        }
        m
    }

    fn zeros(&self, d: usize) -> Matrix {
        vec![vec![self.ring.ctx.zero(); d]; d]
    }

    pub fn mul(&self, a: &Matrix, b: &Matrix) -> Result<Matrix> {
        let ctx = &self.ring.ctx;
        let d = a.len();
        let mut out = self.zeros(d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = ctx.zero();
                for k in 0..d {
                    acc = ctx.add(&acc, &ctx.mul(&a[i][k], &b[k][j])?)?;
                }
                out[i][j] = acc;
            }
        }
        Ok(out)
    }

    pub fn map(&self, a: &Matrix, f: impl Fn(&Laurent) -> Result<Laurent>) -> Result<Matrix> {
        a.iter()
            .map(|row| row.iter().map(&f).collect::<Result<Vec<_>>>())
            .collect()
    }

    pub fn det(&self, a: &Matrix) -> Result<Laurent> {
        let ctx = &self.ring.ctx;
        match a.len() {
            0 => Ok(ctx.one()),
            1 => Ok(a[0][0].clone()),
            d => {
                let mut acc = ctx.zero();
                for j in 0..d {
                    let minor = self.minor(a, 0, j);
                    let term = ctx.mul(&a[0][j], &self.det(&minor)?)?;
                    acc = if j % 2 == 0 {
                        ctx.add(&acc, &term)?
                    } else {
                        ctx.sub(&acc, &term)?
                    };
                }
                Ok(acc)
            }
        }
    }

    fn minor(&self, a: &Matrix, row: usize, col: usize) -> Matrix {
        a.iter()
            .enumerate()
            .filter(|(i, _)| *i != row)
            .map(|(_, r)| {
                r.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != col)
                    .map(|(_, x)| x.clone())
                    .collect()
            })
            .collect()
    }

    /// Inverse via the adjugate; `det` must be a unit of the full ring.
    pub fn inverse(&self, a: &Matrix) -> Result<Matrix> {
        let ctx = &self.ring.ctx;
        let d = a.len();
        let dinv = self.ring.invert_unit(&self.det(a)?)?;
        let mut out = self.zeros(d);
        for i in 0..d {
            for j in 0..d {
                let cof = if d == 1 {
                    ctx.one()
                } else {
                    self.det(&self.minor(a, j, i))?
                };
                let cof = if (i + j) % 2 == 0 { cof } else { ctx.neg(&cof) };
                out[i][j] = ctx.mul(&cof, &dinv)?;
            }
        }
        Ok(out)
    }

    pub fn agree(&self, a: &Matrix, b: &Matrix) -> bool {
        a.iter()
            .zip(b)
            .all(|(ra, rb)| ra.iter().zip(rb).all(|(x, y)| self.ring.ctx.agree(x, y)))
    }

    pub fn kronecker(&self, a: &Matrix, b: &Matrix) -> Result<Matrix> {
        let (da, db) = (a.len(), b.len());
        let mut out = self.zeros(da * db);
        for i in 0..da {
            for j in 0..da {
                for k in 0..db {
                    for l in 0..db {
                        out[i * db + k][j * db + l] = self.ring.ctx.mul(&a[i][j], &b[k][l])?;
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Whether `x` is a unit of the ring named by `tag`.
///
/// Over the full ring a unique valuation-0 leading monomial suffices. Over
/// the integral tags that monomial must have `Y_0`-exponent 0 and both `x`
/// and its inverse must be members.
pub fn is_unit_in(ring: &MvRing, x: &Laurent, tag: RingTag) -> Result<bool> {
    let ctx = &ring.ctx;
    let lead = match ctx.leading_unit(x) {
        Ok(l) => l,
        Err(Error::NotAUnit(msg)) => {
            let has_unit = x.terms.values().any(|c| ctx.ring.is_unit(c));
            let tail_unknown = x.hi[0] < INF;
            return if tail_unknown && (!has_unit || msg.contains("window")) {
                Err(Error::Uncertified(format!("leading slice unresolved: {msg}")))
            } else {
                Ok(false)
            };
        }
        Err(e) => return Err(e),
    };
    if tag == RingTag::Full {
        return Ok(true);
    }
    if lead.0[0] != 0 {
        return Ok(false);
    }
    let inv = ring.invert_unit(x)?;
    for y in [x, &inv] {
        let m = ring.member(y, tag);
        if !m.certified {
            return Err(Error::Uncertified("membership of a unit candidate".into()));
        }
        if !m.holds {
            return Ok(false);
        }
    }
    Ok(true)
}

impl PhiModule {
    pub fn is_etale(&self, ring: &MvRing) -> Result<bool> {
        let det = MatOps::new(ring).det(&self.p)?;
        is_unit_in(ring, &det, self.tag)
    }

    /// `G_a gamma_a(P) = P phi_q(G_a)` for every sample.
    pub fn commutation_holds(&self, ring: &MvRing) -> Result<bool> {
        let ops = MatOps::new(ring);
        for (a, g) in &self.action {
            let imgs = ring.gamma_images(a)?;
            let lhs = ops.mul(g, &ops.map(&self.p, |x| ring.apply_gamma_with(&imgs, x))?)?;
            let rhs = ops.mul(&self.p, &ops.map(g, |x| ring.apply_phi_q(x))?)?;
            if !ops.agree(&lhs, &rhs) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Change of basis `e' = e U`.
    pub fn base_change(&self, ring: &MvRing, u: &Matrix) -> Result<PhiModule> {
        let ops = MatOps::new(ring);
        if u.len() != self.rank {
            return Err(Error::InvalidParams("basis change has the wrong size".into()));
        }
        let uinv = ops.inverse(u)?;
        let p = ops.mul(&ops.mul(&uinv, &self.p)?, &ops.map(u, |x| ring.apply_phi_q(x))?)?;
        let action = self
            .action
            .iter()
            .map(|(a, g)| {
                let imgs = ring.gamma_images(a)?;
                let gu = ops.map(u, |x| ring.apply_gamma_with(&imgs, x))?;
                Ok((a.clone(), ops.mul(&ops.mul(&uinv, g)?, &gu)?))
            })
            .collect::<Result<_>>()?;
        Ok(PhiModule {
            rank: self.rank,
            tag: self.tag,
            p,
            action,
        })
    }

    /// `Y_0`-adic valuation of `det P mod pi`.
    pub fn integral_bound(&self, ring: &MvRing) -> Result<i64> {
        let det = MatOps::new(ring).det(&self.p)?;
        let r = ring.ctx.level_terms(&det, 0).map(|(k, _)| k[0]).min();
        match r {
            Some(r) if r < det.hi[0] => Ok(r),
            _ => Err(Error::ZeroDeterminant),
        }
    }

    pub fn tensor(&self, ring: &MvRing, other: &PhiModule) -> Result<PhiModule> {
        if self.tag != other.tag {
            return Err(Error::InvalidParams("tensor factors have different tags".into()));
        }
        if self.action.len() != other.action.len()
            || self.action.iter().zip(&other.action).any(|(x, y)| x.0 != y.0)
        {
            return Err(Error::InvalidParams("action samples differ".into()));
        }
        let ops = MatOps::new(ring);
        let action = self
            .action
            .iter()
            .zip(&other.action)
            .map(|((a, g), (_, h))| Ok((a.clone(), ops.kronecker(g, h)?)))
            .collect::<Result<_>>()?;
        Ok(PhiModule {
            rank: self.rank * other.rank,
            tag: self.tag,
            p: ops.kronecker(&self.p, &other.p)?,
            action,
        })
    }

    pub fn to_json(&self, ring: &MvRing) -> PhiModuleJson {
        let mat = |m: &Matrix| -> Vec<Vec<MvLaurentJson>> {
            m.iter().map(|r| r.iter().map(|x| ring.to_json(x)).collect()).collect()
        };
        PhiModuleJson {
            rank: self.rank,
            tag: self.tag,
            p: mat(&self.p),
            action: self
                .action
                .iter()
                .map(|(a, g)| ActionJson {
                    a: a.clone(),
                    g: mat(g),
                })
                .collect(),
        }
    }

    pub fn from_json(ring: &MvRing, j: &PhiModuleJson) -> Result<PhiModule> {
        let mat = |m: &Vec<Vec<MvLaurentJson>>| -> Result<Matrix> {
            if m.len() != j.rank || m.iter().any(|r| r.len() != j.rank) {
                return Err(Error::Parse("matrix does not match the rank".into()));
            }
            m.iter()
                .map(|r| r.iter().map(|x| ring.from_json(x)).collect())
                .collect()
        };
        Ok(PhiModule {
            rank: j.rank,
            tag: j.tag,
            p: mat(&j.p)?,
            action: j
                .action
                .iter()
                .map(|aj| Ok((aj.a.clone(), mat(&aj.g)?)))
                .collect::<Result<_>>()?,
        })
    }
}

/// Rank one, `phi_q(e) = lambda e`, trivial action on the given samples.
pub fn unramified_char(ring: &MvRing, lambda: &OEInt, samples: &[OKElement]) -> Result<PhiModule> {
    let ctx = &ring.ctx;
    if !ctx.ring.is_unit(lambda) {
        return Err(Error::NotAUnit(format!("{lambda:?} is not a unit of O_E")));
    }
    Ok(PhiModule {
        rank: 1,
        tag: RingTag::Full,
        p: vec![vec![ctx.constant(lambda.clone())]],
        action: samples
            .iter()
            .map(|a| (a.clone(), vec![vec![ctx.one()]]))
            .collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionJson {
    pub a: OKElement,
    #[serde(rename = "G")]
    pub g: Vec<Vec<MvLaurentJson>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhiModuleJson {
    pub rank: usize,
    pub tag: RingTag,
    #[serde(rename = "P")]
    pub p: Vec<Vec<MvLaurentJson>>,
    pub action: Vec<ActionJson>,
}

/// One checked entry of an overconvergence certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EntryCheck {
    pub label: String,
    pub pass: bool,
    pub certified: bool,
    /// The term farthest below the threshold, as `(valuation, key)`.
    pub witness: Option<(u32, Vec<i64>)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OcReport {
    pub s: i64,
    pub entries: Vec<EntryCheck>,
    pub pass: bool,
    /// Least `s' >= s` (up to the search limit) at which every entry passes.
    pub minimal_s: Option<i64>,
    pub minimal_s_value: Option<Rational>,
}

/// Membership in `A^{dagger, s-}` up to a power of `Y_0` and of `p`:
/// normalising by the lowest term `p^{v_0} Y_0^{m}` of minimal valuation,
/// every term must satisfy `s (v - v_0) + n_0 - m >= 0`.
pub fn dagger_up_to_shift(ring: &MvRing, x: &Laurent, s: i64, label: &str) -> EntryCheck {
    let ctx = &ring.ctx;
    let v0 = x.terms.values().map(|c| ctx.ring.val(c)).min();
    let Some(v0) = v0 else {
        return EntryCheck {
            label: label.into(),
            pass: true,
            certified: true,
            witness: None,
        };
    };
    let m = ctx
        .level_terms(x, v0)
        .map(|(k, _)| k[0])
        .min()
        .expect("level v0 is nonempty");
    let threshold = s * v0 as i64 + m;
    let (worst, wk) = x
        .terms
        .iter()
        .map(|(k, c)| (s * ctx.ring.val(c) as i64 + k[0], (ctx.ring.val(c), k)))
        .min_by_key(|(w, _)| *w)
        .expect("nonempty");
    let tail = x
        .hi
        .iter()
        .enumerate()
        .filter(|(_, &h)| h < INF)
        .map(|(v, &h)| s * v as i64 + h)
        .min();
    let pass = worst >= threshold;
    EntryCheck {
        label: label.into(),
        pass,
        certified: !pass || tail.is_none_or(|t| t >= threshold),
        witness: (!pass).then(|| (wk.0, wk.1.to_vec())),
    }
}

fn labelled(prefix: &str, m: &Matrix) -> Vec<(String, Laurent)> {
    let mut out = Vec::new();
    for (i, row) in m.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            out.push((format!("{prefix}[{i}][{j}]"), x.clone()));
        }
    }
    out
}

/// Verify a witness basis `U` for overconvergence at `s`, and search
/// `s' in s..=s_max` for the least passing value.
pub fn oc_certificate_check(
    ring: &MvRing,
    m: &PhiModule,
    u: &Matrix,
    s: i64,
    s_max: i64,
) -> Result<OcReport> {
    let ops = MatOps::new(ring);
    let uinv = ops.inverse(u)?;
    let changed = m.base_change(ring, u)?;
    let mut items = labelled("U", u);
    items.extend(labelled("U^-1", &uinv));
    items.extend(labelled("P'", &changed.p));
    for (n, (_, g)) in changed.action.iter().enumerate() {
        items.extend(labelled(&format!("G'{n}"), g));
    }
    let check = |s: i64| -> Vec<EntryCheck> {
        items
            .iter()
            .map(|(l, x)| dagger_up_to_shift(ring, x, s, l))
            .collect()
    };
    let entries = check(s);
    let ok = |es: &[EntryCheck]| es.iter().all(|e| e.pass && e.certified);
    let pass = ok(&entries);
    let minimal_s = (s..=s_max.max(s)).find(|&t| ok(&check(t)));
    Ok(OcReport {
        s,
        entries,
        pass,
        minimal_s,
        minimal_s_value: minimal_s.map(|t| Ratio::from_integer(t).into()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Params;

    fn ring(p: u64, f: usize, h: usize) -> MvRing {
        MvRing::new(&Params::new(p, f, h, 3, 8).unwrap()).unwrap()
    }

    fn samples(r: &MvRing) -> Vec<OKElement> {
        vec![r.iw.ok_from_i64(1 + r.p()), r.iw.ok_from_i64(2)]
    }

    #[test]
    fn unramified_character_is_etale_and_overconvergent() {
        let r = ring(3, 2, 2);
        let lam = r.ctx.ring.from_u64(2);
        let m = unramified_char(&r, &lam, &samples(&r)).unwrap();
        assert!(m.is_etale(&r).unwrap());
        assert!(m.commutation_holds(&r).unwrap());
        let ops = MatOps::new(&r);
        let rep = oc_certificate_check(&r, &m, &ops.identity(1), 1, 4).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.minimal_s, Some(1));
        assert!(matches!(
            unramified_char(&r, &r.ctx.ring.from_u64(3), &[]),
            Err(Error::NotAUnit(_))
        ));
    }

    #[test]
    fn unit_criterion_depends_on_tag() {
        let r = ring(3, 1, 1);
        let ctx = &r.ctx;
        let p_mat = vec![vec![ctx.constant(ctx.ring.from_u64(3))]];
        for tag in [RingTag::Full, RingTag::Circ, RingTag::DaggerMinus(1)] {
            let m = PhiModule { rank: 1, tag, p: p_mat.clone(), action: vec![] };
            assert!(!m.is_etale(&r).unwrap());
        }
        let y3 = ctx.add(&ctx.y0_pow(3), &ctx.y0_pow(4)).unwrap();
        let full = PhiModule { rank: 1, tag: RingTag::Full, p: vec![vec![y3.clone()]], action: vec![] };
        assert!(full.is_etale(&r).unwrap());
        let circ = PhiModule { tag: RingTag::Circ, ..full.clone() };
        assert!(!circ.is_etale(&r).unwrap());
        assert_eq!(full.integral_bound(&r).unwrap(), 3);
        let ops = MatOps::new(&r);
        assert!(ops.agree(&ops.identity(2), &ops.inverse(&ops.identity(2)).unwrap()));
    }

    #[test]
    fn base_change_rules() {
        let r = ring(3, 1, 1);
        let ctx = &r.ctx;
        let ops = MatOps::new(&r);
        let lam = ctx.ring.from_u64(2);
        let m = unramified_char(&r, &lam, &samples(&r)).unwrap();
        let same = m.base_change(&r, &ops.identity(1)).unwrap();
        assert!(ops.agree(&same.p, &m.p));
        let u = vec![vec![ctx.y0_pow(2)]];
        let bc = m.base_change(&r, &u).unwrap();
        let expect = ctx.mul(
            &ctx.scale_by(&r.apply_phi_q(&ctx.y0_pow(2)).unwrap(), &lam),
            &ctx.y0_pow(-2),
        )
        .unwrap();
        assert!(ctx.agree(&bc.p[0][0], &expect));
        assert!(bc.is_etale(&r).unwrap());
        assert!(bc.commutation_holds(&r).unwrap());
        let v = vec![vec![ctx.add(&ctx.one(), &ctx.y0_pow(1)).unwrap()]];
        let twice = bc.base_change(&r, &v).unwrap();
        let once = m.base_change(&r, &ops.mul(&u, &v).unwrap()).unwrap();
        assert!(ops.agree(&twice.p, &once.p));
    }

    #[test]
    fn certificates_report_witnesses_and_minimal_s() {
        let r = ring(3, 1, 1);
        let ctx = &r.ctx;
        let ops = MatOps::new(&r);
        let lam = ctx.ring.from_u64(2);
        let pt = ctx.scale_by(&ctx.y0_pow(-2), &ctx.ring.from_u64(3));
        let p = ctx.scale_by(&ctx.add(&ctx.one(), &pt).unwrap(), &lam);
        let m = PhiModule { rank: 1, tag: RingTag::Full, p: vec![vec![p]], action: vec![] };
        let rep = oc_certificate_check(&r, &m, &ops.identity(1), 1, 6).unwrap();
        assert!(!rep.pass);
        assert_eq!(rep.minimal_s, Some(2));
        let bad = ctx
            .add(&ctx.one(), &ctx.scale_by(&ctx.y0_pow(-20), &ctx.ring.from_u64(3)))
            .unwrap();
        let rep = oc_certificate_check(&r, &m, &[vec![bad]].to_vec(), 1, 6).unwrap();
        assert!(!rep.pass);
        assert_eq!(rep.minimal_s, None);
        assert!(rep.entries.iter().any(|e| e.witness.is_some()));
    }

    #[test]
    fn tensor_and_bounds() {
        let r = ring(3, 1, 1);
        let ctx = &r.ctx;
        let ops = MatOps::new(&r);
        let a = PhiModule {
            rank: 2,
            tag: RingTag::Full,
            p: ops.diag(vec![ctx.y0_pow(1), ctx.y0_pow(2)]),
            action: vec![],
        };
        assert_eq!(a.integral_bound(&r).unwrap(), 3);
        let b = PhiModule { rank: 1, tag: RingTag::Full, p: vec![vec![ctx.y0_pow(4)]], action: vec![] };
        let t = a.tensor(&r, &b).unwrap();
        assert_eq!(t.integral_bound(&r).unwrap(), 1 * 3 + 2 * 4);
        assert!(t.is_etale(&r).unwrap());
        let triv = unramified_char(&r, &ctx.ring.one(), &[]).unwrap();
        assert!(ops.agree(&triv.tensor(&r, &a).unwrap().p, &a.p));
        let zero = PhiModule { rank: 1, tag: RingTag::Full, p: vec![vec![ctx.constant(ctx.ring.from_u64(3))]], action: vec![] };
        assert!(matches!(zero.integral_bound(&r), Err(Error::ZeroDeterminant)));
        let j = serde_json::to_string(&a.to_json(&r)).unwrap();
        let back = PhiModule::from_json(&r, &serde_json::from_str(&j).unwrap()).unwrap();
        assert!(ops.agree(&back.p, &a.p));
    }
}
