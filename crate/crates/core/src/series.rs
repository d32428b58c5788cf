//! Laurent series over W with Gauss valuations v_r and reductions [·]_r.
//!
//! Terms are a finite map degree → coefficient. Coefficients that vanish
//! at precision are kept as noise with their precision floor so that Gauss
//! valuations stay certified. An optional tail certificate bounds every
//! coefficient beyond the stored range on one side.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Elem, FieldRef};
use crate::rat::{is_integer, Q};
use crate::residue::RatFunc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// series in T
    #[serde(rename = "+inf")]
    Pos,
    /// series in T^{-1}
    #[serde(rename = "-inf")]
    Neg,
}

impl Direction {
    fn sign(self) -> i64 {
        match self {
            Direction::Pos => 1,
            Direction::Neg => -1,
        }
    }
}

/// For every degree `±n` with `n > from`: `v(a_{±n}) ≥ sigma·n + kappa`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tail {
    pub dir: Direction,
    pub from: i64,
    pub sigma: Q,
    pub kappa: Q,
}

impl Tail {
    pub fn new(dir: Direction, from: i64, sigma: Q) -> Tail {
        Tail { dir, from, sigma, kappa: Q::zero() }
    }

    /// Lower bound for v_r over the tail, `None` when it is unbounded below.
    fn floor(&self, r: &Q) -> Option<Q> {
        let s = match self.dir {
            Direction::Pos => self.sigma + r,
            Direction::Neg => self.sigma - r,
        };
        if s.is_negative() {
            return None;
        }
        Some(s * Q::from_integer(self.from + 1) + self.kappa)
    }

    fn covers(&self, deg: i64) -> bool {
        deg * self.dir.sign() > self.from
    }
}

#[derive(Clone)]
pub struct LaurentSeries {
    k: FieldRef,
    terms: BTreeMap<i64, Elem>,
    tail: Option<Tail>,
}

/// v_r data: the exact minimum over significant terms and the floor from
/// noise terms and the tail.
#[derive(Debug, Clone)]
pub struct GaussInfo {
    pub min: Option<Q>,
    pub noise_floor: Option<Q>,
    pub tail_floor: Option<Option<Q>>,
}

impl GaussInfo {
    /// Lower bound on v_r of everything that is not a significant term.
    pub fn floor(&self) -> Option<Option<Q>> {
        match (&self.noise_floor, &self.tail_floor) {
            (None, None) => None,
            (Some(a), None) => Some(Some(*a)),
            (None, Some(t)) => Some(*t),
            (Some(a), Some(t)) => Some(t.map(|t| t.min(*a))),
        }
    }

    /// Whether every non-significant contribution is ≥ x (or > x when strict).
    pub fn dominated(&self, x: &Q, strict: bool) -> bool {
        match self.floor() {
            None => true,
            Some(None) => false,
            Some(Some(f)) => {
                if strict {
                    f > *x
                } else {
                    f >= *x
                }
            }
        }
    }

    /// Certified lower bound on v_r of the whole series.
    pub fn lower_bound(&self) -> Option<Q> {
        match (self.min, self.floor()) {
            (m, None) => m,
            (_, Some(None)) => None,
            (None, Some(Some(f))) => Some(f),
            (Some(m), Some(Some(f))) => Some(m.min(f)),
        }
    }
}

impl LaurentSeries {
    pub fn zero(k: &FieldRef) -> Self {
        LaurentSeries { k: k.clone(), terms: BTreeMap::new(), tail: None }
    }

    pub fn one(k: &FieldRef) -> Self {
        LaurentSeries::monomial(Elem::one(k), 0)
    }

    pub fn monomial(c: Elem, deg: i64) -> Self {
        let k = c.field().clone();
        let mut s = LaurentSeries::zero(&k);
        s.set(deg, c);
        s
    }

    pub fn from_terms(k: &FieldRef, terms: impl IntoIterator<Item = (i64, Elem)>) -> Self {
        let mut s = LaurentSeries::zero(k);
        for (d, c) in terms {
            let c = match s.terms.get(&d) {
                Some(old) => old.add(&c),
                None => c,
            };
            s.set(d, c);
        }
        s
    }

    pub fn from_ints(k: &FieldRef, terms: &[(i64, i64)]) -> Self {
        LaurentSeries::from_terms(k, terms.iter().map(|&(d, c)| (d, Elem::from_i64(k, c))))
    }

    pub fn with_tail(mut self, tail: Tail) -> Result<Self> {
        if self.terms.keys().any(|&d| tail.covers(d)) {
            return Err(Error::invalid("tail certificate overlaps stored terms"));
        }
        self.tail = Some(tail);
        Ok(self)
    }

    pub fn field(&self) -> &FieldRef {
        &self.k
    }

    pub fn tail(&self) -> Option<&Tail> {
        self.tail.as_ref()
    }

    fn set(&mut self, d: i64, c: Elem) {
        if c.is_exact_zero() {
            self.terms.remove(&d);
        } else {
            self.terms.insert(d, c);
        }
    }

    pub fn coeff(&self, d: i64) -> Elem {
        self.terms.get(&d).cloned().unwrap_or_else(|| Elem::zero(&self.k))
    }

    /// Coefficients that are significant at precision.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &Elem)> {
        self.terms.iter().filter(|(_, c)| !c.is_negligible()).map(|(d, c)| (*d, c))
    }

    /// All stored entries, including noise.
    pub fn raw_terms(&self) -> impl Iterator<Item = (i64, &Elem)> {
        self.terms.iter().map(|(d, c)| (*d, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms().next().is_none() && self.tail.is_none()
    }

    pub fn min_degree(&self) -> Option<i64> {
        self.terms().map(|t| t.0).min()
    }

    pub fn max_degree(&self) -> Option<i64> {
        self.terms().map(|t| t.0).max()
    }

    pub fn gauss_info(&self, r: &Q) -> GaussInfo {
        let e = Q::from_integer(self.k.e() as i64);
        let mut min: Option<Q> = None;
        let mut noise: Option<Q> = None;
        for (&d, c) in &self.terms {
            let shift = r * Q::from_integer(d);
            if c.is_negligible() {
                let b = Q::from_integer(c.val_lower_pi()) / e + shift;
                noise = Some(noise.map_or(b, |n: Q| n.min(b)));
            } else {
                let v = Q::from_integer(c.val_pi().unwrap()) / e + shift;
                min = Some(min.map_or(v, |m: Q| m.min(v)));
            }
        }
        GaussInfo { min, noise_floor: noise, tail_floor: self.tail.as_ref().map(|t| t.floor(r)) }
    }

    pub fn gauss_valuation(&self, r: &Q) -> Result<Q> {
        if r.is_negative() {
            return Err(Error::invalid("negative radius"));
        }
        let info = self.gauss_info(r);
        let m = info
            .min
            .ok_or_else(|| Error::PrecisionLoss("series vanishes at precision".into()))?;
        self.check_floor(&info, &m, false, r)?;
        Ok(m)
    }

    fn check_floor(&self, info: &GaussInfo, m: &Q, strict: bool, r: &Q) -> Result<()> {
        if let Some(t) = &info.tail_floor {
            let ok = t.map_or(false, |t| if strict { t > *m } else { t >= *m });
            if !ok {
                return Err(Error::TailUnbounded(*r));
            }
        }
        if let Some(n) = info.noise_floor {
            if if strict { n <= *m } else { n < *m } {
                return Err(Error::PrecisionLoss(format!("v_r not determined at r = {r}")));
            }
        }
        Ok(())
    }

    /// Degrees and leading residues of the terms attaining v_r.
    pub fn leading_terms(&self, r: &Q) -> Result<(Q, Vec<(i64, u32)>)> {
        let info = self.gauss_info(r);
        let m = info
            .min
            .ok_or_else(|| Error::PrecisionLoss("series vanishes at precision".into()))?;
        self.check_floor(&info, &m, true, r)?;
        let e = Q::from_integer(self.k.e() as i64);
        let mut out = Vec::new();
        for (d, c) in self.terms() {
            let v = Q::from_integer(c.val_pi().unwrap()) / e + r * Q::from_integer(d);
            if v == m {
                out.push((d, c.leading_residue()?));
            }
        }
        Ok((m, out))
    }

    /// [F]_r as an element of F_q(t). Requires e·r ∈ Z.
    pub fn reduce(&self, r: &Q) -> Result<RatFunc> {
        let er = r * Q::from_integer(self.k.e() as i64);
        if !is_integer(&er) {
            return Err(Error::ExtensionRequired { e_mult: *er.denom() as u32, f_mult: 1 });
        }
        self.reduce_any(r)
    }

    /// The reduction with coefficients normalized by π^{-e·v(a_i)}, defined
    /// for every rational r.
    pub fn reduce_any(&self, r: &Q) -> Result<RatFunc> {
        let (_, lead) = self.leading_terms(r)?;
        Ok(RatFunc::from_laurent(self.k.residue_field(), &lead))
    }

    pub fn neg(&self) -> Self {
        LaurentSeries {
            k: self.k.clone(),
            terms: self.terms.iter().map(|(&d, c)| (d, c.neg())).collect(),
            tail: self.tail.clone(),
        }
    }

    pub fn add(&self, o: &LaurentSeries) -> Result<Self> {
        let tail = match (&self.tail, &o.tail) {
            (None, None) => None,
            (Some(t), None) | (None, Some(t)) => Some(t.clone()),
            (Some(a), Some(b)) => {
                if a.dir != b.dir {
                    return Err(Error::SeriesMismatch("tails in opposite directions".into()));
                }
                let from = a.from.min(b.from);
                let sigma = a.sigma.min(b.sigma);
                // rewrite both bounds with the smaller slope from the common start
                let shift = |t: &Tail| t.kappa + (t.sigma - sigma) * Q::from_integer(t.from + 1);
                Some(Tail { dir: a.dir, from, sigma, kappa: shift(a).min(shift(b)) })
            }
        };
        let mut out = LaurentSeries { k: self.k.clone(), terms: self.terms.clone(), tail: None };
        for (&d, c) in &o.terms {
            let v = match out.terms.get(&d) {
                Some(x) => x.add(c),
                None => c.clone(),
            };
            out.set(d, v);
        }
        if let Some(t) = tail {
            out = out.absorb_into_tail(t);
        }
        Ok(out)
    }

    pub fn sub(&self, o: &LaurentSeries) -> Result<Self> {
        self.add(&o.neg())
    }

    /// Move stored terms covered by `t` into it.
    fn absorb_into_tail(mut self, mut t: Tail) -> Self {
        let e = Q::from_integer(self.k.e() as i64);
        let covered: Vec<i64> = self.terms.keys().copied().filter(|&d| t.covers(d)).collect();
        for d in covered {
            let c = self.terms.remove(&d).unwrap();
            let n = d * t.dir.sign();
            let v = Q::from_integer(c.val_lower_pi()) / e;
            t.kappa = t.kappa.min(v - t.sigma * Q::from_integer(n));
        }
        self.tail = Some(t);
        self
    }

    pub fn scale(&self, c: &Elem) -> Self {
        let mut out = LaurentSeries::zero(&self.k);
        for (&d, x) in &self.terms {
            out.set(d, x.mul(c));
        }
        if let Some(t) = &self.tail {
            let e = Q::from_integer(self.k.e() as i64);
            let v = Q::from_integer(c.val_lower_pi()) / e;
            out.tail = Some(Tail { kappa: t.kappa + v, ..t.clone() });
        }
        out
    }

    pub fn mul(&self, o: &LaurentSeries) -> Result<Self> {
        let mut prod: BTreeMap<i64, Elem> = BTreeMap::new();
        for (&i, a) in &self.terms {
            for (&j, b) in &o.terms {
                let c = a.mul(b);
                match prod.get_mut(&(i + j)) {
                    Some(x) => *x = x.add(&c),
                    None => {
                        prod.insert(i + j, c);
                    }
                }
            }
        }
        let mut out = LaurentSeries { k: self.k.clone(), terms: BTreeMap::new(), tail: None };
        for (d, c) in prod {
            out.set(d, c);
        }
        let tail = match (&self.tail, &o.tail) {
            (None, None) => return Ok(out),
            (Some(a), Some(b)) if a.dir != b.dir => {
                return Err(Error::SeriesMismatch("tails in opposite directions".into()))
            }
            (Some(a), None) => self.product_tail(a, o)?,
            (None, Some(b)) => o.product_tail(b, self)?,
            (Some(a), Some(b)) => {
                let ta = self.product_tail(a, o)?;
                let tb = o.product_tail(b, self)?;
                let sigma = ta.sigma.min(tb.sigma);
                let from = ta.from.min(tb.from);
                let shift = |t: &Tail| t.kappa + (t.sigma - sigma) * Q::from_integer(t.from + 1);
                // tail × tail
                let kab = shift(a) + shift(b);
                Tail { dir: a.dir, from, sigma, kappa: shift(&ta).min(shift(&tb)).min(kab) }
            }
        };
        Ok(out.absorb_into_tail(tail))
    }

    /// Tail of (self with tail `t`) × `o`, where only the tail of self is
    /// considered; `o`'s own tail (if any) is handled by the caller.
    fn product_tail(&self, t: &Tail, o: &LaurentSeries) -> Result<Tail> {
        let s = t.dir.sign();
        let e = Q::from_integer(self.k.e() as i64);
        // signed degrees of o's stored terms
        let lo = o
            .terms
            .keys()
            .map(|&j| j * s)
            .min()
            .unwrap_or_else(|| o.tail.as_ref().map_or(0, |u| u.from + 1));
        if t.sigma.is_negative() {
            return Err(Error::SeriesMismatch("negative tail slope".into()));
        }
        // a_i·b_j with i > from: v ≥ σ(i + j) + κ + (v(b_j) − σ j)
        let mut kappa = t.kappa;
        let mut first = true;
        for (&j, b) in &o.terms {
            let vb = Q::from_integer(b.val_lower_pi()) / e;
            let k = t.kappa + vb - t.sigma * Q::from_integer(j * s);
            kappa = if first { k } else { kappa.min(k) };
            first = false;
        }
        // products of stored terms landing beyond `from` are absorbed by the caller
        let from = t.from + lo;
        Ok(Tail { dir: t.dir, from, sigma: t.sigma, kappa })
    }

    pub fn pow(&self, n: u32) -> Result<Self> {
        let mut acc = LaurentSeries::one(&self.k);
        for _ in 0..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Keep the constant term and degrees 1..=s on the given side
    /// (degrees beyond ±s and the other side are dropped, tail removed).
    pub fn truncate(&self, s: i64, dir: Direction) -> Self {
        let sg = dir.sign();
        let terms = self
            .terms
            .iter()
            .filter(|(&d, _)| d * sg >= 0 && d * sg <= s)
            .map(|(&d, c)| (d, c.clone()))
            .collect();
        LaurentSeries { k: self.k.clone(), terms, tail: None }
    }

    /// Drop the constant term.
    pub fn without_constant(&self) -> Self {
        let mut out = self.clone();
        out.terms.remove(&0);
        out
    }

    /// Apply an embedding of fields to every coefficient.
    pub fn map_field(&self, emb: &crate::field::Embedding) -> Self {
        LaurentSeries {
            k: emb.target().clone(),
            terms: self.terms.iter().map(|(&d, c)| (d, emb.apply(c))).collect(),
            tail: self.tail.clone(),
        }
    }

    /// The same series over the enlarged field.
    pub fn extend(&self, e_mult: u32, f_mult: u32) -> Result<Self> {
        let (_, emb) = self.k.extend(e_mult, f_mult)?;
        Ok(self.map_field(&emb))
    }

    pub fn eq_to_precision(&self, o: &LaurentSeries) -> bool {
        match self.sub(o) {
            Ok(d) => d.terms().next().is_none(),
            Err(_) => false,
        }
    }
}

impl std::fmt::Debug for LaurentSeries {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.terms().map(|(d, c)| format!("({c})T^{d}")).collect();
        write!(f, "{}", if parts.is_empty() { "0".into() } else { parts.join(" + ") })?;
        if let Some(t) = &self.tail {
            write!(f, " + tail{:?}", t)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Field, FieldConfig, DEFAULT_PRECISION};
    use crate::rat::{q, qi};
    use crate::residue::RatFunc;

    #[test]
    fn spec_gauss_valuations() {
        let k = Field::qp(3).unwrap();
        let f = LaurentSeries::from_ints(&k, &[(0, 1), (-1, 27), (-2, 72)]);
        assert_eq!(f.gauss_valuation(&q(1, 2)).unwrap(), qi(0));
        let t = LaurentSeries::from_ints(&k, &[(1, 1)]);
        for r in [q(1, 3), qi(2), qi(0)] {
            assert_eq!(t.gauss_valuation(&r).unwrap(), r);
        }
        let g = LaurentSeries::from_ints(&k, &[(-1, 27)]);
        assert_eq!(g.gauss_valuation(&q(1, 2)).unwrap(), q(5, 2));
    }

    #[test]
    fn spec_reductions() {
        let k = Field::new(FieldConfig::new(3, 1, 2, DEFAULT_PRECISION)).unwrap();
        let fq = k.residue_field();
        let f = LaurentSeries::from_ints(&k, &[(-2, 72)]);
        assert_eq!(f.reduce(&q(1, 2)).unwrap(), RatFunc::from_laurent(fq, &[(-2, 2)]));
        let f = LaurentSeries::from_ints(&k, &[(0, 1), (-1, 27), (-2, 72)]);
        assert_eq!(f.reduce(&q(1, 2)).unwrap(), RatFunc::constant(1));
        let k1 = Field::qp(3).unwrap();
        let t = LaurentSeries::from_ints(&k1, &[(1, 1)]);
        assert_eq!(t.reduce(&qi(1)).unwrap(), RatFunc::from_laurent(k1.residue_field(), &[(1, 1)]));
        assert_eq!(t.reduce(&q(1, 2)), Err(Error::ExtensionRequired { e_mult: 2, f_mult: 1 }));
    }

    #[test]
    fn spec_arithmetic() {
        let k = Field::qp(2).unwrap();
        let a = LaurentSeries::from_ints(&k, &[(0, 1), (-1, 2)]);
        let sq = a.pow(2).unwrap();
        assert!(sq.eq_to_precision(&LaurentSeries::from_ints(&k, &[(0, 1), (-1, 4), (-2, 4)])));
        let x = LaurentSeries::from_ints(&k, &[(0, 1), (-1, 5), (-3, 7)]);
        let tr = x.truncate(2, Direction::Neg);
        assert!(tr.eq_to_precision(&LaurentSeries::from_ints(&k, &[(0, 1), (-1, 5)])));
        let p = LaurentSeries::from_ints(&k, &[(0, 1), (1, 1)])
            .mul(&LaurentSeries::from_ints(&k, &[(0, 1), (1, -1)]))
            .unwrap();
        assert!(p.eq_to_precision(&LaurentSeries::from_ints(&k, &[(0, 1), (2, -1)])));
    }

    #[test]
    fn gauss_is_multiplicative() {
        let k = Field::qp(5).unwrap();
        let a = LaurentSeries::from_ints(&k, &[(0, 1), (-1, 10), (2, 3), (-3, 125)]);
        let b = LaurentSeries::from_ints(&k, &[(1, 5), (-2, 7), (0, 50)]);
        let ab = a.mul(&b).unwrap();
        for r in [q(1, 10), q(1, 3), qi(1), q(7, 4)] {
            let (va, vb) = (a.gauss_valuation(&r).unwrap(), b.gauss_valuation(&r).unwrap());
            assert_eq!(ab.gauss_valuation(&r).unwrap(), va + vb);
            let fq = k.residue_field();
            assert_eq!(
                ab.reduce_any(&r).unwrap(),
                a.reduce_any(&r).unwrap().mul(fq, &b.reduce_any(&r).unwrap())
            );
        }
    }

    #[test]
    fn tails_bound_the_valuation() {
        let k = Field::qp(3).unwrap();
        // U = 1 + 3T + (tail with v(b_i) ≥ i for i > 1)
        let u = LaurentSeries::from_ints(&k, &[(0, 1), (1, 3)])
            .with_tail(Tail::new(Direction::Pos, 1, qi(1)))
            .unwrap();
        assert_eq!(u.gauss_valuation(&q(1, 2)).unwrap(), qi(0));
        let f = LaurentSeries::from_ints(&k, &[(0, 1), (-1, -3)]);
        let uf = u.mul(&f).unwrap();
        assert_eq!(uf.gauss_valuation(&q(1, 2)).unwrap(), qi(0));
        let g = uf.sub(&LaurentSeries::one(&k)).unwrap();
        // 3T - 3T^{-1} - 9 + tail: v_{1/2} = 1/2, attained at T^{-1}
        assert_eq!(g.gauss_valuation(&q(1, 2)).unwrap(), q(1, 2));
        // a tail with a negative slope against r cannot be bounded
        let v = LaurentSeries::from_ints(&k, &[(0, 1)])
            .with_tail(Tail::new(Direction::Neg, 0, q(1, 4)))
            .unwrap();
        assert_eq!(v.gauss_valuation(&q(1, 2)), Err(Error::TailUnbounded(q(1, 2))));
    }

    #[test]
    fn noise_is_reported() {
        let k = Field::new(FieldConfig::new(3, 1, 1, 6)).unwrap();
        let a = LaurentSeries::from_ints(&k, &[(0, 1), (-1, 1)]);
        let z = a.sub(&a).unwrap();
        assert!(matches!(z.gauss_valuation(&qi(1)), Err(Error::PrecisionLoss(_))));
        assert!(z.gauss_info(&qi(1)).lower_bound().unwrap() >= qi(4));
    }
}
