//! The residue field κ_r = F_q(t): rational functions, p-th powers and
//! differentials g·dt with their orders at places.

mod poly;

use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::field::Fq;
pub use poly::FqPoly;

/// Reduced quotient num/den with den monic.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: FqPoly,
    den: FqPoly,
}

impl RatFunc {
    pub fn new(k: &Fq, num: FqPoly, den: FqPoly) -> Result<RatFunc> {
        if den.is_zero() {
            return Err(Error::invalid("zero denominator"));
        }
        if num.is_zero() {
            return Ok(RatFunc::zero());
        }
        let g = num.gcd(k, &den);
        let (num, den) = (num.div_exact(k, &g), den.div_exact(k, &g));
        let l = k.inv(den.lead()).unwrap();
        Ok(RatFunc { num: num.scale(k, l), den: den.scale(k, l) })
    }

    pub fn zero() -> RatFunc {
        RatFunc { num: FqPoly::zero(), den: FqPoly::one() }
    }

    pub fn constant(a: u32) -> RatFunc {
        RatFunc { num: FqPoly::constant(a), den: FqPoly::one() }
    }

    pub fn from_poly(a: FqPoly) -> RatFunc {
        RatFunc { num: a, den: FqPoly::one() }
    }

    /// Σ c_i t^i over a finite set of integer exponents.
    pub fn from_laurent(k: &Fq, terms: &[(i64, u32)]) -> RatFunc {
        let lo = terms.iter().map(|t| t.0).min().unwrap_or(0).min(0);
        let mut c = vec![0u32; terms.iter().map(|t| (t.0 - lo) as usize + 1).max().unwrap_or(1)];
        for &(i, a) in terms {
            let j = (i - lo) as usize;
            c[j] = k.add(c[j], a);
        }
        RatFunc::new(k, FqPoly::new(c), FqPoly::monomial(1, (-lo) as usize)).unwrap()
    }

    pub fn num(&self) -> &FqPoly {
        &self.num
    }
    pub fn den(&self) -> &FqPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, k: &Fq, o: &RatFunc) -> RatFunc {
        let n = self.num.mul(k, &o.den).add(k, &o.num.mul(k, &self.den));
        RatFunc::new(k, n, self.den.mul(k, &o.den)).unwrap()
    }

    pub fn sub(&self, k: &Fq, o: &RatFunc) -> RatFunc {
        self.add(k, &o.neg(k))
    }

    pub fn neg(&self, k: &Fq) -> RatFunc {
        RatFunc { num: self.num.neg(k), den: self.den.clone() }
    }

    pub fn mul(&self, k: &Fq, o: &RatFunc) -> RatFunc {
        RatFunc::new(k, self.num.mul(k, &o.num), self.den.mul(k, &o.den)).unwrap()
    }

    pub fn scale(&self, k: &Fq, a: u32) -> RatFunc {
        if a == 0 {
            return RatFunc::zero();
        }
        RatFunc { num: self.num.scale(k, a), den: self.den.clone() }
    }

    pub fn inv(&self, k: &Fq) -> Result<RatFunc> {
        if self.is_zero() {
            return Err(Error::invalid("inverse of zero rational function"));
        }
        RatFunc::new(k, self.den.clone(), self.num.clone())
    }

    pub fn div(&self, k: &Fq, o: &RatFunc) -> Result<RatFunc> {
        Ok(self.mul(k, &o.inv(k)?))
    }

    pub fn pow(&self, k: &Fq, n: u64) -> RatFunc {
        RatFunc { num: self.num.pow(k, n), den: self.den.pow(k, n) }
    }

    /// d/dt
    pub fn derivative(&self, k: &Fq) -> RatFunc {
        let n = self
            .num
            .derivative(k)
            .mul(k, &self.den)
            .sub(k, &self.num.mul(k, &self.den.derivative(k)));
        RatFunc::new(k, n, self.den.mul(k, &self.den)).unwrap()
    }

    /// Membership in κ^p. Since num and den are coprime and den is monic,
    /// g is a p-th power iff both are.
    pub fn is_pth_power(&self, k: &Fq) -> bool {
        self.num.derivative(k).is_zero() && self.den.derivative(k).is_zero()
    }

    pub fn pth_root(&self, k: &Fq) -> Result<RatFunc> {
        match (self.num.pth_root(k), self.den.pth_root(k)) {
            (Some(n), Some(d)) => RatFunc::new(k, n, d),
            _ => Err(Error::NotAPthPower),
        }
    }

    /// Order at the place of a monic irreducible.
    pub fn ord_at_poly(&self, k: &Fq, pl: &FqPoly) -> i64 {
        self.num.ord_at(k, pl) as i64 - self.den.ord_at(k, pl) as i64
    }

    pub fn ord0(&self) -> i64 {
        self.num.ord0() as i64 - self.den.ord0() as i64
    }

    pub fn ord_inf(&self) -> i64 {
        self.den.degree() as i64 - self.num.degree() as i64
    }

    /// Laurent terms when the denominator is a power of t.
    pub fn laurent_terms(&self) -> Option<Vec<(i64, u32)>> {
        let s = self.den.ord0();
        if self.den.degree() != s {
            return None;
        }
        Some(
            self.num
                .coeffs()
                .iter()
                .enumerate()
                .filter(|(_, &a)| a != 0)
                .map(|(i, &a)| (i as i64 - s as i64, a))
                .collect(),
        )
    }
}

fn poly_string(p: &FqPoly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut parts = Vec::new();
    for (i, &a) in p.coeffs().iter().enumerate().rev() {
        if a == 0 {
            continue;
        }
        parts.push(match (i, a) {
            (0, a) => format!("{a}"),
            (1, 1) => "t".into(),
            (1, a) => format!("{a}*t"),
            (i, 1) => format!("t^{i}"),
            (i, a) => format!("{a}*t^{i}"),
        });
    }
    parts.join(" + ")
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(terms) = self.laurent_terms() {
            if terms.is_empty() {
                return write!(f, "0");
            }
            let s: Vec<String> = terms
                .iter()
                .rev()
                .map(|&(i, a)| match (i, a) {
                    (0, a) => format!("{a}"),
                    (1, 1) => "t".into(),
                    (i, 1) => format!("t^{i}"),
                    (1, a) => format!("{a}*t"),
                    (i, a) => format!("{a}*t^{i}"),
                })
                .collect();
            return write!(f, "{}", s.join(" + "));
        }
        write!(f, "({})/({})", poly_string(&self.num), poly_string(&self.den))
    }
}

impl Serialize for RatFunc {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("RatFunc", 3)?;
        st.serialize_field("num", self.num.coeffs())?;
        st.serialize_field("den", self.den.coeffs())?;
        st.serialize_field("text", &self.to_string())?;
        st.end()
    }
}

/// A place of F_q(t).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Place {
    Zero,
    Infinity,
    /// monic irreducible other than t
    Poly(FqPoly),
}

impl Place {
    pub fn degree(&self) -> usize {
        match self {
            Place::Zero | Place::Infinity => 1,
            Place::Poly(p) => p.degree(),
        }
    }

    /// The degree-1 place t = a.
    pub fn at(k: &Fq, a: u32) -> Place {
        if a == 0 {
            Place::Zero
        } else {
            Place::Poly(FqPoly::new(vec![k.neg(a), 1]))
        }
    }

    /// The residue-field point of a degree-1 finite place.
    pub fn point(&self, k: &Fq) -> Option<u32> {
        match self {
            Place::Zero => Some(0),
            Place::Poly(p) if p.degree() == 1 => Some(k.neg(p.coeff(0))),
            _ => None,
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Zero => write!(f, "t=0"),
            Place::Infinity => write!(f, "t=inf"),
            Place::Poly(p) => write!(f, "{}", poly_string(p)),
        }
    }
}

impl Serialize for Place {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// The form g·dt.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Differential {
    coeff: RatFunc,
}

impl Differential {
    pub fn new(coeff: RatFunc) -> Differential {
        Differential { coeff }
    }

    /// dg
    pub fn exact(k: &Fq, g: &RatFunc) -> Differential {
        Differential { coeff: g.derivative(k) }
    }

    /// dg/g
    pub fn log(k: &Fq, g: &RatFunc) -> Result<Differential> {
        Ok(Differential { coeff: g.derivative(k).div(k, g)? })
    }

    pub fn coeff(&self) -> &RatFunc {
        &self.coeff
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn add(&self, k: &Fq, o: &Differential) -> Differential {
        Differential { coeff: self.coeff.add(k, &o.coeff) }
    }

    pub fn scale(&self, k: &Fq, m: i64) -> Differential {
        Differential { coeff: self.coeff.scale(k, k.from_int(m)) }
    }

    pub fn ord_at(&self, k: &Fq, place: &Place) -> Result<i64> {
        if self.is_zero() {
            return Err(Error::invalid("order of the zero form"));
        }
        Ok(match place {
            Place::Zero => self.coeff.ord0(),
            // dt = -s^{-2} ds for s = 1/t
            Place::Infinity => self.coeff.ord_inf() - 2,
            Place::Poly(pl) => self.coeff.ord_at_poly(k, pl),
        })
    }

    pub fn ord0(&self) -> i64 {
        self.coeff.ord0()
    }

    pub fn ord_inf(&self) -> i64 {
        self.coeff.ord_inf() - 2
    }

    /// Finite places where the form has a zero or pole, with orders.
    pub fn divisor_finite(&self, k: &Fq) -> Vec<(Place, i64)> {
        let mut out: Vec<(Place, i64)> = Vec::new();
        let mut push = |pl: FqPoly, m: i64| {
            let place = if pl == FqPoly::x() { Place::Zero } else { Place::Poly(pl) };
            if let Some(e) = out.iter_mut().find(|(p, _)| *p == place) {
                e.1 += m;
            } else {
                out.push((place, m));
            }
        };
        for (g, m) in self.coeff.num.factor(k) {
            push(g, m as i64);
        }
        for (g, m) in self.coeff.den.factor(k) {
            push(g, -(m as i64));
        }
        out.retain(|(_, m)| *m != 0);
        out.sort();
        out
    }

    /// Σ deg(P)·ord_P over all places; −2 for every nonzero form on P¹.
    pub fn degree_check(&self, k: &Fq) -> Result<i64> {
        if self.is_zero() {
            return Err(Error::invalid("degree of the zero form"));
        }
        let fin: i64 = self.divisor_finite(k).iter().map(|(p, m)| p.degree() as i64 * m).sum();
        Ok(fin + self.ord_inf())
    }

    /// Like `degree_check` but fails unless the total is −2.
    pub fn assert_degree(&self, k: &Fq) -> Result<()> {
        let d = self.degree_check(k)?;
        if d != -2 {
            return Err(Error::inconsistency(format!("form {self} has degree {d}")));
        }
        Ok(())
    }
}

impl fmt::Display for Differential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeff.laurent_terms().map_or(false, |t| t.len() == 1) {
            write!(f, "{}*dt", self.coeff)
        } else {
            write!(f, "({})*dt", self.coeff)
        }
    }
}

impl Serialize for Differential {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Differential", 2)?;
        st.serialize_field("coefficient", &self.coeff)?;
        st.serialize_field("text", &self.to_string())?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> Fq {
        Fq::new(3, 1).unwrap()
    }

    #[test]
    fn spec_pth_power() {
        let k = f3();
        let g = RatFunc::from_laurent(&k, &[(3, 1), (6, 1)]);
        assert!(g.is_pth_power(&k));
        assert_eq!(g.pth_root(&k).unwrap(), RatFunc::from_laurent(&k, &[(1, 1), (2, 1)]));
        assert!(!RatFunc::from_laurent(&k, &[(2, 1)]).is_pth_power(&k));
        assert!(!RatFunc::from_laurent(&k, &[(-2, 2)]).is_pth_power(&k));
        assert_eq!(RatFunc::constant(1).pth_root(&k).unwrap(), RatFunc::constant(1));
        let h = RatFunc::new(&k, FqPoly::monomial(1, 6), FqPoly::new(vec![1, 1]).pow(&k, 3)).unwrap();
        let r = h.pth_root(&k).unwrap();
        assert_eq!(r, RatFunc::new(&k, FqPoly::monomial(1, 2), FqPoly::new(vec![1, 1])).unwrap());
        assert_eq!(r.pow(&k, 3), h);
        assert_eq!(RatFunc::from_laurent(&k, &[(2, 1)]).pth_root(&k), Err(Error::NotAPthPower));
    }

    #[test]
    fn spec_orders() {
        let k = f3();
        let dt_t = Differential::new(RatFunc::from_laurent(&k, &[(-1, 1)]));
        assert_eq!((dt_t.ord0(), dt_t.ord_inf()), (-1, -1));
        let w = Differential::new(RatFunc::from_laurent(&k, &[(-3, 2)]));
        assert_eq!((w.ord0(), w.ord_inf()), (-3, 1));
        let dt = Differential::new(RatFunc::constant(1));
        assert_eq!((dt.ord0(), dt.ord_inf()), (0, -2));
        for f in [&dt_t, &w, &dt] {
            assert_eq!(f.degree_check(&k).unwrap(), -2);
        }
    }

    #[test]
    fn derivation_rules() {
        let k = Fq::new(5, 1).unwrap();
        let g = RatFunc::new(&k, FqPoly::new(vec![1, 2, 3]), FqPoly::new(vec![4, 0, 1, 1])).unwrap();
        let h = RatFunc::from_laurent(&k, &[(-2, 3), (1, 1)]);
        assert!(g.pow(&k, 5).derivative(&k).is_zero());
        let lhs = g.mul(&k, &h).derivative(&k);
        let rhs = g.mul(&k, &h.derivative(&k)).add(&k, &h.mul(&k, &g.derivative(&k)));
        assert_eq!(lhs, rhs);
        let w = Differential::exact(&k, &g);
        assert_eq!(w.degree_check(&k).unwrap(), -2);
    }

    #[test]
    fn worked_form() {
        let k = f3();
        let g = RatFunc::from_laurent(&k, &[(-2, 2)]);
        let w = Differential::exact(&k, &g);
        assert_eq!(w, Differential::new(RatFunc::from_laurent(&k, &[(-3, 2)])));
        assert_eq!(w.to_string(), "2*t^-3*dt");
    }
}
