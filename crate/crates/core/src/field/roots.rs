//! Roots of univariate polynomials over W by Newton polygons and Hensel
//! lifting.

use num_integer::Integer;

use super::{Elem, FieldRef};
use crate::error::{Error, Result};
use crate::residue::FqPoly;

/// Coefficients low degree first.
#[derive(Debug, Clone)]
pub struct Poly(pub Vec<Elem>);

impl Poly {
    pub fn field(&self) -> &FieldRef {
        self.0[0].field()
    }

    pub fn eval(&self, x: &Elem) -> Elem {
        let mut acc = Elem::zero(self.field());
        for c in self.0.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        let k = self.field().clone();
        if self.0.len() <= 1 {
            return Poly(vec![Elem::zero(&k)]);
        }
        Poly(self.0.iter().enumerate().skip(1).map(|(i, c)| c.scale_i64(i as i64)).collect())
    }

    /// P(a + z) as a polynomial in z.
    pub fn taylor_shift(&self, a: &Elem) -> Poly {
        let mut c = self.0.clone();
        let n = c.len();
        for i in 0..n {
            for j in (i..n - 1).rev() {
                let t = c[j + 1].mul(a);
                c[j] = c[j].add(&t);
            }
        }
        Poly(c)
    }

    /// P(π^j·y)·π^{-s}
    fn rescale(&self, j: i64, s: i64) -> Poly {
        let k = self.field();
        Poly(
            self.0
                .iter()
                .enumerate()
                .map(|(i, c)| c.mul(&Elem::pi_pow(k, i as i64 * j - s)))
                .collect(),
        )
    }
}

/// All roots found in W plus the enlargement needed for the rest.
#[derive(Debug, Clone)]
pub struct RootSet {
    pub roots: Vec<Elem>,
    /// (e multiplier, f multiplier) when some roots lie outside W
    pub missing: Option<(u32, u32)>,
}

impl RootSet {
    pub fn into_result(self) -> Result<Vec<Elem>> {
        match self.missing {
            Some((e_mult, f_mult)) => Err(Error::ExtensionRequired { e_mult, f_mult }),
            None => Ok(self.roots),
        }
    }
}

fn merge(missing: &mut Option<(u32, u32)>, e: u32, f: u32) {
    *missing = Some(match *missing {
        None => (e, f),
        Some((a, b)) => (a.lcm(&e), b.lcm(&f)),
    });
}

pub fn find_roots(poly: &Poly) -> Result<RootSet> {
    let mut c = poly.0.clone();
    while c.last().map_or(false, |x| x.is_exact_zero()) {
        c.pop();
    }
    if c.is_empty() {
        return Err(Error::PrecisionLoss("zero polynomial".into()));
    }
    if c.last().unwrap().is_zero() {
        return Err(Error::PrecisionLoss("leading coefficient vanishes at precision".into()));
    }
    let mut out = RootSet { roots: vec![], missing: None };
    roots_rec(&Poly(c), None, 0, &mut out)?;
    out.roots.sort_by(|a, b| a.lex_cmp(b));
    out.roots.dedup_by(|a, b| a.close_to(b));
    Ok(out)
}

/// Roots of `p` with π-valuation strictly above `floor` (all roots if None).
fn roots_rec(p: &Poly, floor: Option<i64>, depth: usize, out: &mut RootSet) -> Result<()> {
    let k = p.field().clone();
    if depth > 4 * (k.precision() as usize) * k.e() as usize {
        return Err(Error::PrecisionLoss("root refinement does not separate roots".into()));
    }
    let z0 = p.0.iter().take_while(|c| c.is_zero()).count();
    if z0 > 0 {
        out.roots.push(Elem::zero(&k));
    }
    let c = &p.0[z0..];
    if c.len() <= 1 {
        return Ok(());
    }
    // lower convex hull of (i, val_pi(c_i))
    let pts: Vec<(i64, i64)> = c
        .iter()
        .enumerate()
        .filter_map(|(i, x)| x.val_pi().map(|v| (i as i64, v)))
        .collect();
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for &pt in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b if it lies on or above segment a-pt
            if (b.1 - a.1) * (pt.0 - a.0) >= (pt.1 - a.1) * (b.0 - a.0) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let cpoly = Poly(c.to_vec());
    for w in hull.windows(2) {
        let ((i0, v0), (i1, v1)) = (w[0], w[1]);
        let (num, den) = (v0 - v1, i1 - i0);
        // root valuation num/den in π-units
        if let Some(f) = floor {
            if num <= f * den {
                continue;
            }
        }
        if num % den != 0 {
            let g = num.gcd(&den);
            merge(&mut out.missing, (den / g) as u32, 1);
            continue;
        }
        let nu = num / den;
        let s = v0 + i0 * nu;
        let q = cpoly.rescale(nu, s);
        let fk = k.residue_field();
        let resid = FqPoly::new(
            q.0.iter()
                .enumerate()
                .map(|(i, x)| {
                    if (i as i64) < i0 || (i as i64) > i1 || x.val_pi() != Some(0) {
                        0
                    } else {
                        x.residue().unwrap()
                    }
                })
                .collect(),
        )
        .div_exact(fk, &FqPoly::monomial(1, i0 as usize));
        for (g, mult) in resid.factor(fk) {
            if g.degree() > 1 {
                merge(&mut out.missing, 1, g.degree() as u32);
                continue;
            }
            let r = fk.neg(g.coeff(0));
            let y0 = Elem::lift(&k, r);
            if mult == 1 {
                let y = newton(&q, y0)?;
                out.roots.push(y.mul(&Elem::pi_pow(&k, nu)));
            } else {
                let shifted = q.taylor_shift(&y0);
                let mut sub = RootSet { roots: vec![], missing: None };
                roots_rec(&shifted, Some(0), depth + 1, &mut sub)?;
                if let Some((a, b)) = sub.missing {
                    merge(&mut out.missing, a, b);
                }
                for z in sub.roots {
                    out.roots.push(y0.add(&z).mul(&Elem::pi_pow(&k, nu)));
                }
            }
        }
    }
    Ok(())
}

fn newton(q: &Poly, y0: Elem) -> Result<Elem> {
    let dq = q.derivative();
    let mut y = y0;
    for _ in 0..64 {
        let fy = q.eval(&y);
        if fy.is_zero() {
            return Ok(y);
        }
        let step = fy.div(&dq.eval(&y))?;
        if step.is_zero() {
            return Ok(y);
        }
        y = y.sub(&step);
    }
    Err(Error::NoConvergence("Hensel lifting".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Field, FieldConfig, DEFAULT_PRECISION};
    use crate::rat::qi;

    fn poly(k: &FieldRef, c: &[i64]) -> Poly {
        Poly(c.iter().map(|&x| Elem::from_i64(k, x)).collect())
    }

    #[test]
    fn spec_squares() {
        let k = Field::qp(2).unwrap();
        let rs = find_roots(&poly(&k, &[-4, 0, 1])).unwrap();
        assert!(rs.missing.is_none());
        assert_eq!(rs.roots.len(), 2);
        for want in [2, -2] {
            assert!(rs.roots.iter().any(|r| r.eq_to_precision(&Elem::from_i64(&k, want))));
        }
        let rs = find_roots(&poly(&k, &[-9, 0, 1])).unwrap();
        assert_eq!(rs.roots.len(), 2);
        for want in [3, -3] {
            assert!(rs.roots.iter().any(|r| r.eq_to_precision(&Elem::from_i64(&k, want))));
        }
    }

    #[test]
    fn spec_cube_root_of_three() {
        let k = Field::new(FieldConfig::new(3, 1, 3, DEFAULT_PRECISION)).unwrap();
        let rs = find_roots(&poly(&k, &[-3, 0, 0, 1])).unwrap();
        assert_eq!(rs.roots.len(), 1);
        assert!(rs.roots[0].eq_to_precision(&Elem::pi(&k)));
        assert!(rs.missing.is_some());
        assert!(matches!(rs.into_result(), Err(Error::ExtensionRequired { .. })));
    }

    #[test]
    fn unramified_extension_reported() {
        let k = Field::qp(3).unwrap();
        let rs = find_roots(&poly(&k, &[1, 0, 1])).unwrap();
        assert!(rs.roots.is_empty());
        assert_eq!(rs.missing, Some((1, 2)));
        let (k9, _) = k.extend(1, 2).unwrap();
        let rs = find_roots(&poly(&k9, &[1, 0, 1])).unwrap();
        assert_eq!(rs.roots.len(), 2);
        assert!(rs.missing.is_none());
    }

    #[test]
    fn roots_evaluate_small() {
        let k = Field::qp(5).unwrap();
        // (x - 1)(x - 6)(x - 26)(x - 5)
        let p = poly(&k, &[1 * 6 * 26 * 5, -(6 * 26 * 5 + 1 * 26 * 5 + 1 * 6 * 5 + 1 * 6 * 26), 6 + 26 + 5 + 6 * 26 + 6 * 5 + 26 * 5, -(1 + 6 + 26 + 5), 1]);
        let rs = find_roots(&p).unwrap();
        assert_eq!(rs.roots.len(), 4);
        for r in &rs.roots {
            let v = p.eval(r);
            assert!(v.is_zero() || v.v().unwrap() >= qi(40));
        }
    }

    #[test]
    fn double_root_and_zero_root() {
        let k = Field::qp(3).unwrap();
        // x^2 (x - 2)^2
        let rs = find_roots(&poly(&k, &[0, 0, 4, -4, 1])).unwrap();
        assert_eq!(rs.roots.len(), 2);
        assert!(rs.roots[0].is_exact_zero());
        assert!(rs.roots[1].eq_to_precision(&Elem::from_i64(&k, 2)));
    }
}
