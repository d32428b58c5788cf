//! Killing the coefficients of G in degrees p, 2p, ..., sp (on one side)
//! by subtracting I^p, I = 1 + Σ_{k ≤ s} b_k T^{±k}.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{find_roots, Elem, Poly};
use crate::rat::Q;
use crate::series::{Direction, LaurentSeries};

#[derive(Debug, Clone)]
pub struct EliminationResult {
    /// the corrector I, constant term 1
    pub corrector: LaurentSeries,
    /// G − I^p
    pub remainder: LaurentSeries,
    /// degrees ±p, ..., ±sp
    pub target_degrees: Vec<i64>,
    /// i ↦ v(c_i) where c_i is the coefficient of T^{-i} in the remainder;
    /// `None` when c_i vanishes at precision
    pub c_valuations: BTreeMap<i64, Option<Q>>,
    pub sweeps: usize,
}

#[derive(Serialize)]
struct CVal {
    index: i64,
    #[serde(with = "crate::rat::serde_opt_q")]
    valuation: Option<Q>,
}

impl EliminationResult {
    pub fn c_valuation(&self, i: i64) -> Option<Q> {
        self.c_valuations.get(&i).copied().flatten()
    }

    /// The coefficient c_i (of T^{-i}).
    pub fn c(&self, i: i64) -> Elem {
        self.remainder.coeff(-i)
    }

    pub fn c_valuation_json(&self) -> serde_json::Value {
        let v: Vec<CVal> = self
            .c_valuations
            .iter()
            .map(|(&index, &valuation)| CVal { index, valuation })
            .collect();
        serde_json::to_value(v).unwrap()
    }
}

fn binom(n: u32, k: u32) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

/// Solve for I with the target coefficients of G − I^p vanishing at
/// precision. The first sweep takes root number `root_choice` (in the
/// deterministic order of `find_roots`, wrapping around); later sweeps stay
/// with the root nearest the previous value.
pub fn eliminate(g: &LaurentSeries, s: i64, side: Direction, root_choice: usize) -> Result<EliminationResult> {
    let k = g.field().clone();
    let p = k.p();
    let sg = match side {
        Direction::Pos => 1,
        Direction::Neg => -1,
    };
    if s < 1 {
        return Err(Error::invalid("elimination length must be positive"));
    }
    if !g.coeff(0).sub(&Elem::one(&k)).is_negligible() {
        return Err(Error::invalid("series to eliminate must have constant term 1"));
    }
    if g.terms().any(|(d, _)| d * sg < 0) {
        return Err(Error::invalid("series has terms on the wrong side"));
    }
    let targets: Vec<i64> = (1..=s).map(|j| sg * j * p as i64).collect();
    let mut b: Vec<Elem> = vec![Elem::zero(&k); s as usize + 1];
    let corrector = |b: &[Elem]| {
        LaurentSeries::from_terms(
            &k,
            std::iter::once((0, Elem::one(&k))).chain(b.iter().enumerate().skip(1).map(|(j, c)| (sg * j as i64, c.clone()))),
        )
    };
    let cap = 4 * s as usize * k.precision() as usize;
    for sweep in 0..cap {
        for kk in (1..=s as usize).rev() {
            let mut bj = b.clone();
            bj[kk] = Elem::zero(&k);
            let j_ser = corrector(&bj);
            // powers J^0..J^p
            let mut pows = vec![LaurentSeries::one(&k)];
            for i in 1..=p {
                let next = pows[i as usize - 1].mul(&j_ser)?;
                pows.push(next);
            }
            let mut coeffs = Vec::with_capacity(p as usize + 1);
            for j in 0..=p {
                let deg = sg * (kk as i64) * (p - j) as i64;
                let c = pows[(p - j) as usize].coeff(deg).mul(&Elem::from_bigint(&k, &BigInt::from(binom(p, j))));
                coeffs.push(c);
            }
            coeffs[0] = coeffs[0].sub(&g.coeff(sg * kk as i64 * p as i64));
            let roots = find_roots(&Poly(coeffs))?;
            if roots.roots.is_empty() {
                return Err(match roots.missing {
                    Some((e_mult, f_mult)) => Error::ExtensionRequired { e_mult, f_mult },
                    None => Error::NoConvergence("elimination equation has no root".into()),
                });
            }
            let pick = if sweep == 0 {
                roots.roots[root_choice % roots.roots.len()].clone()
            } else {
                let prev = &b[kk];
                roots
                    .roots
                    .iter()
                    .max_by(|x, y| {
                        let dx = x.sub(prev).val_lower_pi();
                        let dy = y.sub(prev).val_lower_pi();
                        dx.cmp(&dy).then_with(|| y.lex_cmp(x))
                    })
                    .unwrap()
                    .clone()
            };
            b[kk] = pick;
        }
        let i_ser = corrector(&b);
        let rem = g.sub(&i_ser.pow(p)?)?;
        if targets.iter().all(|&d| rem.coeff(d).is_negligible()) {
            let e = Q::from_integer(k.e() as i64);
            let c_valuations = rem
                .raw_terms()
                .filter(|(d, _)| *d != 0)
                .map(|(d, c)| {
                    let v = if c.is_negligible() { None } else { Some(Q::from_integer(c.val_pi().unwrap()) / e) };
                    (-d, v)
                })
                .collect();
            return Ok(EliminationResult {
                corrector: i_ser,
                remainder: rem,
                target_degrees: targets,
                c_valuations,
                sweeps: sweep + 1,
            });
        }
    }
    Err(Error::NoConvergence(format!("elimination after {cap} sweeps")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::rat::qi;

    #[test]
    fn spec_perfect_square() {
        let k = Field::qp(2).unwrap();
        let g = LaurentSeries::from_ints(&k, &[(0, 1), (-1, 4), (-2, 4)]);
        let r = eliminate(&g, 2, Direction::Neg, 0).unwrap();
        assert!(r.corrector.eq_to_precision(&LaurentSeries::from_ints(&k, &[(0, 1), (-1, 2)])));
        assert!(r.remainder.terms().next().is_none());
        assert_eq!(r.target_degrees, vec![-2, -4]);
    }

    #[test]
    fn spec_partial_square() {
        let k = Field::qp(2).unwrap();
        let g = LaurentSeries::from_ints(&k, &[(0, 1), (-1, 2), (-2, 4)]);
        let r = eliminate(&g, 2, Direction::Neg, 0).unwrap();
        assert!(r.corrector.eq_to_precision(&LaurentSeries::from_ints(&k, &[(0, 1), (-1, 2)])));
        assert!(r.remainder.eq_to_precision(&LaurentSeries::from_ints(&k, &[(-1, -2)])));
        assert_eq!(r.c_valuation(1), Some(qi(1)));
    }

    #[test]
    fn spec_no_targets_in_range() {
        let k = Field::qp(3).unwrap();
        let g = LaurentSeries::from_ints(&k, &[(0, 1), (-1, 27), (-2, 72)]);
        let r = eliminate(&g, 2, Direction::Neg, 0).unwrap();
        assert!(r.corrector.eq_to_precision(&LaurentSeries::one(&k)));
        assert!(r.remainder.eq_to_precision(&LaurentSeries::from_ints(&k, &[(-1, 27), (-2, 72)])));
        assert_eq!(r.c_valuation(1), Some(qi(3)));
        assert_eq!(r.c_valuation(2), Some(qi(2)));
    }

    #[test]
    fn root_choice_does_not_change_valuations() {
        let k = Field::qp(2).unwrap();
        // (1 + 2T^-1 + 4T^-2)^2 + 2T^-1 + 8T^-3
        let g = LaurentSeries::from_ints(&k, &[(0, 1), (-1, 6), (-2, 12), (-3, 24), (-4, 16)]);
        let run = |choice| {
            let mut g = g.clone();
            loop {
                match eliminate(&g, 2, Direction::Neg, choice) {
                    Err(Error::ExtensionRequired { e_mult, f_mult }) if g.field().e() * g.field().f() < 16 => {
                        g = g.extend(e_mult, f_mult).unwrap()
                    }
                    other => return other.unwrap(),
                }
            }
        };
        let (a, b) = (run(0), run(1));
        for d in a.target_degrees.iter().chain(b.target_degrees.iter()) {
            assert!(a.remainder.coeff(*d).is_negligible());
        }
        assert_eq!(a.c_valuations, b.c_valuations);
    }
}
