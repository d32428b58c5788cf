//! Closed forms for the kink radius λ_{m,r0} through μ.

use serde::Serialize;

use super::cover::CoverSpec;
use super::eliminate::{eliminate, EliminationResult};
use crate::error::{Error, Result};
use crate::rat::{wild_bound, Q};
use crate::series::Direction;

/// μ_{sU,m}: max of (v(c_m) − v(c_i))/(m − i) over −sU ≤ i < m, i ≠ 0,
/// p ∤ i, c_i ≠ 0, and 0. `None` means +∞ (c_m vanishes at precision).
pub fn mu(elim_u: &EliminationResult, elim_f: &EliminationResult, s_u: i64, m: i64, p: u32) -> Result<Option<Q>> {
    if m.rem_euclid(p as i64) == 0 {
        return Err(Error::UnsupportedSlope(m));
    }
    if -s_u >= m {
        return Err(Error::invalid(format!("need -s_U < m, got s_U = {s_u}, m = {m}")));
    }
    let c = |i: i64| if i < 0 { elim_u.c(i) } else { elim_f.c(i) };
    let cm = c(m);
    if cm.is_negligible() {
        return Ok(None);
    }
    let e = Q::from_integer(cm.field().e() as i64);
    let vm = cm.v()?;
    let mut best = Q::from_integer(0);
    let mut ambiguous = Vec::new();
    for i in -s_u..m {
        if i == 0 || i.rem_euclid(p as i64) == 0 {
            continue;
        }
        let ci = c(i);
        let gap = Q::from_integer(m - i);
        if ci.is_negligible() {
            if ci.is_exact_zero() {
                continue;
            }
            // v(c_i) ≥ the precision floor; the candidate is at most this
            let bound = (vm - Q::from_integer(ci.val_lower_pi()) / e) / gap;
            ambiguous.push((i, bound));
            continue;
        }
        let cand = (vm - ci.v()?) / gap;
        if cand > best {
            best = cand;
        }
    }
    if let Some((i, _)) = ambiguous.iter().find(|(_, b)| *b > best) {
        return Err(Error::PrecisionLoss(format!("c_{i} vanishes at precision but may matter for mu")));
    }
    Ok(Some(best))
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LambdaReport {
    #[serde(with = "crate::rat::serde_q")]
    pub lambda: Q,
    pub m: i64,
    /// which clause produced the value
    pub branch: &'static str,
    #[serde(with = "crate::rat::serde_opt_q")]
    pub mu: Option<Q>,
    /// μ = +∞ was capped at r0
    pub mu_infinite: bool,
}

/// λ_{m,r0}(F) with m = |B[r0]| − 1.
pub fn lambda_closed_form(cover: &CoverSpec) -> Result<LambdaReport> {
    let p = cover.p();
    let r0 = cover.r0;
    let n = cover.branch_count(&r0) as i64;
    let m = n - 1;
    let rep = |lambda, branch| Ok(LambdaReport { lambda, m, branch, mu: None, mu_infinite: false });
    if cover.alpha0 != 0 {
        return rep(if m == 0 { Q::from_integer(0) } else { r0 }, "alpha0-nonzero");
    }
    if n > 1 && n.rem_euclid(p as i64) == 1 {
        return rep(r0, "count-1-mod-p");
    }
    if m == 0 {
        return Err(Error::AssumptionViolation(
            "a single branch point forces alpha0 != 0 in this normalization".into(),
        ));
    }
    if m.rem_euclid(p as i64) == 0 {
        return Err(Error::UnsupportedSlope(m));
    }
    let s_u = cover.s_u();
    let eu = eliminate(&cover.unit_u, s_u, Direction::Pos, 0)?;
    let ef = eliminate(&cover.f_tilde(), m.max(1), Direction::Neg, 0)?;
    let mu_v = mu(&eu, &ef, s_u, m, p)?;
    let Some(mu_q) = mu_v else {
        return Ok(LambdaReport { lambda: r0, m, branch: "mu-infinite", mu: None, mu_infinite: true });
    };
    let lambda = if m > 0 {
        let vcm = ef.c(m).v()?;
        r0.min(mu_q.max((vcm - wild_bound(p)) / Q::from_integer(m)))
    } else {
        r0.min(mu_q)
    };
    Ok(LambdaReport { lambda, m, branch: if m > 0 { "closed-form" } else { "m-minus-one" }, mu: Some(mu_q), mu_infinite: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::rat::{q, qi};

    #[test]
    fn spec_mu_and_lambda() {
        let k = Field::qp(3).unwrap();
        let a = CoverSpec::from_ints(&k, 0, &[(3, 1), (24, 1)], qi(1)).unwrap();
        let la = lambda_closed_form(&a).unwrap();
        assert_eq!(la.mu, Some(qi(0)));
        assert_eq!(la.lambda, q(1, 4));
        let b = CoverSpec::from_ints(&k, 0, &[(3, 1), (12, 1)], qi(1)).unwrap();
        let lb = lambda_closed_form(&b).unwrap();
        assert_eq!(lb.mu, Some(qi(1)));
        assert_eq!(lb.lambda, qi(1));
        let c = CoverSpec::from_ints(&k, 1, &[], qi(1)).unwrap();
        assert_eq!(lambda_closed_form(&c).unwrap().lambda, qi(0));
    }

    #[test]
    fn mu_empty_set_is_zero() {
        let k = Field::qp(3).unwrap();
        // only c_2 nonzero: F = 1 + 9T^{-2} needs two branch points summing to 0
        let c = CoverSpec::from_ints(&k, 0, &[(3, 1), (-3, 1)], qi(1)).unwrap();
        let l = lambda_closed_form(&c).unwrap();
        assert_eq!(l.mu, Some(qi(0)));
        assert_eq!(l.lambda, q(1, 4));
    }
}
