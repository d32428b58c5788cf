//! Depth and differential Swan conductors of Z/p covers of a disk.

mod cover;
mod eliminate;
mod kink;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Elem;
use crate::rat::{is_integer, wild_bound, Q};
use crate::residue::{Differential, RatFunc};
use crate::series::LaurentSeries;

pub use cover::{BranchPoint, CoverSpec};
pub use eliminate::{eliminate, EliminationResult};
pub use kink::{lambda_closed_form, mu, LambdaReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    ExactDg,
    LogarithmicDgOverG,
    ZeroDepth,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwanValue {
    #[serde(with = "crate::rat::serde_q")]
    pub depth: Q,
    pub form: Option<Differential>,
    pub regime: Regime,
}

impl SwanValue {
    pub fn zero() -> SwanValue {
        SwanValue { depth: Q::from_integer(0), form: None, regime: Regime::ZeroDepth }
    }

    pub fn is_zero_depth(&self) -> bool {
        self.form.is_none()
    }

    /// (left, right) derivative of the depth profile, read off the form.
    pub fn slopes(&self) -> Option<(i64, i64)> {
        self.form.as_ref().map(|w| (w.ord_inf() + 1, -w.ord0() - 1))
    }
}

/// Settings shared by the drivers that may enlarge the field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Settings {
    /// cap on e·f of the working field
    pub max_extension: u32,
    /// refinement depth of the profile builder
    pub grid_cap: u32,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { max_extension: 64, grid_cap: 12 }
    }
}

/// δ_F(r) and ω_F(r) for a Kummer representative F, found by building the
/// corrector H term by term until [F − H^p]_r is not a p-th power. In the
/// exact regime ω = d[F − H^p]_r / [F]_r, which is d[F/H^p − 1]_r.
///
/// F is normalized by a constant of valuation v_r(F). Works for every
/// rational r ≥ 0; fails with `ExtensionRequired` when a corrector
/// coefficient needs a p-th root of π.
pub fn swan_of_series(f: &LaurentSeries, r: &Q) -> Result<SwanValue> {
    let k = f.field().clone();
    let p = k.p();
    let fq = k.residue_field();
    let wild = wild_bound(p);
    let e = Q::from_integer(k.e() as i64);
    let (w0, lead0) = f.leading_terms(r)?;
    // [F]_r = [H]_r^p once the first step has run; ω = d[F/H^p − 1]_r
    let fred = RatFunc::from_laurent(fq, &lead0);
    let mut h = LaurentSeries::zero(&k);
    let cap = 8 * k.precision() as usize * k.e() as usize * (*r.denom() as usize).max(1) + 16;
    for _ in 0..cap {
        let g = f.sub(&h.pow(p)?)?;
        let info = g.gauss_info(r);
        if let Some(lb) = info.lower_bound() {
            if lb - w0 >= wild {
                return Ok(SwanValue::zero());
            }
        }
        let (w, lead) = g.leading_terms(r)?;
        let wrel = w - w0;
        if lead.iter().any(|(d, _)| d.rem_euclid(p as i64) != 0) {
            let red = RatFunc::from_laurent(fq, &lead);
            return if wrel == Q::from_integer(0) {
                Ok(SwanValue {
                    depth: wild,
                    form: Some(Differential::log(fq, &red)?),
                    regime: Regime::LogarithmicDgOverG,
                })
            } else {
                Ok(SwanValue {
                    depth: wild - wrel,
                    form: Some(Differential::new(red.derivative(fq).div(fq, &fred)?)),
                    regime: Regime::ExactDg,
                })
            };
        }
        let mut add = Vec::new();
        for (d, rho) in lead {
            let va = w - r * Q::from_integer(d);
            let ev = va * e / Q::from_integer(p as i64);
            if !is_integer(&ev) {
                return Err(Error::ExtensionRequired { e_mult: *ev.denom() as u32, f_mult: 1 });
            }
            let c = Elem::pi_pow(&k, ev.to_integer()).mul(&Elem::lift(&k, fq.pth_root(rho)));
            add.push((d / p as i64, c));
        }
        h = h.add(&LaurentSeries::from_terms(&k, add))?;
    }
    Err(Error::NoConvergence(format!("corrector search at r = {r}")))
}

/// Additivity: combine the values of F1 and F2 into that of F1·F2 when it
/// is determined (`None` when the forms cancel).
pub fn padd(a: &SwanValue, b: &SwanValue, fq: &crate::field::Fq) -> Option<SwanValue> {
    if a.depth > b.depth {
        return Some(a.clone());
    }
    if b.depth > a.depth {
        return Some(b.clone());
    }
    match (&a.form, &b.form) {
        (None, None) => Some(SwanValue::zero()),
        (Some(x), Some(y)) => {
            let w = x.add(fq, y);
            if w.is_zero() {
                return None;
            }
            let regime = if a.regime == b.regime { a.regime } else { Regime::ExactDg };
            Some(SwanValue { depth: a.depth, form: Some(w), regime })
        }
        _ => None,
    }
}

/// The value for F^m, p ∤ m.
pub fn swan_power_twist(v: &SwanValue, m: i64, fq: &crate::field::Fq) -> Result<SwanValue> {
    if m.rem_euclid(fq.p() as i64) == 0 {
        return Err(Error::invalid(format!("twist exponent {m} divisible by p")));
    }
    Ok(SwanValue {
        depth: v.depth,
        form: v.form.as_ref().map(|w| w.scale(fq, m)),
        regime: v.regime,
    })
}

/// A slope divisible by p at positive depth forces the logarithmic regime
/// and slope 0.
pub fn slope_divisibility_guard(v: &SwanValue, slope: i64, p: u32) -> Result<()> {
    if v.is_zero_depth() || slope.rem_euclid(p as i64) != 0 {
        return Ok(());
    }
    if v.depth != wild_bound(p) || slope != 0 {
        return Err(Error::inconsistency(format!(
            "slope {slope} divisible by p = {p} at depth {}",
            v.depth
        )));
    }
    Ok(())
}

/// δ and ω of a cover at r, requiring 0 < r ≤ r0 and e·r ∈ Z.
pub fn swan_at(cover: &CoverSpec, r: &Q) -> Result<SwanValue> {
    cover.check_radius(r)?;
    let er = r * Q::from_integer(cover.field().e() as i64);
    if !is_integer(&er) {
        return Err(Error::ExtensionRequired { e_mult: *er.denom() as u32, f_mult: 1 });
    }
    swan_of_series(&cover.kummer_series()?, r)
}

/// Run `f` on the cover, enlarging the field whenever it asks for it.
pub fn with_extension<T>(
    cover: &CoverSpec,
    settings: &Settings,
    f: impl Fn(&CoverSpec) -> Result<T>,
) -> Result<T> {
    let mut cur = cover.clone();
    loop {
        match f(&cur) {
            Err(Error::ExtensionRequired { e_mult, f_mult }) => {
                let k = cur.field();
                let (e, fd) = (k.e() * e_mult, k.f() * f_mult);
                if e as u64 * fd as u64 > settings.max_extension as u64 {
                    return Err(Error::ExtensionCapExceeded { e, f: fd, cap: settings.max_extension });
                }
                cur = cur.extend(e_mult, f_mult)?;
            }
            other => return other,
        }
    }
}

/// `swan_at` for any rational 0 < r ≤ r0, enlarging the field as needed.
pub fn swan_at_auto(cover: &CoverSpec, r: &Q, settings: &Settings) -> Result<SwanValue> {
    cover.check_radius(r)?;
    with_extension(cover, settings, |c| swan_of_series(&c.kummer_series()?, r))
}

/// The value assembled from the two truncated elimination remainders
/// (U side and F̃ side), combined by additivity. Falls back to the direct
/// engine when the two forms cancel.
pub fn swan_at_components(cover: &CoverSpec, r: &Q) -> Result<SwanValue> {
    cover.check_radius(r)?;
    if cover.alpha0 != 0 {
        return swan_of_series(&cover.kummer_series()?, r);
    }
    let k = cover.field();
    let p = k.p();
    let m = cover.branch_count(&cover.r0) as i64 - 1;
    let s_f = m.max(1);
    let s_u = cover.s_u();
    let eu = eliminate(&cover.unit_u, s_u, crate::series::Direction::Pos, 0)?;
    let ef = eliminate(&cover.f_tilde(), s_f, crate::series::Direction::Neg, 0)?;
    let au = eu.remainder.truncate(s_u, crate::series::Direction::Pos).without_constant();
    let af = ef.remainder.truncate(s_f, crate::series::Direction::Neg).without_constant();
    let vu = truncated_value(&au, r, p)?;
    let vf = truncated_value(&af, r, p)?;
    match padd(&vu, &vf, k.residue_field()) {
        Some(v) => Ok(v),
        None => swan_of_series(&cover.kummer_series()?, r),
    }
}

/// δ of 1 + A for a remainder A without p-divisible degrees.
fn truncated_value(a: &LaurentSeries, r: &Q, p: u32) -> Result<SwanValue> {
    if a.terms().next().is_none() {
        return Ok(SwanValue::zero());
    }
    let wild = wild_bound(p);
    let info = a.gauss_info(r);
    if let Some(lb) = info.lower_bound() {
        if lb >= wild {
            return Ok(SwanValue::zero());
        }
    }
    let (w, lead) = a.leading_terms(r)?;
    let fq = a.field().residue_field();
    let red = RatFunc::from_laurent(fq, &lead);
    if w == Q::from_integer(0) {
        let g = red.add(fq, &RatFunc::constant(1));
        let form = Differential::log(fq, &g)?;
        return Ok(SwanValue { depth: wild, form: Some(form), regime: Regime::LogarithmicDgOverG });
    }
    let form = Differential::exact(fq, &red);
    if form.is_zero() {
        return Err(Error::inconsistency("truncated remainder reduces to a p-th power"));
    }
    Ok(SwanValue { depth: wild - w, form: Some(form), regime: Regime::ExactDg })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Field, FieldRef};
    use crate::rat::{q, qi};
    use crate::residue::{FqPoly, RatFunc};

    fn worked() -> (FieldRef, CoverSpec) {
        let k = Field::qp(3).unwrap();
        let c = CoverSpec::from_ints(&k, 0, &[(3, 1), (24, 1)], qi(1)).unwrap();
        (k, c)
    }

    #[test]
    fn form_divided_by_reduction() {
        // [F]_1 = (1 + t^-1)^2 for F = (1 - 2/T)(1 - 6/T); ω has its only pole at t = 1
        let k = Field::qp(2).unwrap();
        let c = CoverSpec::from_ints(&k, 0, &[(2, 1), (6, 1)], qi(1)).unwrap();
        let v = swan_at(&c, &qi(1)).unwrap();
        assert_eq!(v.depth, qi(1));
        let fq = k.residue_field();
        let want = RatFunc::new(fq, FqPoly::one(), FqPoly::new(vec![1, 0, 1])).unwrap();
        assert_eq!(v.form, Some(Differential::new(want)));
    }

    #[test]
    fn worked_values() {
        let (k, c) = worked();
        let fq = k.residue_field();
        let v = swan_at_auto(&c, &q(1, 2), &Settings::default()).unwrap();
        assert_eq!(v.depth, q(1, 2));
        assert_eq!(v.regime, Regime::ExactDg);
        let want = Differential::new(RatFunc::from_laurent(fq, &[(-3, 2)]));
        assert_eq!(v.form.as_ref().unwrap().coeff(), want.coeff());
        assert_eq!(v.slopes(), Some((2, 2)));
        assert!(swan_at_auto(&c, &q(1, 8), &Settings::default()).unwrap().is_zero_depth());
        assert_eq!(swan_at(&c, &q(1, 2)), Err(Error::ExtensionRequired { e_mult: 2, f_mult: 1 }));
        let v1 = swan_at(&c, &qi(1)).unwrap();
        assert_eq!(v1.depth, q(3, 2));
        assert_eq!(v1.regime, Regime::LogarithmicDgOverG);
    }

    #[test]
    fn alpha0_cover_is_logarithmic() {
        let k = Field::qp(3).unwrap();
        let c = CoverSpec::from_ints(&k, 1, &[(3, 1), (24, 2)], qi(1)).unwrap();
        for r in [q(1, 3), q(1, 2), qi(1)] {
            let v = swan_at_auto(&c, &r, &Settings::default()).unwrap();
            assert_eq!(v.depth, q(3, 2));
            assert_eq!(v.regime, Regime::LogarithmicDgOverG);
        }
    }

    #[test]
    fn components_agree_on_worked_cover() {
        let (_, c) = worked();
        for r in [q(1, 8), q(1, 4), q(1, 2), q(3, 4), qi(1)] {
            let a = swan_of_series(&c.kummer_series().unwrap(), &r).unwrap();
            let b = swan_at_components(&c, &r).unwrap();
            assert_eq!(a.depth, b.depth, "r = {r}");
            assert_eq!(a.form, b.form, "r = {r}");
        }
    }

    #[test]
    fn spec_twist() {
        let k = Field::qp(3).unwrap();
        let fq = k.residue_field();
        let v = SwanValue {
            depth: q(1, 2),
            form: Some(Differential::new(RatFunc::from_laurent(fq, &[(-3, 2)]))),
            regime: Regime::ExactDg,
        };
        let t = swan_power_twist(&v, 2, fq).unwrap();
        assert_eq!(t.form.unwrap().coeff(), &RatFunc::from_laurent(fq, &[(-3, 1)]));
        assert_eq!(swan_power_twist(&v, 1, fq).unwrap(), v);
        assert_eq!(swan_power_twist(&SwanValue::zero(), 5, fq).unwrap(), SwanValue::zero());
    }

    #[test]
    fn spec_divisibility_guard() {
        let k = Field::qp(3).unwrap();
        let fq = k.residue_field();
        let form = Some(Differential::new(RatFunc::constant(1)));
        let log = SwanValue { depth: q(3, 2), form: form.clone(), regime: Regime::LogarithmicDgOverG };
        assert!(slope_divisibility_guard(&log, 0, 3).is_ok());
        let half = SwanValue { depth: q(1, 2), form, regime: Regime::ExactDg };
        assert!(matches!(slope_divisibility_guard(&half, 3, 3), Err(Error::InternalInconsistency(_))));
        assert!(slope_divisibility_guard(&half, 2, 3).is_ok());
        let _ = fq;
    }
}
