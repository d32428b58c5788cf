use std::collections::BTreeMap;

use serde::Serialize;

use super::build::sample;
use crate::error::{Error, Result};
use crate::rat::Q;
use crate::residue::Place;
use crate::swan::{swan_of_series, with_extension, CoverSpec, Settings};

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DiskReport {
    #[serde(with = "crate::rat::serde_q")]
    pub r: Q,
    pub branch_count_in_disk: usize,
    #[serde(with = "crate::rat::serde_q")]
    pub left_slope: Q,
    #[serde(with = "crate::rat::serde_q")]
    pub target_slope: Q,
    pub is_closed_disk: bool,
    pub criterion_used: String,
    #[serde(with = "crate::rat::serde_q")]
    pub depth: Q,
    /// ord_∞(ω(r)) = |B[r]| − 2, when the depth is positive
    pub omega_criterion: Option<bool>,
    pub flags: Vec<String>,
}

/// Left derivative of δ at r. At depth 0 it is found from samples to the
/// left: the zero of the line through the nearest positive-depth sample.
pub fn left_slope_at(cover: &CoverSpec, r: &Q, settings: &Settings) -> Result<Q> {
    let s = sample(cover, r, settings)?;
    if let Some((l, _)) = s.slopes {
        return Ok(l);
    }
    let zero = Q::from_integer(0);
    let mut lo = Q::from_integer(0);
    let mut probe = *r / Q::from_integer(2);
    for _ in 0..settings.grid_cap {
        let t = sample(cover, &probe, settings)?;
        match t.slopes {
            None => {
                if lo == zero {
                    return Ok(zero);
                }
                lo = probe;
            }
            Some((_, rs)) => {
                if rs < zero && t.r - t.value.depth / rs == *r {
                    return Ok(rs);
                }
                lo = probe;
            }
        }
        probe = (lo + *r) / Q::from_integer(2);
    }
    Err(Error::GridTooCoarse(lo, *r))
}

/// Whether the preimage of D[r] is a closed disk: the left slope of δ at r
/// attains |B[r]| − 1.
pub fn closed_disk_at(cover: &CoverSpec, r: &Q, assume_connected: bool, settings: &Settings) -> Result<DiskReport> {
    cover.check_radius(r)?;
    let open_count = cover.branch.iter().filter(|b| b.x.v().map_or(false, |v| v > *r)).count()
        + usize::from(cover.order_at_zero().rem_euclid(cover.p() as i64) != 0);
    if open_count == 0 && !assume_connected {
        return Err(Error::ConnectednessNotEstablished(*r));
    }
    let n = cover.branch_count(r);
    let s = sample(cover, r, settings)?;
    let left = left_slope_at(cover, r, settings)?;
    let target = Q::from_integer(n as i64 - 1);
    if left > target {
        return Err(Error::inconsistency(format!("left slope {left} above |B[r]| - 1 = {target} at r = {r}")));
    }
    let mut flags = Vec::new();
    let omega_criterion = s.value.form.as_ref().map(|w| w.ord_inf() == n as i64 - 2);
    if let Some(oc) = omega_criterion {
        if oc != (left == target) {
            return Err(Error::inconsistency(format!("slope and form criteria disagree at r = {r}")));
        }
    } else {
        flags.push("zero-depth: residual separability assumed".to_string());
    }
    if open_count == 0 {
        flags.push("connectedness asserted by caller".to_string());
    }
    Ok(DiskReport {
        r: *r,
        branch_count_in_disk: n,
        left_slope: left,
        target_slope: target,
        is_closed_disk: left == target,
        criterion_used: "left-slope".to_string(),
        depth: s.value.depth,
        omega_criterion,
        flags,
    })
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VcPoint {
    pub place: Place,
    pub ord: i64,
    pub branch_near: usize,
    pub delta: i64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VcReport {
    #[serde(with = "crate::rat::serde_q")]
    pub r: Q,
    pub zero_depth: bool,
    pub points: Vec<VcPoint>,
    pub ord_inf: Option<i64>,
    #[serde(with = "crate::rat::serde_opt_q")]
    pub ord_inf_bound: Option<Q>,
    pub degree: Option<i64>,
    /// every δ_ȳ vanishes
    pub smooth: bool,
}

/// Per residue point of the reduction at r: δ_ȳ = (p−1)(ord + |B ∩ U|)/2,
/// with the integrality, bound and degree checks.
pub fn vanishing_cycles_report(cover: &CoverSpec, r: &Q, settings: &Settings) -> Result<VcReport> {
    cover.check_radius(r)?;
    with_extension(cover, settings, |c| {
        let k = c.field();
        let er = r * Q::from_integer(k.e() as i64);
        if !er.is_integer() {
            return Err(Error::ExtensionRequired { e_mult: *er.denom() as u32, f_mult: 1 });
        }
        let v = swan_of_series(&c.kummer_series()?, r)?;
        let Some(w) = v.form else {
            return Ok(VcReport {
                r: *r,
                zero_depth: true,
                points: vec![],
                ord_inf: None,
                ord_inf_bound: None,
                degree: None,
                smooth: true,
            });
        };
        let fq = k.residue_field();
        let p = k.p() as i64;
        let mut near: BTreeMap<Place, usize> = BTreeMap::new();
        for b in &c.branch {
            let place = if b.x.v()? > *r { Place::Zero } else { Place::at(fq, b.x.leading_residue()?) };
            *near.entry(place).or_default() += 1;
        }
        if c.order_at_zero().rem_euclid(p) != 0 {
            *near.entry(Place::Zero).or_default() += 1;
        }
        let mut places: BTreeMap<Place, i64> = w.divisor_finite(fq).into_iter().collect();
        for pl in near.keys() {
            places.entry(pl.clone()).or_insert(0);
        }
        let mut points = Vec::new();
        for (place, ord) in places {
            let n = near.get(&place).copied().unwrap_or(0);
            let twice = (p - 1) * (ord + n as i64);
            if twice < 0 || twice % 2 != 0 {
                return Err(Error::inconsistency(format!("delta at {place} is {twice}/2")));
            }
            points.push(VcPoint { place, ord, branch_near: n, delta: twice / 2 });
        }
        let ord_inf = w.ord_inf();
        // branch points outside D[r]: at most d, plus ∞ when p ∤ α0
        let outside = c.outside_bound as i64 + i64::from(c.alpha0 as i64 % p != 0);
        let bound = -Q::new(2 * p * c.genus as i64, p - 1) - Q::from_integer(outside);
        if Q::from_integer(ord_inf) < bound {
            return Err(Error::inconsistency(format!("ord at infinity {ord_inf} below {bound}")));
        }
        let degree = w.degree_check(fq)?;
        if degree != -2 {
            return Err(Error::inconsistency(format!("form has degree {degree}")));
        }
        Ok(VcReport {
            r: *r,
            zero_depth: false,
            smooth: points.iter().all(|x| x.delta == 0),
            points,
            ord_inf: Some(ord_inf),
            ord_inf_bound: Some(bound),
            degree: Some(degree),
        })
    })
}
