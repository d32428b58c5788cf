use rayon::prelude::*;

use super::PlProfile;
use crate::error::{Error, Result};
use crate::rat::Q;
use crate::swan::{slope_divisibility_guard, swan_at_auto, CoverSpec, Settings, SwanValue};

/// δ at one radius with the slopes read off the form (none at depth 0).
#[derive(Debug, Clone)]
pub struct Sample {
    pub r: Q,
    pub value: SwanValue,
    pub slopes: Option<(Q, Q)>,
}

impl Sample {
    fn depth(&self) -> Q {
        self.value.depth
    }

    fn left(&self) -> Option<Q> {
        self.slopes.map(|s| s.0)
    }

    fn right(&self) -> Option<Q> {
        self.slopes.map(|s| s.1)
    }
}

pub fn sample(cover: &CoverSpec, r: &Q, settings: &Settings) -> Result<Sample> {
    let value = swan_at_auto(cover, r, settings)?;
    let p = cover.p();
    let slopes = match value.slopes() {
        Some((l, rr)) => {
            slope_divisibility_guard(&value, l, p)?;
            slope_divisibility_guard(&value, rr, p)?;
            Some((Q::from_integer(l), Q::from_integer(rr)))
        }
        None => None,
    };
    Ok(Sample { r: *r, value, slopes })
}

enum Gap {
    Linear,
    Kink(Q, Q),
    Split(Q),
}

/// Decide whether δ is linear on [a, b], has one kink located exactly by
/// intersecting the two boundary lines, or needs a probe at some radius.
fn classify(a: &Sample, b: &Sample) -> Gap {
    let zero = Q::from_integer(0);
    let s = (b.depth() - a.depth()) / (b.r - a.r);
    let ok_a = a.right().map_or(true, |x| x == s);
    let ok_b = b.left().map_or(true, |x| x == s);
    if ok_a && ok_b && (a.slopes.is_some() || b.slopes.is_some() || s == zero) {
        return Gap::Linear;
    }
    let mid = (a.r + b.r) / Q::from_integer(2);
    let cand = match (a.right(), b.left()) {
        (Some(ra), Some(lb)) if ra != lb => {
            Some((b.depth() - a.depth() + ra * a.r - lb * b.r) / (ra - lb))
        }
        (None, Some(lb)) if lb > zero => Some(b.r - b.depth() / lb),
        (Some(ra), None) if ra < zero => Some(a.r - a.depth() / ra),
        _ => None,
    };
    match cand {
        Some(x) if x > a.r && x < b.r => {
            let va = a.depth() + a.right().unwrap_or(zero) * (x - a.r);
            Gap::Kink(x, va)
        }
        Some(x) if x == a.r && a.slopes.is_none() => Gap::Kink(x, a.depth()),
        Some(x) if x == b.r && b.slopes.is_none() => Gap::Kink(x, b.depth()),
        _ => Gap::Split(mid),
    }
}

/// The points of δ on [a, b] strictly after a, ending with b.
fn refine(cover: &CoverSpec, a: &Sample, b: &Sample, settings: &Settings, level: u32) -> Result<Vec<(Q, Q)>> {
    let (x, probe_at) = match classify(a, b) {
        Gap::Linear => return Ok(vec![(b.r, b.depth())]),
        // kink at a zero-depth endpoint, linear in between
        Gap::Kink(x, _) if x == a.r || x == b.r => return Ok(vec![(b.r, b.depth())]),
        Gap::Kink(x, vx) => (Some((x, vx)), x),
        Gap::Split(m) => (None, m),
    };
    if level >= settings.grid_cap {
        return Err(Error::GridTooCoarse(a.r, b.r));
    }
    let c = sample(cover, &probe_at, settings)?;
    if let Some((x, vx)) = x {
        let zero = Q::from_integer(0);
        let slopes_fit = match c.slopes {
            Some((l, r)) => l == a.right().unwrap_or(zero) && r == b.left().unwrap_or(zero),
            None => true,
        };
        if c.depth() == vx && slopes_fit {
            return Ok(vec![(x, vx), (b.r, b.depth())]);
        }
    }
    let (left, right) = rayon::join(
        || refine(cover, a, &c, settings, level + 1),
        || refine(cover, &c, b, settings, level + 1),
    );
    let mut out = left?;
    out.extend(right?);
    Ok(out)
}

/// δ_F on (0, r0] as an exact piecewise linear function.
pub fn build_profile(cover: &CoverSpec, settings: &Settings) -> Result<PlProfile> {
    let r0 = cover.r0;
    let zero = Q::from_integer(0);
    let mut radii: Vec<Q> = (1..=8).map(|k| r0 * Q::new(k, 8)).collect();
    let mut samples: Vec<Sample> = radii.par_iter().map(|r| sample(cover, r, settings)).collect::<Result<_>>()?;
    // extend toward 0 until the two smallest samples share a line
    let mut j = 3;
    loop {
        let (a, b) = (&samples[0], &samples[1]);
        let stable = matches!(classify(a, b), Gap::Linear) && a.left() == a.right();
        if stable {
            break;
        }
        j += 1;
        if j > settings.grid_cap + 3 {
            return Err(Error::GridTooCoarse(zero, samples[0].r));
        }
        let r = r0 / Q::from_integer(1i64 << j);
        radii.insert(0, r);
        samples.insert(0, sample(cover, &r, settings)?);
    }
    let first_slope = samples[0].left().unwrap_or(zero);
    let last_slope = samples.last().unwrap().right().unwrap_or(zero);
    let pieces: Vec<Vec<(Q, Q)>> = samples
        .par_windows(2)
        .map(|w| refine(cover, &w[0], &w[1], settings, 0))
        .collect::<Result<_>>()?;
    let mut points = vec![(samples[0].r, samples[0].depth())];
    for p in pieces {
        points.extend(p);
    }
    let prof = PlProfile::from_points(r0, points, first_slope, last_slope)?;
    for s in &samples {
        if let Some((l, r)) = s.slopes {
            let (pl, pr) = (prof.left_slope_at(&s.r)?, prof.right_slope_at(&s.r)?);
            if pl != l || (s.r != r0 && pr != r) {
                return Err(Error::inconsistency(format!("profile slopes disagree with the form at r = {}", s.r)));
            }
        }
    }
    Ok(prof)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::profile::lambda_by_scan;
    use crate::rat::{q, qi};

    #[test]
    fn worked_profile() {
        let k = Field::qp(3).unwrap();
        let c = CoverSpec::from_ints(&k, 0, &[(3, 1), (24, 1)], qi(1)).unwrap();
        let p = build_profile(&c, &Settings::default()).unwrap();
        let kinks: Vec<Q> = p.kinks().map(|n| n.r).collect();
        assert_eq!(kinks, vec![q(1, 4)]);
        assert_eq!(p.value_at(&q(1, 8)).unwrap(), qi(0));
        assert_eq!(p.value_at(&q(3, 4)).unwrap(), qi(1));
        assert_eq!(lambda_by_scan(&p, 2), q(1, 4));
    }

    #[test]
    fn constant_profiles() {
        let k = Field::qp(3).unwrap();
        let a = CoverSpec::from_ints(&k, 1, &[], qi(1)).unwrap();
        let p = build_profile(&a, &Settings::default()).unwrap();
        assert_eq!(p.kinks().count(), 0);
        assert_eq!(p.value_at(&q(1, 3)).unwrap(), q(3, 2));
        // F = (T - 3)^2: the only branch point is 3
        let b = CoverSpec::from_ints(&k, 2, &[(3, 2)], qi(1)).unwrap();
        let p = build_profile(&b, &Settings::default()).unwrap();
        assert_eq!(p.kinks().count(), 0);
        assert_eq!(p.value_at(&q(1, 5)).unwrap(), q(3, 2));
    }

    #[test]
    fn member_b_profile() {
        let k = Field::qp(3).unwrap();
        let c = CoverSpec::from_ints(&k, 0, &[(3, 1), (12, 1)], qi(1)).unwrap();
        let p = build_profile(&c, &Settings::default()).unwrap();
        assert_eq!(p.value_at(&q(1, 2)).unwrap(), qi(1));
        assert_eq!(lambda_by_scan(&p, 2), qi(1));
    }
}
