//! Piecewise linear conductor profiles on (0, r0].

mod build;
mod disk;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rat::{fmt_q, Q};

pub use build::{build_profile, sample, Sample};
pub use disk::{closed_disk_at, left_slope_at, vanishing_cycles_report, DiskReport, VcPoint, VcReport};

/// A node of a profile: a sampled radius or an exactly located kink.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Node {
    #[serde(with = "crate::rat::serde_q")]
    pub r: Q,
    #[serde(with = "crate::rat::serde_q")]
    pub value: Q,
    #[serde(with = "crate::rat::serde_q")]
    pub left_slope: Q,
    #[serde(with = "crate::rat::serde_q")]
    pub right_slope: Q,
    pub is_kink: bool,
}

/// A continuous piecewise linear function on (0, r0], linear on (0, r_1]
/// and between consecutive nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlProfile {
    #[serde(with = "crate::rat::serde_q")]
    pub r0: Q,
    pub nodes: Vec<Node>,
}

/// One CSV row.
#[derive(Debug, Clone, Serialize)]
pub struct CsvRow {
    pub r: String,
    pub delta: String,
    pub left_slope: String,
    pub right_slope: String,
    pub is_kink: bool,
}

impl PlProfile {
    /// Builds a profile from (r, value) points plus the slope of the
    /// initial segment (0, r_1] and the right slope at r0. Collinear
    /// points are kept; slopes and kink flags are recomputed.
    pub fn from_points(r0: Q, points: Vec<(Q, Q)>, first_slope: Q, last_slope: Q) -> Result<PlProfile> {
        if points.is_empty() || points.last().unwrap().0 != r0 {
            return Err(Error::invalid("profile must end at r0"));
        }
        if points.windows(2).any(|w| w[0].0 >= w[1].0) || points[0].0 <= Q::from_integer(0) {
            return Err(Error::invalid("profile radii must increase inside (0, r0]"));
        }
        let n = points.len();
        let seg: Vec<Q> = points.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
        let nodes = (0..n)
            .map(|i| {
                let left = if i == 0 { first_slope } else { seg[i - 1] };
                let right = if i + 1 == n { last_slope } else { seg[i] };
                Node {
                    r: points[i].0,
                    value: points[i].1,
                    left_slope: left,
                    right_slope: right,
                    is_kink: left != right && i + 1 < n,
                }
            })
            .collect();
        let p = PlProfile { r0, nodes };
        p.check()?;
        Ok(p)
    }

    pub fn constant(r0: Q, c: Q) -> PlProfile {
        PlProfile::from_points(r0, vec![(r0, c)], Q::from_integer(0), Q::from_integer(0)).unwrap()
    }

    /// Continuity, nonnegativity and slope consistency.
    pub fn check(&self) -> Result<()> {
        let zero = Q::from_integer(0);
        for n in &self.nodes {
            if n.value < zero {
                return Err(Error::inconsistency(format!("negative profile value at r = {}", n.r)));
            }
        }
        if let Some(first) = self.nodes.first() {
            if first.value - first.left_slope * first.r < zero {
                return Err(Error::inconsistency("profile negative near 0"));
            }
        }
        for w in self.nodes.windows(2) {
            let s = (w[1].value - w[0].value) / (w[1].r - w[0].r);
            if s != w[0].right_slope || s != w[1].left_slope {
                return Err(Error::inconsistency(format!("slope mismatch on [{}, {}]", w[0].r, w[1].r)));
            }
        }
        Ok(())
    }

    pub fn kinks(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.is_kink)
    }

    /// Kinks plus r0: the minimal description of the function.
    pub fn breakpoints(&self) -> Vec<(Q, Q)> {
        self.nodes
            .iter()
            .filter(|n| n.is_kink || n.r == self.r0)
            .map(|n| (n.r, n.value))
            .collect()
    }

    /// (right end, slope) for each maximal linear piece, starting with
    /// the piece that begins at 0.
    pub fn segments(&self) -> Vec<(Q, Q)> {
        let mut out = Vec::new();
        for n in &self.nodes {
            if n.is_kink || n.r == self.r0 {
                out.push((n.r, n.left_slope));
            }
        }
        out
    }

    pub fn value_at(&self, r: &Q) -> Result<Q> {
        if *r <= Q::from_integer(0) || *r > self.r0 {
            return Err(Error::invalid(format!("radius {r} outside the profile domain")));
        }
        let i = self.nodes.partition_point(|n| n.r < *r);
        let n = &self.nodes[i];
        Ok(n.value - n.left_slope * (n.r - r))
    }

    /// The left derivative at r.
    pub fn left_slope_at(&self, r: &Q) -> Result<Q> {
        self.value_at(r)?;
        let i = self.nodes.partition_point(|n| n.r < *r);
        Ok(self.nodes[i].left_slope)
    }

    /// The right derivative at r (at r0, the right slope read off the
    /// last sample).
    pub fn right_slope_at(&self, r: &Q) -> Result<Q> {
        self.value_at(r)?;
        let i = self.nodes.partition_point(|n| n.r <= *r);
        Ok(if i == self.nodes.len() { self.nodes[i - 1].right_slope } else { self.nodes[i].left_slope })
    }

    pub fn scale(&self, c: &Q) -> PlProfile {
        PlProfile {
            r0: self.r0,
            nodes: self
                .nodes
                .iter()
                .map(|n| Node {
                    r: n.r,
                    value: n.value * c,
                    left_slope: n.left_slope * c,
                    right_slope: n.right_slope * c,
                    is_kink: n.is_kink && *c != Q::from_integer(0),
                })
                .collect(),
        }
    }

    /// Σ c_i·f_i over profiles on a common domain.
    pub fn linear_combination(terms: &[(Q, &PlProfile)]) -> Result<PlProfile> {
        let Some((_, first)) = terms.first() else {
            return Err(Error::invalid("empty combination"));
        };
        let r0 = first.r0;
        if terms.iter().any(|(_, f)| f.r0 != r0) {
            return Err(Error::DomainMismatch);
        }
        let mut radii: Vec<Q> = terms.iter().flat_map(|(_, f)| f.nodes.iter().map(|n| n.r)).collect();
        radii.sort();
        radii.dedup();
        let mut points = Vec::with_capacity(radii.len());
        for r in &radii {
            let mut v = Q::from_integer(0);
            for (c, f) in terms {
                v += *c * f.value_at(r)?;
            }
            points.push((*r, v));
        }
        let mut first_slope = Q::from_integer(0);
        let mut last_slope = Q::from_integer(0);
        for (c, f) in terms {
            first_slope += *c * f.nodes[0].left_slope;
            last_slope += *c * f.nodes.last().unwrap().right_slope;
        }
        PlProfile::from_points(r0, points, first_slope, last_slope)
    }

    pub fn add(&self, o: &PlProfile) -> Result<PlProfile> {
        let one = Q::from_integer(1);
        PlProfile::linear_combination(&[(one, self), (one, o)])
    }

    /// g(r) = f(offset + r/deg) on (0, r0_new].
    pub fn reparam(&self, offset: &Q, deg: &Q, r0_new: &Q) -> Result<PlProfile> {
        let zero = Q::from_integer(0);
        let rho = |r: &Q| *offset + *r / *deg;
        if *offset < zero || *deg <= zero || rho(r0_new) > self.r0 {
            return Err(Error::DomainMismatch);
        }
        let back = |x: &Q| (*x - *offset) * *deg;
        let end = rho(r0_new);
        let mut points: Vec<(Q, Q)> =
            self.nodes.iter().filter(|n| n.r > *offset && n.r < end).map(|n| (back(&n.r), n.value)).collect();
        points.push((*r0_new, self.value_at(&end)?));
        let first = if *offset == zero { self.nodes[0].left_slope } else { self.right_slope_at(offset)? };
        let last = self.right_slope_at(&end)?;
        PlProfile::from_points(*r0_new, points, first / *deg, last / *deg)
    }

    pub fn csv_rows(&self) -> Vec<CsvRow> {
        self.nodes
            .iter()
            .map(|n| CsvRow {
                r: fmt_q(&n.r),
                delta: fmt_q(&n.value),
                left_slope: fmt_q(&n.left_slope),
                right_slope: fmt_q(&n.right_slope),
                is_kink: n.is_kink,
            })
            .collect()
    }
}

/// λ_{m}: the largest r with left slope < m, or 0.
pub fn lambda_by_scan(profile: &PlProfile, m: i64) -> Q {
    lambda_by_scan_q(profile, &Q::from_integer(m))
}

/// `lambda_by_scan` for a rational target slope.
pub fn lambda_by_scan_q(profile: &PlProfile, m: &Q) -> Q {
    let m = *m;
    profile
        .segments()
        .iter()
        .filter(|(_, s)| *s < m)
        .map(|(end, _)| *end)
        .max()
        .unwrap_or(Q::from_integer(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{q, qi};

    fn worked_shape() -> PlProfile {
        PlProfile::from_points(qi(1), vec![(q(1, 8), qi(0)), (q(1, 4), qi(0)), (q(1, 2), q(1, 2)), (qi(1), q(3, 2))], qi(0), qi(0))
            .unwrap()
    }

    #[test]
    fn kinks_and_segments() {
        let p = worked_shape();
        let k: Vec<Q> = p.kinks().map(|n| n.r).collect();
        assert_eq!(k, vec![q(1, 4)]);
        assert_eq!(p.segments(), vec![(q(1, 4), qi(0)), (qi(1), qi(2))]);
        assert_eq!(p.value_at(&q(3, 4)).unwrap(), qi(1));
        assert_eq!(p.value_at(&q(1, 16)).unwrap(), qi(0));
        assert_eq!(p.left_slope_at(&q(1, 4)).unwrap(), qi(0));
        assert_eq!(p.right_slope_at(&q(1, 4)).unwrap(), qi(2));
    }

    #[test]
    fn scan() {
        let p = worked_shape();
        assert_eq!(lambda_by_scan(&p, 2), q(1, 4));
        let c = PlProfile::constant(qi(1), q(3, 2));
        assert_eq!(lambda_by_scan(&c, 1), qi(1));
        assert_eq!(lambda_by_scan(&c, 0), qi(0));
    }

    #[test]
    fn combination() {
        let p = worked_shape();
        let s = p.add(&PlProfile::constant(qi(1), q(1, 3))).unwrap();
        assert_eq!(s.value_at(&q(1, 2)).unwrap(), q(5, 6));
        assert!(p.add(&PlProfile::constant(qi(2), qi(0))).is_err());
        assert!(PlProfile::from_points(qi(1), vec![(q(1, 2), qi(1)), (qi(1), qi(0))], qi(0), qi(0)).is_ok());
    }

    #[test]
    fn reparam_scales_slopes() {
        let p = worked_shape();
        let g = p.reparam(&qi(0), &qi(3), &qi(3)).unwrap();
        assert_eq!(g.kinks().map(|n| n.r).collect::<Vec<_>>(), vec![q(3, 4)]);
        assert_eq!(g.left_slope_at(&qi(2)).unwrap(), q(2, 3));
        let h = p.reparam(&q(1, 2), &qi(1), &q(1, 2)).unwrap();
        assert_eq!(h.value_at(&q(1, 4)).unwrap(), qi(1));
        assert_eq!(h.nodes[0].left_slope, qi(2));
        assert!(p.reparam(&qi(0), &qi(1), &qi(2)).is_err());
    }
}
