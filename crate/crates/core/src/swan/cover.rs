use num_traits::Zero;

use crate::error::{Error, Result};
use crate::field::{Elem, FieldRef};
use crate::rat::{wild_bound, Q};
use crate::series::{Direction, LaurentSeries};

#[derive(Debug, Clone)]
pub struct BranchPoint {
    pub x: Elem,
    pub alpha: u32,
}

/// A Z/p cover of the disk given by F = U·F̃ with
/// F̃ = T^{α0}·∏(1 − x_i T^{-1})^{α_i}.
#[derive(Debug, Clone)]
pub struct CoverSpec {
    pub alpha0: u32,
    pub branch: Vec<BranchPoint>,
    /// unit part in T with constant term 1
    pub unit_u: LaurentSeries,
    pub genus: u32,
    /// bound d on branch points outside the disk
    pub outside_bound: u32,
    pub r0: Q,
}

impl CoverSpec {
    pub fn new(
        alpha0: u32,
        branch: Vec<BranchPoint>,
        unit_u: LaurentSeries,
        genus: u32,
        outside_bound: u32,
        r0: Q,
    ) -> Result<CoverSpec> {
        let c = CoverSpec { alpha0, branch, unit_u, genus, outside_bound, r0 };
        c.validate()?;
        Ok(c)
    }

    /// U = 1, g_X = 0, d = 0, integer branch points.
    pub fn from_ints(k: &FieldRef, alpha0: u32, branch: &[(i64, u32)], r0: Q) -> Result<CoverSpec> {
        let branch = branch
            .iter()
            .map(|&(x, alpha)| BranchPoint { x: Elem::from_i64(k, x), alpha })
            .collect();
        CoverSpec::new(alpha0, branch, LaurentSeries::one(k), 0, 0, r0)
    }

    pub fn field(&self) -> &FieldRef {
        self.unit_u.field()
    }

    pub fn p(&self) -> u32 {
        self.field().p()
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.p();
        if self.alpha0 >= p {
            return Err(Error::invalid(format!("alpha0 = {} not in 0..p", self.alpha0)));
        }
        if self.r0 <= Q::zero() {
            return Err(Error::invalid("r0 must be positive"));
        }
        for (i, b) in self.branch.iter().enumerate() {
            if b.x.field() != self.field() {
                return Err(Error::invalid("branch point from another field"));
            }
            if b.alpha == 0 || b.alpha >= p {
                return Err(Error::invalid(format!("alpha = {} not in 1..p", b.alpha)));
            }
            let v = b.x.v().map_err(|_| Error::invalid("branch point must be nonzero"))?;
            if v <= Q::zero() {
                return Err(Error::invalid("branch points must have positive valuation"));
            }
            if v < self.r0 {
                return Err(Error::AssumptionViolation(format!(
                    "branch point {} has valuation {v} below r0 = {}",
                    i, self.r0
                )));
            }
            for o in &self.branch[..i] {
                if o.x.close_to(&b.x) {
                    return Err(Error::invalid("branch points must be distinct"));
                }
            }
        }
        if self.unit_u.terms().any(|(d, _)| d < 0) {
            return Err(Error::invalid("U must be a series in T"));
        }
        if let Some(t) = self.unit_u.tail() {
            if t.dir != Direction::Pos {
                return Err(Error::invalid("the tail of U must point to +inf"));
            }
        }
        if !self.unit_u.coeff(0).sub(&Elem::one(self.field())).is_negligible() {
            return Err(Error::invalid("U must have constant term 1"));
        }
        for (d, b) in self.unit_u.terms() {
            if d > 0 && b.v()? < Q::zero() {
                return Err(Error::invalid("U must have integral coefficients"));
            }
        }
        Ok(())
    }

    pub fn check_radius(&self, r: &Q) -> Result<()> {
        if *r <= Q::zero() || *r > self.r0 {
            return Err(Error::invalid(format!("radius {r} outside (0, r0 = {}]", self.r0)));
        }
        Ok(())
    }

    /// Order of F at T = 0.
    pub fn order_at_zero(&self) -> i64 {
        self.alpha0 as i64 - self.branch.iter().map(|b| b.alpha as i64).sum::<i64>()
    }

    /// |B[r]|: branch points in D[r], with T = 0 counted when F has
    /// prime-to-p order there.
    pub fn branch_count(&self, r: &Q) -> usize {
        let inside = self.branch.iter().filter(|b| b.x.v().map_or(false, |v| v >= *r)).count();
        inside + usize::from(self.order_at_zero().rem_euclid(self.p() as i64) != 0)
    }

    /// F̃ = T^{α0}·∏(1 − x_i T^{-1})^{α_i}
    pub fn f_tilde(&self) -> LaurentSeries {
        let k = self.field();
        let mut f = LaurentSeries::monomial(Elem::one(k), self.alpha0 as i64);
        for b in &self.branch {
            let lin = LaurentSeries::from_terms(k, [(0, Elem::one(k)), (-1, b.x.neg())]);
            for _ in 0..b.alpha {
                f = f.mul(&lin).expect("finite series");
            }
        }
        f
    }

    /// F = U·F̃
    pub fn kummer_series(&self) -> Result<LaurentSeries> {
        self.unit_u.mul(&self.f_tilde())
    }

    /// Truncation length on the U side: s_U > 2p·g_X/(p−1) + d − 1, at
    /// least the stored degree of U.
    pub fn s_u(&self) -> i64 {
        let p = self.p() as i64;
        let bound = Q::new(2 * p * self.genus as i64, p - 1) + Q::from_integer(self.outside_bound as i64 - 1);
        let s = bound.floor().to_integer() + 1;
        s.max(self.unit_u.max_degree().unwrap_or(0)).max(1)
    }

    /// m = |B[r0]| − 1
    pub fn target_slope(&self) -> i64 {
        self.branch_count(&self.r0) as i64 - 1
    }

    pub fn extend(&self, e_mult: u32, f_mult: u32) -> Result<CoverSpec> {
        let (_, emb) = self.field().extend(e_mult, f_mult)?;
        Ok(CoverSpec {
            alpha0: self.alpha0,
            branch: self.branch.iter().map(|b| BranchPoint { x: emb.apply(&b.x), alpha: b.alpha }).collect(),
            unit_u: self.unit_u.map_field(&emb),
            genus: self.genus,
            outside_bound: self.outside_bound,
            r0: self.r0,
        })
    }

    /// p/(p−1)
    pub fn wild(&self) -> Q {
        wild_bound(self.p())
    }

    pub fn is_trivial_unit(&self) -> bool {
        self.unit_u.terms().all(|(d, c)| d == 0 && c.eq_to_precision(&Elem::one(self.field())))
            && self.unit_u.tail().is_none()
    }
}
