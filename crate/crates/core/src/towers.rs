//! Differents and Swan conductors through towers of Z/p and Z/ℓ steps.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::profile::{closed_disk_at, PlProfile};
use crate::rat::Q;
use crate::swan::{CoverSpec, Settings};

/// δ^Berk as a function of r.
pub type BerkProfile = PlProfile;

fn qp(p: u32) -> Q {
    Q::from_integer(p as i64)
}

/// δ^Berk = (p−1)/p · δ_χ for a Z/p step.
pub fn berk_from_depth(depth: &PlProfile, p: u32) -> BerkProfile {
    depth.scale(&(Q::new(p as i64 - 1, p as i64)))
}

/// Pointwise sum of the step differents.
pub fn compose_differents(steps: &[BerkProfile]) -> Result<BerkProfile> {
    let one = Q::from_integer(1);
    let terms: Vec<(Q, &PlProfile)> = steps.iter().map(|s| (one, s)).collect();
    PlProfile::linear_combination(&terms)
}

/// δ_χ = δ^Berk_{Z/X} + p/(p−1)·δ^Berk_{Y/Z} for a faithful character of a
/// cyclic p-power tower, Z = Y/(order p subgroup).
pub fn cyclic_depth_from_berk(berk_zx: &BerkProfile, berk_yz: &BerkProfile, p: u32) -> Result<PlProfile> {
    let one = Q::from_integer(1);
    PlProfile::linear_combination(&[(one, berk_zx), (qp(p) / (qp(p) - one), berk_yz)])
}

/// δ_χ = Σ c_i·δ^Berk_i with c_1 = … = c_{n−1} = p^m and c_n = p^{m+1}/(p−1).
pub fn lin_combo_depth(steps: &[BerkProfile], p: u32, m: u32, n: usize) -> Result<PlProfile> {
    if n == 0 || steps.len() != n {
        return Err(Error::SeriesMismatch(format!("{} step profiles for a series of length {n}", steps.len())));
    }
    let pm = qp(p).pow(m as i32);
    let coeffs: Vec<Q> = (1..=n).map(|i| if i < n { pm } else { pm * qp(p) / (qp(p) - Q::from_integer(1)) }).collect();
    let terms: Vec<(Q, &PlProfile)> = coeffs.into_iter().zip(steps.iter()).collect();
    PlProfile::linear_combination(&terms)
}

/// m_diff(r) = Σ_i (p−1)(|B_i[r]| − 1)/p^i
pub fn m_diff(counts: &[usize], p: u32) -> Q {
    counts
        .iter()
        .enumerate()
        .map(|(i, &b)| Q::from_integer((p as i64 - 1) * (b as i64 - 1)) / qp(p).pow(i as i32 + 1))
        .sum()
}

/// m_Swan(r) = p^m (Σ_{i<n} (p−1)(|B_i[r]| − 1)/p^i + (|B_n[r]| − 1)/p^{n−1})
pub fn m_swan(counts: &[usize], p: u32, m: u32) -> Result<Q> {
    let n = counts.len();
    if n == 0 {
        return Err(Error::invalid("empty count vector"));
    }
    let head = m_diff(&counts[..n - 1], p);
    let last = Q::from_integer(counts[n - 1] as i64 - 1) / qp(p).pow(n as i32 - 1);
    Ok(qp(p).pow(m as i32) * (head + last))
}

/// For a cyclic tower with |B^s[r]| points of branching index p^{n−s+1}:
/// m_Swan = Σ_s |B^s[r]| − 1.
pub fn m_swan_cyclic(by_index: &[usize]) -> i64 {
    by_index.iter().sum::<usize>() as i64 - 1
}

/// |B_i[r]| = Σ_{j ≤ i} |B^j[r]|·p^{j−1}
pub fn level_counts_from_index(by_index: &[usize], p: u32) -> Vec<usize> {
    let mut out = Vec::with_capacity(by_index.len());
    let mut acc = 0usize;
    let mut pw = 1usize;
    for &b in by_index {
        acc += b * pw;
        pw *= p as usize;
        out.push(acc);
    }
    out
}

/// A Z/ℓ cover of a disk is a disk iff it has exactly one branch point.
pub fn tame_disk_predicate(branch_count: usize) -> bool {
    branch_count == 1
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TameInvariance {
    pub branch_count: usize,
    pub is_disk: bool,
}

/// The tame decision does not depend on the member or the radius; mixed
/// branch counts violate the running assumption.
pub fn tame_invariance(counts: &[usize]) -> Result<TameInvariance> {
    let Some(&c) = counts.first() else {
        return Err(Error::invalid("empty family"));
    };
    if counts.iter().any(|&x| x != c) {
        return Err(Error::AssumptionViolation(format!("branch counts differ across the family: {counts:?}")));
    }
    Ok(TameInvariance { branch_count: c, is_disk: tame_disk_predicate(c) })
}

/// Group data for the solvability check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupData {
    Cyclic(u64),
    /// a group of order p^n
    PGroup { n: u32 },
    /// 1 → N → G → Q → 1
    Extension { normal: Box<GroupData>, quotient: Box<GroupData> },
    SimpleNonabelian(String),
}

fn is_p_power(mut n: u64, p: u64) -> bool {
    while n > 1 && n % p == 0 {
        n /= p;
    }
    n == 1
}

impl GroupData {
    fn is_p_group(&self, p: u64) -> bool {
        match self {
            GroupData::Cyclic(n) => is_p_power(*n, p),
            GroupData::PGroup { .. } => true,
            GroupData::Extension { normal, quotient } => normal.is_p_group(p) && quotient.is_p_group(p),
            GroupData::SimpleNonabelian(_) => false,
        }
    }

    fn is_cyclic_prime_to_p(&self, p: u64) -> bool {
        matches!(self, GroupData::Cyclic(n) if n % p != 0)
    }
}

/// Whether G is an extension of a cyclic prime-to-p group by a p-group.
pub fn solvable_structure_check(g: &GroupData, p: u32) -> bool {
    let p = p as u64;
    match g {
        GroupData::Cyclic(_) | GroupData::PGroup { .. } => true,
        GroupData::Extension { normal, quotient } => {
            normal.is_p_group(p) && (quotient.is_cyclic_prime_to_p(p) || quotient.is_p_group(p))
        }
        GroupData::SimpleNonabelian(_) => false,
    }
}

/// 2/(p^{n−1}(p−1))·(δ_ȳ − δ_z̄) − 2δ_x̄ − |B ∩ U(x̄)|
pub fn eval_e1(delta_y: &Q, delta_z: &Q, delta_x: &Q, branch_near: usize, p: u32, n: u32) -> Result<Q> {
    if n < 2 {
        return Err(Error::invalid("the formula needs n >= 2"));
    }
    let c = Q::from_integer(2) / (qp(p).pow(n as i32 - 1) * (qp(p) - Q::from_integer(1)));
    Ok(c * (delta_y - delta_z) - Q::from_integer(2) * delta_x - Q::from_integer(branch_near as i64))
}

/// Per-level data of a Z/p step given without Kummer equations.
#[derive(Debug, Clone)]
pub struct AbstractStep {
    /// δ_χ of the step in the level coordinate ρ
    pub depth: PlProfile,
    /// valuations (in ρ) of the branch points of the step
    pub branch_valuations: Vec<Q>,
    /// branch points inside every disk (such as the centre)
    pub always_inside: usize,
}

impl AbstractStep {
    pub fn branch_count(&self, rho: &Q) -> usize {
        self.always_inside + self.branch_valuations.iter().filter(|v| *v >= rho).count()
    }
}

#[derive(Debug, Clone)]
pub enum StepData {
    Cover(Box<CoverSpec>),
    Abstract(AbstractStep),
    /// Z/ℓ step with its branch count in the disk
    Tame { ell: u32, branch_count: usize },
}

#[derive(Debug, Clone)]
pub struct TowerStep {
    pub data: StepData,
    /// ρ = offset + r/deg(levels below)
    pub offset: Q,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CharacterData {
    /// χ has order p^n on the p-part
    pub n: u32,
    /// induced from a subgroup of index p^m
    pub m: u32,
    pub subgroup_in_series: bool,
}

#[derive(Debug, Clone)]
pub struct TowerSpec {
    pub p: u32,
    pub steps: Vec<TowerStep>,
    pub character: Option<CharacterData>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LevelReport {
    pub level: usize,
    pub group: String,
    #[serde(with = "crate::rat::serde_q")]
    pub rho: Q,
    pub branch_count: usize,
    /// left slope of the step's depth in ρ (Z/p steps)
    #[serde(with = "crate::rat::serde_opt_q")]
    pub left_slope: Option<Q>,
    /// left slope of the step's δ^Berk in r
    #[serde(with = "crate::rat::serde_q")]
    pub berk_slope: Q,
    #[serde(with = "crate::rat::serde_q")]
    pub berk_target: Q,
    pub is_disk: bool,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TowerDiskReport {
    #[serde(with = "crate::rat::serde_q")]
    pub r: Q,
    pub levels: Vec<LevelReport>,
    #[serde(with = "crate::rat::serde_q")]
    pub berk_slope: Q,
    #[serde(with = "crate::rat::serde_q")]
    pub m_diff: Q,
    pub is_closed_disk: bool,
    pub criterion_used: Vec<String>,
    /// (left slope of δ_χ, m_Swan), when a character is given and the
    /// levels below the top are disks
    #[serde(skip_serializing_if = "Option::is_none")]
    pub swan_check: Option<SwanCheck>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SwanCheck {
    #[serde(with = "crate::rat::serde_q")]
    pub slope: Q,
    #[serde(with = "crate::rat::serde_q")]
    pub m_swan: Q,
    pub holds: bool,
}

/// Decide level by level whether the preimage of D[r] is a closed disk. A
/// level that is not a disk below the top stops the walk.
pub fn tower_disk_decision(tower: &TowerSpec, r: &Q, settings: &Settings) -> Result<TowerDiskReport> {
    let p = tower.p;
    if tower.steps.is_empty() {
        return Err(Error::invalid("empty tower"));
    }
    let mut deg_below = Q::from_integer(1);
    let mut levels = Vec::new();
    let mut criteria = Vec::new();
    let top = tower.steps.len();
    for (i, step) in tower.steps.iter().enumerate() {
        let rho = step.offset + r / deg_below;
        let rep = match &step.data {
            StepData::Tame { ell, branch_count } => {
                if *ell == p {
                    return Err(Error::invalid("tame step of order p"));
                }
                criteria.push(format!("level {}: tame single branch point", i + 1));
                deg_below *= Q::from_integer(*ell as i64);
                LevelReport {
                    level: i + 1,
                    group: format!("Z/{ell}"),
                    rho,
                    branch_count: *branch_count,
                    left_slope: None,
                    berk_slope: Q::from_integer(0),
                    berk_target: Q::from_integer(0),
                    is_disk: tame_disk_predicate(*branch_count),
                }
            }
            StepData::Cover(c) => {
                if c.p() != p {
                    return Err(Error::invalid("step cover over a different prime"));
                }
                let d = closed_disk_at(c, &rho, false, settings)?;
                criteria.push(format!("level {}: left slope of the cover", i + 1));
                let rep = z_p_level(i, rho, d.branch_count_in_disk, d.left_slope, &deg_below, p);
                deg_below *= qp(p);
                rep
            }
            StepData::Abstract(a) => {
                let n = a.branch_count(&rho);
                let left = a.depth.left_slope_at(&rho)?;
                if left > Q::from_integer(n as i64 - 1) {
                    return Err(Error::inconsistency(format!("level {} slope above |B| - 1", i + 1)));
                }
                criteria.push(format!("level {}: left slope of the given profile", i + 1));
                let rep = z_p_level(i, rho, n, left, &deg_below, p);
                deg_below *= qp(p);
                rep
            }
        };
        let ok = rep.is_disk;
        levels.push(rep);
        if !ok && i + 1 < top {
            return Err(Error::NotADiskBelow(i + 1));
        }
    }
    let berk_slope: Q = levels.iter().map(|l| l.berk_slope).sum();
    let m_diff_v: Q = levels.iter().map(|l| l.berk_target).sum();
    let is_closed = levels.iter().all(|l| l.is_disk);
    if is_closed != (berk_slope == m_diff_v) {
        return Err(Error::inconsistency("level decisions disagree with the m_diff criterion"));
    }
    criteria.push("m_diff".to_string());
    let swan_check = match tower.character {
        Some(ch) if ch.subgroup_in_series => {
            let pl: Vec<&LevelReport> = levels.iter().filter(|l| l.group == "Z/p").collect();
            let n = pl.len();
            if ch.n as usize != n {
                return Err(Error::SeriesMismatch(format!("character order p^{} on {} Z/p levels", ch.n, n)));
            }
            let pm = qp(p).pow(ch.m as i32);
            let slope: Q = pl
                .iter()
                .enumerate()
                .map(|(j, l)| l.berk_slope * if j + 1 < n { pm } else { pm * qp(p) / (qp(p) - Q::from_integer(1)) })
                .sum();
            let counts: Vec<usize> = pl.iter().map(|l| l.branch_count).collect();
            let ms = m_swan(&counts, p, ch.m)?;
            criteria.push("m_swan".to_string());
            Some(SwanCheck { slope, m_swan: ms, holds: slope == ms })
        }
        _ => None,
    };
    Ok(TowerDiskReport {
        r: *r,
        levels,
        berk_slope,
        m_diff: m_diff_v,
        is_closed_disk: is_closed,
        criterion_used: criteria,
        swan_check,
    })
}

fn z_p_level(i: usize, rho: Q, n: usize, left: Q, deg_below: &Q, p: u32) -> LevelReport {
    let scale = (qp(p) - Q::from_integer(1)) / (qp(p) * deg_below);
    let target = Q::from_integer(n as i64 - 1);
    LevelReport {
        level: i + 1,
        group: "Z/p".to_string(),
        rho,
        branch_count: n,
        left_slope: Some(left),
        berk_slope: left * scale,
        berk_target: target * scale,
        is_disk: left == target,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::rat::{q, qi};

    fn worked_depth() -> PlProfile {
        PlProfile::from_points(qi(1), vec![(q(1, 4), qi(0)), (qi(1), q(3, 2))], qi(0), qi(0)).unwrap()
    }

    #[test]
    fn berk_scaling() {
        let c = berk_from_depth(&PlProfile::constant(qi(1), q(3, 2)), 3);
        assert_eq!(c.value_at(&q(1, 2)).unwrap(), qi(1));
        let w = berk_from_depth(&worked_depth(), 3);
        assert_eq!(w.value_at(&q(1, 2)).unwrap(), q(1, 3));
        assert_eq!(w.left_slope_at(&q(1, 2)).unwrap(), q(4, 3));
    }

    #[test]
    fn composition_laws() {
        let a = PlProfile::constant(qi(1), q(1, 2));
        let b = PlProfile::constant(qi(1), q(1, 3));
        assert_eq!(compose_differents(&[a.clone(), b.clone()]).unwrap().value_at(&qi(1)).unwrap(), q(5, 6));
        let cy = cyclic_depth_from_berk(&a, &b, 3).unwrap();
        assert_eq!(cy.value_at(&q(1, 3)).unwrap(), qi(1));
        let lc = lin_combo_depth(&[a.clone(), b.clone()], 3, 0, 2).unwrap();
        assert_eq!(lc, cy);
        assert!(matches!(lin_combo_depth(&[a], 3, 0, 2), Err(Error::SeriesMismatch(_))));
    }

    #[test]
    fn targets() {
        assert_eq!(m_diff(&[3], 3), q(4, 3));
        assert_eq!(m_diff(&[1], 3), qi(0));
        assert_eq!(m_diff(&[1, 3], 3), q(4, 9));
        assert_eq!(m_swan_cyclic(&[2, 1]), 2);
        assert_eq!(m_swan(&[5], 3, 0).unwrap(), qi(4));
        let counts = level_counts_from_index(&[1, 0], 3);
        assert_eq!(counts, vec![1, 1]);
        assert_eq!(m_swan(&counts, 3, 0).unwrap(), qi(0));
        let counts = level_counts_from_index(&[2, 1], 3);
        assert_eq!(m_swan(&counts, 3, 0).unwrap(), qi(m_swan_cyclic(&[2, 1])));
    }

    #[test]
    fn tame_and_groups() {
        assert!(tame_disk_predicate(1));
        assert!(!tame_disk_predicate(2));
        assert!(matches!(tame_invariance(&[1, 2]), Err(Error::AssumptionViolation(_))));
        assert!(solvable_structure_check(&GroupData::Cyclic(27), 3));
        assert!(solvable_structure_check(&GroupData::Cyclic(5), 3));
        assert!(!solvable_structure_check(&GroupData::SimpleNonabelian("A5".into()), 3));
        let ext = GroupData::Extension { normal: Box::new(GroupData::PGroup { n: 2 }), quotient: Box::new(GroupData::Cyclic(2)) };
        assert!(solvable_structure_check(&ext, 3));
    }

    #[test]
    fn e1_values() {
        assert_eq!(eval_e1(&qi(0), &qi(0), &qi(0), 1, 3, 2).unwrap(), qi(-1));
        assert_eq!(eval_e1(&qi(2), &qi(2), &qi(0), 0, 3, 2).unwrap(), qi(0));
        assert_eq!(eval_e1(&qi(3), &qi(0), &qi(0), 2, 3, 2).unwrap(), qi(-1));
    }

    #[test]
    fn tower_decisions() {
        let k = Field::qp(3).unwrap();
        let c = CoverSpec::from_ints(&k, 0, &[(3, 1), (24, 1)], qi(1)).unwrap();
        let s = Settings::default();
        let single = TowerSpec {
            p: 3,
            steps: vec![TowerStep { data: StepData::Cover(Box::new(c.clone())), offset: qi(0) }],
            character: None,
        };
        let rep = tower_disk_decision(&single, &q(1, 2), &s).unwrap();
        assert!(rep.is_closed_disk);
        assert_eq!(rep.m_diff, q(4, 3));
        let tame = TowerSpec {
            p: 3,
            steps: vec![
                TowerStep { data: StepData::Tame { ell: 2, branch_count: 2 }, offset: qi(0) },
                TowerStep { data: StepData::Cover(Box::new(c.clone())), offset: qi(0) },
            ],
            character: None,
        };
        assert_eq!(tower_disk_decision(&tame, &q(1, 2), &s).unwrap_err(), Error::NotADiskBelow(1));
        // level 2 in ρ = r/3 with three branch points and slope 2 near ρ = 1/6
        let upper = AbstractStep {
            depth: PlProfile::from_points(qi(1), vec![(q(1, 12), qi(0)), (qi(1), q(11, 6))], qi(0), qi(0)).unwrap(),
            branch_valuations: vec![qi(1), qi(1)],
            always_inside: 1,
        };
        let two = TowerSpec {
            p: 3,
            steps: vec![
                TowerStep { data: StepData::Cover(Box::new(c)), offset: qi(0) },
                TowerStep { data: StepData::Abstract(upper), offset: qi(0) },
            ],
            character: Some(CharacterData { n: 2, m: 0, subgroup_in_series: true }),
        };
        let rep = tower_disk_decision(&two, &q(1, 2), &s).unwrap();
        assert!(rep.is_closed_disk);
        assert_eq!(rep.m_diff, q(4, 3) + q(4, 9));
        assert_eq!(rep.berk_slope, rep.m_diff);
        assert!(rep.swan_check.unwrap().holds);
    }
}
