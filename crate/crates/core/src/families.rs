//! Finite families of covers: per-member λ, the minimizer certificate and
//! the kink theorem at grid scale.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::profile::{build_profile, closed_disk_at, lambda_by_scan, lambda_by_scan_q, PlProfile};
use crate::rat::Q;
use crate::swan::{lambda_closed_form, CoverSpec, Settings};
use crate::towers::{berk_from_depth, compose_differents, lin_combo_depth, m_diff, m_swan, tower_disk_decision, StepData, TowerSpec};

#[derive(Debug, Clone)]
pub enum MemberData {
    Cover(Box<CoverSpec>),
    Tower(Box<TowerSpec>),
}

#[derive(Debug, Clone)]
pub struct Member {
    pub id: String,
    pub data: MemberData,
}

#[derive(Debug, Clone)]
pub struct FamilySpec {
    pub members: Vec<Member>,
    pub r0: Q,
    /// connectedness radius; derived from the branch locus when absent
    pub s1: Option<Q>,
}

impl FamilySpec {
    /// Checks the common branch count and r0 = min(s1, s2).
    pub fn new(members: Vec<Member>, r0: Q, s1: Option<Q>) -> Result<FamilySpec> {
        if members.is_empty() {
            return Err(Error::invalid("empty family"));
        }
        let mut ids: Vec<&str> = members.iter().map(|m| m.id.as_str()).collect();
        ids.sort();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("duplicate member id"));
        }
        let mut s2: Option<Q> = None;
        let mut counts = Vec::new();
        for m in &members {
            match &m.data {
                MemberData::Cover(c) => {
                    if c.r0 != r0 {
                        return Err(Error::invalid(format!("member {} has r0 = {}, family has {r0}", m.id, c.r0)));
                    }
                    for b in &c.branch {
                        let v = b.x.v()?;
                        s2 = Some(s2.map_or(v, |s: Q| s.min(v)));
                    }
                    counts.push(vec![c.branch_count(&r0)]);
                }
                MemberData::Tower(t) => counts.push(tower_counts(t, &r0)?),
            }
        }
        if counts.iter().any(|c| *c != counts[0]) {
            return Err(Error::AssumptionViolation(format!("branch counts differ across members: {counts:?}")));
        }
        let want = match (s1, s2) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        match want {
            Some(w) if w != r0 => {
                return Err(Error::AssumptionViolation(format!("r0 = {r0} but min(s1, s2) = {w}")));
            }
            None if members.iter().any(|m| matches!(m.data, MemberData::Cover(_))) => {
                return Err(Error::invalid("no branch points: s1 must be supplied"));
            }
            _ => {}
        }
        Ok(FamilySpec { members, r0, s1 })
    }
}

fn tower_counts(t: &TowerSpec, r: &Q) -> Result<Vec<usize>> {
    let mut deg = Q::from_integer(1);
    let mut out = Vec::new();
    for s in &t.steps {
        let rho = s.offset + r / deg;
        match &s.data {
            StepData::Cover(c) => {
                out.push(c.branch_count(&rho));
                deg *= Q::from_integer(t.p as i64);
            }
            StepData::Abstract(a) => {
                out.push(a.branch_count(&rho));
                deg *= Q::from_integer(t.p as i64);
            }
            StepData::Tame { ell, branch_count } => {
                out.push(*branch_count);
                deg *= Q::from_integer(*ell as i64);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MemberLambda {
    #[serde(with = "crate::rat::serde_q")]
    pub lambda: Q,
    #[serde(with = "crate::rat::serde_opt_q")]
    pub closed_form: Option<Q>,
    #[serde(with = "crate::rat::serde_opt_q")]
    pub scan: Option<Q>,
    /// the closed form was unavailable and the scan value is used
    pub scan_fallback: bool,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MinimizerCertificate {
    #[serde(with = "crate::rat::serde_q")]
    pub gamma: Q,
    pub argmin: Vec<String>,
    pub per_member: BTreeMap<String, MemberLambda>,
}

fn certificate(order: &[String], per: BTreeMap<String, MemberLambda>) -> Result<MinimizerCertificate> {
    let gamma = per.values().map(|m| m.lambda).min().ok_or_else(|| Error::invalid("empty family"))?;
    let argmin: Vec<String> = order.iter().filter(|id| per[*id].lambda == gamma).cloned().collect();
    Ok(MinimizerCertificate { gamma, argmin, per_member: per })
}

fn cover_lambda(c: &CoverSpec, settings: &Settings) -> Result<MemberLambda> {
    let mut notes = Vec::new();
    let closed = match lambda_closed_form(c) {
        Ok(rep) => Some(rep.lambda),
        Err(e) => {
            notes.push(format!("closed form: {e}"));
            None
        }
    };
    let scan = match build_profile(c, settings) {
        Ok(p) => Some(lambda_by_scan(&p, c.target_slope())),
        Err(e) => {
            notes.push(format!("scan: {e}"));
            None
        }
    };
    let lambda = match (closed, scan) {
        (Some(a), Some(b)) if a != b => {
            return Err(Error::inconsistency(format!("closed form {a} and scan {b} disagree")));
        }
        (Some(a), _) => a,
        (None, Some(b)) => b,
        (None, None) => return Err(Error::Inconclusive(notes.join("; "))),
    };
    Ok(MemberLambda { lambda, closed_form: closed, scan, scan_fallback: closed.is_none(), notes })
}

/// λ_{N−1, r0} for every member and the set where the minimum is attained.
pub fn family_lambda(family: &FamilySpec, settings: &Settings) -> Result<MinimizerCertificate> {
    let results: Vec<(String, Result<MemberLambda>)> = family
        .members
        .par_iter()
        .map(|m| {
            let r = match &m.data {
                MemberData::Cover(c) => cover_lambda(c, settings),
                MemberData::Tower(t) => tower_lambda(t, &family.r0, DiffSwan::Diff, settings),
            };
            (m.id.clone(), r)
        })
        .collect();
    let mut per = BTreeMap::new();
    for (id, r) in results {
        per.insert(id, r?);
    }
    let order: Vec<String> = family.members.iter().map(|m| m.id.clone()).collect();
    certificate(&order, per)
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct WitnessCheck {
    pub member: String,
    #[serde(with = "crate::rat::serde_q")]
    pub r: Q,
    #[serde(with = "crate::rat::serde_q")]
    pub lambda: Q,
    pub closed_disk: bool,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OpenDiskCertificate {
    pub member: String,
    /// the preimage of D(γ) is an open disk
    #[serde(with = "crate::rat::serde_q")]
    pub gamma: Q,
    #[serde(with = "crate::rat::serde_vec_q")]
    pub grid: Vec<Q>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct KinkVerdict {
    pub certificate: MinimizerCertificate,
    pub witnesses: Vec<WitnessCheck>,
    pub open_disks: Vec<OpenDiskCertificate>,
}

fn member_is_closed_disk(m: &Member, r: &Q, settings: &Settings) -> Result<bool> {
    match &m.data {
        MemberData::Cover(c) => Ok(closed_disk_at(c, r, false, settings)?.is_closed_disk),
        MemberData::Tower(t) => match tower_disk_decision(t, r, settings) {
            Ok(rep) => Ok(rep.is_closed_disk),
            Err(Error::NotADiskBelow(_)) => Ok(false),
            Err(e) => Err(e),
        },
    }
}

/// Points of the verification grid γ + (r0 − γ)/2^k in (γ, r0].
pub fn verification_grid(gamma: &Q, r0: &Q, levels: u32) -> Vec<Q> {
    (0..levels).map(|k| *gamma + (*r0 - *gamma) / Q::from_integer(1i64 << k)).collect()
}

/// Checks every witness (closed disk at r_i and λ < r_i) and certifies an
/// open-disk preimage of D(γ) for every minimizing member.
pub fn kink_theorem_check(family: &FamilySpec, witnesses: &[(Q, String)], settings: &Settings) -> Result<KinkVerdict> {
    let cert = family_lambda(family, settings)?;
    let find = |id: &str| {
        family.members.iter().find(|m| m.id == id).ok_or_else(|| Error::invalid(format!("unknown member {id}")))
    };
    let mut checks = Vec::new();
    for (r, id) in witnesses {
        let m = find(id)?;
        if *r <= Q::from_integer(0) || *r > family.r0 {
            return Err(Error::WitnessInvalid { member: id.clone(), r: *r });
        }
        if !member_is_closed_disk(m, r, settings)? {
            return Err(Error::WitnessInvalid { member: id.clone(), r: *r });
        }
        let lambda = cert.per_member[id].lambda;
        if lambda >= *r {
            return Err(Error::TheoremViolated { member: id.clone(), r: *r, lambda });
        }
        checks.push(WitnessCheck { member: id.clone(), r: *r, lambda, closed_disk: true });
    }
    let mut open_disks = Vec::new();
    if !witnesses.is_empty() {
        let grid = verification_grid(&cert.gamma, &family.r0, 6);
        for id in &cert.argmin {
            let m = find(id)?;
            for r in &grid {
                if !member_is_closed_disk(m, r, settings)? {
                    return Err(Error::TheoremViolated { member: id.clone(), r: *r, lambda: cert.gamma });
                }
            }
            open_disks.push(OpenDiskCertificate { member: id.clone(), gamma: cert.gamma, grid: grid.clone() });
        }
    }
    Ok(KinkVerdict { certificate: cert, witnesses: checks, open_disks })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffSwan {
    Diff,
    Swan,
}

/// The level profiles of a p-group tower in the base coordinate r.
fn level_berk_profiles(t: &TowerSpec, r0: &Q, settings: &Settings) -> Result<Vec<PlProfile>> {
    let mut deg = Q::from_integer(1);
    let mut out = Vec::new();
    for s in &t.steps {
        let depth = match &s.data {
            StepData::Cover(c) => build_profile(c, settings)?,
            StepData::Abstract(a) => a.depth.clone(),
            StepData::Tame { .. } => return Err(Error::invalid("differents of tame steps are not tracked")),
        };
        out.push(berk_from_depth(&depth.reparam(&s.offset, &deg, r0)?, t.p));
        deg *= Q::from_integer(t.p as i64);
    }
    Ok(out)
}

fn tower_lambda(t: &TowerSpec, r0: &Q, mode: DiffSwan, settings: &Settings) -> Result<MemberLambda> {
    let levels = level_berk_profiles(t, r0, settings)?;
    let counts = tower_counts(t, r0)?;
    let (profile, target) = match mode {
        DiffSwan::Diff => (compose_differents(&levels)?, m_diff(&counts, t.p)),
        DiffSwan::Swan => {
            let ch = t.character.ok_or_else(|| Error::invalid("swan mode needs a character"))?;
            if !ch.subgroup_in_series {
                return Err(Error::AssumptionViolation("the series must pass through H".into()));
            }
            match tower_disk_decision(t, r0, settings) {
                Err(Error::NotADiskBelow(i)) => {
                    return Err(Error::AssumptionViolation(format!("quotient level {i} is not a disk at r0")))
                }
                Err(e) => return Err(e),
                Ok(_) => {}
            }
            (lin_combo_depth(&levels, t.p, ch.m, levels.len())?, m_swan(&counts, t.p, ch.m)?)
        }
    };
    let lambda = lambda_by_scan_q(&profile, &target);
    // residual pure inseparability above λ, with positive depth as proxy
    for l in &levels {
        if let Some(n) = l.nodes.iter().find(|n| n.r > lambda && n.value <= Q::from_integer(0)) {
            return Err(Error::InseparabilityUnverified(n.r));
        }
    }
    Ok(MemberLambda { lambda, closed_form: None, scan: Some(lambda), scan_fallback: true, notes: vec![] })
}

/// λ_diff or λ_Swan per tower member, and the minimizer certificate.
pub fn lambda_diff_swan(family: &FamilySpec, mode: DiffSwan, settings: &Settings) -> Result<MinimizerCertificate> {
    let results: Vec<(String, Result<MemberLambda>)> = family
        .members
        .par_iter()
        .map(|m| {
            let r = match &m.data {
                MemberData::Tower(t) => tower_lambda(t, &family.r0, mode, settings),
                MemberData::Cover(c) => {
                    let t = TowerSpec {
                        p: c.p(),
                        steps: vec![crate::towers::TowerStep { data: StepData::Cover(c.clone()), offset: Q::from_integer(0) }],
                        character: Some(crate::towers::CharacterData { n: 1, m: 0, subgroup_in_series: true }),
                    };
                    tower_lambda(&t, &family.r0, mode, settings)
                }
            };
            (m.id.clone(), r)
        })
        .collect();
    let mut per = BTreeMap::new();
    for (id, r) in results {
        per.insert(id, r?);
    }
    let order: Vec<String> = family.members.iter().map(|m| m.id.clone()).collect();
    certificate(&order, per)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::rat::{q, qi};

    fn member(id: &str, c: CoverSpec) -> Member {
        Member { id: id.into(), data: MemberData::Cover(Box::new(c)) }
    }

    fn worked_family() -> FamilySpec {
        let k = Field::qp(3).unwrap();
        let a = CoverSpec::from_ints(&k, 0, &[(3, 1), (24, 1)], qi(1)).unwrap();
        let b = CoverSpec::from_ints(&k, 0, &[(3, 1), (12, 1)], qi(1)).unwrap();
        FamilySpec::new(vec![member("a", a), member("b", b)], qi(1), None).unwrap()
    }

    #[test]
    fn worked_certificate() {
        let c = family_lambda(&worked_family(), &Settings::default()).unwrap();
        assert_eq!(c.gamma, q(1, 4));
        assert_eq!(c.argmin, vec!["a".to_string()]);
        assert_eq!(c.per_member["b"].lambda, qi(1));
        assert_eq!(c.per_member["a"].closed_form, c.per_member["a"].scan);
    }

    #[test]
    fn witnesses() {
        let f = worked_family();
        let s = Settings::default();
        let w: Vec<(Q, String)> = [q(1, 2), q(3, 8), q(5, 16)].into_iter().map(|r| (r, "a".to_string())).collect();
        let v = kink_theorem_check(&f, &w, &s).unwrap();
        assert_eq!(v.open_disks.len(), 1);
        assert_eq!(v.open_disks[0].gamma, q(1, 4));
        let bad = kink_theorem_check(&f, &[(q(1, 8), "a".to_string())], &s).unwrap_err();
        assert_eq!(bad, Error::WitnessInvalid { member: "a".into(), r: q(1, 8) });
        assert!(kink_theorem_check(&f, &[], &s).unwrap().open_disks.is_empty());
    }

    #[test]
    fn family_validation() {
        let k = Field::qp(3).unwrap();
        let a = CoverSpec::from_ints(&k, 0, &[(3, 1), (24, 1)], qi(1)).unwrap();
        let c = CoverSpec::from_ints(&k, 0, &[(3, 1), (24, 1), (6, 1), (15, 1)], qi(1)).unwrap();
        let e = FamilySpec::new(vec![member("a", a.clone()), member("c", c)], qi(1), None).unwrap_err();
        assert!(matches!(e, Error::AssumptionViolation(_)));
        let e = FamilySpec::new(vec![member("a", a.clone())], qi(1), Some(q(1, 2)));
        assert!(matches!(e, Err(Error::AssumptionViolation(_))));
        let one = FamilySpec::new(vec![member("a", a)], qi(1), None).unwrap();
        assert_eq!(family_lambda(&one, &Settings::default()).unwrap().argmin, vec!["a".to_string()]);
    }

    #[test]
    fn alpha0_family() {
        let k = Field::qp(3).unwrap();
        let a = CoverSpec::from_ints(&k, 1, &[(3, 1), (6, 1)], qi(1)).unwrap();
        let b = CoverSpec::from_ints(&k, 1, &[(3, 1), (15, 1)], qi(1)).unwrap();
        let f = FamilySpec::new(vec![member("a", a), member("b", b)], qi(1), None).unwrap();
        let c = family_lambda(&f, &Settings::default()).unwrap();
        assert_eq!(c.gamma, qi(1));
        assert_eq!(c.argmin.len(), 2);
    }

    #[test]
    fn diff_and_swan_modes() {
        let k = Field::qp(3).unwrap();
        let a = CoverSpec::from_ints(&k, 0, &[(3, 1), (24, 1)], qi(1)).unwrap();
        let f = FamilySpec::new(vec![member("a", a)], qi(1), None).unwrap();
        let s = Settings::default();
        let d = lambda_diff_swan(&f, DiffSwan::Diff, &s).unwrap();
        let w = lambda_diff_swan(&f, DiffSwan::Swan, &s).unwrap();
        assert_eq!(d.gamma, q(1, 4));
        assert_eq!(w.gamma, q(1, 4));
    }
}
