//! JSON forms of field elements, series, covers, towers and families.
//!
//! Rationals are always `"num/den"` strings on output; on input plain
//! integers are accepted too.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{FamilySpec, Member, MemberData};
use crate::field::{Elem, Field, FieldConfig, FieldRef, DEFAULT_PRECISION};
use crate::profile::PlProfile;
use crate::rat::{fmt_q, parse_q, Q};
use crate::series::{Direction, LaurentSeries, Tail};
use crate::swan::{BranchPoint, CoverSpec};
use crate::towers::{AbstractStep, CharacterData, StepData, TowerSpec, TowerStep};

/// An integer or rational given as a JSON number or string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumLit {
    Int(i64),
    Str(String),
}

impl NumLit {
    pub fn to_q(&self) -> Result<Q> {
        match self {
            NumLit::Int(n) => Ok(Q::from_integer(*n)),
            NumLit::Str(s) => parse_q(s),
        }
    }

    pub fn from_q(x: &Q) -> NumLit {
        NumLit::Str(fmt_q(x))
    }

    fn to_bigint(&self) -> Result<BigInt> {
        match self {
            NumLit::Int(n) => Ok(BigInt::from(*n)),
            NumLit::Str(s) => BigInt::from_str(s.trim()).map_err(|_| Error::invalid(format!("not an integer: {s:?}"))),
        }
    }
}

/// One π-adic digit: an integer, or its coordinates in Z_q.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DigitLit {
    Int(NumLit),
    Coords(Vec<NumLit>),
}

/// A field element: a decimal integer or rational, or π-adic digits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElemLit {
    Num(NumLit),
    #[serde(rename_all = "camelCase")]
    Digits { pi_shift: i64, digits: Vec<DigitLit> },
}

impl ElemLit {
    pub fn to_elem(&self, k: &FieldRef) -> Result<Elem> {
        match self {
            ElemLit::Num(NumLit::Int(n)) => Ok(Elem::from_i64(k, *n)),
            ElemLit::Num(NumLit::Str(s)) if !s.contains('/') => {
                let n = NumLit::Str(s.clone()).to_bigint()?;
                Ok(Elem::from_bigint(k, &n))
            }
            ElemLit::Num(n) => Elem::from_q(k, &n.to_q()?),
            ElemLit::Digits { pi_shift, digits } => {
                let coords = digits
                    .iter()
                    .map(|d| match d {
                        DigitLit::Int(n) => Ok(vec![n.to_bigint()?]),
                        DigitLit::Coords(cs) => cs.iter().map(|c| c.to_bigint()).collect(),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Elem::from_pi_coords(k, *pi_shift, &coords)
            }
        }
    }

    /// Digits with exact integers; zero prints as "0".
    pub fn from_elem(x: &Elem) -> ElemLit {
        let f = x.field().f();
        match x.pi_digits() {
            None => ElemLit::Num(NumLit::Str("0".into())),
            Some((j, ds)) => ElemLit::Digits {
                pi_shift: j,
                digits: ds
                    .iter()
                    .map(|d| {
                        if f == 1 {
                            DigitLit::Int(NumLit::Str(d[0].to_string()))
                        } else {
                            DigitLit::Coords(d.iter().map(|c| NumLit::Str(c.to_string())).collect())
                        }
                    })
                    .collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct FieldJson {
    pub p: u32,
    #[serde(default = "one")]
    pub f: u32,
    #[serde(default = "one")]
    pub e: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision_digits: Option<u32>,
}

fn one() -> u32 {
    1
}

impl FieldJson {
    /// `precision` overrides the stored value when given.
    pub fn build(&self, precision: Option<u32>) -> Result<FieldRef> {
        let n = precision.or(self.precision_digits).unwrap_or(DEFAULT_PRECISION);
        Field::new(FieldConfig::new(self.p, self.f, self.e, n))
    }

    pub fn from_field(k: &FieldRef) -> FieldJson {
        FieldJson { p: k.p(), f: k.f(), e: k.e(), precision_digits: Some(k.precision()) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TailJson {
    pub dir: Direction,
    pub from: i64,
    pub sigma: NumLit,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<NumLit>,
}

/// `{"coefficients": {"degree": literal}, "tail": ...}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SeriesJson {
    pub coefficients: BTreeMap<String, ElemLit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailJson>,
}

impl SeriesJson {
    pub fn to_series(&self, k: &FieldRef) -> Result<LaurentSeries> {
        let mut terms = Vec::new();
        for (d, c) in &self.coefficients {
            let d: i64 = d.trim().parse().map_err(|_| Error::invalid(format!("bad degree {d:?}")))?;
            terms.push((d, c.to_elem(k)?));
        }
        let s = LaurentSeries::from_terms(k, terms);
        match &self.tail {
            None => Ok(s),
            Some(t) => {
                let kappa = t.kappa.as_ref().map(|x| x.to_q()).transpose()?.unwrap_or(Q::from_integer(0));
                s.with_tail(Tail { dir: t.dir, from: t.from, sigma: t.sigma.to_q()?, kappa })
            }
        }
    }

    pub fn from_series(s: &LaurentSeries) -> SeriesJson {
        SeriesJson {
            coefficients: s.terms().map(|(d, c)| (d.to_string(), ElemLit::from_elem(c))).collect(),
            tail: s.tail().map(|t| TailJson {
                dir: t.dir,
                from: t.from,
                sigma: NumLit::from_q(&t.sigma),
                kappa: Some(NumLit::from_q(&t.kappa)),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchJson {
    pub x: ElemLit,
    #[serde(default = "one")]
    pub alpha: u32,
}

/// A cover without its field, as embedded in towers and families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CoverBody {
    #[serde(default)]
    pub alpha0: u32,
    #[serde(default)]
    pub branch: Vec<BranchJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit_u: Option<SeriesJson>,
    #[serde(default, rename = "genusGX")]
    pub genus_gx: u32,
    #[serde(default)]
    pub outside_branch_bound: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r0: Option<NumLit>,
}

impl CoverBody {
    pub fn to_cover(&self, k: &FieldRef, default_r0: Option<Q>) -> Result<CoverSpec> {
        let branch = self
            .branch
            .iter()
            .map(|b| Ok(BranchPoint { x: b.x.to_elem(k)?, alpha: b.alpha }))
            .collect::<Result<Vec<_>>>()?;
        let unit_u = match &self.unit_u {
            Some(s) => s.to_series(k)?,
            None => LaurentSeries::one(k),
        };
        let r0 = match (&self.r0, default_r0) {
            (Some(r), _) => r.to_q()?,
            (None, Some(r)) => r,
            (None, None) => return Err(Error::invalid("missing r0")),
        };
        CoverSpec::new(self.alpha0, branch, unit_u, self.genus_gx, self.outside_branch_bound, r0)
    }

    pub fn from_cover(c: &CoverSpec) -> CoverBody {
        CoverBody {
            alpha0: c.alpha0,
            branch: c.branch.iter().map(|b| BranchJson { x: ElemLit::from_elem(&b.x), alpha: b.alpha }).collect(),
            unit_u: if c.is_trivial_unit() { None } else { Some(SeriesJson::from_series(&c.unit_u)) },
            genus_gx: c.genus,
            outside_branch_bound: c.outside_bound,
            r0: Some(NumLit::from_q(&c.r0)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverJson {
    pub field: FieldJson,
    #[serde(flatten)]
    pub body: CoverBody,
}

impl CoverJson {
    pub fn to_cover(&self, precision: Option<u32>) -> Result<CoverSpec> {
        let k = self.field.build(precision)?;
        self.body.to_cover(&k, None)
    }

    pub fn from_cover(c: &CoverSpec) -> CoverJson {
        CoverJson { field: FieldJson::from_field(c.field()), body: CoverBody::from_cover(c) }
    }
}

/// `{"r0", "points": [[r, value], ...], "firstSlope", "lastSlope"}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ProfileJson {
    pub r0: NumLit,
    pub points: Vec<(NumLit, NumLit)>,
    #[serde(default)]
    pub first_slope: Option<NumLit>,
    #[serde(default)]
    pub last_slope: Option<NumLit>,
}

impl ProfileJson {
    pub fn to_profile(&self) -> Result<PlProfile> {
        let pts = self.points.iter().map(|(r, v)| Ok((r.to_q()?, v.to_q()?))).collect::<Result<Vec<_>>>()?;
        let slope = |x: &Option<NumLit>| x.as_ref().map(|s| s.to_q()).transpose().map(|s| s.unwrap_or(Q::from_integer(0)));
        PlProfile::from_points(self.r0.to_q()?, pts, slope(&self.first_slope)?, slope(&self.last_slope)?)
    }

    pub fn from_profile(p: &PlProfile) -> ProfileJson {
        ProfileJson {
            r0: NumLit::from_q(&p.r0),
            points: p.nodes.iter().map(|n| (NumLit::from_q(&n.r), NumLit::from_q(&n.value))).collect(),
            first_slope: Some(NumLit::from_q(&p.nodes[0].left_slope)),
            last_slope: Some(NumLit::from_q(&p.nodes.last().unwrap().right_slope)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct AbstractJson {
    pub depth: ProfileJson,
    #[serde(default)]
    pub branch_valuations: Vec<NumLit>,
    #[serde(default)]
    pub always_inside: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "group", deny_unknown_fields)]
pub enum StepJson {
    #[serde(rename = "Z/p")]
    Zp {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cover: Option<CoverBody>,
        #[serde(default, rename = "abstract", skip_serializing_if = "Option::is_none")]
        abstract_data: Option<AbstractJson>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        offset: Option<NumLit>,
    },
    #[serde(rename = "Z/l")]
    Zl {
        ell: u32,
        #[serde(rename = "branchCount")]
        branch_count: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        offset: Option<NumLit>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CharacterJson {
    pub n: u32,
    #[serde(default)]
    pub m: u32,
    #[serde(default = "yes")]
    pub subgroup_in_series: bool,
}

fn yes() -> bool {
    true
}

/// A tower without its field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TowerBody {
    pub steps: Vec<StepJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub character: Option<CharacterJson>,
}

impl TowerBody {
    pub fn to_tower(&self, k: &FieldRef, default_r0: Option<Q>) -> Result<TowerSpec> {
        let zero = Q::from_integer(0);
        let off = |o: &Option<NumLit>| o.as_ref().map(|x| x.to_q()).transpose().map(|x| x.unwrap_or(zero));
        let mut steps = Vec::new();
        for s in &self.steps {
            steps.push(match s {
                StepJson::Zp { cover, abstract_data, offset } => {
                    let data = match (cover, abstract_data) {
                        (Some(c), None) => StepData::Cover(Box::new(c.to_cover(k, default_r0)?)),
                        (None, Some(a)) => StepData::Abstract(AbstractStep {
                            depth: a.depth.to_profile()?,
                            branch_valuations: a.branch_valuations.iter().map(|v| v.to_q()).collect::<Result<_>>()?,
                            always_inside: a.always_inside,
                        }),
                        _ => return Err(Error::invalid("a Z/p step needs exactly one of cover, abstract")),
                    };
                    TowerStep { data, offset: off(offset)? }
                }
                StepJson::Zl { ell, branch_count, offset } => {
                    TowerStep { data: StepData::Tame { ell: *ell, branch_count: *branch_count }, offset: off(offset)? }
                }
            });
        }
        let character = self.character.map(|c| CharacterData { n: c.n, m: c.m, subgroup_in_series: c.subgroup_in_series });
        Ok(TowerSpec { p: k.p(), steps, character })
    }

    pub fn from_tower(t: &TowerSpec) -> TowerBody {
        let off = |o: &Q| if *o == Q::from_integer(0) { None } else { Some(NumLit::from_q(o)) };
        TowerBody {
            steps: t
                .steps
                .iter()
                .map(|s| match &s.data {
                    StepData::Cover(c) => StepJson::Zp { cover: Some(CoverBody::from_cover(c)), abstract_data: None, offset: off(&s.offset) },
                    StepData::Abstract(a) => StepJson::Zp {
                        cover: None,
                        abstract_data: Some(AbstractJson {
                            depth: ProfileJson::from_profile(&a.depth),
                            branch_valuations: a.branch_valuations.iter().map(NumLit::from_q).collect(),
                            always_inside: a.always_inside,
                        }),
                        offset: off(&s.offset),
                    },
                    StepData::Tame { ell, branch_count } => StepJson::Zl { ell: *ell, branch_count: *branch_count, offset: off(&s.offset) },
                })
                .collect(),
            character: t.character.map(|c| CharacterJson { n: c.n, m: c.m, subgroup_in_series: c.subgroup_in_series }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TowerJson {
    pub field: FieldJson,
    #[serde(flatten)]
    pub body: TowerBody,
}

impl TowerJson {
    pub fn to_tower(&self, precision: Option<u32>) -> Result<TowerSpec> {
        let k = self.field.build(precision)?;
        self.body.to_tower(&k, None)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberJson {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cover: Option<CoverBody>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tower: Option<TowerBody>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessJson {
    pub r: NumLit,
    pub member: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyJson {
    pub field: FieldJson,
    pub r0: NumLit,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s1: Option<NumLit>,
    pub members: Vec<MemberJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<WitnessJson>,
}

impl FamilyJson {
    pub fn to_family(&self, precision: Option<u32>) -> Result<FamilySpec> {
        let k = self.field.build(precision)?;
        let r0 = self.r0.to_q()?;
        let members = self
            .members
            .iter()
            .map(|m| {
                let data = match (&m.cover, &m.tower) {
                    (Some(c), None) => MemberData::Cover(Box::new(c.to_cover(&k, Some(r0))?)),
                    (None, Some(t)) => MemberData::Tower(Box::new(t.to_tower(&k, Some(r0))?)),
                    _ => return Err(Error::invalid(format!("member {} needs exactly one of cover, tower", m.id))),
                };
                Ok(Member { id: m.id.clone(), data })
            })
            .collect::<Result<Vec<_>>>()?;
        FamilySpec::new(members, r0, self.s1.as_ref().map(|s| s.to_q()).transpose()?)
    }

    pub fn witness_list(&self) -> Result<Vec<(Q, String)>> {
        self.witnesses.iter().map(|w| Ok((w.r.to_q()?, w.member.clone()))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{q, qi};

    const WORKED: &str = r#"{"field": {"p": 3}, "alpha0": 0, "branch": [{"x": "3", "alpha": 1}, {"x": 24, "alpha": 1}], "r0": "1"}"#;

    #[test]
    fn cover_round_trip() {
        let j: CoverJson = serde_json::from_str(WORKED).unwrap();
        let c = j.to_cover(None).unwrap();
        assert_eq!(c.branch_count(&qi(1)), 3);
        let out = serde_json::to_string(&CoverJson::from_cover(&c)).unwrap();
        let back: CoverJson = serde_json::from_str(&out).unwrap();
        let c2 = back.to_cover(None).unwrap();
        assert!(c2.kummer_series().unwrap().eq_to_precision(&c.kummer_series().unwrap()));
        assert_eq!(c2.r0, c.r0);
    }

    #[test]
    fn literals() {
        let k = Field::new(FieldConfig::new(2, 1, 2, 20)).unwrap();
        let pi: ElemLit = serde_json::from_str(r#"{"piShift": 1, "digits": ["1"]}"#).unwrap();
        assert_eq!(pi.to_elem(&k).unwrap().v().unwrap(), q(1, 2));
        let h: ElemLit = serde_json::from_str(r#""3/4""#).unwrap();
        assert_eq!(h.to_elem(&k).unwrap().v().unwrap(), qi(-2));
        let x = ElemLit::from_elem(&Elem::from_i64(&k, 12));
        assert!(x.to_elem(&k).unwrap().eq_to_precision(&Elem::from_i64(&k, 12)));
        assert!(serde_json::from_str::<CoverJson>(r#"{"field": {"p": 3}, "bogus": 1}"#).is_err());
    }

    #[test]
    fn series_with_tail() {
        let k = Field::qp(2).unwrap();
        let s: SeriesJson = serde_json::from_str(r#"{"coefficients": {"0": 1, "1": "2"}, "tail": {"dir": "+inf", "from": 1, "sigma": "1"}}"#).unwrap();
        let ser = s.to_series(&k).unwrap();
        assert!(ser.tail().is_some());
        let back = SeriesJson::from_series(&ser).to_series(&k).unwrap();
        assert!(back.eq_to_precision(&ser));
    }
}
