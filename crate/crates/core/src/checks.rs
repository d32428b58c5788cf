//! Randomized invariant suites, used by `kinks selfcheck` and the
//! acceptance target.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Elem, Field, FieldConfig};
use crate::profile::{build_profile, closed_disk_at, sample, vanishing_cycles_report, PlProfile};
use crate::rat::{q, qi, wild_bound, Q};
use crate::series::{Direction, LaurentSeries};
use crate::swan::{
    eliminate, padd, swan_of_series, swan_power_twist, BranchPoint, CoverSpec, Settings, SwanValue,
};
use crate::towers::{
    compose_differents, cyclic_depth_from_berk, level_counts_from_index, lin_combo_depth, m_swan, m_swan_cyclic,
};

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub cases: usize,
    pub skipped: usize,
    pub failures: Vec<String>,
}

impl SuiteReport {
    fn new(name: &str) -> SuiteReport {
        SuiteReport { name: name.to_string(), cases: 0, skipped: 0, failures: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.cases > 0
    }

    fn merge(&mut self, o: SuiteReport) {
        self.cases += o.cases;
        self.skipped += o.skipped;
        self.failures.extend(o.failures);
    }
}

/// Sizes of the randomized suites.
#[derive(Debug, Clone, Copy)]
pub struct SuiteSizes {
    pub covers: usize,
    pub pairs: usize,
    pub series: usize,
    pub profiles: usize,
    pub count_vectors: usize,
    pub precision: u32,
}

impl SuiteSizes {
    pub fn full() -> SuiteSizes {
        SuiteSizes { covers: 200, pairs: 100, series: 50, profiles: 100, count_vectors: 1000, precision: 16 }
    }

    pub fn quick() -> SuiteSizes {
        SuiteSizes { covers: 24, pairs: 16, series: 10, profiles: 20, count_vectors: 200, precision: 16 }
    }
}

fn rng_for(seed: u64, i: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn random_unit(rng: &mut ChaCha8Rng, p: i64) -> i64 {
    loop {
        let u = rng.gen_range(1..p * p);
        if u % p != 0 {
            return u;
        }
    }
}

/// A small random cover over Q_p, p ∈ {2, 3, 5}, with at most 4 branch
/// points x = p^a·u (1 ≤ a ≤ 3) and an optional unit factor 1 + cT.
pub fn random_cover(rng: &mut ChaCha8Rng, precision: u32) -> Result<CoverSpec> {
    let p = *[2u32, 3, 5].choose(rng).unwrap();
    random_cover_over(rng, p, precision)
}

pub fn random_cover_over(rng: &mut ChaCha8Rng, p: u32, precision: u32) -> Result<CoverSpec> {
    let k = Field::new(FieldConfig::new(p, 1, 1, precision))?;
    let pi = p as i64;
    let n = rng.gen_range(0..=4usize);
    let mut xs: Vec<(i64, i64)> = Vec::new();
    while xs.len() < n {
        let a = rng.gen_range(1..=3u32);
        let x = pi.pow(a) * random_unit(rng, pi);
        if xs.iter().all(|(y, _)| *y != x) {
            xs.push((x, a as i64));
        }
    }
    let alpha0 = if n == 0 { rng.gen_range(1..p) } else { rng.gen_range(0..p) };
    let r0 = match xs.iter().map(|(_, a)| *a).min() {
        Some(a) => qi(a),
        None => qi(rng.gen_range(1..=2)),
    };
    let branch = xs
        .iter()
        .map(|(x, _)| BranchPoint { x: Elem::from_i64(&k, *x), alpha: rng.gen_range(1..p) })
        .collect();
    let (unit_u, outside) = if rng.gen_bool(0.25) {
        let c = pi.pow(rng.gen_range(0..=1)) * random_unit(rng, pi);
        // the zero of U, and ∞ when F has prime-to-p order there
        let at_inf = u32::from((alpha0 + 1) % p != 0);
        (LaurentSeries::from_ints(&k, &[(0, 1), (1, c)]), 1 + at_inf)
    } else {
        (LaurentSeries::one(&k), 0)
    };
    CoverSpec::new(alpha0, branch, unit_u, 0, outside, r0)
}

pub fn cover_corpus(seed: u64, n: usize, precision: u32) -> Result<Vec<CoverSpec>> {
    (0..n).map(|i| random_cover(&mut rng_for(seed, i), precision)).collect()
}

/// A cover with its profile (or the error the builder raised).
pub struct CorpusEntry {
    pub cover: CoverSpec,
    pub profile: Result<PlProfile>,
}

pub fn corpus_profiles(covers: Vec<CoverSpec>, settings: &Settings) -> Vec<CorpusEntry> {
    covers
        .into_par_iter()
        .map(|cover| {
            let profile = build_profile(&cover, settings);
            CorpusEntry { cover, profile }
        })
        .collect()
}

fn describe(c: &CoverSpec) -> String {
    let pts: Vec<String> = c
        .branch
        .iter()
        .map(|b| format!("({}, {})", b.x.v().map(|v| v.to_string()).unwrap_or_default(), b.alpha))
        .collect();
    format!("p = {}, alpha0 = {}, branch valuations {}, r0 = {}", c.p(), c.alpha0, pts.join(" "), c.r0)
}

/// Run a per-cover check over the corpus; builder errors count as
/// failures except for the extension cap, which counts as skipped.
fn over_corpus(
    name: &str,
    corpus: &[CorpusEntry],
    check: impl Fn(&CoverSpec, &PlProfile) -> Result<Vec<String>> + Sync,
) -> SuiteReport {
    let parts: Vec<SuiteReport> = corpus
        .par_iter()
        .map(|entry| {
            let mut rep = SuiteReport::new(name);
            rep.cases = 1;
            let res = match &entry.profile {
                Ok(prof) => check(&entry.cover, prof),
                Err(e) => Err(e.clone()),
            };
            match res {
                Ok(f) => rep.failures.extend(f.into_iter().map(|m| format!("{}: {m}", describe(&entry.cover)))),
                Err(Error::ExtensionCapExceeded { .. }) => rep.skipped = 1,
                Err(e) => rep.failures.push(format!("{}: {e}", describe(&entry.cover))),
            }
            rep
        })
        .collect();
    let mut out = SuiteReport::new(name);
    for p in parts {
        out.merge(p);
    }
    out
}

/// At every node radius with positive depth the profile's one-sided slopes
/// equal ord_∞(ω) + 1 and −ord_0(ω) − 1.
pub fn duality_suite(corpus: &[CorpusEntry], settings: &Settings) -> SuiteReport {
    over_corpus("slope-ord duality", corpus, |cover, prof| {
        let mut fails = Vec::new();
        for n in &prof.nodes {
            let s = sample(cover, &n.r, settings)?;
            let Some((l, r)) = s.value.slopes() else { continue };
            if prof.left_slope_at(&n.r)? != qi(l) {
                fails.push(format!("left slope {} vs ord_inf + 1 = {l} at r = {}", n.left_slope, n.r));
            }
            if n.r < prof.r0 && prof.right_slope_at(&n.r)? != qi(r) {
                fails.push(format!("right slope {} vs -ord_0 - 1 = {r} at r = {}", n.right_slope, n.r));
            }
        }
        Ok(fails)
    })
}

/// Left slope ≤ |B[r]| − 1 at every node and segment midpoint, and a slope
/// divisible by p at positive depth only in the logarithmic regime with
/// slope 0.
pub fn slope_bound_suite(corpus: &[CorpusEntry], settings: &Settings) -> SuiteReport {
    over_corpus("slope bound and divisibility", corpus, |cover, prof| {
        let mut fails = Vec::new();
        let mut radii: Vec<Q> = prof.nodes.iter().map(|n| n.r).collect();
        let mut prev = qi(0);
        for n in &prof.nodes {
            radii.push((prev + n.r) / qi(2));
            prev = n.r;
        }
        for r in &radii {
            let bound = qi(cover.branch_count(r) as i64 - 1);
            let left = prof.left_slope_at(r)?;
            if left > bound {
                fails.push(format!("left slope {left} above |B[r]| - 1 = {bound} at r = {r}"));
            }
        }
        let p = cover.p() as i64;
        for n in &prof.nodes {
            let s = sample(cover, &n.r, settings)?;
            let Some((l, r)) = s.value.slopes() else { continue };
            for slope in [l, r] {
                if slope.rem_euclid(p) == 0 && (s.value.depth != wild_bound(cover.p()) || slope != 0) {
                    fails.push(format!("slope {slope} divisible by p at depth {} (r = {})", s.value.depth, n.r));
                }
            }
        }
        Ok(fails)
    })
}

/// deg ω = −2 at positive depth; every δ_ȳ is a nonnegative integer and
/// all vanish exactly where the preimage is a closed disk.
pub fn degree_suite(corpus: &[CorpusEntry], settings: &Settings) -> SuiteReport {
    over_corpus("degree identity and vanishing cycles", corpus, |cover, prof| {
        let mut fails = Vec::new();
        for n in &prof.nodes {
            let s = sample(cover, &n.r, settings)?;
            let Some(w) = &s.value.form else { continue };
            let deg = w.degree_check(cover.field().residue_field())?;
            if deg != -2 {
                fails.push(format!("deg omega = {deg} at r = {}", n.r));
            }
            let vc = vanishing_cycles_report(cover, &n.r, settings)?;
            if let Some(pt) = vc.points.iter().find(|pt| pt.delta < 0) {
                fails.push(format!("negative vanishing cycle {} at r = {}", pt.delta, n.r));
            }
            let disk = closed_disk_at(cover, &n.r, true, settings)?;
            if disk.is_closed_disk != vc.smooth {
                fails.push(format!(
                    "closed disk = {} but vanishing cycles smooth = {} at r = {}",
                    disk.is_closed_disk, vc.smooth, n.r
                ));
            }
        }
        Ok(fails)
    })
}

/// The cover of F1·F2, exponents reduced mod p.
pub fn product_cover(a: &CoverSpec, b: &CoverSpec) -> Result<CoverSpec> {
    let p = a.p();
    let mut branch: Vec<BranchPoint> = a.branch.clone();
    for x in &b.branch {
        match branch.iter_mut().find(|y| y.x.close_to(&x.x)) {
            Some(y) => y.alpha = (y.alpha + x.alpha) % p,
            None => branch.push(x.clone()),
        }
    }
    branch.retain(|y| y.alpha != 0);
    CoverSpec::new(
        (a.alpha0 + b.alpha0) % p,
        branch,
        a.unit_u.mul(&b.unit_u)?,
        0,
        a.outside_bound + b.outside_bound,
        a.r0.min(b.r0),
    )
}

/// The cover of F^m, exponents reduced mod p.
pub fn power_cover(a: &CoverSpec, m: u32) -> Result<CoverSpec> {
    let p = a.p();
    let branch = a.branch.iter().map(|b| BranchPoint { x: b.x.clone(), alpha: b.alpha * m % p }).collect();
    CoverSpec::new(a.alpha0 * m % p, branch, a.unit_u.pow(m)?, 0, a.outside_bound, a.r0)
}

/// Evaluate several covers at r over one common field, enlarging it until
/// every evaluation succeeds.
pub fn joint_values(covers: &[CoverSpec], r: &Q, settings: &Settings) -> Result<Vec<SwanValue>> {
    let mut cur: Vec<CoverSpec> = covers.to_vec();
    loop {
        let mut need = None;
        let mut out = Vec::with_capacity(cur.len());
        for c in &cur {
            match swan_of_series(&c.kummer_series()?, r) {
                Ok(v) => out.push(v),
                Err(Error::ExtensionRequired { e_mult, f_mult }) => {
                    need = Some((e_mult, f_mult));
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        let Some((em, fm)) = need else { return Ok(out) };
        let k = cur[0].field();
        let (e, f) = (k.e() * em, k.f() * fm);
        if e as u64 * f as u64 > settings.max_extension as u64 {
            return Err(Error::ExtensionCapExceeded { e, f, cap: settings.max_extension });
        }
        cur = cur.iter().map(|c| c.extend(em, fm)).collect::<Result<_>>()?;
    }
}

/// Additivity on random pairs over a common field and radius, and
/// invariance under F ↦ F^m for p ∤ m.
pub fn additivity_suite(seed: u64, pairs: usize, precision: u32, settings: &Settings) -> SuiteReport {
    let parts: Vec<SuiteReport> = (0..pairs)
        .into_par_iter()
        .map(|i| {
            let mut rep = SuiteReport::new("additivity and twist");
            rep.cases = 1;
            let mut rng = rng_for(seed.wrapping_add(1), i);
            match additivity_case(&mut rng, precision, settings) {
                Ok(f) => rep.failures.extend(f),
                Err(Error::ExtensionCapExceeded { .. }) => rep.skipped = 1,
                Err(e) => rep.failures.push(format!("pair {i}: {e}")),
            }
            rep
        })
        .collect();
    let mut out = SuiteReport::new("additivity and twist");
    for p in parts {
        out.merge(p);
    }
    out
}

fn additivity_case(rng: &mut ChaCha8Rng, precision: u32, settings: &Settings) -> Result<Vec<String>> {
    let p = *[2u32, 3, 5].choose(rng).unwrap();
    let a = random_cover_over(rng, p, precision)?;
    let b = random_cover_over(rng, p, precision)?;
    let ab = product_cover(&a, &b)?;
    let r0 = ab.r0;
    let a = CoverSpec { r0, ..a };
    let b = CoverSpec { r0, ..b };
    let m = loop {
        let m = rng.gen_range(2..=2 * p + 1);
        if m % p != 0 {
            break m;
        }
    };
    let am = power_cover(&a, m)?;
    let r = r0 * q(rng.gen_range(1..=8), 8);
    let v = joint_values(&[a, b, ab, am], &r, settings)?;
    let fq = crate::field::Field::new(FieldConfig::new(p, 1, 1, precision))?;
    let fq = fq.residue_field();
    let mut fails = Vec::new();
    let tag = format!("p = {p}, r = {r}");
    let max = v[0].depth.max(v[1].depth);
    if v[2].depth > max {
        fails.push(format!("{tag}: depth of product {} above max {max}", v[2].depth));
    }
    if let Some(s) = padd(&v[0], &v[1], fq) {
        if s.depth != v[2].depth || s.form != v[2].form {
            fails.push(format!("{tag}: product value differs from the sum (depth {} vs {})", v[2].depth, s.depth));
        }
    }
    let tw = swan_power_twist(&v[0], m as i64, fq)?;
    if tw.depth != v[3].depth || tw.form != v[3].form {
        fails.push(format!("{tag}: F^{m} gives depth {} vs {}", v[3].depth, v[0].depth));
    }
    Ok(fails)
}

/// Elimination on random G = I0^p + R with R supported off the multiples
/// of p: targets vanish at precision and the c-valuations (capped as in
/// `valuation_caps`) do not depend on the root chosen in the first sweep.
pub fn elimination_suite(seed: u64, n: usize, precision: u32) -> SuiteReport {
    let parts: Vec<SuiteReport> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rep = SuiteReport::new("elimination");
            rep.cases = 1;
            let mut rng = rng_for(seed.wrapping_add(2), i);
            match elimination_case(&mut rng, precision) {
                Ok(f) => rep.failures.extend(f.into_iter().map(|m| format!("series {i}: {m}"))),
                Err(e) => rep.failures.push(format!("series {i}: {e}")),
            }
            rep
        })
        .collect();
    let mut out = SuiteReport::new("elimination");
    for p in parts {
        out.merge(p);
    }
    out
}

pub fn random_elimination_series(rng: &mut ChaCha8Rng, precision: u32) -> Result<(LaurentSeries, i64)> {
    let p = *[2u32, 3, 5].choose(rng).unwrap();
    let k = Field::new(FieldConfig::new(p, 1, 1, precision))?;
    let pi = p as i64;
    let s = rng.gen_range(1..=2i64);
    let mut i0 = vec![(0i64, 1i64)];
    for j in 1..=s {
        if rng.gen_bool(0.8) {
            i0.push((-j, pi.pow(rng.gen_range(1..=2)) * random_unit(rng, pi)));
        }
    }
    let mut g = LaurentSeries::from_ints(&k, &i0).pow(p)?;
    for d in 1..=s * pi + 1 {
        if d % pi != 0 && rng.gen_bool(0.6) {
            let c = pi.pow(rng.gen_range(1..=3)) * random_unit(rng, pi);
            g = g.add(&LaurentSeries::from_ints(&k, &[(-d, c)]))?;
        }
    }
    Ok((g, s))
}

/// Solutions can differ in c_i by terms of valuation at least
/// p/(p−1) + i·r_G, where r_G = min v(g_i)/i; such terms are invisible at
/// every radius below r_G, so valuations are compared up to that cap.
fn valuation_caps(g: &LaurentSeries) -> Result<(Q, Q)> {
    let mut rg: Option<Q> = None;
    for (d, c) in g.terms() {
        if d < 0 && !c.is_negligible() {
            let x = c.v()? / qi(-d);
            rg = Some(rg.map_or(x, |y| y.min(x)));
        }
    }
    Ok((wild_bound(g.field().p()), rg.unwrap_or(qi(0))))
}

/// Absent indices count as vanishing coefficients.
fn same_capped(a: &BTreeMap<i64, Option<Q>>, b: &BTreeMap<i64, Option<Q>>, caps: &(Q, Q)) -> bool {
    a.keys().chain(b.keys()).all(|&i| {
        let cap = caps.0 + caps.1 * qi(i);
        let get = |m: &BTreeMap<i64, Option<Q>>| m.get(&i).copied().flatten().map_or(cap, |v| v.min(cap));
        get(a) == get(b)
    })
}

fn elimination_case(rng: &mut ChaCha8Rng, precision: u32) -> Result<Vec<String>> {
    let (g, s) = random_elimination_series(rng, precision)?;
    let p = g.field().p() as usize;
    let caps = valuation_caps(&g)?;
    let mut fails = Vec::new();
    let mut reference = None;
    for choice in 0..p {
        let mut cur = g.clone();
        let res = loop {
            match eliminate(&cur, s, Direction::Neg, choice) {
                Err(Error::ExtensionRequired { e_mult, f_mult }) if cur.field().e() * cur.field().f() * e_mult * f_mult <= 16 => {
                    cur = cur.extend(e_mult, f_mult)?;
                }
                other => break other,
            }
        };
        let res = match res {
            Ok(r) => r,
            // the alternate root lies outside the field model
            Err(Error::ExtensionRequired { .. }) if choice > 0 => continue,
            Err(e) => return Err(e),
        };
        for d in &res.target_degrees {
            if !res.remainder.coeff(*d).is_negligible() {
                fails.push(format!("target degree {d} not killed (root choice {choice})"));
            }
        }
        match &reference {
            None => reference = Some(res.c_valuations.clone()),
            Some(r0) if !same_capped(r0, &res.c_valuations, &caps) => {
                fails.push(format!("c-valuations differ between root choices 0 and {choice}"));
            }
            _ => {}
        }
    }
    Ok(fails)
}

fn random_profile(rng: &mut ChaCha8Rng, r0: Q) -> Result<PlProfile> {
    let n = rng.gen_range(1..=5i64);
    let mut radii: Vec<Q> = (0..n - 1).map(|_| r0 * q(rng.gen_range(1..16), 16)).collect();
    radii.push(r0);
    radii.sort();
    radii.dedup();
    let points: Vec<(Q, Q)> = radii.iter().map(|r| (*r, q(rng.gen_range(0..24), rng.gen_range(1..=4)))).collect();
    let (r1, v1) = points[0];
    let first = if rng.gen_bool(0.5) { qi(0) } else { v1 / r1 };
    PlProfile::from_points(r0, points, first, q(rng.gen_range(-4..=4), 2))
}

fn same_function(a: &PlProfile, b: &PlProfile) -> Result<bool> {
    if a.r0 != b.r0 || a.nodes[0].left_slope != b.nodes[0].left_slope {
        return Ok(false);
    }
    for n in a.nodes.iter().chain(b.nodes.iter()) {
        if a.value_at(&n.r)? != b.value_at(&n.r)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The cyclic depth formula against the general linear combination, the
/// m_Swan count transform, and associativity of composing differents.
pub fn tower_calculus_suite(seed: u64, profiles: usize, vectors: usize) -> SuiteReport {
    let mut rep = SuiteReport::new("tower calculus");
    let mut rng = rng_for(seed.wrapping_add(3), 0);
    for i in 0..profiles {
        rep.cases += 1;
        let p = *[2u32, 3, 5].choose(&mut rng).unwrap();
        let r0 = q(rng.gen_range(1..=4), rng.gen_range(1..=2));
        let res = (|| -> Result<Vec<String>> {
            let a = random_profile(&mut rng, r0)?;
            let b = random_profile(&mut rng, r0)?;
            let c = random_profile(&mut rng, r0)?;
            let mut f = Vec::new();
            let cyc = cyclic_depth_from_berk(&a, &b, p)?;
            let lin = lin_combo_depth(&[a.clone(), b.clone()], p, 0, 2)?;
            if !same_function(&cyc, &lin)? {
                f.push(format!("profile {i}: cyclic depth differs from the linear combination"));
            }
            let left = compose_differents(&[compose_differents(&[a.clone(), b.clone()])?, c.clone()])?;
            let right = compose_differents(&[a.clone(), compose_differents(&[b.clone(), c.clone()])?])?;
            let flat = compose_differents(&[a, b, c])?;
            if !same_function(&left, &right)? || !same_function(&left, &flat)? {
                f.push(format!("profile {i}: composition not associative"));
            }
            Ok(f)
        })();
        match res {
            Ok(f) => rep.failures.extend(f),
            Err(e) => rep.failures.push(format!("profile {i}: {e}")),
        }
    }
    for i in 0..vectors {
        rep.cases += 1;
        let p = *[2u32, 3, 5, 7].choose(&mut rng).unwrap();
        let n = rng.gen_range(1..=4usize);
        let mut by_index: Vec<usize> = (0..n).map(|_| rng.gen_range(0..=5)).collect();
        if by_index.iter().all(|&b| b == 0) {
            by_index[0] = 1;
        }
        let counts = level_counts_from_index(&by_index, p);
        match m_swan(&counts, p, 0) {
            Ok(v) if v == qi(m_swan_cyclic(&by_index)) => {}
            Ok(v) => rep.failures.push(format!("vector {i} {by_index:?} (p = {p}): m_Swan {v} vs {}", m_swan_cyclic(&by_index))),
            Err(e) => rep.failures.push(format!("vector {i}: {e}")),
        }
    }
    rep
}

/// All randomized suites at the given sizes, in order: duality, slope
/// bound, degree identity, additivity, elimination, tower calculus.
pub fn run_all(seed: u64, sizes: &SuiteSizes, settings: &Settings) -> Result<Vec<SuiteReport>> {
    let covers = cover_corpus(seed, sizes.covers, sizes.precision)?;
    let corpus = corpus_profiles(covers, settings);
    Ok(vec![
        duality_suite(&corpus, settings),
        slope_bound_suite(&corpus, settings),
        degree_suite(&corpus, settings),
        additivity_suite(seed, sizes.pairs, sizes.precision, settings),
        elimination_suite(seed, sizes.series, sizes.precision),
        tower_calculus_suite(seed, sizes.profiles, sizes.count_vectors),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites() {
        let sizes = SuiteSizes { covers: 12, pairs: 8, series: 6, profiles: 10, count_vectors: 100, precision: 16 };
        for rep in run_all(7, &sizes, &Settings::default()).unwrap() {
            assert!(rep.passed(), "{}: {:?}", rep.name, rep.failures);
        }
    }
}
