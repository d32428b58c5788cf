use std::time::Instant;

use rayon::prelude::*;

use kinks_core::checks::{run_all, SuiteReport, SuiteSizes};
use kinks_core::families::{kink_theorem_check, MemberData};
use kinks_core::profile::lambda_by_scan;
use kinks_core::rat::{fmt_q, q, qi, wild_bound};
use kinks_core::swan::{lambda_closed_form, swan_at, with_extension};
use kinks_core::{
    build_profile, closed_disk_at, CoverSpec, Differential, Elem, Error, Field, FieldRef, FamilySpec, LaurentSeries,
    Member, RatFunc, Settings, SwanValue, Q,
};

/// Largest candidate count the oracle will enumerate.
const ORACLE_LIMIT: u64 = 1 << 22;

/// Depth by exhaustive search over correctors H in the box that can matter:
/// degrees d with p·d in the support of F, and π-digits whose term has
/// v_r in [0, 1/(p−1)). Digits of larger v_r change F − H^p only above the
/// wild bound. Needs v_r(F) = 0 and e·r ∈ Z.
fn oracle_depth(f: &LaurentSeries, r: &Q) -> Result<Q, String> {
    let k = f.field().clone();
    let p = k.p() as i64;
    let e = k.e() as i64;
    let wild = wild_bound(k.p());
    let w0 = f.gauss_valuation(r).map_err(|e| e.to_string())?;
    if w0 != qi(0) {
        return Err(format!("oracle needs v_r(F) = 0, got {}", fmt_q(&w0)));
    }
    let er = *r * Q::from_integer(e);
    if !er.is_integer() {
        return Err(format!("e·r = {} is not an integer", fmt_q(&er)));
    }
    let (lo, hi) = (f.min_degree().unwrap(), f.max_degree().unwrap());
    let mut slots = Vec::new();
    for d in lo.div_euclid(p)..=hi.div_euclid(p) {
        if p * d < lo {
            continue;
        }
        // j/e + d·r ∈ [0, 1/(p−1))
        let first = -d * er.to_integer();
        let mut j = first;
        while Q::from_integer(j - first) < Q::new(e, p - 1) {
            slots.push((d, j));
            j += 1;
        }
    }
    let fq = k.residue_field();
    let qn = fq.q() as u64;
    let total = qn.checked_pow(slots.len() as u32).filter(|t| *t <= ORACLE_LIMIT);
    let Some(total) = total else {
        return Err(format!("{} digit slots over F_{} exceed the oracle limit", slots.len(), qn));
    };
    let lifts: Vec<Elem> = fq.elements().map(|c| Elem::lift(&k, c)).collect();
    let best = (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut rest = idx;
            let mut terms: Vec<(i64, Elem)> = Vec::new();
            for &(d, j) in &slots {
                let c = &lifts[(rest % qn) as usize];
                rest /= qn;
                terms.push((d, c.mul(&Elem::pi_pow(&k, j))));
            }
            let h = LaurentSeries::from_terms(&k, terms);
            let g = f.sub(&h.pow(k.p()).unwrap()).unwrap();
            match g.gauss_valuation(r) {
                Ok(w) => w.min(wild),
                Err(Error::PrecisionLoss(_)) if g.gauss_info(r).min.is_none() => wild,
                Err(e) => panic!("oracle valuation: {e}"),
            }
        })
        .max()
        .unwrap();
    Ok(wild - best)
}

/// The engine's value at r together with the series over its working field.
fn engine_and_oracle(cover: &CoverSpec, r: &Q, settings: &Settings) -> Result<(SwanValue, Q, u32), String> {
    let (v, f) = with_extension(cover, settings, |c| Ok((swan_at(c, r)?, c.kummer_series()?)))
        .map_err(|e| e.to_string())?;
    let e = f.field().e();
    Ok((v, oracle_depth(&f, r)?, e))
}

fn worked(k: &FieldRef) -> CoverSpec {
    CoverSpec::from_ints(k, 0, &[(3, 1), (24, 1)], qi(1)).unwrap()
}

fn criterion_1(settings: &Settings) -> Result<String, String> {
    let k = Field::qp(3).unwrap();
    let c = worked(&k);
    for (r, want) in [(q(1, 8), qi(0)), (q(1, 2), q(1, 2))] {
        let (v, oracle, _) = engine_and_oracle(&c, &r, settings)?;
        if oracle != want || v.depth != want {
            return Err(format!("δ({}) engine {} oracle {}", fmt_q(&r), fmt_q(&v.depth), fmt_q(&oracle)));
        }
    }
    let (v, _, _) = engine_and_oracle(&c, &q(1, 2), settings)?;
    let fq = k.residue_field();
    let want = Differential::new(RatFunc::from_laurent(fq, &[(-3, 2)]));
    if v.form.as_ref().map(|w| w.coeff()) != Some(want.coeff()) {
        return Err(format!("ω(1/2) = {:?}", v.form));
    }
    let prof = build_profile(&c, settings).map_err(|e| e.to_string())?;
    for r in [q(1, 64), q(1, 16), q(1, 8), q(3, 16), q(1, 4)] {
        if prof.value_at(&r).map_err(|e| e.to_string())? != qi(0) {
            return Err(format!("profile nonzero at {}", fmt_q(&r)));
        }
    }
    let kinks: Vec<Q> = prof.kinks().map(|n| n.r).collect();
    if kinks != vec![q(1, 4)] {
        return Err(format!("kinks {:?}", kinks.iter().map(fmt_q).collect::<Vec<_>>()));
    }
    let closed = lambda_closed_form(&c).map_err(|e| e.to_string())?.lambda;
    let scan = lambda_by_scan(&prof, c.target_slope());
    if closed != q(1, 4) || scan != q(1, 4) {
        return Err(format!("λ closed {} scan {}", fmt_q(&closed), fmt_q(&scan)));
    }
    let at = |r: Q| closed_disk_at(&c, &r, false, settings).map(|d| d.is_closed_disk).map_err(|e| e.to_string());
    if !at(q(1, 2))? || at(q(1, 8))? {
        return Err("closed-disk decisions at 1/2 and 1/8".into());
    }
    Ok("δ(1/2) = 1/2, ω = 2t^-3 dt, kink 1/4, λ = 1/4 (closed form and scan), oracle agrees at 1/8 and 1/2".into())
}

fn suite(rep: &SuiteReport) -> Result<String, String> {
    let line = format!("{} cases, {} skipped, {} failures", rep.cases, rep.skipped, rep.failures.len());
    if rep.passed() {
        Ok(line)
    } else {
        Err(format!("{line}; first: {}", rep.failures.first().map(String::as_str).unwrap_or("no cases")))
    }
}

fn criterion_8(settings: &Settings) -> Result<String, String> {
    let k = Field::qp(3).unwrap();
    let member = |id: &str, b: i64| Member {
        id: id.into(),
        data: MemberData::Cover(Box::new(CoverSpec::from_ints(&k, 0, &[(3, 1), (b, 1)], qi(1)).unwrap())),
    };
    let fam = FamilySpec::new(vec![member("a", 24), member("b", 12)], qi(1), None).map_err(|e| e.to_string())?;
    let witnesses: Vec<(Q, String)> = [q(1, 2), q(3, 8), q(5, 16)].into_iter().map(|r| (r, "a".to_string())).collect();
    let v = kink_theorem_check(&fam, &witnesses, settings).map_err(|e| e.to_string())?;
    if v.certificate.gamma != q(1, 4) || v.certificate.argmin != vec!["a".to_string()] {
        return Err(format!("γ = {}, argmin {:?}", fmt_q(&v.certificate.gamma), v.certificate.argmin));
    }
    if v.witnesses.len() != 3 || v.open_disks.len() != 1 || v.open_disks[0].member != "a" {
        return Err(format!("{} witnesses, {} open disks", v.witnesses.len(), v.open_disks.len()));
    }
    match kink_theorem_check(&fam, &[(q(1, 8), "a".to_string())], settings) {
        Err(Error::WitnessInvalid { .. }) => {}
        other => return Err(format!("witness at 1/8: {other:?}")),
    }
    Ok("γ = 1/4, argmin {a}, 3 witnesses, open disk for a, 1/8 rejected".into())
}

/// Branch sets from {8, 24, 16, 48} of size 1 to 3 over Q_2.
fn oracle_covers(k: &FieldRef) -> Vec<CoverSpec> {
    let xs = [8i64, 24, 16, 48];
    let mut out = Vec::new();
    for mask in 1u32..16 {
        if mask.count_ones() > 3 {
            continue;
        }
        let branch: Vec<(i64, u32)> = (0..4).filter(|i| mask & (1 << i) != 0).map(|i| (xs[i], 1)).collect();
        let r0 = branch.iter().map(|(x, _)| x.trailing_zeros() as i64).min().unwrap();
        out.push(CoverSpec::from_ints(k, 0, &branch, qi(r0)).unwrap());
    }
    out
}

fn criterion_9(settings: &Settings) -> Result<String, String> {
    let start = Instant::now();
    let k = Field::new(kinks_core::FieldConfig::new(2, 1, 1, 8)).unwrap();
    let covers = oracle_covers(&k);
    let (mut cases, mut positive, mut max_e) = (0, 0, 1);
    for c in &covers {
        // 10 radii j/4 ending at r0
        let top = 4 * c.r0.to_integer();
        for j in top - 9..=top {
            let r = q(j, 4);
            let (v, oracle, e) = engine_and_oracle(c, &r, settings)?;
            if v.depth != oracle {
                return Err(format!(
                    "branch {:?} r = {}: engine {} oracle {}",
                    c.branch.iter().map(|b| b.x.to_string()).collect::<Vec<_>>(),
                    fmt_q(&r),
                    fmt_q(&v.depth),
                    fmt_q(&oracle)
                ));
            }
            cases += 1;
            positive += usize::from(oracle > qi(0));
            max_e = max_e.max(e);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 60.0 {
        return Err(format!("{cases} cases agree but took {secs:.1} s"));
    }
    Ok(format!("{} covers, {cases} radius checks agree ({positive} with positive depth, e up to {max_e})", covers.len()))
}

fn main() {
    let settings = Settings::default();
    let mut failed = 0;
    let mut report = |n: u32, name: &str, start: Instant, res: Result<String, String>| {
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(m) => println!("PASS {n} {name}: {m} ({secs:.1} s)"),
            Err(m) => {
                failed += 1;
                println!("FAIL {n} {name}: {m} ({secs:.1} s)");
            }
        }
    };

    let t = Instant::now();
    report(1, "worked instance", t, criterion_1(&settings));

    let t = Instant::now();
    match run_all(2024, &SuiteSizes::full(), &settings) {
        Ok(reps) => {
            for (i, rep) in reps.iter().enumerate() {
                report(i as u32 + 2, &rep.name, t, suite(rep));
            }
        }
        Err(e) => {
            for n in 2..=7 {
                report(n, "randomized suites", t, Err(e.to_string()));
            }
        }
    }

    let t = Instant::now();
    report(8, "family minimization", t, criterion_8(&settings));

    let t = Instant::now();
    report(9, "oracle equivalence", t, criterion_9(&settings));

    if failed > 0 {
        std::process::exit(1);
    }
}
