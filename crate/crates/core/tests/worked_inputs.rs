use std::path::PathBuf;

use kinks_core::families::{family_lambda, kink_theorem_check, lambda_diff_swan, DiffSwan};
use kinks_core::io::{CoverJson, FamilyJson, ProfileJson, TowerJson};
use kinks_core::rat::{q, qi};
use kinks_core::{build_profile, closed_disk_at, swan_at_auto, tower_disk_decision, Error, Settings};

fn read<T: serde::de::DeserializeOwned>(name: &str) -> T {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name);
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn cover_file_gives_the_worked_profile() {
    let c = read::<CoverJson>("worked_cover.json").to_cover(None).unwrap();
    let s = Settings::default();
    let prof = build_profile(&c, &s).unwrap();
    // δ = 2(r − 1/4) above the kink
    for (r, d) in [(q(3, 8), q(1, 4)), (q(1, 2), q(1, 2)), (qi(1), q(3, 2))] {
        assert_eq!(prof.value_at(&r).unwrap(), d);
        assert_eq!(swan_at_auto(&c, &r, &s).unwrap().depth, d);
    }
    let back = ProfileJson::from_profile(&prof).to_profile().unwrap();
    assert_eq!(back, prof);
}

#[test]
fn closed_disk_exactly_above_the_kink() {
    let c = read::<CoverJson>("worked_cover.json").to_cover(None).unwrap();
    let s = Settings::default();
    for (r, want) in [(q(1, 8), false), (q(1, 4), false), (q(5, 16), true), (qi(1), true)] {
        assert_eq!(closed_disk_at(&c, &r, false, &s).unwrap().is_closed_disk, want, "r = {r}");
    }
}

#[test]
fn one_step_tower_matches_the_cover() {
    let t = read::<TowerJson>("worked_tower.json").to_tower(None).unwrap();
    let s = Settings::default();
    let rep = tower_disk_decision(&t, &q(1, 2), &s).unwrap();
    assert!(rep.is_closed_disk);
    assert!(rep.swan_check.unwrap().holds);
    assert!(!tower_disk_decision(&t, &q(1, 8), &s).unwrap().is_closed_disk);
}

#[test]
fn family_file_certificates() {
    let spec = read::<FamilyJson>("worked_family.json");
    let fam = spec.to_family(None).unwrap();
    let s = Settings::default();
    let cert = family_lambda(&fam, &s).unwrap();
    assert_eq!(cert.gamma, q(1, 4));
    assert_eq!(cert.argmin, vec!["a".to_string()]);
    let diff = lambda_diff_swan(&fam, DiffSwan::Diff, &s).unwrap();
    assert_eq!(diff.per_member["a"].lambda, q(1, 4));
    let verdict = kink_theorem_check(&fam, &spec.witness_list().unwrap(), &s).unwrap();
    assert_eq!(verdict.open_disks.len(), 1);
    let bad = kink_theorem_check(&fam, &[(qi(2), "a".to_string())], &s);
    assert!(matches!(bad, Err(Error::WitnessInvalid { .. })));
}
