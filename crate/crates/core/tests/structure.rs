use zerosum::omega::{OmegaProperty, OmegaSpec, DEFAULT_ENUMERATION_LIMIT};
use zerosum::search::{brute_force_threshold, is_value, SearchOptions};
use zerosum::sequence::{is_subsequence, is_weak_regular};
use zerosum::structure::{is_minimal_omega, theorem_d2_construct, vol_scan, MinimalityVerdict, VolOptions};
use zerosum::{Group, SequenceForm};

const LIMIT: u64 = DEFAULT_ENUMERATION_LIMIT;

fn groups() -> Vec<Group> {
    [&[2][..], &[3], &[4], &[2, 2], &[5]].iter().map(|f| Group::new(f).unwrap()).collect()
}

fn explicit_d(members: &[SequenceForm], g: &Group) -> Option<u64> {
    let spec = OmegaSpec::explicit(g, members.iter().cloned()).unwrap();
    let prop = OmegaProperty::new(spec, g.clone()).unwrap();
    brute_force_threshold(&prop, g.total_budget() as usize + 4, LIMIT).unwrap().value()
}

/// `{g^{ord(g)}} ∪ {0^{t − Σ(ord(g) − 1)}}`.
fn power_family(g: &Group, t: u64) -> Vec<SequenceForm> {
    let slack = t + 1 - g.total_budget();
    g.elements()
        .map(|e| {
            if e.is_zero() {
                SequenceForm::power(e, slack as u32)
            } else {
                SequenceForm::power(e, g.order_of(e))
            }
        })
        .collect()
}

#[test]
fn minimal_families_lose_their_threshold_without_any_member() {
    let options = SearchOptions::default();
    for g in groups() {
        for t in g.total_budget()..g.total_budget() + 2 {
            let members = power_family(&g, t);
            let spec = OmegaSpec::explicit(&g, members.iter().cloned()).unwrap();
            let verdict = is_minimal_omega(&spec, t, &g, &options, LIMIT).unwrap();
            assert_eq!(verdict.is_minimal(), Some(true), "t = {t} over {g}");
            assert!(members.len() <= 12);
            for b in &members {
                let rest: Vec<_> = members.iter().filter(|m| *m != b).cloned().collect();
                assert!(explicit_d(&rest, &g).is_none_or(|d| d > t), "dropping a member kept d = {t} over {g}");
            }
        }
    }
}

#[test]
fn removable_members_really_are_removable() {
    let options = SearchOptions::default();
    let g = Group::cyclic(5).unwrap();
    let spec = OmegaSpec::ZeroSumLength(zerosum::omega::LengthSet::single(5));
    match is_minimal_omega(&spec, 9, &g, &options, LIMIT).unwrap() {
        MinimalityVerdict::NotMinimal { removable, chain } => {
            assert!(!removable.is_empty());
            assert_eq!(chain.value(), Some(9));
        }
        other => panic!("expected not minimal, got {other:?}"),
    }
}

#[test]
fn theorem_d2_pairs_are_disjoint_with_equal_thresholds() {
    let options = SearchOptions::default();
    for g in [Group::cyclic(2).unwrap(), Group::cyclic(3).unwrap(), Group::new(&[2, 2]).unwrap()] {
        let d2 = zerosum::invariants::d2(&g, &options).unwrap().value().unwrap();
        for k in d2..d2 + 2 {
            let report = theorem_d2_construct(&g, k, &options, LIMIT).unwrap();
            assert!(report.holds(), "k = {k} over {g}");
            assert!(!report.members.iter().any(|m| report.members_prime.contains(m)));
            assert_eq!(explicit_d(&report.members, &g), Some(k));
            assert_eq!(explicit_d(&report.members_prime, &g), Some(k));
        }
    }
}

#[test]
fn vol_entries_verify_independently() {
    let options = VolOptions::default();
    for g in groups() {
        let report = vol_scan(&g, &options).unwrap();
        assert!(report.residue.is_empty(), "{g}: {:?}", report.residue);
        for (t, entry) in &report.certified {
            assert!(entry.members.iter().all(|m| is_weak_regular(m, &g)));
            assert!(!entry.members.iter().any(|m| is_subsequence(m, &entry.certificate)));
            let spec = OmegaSpec::explicit(&g, entry.members.iter().cloned()).unwrap();
            let check = is_value(&OmegaProperty::new(spec, g.clone()).unwrap(), *t as usize, LIMIT).unwrap();
            assert!(check.holds, "t = {t} over {g}");
        }
    }
}
