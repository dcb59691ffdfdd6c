use proptest::prelude::*;

use zerosum::invariants::{Invariant, INVARIANT_NAMES};
use zerosum::omega::{
    finiteness_check, has_subsequence_in, member, FinitenessReport, LengthSet, OmegaProperty, OmegaSpec,
    DEFAULT_ENUMERATION_LIMIT,
};
use zerosum::search::{audit_monotone, brute_force_threshold, threshold, Outcome, SearchOptions};
use zerosum::sequence::{enumerate_zero_sum_subforms, is_subsequence};
use zerosum::structure::antichain_reduce;
use zerosum::{Element, Group, SequenceForm};

const LIMIT: u64 = DEFAULT_ENUMERATION_LIMIT;

const SMALL: &[&[u64]] = &[&[], &[2], &[3], &[4], &[2, 2], &[5], &[6]];

fn group(i: usize) -> Group {
    Group::new(SMALL[i]).unwrap()
}

/// Appends `−σ(raw)` unless `raw` is already a nonempty zero-sum form.
fn zero_sum_from(raw: &[usize], g: &Group) -> SequenceForm {
    let mut s = SequenceForm::from_terms(raw.iter().map(|&i| Element::from_index(i % g.order())));
    let sigma = s.sum(g);
    if s.is_empty() || !sigma.is_zero() {
        s.push(g.neg(sigma), 1);
    }
    s
}

/// A random explicit Ω: a few short zero-sum forms plus some `g^{ord(g)}`.
fn random_members(g: &Group, raws: &[Vec<usize>], powers: &[bool]) -> Vec<SequenceForm> {
    let mut members: Vec<_> = raws.iter().map(|r| zero_sum_from(r, g)).collect();
    for (e, &keep) in g.elements().zip(powers) {
        if keep {
            members.push(SequenceForm::power(e, g.order_of(e)));
        }
    }
    members
}

fn omega_input() -> impl Strategy<Value = (usize, Vec<Vec<usize>>, Vec<bool>)> {
    (
        0..SMALL.len(),
        prop::collection::vec(prop::collection::vec(0usize..6, 0..4), 0..5),
        prop::collection::vec(prop::bool::weighted(0.8), 6),
    )
}

fn explicit(g: &Group, members: &[SequenceForm]) -> OmegaSpec {
    OmegaSpec::explicit(g, members.iter().cloned()).unwrap()
}

fn d_of(spec: &OmegaSpec, g: &Group, jobs: usize) -> Outcome {
    let options = SearchOptions::default().with_jobs(jobs);
    threshold(&OmegaProperty::new(spec.clone(), g.clone()).unwrap(), &options).unwrap().outcome
}

/// `None` stands for ∞.
fn finite_value(outcome: &Outcome) -> Option<u64> {
    match outcome {
        Outcome::Finite { value } => Some(*value),
        Outcome::Infinite { .. } => None,
        Outcome::Unknown { reason } => panic!("unexpected unknown outcome: {reason}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn explicit_threshold_matches_brute_force((gi, raws, powers) in omega_input()) {
        let g = group(gi);
        let members = random_members(&g, &raws, &powers);
        let spec = explicit(&g, &members);
        let outcome = d_of(&spec, &g, 1);
        match finiteness_check(&spec, &g, u64::MAX) {
            FinitenessReport::Finite { bound, .. } => {
                let d = finite_value(&outcome).expect("finite by the criterion");
                prop_assert!(d <= bound);
                let prop = OmegaProperty::new(spec, g.clone()).unwrap();
                let brute = brute_force_threshold(&prop, bound as usize, LIMIT).unwrap();
                prop_assert_eq!(brute.value(), Some(d));
            }
            FinitenessReport::Infinite { witness } => {
                prop_assert!(finite_value(&outcome).is_none());
                prop_assert!(!members.iter().any(|m| m.support_mask() == witness.bit()));
            }
            FinitenessReport::CapExceeded { .. } => prop_assert!(false, "exact check cannot exceed u64::MAX"),
        }
    }

    #[test]
    fn finiteness_criterion((gi, raws, powers) in omega_input()) {
        let g = group(gi);
        let members = random_members(&g, &raws, &powers);
        let spec = explicit(&g, &members);
        let every_element_has_a_power = g.elements().all(|e| members.iter().any(|m| m.support_mask() == e.bit()));
        prop_assert_eq!(finiteness_check(&spec, &g, u64::MAX).is_finite(), every_element_has_a_power);
        prop_assert_eq!(finite_value(&d_of(&spec, &g, 1)).is_some(), every_element_has_a_power);
    }

    #[test]
    fn larger_families_have_smaller_thresholds(
        (gi, raws, powers) in omega_input(),
        extra in prop::collection::vec(prop::collection::vec(0usize..6, 0..4), 1..4),
    ) {
        let g = group(gi);
        let small = random_members(&g, &raws, &powers);
        let mut large = small.clone();
        large.extend(extra.iter().map(|r| zero_sum_from(r, &g)));
        let d_small = finite_value(&d_of(&explicit(&g, &small), &g, 1));
        let d_large = finite_value(&d_of(&explicit(&g, &large), &g, 1));
        match (d_small, d_large) {
            (Some(a), Some(b)) => prop_assert!(b <= a),
            (Some(_), None) => prop_assert!(false, "adding members made d infinite"),
            _ => {}
        }
    }

    #[test]
    fn antichain_reduction_keeps_d((gi, raws, powers) in omega_input()) {
        let g = group(gi);
        let members = random_members(&g, &raws, &powers);
        let reduced = antichain_reduce(&members);
        for (i, a) in reduced.iter().enumerate() {
            for b in &reduced[i + 1..] {
                prop_assert!(!is_subsequence(a, b) && !is_subsequence(b, a));
            }
        }
        prop_assert_eq!(d_of(&explicit(&g, &members), &g, 1), d_of(&explicit(&g, &reduced), &g, 1));
    }

    #[test]
    fn thresholds_do_not_depend_on_jobs((gi, raws, powers) in omega_input()) {
        let g = group(gi);
        let spec = explicit(&g, &random_members(&g, &raws, &powers));
        prop_assert_eq!(d_of(&spec, &g, 1), d_of(&spec, &g, 4));
    }

    #[test]
    fn dispatch_agrees_with_membership(
        gi in 0..SMALL.len(),
        raw in prop::collection::vec(0usize..6, 0..7),
        lengths in prop::collection::btree_set(1u64..6, 1..3),
        removed in prop::collection::vec(0usize..6, 0..3),
    ) {
        let g = group(gi);
        let form = SequenceForm::from_terms(raw.iter().map(|&i| Element::from_index(i % g.order())));
        let lengths = LengthSet::finite(lengths).unwrap();
        let specs = [
            OmegaSpec::ZeroSumLength(lengths.clone()),
            OmegaSpec::Minimal(None),
            OmegaSpec::Minimal(Some(lengths.clone())),
            OmegaSpec::NotMinimal(None),
            OmegaSpec::support(g.nonzero_elements(), OmegaSpec::Minimal(None)),
            OmegaSpec::difference(&g, OmegaSpec::ZeroSumLength(lengths), [zero_sum_from(&removed, &g)]).unwrap(),
            OmegaSpec::IndexOne,
        ];
        let subs = enumerate_zero_sum_subforms(&form, &g, LIMIT).unwrap();
        for spec in &specs {
            if matches!(spec, OmegaSpec::IndexOne) && !g.is_cyclic() {
                continue;
            }
            let expected = subs.iter().any(|s| member(spec, s, &g).unwrap());
            prop_assert_eq!(has_subsequence_in(spec, &form, &g, LIMIT).unwrap(), expected, "{:?}", spec);
        }
    }
}

#[test]
fn invariant_properties_are_monotone() {
    for factors in SMALL {
        let g = Group::new(factors).unwrap();
        for name in INVARIANT_NAMES {
            let lengths = (name == "dL").then(|| LengthSet::finite([g.order() as u64]).unwrap());
            let prop = Invariant::parse(name, lengths).unwrap().property(&g).unwrap();
            audit_monotone(&prop, 300, 9, 7).unwrap();
        }
    }
}

#[test]
fn invariant_thresholds_match_brute_force() {
    for factors in SMALL {
        let g = Group::new(factors).unwrap();
        for name in INVARIANT_NAMES {
            let lengths = (name == "dL").then(|| LengthSet::finite([g.order() as u64]).unwrap());
            let prop = Invariant::parse(name, lengths).unwrap().property(&g).unwrap();
            let fast = threshold(&prop, &SearchOptions::default()).unwrap();
            let brute = brute_force_threshold(&prop, 2 * g.order() + 1, LIMIT).unwrap();
            assert_eq!(fast.value(), brute.value(), "{name} over {g}");
        }
    }
}
