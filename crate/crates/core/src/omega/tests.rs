use super::*;
use crate::search::{brute_force_threshold, threshold, MonotoneProperty, Outcome, SearchOptions};
use crate::sequence::{for_each_subform, parse_form};

fn c(n: u64) -> Group {
    Group::cyclic(n).unwrap()
}

fn f(text: &str, g: &Group) -> SequenceForm {
    parse_form(text, g).unwrap()
}

fn len(set: &[u64]) -> LengthSet {
    LengthSet::finite(set.iter().copied()).unwrap()
}

#[test]
fn member_examples() {
    let g3 = c(3);
    assert!(member(&OmegaSpec::all_zero_sum(), &f("1 2", &g3), &g3).unwrap());
    assert!(!member(&OmegaSpec::Minimal(None), &f("0 1 2", &g3), &g3).unwrap());
    let g5 = c(5);
    let s0 = f("0 1 2 3 4", &g5);
    let omega = OmegaSpec::difference(&g5, OmegaSpec::ZeroSumLength(len(&[5])), [s0.clone()]).unwrap();
    assert!(!member(&omega, &s0, &g5).unwrap());
    assert!(member(&omega, &f("1^5", &g5), &g5).unwrap());
}

#[test]
fn has_subsequence_examples() {
    let g3 = c(3);
    let l3 = OmegaSpec::ZeroSumLength(len(&[3]));
    assert!(!has_subsequence_in(&l3, &f("1^2 2^2", &g3), &g3, 1000).unwrap());
    assert!(has_subsequence_in(&OmegaSpec::Minimal(None), &f("1^3 2", &g3), &g3, 1000).unwrap());
    let g2 = c(2);
    let ex = OmegaSpec::explicit(&g2, [f("1^2", &g2)]).unwrap();
    assert!(!has_subsequence_in(&ex, &f("0 1", &g2), &g2, 1000).unwrap());
}

#[test]
fn finiteness_examples() {
    let g3 = c(3);
    match finiteness_check(&OmegaSpec::all_zero_sum(), &g3, default_k_max(&g3)) {
        FinitenessReport::Finite { k, bound } => {
            assert!(k.iter().all(|&(_, k)| k == 1));
            assert_eq!(bound, 5);
        }
        other => panic!("{other:?}"),
    }
    let ex = OmegaSpec::explicit(&g3, [f("0", &g3)]).unwrap();
    assert_eq!(
        finiteness_check(&ex, &g3, 9),
        FinitenessReport::Infinite {
            witness: Element::from_index(1)
        }
    );
    match finiteness_check(&OmegaSpec::ZeroSumLength(len(&[3])), &g3, 9) {
        FinitenessReport::Finite { k, .. } => {
            assert_eq!(k.iter().map(|&(_, k)| k).collect::<Vec<_>>(), vec![3, 1, 1]);
        }
        other => panic!("{other:?}"),
    }
    match finiteness_check(&OmegaSpec::ZeroSumLength(len(&[3])), &g3, 2) {
        FinitenessReport::CapExceeded { witness, .. } => assert!(witness.is_zero()),
        other => panic!("{other:?}"),
    }
}

#[test]
fn finiteness_of_differences_and_tails() {
    let g2 = c(2);
    let not_min = OmegaSpec::NotMinimal(None);
    let k: Vec<u64> = match finiteness_check(&not_min, &g2, 10) {
        FinitenessReport::Finite { k, .. } => k.into_iter().map(|(_, k)| k).collect(),
        other => panic!("{other:?}"),
    };
    assert_eq!(k, vec![2, 2]);
    // Removing 1^2 and 1^4 from B(C_2) leaves 1^6 as the least power of 1.
    let d = OmegaSpec::difference(&g2, OmegaSpec::all_zero_sum(), [f("1^2", &g2), f("1^4", &g2)]).unwrap();
    let k: Vec<u64> = match finiteness_check(&d, &g2, 10) {
        FinitenessReport::Finite { k, .. } => k.into_iter().map(|(_, k)| k).collect(),
        other => panic!("{other:?}"),
    };
    assert_eq!(k, vec![1, 3]);
}

#[test]
fn members_up_to_examples() {
    let g3 = c(3);
    let all = enumerate_members_up_to(&OmegaSpec::all_zero_sum(), &g3, 3, 1000).unwrap();
    assert_eq!(
        render_members(&all, &g3),
        vec!["0", "0^2", "1 2", "0^3", "0 1 2", "1^3", "2^3"]
    );
    let g2 = c(2);
    let min = enumerate_members_up_to(&OmegaSpec::Minimal(None), &g2, 2, 1000).unwrap();
    assert_eq!(render_members(&min, &g2), vec!["0", "1^2"]);
    let ex = OmegaSpec::explicit(&g3, [f("1^3", &g3), f("0", &g3), f("1^6", &g3)]).unwrap();
    let got = enumerate_members_up_to(&ex, &g3, 3, 1).unwrap();
    assert_eq!(render_members(&got, &g3), vec!["0", "1^3"]);
}

#[test]
fn json_round_trip_keeps_exact_keys() {
    let g = Group::new(&[2, 2]).unwrap();
    let text = r#"{"union":[{"zsLength":{"set":[2]}},{"minimal":{"length":null}},{"notMinimal":{"length":{"interval":[1,3]}}},{"explicit":["(0,0)"]},{"support":{"allowed":["(0,1)"],"of":{"zsLength":"all"}}},{"difference":{"from":{"zsLength":"all"},"remove":["(1,1)^2"]}}]}"#;
    let value: Value = serde_json::from_str(text).unwrap();
    let spec = OmegaSpec::from_json(&value, &g).unwrap();
    assert_eq!(spec.to_json(&g), value);
    let g5 = c(5);
    let one: Value = serde_json::from_str(r#"{"indexOne":{}}"#).unwrap();
    assert_eq!(OmegaSpec::from_json(&one, &g5).unwrap(), OmegaSpec::IndexOne);
}

#[test]
fn json_rejects_bad_input() {
    let g3 = c(3);
    for bad in [
        r#"{"explicit":["1"]}"#,
        r#"{"zsLength":{"interval":[3,1]}}"#,
        r#"{"zsLength":{"set":[0]}}"#,
        r#"{"bogus":{}}"#,
        r#"{"zsLength":"all","explicit":[]}"#,
    ] {
        let v: Value = serde_json::from_str(bad).unwrap();
        assert!(OmegaSpec::from_json(&v, &g3).is_err(), "{bad}");
    }
    let v: Value = serde_json::from_str(r#"{"indexOne":{}}"#).unwrap();
    assert_eq!(
        OmegaSpec::from_json(&v, &Group::new(&[2, 2]).unwrap()),
        Err(Error::NotCyclic(2))
    );
}

#[test]
fn index_one_membership() {
    let g5 = c(5);
    assert!(member(&OmegaSpec::IndexOne, &f("0", &g5), &g5).unwrap());
    assert!(member(&OmegaSpec::IndexOne, &f("1^5", &g5), &g5).unwrap());
    assert!(member(&OmegaSpec::IndexOne, &f("1 4", &g5), &g5).unwrap());
    assert!(!member(&OmegaSpec::IndexOne, &f("1^3 2^4", &g5), &g5).unwrap());
    // Zero-sum but not minimal.
    assert!(!member(&OmegaSpec::IndexOne, &f("2^3 3^3", &g5), &g5).unwrap());
}

fn shapes(g: &Group) -> Vec<OmegaSpec> {
    let nz: Vec<Element> = g.nonzero_elements().collect();
    let mut v = vec![
        OmegaSpec::all_zero_sum(),
        OmegaSpec::ZeroSumLength(len(&[2, 3])),
        OmegaSpec::ZeroSumLength(LengthSet::interval(1, g.exponent() as u64).unwrap()),
        OmegaSpec::Minimal(None),
        OmegaSpec::Minimal(Some(len(&[1, 2]))),
        OmegaSpec::Minimal(Some(len(&[2, 3]))),
        OmegaSpec::NotMinimal(None),
        OmegaSpec::NotMinimal(Some(len(&[2, 4]))),
        OmegaSpec::support(nz.iter().copied().take(2), OmegaSpec::all_zero_sum()),
        OmegaSpec::Union(vec![
            OmegaSpec::explicit(g, [SequenceForm::power(g.zero(), 3)]).unwrap(),
            OmegaSpec::support(nz.clone(), OmegaSpec::Minimal(None)),
        ]),
    ];
    let zs = zero_sum_forms_up_to(g, 3, 10_000).unwrap();
    v.push(OmegaSpec::difference(g, OmegaSpec::all_zero_sum(), zs.iter().take(3).cloned()).unwrap());
    v.push(OmegaSpec::difference(g, OmegaSpec::ZeroSumLength(len(&[2, 3])), zs.iter().skip(1).take(4).cloned()).unwrap());
    v.push(OmegaSpec::difference(g, OmegaSpec::Minimal(None), zs.iter().take(2).cloned()).unwrap());
    if g.is_cyclic() {
        v.push(OmegaSpec::IndexOne);
    }
    v
}

#[test]
fn dispatch_matches_enumeration() {
    for g in [c(2), c(3), c(4), Group::new(&[2, 2]).unwrap(), c(5)] {
        let probe = SequenceForm::from_counts(&vec![3; g.order()]);
        for spec in shapes(&g) {
            let prop = OmegaProperty::new(spec.clone(), g.clone()).unwrap();
            for_each_subform(&probe, |s| {
                let fast = has_subsequence_in(&spec, s, &g, 1 << 20).unwrap();
                let slow = has_subsequence_in_by_enumeration(&spec, s, &g, 1 << 20).unwrap();
                assert_eq!(fast, slow, "{spec:?} on {}", render_form(s, &g));
                let mut state = prop.start();
                for t in s.terms() {
                    prop.adjoin(&mut state, t);
                }
                assert_eq!(prop.holds(&state).unwrap(), fast, "{spec:?} on {}", render_form(s, &g));
            });
        }
    }
}

#[test]
fn thresholds_match_brute_force() {
    for g in [c(2), c(3), Group::new(&[2, 2]).unwrap()] {
        for spec in shapes(&g) {
            let prop = OmegaProperty::new(spec.clone(), g.clone()).unwrap();
            let fast = threshold(&prop, &SearchOptions::default()).unwrap();
            match &fast.outcome {
                Outcome::Finite { value } => {
                    let brute = brute_force_threshold(&prop, *value as usize + 1, 1 << 22).unwrap();
                    assert_eq!(brute.value(), Some(*value), "{spec:?} over {g}");
                }
                Outcome::Infinite { .. } => {}
                other => panic!("{other:?}"),
            }
        }
    }
}

#[test]
fn d_omega_examples() {
    let g3 = c(3);
    // {0^{t−D+1}} ∪ B(G∖{0}) with t = 4.
    let spec = OmegaSpec::Union(vec![
        OmegaSpec::explicit(&g3, [SequenceForm::power(g3.zero(), 2)]).unwrap(),
        OmegaSpec::support(g3.nonzero_elements(), OmegaSpec::all_zero_sum()),
    ]);
    let r = threshold(&OmegaProperty::new(spec, g3.clone()).unwrap(), &SearchOptions::default()).unwrap();
    assert_eq!(r.value(), Some(4));
    let g5 = c(5);
    let r = threshold(&OmegaProperty::new(OmegaSpec::all_zero_sum(), g5).unwrap(), &SearchOptions::default()).unwrap();
    assert_eq!(r.value(), Some(5));
    let ex = OmegaSpec::explicit(&g3, [f("0", &g3)]).unwrap();
    let r = threshold(&OmegaProperty::new(ex, g3.clone()).unwrap(), &SearchOptions::default()).unwrap();
    assert_eq!(
        r.outcome,
        Outcome::Infinite {
            witness: "1".into()
        }
    );
}

#[test]
fn downward_closed_lengths() {
    assert!(len(&[1, 2, 3]).is_downward_closed());
    assert!(!len(&[2, 3]).is_downward_closed());
    assert!(LengthSet::interval(1, 4).unwrap().is_downward_closed());
    assert!(!LengthSet::interval(2, 4).unwrap().is_downward_closed());
}
