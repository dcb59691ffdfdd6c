//! Threshold search for monotone sequence properties.
//!
//! For a property `P` that is preserved under adjoining terms, the threshold
//! is `1 + max{|S| : P(S) fails}`. [`threshold`] finds it by a canonical DFS
//! over multiplicity vectors: element `i` receives a multiplicity, then the
//! search moves to element `i + 1` and never returns, so every form is
//! visited once. A branch stops growing as soon as `P` holds, since every
//! extension then holds as well. [`brute_force_threshold`] is the
//! independent oracle: it enumerates every form of each length.

use std::cmp::Ordering;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering as AtomicOrdering};
use std::time::Instant;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::group::{Element, Group};
use crate::sequence::{render_form, SequenceForm};

/// Default number of property evaluations per threshold invocation.
pub const DEFAULT_MAX_CALLS: u64 = 10_000_000;

/// Per-element multiplicity caps for the search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Caps {
    /// `caps[g]` copies of `g` are guaranteed to satisfy the property.
    Finite(Vec<u32>),
    /// No power of `witness` ever satisfies the property.
    Infinite { witness: Element },
}

/// A predicate on sequence forms, monotone under adjoining terms.
///
/// The search drives an incremental state: terms are adjoined one at a time
/// in non-decreasing element order. `evaluate` must agree with the state
/// route; the brute-force oracle uses it directly.
pub trait MonotoneProperty: Sync {
    type State: Clone + Send + Sync;

    fn name(&self) -> String;
    fn group(&self) -> &Group;
    fn caps(&self) -> Caps;
    fn start(&self) -> Self::State;
    fn adjoin(&self, state: &mut Self::State, g: Element);
    fn holds(&self, state: &Self::State) -> Result<bool>;

    fn evaluate(&self, form: &SequenceForm) -> Result<bool> {
        let mut state = self.start();
        for g in form.terms() {
            self.adjoin(&mut state, g);
        }
        self.holds(&state)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Outcome {
    Finite { value: u64 },
    Infinite { witness: String },
    Unknown { reason: String },
}

impl Outcome {
    pub fn value(&self) -> Option<u64> {
        match self {
            Outcome::Finite { value } => Some(*value),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes: u64,
    pub property_calls: u64,
    pub elapsed_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThresholdResult {
    pub outcome: Outcome,
    /// A failing form of length `t − 1`; present iff the outcome is finite
    /// and `t ≥ 1`.
    pub certificate: Option<SequenceForm>,
    pub stats: SearchStats,
}

impl ThresholdResult {
    pub fn value(&self) -> Option<u64> {
        self.outcome.value()
    }

    fn unknown(reason: String, stats: SearchStats) -> ThresholdResult {
        ThresholdResult {
            outcome: Outcome::Unknown { reason },
            certificate: None,
            stats,
        }
    }

    fn infinite(group: &Group, witness: Element, stats: SearchStats) -> ThresholdResult {
        ThresholdResult {
            outcome: Outcome::Infinite {
                witness: group.format_element(witness),
            },
            certificate: None,
            stats,
        }
    }

    pub fn to_json(&self, group: &Group) -> Value {
        json!({
            "outcome": self.outcome,
            "certificate": self.certificate.as_ref().map(|c| render_form(c, group)),
            "stats": self.stats,
        })
    }

    /// Outcome and certificate agree (statistics are ignored).
    pub fn same_answer(&self, other: &ThresholdResult) -> bool {
        self.outcome == other.outcome && self.certificate == other.certificate
    }
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub max_calls: u64,
    pub jobs: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            max_calls: DEFAULT_MAX_CALLS,
            jobs: 1,
        }
    }
}

impl SearchOptions {
    pub fn with_jobs(mut self, jobs: usize) -> Self {
        self.jobs = jobs.max(1);
        self
    }

    pub fn with_max_calls(mut self, max_calls: u64) -> Self {
        self.max_calls = max_calls;
        self
    }
}

struct Budget {
    limit: u64,
    calls: AtomicU64,
    nodes: AtomicU64,
    exhausted: AtomicBool,
}

impl Budget {
    fn new(limit: u64) -> Budget {
        Budget {
            limit,
            calls: AtomicU64::new(0),
            nodes: AtomicU64::new(0),
            exhausted: AtomicBool::new(false),
        }
    }

    fn charge(&self) -> Result<()> {
        let used = self.calls.fetch_add(1, AtomicOrdering::Relaxed) + 1;
        if used > self.limit || self.exhausted.load(AtomicOrdering::Relaxed) {
            self.exhausted.store(true, AtomicOrdering::Relaxed);
            return Err(Error::BudgetExceeded(format!(
                "more than {} property calls",
                self.limit
            )));
        }
        Ok(())
    }

    fn stats(&self, start: Instant) -> SearchStats {
        SearchStats {
            nodes: self.nodes.load(AtomicOrdering::Relaxed),
            property_calls: self.calls.load(AtomicOrdering::Relaxed).min(self.limit),
            elapsed_ms: start.elapsed().as_millis() as u64,
        }
    }
}

/// Longest failing multiplicity vector, ties broken towards the smallest
/// sorted term list (the lexicographically largest vector).
#[derive(Clone, Debug, Default)]
struct Best(Option<(usize, Vec<u32>)>);

impl Best {
    fn offer(&mut self, len: usize, counts: &[u32]) {
        let better = match &self.0 {
            None => true,
            Some((l, c)) => match len.cmp(l) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => counts > c.as_slice(),
            },
        };
        if better {
            self.0 = Some((len, counts.to_vec()));
        }
    }

    fn merge(mut self, other: Best) -> Best {
        if let Some((len, counts)) = other.0 {
            self.offer(len, &counts);
        }
        self
    }
}

struct Frame<S> {
    index: usize,
    state: S,
    counts: Vec<u32>,
    len: usize,
}

struct Dfs<'a, P: MonotoneProperty> {
    property: &'a P,
    elements: Vec<Element>,
    caps: Vec<u32>,
    budget: &'a Budget,
}

impl<P: MonotoneProperty> Dfs<'_, P> {
    /// Children of a frame: one per admissible multiplicity of its element.
    /// Every child is a failing form.
    fn children(&self, frame: &Frame<P::State>) -> Result<Vec<Frame<P::State>>> {
        let g = self.elements[frame.index];
        let cap = self.caps[g.index()];
        let mut out = Vec::new();
        out.push(Frame {
            index: frame.index + 1,
            state: frame.state.clone(),
            counts: frame.counts.clone(),
            len: frame.len,
        });
        let mut state = frame.state.clone();
        for m in 1..=cap {
            self.property.adjoin(&mut state, g);
            self.budget.charge()?;
            if self.property.holds(&state)? {
                break;
            }
            if m == cap {
                let power = SequenceForm::power(g, cap);
                return Err(Error::UnsafeCap {
                    element: format!(
                        "{} (power {})",
                        self.property.group().format_element(g),
                        render_form(&power, self.property.group())
                    ),
                    cap,
                });
            }
            let mut counts = frame.counts.clone();
            counts[g.index()] = m;
            out.push(Frame {
                index: frame.index + 1,
                state: state.clone(),
                counts,
                len: frame.len + m as usize,
            });
        }
        Ok(out)
    }

    fn run(&self, frame: Frame<P::State>, best: &mut Best) -> Result<()> {
        self.budget.nodes.fetch_add(1, AtomicOrdering::Relaxed);
        if frame.index == self.elements.len() {
            best.offer(frame.len, &frame.counts);
            return Ok(());
        }
        for child in self.children(&frame)? {
            self.run(child, best)?;
        }
        Ok(())
    }
}

/// Exact threshold by canonical DFS.
pub fn threshold<P: MonotoneProperty>(property: &P, options: &SearchOptions) -> Result<ThresholdResult> {
    let start = Instant::now();
    let group = property.group();
    let budget = Budget::new(options.max_calls);
    let caps = match property.caps() {
        Caps::Finite(caps) => caps,
        Caps::Infinite { witness } => {
            return Ok(ThresholdResult::infinite(group, witness, budget.stats(start)));
        }
    };
    let root_state = property.start();
    budget.charge()?;
    if property.holds(&root_state)? {
        return Ok(ThresholdResult {
            outcome: Outcome::Finite { value: 0 },
            certificate: None,
            stats: budget.stats(start),
        });
    }
    let dfs = Dfs {
        property,
        elements: group.elements().collect(),
        caps,
        budget: &budget,
    };
    let root = Frame {
        index: 0,
        state: root_state,
        counts: vec![0; group.order()],
        len: 0,
    };

    let result = if options.jobs <= 1 {
        let mut best = Best::default();
        dfs.run(root, &mut best).map(|_| best)
    } else {
        parallel_run(&dfs, root, options.jobs)
    };

    let best = match result {
        Ok(best) => best,
        Err(e) if e.is_budget() => {
            return Ok(ThresholdResult::unknown(e.to_string(), budget.stats(start)));
        }
        Err(e) => return Err(e),
    };
    let (len, counts) = best.0.expect("the empty form fails, so some leaf exists");
    let certificate = SequenceForm::from_counts(&counts);
    // Re-check the certificate directly instead of trusting the bookkeeping.
    if property.evaluate(&certificate)? || certificate.len() != len {
        return Err(Error::Precondition(format!(
            "certificate `{}` does not fail {}",
            render_form(&certificate, group),
            property.name()
        )));
    }
    Ok(ThresholdResult {
        outcome: Outcome::Finite {
            value: len as u64 + 1,
        },
        certificate: Some(certificate),
        stats: budget.stats(start),
    })
}

fn parallel_run<P: MonotoneProperty>(
    dfs: &Dfs<'_, P>,
    root: Frame<P::State>,
    jobs: usize,
) -> Result<Best> {
    // Expand breadth-first until there is enough work to spread; leaves met
    // on the way are reduced like any other.
    let mut best = Best::default();
    let mut frontier = vec![root];
    while frontier.len() < jobs * 8 {
        let mut next = Vec::new();
        let mut expanded = false;
        for frame in frontier {
            dfs.budget.nodes.fetch_add(1, AtomicOrdering::Relaxed);
            if frame.index == dfs.elements.len() {
                best.offer(frame.len, &frame.counts);
                continue;
            }
            expanded = true;
            next.extend(dfs.children(&frame)?);
        }
        frontier = next;
        if !expanded || frontier.is_empty() {
            break;
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
    let partial: Vec<Result<Best>> = pool.install(|| {
        frontier
            .into_par_iter()
            .map(|frame| {
                let mut local = Best::default();
                dfs.run(frame, &mut local).map(|_| local)
            })
            .collect()
    });
    // Budget errors win over other errors only if nothing else failed.
    let mut budget_error = None;
    for part in partial {
        match part {
            Ok(b) => best = best.merge(b),
            Err(e) if e.is_budget() => budget_error = Some(e),
            Err(e) => return Err(e),
        }
    }
    match budget_error {
        Some(e) => Err(e),
        None => Ok(best),
    }
}

/// Number of forms of length `len` over `n` elements: `C(n + len − 1, len)`.
pub fn forms_of_length(n: usize, len: usize) -> u128 {
    if n == 0 {
        return u128::from(len == 0);
    }
    let mut acc: u128 = 1;
    for i in 0..len as u128 {
        acc = acc * (n as u128 + i) / (i + 1);
    }
    acc
}

/// Calls `visit` on every form of length `len`, in increasing term-list order,
/// stopping early when it returns `false`.
pub fn for_each_form_of_length(
    group: &Group,
    len: usize,
    mut visit: impl FnMut(&SequenceForm) -> Result<bool>,
) -> Result<()> {
    for combo in group.elements().combinations_with_replacement(len) {
        if !visit(&SequenceForm::from_terms(combo))? {
            break;
        }
    }
    Ok(())
}

fn first_failing(
    property: &impl MonotoneProperty,
    len: usize,
    calls: &mut u64,
    limit: u64,
) -> Result<Option<SequenceForm>> {
    let group = property.group();
    let count = forms_of_length(group.order(), len);
    if (*calls as u128) + count > limit as u128 {
        return Err(Error::BudgetExceeded(format!(
            "{count} forms of length {len} exceed the enumeration limit {limit}"
        )));
    }
    let mut found = None;
    for_each_form_of_length(group, len, |form| {
        *calls += 1;
        if !property.evaluate(form)? {
            found = Some(form.clone());
            return Ok(false);
        }
        Ok(true)
    })?;
    Ok(found)
}

/// Independent oracle: enumerates every form of length `t_max, t_max − 1, …`
/// and reports `1 +` the largest failing length. If a form of length `t_max`
/// fails, the value is not witnessed and the outcome is unknown.
pub fn brute_force_threshold<P: MonotoneProperty>(
    property: &P,
    t_max: usize,
    limit: u64,
) -> Result<ThresholdResult> {
    let start = Instant::now();
    let mut calls = 0u64;
    let stats = |calls: u64| SearchStats {
        nodes: calls,
        property_calls: calls,
        elapsed_ms: start.elapsed().as_millis() as u64,
    };
    let run = |calls: &mut u64| -> Result<Option<(usize, Option<SequenceForm>)>> {
        if first_failing(property, t_max, calls, limit)?.is_some() {
            return Ok(None);
        }
        for len in (0..t_max).rev() {
            if let Some(form) = first_failing(property, len, calls, limit)? {
                return Ok(Some((len + 1, Some(form))));
            }
        }
        Ok(Some((0, None)))
    };
    match run(&mut calls) {
        Ok(Some((t, certificate))) => Ok(ThresholdResult {
            outcome: Outcome::Finite { value: t as u64 },
            certificate,
            stats: stats(calls),
        }),
        Ok(None) => Ok(ThresholdResult::unknown(
            format!("a form of length {t_max} fails; the value exceeds t_max"),
            stats(calls),
        )),
        Err(e) if e.is_budget() => Ok(ThresholdResult::unknown(e.to_string(), stats(calls))),
        Err(e) => Err(e),
    }
}

/// Result of checking a claimed threshold value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueCheck {
    pub holds: bool,
    /// A failing form of length `t − 1` (when one exists).
    pub witness: Option<SequenceForm>,
    /// A failing form of length `t`, refuting the claim.
    pub counterexample: Option<SequenceForm>,
}

/// Checks both directions of `threshold = t`: every length-`t` form satisfies
/// the property and some length-`(t − 1)` form does not.
pub fn is_value<P: MonotoneProperty>(property: &P, t: usize, limit: u64) -> Result<ValueCheck> {
    if t == 0 {
        return Err(Error::Precondition("claimed value must be at least 1".into()));
    }
    let mut calls = 0;
    if let Some(bad) = first_failing(property, t, &mut calls, limit)? {
        return Ok(ValueCheck {
            holds: false,
            witness: None,
            counterexample: Some(bad),
        });
    }
    let witness = first_failing(property, t - 1, &mut calls, limit)?;
    Ok(ValueCheck {
        holds: witness.is_some(),
        witness,
        counterexample: None,
    })
}

/// Randomized check of the monotone contract on `samples` pairs `T ⊆ S`.
pub fn audit_monotone<P: MonotoneProperty>(
    property: &P,
    samples: usize,
    max_len: usize,
    seed: u64,
) -> Result<()> {
    let group = property.group();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = group.order();
    for _ in 0..samples {
        let len = rng.gen_range(0..=max_len);
        let sup = SequenceForm::from_terms(
            (0..len).map(|_| Element::from_index(rng.gen_range(0..n))),
        );
        let sub = SequenceForm::from_terms(sup.terms().filter(|_| rng.gen_bool(0.5)));
        if property.evaluate(&sub)? && !property.evaluate(&sup)? {
            return Err(Error::PropertyContract {
                sub: render_form(&sub, group),
                sup: render_form(&sup, group),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dp::SumDp;

    /// "Has a nonempty zero-sum subsequence", written against the kernel
    /// directly so the search can be tested in isolation.
    struct HasZeroSum(Group);

    impl MonotoneProperty for HasZeroSum {
        type State = SumDp;
        fn name(&self) -> String {
            "zero-sum".into()
        }
        fn group(&self) -> &Group {
            &self.0
        }
        fn caps(&self) -> Caps {
            Caps::Finite(self.0.elements().map(|g| self.0.order_of(g)).collect())
        }
        fn start(&self) -> SumDp {
            SumDp::new()
        }
        fn adjoin(&self, state: &mut SumDp, g: Element) {
            state.adjoin(&self.0, g);
        }
        fn holds(&self, state: &SumDp) -> Result<bool> {
            Ok(state.has_zero())
        }
    }

    /// Never holds: every power is free.
    struct Never(Group);

    impl MonotoneProperty for Never {
        type State = ();
        fn name(&self) -> String {
            "never".into()
        }
        fn group(&self) -> &Group {
            &self.0
        }
        fn caps(&self) -> Caps {
            Caps::Infinite {
                witness: Element::from_index(1),
            }
        }
        fn start(&self) {}
        fn adjoin(&self, _: &mut (), _: Element) {}
        fn holds(&self, _: &()) -> Result<bool> {
            Ok(false)
        }
    }

    /// Violates monotonicity: holds exactly on length 2.
    struct LengthTwo(Group);

    impl MonotoneProperty for LengthTwo {
        type State = usize;
        fn name(&self) -> String {
            "length-two".into()
        }
        fn group(&self) -> &Group {
            &self.0
        }
        fn caps(&self) -> Caps {
            Caps::Finite(vec![4; self.0.order()])
        }
        fn start(&self) -> usize {
            0
        }
        fn adjoin(&self, s: &mut usize, _: Element) {
            *s += 1;
        }
        fn holds(&self, s: &usize) -> Result<bool> {
            Ok(*s == 2)
        }
    }

    #[test]
    fn davenport_of_c3() {
        let p = HasZeroSum(Group::cyclic(3).unwrap());
        let r = threshold(&p, &SearchOptions::default()).unwrap();
        assert_eq!(r.value(), Some(3));
        assert_eq!(r.certificate.as_ref().unwrap().display(&p.0), "1^2");
        let b = brute_force_threshold(&p, 6, 1_000_000).unwrap();
        assert!(r.same_answer(&b));
    }

    #[test]
    fn davenport_of_klein_group() {
        let p = HasZeroSum(Group::new(&[2, 2]).unwrap());
        let b = brute_force_threshold(&p, 6, 1_000_000).unwrap();
        assert_eq!(b.value(), Some(3));
        assert!(threshold(&p, &SearchOptions::default()).unwrap().same_answer(&b));
    }

    #[test]
    fn trivial_group_threshold_is_one() {
        let p = HasZeroSum(Group::trivial());
        let r = threshold(&p, &SearchOptions::default()).unwrap();
        assert_eq!(r.value(), Some(1));
        assert_eq!(r.certificate, Some(SequenceForm::empty()));
        let b = brute_force_threshold(&p, 3, 1000).unwrap();
        assert!(r.same_answer(&b));
    }

    #[test]
    fn infinite_and_unknown_outcomes() {
        let p = Never(Group::cyclic(3).unwrap());
        let r = threshold(&p, &SearchOptions::default()).unwrap();
        assert_eq!(
            r.outcome,
            Outcome::Infinite {
                witness: "1".into()
            }
        );
        let b = brute_force_threshold(&p, 4, 1000).unwrap();
        assert!(matches!(b.outcome, Outcome::Unknown { .. }));
    }

    #[test]
    fn budget_exhaustion_is_unknown() {
        let p = HasZeroSum(Group::new(&[2, 2, 2]).unwrap());
        let r = threshold(&p, &SearchOptions::default().with_max_calls(5)).unwrap();
        assert!(matches!(r.outcome, Outcome::Unknown { .. }));
        let b = brute_force_threshold(&p, 10, 50).unwrap();
        assert!(matches!(b.outcome, Outcome::Unknown { .. }));
    }

    #[test]
    fn is_value_both_directions() {
        let p = HasZeroSum(Group::cyclic(3).unwrap());
        let yes = is_value(&p, 3, 1000).unwrap();
        assert!(yes.holds);
        assert_eq!(yes.witness.unwrap().display(&p.0), "1^2");
        let no = is_value(&p, 2, 1000).unwrap();
        assert!(!no.holds);
        assert_eq!(no.counterexample.unwrap().display(&p.0), "1^2");
        let t = HasZeroSum(Group::trivial());
        assert!(is_value(&t, 1, 10).unwrap().holds);
    }

    #[test]
    fn audit_catches_non_monotone_property() {
        let g = Group::cyclic(3).unwrap();
        assert!(audit_monotone(&HasZeroSum(g.clone()), 1000, 8, 7).is_ok());
        assert!(matches!(
            audit_monotone(&LengthTwo(g), 1000, 6, 7),
            Err(Error::PropertyContract { .. })
        ));
    }

    #[test]
    fn parallel_search_matches_sequential() {
        let p = HasZeroSum(Group::new(&[2, 4]).unwrap());
        let seq = threshold(&p, &SearchOptions::default()).unwrap();
        for jobs in [2, 3, 8] {
            let par = threshold(&p, &SearchOptions::default().with_jobs(jobs)).unwrap();
            assert!(seq.same_answer(&par));
            assert_eq!(seq.stats.nodes, par.stats.nodes);
        }
    }

    #[test]
    fn counting_forms() {
        assert_eq!(forms_of_length(3, 3), 10);
        assert_eq!(forms_of_length(1, 5), 1);
        assert_eq!(forms_of_length(0, 0), 1);
        let g = Group::cyclic(3).unwrap();
        let mut n = 0;
        for_each_form_of_length(&g, 3, |_| {
            n += 1;
            Ok(true)
        })
        .unwrap();
        assert_eq!(n, 10);
    }
}
