//! Families `Ω ⊆ B(G)` of nonempty zero-sum sequences.
//!
//! An [`OmegaSpec`] is a small expression tree. Besides plain membership it
//! answers "does `S` have a sub-form in Ω" ([`has_subsequence_in`]), which
//! is the property whose threshold is `d_Ω(G)`, and it decides finiteness of
//! `d_Ω(G)` exactly from the shape of the tree ([`finiteness_check`]).

mod json;
mod property;

use std::collections::BTreeSet;

use serde_json::{json, Value};

pub use json::{lengths_from_json as length_set_from_json, lengths_to_json as length_set_to_json};
pub use property::OmegaProperty;

use crate::dp::{CountDp, PairDp};
use crate::error::{Error, Result};
use crate::group::{Element, Group};
use crate::search::forms_of_length;
use crate::sequence::{
    enumerate_zero_sum_subforms, has_zero_sum, index_of, is_minimal_zero_sum, is_subsequence,
    is_zero_sum, length_dp, render_form, SequenceForm,
};

/// Default limit on enumerated forms (sub-forms or members).
pub const DEFAULT_ENUMERATION_LIMIT: u64 = 2_000_000;

/// A set of admissible lengths, all at least 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LengthSet {
    Finite(BTreeSet<u64>),
    Interval(u64, u64),
    All,
}

impl LengthSet {
    pub fn finite(lengths: impl IntoIterator<Item = u64>) -> Result<LengthSet> {
        let set: BTreeSet<u64> = lengths.into_iter().collect();
        if set.contains(&0) {
            return Err(Error::Schema("lengths must be at least 1".into()));
        }
        Ok(LengthSet::Finite(set))
    }

    pub fn interval(lo: u64, hi: u64) -> Result<LengthSet> {
        if lo == 0 || lo > hi {
            return Err(Error::Schema(format!("bad length interval [{lo}, {hi}]")));
        }
        Ok(LengthSet::Interval(lo, hi))
    }

    pub fn single(len: u64) -> LengthSet {
        LengthSet::Finite(BTreeSet::from([len]))
    }

    pub fn contains(&self, len: u64) -> bool {
        match self {
            LengthSet::Finite(s) => s.contains(&len),
            LengthSet::Interval(lo, hi) => (*lo..=*hi).contains(&len),
            LengthSet::All => len >= 1,
        }
    }

    /// Largest member, `None` when unbounded.
    pub fn max(&self) -> Option<u64> {
        match self {
            LengthSet::Finite(s) => Some(s.last().copied().unwrap_or(0)),
            LengthSet::Interval(_, hi) => Some(*hi),
            LengthSet::All => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, LengthSet::Finite(s) if s.is_empty())
    }

    /// `ℓ ∈ L` and `1 ≤ ℓ' ≤ ℓ` imply `ℓ' ∈ L`.
    pub fn is_downward_closed(&self) -> bool {
        match self {
            LengthSet::Finite(s) => s.iter().enumerate().all(|(i, &l)| l == i as u64 + 1),
            LengthSet::Interval(lo, _) => *lo == 1,
            LengthSet::All => true,
        }
    }
}

/// An expression describing a subset of `B(G)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum OmegaSpec {
    /// Zero-sum sequences with length in the set.
    ZeroSumLength(LengthSet),
    /// Minimal zero-sum sequences, optionally length-filtered.
    Minimal(Option<LengthSet>),
    /// Zero-sum sequences that are not minimal, optionally length-filtered.
    NotMinimal(Option<LengthSet>),
    /// An explicit list of nonempty zero-sum forms.
    Explicit(Vec<SequenceForm>),
    /// Members of `of` whose support lies in `allowed` (a bitmask).
    Support { allowed: u64, of: Box<OmegaSpec> },
    /// Minimal zero-sum sequences of index 1 over a cyclic group.
    IndexOne,
    Union(Vec<OmegaSpec>),
    /// Members of `from` except the listed forms.
    Difference {
        from: Box<OmegaSpec>,
        remove: Vec<SequenceForm>,
    },
}

impl OmegaSpec {
    /// `B(G)`.
    pub fn all_zero_sum() -> OmegaSpec {
        OmegaSpec::ZeroSumLength(LengthSet::All)
    }

    /// Explicit family; members are deduplicated and sorted.
    pub fn explicit(group: &Group, members: impl IntoIterator<Item = SequenceForm>) -> Result<OmegaSpec> {
        let members = normalize_members(members);
        for m in &members {
            check_in_b(group, m)?;
        }
        Ok(OmegaSpec::Explicit(members))
    }

    pub fn support(allowed: impl IntoIterator<Item = Element>, of: OmegaSpec) -> OmegaSpec {
        OmegaSpec::Support {
            allowed: allowed.into_iter().fold(0, |acc, g| acc | g.bit()),
            of: Box::new(of),
        }
    }

    pub fn difference(group: &Group, from: OmegaSpec, remove: impl IntoIterator<Item = SequenceForm>) -> Result<OmegaSpec> {
        let remove = normalize_members(remove);
        for m in &remove {
            check_in_b(group, m)?;
        }
        Ok(OmegaSpec::Difference {
            from: Box::new(from),
            remove,
        })
    }

    /// Checks the constructor preconditions against a group.
    pub fn validate(&self, group: &Group) -> Result<()> {
        match self {
            OmegaSpec::ZeroSumLength(l) | OmegaSpec::Minimal(Some(l)) | OmegaSpec::NotMinimal(Some(l)) => {
                validate_lengths(l)
            }
            OmegaSpec::Minimal(None) | OmegaSpec::NotMinimal(None) => Ok(()),
            OmegaSpec::Explicit(members) => members.iter().try_for_each(|m| check_in_b(group, m)),
            OmegaSpec::Support { allowed, of } => {
                if allowed & !group.full_mask() != 0 {
                    return Err(Error::Schema("support mentions elements outside the group".into()));
                }
                of.validate(group)
            }
            OmegaSpec::IndexOne => {
                if group.is_cyclic() {
                    Ok(())
                } else {
                    Err(Error::NotCyclic(group.rank()))
                }
            }
            OmegaSpec::Union(children) => children.iter().try_for_each(|c| c.validate(group)),
            OmegaSpec::Difference { from, remove } => {
                remove.iter().try_for_each(|m| check_in_b(group, m))?;
                from.validate(group)
            }
        }
    }

    /// Only explicit lists at the leaves.
    fn is_explicit_only(&self) -> bool {
        match self {
            OmegaSpec::Explicit(_) => true,
            OmegaSpec::Support { of, .. } => of.is_explicit_only(),
            OmegaSpec::Union(children) => children.iter().all(OmegaSpec::is_explicit_only),
            OmegaSpec::Difference { from, .. } => from.is_explicit_only(),
            _ => false,
        }
    }

    pub fn to_json(&self, group: &Group) -> Value {
        json::to_json(self, group)
    }

    pub fn from_json(value: &Value, group: &Group) -> Result<OmegaSpec> {
        let spec = json::from_json(value, group)?;
        spec.validate(group)?;
        Ok(spec)
    }
}

fn validate_lengths(l: &LengthSet) -> Result<()> {
    match l {
        LengthSet::Finite(s) if s.contains(&0) => Err(Error::Schema("lengths must be at least 1".into())),
        LengthSet::Interval(lo, hi) if *lo == 0 || lo > hi => {
            Err(Error::Schema(format!("bad length interval [{lo}, {hi}]")))
        }
        _ => Ok(()),
    }
}

fn normalize_members(members: impl IntoIterator<Item = SequenceForm>) -> Vec<SequenceForm> {
    let set: BTreeSet<SequenceForm> = members.into_iter().collect();
    let mut v: Vec<SequenceForm> = set.into_iter().collect();
    v.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.term_cmp(b)));
    v
}

fn check_in_b(group: &Group, form: &SequenceForm) -> Result<()> {
    if form.is_empty() || !is_zero_sum(form, group) {
        return Err(Error::NotInB(render_form(form, group)));
    }
    Ok(())
}

/// `B ∈ Ω` by structural recursion.
pub fn member(spec: &OmegaSpec, b: &SequenceForm, group: &Group) -> Result<bool> {
    if b.is_empty() {
        return Ok(false);
    }
    let len = b.len() as u64;
    Ok(match spec {
        OmegaSpec::ZeroSumLength(l) => l.contains(len) && is_zero_sum(b, group),
        OmegaSpec::Minimal(l) => {
            l.as_ref().is_none_or(|l| l.contains(len)) && is_minimal_zero_sum(b, group)
        }
        OmegaSpec::NotMinimal(l) => {
            l.as_ref().is_none_or(|l| l.contains(len))
                && is_zero_sum(b, group)
                && !is_minimal_zero_sum(b, group)
        }
        OmegaSpec::Explicit(members) => members.contains(b),
        OmegaSpec::Support { allowed, of } => {
            b.support_mask() & !allowed == 0 && member(of, b, group)?
        }
        OmegaSpec::IndexOne => is_index_one(b, group)?,
        OmegaSpec::Union(children) => {
            for c in children {
                if member(c, b, group)? {
                    return Ok(true);
                }
            }
            false
        }
        OmegaSpec::Difference { from, remove } => !remove.contains(b) && member(from, b, group)?,
    })
}

/// Minimal zero-sum of index 1. The singleton `0` counts as index 1 (its
/// only term is represented by `n`).
fn is_index_one(b: &SequenceForm, group: &Group) -> Result<bool> {
    if !group.is_cyclic() {
        return Err(Error::NotCyclic(group.rank()));
    }
    if *b == SequenceForm::power(group.zero(), 1) {
        return Ok(true);
    }
    if !is_minimal_zero_sum(b, group) {
        return Ok(false);
    }
    Ok(*index_of(b, group)?.numer() == *index_of(b, group)?.denom())
}

/// Some nonempty sub-form of `S` is a member of Ω.
///
/// Unions split into their children and supports restrict `S`. Length-only
/// families use the subset-sum kernels, explicit lists a containment scan, and
/// a difference of a length family with an explicit list compares sub-form
/// counts. Everything else enumerates the zero-sum sub-forms of `S`, which
/// may exceed `limit`.
pub fn has_subsequence_in(spec: &OmegaSpec, form: &SequenceForm, group: &Group, limit: u64) -> Result<bool> {
    match spec {
        OmegaSpec::ZeroSumLength(l) => Ok(has_zero_sum_with_length(form, group, l)),
        OmegaSpec::Minimal(None) => Ok(has_zero_sum(form, group)),
        OmegaSpec::Minimal(Some(l)) if l.is_downward_closed() => {
            // A zero-sum sub-form of length ≤ ℓ contains a minimal one.
            Ok(has_zero_sum_with_length(form, group, l))
        }
        OmegaSpec::NotMinimal(None) => {
            // T ⊆ S non-minimal zero-sum  ⇔  S has two disjoint zero-sum parts.
            let mut dp = PairDp::new(group);
            for g in form.terms() {
                dp.adjoin(group, g);
            }
            Ok(dp.has_pair())
        }
        OmegaSpec::Explicit(members) => Ok(members.iter().any(|m| is_subsequence(m, form))),
        OmegaSpec::Support { allowed, of } => {
            has_subsequence_in(of, &form.restrict(*allowed), group, limit)
        }
        OmegaSpec::Union(children) => {
            for c in children {
                if has_subsequence_in(c, form, group, limit)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        OmegaSpec::Difference { from, remove } => match from.as_ref() {
            OmegaSpec::ZeroSumLength(l) => {
                let present = remove
                    .iter()
                    .filter(|b| l.contains(b.len() as u64) && is_subsequence(b, form))
                    .count() as u32;
                let mut dp = CountDp::new(group, l.max().map(|m| m as usize), present + 1);
                for g in form.terms() {
                    dp.adjoin(group, g);
                }
                Ok(dp.nonempty_zero_sum(|len| l.contains(len as u64)) > present)
            }
            _ => has_subsequence_in_by_enumeration(spec, form, group, limit),
        },
        _ => has_subsequence_in_by_enumeration(spec, form, group, limit),
    }
}

fn has_zero_sum_with_length(form: &SequenceForm, group: &Group, lengths: &LengthSet) -> bool {
    match lengths.max() {
        None => has_zero_sum(form, group),
        Some(max) => {
            let dp = length_dp(form, group, Some(max as usize));
            (1..=max as usize).any(|l| lengths.contains(l as u64) && dp.zero_at(l))
        }
    }
}

/// Reference route: enumerate every zero-sum sub-form and test membership.
pub fn has_subsequence_in_by_enumeration(
    spec: &OmegaSpec,
    form: &SequenceForm,
    group: &Group,
    limit: u64,
) -> Result<bool> {
    for t in enumerate_zero_sum_subforms(form, group, limit)? {
        if member(spec, &t, group)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Admissible `k` with `g^{k·ord(g)} ∈ Ω`: a finite set plus an optional
/// tail `k ≥ from`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Powers {
    finite: BTreeSet<u64>,
    from: Option<u64>,
}

impl Powers {
    fn tail(from: u64) -> Powers {
        Powers {
            finite: BTreeSet::new(),
            from: Some(from),
        }
    }

    fn from_lengths(lengths: &LengthSet, ord: u64, min_k: u64) -> Powers {
        match lengths {
            LengthSet::All => Powers::tail(min_k),
            LengthSet::Finite(s) => Powers {
                finite: s
                    .iter()
                    .filter(|&&l| l % ord == 0 && l / ord >= min_k)
                    .map(|&l| l / ord)
                    .collect(),
                from: None,
            },
            LengthSet::Interval(lo, hi) => Powers {
                finite: (lo.div_ceil(ord).max(min_k)..=hi / ord).collect(),
                from: None,
            },
        }
    }

    fn union(mut self, other: Powers) -> Powers {
        self.finite.extend(other.finite);
        self.from = match (self.from, other.from) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        if let Some(f) = self.from {
            self.finite.retain(|&k| k < f);
        }
        self
    }

    fn intersect_k(self, keep: impl Fn(u64) -> bool) -> Powers {
        Powers {
            finite: self.finite.into_iter().filter(|&k| keep(k)).collect(),
            from: self.from,
        }
    }

    fn minus(mut self, removed: &BTreeSet<u64>) -> Powers {
        if let Some(f) = self.from {
            if let Some(&top) = removed.iter().next_back() {
                if top >= f {
                    self.finite.extend(f..=top);
                    self.from = Some(top + 1);
                }
            }
        }
        self.finite.retain(|k| !removed.contains(k));
        self
    }

    fn min(&self) -> Option<u64> {
        match (self.finite.first(), self.from) {
            (Some(&a), Some(b)) => Some(a.min(b)),
            (Some(&a), None) => Some(a),
            (None, b) => b,
        }
    }
}

fn power_exponents(members: &[SequenceForm], g: Element, ord: u64) -> BTreeSet<u64> {
    members
        .iter()
        .filter_map(|m| match m.entries() {
            [(e, mult)] if *e == g && *mult as u64 % ord == 0 => Some(*mult as u64 / ord),
            _ => None,
        })
        .collect()
}

fn powers_of(spec: &OmegaSpec, group: &Group, g: Element) -> Powers {
    let ord = group.order_of(g) as u64;
    match spec {
        OmegaSpec::ZeroSumLength(l) => Powers::from_lengths(l, ord, 1),
        // g^{ord} is minimal; g^{k·ord} with k ≥ 2 is not.
        OmegaSpec::Minimal(l) => {
            let ok = l.as_ref().is_none_or(|l| l.contains(ord));
            Powers {
                finite: if ok { BTreeSet::from([1]) } else { BTreeSet::new() },
                from: None,
            }
        }
        OmegaSpec::NotMinimal(None) => Powers::tail(2),
        OmegaSpec::NotMinimal(Some(l)) => Powers::from_lengths(l, ord, 2),
        OmegaSpec::Explicit(members) => Powers {
            finite: power_exponents(members, g, ord),
            from: None,
        },
        OmegaSpec::Support { allowed, of } => {
            if allowed & g.bit() != 0 {
                powers_of(of, group, g)
            } else {
                Powers::default()
            }
        }
        // Over C_n, g^{ord(g)} has index 1, as does the singleton 0.
        OmegaSpec::IndexOne => Powers {
            finite: BTreeSet::from([1]),
            from: None,
        },
        OmegaSpec::Union(children) => children
            .iter()
            .fold(Powers::default(), |acc, c| acc.union(powers_of(c, group, g))),
        OmegaSpec::Difference { from, remove } => {
            powers_of(from, group, g).minus(&power_exponents(remove, g, ord))
        }
    }
    .intersect_k(|k| k >= 1)
}

/// Outcome of the finiteness criterion: `d_Ω(G) < ∞` iff every `g` has some
/// power `g^{k·ord(g)}` in Ω.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FinitenessReport {
    Finite {
        /// Least `k_g` per element, in element order.
        k: Vec<(Element, u64)>,
        /// `1 + Σ (k_g·ord(g) − 1)`.
        bound: u64,
    },
    Infinite {
        witness: Element,
    },
    /// Some least `k_g` exceeds the search cap `k_max`.
    CapExceeded {
        witness: Element,
        k_max: u64,
    },
}

impl FinitenessReport {
    pub fn is_finite(&self) -> bool {
        matches!(self, FinitenessReport::Finite { .. })
    }

    /// Safe multiplicity caps `k_g·ord(g)`.
    pub fn caps(&self, group: &Group) -> Option<Vec<u32>> {
        match self {
            FinitenessReport::Finite { k, .. } => Some(
                k.iter()
                    .map(|&(g, k)| (k * group.order_of(g) as u64) as u32)
                    .collect(),
            ),
            _ => None,
        }
    }

    pub fn to_json(&self, group: &Group) -> Value {
        match self {
            FinitenessReport::Finite { k, bound } => json!({
                "verdict": "finite",
                "k": k.iter().map(|&(g, k)| json!({"element": group.format_element(g), "k": k})).collect::<Vec<_>>(),
                "bound": bound,
            }),
            FinitenessReport::Infinite { witness } => json!({
                "verdict": "infinite",
                "witness": group.format_element(*witness),
            }),
            FinitenessReport::CapExceeded { witness, k_max } => json!({
                "verdict": "unknown",
                "witness": group.format_element(*witness),
                "kMax": k_max,
            }),
        }
    }
}

/// Default per-element search cap: `exp(G)·|G|`.
pub fn default_k_max(group: &Group) -> u64 {
    group.exponent() as u64 * group.order() as u64
}

/// Least `k_g ≤ k_max` with `g^{k_g·ord(g)} ∈ Ω` for every `g`.
///
/// The admissible `k` are derived from the shape of the spec, so an empty
/// set is an exact proof of `d_Ω(G) = ∞`.
pub fn finiteness_check(spec: &OmegaSpec, group: &Group, k_max: u64) -> FinitenessReport {
    let mut ks = Vec::with_capacity(group.order());
    for g in group.elements() {
        match powers_of(spec, group, g).min() {
            None => return FinitenessReport::Infinite { witness: g },
            Some(k) if k > k_max => return FinitenessReport::CapExceeded { witness: g, k_max },
            Some(k) => ks.push((g, k)),
        }
    }
    let bound = 1 + ks
        .iter()
        .map(|&(g, k)| k * group.order_of(g) as u64 - 1)
        .sum::<u64>();
    FinitenessReport::Finite { k: ks, bound }
}

/// Calls `visit` on every zero-sum form of length `1..=max_len`.
fn for_each_zero_sum_form(group: &Group, max_len: usize, visit: &mut dyn FnMut(&SequenceForm) -> Result<()>) -> Result<()> {
    fn rec(
        group: &Group,
        index: usize,
        remaining: usize,
        sum: Element,
        counts: &mut Vec<u32>,
        visit: &mut dyn FnMut(&SequenceForm) -> Result<()>,
    ) -> Result<()> {
        if index == group.order() {
            if sum.is_zero() && counts.iter().any(|&c| c > 0) {
                visit(&SequenceForm::from_counts(counts))?;
            }
            return Ok(());
        }
        let g = Element::from_index(index);
        let mut s = sum;
        for m in 0..=remaining {
            counts[index] = m as u32;
            rec(group, index + 1, remaining - m, s, counts, visit)?;
            s = group.add(s, g);
        }
        counts[index] = 0;
        Ok(())
    }
    let mut counts = vec![0u32; group.order()];
    rec(group, 0, max_len, group.zero(), &mut counts, visit)
}

/// Every member of length at most `t`, ordered by length then term list.
pub fn enumerate_members_up_to(spec: &OmegaSpec, group: &Group, t: usize, limit: u64) -> Result<Vec<SequenceForm>> {
    let mut out = Vec::new();
    if spec.is_explicit_only() {
        let mut candidates = BTreeSet::new();
        collect_explicit(spec, &mut candidates);
        for c in candidates {
            if c.len() <= t && member(spec, &c, group)? {
                out.push(c);
            }
        }
    } else {
        let total = forms_of_length(group.order() + 1, t);
        if total > limit as u128 {
            return Err(Error::BudgetExceeded(format!(
                "{total} forms of length ≤ {t} exceed the enumeration limit {limit}"
            )));
        }
        for_each_zero_sum_form(group, t, &mut |f| {
            if member(spec, f, group)? {
                out.push(f.clone());
            }
            Ok(())
        })?;
    }
    Ok(normalize_members(out))
}

fn collect_explicit(spec: &OmegaSpec, out: &mut BTreeSet<SequenceForm>) {
    match spec {
        OmegaSpec::Explicit(m) => out.extend(m.iter().cloned()),
        OmegaSpec::Support { of, .. } => collect_explicit(of, out),
        OmegaSpec::Union(children) => children.iter().for_each(|c| collect_explicit(c, out)),
        OmegaSpec::Difference { from, .. } => collect_explicit(from, out),
        _ => {}
    }
}

/// All zero-sum forms of length `1..=max_len`, ordered by length then term list.
pub fn zero_sum_forms_up_to(group: &Group, max_len: usize, limit: u64) -> Result<Vec<SequenceForm>> {
    enumerate_members_up_to(&OmegaSpec::all_zero_sum(), group, max_len, limit)
}

/// Rendered member list, for JSON witnesses.
pub fn render_members(members: &[SequenceForm], group: &Group) -> Vec<String> {
    members.iter().map(|m| render_form(m, group)).collect()
}

#[cfg(test)]
mod tests;
