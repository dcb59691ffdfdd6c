//! `Vol(G)`: the values `d_Ω(G)` attained by weak-regular Ω.
//!
//! A weak-regular Ω with finite `d_Ω` contains every `g^{ord(g)}`, so its
//! Ω-free forms live in the box `v_g ≤ ord(g) − 1`. For a box form `T` of
//! length `t − 1` the largest weak-regular Ω avoiding `T` is
//! `W_{≤t} ∖ Sub0(T)`, and it has `d = t` iff every box form of length `t`
//! has a zero-sum sub-form that is not a sub-form of `T`. Searching over `T`
//! therefore decides membership of `t` exactly; cheaper constructions run
//! first.

use std::collections::BTreeMap;
use std::ops::ControlFlow;

use serde_json::{json, Value};

use super::antichain_reduce;
use crate::dp::SumDp;
use crate::error::{Error, Result};
use crate::group::{Element, Group};
use crate::invariants::{davenport, eta};
use crate::omega::{enumerate_members_up_to, render_members, LengthSet, OmegaProperty, OmegaSpec};
use crate::search::{threshold, SearchOptions};
use crate::sequence::{is_subsequence, is_weak_regular, is_zero_sum, render_form, SequenceForm};

/// Visits forms of length `len` with `v_g ≤ caps[g]`, pruning every branch on
/// which `keep` fails (`keep` must be closed under taking sub-forms).
/// Larger multiplicities of earlier elements come first.
fn for_each_in_box(
    group: &Group,
    caps: &[u32],
    len: usize,
    keep: &dyn Fn(&SequenceForm) -> bool,
    nodes: &mut u64,
    max_nodes: u64,
    visit: &mut dyn FnMut(&SequenceForm) -> Result<ControlFlow<()>>,
) -> Result<()> {
    let n = group.order();
    let mut suffix = vec![0usize; n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1] + caps[i] as usize;
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        caps: &[u32],
        suffix: &[usize],
        idx: usize,
        remaining: usize,
        s: &SequenceForm,
        keep: &dyn Fn(&SequenceForm) -> bool,
        nodes: &mut u64,
        max_nodes: u64,
        visit: &mut dyn FnMut(&SequenceForm) -> Result<ControlFlow<()>>,
    ) -> Result<ControlFlow<()>> {
        if remaining == 0 {
            return visit(s);
        }
        if suffix[idx] < remaining {
            return Ok(ControlFlow::Continue(()));
        }
        *nodes += 1;
        if *nodes > max_nodes {
            return Err(Error::BudgetExceeded(format!("box search exceeded {max_nodes} nodes")));
        }
        let g = Element::from_index(idx);
        for m in (0..=(caps[idx] as usize).min(remaining)).rev() {
            let mut next = s.clone();
            if m > 0 {
                next.push(g, m as u32);
                if !keep(&next) {
                    continue;
                }
            }
            if rec(caps, suffix, idx + 1, remaining - m, &next, keep, nodes, max_nodes, visit)?.is_break() {
                return Ok(ControlFlow::Break(()));
            }
        }
        Ok(ControlFlow::Continue(()))
    }
    let _ = rec(caps, &suffix, 0, len, &SequenceForm::empty(), keep, nodes, max_nodes, visit)?;
    Ok(())
}

fn find_in_box(
    group: &Group,
    caps: &[u32],
    len: usize,
    keep: &dyn Fn(&SequenceForm) -> bool,
    nodes: &mut u64,
    max_nodes: u64,
) -> Result<Option<SequenceForm>> {
    let mut found = None;
    for_each_in_box(group, caps, len, keep, nodes, max_nodes, &mut |s| {
        found = Some(s.clone());
        Ok(ControlFlow::Break(()))
    })?;
    Ok(found)
}

fn below_order_caps(group: &Group) -> Vec<u32> {
    group.elements().map(|g| group.order_of(g) - 1).collect()
}

fn free_of(members: &[SequenceForm], s: &SequenceForm) -> bool {
    !members.iter().any(|m| is_subsequence(m, s))
}

fn explicit_d(members: &[SequenceForm], group: &Group, options: &SearchOptions) -> Result<Option<u64>> {
    let spec = OmegaSpec::explicit(group, members.iter().cloned())?;
    Ok(threshold(&OmegaProperty::new(spec, group.clone())?, options)?.value())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RegularizeOutcome {
    Certified {
        members: Vec<SequenceForm>,
        /// Ω-free, length `t − 1`, `v_g ≤ ord(g) − 1`.
        certificate: SequenceForm,
        replacements: Vec<(SequenceForm, SequenceForm)>,
    },
    Failed {
        reason: String,
    },
}

/// Replaces members with some `v_g ≥ ord(g) + 1` by `g^{ord(g)}`, keeping
/// `d = t`.
///
/// Needs an Ω-free form of length `t − 1` with every `v_g ≤ ord(g) − 1`: it
/// stays free after each replacement, and every replaced member contains its
/// replacement, so covering is preserved.
pub fn weak_regularize(members: &[SequenceForm], t: u64, group: &Group, options: &SearchOptions) -> Result<RegularizeOutcome> {
    if t == 0 {
        return Err(Error::Precondition("t must be at least 1".into()));
    }
    let mut current = members.to_vec();
    match explicit_d(&current, group, options)? {
        Some(d) if d == t => {}
        other => {
            return Err(Error::Precondition(format!(
                "members give d = {other:?}, not {t}"
            )))
        }
    }
    let mut nodes = 0;
    let certificate = match find_in_box(
        group,
        &below_order_caps(group),
        t as usize - 1,
        &|s| free_of(&current, s),
        &mut nodes,
        options.max_calls,
    ) {
        Ok(Some(c)) => c,
        Ok(None) => {
            return Ok(RegularizeOutcome::Failed {
                reason: format!("no Ω-free form of length {} with v_g ≤ ord(g) − 1", t - 1),
            })
        }
        Err(e) if e.is_budget() => return Ok(RegularizeOutcome::Failed { reason: e.to_string() }),
        Err(e) => return Err(e),
    };
    let mut replacements = Vec::new();
    for m in current.iter_mut() {
        if let Some(&(g, _)) = m.entries().iter().find(|&&(g, v)| v > group.order_of(g)) {
            let to = SequenceForm::power(g, group.order_of(g));
            replacements.push((m.clone(), to.clone()));
            *m = to;
        }
    }
    current.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.term_cmp(b)));
    current.dedup();
    debug_assert!(current.iter().all(|m| is_weak_regular(m, group)));
    if !free_of(&current, &certificate) || explicit_d(&current, group, options)? != Some(t) {
        return Ok(RegularizeOutcome::Failed {
            reason: "repaired family does not re-verify".into(),
        });
    }
    Ok(RegularizeOutcome::Certified {
        members: current,
        certificate,
        replacements,
    })
}

/// Every zero-sum sub-form of `f` is a sub-form of `t`.
fn uncovered(group: &Group, f: &SequenceForm, t: &SequenceForm) -> bool {
    for &(g, v) in f.entries() {
        let m = t.multiplicity(g);
        if v <= m {
            continue;
        }
        // A zero-sum B ⊆ f with v_g(B) ≥ m + 1 exists iff −(m+1)·g is a
        // subsequence sum (possibly empty) of f with m + 1 copies of g removed.
        let mut dp = SumDp::new();
        for &(h, w) in f.entries() {
            let copies = if h == g { w - (m + 1) } else { w };
            for _ in 0..copies.min(group.order_of(h)) {
                dp.adjoin(group, h);
            }
        }
        let target = group.neg(group.mul(m as u64 + 1, g));
        if (dp.reachable() | 1) & target.bit() != 0 {
            return false;
        }
    }
    true
}

/// Weak-regular zero-sum forms of length `≤ t` that are not sub-forms of
/// `cert`, reduced to an antichain.
fn maximal_family(group: &Group, cert: &SequenceForm, t: usize, limit: u64) -> Result<Vec<SequenceForm>> {
    let caps: Vec<u32> = group.elements().map(|g| group.order_of(g)).collect();
    let mut out = Vec::new();
    let mut nodes = 0;
    for len in 1..=t {
        for_each_in_box(group, &caps, len, &|_| true, &mut nodes, limit, &mut |s| {
            if is_zero_sum(s, group) && !is_subsequence(s, cert) && free_of(&out, s) {
                out.push(s.clone());
            }
            Ok(ControlFlow::Continue(()))
        })?;
    }
    Ok(antichain_reduce(&out))
}

/// Exact route: a box form `T` of length `t − 1` whose maximal family has
/// `d = t`, with that family.
fn exact_search(group: &Group, t: u64, nodes: &mut u64, max_nodes: u64) -> Result<Option<(SequenceForm, Vec<SequenceForm>)>> {
    let caps = below_order_caps(group);
    let mut found = None;
    let mut inner_nodes = 0u64;
    for_each_in_box(group, &caps, t as usize - 1, &|_| true, nodes, max_nodes, &mut |cert| {
        let bad = find_in_box(
            group,
            &caps,
            t as usize,
            &|f| uncovered(group, f, cert),
            &mut inner_nodes,
            max_nodes,
        )?;
        if bad.is_none() {
            found = Some(cert.clone());
            return Ok(ControlFlow::Break(()));
        }
        Ok(ControlFlow::Continue(()))
    })?;
    *nodes += inner_nodes;
    match found {
        Some(cert) => {
            let family = maximal_family(group, &cert, t as usize, max_nodes)?;
            Ok(Some((cert, family)))
        }
        None => Ok(None),
    }
}

/// One certified value of `Vol(G)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VolEntry {
    pub t: u64,
    pub provenance: String,
    /// Weak-regular members of length `≤ t`.
    pub members: Vec<SequenceForm>,
    /// Ω-free, length `t − 1`.
    pub certificate: SequenceForm,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VolReport {
    pub interval: (u64, u64),
    pub certified: BTreeMap<u64, VolEntry>,
    /// Decided not in `Vol(G)` by the exact route.
    pub excluded: Vec<u64>,
    /// Undecided values with the reason.
    pub residue: Vec<(u64, String)>,
}

impl VolReport {
    pub fn to_json(&self, group: &Group) -> Value {
        json!({
            "interval": [self.interval.0, self.interval.1],
            "certified": self.certified.values().map(|e| json!({
                "t": e.t,
                "provenance": e.provenance,
                "omega": { "explicit": render_members(&e.members, group) },
                "certificate": render_form(&e.certificate, group),
            })).collect::<Vec<_>>(),
            "excluded": self.excluded,
            "residue": self.residue.iter().map(|(t, r)| json!({ "t": t, "reason": r })).collect::<Vec<_>>(),
        })
    }

    /// Every value of the interval is certified.
    pub fn full(&self) -> bool {
        (self.interval.0..=self.interval.1).all(|t| self.certified.contains_key(&t))
    }
}

/// Checks an entry from scratch: members weak-regular and zero-sum, the
/// certificate free and in the box, and `d = t`.
pub fn verify_entry(entry: &VolEntry, group: &Group, options: &SearchOptions) -> Result<bool> {
    Ok(entry.members.iter().all(|m| is_weak_regular(m, group) && is_zero_sum(m, group))
        && entry.certificate.len() as u64 + 1 == entry.t
        && free_of(&entry.members, &entry.certificate)
        && explicit_d(&entry.members, group, options)? == Some(entry.t))
}

/// Options for [`vol_scan`].
#[derive(Clone, Debug)]
pub struct VolOptions {
    pub search: SearchOptions,
    /// Values to decide; `None` means the whole interval.
    pub targets: Option<Vec<u64>>,
    /// Most supports `G₀ ⊆ G ∖ {0}` tried in the `Ω_{L,G₀}` family.
    pub max_supports: usize,
    /// Node budget for the exact route, per value.
    pub exact_nodes: u64,
    pub limit: u64,
}

impl Default for VolOptions {
    fn default() -> Self {
        VolOptions {
            search: SearchOptions::default(),
            targets: None,
            max_supports: 256,
            exact_nodes: 2_000_000,
            limit: 2_000_000,
        }
    }
}

fn powers_of_order(group: &Group) -> Vec<SequenceForm> {
    group
        .elements()
        .map(|g| SequenceForm::power(g, group.order_of(g)))
        .collect()
}

struct Scan<'a> {
    group: &'a Group,
    options: &'a VolOptions,
    wanted: Vec<u64>,
    report: VolReport,
}

impl Scan<'_> {
    fn pending(&self) -> bool {
        self.wanted.iter().any(|t| !self.report.certified.contains_key(t))
    }

    fn offer(&mut self, provenance: &str, members: Vec<SequenceForm>, certificate: SequenceForm) -> Result<()> {
        let t = certificate.len() as u64 + 1;
        if !self.wanted.contains(&t) || self.report.certified.contains_key(&t) {
            return Ok(());
        }
        let entry = VolEntry {
            t,
            provenance: provenance.to_string(),
            members,
            certificate,
        };
        if verify_entry(&entry, self.group, &self.options.search)? {
            self.report.certified.insert(t, entry);
        }
        Ok(())
    }

    /// Runs a spec whose members are weak-regular and at most `max_len` long.
    fn offer_spec(&mut self, provenance: &str, spec: OmegaSpec, max_len: usize) -> Result<()> {
        let r = threshold(&OmegaProperty::new(spec.clone(), self.group.clone())?, &self.options.search)?;
        let (Some(t), Some(cert)) = (r.value(), r.certificate) else {
            return Ok(());
        };
        if !self.wanted.contains(&t) || self.report.certified.contains_key(&t) {
            return Ok(());
        }
        let members = enumerate_members_up_to(&spec, self.group, max_len.min(t as usize), self.options.limit)?;
        if cert.entries().iter().all(|&(g, v)| v < self.group.order_of(g)) {
            self.offer(provenance, members, cert)
        } else {
            Ok(())
        }
    }

    fn offer_repaired(&mut self, provenance: &str, members: &[SequenceForm], t: u64) -> Result<()> {
        if !self.wanted.contains(&t) || self.report.certified.contains_key(&t) {
            return Ok(());
        }
        match weak_regularize(members, t, self.group, &self.options.search) {
            Ok(RegularizeOutcome::Certified {
                members, certificate, ..
            }) => self.offer(provenance, members, certificate),
            Ok(RegularizeOutcome::Failed { .. }) => Ok(()),
            Err(e) if e.is_budget() || matches!(e, Error::Precondition(_)) => Ok(()),
            Err(e) => Err(e),
        }
    }
}

/// Certifies values of `[D(G), 1 + Σ(ord(g) − 1)]` into `Vol(G)`.
///
/// Routes, in order: weak-regular repair of the `D` and `η` families, the
/// short-minimal family `{S ∈ A(G) : |S| < D} ∪ {g^{ord(g)}}`, the family
/// `Ω_{L,G₀}`, repair of the zero-padding family, and finally the exact
/// search, which either certifies `t` or excludes it.
pub fn vol_scan(group: &Group, options: &VolOptions) -> Result<VolReport> {
    let search = &options.search;
    let not_computed = |what: &str| Error::BudgetExceeded(format!("{what} not computed"));
    let d = davenport(group, search)?.value().ok_or_else(|| not_computed("D(G)"))?;
    let eta_value = eta(group, search)?.value().ok_or_else(|| not_computed("eta(G)"))?;
    let hi = group.total_budget();
    let wanted: Vec<u64> = match &options.targets {
        Some(ts) => ts.iter().copied().filter(|t| (d..=hi).contains(t)).collect(),
        None => (d..=hi).collect(),
    };
    let mut scan = Scan {
        group,
        options,
        wanted,
        report: VolReport {
            interval: (d, hi),
            certified: BTreeMap::new(),
            excluded: Vec::new(),
            residue: Vec::new(),
        },
    };
    let limit = options.limit;

    let all = enumerate_members_up_to(&OmegaSpec::all_zero_sum(), group, d as usize, limit)?;
    scan.offer_repaired("davenport", &all, d)?;
    let short = OmegaSpec::ZeroSumLength(LengthSet::Interval(1, group.exponent() as u64));
    let short_members = enumerate_members_up_to(&short, group, eta_value as usize, limit)?;
    scan.offer_repaired("eta", &short_members, eta_value)?;

    let powers = OmegaSpec::explicit(group, powers_of_order(group))?;
    if d >= 2 {
        let spec = OmegaSpec::Union(vec![
            OmegaSpec::Minimal(Some(LengthSet::Interval(1, d - 1))),
            powers.clone(),
        ]);
        scan.offer_spec("short-minimal", spec, d as usize)?;
    }

    let nonzero: Vec<Element> = group.nonzero_elements().collect();
    let subsets = 1usize.checked_shl(nonzero.len() as u32).unwrap_or(usize::MAX);
    'family: for mask in (0..subsets.min(options.max_supports)).rev() {
        let support: Vec<Element> = nonzero
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &g)| g)
            .chain(std::iter::once(group.zero()))
            .collect();
        for l in 1..=d {
            if !scan.pending() {
                break 'family;
            }
            let spec = OmegaSpec::Union(vec![
                OmegaSpec::support(support.iter().copied(), OmegaSpec::Minimal(Some(LengthSet::Interval(1, l)))),
                powers.clone(),
            ]);
            scan.offer_spec(&format!("family L={l} G0={mask:#b}"), spec, d as usize)?;
        }
    }

    for t in scan.wanted.clone() {
        if scan.report.certified.contains_key(&t) {
            continue;
        }
        let mut padded = vec![SequenceForm::power(group.zero(), (t - d + 1) as u32)];
        let nz = OmegaSpec::support(nonzero.iter().copied(), OmegaSpec::all_zero_sum());
        if let Ok(m) = enumerate_members_up_to(&nz, group, t as usize, limit) {
            padded.extend(m);
            scan.offer_repaired("zero-padding repair", &padded, t)?;
        }
    }

    for t in scan.wanted.clone() {
        if scan.report.certified.contains_key(&t) {
            continue;
        }
        let mut nodes = 0;
        match exact_search(group, t, &mut nodes, options.exact_nodes) {
            Ok(Some((cert, family))) => scan.offer("exact search", family, cert)?,
            Ok(None) => scan.report.excluded.push(t),
            Err(e) if e.is_budget() => scan.report.residue.push((t, e.to_string())),
            Err(e) => return Err(e),
        }
        if !scan.report.certified.contains_key(&t)
            && !scan.report.excluded.contains(&t)
            && !scan.report.residue.iter().any(|(r, _)| *r == t)
        {
            scan.report.residue.push((t, "exact witness failed re-verification".into()));
        }
    }
    Ok(scan.report)
}
