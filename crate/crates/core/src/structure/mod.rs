//! Structure of the families Ω: minimality, essential sequences, `q(G)`,
//! `Vol(G)` and the standard constructions.
//!
//! Throughout, only members of length at most `t` matter for `d_Ω = t`: a
//! length-`t` form only contains members of length `≤ t`, and a free form of
//! length `t − 1` only has to avoid members of length `≤ t − 1`. So
//! `d_Ω = t` iff `d_{Ω ∩ Z_{≤t}} = t`, where `Z_{≤t}` is the set of nonempty
//! zero-sum forms of length `≤ t`.

mod essential;
mod minimal;
mod vol;

pub use essential::{
    is_essential, q_of, verify_not_essential, EssentialSweep, EssentialVerdict, QOutcome, QReport, QStep,
};
pub use minimal::{find_pin, is_minimal_omega, pins, MinimalityVerdict};
pub use vol::{verify_entry, vol_scan, weak_regularize, RegularizeOutcome, VolEntry, VolOptions, VolReport};

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::group::Group;
use crate::invariants::{d2, davenport};
use crate::omega::{
    enumerate_members_up_to, finiteness_check, render_members, FinitenessReport, OmegaProperty, OmegaSpec,
};
use crate::search::{threshold, SearchOptions, ThresholdResult};
use crate::sequence::{is_subsequence, SequenceForm};

/// Finiteness report and threshold of one Ω.
#[derive(Clone, Debug)]
pub struct OmegaResult {
    pub finiteness: FinitenessReport,
    pub result: ThresholdResult,
}

impl OmegaResult {
    pub fn to_json(&self, group: &Group) -> Value {
        json!({
            "finiteness": self.finiteness.to_json(group),
            "result": self.result.to_json(group),
        })
    }
}

/// `d_Ω(G)`. The finiteness verdict is exact, so an infinite Ω never reaches
/// the search.
pub fn d_omega(spec: &OmegaSpec, group: &Group, options: &SearchOptions) -> Result<OmegaResult> {
    let finiteness = finiteness_check(spec, group, u64::MAX);
    let result = threshold(&OmegaProperty::new(spec.clone(), group.clone())?, options)?;
    Ok(OmegaResult { finiteness, result })
}

/// Drops every member that properly contains another member.
pub fn antichain_reduce(members: &[SequenceForm]) -> Vec<SequenceForm> {
    let mut sorted = members.to_vec();
    sorted.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.term_cmp(b)));
    sorted.dedup();
    let mut kept: Vec<SequenceForm> = Vec::new();
    for m in sorted {
        if !kept.iter().any(|k| is_subsequence(k, &m)) {
            kept.push(m);
        }
    }
    kept
}

/// The two disjoint families realizing `k ≥ D₂(G)`.
#[derive(Clone, Debug)]
pub struct TheoremD2Report {
    pub k: u64,
    pub omega: OmegaSpec,
    pub omega_prime: OmegaSpec,
    pub members: Vec<SequenceForm>,
    pub members_prime: Vec<SequenceForm>,
    /// No common member of length `≤ k`.
    pub disjoint: bool,
    pub d: Option<u64>,
    pub d_prime: Option<u64>,
}

impl TheoremD2Report {
    pub fn holds(&self) -> bool {
        self.disjoint && self.d == Some(self.k) && self.d_prime == Some(self.k)
    }

    pub fn to_json(&self, group: &Group) -> Value {
        json!({
            "k": self.k,
            "omega": self.omega.to_json(group),
            "omegaPrime": self.omega_prime.to_json(group),
            "members": render_members(&self.members, group),
            "membersPrime": render_members(&self.members_prime, group),
            "disjoint": self.disjoint,
            "d": self.d,
            "dPrime": self.d_prime,
        })
    }
}

/// `Ω = {0^{k−D+1}} ∪ A(G∖{0})` and `Ω′ = {0^{k−D₂+1}} ∪ (B(G∖{0}) ∖ A(G∖{0}))`.
pub fn theorem_d2_construct(group: &Group, k: u64, options: &SearchOptions, limit: u64) -> Result<TheoremD2Report> {
    if group.order() == 1 {
        return Err(Error::Precondition("the construction needs a nontrivial group".into()));
    }
    let not_computed = |what: &str| Error::BudgetExceeded(format!("{what} not computed"));
    let d = davenport(group, options)?.value().ok_or_else(|| not_computed("D(G)"))?;
    let dd = d2(group, options)?.value().ok_or_else(|| not_computed("D2(G)"))?;
    if k < dd {
        return Err(Error::Precondition(format!("k = {k} is below D2(G) = {dd}")));
    }
    let zero = group.zero();
    let nonzero: Vec<_> = group.nonzero_elements().collect();
    let omega = OmegaSpec::Union(vec![
        OmegaSpec::explicit(group, [SequenceForm::power(zero, (k - d + 1) as u32)])?,
        OmegaSpec::support(nonzero.iter().copied(), OmegaSpec::Minimal(None)),
    ]);
    let omega_prime = OmegaSpec::Union(vec![
        OmegaSpec::explicit(group, [SequenceForm::power(zero, (k - dd + 1) as u32)])?,
        OmegaSpec::support(nonzero.iter().copied(), OmegaSpec::NotMinimal(None)),
    ]);
    let members = enumerate_members_up_to(&omega, group, k as usize, limit)?;
    let members_prime = enumerate_members_up_to(&omega_prime, group, k as usize, limit)?;
    let disjoint = !members.iter().any(|m| members_prime.contains(m));
    let d_of = |spec: &OmegaSpec| -> Result<Option<u64>> {
        Ok(threshold(&OmegaProperty::new(spec.clone(), group.clone())?, options)?.value())
    };
    Ok(TheoremD2Report {
        k,
        d: d_of(&omega)?,
        d_prime: d_of(&omega_prime)?,
        omega,
        omega_prime,
        members,
        members_prime,
        disjoint,
    })
}

/// Largest prime accepted by [`lemke_kleitman_check`] by default.
pub const DEFAULT_PRIME_CAP: u64 = 13;

#[derive(Clone, Debug)]
pub struct LemkeKleitmanReport {
    pub p: u64,
    pub index_one: ThresholdResult,
    pub equals_p: Option<bool>,
    /// Minimality of `A(C_p)` with respect to `p`, checked when `d = p`.
    pub minimal_check: Option<MinimalityVerdict>,
}

impl LemkeKleitmanReport {
    pub fn to_json(&self, group: &Group) -> Value {
        json!({
            "p": self.p,
            "dIndexOne": self.index_one.to_json(group),
            "equalsP": self.equals_p,
            "minimalityOfA": self.minimal_check.as_ref().map(|v| v.to_json(group)),
        })
    }
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

/// `d_Ω(C_p)` for Ω the index-one minimal zero-sum sequences, and the
/// resulting (non-)minimality of `A(C_p)` with respect to `p`.
pub fn lemke_kleitman_check(p: u64, cap: u64, options: &SearchOptions, limit: u64) -> Result<LemkeKleitmanReport> {
    if !is_prime(p) {
        return Err(Error::Precondition(format!("{p} is not prime")));
    }
    if p > cap {
        return Err(Error::Precondition(format!("p = {p} exceeds the configured cap {cap}")));
    }
    let group = Group::cyclic(p)?;
    let index_one = threshold(&OmegaProperty::new(OmegaSpec::IndexOne, group.clone())?, options)?;
    let equals_p = index_one.value().map(|d| d == p);
    let minimal_check = if equals_p == Some(true) {
        Some(is_minimal_omega(&OmegaSpec::Minimal(None), p, &group, options, limit)?)
    } else {
        None
    };
    Ok(LemkeKleitmanReport {
        p,
        index_one,
        equals_p,
        minimal_check,
    })
}
