//! Minimality of Ω with respect to `t = d_Ω(G)`.
//!
//! A member `B` can be dropped without raising `d` iff no length-`t` form
//! contains `B` and no other member. Such a form is a pinning sequence for
//! `B`; Ω is minimal iff every member of length `≤ t` is pinned.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::group::{Element, Group};
use crate::omega::{enumerate_members_up_to, render_members, OmegaProperty, OmegaSpec};
use crate::search::{threshold, SearchOptions, ThresholdResult};
use crate::sequence::{is_subsequence, render_form, SequenceForm};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MinimalityVerdict {
    Minimal {
        /// Each member with its pinning sequence.
        pins: Vec<(SequenceForm, SequenceForm)>,
    },
    NotMinimal {
        /// Every member whose removal keeps `d = t`, in member order.
        removable: Vec<SequenceForm>,
        /// `d` of Ω without the first removable member.
        chain: ThresholdResult,
    },
    Unknown {
        reason: String,
    },
}

impl MinimalityVerdict {
    pub fn is_minimal(&self) -> Option<bool> {
        match self {
            MinimalityVerdict::Minimal { .. } => Some(true),
            MinimalityVerdict::NotMinimal { .. } => Some(false),
            MinimalityVerdict::Unknown { .. } => None,
        }
    }

    pub fn to_json(&self, group: &Group) -> Value {
        match self {
            MinimalityVerdict::Minimal { pins } => json!({
                "verdict": "minimal",
                "pins": pins.iter().map(|(b, s)| json!({
                    "member": render_form(b, group),
                    "pinnedBy": render_form(s, group),
                })).collect::<Vec<_>>(),
            }),
            MinimalityVerdict::NotMinimal { removable, chain } => json!({
                "verdict": "not-minimal",
                "removable": render_form(&removable[0], group),
                "allRemovable": render_members(removable, group),
                "withoutRemovable": chain.to_json(group),
            }),
            MinimalityVerdict::Unknown { reason } => json!({ "verdict": "unknown", "reason": reason }),
        }
    }
}

/// `S` contains `b` and no other member.
pub fn pins(members: &[SequenceForm], b: &SequenceForm, s: &SequenceForm) -> bool {
    is_subsequence(b, s) && !members.iter().any(|m| m != b && is_subsequence(m, s))
}

struct Pinner<'a> {
    group: &'a Group,
    members: &'a [SequenceForm],
    b: &'a SequenceForm,
    nodes: &'a AtomicU64,
    max_nodes: u64,
}

impl Pinner<'_> {
    fn clashes(&self, s: &SequenceForm) -> bool {
        self.members.iter().any(|m| m != self.b && is_subsequence(m, s))
    }

    fn rec(&self, from: usize, remaining: usize, s: &mut SequenceForm) -> Result<bool> {
        if remaining == 0 {
            return Ok(true);
        }
        for i in from..self.group.order() {
            if self.nodes.fetch_add(1, Ordering::Relaxed) >= self.max_nodes {
                return Err(Error::BudgetExceeded(format!(
                    "pinning search exceeded {} nodes",
                    self.max_nodes
                )));
            }
            let g = Element::from_index(i);
            let saved = s.clone();
            s.push(g, 1);
            if !self.clashes(s) && self.rec(i, remaining - 1, s)? {
                return Ok(true);
            }
            *s = saved;
        }
        Ok(false)
    }
}

/// A length-`t` form containing `b` and no other member, if one exists.
pub fn find_pin(
    group: &Group,
    members: &[SequenceForm],
    b: &SequenceForm,
    t: usize,
    nodes: &AtomicU64,
    max_nodes: u64,
) -> Result<Option<SequenceForm>> {
    if b.len() > t {
        return Ok(None);
    }
    let pinner = Pinner {
        group,
        members,
        b,
        nodes,
        max_nodes,
    };
    let mut s = b.clone();
    if pinner.clashes(&s) {
        return Ok(None);
    }
    Ok(pinner.rec(0, t - b.len(), &mut s)?.then_some(s))
}

/// Decides whether Ω is minimal with respect to `t`. Fails when `d_Ω ≠ t`.
pub fn is_minimal_omega(spec: &OmegaSpec, t: u64, group: &Group, options: &SearchOptions, limit: u64) -> Result<MinimalityVerdict> {
    let result = threshold(&OmegaProperty::new(spec.clone(), group.clone())?, options)?;
    match result.value() {
        Some(d) if d == t => {}
        Some(d) => {
            return Err(Error::Precondition(format!(
                "stale precondition: d_Ω = {d}, not {t}"
            )))
        }
        None => {
            return match result.outcome {
                crate::search::Outcome::Unknown { reason } => Ok(MinimalityVerdict::Unknown { reason }),
                _ => Err(Error::Precondition(format!("d_Ω is infinite, not {t}"))),
            }
        }
    }
    let members = match enumerate_members_up_to(spec, group, t as usize, limit) {
        Ok(m) => m,
        Err(e) if e.is_budget() => return Ok(MinimalityVerdict::Unknown { reason: e.to_string() }),
        Err(e) => return Err(e),
    };
    let nodes = AtomicU64::new(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs.max(1))
        .build()
        .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
    let found = pool.install(|| {
        members
            .par_iter()
            .map(|b| find_pin(group, &members, b, t as usize, &nodes, options.max_calls))
            .collect::<Vec<_>>()
    });
    let mut pinned = Vec::new();
    let mut removable = Vec::new();
    for (b, r) in members.iter().zip(found) {
        match r {
            Ok(Some(s)) => pinned.push((b.clone(), s)),
            Ok(None) => removable.push(b.clone()),
            Err(e) if e.is_budget() => return Ok(MinimalityVerdict::Unknown { reason: e.to_string() }),
            Err(e) => return Err(e),
        }
    }
    if removable.is_empty() {
        return Ok(MinimalityVerdict::Minimal { pins: pinned });
    }
    let without = OmegaSpec::difference(group, spec.clone(), [removable[0].clone()])?;
    let chain = threshold(&OmegaProperty::new(without, group.clone())?, options)?;
    if chain.value().is_some_and(|d| d != t) {
        return Err(Error::Precondition(format!(
            "removing {} changed d to {:?}",
            render_form(&removable[0], group),
            chain.value()
        )));
    }
    Ok(MinimalityVerdict::NotMinimal { removable, chain })
}
