//! Essential sequences and `q(G)`.
//!
//! Only members of length at most `t` matter for `d_Ω = t`, so it suffices
//! to look at `Ω ⊆ Z_{≤t}`, the nonempty zero-sum forms of length `≤ t`.
//! Write `Sub0(F)` for the zero-sum sub-forms of `F`. For a fixed Ω-free form
//! `F′` of length `t − 1` the largest admissible Ω is `Z_{≤t} ∖ Sub0(F′)`,
//! and it has `d = t` iff no length-`t` form `F` has `Sub0(F) ⊆ Sub0(F′)`;
//! call such `F′` valid. Dropping `S ∉ Sub0(F′)` as well keeps `d = t` unless
//! some `F` has `Sub0(F) ∖ Sub0(F′) = {S}`; collect those `S` in `E(F′)`.
//! Then `S` is essential iff `S ∈ E(F′)` for every valid `F′`.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::group::Group;
use crate::invariants::{d2, davenport};
use crate::omega::{render_members, zero_sum_forms_up_to, OmegaProperty, OmegaSpec};
use crate::search::{for_each_form_of_length, forms_of_length, threshold, SearchOptions};
use crate::sequence::{enumerate_zero_sum_subforms, is_zero_sum, render_form, SequenceForm};

/// Everything needed to decide essentiality for one `t`.
#[derive(Clone, Debug)]
pub struct EssentialSweep {
    pub t: u64,
    /// `Z_{≤t}`, ordered by length then term list.
    pub zero_sum: Vec<SequenceForm>,
    index: HashMap<SequenceForm, usize>,
    /// Valid `F′` with `Sub0(F′)` and `E(F′)`.
    valid: Vec<(SequenceForm, FixedBitSet, FixedBitSet)>,
    essential: FixedBitSet,
}

fn sub0(form: &SequenceForm, group: &Group, index: &HashMap<SequenceForm, usize>, limit: u64) -> Result<FixedBitSet> {
    let mut bits = FixedBitSet::with_capacity(index.len());
    for b in enumerate_zero_sum_subforms(form, group, limit)? {
        bits.insert(index[&b]);
    }
    Ok(bits)
}

fn forms_of_exact_length(group: &Group, len: usize, limit: u64) -> Result<Vec<SequenceForm>> {
    let count = forms_of_length(group.order(), len);
    if count > limit as u128 {
        return Err(Error::BudgetExceeded(format!(
            "{count} forms of length {len} exceed the enumeration limit {limit}"
        )));
    }
    let mut out = Vec::with_capacity(count as usize);
    for_each_form_of_length(group, len, |f| {
        out.push(f.clone());
        Ok(true)
    })?;
    Ok(out)
}

impl EssentialSweep {
    /// Runs the sweep for `t ≥ 1`. `limit` bounds every enumeration.
    pub fn run(group: &Group, t: u64, limit: u64, jobs: usize) -> Result<EssentialSweep> {
        if t == 0 {
            return Err(Error::Precondition("t must be at least 1".into()));
        }
        let t_len = t as usize;
        let zero_sum = zero_sum_forms_up_to(group, t_len, limit)?;
        let index: HashMap<SequenceForm, usize> =
            zero_sum.iter().cloned().enumerate().map(|(i, f)| (f, i)).collect();
        let long = forms_of_exact_length(group, t_len, limit)?;
        let short = forms_of_exact_length(group, t_len - 1, limit)?;

        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
        let (long_sub0, per_short) = pool.install(|| -> Result<_> {
            let long_sub0 = long
                .par_iter()
                .map(|f| sub0(f, group, &index, limit))
                .collect::<Result<Vec<_>>>()?;
            let per_short = short
                .par_iter()
                .map(|fp| -> Result<Option<(SequenceForm, FixedBitSet, FixedBitSet)>> {
                    let mine = sub0(fp, group, &index, limit)?;
                    let mut e = FixedBitSet::with_capacity(index.len());
                    for s in &long_sub0 {
                        let mut extra = s.difference(&mine);
                        match (extra.next(), extra.next()) {
                            (None, _) => return Ok(None),
                            (Some(only), None) => e.insert(only),
                            _ => {}
                        }
                    }
                    Ok(Some((fp.clone(), mine, e)))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((long_sub0, per_short))
        })?;
        drop(long_sub0);

        let valid: Vec<_> = per_short.into_iter().flatten().collect();
        let mut essential = FixedBitSet::with_capacity(index.len());
        essential.insert_range(..);
        for (_, _, e) in &valid {
            essential.intersect_with(e);
        }
        if valid.is_empty() {
            // No Ω attains t at all.
            essential.clear();
        }
        Ok(EssentialSweep {
            t,
            zero_sum,
            index,
            valid,
            essential,
        })
    }

    /// Some Ω with `d_Ω = t` exists.
    pub fn attainable(&self) -> bool {
        !self.valid.is_empty()
    }

    pub fn candidates_checked(&self) -> usize {
        self.valid.len()
    }

    pub fn essentials(&self) -> Vec<SequenceForm> {
        self.essential.ones().map(|i| self.zero_sum[i].clone()).collect()
    }

    pub fn is_essential(&self, s: &SequenceForm) -> bool {
        self.index.get(s).is_some_and(|&i| self.essential.contains(i))
    }

    /// `Z_{≤t} ∖ (Sub0(F′) ∪ {S})` for the first valid `F′` that allows
    /// dropping `S`, together with `F′`.
    pub fn witness(&self, s: &SequenceForm) -> Option<(Vec<SequenceForm>, SequenceForm)> {
        let si = self.index.get(s).copied();
        let (fp, mine, _) = self
            .valid
            .iter()
            .find(|(_, _, e)| si.is_none_or(|i| !e.contains(i)))?;
        let members = (0..self.zero_sum.len())
            .filter(|&i| !mine.contains(i) && Some(i) != si)
            .map(|i| self.zero_sum[i].clone())
            .collect();
        Some((members, fp.clone()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EssentialVerdict {
    Essential {
        /// Valid `F′` checked, all of which force `S`.
        candidates_checked: usize,
    },
    NotEssential {
        /// An explicit Ω avoiding `S` with `d_Ω = t`.
        omega: Vec<SequenceForm>,
        /// An Ω-free form of length `t − 1`.
        free: SequenceForm,
    },
    Unknown {
        reason: String,
    },
}

impl EssentialVerdict {
    pub fn to_json(&self, group: &Group) -> Value {
        match self {
            EssentialVerdict::Essential { candidates_checked } => json!({
                "verdict": "essential",
                "candidatesChecked": candidates_checked,
            }),
            EssentialVerdict::NotEssential { omega, free } => json!({
                "verdict": "not-essential",
                "omega": { "explicit": render_members(omega, group) },
                "free": render_form(free, group),
            }),
            EssentialVerdict::Unknown { reason } => json!({ "verdict": "unknown", "reason": reason }),
        }
    }
}

fn check_t(group: &Group, t: u64, options: &SearchOptions) -> Result<()> {
    let d = davenport(group, options)?
        .value()
        .ok_or_else(|| Error::BudgetExceeded("D(G) not computed".into()))?;
    if t < d {
        return Err(Error::Precondition(format!(
            "t = {t} is below D(G) = {d}; no Ω attains it"
        )));
    }
    Ok(())
}

/// Decides whether `S` is essential with respect to `t`.
pub fn is_essential(s: &SequenceForm, t: u64, group: &Group, options: &SearchOptions, limit: u64) -> Result<EssentialVerdict> {
    if s.is_empty() || !is_zero_sum(s, group) {
        return Err(Error::NotInB(render_form(s, group)));
    }
    check_t(group, t, options)?;
    let sweep = match EssentialSweep::run(group, t, limit, options.jobs) {
        Ok(sweep) => sweep,
        Err(e) if e.is_budget() => return Ok(EssentialVerdict::Unknown { reason: e.to_string() }),
        Err(e) => return Err(e),
    };
    if sweep.is_essential(s) {
        return Ok(EssentialVerdict::Essential {
            candidates_checked: sweep.candidates_checked(),
        });
    }
    let (omega, free) = sweep
        .witness(s)
        .ok_or_else(|| Error::Precondition(format!("no Ω attains t = {t}")))?;
    Ok(EssentialVerdict::NotEssential { omega, free })
}

/// Re-checks a not-essential witness: `S ∉ Ω` and `d_Ω = t`.
pub fn verify_not_essential(
    s: &SequenceForm,
    t: u64,
    omega: &[SequenceForm],
    group: &Group,
    options: &SearchOptions,
) -> Result<bool> {
    if omega.contains(s) {
        return Ok(false);
    }
    let spec = OmegaSpec::explicit(group, omega.iter().cloned())?;
    let r = threshold(&OmegaProperty::new(spec, group.clone())?, options)?;
    Ok(r.value() == Some(t))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QStep {
    pub t: u64,
    /// `None` when the sweep ran out of budget.
    pub essentials: Option<Vec<SequenceForm>>,
    pub candidates_checked: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QOutcome {
    Value(u64),
    /// `q(G) ≥` the bound; every `t` below it was decided.
    LowerBound(u64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QReport {
    pub davenport: u64,
    pub t_cap: u64,
    pub outcome: QOutcome,
    /// Every scanned `t`, including those after the first gap.
    pub profile: Vec<QStep>,
}

impl QReport {
    pub fn to_json(&self, group: &Group) -> Value {
        json!({
            "D": self.davenport,
            "tCap": self.t_cap,
            "outcome": match self.outcome {
                QOutcome::Value(v) => json!({ "kind": "finite", "value": v }),
                QOutcome::LowerBound(b) => json!({ "kind": "lower-bound", "value": b }),
            },
            "profile": self.profile.iter().map(|s| json!({
                "t": s.t,
                "essentials": s.essentials.as_ref().map(|e| render_members(e, group)),
                "candidatesChecked": s.candidates_checked,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Scans `t = D(G), …, t_cap` and reports the least `t` without an
/// essential sequence. `t_cap` defaults to `D₂(G)`.
pub fn q_of(group: &Group, t_cap: Option<u64>, options: &SearchOptions, limit: u64) -> Result<QReport> {
    let unknown = |what: &str| Error::BudgetExceeded(format!("{what} not computed"));
    let d = davenport(group, options)?.value().ok_or_else(|| unknown("D(G)"))?;
    let t_cap = match t_cap {
        Some(c) => c,
        None => d2(group, options)?.value().ok_or_else(|| unknown("D2(G)"))?,
    };
    if t_cap < d {
        return Err(Error::Precondition(format!("t_cap = {t_cap} is below D(G) = {d}")));
    }
    let mut profile = Vec::new();
    let mut first_gap = None;
    let mut decided_through = None;
    for t in d..=t_cap {
        match EssentialSweep::run(group, t, limit, options.jobs) {
            Ok(sweep) => {
                let essentials = sweep.essentials();
                if essentials.is_empty() && first_gap.is_none() {
                    first_gap = Some(t);
                }
                if decided_through == Some(t - 1) || t == d {
                    decided_through = Some(t);
                }
                profile.push(QStep {
                    t,
                    essentials: Some(essentials),
                    candidates_checked: sweep.candidates_checked(),
                });
            }
            Err(e) if e.is_budget() => profile.push(QStep {
                t,
                essentials: None,
                candidates_checked: 0,
            }),
            Err(e) => return Err(e),
        }
    }
    let outcome = match (first_gap, decided_through) {
        (Some(g), Some(through)) if through + 1 >= g => QOutcome::Value(g),
        (_, Some(through)) => QOutcome::LowerBound(through + 1),
        (_, None) => QOutcome::LowerBound(d),
    };
    Ok(QReport {
        davenport: d,
        t_cap,
        outcome,
        profile,
    })
}
