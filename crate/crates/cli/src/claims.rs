//! The checks behind `verify-paper`: each claim runs on one group and
//! reports PASS, FAIL, UNKNOWN or SKIP (not applicable to that group).

use std::fmt;

use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use zerosum::invariants::{compute, d2, davenport, eta, inequality_audit, Invariant};
use zerosum::omega::{
    finiteness_check, enumerate_members_up_to, FinitenessReport, LengthSet, OmegaProperty, OmegaSpec,
    DEFAULT_ENUMERATION_LIMIT,
};
use zerosum::search::{brute_force_threshold, threshold, Outcome, SearchOptions};
use zerosum::sequence::{is_weak_regular, render_form};
use zerosum::structure::{
    antichain_reduce, is_minimal_omega, theorem_d2_construct, verify_entry, vol_scan, weak_regularize,
    EssentialSweep, MinimalityVerdict, RegularizeOutcome, VolOptions,
};
use zerosum::{Element, Group, SequenceForm};

use crate::commands::{options, out, parse_group, UsageError};
use crate::{GlobalArgs, Status};

const LIMIT: u64 = DEFAULT_ENUMERATION_LIMIT;

pub const DEFAULT_GROUPS: &[&str] = &["2", "3", "4", "2,2", "5", "3,3"];

/// Random families per group in the randomized claims.
const TRIALS: usize = 25;

pub const CLAIMS: &[(&str, &str)] = &[
    ("specialization", "d_Ω for the five standard Ω equals D, eta, s, E, d_L"),
    ("prop-finiteness", "d_Ω < ∞ iff every g has a power g^{k·ord(g)} in Ω, with the bound"),
    ("prop-antitone", "Ω ⊆ Ω′ implies d_Ω′ ≤ d_Ω"),
    ("prop-redundancy", "dropping members that contain other members keeps d_Ω"),
    ("prop-zero-padding", "{0^{t−D+1}} ∪ B(G∖{0}) has d = t for t in [D, D+3]"),
    ("lemma-repair", "long powers are replaced by g^{ord(g)} without changing d"),
    ("prop-vol", "D, D+1 and eta lie in Vol(G)"),
    ("prop-antichain", "a minimal Ω is an antichain"),
    ("prop-minimal-construction", "{g^{ord(g)}} ∪ {0^{t−Σ(ord(g)−1)}} is minimal"),
    ("prop-odd-nonminimal", "length-n zero-sum sequences over C_n, n ≥ 5 odd, are not minimal"),
    ("essential-examples", "g(−g) essential for generators of C_n; long minimal sequences essential"),
    ("theorem-d2", "disjoint Ω, Ω′ with d = k for every k ≥ D2, and D2 > D"),
    ("chain-inequality", "q′ ≤ disc ≤ D2 and the classical bounds"),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Unknown,
    Skip,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Unknown => "UNKNOWN",
            Verdict::Skip => "SKIP",
        })
    }
}

pub struct ClaimResult {
    pub verdict: Verdict,
    pub detail: String,
}

fn pass(detail: impl Into<String>) -> Result<ClaimResult> {
    Ok(ClaimResult {
        verdict: Verdict::Pass,
        detail: detail.into(),
    })
}

fn fail(detail: impl Into<String>) -> Result<ClaimResult> {
    Ok(ClaimResult {
        verdict: Verdict::Fail,
        detail: detail.into(),
    })
}

fn unknown(detail: impl Into<String>) -> Result<ClaimResult> {
    Ok(ClaimResult {
        verdict: Verdict::Unknown,
        detail: detail.into(),
    })
}

fn skip(detail: impl Into<String>) -> Result<ClaimResult> {
    Ok(ClaimResult {
        verdict: Verdict::Skip,
        detail: detail.into(),
    })
}

struct Ctx {
    options: SearchOptions,
    seed: u64,
}

impl Ctx {
    fn rng(&self, group: &Group, salt: u64) -> ChaCha8Rng {
        let tag = group.factors().iter().fold(salt, |acc, &n| acc.wrapping_mul(131).wrapping_add(n as u64));
        ChaCha8Rng::seed_from_u64(self.seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }

    fn d_of(&self, spec: &OmegaSpec, group: &Group) -> Result<Outcome> {
        Ok(threshold(&OmegaProperty::new(spec.clone(), group.clone())?, &self.options)?.outcome)
    }

    fn d_explicit(&self, members: &[SequenceForm], group: &Group) -> Result<Outcome> {
        self.d_of(&OmegaSpec::explicit(group, members.iter().cloned())?, group)
    }
}

/// A random nonempty zero-sum form of length at most 4.
fn random_zero_sum(rng: &mut ChaCha8Rng, group: &Group) -> SequenceForm {
    let len = rng.gen_range(0..4);
    let mut s = SequenceForm::from_terms((0..len).map(|_| Element::from_index(rng.gen_range(0..group.order()))));
    let sigma = s.sum(group);
    if s.is_empty() || !sigma.is_zero() {
        s.push(group.neg(sigma), 1);
    }
    s
}

/// Random short zero-sum members, plus `g^{ord(g)}` for most `g`.
fn random_family(rng: &mut ChaCha8Rng, group: &Group) -> Vec<SequenceForm> {
    let mut members: Vec<_> = (0..rng.gen_range(0..5)).map(|_| random_zero_sum(rng, group)).collect();
    for g in group.elements() {
        if rng.gen_bool(0.8) {
            members.push(SequenceForm::power(g, group.order_of(g)));
        }
    }
    members
}

/// `None` is ∞; an unknown outcome is an error to the caller.
fn finite(outcome: &Outcome) -> std::result::Result<Option<u64>, String> {
    match outcome {
        Outcome::Finite { value } => Ok(Some(*value)),
        Outcome::Infinite { .. } => Ok(None),
        Outcome::Unknown { reason } => Err(reason.clone()),
    }
}

fn show(d: Option<u64>) -> String {
    d.map_or("∞".into(), |v| v.to_string())
}

fn render_all(members: &[SequenceForm], group: &Group) -> String {
    members.iter().map(|m| format!("`{}`", render_form(m, group))).collect::<Vec<_>>().join(", ")
}

fn value_of(outcome: Outcome, what: &str) -> std::result::Result<u64, String> {
    match outcome {
        Outcome::Finite { value } => Ok(value),
        other => Err(format!("{what} not computed: {other:?}")),
    }
}

macro_rules! known {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(reason) => return unknown(reason),
        }
    };
}

fn specialization(ctx: &Ctx, group: &Group) -> Result<ClaimResult> {
    let exp = group.exponent() as u64;
    let lengths = LengthSet::finite([exp, group.order() as u64])?;
    let rows = [
        Invariant::Davenport,
        Invariant::Eta,
        Invariant::S,
        Invariant::E,
        Invariant::DList(lengths),
    ];
    let mut parts = Vec::new();
    for inv in rows {
        let value = known!(value_of(compute(&inv, group, &ctx.options)?.outcome, inv.name()));
        let spec = inv.omega(group).expect("the five rows are Ω-invariants");
        let via_omega = known!(value_of(ctx.d_of(&spec, group)?, "d_Ω"));
        let prop = OmegaProperty::new(spec, group.clone())?;
        let brute = brute_force_threshold(&prop, value as usize, LIMIT)?;
        if via_omega != value || brute.value() != Some(value) {
            return fail(format!(
                "{}: invariant {value}, d_Ω {via_omega}, brute {:?}",
                inv.name(),
                brute.value()
            ));
        }
        parts.push(format!("{}={value}", inv.name()));
    }
    pass(parts.join(" "))
}

fn prop_finiteness(ctx: &Ctx, group: &Group) -> Result<ClaimResult> {
    let mut rng = ctx.rng(group, 1);
    let mut finite_count = 0;
    for _ in 0..TRIALS {
        let members = random_family(&mut rng, group);
        let spec = OmegaSpec::explicit(group, members.iter().cloned())?;
        let criterion = group.elements().all(|g| members.iter().any(|m| m.support_mask() == g.bit()));
        let d = known!(finite(&ctx.d_of(&spec, group)?));
        let report = finiteness_check(&spec, group, u64::MAX);
        if d.is_some() != criterion || report.is_finite() != criterion {
            return fail(format!("Ω = {{{}}}: d = {}", render_all(&members, group), show(d)));
        }
        if let (Some(d), FinitenessReport::Finite { bound, .. }) = (d, &report) {
            if d > *bound {
                return fail(format!("Ω = {{{}}}: d = {d} exceeds the bound {bound}", render_all(&members, group)));
            }
            finite_count += 1;
        }
    }
    pass(format!("{TRIALS} random Ω, {finite_count} finite"))
}

fn prop_antitone(ctx: &Ctx, group: &Group) -> Result<ClaimResult> {
    let mut rng = ctx.rng(group, 2);
    for _ in 0..TRIALS {
        let small = random_family(&mut rng, group);
        let mut large = small.clone();
        large.extend((0..rng.gen_range(1..4)).map(|_| random_zero_sum(&mut rng, group)));
        let a = known!(finite(&ctx.d_explicit(&small, group)?));
        let b = known!(finite(&ctx.d_explicit(&large, group)?));
        let ok = match (a, b) {
            (Some(a), Some(b)) => b <= a,
            (Some(_), None) => false,
            (None, _) => true,
        };
        if !ok {
            return fail(format!(
                "Ω = {{{}}} has d = {}, Ω′ = {{{}}} has d = {}",
                render_all(&small, group),
                show(a),
                render_all(&large, group),
                show(b)
            ));
        }
    }
    pass(format!("{TRIALS} nested pairs"))
}

fn prop_redundancy(ctx: &Ctx, group: &Group) -> Result<ClaimResult> {
    let mut rng = ctx.rng(group, 3);
    let mut dropped = 0;
    for _ in 0..TRIALS {
        let members = random_family(&mut rng, group);
        let reduced = antichain_reduce(&members);
        dropped += members.len() - reduced.len();
        let a = known!(finite(&ctx.d_explicit(&members, group)?));
        let b = known!(finite(&ctx.d_explicit(&reduced, group)?));
        if a != b {
            return fail(format!("Ω = {{{}}}: d {} became {}", render_all(&members, group), show(a), show(b)));
        }
    }
    pass(format!("{TRIALS} random Ω, {dropped} redundant members dropped"))
}

/// `{0^{t−D+1}} ∪ B(G∖{0})`.
pub fn zero_padding(group: &Group, t: u64, d: u64) -> Result<OmegaSpec> {
    Ok(OmegaSpec::Union(vec![
        OmegaSpec::explicit(group, [SequenceForm::power(group.zero(), (t - d + 1) as u32)])?,
        OmegaSpec::support(group.nonzero_elements(), OmegaSpec::ZeroSumLength(LengthSet::All)),
    ]))
}

fn prop_zero_padding(ctx: &Ctx, group: &Group) -> Result<ClaimResult> {
    let d = known!(value_of(davenport(group, &ctx.options)?.outcome, "D(G)"));
    for t in d..=d + 3 {
        let got = known!(finite(&ctx.d_of(&zero_padding(group, t, d)?, group)?));
        if got != Some(t) {
            return fail(format!("t = {t}: d = {}", show(got)));
        }
    }
    pass(format!("t = {d}..{}", d + 3))
}

/// `{g^{ord(g)} : g ≠ 0} ∪ {0^{t−Σ(ord(g)−1)}}`.
pub fn power_family(group: &Group, t: u64) -> Vec<SequenceForm> {
    let slack = t + 1 - group.total_budget();
    group
        .elements()
        .map(|g| {
            if g.is_zero() {
                SequenceForm::power(g, slack as u32)
            } else {
                SequenceForm::power(g, group.order_of(g))
            }
        })
        .collect()
}

fn lemma_repair(ctx: &Ctx, group: &Group) -> Result<ClaimResult> {
    let d = known!(value_of(davenport(group, &ctx.options)?.outcome, "D(G)"));
    let mut members = enumerate_members_up_to(&OmegaSpec::Minimal(None), group, d as usize, LIMIT)?;
    members.extend(group.nonzero_elements().map(|g| SequenceForm::power(g, 2 * group.order_of(g))));
    match weak_regularize(&members, d, group, &ctx.options)? {
        RegularizeOutcome::Certified {
            members: repaired,
            certificate,
            replacements,
        } => {
            let regular = repaired.iter().all(|m| is_weak_regular(m, group));
            let d_after = known!(finite(&ctx.d_explicit(&repaired, group)?));
            if !regular || d_after != Some(d) || replacements.len() != group.order() - 1 {
                return fail(format!("repair gave d = {}, {} replacements", show(d_after), replacements.len()));
            }
            pass(format!(
                "A(G) ∪ {{g^{{2·ord(g)}}}} at t = {d}: {} replacements, certificate `{}`",
                replacements.len(),
                render_form(&certificate, group)
            ))
        }
        RegularizeOutcome::Failed { reason } => fail(reason),
    }
}

fn prop_vol(ctx: &Ctx, group: &Group) -> Result<ClaimResult> {
    let d = known!(value_of(davenport(group, &ctx.options)?.outcome, "D(G)"));
    let e = known!(value_of(eta(group, &ctx.options)?.outcome, "eta(G)"));
    let hi = group.total_budget();
    let mut targets: Vec<u64> = [d, d + 1, e].into_iter().filter(|t| *t <= hi).collect();
    targets.sort_unstable();
    targets.dedup();
    let report = vol_scan(
        group,
        &VolOptions {
            search: ctx.options.clone(),
            targets: Some(targets.clone()),
            ..VolOptions::default()
        },
    )?;
    let mut parts = Vec::new();
    for t in &targets {
        match report.certified.get(t) {
            Some(entry) if verify_entry(entry, group, &ctx.options)? => parts.push(format!("{t} ({})", entry.provenance)),
            Some(_) => return fail(format!("entry for {t} does not verify")),
            None if report.excluded.contains(t) => return fail(format!("{t} decided outside Vol(G)")),
            None => return unknown(format!("{t} undecided")),
        }
    }
    let outside = if d + 1 > hi { format!("; D+1 = {} is outside [{d}, {hi}]", d + 1) } else { String::new() };
    pass(format!("certified {}{outside}", parts.join(", ")))
}

fn prop_antichain(ctx: &Ctx, group: &Group) -> Result<ClaimResult> {
    let t = group.total_budget();
    let members = power_family(group, t);
    let spec = OmegaSpec::explicit(group, members.iter().cloned())?;
    match is_minimal_omega(&spec, t, group, &ctx.options, LIMIT)? {
        MinimalityVerdict::Minimal { .. } => {}
        MinimalityVerdict::Unknown { reason } => return unknown(reason),
        MinimalityVerdict::NotMinimal { .. } => return fail(format!("the power family is not minimal at t = {t}")),
    }
    if antichain_reduce(&members).len() != members.len() {
        return fail("minimal family is not an antichain");
    }
    if t < 2 {
        return pass(format!("minimal family at t = {t} is an antichain"));
    }
    // `0` is a member; `0^2` contains it and is therefore removable.
    let extra = SequenceForm::power(group.zero(), 2);
    let mut padded = members.clone();
    padded.push(extra.clone());
    let spec = OmegaSpec::explicit(group, padded.iter().cloned())?;
    match is_minimal_omega(&spec, t, group, &ctx.options, LIMIT)? {
        MinimalityVerdict::NotMinimal { removable, .. } if removable.contains(&extra) => pass(format!(
            "minimal family at t = {t} is an antichain; adding `{}` breaks minimality",
            render_form(&extra, group)
        )),
        MinimalityVerdict::Unknown { reason } => unknown(reason),
        _ => fail(format!("`{}` was not reported removable", render_form(&extra, group))),
    }
}

fn prop_minimal_construction(ctx: &Ctx, group: &Group) -> Result<ClaimResult> {
    let lo = group.total_budget();
    for t in lo..=lo + 2 {
        let spec = OmegaSpec::explicit(group, power_family(group, t))?;
        match is_minimal_omega(&spec, t, group, &ctx.options, LIMIT)? {
            MinimalityVerdict::Minimal { .. } => {}
            MinimalityVerdict::Unknown { reason } => return unknown(reason),
            MinimalityVerdict::NotMinimal { removable, .. } => {
                return fail(format!("t = {t}: `{}` removable", render_form(&removable[0], group)))
            }
        }
    }
    pass(format!("t = {lo}..{}", lo + 2))
}

fn prop_odd_nonminimal(ctx: &Ctx, group: &Group) -> Result<ClaimResult> {
    let n = group.order() as u64;
    if !group.is_cyclic() || n < 5 || n % 2 == 0 {
        return skip("needs C_n with n ≥ 5 odd");
    }
    let spec = OmegaSpec::ZeroSumLength(LengthSet::single(n));
    let s0 = SequenceForm::from_terms(group.elements());
    let d = known!(finite(&ctx.d_of(&spec, group)?));
    let without = OmegaSpec::difference(group, spec, [s0.clone()])?;
    let d1 = known!(finite(&ctx.d_of(&without, group)?));
    if d != Some(2 * n - 1) || d1 != Some(2 * n - 1) {
        return fail(format!("d = {}, without S0 d = {}", show(d), show(d1)));
    }
    pass(format!(
        "d = {} with and without removable member `{}`",
        2 * n - 1,
        render_form(&s0, group)
    ))
}

fn essential_examples(ctx: &Ctx, group: &Group) -> Result<ClaimResult> {
    let d = known!(value_of(davenport(group, &ctx.options)?.outcome, "D(G)"));
    let sweep = match EssentialSweep::run(group, d, LIMIT, ctx.options.jobs) {
        Ok(s) => s,
        Err(e) if e.is_budget() => return unknown(e.to_string()),
        Err(e) => return Err(e.into()),
    };
    let longest: Vec<_> = enumerate_members_up_to(&OmegaSpec::Minimal(Some(LengthSet::single(d))), group, d as usize, LIMIT)?;
    if let Some(s) = longest.iter().find(|s| !sweep.is_essential(s)) {
        return fail(format!("`{}` is not essential w.r.t. {d}", render_form(s, group)));
    }
    let mut detail = format!("{} minimal sequences of length {d} essential", longest.len());
    if group.is_cyclic() && group.order() > 1 {
        let n = group.order() as u64;
        let generators: Vec<Element> = group.elements().filter(|g| group.order_of(*g) as u64 == n).collect();
        for g in &generators {
            let pair = SequenceForm::from_terms([*g, group.neg(*g)]);
            if !sweep.is_essential(&pair) {
                return fail(format!("`{}` is not essential w.r.t. {n}", render_form(&pair, group)));
            }
        }
        detail += &format!("; g(−g) essential for {} generators", generators.len());
    }
    pass(detail)
}

fn theorem_d2(ctx: &Ctx, group: &Group) -> Result<ClaimResult> {
    if group.order() == 1 {
        return skip("needs a nontrivial group");
    }
    let d = known!(value_of(davenport(group, &ctx.options)?.outcome, "D(G)"));
    let dd = known!(value_of(d2(group, &ctx.options)?.outcome, "D2(G)"));
    if dd <= d {
        return fail(format!("D2 = {dd} is not above D = {d}"));
    }
    for k in dd..=dd + 2 {
        let report = theorem_d2_construct(group, k, &ctx.options, LIMIT)?;
        if !report.holds() {
            return fail(format!(
                "k = {k}: disjoint {}, d = {}, d′ = {}",
                report.disjoint,
                show(report.d),
                show(report.d_prime)
            ));
        }
        if report.members.iter().any(|m| report.members_prime.iter().any(|n| n == m)) {
            return fail(format!("k = {k}: a member is shared"));
        }
    }
    pass(format!("D = {d} < D2 = {dd}; k = {dd}..{}", dd + 2))
}

fn chain_inequality(ctx: &Ctx, group: &Group) -> Result<ClaimResult> {
    let audit = inequality_audit(group, &ctx.options)?;
    if let Some(c) = audit.checks.iter().find(|c| !c.observation && c.holds == Some(false)) {
        return fail(format!("{}: {}", c.relation, c.detail));
    }
    if !audit.complete() {
        return unknown("some invariant was not computed");
    }
    let values: Vec<String> = audit
        .values
        .iter()
        .map(|(name, v)| format!("{name}={}", show(*v)))
        .collect();
    pass(values.join(" "))
}

fn dispatch(id: &str, ctx: &Ctx, group: &Group) -> Result<ClaimResult> {
    match id {
        "specialization" => specialization(ctx, group),
        "prop-finiteness" => prop_finiteness(ctx, group),
        "prop-antitone" => prop_antitone(ctx, group),
        "prop-redundancy" => prop_redundancy(ctx, group),
        "prop-zero-padding" => prop_zero_padding(ctx, group),
        "lemma-repair" => lemma_repair(ctx, group),
        "prop-vol" => prop_vol(ctx, group),
        "prop-antichain" => prop_antichain(ctx, group),
        "prop-minimal-construction" => prop_minimal_construction(ctx, group),
        "prop-odd-nonminimal" => prop_odd_nonminimal(ctx, group),
        "essential-examples" => essential_examples(ctx, group),
        "theorem-d2" => theorem_d2(ctx, group),
        "chain-inequality" => chain_inequality(ctx, group),
        other => unreachable!("unchecked claim id {other}"),
    }
}

pub fn verify_paper(g: &GlobalArgs, groups: &[String], claims: &[String]) -> Result<Status> {
    let groups: Vec<Group> = if groups.is_empty() {
        DEFAULT_GROUPS.iter().map(|s| parse_group(s)).collect::<Result<_>>()?
    } else {
        groups.iter().map(|s| parse_group(s)).collect::<Result<_>>()?
    };
    let ids: Vec<&str> = if claims.is_empty() {
        CLAIMS.iter().map(|(id, _)| *id).collect()
    } else {
        claims.iter().map(String::as_str).collect()
    };
    if let Some(bad) = ids.iter().find(|id| !CLAIMS.iter().any(|(c, _)| c == *id)) {
        return Err(UsageError(format!("unknown claim `{bad}`; see `verify-paper --list`")).into());
    }
    let ctx = Ctx {
        options: options(g),
        seed: g.seed,
    };
    let mut status = Status::Success;
    let mut log = Vec::new();
    for group in &groups {
        for id in &ids {
            let result = match dispatch(id, &ctx, group) {
                Ok(r) => r,
                Err(e) if e.downcast_ref::<zerosum::Error>().is_some_and(|e| e.is_budget()) => ClaimResult {
                    verdict: Verdict::Unknown,
                    detail: e.to_string(),
                },
                Err(e) => return Err(e),
            };
            out(&format!("{:<8} {:<26} {:<6} {}\n", result.verdict, id, group.to_string(), result.detail))?;
            status = status.max(match result.verdict {
                Verdict::Fail => Status::Fail,
                Verdict::Unknown => Status::Unknown,
                Verdict::Pass | Verdict::Skip => Status::Success,
            });
            log.push(json!({
                "claim": id,
                "group": group.factors(),
                "verdict": result.verdict.to_string(),
                "detail": result.detail,
            }));
        }
    }
    if let Some(path) = &g.certificate {
        let doc: Value = json!({ "seed": g.seed, "version": zerosum::VERSION, "claims": log });
        std::fs::write(path, serde_json::to_string_pretty(&doc)? + "\n")?;
    }
    Ok(status)
}
