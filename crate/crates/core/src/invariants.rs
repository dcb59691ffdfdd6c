//! Named zero-sum invariants as thresholds of monotone properties.
//!
//! `D`, `η`, `s`, `E` and `d_L` are `d_Ω` for length families of zero-sum
//! sequences. `disc`, `D₂` and `q′` are thresholds of properties that are not
//! of the form "has a subsequence in Ω" and get their own kernels.

use std::fmt;

use serde::Serialize;
use serde_json::{json, Value};

use crate::dp::{CountDp, LengthDp, PairDp};
use crate::error::{Error, Result};
use crate::group::{Element, Group};
use crate::omega::{LengthSet, OmegaProperty, OmegaSpec, DEFAULT_ENUMERATION_LIMIT};
use crate::search::{threshold, Caps, MonotoneProperty, Outcome, SearchOptions, ThresholdResult};
use crate::sequence::{
    enumerate_zero_sum_subforms, has_two_disjoint_zero_sum, zero_sum_length_set, SequenceForm,
};

/// CLI identifiers, in table order.
pub const INVARIANT_NAMES: [&str; 8] = ["D", "eta", "s", "E", "dL", "disc", "D2", "qprime"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Invariant {
    Davenport,
    Eta,
    S,
    E,
    DList(LengthSet),
    Disc,
    D2,
    QPrime,
}

impl Invariant {
    /// Parses a CLI identifier; `dL` needs a length set.
    pub fn parse(name: &str, lengths: Option<LengthSet>) -> Result<Invariant> {
        Ok(match name {
            "D" => Invariant::Davenport,
            "eta" => Invariant::Eta,
            "s" => Invariant::S,
            "E" => Invariant::E,
            "dL" => Invariant::DList(
                lengths.ok_or_else(|| Error::Precondition("dL needs a length set".into()))?,
            ),
            "disc" => Invariant::Disc,
            "D2" => Invariant::D2,
            "qprime" => Invariant::QPrime,
            other => {
                return Err(Error::Parse {
                    token: other.to_string(),
                    reason: format!("unknown invariant; expected one of {}", INVARIANT_NAMES.join(", ")),
                })
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Invariant::Davenport => "D",
            Invariant::Eta => "eta",
            Invariant::S => "s",
            Invariant::E => "E",
            Invariant::DList(_) => "dL",
            Invariant::Disc => "disc",
            Invariant::D2 => "D2",
            Invariant::QPrime => "qprime",
        }
    }

    /// Parameters recorded alongside values.
    pub fn params(&self) -> Value {
        match self {
            Invariant::DList(l) => json!({ "L": crate::omega::length_set_to_json(l) }),
            _ => json!({}),
        }
    }

    /// The Ω realizing this invariant as `d_Ω`, if it is one.
    pub fn omega(&self, group: &Group) -> Option<OmegaSpec> {
        let exp = group.exponent() as u64;
        Some(match self {
            Invariant::Davenport => OmegaSpec::all_zero_sum(),
            Invariant::Eta => OmegaSpec::ZeroSumLength(LengthSet::Interval(1, exp)),
            Invariant::S => OmegaSpec::ZeroSumLength(LengthSet::single(exp)),
            Invariant::E => OmegaSpec::ZeroSumLength(LengthSet::single(group.order() as u64)),
            Invariant::DList(l) => OmegaSpec::ZeroSumLength(l.clone()),
            _ => return None,
        })
    }

    pub fn property(&self, group: &Group) -> Result<InvariantProperty> {
        Ok(match self {
            Invariant::Disc => InvariantProperty::Disc(DistinctLengths::new(group.clone())),
            Invariant::D2 => InvariantProperty::D2(DisjointPair::new(group.clone())),
            Invariant::QPrime => InvariantProperty::QPrime(DistinctForms::new(group.clone())),
            _ => {
                if let Invariant::DList(LengthSet::All) = self {
                    return Err(Error::Precondition("dL needs a finite set or an interval".into()));
                }
                let spec = self.omega(group).expect("length invariant");
                InvariantProperty::Omega(OmegaProperty::new(spec, group.clone())?)
            }
        })
    }
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `2·ord(g)` copies of `g` give zero-sum subsequences of lengths `ord(g)`
/// and `2·ord(g)`, hence two of different lengths, forms, and two disjoint ones.
fn double_order_caps(group: &Group) -> Caps {
    Caps::Finite(group.elements().map(|g| 2 * group.order_of(g)).collect())
}

/// At least two distinct zero-sum lengths.
#[derive(Clone, Debug)]
pub struct DistinctLengths {
    group: Group,
}

impl DistinctLengths {
    pub fn new(group: Group) -> Self {
        DistinctLengths { group }
    }
}

impl MonotoneProperty for DistinctLengths {
    type State = LengthDp;

    fn name(&self) -> String {
        "disc".into()
    }
    fn group(&self) -> &Group {
        &self.group
    }
    fn caps(&self) -> Caps {
        double_order_caps(&self.group)
    }
    fn start(&self) -> LengthDp {
        LengthDp::new(None)
    }
    fn adjoin(&self, state: &mut LengthDp, g: Element) {
        state.adjoin(&self.group, g);
    }
    fn holds(&self, state: &LengthDp) -> Result<bool> {
        Ok(state.zero_lengths().nth(1).is_some())
    }
    fn evaluate(&self, form: &SequenceForm) -> Result<bool> {
        Ok(zero_sum_length_set(form, &self.group).len() >= 2)
    }
}

/// Two disjoint nonempty zero-sum subsequences.
#[derive(Clone, Debug)]
pub struct DisjointPair {
    group: Group,
    limit: u64,
}

impl DisjointPair {
    pub fn new(group: Group) -> Self {
        DisjointPair {
            group,
            limit: DEFAULT_ENUMERATION_LIMIT,
        }
    }
}

impl MonotoneProperty for DisjointPair {
    type State = PairDp;

    fn name(&self) -> String {
        "D2".into()
    }
    fn group(&self) -> &Group {
        &self.group
    }
    fn caps(&self) -> Caps {
        double_order_caps(&self.group)
    }
    fn start(&self) -> PairDp {
        PairDp::new(&self.group)
    }
    fn adjoin(&self, state: &mut PairDp, g: Element) {
        state.adjoin(&self.group, g);
    }
    fn holds(&self, state: &PairDp) -> Result<bool> {
        Ok(state.has_pair())
    }
    fn evaluate(&self, form: &SequenceForm) -> Result<bool> {
        has_two_disjoint_zero_sum(form, &self.group, self.limit)
    }
}

/// At least two distinct nonempty zero-sum sub-forms.
#[derive(Clone, Debug)]
pub struct DistinctForms {
    group: Group,
    limit: u64,
}

impl DistinctForms {
    pub fn new(group: Group) -> Self {
        DistinctForms {
            group,
            limit: DEFAULT_ENUMERATION_LIMIT,
        }
    }
}

impl MonotoneProperty for DistinctForms {
    type State = CountDp;

    fn name(&self) -> String {
        "qprime".into()
    }
    fn group(&self) -> &Group {
        &self.group
    }
    fn caps(&self) -> Caps {
        double_order_caps(&self.group)
    }
    fn start(&self) -> CountDp {
        CountDp::new(&self.group, None, 2)
    }
    fn adjoin(&self, state: &mut CountDp, g: Element) {
        state.adjoin(&self.group, g);
    }
    fn holds(&self, state: &CountDp) -> Result<bool> {
        Ok(state.nonempty_zero_sum(|_| true) >= 2)
    }
    fn evaluate(&self, form: &SequenceForm) -> Result<bool> {
        Ok(enumerate_zero_sum_subforms(form, &self.group, self.limit)?.len() >= 2)
    }
}

/// Any invariant's property behind one type.
#[derive(Clone, Debug)]
pub enum InvariantProperty {
    Omega(OmegaProperty),
    Disc(DistinctLengths),
    D2(DisjointPair),
    QPrime(DistinctForms),
}

#[derive(Clone, Debug)]
pub enum InvariantState {
    Omega(<OmegaProperty as MonotoneProperty>::State),
    Disc(LengthDp),
    D2(PairDp),
    QPrime(CountDp),
}

macro_rules! dispatch {
    ($self:expr, $p:ident => $body:expr) => {
        match $self {
            InvariantProperty::Omega($p) => $body,
            InvariantProperty::Disc($p) => $body,
            InvariantProperty::D2($p) => $body,
            InvariantProperty::QPrime($p) => $body,
        }
    };
}

impl MonotoneProperty for InvariantProperty {
    type State = InvariantState;

    fn name(&self) -> String {
        dispatch!(self, p => p.name())
    }
    fn group(&self) -> &Group {
        dispatch!(self, p => p.group())
    }
    fn caps(&self) -> Caps {
        dispatch!(self, p => p.caps())
    }
    fn start(&self) -> InvariantState {
        match self {
            InvariantProperty::Omega(p) => InvariantState::Omega(p.start()),
            InvariantProperty::Disc(p) => InvariantState::Disc(p.start()),
            InvariantProperty::D2(p) => InvariantState::D2(p.start()),
            InvariantProperty::QPrime(p) => InvariantState::QPrime(p.start()),
        }
    }
    fn adjoin(&self, state: &mut InvariantState, g: Element) {
        match (self, state) {
            (InvariantProperty::Omega(p), InvariantState::Omega(s)) => p.adjoin(s, g),
            (InvariantProperty::Disc(p), InvariantState::Disc(s)) => p.adjoin(s, g),
            (InvariantProperty::D2(p), InvariantState::D2(s)) => p.adjoin(s, g),
            (InvariantProperty::QPrime(p), InvariantState::QPrime(s)) => p.adjoin(s, g),
            _ => unreachable!("state from another property"),
        }
    }
    fn holds(&self, state: &InvariantState) -> Result<bool> {
        match (self, state) {
            (InvariantProperty::Omega(p), InvariantState::Omega(s)) => p.holds(s),
            (InvariantProperty::Disc(p), InvariantState::Disc(s)) => p.holds(s),
            (InvariantProperty::D2(p), InvariantState::D2(s)) => p.holds(s),
            (InvariantProperty::QPrime(p), InvariantState::QPrime(s)) => p.holds(s),
            _ => unreachable!("state from another property"),
        }
    }
    fn evaluate(&self, form: &SequenceForm) -> Result<bool> {
        dispatch!(self, p => p.evaluate(form))
    }
}

/// Computes an invariant exactly (or reports unknown on budget exhaustion).
pub fn compute(invariant: &Invariant, group: &Group, options: &SearchOptions) -> Result<ThresholdResult> {
    threshold(&invariant.property(group)?, options)
}

pub fn davenport(group: &Group, options: &SearchOptions) -> Result<ThresholdResult> {
    compute(&Invariant::Davenport, group, options)
}

pub fn eta(group: &Group, options: &SearchOptions) -> Result<ThresholdResult> {
    compute(&Invariant::Eta, group, options)
}

pub fn s_egz(group: &Group, options: &SearchOptions) -> Result<ThresholdResult> {
    compute(&Invariant::S, group, options)
}

pub fn e_gao(group: &Group, options: &SearchOptions) -> Result<ThresholdResult> {
    compute(&Invariant::E, group, options)
}

pub fn d_list(group: &Group, lengths: LengthSet, options: &SearchOptions) -> Result<ThresholdResult> {
    compute(&Invariant::DList(lengths), group, options)
}

pub fn disc(group: &Group, options: &SearchOptions) -> Result<ThresholdResult> {
    compute(&Invariant::Disc, group, options)
}

pub fn d2(group: &Group, options: &SearchOptions) -> Result<ThresholdResult> {
    compute(&Invariant::D2, group, options)
}

pub fn q_prime(group: &Group, options: &SearchOptions) -> Result<ThresholdResult> {
    compute(&Invariant::QPrime, group, options)
}

/// One persisted invariant value.
#[derive(Clone, Debug, Serialize)]
pub struct InvariantRecord {
    pub group: Vec<u32>,
    pub invariant: String,
    pub params: Value,
    pub outcome: Outcome,
    pub certificate: Option<String>,
    pub stats: crate::search::SearchStats,
    pub version: String,
}

impl InvariantRecord {
    pub fn new(invariant: &Invariant, group: &Group, result: &ThresholdResult) -> InvariantRecord {
        InvariantRecord {
            group: group.factors().to_vec(),
            invariant: invariant.name().to_string(),
            params: invariant.params(),
            outcome: result.outcome.clone(),
            certificate: result
                .certificate
                .as_ref()
                .map(|c| crate::sequence::render_form(c, group)),
            stats: result.stats.clone(),
            version: crate::VERSION.to_string(),
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("record serializes")
    }
}

/// One audited relation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditCheck {
    pub relation: String,
    /// `None` when an input is unknown.
    pub holds: Option<bool>,
    pub detail: String,
    /// Observations are reported but are not claims under test.
    pub observation: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub group: Vec<u32>,
    pub values: Vec<(String, Option<u64>)>,
    pub checks: Vec<AuditCheck>,
}

impl AuditReport {
    /// Every non-observation check decided.
    pub fn complete(&self) -> bool {
        self.checks.iter().filter(|c| !c.observation).all(|c| c.holds.is_some())
    }

    /// No non-observation check failed.
    pub fn passed(&self) -> bool {
        self.checks
            .iter()
            .filter(|c| !c.observation)
            .all(|c| c.holds != Some(false))
    }
}

/// Chain `a_0 ≤ a_1 ≤ …`, undecided if any value is unknown.
fn chain(names: &[&str], values: &[Option<u64>]) -> AuditCheck {
    let relation = names.join(" ≤ ");
    let detail = names
        .iter()
        .zip(values)
        .map(|(n, v)| format!("{n}={}", v.map_or("?".to_string(), |v| v.to_string())))
        .collect::<Vec<_>>()
        .join(", ");
    let holds = values
        .iter()
        .copied()
        .collect::<Option<Vec<u64>>>()
        .map(|v| v.windows(2).all(|w| w[0] <= w[1]));
    AuditCheck {
        relation,
        holds,
        detail,
        observation: false,
    }
}

/// Cross-checks the chain inequalities between invariants of `group`.
pub fn inequality_audit(group: &Group, options: &SearchOptions) -> Result<AuditReport> {
    let mut values = Vec::new();
    let mut get = |inv: Invariant| -> Result<Option<u64>> {
        let v = compute(&inv, group, options)?.value();
        values.push((inv.name().to_string(), v));
        Ok(v)
    };
    let d = get(Invariant::Davenport)?;
    let eta = get(Invariant::Eta)?;
    let s = get(Invariant::S)?;
    let e = get(Invariant::E)?;
    let disc = get(Invariant::Disc)?;
    let d2 = get(Invariant::D2)?;
    let qp = get(Invariant::QPrime)?;
    let n = group.order() as u64;

    let mut checks = vec![
        chain(&["qprime", "disc", "D2"], &[qp, disc, d2]),
        chain(&["D", "eta", "s", "2|G|-1"], &[d, eta, s, Some(2 * n - 1)]),
        chain(&["m(G)", "D"], &[Some(group.m_of()), d]),
    ];
    checks.push(AuditCheck {
        relation: "D < D2".into(),
        holds: d.zip(d2).map(|(d, d2)| d < d2),
        detail: format!("D={d:?}, D2={d2:?}"),
        observation: false,
    });
    if group.exponent() as u64 == n {
        checks.push(AuditCheck {
            relation: "s = E".into(),
            holds: s.zip(e).map(|(s, e)| s == e),
            detail: format!("s={s:?}, E={e:?}"),
            observation: false,
        });
    }
    checks.push(AuditCheck {
        relation: "E = |G| + D - 1".into(),
        holds: e.zip(d).map(|(e, d)| e == n + d - 1),
        detail: format!("E={e:?}, |G|={n}, D={d:?}"),
        observation: true,
    });
    Ok(AuditReport {
        group: group.factors().to_vec(),
        values,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::{brute_force_threshold, is_value};
    use crate::sequence::render_form;

    fn g(f: &[u64]) -> Group {
        Group::new(f).unwrap()
    }

    fn value(inv: Invariant, group: &Group) -> u64 {
        compute(&inv, group, &SearchOptions::default()).unwrap().value().unwrap()
    }

    #[test]
    fn classical_examples() {
        assert_eq!(value(Invariant::Davenport, &g(&[3])), 3);
        assert_eq!(value(Invariant::Davenport, &g(&[3, 3])), 5);
        assert_eq!(value(Invariant::Davenport, &Group::trivial()), 1);
        assert_eq!(value(Invariant::Eta, &g(&[3])), 3);
        assert_eq!(value(Invariant::Eta, &g(&[2, 2])), 4);
        assert_eq!(value(Invariant::Eta, &g(&[3, 3])), 7);
        assert_eq!(value(Invariant::S, &g(&[3])), 5);
        assert_eq!(value(Invariant::S, &g(&[5])), 9);
        assert_eq!(value(Invariant::S, &g(&[3, 3])), 9);
        assert_eq!(value(Invariant::E, &g(&[3])), 5);
        assert_eq!(value(Invariant::E, &g(&[4])), 7);
        assert_eq!(value(Invariant::E, &g(&[2, 2])), 6);
    }

    #[test]
    fn d_list_examples() {
        let c3 = g(&[3]);
        assert_eq!(value(Invariant::DList(LengthSet::single(3)), &c3), 5);
        assert_eq!(value(Invariant::DList(LengthSet::Interval(1, 3)), &c3), 3);
        let r = compute(&Invariant::DList(LengthSet::single(1)), &c3, &SearchOptions::default()).unwrap();
        assert_eq!(r.outcome, Outcome::Infinite { witness: "1".into() });
    }

    #[test]
    fn comparison_examples() {
        let c2 = g(&[2]);
        let c3 = g(&[3]);
        assert_eq!(value(Invariant::Disc, &c2), 4);
        let r = disc(&c3, &SearchOptions::default()).unwrap();
        assert_eq!(r.value(), Some(6));
        assert_eq!(render_form(r.certificate.as_ref().unwrap(), &c3), "1^5");
        assert_eq!(value(Invariant::D2, &c2), 4);
        assert_eq!(value(Invariant::D2, &c3), 6);
        assert_eq!(value(Invariant::QPrime, &c2), 4);
        assert_eq!(value(Invariant::QPrime, &c3), 6);
    }

    #[test]
    fn comparison_invariants_match_brute_force() {
        for group in [g(&[2]), g(&[3]), g(&[4]), g(&[2, 2])] {
            for inv in [Invariant::Disc, Invariant::D2, Invariant::QPrime] {
                let prop = inv.property(&group).unwrap();
                let fast = threshold(&prop, &SearchOptions::default()).unwrap();
                let t = fast.value().unwrap();
                let brute = brute_force_threshold(&prop, t as usize + 1, 1 << 24).unwrap();
                assert_eq!(brute.value(), Some(t), "{inv} over {group}");
                assert!(is_value(&prop, t as usize, 1 << 24).unwrap().holds);
            }
        }
    }

    #[test]
    fn double_order_power_satisfies_every_comparison_property() {
        for group in [g(&[2]), g(&[3]), g(&[2, 2]), g(&[6])] {
            for inv in [Invariant::Disc, Invariant::D2, Invariant::QPrime] {
                let prop = inv.property(&group).unwrap();
                for x in group.elements() {
                    let p = SequenceForm::power(x, 2 * group.order_of(x));
                    assert!(prop.evaluate(&p).unwrap(), "{inv} {x:?}");
                }
            }
        }
    }

    #[test]
    fn audits_pass() {
        for group in [g(&[3]), g(&[2, 2]), Group::trivial()] {
            let r = inequality_audit(&group, &SearchOptions::default()).unwrap();
            assert!(r.complete() && r.passed(), "{r:?}");
        }
        let r = inequality_audit(&g(&[3]), &SearchOptions::default()).unwrap();
        let vals: Vec<_> = r.values.iter().map(|(_, v)| v.unwrap()).collect();
        assert_eq!(vals, vec![3, 3, 5, 5, 6, 6, 6]);
    }

    #[test]
    fn parse_names() {
        for name in INVARIANT_NAMES {
            let inv = Invariant::parse(name, Some(LengthSet::single(2))).unwrap();
            assert_eq!(inv.name(), name);
        }
        assert!(Invariant::parse("dL", None).is_err());
        assert!(Invariant::parse("nope", None).is_err());
    }
}
