use super::{finiteness_check, FinitenessReport, has_subsequence_in, member, LengthSet, OmegaSpec, DEFAULT_ENUMERATION_LIMIT};
use crate::dp::{CountDp, LengthDp, PairDp, SumDp};
use crate::error::Result;
use crate::group::{Element, Group};
use crate::search::{Caps, MonotoneProperty};
use crate::sequence::{is_subsequence, SequenceForm};

#[derive(Clone, Debug)]
enum Plan {
    Sums,
    Lengths(LengthSet),
    Pairs,
    Explicit(Vec<SequenceForm>),
    Restrict { mask: u64, child: Box<Plan> },
    DiffCount { lengths: LengthSet, remove: Vec<SequenceForm> },
    Any(Vec<Plan>),
    Fallback(OmegaSpec),
}

#[derive(Clone, Debug)]
enum Node {
    Sums(SumDp),
    Lengths(LengthDp),
    Pairs(PairDp),
    Count(CountDp),
    Restrict(Box<Node>),
    Any(Vec<Node>),
    Stateless,
}

fn compile(spec: &OmegaSpec, group: &Group) -> Result<Plan> {
    Ok(match spec {
        OmegaSpec::ZeroSumLength(LengthSet::All) | OmegaSpec::Minimal(None) => Plan::Sums,
        OmegaSpec::ZeroSumLength(l) => Plan::Lengths(l.clone()),
        OmegaSpec::Minimal(Some(l)) if l.is_downward_closed() => match l {
            LengthSet::All => Plan::Sums,
            _ => Plan::Lengths(l.clone()),
        },
        OmegaSpec::NotMinimal(None) => Plan::Pairs,
        OmegaSpec::Explicit(m) => Plan::Explicit(m.clone()),
        OmegaSpec::Support { allowed, of } => Plan::Restrict {
            mask: *allowed,
            child: Box::new(compile(of, group)?),
        },
        OmegaSpec::Union(children) => {
            Plan::Any(children.iter().map(|c| compile(c, group)).collect::<Result<_>>()?)
        }
        OmegaSpec::Difference { from, remove } => match from.as_ref() {
            OmegaSpec::ZeroSumLength(l) => {
                let mut kept = Vec::new();
                for b in remove {
                    if member(from, b, group)? {
                        kept.push(b.clone());
                    }
                }
                Plan::DiffCount {
                    lengths: l.clone(),
                    remove: kept,
                }
            }
            _ => Plan::Fallback(spec.clone()),
        },
        _ => Plan::Fallback(spec.clone()),
    })
}

fn start(plan: &Plan, group: &Group) -> Node {
    match plan {
        Plan::Sums => Node::Sums(SumDp::new()),
        Plan::Lengths(l) => Node::Lengths(LengthDp::new(l.max().map(|m| m as usize))),
        Plan::Pairs => Node::Pairs(PairDp::new(group)),
        Plan::DiffCount { lengths, remove } => Node::Count(CountDp::new(
            group,
            lengths.max().map(|m| m as usize),
            remove.len() as u32 + 1,
        )),
        Plan::Restrict { child, .. } => Node::Restrict(Box::new(start(child, group))),
        Plan::Any(children) => Node::Any(children.iter().map(|c| start(c, group)).collect()),
        Plan::Explicit(_) | Plan::Fallback(_) => Node::Stateless,
    }
}

fn adjoin(plan: &Plan, node: &mut Node, group: &Group, g: Element) {
    match (plan, node) {
        (Plan::Sums, Node::Sums(dp)) => dp.adjoin(group, g),
        (Plan::Lengths(_), Node::Lengths(dp)) => dp.adjoin(group, g),
        (Plan::Pairs, Node::Pairs(dp)) => dp.adjoin(group, g),
        (Plan::DiffCount { .. }, Node::Count(dp)) => dp.adjoin(group, g),
        (Plan::Restrict { mask, child }, Node::Restrict(inner)) => {
            if mask & g.bit() != 0 {
                adjoin(child, inner, group, g);
            }
        }
        (Plan::Any(plans), Node::Any(nodes)) => {
            for (p, n) in plans.iter().zip(nodes.iter_mut()) {
                adjoin(p, n, group, g);
            }
        }
        _ => {}
    }
}

fn holds(plan: &Plan, node: &Node, form: &SequenceForm, group: &Group, limit: u64) -> Result<bool> {
    Ok(match (plan, node) {
        (Plan::Sums, Node::Sums(dp)) => dp.has_zero(),
        (Plan::Lengths(l), Node::Lengths(dp)) => dp.zero_lengths().any(|len| l.contains(len as u64)),
        (Plan::Pairs, Node::Pairs(dp)) => dp.has_pair(),
        (Plan::Explicit(members), _) => members.iter().any(|m| is_subsequence(m, form)),
        (Plan::DiffCount { lengths, remove }, Node::Count(dp)) => {
            let present = remove.iter().filter(|b| is_subsequence(b, form)).count() as u32;
            dp.nonempty_zero_sum(|len| lengths.contains(len as u64)) > present
        }
        (Plan::Restrict { mask, child }, Node::Restrict(inner)) => {
            holds(child, inner, &form.restrict(*mask), group, limit)?
        }
        (Plan::Any(plans), Node::Any(nodes)) => {
            for (p, n) in plans.iter().zip(nodes) {
                if holds(p, n, form, group, limit)? {
                    return Ok(true);
                }
            }
            false
        }
        (Plan::Fallback(spec), _) => has_subsequence_in(spec, form, group, limit)?,
        _ => unreachable!("plan and state out of step"),
    })
}

/// Search state: the current form plus one kernel per plan node.
#[derive(Clone, Debug)]
pub struct OmegaState {
    form: SequenceForm,
    node: Node,
}

/// "`S` has a subsequence in Ω" as a monotone property.
///
/// The search route keeps incremental kernels where the shape of Ω allows;
/// [`MonotoneProperty::evaluate`] goes through [`has_subsequence_in`] instead,
/// so the two routes cross-check each other.
#[derive(Clone, Debug)]
pub struct OmegaProperty {
    spec: OmegaSpec,
    group: Group,
    plan: Plan,
    caps: Caps,
    limit: u64,
}

impl OmegaProperty {
    pub fn new(spec: OmegaSpec, group: Group) -> Result<OmegaProperty> {
        spec.validate(&group)?;
        let report = finiteness_check(&spec, &group, u64::MAX);
        let caps = match report {
            FinitenessReport::Finite { .. } => Caps::Finite(report.caps(&group).expect("finite")),
            FinitenessReport::Infinite { witness } | FinitenessReport::CapExceeded { witness, .. } => {
                Caps::Infinite { witness }
            }
        };
        let plan = compile(&spec, &group)?;
        Ok(OmegaProperty {
            spec,
            group,
            plan,
            caps,
            limit: DEFAULT_ENUMERATION_LIMIT,
        })
    }

    pub fn with_limit(mut self, limit: u64) -> Self {
        self.limit = limit;
        self
    }

    pub fn spec(&self) -> &OmegaSpec {
        &self.spec
    }
}

impl MonotoneProperty for OmegaProperty {
    type State = OmegaState;

    fn name(&self) -> String {
        format!("d_Ω {}", self.spec.to_json(&self.group))
    }

    fn group(&self) -> &Group {
        &self.group
    }

    fn caps(&self) -> Caps {
        self.caps.clone()
    }

    fn start(&self) -> OmegaState {
        OmegaState {
            form: SequenceForm::empty(),
            node: start(&self.plan, &self.group),
        }
    }

    fn adjoin(&self, state: &mut OmegaState, g: Element) {
        state.form.push(g, 1);
        adjoin(&self.plan, &mut state.node, &self.group, g);
    }

    fn holds(&self, state: &OmegaState) -> Result<bool> {
        holds(&self.plan, &state.node, &state.form, &self.group, self.limit)
    }

    fn evaluate(&self, form: &SequenceForm) -> Result<bool> {
        has_subsequence_in(&self.spec, form, &self.group, self.limit)
    }
}
