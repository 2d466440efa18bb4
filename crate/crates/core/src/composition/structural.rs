//! Exclusivity, exhaustiveness and causality conditions on a sequential
//! schema.

use serde::Serialize;

use crate::error::Result;
use crate::formula::Formula;
use crate::system::{Action, AgentId, InterpretedSystem};

use super::{ConditionReport, InstanceChecker, SequentialSchema};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum StructuralCondition {
    /// At most one agent performs the action in each run. Performers are
    /// the pseudonyms for second-phase actions, the real names for
    /// first-phase actions, and every agent otherwise.
    ExclusiveAction(Action),
    /// The agent performs at most one action of the family in each run.
    ExclusiveAgent(AgentId, String),
    /// Every article is posted by some pseudonym in each run.
    ExhaustivePosting,
    /// Every real-name agent uses some pseudonym in each run.
    ExhaustiveRegistration,
    /// Every posting pseudonym is used by some real-name agent.
    BackwardCausality,
    /// Every used pseudonym posts some article.
    ForwardCausality,
}

impl StructuralCondition {
    pub fn describe(&self) -> String {
        match self {
            StructuralCondition::ExclusiveAction(a) => format!("exclusive action {a}"),
            StructuralCondition::ExclusiveAgent(i, fam) => format!("exclusive agent {i} for {fam}"),
            StructuralCondition::ExhaustivePosting => "exhaustive posting".into(),
            StructuralCondition::ExhaustiveRegistration => "exhaustive registration".into(),
            StructuralCondition::BackwardCausality => "backward causality".into(),
            StructuralCondition::ForwardCausality => "forward causality".into(),
        }
    }
}

fn at_most_one(items: &[Formula]) -> Vec<(usize, usize, Formula)> {
    let mut out = Vec::new();
    for x in 0..items.len() {
        for y in x + 1..items.len() {
            out.push((
                x,
                y,
                Formula::not(Formula::and(items[x].clone(), items[y].clone())),
            ));
        }
    }
    out
}

pub fn check_structural(
    sys: &InterpretedSystem,
    schema: &SequentialSchema,
    cond: &StructuralCondition,
) -> Result<ConditionReport> {
    schema.validate(sys)?;
    let mut chk = InstanceChecker::new(sys, cond.describe());
    let pseudonyms = schema.pseudonyms();
    match cond {
        StructuralCondition::ExclusiveAction(a) => {
            let performers: Vec<AgentId> = if a.family() == schema.second_family {
                pseudonyms
            } else if a.family() == schema.first_family {
                schema.first_agents.clone()
            } else {
                sys.agent_ids().cloned().collect()
            };
            let atoms: Vec<_> = performers.iter().map(|x| Formula::theta(x, a)).collect();
            for (x, y, f) in at_most_one(&atoms) {
                if !chk.check(f, || format!("{} and {}", performers[x], performers[y]))? {
                    break;
                }
            }
        }
        StructuralCondition::ExclusiveAgent(i, family) => {
            let actions: Vec<Action> = if *family == schema.first_family {
                schema.use_actions()
            } else if *family == schema.second_family {
                schema.post_actions()
            } else {
                sys.family_actions(family)
            };
            let atoms: Vec<_> = actions.iter().map(|a| Formula::theta(i, a)).collect();
            for (x, y, f) in at_most_one(&atoms) {
                if !chk.check(f, || format!("{} and {}", actions[x], actions[y]))? {
                    break;
                }
            }
        }
        StructuralCondition::ExhaustivePosting => {
            for c in &schema.second_params {
                let a = schema.post_action(c);
                let f = Formula::disj(pseudonyms.iter().map(|k| Formula::theta(k, &a)));
                if !chk.check(f, || format!("c={c}"))? {
                    break;
                }
            }
        }
        StructuralCondition::ExhaustiveRegistration => {
            for i in &schema.first_agents {
                let f = Formula::disj(
                    pseudonyms
                        .iter()
                        .map(|k| Formula::theta(i, &schema.use_action(k))),
                );
                if !chk.check(f, || format!("i={i}"))? {
                    break;
                }
            }
        }
        StructuralCondition::BackwardCausality => {
            'outer: for k in &pseudonyms {
                let used = Formula::disj(
                    schema
                        .first_agents
                        .iter()
                        .map(|i| Formula::theta(i, &schema.use_action(k))),
                );
                for c in &schema.second_params {
                    let f =
                        Formula::implies(Formula::theta(k, &schema.post_action(c)), used.clone());
                    if !chk.check(f, || format!("k={k} c={c}"))? {
                        break 'outer;
                    }
                }
            }
        }
        StructuralCondition::ForwardCausality => {
            'outer: for i in &schema.first_agents {
                for k in &pseudonyms {
                    let posts = Formula::disj(
                        schema
                            .second_params
                            .iter()
                            .map(|c| Formula::theta(k, &schema.post_action(c))),
                    );
                    let f = Formula::implies(Formula::theta(i, &schema.use_action(k)), posts);
                    if !chk.check(f, || format!("i={i} k={k}"))? {
                        break 'outer;
                    }
                }
            }
        }
    }
    Ok(chk.finish())
}
