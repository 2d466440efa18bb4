//! Epistemic formulas over θ-atoms, their text syntax, and evaluation.

mod parse;
mod render;

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Result;
use crate::runset::RunSet;
use crate::system::{Action, AgentId, Fact, InterpretedSystem, RunId};

pub use parse::parse;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(Fact),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    /// `K[j] f`
    Knows(AgentId, Box<Formula>),
    /// `P[j] f`, which means the same as `!K[j] !f`.
    Poss(AgentId, Box<Formula>),
}

impl Formula {
    pub fn atom(agent: impl Into<AgentId>, action: Action) -> Formula {
        Formula::Atom(Fact::new(agent, action))
    }

    pub fn theta(agent: &AgentId, action: &Action) -> Formula {
        Formula::Atom(Fact {
            agent: agent.clone(),
            action: action.clone(),
        })
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn knows(j: &AgentId, f: Formula) -> Formula {
        Formula::Knows(j.clone(), Box::new(f))
    }

    pub fn poss(j: &AgentId, f: Formula) -> Formula {
        Formula::Poss(j.clone(), Box::new(f))
    }

    /// Left-nested conjunction; the empty conjunction is `true`.
    pub fn conj(parts: impl IntoIterator<Item = Formula>) -> Formula {
        parts
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::True)
    }

    /// Left-nested disjunction; the empty disjunction is `false`.
    pub fn disj(parts: impl IntoIterator<Item = Formula>) -> Formula {
        parts
            .into_iter()
            .reduce(Formula::or)
            .unwrap_or(Formula::False)
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 1,
            Formula::Not(f) | Formula::Knows(_, f) | Formula::Poss(_, f) => 1 + f.size(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Observers mentioned by modalities, in first-occurrence order.
    pub fn observers(&self) -> Vec<AgentId> {
        let mut out = Vec::new();
        self.visit(&mut |f| {
            if let Formula::Knows(j, _) | Formula::Poss(j, _) = f {
                if !out.contains(j) {
                    out.push(j.clone());
                }
            }
        });
        out
    }

    pub fn atoms(&self) -> Vec<Fact> {
        let mut out = Vec::new();
        self.visit(&mut |f| {
            if let Formula::Atom(fact) = f {
                if !out.contains(fact) {
                    out.push(fact.clone());
                }
            }
        });
        out
    }

    fn visit(&self, cb: &mut impl FnMut(&Formula)) {
        cb(self);
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => {}
            Formula::Not(f) | Formula::Knows(_, f) | Formula::Poss(_, f) => f.visit(cb),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                a.visit(cb);
                b.visit(cb);
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render::render(self))
    }
}

impl std::str::FromStr for Formula {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        parse(s)
    }
}

impl Serialize for Formula {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&render::render(self))
    }
}

impl<'de> Deserialize<'de> for Formula {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Canonical text form of a formula.
pub fn render(f: &Formula) -> String {
    render::render(f)
}

/// Outcome of a validity check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub holds: bool,
    /// First run in declaration order where the formula is false.
    pub counterexample: Option<RunId>,
}

/// The set of runs at which `f` is true.
pub fn truth_set(sys: &InterpretedSystem, f: &Formula) -> Result<RunSet> {
    let n = sys.run_count();
    Ok(match f {
        Formula::True => RunSet::full(n),
        Formula::False => RunSet::empty(n),
        Formula::Atom(fact) => sys
            .fact_runs(&fact.agent, &fact.action)
            .cloned()
            .unwrap_or_else(|| RunSet::empty(n)),
        Formula::Not(g) => {
            let mut s = truth_set(sys, g)?;
            s.complement();
            s
        }
        Formula::And(a, b) => {
            let mut s = truth_set(sys, a)?;
            if !s.is_empty() {
                s.and_with(&truth_set(sys, b)?);
            }
            s
        }
        Formula::Or(a, b) => {
            let mut s = truth_set(sys, a)?;
            if !s.is_full() {
                s.or_with(&truth_set(sys, b)?);
            }
            s
        }
        Formula::Implies(a, b) => {
            let mut s = truth_set(sys, a)?;
            s.implies_with(&truth_set(sys, b)?);
            s
        }
        Formula::Iff(a, b) => {
            let mut s = truth_set(sys, a)?;
            s.iff_with(&truth_set(sys, b)?);
            s
        }
        Formula::Knows(j, g) => {
            let p = sys.partition(j)?;
            p.known(&truth_set(sys, g)?)
        }
        Formula::Poss(j, g) => {
            let p = sys.partition(j)?;
            p.possible(&truth_set(sys, g)?)
        }
    })
}

/// Truth of `f` at one run.
pub fn eval(sys: &InterpretedSystem, run: &RunId, f: &Formula) -> Result<bool> {
    let ri = sys
        .run_position(run)
        .ok_or_else(|| crate::error::Error::UnknownRun(run.to_string()))?;
    Ok(truth_set(sys, f)?.contains(ri))
}

/// Whether `f` is true at every run of `sys`.
pub fn valid(sys: &InterpretedSystem, f: &Formula) -> Result<Verdict> {
    let set = truth_set(sys, f)?;
    Ok(match set.first_missing() {
        None => Verdict {
            holds: true,
            counterexample: None,
        },
        Some(ri) => Verdict {
            holds: false,
            counterexample: Some(sys.runs()[ri].id.clone()),
        },
    })
}
