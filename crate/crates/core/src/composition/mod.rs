//! Sequential and parallel composition of actions, and the independence and
//! structural side conditions that make properties carry over.

mod independence;
mod structural;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::{truth_set, Formula};
use crate::properties::{parse_name, parse_set};
use crate::system::{
    build_system, Action, AgentId, Fact, InterpretedSystem, Role, RunId, SystemDecl,
};

pub use independence::{
    check_disjunctive, check_independence, check_posting_reformulation,
    check_registration_reformulation, IndependenceKind, DEFAULT_DISJUNCT_BOUND,
};
pub use structural::{check_structural, StructuralCondition};

/// Two phases wired in sequence: real-name agents perform `first_family`
/// actions on pseudonyms (`use(k)`), pseudonyms perform `second_family`
/// actions on articles (`post(c)`), and the composite is `derived_family`
/// (`submit(c)`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SequentialSchema {
    pub first_family: String,
    /// Pseudonyms; each names an agent and parameterises `first_family`.
    pub first_params: Vec<String>,
    /// Real-name agents.
    pub first_agents: Vec<AgentId>,
    pub second_family: String,
    /// Articles.
    pub second_params: Vec<String>,
    pub derived_family: String,
}

impl SequentialSchema {
    /// `use`/`post`/`submit` wiring with real names and pseudonyms taken
    /// from role tags and articles from the declared `post` actions.
    pub fn bulletin_board(sys: &InterpretedSystem) -> SequentialSchema {
        SequentialSchema {
            first_family: "use".into(),
            first_params: sys
                .agents_with_role(Role::Pseudo)
                .iter()
                .map(ToString::to_string)
                .collect(),
            first_agents: sys.agents_with_role(Role::Real),
            second_family: "post".into(),
            second_params: sys
                .family_actions("post")
                .iter()
                .map(|a| a.param().to_string())
                .collect(),
            derived_family: "submit".into(),
        }
    }

    pub fn real_agents(&self) -> &[AgentId] {
        &self.first_agents
    }

    pub fn pseudonyms(&self) -> Vec<AgentId> {
        self.first_params.iter().map(AgentId::new).collect()
    }

    pub fn articles(&self) -> &[String] {
        &self.second_params
    }

    pub fn use_action(&self, pseudonym: &AgentId) -> Action {
        Action::new(&self.first_family, pseudonym.as_str())
    }

    pub fn post_action(&self, article: &str) -> Action {
        Action::new(&self.second_family, article)
    }

    pub fn submit_action(&self, article: &str) -> Action {
        Action::new(&self.derived_family, article)
    }

    /// `{use(k) | k ∈ I_P}`
    pub fn use_actions(&self) -> Vec<Action> {
        self.pseudonyms()
            .iter()
            .map(|k| self.use_action(k))
            .collect()
    }

    /// `{post(c) | c ∈ C}`
    pub fn post_actions(&self) -> Vec<Action> {
        self.second_params
            .iter()
            .map(|c| self.post_action(c))
            .collect()
    }

    /// `{submit(c) | c ∈ C}`
    pub fn submit_actions(&self) -> Vec<Action> {
        self.second_params
            .iter()
            .map(|c| self.submit_action(c))
            .collect()
    }

    /// Every name the schema mentions must be declared in `sys`.
    pub fn validate(&self, sys: &InterpretedSystem) -> Result<()> {
        for i in &self.first_agents {
            if !sys.has_agent(i) {
                return Err(Error::Schema(format!(
                    "real-name agent `{i}` is not declared"
                )));
            }
        }
        for k in self.pseudonyms() {
            if !sys.has_agent(&k) {
                return Err(Error::Schema(format!(
                    "pseudonym `{k}` is not declared as an agent"
                )));
            }
            let a = self.use_action(&k);
            if !sys.has_action(&a) {
                return Err(Error::Schema(format!("action `{a}` is not declared")));
            }
        }
        for a in self.post_actions() {
            if !sys.has_action(&a) {
                return Err(Error::Schema(format!("action `{a}` is not declared")));
            }
        }
        let fams = [
            &self.first_family,
            &self.second_family,
            &self.derived_family,
        ];
        if fams[0] == fams[1] || fams[0] == fams[2] || fams[1] == fams[2] {
            return Err(Error::Schema("families must be distinct".into()));
        }
        Ok(())
    }
}

impl fmt::Display for SequentialSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ir: Vec<_> = self.first_agents.iter().map(ToString::to_string).collect();
        write!(
            f,
            "seq I_R={{{}}} {}:I_P={{{}}} {}:C={{{}}} => {}",
            ir.join(","),
            self.first_family,
            self.first_params.join(","),
            self.second_family,
            self.second_params.join(","),
            self.derived_family
        )
    }
}

/// Two actions on the same parameter performed by the same agent, composed
/// as `θ(i, derived(c)) ⟺ θ(i, a(c)) ∧ θ(i, b(c))`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ParallelSchema {
    pub family_a: String,
    pub family_b: String,
    pub derived_family: String,
    pub params: Vec<String>,
}

impl ParallelSchema {
    pub fn new(a: &str, b: &str, derived: &str, params: &[&str]) -> Self {
        ParallelSchema {
            family_a: a.into(),
            family_b: b.into(),
            derived_family: derived.into(),
            params: params.iter().map(|p| p.to_string()).collect(),
        }
    }

    pub fn a_action(&self, c: &str) -> Action {
        Action::new(&self.family_a, c)
    }

    pub fn b_action(&self, c: &str) -> Action {
        Action::new(&self.family_b, c)
    }

    pub fn derived_action(&self, c: &str) -> Action {
        Action::new(&self.derived_family, c)
    }

    pub fn a_actions(&self) -> Vec<Action> {
        self.params.iter().map(|c| self.a_action(c)).collect()
    }

    pub fn b_actions(&self) -> Vec<Action> {
        self.params.iter().map(|c| self.b_action(c)).collect()
    }

    pub fn derived_actions(&self) -> Vec<Action> {
        self.params.iter().map(|c| self.derived_action(c)).collect()
    }

    /// The same wiring with the two component families exchanged.
    pub fn swapped(&self) -> ParallelSchema {
        ParallelSchema {
            family_a: self.family_b.clone(),
            family_b: self.family_a.clone(),
            ..self.clone()
        }
    }

    /// Agents that may perform the actions: every declared agent except
    /// `observer`.
    pub fn performers(&self, sys: &InterpretedSystem, observer: &AgentId) -> Vec<AgentId> {
        sys.agent_ids()
            .filter(|a| *a != observer)
            .cloned()
            .collect()
    }

    pub fn validate(&self, sys: &InterpretedSystem) -> Result<()> {
        for a in self.a_actions().into_iter().chain(self.b_actions()) {
            if !sys.has_action(&a) {
                return Err(Error::Schema(format!("action `{a}` is not declared")));
            }
        }
        if self.family_a == self.family_b
            || self.family_a == self.derived_family
            || self.family_b == self.derived_family
        {
            return Err(Error::Schema("families must be distinct".into()));
        }
        Ok(())
    }
}

impl fmt::Display for ParallelSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "par {} + {} => {} : C={{{}}}",
            self.family_a,
            self.family_b,
            self.derived_family,
            self.params.join(",")
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Schema {
    Sequential(SequentialSchema),
    Parallel(ParallelSchema),
}

impl Schema {
    pub fn derived_family(&self) -> &str {
        match self {
            Schema::Sequential(s) => &s.derived_family,
            Schema::Parallel(p) => &p.derived_family,
        }
    }

    pub fn validate(&self, sys: &InterpretedSystem) -> Result<()> {
        match self {
            Schema::Sequential(s) => s.validate(sys),
            Schema::Parallel(p) => p.validate(sys),
        }
    }

    /// Parses the schema surface syntax against `sys`, which supplies the
    /// real-name agents when `I_R={...}` is omitted.
    pub fn parse_for(text: &str, sys: &InterpretedSystem) -> Result<Schema> {
        let mut schema: Schema = text.parse()?;
        if let Schema::Sequential(s) = &mut schema {
            if s.first_agents.is_empty() && !text.contains("I_R") {
                s.first_agents = sys.agents_with_role(Role::Real);
            }
        }
        Ok(schema)
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schema::Sequential(s) => s.fmt(f),
            Schema::Parallel(p) => p.fmt(f),
        }
    }
}

impl FromStr for Schema {
    type Err = Error;

    /// `seq [I_R={i1,i2}] use:I_P={k1,k2} post:C={c1,c2} => submit` or
    /// `par buy_timer + synthesize_gunpowder => give : C={c}`.
    fn from_str(text: &str) -> Result<Schema> {
        let bad = |msg: &str| Error::syntax(1, 1, format!("{msg} in schema `{text}`"));
        let text = text.trim();
        let (head, rest) = text
            .split_once(char::is_whitespace)
            .ok_or_else(|| bad("expected `seq` or `par`"))?;
        let (lhs, rhs) = rest.split_once("=>").ok_or_else(|| bad("expected `=>`"))?;
        match head {
            "seq" => {
                let derived = parse_name(rhs)?.to_string();
                let mut first: Option<(String, Vec<String>)> = None;
                let mut second: Option<(String, Vec<String>)> = None;
                let mut real = Vec::new();
                for tok in lhs.split_whitespace() {
                    if let Some(set) = tok.strip_prefix("I_R=") {
                        real = parse_set(set)?.into_iter().map(AgentId::new).collect();
                        continue;
                    }
                    let (family, spec) = tok
                        .split_once(':')
                        .ok_or_else(|| bad("expected `family:SET={...}`"))?;
                    let (label, set) = spec.split_once('=').ok_or_else(|| bad("expected `=`"))?;
                    let members: Vec<String> = parse_set(set)?
                        .into_iter()
                        .map(|m| parse_name(m).map(str::to_string))
                        .collect::<Result<_>>()?;
                    let family = parse_name(family)?.to_string();
                    match label {
                        "I_P" => first = Some((family, members)),
                        "C" => second = Some((family, members)),
                        _ => return Err(bad("expected `I_P` or `C`")),
                    }
                }
                let (first_family, first_params) =
                    first.ok_or_else(|| bad("missing `I_P` phase"))?;
                let (second_family, second_params) =
                    second.ok_or_else(|| bad("missing `C` phase"))?;
                Ok(Schema::Sequential(SequentialSchema {
                    first_family,
                    first_params,
                    first_agents: real,
                    second_family,
                    second_params,
                    derived_family: derived,
                }))
            }
            "par" => {
                let (a, b) = lhs.split_once('+').ok_or_else(|| bad("expected `+`"))?;
                let (derived, params) = rhs.split_once(':').ok_or_else(|| bad("expected `:`"))?;
                let params = params
                    .trim()
                    .strip_prefix("C=")
                    .ok_or_else(|| bad("expected `C={...}`"))?;
                let params = parse_set(params)?
                    .into_iter()
                    .map(|m| parse_name(m).map(str::to_string))
                    .collect::<Result<_>>()?;
                Ok(Schema::Parallel(ParallelSchema {
                    family_a: parse_name(a)?.into(),
                    family_b: parse_name(b)?.into(),
                    derived_family: parse_name(derived)?.into(),
                    params,
                }))
            }
            _ => Err(bad("expected `seq` or `par`")),
        }
    }
}

fn ensure_fresh(sys: &InterpretedSystem, family: &str) -> Result<()> {
    if sys.actions().iter().any(|a| a.family() == family) {
        return Err(Error::FamilyNotFresh(family.to_string()));
    }
    Ok(())
}

/// Adds `θ(i, submit(c))` to every run where some pseudonym `k` has
/// `θ(i, use(k))` and `θ(k, post(c))`. Partitions are kept as they are.
pub fn derive_sequential(
    sys: &InterpretedSystem,
    schema: &SequentialSchema,
) -> Result<InterpretedSystem> {
    schema.validate(sys)?;
    ensure_fresh(sys, &schema.derived_family)?;
    let pseudonyms = schema.pseudonyms();
    let mut decl = sys.to_decl();
    decl.actions.extend(schema.submit_actions());
    for run in &mut decl.runs {
        let mut added = Vec::new();
        for i in &schema.first_agents {
            for c in &schema.second_params {
                let linked = pseudonyms.iter().any(|k| {
                    run.facts
                        .contains(&Fact::new(i.clone(), schema.use_action(k)))
                        && run
                            .facts
                            .contains(&Fact::new(k.clone(), schema.post_action(c)))
                });
                if linked {
                    added.push(Fact::new(i.clone(), schema.submit_action(c)));
                }
            }
        }
        run.facts.extend(added);
    }
    build_system(decl)
}

/// Adds `θ(i, p(c))` to every run carrying both `θ(i, a(c))` and
/// `θ(i, b(c))`.
pub fn derive_parallel(
    sys: &InterpretedSystem,
    schema: &ParallelSchema,
) -> Result<InterpretedSystem> {
    schema.validate(sys)?;
    ensure_fresh(sys, &schema.derived_family)?;
    let mut decl = sys.to_decl();
    decl.actions.extend(schema.derived_actions());
    let agents: Vec<AgentId> = sys.agent_ids().cloned().collect();
    for run in &mut decl.runs {
        let mut added = Vec::new();
        for i in &agents {
            for c in &schema.params {
                if run
                    .facts
                    .contains(&Fact::new(i.clone(), schema.a_action(c)))
                    && run
                        .facts
                        .contains(&Fact::new(i.clone(), schema.b_action(c)))
                {
                    added.push(Fact::new(i.clone(), schema.derived_action(c)));
                }
            }
        }
        run.facts.extend(added);
    }
    build_system(decl)
}

pub fn derive(sys: &InterpretedSystem, schema: &Schema) -> Result<InterpretedSystem> {
    match schema {
        Schema::Sequential(s) => derive_sequential(sys, s),
        Schema::Parallel(p) => derive_parallel(sys, p),
    }
}

/// Removes every action of `family` and every fact using one.
pub fn erase_family(sys: &InterpretedSystem, family: &str) -> Result<InterpretedSystem> {
    let mut decl: SystemDecl = sys.to_decl();
    decl.actions.retain(|a| a.family() != family);
    for run in &mut decl.runs {
        run.facts.retain(|f| f.action.family() != family);
    }
    build_system(decl)
}

/// Outcome of checking a universally quantified condition, instance by
/// instance in a fixed enumeration order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConditionReport {
    pub condition: String,
    pub holds: bool,
    pub instances_checked: usize,
    pub failure: Option<ConditionFailure>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConditionFailure {
    /// The failing instantiation, e.g. `i=i1 k=k1 k'=k1 c=c2`.
    pub instance: String,
    pub run: RunId,
    pub formula: Formula,
}

/// Checks instances until the first one that is not valid.
pub(crate) struct InstanceChecker<'a> {
    sys: &'a InterpretedSystem,
    condition: String,
    checked: usize,
    failure: Option<ConditionFailure>,
}

impl<'a> InstanceChecker<'a> {
    pub(crate) fn new(sys: &'a InterpretedSystem, condition: impl Into<String>) -> Self {
        InstanceChecker {
            sys,
            condition: condition.into(),
            checked: 0,
            failure: None,
        }
    }

    /// Returns `false` once an instance has failed; callers stop there.
    pub(crate) fn check(
        &mut self,
        formula: Formula,
        label: impl FnOnce() -> String,
    ) -> Result<bool> {
        if self.failure.is_some() {
            return Ok(false);
        }
        self.checked += 1;
        let truth = truth_set(self.sys, &formula)?;
        if let Some(ri) = truth.first_missing() {
            self.failure = Some(ConditionFailure {
                instance: label(),
                run: self.sys.runs()[ri].id.clone(),
                formula,
            });
            return Ok(false);
        }
        Ok(true)
    }

    pub(crate) fn finish(self) -> ConditionReport {
        ConditionReport {
            condition: self.condition,
            holds: self.failure.is_none(),
            instances_checked: self.checked,
            failure: self.failure,
        }
    }
}
