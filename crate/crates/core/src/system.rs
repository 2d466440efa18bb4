//! Finite interpreted systems: agents, actions, runs carrying θ-facts, and
//! one indistinguishability partition per observer.
//!
//! Time is not modelled. A fact `θ(i, a)` is true of a whole run, so the
//! points of a run all agree on every formula built from θ-atoms and the
//! knowledge operators, and a run is the unit of evaluation throughout.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::runset::RunSet;

macro_rules! symbol_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(Arc<str>);

        impl $name {
            pub fn new(name: impl AsRef<str>) -> Self {
                $name(Arc::from(name.as_ref()))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{:?}", &*self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name::new(s)
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                $name(Arc::from(s))
            }
        }
    };
}

symbol_newtype!(
    /// Name of an agent; unique within a system.
    AgentId
);
symbol_newtype!(
    /// Name of a run; unique within a system.
    RunId
);

/// An action is a family applied to a parameter, e.g. `use(k1)` or
/// `post(c2)`. Parameterless actions carry the empty parameter.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Action {
    family: Arc<str>,
    #[serde(default, skip_serializing_if = "str::is_empty")]
    param: Arc<str>,
}

impl Action {
    pub fn new(family: impl AsRef<str>, param: impl AsRef<str>) -> Self {
        Action {
            family: Arc::from(family.as_ref()),
            param: Arc::from(param.as_ref()),
        }
    }

    pub fn bare(family: impl AsRef<str>) -> Self {
        Action::new(family, "")
    }

    pub fn family(&self) -> &str {
        &self.family
    }

    pub fn param(&self) -> &str {
        &self.param
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.param.is_empty() {
            f.write_str(&self.family)
        } else {
            write!(f, "{}({})", self.family, self.param)
        }
    }
}

impl fmt::Debug for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Optional role tag. The semantics ignore it; schemas use it for defaults.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Real,
    Pseudo,
    Observer,
}

impl Role {
    pub fn tag(self) -> &'static str {
        match self {
            Role::Real => "real",
            Role::Pseudo => "pseudo",
            Role::Observer => "observer",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Role> {
        match tag {
            "real" => Some(Role::Real),
            "pseudo" => Some(Role::Pseudo),
            "observer" => Some(Role::Observer),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Agent {
    pub id: AgentId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<Role>,
}

/// `θ(agent, action)`: the agent performs the action somewhere in the run.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Fact {
    pub agent: AgentId,
    pub action: Action,
}

impl Fact {
    pub fn new(agent: impl Into<AgentId>, action: Action) -> Self {
        Fact {
            agent: agent.into(),
            action,
        }
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.agent, self.action)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Run {
    pub id: RunId,
    pub facts: BTreeSet<Fact>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionDecl {
    pub observer: AgentId,
    pub blocks: Vec<Vec<RunId>>,
}

/// Unvalidated description of a system, as read from a file or assembled in
/// code. [`SystemDecl::build`] turns it into an [`InterpretedSystem`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemDecl {
    pub name: String,
    pub agents: Vec<Agent>,
    pub actions: Vec<Action>,
    pub runs: Vec<Run>,
    pub indist: Vec<PartitionDecl>,
}

impl SystemDecl {
    pub fn new(name: impl Into<String>) -> Self {
        SystemDecl {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn agent(mut self, name: &str, role: Option<Role>) -> Self {
        self.agents.push(Agent {
            id: AgentId::new(name),
            role,
        });
        self
    }

    pub fn action(mut self, family: &str, param: &str) -> Self {
        self.actions.push(Action::new(family, param));
        self
    }

    /// Adds a run from `(agent, family, param)` triples.
    pub fn run(mut self, id: &str, facts: &[(&str, &str, &str)]) -> Self {
        self.runs.push(Run {
            id: RunId::new(id),
            facts: facts
                .iter()
                .map(|(a, fam, p)| Fact::new(*a, Action::new(fam, p)))
                .collect(),
        });
        self
    }

    pub fn indist(mut self, observer: &str, blocks: &[&[&str]]) -> Self {
        self.indist.push(PartitionDecl {
            observer: AgentId::new(observer),
            blocks: blocks
                .iter()
                .map(|b| b.iter().map(RunId::new).collect())
                .collect(),
        });
        self
    }

    /// Puts every run into a single block for `observer`.
    pub fn single_block(mut self, observer: &str) -> Self {
        let block = self.runs.iter().map(|r| r.id.clone()).collect();
        self.indist.push(PartitionDecl {
            observer: AgentId::new(observer),
            blocks: vec![block],
        });
        self
    }

    pub fn build(self) -> Result<InterpretedSystem> {
        build_system(self)
    }
}

/// One observer's indistinguishability relation, stored as a partition of
/// run indices. Blocks are sorted internally and ordered by their smallest
/// member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObserverPartition {
    observer: AgentId,
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl ObserverPartition {
    pub fn observer(&self) -> &AgentId {
        &self.observer
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_of(&self, run: usize) -> usize {
        self.block_of[run]
    }

    /// Runs sharing a block with some member of `set`.
    pub fn possible(&self, set: &RunSet) -> RunSet {
        let mut hit = vec![false; self.blocks.len()];
        for r in set.iter() {
            hit[self.block_of[r]] = true;
        }
        self.expand(&hit, set.len())
    }

    /// Runs whose whole block lies inside `set`.
    pub fn known(&self, set: &RunSet) -> RunSet {
        let mut whole = vec![true; self.blocks.len()];
        for (r, b) in self.block_of.iter().enumerate() {
            if !set.contains(r) {
                whole[*b] = false;
            }
        }
        self.expand(&whole, set.len())
    }

    fn expand(&self, marked: &[bool], len: usize) -> RunSet {
        let mut out = RunSet::empty(len);
        for (r, b) in self.block_of.iter().enumerate() {
            if marked[*b] {
                out.insert(r);
            }
        }
        out
    }
}

/// A validated, immutable interpreted system.
#[derive(Clone, Debug)]
pub struct InterpretedSystem {
    name: String,
    agents: Vec<Agent>,
    agent_index: HashMap<AgentId, usize>,
    actions: Vec<Action>,
    action_index: HashMap<Action, usize>,
    runs: Vec<Run>,
    run_index: HashMap<RunId, usize>,
    partitions: BTreeMap<AgentId, ObserverPartition>,
    fact_runs: HashMap<AgentId, HashMap<Action, RunSet>>,
}

/// Validates a declaration and builds the system with its lookup indices.
pub fn build_system(decl: SystemDecl) -> Result<InterpretedSystem> {
    let SystemDecl {
        name,
        agents,
        actions,
        runs,
        indist,
    } = decl;

    let mut agent_index = HashMap::new();
    for (i, a) in agents.iter().enumerate() {
        if a.id.as_str().is_empty() {
            return Err(Error::EmptyName);
        }
        if agent_index.insert(a.id.clone(), i).is_some() {
            return Err(Error::DuplicateAgent(a.id.to_string()));
        }
    }
    let mut action_index = HashMap::new();
    for (i, a) in actions.iter().enumerate() {
        if a.family().is_empty() {
            return Err(Error::EmptyName);
        }
        if action_index.insert(a.clone(), i).is_some() {
            return Err(Error::DuplicateAction(a.to_string()));
        }
    }
    if runs.is_empty() {
        return Err(Error::NoRuns);
    }
    let mut run_index = HashMap::new();
    let mut fact_runs: HashMap<AgentId, HashMap<Action, RunSet>> = HashMap::new();
    for (ri, run) in runs.iter().enumerate() {
        if run.id.as_str().is_empty() {
            return Err(Error::EmptyName);
        }
        if run_index.insert(run.id.clone(), ri).is_some() {
            return Err(Error::DuplicateRun(run.id.to_string()));
        }
        for fact in &run.facts {
            if !agent_index.contains_key(&fact.agent) {
                return Err(Error::UndeclaredAgent(fact.agent.to_string()));
            }
            if !action_index.contains_key(&fact.action) {
                return Err(Error::UndeclaredAction(fact.action.to_string()));
            }
            fact_runs
                .entry(fact.agent.clone())
                .or_default()
                .entry(fact.action.clone())
                .or_insert_with(|| RunSet::empty(runs.len()))
                .insert(ri);
        }
    }

    let mut partitions = BTreeMap::new();
    for p in indist {
        if !agent_index.contains_key(&p.observer) {
            return Err(Error::UndeclaredAgent(p.observer.to_string()));
        }
        if partitions.contains_key(&p.observer) {
            return Err(Error::DuplicatePartition(p.observer.to_string()));
        }
        let not_covering = |detail: String| Error::PartitionNotCovering {
            observer: p.observer.to_string(),
            detail,
        };
        let mut block_of = vec![usize::MAX; runs.len()];
        let mut blocks: Vec<Vec<usize>> = Vec::with_capacity(p.blocks.len());
        for block in &p.blocks {
            if block.is_empty() {
                return Err(not_covering("empty block".into()));
            }
            let mut members = Vec::with_capacity(block.len());
            for rid in block {
                let ri = *run_index
                    .get(rid)
                    .ok_or_else(|| Error::UnknownRun(rid.to_string()))?;
                if block_of[ri] != usize::MAX {
                    return Err(not_covering(format!("run `{rid}` listed twice")));
                }
                block_of[ri] = 0;
                members.push(ri);
            }
            members.sort_unstable();
            blocks.push(members);
        }
        if let Some(missing) = block_of.iter().position(|b| *b == usize::MAX) {
            return Err(not_covering(format!(
                "run `{}` is in no block",
                runs[missing].id
            )));
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        for (bi, b) in blocks.iter().enumerate() {
            for r in b {
                block_of[*r] = bi;
            }
        }
        partitions.insert(
            p.observer.clone(),
            ObserverPartition {
                observer: p.observer,
                blocks,
                block_of,
            },
        );
    }

    Ok(InterpretedSystem {
        name,
        agents,
        agent_index,
        actions,
        action_index,
        runs,
        run_index,
        partitions,
        fact_runs,
    })
}

impl InterpretedSystem {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn agent_ids(&self) -> impl Iterator<Item = &AgentId> {
        self.agents.iter().map(|a| &a.id)
    }

    pub fn agents_with_role(&self, role: Role) -> Vec<AgentId> {
        self.agents
            .iter()
            .filter(|a| a.role == Some(role))
            .map(|a| a.id.clone())
            .collect()
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    pub fn run_count(&self) -> usize {
        self.runs.len()
    }

    pub fn has_agent(&self, agent: &AgentId) -> bool {
        self.agent_index.contains_key(agent)
    }

    pub fn has_action(&self, action: &Action) -> bool {
        self.action_index.contains_key(action)
    }

    /// Position of the agent in declaration order.
    pub fn agent_position(&self, agent: &AgentId) -> Option<usize> {
        self.agent_index.get(agent).copied()
    }

    pub fn action_position(&self, action: &Action) -> Option<usize> {
        self.action_index.get(action).copied()
    }

    pub fn run_position(&self, run: &RunId) -> Option<usize> {
        self.run_index.get(run).copied()
    }

    pub fn run(&self, id: &RunId) -> Result<&Run> {
        self.run_position(id)
            .map(|i| &self.runs[i])
            .ok_or_else(|| Error::UnknownRun(id.to_string()))
    }

    /// Actions of one family, in declaration order.
    pub fn family_actions(&self, family: &str) -> Vec<Action> {
        self.actions
            .iter()
            .filter(|a| a.family() == family)
            .cloned()
            .collect()
    }

    pub fn observers(&self) -> impl Iterator<Item = &AgentId> {
        self.partitions.keys()
    }

    pub fn partition(&self, observer: &AgentId) -> Result<&ObserverPartition> {
        self.partitions
            .get(observer)
            .ok_or_else(|| Error::NoPartition(observer.to_string()))
    }

    /// Runs where `θ(agent, action)` holds, or `None` if it holds nowhere.
    pub fn fact_runs(&self, agent: &AgentId, action: &Action) -> Option<&RunSet> {
        self.fact_runs.get(agent)?.get(action)
    }

    /// Runs `observer` cannot tell apart from `run` (always includes `run`).
    pub fn kernel(&self, observer: &AgentId, run: &RunId) -> Result<Vec<&Run>> {
        let p = self.partition(observer)?;
        let ri = self
            .run_position(run)
            .ok_or_else(|| Error::UnknownRun(run.to_string()))?;
        Ok(p.blocks[p.block_of[ri]]
            .iter()
            .map(|i| &self.runs[*i])
            .collect())
    }

    /// Whether `θ(agent, action)` is true in `run`.
    pub fn holds(&self, run: &RunId, agent: &AgentId, action: &Action) -> bool {
        match (self.run_position(run), self.fact_runs(agent, action)) {
            (Some(ri), Some(set)) => set.contains(ri),
            _ => false,
        }
    }

    /// Observer partitions rendered back to run ids.
    pub fn partition_decls(&self) -> Vec<PartitionDecl> {
        self.partitions
            .values()
            .map(|p| PartitionDecl {
                observer: p.observer.clone(),
                blocks: p
                    .blocks
                    .iter()
                    .map(|b| b.iter().map(|i| self.runs[*i].id.clone()).collect())
                    .collect(),
            })
            .collect()
    }

    pub fn to_decl(&self) -> SystemDecl {
        SystemDecl {
            name: self.name.clone(),
            agents: self.agents.clone(),
            actions: self.actions.clone(),
            runs: self.runs.clone(),
            indist: self.partition_decls(),
        }
    }

    /// Same system under a different name.
    pub fn renamed(&self, name: impl Into<String>) -> InterpretedSystem {
        InterpretedSystem {
            name: name.into(),
            ..self.clone()
        }
    }
}

impl PartialEq for InterpretedSystem {
    /// Agents and actions compare as sets, runs in order, partitions as sets
    /// of blocks.
    fn eq(&self, other: &Self) -> bool {
        let agents = |s: &Self| s.agents.iter().cloned().collect::<BTreeSet<_>>();
        let actions = |s: &Self| s.actions.iter().cloned().collect::<BTreeSet<_>>();
        let parts = |s: &Self| {
            s.partition_decls()
                .into_iter()
                .map(|p| {
                    let blocks: BTreeSet<BTreeSet<RunId>> = p
                        .blocks
                        .into_iter()
                        .map(|b| b.into_iter().collect())
                        .collect();
                    (p.observer, blocks)
                })
                .collect::<BTreeMap<_, _>>()
        };
        self.name == other.name
            && self.runs == other.runs
            && agents(self) == agents(other)
            && actions(self) == actions(other)
            && parts(self) == parts(other)
    }
}

impl Eq for InterpretedSystem {}

/// Distinct fact sets among the runs; handy for coverage statistics.
pub fn distinct_fact_sets(sys: &InterpretedSystem) -> usize {
    sys.runs
        .iter()
        .map(|r| &r.facts)
        .collect::<HashSet<_>>()
        .len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s12_decl() -> SystemDecl {
        SystemDecl::new("s12")
            .agent("i1", Some(Role::Real))
            .agent("i2", Some(Role::Real))
            .agent("k1", Some(Role::Pseudo))
            .agent("k2", Some(Role::Pseudo))
            .agent("j", Some(Role::Observer))
            .action("use", "k1")
            .action("use", "k2")
            .action("post", "c1")
            .action("post", "c2")
            .run(
                "r1",
                &[
                    ("i1", "use", "k1"),
                    ("k1", "post", "c1"),
                    ("i2", "use", "k2"),
                    ("k2", "post", "c2"),
                ],
            )
            .run(
                "r2",
                &[
                    ("i1", "use", "k2"),
                    ("k2", "post", "c1"),
                    ("i2", "use", "k1"),
                    ("k1", "post", "c2"),
                ],
            )
    }

    #[test]
    fn builds_two_run_system_with_one_block() {
        let sys = s12_decl().indist("j", &[&["r1", "r2"]]).build().unwrap();
        assert_eq!(sys.run_count(), 2);
        let j = AgentId::new("j");
        let k: Vec<_> = sys
            .kernel(&j, &RunId::new("r1"))
            .unwrap()
            .iter()
            .map(|r| r.id.to_string())
            .collect();
        assert_eq!(k, ["r1", "r2"]);
        assert!(sys.holds(&"r1".into(), &"i1".into(), &Action::new("use", "k1")));
        assert!(!sys.holds(&"r1".into(), &"i1".into(), &Action::new("use", "k2")));
    }

    #[test]
    fn rejects_undeclared_agent() {
        let err = s12_decl()
            .run("r3", &[("i3", "use", "k1")])
            .single_block("j")
            .build()
            .unwrap_err();
        assert_eq!(err, Error::UndeclaredAgent("i3".into()));
        assert!(err.to_string().contains("undeclared agent"));
    }

    #[test]
    fn rejects_undeclared_action() {
        let err = s12_decl()
            .run("r3", &[("i1", "use", "k9")])
            .single_block("j")
            .build()
            .unwrap_err();
        assert_eq!(err, Error::UndeclaredAction("use(k9)".into()));
    }

    #[test]
    fn rejects_partial_partition() {
        let err = s12_decl().indist("j", &[&["r1"]]).build().unwrap_err();
        assert!(err.to_string().contains("partition"));
        assert!(err.to_string().contains("does not cover runs"));
    }

    #[test]
    fn rejects_overlapping_blocks_and_unknown_runs() {
        let err = s12_decl()
            .indist("j", &[&["r1", "r2"], &["r2"]])
            .build()
            .unwrap_err();
        assert!(matches!(err, Error::PartitionNotCovering { .. }));
        let err = s12_decl()
            .indist("j", &[&["r1", "r2", "r9"]])
            .build()
            .unwrap_err();
        assert_eq!(err, Error::UnknownRun("r9".into()));
    }

    #[test]
    fn rejects_duplicate_runs_and_empty_systems() {
        let err = s12_decl()
            .run("r1", &[])
            .single_block("j")
            .build()
            .unwrap_err();
        assert_eq!(err, Error::DuplicateRun("r1".into()));
        let err = SystemDecl::new("empty")
            .agent("j", None)
            .build()
            .unwrap_err();
        assert_eq!(err, Error::NoRuns);
    }

    #[test]
    fn single_run_kernel_is_reflexive() {
        let sys = SystemDecl::new("one")
            .agent("j", None)
            .run("r", &[])
            .single_block("j")
            .build()
            .unwrap();
        let k = sys.kernel(&"j".into(), &"r".into()).unwrap();
        assert_eq!(k.len(), 1);
        assert!(!sys.holds(&"r".into(), &"j".into(), &Action::bare("x")));
        assert_eq!(
            sys.kernel(&"nobody".into(), &"r".into()).unwrap_err(),
            Error::NoPartition("nobody".into())
        );
    }

    #[test]
    fn equality_ignores_declaration_order_of_agents_and_blocks() {
        let a = s12_decl().indist("j", &[&["r1"], &["r2"]]).build().unwrap();
        let mut decl = s12_decl().indist("j", &[&["r2"], &["r1"]]);
        decl.agents.reverse();
        let b = decl.build().unwrap();
        assert_eq!(a, b);
        let c = s12_decl().indist("j", &[&["r1", "r2"]]).build().unwrap();
        assert_ne!(a, c);
    }
}
