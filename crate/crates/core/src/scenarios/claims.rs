//! The claim registry and its evaluation as executable theorems: every claim
//! is a list of named hypotheses and a conclusion, each a universally
//! quantified check over a system and its derived counterpart.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::composition::{
    check_independence, check_registration_reformulation, check_structural, derive,
    ConditionReport, IndependenceKind, Schema, SequentialSchema, StructuralCondition,
};
use crate::error::{Error, Result};
use crate::properties::{check_property, property_holds, PropertyKind, PropertySpec};
use crate::system::{Action, AgentId, InterpretedSystem, RunId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ClaimId {
    C3_1,
    C3_2,
    C3_3,
    C3_4,
    C3_5,
    C4_1,
    C4_2,
    CA1,
    CA2,
    CA3,
    CA4,
    CA5,
    CA6,
    CA7,
    CB1,
    CB2,
    L3_1,
    L3_2,
    LA1,
    LA2,
    LA3,
    AppcEq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Flavor {
    Sequential,
    Parallel,
}

/// Which facts a property check ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Phase {
    /// `θ(i, use(k))` for `i ∈ I_R`, `k ∈ I_P`.
    Use,
    /// `θ(k, post(c))` for `k ∈ I_P`, `c ∈ C`.
    Post,
    /// `θ(i, submit(c))` on the derived system.
    Submit,
    /// `θ(i, a(c))` for every agent other than the observer.
    A,
    B,
    /// `θ(i, p(c))` on the derived system.
    P,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Condition {
    ExhaustivePosting,
    ExhaustiveRegistration,
    /// Every `post(c)` is exclusive.
    ExclusivePost,
    /// Every real-name agent is exclusive for the first family.
    ExclusiveAgent,
    BackwardCausality,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Check {
    Independence(IndependenceKind),
    Structure(Condition),
    Property(Phase, PropertyKind),
    /// For every `(i, c)`, `θ(i, a(c))` or `θ(i, b(c))` is minimally private.
    EitherMinimallyPrivate,
    /// Basic independence holds exactly when its submission-anchored
    /// reformulation does.
    CausalEquivalence,
}

type Named = (&'static str, Check);

use Check::{Independence as Ind, Property as Prop, Structure as St};
use PropertyKind::*;

const INDEP: Named = ("independence", Ind(IndependenceKind::Basic));
const PAIRWISE: Named = ("pairwise-independence", Ind(IndependenceKind::Pairwise));
const PAR_INDEP: Named = ("independence", Ind(IndependenceKind::Parallel));
const EXH_POST: Named = ("exhaustive-posting", St(Condition::ExhaustivePosting));
const EXH_REG: Named = (
    "exhaustive-registration",
    St(Condition::ExhaustiveRegistration),
);
const EXCL_POST: Named = ("exclusive-post", St(Condition::ExclusivePost));
const EXCL_AGENT: Named = ("exclusive-agent", St(Condition::ExclusiveAgent));
const BACKWARD: Named = ("backward-causality", St(Condition::BackwardCausality));
const USE_ANON: Named = ("use-anonymity", Prop(Phase::Use, AnonymousUpTo));
const USE_ONYM: Named = ("use-onymity", Prop(Phase::Use, MaximallyOnymous));
const USE_MIN_ANON: Named = ("use-min-anonymity", Prop(Phase::Use, MinimallyAnonymous));
const USE_RI: Named = ("use-role-int", Prop(Phase::Use, RoleInterchangeable));
const POST_PRIV: Named = ("post-privacy", Prop(Phase::Post, PrivateUpTo));
const POST_IDENT: Named = ("post-identity", Prop(Phase::Post, MaximallyIdentified));
const POST_MIN_PRIV: Named = ("post-min-privacy", Prop(Phase::Post, MinimallyPrivate));
const POST_RI: Named = ("post-role-int", Prop(Phase::Post, RoleInterchangeable));
const SUBMIT_PRIV: Named = ("submit-privacy", Prop(Phase::Submit, PrivateUpTo));
const SUBMIT_ANON: Named = ("submit-anonymity", Prop(Phase::Submit, AnonymousUpTo));
const SUBMIT_RI: Named = ("submit-role-int", Prop(Phase::Submit, RoleInterchangeable));
const SUBMIT_MIN_PRIV: Named = ("submit-min-privacy", Prop(Phase::Submit, MinimallyPrivate));
const SUBMIT_MIN_ANON: Named = (
    "submit-min-anonymity",
    Prop(Phase::Submit, MinimallyAnonymous),
);
const SUBMIT_ONYM: Named = ("submit-onymity", Prop(Phase::Submit, MaximallyOnymous));
const A_PRIV: Named = ("a-privacy", Prop(Phase::A, PrivateUpTo));
const B_PRIV: Named = ("b-privacy", Prop(Phase::B, PrivateUpTo));
const A_ANON: Named = ("a-anonymity", Prop(Phase::A, AnonymousUpTo));
const B_ANON: Named = ("b-anonymity", Prop(Phase::B, AnonymousUpTo));
const A_IDENT: Named = ("a-identity", Prop(Phase::A, MaximallyIdentified));
const B_IDENT: Named = ("b-identity", Prop(Phase::B, MaximallyIdentified));

impl ClaimId {
    pub const ALL: [ClaimId; 22] = [
        ClaimId::C3_1,
        ClaimId::C3_2,
        ClaimId::C3_3,
        ClaimId::C3_4,
        ClaimId::C3_5,
        ClaimId::C4_1,
        ClaimId::C4_2,
        ClaimId::CA1,
        ClaimId::CA2,
        ClaimId::CA3,
        ClaimId::CA4,
        ClaimId::CA5,
        ClaimId::CA6,
        ClaimId::CA7,
        ClaimId::CB1,
        ClaimId::CB2,
        ClaimId::L3_1,
        ClaimId::L3_2,
        ClaimId::LA1,
        ClaimId::LA2,
        ClaimId::LA3,
        ClaimId::AppcEq,
    ];

    /// Every claim with hypotheses and a conclusion, i.e. all but the
    /// existence claim C3.1.
    pub fn theorems() -> impl Iterator<Item = ClaimId> {
        ClaimId::ALL.into_iter().filter(|c| *c != ClaimId::C3_1)
    }

    pub fn label(self) -> &'static str {
        match self {
            ClaimId::C3_1 => "C3.1",
            ClaimId::C3_2 => "C3.2",
            ClaimId::C3_3 => "C3.3",
            ClaimId::C3_4 => "C3.4",
            ClaimId::C3_5 => "C3.5",
            ClaimId::C4_1 => "C4.1",
            ClaimId::C4_2 => "C4.2",
            ClaimId::CA1 => "CA.1",
            ClaimId::CA2 => "CA.2",
            ClaimId::CA3 => "CA.3",
            ClaimId::CA4 => "CA.4",
            ClaimId::CA5 => "CA.5",
            ClaimId::CA6 => "CA.6",
            ClaimId::CA7 => "CA.7",
            ClaimId::CB1 => "CB.1",
            ClaimId::CB2 => "CB.2",
            ClaimId::L3_1 => "L3.1",
            ClaimId::L3_2 => "L3.2",
            ClaimId::LA1 => "LA.1",
            ClaimId::LA2 => "LA.2",
            ClaimId::LA3 => "LA.3",
            ClaimId::AppcEq => "APPC-EQ",
        }
    }

    pub fn flavor(self) -> Flavor {
        match self {
            ClaimId::C4_1 | ClaimId::C4_2 | ClaimId::CB1 | ClaimId::CB2 => Flavor::Parallel,
            _ => Flavor::Sequential,
        }
    }

    pub fn statement(self) -> &'static str {
        match self {
            ClaimId::C3_1 => {
                "some system has anonymous use, private posting, yet a non-anonymous and a non-private submission"
            }
            ClaimId::C3_2 => "independence and private posting give private submission",
            ClaimId::C3_3 => "independence and anonymous use give anonymous submission",
            ClaimId::C3_4 => "onymous use and private posting give private submission",
            ClaimId::C3_5 => "anonymous use and identified posting give anonymous submission",
            ClaimId::C4_1 => "parallel independence and private components give a private composite",
            ClaimId::C4_2 => "parallel independence and anonymous components give an anonymous composite",
            ClaimId::CA1 => "pairwise independence and interchangeable posting give interchangeable submission",
            ClaimId::CA2 => "pairwise independence and interchangeable use give interchangeable submission",
            ClaimId::CA3 => {
                "independence, exhaustive exclusive posting, exclusive agents and minimally private posting give minimally private submission"
            }
            ClaimId::CA4 => {
                "independence, exhaustive registration, exclusivity and minimally anonymous use give minimally anonymous submission"
            }
            ClaimId::CA5 => {
                "exhaustive exclusive posting, exclusive agents, onymous use and minimally private posting give minimally private submission"
            }
            ClaimId::CA6 => {
                "exhaustive registration, exclusivity, minimally anonymous use and identified posting give minimally anonymous submission"
            }
            ClaimId::CA7 => "onymous use and identified posting give onymous submission",
            ClaimId::CB1 => "a minimally private component gives a minimally private composite",
            ClaimId::CB2 => "identified components give an identified composite",
            ClaimId::L3_1 => "onymous use implies independence",
            ClaimId::L3_2 => "identified posting implies independence",
            ClaimId::LA1 => "independence extends to disjunctions",
            ClaimId::LA2 => "independence with exhaustive exclusive posting extends to the positive-negative form",
            ClaimId::LA3 => {
                "independence with exhaustive registration and exclusive agents extends to the negative-positive form"
            }
            ClaimId::AppcEq => {
                "under backward causality, independence equals its submission-anchored reformulation"
            }
        }
    }

    pub fn hypotheses(self) -> &'static [Named] {
        match self {
            ClaimId::C3_1 => &[],
            ClaimId::C3_2 => &[INDEP, POST_PRIV],
            ClaimId::C3_3 => &[INDEP, USE_ANON],
            ClaimId::C3_4 => &[USE_ONYM, POST_PRIV],
            ClaimId::C3_5 => &[USE_ANON, POST_IDENT],
            ClaimId::C4_1 => &[PAR_INDEP, A_PRIV, B_PRIV],
            ClaimId::C4_2 => &[PAR_INDEP, A_ANON, B_ANON],
            ClaimId::CA1 => &[PAIRWISE, POST_RI],
            ClaimId::CA2 => &[PAIRWISE, USE_RI],
            ClaimId::CA3 => &[INDEP, EXH_POST, EXCL_POST, EXCL_AGENT, POST_MIN_PRIV],
            ClaimId::CA4 => &[INDEP, EXH_REG, EXCL_AGENT, EXCL_POST, USE_MIN_ANON],
            ClaimId::CA5 => &[EXH_POST, EXCL_POST, EXCL_AGENT, USE_ONYM, POST_MIN_PRIV],
            ClaimId::CA6 => &[EXH_REG, EXCL_POST, EXCL_AGENT, USE_MIN_ANON, POST_IDENT],
            ClaimId::CA7 => &[USE_ONYM, POST_IDENT],
            ClaimId::CB1 => &[("a-or-b-min-privacy", Check::EitherMinimallyPrivate)],
            ClaimId::CB2 => &[A_IDENT, B_IDENT],
            ClaimId::L3_1 => &[USE_ONYM],
            ClaimId::L3_2 => &[POST_IDENT],
            ClaimId::LA1 => &[INDEP],
            ClaimId::LA2 => &[INDEP, EXH_POST, EXCL_POST],
            ClaimId::LA3 => &[INDEP, EXH_REG, EXCL_AGENT],
            ClaimId::AppcEq => &[BACKWARD],
        }
    }

    /// `None` for C3.1, which is checked through [`ClaimId::witness_items`].
    pub fn conclusion(self) -> Option<Named> {
        Some(match self {
            ClaimId::C3_1 => return None,
            ClaimId::C3_2 | ClaimId::C3_4 => SUBMIT_PRIV,
            ClaimId::C3_3 | ClaimId::C3_5 => SUBMIT_ANON,
            ClaimId::C4_1 => ("p-privacy", Prop(Phase::P, PrivateUpTo)),
            ClaimId::C4_2 => ("p-anonymity", Prop(Phase::P, AnonymousUpTo)),
            ClaimId::CA1 | ClaimId::CA2 => SUBMIT_RI,
            ClaimId::CA3 | ClaimId::CA5 => SUBMIT_MIN_PRIV,
            ClaimId::CA4 | ClaimId::CA6 => SUBMIT_MIN_ANON,
            ClaimId::CA7 => SUBMIT_ONYM,
            ClaimId::CB1 => ("p-min-privacy", Prop(Phase::P, MinimallyPrivate)),
            ClaimId::CB2 => ("p-identity", Prop(Phase::P, MaximallyIdentified)),
            ClaimId::L3_1 | ClaimId::L3_2 => INDEP,
            ClaimId::LA1 => (
                "disjunctive-independence",
                Ind(IndependenceKind::Disjunctive),
            ),
            ClaimId::LA2 => ("posneg-independence", Ind(IndependenceKind::PosNeg)),
            ClaimId::LA3 => ("negpos-independence", Ind(IndependenceKind::NegPos)),
            ClaimId::AppcEq => ("causal-equivalence", Check::CausalEquivalence),
        })
    }

    /// The four facts C3.1 asserts of its witness system, each with the
    /// truth value the claim requires.
    pub fn witness_items(self) -> &'static [(&'static str, Check, bool)] {
        match self {
            ClaimId::C3_1 => &[
                ("use-anonymity", Prop(Phase::Use, AnonymousUpTo), true),
                ("post-privacy", Prop(Phase::Post, PrivateUpTo), true),
                (
                    "submit-not-anonymous",
                    Prop(Phase::Submit, AnonymousUpTo),
                    false,
                ),
                (
                    "submit-not-private",
                    Prop(Phase::Submit, PrivateUpTo),
                    false,
                ),
            ],
            _ => &[],
        }
    }

    /// Rejects hypothesis names the claim does not have.
    pub fn validate_dropped(self, dropped: &[String]) -> Result<()> {
        for d in dropped {
            if !self.hypotheses().iter().any(|(n, _)| n == d) {
                let names: Vec<_> = self.hypotheses().iter().map(|(n, _)| *n).collect();
                return Err(Error::Mismatch(format!(
                    "claim {} has no hypothesis `{d}`; expected one of: {}",
                    self.label(),
                    names.join(", ")
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for ClaimId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ClaimId {
    type Err = Error;

    fn from_str(s: &str) -> Result<ClaimId> {
        ClaimId::ALL
            .into_iter()
            .find(|c| c.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Mismatch(format!("unknown claim `{s}`")))
    }
}

impl Phase {
    fn subject(self) -> &'static str {
        match self {
            Phase::Use => "θ(i, use(k)) with i in I_R, k in I_P",
            Phase::Post => "θ(k, post(c)) with k in I_P, c in C",
            Phase::Submit => "θ(i, submit(c)) with i in I_R, c in C",
            Phase::A => "θ(i, a(c)) with i other than the observer",
            Phase::B => "θ(i, b(c)) with i other than the observer",
            Phase::P => "θ(i, p(c)) with i other than the observer",
        }
    }

    fn derived(self) -> bool {
        matches!(self, Phase::Submit | Phase::P)
    }
}

impl Check {
    pub fn describe(&self) -> String {
        match self {
            Check::Independence(k) => format!("{} independence", k.keyword()),
            Check::Structure(c) => match c {
                Condition::ExhaustivePosting => "exhaustive posting".into(),
                Condition::ExhaustiveRegistration => "exhaustive registration".into(),
                Condition::ExclusivePost => "every post(c) exclusive".into(),
                Condition::ExclusiveAgent => "every real-name agent exclusive".into(),
                Condition::BackwardCausality => "backward causality".into(),
            },
            Check::Property(phase, kind) => {
                format!("{} for every {}", kind.definition(), phase.subject())
            }
            Check::EitherMinimallyPrivate => {
                "minimal privacy of θ(i, a(c)) or of θ(i, b(c)) for every i and c".into()
            }
            Check::CausalEquivalence => {
                "basic independence iff its submission-anchored form".into()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Hypotheses and conclusion hold.
    Confirmed,
    /// Some hypothesis fails.
    Vacuous,
    /// Hypotheses hold and the conclusion fails; never expected.
    Refuted,
    /// The system does not exhibit every item an existence claim asks for.
    NotWitnessed,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Confirmed => "confirmed",
            Verdict::Vacuous => "vacuous",
            Verdict::Refuted => "REFUTED",
            Verdict::NotWitnessed => "not-witnessed",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One evaluated hypothesis, conclusion or witness item.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub description: String,
    pub holds: bool,
    /// Instantiation that fails (or, for a negated witness item, the one
    /// that witnesses it).
    pub instance: Option<String>,
    pub run: Option<RunId>,
    pub conjunct: Option<String>,
}

impl CheckResult {
    pub fn detail(&self) -> Option<String> {
        let inst = self.instance.as_ref()?;
        let mut s = inst.clone();
        if let Some(run) = &self.run {
            s.push_str(&format!(" at {run}"));
        }
        if let Some(c) = &self.conjunct {
            s.push_str(&format!(", conjunct {c}"));
        }
        Some(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClaimReport {
    pub claim: ClaimId,
    pub system: String,
    pub hypotheses: Vec<CheckResult>,
    /// Hypotheses left out of the check.
    pub dropped: Vec<String>,
    pub hypotheses_hold: bool,
    pub conclusion: Option<CheckResult>,
    /// C3.1 only; `holds` means the item is as the claim requires.
    pub items: Vec<CheckResult>,
    pub verdict: Verdict,
}

impl ClaimReport {
    pub fn items_confirmed(&self) -> usize {
        self.items.iter().filter(|i| i.holds).count()
    }

    /// `confirmed`, `vacuous`, ... with the item tally for C3.1.
    pub fn summary(&self) -> String {
        if self.items.is_empty() {
            self.verdict.to_string()
        } else {
            format!(
                "{} ({}/{} items)",
                self.verdict,
                self.items_confirmed(),
                self.items.len()
            )
        }
    }
}

impl fmt::Display for ClaimReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} on {}: {}", self.claim, self.system, self.summary())?;
        let line =
            |f: &mut fmt::Formatter<'_>, kind: &str, r: &CheckResult, ok: &str, bad: &str| {
                write!(
                    f,
                    "  {kind} {}: {} [{}]",
                    r.name,
                    if r.holds { ok } else { bad },
                    r.description
                )?;
                match r.detail() {
                    Some(d) => writeln!(f, "; {d}"),
                    None => writeln!(f),
                }
            };
        for item in &self.items {
            line(f, "item", item, "confirmed", "not confirmed")?;
        }
        for d in &self.dropped {
            writeln!(f, "  hypothesis {d}: dropped")?;
        }
        for h in &self.hypotheses {
            line(f, "hypothesis", h, "holds", "fails")?;
        }
        if let Some(c) = &self.conclusion {
            line(f, "conclusion", c, "holds", "fails")?;
        }
        Ok(())
    }
}

/// Evaluation context for one system: caches every check so that several
/// claims over the same system share work, and derives the composite
/// system at most once.
pub struct ClaimBench<'a> {
    sys: &'a InterpretedSystem,
    schema: &'a Schema,
    observer: AgentId,
    derived: Option<InterpretedSystem>,
    cache: HashMap<Check, bool>,
}

impl<'a> ClaimBench<'a> {
    pub fn new(sys: &'a InterpretedSystem, schema: &'a Schema, observer: &AgentId) -> Self {
        ClaimBench {
            sys,
            schema,
            observer: observer.clone(),
            derived: None,
            cache: HashMap::new(),
        }
    }

    fn flavor_matches(&self, claim: ClaimId) -> Result<()> {
        let ok = matches!(
            (claim.flavor(), self.schema),
            (Flavor::Sequential, Schema::Sequential(_)) | (Flavor::Parallel, Schema::Parallel(_))
        );
        if ok {
            Ok(())
        } else {
            Err(Error::Mismatch(format!(
                "claim {claim} needs a {} schema",
                match claim.flavor() {
                    Flavor::Sequential => "sequential",
                    Flavor::Parallel => "parallel",
                }
            )))
        }
    }

    fn seq(&self) -> Result<&'a SequentialSchema> {
        match self.schema {
            Schema::Sequential(s) => Ok(s),
            Schema::Parallel(_) => Err(Error::Mismatch("check needs a sequential schema".into())),
        }
    }

    fn derived(&mut self) -> Result<&InterpretedSystem> {
        if self.derived.is_none() {
            self.derived = Some(derive(self.sys, self.schema)?);
        }
        Ok(self.derived.as_ref().expect("just derived"))
    }

    /// Property instances a check ranges over, with the system they are
    /// evaluated on.
    fn property_specs(&mut self, phase: Phase, kind: PropertyKind) -> Result<Vec<PropertySpec>> {
        let j = self.observer.clone();
        let mut out = Vec::new();
        let mut push = |agent: &AgentId, action: Action, agents: &[AgentId], actions: &[Action]| {
            out.push(match kind {
                AnonymousUpTo => PropertySpec::anonymous_up_to(agent, &action, agents, &j),
                PrivateUpTo => PropertySpec::private_up_to(agent, &action, actions, &j),
                MinimallyAnonymous => PropertySpec::minimally_anonymous(agent, &action, &j),
                MinimallyPrivate => PropertySpec::minimally_private(agent, &action, &j),
                MaximallyOnymous => PropertySpec::maximally_onymous(agent, &action, &j),
                MaximallyIdentified => PropertySpec::maximally_identified(agent, &action, &j),
                RoleInterchangeable => {
                    PropertySpec::role_interchangeable(agent, &action, &j, Some(actions))
                }
            });
        };
        match (self.schema, phase) {
            (Schema::Sequential(s), Phase::Use) => {
                let (pseudonyms, universe) = (s.pseudonyms(), s.use_actions());
                for i in &s.first_agents {
                    for k in &pseudonyms {
                        push(i, s.use_action(k), &s.first_agents, &universe);
                    }
                }
            }
            (Schema::Sequential(s), Phase::Post) => {
                let (pseudonyms, universe) = (s.pseudonyms(), s.post_actions());
                for k in &pseudonyms {
                    for c in &s.second_params {
                        push(k, s.post_action(c), &pseudonyms, &universe);
                    }
                }
            }
            (Schema::Sequential(s), Phase::Submit) => {
                let universe = s.submit_actions();
                for i in &s.first_agents {
                    for c in &s.second_params {
                        push(i, s.submit_action(c), &s.first_agents, &universe);
                    }
                }
            }
            (Schema::Parallel(p), Phase::A | Phase::B | Phase::P) => {
                let performers = p.performers(self.sys, &j);
                let action = |c: &str| match phase {
                    Phase::A => p.a_action(c),
                    Phase::B => p.b_action(c),
                    _ => p.derived_action(c),
                };
                let universe: Vec<Action> = p.params.iter().map(|c| action(c)).collect();
                for i in &performers {
                    for c in &p.params {
                        push(i, action(c), &performers, &universe);
                    }
                }
            }
            _ => {
                return Err(Error::Mismatch(format!(
                    "phase {phase:?} does not match schema `{}`",
                    self.schema
                )))
            }
        }
        Ok(out)
    }

    fn target(&mut self, phase: Phase) -> Result<&InterpretedSystem> {
        if phase.derived() {
            self.derived()
        } else {
            Ok(self.sys)
        }
    }

    fn structural(&self, cond: Condition) -> Result<Vec<StructuralCondition>> {
        let s = self.seq()?;
        Ok(match cond {
            Condition::ExhaustivePosting => vec![StructuralCondition::ExhaustivePosting],
            Condition::ExhaustiveRegistration => vec![StructuralCondition::ExhaustiveRegistration],
            Condition::BackwardCausality => vec![StructuralCondition::BackwardCausality],
            Condition::ExclusivePost => s
                .post_actions()
                .into_iter()
                .map(StructuralCondition::ExclusiveAction)
                .collect(),
            Condition::ExclusiveAgent => s
                .first_agents
                .iter()
                .map(|i| StructuralCondition::ExclusiveAgent(i.clone(), s.first_family.clone()))
                .collect(),
        })
    }

    /// Whether the check holds, from the cache when possible.
    pub fn holds(&mut self, check: Check) -> Result<bool> {
        if let Some(v) = self.cache.get(&check) {
            return Ok(*v);
        }
        let v = match check {
            Check::Independence(kind) => {
                check_independence(self.sys, &self.observer, self.schema, kind)?.holds
            }
            Check::Structure(cond) => {
                let s = self.seq()?;
                let mut ok = true;
                for c in self.structural(cond)? {
                    if !check_structural(self.sys, s, &c)?.holds {
                        ok = false;
                        break;
                    }
                }
                ok
            }
            Check::Property(phase, kind) => {
                let specs = self.property_specs(phase, kind)?;
                let sys = self.target(phase)?;
                let mut ok = true;
                for spec in &specs {
                    if !property_holds(sys, spec)? {
                        ok = false;
                        break;
                    }
                }
                ok
            }
            Check::EitherMinimallyPrivate => self.either_min_priv()?.is_none(),
            Check::CausalEquivalence => self.causal_mismatch()?.is_none(),
        };
        self.cache.insert(check, v);
        Ok(v)
    }

    /// First `(i, c)` where neither component is minimally private.
    fn either_min_priv(&mut self) -> Result<Option<(PropertySpec, RunId)>> {
        let a = self.property_specs(Phase::A, MinimallyPrivate)?;
        let b = self.property_specs(Phase::B, MinimallyPrivate)?;
        for (sa, sb) in a.iter().zip(&b) {
            let ra = check_property(self.sys, sa)?;
            if ra.holds || property_holds(self.sys, sb)? {
                continue;
            }
            let run = ra.counterexample.expect("failing report has a run").run;
            return Ok(Some((sa.clone(), run)));
        }
        Ok(None)
    }

    /// The two forms' reports when exactly one of them holds.
    fn causal_mismatch(&mut self) -> Result<Option<(ConditionReport, ConditionReport)>> {
        let s = self.seq()?;
        let basic = check_independence(
            self.sys,
            &self.observer,
            self.schema,
            IndependenceKind::Basic,
        )?;
        let causal = check_registration_reformulation(self.sys, &self.observer, s)?;
        Ok((basic.holds != causal.holds).then_some((basic, causal)))
    }

    /// Evaluates a check and explains its first failing instance.
    pub fn explain(&mut self, name: &str, check: Check) -> Result<CheckResult> {
        let mut result = CheckResult {
            name: name.to_string(),
            description: check.describe(),
            holds: true,
            instance: None,
            run: None,
            conjunct: None,
        };
        let from_condition = |result: &mut CheckResult, r: ConditionReport| {
            result.holds = r.holds;
            if let Some(f) = r.failure {
                result.instance = Some(format!("{}: {}", r.condition, f.instance));
                result.run = Some(f.run);
            }
        };
        match check {
            Check::Independence(kind) => {
                let r = check_independence(self.sys, &self.observer, self.schema, kind)?;
                from_condition(&mut result, r);
            }
            Check::Structure(cond) => {
                let s = self.seq()?;
                for c in self.structural(cond)? {
                    let r = check_structural(self.sys, s, &c)?;
                    if !r.holds {
                        from_condition(&mut result, r);
                        break;
                    }
                }
            }
            Check::Property(phase, kind) => {
                let specs = self.property_specs(phase, kind)?;
                let sys = self.target(phase)?;
                for spec in &specs {
                    let r = check_property(sys, spec)?;
                    if let Some(cx) = r.counterexample {
                        result.holds = false;
                        result.instance = Some(spec.to_string());
                        result.run = Some(cx.run);
                        result.conjunct = Some(cx.conjunct);
                        break;
                    }
                }
            }
            Check::EitherMinimallyPrivate => {
                if let Some((spec, run)) = self.either_min_priv()? {
                    result.holds = false;
                    result.instance = Some(format!("{spec} and its b counterpart"));
                    result.run = Some(run);
                }
            }
            Check::CausalEquivalence => {
                if let Some((basic, causal)) = self.causal_mismatch()? {
                    result.holds = false;
                    let failing = if basic.holds { causal } else { basic };
                    from_condition(&mut result, failing);
                    result.holds = false;
                }
            }
        }
        self.cache.insert(check, result.holds);
        Ok(result)
    }

    /// Verdict only, stopping at the first failing hypothesis.
    pub fn verdict(&mut self, claim: ClaimId, dropped: &[String]) -> Result<Verdict> {
        self.flavor_matches(claim)?;
        if claim == ClaimId::C3_1 {
            for (_, check, want) in claim.witness_items() {
                if self.holds(*check)? != *want {
                    return Ok(Verdict::NotWitnessed);
                }
            }
            return Ok(Verdict::Confirmed);
        }
        for (name, check) in claim.hypotheses() {
            if dropped.iter().any(|d| d == name) {
                continue;
            }
            if !self.holds(*check)? {
                return Ok(Verdict::Vacuous);
            }
        }
        let (_, concl) = claim.conclusion().expect("theorems have conclusions");
        Ok(if self.holds(concl)? {
            Verdict::Confirmed
        } else {
            Verdict::Refuted
        })
    }

    /// Full breakdown: every hypothesis and the conclusion are evaluated
    /// and explained.
    pub fn report(&mut self, claim: ClaimId, dropped: &[String]) -> Result<ClaimReport> {
        self.flavor_matches(claim)?;
        claim.validate_dropped(dropped)?;
        let mut report = ClaimReport {
            claim,
            system: self.sys.name().to_string(),
            hypotheses: Vec::new(),
            dropped: dropped.to_vec(),
            hypotheses_hold: true,
            conclusion: None,
            items: Vec::new(),
            verdict: Verdict::Confirmed,
        };
        if claim == ClaimId::C3_1 {
            for (name, check, want) in claim.witness_items() {
                let mut r = self.explain(name, *check)?;
                r.holds = r.holds == *want;
                report.items.push(r);
            }
            if report.items.iter().any(|i| !i.holds) {
                report.verdict = Verdict::NotWitnessed;
            }
            return Ok(report);
        }
        for (name, check) in claim.hypotheses() {
            if dropped.iter().any(|d| d == name) {
                continue;
            }
            let r = self.explain(name, *check)?;
            report.hypotheses_hold &= r.holds;
            report.hypotheses.push(r);
        }
        let (name, concl) = claim.conclusion().expect("theorems have conclusions");
        let c = self.explain(name, concl)?;
        report.verdict = match (report.hypotheses_hold, c.holds) {
            (false, _) => Verdict::Vacuous,
            (true, true) => Verdict::Confirmed,
            (true, false) => Verdict::Refuted,
        };
        report.conclusion = Some(c);
        Ok(report)
    }
}

/// Full report of one claim on one system.
pub fn check_claim(
    claim: ClaimId,
    sys: &InterpretedSystem,
    schema: &Schema,
    observer: &AgentId,
) -> Result<ClaimReport> {
    ClaimBench::new(sys, schema, observer).report(claim, &[])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip() {
        for c in ClaimId::ALL {
            assert_eq!(c.label().parse::<ClaimId>().unwrap(), c);
            assert_eq!(c.conclusion().is_none(), c == ClaimId::C3_1);
        }
        assert_eq!("appc-eq".parse::<ClaimId>().unwrap(), ClaimId::AppcEq);
        assert!("C9.9".parse::<ClaimId>().is_err());
        assert_eq!(ClaimId::theorems().count(), 21);
    }

    #[test]
    fn hypothesis_names_are_unique_per_claim() {
        for c in ClaimId::ALL {
            let mut names: Vec<_> = c.hypotheses().iter().map(|(n, _)| *n).collect();
            names.sort_unstable();
            names.dedup();
            assert_eq!(names.len(), c.hypotheses().len(), "{c}");
        }
        assert!(ClaimId::C3_2
            .validate_dropped(&["independence".into()])
            .is_ok());
        assert!(ClaimId::C3_2
            .validate_dropped(&["use-onymity".into()])
            .is_err());
    }
}
