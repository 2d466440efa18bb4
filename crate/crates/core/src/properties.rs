//! The privacy-related property taxonomy: each property instance compiles to
//! a formula of the shape `θ(i, a) ⇒ Γ`, and is checked by validity.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::{truth_set, Formula};
use crate::system::{Action, AgentId, InterpretedSystem, RunId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum PropertyKind {
    AnonymousUpTo,
    MinimallyAnonymous,
    PrivateUpTo,
    MinimallyPrivate,
    RoleInterchangeable,
    MaximallyOnymous,
    MaximallyIdentified,
}

impl PropertyKind {
    pub const ALL: [PropertyKind; 7] = [
        PropertyKind::AnonymousUpTo,
        PropertyKind::MinimallyAnonymous,
        PropertyKind::PrivateUpTo,
        PropertyKind::MinimallyPrivate,
        PropertyKind::RoleInterchangeable,
        PropertyKind::MaximallyOnymous,
        PropertyKind::MaximallyIdentified,
    ];

    /// Keyword used by the property surface syntax.
    pub fn keyword(self) -> &'static str {
        match self {
            PropertyKind::AnonymousUpTo => "anon-upto",
            PropertyKind::MinimallyAnonymous => "min-anon",
            PropertyKind::PrivateUpTo => "priv-upto",
            PropertyKind::MinimallyPrivate => "min-priv",
            PropertyKind::RoleInterchangeable => "role-int",
            PropertyKind::MaximallyOnymous => "max-onym",
            PropertyKind::MaximallyIdentified => "max-ident",
        }
    }

    /// Name of the definition the property instantiates.
    pub fn definition(self) -> &'static str {
        match self {
            PropertyKind::AnonymousUpTo => "anonymity up to an anonymity set",
            PropertyKind::MinimallyAnonymous => "minimal anonymity",
            PropertyKind::PrivateUpTo => "privacy up to a privacy set",
            PropertyKind::MinimallyPrivate => "minimal privacy",
            PropertyKind::RoleInterchangeable => "role interchangeability",
            PropertyKind::MaximallyOnymous => "maximal onymity",
            PropertyKind::MaximallyIdentified => "maximal identity",
        }
    }

    pub fn from_keyword(kw: &str) -> Option<PropertyKind> {
        PropertyKind::ALL.into_iter().find(|k| k.keyword() == kw)
    }
}

/// One property instance: the subject fact `θ(agent, action)`, the observer,
/// and whichever set the kind quantifies over.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PropertySpec {
    pub kind: PropertyKind,
    pub agent: AgentId,
    pub action: Action,
    pub observer: AgentId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anonymity_set: Option<Vec<AgentId>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub privacy_set: Option<Vec<Action>>,
    /// Actions role interchangeability ranges over; all declared actions
    /// when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub action_universe: Option<Vec<Action>>,
}

impl PropertySpec {
    fn plain(kind: PropertyKind, agent: &AgentId, action: &Action, observer: &AgentId) -> Self {
        PropertySpec {
            kind,
            agent: agent.clone(),
            action: action.clone(),
            observer: observer.clone(),
            anonymity_set: None,
            privacy_set: None,
            action_universe: None,
        }
    }

    pub fn anonymous_up_to(
        agent: &AgentId,
        action: &Action,
        set: &[AgentId],
        observer: &AgentId,
    ) -> Self {
        PropertySpec {
            anonymity_set: Some(set.to_vec()),
            ..Self::plain(PropertyKind::AnonymousUpTo, agent, action, observer)
        }
    }

    pub fn private_up_to(
        agent: &AgentId,
        action: &Action,
        set: &[Action],
        observer: &AgentId,
    ) -> Self {
        PropertySpec {
            privacy_set: Some(set.to_vec()),
            ..Self::plain(PropertyKind::PrivateUpTo, agent, action, observer)
        }
    }

    pub fn minimally_anonymous(agent: &AgentId, action: &Action, observer: &AgentId) -> Self {
        Self::plain(PropertyKind::MinimallyAnonymous, agent, action, observer)
    }

    pub fn minimally_private(agent: &AgentId, action: &Action, observer: &AgentId) -> Self {
        Self::plain(PropertyKind::MinimallyPrivate, agent, action, observer)
    }

    pub fn maximally_onymous(agent: &AgentId, action: &Action, observer: &AgentId) -> Self {
        Self::plain(PropertyKind::MaximallyOnymous, agent, action, observer)
    }

    pub fn maximally_identified(agent: &AgentId, action: &Action, observer: &AgentId) -> Self {
        Self::plain(PropertyKind::MaximallyIdentified, agent, action, observer)
    }

    pub fn role_interchangeable(
        agent: &AgentId,
        action: &Action,
        observer: &AgentId,
        universe: Option<&[Action]>,
    ) -> Self {
        PropertySpec {
            action_universe: universe.map(<[Action]>::to_vec),
            ..Self::plain(PropertyKind::RoleInterchangeable, agent, action, observer)
        }
    }

    fn well_formed(&self) -> Result<()> {
        let want = (
            self.kind == PropertyKind::AnonymousUpTo,
            self.kind == PropertyKind::PrivateUpTo,
        );
        let have = (self.anonymity_set.is_some(), self.privacy_set.is_some());
        if want != have
            || (self.action_universe.is_some() && self.kind != PropertyKind::RoleInterchangeable)
        {
            return Err(Error::Mismatch(format!(
                "property `{}` carries the wrong set fields",
                self.kind.keyword()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for PropertySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}, {}", self.kind.keyword(), self.agent, self.action)?;
        if let Some(set) = &self.anonymity_set {
            write!(f, ", {{{}}}", join(set))?;
        }
        if let Some(set) = &self.privacy_set {
            write!(f, ", {{{}}}", join(set))?;
        }
        write!(f, ", {}", self.observer)?;
        if let Some(set) = &self.action_universe {
            write!(f, ", {{{}}}", join(set))?;
        }
        f.write_str(")")
    }
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

/// A named conjunct of a compiled definition, e.g. `i2` for the possibility
/// that agent `i2` performed the action.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Conjunct {
    pub label: String,
    pub formula: Formula,
}

/// Antecedent `θ(i, a)` and the expanded conjuncts of the consequent.
#[derive(Clone, Debug)]
pub struct CompiledProperty {
    pub antecedent: Formula,
    pub conjuncts: Vec<Conjunct>,
}

impl CompiledProperty {
    pub fn formula(&self) -> Formula {
        Formula::implies(
            self.antecedent.clone(),
            Formula::conj(self.conjuncts.iter().map(|c| c.formula.clone())),
        )
    }
}

/// Sorts by declaration order and drops duplicates.
fn ordered_agents(sys: &InterpretedSystem, set: &[AgentId]) -> Result<Vec<AgentId>> {
    let mut keyed = set
        .iter()
        .map(|a| {
            sys.agent_position(a)
                .map(|p| (p, a.clone()))
                .ok_or_else(|| Error::UndeclaredAgent(a.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    keyed.sort_by_key(|(p, _)| *p);
    keyed.dedup_by_key(|(p, _)| *p);
    Ok(keyed.into_iter().map(|(_, a)| a).collect())
}

fn ordered_actions(sys: &InterpretedSystem, set: &[Action]) -> Result<Vec<Action>> {
    let mut keyed = set
        .iter()
        .map(|a| {
            sys.action_position(a)
                .map(|p| (p, a.clone()))
                .ok_or_else(|| Error::UndeclaredAction(a.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    keyed.sort_by_key(|(p, _)| *p);
    keyed.dedup_by_key(|(p, _)| *p);
    Ok(keyed.into_iter().map(|(_, a)| a).collect())
}

/// Expands the property's definition over its finite sets.
pub fn compile_parts(sys: &InterpretedSystem, spec: &PropertySpec) -> Result<CompiledProperty> {
    spec.well_formed()?;
    if !sys.has_agent(&spec.agent) {
        return Err(Error::UndeclaredAgent(spec.agent.to_string()));
    }
    if !sys.has_action(&spec.action) {
        return Err(Error::UndeclaredAction(spec.action.to_string()));
    }
    if !sys.has_agent(&spec.observer) {
        return Err(Error::UndeclaredAgent(spec.observer.to_string()));
    }
    let j = &spec.observer;
    let (i, a) = (&spec.agent, &spec.action);
    let theta = Formula::theta;

    let conjuncts = match spec.kind {
        PropertyKind::AnonymousUpTo => {
            let set = ordered_agents(sys, spec.anonymity_set.as_deref().unwrap_or_default())?;
            set.iter()
                .map(|other| Conjunct {
                    label: other.to_string(),
                    formula: Formula::poss(j, theta(other, a)),
                })
                .collect()
        }
        PropertyKind::PrivateUpTo => {
            let set = ordered_actions(sys, spec.privacy_set.as_deref().unwrap_or_default())?;
            set.iter()
                .map(|other| Conjunct {
                    label: other.to_string(),
                    formula: Formula::poss(j, theta(i, other)),
                })
                .collect()
        }
        // Minimal privacy is the same formula as minimal anonymity, and
        // maximal identity the same as maximal onymity.
        PropertyKind::MinimallyAnonymous | PropertyKind::MinimallyPrivate => {
            let formula = Formula::poss(j, Formula::not(theta(i, a)));
            vec![Conjunct {
                label: formula.to_string(),
                formula,
            }]
        }
        PropertyKind::MaximallyOnymous | PropertyKind::MaximallyIdentified => {
            let formula = Formula::knows(j, theta(i, a));
            vec![Conjunct {
                label: formula.to_string(),
                formula,
            }]
        }
        PropertyKind::RoleInterchangeable => {
            let universe = match &spec.action_universe {
                Some(u) => ordered_actions(sys, u)?,
                None => sys.actions().to_vec(),
            };
            let mut parts = Vec::new();
            for other in sys.agent_ids().filter(|x| *x != j) {
                for other_action in &universe {
                    parts.push(Conjunct {
                        label: format!("({other}, {other_action})"),
                        formula: Formula::implies(
                            theta(other, other_action),
                            Formula::poss(j, Formula::and(theta(other, a), theta(i, other_action))),
                        ),
                    });
                }
            }
            parts
        }
    };
    Ok(CompiledProperty {
        antecedent: theta(i, a),
        conjuncts,
    })
}

/// The defining formula of a property instance.
pub fn compile_property(sys: &InterpretedSystem, spec: &PropertySpec) -> Result<Formula> {
    Ok(compile_parts(sys, spec)?.formula())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub run: RunId,
    /// Label of the first conjunct false at `run`.
    pub conjunct: String,
    pub conjunct_formula: Formula,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PropertyReport {
    pub spec: PropertySpec,
    pub definition: &'static str,
    pub holds: bool,
    pub witness_formula: Formula,
    pub counterexample: Option<Counterexample>,
}

pub fn check_property(sys: &InterpretedSystem, spec: &PropertySpec) -> Result<PropertyReport> {
    let compiled = compile_parts(sys, spec)?;
    let witness_formula = compiled.formula();
    let truth = truth_set(sys, &witness_formula)?;
    let counterexample = match truth.first_missing() {
        None => None,
        Some(ri) => {
            let mut found = None;
            for c in &compiled.conjuncts {
                if !truth_set(sys, &c.formula)?.contains(ri) {
                    found = Some(c);
                    break;
                }
            }
            let c = found.expect("a failing implication has a failing conjunct");
            Some(Counterexample {
                run: sys.runs()[ri].id.clone(),
                conjunct: c.label.clone(),
                conjunct_formula: c.formula.clone(),
            })
        }
    };
    Ok(PropertyReport {
        spec: spec.clone(),
        definition: spec.kind.definition(),
        holds: counterexample.is_none(),
        witness_formula,
        counterexample,
    })
}

/// Quick yes/no form of [`check_property`].
pub fn property_holds(sys: &InterpretedSystem, spec: &PropertySpec) -> Result<bool> {
    let compiled = compile_parts(sys, spec)?;
    Ok(truth_set(sys, &compiled.formula())?.is_full())
}

impl FromStr for PropertySpec {
    type Err = Error;

    /// Parses `anon-upto(i, a, {i1,i2}, j)`, `priv-upto(i, a, {a1,a2}, j)`,
    /// `min-anon(i, a, j)`, `min-priv(i, a, j)`, `max-onym(i, a, j)`,
    /// `max-ident(i, a, j)` and `role-int(i, a, j[, {a1,a2}])`.
    fn from_str(text: &str) -> Result<Self> {
        let syntax = |col: usize, msg: String| Error::syntax(1, col + 1, msg);
        let open = text
            .find('(')
            .ok_or_else(|| syntax(text.len(), "expected '('".into()))?;
        let kw = text[..open].trim();
        let kind = PropertyKind::from_keyword(kw)
            .ok_or_else(|| syntax(0, format!("unknown property `{kw}`")))?;
        let body = text[open + 1..].trim_end();
        let body = body
            .strip_suffix(')')
            .ok_or_else(|| syntax(text.len(), "expected ')'".into()))?;
        let args = split_top_level(body);
        let expected = match kind {
            PropertyKind::AnonymousUpTo | PropertyKind::PrivateUpTo => 4..=4,
            PropertyKind::RoleInterchangeable => 3..=4,
            _ => 3..=3,
        };
        if !expected.contains(&args.len()) {
            return Err(syntax(
                open,
                format!(
                    "`{kw}` takes {} arguments, found {}",
                    expected.start(),
                    args.len()
                ),
            ));
        }
        let agent = AgentId::new(parse_name(args[0])?);
        let action = parse_action(args[1])?;
        let mut spec = PropertySpec::plain(kind, &agent, &action, &AgentId::new("_"));
        match kind {
            PropertyKind::AnonymousUpTo => {
                spec.anonymity_set = Some(
                    parse_set(args[2])?
                        .into_iter()
                        .map(|s| parse_name(s).map(AgentId::new))
                        .collect::<Result<_>>()?,
                );
                spec.observer = AgentId::new(parse_name(args[3])?);
            }
            PropertyKind::PrivateUpTo => {
                spec.privacy_set = Some(
                    parse_set(args[2])?
                        .into_iter()
                        .map(parse_action)
                        .collect::<Result<_>>()?,
                );
                spec.observer = AgentId::new(parse_name(args[3])?);
            }
            _ => {
                spec.observer = AgentId::new(parse_name(args[2])?);
                if let Some(universe) = args.get(3) {
                    spec.action_universe = Some(
                        parse_set(universe)?
                            .into_iter()
                            .map(parse_action)
                            .collect::<Result<_>>()?,
                    );
                }
            }
        }
        Ok(spec)
    }
}

/// Splits on commas outside parentheses and braces.
pub(crate) fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '{' => depth += 1,
            ')' | '}' => depth -= 1,
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    let last = s[start..].trim();
    if !last.is_empty() || !out.is_empty() {
        out.push(last);
    }
    out
}

pub(crate) fn is_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub(crate) fn parse_name(s: &str) -> Result<&str> {
    let s = s.trim();
    if is_name(s) {
        Ok(s)
    } else {
        Err(Error::syntax(1, 1, format!("invalid name `{s}`")))
    }
}

/// `family(param)` or a bare `family`.
pub(crate) fn parse_action(s: &str) -> Result<Action> {
    let s = s.trim();
    match s.find('(') {
        None => Ok(Action::bare(parse_name(s)?)),
        Some(open) => {
            let family = parse_name(&s[..open])?;
            let param = s[open + 1..]
                .strip_suffix(')')
                .ok_or_else(|| Error::syntax(1, 1, format!("invalid action `{s}`")))?;
            Ok(Action::new(family, parse_name(param)?))
        }
    }
}

/// `{x, y, ...}`; the braces may enclose nothing.
pub(crate) fn parse_set(s: &str) -> Result<Vec<&str>> {
    let inner = s
        .trim()
        .strip_prefix('{')
        .and_then(|r| r.strip_suffix('}'))
        .ok_or_else(|| Error::syntax(1, 1, format!("expected a set `{{...}}`, found `{s}`")))?;
    Ok(split_top_level(inner)
        .into_iter()
        .filter(|x| !x.is_empty())
        .collect())
}
