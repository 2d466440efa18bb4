//! Independence of the two phases with respect to an observer: whatever the
//! observer considers possible about each phase separately, it considers
//! possible about both together.

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::system::{Action, AgentId, InterpretedSystem};

use super::{ConditionReport, InstanceChecker, ParallelSchema, Schema, SequentialSchema};

/// Longest disjunct list the disjunctive form is checked for by default.
pub const DEFAULT_DISJUNCT_BOUND: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum IndependenceKind {
    /// `P[u] ∧ P[p] ⇒ P[u ∧ p]` for single use/post facts.
    Basic,
    /// The same for conjunctions of two use facts and two post facts.
    Pairwise,
    /// The same for disjunctions of use facts and of post facts.
    Disjunctive,
    /// `P[u] ∧ P[¬p] ⇒ P[u ∧ ¬p]`
    PosNeg,
    /// `P[¬u] ∧ P[p] ⇒ P[¬u ∧ p]`
    NegPos,
    /// `P[a] ∧ P[b] ⇒ P[a ∧ b]` for the two parallel components.
    Parallel,
}

impl IndependenceKind {
    pub const ALL: [IndependenceKind; 6] = [
        IndependenceKind::Basic,
        IndependenceKind::Pairwise,
        IndependenceKind::Disjunctive,
        IndependenceKind::PosNeg,
        IndependenceKind::NegPos,
        IndependenceKind::Parallel,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            IndependenceKind::Basic => "basic",
            IndependenceKind::Pairwise => "pairwise",
            IndependenceKind::Disjunctive => "disjunctive",
            IndependenceKind::PosNeg => "posneg",
            IndependenceKind::NegPos => "negpos",
            IndependenceKind::Parallel => "parallel",
        }
    }

    pub fn from_keyword(kw: &str) -> Option<IndependenceKind> {
        IndependenceKind::ALL
            .into_iter()
            .find(|k| k.keyword() == kw)
    }
}

/// `P[a] ∧ P[b] ⇒ P[a ∧ b]`
fn combine(j: &AgentId, a: Formula, b: Formula) -> Formula {
    Formula::implies(
        Formula::and(Formula::poss(j, a.clone()), Formula::poss(j, b.clone())),
        Formula::poss(j, Formula::and(a, b)),
    )
}

struct Facts {
    /// `(i, k)` with `θ(i, use(k))`, real names outermost.
    uses: Vec<(AgentId, Action)>,
    /// `(k, c)` with `θ(k, post(c))`, pseudonyms outermost.
    posts: Vec<(AgentId, Action)>,
}

fn phase_facts(schema: &SequentialSchema) -> Facts {
    let pseudonyms = schema.pseudonyms();
    let uses = schema
        .first_agents
        .iter()
        .flat_map(|i| {
            pseudonyms
                .iter()
                .map(move |k| (i.clone(), schema.use_action(k)))
        })
        .collect();
    let posts = pseudonyms
        .iter()
        .flat_map(|k| {
            schema
                .second_params
                .iter()
                .map(move |c| (k.clone(), schema.post_action(c)))
        })
        .collect();
    Facts { uses, posts }
}

fn theta(fact: &(AgentId, Action)) -> Formula {
    Formula::theta(&fact.0, &fact.1)
}

fn show(fact: &(AgentId, Action)) -> String {
    format!("{}:{}", fact.0, fact.1)
}

/// Checks one independence variant. Disjunctive lists are bounded by
/// [`DEFAULT_DISJUNCT_BOUND`]; see [`check_disjunctive`] to change it.
pub fn check_independence(
    sys: &InterpretedSystem,
    observer: &AgentId,
    schema: &Schema,
    kind: IndependenceKind,
) -> Result<ConditionReport> {
    sys.partition(observer)?;
    match (kind, schema) {
        (IndependenceKind::Parallel, Schema::Parallel(p)) => parallel(sys, observer, p),
        (IndependenceKind::Parallel, Schema::Sequential(_)) => Err(Error::Mismatch(
            "parallel independence needs a parallel schema".into(),
        )),
        (_, Schema::Parallel(_)) => Err(Error::Mismatch(format!(
            "{} independence needs a sequential schema",
            kind.keyword()
        ))),
        (IndependenceKind::Basic, Schema::Sequential(s)) => basic(sys, observer, s),
        (IndependenceKind::Pairwise, Schema::Sequential(s)) => pairwise(sys, observer, s),
        (IndependenceKind::Disjunctive, Schema::Sequential(s)) => {
            check_disjunctive(sys, observer, s, DEFAULT_DISJUNCT_BOUND)
        }
        (IndependenceKind::PosNeg, Schema::Sequential(s)) => signed(sys, observer, s, true),
        (IndependenceKind::NegPos, Schema::Sequential(s)) => signed(sys, observer, s, false),
    }
}

/// Quantifies over every `i`, `k`, `k'` and `c` independently.
fn basic(sys: &InterpretedSystem, j: &AgentId, s: &SequentialSchema) -> Result<ConditionReport> {
    s.validate(sys)?;
    let facts = phase_facts(s);
    let mut chk = InstanceChecker::new(sys, "basic independence");
    'outer: for u in &facts.uses {
        for p in &facts.posts {
            let f = combine(j, theta(u), theta(p));
            if !chk.check(f, || format!("{} {}", show(u), show(p)))? {
                break 'outer;
            }
        }
    }
    Ok(chk.finish())
}

/// Ordered pairs `(i0,k0),(i1,k1)` and their swaps give the same formula up
/// to commutativity of `∧`, so each unordered pair (with repetition) of use
/// facts is checked once, and likewise for post facts.
fn pairwise(sys: &InterpretedSystem, j: &AgentId, s: &SequentialSchema) -> Result<ConditionReport> {
    s.validate(sys)?;
    let facts = phase_facts(s);
    let pairs = |v: &[(AgentId, Action)]| -> Vec<(usize, usize)> {
        (0..v.len())
            .flat_map(|x| (x..v.len()).map(move |y| (x, y)))
            .collect()
    };
    let use_pairs = pairs(&facts.uses);
    let post_pairs = pairs(&facts.posts);
    let mut chk = InstanceChecker::new(sys, "pairwise independence");
    'outer: for (u0, u1) in &use_pairs {
        let (u0, u1) = (&facts.uses[*u0], &facts.uses[*u1]);
        let uses = Formula::and(theta(u0), theta(u1));
        for (p0, p1) in &post_pairs {
            let (p0, p1) = (&facts.posts[*p0], &facts.posts[*p1]);
            let posts = Formula::and(theta(p0), theta(p1));
            let f = combine(j, uses.clone(), posts);
            let label = || format!("{} {} {} {}", show(u0), show(u1), show(p0), show(p1));
            if !chk.check(f, label)? {
                break 'outer;
            }
        }
    }
    Ok(chk.finish())
}

/// Disjunctive independence over every nonempty list of at most `bound`
/// distinct use facts and every such list of post facts.
pub fn check_disjunctive(
    sys: &InterpretedSystem,
    j: &AgentId,
    s: &SequentialSchema,
    bound: usize,
) -> Result<ConditionReport> {
    s.validate(sys)?;
    sys.partition(j)?;
    let facts = phase_facts(s);
    let lists = |v: &[(AgentId, Action)]| -> Vec<Vec<usize>> {
        (1..=bound.min(v.len()))
            .flat_map(|n| (0..v.len()).combinations(n))
            .collect()
    };
    let use_lists = lists(&facts.uses);
    let post_lists = lists(&facts.posts);
    let mut chk = InstanceChecker::new(sys, format!("disjunctive independence (lists <= {bound})"));
    'outer: for ul in &use_lists {
        let uses = Formula::disj(ul.iter().map(|x| theta(&facts.uses[*x])));
        for pl in &post_lists {
            let posts = Formula::disj(pl.iter().map(|x| theta(&facts.posts[*x])));
            let f = combine(j, uses.clone(), posts);
            let label = || {
                let u: Vec<_> = ul.iter().map(|x| show(&facts.uses[*x])).collect();
                let p: Vec<_> = pl.iter().map(|x| show(&facts.posts[*x])).collect();
                format!("[{}] [{}]", u.join(" | "), p.join(" | "))
            };
            if !chk.check(f, label)? {
                break 'outer;
            }
        }
    }
    Ok(chk.finish())
}

/// Positive-negative (`negate_post`) or negative-positive form.
fn signed(
    sys: &InterpretedSystem,
    j: &AgentId,
    s: &SequentialSchema,
    negate_post: bool,
) -> Result<ConditionReport> {
    s.validate(sys)?;
    let facts = phase_facts(s);
    let name = if negate_post {
        "positive-negative independence"
    } else {
        "negative-positive independence"
    };
    let mut chk = InstanceChecker::new(sys, name);
    'outer: for u in &facts.uses {
        for p in &facts.posts {
            let (a, b) = if negate_post {
                (theta(u), Formula::not(theta(p)))
            } else {
                (Formula::not(theta(u)), theta(p))
            };
            if !chk.check(combine(j, a, b), || format!("{} {}", show(u), show(p)))? {
                break 'outer;
            }
        }
    }
    Ok(chk.finish())
}

fn parallel(sys: &InterpretedSystem, j: &AgentId, p: &ParallelSchema) -> Result<ConditionReport> {
    p.validate(sys)?;
    let mut chk = InstanceChecker::new(sys, "parallel independence");
    'outer: for i in p.performers(sys, j) {
        for c in &p.params {
            let f = combine(
                j,
                Formula::theta(&i, &p.a_action(c)),
                Formula::theta(&i, &p.b_action(c)),
            );
            if !chk.check(f, || format!("i={i} c={c}"))? {
                break 'outer;
            }
        }
    }
    Ok(chk.finish())
}

/// `θ(k', post(c)) ⇒ ⋀_{i,k} (P[θ(i, use(k))] ⇒ P[θ(i, use(k)) ∧ θ(k', post(c))])`
/// for every `k'` and `c`; equivalent to basic independence on every system.
pub fn check_posting_reformulation(
    sys: &InterpretedSystem,
    j: &AgentId,
    s: &SequentialSchema,
) -> Result<ConditionReport> {
    s.validate(sys)?;
    sys.partition(j)?;
    let facts = phase_facts(s);
    let mut chk = InstanceChecker::new(sys, "independence, posting-anchored form");
    for p in &facts.posts {
        let f = Formula::implies(theta(p), inner_conjunction(j, &facts, p));
        if !chk.check(f, || show(p))? {
            break;
        }
    }
    Ok(chk.finish())
}

/// `θ(i', use(k')) ∧ θ(k', post(c)) ⇒ ⋀_{i,k} (P[θ(i, use(k))] ⇒
/// P[θ(i, use(k)) ∧ θ(k', post(c))])` for every `i'`, `k'` and `c`; under
/// backward causality this is equivalent to basic independence.
pub fn check_registration_reformulation(
    sys: &InterpretedSystem,
    j: &AgentId,
    s: &SequentialSchema,
) -> Result<ConditionReport> {
    s.validate(sys)?;
    sys.partition(j)?;
    let facts = phase_facts(s);
    let mut chk = InstanceChecker::new(sys, "independence, submission-anchored form");
    'outer: for i2 in &s.first_agents {
        for p in &facts.posts {
            let link = Formula::and(Formula::theta(i2, &s.use_action(&p.0)), theta(p));
            let f = Formula::implies(link, inner_conjunction(j, &facts, p));
            if !chk.check(f, || format!("i'={i2} {}", show(p)))? {
                break 'outer;
            }
        }
    }
    Ok(chk.finish())
}

fn inner_conjunction(j: &AgentId, facts: &Facts, p: &(AgentId, Action)) -> Formula {
    Formula::conj(facts.uses.iter().map(|u| {
        Formula::implies(
            Formula::poss(j, theta(u)),
            Formula::poss(j, Formula::and(theta(u), theta(p))),
        )
    }))
}
