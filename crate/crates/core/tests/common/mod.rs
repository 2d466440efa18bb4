//! Brute-force reference semantics over plain strings. Nothing here goes
//! through the library's run sets or compiled formulas: every modality is
//! a direct loop over the runs in the observer's block.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use itertools::Itertools;

use epicomp::formula::Formula;
use epicomp::scenarios::Universe;
use epicomp::InterpretedSystem;
use proptest::prelude::*;

pub type Fact = (String, String);

#[derive(Clone, Debug)]
pub struct Model {
    pub ids: Vec<String>,
    pub runs: Vec<BTreeSet<Fact>>,
    /// Block label of every run, per observer.
    pub blocks: HashMap<String, Vec<usize>>,
    pub agents: Vec<String>,
}

impl Model {
    pub fn of(sys: &InterpretedSystem) -> Model {
        let runs = sys
            .runs()
            .iter()
            .map(|r| {
                r.facts
                    .iter()
                    .map(|f| (f.agent.to_string(), f.action.to_string()))
                    .collect()
            })
            .collect();
        let mut blocks = HashMap::new();
        for decl in sys.partition_decls() {
            let mut label = vec![usize::MAX; sys.run_count()];
            for (b, block) in decl.blocks.iter().enumerate() {
                for id in block {
                    label[sys.run_position(id).unwrap()] = b;
                }
            }
            blocks.insert(decl.observer.to_string(), label);
        }
        Model {
            ids: sys.runs().iter().map(|r| r.id.to_string()).collect(),
            runs,
            blocks,
            agents: sys.agent_ids().map(ToString::to_string).collect(),
        }
    }

    pub fn has(&self, r: usize, agent: &str, action: &str) -> bool {
        self.runs[r].contains(&(agent.to_string(), action.to_string()))
    }

    /// Runs the observer cannot tell apart from `r`.
    pub fn alike(&self, j: &str, r: usize) -> Vec<usize> {
        let label = &self.blocks[j];
        (0..self.runs.len())
            .filter(|&x| label[x] == label[r])
            .collect()
    }

    pub fn possible(&self, j: &str, r: usize, p: impl Fn(usize) -> bool) -> bool {
        self.alike(j, r).into_iter().any(p)
    }

    pub fn knows(&self, j: &str, r: usize, p: impl Fn(usize) -> bool) -> bool {
        self.alike(j, r).into_iter().all(p)
    }

    pub fn eval(&self, f: &Formula, r: usize) -> bool {
        match f {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(fact) => self.has(r, fact.agent.as_str(), &fact.action.to_string()),
            Formula::Not(g) => !self.eval(g, r),
            Formula::And(a, b) => self.eval(a, r) && self.eval(b, r),
            Formula::Or(a, b) => self.eval(a, r) || self.eval(b, r),
            Formula::Implies(a, b) => !self.eval(a, r) || self.eval(b, r),
            Formula::Iff(a, b) => self.eval(a, r) == self.eval(b, r),
            Formula::Knows(j, g) => self.knows(j.as_str(), r, |x| self.eval(g, x)),
            Formula::Poss(j, g) => self.possible(j.as_str(), r, |x| self.eval(g, x)),
        }
    }

    pub fn valid(&self, f: &Formula) -> bool {
        (0..self.runs.len()).all(|r| self.eval(f, r))
    }

    fn every_run_with(&self, agent: &str, action: &str, p: impl Fn(usize) -> bool) -> bool {
        (0..self.runs.len()).all(|r| !self.has(r, agent, action) || p(r))
    }

    pub fn anon_upto(&self, i: &str, a: &str, set: &[String], j: &str) -> bool {
        self.every_run_with(i, a, |r| {
            set.iter()
                .all(|other| self.possible(j, r, |x| self.has(x, other, a)))
        })
    }

    pub fn priv_upto(&self, i: &str, a: &str, set: &[String], j: &str) -> bool {
        self.every_run_with(i, a, |r| {
            set.iter()
                .all(|other| self.possible(j, r, |x| self.has(x, i, other)))
        })
    }

    pub fn min_anon(&self, i: &str, a: &str, j: &str) -> bool {
        self.every_run_with(i, a, |r| self.possible(j, r, |x| !self.has(x, i, a)))
    }

    pub fn max_onym(&self, i: &str, a: &str, j: &str) -> bool {
        self.every_run_with(i, a, |r| self.knows(j, r, |x| self.has(x, i, a)))
    }

    /// Whenever `i` performs `a` and some other agent `i2` performs `a2`,
    /// the observer allows the roles swapped.
    pub fn role_int(&self, i: &str, a: &str, j: &str, universe: &[String]) -> bool {
        self.every_run_with(i, a, |r| {
            self.agents.iter().filter(|x| *x != j).all(|i2| {
                universe.iter().all(|a2| {
                    !self.has(r, i2, a2)
                        || self.possible(j, r, |x| self.has(x, i2, a) && self.has(x, i, a2))
                })
            })
        })
    }

    /// Adds `submit(c)` for `i` wherever `i` uses some `k` that posts `c`.
    pub fn with_submits(&self, real: &[String], pseudo: &[String], articles: &[String]) -> Model {
        let mut m = self.clone();
        for (r, facts) in m.runs.iter_mut().enumerate() {
            for i in real {
                for c in articles {
                    let linked = pseudo.iter().any(|k| {
                        self.has(r, i, &format!("use({k})"))
                            && self.has(r, k, &format!("post({c})"))
                    });
                    if linked {
                        facts.insert((i.clone(), format!("submit({c})")));
                    }
                }
            }
        }
        m
    }

    /// Adds `p(c)` for every agent doing both `a(c)` and `b(c)`.
    pub fn with_parallel(&self, a: &str, b: &str, p: &str, params: &[String]) -> Model {
        let mut m = self.clone();
        for (r, facts) in m.runs.iter_mut().enumerate() {
            for i in &self.agents {
                for c in params {
                    if self.has(r, i, &format!("{a}({c})")) && self.has(r, i, &format!("{b}({c})"))
                    {
                        facts.insert((i.clone(), format!("{p}({c})")));
                    }
                }
            }
        }
        m
    }
}

/// Basic independence straight from its definition.
pub fn basic_independent(m: &Model) -> bool {
    let (ir, ip, c) = (names("i", 2), names("k", 2), names("c", 2));
    (0..m.runs.len()).all(|r| {
        ir.iter().cartesian_product(&ip).all(|(i, k)| {
            ip.iter().cartesian_product(&c).all(|(k2, c)| {
                let (u, p) = (format!("use({k})"), format!("post({c})"));
                !(m.possible("j", r, |x| m.has(x, i, &u))
                    && m.possible("j", r, |x| m.has(x, k2, &p)))
                    || m.possible("j", r, |x| m.has(x, i, &u) && m.has(x, k2, &p))
            })
        })
    })
}

/// Pairwise independence over unordered pairs of use facts and of post
/// facts, a pair possibly repeating one fact.
pub fn pairwise_independent(m: &Model) -> bool {
    let (ir, ip, c) = (names("i", 2), names("k", 2), names("c", 2));
    let uses: Vec<(String, String)> = ir
        .iter()
        .cartesian_product(&ip)
        .map(|(i, k)| (i.clone(), format!("use({k})")))
        .collect();
    let posts: Vec<(String, String)> = ip
        .iter()
        .cartesian_product(&c)
        .map(|(k, c)| (k.clone(), format!("post({c})")))
        .collect();
    let pairs = |v: &[(String, String)]| -> Vec<[(String, String); 2]> {
        v.iter()
            .combinations_with_replacement(2)
            .map(|p| [p[0].clone(), p[1].clone()])
            .collect()
    };
    let both = |x: usize, p: &[(String, String); 2]| p.iter().all(|(a, b)| m.has(x, a, b));
    (0..m.runs.len()).all(|r| {
        pairs(&uses).iter().all(|u| {
            pairs(&posts).iter().all(|p| {
                !(m.possible("j", r, |x| both(x, u)) && m.possible("j", r, |x| both(x, p)))
                    || m.possible("j", r, |x| both(x, u) && both(x, p))
            })
        })
    })
}

pub fn names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|x| format!("{prefix}{x}")).collect()
}

pub fn family(name: &str, params: &[String]) -> Vec<String> {
    params.iter().map(|p| format!("{name}({p})")).collect()
}

/// A system over the 2×2×2 bulletin-board universe: one to four runs and a
/// partition given by block labels.
pub fn board_system() -> impl Strategy<Value = InterpretedSystem> {
    small_system(Universe::sequential(2, 2, 2))
}

pub fn small_system(u: Universe) -> impl Strategy<Value = InterpretedSystem> {
    let width = u.facts.len();
    prop::collection::vec((0u64..(1 << width), 0usize..4), 1..=4).prop_map(move |runs| {
        let masks: Vec<u64> = runs.iter().map(|(m, _)| *m).collect();
        let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); 4];
        for (x, (_, label)) in runs.iter().enumerate() {
            blocks[*label].push(x);
        }
        blocks.retain(|b| !b.is_empty());
        u.system("prop", &masks, Some(blocks)).unwrap()
    })
}

fn board_leaf() -> impl Strategy<Value = Formula> {
    let facts = Universe::sequential(2, 2, 2).facts;
    prop_oneof![
        1 => Just(Formula::True),
        1 => Just(Formula::False),
        8 => prop::sample::select(facts).prop_map(Formula::Atom),
    ]
}

/// Formulas over the atoms of the 2×2×2 bulletin-board universe with the
/// observer `j`.
pub fn board_formula() -> impl Strategy<Value = Formula> {
    board_leaf().prop_recursive(5, 40, 2, |inner| {
        let j = epicomp::AgentId::new("j");
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::iff(a, b)),
            inner.clone().prop_map({
                let j = j.clone();
                move |f| Formula::knows(&j, f)
            }),
            inner.prop_map(move |f| Formula::poss(&j, f)),
        ]
    })
}

/// Modality-free formulas over the same atoms.
pub fn board_propositional() -> impl Strategy<Value = Formula> {
    board_leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::or(a, b)),
        ]
    })
}

pub mod laws {
    //! Semantic laws as reusable property bodies.

    use super::*;
    use epicomp::composition::{derive, erase_family};
    use epicomp::formula::{parse, render, truth_set};
    use epicomp::sysfile::{from_json, parse_system, to_json, write_system};
    use epicomp::{AgentId, RunId};
    use proptest::test_runner::TestCaseError;

    type Outcome = Result<(), TestCaseError>;

    fn j() -> AgentId {
        AgentId::new("j")
    }

    fn truth(sys: &InterpretedSystem, f: &Formula) -> Vec<bool> {
        let set = truth_set(sys, f).unwrap();
        (0..sys.run_count()).map(|r| set.contains(r)).collect()
    }

    pub fn agrees_with_oracle(sys: &InterpretedSystem, f: &Formula) -> Outcome {
        let m = Model::of(sys);
        let expected: Vec<bool> = (0..sys.run_count()).map(|r| m.eval(f, r)).collect();
        prop_assert_eq!(truth(sys, f), expected, "{}", f);
        Ok(())
    }

    pub fn duality(sys: &InterpretedSystem, f: &Formula) -> Outcome {
        let p = Formula::poss(&j(), f.clone());
        let nkn = Formula::not(Formula::knows(&j(), Formula::not(f.clone())));
        prop_assert_eq!(truth(sys, &p), truth(sys, &nkn));
        Ok(())
    }

    pub fn veridicality(sys: &InterpretedSystem, f: &Formula) -> Outcome {
        let k = Formula::implies(Formula::knows(&j(), f.clone()), f.clone());
        prop_assert!(truth(sys, &k).into_iter().all(|x| x));
        Ok(())
    }

    pub fn kernel_partition(sys: &InterpretedSystem) -> Outcome {
        let ids: Vec<RunId> = sys.runs().iter().map(|r| r.id.clone()).collect();
        let kernel = |r: &RunId| -> BTreeSet<String> {
            sys.kernel(&j(), r)
                .unwrap()
                .into_iter()
                .map(|x| x.id.to_string())
                .collect()
        };
        for r in &ids {
            let kr = kernel(r);
            prop_assert!(kr.contains(r.as_str()));
            for s in &ids {
                let ks = kernel(s);
                prop_assert!(kr == ks || kr.is_disjoint(&ks));
            }
        }
        Ok(())
    }

    /// Putting every run in one block can only make `P f` truer and `K f`
    /// falser, for modality-free `f`.
    pub fn coarsening(sys: &InterpretedSystem, f: &Formula) -> Outcome {
        let mut decl = sys.to_decl();
        decl.indist[0].blocks = vec![decl.runs.iter().map(|r| r.id.clone()).collect()];
        let coarse = decl.build().unwrap();
        let p = Formula::poss(&j(), f.clone());
        let k = Formula::knows(&j(), f.clone());
        for (fine, coarse) in truth(sys, &p).into_iter().zip(truth(&coarse, &p)) {
            prop_assert!(!fine || coarse);
        }
        for (fine, coarse) in truth(sys, &k).into_iter().zip(truth(&coarse, &k)) {
            prop_assert!(!coarse || fine);
        }
        Ok(())
    }

    pub fn round_trip(f: &Formula) -> Outcome {
        let text = render(f);
        prop_assert_eq!(&parse(&text).unwrap(), f, "{}", text);
        Ok(())
    }

    /// Deriving `submit` adds exactly the linked facts and changes the truth
    /// of no formula over the old atoms.
    pub fn derivation_preserves(sys: &InterpretedSystem, f: &Formula) -> Outcome {
        let u = Universe::sequential(2, 2, 2);
        let derived = derive(sys, &u.schema).unwrap();
        prop_assert_eq!(truth(sys, f), truth(&derived, f));
        let expected = Model::of(sys).with_submits(&names("i", 2), &names("k", 2), &names("c", 2));
        prop_assert_eq!(Model::of(&derived).runs, expected.runs);
        prop_assert_eq!(&erase_family(&derived, "submit").unwrap(), sys);
        Ok(())
    }

    pub fn file_round_trip(sys: &InterpretedSystem) -> Outcome {
        prop_assert_eq!(&parse_system(&write_system(sys)).unwrap(), sys);
        prop_assert_eq!(&from_json(&to_json(sys)).unwrap(), sys);
        Ok(())
    }
}
