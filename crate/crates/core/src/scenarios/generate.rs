//! Fact universes and the systems drawn from them, either exhaustively or
//! at random.

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::composition::{ParallelSchema, Schema, SequentialSchema};
use crate::error::{Error, Result};
use crate::system::{
    build_system, Action, Agent, AgentId, Fact, InterpretedSystem, PartitionDecl, Role, Run, RunId,
    SystemDecl,
};

/// Which composition a generated system is built for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Shape {
    /// Real names `i*`, pseudonyms `k*`, articles `c*`; facts `θ(i, use(k))`
    /// and `θ(k, post(c))`.
    Sequential,
    /// Agents `i*`, parameters `c*`; facts `θ(i, act_a(c))` and
    /// `θ(i, act_b(c))`.
    Parallel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum PartitionPolicy {
    /// The observer cannot tell any two runs apart.
    SingleBlock,
    /// Each run is assigned a uniformly random block label.
    Random,
    /// The observer tells every run apart.
    Discrete,
}

/// How the facts of one random run are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum RunStyle {
    /// Every fact independently with probability one half.
    Uniform,
    /// Sequential shape only: every real name uses exactly one pseudonym
    /// and every article is posted by exactly one pseudonym, all chosen
    /// uniformly. Parallel universes fall back to uniform draws.
    BulletinBoard,
}

/// The agents, actions and candidate facts of a generated system, plus the
/// schema and observer its claims are checked with.
#[derive(Clone, Debug)]
pub struct Universe {
    pub shape: Shape,
    pub agents: Vec<Agent>,
    pub actions: Vec<Action>,
    /// Bit `n` of a run mask stands for `facts[n]`.
    pub facts: Vec<Fact>,
    pub schema: Schema,
    pub observer: AgentId,
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|x| format!("{prefix}{x}")).collect()
}

impl Universe {
    /// Real-name agents use pseudonyms, pseudonyms post articles.
    pub fn sequential(real: usize, pseudo: usize, articles: usize) -> Universe {
        let (ir, ip, c) = (names("i", real), names("k", pseudo), names("c", articles));
        let mut agents: Vec<Agent> = Vec::new();
        for (set, role) in [(&ir, Role::Real), (&ip, Role::Pseudo)] {
            agents.extend(set.iter().map(|n| Agent {
                id: AgentId::new(n),
                role: Some(role),
            }));
        }
        agents.push(Agent {
            id: AgentId::new("j"),
            role: Some(Role::Observer),
        });
        let schema = SequentialSchema {
            first_family: "use".into(),
            first_params: ip.clone(),
            first_agents: ir.iter().map(AgentId::new).collect(),
            second_family: "post".into(),
            second_params: c.clone(),
            derived_family: "submit".into(),
        };
        let mut facts = Vec::new();
        for i in &schema.first_agents {
            for k in schema.pseudonyms() {
                facts.push(Fact::new(i.clone(), schema.use_action(&k)));
            }
        }
        for k in schema.pseudonyms() {
            for c in &c {
                facts.push(Fact::new(k.clone(), schema.post_action(c)));
            }
        }
        let actions = schema
            .use_actions()
            .into_iter()
            .chain(schema.post_actions())
            .collect();
        Universe {
            shape: Shape::Sequential,
            agents,
            actions,
            facts,
            schema: Schema::Sequential(schema),
            observer: AgentId::new("j"),
        }
    }

    /// Agents `i1..` perform `act_a(c)` and `act_b(c)`, composed into
    /// `act_p(c)`.
    pub fn parallel(agents: usize, params: usize) -> Universe {
        let params = names("c", params);
        let params: Vec<&str> = params.iter().map(String::as_str).collect();
        Universe::parallel_named(
            ParallelSchema::new("act_a", "act_b", "act_p", &params),
            agents,
        )
    }

    /// Parallel universe with caller-chosen family and parameter names.
    pub fn parallel_named(schema: ParallelSchema, agents: usize) -> Universe {
        let ids: Vec<AgentId> = names("i", agents).iter().map(AgentId::new).collect();
        let mut all: Vec<Agent> = ids
            .iter()
            .map(|id| Agent {
                id: id.clone(),
                role: None,
            })
            .collect();
        all.push(Agent {
            id: AgentId::new("j"),
            role: Some(Role::Observer),
        });
        let actions: Vec<Action> = schema
            .a_actions()
            .into_iter()
            .chain(schema.b_actions())
            .collect();
        let facts = ids
            .iter()
            .flat_map(|i| actions.iter().map(move |a| Fact::new(i.clone(), a.clone())))
            .collect();
        Universe {
            shape: Shape::Parallel,
            agents: all,
            actions,
            facts,
            schema: Schema::Parallel(schema),
            observer: AgentId::new("j"),
        }
    }

    /// One run mask in the given style.
    pub fn draw_mask(&self, style: RunStyle, rng: &mut ChaCha8Rng) -> u64 {
        let width = self.facts.len();
        match (style, &self.schema) {
            (RunStyle::BulletinBoard, Schema::Sequential(s)) => {
                let (r, p, c) = (
                    s.first_agents.len(),
                    s.first_params.len(),
                    s.second_params.len(),
                );
                let mut m = 0u64;
                for i in 0..r {
                    m |= 1 << (i * p + rng.gen_range(0..p));
                }
                for a in 0..c {
                    m |= 1 << (r * p + rng.gen_range(0..p) * c + a);
                }
                m
            }
            _ => {
                let full = if width == 64 {
                    u64::MAX
                } else {
                    (1u64 << width) - 1
                };
                rng.gen::<u64>() & full
            }
        }
    }

    pub fn for_shape(shape: Shape, real: usize, pseudo: usize, articles: usize) -> Universe {
        match shape {
            Shape::Sequential => Universe::sequential(real, pseudo, articles),
            Shape::Parallel => Universe::parallel(real, articles),
        }
    }

    /// Runs `r1, r2, ...` with the facts selected by `masks`; `blocks`
    /// groups run indices for the observer, a single block when `None`.
    pub fn system(
        &self,
        name: &str,
        masks: &[u64],
        blocks: Option<Vec<Vec<usize>>>,
    ) -> Result<InterpretedSystem> {
        let runs: Vec<Run> = masks
            .iter()
            .enumerate()
            .map(|(x, m)| Run {
                id: RunId::new(format!("r{}", x + 1)),
                facts: self
                    .facts
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| m >> b & 1 == 1)
                    .map(|(_, f)| f.clone())
                    .collect(),
            })
            .collect();
        let blocks = blocks.unwrap_or_else(|| vec![(0..runs.len()).collect()]);
        let indist = vec![PartitionDecl {
            observer: self.observer.clone(),
            blocks: blocks
                .iter()
                .map(|b| b.iter().map(|x| runs[*x].id.clone()).collect())
                .collect(),
        }];
        build_system(SystemDecl {
            name: name.to_string(),
            agents: self.agents.clone(),
            actions: self.actions.clone(),
            runs,
            indist,
        })
    }

    /// Every system of 1 to `max_runs` pairwise distinct runs over this
    /// universe with a single observer block, in increasing mask order.
    pub fn exhaustive(&self, max_runs: usize) -> impl Iterator<Item = InterpretedSystem> + '_ {
        let types = 1u64 << self.facts.len();
        (1..=max_runs).flat_map(move |n| {
            (0..types).combinations(n).map(move |masks| {
                let name = format!("x{}", masks.iter().map(|m| format!("{m:x}")).join("-"));
                self.system(&name, &masks, None)
                    .expect("generated systems are well formed")
            })
        })
    }
}

/// Parameters of [`random_system`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GenConfig {
    pub shape: Shape,
    /// `|I_R|`, or the number of agents for the parallel shape.
    pub real: usize,
    /// `|I_P|`; unused by the parallel shape.
    pub pseudo: usize,
    /// `|C|`.
    pub articles: usize,
    pub max_runs: usize,
    pub partition: PartitionPolicy,
    pub style: RunStyle,
    pub seed: u64,
    /// Number of systems a search may draw.
    pub budget: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            shape: Shape::Sequential,
            real: 2,
            pseudo: 2,
            articles: 2,
            max_runs: 4,
            partition: PartitionPolicy::SingleBlock,
            style: RunStyle::Uniform,
            seed: 0,
            budget: 10_000,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        let pseudo_ok = self.shape == Shape::Parallel || self.pseudo >= 1;
        if self.real == 0 || !pseudo_ok || self.articles == 0 || self.max_runs == 0 {
            return Err(Error::Mismatch(
                "generator counts must be at least 1".into(),
            ));
        }
        if self.universe().facts.len() > 64 {
            return Err(Error::Mismatch("fact universe larger than 64 facts".into()));
        }
        Ok(())
    }

    pub fn universe(&self) -> Universe {
        Universe::for_shape(self.shape, self.real, self.pseudo, self.articles)
    }
}

/// Draws a system from `universe` using `rng`: a uniform run count in
/// `1..=max_runs`, runs in the given style, and a partition per `policy`.
pub fn draw_system(
    universe: &Universe,
    max_runs: usize,
    policy: PartitionPolicy,
    style: RunStyle,
    name: &str,
    rng: &mut ChaCha8Rng,
) -> InterpretedSystem {
    let n = rng.gen_range(1..=max_runs);
    let masks: Vec<u64> = (0..n).map(|_| universe.draw_mask(style, rng)).collect();
    let blocks = match policy {
        PartitionPolicy::SingleBlock => None,
        PartitionPolicy::Discrete => Some((0..n).map(|x| vec![x]).collect()),
        PartitionPolicy::Random => {
            let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            let groups = (0..n)
                .map(|l| (0..n).filter(|x| labels[*x] == l).collect::<Vec<_>>())
                .filter(|g| !g.is_empty())
                .collect();
            Some(groups)
        }
    };
    universe
        .system(name, &masks, blocks)
        .expect("generated systems are well formed")
}

/// Deterministic in `cfg.seed`.
pub fn random_system(cfg: &GenConfig) -> Result<InterpretedSystem> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    Ok(draw_system(
        &cfg.universe(),
        cfg.max_runs,
        cfg.partition,
        cfg.style,
        &format!("random-{}", cfg.seed),
        &mut rng,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn universes_have_expected_sizes() {
        let u = Universe::sequential(2, 2, 2);
        assert_eq!(u.facts.len(), 8);
        assert_eq!(u.facts[0].to_string(), "i1:use(k1)");
        assert_eq!(u.facts[7].to_string(), "k2:post(c2)");
        let p = Universe::parallel(3, 2);
        assert_eq!(p.facts.len(), 12);
        assert_eq!(p.facts[1].to_string(), "i1:act_a(c2)");
    }

    #[test]
    fn exhaustive_counts() {
        let u = Universe::sequential(1, 1, 1);
        // 4 run types: 4 singletons and 6 pairs.
        assert_eq!(u.exhaustive(2).count(), 10);
        let u = Universe::sequential(2, 2, 2);
        assert_eq!(u.exhaustive(1).count(), 256);
    }

    #[test]
    fn random_systems_are_deterministic() {
        let cfg = GenConfig::default();
        assert_eq!(random_system(&cfg).unwrap(), random_system(&cfg).unwrap());
        let one = GenConfig { max_runs: 1, ..cfg };
        for seed in 0..20 {
            assert_eq!(
                random_system(&GenConfig { seed, ..one })
                    .unwrap()
                    .run_count(),
                1
            );
        }
        let bad = GenConfig { real: 0, ..cfg };
        assert!(random_system(&bad).is_err());
    }

    #[test]
    fn bulletin_board_runs_are_exhaustive_and_exclusive() {
        let u = Universe::sequential(3, 2, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let m = u.draw_mask(RunStyle::BulletinBoard, &mut rng);
            for i in 0..3 {
                assert_eq!((m >> (i * 2) & 0b11).count_ones(), 1);
            }
            for c in 0..3 {
                let posters = (0..2).filter(|k| m >> (6 + k * 3 + c) & 1 == 1).count();
                assert_eq!(posters, 1);
            }
        }
    }

    #[test]
    fn random_partitions_cover_all_runs() {
        for seed in 0..50 {
            let cfg = GenConfig {
                partition: PartitionPolicy::Random,
                seed,
                ..GenConfig::default()
            };
            let sys = random_system(&cfg).unwrap();
            let p = sys.partition(&"j".into()).unwrap();
            let covered: usize = p.blocks().iter().map(Vec::len).sum();
            assert_eq!(covered, sys.run_count());
        }
    }
}
