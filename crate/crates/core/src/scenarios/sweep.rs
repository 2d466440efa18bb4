//! Claims run against many systems at once: exhaustive enumeration of a
//! tiny universe, seeded random sampling, and counterexample search with
//! hypotheses dropped.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::composition::Schema;
use crate::error::Result;
use crate::system::{AgentId, InterpretedSystem};

use super::claims::{ClaimBench, ClaimId, ClaimReport, Flavor, Verdict};
use super::generate::{draw_system, GenConfig, PartitionPolicy, RunStyle, Shape, Universe};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClaimStats {
    pub claim: ClaimId,
    pub systems: usize,
    pub confirmed: usize,
    pub vacuous: usize,
    pub refuted: usize,
}

impl ClaimStats {
    fn new(claim: ClaimId) -> Self {
        ClaimStats {
            claim,
            systems: 0,
            confirmed: 0,
            vacuous: 0,
            refuted: 0,
        }
    }

    pub fn vacuity_rate(&self) -> f64 {
        if self.systems == 0 {
            0.0
        } else {
            self.vacuous as f64 / self.systems as f64
        }
    }
}

/// Per-claim verdict counts over a stream of systems, keeping the first
/// refuting system of each claim.
#[derive(Clone, Debug)]
pub struct Tally {
    pub stats: BTreeMap<ClaimId, ClaimStats>,
    pub refutations: BTreeMap<ClaimId, InterpretedSystem>,
    dropped: Vec<String>,
}

impl Tally {
    pub fn new(claims: &[ClaimId]) -> Self {
        Tally::dropping(claims, &[])
    }

    /// Counts verdicts with the named hypotheses left out.
    pub fn dropping(claims: &[ClaimId], dropped: &[String]) -> Self {
        Tally {
            stats: claims.iter().map(|c| (*c, ClaimStats::new(*c))).collect(),
            refutations: BTreeMap::new(),
            dropped: dropped.to_vec(),
        }
    }

    fn wants(&self, flavor: Flavor) -> bool {
        self.stats.keys().any(|c| c.flavor() == flavor)
    }

    pub fn record(
        &mut self,
        sys: &InterpretedSystem,
        schema: &Schema,
        observer: &AgentId,
    ) -> Result<()> {
        let flavor = match schema {
            Schema::Sequential(_) => Flavor::Sequential,
            Schema::Parallel(_) => Flavor::Parallel,
        };
        let mut bench = ClaimBench::new(sys, schema, observer);
        for (claim, stats) in self.stats.iter_mut() {
            if claim.flavor() != flavor {
                continue;
            }
            stats.systems += 1;
            match bench.verdict(*claim, &self.dropped)? {
                Verdict::Confirmed => stats.confirmed += 1,
                Verdict::Vacuous | Verdict::NotWitnessed => stats.vacuous += 1,
                Verdict::Refuted => {
                    stats.refuted += 1;
                    self.refutations
                        .entry(*claim)
                        .or_insert_with(|| sys.clone());
                }
            }
        }
        Ok(())
    }

    pub fn total_refuted(&self) -> usize {
        self.stats.values().map(|s| s.refuted).sum()
    }

    pub fn merge(&mut self, other: Tally) {
        for (claim, s) in other.stats {
            let mine = self
                .stats
                .entry(claim)
                .or_insert_with(|| ClaimStats::new(claim));
            mine.systems += s.systems;
            mine.confirmed += s.confirmed;
            mine.vacuous += s.vacuous;
            mine.refuted += s.refuted;
        }
        for (claim, sys) in other.refutations {
            self.refutations.entry(claim).or_insert(sys);
        }
    }
}

fn shapes(tally: &Tally) -> Vec<Shape> {
    let mut out = Vec::new();
    if tally.wants(Flavor::Sequential) {
        out.push(Shape::Sequential);
    }
    if tally.wants(Flavor::Parallel) {
        out.push(Shape::Parallel);
    }
    out
}

/// Every system of at most `max_runs` distinct runs over the 2×2×2
/// universe of each shape the claims need, one observer block.
pub fn exhaustive_sweep(claims: &[ClaimId], max_runs: usize) -> Result<Tally> {
    let mut tally = Tally::new(claims);
    for shape in shapes(&tally) {
        let u = Universe::for_shape(shape, 2, 2, 2);
        for sys in u.exhaustive(max_runs) {
            tally.record(&sys, &u.schema, &u.observer)?;
        }
    }
    Ok(tally)
}

/// `samples` random systems per needed shape, each with 1 to `max_count`
/// entities of every kind and 1 to `max_runs` runs, cycling through single
/// block and random partitions crossed with uniform and bulletin-board
/// run styles.
pub fn random_sweep(
    claims: &[ClaimId],
    samples: usize,
    max_count: usize,
    max_runs: usize,
    seed: u64,
) -> Result<Tally> {
    let mut tally = Tally::new(claims);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut universes: HashMap<(Shape, usize, usize, usize), Universe> = HashMap::new();
    let shapes = shapes(&tally);
    for n in 0..samples {
        let policy = if n % 2 == 0 {
            PartitionPolicy::SingleBlock
        } else {
            PartitionPolicy::Random
        };
        let style = if n % 4 < 2 {
            RunStyle::Uniform
        } else {
            RunStyle::BulletinBoard
        };
        for shape in &shapes {
            let key = (
                *shape,
                rng.gen_range(1..=max_count),
                rng.gen_range(1..=max_count),
                rng.gen_range(1..=max_count),
            );
            let u = universes
                .entry(key)
                .or_insert_with(|| Universe::for_shape(key.0, key.1, key.2, key.3));
            let sys = draw_system(u, max_runs, policy, style, &format!("sample-{n}"), &mut rng);
            tally.record(&sys, &u.schema, &u.observer)?;
        }
    }
    Ok(tally)
}

/// Outcome of a counterexample search.
#[derive(Clone, Debug)]
pub struct Falsification {
    pub claim: ClaimId,
    pub dropped: Vec<String>,
    /// First system where the kept hypotheses hold and the conclusion
    /// fails, with its full report.
    pub counterexample: Option<(InterpretedSystem, ClaimReport)>,
    /// Systems examined up to and including the counterexample.
    pub stats: ClaimStats,
}

fn search(
    claim: ClaimId,
    dropped: &[String],
    u: &Universe,
    systems: impl Iterator<Item = InterpretedSystem>,
) -> Result<Falsification> {
    claim.validate_dropped(dropped)?;
    let mut tally = Tally::dropping(&[claim], dropped);
    let mut found = None;
    for sys in systems {
        tally.record(&sys, &u.schema, &u.observer)?;
        if tally.total_refuted() > 0 {
            let report = ClaimBench::new(&sys, &u.schema, &u.observer).report(claim, dropped)?;
            found = Some((sys, report));
            break;
        }
    }
    Ok(Falsification {
        claim,
        dropped: dropped.to_vec(),
        counterexample: found,
        stats: tally.stats.remove(&claim).expect("claim is tallied"),
    })
}

fn shape_for(claim: ClaimId) -> Shape {
    match claim.flavor() {
        Flavor::Sequential => Shape::Sequential,
        Flavor::Parallel => Shape::Parallel,
    }
}

/// Samples up to `cfg.budget` systems from `cfg` (its shape is replaced by
/// the claim's) looking for one that refutes `claim` once `dropped`
/// hypotheses are ignored.
pub fn falsify(claim: ClaimId, cfg: &GenConfig, dropped: &[String]) -> Result<Falsification> {
    let cfg = GenConfig {
        shape: shape_for(claim),
        ..*cfg
    };
    cfg.validate()?;
    let u = cfg.universe();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let systems = (0..cfg.budget).map(|n| {
        draw_system(
            &u,
            cfg.max_runs,
            cfg.partition,
            cfg.style,
            &format!("sample-{n}"),
            &mut rng,
        )
    });
    search(claim, dropped, &u, systems)
}

/// Enumerates every single-block system of at most `max_runs` distinct
/// runs over `u`, in canonical order.
pub fn falsify_exhaustive(
    claim: ClaimId,
    u: &Universe,
    max_runs: usize,
    dropped: &[String],
) -> Result<Falsification> {
    search(claim, dropped, u, u.exhaustive(max_runs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_exhaustive_sweep_has_no_refutations() {
        let mut tally = Tally::new(&ClaimId::theorems().collect::<Vec<_>>());
        for shape in [Shape::Sequential, Shape::Parallel] {
            let u = Universe::for_shape(shape, 1, 1, 1);
            for sys in u.exhaustive(2) {
                tally.record(&sys, &u.schema, &u.observer).unwrap();
            }
        }
        assert_eq!(tally.total_refuted(), 0, "{:?}", tally.refutations);
        assert!(tally.stats.values().all(|s| s.systems == 10));
    }

    #[test]
    fn dropping_independence_refutes_privacy_composition() {
        let u = Universe::sequential(2, 2, 2);
        let f = falsify_exhaustive(ClaimId::C3_2, &u, 2, &["independence".into()]).unwrap();
        let (_, report) = f.counterexample.expect("counterexample exists");
        assert_eq!(report.verdict, Verdict::Refuted);
        assert_eq!(report.dropped, ["independence"]);
    }

    #[test]
    fn unknown_dropped_hypothesis_is_an_error() {
        let cfg = GenConfig::default();
        assert!(falsify(ClaimId::C3_2, &cfg, &["nonsense".into()]).is_err());
    }
}
