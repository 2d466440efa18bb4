//! The named bulletin-board systems: `s12`, `s1234` and `s56` from their
//! quoted fact lists, and `s125678` / `s129-12` completed by search.

use std::sync::OnceLock;

use itertools::Itertools;

use crate::composition::{IndependenceKind, ParallelSchema};
use crate::error::{Error, Result};
use crate::properties::PropertyKind;
use crate::system::InterpretedSystem;

use super::claims::{Check, ClaimBench, ClaimId, Phase};
use super::generate::Universe;
use super::sweep::falsify_exhaustive;

pub const PAPER_SYSTEMS: [&str; 5] = ["s12", "s1234", "s56", "s125678", "s129-12"];

// Run masks over `Universe::sequential(2, 2, 2)`: bits 0-3 are
// i1:use(k1), i1:use(k2), i2:use(k1), i2:use(k2); bits 4-7 are
// k1:post(c1), k1:post(c2), k2:post(c1), k2:post(c2).
const R1: u64 = 0b1001_1001;
const R2: u64 = 0b0110_0110;
const R3: u64 = 0b0110_1001;
const R4: u64 = 0b1001_0110;
const R5: u64 = 0b1001_0011;
const R6: u64 = 0b0110_0011;

fn board() -> Universe {
    Universe::sequential(2, 2, 2)
}

fn named(name: &str, masks: &[u64], first: usize) -> Result<InterpretedSystem> {
    let u = board();
    let sys = u.system(name, masks, None)?;
    // Rename r1, r2, ... to the given numbering.
    let mut decl = sys.to_decl();
    let ids: Vec<String> = fixed_ids(name, masks.len(), first);
    for (run, id) in decl.runs.iter_mut().zip(&ids) {
        run.id = id.as_str().into();
    }
    decl.indist[0].blocks = vec![decl.runs.iter().map(|r| r.id.clone()).collect()];
    decl.build()
}

fn fixed_ids(name: &str, n: usize, first: usize) -> Vec<String> {
    let numbers: Vec<usize> = match name {
        "s56" => vec![5, 6],
        "s125678" => vec![1, 2, 5, 6, 7, 8],
        "s129-12" => vec![1, 2, 9, 10, 11, 12],
        _ => (first..first + n).collect(),
    };
    numbers.into_iter().map(|x| format!("r{x}")).collect()
}

/// The systems the bulletin-board discussion refers to by their runs. All
/// runs share one block for the observer `j`.
pub fn paper_system(name: &str) -> Result<InterpretedSystem> {
    match name {
        "s12" => named(name, &[R1, R2], 1),
        "s1234" => named(name, &[R1, R2, R3, R4], 1),
        "s56" => named(name, &[R5, R6], 5),
        "s125678" | "s129-12" => {
            static CACHE: OnceLock<Result<(Vec<u64>, Vec<u64>)>> = OnceLock::new();
            let (r78, r9_12) = CACHE.get_or_init(reconstruct).clone()?;
            if name == "s125678" {
                named(name, &[R1, R2, R5, R6, r78[0], r78[1]], 1)
            } else {
                named(name, &[R1, R2, r9_12[0], r9_12[1], r9_12[2], r9_12[3]], 1)
            }
        }
        _ => Err(Error::Mismatch(format!(
            "unknown system `{name}`; expected one of {}",
            PAPER_SYSTEMS.join(", ")
        ))),
    }
}

fn bit(m: u64, b: u32) -> bool {
    m >> b & 1 == 1
}

/// Bulletin-board runs where each article is posted by exactly one
/// pseudonym and every posting pseudonym is used by someone.
fn candidate_pool(exclude: &[u64]) -> Vec<u64> {
    (1u64..256)
        .filter(|&m| {
            let c1 = bit(m, 4) as u8 + bit(m, 6) as u8 == 1;
            let c2 = bit(m, 5) as u8 + bit(m, 7) as u8 == 1;
            let k1_used = bit(m, 0) || bit(m, 2);
            let k2_used = bit(m, 1) || bit(m, 3);
            let k1_posts = bit(m, 4) || bit(m, 5);
            let k2_posts = bit(m, 6) || bit(m, 7);
            c1 && c2 && (!k1_posts || k1_used) && (!k2_posts || k2_used) && !exclude.contains(&m)
        })
        .collect()
}

/// Quick screen on masks with one observer block, where `P[φ]` means some
/// run satisfies `φ`.
struct Masks<'a>(&'a [u64]);

impl Masks<'_> {
    fn possible(&self, need: u64) -> bool {
        self.0.iter().any(|r| r & need == need)
    }

    fn basic(&self) -> bool {
        (0..4).all(|u| {
            (4..8).all(|p| {
                let (u, p) = (1 << u, 1 << p);
                !(self.possible(u) && self.possible(p)) || self.possible(u | p)
            })
        })
    }

    fn pairwise(&self) -> bool {
        let pairs = |lo: u32| -> Vec<u64> {
            (lo..lo + 4)
                .flat_map(|x| (x..lo + 4).map(move |y| (1 << x) | (1 << y)))
                .collect()
        };
        let (uses, posts) = (pairs(0), pairs(4));
        uses.iter().all(|&u| {
            posts
                .iter()
                .all(|&p| !(self.possible(u) && self.possible(p)) || self.possible(u | p))
        })
    }

    /// Role interchangeability of `θ(x, f(y))` facts, where `fact(x, y)`
    /// gives the bit.
    fn interchangeable(&self, fact: impl Fn(u32, u32) -> u32) -> bool {
        self.0.iter().all(|&r| {
            (0..2).cartesian_product(0..2).all(|(x, y)| {
                !bit(r, fact(x, y))
                    || (0..2).cartesian_product(0..2).all(|(x2, y2)| {
                        !bit(r, fact(x2, y2))
                            || self.possible((1 << fact(x2, y)) | (1 << fact(x, y2)))
                    })
            })
        })
    }

    fn submit_interchangeable(&self) -> bool {
        // Derived submit bits: bit 2i+c for real name i and article c.
        let submits: Vec<u64> = self
            .0
            .iter()
            .map(|&r| {
                let mut s = 0;
                for i in 0..2 {
                    for c in 0..2 {
                        let linked = (0..2).any(|k| bit(r, i * 2 + k) && bit(r, 4 + k * 2 + c));
                        if linked {
                            s |= 1 << (i * 2 + c);
                        }
                    }
                }
                s
            })
            .collect();
        Masks(&submits).interchangeable(|i, c| i * 2 + c)
    }

    fn wanted(&self) -> bool {
        self.basic()
            && !self.pairwise()
            && self.interchangeable(|k, c| 4 + k * 2 + c)
            && self.interchangeable(|i, k| i * 2 + k)
            && !self.submit_interchangeable()
    }
}

/// Confirms a candidate with the library checkers.
fn confirmed(masks: &[u64]) -> Result<bool> {
    let u = board();
    let sys = u.system("candidate", masks, None)?;
    let mut bench = ClaimBench::new(&sys, &u.schema, &u.observer);
    let ri = PropertyKind::RoleInterchangeable;
    Ok(bench.holds(Check::Independence(IndependenceKind::Basic))?
        && !bench.holds(Check::Independence(IndependenceKind::Pairwise))?
        && bench.holds(Check::Property(Phase::Post, ri))?
        && bench.holds(Check::Property(Phase::Use, ri))?
        && !bench.holds(Check::Property(Phase::Submit, ri))?)
}

/// First extension of `fixed` by `extra` pool runs, in increasing mask
/// order, satisfying the wanted properties.
fn complete(fixed: &[u64], extra: usize, exclude: &[u64]) -> Result<Vec<u64>> {
    let pool = candidate_pool(exclude);
    for combo in pool.iter().copied().combinations(extra) {
        let masks: Vec<u64> = fixed.iter().copied().chain(combo.iter().copied()).collect();
        if Masks(&masks).wanted() && confirmed(&masks)? {
            return Ok(combo);
        }
    }
    Err(Error::SearchExhausted(format!(
        "no {extra} runs complete {fixed:?} within the candidate pool"
    )))
}

/// Runs r7, r8 completing {r1, r2, r5, r6}, then r9..r12 completing
/// {r1, r2} from runs not used so far.
fn reconstruct() -> Result<(Vec<u64>, Vec<u64>)> {
    let base = [R1, R2, R5, R6];
    let r78 = complete(&base, 2, &base)?;
    let used: Vec<u64> = base.iter().chain(&r78).copied().collect();
    let r9_12 = complete(&[R1, R2], 4, &used)?;
    Ok((r78, r9_12))
}

/// The smallest system (two agents, one parameter `c`) where buying a
/// timer and synthesizing gunpowder are each anonymous but giving a bomb
/// is not: the first counterexample to the anonymity composition when
/// parallel independence is not assumed.
pub fn bomb_system() -> Result<InterpretedSystem> {
    let schema = ParallelSchema::new("buy_timer", "synthesize_gunpowder", "give", &["c"]);
    let u = Universe::parallel_named(schema, 2);
    let found = falsify_exhaustive(ClaimId::C4_2, &u, 2, &["independence".into()])?;
    let (sys, _) = found.counterexample.ok_or_else(|| {
        Error::SearchExhausted("no two-run bomb scenario breaks anonymity".into())
    })?;
    Ok(sys.renamed("bomb"))
}

/// Schema of [`bomb_system`].
pub fn bomb_schema() -> ParallelSchema {
    ParallelSchema::new("buy_timer", "synthesize_gunpowder", "give", &["c"])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::RunId;

    #[test]
    fn masks_match_quoted_runs() {
        let s = paper_system("s1234").unwrap();
        let r3: Vec<String> = s
            .run(&RunId::new("r3"))
            .unwrap()
            .facts
            .iter()
            .map(ToString::to_string)
            .collect();
        assert_eq!(
            r3,
            ["i1:use(k1)", "i2:use(k2)", "k1:post(c2)", "k2:post(c1)"]
        );
        let s56 = paper_system("s56").unwrap();
        let r6: Vec<String> = s56
            .run(&RunId::new("r6"))
            .unwrap()
            .facts
            .iter()
            .map(ToString::to_string)
            .collect();
        assert_eq!(
            r6,
            ["i1:use(k1)", "i1:use(k2)", "k1:post(c2)", "k2:post(c1)"]
        );
        assert!(paper_system("s99").is_err());
    }

    #[test]
    fn screen_agrees_with_library_on_pool_pairs() {
        let u = board();
        let pool = candidate_pool(&[]);
        for combo in pool.iter().copied().combinations(2).step_by(7) {
            let sys = u.system("t", &combo, None).unwrap();
            let mut bench = ClaimBench::new(&sys, &u.schema, &u.observer);
            let m = Masks(&combo);
            let ri = PropertyKind::RoleInterchangeable;
            assert_eq!(
                m.basic(),
                bench
                    .holds(Check::Independence(IndependenceKind::Basic))
                    .unwrap()
            );
            assert_eq!(
                m.pairwise(),
                bench
                    .holds(Check::Independence(IndependenceKind::Pairwise))
                    .unwrap()
            );
            assert_eq!(
                m.interchangeable(|k, c| 4 + k * 2 + c),
                bench.holds(Check::Property(Phase::Post, ri)).unwrap()
            );
            assert_eq!(
                m.interchangeable(|i, k| i * 2 + k),
                bench.holds(Check::Property(Phase::Use, ri)).unwrap()
            );
            assert_eq!(
                m.submit_interchangeable(),
                bench.holds(Check::Property(Phase::Submit, ri)).unwrap()
            );
        }
    }
}
