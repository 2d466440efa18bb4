//! A chain of two mix-servers as a bulletin-board system: the first mixer
//! maps incoming messages `i_x` to intermediate messages `k_y` (the `use`
//! facts) and the second maps those to outgoing messages `c_z` (the `post`
//! facts).

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::system::{build_system, Action};
use crate::system::{
    Agent, AgentId, Fact, InterpretedSystem, PartitionDecl, Role, Run, RunId, SystemDecl,
};

use super::generate::PartitionPolicy;

/// The permutations one mixer may apply across runs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MixStage {
    /// Every permutation of the messages.
    All,
    /// One fixed permutation; `perm[x]` is the image of message `x`.
    Fixed(Vec<usize>),
    /// For the second mixer only: undo whatever the first one did.
    InverseOfFirst,
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::Mismatch(format!(
            "permutation over {} messages, expected {n}",
            perm.len()
        )));
    }
    let mut seen = vec![false; n];
    for &x in perm {
        if x >= n || std::mem::replace(&mut seen[x], true) {
            return Err(Error::Mismatch(format!("{perm:?} is not a permutation")));
        }
    }
    Ok(())
}

fn candidates(stage: &MixStage, n: usize) -> Result<Vec<Vec<usize>>> {
    Ok(match stage {
        MixStage::All => (0..n).permutations(n).collect(),
        MixStage::Fixed(p) => {
            check_permutation(p, n)?;
            vec![p.clone()]
        }
        MixStage::InverseOfFirst => {
            return Err(Error::Mismatch(
                "only the second mixer can invert the first".into(),
            ))
        }
    })
}

fn inverse(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (x, &y) in p.iter().enumerate() {
        inv[y] = x;
    }
    inv
}

/// One run per pair of mixer permutations. Incoming messages are the
/// real-name agents `i1..in`, intermediate ones the pseudonyms `k1..kn`,
/// outgoing ones the articles `c1..cn`; `j` observes. A random policy uses
/// a fixed seed.
pub fn mixer_chain(
    n: usize,
    first: &MixStage,
    second: &MixStage,
    policy: PartitionPolicy,
) -> Result<InterpretedSystem> {
    if n == 0 {
        return Err(Error::Mismatch("a mixer needs at least one message".into()));
    }
    let firsts = candidates(first, n)?;
    let mut pairs = Vec::new();
    for p1 in &firsts {
        match second {
            MixStage::InverseOfFirst => pairs.push((p1.clone(), inverse(p1))),
            other => {
                for p2 in candidates(other, n)? {
                    pairs.push((p1.clone(), p2));
                }
            }
        }
    }
    let name = |p: &str, x: usize| format!("{p}{}", x + 1);
    let mut agents = Vec::new();
    for (prefix, role) in [("i", Role::Real), ("k", Role::Pseudo)] {
        agents.extend((0..n).map(|x| Agent {
            id: AgentId::new(name(prefix, x)),
            role: Some(role),
        }));
    }
    agents.push(Agent {
        id: AgentId::new("j"),
        role: Some(Role::Observer),
    });
    let actions: Vec<Action> = (0..n)
        .map(|x| Action::new("use", name("k", x)))
        .chain((0..n).map(|x| Action::new("post", name("c", x))))
        .collect();
    let runs: Vec<Run> = pairs
        .iter()
        .enumerate()
        .map(|(r, (p1, p2))| {
            let uses =
                (0..n).map(|x| Fact::new(name("i", x), Action::new("use", name("k", p1[x]))));
            let posts =
                (0..n).map(|y| Fact::new(name("k", y), Action::new("post", name("c", p2[y]))));
            Run {
                id: RunId::new(format!("m{}", r + 1)),
                facts: uses.chain(posts).collect(),
            }
        })
        .collect();
    let ids: Vec<RunId> = runs.iter().map(|r| r.id.clone()).collect();
    let blocks = match policy {
        PartitionPolicy::SingleBlock => vec![ids],
        PartitionPolicy::Discrete => ids.into_iter().map(|r| vec![r]).collect(),
        PartitionPolicy::Random => {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
            let labels: Vec<usize> = (0..ids.len())
                .map(|_| rng.gen_range(0..ids.len()))
                .collect();
            (0..ids.len())
                .map(|l| {
                    (0..ids.len())
                        .filter(|x| labels[*x] == l)
                        .map(|x| ids[x].clone())
                        .collect::<Vec<_>>()
                })
                .filter(|b| !b.is_empty())
                .collect()
        }
    };
    build_system(SystemDecl {
        name: format!("mixer-chain-{n}"),
        agents,
        actions,
        runs,
        indist: vec![PartitionDecl {
            observer: AgentId::new("j"),
            blocks,
        }],
    })
}
