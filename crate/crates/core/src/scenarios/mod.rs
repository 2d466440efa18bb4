//! Named example systems, the claim registry run as executable theorems,
//! random and exhaustive system generation, and counterexample search.

mod bundled;
mod claims;
mod generate;
mod mixer;
mod sweep;

pub use bundled::{bomb_schema, bomb_system, paper_system, PAPER_SYSTEMS};
pub use claims::{
    check_claim, Check, CheckResult, ClaimBench, ClaimId, ClaimReport, Condition, Flavor, Phase,
    Verdict,
};
pub use generate::{
    draw_system, random_system, GenConfig, PartitionPolicy, RunStyle, Shape, Universe,
};
pub use mixer::{mixer_chain, MixStage};
pub use sweep::{
    exhaustive_sweep, falsify, falsify_exhaustive, random_sweep, ClaimStats, Falsification, Tally,
};
