//! Finite interpreted systems, epistemic formulas over θ-atoms, and checks
//! of anonymity, privacy, onymity, identity and role interchangeability,
//! together with sequential and parallel composition of system phases.

pub mod cli;
pub mod composition;
pub mod error;
pub mod formula;
pub mod properties;
pub mod runset;
pub mod scenarios;
pub mod sysfile;
pub mod system;

pub use error::{Error, Result};
pub use formula::{eval, parse, render, valid, Formula, Verdict};
pub use system::{
    build_system, Action, Agent, AgentId, Fact, InterpretedSystem, PartitionDecl, Role, Run, RunId,
    SystemDecl,
};
