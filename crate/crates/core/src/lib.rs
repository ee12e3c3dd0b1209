//! CLEAR: a pairwise exchange protocol for freely replicable goods among
//! competing agents, together with a strategy simulator and exhaustive
//! verification oracles for stability, incentive compatibility, individual
//! rationality and Pareto efficiency.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: instances, allocations, exchanges and utilities.
//! - [`protocol`]: the CLEAR proposal builder (with RETROSPECT) and the
//!   sequential ascending-competition reference protocol.
//! - [`strategies`]: agent decision policies.
//! - [`engine`]: multi-round execution, deviation enumeration, protocol trees
//!   and participation batteries.
//! - [`verify`]: checkers that turn the protocol's guarantees into pass/fail
//!   reports with witnesses.
//! - [`gen`]: seeded random instances.
//! - [`demos`]: the catalog of small named instances.

pub mod demos;
pub mod engine;
pub mod error;
pub mod format;
pub mod gen;
pub mod model;
pub mod protocol;
pub mod strategies;
pub mod verify;

pub use error::{ClearError, Result};
pub use model::{
    apply_exchange, beneficial_exchanges, feasible_exchanges, utilities, utility, AgentId, Allocation, Exchange,
    GoodId, Instance, ParticipantSet, TOL,
};
pub use protocol::{ProtocolConfig, ProtocolKind};
