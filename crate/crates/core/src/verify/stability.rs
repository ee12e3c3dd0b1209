use serde::Serialize;

use crate::engine::Trace;
use crate::model::{beneficial_exchanges, Exchange, Instance, ParticipantSet};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityReport {
    pub passed: bool,
    /// A mutually beneficial exchange that nobody rejected.
    pub witness: Option<Exchange>,
    /// Beneficial exchanges left at the end, rejected or not.
    pub remaining_beneficial: usize,
}

/// Passes iff every exchange still beneficial at the end of the run was
/// rejected at some point.
pub fn check_stability(instance: &Instance, trace: &Trace, participants: &ParticipantSet) -> StabilityReport {
    let rejected = trace.rejected_set();
    let remaining = beneficial_exchanges(instance, &trace.final_allocation, participants);
    let witness = remaining.iter().find(|e| !rejected.contains(e)).copied();
    StabilityReport {
        passed: witness.is_none(),
        witness,
        remaining_beneficial: remaining.len(),
    }
}
