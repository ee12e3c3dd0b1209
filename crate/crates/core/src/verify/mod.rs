//! Executable checkers. Each returns a serializable report with a `passed`
//! flag and, on failure, a concrete witness.

mod impossibility;
mod ir;
mod nic;
mod pareto;
mod stability;
mod tracked;

pub use impossibility::{
    find_inversion_pairs, misreport_demo, single_round_analysis, InversionPair, MisreportReport, SingleRoundReport,
    SingleRoundRow,
};
pub use ir::{check_ir, IrReport};
pub use nic::{betagood_from_outcomes, check_betagood, check_nic, nic_from_outcomes, BetagoodReport, NicReport};
pub use pareto::{
    check_conjecture, check_pareto, classify_coalition, dominates, CoalitionClass, CoalitionKind, ConjectureReport,
    ParetoMethod, ParetoReport, SearchSpace,
};
pub use stability::{check_stability, StabilityReport};
pub use tracked::{tracked_decomposition, EdgeLabel, PathClass, TrackedPath, TrackedReport};
