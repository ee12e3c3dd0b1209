//! Participation battery: the focal agent's utility with and without joining
//! each possible coalition of the other agents.

use rayon::prelude::*;
use serde::Serialize;

use super::execute;
use crate::error::{invalid, ClearError, Result};
use crate::model::{AgentId, Instance, ParticipantSet};
use crate::protocol::ProtocolConfig;
use crate::strategies::Profile;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatteryRow {
    /// The other participants, focal excluded.
    pub subset: ParticipantSet,
    /// Focal's utility when it joins `subset`.
    pub u_in: f64,
    /// Focal's utility when `subset` runs without it.
    pub u_out: f64,
}

impl BatteryRow {
    pub fn margin(&self) -> f64 {
        self.u_in - self.u_out
    }
}

/// One row per subset of the other agents, all participants accepting.
/// Rows are ordered by the subset's bitmask over the other agents.
pub fn participation_battery(
    instance: &Instance,
    focal: AgentId,
    config: &ProtocolConfig,
    budget: u64,
) -> Result<Vec<BatteryRow>> {
    if focal.0 >= instance.num_agents() {
        return Err(invalid(format!("focal agent {focal} out of range")));
    }
    let others: Vec<AgentId> = instance.agents().filter(|&a| a != focal).collect();
    let subsets = 1u128 << others.len();
    if subsets > u128::from(budget) {
        return Err(ClearError::BudgetExceeded {
            what: "participation battery",
            needed: subsets,
            budget: u128::from(budget),
        });
    }
    (0..subsets as u64)
        .into_par_iter()
        .map(|mask| {
            let subset: ParticipantSet = others
                .iter()
                .enumerate()
                .filter(|(b, _)| mask & (1 << b) != 0)
                .map(|(_, &a)| a)
                .collect();
            let profile = Profile::accepting();
            let with = execute(instance, &subset.with(focal), &profile, config)?;
            let without = execute(instance, &subset, &profile, config)?;
            Ok(BatteryRow {
                u_in: with.utilities[focal.0],
                u_out: without.utilities[focal.0],
                subset,
            })
        })
        .collect()
}
