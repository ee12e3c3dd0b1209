//! Exhaustive enumeration of a focal agent's accept/reject paths.
//!
//! With the protocol and every other agent's strategy fixed, the focal agent's
//! realized outcome depends only on the sequence of decisions it actually
//! makes. Enumerating those sequences depth first therefore covers every
//! strategy the focal agent could use.

use serde::Serialize;

use super::{execute, Trace};
use crate::error::{invalid, ClearError, Result};
use crate::model::{AgentId, Instance, ParticipantSet};
use crate::protocol::ProtocolConfig;
use crate::strategies::{DeviationScript, Profile};
use std::sync::Arc;

/// Default cap on protocol runs per enumeration.
pub const DEFAULT_BUDGET: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeviationOutcome {
    /// Exactly the decisions the focal agent made on this path.
    pub script: DeviationScript,
    pub utility: f64,
    /// Partner and competition level of every executed exchange involving
    /// the focal agent.
    pub exchanges_involving_focal: Vec<(AgentId, f64)>,
}

impl DeviationOutcome {
    pub fn is_accepting(&self) -> bool {
        self.script.bits.iter().all(|&b| b)
    }

    /// Executed focal exchanges whose competition level is at most `beta_prime`.
    pub fn count_at_most(&self, beta_prime: f64) -> usize {
        self.exchanges_involving_focal
            .iter()
            .filter(|(_, b)| *b <= beta_prime)
            .count()
    }
}

fn outcome(instance: &Instance, focal: AgentId, bits: Vec<bool>, trace: &Trace) -> DeviationOutcome {
    DeviationOutcome {
        script: DeviationScript::new(bits),
        utility: trace.utilities[focal.0],
        exchanges_involving_focal: trace
            .executed()
            .filter_map(|e| e.partner(focal))
            .map(|p| (p, instance.beta(focal, p)))
            .collect(),
    }
}

/// Every leaf of the focal agent's decision tree, the all-accept path first.
/// Other agents follow `co_profile` (accepting for the NIC question).
pub fn explore_focal_tree(
    instance: &Instance,
    participants: &ParticipantSet,
    focal: AgentId,
    config: &ProtocolConfig,
    co_profile: &Profile,
    budget: u64,
) -> Result<Vec<DeviationOutcome>> {
    participants.validate(instance)?;
    if !participants.contains(focal) {
        return Err(invalid(format!("focal agent {focal} is not a participant")));
    }
    let mut stack: Vec<Vec<bool>> = vec![Vec::new()];
    let mut leaves = Vec::new();
    let mut runs: u64 = 0;
    while let Some(prefix) = stack.pop() {
        runs += 1;
        if runs > budget {
            return Err(ClearError::BudgetExceeded {
                what: "deviation-path enumeration",
                needed: u128::from(runs),
                budget: u128::from(budget),
            });
        }
        let profile = co_profile
            .clone()
            .with(focal, Arc::new(DeviationScript::new(prefix.clone())));
        let trace = execute(instance, participants, &profile, config)?;
        let made = trace.decisions_by(focal);
        if made <= prefix.len() {
            leaves.push(outcome(instance, focal, prefix, &trace));
        } else {
            // Unscripted decisions defaulted to accept; branch on the first one.
            let mut reject = prefix.clone();
            reject.push(false);
            let mut accept = prefix;
            accept.push(true);
            stack.push(reject);
            stack.push(accept);
        }
    }
    Ok(leaves)
}
