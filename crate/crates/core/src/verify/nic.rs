//! Incentive checks over exhaustive deviation paths.

use serde::Serialize;

use crate::engine::{explore_focal_tree, DeviationOutcome};
use crate::error::{invalid, Result};
use crate::model::{AgentId, Instance, ParticipantSet, TOL};
use crate::protocol::ProtocolConfig;
use crate::strategies::{DeviationScript, Profile};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NicReport {
    pub passed: bool,
    pub focal: AgentId,
    pub paths: usize,
    pub accepting_utility: f64,
    pub best_utility: f64,
    /// The most profitable path, when it beats accepting.
    pub best_deviation: Option<DeviationOutcome>,
}

impl NicReport {
    pub fn gain(&self) -> f64 {
        self.best_utility - self.accepting_utility
    }
}

fn accepting_path(outcomes: &[DeviationOutcome]) -> Result<&DeviationOutcome> {
    outcomes
        .iter()
        .find(|o| o.is_accepting())
        .ok_or_else(|| invalid("enumeration produced no all-accept path"))
}

pub fn nic_from_outcomes(focal: AgentId, outcomes: &[DeviationOutcome]) -> Result<NicReport> {
    let accepting = accepting_path(outcomes)?;
    let best = outcomes
        .iter()
        .max_by(|a, b| a.utility.total_cmp(&b.utility))
        .expect("at least the accepting path exists");
    let passed = accepting.utility >= best.utility - TOL;
    Ok(NicReport {
        passed,
        focal,
        paths: outcomes.len(),
        accepting_utility: accepting.utility,
        best_utility: best.utility,
        best_deviation: (!passed).then(|| best.clone()),
    })
}

/// Accepting must be a best response for `focal` when the others follow
/// `co_profile`.
pub fn check_nic(
    instance: &Instance,
    participants: &ParticipantSet,
    focal: AgentId,
    config: &ProtocolConfig,
    co_profile: &Profile,
    budget: u64,
) -> Result<NicReport> {
    let outcomes = explore_focal_tree(instance, participants, focal, config, co_profile, budget)?;
    nic_from_outcomes(focal, &outcomes)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BetagoodReport {
    pub passed: bool,
    pub focal: AgentId,
    pub beta_prime: f64,
    pub accepting_count: usize,
    pub best_count: usize,
    pub witness: Option<DeviationScript>,
}

pub fn betagood_from_outcomes(
    focal: AgentId,
    beta_prime: f64,
    outcomes: &[DeviationOutcome],
) -> Result<BetagoodReport> {
    let accepting = accepting_path(outcomes)?.count_at_most(beta_prime);
    let best = outcomes
        .iter()
        .max_by_key(|o| o.count_at_most(beta_prime))
        .expect("at least the accepting path exists");
    let best_count = best.count_at_most(beta_prime);
    let passed = accepting >= best_count;
    Ok(BetagoodReport {
        passed,
        focal,
        beta_prime,
        accepting_count: accepting,
        best_count,
        witness: (!passed).then(|| best.script.clone()),
    })
}

/// Accepting maximizes the number of executed focal exchanges whose
/// competition level is at most `beta_prime`, others accepting.
pub fn check_betagood(
    instance: &Instance,
    participants: &ParticipantSet,
    focal: AgentId,
    beta_prime: f64,
    config: &ProtocolConfig,
    budget: u64,
) -> Result<BetagoodReport> {
    let outcomes = explore_focal_tree(instance, participants, focal, config, &Profile::accepting(), budget)?;
    betagood_from_outcomes(focal, beta_prime, &outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_participant_is_vacuous() {
        let beta = Instance::beta_from_pairs(2, &[], 0.2);
        let inst = Instance::from_bits(&[&[1, 0], &[0, 1]], beta).unwrap();
        let alone: ParticipantSet = [AgentId(0)].into_iter().collect();
        let r = check_nic(
            &inst,
            &alone,
            AgentId(0),
            &ProtocolConfig::default(),
            &Profile::accepting(),
            16,
        )
        .unwrap();
        assert!(r.passed);
        assert_eq!(r.paths, 1);
        let b = check_betagood(&inst, &alone, AgentId(0), 1.0, &ProtocolConfig::default(), 16).unwrap();
        assert!(b.passed);
        assert_eq!(b.accepting_count, 0);
    }
}
