//! Sequential ascending-competition (SAC) reference protocol: one proposal
//! per round, always the cheapest remaining beneficial exchange.

use super::RejectedSet;
use crate::model::{beneficial_exchanges, Allocation, Exchange, Instance, ParticipantSet};

/// The beneficial, unrejected exchange with the smallest competition level,
/// ties broken by agent pair and then by the goods. `None` ends the run.
pub fn sac_proposal(
    instance: &Instance,
    participants: &ParticipantSet,
    prior: &Allocation,
    rejected: &RejectedSet,
) -> Option<Exchange> {
    beneficial_exchanges(instance, prior, participants)
        .into_iter()
        .filter(|e| !rejected.contains(e))
        .min_by(|x, y| {
            instance
                .beta(x.giver_a, x.giver_b)
                .total_cmp(&instance.beta(y.giver_a, y.giver_b))
                .then(x.cmp(y))
        })
}
