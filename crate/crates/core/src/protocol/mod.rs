//! Proposal construction for a single round.
//!
//! A protocol looks at the allocation at the end of the previous round and
//! the set of exchanges rejected so far, and returns the proposals for the
//! next round. The multi-round loop that collects decisions and applies
//! accepted exchanges lives in [`crate::engine`].

pub mod audit;
mod clear;
mod sac;

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::model::{Allocation, Exchange, Instance, ParticipantSet};

pub use audit::Audit;
pub use clear::{build_proposals, RetroOutcome, RoundProposals, RoundState};
pub use sac::sac_proposal;

/// Every exchange rejected in any earlier round, in canonical orientation.
pub type RejectedSet = BTreeSet<Exchange>;

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolKind {
    /// Batch proposals with RETROSPECT repair; stops once a round is fully accepted.
    #[default]
    Clear,
    /// One exchange per round in ascending competition; stops when nothing is left to propose.
    Sac,
}

impl ProtocolKind {
    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::Clear => "clear",
            ProtocolKind::Sac => "sac",
        }
    }

    /// Whether a round in which every proposal was accepted ends the run.
    pub fn stops_when_all_accepted(self) -> bool {
        matches!(self, ProtocolKind::Clear)
    }
}

impl std::str::FromStr for ProtocolKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "clear" => Ok(ProtocolKind::Clear),
            "sac" => Ok(ProtocolKind::Sac),
            other => Err(format!("unknown protocol `{other}` (expected clear or sac)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProtocolConfig {
    pub protocol: ProtocolKind,
    pub retrospect_enabled: bool,
    /// Keep a per-cell record of who delivers each scheduled good, so the
    /// repair step finds the delivering exchange without scanning the round.
    pub opt_source_encoding: bool,
    /// Skip repair calls whose receiver is already scheduled to hold every good.
    pub opt_skip_full_receivers: bool,
    /// Within one top-level repair call, never revisit a giver whose call failed.
    pub opt_skip_failed_givers: bool,
    /// Revert a successful repair when no unrejected exchange can use the
    /// slot it freed. Only matters once some exchange has been rejected.
    pub undo_unplaced_retrospect: bool,
    /// Invariant hooks run on every repair call and every round when set.
    pub audit: Option<Arc<Audit>>,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            protocol: ProtocolKind::Clear,
            retrospect_enabled: true,
            opt_source_encoding: true,
            opt_skip_full_receivers: true,
            opt_skip_failed_givers: true,
            undo_unplaced_retrospect: true,
            audit: None,
        }
    }
}

impl ProtocolConfig {
    pub fn clear() -> Self {
        Self::default()
    }

    pub fn sac() -> Self {
        Self {
            protocol: ProtocolKind::Sac,
            ..Self::default()
        }
    }

    pub fn with_protocol(mut self, protocol: ProtocolKind) -> Self {
        self.protocol = protocol;
        self
    }

    pub fn without_retrospect(mut self) -> Self {
        self.retrospect_enabled = false;
        self
    }

    /// Turns all three repair optimizations on or off together.
    pub fn with_optimizations(mut self, on: bool) -> Self {
        self.opt_source_encoding = on;
        self.opt_skip_full_receivers = on;
        self.opt_skip_failed_givers = on;
        self
    }

    pub fn with_audit(mut self, audit: Arc<Audit>) -> Self {
        self.audit = Some(audit);
        self
    }
}

/// The proposal set `P_t` for the next round. Empty means nothing is left to
/// propose.
pub fn propose(
    instance: &Instance,
    participants: &ParticipantSet,
    prior: &Allocation,
    rejected: &RejectedSet,
    config: &ProtocolConfig,
) -> Vec<Exchange> {
    match config.protocol {
        ProtocolKind::Clear => build_proposals(instance, participants, prior, rejected, config).proposals,
        ProtocolKind::Sac => sac_proposal(instance, participants, prior, rejected)
            .into_iter()
            .collect(),
    }
}

/// Unordered participant pairs `(a, b)`, `a < b`, in increasing competition
/// with ties broken lexicographically.
pub fn pair_order(instance: &Instance, participants: &ParticipantSet) -> Vec<(usize, usize)> {
    let members = participants.as_slice();
    let mut pairs: Vec<(usize, usize)> = members
        .iter()
        .enumerate()
        .flat_map(|(idx, &a)| members[idx + 1..].iter().map(move |&b| (a.0, b.0)))
        .collect();
    let beta = instance.beta_matrix();
    pairs.sort_by(|&(a1, b1), &(a2, b2)| beta[a1][b1].total_cmp(&beta[a2][b2]).then((a1, b1).cmp(&(a2, b2))));
    pairs
}
