//! Multi-round execution and the batch drivers built on top of it.

mod battery;
mod explore;
mod tree;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{utilities, AgentId, Allocation, Exchange, Instance, ParticipantSet};
use crate::protocol::{propose, ProtocolConfig, ProtocolKind, RejectedSet};
use crate::strategies::{DecisionContext, Profile};

pub use battery::{participation_battery, BatteryRow};
pub use explore::{explore_focal_tree, DeviationOutcome, DEFAULT_BUDGET};
pub use tree::{build_protocol_tree, ProtocolTree, TreeEdge, TreeNode};

/// Both parties' answers to one proposal.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub accept_a: bool,
    pub accept_b: bool,
}

impl Decision {
    /// An exchange executes only when both sides accept.
    pub fn accepted(self) -> bool {
        self.accept_a && self.accept_b
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// 1-based.
    pub index: usize,
    /// Canonical order.
    pub proposals: Vec<Exchange>,
    /// Parallel to `proposals`.
    pub decisions: Vec<Decision>,
}

impl RoundRecord {
    pub fn accepted(&self) -> impl Iterator<Item = &Exchange> {
        self.proposals
            .iter()
            .zip(&self.decisions)
            .filter(|(_, d)| d.accepted())
            .map(|(e, _)| e)
    }

    pub fn rejected(&self) -> impl Iterator<Item = &Exchange> {
        self.proposals
            .iter()
            .zip(&self.decisions)
            .filter(|(_, d)| !d.accepted())
            .map(|(e, _)| e)
    }

    pub fn all_accepted(&self) -> bool {
        self.decisions.iter().all(|d| d.accepted())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCount {
    pub a: AgentId,
    pub b: AgentId,
    pub count: usize,
}

/// Complete record of one protocol run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub protocol: ProtocolKind,
    pub participants: ParticipantSet,
    pub rounds: Vec<RoundRecord>,
    pub final_allocation: Allocation,
    /// Executed exchanges per unordered pair, `a < b`, pairs with zero omitted.
    pub pair_counts: Vec<PairCount>,
    /// Final utility of every agent of the instance, participants or not.
    pub utilities: Vec<f64>,
    /// Every rejected exchange, canonical order.
    pub rejected: Vec<Exchange>,
}

impl Trace {
    pub fn num_rounds(&self) -> usize {
        self.rounds.len()
    }

    pub fn total_proposals(&self) -> usize {
        self.rounds.iter().map(|r| r.proposals.len()).sum()
    }

    pub fn executed(&self) -> impl Iterator<Item = &Exchange> {
        self.rounds.iter().flat_map(RoundRecord::accepted)
    }

    pub fn pair_count(&self, a: AgentId, b: AgentId) -> usize {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        self.pair_counts
            .iter()
            .find(|p| p.a == a && p.b == b)
            .map_or(0, |p| p.count)
    }

    /// How many proposals `agent` was asked about over the whole run.
    pub fn decisions_by(&self, agent: AgentId) -> usize {
        self.rounds
            .iter()
            .flat_map(|r| &r.proposals)
            .filter(|e| e.involves(agent))
            .count()
    }

    pub fn rejected_set(&self) -> RejectedSet {
        self.rejected.iter().copied().collect()
    }

    /// Human-readable rendering with agent names and 1-based goods.
    pub fn render(&self, names: &[String]) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(out, "protocol: {}", self.protocol.name());
        let who: Vec<&str> = self
            .participants
            .iter()
            .map(|a| names.get(a.0).map_or("?", String::as_str))
            .collect();
        let _ = writeln!(out, "participants: {}", who.join(" "));
        for r in &self.rounds {
            let _ = writeln!(out, "round {}: {} proposal(s)", r.index, r.proposals.len());
            for (e, d) in r.proposals.iter().zip(&r.decisions) {
                let verdict = if d.accepted() { "accepted" } else { "rejected" };
                let _ = writeln!(
                    out,
                    "  {}  {}{}  {verdict}",
                    e.display_named(names),
                    u8::from(d.accept_a),
                    u8::from(d.accept_b)
                );
            }
        }
        let _ = writeln!(out, "final allocation:");
        for (a, row) in self.final_allocation.rows().iter().enumerate() {
            let bits: String = row.iter().map(|&h| if h { '1' } else { '0' }).collect();
            let name = names.get(a).map_or("?", String::as_str);
            let _ = writeln!(out, "  {name}: {bits}  utility {:.6}", self.utilities[a]);
        }
        out
    }
}

/// Asks each side of every proposal for its decision. Strategies are only
/// consulted about proposals that involve their own agent.
pub fn collect_decisions(
    proposals: &[Exchange],
    profile: &Profile,
    participants: &ParticipantSet,
    history: &[RoundRecord],
    round: usize,
) -> Vec<Decision> {
    let ask = |agent: AgentId, e: &Exchange| {
        let ctx = DecisionContext {
            agent,
            round,
            participants,
            proposals,
            history,
        };
        profile.get(agent).decide(e, &ctx)
    };
    proposals
        .iter()
        .map(|e| Decision {
            accept_a: ask(e.giver_a, e),
            accept_b: ask(e.giver_b, e),
        })
        .collect()
}

/// Runs the configured protocol to termination.
pub fn execute(
    instance: &Instance,
    participants: &ParticipantSet,
    profile: &Profile,
    config: &ProtocolConfig,
) -> Result<Trace> {
    participants.validate(instance)?;
    let mut allocation = Allocation::initial(instance);
    let mut rejected = RejectedSet::new();
    let mut rounds: Vec<RoundRecord> = Vec::new();
    loop {
        let index = rounds.len() + 1;
        let mut proposals = propose(instance, participants, &allocation, &rejected, config);
        proposals.sort();
        let decisions = collect_decisions(&proposals, profile, participants, &rounds, index);
        let record = RoundRecord {
            index,
            proposals,
            decisions,
        };
        for e in record.accepted() {
            allocation.apply(e);
        }
        rejected.extend(record.rejected().copied());
        let done = record.proposals.is_empty() || (config.protocol.stops_when_all_accepted() && record.all_accepted());
        rounds.push(record);
        if done {
            break;
        }
    }
    let mut counts: BTreeMap<(AgentId, AgentId), usize> = BTreeMap::new();
    for e in rounds.iter().flat_map(RoundRecord::accepted) {
        *counts.entry((e.giver_a, e.giver_b)).or_default() += 1;
    }
    let utilities = utilities(instance, &allocation)?;
    Ok(Trace {
        protocol: config.protocol,
        participants: participants.clone(),
        rounds,
        final_allocation: allocation,
        pair_counts: counts
            .into_iter()
            .map(|((a, b), count)| PairCount { a, b, count })
            .collect(),
        utilities,
        rejected: rejected.into_iter().collect(),
    })
}
