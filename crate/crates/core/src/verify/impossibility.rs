//! Counterexample machinery: inversion pairs in response trees, hiding goods,
//! and the single-round dilemma between stability and incentives.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::engine::{execute, ProtocolTree};
use crate::error::{invalid, ClearError, Result};
use crate::model::{
    beneficial_exchanges, utility, AgentId, Allocation, Exchange, GoodId, Instance, ParticipantSet, TOL,
};
use crate::protocol::ProtocolConfig;
use crate::strategies::Profile;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InversionPair {
    pub i: AgentId,
    /// Lower-competition partner, scheduled later.
    pub j: AgentId,
    /// Higher-competition partner, scheduled earlier.
    pub k: AgentId,
    pub ancestor_node: usize,
    pub descendant_node: usize,
    pub ancestor_exchange: Exchange,
    pub descendant_exchange: Exchange,
}

/// Every triple `(i, j, k)` with `β_ij < β_ik` where some node proposing an
/// `ik` exchange lies strictly above a node proposing an `ij` exchange.
/// One witness per triple, the first found in node order.
pub fn find_inversion_pairs(tree: &ProtocolTree, instance: &Instance) -> Vec<InversionPair> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for desc in &tree.nodes {
        for anc in &tree.nodes {
            if !tree.is_strict_ancestor(anc.id, desc.id) {
                continue;
            }
            for late in &desc.proposals {
                for early in &anc.proposals {
                    let (la, lb) = late.agents();
                    let (ea, eb) = early.agents();
                    for i in [la, lb] {
                        let (Some(j), Some(k)) = (late.partner(i), early.partner(i)) else {
                            continue;
                        };
                        if !(ea == i || eb == i) || j == k {
                            continue;
                        }
                        if instance.beta(i, j) < instance.beta(i, k) && seen.insert((i, j, k)) {
                            out.push(InversionPair {
                                i,
                                j,
                                k,
                                ancestor_node: anc.id,
                                descendant_node: desc.id,
                                ancestor_exchange: *early,
                                descendant_exchange: *late,
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MisreportReport {
    pub agent: AgentId,
    pub hidden: Vec<GoodId>,
    pub truthful_utility: f64,
    /// True utility after reporting without the hidden goods.
    pub misreport_utility: f64,
    pub gain: f64,
}

/// Runs the protocol, everyone accepting, once on the truth and once with
/// `agent` concealing `hidden`. Utilities are judged on true holdings: what
/// an agent ends with is its reported outcome plus anything it truly held.
pub fn misreport_demo(
    true_instance: &Instance,
    agent: AgentId,
    hidden: &[GoodId],
    config: &ProtocolConfig,
) -> Result<MisreportReport> {
    if agent.0 >= true_instance.num_agents() {
        return Err(invalid(format!("agent {agent} out of range")));
    }
    let mut rows = true_instance.initial_rows().to_vec();
    for &g in hidden {
        if g.0 >= true_instance.num_goods() || !true_instance.holds_initially(agent, g) {
            return Err(invalid(format!("agent {agent} cannot hide good {g} it does not hold")));
        }
        rows[agent.0][g.0] = false;
    }
    let reported = true_instance.with_initial(rows)?;
    let everyone = ParticipantSet::all(true_instance);
    let profile = Profile::accepting();
    let truthful = execute(true_instance, &everyone, &profile, config)?;
    let lied = execute(&reported, &everyone, &profile, config)?;
    let merged: Vec<Vec<bool>> = lied
        .final_allocation
        .rows()
        .iter()
        .zip(true_instance.initial_rows())
        .map(|(r, t)| r.iter().zip(t).map(|(&a, &b)| a || b).collect())
        .collect();
    let truthful_utility = utility(true_instance, &truthful.final_allocation, agent)?;
    let misreport_utility = utility(true_instance, &Allocation::from_matrix(merged), agent)?;
    Ok(MisreportReport {
        agent,
        hidden: hidden.to_vec(),
        truthful_utility,
        misreport_utility,
        gain: misreport_utility - truthful_utility,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingleRoundRow {
    /// The one round of proposals this truncation makes.
    pub proposals: Vec<Exchange>,
    /// An agent better off rejecting part of the round, with its gain.
    pub nic_violation: Option<(AgentId, f64)>,
    /// An exchange left beneficial and unrejected for some response pattern.
    pub stability_violation: Option<Exchange>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingleRoundReport {
    pub rows: Vec<SingleRoundRow>,
    /// Every possible single round breaks stability or incentive compatibility.
    pub every_round_fails: bool,
}

fn outcome(instance: &Instance, proposals: &[Exchange], accepted: impl Fn(usize) -> bool) -> Allocation {
    let mut x = Allocation::initial(instance);
    for (idx, e) in proposals.iter().enumerate() {
        if accepted(idx) {
            x.apply(e);
        }
    }
    x
}

/// Treats every subset of the initially beneficial exchanges as a protocol
/// that stops after one round, and looks for the failure of each.
pub fn single_round_analysis(instance: &Instance, budget: u64) -> Result<SingleRoundReport> {
    let everyone = ParticipantSet::all(instance);
    let candidates: Vec<Exchange> = beneficial_exchanges(instance, &Allocation::initial(instance), &everyone)
        .into_iter()
        .collect();
    let k = candidates.len();
    // each subset expands all of its own response patterns
    let needed = 3u128.checked_pow(k as u32).unwrap_or(u128::MAX);
    if k > 40 || needed > u128::from(budget) {
        return Err(ClearError::BudgetExceeded {
            what: "single-round analysis",
            needed,
            budget: u128::from(budget),
        });
    }
    let mut rows = Vec::new();
    for subset in 0u64..1 << k {
        let proposals: Vec<Exchange> = (0..k).filter(|b| subset >> b & 1 == 1).map(|b| candidates[b]).collect();
        let all_in = outcome(instance, &proposals, |_| true);

        let mut nic_violation: Option<(AgentId, f64)> = None;
        for a in instance.agents() {
            let mine: Vec<usize> = (0..proposals.len()).filter(|&p| proposals[p].involves(a)).collect();
            let base = utility(instance, &all_in, a)?;
            for keep in 0u64..1 << mine.len() {
                let rejected: Vec<usize> = (0..mine.len())
                    .filter(|b| keep >> b & 1 == 0)
                    .map(|b| mine[b])
                    .collect();
                let x = outcome(instance, &proposals, |p| !rejected.contains(&p));
                let gain = utility(instance, &x, a)? - base;
                if gain > TOL && nic_violation.is_none_or(|(_, g)| gain > g + TOL) {
                    nic_violation = Some((a, gain));
                }
            }
        }

        let mut stability_violation = None;
        for mask in (0u64..1 << proposals.len()).rev() {
            let x = outcome(instance, &proposals, |p| mask >> p & 1 == 1);
            let rejected: BTreeSet<Exchange> = (0..proposals.len())
                .filter(|p| mask >> p & 1 == 0)
                .map(|p| proposals[p])
                .collect();
            if let Some(w) = beneficial_exchanges(instance, &x, &everyone)
                .into_iter()
                .find(|e| !rejected.contains(e))
            {
                stability_violation = Some(w);
                break;
            }
        }
        rows.push(SingleRoundRow {
            proposals,
            nic_violation,
            stability_violation,
        });
    }
    let every_round_fails = rows
        .iter()
        .all(|r| r.nic_violation.is_some() || r.stability_violation.is_some());
    Ok(SingleRoundReport {
        rows,
        every_round_fails,
    })
}
