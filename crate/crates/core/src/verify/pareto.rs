//! Pareto efficiency, coalition regimes and the perfect-agent property.

use serde::Serialize;

use crate::engine::Trace;
use crate::error::{invalid, ClearError, Result};
use crate::model::{utilities, utility_from_counts, AgentId, Allocation, GoodId, Instance, ParticipantSet, TOL};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub enum CoalitionKind {
    /// Every member gains when everyone receives one more good.
    Lec,
    /// No member gains when everyone receives one more good.
    Hec,
    Neither,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoalitionClass {
    pub kind: CoalitionKind,
    /// `1 − Σ_{j≠i} β_ij` over the other members, per member.
    pub slacks: Vec<(AgentId, f64)>,
}

pub fn classify_coalition(instance: &Instance, participants: &ParticipantSet) -> CoalitionClass {
    let slacks: Vec<(AgentId, f64)> = participants
        .iter()
        .map(|i| {
            let load: f64 = participants
                .iter()
                .filter(|&j| j != i)
                .map(|j| instance.beta(i, j))
                .sum();
            (i, 1.0 - load)
        })
        .collect();
    let kind = if slacks.iter().all(|&(_, s)| s > 0.0) {
        CoalitionKind::Lec
    } else if slacks.iter().all(|&(_, s)| s <= 0.0) {
        CoalitionKind::Hec
    } else {
        CoalitionKind::Neither
    };
    CoalitionClass { kind, slacks }
}

/// `a` Pareto-dominates `b`: nobody worse off, somebody strictly better,
/// both judged with tolerance.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x - y >= -TOL) && a.iter().zip(b).any(|(x, y)| x - y > TOL)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub enum SearchSpace {
    /// Allocations that only add goods to the initial one.
    Cone,
    /// Every binary matrix.
    Full,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ParetoMethod {
    BruteForce(SearchSpace),
    /// Low-externality coalitions only: efficient iff some agent holds every good.
    LecShortcut,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParetoReport {
    pub passed: bool,
    pub method: ParetoMethod,
    pub witness: Option<Allocation>,
    pub witness_utilities: Option<Vec<f64>>,
    pub examined: u128,
}

/// Searches for an allocation that Pareto-dominates `allocation`, judging
/// utilities of every agent of the instance.
pub fn check_pareto(
    instance: &Instance,
    allocation: &Allocation,
    method: ParetoMethod,
    budget: u64,
) -> Result<ParetoReport> {
    allocation.check_dims(instance)?;
    let space = match method {
        ParetoMethod::LecShortcut => {
            let all = ParticipantSet::all(instance);
            if classify_coalition(instance, &all).kind != CoalitionKind::Lec {
                return Err(invalid("the perfect-agent shortcut needs a low-externality coalition"));
            }
            let passed = instance.agents().any(|a| allocation.is_complete(a));
            return Ok(ParetoReport {
                passed,
                method,
                witness: None,
                witness_utilities: None,
                examined: 0,
            });
        }
        ParetoMethod::BruteForce(space) => space,
    };
    let n = instance.num_agents();
    let m = instance.num_goods();
    let base_rows: Vec<Vec<bool>> = match space {
        SearchSpace::Cone => instance.initial_rows().to_vec(),
        SearchSpace::Full => vec![vec![false; m]; n],
    };
    let free: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (0..m).map(move |g| (a, g)))
        .filter(|&(a, g)| !base_rows[a][g])
        .collect();
    if free.len() >= 127 || (1u128 << free.len()) > budget as u128 {
        return Err(ClearError::BudgetExceeded {
            what: "Pareto enumeration",
            needed: 1u128.checked_shl(free.len() as u32).unwrap_or(u128::MAX),
            budget: budget as u128,
        });
    }
    let target = utilities(instance, allocation)?;
    let base_counts: Vec<usize> = base_rows.iter().map(|r| r.iter().filter(|&&h| h).count()).collect();
    let total = 1u128 << free.len();
    let mut counts = vec![0usize; n];
    for mask in 0..total {
        counts.copy_from_slice(&base_counts);
        for (bit, &(a, _)) in free.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                counts[a] += 1;
            }
        }
        let u: Vec<f64> = instance
            .agents()
            .map(|a| utility_from_counts(instance, a, |b| counts[b.0]))
            .collect();
        if dominates(&u, &target) {
            let mut rows = base_rows.clone();
            for (bit, &(a, g)) in free.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    rows[a][g] = true;
                }
            }
            return Ok(ParetoReport {
                passed: false,
                method,
                witness: Some(Allocation::from_matrix(rows)),
                witness_utilities: Some(u),
                examined: mask + 1,
            });
        }
    }
    Ok(ParetoReport {
        passed: true,
        method,
        witness: None,
        witness_utilities: None,
        examined: total,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConjectureReport {
    pub passed: bool,
    /// Participants holding every good that some participant held initially.
    pub perfect_agents: Vec<AgentId>,
    /// Goods nobody among the participants ever held; no protocol can hand them out.
    pub unheld_goods: Vec<GoodId>,
    /// Some participant holds literally every good of the instance.
    pub strict: bool,
}

/// Some participant ends up with every good that is in circulation among
/// the participants. Goods nobody holds cannot be exchanged and are ignored;
/// `strict` records the literal all-goods reading as well.
pub fn check_conjecture(instance: &Instance, trace: &Trace) -> ConjectureReport {
    let parts = &trace.participants;
    let unheld: Vec<GoodId> = instance
        .goods()
        .filter(|&g| !parts.iter().any(|a| instance.holds_initially(a, g)))
        .collect();
    let x = &trace.final_allocation;
    let perfect: Vec<AgentId> = parts
        .iter()
        .filter(|&a| instance.goods().all(|g| x.holds(a, g) || unheld.contains(&g)))
        .collect();
    ConjectureReport {
        passed: !perfect.is_empty(),
        strict: parts.iter().any(|a| x.is_complete(a)),
        perfect_agents: perfect,
        unheld_goods: unheld,
    }
}
