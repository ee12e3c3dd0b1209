//! Library results compared against straightforward reimplementations.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use clear_core::engine::{execute, explore_focal_tree, participation_battery};
use clear_core::protocol::{build_proposals, pair_order, sac_proposal, RejectedSet};
use clear_core::strategies::{DeviationScript, Profile};
use clear_core::verify::{check_pareto, ParetoMethod, SearchSpace};
use clear_core::{
    beneficial_exchanges, utilities, AgentId, Allocation, Exchange, GoodId, Instance, ParticipantSet, ProtocolConfig,
    TOL,
};
use common::{arb_instance, coin_profile};
use proptest::prelude::*;

fn naive_utility(beta: &[Vec<f64>], x: &[Vec<bool>], i: usize) -> f64 {
    let mut u = 0.0;
    for (j, row) in x.iter().enumerate() {
        for &cell in row {
            if cell {
                u += if j == i { 1.0 } else { -beta[i][j] };
            }
        }
    }
    u
}

fn naive_beneficial(inst: &Instance, x: &[Vec<bool>]) -> BTreeSet<Exchange> {
    let x0 = inst.initial_rows();
    let (n, m) = (inst.num_agents(), inst.num_goods());
    let mut out = BTreeSet::new();
    for i in 0..n {
        for j in 0..n {
            for r in 0..m {
                for s in 0..m {
                    if i != j && x0[i][r] && x0[j][s] && !x[i][s] && !x[j][r] {
                        out.insert(Exchange::new(AgentId(j), GoodId(s), AgentId(i), GoodId(r)));
                    }
                }
            }
        }
    }
    out
}

fn arb_allocation(n: usize, m: usize) -> impl Strategy<Value = Vec<Vec<bool>>> {
    proptest::collection::vec(proptest::collection::vec(any::<bool>(), m), n)
}

/// Valid one-round schedules: each exchange gives initially held goods the
/// receiver lacks, and no (receiver, good) is delivered twice.
fn candidate_exchanges(inst: &Instance) -> Vec<Exchange> {
    let x0 = inst.initial_rows();
    let all = ParticipantSet::all(inst);
    beneficial_exchanges(inst, &Allocation::initial(inst), &all)
        .into_iter()
        .filter(|e| e.deliveries().iter().all(|d| !x0[d.receiver.0][d.good.0]))
        .collect()
}

/// Largest number of exchanges between pair `target` over valid schedules
/// whose other pair counts equal `fixed` (pairs absent from `fixed` get zero).
fn max_for_pair(
    cands: &[Exchange],
    target: (AgentId, AgentId),
    fixed: &BTreeMap<(AgentId, AgentId), usize>,
) -> Option<usize> {
    fn go(
        cands: &[Exchange],
        idx: usize,
        used: &mut BTreeSet<(AgentId, GoodId)>,
        counts: &mut BTreeMap<(AgentId, AgentId), usize>,
        target: (AgentId, AgentId),
        fixed: &BTreeMap<(AgentId, AgentId), usize>,
        best: &mut Option<usize>,
    ) {
        if idx == cands.len() {
            let ok = fixed.iter().all(|(p, &c)| counts.get(p).copied().unwrap_or(0) == c);
            if ok {
                let got = counts.get(&target).copied().unwrap_or(0);
                *best = Some(best.map_or(got, |b| b.max(got)));
            }
            return;
        }
        go(cands, idx + 1, used, counts, target, fixed, best);
        let e = cands[idx];
        let pair = e.agents();
        let cap = if pair == target {
            usize::MAX
        } else {
            fixed.get(&pair).copied().unwrap_or(0)
        };
        let keys = e.deliveries().map(|d| (d.receiver, d.good));
        if counts.get(&pair).copied().unwrap_or(0) < cap && keys.iter().all(|k| !used.contains(k)) {
            used.extend(keys);
            *counts.entry(pair).or_default() += 1;
            go(cands, idx + 1, used, counts, target, fixed, best);
            *counts.get_mut(&pair).unwrap() -= 1;
            for k in keys {
                used.remove(&k);
            }
        }
    }
    let mut best = None;
    go(
        cands,
        0,
        &mut BTreeSet::new(),
        &mut BTreeMap::new(),
        target,
        fixed,
        &mut best,
    );
    best
}

fn naive_sac(inst: &Instance, x: &Allocation, rejected: &RejectedSet) -> Option<Exchange> {
    naive_beneficial(inst, x.rows())
        .into_iter()
        .filter(|e| !rejected.contains(e))
        .min_by(|a, b| {
            let (a1, a2) = a.agents();
            let (b1, b2) = b.agents();
            inst.beta(a1, a2).total_cmp(&inst.beta(b1, b2)).then(a.cmp(b))
        })
}

fn all_scripts(len: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u32..1 << len).map(move |mask| (0..len).map(|b| mask >> b & 1 == 1).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn utility_matches_direct_sum(inst in arb_instance(5, 5), seed in any::<u64>()) {
        let n = inst.num_agents();
        let m = inst.num_goods();
        let rows: Vec<Vec<bool>> = (0..n).map(|a| (0..m).map(|g| (seed >> ((a * m + g) % 64)) & 1 == 1).collect()).collect();
        let x = Allocation::from_matrix(rows.clone());
        let u = utilities(&inst, &x).unwrap();
        for a in 0..n {
            prop_assert!((u[a] - naive_utility(inst.beta_matrix(), &rows, a)).abs() < TOL);
        }
    }

    #[test]
    fn utility_is_linear_in_holdings(inst in arb_instance(4, 4), xs in arb_allocation(4, 4), ys in arb_allocation(4, 4)) {
        let (n, m) = (inst.num_agents(), inst.num_goods());
        let cut = |z: &Vec<Vec<bool>>| -> Vec<Vec<bool>> { z[..n].iter().map(|r| r[..m].to_vec()).collect() };
        let (x, y) = (cut(&xs), cut(&ys));
        // disjoint union: x plus the cells of y that x lacks
        let extra: Vec<Vec<bool>> = x.iter().zip(&y).map(|(a, b)| a.iter().zip(b).map(|(&p, &q)| q && !p).collect()).collect();
        let union: Vec<Vec<bool>> = x.iter().zip(&extra).map(|(a, b)| a.iter().zip(b).map(|(&p, &q)| p || q).collect()).collect();
        for a in 0..n {
            let lhs = naive_utility(inst.beta_matrix(), &union, a);
            let rhs = naive_utility(inst.beta_matrix(), &x, a) + naive_utility(inst.beta_matrix(), &extra, a);
            let lib = utilities(&inst, &Allocation::from_matrix(union.clone())).unwrap()[a];
            prop_assert!((lhs - rhs).abs() < TOL);
            prop_assert!((lib - lhs).abs() < TOL);
        }
    }

    #[test]
    fn beneficial_matches_quadruple_scan(inst in arb_instance(5, 4), xs in arb_allocation(5, 4)) {
        let (n, m) = (inst.num_agents(), inst.num_goods());
        // current holdings always include the initial ones
        let x: Vec<Vec<bool>> = (0..n).map(|a| (0..m).map(|g| xs[a][g] || inst.initial_rows()[a][g]).collect()).collect();
        let all = ParticipantSet::all(&inst);
        prop_assert_eq!(
            beneficial_exchanges(&inst, &Allocation::from_matrix(x.clone()), &all),
            naive_beneficial(&inst, &x)
        );
    }

    #[test]
    fn sac_picks_the_cheapest_unrejected_exchange(inst in arb_instance(5, 4), seed in any::<u64>()) {
        let all = ParticipantSet::all(&inst);
        let x = Allocation::initial(&inst);
        let rejected: RejectedSet = naive_beneficial(&inst, x.rows())
            .into_iter()
            .enumerate()
            .filter(|(idx, _)| (seed >> (idx % 64)) & 1 == 1)
            .map(|(_, e)| e)
            .collect();
        prop_assert_eq!(sac_proposal(&inst, &all, &x, &rejected), naive_sac(&inst, &x, &rejected));
    }

    #[test]
    fn first_round_is_greedily_maximal_per_pair(inst in arb_instance(4, 3)) {
        let all = ParticipantSet::all(&inst);
        let out = build_proposals(&inst, &all, &Allocation::initial(&inst), &RejectedSet::new(), &ProtocolConfig::clear());
        let mut counts: BTreeMap<(AgentId, AgentId), usize> = BTreeMap::new();
        for e in &out.proposals {
            *counts.entry(e.agents()).or_default() += 1;
        }
        let cands = candidate_exchanges(&inst);
        let mut fixed = BTreeMap::new();
        for (a, b) in pair_order(&inst, &all) {
            let pair = (AgentId(a), AgentId(b));
            let got = counts.get(&pair).copied().unwrap_or(0);
            let best = max_for_pair(&cands, pair, &fixed);
            prop_assert_eq!(best, Some(got), "pair {:?}", pair);
            fixed.insert(pair, got);
        }
    }

    #[test]
    fn deviation_paths_match_script_enumeration(inst in arb_instance(3, 2), focal_pick in 0usize..3) {
        let all = ParticipantSet::all(&inst);
        let focal = AgentId(focal_pick % inst.num_agents());
        let cfg = ProtocolConfig::clear();
        let outcomes = explore_focal_tree(&inst, &all, focal, &cfg, &Profile::accepting(), 1 << 16).unwrap();
        let best_tree = outcomes.iter().map(|o| o.utility).fold(f64::NEG_INFINITY, f64::max);
        let max_len = beneficial_exchanges(&inst, &Allocation::initial(&inst), &all)
            .iter()
            .filter(|e| e.involves(focal))
            .count();
        let mut best_scripts = f64::NEG_INFINITY;
        let mut reachable = BTreeSet::new();
        for bits in all_scripts(max_len) {
            let p = Profile::accepting().with(focal, Arc::new(DeviationScript::new(bits)));
            let t = execute(&inst, &all, &p, &cfg).unwrap();
            best_scripts = best_scripts.max(t.utilities[focal.0]);
            reachable.insert(t.final_allocation.rows().to_vec());
        }
        prop_assert!((best_tree - best_scripts).abs() < TOL);
        let tree_outcomes: BTreeSet<_> = outcomes.iter().map(|o| {
            let p = Profile::accepting().with(focal, Arc::new(o.script.clone()));
            execute(&inst, &all, &p, &cfg).unwrap().final_allocation.rows().to_vec()
        }).collect();
        prop_assert_eq!(tree_outcomes, reachable);
    }

    #[test]
    fn battery_matches_direct_runs(inst in arb_instance(4, 3), focal_pick in 0usize..4) {
        let focal = AgentId(focal_pick % inst.num_agents());
        let rows = participation_battery(&inst, focal, &ProtocolConfig::clear(), 1 << 10).unwrap();
        prop_assert_eq!(rows.len(), 1 << (inst.num_agents() - 1));
        for row in rows {
            let with = execute(&inst, &row.subset.with(focal), &Profile::accepting(), &ProtocolConfig::clear()).unwrap();
            let without = execute(&inst, &row.subset, &Profile::accepting(), &ProtocolConfig::clear()).unwrap();
            let u_in = naive_utility(inst.beta_matrix(), with.final_allocation.rows(), focal.0);
            let u_out = naive_utility(inst.beta_matrix(), without.final_allocation.rows(), focal.0);
            prop_assert!((row.u_in - u_in).abs() < TOL && (row.u_out - u_out).abs() < TOL);
        }
    }

    #[test]
    fn pareto_matches_allocation_enumeration(inst in arb_instance(3, 3), xs in arb_allocation(3, 3), full in any::<bool>()) {
        let (n, m) = (inst.num_agents(), inst.num_goods());
        let x0 = inst.initial_rows();
        let x: Vec<Vec<bool>> = (0..n).map(|a| (0..m).map(|g| xs[a][g] || x0[a][g]).collect()).collect();
        let base: Vec<f64> = (0..n).map(|a| naive_utility(inst.beta_matrix(), &x, a)).collect();
        let mut dominated = false;
        for mask in 0u32..1 << (n * m) {
            let y: Vec<Vec<bool>> = (0..n).map(|a| (0..m).map(|g| mask >> (a * m + g) & 1 == 1).collect()).collect();
            if !full && (0..n).any(|a| (0..m).any(|g| x0[a][g] && !y[a][g])) {
                continue;
            }
            let u: Vec<f64> = (0..n).map(|a| naive_utility(inst.beta_matrix(), &y, a)).collect();
            if u.iter().zip(&base).all(|(p, q)| p - q >= -TOL) && u.iter().zip(&base).any(|(p, q)| p - q > TOL) {
                dominated = true;
                break;
            }
        }
        let space = if full { SearchSpace::Full } else { SearchSpace::Cone };
        let r = check_pareto(&inst, &Allocation::from_matrix(x), ParetoMethod::BruteForce(space), 1 << 12).unwrap();
        prop_assert_eq!(r.passed, !dominated);
    }

    #[test]
    fn random_profiles_never_leave_unrejected_beneficial_exchanges(inst in arb_instance(5, 4), seed in any::<u64>()) {
        let all = ParticipantSet::all(&inst);
        for cfg in [ProtocolConfig::clear(), ProtocolConfig::sac()] {
            let t = execute(&inst, &all, &coin_profile(inst.num_agents(), seed, 40), &cfg).unwrap();
            let rejected = t.rejected_set();
            prop_assert!(naive_beneficial(&inst, t.final_allocation.rows()).iter().all(|e| rejected.contains(e)));
        }
    }
}
