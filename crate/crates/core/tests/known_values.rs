//! Exact outcomes on the catalog instances, written out by hand.

use std::collections::BTreeSet;
use std::sync::Arc;

use clear_core::demos::demo;
use clear_core::engine::{execute, Trace};
use clear_core::strategies::{reject_all, DeviationScript, Profile};
use clear_core::verify::{
    check_ir, classify_coalition, misreport_demo, single_round_analysis, tracked_decomposition, CoalitionKind,
    PathClass,
};
use clear_core::{utilities, AgentId, Allocation, Exchange, GoodId, Instance, ParticipantSet, ProtocolConfig, TOL};

const I: usize = 0;
const J: usize = 1;
const K: usize = 2;
const L: usize = 3;
const H: usize = 4;

/// Exchange with 1-based goods: `i` gives `r`, `j` gives `s`.
fn ex(i: usize, r: usize, j: usize, s: usize) -> Exchange {
    Exchange::of(i, r - 1, j, s - 1)
}

fn executed(t: &Trace) -> BTreeSet<Exchange> {
    t.executed().copied().collect()
}

fn accept_all(inst: &Instance, cfg: &ProtocolConfig) -> Trace {
    execute(inst, &ParticipantSet::all(inst), &Profile::accepting(), cfg).unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < TOL
}

#[test]
fn nine_goods_without_repair_schedules_six_exchanges() {
    let d = demo("po9").unwrap();
    let t = accept_all(d.instance(), &ProtocolConfig::clear().without_retrospect());
    let want: BTreeSet<Exchange> = [
        ex(I, 3, J, 7),
        ex(I, 4, J, 8),
        ex(I, 5, J, 9),
        ex(I, 6, K, 1),
        ex(J, 7, K, 1),
        ex(J, 8, K, 2),
    ]
    .into();
    assert_eq!(executed(&t), want);
    for a in 0..3 {
        assert_eq!(
            t.final_allocation.count(AgentId(a)),
            8,
            "every agent lacks exactly one good"
        );
    }
    let t = accept_all(d.instance(), &ProtocolConfig::clear());
    assert!((0..3).any(|a| t.final_allocation.count(AgentId(a)) == 9));
}

#[test]
fn four_agents_three_goods_first_round() {
    let d = demo("fig1a").unwrap();
    let t = accept_all(d.instance(), &ProtocolConfig::clear());
    let want: BTreeSet<Exchange> = [ex(I, 1, J, 2), ex(I, 1, K, 3), ex(J, 2, K, 3)].into();
    assert_eq!(executed(&t), want);
    assert_eq!(t.num_rounds(), 1);
    let profile = Profile::accepting().with(
        AgentId(K),
        Arc::new(clear_core::strategies::Scripted::new().with(Some(1), ex(I, 1, K, 3), false)),
    );
    let t = execute(
        d.instance(),
        &ParticipantSet::all(d.instance()),
        &profile,
        &ProtocolConfig::clear(),
    )
    .unwrap();
    assert_eq!(t.num_rounds(), 2);
    assert_eq!(t.rounds[1].proposals, vec![ex(I, 1, L, 3)]);
}

#[test]
fn repair_reroutes_the_good_i_sends_to_j() {
    let d = demo("fig1b").unwrap();
    let t = accept_all(d.instance(), &ProtocolConfig::clear());
    assert_eq!(executed(&t), [ex(I, 3, J, 2), ex(J, 2, K, 1)].into());
}

#[test]
fn five_agents_neither_regime() {
    let d = demo("nlnh5").unwrap();
    let inst = d.instance();
    let class = classify_coalition(inst, &ParticipantSet::all(inst));
    assert_eq!(class.kind, CoalitionKind::Neither);
    assert!(close(class.slacks[I].1, 1.0 - 4.0 * 0.26));
    for a in [J, K, L, H] {
        assert!(close(class.slacks[a].1, 1.0 - 0.26 - 3.0 * 0.01));
    }
    let t = accept_all(inst, &ProtocolConfig::clear());
    assert_eq!(executed(&t), [ex(J, 2, H, 3), ex(I, 3, K, 1), ex(I, 3, L, 2)].into());
    let before = utilities(inst, &Allocation::initial(inst)).unwrap();
    assert!(close(t.utilities[I] - before[I], 2.0 - 4.0 * 0.26));
    for a in [J, K, L, H] {
        assert!(close(t.utilities[a] - before[a], 1.0 - 2.0 * 0.26 - 3.0 * 0.01));
    }
}

#[test]
fn break_away_coalitions_with_heavy_competition() {
    let d = demo("core4").unwrap();
    let inst = d.instance();
    for (members, want) in [
        (vec![I, J, K, L], 4.0 - 12.0 * 0.9),
        (vec![I, J, K], 3.0 - 7.0 * 0.9),
        (vec![I, J], 2.0 - 4.0 * 0.9),
    ] {
        let p: ParticipantSet = members.iter().map(|&a| AgentId(a)).collect();
        let t = execute(inst, &p, &Profile::accepting(), &ProtocolConfig::clear()).unwrap();
        for a in members {
            assert!(close(t.utilities[a], want));
        }
    }
    assert!(close(-6.8, 4.0 - 12.0 * 0.9) && close(-3.3, 3.0 - 7.0 * 0.9) && close(-1.6, 2.0 - 4.0 * 0.9));
}

#[test]
fn sharing_everything_under_heavy_competition_hurts_all() {
    let beta = Instance::beta_from_pairs(3, &[], 0.9);
    let inst = Instance::from_bits(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]], beta).unwrap();
    let t = accept_all(&inst, &ProtocolConfig::clear());
    let before = utilities(&inst, &Allocation::initial(&inst)).unwrap();
    for a in 0..3 {
        assert!(close(t.utilities[a], -2.4));
        assert!(close(before[a], -0.8));
    }
}

#[test]
fn participation_margins_and_paths() {
    let d = demo("ir4").unwrap();
    let inst = d.instance();
    let r = check_ir(inst, AgentId(I), &ProtocolConfig::clear(), 1 << 8).unwrap();
    assert!(close(r.full_margin, 1.0 - inst.beta(AgentId(I), AgentId(L))));

    let four = d.variant("four-goods").unwrap();
    let all = ParticipantSet::all(four);
    let with = accept_all(four, &ProtocolConfig::clear());
    let without = execute(
        four,
        &all.without(AgentId(I)),
        &Profile::accepting(),
        &ProtocolConfig::clear(),
    )
    .unwrap();
    assert_eq!(executed(&with), [ex(I, 1, J, 2), ex(I, 3, J, 4), ex(K, 1, L, 2)].into());
    assert_eq!(executed(&without), [ex(J, 2, K, 1), ex(J, 4, K, 3)].into());
    let rep = tracked_decomposition(four, &all.without(AgentId(I)), AgentId(I), &ProtocolConfig::clear()).unwrap();
    let mut got: Vec<(PathClass, f64)> = rep.paths.iter().map(|p| (p.class, p.delta)).collect();
    got.sort_by(|a, b| a.1.total_cmp(&b.1));
    assert_eq!(got.len(), 2);
    assert_eq!(got[0].0, PathClass::T2);
    assert!(close(got[0].1, 1.0 - 0.3));
    assert_eq!(got[1].0, PathClass::T1);
    assert!(close(got[1].1, 1.0 + 0.2));

    let d = demo("ir4b").unwrap();
    let inst = d.instance();
    let all = ParticipantSet::all(inst);
    let with = accept_all(inst, &ProtocolConfig::clear());
    let without = execute(
        inst,
        &all.without(AgentId(I)),
        &Profile::accepting(),
        &ProtocolConfig::clear(),
    )
    .unwrap();
    assert_eq!(executed(&with), [ex(I, 2, J, 1), ex(I, 3, K, 4), ex(J, 3, L, 4)].into());
    assert_eq!(executed(&without), [ex(J, 3, K, 2), ex(J, 3, L, 4)].into());
    let rep = tracked_decomposition(inst, &all.without(AgentId(I)), AgentId(I), &ProtocolConfig::clear()).unwrap();
    assert_eq!(rep.paths.len(), 1);
    assert_eq!(rep.paths[0].class, PathClass::T3);
    assert!(close(rep.paths[0].delta, 2.0));
    assert_eq!(rep.paths[0].exchanges.len(), 3);
}

#[test]
fn competitor_holding_everything_gains_nothing() {
    let d = demo("irillus").unwrap();
    let r = check_ir(d.instance(), AgentId(K), &ProtocolConfig::clear(), 1 << 8).unwrap();
    let row = r.rows.iter().find(|row| row.subset.len() == 2).unwrap();
    assert!(close(row.u_in, row.u_out));
}

#[test]
fn hiding_a_good_pays_beta_ij() {
    let d = demo("truthful3").unwrap();
    let inst = d.instance();
    let (bij, bik) = (inst.beta(AgentId(I), AgentId(J)), inst.beta(AgentId(I), AgentId(K)));
    let r = misreport_demo(inst, AgentId(I), &[GoodId(1)], &ProtocolConfig::clear()).unwrap();
    assert!(close(r.truthful_utility, 2.0 - 2.0 * bij - 2.0 * bik));
    assert!(close(r.misreport_utility, 2.0 - bij - 2.0 * bik));
    let sym = d.variant("j-hides").unwrap();
    let r = misreport_demo(sym, AgentId(J), &[GoodId(1)], &ProtocolConfig::clear()).unwrap();
    assert!(close(r.gain, sym.beta(AgentId(I), AgentId(J))));
}

#[test]
fn ascending_protocol_counter_profile() {
    let d = demo("dsic4").unwrap();
    let inst = d.instance();
    let all = ParticipantSet::all(inst);
    let p = d.profile("stepB3").unwrap();
    let sac = ProtocolConfig::sac();
    let honest = execute(inst, &all, &p.profile, &sac).unwrap();
    assert_eq!(executed(&honest), [ex(I, 1, J, 2), ex(K, 1, L, 2)].into());
    assert!((0..4).all(|a| honest.final_allocation.is_complete(AgentId(a))));
    let deviating = p
        .profile
        .clone()
        .with(AgentId(J), Arc::new(DeviationScript::new(vec![false, true])));
    let dev = execute(inst, &all, &deviating, &sac).unwrap();
    assert_eq!(executed(&dev), [ex(J, 2, K, 1)].into());
    assert!(dev.utilities[J] > honest.utilities[J] + TOL);

    // an inversion pair (k, j, l) in CLEAR's tree: with i rejecting everything,
    // k prefers turning down kl to get jk
    let i_refuses = Profile::accepting().with(AgentId(I), reject_all());
    let honest = execute(inst, &all, &i_refuses, &ProtocolConfig::clear()).unwrap();
    assert_eq!(executed(&honest), [ex(K, 1, L, 2)].into());
    let deviating = i_refuses.with(AgentId(K), Arc::new(DeviationScript::new(vec![false, true])));
    let dev = execute(inst, &all, &deviating, &ProtocolConfig::clear()).unwrap();
    assert_eq!(executed(&dev), [ex(J, 2, K, 1)].into());
    assert!(dev.utilities[K] > honest.utilities[K] + TOL);
}

#[test]
fn one_round_protocols_fail_on_three_agents() {
    let d = demo("single3").unwrap();
    let inst = d.instance();
    let r = single_round_analysis(inst, 1 << 10).unwrap();
    assert!(r.every_round_fails);
    let both = r.rows.iter().find(|row| row.proposals.len() == 2).unwrap();
    let (agent, gain) = both.nic_violation.unwrap();
    assert_eq!(agent, AgentId(K));
    assert!(close(gain, inst.beta(AgentId(J), AgentId(K))));
    for row in r.rows.iter().filter(|row| row.proposals.len() == 1) {
        let w = row.stability_violation.unwrap();
        assert!(!row.proposals.contains(&w));
    }
}
