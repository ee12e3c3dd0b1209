//! Catalog of small named instances with the outcomes they are known to
//! produce. Agents are named `i, j, k, l, h` in index order and goods are
//! shown 1-based; the code below uses 0-based indices throughout.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::Serialize;

use crate::engine::{build_protocol_tree, execute, Trace};
use crate::error::{invalid, Result};
use crate::format::Document;
use crate::model::{
    beneficial_exchanges, utilities, AgentId, Allocation, Exchange, GoodId, Instance, ParticipantSet, TOL,
};
use crate::protocol::{ProtocolConfig, ProtocolKind};
use crate::strategies::{reject_all, Profile, Scripted};
use crate::verify::{
    check_conjecture, check_ir, check_nic, check_pareto, check_stability, classify_coalition, dominates,
    find_inversion_pairs, misreport_demo, single_round_analysis, tracked_decomposition, CoalitionKind, ParetoMethod,
    PathClass, SearchSpace,
};

const I: usize = 0;
const J: usize = 1;
const K: usize = 2;
const L: usize = 3;
const H: usize = 4;

const BUDGET: u64 = 1 << 16;

/// An alternative instance shipped with a demo (other holdings or betas).
#[derive(Clone, Debug)]
pub struct Variant {
    pub label: &'static str,
    pub instance: Instance,
}

/// A named strategy profile with the agent whose incentives it probes.
#[derive(Clone, Debug)]
pub struct DemoProfile {
    pub name: &'static str,
    pub protocol: ProtocolKind,
    pub focal: AgentId,
    pub profile: Profile,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DemoCheck {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

fn check(label: impl Into<String>, passed: bool, detail: impl Into<String>) -> DemoCheck {
    DemoCheck {
        label: label.into(),
        passed,
        detail: detail.into(),
    }
}

#[derive(Clone, Debug)]
pub struct Demo {
    pub name: &'static str,
    pub summary: &'static str,
    pub document: Document,
    pub variants: Vec<Variant>,
    pub profiles: Vec<DemoProfile>,
    checks: fn(&Demo) -> Result<Vec<DemoCheck>>,
}

impl Demo {
    pub fn instance(&self) -> &Instance {
        &self.document.instance
    }

    pub fn names(&self) -> &[String] {
        &self.document.names
    }

    pub fn variant(&self, label: &str) -> Option<&Instance> {
        self.variants.iter().find(|v| v.label == label).map(|v| &v.instance)
    }

    pub fn profile(&self, name: &str) -> Option<&DemoProfile> {
        self.profiles.iter().find(|p| p.name == name)
    }

    /// Runs the demo's expectation checks.
    pub fn checks(&self) -> Result<Vec<DemoCheck>> {
        (self.checks)(self)
    }

    fn show(&self, exchanges: impl IntoIterator<Item = Exchange>) -> String {
        exchanges
            .into_iter()
            .map(|e| e.display_named(self.names()))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn names(n: usize) -> Vec<String> {
    ["i", "j", "k", "l", "h"][..n].iter().map(|s| s.to_string()).collect()
}

fn doc(initial: &[&[u8]], pairs: &[(usize, usize, f64)], default: f64) -> Document {
    let n = initial.len();
    let instance = Instance::from_bits(initial, Instance::beta_from_pairs(n, pairs, default))
        .expect("catalog instances are valid");
    Document {
        instance,
        names: names(n),
    }
}

fn ex(i: usize, r: usize, j: usize, s: usize) -> Exchange {
    Exchange::of(i, r - 1, j, s - 1)
}

fn run(instance: &Instance, profile: &Profile, config: &ProtocolConfig) -> Result<Trace> {
    execute(instance, &ParticipantSet::all(instance), profile, config)
}

fn set<const N: usize>(items: [Exchange; N]) -> BTreeSet<Exchange> {
    items.into_iter().collect()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL
}

pub fn catalog() -> Vec<Demo> {
    vec![
        fig1a(),
        fig1b(),
        irillus(),
        ir4(),
        ir4b(),
        po9(),
        nlnh5(),
        dsic4(),
        truthful3(),
        single3(),
        core4(),
    ]
}

pub fn demo_names() -> Vec<&'static str> {
    catalog().iter().map(|d| d.name).collect()
}

pub fn demo(name: &str) -> Result<Demo> {
    catalog()
        .into_iter()
        .find(|d| d.name == name)
        .ok_or_else(|| invalid(format!("unknown demo `{name}`; known: {}", demo_names().join(", "))))
}

fn fig1a() -> Demo {
    let document = doc(
        &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[0, 0, 1]],
        &[
            (I, J, 0.1),
            (I, K, 0.2),
            (J, K, 0.3),
            (I, L, 0.4),
            (J, L, 0.5),
            (K, L, 0.6),
        ],
        0.5,
    );
    let k_rejects = Profile::accepting().with(AgentId(K), Arc::new(Scripted::new().with(None, ex(I, 1, K, 3), false)));
    Demo {
        name: "fig1a",
        summary: "Four agents, three goods. Everyone accepting settles in one round; \
                  rejecting ((i,1),(k,3)) brings i and l together in a second round.",
        document,
        variants: Vec::new(),
        profiles: vec![DemoProfile {
            name: "k-rejects-ik",
            protocol: ProtocolKind::Clear,
            focal: AgentId(K),
            profile: k_rejects,
        }],
        checks: |d| {
            let cfg = ProtocolConfig::default();
            let t = run(d.instance(), &Profile::accepting(), &cfg)?;
            let round1: BTreeSet<Exchange> = t.rounds[0].proposals.iter().copied().collect();
            let want = set([ex(I, 1, J, 2), ex(I, 1, K, 3), ex(J, 2, K, 3)]);
            let stable = check_stability(d.instance(), &t, &t.participants);
            let p = &d.profile("k-rejects-ik").expect("declared above").profile;
            let t2 = run(d.instance(), p, &cfg)?;
            let second = t2.rounds.get(1).map(|r| r.proposals.clone()).unwrap_or_default();
            Ok(vec![
                check("round one", round1 == want, d.show(round1.iter().copied())),
                check(
                    "stable after one round",
                    t.num_rounds() == 1 && stable.passed && stable.remaining_beneficial == 0,
                    format!("{} round(s)", t.num_rounds()),
                ),
                check(
                    "rejecting ((i,1),(k,3)) leads to ((i,1),(l,3))",
                    second == [ex(I, 1, L, 3)],
                    d.show(second.iter().copied()),
                ),
            ])
        },
    }
}

fn fig1b() -> Demo {
    Demo {
        name: "fig1b",
        summary: "Three agents, three goods. RETROSPECT moves i's delivery to j from good 1 \
                  to good 3 so that k can also trade good 1 with j.",
        document: doc(
            &[&[1, 0, 1], &[0, 1, 0], &[1, 0, 0]],
            &[(I, J, 0.1), (I, K, 0.2), (J, K, 0.3)],
            0.5,
        ),
        variants: Vec::new(),
        profiles: Vec::new(),
        checks: |d| {
            let with = run(d.instance(), &Profile::accepting(), &ProtocolConfig::default())?;
            let without = run(
                d.instance(),
                &Profile::accepting(),
                &ProtocolConfig::default().without_retrospect(),
            )?;
            let got: BTreeSet<Exchange> = with.rounds[0].proposals.iter().copied().collect();
            Ok(vec![
                check(
                    "with RETROSPECT",
                    got == set([ex(I, 3, J, 2), ex(J, 2, K, 1)]),
                    d.show(got.iter().copied()),
                ),
                check(
                    "without RETROSPECT",
                    without.rounds[0].proposals == [ex(I, 1, J, 2)],
                    d.show(without.rounds[0].proposals.iter().copied()),
                ),
            ])
        },
    }
}

fn irillus() -> Demo {
    Demo {
        name: "irillus",
        summary: "k already holds everything, so joining i and j neither helps nor hurts it.",
        document: doc(
            &[&[1, 0], &[0, 1], &[1, 1]],
            &[(I, J, 0.1), (I, K, 0.2), (J, K, 0.3)],
            0.5,
        ),
        variants: Vec::new(),
        profiles: Vec::new(),
        checks: |d| {
            let r = check_ir(d.instance(), AgentId(K), &ProtocolConfig::default(), BUDGET)?;
            Ok(vec![
                check(
                    "k individually rational",
                    r.passed,
                    format!("min margin {}", r.min_margin),
                ),
                check(
                    "margin with i and j is zero",
                    close(r.full_margin, 0.0),
                    format!("{}", r.full_margin),
                ),
            ])
        },
    }
}

const IR4_BETA: [(usize, usize, f64); 6] = [
    (I, J, 0.1),
    (I, K, 0.2),
    (I, L, 0.3),
    (J, K, 0.4),
    (J, L, 0.5),
    (K, L, 0.6),
];

fn ir4() -> Demo {
    let base = doc(&[&[1, 0], &[0, 1], &[1, 0], &[0, 1]], &IR4_BETA, 0.5);
    let two = doc(
        &[&[1, 0, 1, 0], &[0, 1, 0, 1], &[1, 0, 1, 0], &[0, 1, 0, 0]],
        &IR4_BETA,
        0.5,
    );
    Demo {
        name: "ir4",
        summary: "Participation gain of i. With two goods, i gains 1-beta_il. With four goods \
                  the gain splits into two tracked paths worth 1-beta_il and 1+beta_ik.",
        document: base,
        variants: vec![Variant {
            label: "four-goods",
            instance: two.instance,
        }],
        profiles: Vec::new(),
        checks: |d| {
            let inst = d.instance();
            let (i, k, l) = (AgentId(I), AgentId(K), AgentId(L));
            let r = check_ir(inst, i, &ProtocolConfig::default(), BUDGET)?;
            let four = d.variant("four-goods").expect("declared above");
            let others = ParticipantSet::all(four).without(i);
            let t = tracked_decomposition(four, &others, i, &ProtocolConfig::default())?;
            let mut deltas: Vec<(PathClass, f64)> = t.paths.iter().map(|p| (p.class, p.delta)).collect();
            deltas.sort_by(|a, b| a.1.total_cmp(&b.1));
            let want = [
                (PathClass::T2, 1.0 - four.beta(i, l)),
                (PathClass::T1, 1.0 + four.beta(i, k)),
            ];
            let paths_ok =
                t.passed && deltas.len() == 2 && deltas.iter().zip(&want).all(|(a, b)| a.0 == b.0 && close(a.1, b.1));
            Ok(vec![
                check(
                    "i individually rational",
                    r.passed,
                    format!("min margin {}", r.min_margin),
                ),
                check(
                    "margin is 1-beta_il",
                    close(r.full_margin, 1.0 - inst.beta(i, l)),
                    format!("{}", r.full_margin),
                ),
                check("four goods: two tracked paths", paths_ok, format!("{deltas:?}")),
            ])
        },
    }
}

fn ir4b() -> Demo {
    Demo {
        name: "ir4b",
        summary: "A tracked path that returns to i, worth 2, while the j-l exchange stays untracked.",
        document: doc(
            &[&[0, 1, 1, 0], &[1, 0, 1, 0], &[1, 1, 0, 1], &[1, 0, 0, 1]],
            &IR4_BETA,
            0.5,
        ),
        variants: Vec::new(),
        profiles: Vec::new(),
        checks: |d| {
            let i = AgentId(I);
            let others = ParticipantSet::all(d.instance()).without(i);
            let t = tracked_decomposition(d.instance(), &others, i, &ProtocolConfig::default())?;
            let one_t3 = t.paths.len() == 1 && t.paths[0].class == PathClass::T3 && close(t.paths[0].delta, 2.0);
            let jl = t.untracked_e.iter().any(|p| (p.a, p.b) == (AgentId(J), AgentId(L)));
            Ok(vec![
                check("decomposition holds", t.passed, t.violations.join("; ")),
                check(
                    "one T3 path worth 2",
                    one_t3,
                    format!("{:?}", t.paths.iter().map(|p| (p.class, p.delta)).collect::<Vec<_>>()),
                ),
                check("j-l exchange untracked", jl, format!("{:?}", t.untracked_e)),
            ])
        },
    }
}

fn po9() -> Demo {
    Demo {
        name: "po9",
        summary: "Three agents, nine goods. Without RETROSPECT the outcome is stable but nobody \
                  holds everything; with it some agent ends up with all nine goods.",
        document: doc(
            &[
                &[0, 0, 1, 1, 1, 1, 0, 0, 0],
                &[0, 0, 0, 0, 0, 0, 1, 1, 1],
                &[1, 1, 1, 1, 1, 0, 0, 0, 0],
            ],
            &[(I, J, 0.1), (I, K, 0.2), (J, K, 0.3)],
            0.5,
        ),
        variants: Vec::new(),
        profiles: Vec::new(),
        checks: |d| {
            let inst = d.instance();
            let lazy = run(
                inst,
                &Profile::accepting(),
                &ProtocolConfig::default().without_retrospect(),
            )?;
            let got: BTreeSet<Exchange> = lazy.executed().copied().collect();
            let want = set([
                ex(I, 3, J, 7),
                ex(I, 4, J, 8),
                ex(I, 5, J, 9),
                ex(I, 6, K, 1),
                ex(J, 7, K, 1),
                ex(J, 8, K, 2),
            ]);
            let full = run(inst, &Profile::accepting(), &ProtocolConfig::default())?;
            let lec = check_pareto(inst, &full.final_allocation, ParetoMethod::LecShortcut, 0)?;
            Ok(vec![
                check(
                    "without RETROSPECT: six exchanges",
                    got == want,
                    d.show(got.iter().copied()),
                ),
                check(
                    "without RETROSPECT: stable",
                    check_stability(inst, &lazy, &lazy.participants).passed,
                    "",
                ),
                check(
                    "without RETROSPECT: nobody holds everything",
                    !check_conjecture(inst, &lazy).passed,
                    "",
                ),
                check(
                    "with RETROSPECT: a perfect agent",
                    check_conjecture(inst, &full).strict && lec.passed,
                    format!("{:?}", check_conjecture(inst, &full).perfect_agents),
                ),
            ])
        },
    }
}

fn nlnh5() -> Demo {
    let mut pairs = Vec::new();
    for a in 0..5 {
        for b in a + 1..5 {
            pairs.push((a, b, if a == I { 0.26 } else { 0.01 }));
        }
    }
    let base = doc(
        &[&[0, 0, 1], &[1, 1, 0], &[1, 1, 0], &[1, 1, 0], &[1, 0, 1]],
        &pairs,
        0.5,
    );
    let alt = doc(
        &[&[0, 1, 1], &[1, 1, 0], &[1, 1, 0], &[1, 1, 0], &[1, 0, 1]],
        &pairs,
        0.5,
    );
    Demo {
        name: "nlnh5",
        summary: "Five agents where i competes strongly with everyone else. From one allocation \
                  everybody ends up with every good and all gain; once i also holds good 2, \
                  the initial allocation is already Pareto-efficient.",
        document: base,
        variants: vec![Variant {
            label: "i-holds-good-2",
            instance: alt.instance,
        }],
        profiles: Vec::new(),
        checks: |d| {
            let inst = d.instance();
            let class = classify_coalition(inst, &ParticipantSet::all(inst));
            let slacks_ok = class
                .slacks
                .iter()
                .all(|&(a, s)| close(s, if a.0 == I { -0.04 } else { 0.71 }));
            let t = run(inst, &Profile::accepting(), &ProtocolConfig::default())?;
            let got: BTreeSet<Exchange> = t.executed().copied().collect();
            let want = set([ex(J, 2, H, 3), ex(I, 3, K, 1), ex(I, 3, L, 2)]);
            let everyone = inst.agents().all(|a| t.final_allocation.is_complete(a));
            let before = utilities(inst, &Allocation::initial(inst))?;
            let gains: Vec<f64> = t.utilities.iter().zip(&before).map(|(a, b)| a - b).collect();
            let gains_ok = gains
                .iter()
                .enumerate()
                .all(|(a, &g)| close(g, if a == I { 0.96 } else { 0.45 }));
            let pe = check_pareto(
                inst,
                &t.final_allocation,
                ParetoMethod::BruteForce(SearchSpace::Full),
                BUDGET,
            )?;
            let alt = d.variant("i-holds-good-2").expect("declared above");
            let x0 = Allocation::initial(alt);
            let alt_unstable = !beneficial_exchanges(alt, &x0, &ParticipantSet::all(alt)).is_empty();
            let alt_pe = check_pareto(alt, &x0, ParetoMethod::BruteForce(SearchSpace::Full), BUDGET)?;
            Ok(vec![
                check(
                    "neither low nor high competition",
                    class.kind == CoalitionKind::Neither && slacks_ok,
                    format!("{:?}", class.slacks),
                ),
                check("three exchanges", got == want, d.show(got.iter().copied())),
                check("everyone ends with every good", everyone, ""),
                check(
                    "gains 0.96 for i and 0.45 for the others",
                    gains_ok && dominates(&t.utilities, &before),
                    format!("{gains:?}"),
                ),
                check("final allocation Pareto-efficient", pe.passed, ""),
                check(
                    "second allocation: unstable yet Pareto-efficient",
                    alt_unstable && alt_pe.passed,
                    "",
                ),
            ])
        },
    }
}

fn dsic4() -> Demo {
    let step_b3 = Profile::accepting().with(
        AgentId(I),
        Arc::new(
            Scripted::new()
                .with(None, ex(I, 1, J, 2), true)
                .with(None, ex(I, 1, L, 2), false),
        ),
    );
    let i_rejects_all = Profile::accepting().with(AgentId(I), reject_all());
    Demo {
        name: "dsic4",
        summary: "Four agents on a competition cycle ij < jk < kl < il, with beta_ik = beta_jl = 0.5 \
                  chosen arbitrarily. CLEAR's response tree has an inversion pair; the sequential \
                  ascending protocol has none, yet a scripted profile still rewards j for deviating.",
        document: doc(
            &[&[1, 0], &[0, 1], &[1, 0], &[0, 1]],
            &[
                (I, J, 0.1),
                (J, K, 0.2),
                (K, L, 0.3),
                (I, L, 0.4),
                (I, K, 0.5),
                (J, L, 0.5),
            ],
            0.5,
        ),
        variants: Vec::new(),
        profiles: vec![
            DemoProfile {
                name: "stepB3",
                protocol: ProtocolKind::Sac,
                focal: AgentId(J),
                profile: step_b3,
            },
            DemoProfile {
                name: "i-rejects-all",
                protocol: ProtocolKind::Clear,
                focal: AgentId(K),
                profile: i_rejects_all,
            },
        ],
        checks: |d| {
            let inst = d.instance();
            let all = ParticipantSet::all(inst);
            let (i, j, k, l) = (AgentId(I), AgentId(J), AgentId(K), AgentId(L));
            let clear_tree = build_protocol_tree(inst, &all, &ProtocolConfig::clear(), BUDGET)?;
            let sac_tree = build_protocol_tree(inst, &all, &ProtocolConfig::sac(), BUDGET)?;
            let clear_pairs = find_inversion_pairs(&clear_tree, inst);
            let sac_pairs = find_inversion_pairs(&sac_tree, inst);
            let root: BTreeSet<Exchange> = clear_tree.root().proposals.iter().copied().collect();
            let mut out = vec![
                check(
                    "CLEAR first round is ij and kl",
                    root == set([ex(I, 1, J, 2), ex(K, 1, L, 2)]),
                    d.show(root.iter().copied()),
                ),
                check(
                    "CLEAR tree has inversion pair (k,j,l)",
                    clear_pairs.iter().any(|p| (p.i, p.j, p.k) == (k, j, l)),
                    format!("{} pair(s)", clear_pairs.len()),
                ),
                check(
                    "SAC tree has no inversion pair",
                    sac_pairs.is_empty(),
                    format!("{} pair(s)", sac_pairs.len()),
                ),
            ];
            for (name, want) in [
                ("stepB3", inst.beta(i, j) + inst.beta(j, l)),
                ("i-rejects-all", inst.beta(k, l) - inst.beta(j, k)),
            ] {
                let p = d.profile(name).expect("declared above");
                let cfg = ProtocolConfig::default().with_protocol(p.protocol);
                let r = check_nic(inst, &all, p.focal, &cfg, &p.profile, BUDGET)?;
                out.push(check(
                    format!("{name}: deviating pays {want:.2}"),
                    !r.passed && r.gain() > TOL && close(r.gain(), want),
                    format!("gain {}", r.gain()),
                ));
            }
            Ok(out)
        },
    }
}

fn truthful3() -> Demo {
    let sym = doc(
        &[&[1, 0], &[1, 1], &[0, 1]],
        &[(I, J, 0.1), (J, K, 0.2), (I, K, 0.3)],
        0.5,
    );
    Demo {
        name: "truthful3",
        summary: "Hiding a good pays: an agent holding both goods that conceals one ends up \
                  better off by beta_ij, in either orientation.",
        document: doc(
            &[&[1, 1], &[1, 0], &[0, 1]],
            &[(I, J, 0.1), (I, K, 0.2), (J, K, 0.3)],
            0.5,
        ),
        variants: vec![Variant {
            label: "j-hides",
            instance: sym.instance,
        }],
        profiles: Vec::new(),
        checks: |d| {
            let cfg = ProtocolConfig::default();
            let mut out = Vec::new();
            for (label, inst, liar) in [
                ("i hides good 2", d.instance(), AgentId(I)),
                (
                    "j hides good 2",
                    d.variant("j-hides").expect("declared above"),
                    AgentId(J),
                ),
            ] {
                let r = misreport_demo(inst, liar, &[GoodId(1)], &cfg)?;
                let want = inst.beta(AgentId(I), AgentId(J));
                out.push(check(
                    label,
                    r.gain > TOL && close(r.gain, want),
                    format!("truthful {} hiding {}", r.truthful_utility, r.misreport_utility),
                ));
            }
            Ok(out)
        },
    }
}

fn single3() -> Demo {
    Demo {
        name: "single3",
        summary: "Two agents can each trade good 1 with k for good 2. Any protocol that stops \
                  after one round either tempts k to reject or leaves a beneficial exchange.",
        document: doc(
            &[&[1, 0], &[1, 0], &[0, 1]],
            &[(I, J, 0.1), (I, K, 0.2), (J, K, 0.3)],
            0.5,
        ),
        variants: Vec::new(),
        profiles: Vec::new(),
        checks: |d| {
            let inst = d.instance();
            let r = single_round_analysis(inst, BUDGET)?;
            let both = r.rows.iter().find(|row| row.proposals.len() == 2);
            let both_ok = both.is_some_and(|row| {
                row.nic_violation
                    .is_some_and(|(a, g)| a == AgentId(K) && close(g, inst.beta(AgentId(J), AgentId(K))))
            });
            let singles_ok = r
                .rows
                .iter()
                .filter(|row| row.proposals.len() == 1)
                .all(|row| row.stability_violation.is_some());
            Ok(vec![
                check(
                    "every single round fails",
                    r.every_round_fails,
                    format!("{} candidate rounds", r.rows.len()),
                ),
                check(
                    "both proposed: k gains beta_jk by rejecting",
                    both_ok,
                    format!("{:?}", both.map(|b| b.nic_violation)),
                ),
                check("one proposed: a beneficial exchange is left", singles_ok, ""),
            ])
        },
    }
}

fn core4() -> Demo {
    Demo {
        name: "core4",
        summary: "Four agents with one distinct good each and beta = 0.9. Smaller break-away \
                  groups leave their members better off than the full group.",
        document: doc(&[&[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 1]], &[], 0.9),
        variants: Vec::new(),
        profiles: Vec::new(),
        checks: |d| {
            let inst = d.instance();
            let mut out = Vec::new();
            for (members, want) in [(&[I, J, K, L][..], -6.8), (&[I, J, K][..], -3.3), (&[I, J][..], -1.6)] {
                let p: ParticipantSet = members.iter().map(|&a| AgentId(a)).collect();
                let t = execute(inst, &p, &Profile::accepting(), &ProtocolConfig::default())?;
                let u: Vec<f64> = members.iter().map(|&a| t.utilities[a]).collect();
                out.push(check(
                    format!("{} members each get {want}", members.len()),
                    u.iter().all(|&x| close(x, want)),
                    format!("{u:?}"),
                ));
            }
            Ok(out)
        },
    }
}
