//! Shared generators and test strategies for the integration suites.
#![allow(dead_code)]

use clear_core::engine::RoundRecord;
use clear_core::strategies::{DecisionContext, Profile, Strategy as Policy};
use clear_core::{AgentId, Exchange, Instance};
use proptest::prelude::{any, Strategy};
use std::sync::Arc;

/// Instances with up to `max_n` agents and `max_m` goods. Betas are drawn
/// from a small grid so ties occur regularly.
pub fn arb_instance(max_n: usize, max_m: usize) -> impl Strategy<Value = Instance> {
    (1..=max_n, 0..=max_m).prop_flat_map(|(n, m)| {
        let cells = proptest::collection::vec(proptest::collection::vec(any::<bool>(), m), n);
        let betas = proptest::collection::vec(1u8..=19, n * (n - 1) / 2);
        (cells, betas).prop_map(move |(initial, grid)| {
            let mut beta = vec![vec![0.0; n]; n];
            let mut it = grid.into_iter();
            for a in 0..n {
                for b in a + 1..n {
                    let v = f64::from(it.next().expect("one value per pair")) * 0.05;
                    beta[a][b] = v;
                    beta[b][a] = v;
                }
            }
            Instance::new(initial, beta).expect("generated instances are valid")
        })
    })
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Rejects a deterministic pseudo-random fraction of its proposals, keyed by
/// round and exchange.
#[derive(Debug)]
pub struct CoinFlip {
    pub seed: u64,
    /// Rejection probability in percent.
    pub reject_percent: u64,
}

impl Policy for CoinFlip {
    fn name(&self) -> String {
        format!("coin-flip({}%)", self.reject_percent)
    }

    fn decide(&self, e: &Exchange, ctx: &DecisionContext<'_>) -> bool {
        let key = [
            self.seed,
            ctx.agent.0 as u64,
            ctx.round as u64,
            e.giver_a.0 as u64,
            e.good_a.0 as u64,
            e.giver_b.0 as u64,
            e.good_b.0 as u64,
        ]
        .into_iter()
        .fold(0u64, |h, x| mix(h ^ x));
        key % 100 >= self.reject_percent
    }
}

/// Every agent flips its own coin.
pub fn coin_profile(n: usize, seed: u64, reject_percent: u64) -> Profile {
    (0..n).fold(Profile::accepting(), |p, a| {
        p.with(
            AgentId(a),
            Arc::new(CoinFlip {
                seed: seed.wrapping_mul(31).wrapping_add(a as u64),
                reject_percent,
            }),
        )
    })
}

/// Records every proposal a strategy is consulted about.
#[derive(Debug, Default)]
pub struct Spy {
    pub agent: usize,
    pub seen: std::sync::Mutex<Vec<(usize, Exchange)>>,
}

impl Policy for Spy {
    fn name(&self) -> String {
        "spy".into()
    }

    fn decide(&self, e: &Exchange, ctx: &DecisionContext<'_>) -> bool {
        self.seen.lock().unwrap().push((ctx.agent.0, *e));
        true
    }
}

pub fn round_allocations(instance: &Instance, rounds: &[RoundRecord]) -> Vec<clear_core::Allocation> {
    let mut x = clear_core::Allocation::initial(instance);
    let mut out = vec![x.clone()];
    for r in rounds {
        for e in r.accepted() {
            x.apply(e);
        }
        out.push(x.clone());
    }
    out
}
