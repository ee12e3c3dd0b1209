//! Seeded random instances for simulation sweeps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::Instance;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub num_agents: usize,
    pub num_goods: usize,
    /// Probability that an agent initially holds a given good.
    pub density: f64,
    pub beta_low: f64,
    pub beta_high: f64,
    pub master_seed: u64,
    /// Drop goods that no agent holds.
    pub normalize: bool,
}

impl GenConfig {
    pub fn new(num_agents: usize, num_goods: usize, density: f64, master_seed: u64) -> Self {
        GenConfig {
            num_agents,
            num_goods,
            density,
            beta_low: 0.01,
            beta_high: 0.99,
            master_seed,
            normalize: false,
        }
    }

    pub fn with_beta_range(mut self, low: f64, high: f64) -> Self {
        self.beta_low = low;
        self.beta_high = high;
        self
    }

    pub fn normalized(mut self) -> Self {
        self.normalize = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_agents == 0 {
            return Err(invalid("at least one agent is required"));
        }
        if !(0.0..=1.0).contains(&self.density) {
            return Err(invalid(format!("density {} is not a probability", self.density)));
        }
        if !(0.0 < self.beta_low && self.beta_low <= self.beta_high && self.beta_high < 1.0) {
            return Err(invalid(format!(
                "beta range [{}, {}] must satisfy 0 < low <= high < 1",
                self.beta_low, self.beta_high
            )));
        }
        Ok(())
    }

    /// Seed used for trial number `trial`.
    pub fn trial_seed(&self, trial: u64) -> u64 {
        splitmix64(self.master_seed ^ splitmix64(trial.wrapping_add(0x5eed)))
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn random_instance(config: &GenConfig, trial: u64) -> Result<Instance> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.trial_seed(trial));
    let (n, m) = (config.num_agents, config.num_goods);
    let mut initial: Vec<Vec<bool>> = (0..n)
        .map(|_| (0..m).map(|_| rng.gen_bool(config.density)).collect())
        .collect();
    let mut beta = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in a + 1..n {
            let v = if config.beta_low == config.beta_high {
                config.beta_low
            } else {
                rng.gen_range(config.beta_low..=config.beta_high)
            };
            beta[a][b] = v;
            beta[b][a] = v;
        }
    }
    if config.normalize {
        let kept: Vec<usize> = (0..m).filter(|&g| initial.iter().any(|r| r[g])).collect();
        initial = initial
            .into_iter()
            .map(|r| kept.iter().map(|&g| r[g]).collect())
            .collect();
    }
    Instance::new(initial, beta)
}
