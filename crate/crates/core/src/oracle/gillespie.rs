use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use super::generator::moves;
use crate::state::{ParticleState, RateTable};

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub seed: u64,
    /// Stream index of this trajectory under `seed`.
    pub stream: u64,
    pub final_state: ParticleState,
    pub jump_count: u64,
}

/// Counts of final states over `n_samples` trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    pub n_samples: u64,
    pub counts: BTreeMap<ParticleState, u64>,
}

impl EmpiricalDistribution {
    pub fn frequency(&self, state: &ParticleState) -> f64 {
        self.counts.get(state).copied().unwrap_or(0) as f64 / self.n_samples as f64
    }
}

/// One exact trajectory on the infinite lattice up to time `t`. Each
/// trajectory owns ChaCha stream `stream` of `seed`, so results do not
/// depend on scheduling.
pub fn simulate_trajectory(
    initial: &ParticleState,
    rates: &RateTable,
    t: f64,
    seed: u64,
    stream: u64,
) -> TrajectorySample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut state = initial.clone();
    let mut clock = 0.0;
    let mut jumps = 0;
    loop {
        let options = moves(&state, rates);
        let total: f64 = options.iter().map(|(_, r)| r).sum();
        let wait: f64 = rng.sample::<f64, _>(Exp1) / total;
        clock += wait;
        if clock > t {
            break;
        }
        let mut pick = rng.random::<f64>() * total;
        let mut chosen = options.len() - 1;
        for (i, (_, r)) in options.iter().enumerate() {
            if pick < *r {
                chosen = i;
                break;
            }
            pick -= r;
        }
        state = options.into_iter().nth(chosen).unwrap().0;
        jumps += 1;
    }
    TrajectorySample {
        seed,
        stream,
        final_state: state,
        jump_count: jumps,
    }
}

pub fn gillespie(
    initial: &ParticleState,
    rates: &RateTable,
    t: f64,
    n_samples: u64,
    seed: u64,
) -> EmpiricalDistribution {
    let finals: Vec<ParticleState> = (0..n_samples)
        .into_par_iter()
        .map(|i| simulate_trajectory(initial, rates, t, seed, i).final_state)
        .collect();
    let mut counts = BTreeMap::new();
    for s in finals {
        *counts.entry(s).or_insert(0) += 1;
    }
    EmpiricalDistribution { n_samples, counts }
}
