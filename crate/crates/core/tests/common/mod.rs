#![allow(dead_code)]

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tightspan_core::{Instance, Time};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Each job gets `k` random legal machines with times in `1..=pmax`.
pub fn general(rng: &mut ChaCha8Rng, m: usize, n: usize, k: usize, pmax: Time) -> Instance {
    let rows = (0..n)
        .map(|_| {
            let mut row = vec![None; m];
            for i in sample(rng, m, k) {
                row[i] = Some(rng.random_range(1..=pmax));
            }
            row
        })
        .collect();
    Instance::new(m, rows).unwrap()
}

/// Restricted counterpart: one size per job, `k` feasible machines.
pub fn restricted(rng: &mut ChaCha8Rng, m: usize, n: usize, k: usize, pmax: Time) -> Instance {
    let sizes: Vec<Time> = (0..n).map(|_| rng.random_range(1..=pmax)).collect();
    let feasible: Vec<Vec<usize>> = (0..n).map(|_| sample(rng, m, k).into_vec()).collect();
    Instance::restricted(m, &sizes, &feasible).unwrap()
}

/// Uniformly random assignment onto feasible machines.
pub fn random_assignment(rng: &mut ChaCha8Rng, inst: &Instance) -> tightspan_core::Assignment {
    let machines = (0..inst.jobs())
        .map(|j| {
            let options: Vec<usize> = inst.feasible_machines(j).collect();
            options[rng.random_range(0..options.len())]
        })
        .collect();
    tightspan_core::Assignment::new(inst, machines).unwrap()
}
