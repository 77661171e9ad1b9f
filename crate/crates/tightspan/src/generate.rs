//! Seeded instance generator with a controlled feasibility factor.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;
use tightspan_core::{Instance, Time, MAX_TIME};

/// Seed used when neither a flag nor `TIGHTSPAN_SEED` supplies one.
pub const DEFAULT_SEED: u64 = 42;

pub const SEED_ENV: &str = "TIGHTSPAN_SEED";

/// Every job is legal on exactly `k` machines (so `eps = k/m` for any
/// threshold at least `pmax`), with times uniform in `1..=pmax`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub m: usize,
    pub n: usize,
    pub pmax: Time,
    pub k: usize,
    pub seed: u64,
    /// One size per job, shared by all its legal machines.
    pub restricted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerateError {
    #[error("m must be positive")]
    NoMachines,
    #[error("k = {k} must lie in [1, m = {m}]")]
    LegalSetSize { k: usize, m: usize },
    #[error("pmax = {0} must lie in [1, {MAX_TIME}]")]
    TimeCap(Time),
}

pub fn generate(spec: &GeneratorSpec) -> Result<Instance, GenerateError> {
    if spec.m == 0 {
        return Err(GenerateError::NoMachines);
    }
    if spec.k == 0 || spec.k > spec.m {
        return Err(GenerateError::LegalSetSize { k: spec.k, m: spec.m });
    }
    if spec.pmax == 0 || spec.pmax > MAX_TIME {
        return Err(GenerateError::TimeCap(spec.pmax));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let rows = (0..spec.n)
        .map(|_| {
            let mut legal = sample(&mut rng, spec.m, spec.k).into_vec();
            // the sample order is random; fix it so draws below are stable
            legal.sort_unstable();
            let mut row = vec![None; spec.m];
            let size = rng.random_range(1..=spec.pmax);
            for i in legal {
                row[i] = Some(if spec.restricted {
                    size
                } else {
                    rng.random_range(1..=spec.pmax)
                });
            }
            row
        })
        .collect();
    Ok(Instance::new(spec.m, rows).expect("generated rows satisfy the instance invariants"))
}

/// `TIGHTSPAN_SEED` if set and numeric, otherwise `fallback`.
pub fn seed_from_env(fallback: u64) -> u64 {
    std::env::var(SEED_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(fallback)
}
