//! Seeded Monte Carlo for the inhomogeneous chain.
//!
//! Replica `r` of a run with seed `s` draws from ChaCha8 seeded with `s` on
//! stream `r`, so adding replicas never changes earlier ones.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::MarkovKernel;
use crate::merging::non_merging_reason;
use crate::space::Distribution;
use crate::wave::WaveSystem;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathSample {
    pub start: usize,
    /// `X_0 = start, X_1, .., X_n`.
    pub steps: Vec<usize>,
    pub seed: u64,
}

fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

/// Inverse-transform draw from row `x` of `k`, walking columns in order.
fn draw(k: &MarkovKernel, x: usize, u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = x;
    for (y, v) in k.row(x) {
        acc += v;
        last = y;
        if u < acc {
            return y;
        }
    }
    // u landed in the round-off gap above the row sum
    last
}

/// One step `X_{i-1} = x -> X_i ~ K_i(x, .)`, using
/// `K_i(x, y) = K(g^{i-1} x, g^{i-1} y)`.
#[inline]
fn step(system: &WaveSystem, x: usize, i: u64, rng: &mut ChaCha8Rng) -> usize {
    let g = system.map();
    let m = ((i - 1) % system.order().max(1)) as i64;
    let y = draw(system.base(), g.apply_pow(x, m), rng.random::<f64>());
    g.apply_pow(y, -m)
}

fn check_start(system: &WaveSystem, start: usize) -> Result<()> {
    if start >= system.size() {
        return Err(Error::InvalidArgument(format!(
            "start state {start} outside 0..{}",
            system.size()
        )));
    }
    Ok(())
}

pub fn sample_path(system: &WaveSystem, start: usize, n: u64, seed: u64) -> Result<PathSample> {
    check_start(system, start)?;
    let mut rng = replica_rng(seed, 0);
    let mut steps = Vec::with_capacity(n as usize + 1);
    steps.push(start);
    let mut x = start;
    for i in 1..=n {
        x = step(system, x, i, &mut rng);
        steps.push(x);
    }
    Ok(PathSample { start, steps, seed })
}

/// Histogram of `X_n` over `trials` independent replicas started at `start`.
pub fn empirical_distribution(system: &WaveSystem, start: usize, n: u64, trials: u64, seed: u64) -> Result<Distribution> {
    check_start(system, start)?;
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is needed".into()));
    }
    let size = system.size();
    let counts = (0..trials)
        .into_par_iter()
        .fold(
            || vec![0u64; size],
            |mut hist, r| {
                let mut rng = replica_rng(seed, r);
                let mut x = start;
                for i in 1..=n {
                    x = step(system, x, i, &mut rng);
                }
                hist[x] += 1;
                hist
            },
        )
        .reduce(|| vec![0u64; size], merge);
    Distribution::normalized(counts.into_iter().map(|c| c as f64).collect())
}

fn merge(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// Independent chains used by [`empirical_wave_profile`].
pub const PROFILE_REPLICAS: u64 = 64;

/// Estimates `pi~` from the occupation of `g^n X_n`: each of
/// [`PROFILE_REPLICAS`] chains runs `burn_in` steps, then records
/// `g^n X_n` every `stride` steps until `samples` records are collected in total.
pub fn empirical_wave_profile(
    system: &WaveSystem,
    burn_in: u64,
    stride: u64,
    samples: u64,
    seed: u64,
) -> Result<Distribution> {
    if let Some(reason) = non_merging_reason(system) {
        return Err(Error::NotMerging(reason));
    }
    if stride == 0 || samples == 0 {
        return Err(Error::InvalidArgument("stride and samples must be positive".into()));
    }
    let size = system.size();
    let replicas = PROFILE_REPLICAS.min(samples);
    let order = system.order().max(1);
    let counts = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let quota = samples / replicas + u64::from(r < samples % replicas);
            let mut rng = replica_rng(seed, r);
            let mut hist = vec![0u64; size];
            let mut x = (r as usize) % size;
            let mut n = 0u64;
            for _ in 0..burn_in {
                n += 1;
                x = step(system, x, n, &mut rng);
            }
            for _ in 0..quota {
                for _ in 0..stride {
                    n += 1;
                    x = step(system, x, n, &mut rng);
                }
                hist[system.map().apply_pow(x, (n % order) as i64)] += 1;
            }
            hist
        })
        .reduce(|| vec![0u64; size], merge);
    Distribution::normalized(counts.into_iter().map(|c| c as f64).collect())
}
