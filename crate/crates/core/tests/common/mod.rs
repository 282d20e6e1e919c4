#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wavechain::{DenseMatrix, MarkovKernel, Permutation, StateSpace, WaveSystem};

pub const CORPUS_SIZE: usize = 200;
pub const CORPUS_SEED: u64 = 0x5eed_0001;

/// Random irreducible kernel on `n` states: a directed cycle through a random
/// ordering plus extra edges, weights drawn from `[0.2, 1]` and normalized.
pub fn random_irreducible_kernel(n: usize, rng: &mut ChaCha8Rng) -> MarkovKernel {
    let density = [0.0, 0.1, 0.3][rng.random_range(0..3)];
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut raw = vec![vec![0.0; n]; n];
    for i in 0..n {
        raw[order[i]][order[(i + 1) % n]] = rng.random_range(0.2..1.0);
    }
    for row in raw.iter_mut() {
        for v in row.iter_mut() {
            if *v == 0.0 && rng.random_bool(density) {
                *v = rng.random_range(0.2..1.0);
            }
        }
    }
    let rows = raw
        .into_iter()
        .map(|r| {
            let s: f64 = r.iter().sum();
            r.into_iter()
                .enumerate()
                .filter(|(_, v)| *v > 0.0)
                .map(|(y, v)| (y, v / s))
                .collect()
        })
        .collect();
    MarkovKernel::from_sparse_rows(StateSpace::new(n).unwrap(), rows).unwrap()
}

pub fn random_permutation(n: usize, rng: &mut ChaCha8Rng) -> Permutation {
    let mut f: Vec<usize> = (0..n).collect();
    f.shuffle(rng);
    Permutation::new(f).unwrap()
}

/// 200 systems with `2 <= |V| <= 9`, irreducible `K` and random `g`.
pub fn corpus() -> Vec<WaveSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    (0..CORPUS_SIZE)
        .map(|_| {
            let n = rng.random_range(2..=9);
            let k = random_irreducible_kernel(n, &mut rng);
            let g = random_permutation(n, &mut rng);
            WaveSystem::new(k, g).unwrap()
        })
        .collect()
}

pub fn dense(k: &MarkovKernel) -> Vec<Vec<f64>> {
    (0..k.size()).map(|x| (0..k.size()).map(|y| k.get(x, y)).collect()).collect()
}

pub fn naive_matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for l in 0..n {
                s += a[i][l] * b[l][j];
            }
            out[i][j] = s;
        }
    }
    out
}

pub fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

/// `K_1 .. K_n` built by iterating `g` state by state, no shortcuts.
pub fn brute_windows(k: &MarkovKernel, g: &[usize], n_max: usize) -> Vec<Vec<Vec<f64>>> {
    let size = k.size();
    let base = dense(k);
    let mut gpow: Vec<usize> = (0..size).collect();
    let mut product = identity(size);
    let mut out = vec![product.clone()];
    for _ in 1..=n_max {
        let ki: Vec<Vec<f64>> = (0..size)
            .map(|x| (0..size).map(|y| base[gpow[x]][gpow[y]]).collect())
            .collect();
        product = naive_matmul(&product, &ki);
        out.push(product.clone());
        gpow = gpow.iter().map(|&x| g[x]).collect();
    }
    out
}

/// Stationary measure by plain power iteration of the lazy chain.
pub fn power_stationary(k: &[Vec<f64>]) -> Vec<f64> {
    let n = k.len();
    let mut mu = vec![1.0 / n as f64; n];
    for _ in 0..200_000 {
        let mut next = vec![0.0; n];
        for x in 0..n {
            for y in 0..n {
                next[y] += 0.5 * mu[x] * k[x][y];
            }
            next[x] += 0.5 * mu[x];
        }
        let diff: f64 = next.iter().zip(&mu).map(|(a, b)| (a - b).abs()).sum();
        mu = next;
        if diff < 1e-16 {
            break;
        }
    }
    let s: f64 = mu.iter().sum();
    mu.iter().map(|v| v / s).collect()
}

pub fn tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

pub fn to_rows(m: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

/// Closed-form wave measure of the nonlazy circle with `g(x) = x - 1`.
pub fn circle_pi_formula(n: usize, eps: f64) -> Vec<f64> {
    let nf = n as f64;
    let d = eps * eps + 2.0 * nf * eps + 2.0 * nf;
    (0..n)
        .map(|x| match x {
            0 => (eps + 1.0) * (eps + 2.0) / d,
            1 => (eps + 2.0) / d,
            _ => 2.0 * (1.0 + eps) / d,
        })
        .collect()
}

pub fn odd_sizes() -> impl Iterator<Item = usize> {
    (5..=41).step_by(2)
}

pub const EPSILONS: [f64; 3] = [0.5, 1.0, 2.0];

/// Corpus members whose `K~` is irreducible, with `pi~` attached.
pub fn wave_corpus() -> Vec<WaveSystem> {
    corpus()
        .into_iter()
        .filter(|s| wavechain::spectral::is_irreducible(s.shifted()))
        .map(|s| s.with_stationary_wave().unwrap())
        .collect()
}

/// Corpus members whose `K~` is irreducible and aperiodic.
pub fn primitive_corpus() -> Vec<WaveSystem> {
    wave_corpus()
        .into_iter()
        .filter(|s| wavechain::spectral::is_primitive(s.shifted()))
        .collect()
}
