use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernel::MarkovKernel;
use crate::space::StateSpace;

const MAX_ATTEMPTS: usize = 100_000;

/// Simple random walk on a random regular graph with a loop at every vertex:
/// an `(r-1)`-regular simple graph from the pairing model (rejecting loops
/// and multi-edges) plus one self-loop per vertex, each edge weighted `1/r`.
pub fn random_regular_graph_walk(n_vertices: usize, r: usize, seed: u64) -> Result<MarkovKernel> {
    let d = r.wrapping_sub(1);
    if r < 3 || d >= n_vertices || (n_vertices * d) % 2 != 0 {
        return Err(Error::DegreeInfeasible {
            vertices: n_vertices,
            degree: r,
        });
    }
    let adjacency = if d == n_vertices - 1 {
        (0..n_vertices)
            .map(|x| (0..n_vertices).filter(|&y| y != x).collect())
            .collect()
    } else {
        pairing_model(n_vertices, d, seed)?
    };
    let w = 1.0 / r as f64;
    let rows = adjacency
        .into_iter()
        .enumerate()
        .map(|(x, nbrs): (usize, Vec<usize>)| {
            let mut row: Vec<(usize, f64)> = nbrs.into_iter().map(|y| (y, w)).collect();
            row.push((x, w));
            row
        })
        .collect();
    MarkovKernel::from_sparse_rows(StateSpace::new(n_vertices)?, rows)
}

fn pairing_model(n: usize, d: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<usize> = (0..n).flat_map(|x| std::iter::repeat(x).take(d)).collect();
    'attempt: for _ in 0..MAX_ATTEMPTS {
        points.shuffle(&mut rng);
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::with_capacity(d); n];
        for pair in points.chunks(2) {
            let (a, b) = (pair[0], pair[1]);
            if a == b || adjacency[a].contains(&b) {
                continue 'attempt;
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        return Ok(adjacency);
    }
    Err(Error::Numerical(format!(
        "no simple {d}-regular graph on {n} vertices after {MAX_ATTEMPTS} pairings"
    )))
}
