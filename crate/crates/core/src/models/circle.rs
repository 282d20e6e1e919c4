//! Cyclic edge perturbation of the simple walk on an odd circle.

use crate::error::{Error, Result};
use crate::kernel::MarkovKernel;
use crate::matrix::DenseMatrix;
use crate::models::perturbation::PerturbationSpec;
use crate::permutation::Permutation;
use crate::space::{Distribution, StateSpace};
use crate::wave::WaveSystem;

fn check_odd(n: usize) -> Result<()> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::EvenN(n));
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidArgument(format!("edge weight eps must be positive, got {eps}")));
    }
    Ok(())
}

/// Row `x` of the nonlazy circle kernel on `n` points.
fn circle_row(n: usize, eps: f64, x: usize) -> Vec<(usize, f64)> {
    let next = (x + 1) % n;
    let prev = (x + n - 1) % n;
    let heavy = (1.0 + eps) / (2.0 + eps);
    let light = 1.0 / (2.0 + eps);
    match x {
        0 => vec![(1, heavy), (n - 1, light)],
        1 => vec![(0, heavy), (2, light)],
        _ => vec![(next, 0.5), (prev, 0.5)],
    }
}

/// Walk on `n` (odd) points with the edge `{0, 1}` reinforced:
/// `K(0,1) = K(1,0) = (1+eps)/(2+eps)`, `K(0,-1) = K(1,2) = 1/(2+eps)`,
/// `1/2` to each neighbour elsewhere. Returns `K` and its reversible measure.
pub fn circle_kernel(n: usize, eps: f64) -> Result<(MarkovKernel, Distribution)> {
    check_odd(n)?;
    check_eps(eps)?;
    let rows = (0..n).map(|x| circle_row(n, eps, x)).collect();
    let k = MarkovKernel::from_sparse_rows(StateSpace::new(n)?, rows)?;
    let z = n as f64 + eps;
    let pi = (0..n)
        .map(|x| if x < 2 { (1.0 + eps / 2.0) / z } else { 1.0 / z })
        .collect();
    Ok((k, Distribution::normalized(pi)?))
}

/// Simple symmetric walk on the `n`-cycle.
pub fn symmetric_circle_walk(n: usize) -> Result<MarkovKernel> {
    check_odd(n)?;
    let rows = (0..n).map(|x| vec![((x + 1) % n, 0.5), ((x + n - 1) % n, 0.5)]).collect();
    MarkovKernel::from_sparse_rows(StateSpace::new(n)?, rows)
}

fn circle_delta(n: usize, eps: f64, scale: f64) -> DenseMatrix {
    let d = scale * eps / (4.0 + 2.0 * eps);
    let mut m = DenseMatrix::zeros(n, n);
    m.set(0, 1, d);
    m.set(1, 0, d);
    m.set(0, n - 1, -d);
    m.set(1, 2, -d);
    m
}

/// `K = Q + Delta_A` with `A = {0, 1}`, `Q` the symmetric walk and
/// `Delta_A(0,1) = Delta_A(1,0) = eps/(4+2eps)`. Its perturbation size is
/// `eps/(2+eps)`.
pub fn circle_perturbation(n: usize, eps: f64) -> Result<PerturbationSpec> {
    check_eps(eps)?;
    PerturbationSpec::new(symmetric_circle_walk(n)?, vec![0, 1], circle_delta(n, eps, 1.0))
}

/// `P = I/2 + K/2` for the circle kernel `K`.
pub fn lazy_circle_kernel(n: usize, eps: f64) -> Result<MarkovKernel> {
    check_odd(n)?;
    check_eps(eps)?;
    let rows = (0..n)
        .map(|x| {
            let mut row: Vec<(usize, f64)> = circle_row(n, eps, x).into_iter().map(|(y, v)| (y, v / 2.0)).collect();
            row.push((x, 0.5));
            row
        })
        .collect();
    MarkovKernel::from_sparse_rows(StateSpace::new(n)?, rows)
}

/// Lazy version of [`circle_perturbation`], with base `I/2 + Q/2`.
pub fn lazy_circle_perturbation(n: usize, eps: f64) -> Result<PerturbationSpec> {
    check_eps(eps)?;
    let walk = symmetric_circle_walk(n)?;
    let rows = (0..n)
        .map(|x| {
            let mut row: Vec<(usize, f64)> = walk.row(x).map(|(y, v)| (y, v / 2.0)).collect();
            row.push((x, 0.5));
            row
        })
        .collect();
    let q = MarkovKernel::from_sparse_rows(StateSpace::new(n)?, rows)?;
    PerturbationSpec::new(q, vec![0, 1], circle_delta(n, eps, 0.5))
}

/// `x -> x + s mod n`.
pub fn circle_shift(n: usize, s: i64) -> Result<Permutation> {
    let m = n as i64;
    Permutation::new((0..n).map(|x| (x as i64 + s).rem_euclid(m) as usize).collect())
}

/// Invariant measure of `K~` for `g(x) = x - 1`:
/// `pi~(0) = (eps+1)(eps+2)/d`, `pi~(1) = (eps+2)/d`, `pi~(x) = 2(1+eps)/d`
/// otherwise, with `d = eps^2 + 2 n eps + 2 n`.
pub fn tilde_pi_closed_form_shift_minus1(n: usize, eps: f64) -> Result<Distribution> {
    check_odd(n)?;
    let nf = n as f64;
    let d = eps * eps + 2.0 * nf * eps + 2.0 * nf;
    let w = (0..n)
        .map(|x| match x {
            0 => (eps + 1.0) * (eps + 2.0) / d,
            1 => (eps + 2.0) / d,
            _ => 2.0 * (1.0 + eps) / d,
        })
        .collect();
    Distribution::new(w)
}

/// Nonlazy circle driven by `g = shift(s)`, with `pi~` attached.
pub fn circle_system(n: usize, eps: f64, s: i64) -> Result<WaveSystem> {
    let (k, _) = circle_kernel(n, eps)?;
    WaveSystem::new(k, circle_shift(n, s)?)?.with_stationary_wave()
}

/// Lazy circle driven by an arbitrary bijection, with `pi~` attached.
pub fn lazy_circle_system(n: usize, eps: f64, g: Permutation) -> Result<WaveSystem> {
    WaveSystem::new(lazy_circle_kernel(n, eps)?, g)?.with_stationary_wave()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{period, stationary_distribution};

    #[test]
    fn printed_entries_for_five_points() {
        let (k, pi) = circle_kernel(5, 1.0).unwrap();
        assert!((k.get(0, 1) - 2.0 / 3.0).abs() < 1e-15);
        assert!((k.get(0, 4) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(k.get(2, 3), 0.5);
        assert!((pi.get(0) - 1.5 / 6.0).abs() < 1e-15);
        let p = lazy_circle_kernel(5, 1.0).unwrap();
        assert!((p.get(0, 1) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(p.get(0, 0), 0.5);
        assert!((p.get(0, 4) - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(p.min_diagonal(), 0.5);
    }

    #[test]
    fn even_point_counts_are_refused() {
        assert!(matches!(circle_kernel(6, 1.0), Err(Error::EvenN(6))));
        assert!(matches!(lazy_circle_kernel(4, 1.0), Err(Error::EvenN(4))));
    }

    #[test]
    fn detailed_balance() {
        let (k, pi) = circle_kernel(9, 0.7).unwrap();
        for x in 0..9 {
            for y in 0..9 {
                let l = pi.get(x) * k.get(x, y);
                let r = pi.get(y) * k.get(y, x);
                assert!((l - r).abs() < 1e-16, "({x},{y})");
            }
        }
        assert_eq!(period(&k).unwrap(), 1);
    }

    #[test]
    fn lazy_kernel_is_average_with_identity() {
        let (k, _) = circle_kernel(7, 2.0).unwrap();
        let p = lazy_circle_kernel(7, 2.0).unwrap();
        for x in 0..7 {
            for y in 0..7 {
                let expected = 0.5 * if x == y { 1.0 } else { 0.0 } + 0.5 * k.get(x, y);
                assert!((p.get(x, y) - expected).abs() < 1e-16);
            }
        }
    }

    #[test]
    fn decomposition_matches_kernel() {
        let spec = circle_perturbation(7, 1.0).unwrap();
        assert!((spec.epsilon - 1.0 / 3.0).abs() < 1e-15);
        let (k, _) = circle_kernel(7, 1.0).unwrap();
        assert!(spec.kernel().unwrap().to_dense().sub(&k.to_dense()).max_abs() < 1e-15);
        let lazy = lazy_circle_perturbation(7, 1.0).unwrap();
        assert!((lazy.epsilon - 1.0 / 3.0).abs() < 1e-15);
        let p = lazy_circle_kernel(7, 1.0).unwrap();
        assert!(lazy.kernel().unwrap().to_dense().sub(&p.to_dense()).max_abs() < 1e-15);
    }

    #[test]
    fn shifts() {
        assert!(circle_shift(5, 0).unwrap().is_identity());
        assert_eq!(circle_shift(5, -1).unwrap().apply(0), 4);
        assert_eq!(circle_shift(9, 3).unwrap().order(), 3);
        assert_eq!(circle_shift(9, 2).unwrap().order(), 9);
    }

    #[test]
    fn closed_form_for_five_points() {
        let pi = tilde_pi_closed_form_shift_minus1(5, 1.0).unwrap();
        assert!((pi.get(0) - 6.0 / 21.0).abs() < 1e-15);
        assert!((pi.get(1) - 3.0 / 21.0).abs() < 1e-15);
        assert!((pi.get(3) - 4.0 / 21.0).abs() < 1e-15);
        let s = circle_system(5, 1.0, -1).unwrap();
        let solved = stationary_distribution(s.shifted()).unwrap();
        assert!(solved.max_abs_diff(&pi) < 1e-12);
        assert!((pi.max() / pi.min() - 2.0).abs() < 1e-14);
    }
}
