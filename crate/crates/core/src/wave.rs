//! The time-inhomogeneous chain driven by `K_i(x,y) = K(g^{i-1}x, g^{i-1}y)`
//! and its homogeneous reduction `K~(x,y) = K(x, g^{-1}y)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{shift_kernel, transport_kernel, MarkovKernel, DENSE_LIMIT};
use crate::matrix::DenseMatrix;
use crate::permutation::Permutation;
use crate::space::{Distribution, StateSpace};

#[derive(Debug, Clone)]
pub struct WaveSystem {
    base: MarkovKernel,
    map: Permutation,
    order: u64,
    shifted: MarkovKernel,
    wave_measure: Option<Distribution>,
}

impl WaveSystem {
    pub fn new(base: MarkovKernel, map: Permutation) -> Result<Self> {
        let shifted = shift_kernel(&base, &map)?;
        let order = map.order();
        Ok(Self {
            base,
            map,
            order,
            shifted,
            wave_measure: None,
        })
    }

    /// Solves for the invariant measure of `K~` and attaches it.
    pub fn with_stationary_wave(self) -> Result<Self> {
        let pi = crate::spectral::stationary_distribution(&self.shifted)?;
        Ok(self.with_wave_measure_unchecked(pi))
    }

    /// Attaches a caller-supplied invariant measure of `K~`.
    pub fn with_wave_measure(self, pi: Distribution) -> Result<Self> {
        if pi.len() != self.size() {
            return Err(Error::SpaceMismatch {
                left: self.size(),
                right: pi.len(),
            });
        }
        Ok(self.with_wave_measure_unchecked(pi))
    }

    fn with_wave_measure_unchecked(mut self, pi: Distribution) -> Self {
        self.wave_measure = Some(pi);
        self
    }

    pub fn base(&self) -> &MarkovKernel {
        &self.base
    }

    pub fn map(&self) -> &Permutation {
        &self.map
    }

    /// Order `k` of the bijection, i.e. the period of `(K_i)`.
    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn shifted(&self) -> &MarkovKernel {
        &self.shifted
    }

    pub fn wave_measure(&self) -> Option<&Distribution> {
        self.wave_measure.as_ref()
    }

    pub fn require_wave_measure(&self) -> Result<&Distribution> {
        self.wave_measure.as_ref().ok_or(Error::WaveMeasureMissing)
    }

    pub fn space(&self) -> &StateSpace {
        self.base.space()
    }

    pub fn size(&self) -> usize {
        self.base.size()
    }

    /// `K_i` for `i >= 1`.
    pub fn kernel_at(&self, i: u64) -> MarkovKernel {
        transport_kernel(&self.base, &self.map, i).expect("shared space")
    }
}

/// `K_{n,m} = K_{n+1} ... K_m`, with `K_{n,n} = I`.
pub fn compose_window(system: &WaveSystem, n: u64, m: u64) -> Result<MarkovKernel> {
    if n > m {
        return Err(Error::WindowInverted {
            n: n as usize,
            m: m as usize,
        });
    }
    let size = system.size();
    if size > DENSE_LIMIT {
        return Err(Error::TooLarge {
            size,
            limit: DENSE_LIMIT,
        });
    }
    let mut acc = DenseMatrix::identity(size);
    for i in (n + 1)..=m {
        acc = system.kernel_at(i).right_mul_dense(&acc);
    }
    Ok(MarkovKernel::from_dense_unchecked(system.space().clone(), acc))
}

/// Iterates `P <- P K_{i}` starting from `K_{0,0} = I`, handing each
/// `(n, K_{0,n})` to `visit` for `n = 0..=max_n`. Stops early when `visit`
/// returns `false`.
pub fn for_each_window(system: &WaveSystem, max_n: u64, mut visit: impl FnMut(u64, &DenseMatrix) -> bool) -> Result<()> {
    let size = system.size();
    if size > DENSE_LIMIT {
        return Err(Error::TooLarge {
            size,
            limit: DENSE_LIMIT,
        });
    }
    let mut acc = DenseMatrix::identity(size);
    if !visit(0, &acc) {
        return Ok(());
    }
    for i in 1..=max_n {
        acc = system.kernel_at(i).right_mul_dense(&acc);
        if !visit(i, &acc) {
            break;
        }
    }
    Ok(())
}

/// `mu_n = mu_0 K_{0,n}` by successive vector-kernel products.
pub fn evolve(mu0: &Distribution, system: &WaveSystem, n: u64) -> Result<Distribution> {
    if mu0.len() != system.size() {
        return Err(Error::SpaceMismatch {
            left: system.size(),
            right: mu0.len(),
        });
    }
    let mut mu = mu0.weights().to_vec();
    for i in 1..=n {
        mu = system.kernel_at(i).left_mul(&mu);
    }
    Distribution::normalized(mu)
}

/// The measures `mu_0, .., mu_n` along one evolution.
pub fn evolve_trajectory(mu0: &Distribution, system: &WaveSystem, n: u64) -> Result<Vec<Distribution>> {
    if mu0.len() != system.size() {
        return Err(Error::SpaceMismatch {
            left: system.size(),
            right: mu0.len(),
        });
    }
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(mu0.clone());
    let mut mu = mu0.weights().to_vec();
    for i in 1..=n {
        mu = system.kernel_at(i).left_mul(&mu);
        out.push(Distribution::normalized(mu.clone())?);
    }
    Ok(out)
}

/// Wave measure `mu_i(x) = pi~(g^i x)`.
pub fn wave_measures(system: &WaveSystem, i: u64) -> Result<Distribution> {
    let pi = system.require_wave_measure()?;
    let g = system.map();
    let m = (i % system.order().max(1)) as i64;
    let w = (0..system.size()).map(|x| pi.get(g.apply_pow(x, m))).collect();
    Distribution::new(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveIdentityReport {
    pub max_discrepancy: f64,
    /// `(n, x, y)` attaining the maximum.
    pub argmax: (u64, usize, usize),
}

/// `max_{n <= n_max, x, y} |K_{0,n}(x,y) - K~^n(x, g^n y)|`.
pub fn verify_wave_identity(system: &WaveSystem, n_max: u64) -> Result<WaveIdentityReport> {
    let size = system.size();
    let shifted = system.shifted();
    let g = system.map();
    let mut power = DenseMatrix::identity(size);
    let mut report = WaveIdentityReport {
        max_discrepancy: 0.0,
        argmax: (0, 0, 0),
    };
    let mut failure = None;
    for_each_window(system, n_max, |n, window| {
        if n > 0 {
            power = shifted.right_mul_dense(&power);
        }
        let m = (n % system.order().max(1)) as i64;
        for x in 0..size {
            for y in 0..size {
                let d = (window.get(x, y) - power.get(x, g.apply_pow(y, m))).abs();
                if d.is_nan() {
                    failure = Some(Error::Numerical("NaN in kernel product".into()));
                    return false;
                }
                if d > report.max_discrepancy {
                    report.max_discrepancy = d;
                    report.argmax = (n, x, y);
                }
            }
        }
        true
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(report),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::make_kernel;

    fn four_point_system() -> WaveSystem {
        let h = 0.5;
        let m = DenseMatrix::from_rows(&[
            vec![h, h, 0.0, 0.0],
            vec![h, 0.0, h, 0.0],
            vec![0.0, h, 0.0, h],
            vec![0.0, 0.0, 1.0, 0.0],
        ]);
        let k = make_kernel(StateSpace::new(4).unwrap(), &m).unwrap();
        WaveSystem::new(k, Permutation::new(vec![0, 1, 3, 2]).unwrap()).unwrap()
    }

    #[test]
    fn empty_window_is_identity() {
        let s = four_point_system();
        for n in [0, 3, 7] {
            assert_eq!(compose_window(&s, n, n).unwrap().to_dense(), DenseMatrix::identity(4));
        }
        assert!(matches!(compose_window(&s, 3, 2), Err(Error::WindowInverted { n: 3, m: 2 })));
    }

    #[test]
    fn state_four_is_trapped_on_even_steps() {
        let s = four_point_system();
        let w = compose_window(&s, 0, 2).unwrap();
        assert_eq!(w.get(3, 3), 1.0);
        let mu = evolve(&Distribution::point_mass(4, 3).unwrap(), &s, 2).unwrap();
        assert_eq!(mu.weights(), &[0.0, 0.0, 0.0, 1.0]);
        let mu0 = Distribution::new(vec![0.25; 4]).unwrap();
        assert_eq!(evolve(&mu0, &s, 0).unwrap(), mu0);
    }

    #[test]
    fn wave_identity_holds_on_four_point_system() {
        let s = four_point_system();
        assert_eq!(verify_wave_identity(&s, 1).unwrap().max_discrepancy, 0.0);
        assert!(verify_wave_identity(&s, 10).unwrap().max_discrepancy <= 1e-12);
    }

    #[test]
    fn wave_measures_need_an_attached_measure() {
        let s = four_point_system();
        assert!(matches!(wave_measures(&s, 1), Err(Error::WaveMeasureMissing)));
    }
}
