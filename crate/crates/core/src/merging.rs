//! Distances between measures, merging times, c-stability certificates,
//! localization of the extremes of `pi~`, and evaluators for the bounds on
//! `|K_{0,n}(x,z)/mu_n(z) - 1|`.

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::kernel::{MarkovKernel, DENSE_LIMIT};
use crate::matrix::DenseMatrix;
use crate::models::single_point_perturbation;
use crate::spectral::{is_irreducible, period, weighted_singular_values};
use crate::space::Distribution;
use crate::wave::{evolve_trajectory, for_each_window, WaveSystem};

/// A distance that may be infinite because of a vanishing denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distance {
    Finite(f64),
    Infinite,
}

impl Distance {
    pub fn is_finite(&self) -> bool {
        matches!(self, Distance::Finite(_))
    }

    /// As a float, with `Infinite` mapped to `f64::INFINITY`.
    pub fn value(&self) -> f64 {
        match self {
            Distance::Finite(v) => *v,
            Distance::Infinite => f64::INFINITY,
        }
    }

    pub fn below(&self, eps: f64) -> bool {
        matches!(self, Distance::Finite(v) if *v < eps)
    }

    pub fn max(self, other: Distance) -> Distance {
        match (self, other) {
            (Distance::Finite(a), Distance::Finite(b)) => Distance::Finite(a.max(b)),
            _ => Distance::Infinite,
        }
    }
}

impl std::fmt::Display for Distance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Distance::Finite(v) => write!(f, "{v}"),
            Distance::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Distance {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Distance::Finite(v) => s.serialize_f64(*v),
            Distance::Infinite => s.serialize_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    TotalVariation,
    RelativeSup,
    ChiSquare,
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tv" | "total_variation" | "total-variation" => Ok(Metric::TotalVariation),
            "relative_sup" | "relative-sup" | "sup" => Ok(Metric::RelativeSup),
            "chi_square" | "chi-square" | "chi2" => Ok(Metric::ChiSquare),
            other => Err(Error::InvalidArgument(format!("unknown metric {other}"))),
        }
    }
}

fn same_len(mu: &Distribution, nu: &Distribution) -> Result<()> {
    if mu.len() != nu.len() {
        return Err(Error::SpaceMismatch {
            left: mu.len(),
            right: nu.len(),
        });
    }
    Ok(())
}

fn tv_slices(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

fn relative_sup_slices(a: &[f64], b: &[f64]) -> Distance {
    let mut worst = 0.0_f64;
    for (&m, &n) in a.iter().zip(b) {
        if n > 0.0 {
            worst = worst.max((m / n - 1.0).abs());
        } else if m > 0.0 {
            return Distance::Infinite;
        }
    }
    Distance::Finite(worst)
}

fn chi_square_slices(a: &[f64], b: &[f64]) -> Distance {
    let mut total = 0.0;
    for (&m, &n) in a.iter().zip(b) {
        if n > 0.0 {
            total += (m - n) * (m - n) / n;
        } else if m > 0.0 {
            return Distance::Infinite;
        }
    }
    Distance::Finite(total)
}

/// `1/2 sum |mu - nu|`.
pub fn tv_distance(mu: &Distribution, nu: &Distribution) -> Result<f64> {
    same_len(mu, nu)?;
    Ok(tv_slices(mu.weights(), nu.weights()))
}

/// `max_{x : nu(x) > 0} |mu(x)/nu(x) - 1|`, infinite when `nu(x) = 0 < mu(x)`.
pub fn relative_sup_distance(mu: &Distribution, nu: &Distribution) -> Result<Distance> {
    same_len(mu, nu)?;
    Ok(relative_sup_slices(mu.weights(), nu.weights()))
}

/// `sum (mu - nu)^2 / nu` with the same zero convention as the relative-sup distance.
pub fn chi_square_distance(mu: &Distribution, nu: &Distribution) -> Result<Distance> {
    same_len(mu, nu)?;
    Ok(chi_square_slices(mu.weights(), nu.weights()))
}

/// Pairwise merging measure of the rows of a stochastic matrix. The maximum
/// runs over ordered pairs of rows.
pub fn pairwise_rows_measure(p: &DenseMatrix, metric: Metric) -> Distance {
    let n = p.rows();
    match metric {
        Metric::RelativeSup => {
            // max over ordered pairs of |a/b - 1| in a column is max/min - 1
            let mut worst = 0.0_f64;
            for z in 0..p.cols() {
                let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
                for x in 0..n {
                    let v = p.get(x, z);
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                if hi == 0.0 {
                    continue;
                }
                if lo == 0.0 {
                    return Distance::Infinite;
                }
                worst = worst.max(hi / lo - 1.0);
            }
            Distance::Finite(worst)
        }
        Metric::TotalVariation => {
            let worst = (0..n)
                .into_par_iter()
                .map(|x| {
                    ((x + 1)..n)
                        .map(|y| tv_slices(p.row(x), p.row(y)))
                        .fold(0.0_f64, f64::max)
                })
                .reduce(|| 0.0, f64::max);
            Distance::Finite(worst)
        }
        Metric::ChiSquare => (0..n)
            .into_par_iter()
            .map(|x| {
                (0..n)
                    .filter(|&y| y != x)
                    .map(|y| chi_square_slices(p.row(x), p.row(y)))
                    .fold(Distance::Finite(0.0), Distance::max)
            })
            .reduce(|| Distance::Finite(0.0), Distance::max),
    }
}

/// Merging measure of `K_{0,n}` over all pairs of starting states.
pub fn pairwise_merging_measure(system: &WaveSystem, n: u64, metric: Metric) -> Result<Distance> {
    let mut out = Distance::Finite(0.0);
    for_each_window(system, n, |i, window| {
        if i == n {
            out = pairwise_rows_measure(window, metric);
        }
        true
    })?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MergingTime {
    Steps(u64),
    /// Threshold not reached within the computed horizon.
    Unbounded,
}

impl Serialize for MergingTime {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MergingTime::Steps(n) => s.serialize_u64(*n),
            MergingTime::Unbounded => s.serialize_str("unbounded"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MergingReport {
    pub metric: Metric,
    pub epsilon: f64,
    pub trace: Vec<(u64, Distance)>,
    pub merging_time: MergingTime,
    /// Why the measure cannot reach the threshold, when that is known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl MergingReport {
    /// `n,distance` rows, one per recorded step.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,distance\n");
        for (n, d) in &self.trace {
            out.push_str(&format!("{n},{d}\n"));
        }
        out
    }

    pub fn steps(&self) -> Option<u64> {
        match self.merging_time {
            MergingTime::Steps(n) => Some(n),
            MergingTime::Unbounded => None,
        }
    }
}

fn sparse_copy(k: &MarkovKernel) -> MarkovKernel {
    let rows = (0..k.size()).map(|x| k.row(x).collect()).collect();
    MarkovKernel::from_sparse_rows_unchecked(k.space().clone(), rows, 0)
}

/// Why `K~` rules out relative-sup merging, if it does.
pub fn non_merging_reason(system: &WaveSystem) -> Option<String> {
    let shifted = system.shifted();
    if !is_irreducible(shifted) {
        return Some("K\u{303} reducible".into());
    }
    match period(shifted) {
        Ok(1) => None,
        Ok(p) => Some(format!("K\u{303} periodic with period {p}")),
        Err(_) => Some("K\u{303} reducible".into()),
    }
}

/// First `n <= max_steps` whose pairwise merging measure is below `epsilon`.
///
/// Rows are taken from `K~^n`: since `K_{0,n}(x, y) = K~^n(x, g^n y)`, the two
/// matrices differ by a column permutation and every pairwise measure agrees.
pub fn merging_time(system: &WaveSystem, epsilon: f64, max_steps: u64, metric: Metric) -> Result<MergingReport> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let size = system.size();
    if size > DENSE_LIMIT {
        return Err(Error::TooLarge {
            size,
            limit: DENSE_LIMIT,
        });
    }
    let step = sparse_copy(system.shifted());
    let mut power = DenseMatrix::identity(size);
    let mut trace = Vec::new();
    let mut merging_time = MergingTime::Unbounded;
    for n in 0..=max_steps {
        if n > 0 {
            power = step.right_mul_dense(&power);
        }
        let d = pairwise_rows_measure(&power, metric);
        trace.push((n, d));
        if d.below(epsilon) {
            merging_time = MergingTime::Steps(n);
            break;
        }
    }
    let reason = match (merging_time, metric) {
        (MergingTime::Unbounded, Metric::RelativeSup) => non_merging_reason(system),
        _ => None,
    };
    Ok(MergingReport {
        metric,
        epsilon,
        trace,
        merging_time,
        reason,
    })
}

// ---------------------------------------------------------------------------
// stability

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    Steps(u64),
    /// Exact over all times, using the period of `mu_n`.
    Periodic(u64),
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityCertificate {
    pub c: f64,
    pub mu0: Distribution,
    pub horizon: Horizon,
    /// `(state, time)` attaining the worst ratio `mu_n(x)/mu_0(x)` or its inverse.
    pub witness: (usize, u64),
}

/// Tolerance for recognizing `mu_0 = pi~`.
pub const WAVE_START_TOLERANCE: f64 = 1e-10;

/// Smallest `c` with `c^{-1} <= mu_n(x)/mu_0(x) <= c`. With `mu_0 = pi~`
/// this is exact over all `n`; otherwise it scans `n <= horizon`.
pub fn certify_stability(system: &WaveSystem, mu0: &Distribution, horizon: Option<u64>) -> Result<StabilityCertificate> {
    if mu0.len() != system.size() {
        return Err(Error::SpaceMismatch {
            left: system.size(),
            right: mu0.len(),
        });
    }
    mu0.require_positive()?;
    if let Some(pi) = system.wave_measure() {
        if pi.max_abs_diff(mu0) <= WAVE_START_TOLERANCE {
            return Ok(periodic_certificate(system, pi));
        }
    }
    let horizon = horizon.ok_or_else(|| {
        Error::InvalidArgument("a horizon is needed unless mu0 is the wave measure".into())
    })?;
    let trajectory = evolve_trajectory(mu0, system, horizon)?;
    let mut c = 1.0_f64;
    let mut witness = (0, 0);
    for (n, mu) in trajectory.iter().enumerate() {
        for x in 0..mu.len() {
            let r = mu.get(x) / mu0.get(x);
            let worst = if r > 0.0 { r.max(1.0 / r) } else { f64::INFINITY };
            if worst > c {
                c = worst;
                witness = (x, n as u64);
            }
        }
    }
    Ok(StabilityCertificate {
        c,
        mu0: mu0.clone(),
        horizon: Horizon::Steps(horizon),
        witness,
    })
}

/// `c = max_{x,i} pi~(g^i x)/pi~(x)`: on each cycle of `g`, the ratio of the
/// largest to the smallest value of `pi~`.
fn periodic_certificate(system: &WaveSystem, pi: &Distribution) -> StabilityCertificate {
    let mut c = 1.0_f64;
    let mut witness = (0, 0);
    for cycle in system.map().cycles() {
        let (mut lo, mut hi) = (0usize, 0usize);
        for (pos, &x) in cycle.iter().enumerate() {
            if pi.get(x) < pi.get(cycle[lo]) {
                lo = pos;
            }
            if pi.get(x) > pi.get(cycle[hi]) {
                hi = pos;
            }
        }
        let ratio = pi.get(cycle[hi]) / pi.get(cycle[lo]);
        if ratio > c {
            c = ratio;
            let steps = (hi + cycle.len() - lo) % cycle.len();
            witness = (cycle[lo], steps as u64);
        }
    }
    StabilityCertificate {
        c,
        mu0: pi.clone(),
        horizon: Horizon::Periodic(system.order()),
        witness,
    }
}

// ---------------------------------------------------------------------------
// bounds on the relative error

/// `|K_{0,n}(x,z)/mu_n(z) - 1|` for all `x, z`, with `mu_n` the wave measure.
pub fn relative_error_to_wave(window: &DenseMatrix, mu_n: &Distribution) -> Result<DenseMatrix> {
    mu_n.require_positive()?;
    Ok(DenseMatrix::from_fn(window.rows(), window.cols(), |x, z| {
        (window.get(x, z) / mu_n.get(z) - 1.0).abs()
    }))
}

/// Singular-value product bound for an arbitrary positive start `mu_0`:
/// `(1/mu_0(x) - 1)^{1/2} (1/mu_n(z) - 1)^{1/2} prod_{i<=n} sigma_1(i)`,
/// with `sigma_1(i)` the second singular value of `K_i : l2(mu_i) -> l2(mu_{i-1})`.
#[derive(Debug, Clone)]
pub struct SvProductBound {
    measures: Vec<Distribution>,
    /// `prod_{i <= n} sigma_1(i)` for `n = 0..=n_max`.
    products: Vec<f64>,
}

impl SvProductBound {
    pub fn new(system: &WaveSystem, mu0: &Distribution, n_max: u64) -> Result<Self> {
        mu0.require_positive()?;
        let measures = evolve_trajectory(mu0, system, n_max)?;
        let mut products = vec![1.0];
        for i in 1..=n_max {
            let k = system.kernel_at(i);
            let s = weighted_singular_values(&k, &measures[i as usize], &measures[i as usize - 1])?.sigma1();
            products.push(products.last().expect("nonempty") * s);
        }
        Ok(Self { measures, products })
    }

    pub fn measure(&self, n: u64) -> &Distribution {
        &self.measures[n as usize]
    }

    pub fn sigma_product(&self, n: u64) -> f64 {
        self.products[n as usize]
    }

    pub fn eval(&self, x: usize, z: usize, n: u64) -> Result<f64> {
        let mu0 = &self.measures[0];
        let mun = self.measures.get(n as usize).ok_or_else(|| {
            Error::InvalidArgument(format!("n = {n} beyond the precomputed horizon"))
        })?;
        if mun.get(z) <= 0.0 {
            return Err(Error::ZeroWeight { state: z });
        }
        Ok((1.0 / mu0.get(x) - 1.0).sqrt() * (1.0 / mun.get(z) - 1.0).sqrt() * self.products[n as usize])
    }
}

pub fn sv_product_bound(system: &WaveSystem, mu0: &Distribution, x: usize, z: usize, n: u64) -> Result<f64> {
    SvProductBound::new(system, mu0, n)?.eval(x, z, n)
}

/// `(1/pi~(x) - 1)^{1/2} (1/pi~(g^n z) - 1)^{1/2} sigma~_1^n`, valid when `K~`
/// is irreducible and aperiodic.
#[derive(Debug, Clone)]
pub struct WaveBound {
    system: WaveSystem,
    sigma1: f64,
}

impl WaveBound {
    pub fn new(system: &WaveSystem) -> Result<Self> {
        if let Some(reason) = non_merging_reason(system) {
            return Err(Error::NotMerging(reason));
        }
        let system = if system.wave_measure().is_some() {
            system.clone()
        } else {
            system.clone().with_stationary_wave()?
        };
        let pi = system.require_wave_measure()?;
        let sigma1 = weighted_singular_values(system.shifted(), pi, pi)?.sigma1();
        Ok(Self { system, sigma1 })
    }

    pub fn sigma1(&self) -> f64 {
        self.sigma1
    }

    pub fn system(&self) -> &WaveSystem {
        &self.system
    }

    pub fn eval(&self, x: usize, z: usize, n: u64) -> f64 {
        let pi = self.system.wave_measure().expect("attached in new");
        let m = (n % self.system.order().max(1)) as i64;
        let gz = self.system.map().apply_pow(z, m);
        (1.0 / pi.get(x) - 1.0).sqrt() * (1.0 / pi.get(gz) - 1.0).sqrt() * self.sigma1.powi(n as i32)
    }
}

pub fn wave_bound(system: &WaveSystem, x: usize, z: usize, n: u64) -> Result<f64> {
    Ok(WaveBound::new(system)?.eval(x, z, n))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DominanceReport {
    pub checked: usize,
    pub violations: usize,
    /// Smallest `bound - actual` seen.
    pub worst_margin: f64,
    pub worst_at: (u64, usize, usize),
}

/// Compares the wave bound with the exact relative error at every
/// `n <= n_max` and pair `(x, z)`; a violation is `bound < actual - tol`.
pub fn check_wave_dominance(system: &WaveSystem, n_max: u64, tol: f64) -> Result<DominanceReport> {
    let bound = WaveBound::new(system)?;
    let sys = bound.system();
    let pi = sys.require_wave_measure()?;
    let g = sys.map();
    let size = sys.size();
    let mut report = DominanceReport {
        checked: 0,
        violations: 0,
        worst_margin: f64::INFINITY,
        worst_at: (0, 0, 0),
    };
    for_each_window(sys, n_max, |n, window| {
        let m = (n % sys.order().max(1)) as i64;
        for z in 0..size {
            let mu_nz = pi.get(g.apply_pow(z, m));
            for x in 0..size {
                let actual = (window.get(x, z) / mu_nz - 1.0).abs();
                let margin = bound.eval(x, z, n) - actual;
                report.checked += 1;
                if margin < -tol {
                    report.violations += 1;
                }
                if margin < report.worst_margin {
                    report.worst_margin = margin;
                    report.worst_at = (n, x, z);
                }
            }
        }
        true
    })?;
    Ok(report)
}

/// Constants of a Nash inequality `||f||_2^{2+1/D} <= C1 T (E + ||f||_2^2/T) ||f||_1^{1/D}`
/// for `Q* Q`, together with the gap constant `c1` (`sigma_1(Q) <= 1 - c1/T`),
/// the stability constant `c` and the perturbation size `eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NashParams {
    pub big_c1: f64,
    pub d: f64,
    pub c: f64,
    pub c1: f64,
    pub t: f64,
    pub eps: f64,
}

impl NashParams {
    /// Circle on `n_points` vertices: `T = 4(N+1)^2`, `D = 1/4`,
    /// `C1 = 2^7 N^2 / T`, `c1 = 4(N+1)^2 (1 - cos(pi/N))`.
    pub fn circle(n_points: usize, c: f64, eps: f64) -> Self {
        let n = n_points as f64;
        let t = 4.0 * (n + 1.0) * (n + 1.0);
        Self {
            big_c1: 128.0 * n * n / t,
            d: 0.25,
            c,
            c1: t * (1.0 - (std::f64::consts::PI / n).cos()),
            t,
            eps,
        }
    }
}

/// `(16(1+4D) C1 c^{2+3/(2D)} / (1-eps)^2)^{2D} exp(-2 c1 (1-eps)^2 (n-2T) / (c^2 T))`
/// for `n > 2T`.
pub fn nash_bound(p: &NashParams, n: f64) -> Result<f64> {
    if !(n > 2.0 * p.t) {
        return Err(Error::HorizonTooShort { n, two_t: 2.0 * p.t });
    }
    let one_minus = (1.0 - p.eps).powi(2);
    let base = 16.0 * (1.0 + 4.0 * p.d) * p.big_c1 * p.c.powf(2.0 + 3.0 / (2.0 * p.d)) / one_minus;
    let decay = (-2.0 * p.c1 * one_minus * (n - 2.0 * p.t) / (p.c * p.c * p.t)).exp();
    Ok(base.powf(2.0 * p.d) * decay)
}

// ---------------------------------------------------------------------------
// localization of max and min of pi~

/// Relative deviation from uniform below which `pi~` counts as uniform.
pub const UNIFORM_TOLERANCE: f64 = 1e-12;
const COLUMN_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryAnalysis {
    pub a_plus: Vec<usize>,
    pub a_minus: Vec<usize>,
    pub boundary: Vec<usize>,
    pub argmax_state: usize,
    pub argmin_state: usize,
    pub ratio: f64,
    /// Some maximizer of `pi~` lies in `a_plus`.
    pub max_in_a_plus: bool,
    /// Some minimizer of `pi~` lies in `a_minus`.
    pub min_in_a_minus: bool,
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// `A*_+` / `A*_-` are the states where the column sum of `K~` exceeds / falls
/// short of 1; `A*` is the set reachable in one step of `K~` from `a`.
pub fn boundary_analysis(shifted: &MarkovKernel, pi: &Distribution, a: &[usize]) -> Result<BoundaryAnalysis> {
    if !is_irreducible(shifted) {
        return Err(Error::NotIrreducible);
    }
    let n = shifted.size();
    let u = 1.0 / n as f64;
    if pi.weights().iter().all(|w| (w - u).abs() <= UNIFORM_TOLERANCE * u) {
        return Err(Error::UniformMeasure);
    }
    let sums = shifted.column_sums();
    let a_plus: Vec<usize> = (0..n).filter(|&x| sums[x] > 1.0 + COLUMN_SUM_TOLERANCE).collect();
    let a_minus: Vec<usize> = (0..n).filter(|&x| sums[x] < 1.0 - COLUMN_SUM_TOLERANCE).collect();
    let mut reach = vec![false; n];
    for &y in a {
        if y >= n {
            return Err(Error::InvalidArgument(format!("state {y} outside the space")));
        }
        for (z, _) in shifted.row(y) {
            reach[z] = true;
        }
    }
    let boundary: Vec<usize> = (0..n).filter(|&z| reach[z]).collect();
    let (max, min) = (pi.max(), pi.min());
    Ok(BoundaryAnalysis {
        max_in_a_plus: a_plus.iter().any(|&x| near(pi.get(x), max)),
        min_in_a_minus: a_minus.iter().any(|&x| near(pi.get(x), min)),
        a_plus,
        a_minus,
        boundary,
        argmax_state: pi.argmax(),
        argmin_state: pi.argmin(),
        ratio: max / min,
    })
}

/// The factor `K~(b,x)(1 - S_y) / (K~(b,y)(1 - S_x))`, `S_w = sum_{z != b} K~(z,w)`,
/// or `None` when one of the two quotients is not in `(0, inf)`.
pub fn pivot_factor(shifted: &MarkovKernel, sums: &[f64], x: usize, y: usize, b: usize) -> Option<f64> {
    let kbx = shifted.get(b, x);
    let kby = shifted.get(b, y);
    let rest_x = 1.0 - (sums[x] - kbx);
    let rest_y = 1.0 - (sums[y] - kby);
    let first = kbx / rest_x;
    let second = rest_y / kby;
    let ok = |q: f64| q > 0.0 && q.is_finite();
    if ok(first) && ok(second) && rest_x > 0.0 {
        Some(first * second)
    } else {
        None
    }
}

/// Pivot-based constant `C` with `max pi~ <= C min pi~`, maximized over
/// `A*_+ x A*_-` with the caller's pivot `b(x, y)`.
pub fn minmax_ratio_bound(
    shifted: &MarkovKernel,
    pi: &Distribution,
    a: &[usize],
    b_choice: &dyn Fn(usize, usize) -> usize,
) -> Result<f64> {
    let analysis = match boundary_analysis(shifted, pi, a) {
        Ok(r) => r,
        Err(Error::UniformMeasure) => return Ok(1.0),
        Err(e) => return Err(e),
    };
    let sums = shifted.column_sums();
    let mut c = 1.0_f64;
    for &x in &analysis.a_plus {
        for &y in &analysis.a_minus {
            let b = b_choice(x, y);
            let f = pivot_factor(shifted, &sums, x, y, b).ok_or(Error::InvalidPivot { x, y, b })?;
            c = c.max(f);
        }
    }
    if pi.max() > c * pi.min() + 1e-10 {
        return Err(Error::Numerical(format!(
            "pivot constant {c} below the observed ratio {}",
            pi.max() / pi.min()
        )));
    }
    Ok(c)
}

/// For each pair picks the admissible pivot with the smallest factor.
pub fn best_pivot_ratio_bound(shifted: &MarkovKernel, pi: &Distribution, a: &[usize]) -> Result<f64> {
    let sums = shifted.column_sums();
    let n = shifted.size();
    let best = |x: usize, y: usize| -> usize {
        (0..n)
            .filter_map(|b| pivot_factor(shifted, &sums, x, y, b).map(|f| (b, f)))
            .min_by(|l, r| l.1.partial_cmp(&r.1).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(b, _)| b)
            .unwrap_or(x)
    };
    minmax_ratio_bound(shifted, pi, a, &best)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct StickyCheck {
    /// `max pi~ / min pi~`.
    pub ratio: f64,
    /// `1 / (1 - eps)` with `eps = delta / (1 - Q(o,o))`.
    pub bound: f64,
    pub epsilon: f64,
    pub argmax: usize,
    /// `g(o)`, the only state with column sum of `K~` above 1.
    pub expected_argmax: usize,
    pub within_bound: bool,
    pub argmax_located: bool,
}

/// Stability of a single-point perturbation `K = Q + Delta_o` whose row at `o`
/// adds at most `delta` to the diagonal and removes mass proportionally to `Q`
/// elsewhere.
pub fn sticky_stability_check(system: &WaveSystem, q: &MarkovKernel, o: usize, delta: f64) -> Result<StickyCheck> {
    let k = system.base();
    let n = k.size();
    if o >= n || q.size() != n {
        return Err(Error::InvalidArgument(format!("state {o} or base kernel does not fit {n} states")));
    }
    let row: Vec<f64> = (0..n).map(|y| k.get(o, y) - q.get(o, y)).collect();
    let qoo = q.get(o, o);
    if row[o] > delta + 1e-12 {
        return Err(Error::PerturbationShapeViolated(format!(
            "diagonal increment {} exceeds {delta}",
            row[o]
        )));
    }
    let others_untouched = (0..n).filter(|&x| x != o).all(|x| (0..n).all(|y| k.get(x, y) == q.get(x, y)));
    if !others_untouched {
        return Err(Error::PerturbationShapeViolated("rows other than o are perturbed".into()));
    }
    single_point_perturbation(q, o, &row, true).map_err(|e| Error::PerturbationShapeViolated(e.to_string()))?;
    let pi = system.require_wave_measure()?;
    let epsilon = delta / (1.0 - qoo);
    let bound = 1.0 / (1.0 - epsilon);
    let ratio = pi.max() / pi.min();
    let expected_argmax = system.map().apply(o);
    let max = pi.max();
    Ok(StickyCheck {
        ratio,
        bound,
        epsilon,
        argmax: pi.argmax(),
        expected_argmax,
        within_bound: ratio <= bound * (1.0 + 1e-10),
        argmax_located: near(pi.get(expected_argmax), max),
    })
}

// ---------------------------------------------------------------------------
// scaling

#[derive(Debug, Clone, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
}

/// Least-squares fit of `log y = slope log x + intercept`.
pub fn loglog_fit(points: &[(f64, f64)]) -> Result<LinearFit> {
    if points.len() < 2 || points.iter().any(|(x, y)| !(*x > 0.0) || !(*y > 0.0)) {
        return Err(Error::InvalidArgument(
            "log-log fit needs at least two positive points".into(),
        ));
    }
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let m = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("log-log fit needs distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = lx.iter().zip(&ly).map(|(x, y)| y - (slope * x + intercept)).collect();
    Ok(LinearFit {
        slope,
        intercept,
        residuals,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingPoint {
    pub n: usize,
    pub merging_time: MergingTime,
    /// `T / n^2`.
    pub normalized: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub eta: f64,
    pub points: Vec<ScalingPoint>,
    pub fit: Option<LinearFit>,
}

/// Relative-sup merging times of a family indexed by size, fitted on a log-log scale.
pub fn scaling_study(family: &[(usize, WaveSystem)], eta: f64, max_steps: u64) -> Result<ScalingReport> {
    let times: Vec<Result<MergingTime>> = family
        .par_iter()
        .map(|(_, s)| merging_time(s, eta, max_steps, Metric::RelativeSup).map(|r| r.merging_time))
        .collect();
    let mut points = Vec::with_capacity(family.len());
    for ((n, _), t) in family.iter().zip(times) {
        let t = t?;
        let normalized = match t {
            MergingTime::Steps(s) => Some(s as f64 / (*n as f64 * *n as f64)),
            MergingTime::Unbounded => None,
        };
        points.push(ScalingPoint {
            n: *n,
            merging_time: t,
            normalized,
        });
    }
    let finite: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|p| match p.merging_time {
            MergingTime::Steps(s) if s > 0 => Some((p.n as f64, s as f64)),
            _ => None,
        })
        .collect();
    let fit = loglog_fit(&finite).ok();
    Ok(ScalingReport { eta, points, fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::make_kernel;
    use crate::permutation::Permutation;
    use crate::space::StateSpace;
    use proptest::prelude::*;

    fn d(w: &[f64]) -> Distribution {
        Distribution::new(w.to_vec()).unwrap()
    }

    #[test]
    fn distances_on_small_pairs() {
        let mu = d(&[0.6, 0.4]);
        let nu = d(&[0.5, 0.5]);
        assert_eq!(tv_distance(&mu, &mu).unwrap(), 0.0);
        assert!((tv_distance(&mu, &nu).unwrap() - 0.1).abs() < 1e-15);
        assert!((relative_sup_distance(&mu, &nu).unwrap().value() - 0.2).abs() < 1e-15);
        assert!((chi_square_distance(&mu, &nu).unwrap().value() - 0.04).abs() < 1e-15);
        assert_eq!(tv_distance(&d(&[1.0, 0.0]), &d(&[0.0, 1.0])).unwrap(), 1.0);
        assert_eq!(relative_sup_distance(&mu, &mu).unwrap(), Distance::Finite(0.0));
    }

    #[test]
    fn zero_denominator_is_infinite_and_zero_zero_is_ignored() {
        assert_eq!(
            relative_sup_distance(&d(&[0.5, 0.5, 0.0]), &d(&[1.0, 0.0, 0.0])).unwrap(),
            Distance::Infinite
        );
        assert_eq!(
            relative_sup_distance(&d(&[0.5, 0.5, 0.0]), &d(&[0.5, 0.5, 0.0])).unwrap(),
            Distance::Finite(0.0)
        );
        assert!(tv_distance(&d(&[1.0]), &d(&[0.5, 0.5])).is_err());
    }

    #[test]
    fn identity_rows_never_merge_in_relative_sup() {
        let p = DenseMatrix::identity(3);
        assert_eq!(pairwise_rows_measure(&p, Metric::RelativeSup), Distance::Infinite);
        assert_eq!(pairwise_rows_measure(&p, Metric::TotalVariation), Distance::Finite(1.0));
    }

    #[test]
    fn distance_serializes_infinity_as_text() {
        let r = MergingReport {
            metric: Metric::RelativeSup,
            epsilon: 0.5,
            trace: vec![(0, Distance::Infinite), (1, Distance::Finite(0.25))],
            merging_time: MergingTime::Unbounded,
            reason: None,
        };
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(
            s,
            r#"{"metric":"relative_sup","epsilon":0.5,"trace":[[0,"inf"],[1,0.25]],"merging_time":"unbounded"}"#
        );
        assert_eq!(r.to_csv(), "n,distance\n0,inf\n1,0.25\n");
    }

    #[test]
    fn nash_bound_rejects_short_horizons_and_decreases() {
        let p = NashParams::circle(11, 2.0, 1.0 / 3.0);
        assert!(matches!(nash_bound(&p, 2.0 * p.t), Err(Error::HorizonTooShort { .. })));
        let a = nash_bound(&p, 4.0 * p.t).unwrap();
        let b = nash_bound(&p, 4.0 * p.t + 1.0).unwrap();
        assert!(a.is_finite() && a > 0.0 && b < a);
    }

    #[test]
    fn homogeneous_chain_is_one_stable() {
        let k = make_kernel(
            StateSpace::new(3).unwrap(),
            &DenseMatrix::from_rows(&[vec![0.2, 0.8, 0.0], vec![0.3, 0.3, 0.4], vec![0.5, 0.0, 0.5]]),
        )
        .unwrap();
        let s = WaveSystem::new(k, Permutation::identity(3)).unwrap().with_stationary_wave().unwrap();
        let pi = s.wave_measure().unwrap().clone();
        let cert = certify_stability(&s, &pi, None).unwrap();
        assert_eq!(cert.c, 1.0);
        assert_eq!(cert.horizon, Horizon::Periodic(1));
        let scanned = certify_stability(&s, &Distribution::uniform(3).unwrap(), Some(20)).unwrap();
        assert!(scanned.c > 1.0);
    }

    #[test]
    fn loglog_fit_recovers_power_law() {
        let pts: Vec<(f64, f64)> = (1..8).map(|i| (i as f64, 3.0 * (i as f64).powi(2))).collect();
        let fit = loglog_fit(&pts).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
    }

    fn arb_pair() -> impl Strategy<Value = (Distribution, Distribution)> {
        (2usize..8).prop_flat_map(|n| {
            (
                proptest::collection::vec(0.0f64..1.0, n),
                proptest::collection::vec(0.01f64..1.0, n),
            )
                .prop_filter("mass", |(a, _)| a.iter().sum::<f64>() > 0.0)
                .prop_map(|(a, b)| {
                    (
                        Distribution::normalized(a).unwrap(),
                        Distribution::normalized(b).unwrap(),
                    )
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn chi_square_below_squared_relative_sup((mu, nu) in arb_pair()) {
            let rs = relative_sup_distance(&mu, &nu).unwrap().value();
            let chi = chi_square_distance(&mu, &nu).unwrap().value();
            prop_assert!(chi <= rs * rs + 1e-12);
        }

        #[test]
        fn tv_below_half_relative_sup((mu, nu) in arb_pair()) {
            let rs = relative_sup_distance(&mu, &nu).unwrap().value();
            let tv = tv_distance(&mu, &nu).unwrap();
            prop_assert!(tv <= 0.5 * rs + 1e-12);
        }
    }
}
