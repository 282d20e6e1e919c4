//! Stationary measures, support-graph structure, weighted singular values,
//! eigenvalues, and Dirichlet-form / Nash-inequality checks.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{transport_kernel, MarkovKernel, DENSE_LIMIT};
use crate::matrix::DenseMatrix;
use crate::permutation::gcd;
use crate::space::Distribution;
use crate::wave::WaveSystem;

/// Largest size solved by a direct linear solve; power iteration above.
pub const DIRECT_SOLVE_LIMIT: usize = 2000;

/// Residual target `||pi K - pi||_inf`.
pub const STATIONARY_TOLERANCE: f64 = 1e-12;

// ---------------------------------------------------------------------------
// support graph

/// Strongly connected components of the support graph `{(x,y) : K(x,y) > 0}`
/// (iterative Tarjan). Components come out in reverse topological order.
pub fn strongly_connected_components(k: &MarkovKernel) -> Vec<Vec<usize>> {
    let n = k.size();
    let adj: Vec<Vec<usize>> = (0..n).map(|x| k.row(x).map(|(y, _)| y).collect()).collect();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut next = 0usize;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        // (node, next edge position)
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos < adj[v].len() {
                let w = adj[v][*pos];
                *pos += 1;
                if index[w] == usize::MAX {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
            }
        }
    }
    comps
}

pub fn is_irreducible(k: &MarkovKernel) -> bool {
    strongly_connected_components(k).len() == 1
}

/// Period of the class containing `members`: gcd of `level(u) + 1 - level(v)`
/// over edges inside the class, with BFS levels from its first member.
fn class_period(k: &MarkovKernel, members: &[usize], in_class: &[bool]) -> u64 {
    let n = k.size();
    let mut level = vec![usize::MAX; n];
    let root = members[0];
    level[root] = 0;
    let mut queue = std::collections::VecDeque::from([root]);
    let mut g = 0u64;
    while let Some(u) = queue.pop_front() {
        for (v, _) in k.row(u) {
            if !in_class[v] {
                continue;
            }
            if level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            } else {
                let diff = (level[u] as i64 + 1 - level[v] as i64).unsigned_abs();
                g = gcd(g, diff);
            }
        }
    }
    // a class with no internal edge (single transient state) has no cycles
    g
}

/// Period of every strongly connected component, in the order of
/// [`strongly_connected_components`]. A component without cycles reports 0.
pub fn component_periods(k: &MarkovKernel) -> Vec<(Vec<usize>, u64)> {
    let n = k.size();
    strongly_connected_components(k)
        .into_iter()
        .map(|comp| {
            let mut in_class = vec![false; n];
            for &x in &comp {
                in_class[x] = true;
            }
            let p = class_period(k, &comp, &in_class);
            (comp, p)
        })
        .collect()
}

/// Period of an irreducible kernel.
pub fn period(k: &MarkovKernel) -> Result<u64> {
    let mut comps = component_periods(k);
    if comps.len() != 1 {
        return Err(Error::NotIrreducible);
    }
    Ok(comps.pop().expect("one component").1)
}

/// Irreducible with period 1.
pub fn is_primitive(k: &MarkovKernel) -> bool {
    matches!(period(k), Ok(1))
}

// ---------------------------------------------------------------------------
// stationary measure

fn stationary_residual(k: &MarkovKernel, pi: &[f64]) -> f64 {
    k.left_mul(pi)
        .iter()
        .zip(pi)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
}

fn stationary_direct(k: &MarkovKernel) -> Result<Vec<f64>> {
    let n = k.size();
    let dense = k.to_dense();
    // rows 0..n-1 of (K^T - I), last row replaced by the normalization
    let a = Mat::from_fn(n, n, |i, j| {
        if i == n - 1 {
            1.0
        } else {
            dense.get(j, i) - if i == j { 1.0 } else { 0.0 }
        }
    });
    let mut b = Mat::<f64>::zeros(n, 1);
    b[(n - 1, 0)] = 1.0;
    let lu = a.partial_piv_lu();
    let mut x = lu.solve(&b);
    // two rounds of iterative refinement
    for _ in 0..2 {
        let r = &b - &a * &x;
        let d = lu.solve(&r);
        x += d;
    }
    let pi: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
    if pi.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("singular stationary system".into()));
    }
    Ok(pi)
}

fn stationary_power(k: &MarkovKernel) -> Result<Vec<f64>> {
    let n = k.size();
    let mut pi = vec![1.0 / n as f64; n];
    // lazy iteration converges for periodic kernels too
    for _ in 0..5_000_000 {
        let kp = k.left_mul(&pi);
        let next: Vec<f64> = pi.iter().zip(&kp).map(|(a, b)| 0.5 * (a + b)).collect();
        pi = next;
        if stationary_residual(k, &pi) <= STATIONARY_TOLERANCE * 0.5 {
            return Ok(pi);
        }
    }
    Err(Error::Numerical("power iteration did not converge".into()))
}

/// The unique invariant probability of an irreducible kernel.
pub fn stationary_distribution(k: &MarkovKernel) -> Result<Distribution> {
    if !is_irreducible(k) {
        return Err(Error::NotIrreducible);
    }
    let raw = if k.size() <= DIRECT_SOLVE_LIMIT {
        stationary_direct(k)?
    } else {
        stationary_power(k)?
    };
    let pi = Distribution::normalized(raw)?;
    if let Some(state) = pi.first_zero() {
        return Err(Error::Numerical(format!("stationary mass vanished at {state}")));
    }
    let res = stationary_residual(k, pi.weights());
    if res > STATIONARY_TOLERANCE {
        return Err(Error::Numerical(format!("stationary residual {res:e}")));
    }
    Ok(pi)
}

// ---------------------------------------------------------------------------
// singular values on weighted spaces

/// SVD of `K : l2(mu_in) -> l2(mu_out)`, i.e. `K phi_j = sigma_j psi_j` with
/// `phi_j` orthonormal in `l2(mu_in)` and `psi_j` orthonormal in `l2(mu_out)`.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralDecomposition {
    pub singular_values: Vec<f64>,
    /// `psi_j`, one vector per singular value.
    pub left_basis: Vec<Vec<f64>>,
    /// `phi_j`, one vector per singular value.
    pub right_basis: Vec<Vec<f64>>,
    pub mu_in: Distribution,
    pub mu_out: Distribution,
}

impl SpectralDecomposition {
    /// Second largest singular value (`sigma_1`), 0 on a one-point space.
    pub fn sigma1(&self) -> f64 {
        self.singular_values.get(1).copied().unwrap_or(0.0)
    }
}

fn weighted_inner(mu: &Distribution, f: &[f64], h: &[f64]) -> f64 {
    f.iter().zip(h).zip(mu.weights()).map(|((a, b), w)| a * b * w).sum()
}

pub fn weighted_singular_values(
    k: &MarkovKernel,
    mu_in: &Distribution,
    mu_out: &Distribution,
) -> Result<SpectralDecomposition> {
    let n = k.size();
    if mu_in.len() != n || mu_out.len() != n {
        return Err(Error::SpaceMismatch {
            left: n,
            right: mu_in.len().min(mu_out.len()),
        });
    }
    mu_in.require_positive()?;
    mu_out.require_positive()?;
    if n > DENSE_LIMIT {
        return top_two_singular(k, mu_in, mu_out);
    }
    let sin: Vec<f64> = mu_in.weights().iter().map(|w| w.sqrt()).collect();
    let sout: Vec<f64> = mu_out.weights().iter().map(|w| w.sqrt()).collect();
    let dense = k.to_dense();
    let m = Mat::from_fn(n, n, |x, y| sout[x] * dense.get(x, y) / sin[y]);
    let svd = m.svd().map_err(|e| Error::Numerical(format!("svd: {e:?}")))?;
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    let mut singular_values = Vec::with_capacity(n);
    let mut left_basis = Vec::with_capacity(n);
    let mut right_basis = Vec::with_capacity(n);
    for j in 0..n {
        let mut phi: Vec<f64> = (0..n).map(|y| v[(y, j)] / sin[y]).collect();
        let mut psi: Vec<f64> = (0..n).map(|x| u[(x, j)] / sout[x]).collect();
        // orient so that phi has nonnegative mean (phi_0 = +1)
        let mean = weighted_inner(mu_in, &phi, &vec![1.0; n]);
        if mean < 0.0 {
            phi.iter_mut().for_each(|a| *a = -*a);
            psi.iter_mut().for_each(|a| *a = -*a);
        }
        singular_values.push(s[j]);
        right_basis.push(phi);
        left_basis.push(psi);
    }
    Ok(SpectralDecomposition {
        singular_values,
        left_basis,
        right_basis,
        mu_in: mu_in.clone(),
        mu_out: mu_out.clone(),
    })
}

/// `sigma_0 = 1` with constant vectors and `sigma_1` by power iteration on
/// `K* K` restricted to functions orthogonal to constants. Requires
/// `mu_out K = mu_in`, so that constants are an exact singular pair.
fn top_two_singular(k: &MarkovKernel, mu_in: &Distribution, mu_out: &Distribution) -> Result<SpectralDecomposition> {
    let n = k.size();
    let image = k.left_mul(mu_out.weights());
    let defect = image
        .iter()
        .zip(mu_in.weights())
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    if defect > 1e-10 {
        return Err(Error::Numerical(format!(
            "sparse singular values need mu_out K = mu_in (defect {defect:e})"
        )));
    }
    let project = |f: &mut Vec<f64>| {
        let mean = weighted_inner(mu_in, f, &vec![1.0; n]);
        f.iter_mut().for_each(|a| *a -= mean);
        let norm = weighted_inner(mu_in, f, f).sqrt();
        if norm > 0.0 {
            f.iter_mut().for_each(|a| *a /= norm);
        }
        norm
    };
    let adjoint_of_k = |f: &[f64]| -> Vec<f64> {
        // (K* K f)(y) = sum_x mu_out(x) K(x,y) (K f)(x) / mu_in(y)
        let kf = k.apply(f);
        let weighted: Vec<f64> = kf.iter().zip(mu_out.weights()).map(|(a, w)| a * w).collect();
        k.left_mul(&weighted)
            .iter()
            .zip(mu_in.weights())
            .map(|(a, w)| a / w)
            .collect()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut f: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    project(&mut f);
    let mut lambda = 0.0;
    for _ in 0..100_000 {
        let mut h = adjoint_of_k(&f);
        let next = project(&mut h);
        let done = (next - lambda).abs() <= 1e-13 * next.max(1e-300);
        lambda = next;
        f = h;
        if done {
            break;
        }
    }
    let sigma1 = lambda.sqrt();
    let kf = k.apply(&f);
    let psi: Vec<f64> = if sigma1 > 0.0 {
        kf.iter().map(|a| a / sigma1).collect()
    } else {
        kf
    };
    Ok(SpectralDecomposition {
        singular_values: vec![1.0, sigma1],
        left_basis: vec![vec![1.0; n], psi],
        right_basis: vec![vec![1.0; n], f],
        mu_in: mu_in.clone(),
        mu_out: mu_out.clone(),
    })
}

/// `sigma_1` of `K` on `l2(u)` for the uniform `u`.
pub fn uniform_sigma1(k: &MarkovKernel) -> Result<f64> {
    let u = Distribution::uniform(k.size())?;
    Ok(weighted_singular_values(k, &u, &u)?.sigma1())
}

// ---------------------------------------------------------------------------
// eigenvalues

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Diagonalizability {
    Diagonalizable,
    Defective,
    Undetermined,
}

/// Condition number of the eigenvector matrix above which a kernel is
/// reported defective; within a factor 10 either side it is undetermined.
pub const DEFECTIVE_CONDITION: f64 = 1e8;

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Sorted by decreasing modulus.
    pub eigenvalues: Vec<Complex64>,
    /// Right eigenvectors, aligned with `eigenvalues`.
    pub eigenvectors: Vec<Vec<Complex64>>,
    pub diagonalizability: Diagonalizability,
    /// `cond_2` of the eigenvector matrix.
    pub condition: f64,
}

pub fn eigenvalues(k: &MarkovKernel) -> Result<EigenDecomposition> {
    let n = k.size();
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge {
            size: n,
            limit: DENSE_LIMIT,
        });
    }
    let m = k.to_dense().to_faer();
    let evd = m.eigen().map_err(|e| Error::Numerical(format!("eigen: {e:?}")))?;
    let (vecs, vals) = (evd.U(), evd.S().column_vector());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        vals[b]
            .norm()
            .partial_cmp(&vals[a].norm())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(vals[b].re.partial_cmp(&vals[a].re).unwrap_or(std::cmp::Ordering::Equal))
    });
    let eigenvalues: Vec<Complex64> = order.iter().map(|&j| vals[j]).collect();
    let eigenvectors: Vec<Vec<Complex64>> = order
        .iter()
        .map(|&j| {
            let col: Vec<Complex64> = (0..n).map(|i| vecs[(i, j)]).collect();
            let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            col.into_iter().map(|z| z / norm).collect()
        })
        .collect();
    let v = Mat::<Complex64>::from_fn(n, n, |i, j| eigenvectors[j][i]);
    let sv = v
        .singular_values()
        .map_err(|e| Error::Numerical(format!("svd: {e:?}")))?;
    let smax = sv.first().copied().unwrap_or(0.0);
    let smin = sv.last().copied().unwrap_or(0.0);
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let diagonalizability = if condition < DEFECTIVE_CONDITION / 10.0 {
        Diagonalizability::Diagonalizable
    } else if condition <= DEFECTIVE_CONDITION * 10.0 {
        Diagonalizability::Undetermined
    } else {
        Diagonalizability::Defective
    };
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
        diagonalizability,
        condition,
    })
}

// ---------------------------------------------------------------------------
// Dirichlet forms

/// Allowed defect `|mu(x)M(x,y) - mu(y)M(y,x)|` for a self-adjoint form kernel.
pub const SELF_ADJOINT_TOLERANCE: f64 = 1e-10;

/// `E(f,f) = <(I - M) f, f>_mu` for a kernel `M` self-adjoint on `l2(mu)`.
#[derive(Debug, Clone)]
pub struct DirichletForm {
    kernel: MarkovKernel,
    measure: Distribution,
}

impl DirichletForm {
    pub fn new(kernel: MarkovKernel, measure: Distribution) -> Result<Self> {
        if kernel.size() != measure.len() {
            return Err(Error::SpaceMismatch {
                left: kernel.size(),
                right: measure.len(),
            });
        }
        let mut defect = 0.0_f64;
        for x in 0..kernel.size() {
            for (y, v) in kernel.row(x) {
                let d = (measure.get(x) * v - measure.get(y) * kernel.get(y, x)).abs();
                defect = defect.max(d);
            }
        }
        if defect > SELF_ADJOINT_TOLERANCE {
            return Err(Error::NotSelfAdjoint { defect });
        }
        Ok(Self { kernel, measure })
    }

    pub fn kernel(&self) -> &MarkovKernel {
        &self.kernel
    }

    pub fn measure(&self) -> &Distribution {
        &self.measure
    }
}

pub fn dirichlet_energy(form: &DirichletForm, f: &[f64]) -> Result<f64> {
    if f.len() != form.kernel.size() {
        return Err(Error::SpaceMismatch {
            left: form.kernel.size(),
            right: f.len(),
        });
    }
    let mf = form.kernel.apply(f);
    Ok(f.iter()
        .zip(&mf)
        .zip(form.measure.weights())
        .map(|((a, b), w)| w * a * (a - b))
        .sum())
}

/// Matrix of the adjoint `K* : l2(mu_out) -> l2(mu_in)`,
/// `K*(y, x) = mu_out(x) K(x, y) / mu_in(y)`.
pub fn adjoint(k: &MarkovKernel, mu_in: &Distribution, mu_out: &Distribution) -> Result<DenseMatrix> {
    mu_in.require_positive()?;
    let n = k.size();
    let mut out = DenseMatrix::zeros(n, n);
    for x in 0..n {
        for (y, v) in k.row(x) {
            out.set(y, x, mu_out.get(x) * v / mu_in.get(y));
        }
    }
    Ok(out)
}

/// `K* K` on `l2(mu)` for `K : l2(mu) -> l2(mu)` with `mu K = mu`.
pub fn adjoint_product(k: &MarkovKernel, mu: &Distribution) -> Result<MarkovKernel> {
    let n = k.size();
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge {
            size: n,
            limit: DENSE_LIMIT,
        });
    }
    let star = adjoint(k, mu, mu)?;
    let product = star.matmul(&k.to_dense());
    Ok(MarkovKernel::from_dense_unchecked(k.space().clone(), product))
}

/// The two Dirichlet forms compared by the perturbation lemma:
/// `E_{Q_g* Q_g, u}` and `E_{K~* K~, pi~}`, where `Q_g(x,y) = Q(g^{-1}x, g^{-1}y)`.
pub fn comparison_forms(system: &WaveSystem, q: &MarkovKernel) -> Result<(DirichletForm, DirichletForm)> {
    let pi = system.require_wave_measure()?;
    let u = Distribution::uniform(q.size())?;
    let g_inv = system.map().inverse();
    let q_g = transport_kernel(q, &g_inv, 2)?;
    let unperturbed = DirichletForm::new(adjoint_product(&q_g, &u)?, u)?;
    let perturbed = DirichletForm::new(adjoint_product(system.shifted(), pi)?, pi.clone())?;
    Ok((unperturbed, perturbed))
}

// ---------------------------------------------------------------------------
// Nash inequality

#[derive(Debug, Clone, Serialize)]
pub struct NashCheck {
    /// Largest observed `lhs / rhs`; the inequality holds on the sample iff `<= 1`.
    pub worst_ratio: f64,
    pub worst_kind: String,
    pub evaluated: usize,
}

fn lp_norm_uniform(f: &[f64], p: f64) -> f64 {
    let n = f.len() as f64;
    (f.iter().map(|v| v.abs().powf(p)).sum::<f64>() / n).powf(1.0 / p)
}

/// Samples `||f||_2^{2+1/D} <= C1 T (E_{Q*Q}(f,f) + ||f||_2^2 / T) ||f||_1^{1/D}`
/// (norms on the uniform measure) over random signed functions, all
/// indicators and all eigenvectors of `Q* Q`; returns the worst ratio.
pub fn check_nash_inequality(
    q: &MarkovKernel,
    t: f64,
    c1: f64,
    d: f64,
    trial_count: usize,
    seed: u64,
) -> Result<NashCheck> {
    let defect = q.symmetry_defect();
    if defect > 1e-12 {
        return Err(Error::NotSymmetric { defect });
    }
    if !(d > 0.0) || !(t > 1.0) {
        return Err(Error::InvalidArgument(format!("need D > 0 and T > 1, got D={d}, T={t}")));
    }
    let n = q.size();
    let u = Distribution::uniform(n)?;
    let form = DirichletForm::new(adjoint_product(q, &u)?, u)?;
    let ratio = |f: &[f64]| -> Result<f64> {
        let n2 = lp_norm_uniform(f, 2.0);
        let n1 = lp_norm_uniform(f, 1.0);
        if n2 == 0.0 {
            return Ok(0.0);
        }
        let energy = dirichlet_energy(&form, f)?.max(0.0);
        let lhs = n2.powf(2.0 + 1.0 / d);
        let rhs = c1 * t * (energy + n2 * n2 / t) * n1.powf(1.0 / d);
        Ok(lhs / rhs)
    };
    let mut worst = NashCheck {
        worst_ratio: 0.0,
        worst_kind: String::new(),
        evaluated: 0,
    };
    let mut consider = |kind: &str, f: &[f64]| -> Result<()> {
        let r = ratio(f)?;
        worst.evaluated += 1;
        if r > worst.worst_ratio {
            worst.worst_ratio = r;
            worst.worst_kind = kind.to_string();
        }
        Ok(())
    };
    for x in 0..n {
        let mut f = vec![0.0; n];
        f[x] = 1.0;
        consider(&format!("indicator {x}"), &f)?;
    }
    let qq = adjoint_product(q, &Distribution::uniform(n)?)?.to_dense().to_faer();
    let evd = qq
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigen: {e:?}")))?;
    for j in 0..n {
        let f: Vec<f64> = (0..n).map(|i| evd.U()[(i, j)]).collect();
        consider(&format!("eigenvector {j}"), &f)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trial_count {
        // localized support, heavy-tailed symmetric values
        let support = rng.random_range(1..=n);
        let start = rng.random_range(0..n);
        let mut f = vec![0.0; n];
        for s in 0..support {
            let x = (start + s) % n;
            let u: f64 = rng.random_range(1e-6..1.0);
            let magnitude = if rng.random_bool(0.5) { 1.0 / u - 1.0 } else { u };
            f[x] = if rng.random_bool(0.5) { magnitude } else { -magnitude };
        }
        consider(&format!("random {trial}"), &f)?;
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// perturbation bound on sigma~_1

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SingularValueBound {
    /// `sigma~_1` of `K~` on `l2(pi~)`.
    pub computed: f64,
    /// `1 - (1 - eps)^2 (1 - sigma_1(Q)) / c^2`.
    pub bound: f64,
    pub sigma1_q: f64,
}

impl SingularValueBound {
    pub fn holds(&self, tol: f64) -> bool {
        self.computed <= self.bound + tol
    }
}

/// Computes `sigma~_1` and the perturbation bound, after certifying
/// `max pi~ <= c min pi~`.
pub fn second_singular_value_bound_gap(
    shifted: &MarkovKernel,
    pi: &Distribution,
    q: &MarkovKernel,
    eps: f64,
    c: f64,
) -> Result<SingularValueBound> {
    let ratio = pi.max() / pi.min();
    if ratio > c * (1.0 + 1e-12) {
        return Err(Error::StabilityNotCertified { c, ratio });
    }
    let computed = weighted_singular_values(shifted, pi, pi)?.sigma1();
    let sigma1_q = uniform_sigma1(q)?;
    let bound = 1.0 - (1.0 - eps).powi(2) * (1.0 - sigma1_q) / (c * c);
    Ok(SingularValueBound {
        computed,
        bound,
        sigma1_q,
    })
}

// ---------------------------------------------------------------------------
// report

#[derive(Debug, Clone, Serialize)]
pub struct SpectralFlags {
    pub irreducible: bool,
    pub period: Option<u64>,
    pub diagonalizability: Option<Diagonalizability>,
    pub eigenvector_condition: Option<f64>,
}

/// `{sigma, eigenvalues: [[re, im], ..], stationary, flags}` for `K~`.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub sigma: Vec<f64>,
    pub eigenvalues: Vec<[f64; 2]>,
    pub stationary: Vec<f64>,
    pub flags: SpectralFlags,
}

/// Spectral summary of the homogeneous reduction `K~` of a system.
pub fn spectral_report(system: &WaveSystem) -> Result<SpectralReport> {
    let shifted = system.shifted();
    let irreducible = is_irreducible(shifted);
    let period = period(shifted).ok();
    let (sigma, stationary) = match system.wave_measure() {
        Some(pi) => (
            weighted_singular_values(shifted, pi, pi)?.singular_values,
            pi.weights().to_vec(),
        ),
        None => (Vec::new(), Vec::new()),
    };
    let (eigenvalues, diagonalizability, condition) = if shifted.size() <= DENSE_LIMIT {
        let e = eigenvalues(shifted)?;
        (
            e.eigenvalues.iter().map(|z| [z.re, z.im]).collect(),
            Some(e.diagonalizability),
            Some(e.condition),
        )
    } else {
        (Vec::new(), None, None)
    };
    Ok(SpectralReport {
        sigma,
        eigenvalues,
        stationary,
        flags: SpectralFlags {
            irreducible,
            period,
            diagonalizability,
            eigenvector_condition: condition.filter(|c| c.is_finite()),
        },
    })
}
