use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::MarkovKernel;
use crate::matrix::DenseMatrix;

const TOL: f64 = 1e-12;

/// `K = Q + Delta_A` with `Q` symmetric, rows of `Delta_A` summing to zero,
/// `Delta_A >= -eps Q`, and `Delta_A` vanishing off the rows in `A`.
#[derive(Debug, Clone, Serialize)]
pub struct PerturbationSpec {
    #[serde(skip)]
    pub base: MarkovKernel,
    pub support: Vec<usize>,
    #[serde(skip)]
    pub delta_matrix: DenseMatrix,
    /// Smallest `eps` with `Delta_A >= -eps Q`.
    pub epsilon: f64,
    /// Diagonal budget `delta` of a single-point perturbation in the strict
    /// shape, where `eps = delta / (1 - Q(o,o))`.
    pub delta: Option<f64>,
}

impl PerturbationSpec {
    pub fn new(base: MarkovKernel, support: Vec<usize>, delta_matrix: DenseMatrix) -> Result<Self> {
        let n = base.size();
        let defect = base.symmetry_defect();
        if defect > TOL {
            return Err(Error::NotSymmetric { defect });
        }
        if delta_matrix.rows() != n || delta_matrix.cols() != n {
            return Err(Error::BadShape {
                rows: delta_matrix.rows(),
                cols: delta_matrix.cols(),
                expected: n,
            });
        }
        let mut in_support = vec![false; n];
        for &x in &support {
            if x >= n {
                return Err(Error::InvalidArgument(format!("support state {x} outside the space")));
            }
            in_support[x] = true;
        }
        let mut epsilon = 0.0_f64;
        for x in 0..n {
            let row = delta_matrix.row(x);
            let sum: f64 = row.iter().sum();
            if sum.abs() > TOL {
                return Err(Error::ConditionViolated {
                    condition: 'a',
                    detail: format!("row {x} of the perturbation sums to {sum}"),
                });
            }
            if !in_support[x] && row.iter().any(|v| *v != 0.0) {
                return Err(Error::ConditionViolated {
                    condition: 'c',
                    detail: format!("row {x} is perturbed but outside the support"),
                });
            }
            for (y, &d) in row.iter().enumerate() {
                let q = base.get(x, y);
                if d < 0.0 {
                    if q <= 0.0 {
                        if d < -TOL {
                            return Err(Error::ConditionViolated {
                                condition: 'b',
                                detail: format!("negative entry at ({x},{y}) where Q vanishes"),
                            });
                        }
                    } else {
                        epsilon = epsilon.max(-d / q);
                    }
                }
            }
        }
        if epsilon >= 1.0 {
            return Err(Error::ConditionViolated {
                condition: 'b',
                detail: format!("perturbation needs eps = {epsilon} >= 1"),
            });
        }
        Ok(Self {
            base,
            support,
            delta_matrix,
            epsilon,
            delta: None,
        })
    }

    /// Recovers `Delta_A = K - Q`.
    pub fn decompose(k: &MarkovKernel, q: &MarkovKernel, support: Vec<usize>) -> Result<Self> {
        let delta = k.to_dense().sub(&q.to_dense());
        Self::new(q.clone(), support, delta)
    }

    /// `Q + Delta_A` as a validated kernel.
    pub fn kernel(&self) -> Result<MarkovKernel> {
        let n = self.base.size();
        let rows = (0..n)
            .map(|x| {
                (0..n)
                    .filter_map(|y| {
                        let v = self.base.get(x, y) + self.delta_matrix.get(x, y);
                        // clamp round-off at entries driven to zero
                        let v = if v.abs() <= TOL { 0.0 } else { v };
                        (v != 0.0).then_some((y, v))
                    })
                    .collect()
            })
            .collect();
        MarkovKernel::from_sparse_rows(self.base.space().clone(), rows)
    }
}

/// Perturbation supported at the single state `o`. With `strict_shape` the
/// row must also satisfy `0 < Delta(o,o) <= delta` and
/// `-delta Q(o,y)/(1 - Q(o,o)) <= Delta(o,y) <= 0` off the diagonal, with
/// equality to 0 allowed only where `Q(o,y) = 0`; then `delta = Delta(o,o)`
/// and `eps = delta / (1 - Q(o,o))`.
pub fn single_point_perturbation(
    q: &MarkovKernel,
    o: usize,
    delta_row: &[f64],
    strict_shape: bool,
) -> Result<PerturbationSpec> {
    let n = q.size();
    if o >= n || delta_row.len() != n {
        return Err(Error::InvalidArgument(format!(
            "perturbation row of length {} at state {o} on {n} states",
            delta_row.len()
        )));
    }
    let mut m = DenseMatrix::zeros(n, n);
    m.row_mut(o).copy_from_slice(delta_row);
    let mut spec = PerturbationSpec::new(q.clone(), vec![o], m)?;
    if strict_shape {
        let qoo = q.get(o, o);
        let delta = delta_row[o];
        if !(delta > 0.0) || !(delta < 1.0 - qoo) {
            return Err(Error::ConditionViolated {
                condition: 'v',
                detail: format!("diagonal increment {delta} not in (0, {})", 1.0 - qoo),
            });
        }
        for (y, &d) in delta_row.iter().enumerate() {
            if y == o {
                continue;
            }
            let qy = q.get(o, y);
            let floor = -delta * qy / (1.0 - qoo);
            let bad = d < floor - TOL || d > 0.0 || (qy > 0.0 && d >= 0.0);
            if bad {
                return Err(Error::ConditionViolated {
                    condition: 'v',
                    detail: format!("entry ({o},{y}) = {d} outside [{floor}, 0)"),
                });
            }
        }
        spec.delta = Some(delta);
        spec.epsilon = delta / (1.0 - qoo);
    }
    Ok(spec)
}
