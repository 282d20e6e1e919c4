use crate::error::Result;
use crate::kernel::make_kernel;
use crate::matrix::DenseMatrix;
use crate::permutation::Permutation;
use crate::space::StateSpace;
use crate::wave::WaveSystem;

/// Reversible walk on `{1, 2, 3, 4}` (indices 0..3) driven by `g = (3 4)`.
/// `K~` is reducible: state 4 is absorbing.
pub fn four_point_example() -> Result<WaveSystem> {
    let h = 0.5;
    let m = DenseMatrix::from_rows(&[
        vec![h, h, 0.0, 0.0],
        vec![h, 0.0, h, 0.0],
        vec![0.0, h, 0.0, h],
        vec![0.0, 0.0, 1.0, 0.0],
    ]);
    let labels = (1..=4).map(|i| i.to_string()).collect();
    let k = make_kernel(StateSpace::with_labels(labels)?, &m)?;
    WaveSystem::new(k, Permutation::new(vec![0, 1, 3, 2])?)
}
