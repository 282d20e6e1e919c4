use crate::error::{Error, Result};
use crate::kernel::MarkovKernel;
use crate::permutation::Permutation;
use crate::space::StateSpace;
use crate::wave::WaveSystem;

/// Block-cyclic walk on `k` classes of `class_size` states (state
/// `i * class_size + j` is in class `C_i`), moving uniformly from `C_i` to
/// `C_{i+1}`, driven by the block rotation `g(C_i) = C_{i-1}`.
pub fn periodic_class_example(k: usize, class_size: usize) -> Result<WaveSystem> {
    if k < 2 || class_size == 0 {
        return Err(Error::InvalidArgument(format!(
            "need at least two nonempty classes, got k = {k}, class size {class_size}"
        )));
    }
    let size = k * class_size;
    let w = 1.0 / class_size as f64;
    let rows = (0..size)
        .map(|x| {
            let next = (x / class_size + 1) % k;
            (0..class_size).map(|j| (next * class_size + j, w)).collect()
        })
        .collect();
    let kernel = MarkovKernel::from_sparse_rows(StateSpace::new(size)?, rows)?;
    let g = Permutation::new(
        (0..size)
            .map(|x| ((x / class_size + k - 1) % k) * class_size + x % class_size)
            .collect(),
    )?;
    WaveSystem::new(kernel, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{is_irreducible, period};

    #[test]
    fn shifted_kernel_stays_in_class() {
        let s = periodic_class_example(2, 2).unwrap();
        for x in 0..4 {
            for y in 0..4 {
                assert_eq!(s.shifted().get(x, y) > 0.0, x / 2 == y / 2);
            }
        }
        assert!(!is_irreducible(s.shifted()));
        assert_eq!(period(s.base()).unwrap(), 2);
    }
}
