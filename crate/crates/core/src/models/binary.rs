use crate::error::{Error, Result};
use crate::kernel::MarkovKernel;
use crate::permutation::Permutation;
use crate::space::StateSpace;
use crate::wave::WaveSystem;

/// Binary vectors `(x_1, .., x_N)` stored as integers with `x_1` in bit 0.
/// `K` rerandomizes `x_1`; `g` is the cyclic left shift
/// `(x_1, .., x_N) -> (x_2, .., x_N, x_1)`, so `K_i` rerandomizes `x_i`.
pub fn binary_cycling_system(n_bits: usize) -> Result<WaveSystem> {
    if !(1..=16).contains(&n_bits) {
        return Err(Error::TooLarge {
            size: 1usize.checked_shl(n_bits as u32).unwrap_or(usize::MAX),
            limit: 1 << 16,
        });
    }
    let size = 1usize << n_bits;
    let rows = (0..size).map(|x| vec![(x, 0.5), (x ^ 1, 0.5)]).collect();
    let k = MarkovKernel::from_sparse_rows(StateSpace::new(size)?, rows)?;
    let top = n_bits - 1;
    let g = Permutation::new((0..size).map(|x| (x >> 1) | ((x & 1) << top)).collect())?;
    WaveSystem::new(k, g)?.with_stationary_wave()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wave::compose_window;

    #[test]
    fn three_bit_entries() {
        let s = binary_cycling_system(3).unwrap();
        // 000 -> 100 flips x_1, stored as 0 -> 1
        assert_eq!(s.base().get(0, 1), 0.5);
        assert_eq!(s.base().get(0, 0), 0.5);
        assert_eq!(s.order(), 3);
    }

    #[test]
    fn k_i_flips_coordinate_i() {
        let s = binary_cycling_system(4).unwrap();
        for i in 1..=4u64 {
            let k = s.kernel_at(i);
            for x in 0..16 {
                assert_eq!(k.get(x, x ^ (1 << (i - 1))), 0.5);
            }
        }
    }

    #[test]
    fn full_sweep_is_uniform() {
        let s = binary_cycling_system(4).unwrap();
        let w = compose_window(&s, 0, 4).unwrap();
        for x in 0..16 {
            for y in 0..16 {
                assert_eq!(w.get(x, y), 1.0 / 16.0);
            }
        }
        assert!(binary_cycling_system(17).is_err());
    }
}
