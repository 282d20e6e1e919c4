use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::space::StateSpace;

/// A bijection of `{0, .., n-1}` with its inverse and cycle structure cached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    forward: Vec<usize>,
    inverse: Vec<usize>,
    cycles: Vec<Vec<usize>>,
    // (cycle index, position within that cycle) for each state
    place: Vec<(usize, usize)>,
}

impl Permutation {
    pub fn new(forward: Vec<usize>) -> Result<Self> {
        let n = forward.len();
        if n == 0 {
            return Err(Error::EmptySpace);
        }
        let mut inverse = vec![usize::MAX; n];
        for (x, &y) in forward.iter().enumerate() {
            if y >= n {
                return Err(Error::NotBijective(format!("target {y} out of range")));
            }
            if inverse[y] != usize::MAX {
                return Err(Error::NotBijective(format!("target {y} hit twice")));
            }
            inverse[y] = x;
        }
        let mut place = vec![(usize::MAX, 0); n];
        let mut cycles = Vec::new();
        for start in 0..n {
            if place[start].0 != usize::MAX {
                continue;
            }
            let id = cycles.len();
            let mut cycle = Vec::new();
            let mut x = start;
            loop {
                place[x] = (id, cycle.len());
                cycle.push(x);
                x = forward[x];
                if x == start {
                    break;
                }
            }
            cycles.push(cycle);
        }
        Ok(Self {
            forward,
            inverse,
            cycles,
            place,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::new((0..n).collect()).expect("identity is a bijection")
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    pub fn inverse_map(&self) -> &[usize] {
        &self.inverse
    }

    pub fn cycles(&self) -> &[Vec<usize>] {
        &self.cycles
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.forward[x]
    }

    #[inline]
    pub fn apply_inverse(&self, x: usize) -> usize {
        self.inverse[x]
    }

    /// `g^m x` for any integer `m`, in O(1) through the cycle table.
    #[inline]
    pub fn apply_pow(&self, x: usize, m: i64) -> usize {
        let (id, pos) = self.place[x];
        let cycle = &self.cycles[id];
        let len = cycle.len() as i64;
        let idx = (pos as i64 + m).rem_euclid(len);
        cycle[idx as usize]
    }

    pub fn inverse(&self) -> Permutation {
        Permutation::new(self.inverse.clone()).expect("inverse of a bijection")
    }

    /// `g^m` as a permutation.
    pub fn pow(&self, m: i64) -> Permutation {
        let forward = (0..self.len()).map(|x| self.apply_pow(x, m)).collect();
        Permutation::new(forward).expect("power of a bijection")
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.len() != other.len() {
            return Err(Error::SpaceMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Permutation::new(other.forward.iter().map(|&y| self.forward[y]).collect())
    }

    pub fn is_identity(&self) -> bool {
        self.forward.iter().enumerate().all(|(i, &y)| i == y)
    }

    /// Least `k >= 1` with `g^k = id`: the lcm of the cycle lengths.
    /// Saturates at `u64::MAX`.
    pub fn order(&self) -> u64 {
        self.cycles.iter().fold(1u64, |acc, c| {
            let len = c.len() as u64;
            let g = gcd(acc, len);
            (acc / g).checked_mul(len).unwrap_or(u64::MAX)
        })
    }
}

/// Validating constructor tying a permutation to a state space.
pub fn make_permutation(space: &StateSpace, forward: Vec<usize>) -> Result<Permutation> {
    if forward.len() != space.size() {
        return Err(Error::NotBijective(format!(
            "{} entries for a space of {} states",
            forward.len(),
            space.size()
        )));
    }
    Permutation::new(forward)
}

pub fn permutation_order(g: &Permutation) -> u64 {
    g.order()
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.forward.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let forward = Vec::<usize>::deserialize(d)?;
        Permutation::new(forward).map_err(serde::de::Error::custom)
    }
}
