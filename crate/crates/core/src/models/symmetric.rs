//! Walks on the symmetric group.
//!
//! Elements are one-line arrays over `0..n` (card `i` is `i - 1`), indexed in
//! lexicographic order. The product `x * y` is the composition `y ∘ x`, so a
//! generator `h` acts on the right: `x -> x * h`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::MarkovKernel;
use crate::permutation::Permutation;
use crate::space::StateSpace;
use crate::wave::WaveSystem;

/// Largest group order accepted (`7!`).
pub const MAX_GROUP_ORDER: usize = 5040;

#[derive(Debug, Clone)]
pub struct SymmetricGroup {
    n: usize,
    elements: Vec<Vec<u8>>,
    factorials: Vec<usize>,
}

impl SymmetricGroup {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySpace);
        }
        let mut factorials = vec![1usize; n + 1];
        for i in 1..=n {
            factorials[i] = factorials[i - 1].saturating_mul(i);
        }
        if factorials[n] > MAX_GROUP_ORDER {
            return Err(Error::TooLarge {
                size: factorials[n],
                limit: MAX_GROUP_ORDER,
            });
        }
        let mut group = Self {
            n,
            elements: Vec::new(),
            factorials,
        };
        group.elements = (0..group.order()).map(|r| group.unrank(r)).collect();
        Ok(group)
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.factorials[self.n]
    }

    pub fn element(&self, index: usize) -> &[u8] {
        &self.elements[index]
    }

    fn unrank(&self, mut r: usize) -> Vec<u8> {
        let mut pool: Vec<u8> = (0..self.n as u8).collect();
        let mut out = Vec::with_capacity(self.n);
        for i in (0..self.n).rev() {
            let f = self.factorials[i];
            out.push(pool.remove(r / f));
            r %= f;
        }
        out
    }

    /// Lexicographic index of a one-line array (Lehmer code).
    pub fn rank(&self, p: &[u8]) -> Result<usize> {
        if p.len() != self.n {
            return Err(Error::InvalidArgument(format!("expected {} entries, got {}", self.n, p.len())));
        }
        let mut seen = vec![false; self.n];
        let mut r = 0;
        for (i, &v) in p.iter().enumerate() {
            let v = v as usize;
            if v >= self.n || seen[v] {
                return Err(Error::NotBijective(format!("{p:?} is not a permutation")));
            }
            seen[v] = true;
            let smaller_unused = (0..v).filter(|&u| !seen[u]).count();
            r += smaller_unused * self.factorials[self.n - 1 - i];
        }
        Ok(r)
    }

    pub fn identity(&self) -> usize {
        0
    }

    /// `x * y = y ∘ x`.
    pub fn mul(&self, x: usize, y: usize) -> usize {
        let (a, b) = (&self.elements[x], &self.elements[y]);
        let prod: Vec<u8> = a.iter().map(|&i| b[i as usize]).collect();
        self.rank(&prod).expect("product of permutations")
    }

    pub fn inverse(&self, x: usize) -> usize {
        let a = &self.elements[x];
        let mut inv = vec![0u8; self.n];
        for (i, &v) in a.iter().enumerate() {
            inv[v as usize] = i as u8;
        }
        self.rank(&inv).expect("inverse of a permutation")
    }

    /// Element from 1-based cycle notation, e.g. `&[1, 2, 3]` for `(1 2 3)`.
    pub fn cycle(&self, cycle: &[usize]) -> Result<usize> {
        let mut p: Vec<u8> = (0..self.n as u8).collect();
        let mut seen = vec![false; self.n + 1];
        for &c in cycle {
            if c == 0 || c > self.n || seen[c] {
                return Err(Error::InvalidArgument(format!("bad cycle {cycle:?}")));
            }
            seen[c] = true;
        }
        for (i, &c) in cycle.iter().enumerate() {
            let next = cycle[(i + 1) % cycle.len()];
            p[c - 1] = (next - 1) as u8;
        }
        self.rank(&p)
    }

    /// Transposition `(i j)`, 1-based; `(i i)` is the identity.
    pub fn transposition(&self, i: usize, j: usize) -> Result<usize> {
        if i == j {
            if i == 0 || i > self.n {
                return Err(Error::InvalidArgument(format!("bad transposition ({i} {j})")));
            }
            return Ok(self.identity());
        }
        self.cycle(&[i, j])
    }

    /// One-line label with 1-based entries, e.g. `"2134"`.
    pub fn label(&self, x: usize) -> String {
        let sep = if self.n > 9 { "," } else { "" };
        self.elements[x]
            .iter()
            .map(|v| (v + 1).to_string())
            .collect::<Vec<_>>()
            .join(sep)
    }

    pub fn space(&self) -> Result<StateSpace> {
        StateSpace::with_labels((0..self.order()).map(|x| self.label(x)).collect())
    }

    /// `x -> h x h^{-1}`.
    pub fn conjugation(&self, h: usize) -> Result<Permutation> {
        let h_inv = self.inverse(h);
        Permutation::new((0..self.order()).map(|x| self.mul(self.mul(h, x), h_inv)).collect())
    }
}

/// Right-invariant walk `K(x, x h) = w(h)`.
#[derive(Debug, Clone, Serialize)]
pub struct GroupWalkSpec {
    pub n: usize,
    /// `(element index, weight)`; repeated elements add up.
    pub generator_weights: Vec<(usize, f64)>,
}

pub fn group_walk(group: &SymmetricGroup, spec: &GroupWalkSpec) -> Result<MarkovKernel> {
    if spec.n != group.degree() {
        return Err(Error::SpaceMismatch {
            left: group.degree(),
            right: spec.n,
        });
    }
    let total: f64 = spec.generator_weights.iter().map(|(_, w)| w).sum();
    if (total - 1.0).abs() > 1e-12 || spec.generator_weights.iter().any(|(_, w)| *w < 0.0) {
        return Err(Error::NotAProbability(format!("generator weights sum to {total}")));
    }
    if let Some((h, _)) = spec.generator_weights.iter().find(|(h, _)| *h >= group.order()) {
        return Err(Error::InvalidArgument(format!("generator {h} outside the group")));
    }
    let rows = (0..group.order())
        .map(|x| spec.generator_weights.iter().map(|&(h, w)| (group.mul(x, h), w)).collect())
        .collect();
    MarkovKernel::from_sparse_rows(group.space()?, rows)
}

fn check_degree(n: usize) -> Result<()> {
    if !(3..=7).contains(&n) {
        return Err(Error::InvalidArgument(format!("deck size {n} outside 3..=7")));
    }
    Ok(())
}

/// `K(x, y) = 1/2` for `x^{-1} y` in `{sigma, sigma'}` with
/// `sigma = (n, n-1, .., 1)`, `sigma' = (n-1, .., 1)`, driven by conjugation
/// with the reversal `a(i) = n - i + 1`. `K~` is reducible here, so no wave
/// measure is attached.
pub fn deck_reversal_system(n: usize) -> Result<WaveSystem> {
    check_degree(n)?;
    let group = SymmetricGroup::new(n)?;
    let sigma = group.cycle(&(1..=n).rev().collect::<Vec<_>>())?;
    let sigma_p = group.cycle(&(1..n).rev().collect::<Vec<_>>())?;
    let reversal: Vec<u8> = (0..n as u8).rev().collect();
    let a = group.rank(&reversal)?;
    let k = group_walk(
        &group,
        &GroupWalkSpec {
            n,
            generator_weights: vec![(sigma, 0.5), (sigma_p, 0.5)],
        },
    )?;
    WaveSystem::new(k, group.conjugation(a)?)
}

/// Transpose-top-with-random `K(x, x (1 j)) = 1/n`, `j = 1..n`, driven by
/// conjugation with `sigma = (1 2 .. n)`.
pub fn cyclic_to_random_system(n: usize) -> Result<WaveSystem> {
    check_degree(n)?;
    let group = SymmetricGroup::new(n)?;
    let w = 1.0 / n as f64;
    let generators = (1..=n)
        .map(|j| Ok((group.transposition(1, j)?, w)))
        .collect::<Result<Vec<_>>>()?;
    let k = group_walk(
        &group,
        &GroupWalkSpec {
            n,
            generator_weights: generators,
        },
    )?;
    let sigma = group.cycle(&(1..=n).collect::<Vec<_>>())?;
    WaveSystem::new(k, group.conjugation(sigma)?)?.with_stationary_wave()
}

/// Lazy transpose-top-with-random `Q` with extra holding `delta` at `rho`.
#[derive(Debug, Clone)]
pub struct StickyPermutation {
    pub system: WaveSystem,
    pub q: MarkovKernel,
    pub group: SymmetricGroup,
    /// Index of the sticky element.
    pub rho: usize,
    pub delta: f64,
}

/// `Q(x,x) = (n+1)/(2n)`, `Q(x, x(1 j)) = 1/(2n)` for `j >= 2`;
/// `K(rho, rho) = Q(rho, rho) + delta`, `K(rho, rho(1 j)) = 1/(2n) - delta/(n-1)`,
/// `K = Q` on other rows; `g` is conjugation by `(1 2 .. n)`.
pub fn sticky_permutation_system(n: usize, rho: usize, delta: f64) -> Result<StickyPermutation> {
    check_degree(n)?;
    let max = (n as f64 - 1.0) / (2.0 * n as f64);
    if !(delta > 0.0 && delta < max) {
        return Err(Error::DeltaOutOfRange { delta, max });
    }
    let group = SymmetricGroup::new(n)?;
    if rho >= group.order() {
        return Err(Error::InvalidArgument(format!("element {rho} outside the group")));
    }
    let nf = n as f64;
    let mut generators = vec![(group.identity(), (nf + 1.0) / (2.0 * nf))];
    for j in 2..=n {
        generators.push((group.transposition(1, j)?, 1.0 / (2.0 * nf)));
    }
    let q = group_walk(
        &group,
        &GroupWalkSpec {
            n,
            generator_weights: generators.clone(),
        },
    )?;
    let rows = (0..group.order())
        .map(|x| {
            generators
                .iter()
                .map(|&(h, w)| {
                    let v = match (x == rho, h == group.identity()) {
                        (false, _) => w,
                        (true, true) => w + delta,
                        (true, false) => w - delta / (nf - 1.0),
                    };
                    (group.mul(x, h), v)
                })
                .collect()
        })
        .collect();
    let k = MarkovKernel::from_sparse_rows(group.space()?, rows)?;
    let sigma = group.cycle(&(1..=n).collect::<Vec<_>>())?;
    let system = WaveSystem::new(k, group.conjugation(sigma)?)?.with_stationary_wave()?;
    Ok(StickyPermutation {
        system,
        q,
        group,
        rho,
        delta,
    })
}
