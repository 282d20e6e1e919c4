use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a probability vector.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// An enumerated finite state space `{0, .., size-1}` with optional display labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateSpace {
    size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl StateSpace {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptySpace);
        }
        Ok(Self { size, labels: None })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptySpace);
        }
        let distinct: HashSet<&String> = labels.iter().collect();
        if distinct.len() != labels.len() {
            return Err(Error::BadLabels {
                expected: labels.len(),
                got: distinct.len(),
            });
        }
        Ok(Self {
            size: labels.len(),
            labels: Some(labels),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Display label of a state, falling back to its index.
    pub fn label(&self, state: usize) -> String {
        match &self.labels {
            Some(l) => l[state].clone(),
            None => state.to_string(),
        }
    }

    pub(crate) fn check_same(&self, other: &StateSpace) -> Result<()> {
        if self.size != other.size {
            return Err(Error::SpaceMismatch {
                left: self.size,
                right: other.size,
            });
        }
        Ok(())
    }
}

/// A probability vector over a state space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    weights: Vec<f64>,
}

impl Distribution {
    /// Validates nonnegativity and total mass `1 ± 1e-12`.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptySpace);
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(**w >= 0.0) || !w.is_finite())
        {
            return Err(Error::NotAProbability(format!("weight {w} at state {i}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::NotAProbability(format!("total mass {total}")));
        }
        Ok(Self { weights })
    }

    /// Rescales a nonnegative vector to unit mass. Tiny negative round-off
    /// (above `-1e-14` times the total) is clamped to zero.
    pub fn normalized(mut weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::NotAProbability(format!("total mass {total}")));
        }
        for w in weights.iter_mut() {
            if *w < 0.0 && *w > -1e-14 * total {
                *w = 0.0;
            }
            *w /= total;
        }
        Self::new(weights)
    }

    pub fn uniform(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptySpace);
        }
        Ok(Self {
            weights: vec![1.0 / size as f64; size],
        })
    }

    pub fn point_mass(size: usize, state: usize) -> Result<Self> {
        if state >= size {
            return Err(Error::InvalidArgument(format!(
                "state {state} outside 0..{size}"
            )));
        }
        let mut weights = vec![0.0; size];
        weights[state] = 1.0;
        Ok(Self { weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    #[inline]
    pub fn get(&self, state: usize) -> f64 {
        self.weights[state]
    }

    pub fn max(&self) -> f64 {
        self.weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.weights.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Lowest index attaining the maximum.
    pub fn argmax(&self) -> usize {
        let m = self.max();
        self.weights.iter().position(|w| *w == m).unwrap_or(0)
    }

    /// Lowest index attaining the minimum.
    pub fn argmin(&self) -> usize {
        let m = self.min();
        self.weights.iter().position(|w| *w == m).unwrap_or(0)
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.weights.iter().all(|w| *w > 0.0)
    }

    /// First state with zero mass, if any.
    pub fn first_zero(&self) -> Option<usize> {
        self.weights.iter().position(|w| *w <= 0.0)
    }

    pub(crate) fn require_positive(&self) -> Result<()> {
        match self.first_zero() {
            Some(state) => Err(Error::ZeroWeight { state }),
            None => Ok(()),
        }
    }

    /// Largest coordinatewise deviation.
    pub fn max_abs_diff(&self, other: &Distribution) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }
}
