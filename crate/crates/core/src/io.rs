//! JSON interchange for kernels: `{size, labels?, triplets: [[row, col, value], ..]}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::MarkovKernel;
use crate::permutation::Permutation;
use crate::space::{Distribution, StateSpace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelDocument {
    pub size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub triplets: Vec<(usize, usize, f64)>,
}

impl KernelDocument {
    pub fn from_kernel(k: &MarkovKernel) -> Self {
        let triplets = (0..k.size())
            .flat_map(|x| k.row(x).map(move |(y, v)| (x, y, v)))
            .collect();
        Self {
            size: k.size(),
            labels: k.space().labels().map(|l| l.to_vec()),
            triplets,
        }
    }

    /// Validates shape and row-stochasticity.
    pub fn to_kernel(&self) -> Result<MarkovKernel> {
        let space = match &self.labels {
            Some(labels) => {
                if labels.len() != self.size {
                    return Err(Error::BadLabels {
                        expected: self.size,
                        got: labels.len(),
                    });
                }
                StateSpace::with_labels(labels.clone())?
            }
            None => StateSpace::new(self.size)?,
        };
        let mut rows = vec![Vec::new(); self.size];
        for &(x, y, v) in &self.triplets {
            if x >= self.size || y >= self.size {
                return Err(Error::BadShape {
                    rows: x + 1,
                    cols: y + 1,
                    expected: self.size,
                });
            }
            rows[x].push((y, v));
        }
        MarkovKernel::from_sparse_rows(space, rows)
    }
}

pub fn kernel_from_json(text: &str) -> Result<MarkovKernel> {
    let doc: KernelDocument = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    doc.to_kernel()
}

pub fn kernel_to_json(k: &MarkovKernel) -> String {
    serde_json::to_string_pretty(&KernelDocument::from_kernel(k)).expect("kernel document serializes")
}

pub fn permutation_from_json(text: &str) -> Result<Permutation> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

/// `state,<column>` rows, e.g. `state,mass`.
pub fn distribution_csv(d: &Distribution, column: &str) -> String {
    let mut out = format!("state,{column}\n");
    for (x, w) in d.weights().iter().enumerate() {
        out.push_str(&format!("{x},{w}\n"));
    }
    out
}
