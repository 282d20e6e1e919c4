//! Time-inhomogeneous Markov chains obtained by transporting a kernel `K`
//! along the powers of a bijection `g`, and the tools to study their merging.

// `!(x > 0.0)` also rejects NaN, which is the point.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod io;
pub mod kernel;
pub mod matrix;
pub mod merging;
pub mod models;
pub mod permutation;
pub mod sim;
pub mod space;
pub mod spectral;
pub mod wave;

pub use error::{Error, Result};
pub use kernel::{make_kernel, shift_kernel, transport_kernel, MarkovKernel};
pub use matrix::DenseMatrix;
pub use merging::{Distance, MergingReport, MergingTime, Metric};
pub use permutation::{make_permutation, Permutation};
pub use space::{Distribution, StateSpace};
pub use wave::{compose_window, evolve, WaveSystem};
