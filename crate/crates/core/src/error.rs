use thiserror::Error;

/// Everything that can go wrong while building or analysing a wave system.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("state space must have at least one state")]
    EmptySpace,
    #[error("labels: expected {expected} distinct labels, got {got}")]
    BadLabels { expected: usize, got: usize },
    #[error("matrix has shape {rows}x{cols}, expected {expected}x{expected}")]
    BadShape {
        rows: usize,
        cols: usize,
        expected: usize,
    },
    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("row {row} sums to {sum}, expected 1")]
    RowSumViolation { row: usize, sum: f64 },
    #[error("weights do not form a probability vector: {0}")]
    NotAProbability(String),
    #[error("map is not a bijection: {0}")]
    NotBijective(String),
    #[error("state spaces differ: {left} vs {right} states")]
    SpaceMismatch { left: usize, right: usize },
    #[error("window K_{{{n},{m}}} requested with n > m")]
    WindowInverted { n: usize, m: usize },
    #[error("wave measure has not been attached to the system")]
    WaveMeasureMissing,
    #[error("kernel is not irreducible")]
    NotIrreducible,
    #[error("measure vanishes at state {state}")]
    ZeroWeight { state: usize },
    #[error("state space of size {size} exceeds the dense limit {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("kernel is not self-adjoint on the given measure (defect {defect:e})")]
    NotSelfAdjoint { defect: f64 },
    #[error("kernel is not symmetric (defect {defect:e})")]
    NotSymmetric { defect: f64 },
    #[error("stability constant c = {c} does not certify max/min = {ratio}")]
    StabilityNotCertified { c: f64, ratio: f64 },
    #[error("sequence does not merge in relative-sup: {0}")]
    NotMerging(String),
    #[error("horizon n = {n} must exceed 2T = {two_t}")]
    HorizonTooShort { n: f64, two_t: f64 },
    #[error("invariant measure is uniform; the boundary lemma is vacuous")]
    UniformMeasure,
    #[error("pivot b = {b} is invalid for pair ({x}, {y})")]
    InvalidPivot { x: usize, y: usize, b: usize },
    #[error("perturbation shape violated: {0}")]
    PerturbationShapeViolated(String),
    #[error("perturbation condition ({condition}) violated: {detail}")]
    ConditionViolated { condition: char, detail: String },
    #[error("circle needs an odd number of points, got {0}")]
    EvenN(usize),
    #[error("delta = {delta} outside (0, {max})")]
    DeltaOutOfRange { delta: f64, max: f64 },
    #[error("no simple regular graph with {vertices} vertices and degree {degree}")]
    DegreeInfeasible { vertices: usize, degree: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("numerical routine failed: {0}")]
    Numerical(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
