use alloc::string::String;

use crate::linalg::LinalgError;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("dimension mismatch in {field}: expected {expected}, got {got}")]
    DimensionMismatch {
        field: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("torus side length must be positive, got {0}")]
    NonPositiveLength(f64),
    #[error("killing rate must be positive, got {0}")]
    NonPositiveDelta(f64),
    #[error("velocities are not pairwise distinct (minimum gap {gap:e})")]
    DegenerateVelocities { gap: f64 },
    #[error("exact rational velocities required: {0}")]
    IrrationalInputUnsupported(String),
    #[error("grid size must be even, got {0}")]
    OddGrid(usize),
    #[error("mode {k} is below the perturbation validity threshold {k_pert}")]
    BelowThreshold { k: i64, k_pert: u64 },
    #[error("series order {order} outside 1..={max}")]
    OrderTooLarge { order: usize, max: usize },
    #[error("precondition not met: {0}")]
    PreconditionUnmet(&'static str),
    #[error("speeds and turning rates must be positive")]
    NonPositiveRates,
    #[error("Goldstein-Kac model with non-positive rate {0} is unstable")]
    NonPositiveLambda(f64),
    #[error("grid of {got} points too coarse for cutoff {k}; need at least {need}")]
    GridTooCoarse { got: usize, need: usize, k: usize },
    #[error("synthesized field has imaginary residue {residue:e}")]
    ImaginaryResidue { residue: f64 },
    #[error("coefficients violate conjugate symmetry at mode {0}")]
    RealityViolation(String),
    #[error("degenerate data: {0}")]
    DegenerateData(&'static str),
    #[error("only supported in one space dimension, got d = {0}")]
    UnsupportedDimension(usize),
    #[error("arithmetic overflow while computing {0}")]
    Overflow(&'static str),
}
