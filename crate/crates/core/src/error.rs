use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (largest defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch { expected: (usize, usize), found: (usize, usize) },

    #[error("basis digit {0} is not 0 or 1")]
    InvalidBit(u8),

    #[error("invalid qubit subset: {0}")]
    InvalidSubset(String),

    #[error("mixture weight {0} outside [0, 1]")]
    InvalidWeight(f64),

    #[error("not a density matrix: {0}")]
    InvalidState(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error(
        "state corrupted at t = {time}: trace deviation {trace_deviation:.3e}, \
         minimum eigenvalue {min_eigenvalue:.3e}"
    )]
    StateCorrupted { time: f64, trace_deviation: f64, min_eigenvalue: f64 },

    #[error("post-selection probability {0:.3e} is too small to renormalize")]
    ZeroProbability(f64),

    #[error("base parameters are infeasible before the bisection starts (negativity {0:.3e})")]
    BaseInfeasible(f64),

    #[error("feasibility is not monotone: boundary {boundary}, but probe {probe} is feasible")]
    MonotonicityViolation { boundary: f64, probe: f64 },

    #[error("no infeasible upper bracket found up to gamma = {0}")]
    NoUpperBound(f64),
}
