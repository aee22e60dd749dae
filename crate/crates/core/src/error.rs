use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Operand shapes do not fit together.
    DimensionMismatch(String),
    /// A tensor factor specification does not match the matrix it describes.
    InvalidDims(String),
    /// Hermiticity defect larger than the symmetrization threshold.
    NotHermitian { defect: f64 },
    /// Minimum eigenvalue below the PSD tolerance.
    NotPositive { min_eigenvalue: f64 },
    /// Kraus operators fail `Σ K†K = I`.
    NotTracePreserving { residual: f64 },
    /// Scalar argument outside its admissible range.
    OutOfRange(String),
    /// Constraint matrices of an SDP are linearly dependent.
    RankDeficient { constraint: usize, pivot: f64 },
    /// The SDP solver stopped without an optimality certificate.
    Solver(String),
    /// Requested exact separable-cone mode outside the `|A|·|B| ≤ 6` regime.
    ExactModeUnavailable { product: usize },
    /// Operator outside `PPT′`: not PSD, or `‖T_B σ‖₁ > 1`.
    NotPptPrime { trace_norm: f64 },
    /// Eigenvalue iteration failed to converge.
    NoConvergence,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch(msg) => write!(f, "dimension mismatch: {msg}"),
            Error::InvalidDims(msg) => write!(f, "invalid subsystem dimensions: {msg}"),
            Error::NotHermitian { defect } => {
                write!(f, "matrix is not Hermitian (defect {defect:.3e})")
            }
            Error::NotPositive { min_eigenvalue } => {
                write!(f, "matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")
            }
            Error::NotTracePreserving { residual } => {
                write!(f, "Kraus operators are not trace preserving (residual {residual:.3e})")
            }
            Error::OutOfRange(msg) => write!(f, "parameter out of range: {msg}"),
            Error::RankDeficient { constraint, pivot } => write!(
                f,
                "constraint {constraint} is linearly dependent on the others (pivot {pivot:.3e})"
            ),
            Error::NotPptPrime { trace_norm } => {
                write!(f, "operator is not in PPT' (partial-transpose trace norm {trace_norm:.6})")
            }
            Error::Solver(msg) => write!(f, "solver failure: {msg}"),
            Error::ExactModeUnavailable { product } => write!(
                f,
                "exact separable-cone mode needs |A|·|B| <= 6, got {product}"
            ),
            Error::NoConvergence => write!(f, "eigenvalue iteration did not converge"),
        }
    }
}

impl core::error::Error for Error {}
