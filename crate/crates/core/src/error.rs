use thiserror::Error;

/// Crate-wide error type.
///
/// Variants split into two families: input validation (bad matrices, bad
/// vectors, unusable parameters) and numerical outcomes (solver did not
/// converge, a quadrature or truncation bound was exceeded). The
/// [`Error::is_validation`] predicate tells the two apart, which is what the
/// command-line frontend uses to pick its exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max |A - A^H| entry {max_deviation:.3e})")]
    NotHermitian { max_deviation: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {residual:.3e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("state trace is {trace:.12}, expected 1")]
    InvalidTrace { trace: f64 },

    #[error("state is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("Bloch vector has norm {norm:.6}, which exceeds 1")]
    BlochNormExceeded { norm: f64 },

    #[error("expected a unit vector, got norm {norm:.6}")]
    NotUnitVector { norm: f64 },

    #[error("premise violated: {0}")]
    Premise(String),

    #[error("state list is empty")]
    EmptyStateList,

    #[error("|alpha|^2 = {alpha_sq:.3} is outside the trusted disc for cutoff {cutoff}; need cutoff >= {required}")]
    AlphaOutsideValidity {
        alpha_sq: f64,
        cutoff: usize,
        required: usize,
    },

    #[error("truncation tail bound {tail:.3e} exceeds {limit:.3e}; increase the cutoff")]
    TailBound { tail: f64, limit: f64 },

    #[error("grid too coarse: quadrature error estimate {estimated:.3e} above tolerance {tolerance:.3e}")]
    GridTooCoarse { estimated: f64, tolerance: f64 },

    #[error("cutoff {cutoff} too small, need at least {required}")]
    CutoffTooSmall { cutoff: usize, required: usize },

    #[error("beam has zero intensity")]
    ZeroIntensityBeam,

    #[error("no finite polynomial phase-space symbol is available for `{0}`")]
    UnsupportedSymbol(String),

    #[error("{what}: value {value:.9e} violates bound {bound:.9e}")]
    Tolerance {
        what: String,
        value: f64,
        bound: f64,
    },

    #[error("invalid matrix JSON at `{path}`: {message}")]
    MatrixJson { path: String, message: String },
}

impl Error {
    /// True when the error describes unusable input rather than a numerical
    /// procedure that ran and failed its accuracy or convergence target.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::NoConvergence { .. } | Error::GridTooCoarse { .. } | Error::Tolerance { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
