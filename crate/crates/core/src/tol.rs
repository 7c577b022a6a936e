//! Central numerical tolerances.
//!
//! Everything tunable lives here so tests and callers agree on one set of
//! bounds instead of scattering magic numbers.

/// Max allowed entry of |A - A^H| when accepting a matrix as Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Max allowed |trace - 1| for a density matrix.
pub const TRACE_TOL: f64 = 1e-10;

/// States may have eigenvalues down to -PSD_TOL before being rejected.
pub const PSD_TOL: f64 = 1e-10;

/// Max norm deviation accepted for direction vectors supplied by callers.
pub const UNIT_TOL: f64 = 1e-10;

/// Hard cap on Jacobi sweeps; quadratic convergence makes this generous.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Jacobi stops once the off-diagonal norm drops below this times ||A||_F.
pub const JACOBI_OFF_FACTOR: f64 = 1e-12;

/// Eigenvalues closer than this times max(1, ||A||) merge into one cluster.
pub const SPECTRUM_MERGE_FACTOR: f64 = 1e-8;

/// Default margin below which a spectral or ordering violation is not claimed.
pub const VIOLATION_TOL: f64 = 1e-6;

/// Truncation tails above this are refused for beam and phase-space states.
pub const TAIL_LIMIT: f64 = 1e-8;

/// Pattern-search step is halved until it falls below this, then restarts.
pub const SEARCH_STEP_MIN: f64 = 1e-4;

/// Initial pattern-search step size.
pub const SEARCH_STEP_INIT: f64 = 0.5;

/// Failed perturbations tolerated at one step size before halving.
pub const SEARCH_STALL: usize = 20;

/// Numerical slack for quantities that are exactly zero in infinite precision.
pub const NUMERICAL_SLACK: f64 = 1e-9;
