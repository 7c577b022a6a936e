//! Numerical experiments that separate quantum observables from classical
//! descriptions.
//!
//! The crate provides, in order of dependency:
//!
//! * dense Hermitian linear algebra with a cyclic Jacobi eigensolver
//!   ([`jacobi`], [`operators`]);
//! * two spectral tests telling genuinely quantum observable pairs apart from
//!   commutative ones, plus a randomized witness search ([`qtests`]);
//! * a hidden-variable sampler for single-qubit measurements, its additivity
//!   defect, and correlation experiments with the classical bound 2 and the
//!   quantum maximum 2*sqrt(2) ([`bell`]);
//! * coherent-state quasi-probability representations and the pairing between
//!   densities and observable symbols ([`phase_space`]);
//! * two-mode photon beams: second quantization, moment growth in intensity,
//!   and polarization reconstruction ([`beam`]).

pub mod bell;
pub mod beam;
pub mod error;
pub mod jacobi;
pub mod operators;
pub mod phase_space;
pub mod qtests;
pub mod tol;

pub use error::{Error, Result};
pub use jacobi::{eigh, Eigh};
pub use operators::{
    bloch_state, commutator_norm, expectation, loewner_geq, pauli_observable, tensor,
    BlochVector, DensityState, HermitianOperator, MatrixJson, OrderCheck, Spectrum,
};
