//! Trotterized kicked-top dynamics, order-by-order learning of the Floquet
//! Hamiltonian, and quantum-chaos diagnostics for a single collective spin.
//!
//! The crate is organized around the pipeline
//!
//! 1. [`spin`] — dense collective-spin operators, coherent states, and
//!    hermitian matrix exponentials,
//! 2. [`kicked_top`] — component Hamiltonians, two- and three-step Floquet
//!    operators, and stroboscopic evolution,
//! 3. [`magnus`] — Floquet-Magnus terms, ansatz operator sets, and projection
//!    of truncated generators onto ansatz coefficients,
//! 4. [`diagnostics`] — simulation accuracy, eigenphase spacing ratio, and
//!    participation ratio,
//! 5. [`learning`] — the energy-conservation reconstruction protocol built on
//!    the smallest singular value of a constraint matrix,
//! 6. [`rmt`] — circular-unitary-ensemble reference values for the learning
//!    residual, by closed form, spherical quadrature, and Monte Carlo.

extern crate blas_src;
extern crate openblas_src;

pub mod analysis;
pub mod diagnostics;
pub mod error;
pub mod kicked_top;
pub mod learning;
pub mod magnus;
pub mod rmt;
pub mod spin;

pub use error::Error;
pub use kicked_top::{FloquetVariant, ModelParams, TrotterStep};
pub use learning::{ConstraintMatrix, ReconstructionResult};
pub use magnus::{AnsatzSet, FmCoefficients};
pub use rmt::QMatrix;
pub use spin::{CMat, CVec, SpinSize, c64};

/// Convenience result alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
