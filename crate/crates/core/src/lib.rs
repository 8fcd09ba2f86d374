//! Spectral analysis of linear transport-reaction systems
//!
//! ```text
//! ∂ₜu + diag(v)·∇u = B u    on the d-torus of side length L
//! ```
//!
//! Every Fourier mode `k` evolves independently under the mode matrix
//! `M(k) = −2πi·diag(k·v_j / L) + B`, so the generator spectrum is the closure
//! of the union of the mode spectra and the solution is available in closed
//! form as `û(t, k) = exp(t·M(k))·û(0, k)`.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the command line
//! and parallel sweeps live in the companion `trspec` crate.
//!
//! Module map:
//!
//! - [`linalg`]: small dense complex kernel (eigenvalues, `expm`, characteristic polynomial)
//! - [`model`]: model definition, validation and structural predicates
//! - [`modes`]: mode matrices, spectrum sampling, branch tracking
//! - [`perturb`]: large-|k| eigenvalue series and eventual monotonicity
//! - [`classify`]: Turing / hyperbolic classification and closed-form criteria
//! - [`simulate`]: exact Fourier-space evolution, synthesis and observables

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod classify;
mod error;
pub mod linalg;
pub mod model;
pub mod modes;
pub mod perturb;
pub mod simulate;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, EigenSet, LinalgError, RealMatrix};
pub use model::ModelSpec;
pub use num_complex::Complex64;
