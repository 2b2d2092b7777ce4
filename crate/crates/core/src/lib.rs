//! Passivity analysis for real LTI state-space models.
//!
//! The crate computes KYP certificates from the extremal Riccati solutions, X-passivity
//! radii with their rank-one worst-case perturbations, the optimal robustness margin
//! `Xi` over all state-space realizations, optimally robust port-Hamiltonian
//! realizations, and diagonal-shift perturbations that make a model passive or a
//! matrix stable.
//!
//! All routines are generic over [`Real`] (`f32` or `f64`); the aliases at the crate
//! root fix the scalar to `f64`.

// `!(x > y)` on floats is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distance;
pub mod error;
pub mod io;
pub mod linalg;
pub mod model;
pub mod optimal;
pub mod oracle;
pub mod radius;
pub mod riccati;
pub mod scalar;
pub mod search;

pub use error::{Error, Result};
pub use model::{
    assemble_hamiltonian, assemble_pencil, assemble_w, eval_gamma, from_ph_form, shift_model, transform_to_ph,
    validate_model, Certificate, CertificateClass, FrequencyScan, PHRealization, Pencil, ScanSample, StateSpaceModel,
};
pub use scalar::Real;

/// Double-precision state-space model.
pub type Model = StateSpaceModel<f64>;
/// Double-precision pH realization.
pub type PhModel = PHRealization<f64>;
/// Double-precision certificate.
pub type Cert = Certificate<f64>;
/// Double-precision radius report.
pub type Radius = radius::RadiusReport<f64>;
/// Double-precision `Xi` bracket.
pub type Xi = optimal::XiResult<f64>;
/// Double-precision passivation result.
pub type Passivation = distance::PassivationResult<f64>;
