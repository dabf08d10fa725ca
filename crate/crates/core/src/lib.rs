//! Quench dynamics of the fixed-M Tavis-Cummings model, computed two ways:
//! exact diagonalization and truncated Wigner (classical phase-space) evolution.
//!
//! Energies are in units of ω₀ unless noted; scaled energy is ε = E/(ω₀ j) and
//! scaled time is τ = ω₀ j t.

// `!(a > b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod error;
pub mod hilbert;
pub mod io;
pub mod phase_space;
pub mod protocols;
pub mod qdyn;
pub mod spectral;
pub mod twa;

pub use error::{Error, Result};
pub use hilbert::{EigenSystem, ModelParams, StateCoefficients, SubspaceBasis, TridiagonalHamiltonian};
pub use phase_space::{FieldKind, GaussianSummary, PhaseField, PhaseGrid};
