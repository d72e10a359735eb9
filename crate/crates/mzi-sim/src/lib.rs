//! Deterministic simulator for linear-optical quantum information protocols
//! on trapped ions: teleportation of an unknown ionic qubit, entanglement
//! concentration via swapping, and remote preparation of entangled states,
//! plus a cavity-feasibility calculator for physical rate estimates.
//!
//! The protocols interfere a single σ⁺ photon on a two-arm interferometer
//! whose arms each hold one ion; a click of the lower output detector
//! heralds success, and single-ion measurements replace any joint Bell-state
//! measurement. States are sparse maps from hybrid ion–photon basis labels
//! to complex amplitudes.
//!
//! The [`oracle`] module carries an independent dense-matrix implementation
//! of the same pipelines for differential testing; it shares only the type
//! definitions and the report schema with the sparse engine.

pub mod error;
pub mod feasibility;
pub mod hilbert;
pub mod ion_photon;
pub mod measurement;
pub mod optics;
pub mod oracle;
pub mod protocols;
pub mod report;
pub mod sweep;

pub use error::{Error, Result};
pub use num_complex::Complex64;
