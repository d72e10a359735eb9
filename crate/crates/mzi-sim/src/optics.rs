//! Photonic primitives: single-photon injection and the 50:50 beam splitter.

use num_complex::Complex64 as C64;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::hilbert::{HybridState, PhotonPath, PhotonSector, Polarization};

/// The fixed 50:50 beam splitter.
///
/// Reflection picks up a π/2 phase (factor i); transmission is in phase:
///
/// ```text
/// a⁺_l → (a⁺_u + i·a⁺_l)/√2        a⁺_u → (a⁺_l + i·a⁺_u)/√2
/// ```
///
/// Polarization is untouched. The same element serves as both splitters of
/// the interferometer; sequencing lives in the protocol pipelines.
#[derive(Copy, Clone, Debug, Default)]
pub struct BeamSplitter;

impl BeamSplitter {
    /// The induced 2×2 matrix on (upper, lower) path amplitudes,
    /// row-major: `m[out][in]`.
    pub fn matrix(&self) -> [[C64; 2]; 2] {
        let t = C64::new(FRAC_1_SQRT_2, 0.0);
        let r = C64::new(0.0, FRAC_1_SQRT_2);
        // out_u = i·in_u + in_l ; out_l = in_u + i·in_l (each times 1/√2)
        [[r, t], [t, r]]
    }

    /// Apply the splitter to every photon-bearing term of `state`.
    pub fn apply(&self, state: &HybridState) -> HybridState {
        let m = self.matrix();
        state.map_terms(|label, amp, emit| match label.photon {
            PhotonSector::Vacuum => emit(label.clone(), amp),
            PhotonSector::One { path, pol } => {
                let input = match path {
                    PhotonPath::Upper => 0,
                    PhotonPath::Lower => 1,
                };
                let upper = label.with_photon(PhotonSector::one(PhotonPath::Upper, pol));
                let lower = label.with_photon(PhotonSector::one(PhotonPath::Lower, pol));
                emit(upper, amp * m[0][input]);
                emit(lower, amp * m[1][input]);
            }
        })
    }
}

/// Attach one photon with the given path and polarization to a state whose
/// photon sector is vacuum everywhere.
pub fn inject_photon(
    state: &HybridState,
    path: PhotonPath,
    pol: Polarization,
) -> Result<HybridState> {
    if state.terms().any(|(label, _)| !label.photon.is_vacuum()) {
        return Err(Error::PhotonAlreadyPresent);
    }
    Ok(state.map_terms(|label, amp, emit| {
        emit(label.with_photon(PhotonSector::one(path, pol)), amp);
    }))
}

/// Beam-splitter action as a free function over the fixed 50:50 element.
pub fn beam_splitter(state: &HybridState) -> HybridState {
    BeamSplitter.apply(state)
}
