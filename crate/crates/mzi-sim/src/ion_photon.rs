//! Ion–photon scattering at an interferometer arm.
//!
//! An ion sitting in an arm absorbs a photon whose polarization matches its
//! metastable level (σ⁺ ↔ m₊, σ⁻ ↔ m₋), is excited, and decays immediately
//! to the stable ground level while emitting a free-space scattered photon:
//!
//! ```text
//! a⁺_{arm,±}|0⟩ |m±⟩  →  |S⟩|g⟩
//! ```
//!
//! Ions already in the ground level are transparent, as are photons in the
//! other arm or with mismatched polarization. Scattering efficiency is unity
//! here; sub-unit emission probabilities live in the feasibility model.

use crate::error::{Error, Result};
use crate::hilbert::{HybridState, IonLabel, IonLevel, PhotonPath, PhotonSector, Polarization};

fn level_matches(level: IonLevel, pol: Polarization) -> bool {
    matches!(
        (level, pol),
        (IonLevel::MPlus, Polarization::SigmaPlus) | (IonLevel::MMinus, Polarization::SigmaMinus)
    )
}

/// Scatter the photon off ion `ion_index` placed in arm `arm`.
///
/// Terms where the photon occupies `arm` and the ion's level matches the
/// photon polarization turn into vacuum ⊗ scattered-ground; every other term
/// passes through unchanged. Branches whose images coincide add coherently
/// (both metastable levels feed one ground level, so the emitted photon
/// carries no which-level record).
pub fn scatter_arm(state: &HybridState, ion_index: usize, arm: PhotonPath) -> Result<HybridState> {
    if ion_index >= state.ion_count() {
        return Err(Error::IonIndexOutOfRange {
            index: ion_index,
            ion_count: state.ion_count(),
        });
    }
    Ok(state.map_terms(|label, amp, emit| {
        if let PhotonSector::One { path, pol } = label.photon {
            let ion = label.ions[ion_index];
            if path == arm && !ion.scattered() && level_matches(ion.level(), pol) {
                let absorbed = label
                    .with_ion(ion_index, IonLabel::scattered_ground())
                    .with_photon(PhotonSector::Vacuum);
                emit(absorbed, amp);
                return;
            }
        }
        emit(label.clone(), amp);
    }))
}
