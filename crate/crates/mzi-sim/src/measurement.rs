//! Detector projections, parameterized single-ion measurements, and Pauli
//! corrections on the metastable qubit subspace.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::hilbert::{HybridState, IonLabel, IonLevel, PhotonPath, PhotonSector};

/// Measurement basis for one ion,
///
/// ```text
/// |+'⟩ =  ν|m₊⟩ + μ|m₋⟩
/// |−'⟩ = −μ̄|m₊⟩ + ν̄|m₋⟩
/// ```
///
/// For real ν, μ the second ket reduces to −μ|m₊⟩ + ν|m₋⟩; the conjugated
/// completion keeps the pair orthonormal for complex parameters as well.
/// ν = μ = 1/√2 gives the |±⟩ basis.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct IonBasis {
    nu: C64,
    mu: C64,
}

impl IonBasis {
    pub fn new(nu: C64, mu: C64) -> Result<Self> {
        let norm_sq = nu.norm_sqr() + mu.norm_sqr();
        if (norm_sq - 1.0).abs() > 1e-9 {
            return Err(Error::BasisNotNormalized { norm_sq });
        }
        Ok(IonBasis { nu, mu })
    }

    /// The |±⟩ basis (ν = μ = 1/√2).
    pub fn pm() -> Self {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        IonBasis { nu: h, mu: h }
    }

    pub fn nu(&self) -> C64 {
        self.nu
    }

    pub fn mu(&self) -> C64 {
        self.mu
    }

    /// Ket coefficients (on m₊, m₋) of the two outcome states.
    pub fn ket(&self, outcome: PairSign) -> (C64, C64) {
        match outcome {
            PairSign::Plus => (self.nu, self.mu),
            PairSign::Minus => (-self.mu.conj(), self.nu.conj()),
        }
    }

    /// ⟨outcome|level⟩ for a metastable level.
    fn bra_coeff(&self, outcome: PairSign, level: IonLevel) -> C64 {
        let (on_plus, on_minus) = self.ket(outcome);
        match level {
            IonLevel::MPlus => on_plus.conj(),
            IonLevel::MMinus => on_minus.conj(),
            IonLevel::Ground => C64::new(0.0, 0.0),
        }
    }
}

/// One of the two outcomes of a single-ion measurement.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum PairSign {
    Plus,
    Minus,
}

/// Label of a measurement or detection outcome.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeLabel {
    PhotonUpper,
    PhotonLower,
    NoPhoton,
    PlusPlus,
    PlusMinus,
    MinusPlus,
    MinusMinus,
}

impl OutcomeLabel {
    /// The four ion-pair outcomes in report order.
    pub fn pair_outcomes() -> [OutcomeLabel; 4] {
        [
            OutcomeLabel::PlusPlus,
            OutcomeLabel::PlusMinus,
            OutcomeLabel::MinusPlus,
            OutcomeLabel::MinusMinus,
        ]
    }

    pub fn pair_signs(&self) -> Option<(PairSign, PairSign)> {
        use PairSign::*;
        match self {
            OutcomeLabel::PlusPlus => Some((Plus, Plus)),
            OutcomeLabel::PlusMinus => Some((Plus, Minus)),
            OutcomeLabel::MinusPlus => Some((Minus, Plus)),
            OutcomeLabel::MinusMinus => Some((Minus, Minus)),
            _ => None,
        }
    }
}

/// Single-qubit Pauli operator.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// A Pauli applied to a specific ion (`ion` is a zero-based register index).
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliOp {
    pub op: Pauli,
    pub ion: usize,
}

/// One measurement branch.
///
/// `probability` is conditional on the measured state's norm;
/// `collapsed_state` is normalized (the zero state when the branch is empty).
/// `correction` and `fidelity_vs_target` are filled in by the protocol layer,
/// as is the `success` marker.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeRecord {
    pub label: OutcomeLabel,
    pub probability: f64,
    pub collapsed_state: HybridState,
    pub correction: Option<Vec<PauliOp>>,
    pub fidelity_vs_target: Option<f64>,
    pub success: bool,
}

impl OutcomeRecord {
    fn bare(label: OutcomeLabel, probability: f64, collapsed_state: HybridState) -> Self {
        OutcomeRecord {
            label,
            probability,
            collapsed_state,
            correction: None,
            fidelity_vs_target: None,
            success: false,
        }
    }
}

/// Project onto the three detector outcomes of the interferometer output:
/// photon in the upper port, photon in the lower port, or no photon.
///
/// Detection annihilates the photon, so the collapsed states of the two
/// photon outcomes carry a vacuum photon sector. The lower-port record is
/// the success herald of the protocols. Probabilities are conditional on the
/// input norm and sum to 1.
pub fn detect_output_ports(state: &HybridState) -> [OutcomeRecord; 3] {
    let port = |path: PhotonPath| move |label: &crate::hilbert::BasisLabel| matches!(label.photon, PhotonSector::One { path: p, .. } if p == path);

    let mut records = Vec::with_capacity(3);
    for (label, keep) in [
        (OutcomeLabel::PhotonUpper, Some(PhotonPath::Upper)),
        (OutcomeLabel::PhotonLower, Some(PhotonPath::Lower)),
        (OutcomeLabel::NoPhoton, None),
    ] {
        let (probability, branch) = match keep {
            Some(path) => state.project(port(path)),
            None => state.project(|l| l.photon.is_vacuum()),
        };
        let collapsed = if branch.is_zero() {
            branch
        } else {
            // Absorb the detected photon before renormalizing.
            let absorbed =
                branch.map_terms(|l, a, emit| emit(l.with_photon(PhotonSector::Vacuum), a));
            absorbed.normalized().expect("nonzero branch")
        };
        records.push(OutcomeRecord::bare(label, probability, collapsed));
    }
    records.try_into().expect("three ports")
}

fn require_metastable(state: &HybridState, index: usize) -> Result<()> {
    if index >= state.ion_count() {
        return Err(Error::IonIndexOutOfRange {
            index,
            ion_count: state.ion_count(),
        });
    }
    if state
        .terms()
        .any(|(label, _)| !label.ions[index].is_metastable())
    {
        return Err(Error::IonNotMetastable { index });
    }
    Ok(())
}

/// Projective measurement of ions `i` and `j` in `basis`, returning all four
/// branches with probabilities conditional on the input state's norm.
///
/// Both ions must be inside the metastable qubit subspace on every populated
/// term. The collapsed states keep the measured ions, re-expanded over the
/// metastable levels, so downstream maps see an ordinary state.
pub fn measure_ion_pair(
    state: &HybridState,
    ions: (usize, usize),
    basis: &IonBasis,
) -> Result<[OutcomeRecord; 4]> {
    let (i, j) = ions;
    if i == j {
        return Err(Error::Invariant(
            "measure_ion_pair requires two distinct ions".into(),
        ));
    }
    require_metastable(state, i)?;
    require_metastable(state, j)?;

    let total = state.norm_sq();
    let mut records = Vec::with_capacity(4);
    for label in OutcomeLabel::pair_outcomes() {
        let (sign_i, sign_j) = label.pair_signs().expect("pair outcome");
        let ket_i = basis.ket(sign_i);
        let ket_j = basis.ket(sign_j);
        let branch = state.map_terms(|term, amp, emit| {
            let overlap = basis.bra_coeff(sign_i, term.ions[i].level())
                * basis.bra_coeff(sign_j, term.ions[j].level());
            if overlap.norm() == 0.0 {
                return;
            }
            // Re-expand |outcome_i⟩|outcome_j⟩ over the metastable levels.
            for (level_i, coeff_i) in [(IonLevel::MPlus, ket_i.0), (IonLevel::MMinus, ket_i.1)] {
                for (level_j, coeff_j) in [(IonLevel::MPlus, ket_j.0), (IonLevel::MMinus, ket_j.1)]
                {
                    let out = term
                        .with_ion(i, IonLabel::new(level_i, false).expect("metastable"))
                        .with_ion(j, IonLabel::new(level_j, false).expect("metastable"));
                    emit(out, amp * overlap * coeff_i * coeff_j);
                }
            }
        });
        let probability = if total == 0.0 {
            0.0
        } else {
            branch.norm_sq() / total
        };
        let collapsed = if branch.is_zero() {
            branch
        } else {
            branch.normalized().expect("nonzero branch")
        };
        records.push(OutcomeRecord::bare(label, probability, collapsed));
    }
    Ok(records.try_into().expect("four outcomes"))
}

/// Apply a Pauli to one ion: X swaps m₊ ↔ m₋; Y maps |m₊⟩ → i|m₋⟩ and
/// |m₋⟩ → −i|m₊⟩; Z flips the sign of |m₋⟩.
pub fn apply_pauli(state: &HybridState, ion_index: usize, op: Pauli) -> Result<HybridState> {
    require_metastable(state, ion_index)?;
    Ok(state.map_terms(|label, amp, emit| {
        let level = label.ions[ion_index].level();
        let (new_level, factor) = match (op, level) {
            (Pauli::X, IonLevel::MPlus) => (IonLevel::MMinus, C64::new(1.0, 0.0)),
            (Pauli::X, IonLevel::MMinus) => (IonLevel::MPlus, C64::new(1.0, 0.0)),
            (Pauli::Y, IonLevel::MPlus) => (IonLevel::MMinus, C64::new(0.0, 1.0)),
            (Pauli::Y, IonLevel::MMinus) => (IonLevel::MPlus, C64::new(0.0, -1.0)),
            (Pauli::Z, IonLevel::MPlus) => (IonLevel::MPlus, C64::new(1.0, 0.0)),
            (Pauli::Z, IonLevel::MMinus) => (IonLevel::MMinus, C64::new(-1.0, 0.0)),
            (_, IonLevel::Ground) => unreachable!("metastable checked"),
        };
        emit(
            label.with_ion(
                ion_index,
                IonLabel::new(new_level, false).expect("metastable"),
            ),
            amp * factor,
        );
    }))
}
