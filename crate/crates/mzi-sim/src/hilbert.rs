//! Hybrid ion–photon pure states as sparse complex amplitude maps.
//!
//! A basis label is an ordered register of ion labels (index = ion identity)
//! together with the interferometer photon sector. States are immutable
//! values; every operation returns a new state.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Amplitudes with magnitude below this are dropped after each linear map.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

/// Tolerance on the squared norm of a factor passed to [`compose`].
pub const FACTOR_NORM_TOL: f64 = 1e-9;

/// Internal electronic level of a single ion.
///
/// `MPlus` and `MMinus` are the two degenerate metastable levels that encode
/// the qubit; `Ground` is the stable level reached after scattering. The
/// short-lived excited level is never represented: excitation and decay are
/// collapsed into a single scattering step.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IonLevel {
    MPlus,
    MMinus,
    Ground,
}

/// One ion of the register: its level plus a flag recording whether this ion
/// has emitted its free-space scattered photon.
///
/// The scattered photon never re-enters the interferometer; a per-ion flag is
/// enough to keep scattered branches orthogonal. Invariant: `scattered`
/// implies `level == Ground`, enforced at construction.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawIonLabel", into = "RawIonLabel")]
pub struct IonLabel {
    level: IonLevel,
    scattered: bool,
}

#[derive(Copy, Clone, Serialize, Deserialize)]
struct RawIonLabel {
    level: IonLevel,
    scattered: bool,
}

impl From<IonLabel> for RawIonLabel {
    fn from(l: IonLabel) -> Self {
        RawIonLabel {
            level: l.level,
            scattered: l.scattered,
        }
    }
}

impl TryFrom<RawIonLabel> for IonLabel {
    type Error = String;

    fn try_from(raw: RawIonLabel) -> std::result::Result<Self, String> {
        IonLabel::new(raw.level, raw.scattered)
            .map_err(|_| "scattered ion must be in the ground level".to_string())
    }
}

impl IonLabel {
    /// Build a label, rejecting the invalid scattered-but-not-ground case.
    pub fn new(level: IonLevel, scattered: bool) -> Result<Self> {
        if scattered && level != IonLevel::Ground {
            return Err(Error::Invariant(
                "scattered ion must be in the ground level".into(),
            ));
        }
        Ok(IonLabel { level, scattered })
    }

    pub fn m_plus() -> Self {
        IonLabel {
            level: IonLevel::MPlus,
            scattered: false,
        }
    }

    pub fn m_minus() -> Self {
        IonLabel {
            level: IonLevel::MMinus,
            scattered: false,
        }
    }

    pub fn ground() -> Self {
        IonLabel {
            level: IonLevel::Ground,
            scattered: false,
        }
    }

    /// Ground level with the scattered-photon flag set: the |S⟩|g⟩ outcome.
    pub fn scattered_ground() -> Self {
        IonLabel {
            level: IonLevel::Ground,
            scattered: true,
        }
    }

    pub fn level(&self) -> IonLevel {
        self.level
    }

    pub fn scattered(&self) -> bool {
        self.scattered
    }

    /// True when the ion still encodes a qubit (either metastable level,
    /// no scattering event recorded).
    pub fn is_metastable(&self) -> bool {
        !self.scattered && self.level != IonLevel::Ground
    }

    /// All labels permitted by the scattered-implies-ground invariant.
    pub fn all_valid() -> [IonLabel; 4] {
        [
            IonLabel::m_plus(),
            IonLabel::m_minus(),
            IonLabel::ground(),
            IonLabel::scattered_ground(),
        ]
    }
}

/// Interferometer arm.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhotonPath {
    Upper,
    Lower,
}

/// Circular polarization of the interferometer photon.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarization {
    SigmaPlus,
    SigmaMinus,
}

/// Photon sector of a basis label: vacuum, or exactly one photon with a path
/// and a polarization. Multi-photon states are unrepresentable.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhotonSector {
    Vacuum,
    One { path: PhotonPath, pol: Polarization },
}

impl PhotonSector {
    pub fn one(path: PhotonPath, pol: Polarization) -> Self {
        PhotonSector::One { path, pol }
    }

    pub fn is_vacuum(&self) -> bool {
        matches!(self, PhotonSector::Vacuum)
    }

    /// The five representable sectors in canonical order.
    pub fn all() -> [PhotonSector; 5] {
        use PhotonPath::*;
        use Polarization::*;
        [
            PhotonSector::Vacuum,
            PhotonSector::one(Upper, SigmaPlus),
            PhotonSector::one(Upper, SigmaMinus),
            PhotonSector::one(Lower, SigmaPlus),
            PhotonSector::one(Lower, SigmaMinus),
        ]
    }
}

/// Composite basis label: the full ion register in index order, then the
/// photon sector. `Ord` gives the canonical ordering used for serialization.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisLabel {
    pub ions: Vec<IonLabel>,
    pub photon: PhotonSector,
}

impl BasisLabel {
    pub fn new(ions: Vec<IonLabel>, photon: PhotonSector) -> Self {
        BasisLabel { ions, photon }
    }

    pub fn ion_count(&self) -> usize {
        self.ions.len()
    }

    /// Same register with a single ion replaced.
    pub fn with_ion(&self, index: usize, label: IonLabel) -> Self {
        let mut ions = self.ions.clone();
        ions[index] = label;
        BasisLabel {
            ions,
            photon: self.photon,
        }
    }

    /// Same register with the photon sector replaced.
    pub fn with_photon(&self, photon: PhotonSector) -> Self {
        BasisLabel {
            ions: self.ions.clone(),
            photon,
        }
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (k, ion) in self.ions.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            let s = match (ion.level, ion.scattered) {
                (IonLevel::MPlus, _) => "m+",
                (IonLevel::MMinus, _) => "m-",
                (IonLevel::Ground, false) => "g",
                (IonLevel::Ground, true) => "g*",
            };
            write!(f, "{s}")?;
        }
        match self.photon {
            PhotonSector::Vacuum => write!(f, "; vac⟩"),
            PhotonSector::One { path, pol } => {
                let p = match path {
                    PhotonPath::Upper => "u",
                    PhotonPath::Lower => "l",
                };
                let s = match pol {
                    Polarization::SigmaPlus => "+",
                    Polarization::SigmaMinus => "-",
                };
                write!(f, "; {p}{s}⟩")
            }
        }
    }
}

/// Serialized form of one amplitude, flat `re`/`im` per the report schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeRecord {
    pub ions: Vec<IonLabel>,
    pub photon: PhotonSector,
    pub re: f64,
    pub im: f64,
}

/// Sparse pure state over [`BasisLabel`]s.
///
/// A full state carries squared norm 1; post-selected branches carry their
/// branch weight in (0, 1]. The amplitude map never stores entries below
/// [`PRUNE_THRESHOLD`].
#[derive(Clone, Debug, PartialEq)]
pub struct HybridState {
    ion_count: usize,
    amplitudes: BTreeMap<BasisLabel, C64>,
}

impl HybridState {
    /// The zero state on `ion_count` ions (no amplitudes).
    pub fn zero(ion_count: usize) -> Self {
        HybridState {
            ion_count,
            amplitudes: BTreeMap::new(),
        }
    }

    /// Build a state from raw terms, accumulating duplicates and pruning.
    pub fn from_terms<I>(ion_count: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (BasisLabel, C64)>,
    {
        let mut amplitudes: BTreeMap<BasisLabel, C64> = BTreeMap::new();
        for (label, amp) in terms {
            if label.ion_count() != ion_count {
                return Err(Error::IonCountMismatch {
                    expected: ion_count,
                    found: label.ion_count(),
                });
            }
            *amplitudes.entry(label).or_insert(C64::new(0.0, 0.0)) += amp;
        }
        amplitudes.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
        Ok(HybridState {
            ion_count,
            amplitudes,
        })
    }

    pub fn ion_count(&self) -> usize {
        self.ion_count
    }

    pub fn term_count(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_zero(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Iterate terms in canonical label order.
    pub fn terms(&self) -> impl Iterator<Item = (&BasisLabel, &C64)> {
        self.amplitudes.iter()
    }

    /// Amplitude of a label (zero if absent).
    pub fn amplitude(&self, label: &BasisLabel) -> C64 {
        self.amplitudes
            .get(label)
            .copied()
            .unwrap_or(C64::new(0.0, 0.0))
    }

    /// Σ |amplitude|².
    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    /// ⟨self|other⟩ over the shared label set.
    pub fn inner(&self, other: &HybridState) -> Result<C64> {
        if self.ion_count != other.ion_count {
            return Err(Error::IonCountMismatch {
                expected: self.ion_count,
                found: other.ion_count,
            });
        }
        let mut acc = C64::new(0.0, 0.0);
        for (label, amp) in &self.amplitudes {
            acc += amp.conj() * other.amplitude(label);
        }
        Ok(acc)
    }

    /// |⟨self|other⟩|² / (‖self‖² ‖other‖²), insensitive to global phase of
    /// either argument.
    pub fn fidelity_mod_phase(&self, other: &HybridState) -> Result<f64> {
        let na = self.norm_sq();
        let nb = other.norm_sq();
        if na == 0.0 || nb == 0.0 {
            return Err(Error::ZeroNormState);
        }
        let ip = self.inner(other)?;
        Ok(ip.norm_sqr() / (na * nb))
    }

    /// Rescale every amplitude by `factor`.
    pub fn scaled(&self, factor: C64) -> Self {
        let amplitudes = self
            .amplitudes
            .iter()
            .map(|(l, a)| (l.clone(), a * factor))
            .filter(|(_, a)| a.norm() >= PRUNE_THRESHOLD)
            .collect();
        HybridState {
            ion_count: self.ion_count,
            amplitudes,
        }
    }

    /// Unit-norm copy; errors on the zero state.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sq();
        if n == 0.0 {
            return Err(Error::ZeroNormState);
        }
        Ok(self.scaled(C64::new(1.0 / n.sqrt(), 0.0)))
    }

    /// Restrict to the labels satisfying `keep`.
    ///
    /// The branch is left un-renormalized; the returned probability is
    /// ‖branch‖² / ‖self‖² (0 for an empty branch or a zero input). Over any
    /// complete partition of predicates the probabilities sum to 1.
    pub fn project<F>(&self, keep: F) -> (f64, HybridState)
    where
        F: Fn(&BasisLabel) -> bool,
    {
        let amplitudes: BTreeMap<BasisLabel, C64> = self
            .amplitudes
            .iter()
            .filter(|(l, _)| keep(l))
            .map(|(l, a)| (l.clone(), *a))
            .collect();
        let branch = HybridState {
            ion_count: self.ion_count,
            amplitudes,
        };
        let total = self.norm_sq();
        let probability = if total == 0.0 {
            0.0
        } else {
            branch.norm_sq() / total
        };
        (probability, branch)
    }

    /// Apply a term-wise linear map: `f` receives each (label, amplitude)
    /// pair and pushes its image terms into the output accumulator.
    pub(crate) fn map_terms<F>(&self, f: F) -> HybridState
    where
        F: Fn(&BasisLabel, C64, &mut dyn FnMut(BasisLabel, C64)),
    {
        let mut amplitudes: BTreeMap<BasisLabel, C64> = BTreeMap::new();
        for (label, amp) in &self.amplitudes {
            f(label, *amp, &mut |out_label, out_amp| {
                *amplitudes.entry(out_label).or_insert(C64::new(0.0, 0.0)) += out_amp;
            });
        }
        amplitudes.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
        HybridState {
            ion_count: self.ion_count,
            amplitudes,
        }
    }

    /// Largest |a − b| over the union of populated labels.
    pub fn max_amplitude_diff(&self, other: &HybridState) -> f64 {
        let mut max = 0.0_f64;
        for (label, amp) in &self.amplitudes {
            max = max.max((amp - other.amplitude(label)).norm());
        }
        for (label, amp) in &other.amplitudes {
            max = max.max((amp - self.amplitude(label)).norm());
        }
        max
    }

    /// Canonical serialized form, sorted by label order.
    pub fn to_records(&self) -> Vec<AmplitudeRecord> {
        self.amplitudes
            .iter()
            .map(|(l, a)| AmplitudeRecord {
                ions: l.ions.clone(),
                photon: l.photon,
                re: a.re,
                im: a.im,
            })
            .collect()
    }

    /// Inverse of [`HybridState::to_records`].
    pub fn from_records(ion_count: usize, records: &[AmplitudeRecord]) -> Result<Self> {
        HybridState::from_terms(
            ion_count,
            records.iter().map(|r| {
                (
                    BasisLabel::new(r.ions.clone(), r.photon),
                    C64::new(r.re, r.im),
                )
            }),
        )
    }
}

/// One subsystem of a tensor product: a superposition over the levels of a
/// fixed group of ions.
#[derive(Clone, Debug)]
pub struct IonFactor {
    indices: Vec<usize>,
    terms: BTreeMap<Vec<IonLabel>, C64>,
}

impl IonFactor {
    pub fn new(indices: Vec<usize>, terms: Vec<(C64, Vec<IonLabel>)>) -> Result<Self> {
        for k in 1..indices.len() {
            if indices[..k].contains(&indices[k]) {
                return Err(Error::FactorCoverage {
                    index: indices[k],
                    problem: "listed twice within one factor",
                });
            }
        }
        let mut map: BTreeMap<Vec<IonLabel>, C64> = BTreeMap::new();
        for (amp, labels) in terms {
            if labels.len() != indices.len() {
                return Err(Error::Invariant(format!(
                    "factor term assigns {} labels to {} ions",
                    labels.len(),
                    indices.len()
                )));
            }
            *map.entry(labels).or_insert(C64::new(0.0, 0.0)) += amp;
        }
        Ok(IonFactor {
            indices,
            terms: map,
        })
    }

    /// Single ion pinned to one label.
    pub fn basis_state(index: usize, label: IonLabel) -> Self {
        IonFactor {
            indices: vec![index],
            terms: BTreeMap::from([(vec![label], C64::new(1.0, 0.0))]),
        }
    }

    /// Single-ion qubit c₊|m₊⟩ + c₋|m₋⟩.
    pub fn qubit(index: usize, c_plus: C64, c_minus: C64) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![IonLabel::m_plus()], c_plus);
        terms.insert(vec![IonLabel::m_minus()], c_minus);
        IonFactor {
            indices: vec![index],
            terms,
        }
    }

    /// Two-ion correlated pair c₊₊|m₊m₊⟩ + c₋₋|m₋m₋⟩.
    pub fn correlated_pair(i: usize, j: usize, c_plus_plus: C64, c_minus_minus: C64) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![IonLabel::m_plus(), IonLabel::m_plus()], c_plus_plus);
        terms.insert(
            vec![IonLabel::m_minus(), IonLabel::m_minus()],
            c_minus_minus,
        );
        IonFactor {
            indices: vec![i, j],
            terms,
        }
    }

    /// Maximally entangled pair (|m₊m₊⟩ + |m₋m₋⟩)/√2.
    pub fn bell_pair(i: usize, j: usize) -> Self {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::correlated_pair(i, j, h, h)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn norm_sq(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }
}

/// Photon-sector subsystem of a tensor product.
#[derive(Clone, Debug)]
pub struct PhotonFactor {
    terms: BTreeMap<PhotonSector, C64>,
}

impl PhotonFactor {
    pub fn vacuum() -> Self {
        PhotonFactor {
            terms: BTreeMap::from([(PhotonSector::Vacuum, C64::new(1.0, 0.0))]),
        }
    }

    pub fn single(path: PhotonPath, pol: Polarization) -> Self {
        PhotonFactor {
            terms: BTreeMap::from([(PhotonSector::one(path, pol), C64::new(1.0, 0.0))]),
        }
    }

    pub fn new(terms: Vec<(C64, PhotonSector)>) -> Self {
        let mut map: BTreeMap<PhotonSector, C64> = BTreeMap::new();
        for (amp, sector) in terms {
            *map.entry(sector).or_insert(C64::new(0.0, 0.0)) += amp;
        }
        PhotonFactor { terms: map }
    }

    pub fn norm_sq(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }
}

/// Tensor-compose subsystem factors into a full state.
///
/// The ion factors must partition `0..ion_count` exactly, and every factor
/// (including the photon factor) must be normalized within
/// [`FACTOR_NORM_TOL`]. The squared norm of the result is the product of the
/// factor squared norms.
pub fn compose(
    ion_count: usize,
    ion_factors: &[IonFactor],
    photon: &PhotonFactor,
) -> Result<HybridState> {
    for factor in ion_factors {
        let n = factor.norm_sq();
        if (n - 1.0).abs() > FACTOR_NORM_TOL {
            return Err(Error::FactorNotNormalized {
                norm_sq: n,
                tol: FACTOR_NORM_TOL,
            });
        }
    }
    let n = photon.norm_sq();
    if (n - 1.0).abs() > FACTOR_NORM_TOL {
        return Err(Error::FactorNotNormalized {
            norm_sq: n,
            tol: FACTOR_NORM_TOL,
        });
    }
    compose_scaled(ion_count, ion_factors, photon)
}

/// [`compose`] without the per-factor normalization check — the explicit
/// override for deliberately sub-normalized factors. Coverage checks still
/// apply.
pub fn compose_scaled(
    ion_count: usize,
    ion_factors: &[IonFactor],
    photon: &PhotonFactor,
) -> Result<HybridState> {
    let mut owner = vec![false; ion_count];
    for factor in ion_factors {
        for &index in &factor.indices {
            if index >= ion_count {
                return Err(Error::IonIndexOutOfRange { index, ion_count });
            }
            if owner[index] {
                return Err(Error::FactorCoverage {
                    index,
                    problem: "covered twice",
                });
            }
            owner[index] = true;
        }
    }
    if let Some(index) = owner.iter().position(|covered| !covered) {
        return Err(Error::FactorCoverage {
            index,
            problem: "not covered by any factor",
        });
    }

    // Cartesian product over factor terms, starting from the photon sector.
    let mut partial: Vec<(Vec<Option<IonLabel>>, PhotonSector, C64)> = photon
        .terms
        .iter()
        .map(|(&sector, &amp)| (vec![None; ion_count], sector, amp))
        .collect();
    for factor in ion_factors {
        let mut next = Vec::with_capacity(partial.len() * factor.terms.len());
        for (ions, sector, amp) in &partial {
            for (labels, c) in &factor.terms {
                let mut ions = ions.clone();
                for (&index, &label) in factor.indices.iter().zip(labels) {
                    ions[index] = Some(label);
                }
                next.push((ions, *sector, amp * c));
            }
        }
        partial = next;
    }

    HybridState::from_terms(
        ion_count,
        partial.into_iter().map(|(ions, sector, amp)| {
            let ions: Vec<IonLabel> = ions
                .into_iter()
                .map(|l| l.expect("coverage checked"))
                .collect();
            (BasisLabel::new(ions, sector), amp)
        }),
    )
}
