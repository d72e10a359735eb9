//! Independent dense reference implementation for differential testing.
//!
//! Every linear map is an explicit dense matrix over an exhaustive basis
//! enumeration, filled element by element from the operator definitions.
//! Nothing here calls into the sparse engine's map code; only the label
//! types and the report schema are shared, so a bug in one path cannot hide
//! in the other.

use num_complex::Complex64 as C64;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::hilbert::{
    BasisLabel, HybridState, IonLabel, IonLevel, PhotonPath, PhotonSector, Polarization,
};
use crate::measurement::{OutcomeLabel, OutcomeRecord, Pauli, PauliOp};
use crate::protocols::{
    ConcentrateInputs, RemotePrepareInputs, TeleportInputs, INPUT_NORM_TOL, RELAY_ION_NOTE,
    RSP_TARGET_NOTE, SWAP_TARGET_NOTE, TELEPORT_ION_NOTE, TELEPORT_TARGET_NOTE,
};
use crate::report::{ComplexIo, ProtocolReport, ReportBuilder};

/// Dense states stay tractable up to four ions (4⁴ · 5 = 1280 dimensions).
pub const MAX_IONS: usize = 4;

/// Exhaustive enumeration of all basis labels for a fixed ion count, sorted
/// in the canonical label order so indices are bijective with the sparse
/// representation.
pub struct LabelSpace {
    ion_count: usize,
    labels: Vec<BasisLabel>,
    index: BTreeMap<BasisLabel, usize>,
}

impl LabelSpace {
    pub fn new(ion_count: usize) -> Result<Self> {
        if ion_count == 0 || ion_count > MAX_IONS {
            return Err(Error::IonIndexOutOfRange {
                index: ion_count,
                ion_count: MAX_IONS,
            });
        }
        let ion_choices = IonLabel::all_valid();
        let mut registers: Vec<Vec<IonLabel>> = vec![Vec::new()];
        for _ in 0..ion_count {
            let mut next = Vec::with_capacity(registers.len() * ion_choices.len());
            for register in &registers {
                for &ion in &ion_choices {
                    let mut extended = register.clone();
                    extended.push(ion);
                    next.push(extended);
                }
            }
            registers = next;
        }
        let mut labels = Vec::with_capacity(registers.len() * 5);
        for register in registers {
            for photon in PhotonSector::all() {
                labels.push(BasisLabel::new(register.clone(), photon));
            }
        }
        labels.sort();
        let index = labels
            .iter()
            .enumerate()
            .map(|(k, l)| (l.clone(), k))
            .collect();
        Ok(LabelSpace {
            ion_count,
            labels,
            index,
        })
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn ion_count(&self) -> usize {
        self.ion_count
    }

    pub fn label(&self, index: usize) -> &BasisLabel {
        &self.labels[index]
    }

    pub fn index_of(&self, label: &BasisLabel) -> usize {
        self.index[label]
    }

    /// Lift a dense vector back into the sparse representation.
    pub fn to_state(&self, vector: &[C64]) -> HybridState {
        HybridState::from_terms(
            self.ion_count,
            vector
                .iter()
                .enumerate()
                .map(|(k, &amp)| (self.labels[k].clone(), amp)),
        )
        .expect("labels match ion count")
    }
}

/// Column-major dense complex matrix.
pub struct DenseMatrix {
    dim: usize,
    cols: Vec<Vec<C64>>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        DenseMatrix {
            dim,
            cols: vec![vec![C64::new(0.0, 0.0); dim]; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.cols[col][row] = value;
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.cols[col][row]
    }

    /// Matrix–vector product. Zero input entries contribute nothing, so
    /// their columns are skipped; the result is the full product.
    pub fn mul_vec(&self, input: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim];
        for (col, &x) in input.iter().enumerate() {
            if x == C64::new(0.0, 0.0) {
                continue;
            }
            for (row, value) in self.cols[col].iter().enumerate() {
                out[row] += value * x;
            }
        }
        out
    }

    /// ⟨column a, column b⟩ — the (a, b) entry of M†M.
    pub fn column_inner(&self, a: usize, b: usize) -> C64 {
        self.cols[a]
            .iter()
            .zip(&self.cols[b])
            .map(|(x, y)| x.conj() * y)
            .sum()
    }
}

pub fn vec_norm_sq(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub fn vec_inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn vec_normalize(v: &[C64]) -> Vec<C64> {
    let n = vec_norm_sq(v).sqrt();
    v.iter().map(|z| z / n).collect()
}

/// Beam splitter: lower input → (upper + i·lower)/√2, upper input →
/// (lower + i·upper)/√2, polarization and ions untouched.
pub fn beam_splitter_matrix(space: &LabelSpace) -> DenseMatrix {
    let t = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let r = C64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
    let mut m = DenseMatrix::zeros(space.dim());
    for col in 0..space.dim() {
        let label = space.label(col);
        match label.photon {
            PhotonSector::Vacuum => m.set(col, col, C64::new(1.0, 0.0)),
            PhotonSector::One { path, pol } => {
                let upper =
                    space.index_of(&label.with_photon(PhotonSector::one(PhotonPath::Upper, pol)));
                let lower =
                    space.index_of(&label.with_photon(PhotonSector::one(PhotonPath::Lower, pol)));
                match path {
                    PhotonPath::Lower => {
                        m.set(upper, col, t);
                        m.set(lower, col, r);
                    }
                    PhotonPath::Upper => {
                        m.set(lower, col, t);
                        m.set(upper, col, r);
                    }
                }
            }
        }
    }
    m
}

fn pol_matches(level: IonLevel, pol: Polarization) -> bool {
    matches!(
        (level, pol),
        (IonLevel::MPlus, Polarization::SigmaPlus) | (IonLevel::MMinus, Polarization::SigmaMinus)
    )
}

/// Scattering at one arm: a matched ion absorbs the photon and ends in the
/// scattered ground label; every other basis vector is fixed.
pub fn scatter_matrix(space: &LabelSpace, ion: usize, arm: PhotonPath) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(space.dim());
    for col in 0..space.dim() {
        let label = space.label(col);
        let scatters = match label.photon {
            PhotonSector::One { path, pol } => {
                path == arm
                    && !label.ions[ion].scattered()
                    && pol_matches(label.ions[ion].level(), pol)
            }
            PhotonSector::Vacuum => false,
        };
        if scatters {
            let target = label
                .with_ion(ion, IonLabel::scattered_ground())
                .with_photon(PhotonSector::Vacuum);
            m.set(space.index_of(&target), col, C64::new(1.0, 0.0));
        } else {
            m.set(col, col, C64::new(1.0, 0.0));
        }
    }
    m
}

/// Photon injection: vacuum labels gain the given photon; columns of
/// already-occupied labels are zero (the pipeline checks the precondition).
pub fn inject_matrix(space: &LabelSpace, path: PhotonPath, pol: Polarization) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(space.dim());
    for col in 0..space.dim() {
        let label = space.label(col);
        if label.photon.is_vacuum() {
            let target = label.with_photon(PhotonSector::one(path, pol));
            m.set(space.index_of(&target), col, C64::new(1.0, 0.0));
        }
    }
    m
}

/// Detector outcome selected by a port projector.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Port {
    Upper,
    Lower,
    NoPhoton,
}

/// Diagonal projector onto one detector outcome.
pub fn port_projector(space: &LabelSpace, port: Port) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(space.dim());
    for col in 0..space.dim() {
        let keep = matches!(
            (space.label(col).photon, port),
            (PhotonSector::Vacuum, Port::NoPhoton)
                | (
                    PhotonSector::One {
                        path: PhotonPath::Upper,
                        ..
                    },
                    Port::Upper
                )
                | (
                    PhotonSector::One {
                        path: PhotonPath::Lower,
                        ..
                    },
                    Port::Lower
                )
        );
        if keep {
            m.set(col, col, C64::new(1.0, 0.0));
        }
    }
    m
}

/// Photodetection sink: any surviving photon label is mapped to its vacuum
/// counterpart (the detector absorbs the photon).
pub fn photon_absorb_matrix(space: &LabelSpace) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(space.dim());
    for col in 0..space.dim() {
        let label = space.label(col);
        let target = match label.photon {
            PhotonSector::Vacuum => col,
            PhotonSector::One { .. } => space.index_of(&label.with_photon(PhotonSector::Vacuum)),
        };
        m.set(target, col, C64::new(1.0, 0.0));
    }
    m
}

/// Measurement kets rebuilt locally: |+'⟩ = ν|m₊⟩ + μ|m₋⟩ and
/// |−'⟩ = −μ̄|m₊⟩ + ν̄|m₋⟩.
#[derive(Copy, Clone)]
pub struct DenseBasis {
    pub nu: C64,
    pub mu: C64,
}

impl DenseBasis {
    pub fn pm() -> Self {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        DenseBasis { nu: h, mu: h }
    }

    /// Ket coefficients on (m₊, m₋) for outcome sign `plus`.
    fn ket(&self, plus: bool) -> (C64, C64) {
        if plus {
            (self.nu, self.mu)
        } else {
            (-self.mu.conj(), self.nu.conj())
        }
    }

    fn ket_coeff(&self, plus: bool, level: IonLevel) -> C64 {
        let (on_plus, on_minus) = self.ket(plus);
        match level {
            IonLevel::MPlus => on_plus,
            IonLevel::MMinus => on_minus,
            IonLevel::Ground => C64::new(0.0, 0.0),
        }
    }
}

/// Rank-deficient projector |s⟩ᵢ⟨s| ⊗ |t⟩ⱼ⟨t| ⊗ 1 on the metastable
/// subspace of ions `i` and `j`.
pub fn pair_projector(
    space: &LabelSpace,
    i: usize,
    j: usize,
    basis: &DenseBasis,
    sign_i_plus: bool,
    sign_j_plus: bool,
) -> DenseMatrix {
    let metastable = [IonLevel::MPlus, IonLevel::MMinus];
    let mut m = DenseMatrix::zeros(space.dim());
    for col in 0..space.dim() {
        let label = space.label(col);
        if !label.ions[i].is_metastable() || !label.ions[j].is_metastable() {
            continue; // ⟨s| annihilates non-qubit levels: zero column
        }
        let bra = basis.ket_coeff(sign_i_plus, label.ions[i].level()).conj()
            * basis.ket_coeff(sign_j_plus, label.ions[j].level()).conj();
        for level_i in metastable {
            for level_j in metastable {
                let ket =
                    basis.ket_coeff(sign_i_plus, level_i) * basis.ket_coeff(sign_j_plus, level_j);
                let target = label
                    .with_ion(i, IonLabel::new(level_i, false).expect("metastable"))
                    .with_ion(j, IonLabel::new(level_j, false).expect("metastable"));
                m.set(space.index_of(&target), col, ket * bra);
            }
        }
    }
    m
}

/// Pauli on one ion; columns of non-metastable labels are zero and the
/// pipeline checks they are unpopulated before applying.
pub fn pauli_matrix(space: &LabelSpace, ion: usize, op: Pauli) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(space.dim());
    for col in 0..space.dim() {
        let label = space.label(col);
        if !label.ions[ion].is_metastable() {
            continue;
        }
        let (level, factor) = match (op, label.ions[ion].level()) {
            (Pauli::X, IonLevel::MPlus) => (IonLevel::MMinus, C64::new(1.0, 0.0)),
            (Pauli::X, IonLevel::MMinus) => (IonLevel::MPlus, C64::new(1.0, 0.0)),
            (Pauli::Y, IonLevel::MPlus) => (IonLevel::MMinus, C64::new(0.0, 1.0)),
            (Pauli::Y, IonLevel::MMinus) => (IonLevel::MPlus, C64::new(0.0, -1.0)),
            (Pauli::Z, IonLevel::MPlus) => (IonLevel::MPlus, C64::new(1.0, 0.0)),
            (Pauli::Z, IonLevel::MMinus) => (IonLevel::MMinus, C64::new(-1.0, 0.0)),
            (_, IonLevel::Ground) => unreachable!(),
        };
        let target = label.with_ion(ion, IonLabel::new(level, false).expect("metastable"));
        m.set(space.index_of(&target), col, factor);
    }
    m
}

/// One ion-group tensor factor for direct dense assembly.
struct DenseFactor {
    indices: Vec<usize>,
    terms: Vec<(C64, Vec<IonLabel>)>,
}

/// Fill a dense vector with the tensor product of ion factors (photon
/// sector: vacuum). Independent of the sparse compose path.
fn dense_product(space: &LabelSpace, factors: &[DenseFactor]) -> Vec<C64> {
    let n = space.ion_count();
    let mut assignments: Vec<(Vec<Option<IonLabel>>, C64)> =
        vec![(vec![None; n], C64::new(1.0, 0.0))];
    for factor in factors {
        let mut next = Vec::with_capacity(assignments.len() * factor.terms.len());
        for (ions, amp) in &assignments {
            for (coeff, labels) in &factor.terms {
                let mut ions = ions.clone();
                for (&idx, &label) in factor.indices.iter().zip(labels) {
                    ions[idx] = Some(label);
                }
                next.push((ions, amp * coeff));
            }
        }
        assignments = next;
    }
    let mut v = vec![C64::new(0.0, 0.0); space.dim()];
    for (ions, amp) in assignments {
        let ions: Vec<IonLabel> = ions
            .into_iter()
            .map(|l| l.expect("factors cover the register"))
            .collect();
        let label = BasisLabel::new(ions, PhotonSector::Vacuum);
        v[space.index_of(&label)] += amp;
    }
    v
}

fn qubit_factor(index: usize, on_plus: C64, on_minus: C64) -> DenseFactor {
    DenseFactor {
        indices: vec![index],
        terms: vec![
            (on_plus, vec![IonLabel::m_plus()]),
            (on_minus, vec![IonLabel::m_minus()]),
        ],
    }
}

fn correlated_factor(i: usize, j: usize, on_pp: C64, on_mm: C64) -> DenseFactor {
    DenseFactor {
        indices: vec![i, j],
        terms: vec![
            (on_pp, vec![IonLabel::m_plus(), IonLabel::m_plus()]),
            (on_mm, vec![IonLabel::m_minus(), IonLabel::m_minus()]),
        ],
    }
}

fn entangled_factor(i: usize, j: usize, on_mp: C64, on_pm: C64) -> DenseFactor {
    DenseFactor {
        indices: vec![i, j],
        terms: vec![
            (on_mp, vec![IonLabel::m_minus(), IonLabel::m_plus()]),
            (on_pm, vec![IonLabel::m_plus(), IonLabel::m_minus()]),
        ],
    }
}

fn check_pair_norm(x: C64, y: C64) -> Result<()> {
    let norm_sq = x.norm_sqr() + y.norm_sqr();
    if (norm_sq - 1.0).abs() > INPUT_NORM_TOL {
        return Err(Error::InputNotNormalized { norm_sq });
    }
    Ok(())
}

/// Shared interferometer machinery for one protocol family: all fixed
/// matrices, built once and reused across runs.
pub struct DenseContext {
    space: LabelSpace,
    inject: DenseMatrix,
    splitter: DenseMatrix,
    scatter_upper: DenseMatrix,
    scatter_lower: DenseMatrix,
    project_upper: DenseMatrix,
    project_lower: DenseMatrix,
    project_none: DenseMatrix,
    absorb: DenseMatrix,
    measured_ions: (usize, usize),
}

struct DenseHerald {
    herald: f64,
    upper_mass: f64,
    no_photon_mass: f64,
    heralded: Vec<C64>,
}

impl DenseContext {
    fn new(ion_count: usize, upper_ion: usize, lower_ion: usize) -> Result<Self> {
        let space = LabelSpace::new(ion_count)?;
        Ok(DenseContext {
            inject: inject_matrix(&space, PhotonPath::Lower, Polarization::SigmaPlus),
            splitter: beam_splitter_matrix(&space),
            scatter_upper: scatter_matrix(&space, upper_ion, PhotonPath::Upper),
            scatter_lower: scatter_matrix(&space, lower_ion, PhotonPath::Lower),
            project_upper: port_projector(&space, Port::Upper),
            project_lower: port_projector(&space, Port::Lower),
            project_none: port_projector(&space, Port::NoPhoton),
            absorb: photon_absorb_matrix(&space),
            measured_ions: (upper_ion, lower_ion),
            space,
        })
    }

    /// Three-ion teleportation geometry: arms on ions 0 and 1.
    pub fn teleport() -> Result<Self> {
        Self::new(3, 0, 1)
    }

    /// Four-ion swapping geometry: arms on the relay ions 1 and 2.
    pub fn swapping() -> Result<Self> {
        Self::new(4, 1, 2)
    }

    pub fn space(&self) -> &LabelSpace {
        &self.space
    }

    fn run_interferometer(&self, initial: &[C64]) -> Result<DenseHerald> {
        for (k, amp) in initial.iter().enumerate() {
            if amp.norm() > 0.0 && !self.space.label(k).photon.is_vacuum() {
                return Err(Error::PhotonAlreadyPresent);
            }
        }
        let mut v = self.inject.mul_vec(initial);
        v = self.splitter.mul_vec(&v);
        v = self.scatter_upper.mul_vec(&v);
        v = self.scatter_lower.mul_vec(&v);
        v = self.splitter.mul_vec(&v);

        let upper_mass = vec_norm_sq(&self.project_upper.mul_vec(&v));
        let lower = self.project_lower.mul_vec(&v);
        let herald = vec_norm_sq(&lower);
        let no_photon_mass = vec_norm_sq(&self.project_none.mul_vec(&v));
        let sum = upper_mass + herald + no_photon_mass;
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Invariant(format!(
                "dense detector projections sum to {sum}, expected 1"
            )));
        }
        let heralded = if herald > 0.0 {
            vec_normalize(&self.absorb.mul_vec(&lower))
        } else {
            vec![C64::new(0.0, 0.0); self.space.dim()]
        };
        Ok(DenseHerald {
            herald,
            upper_mass,
            no_photon_mass,
            heralded,
        })
    }

    fn check_metastable(&self, v: &[C64], ion: usize) -> Result<()> {
        for (k, amp) in v.iter().enumerate() {
            if amp.norm() >= 1e-15 && !self.space.label(k).ions[ion].is_metastable() {
                return Err(Error::IonNotMetastable { index: ion });
            }
        }
        Ok(())
    }

    /// Measure the arm ions of the heralded vector in `basis`; conditional
    /// probabilities and normalized collapsed vectors per outcome.
    fn measure(
        &self,
        heralded: &[C64],
        basis: &DenseBasis,
    ) -> Result<Vec<(OutcomeLabel, f64, Vec<C64>)>> {
        let (i, j) = self.measured_ions;
        self.check_metastable(heralded, i)?;
        self.check_metastable(heralded, j)?;
        let total = vec_norm_sq(heralded);
        let mut out = Vec::with_capacity(4);
        for label in OutcomeLabel::pair_outcomes() {
            let (si, sj) = match label {
                OutcomeLabel::PlusPlus => (true, true),
                OutcomeLabel::PlusMinus => (true, false),
                OutcomeLabel::MinusPlus => (false, true),
                OutcomeLabel::MinusMinus => (false, false),
                _ => unreachable!(),
            };
            let projector = pair_projector(&self.space, i, j, basis, si, sj);
            let branch = projector.mul_vec(heralded);
            let weight = vec_norm_sq(&branch);
            let probability = if total == 0.0 { 0.0 } else { weight / total };
            let collapsed = if weight > 0.0 {
                vec_normalize(&branch)
            } else {
                vec![C64::new(0.0, 0.0); self.space.dim()]
            };
            out.push((label, probability, collapsed));
        }
        Ok(out)
    }

    fn fidelity(corrected: &[C64], target: &[C64], probability: f64) -> Option<f64> {
        let nc = vec_norm_sq(corrected);
        let nt = vec_norm_sq(target);
        if probability < 1e-15 || nc == 0.0 || nt == 0.0 {
            return None;
        }
        Some(vec_inner(target, corrected).norm_sqr() / (nc * nt))
    }

    /// Dense teleportation run; mirrors the sparse pipeline step for step.
    pub fn run_teleport(&self, inputs: &TeleportInputs) -> Result<ProtocolReport> {
        if self.space.ion_count() != 3 {
            return Err(Error::Invariant(
                "teleport requires the three-ion context".into(),
            ));
        }
        let TeleportInputs { alpha, beta } = *inputs;
        check_pair_norm(alpha, beta)?;

        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let initial = dense_product(
            &self.space,
            &[qubit_factor(0, alpha, beta), correlated_factor(1, 2, h, h)],
        );
        let run = self.run_interferometer(&initial)?;

        let basis = DenseBasis::pm();
        let mut outcomes = Vec::with_capacity(4);
        for (label, probability, collapsed) in self.measure(&run.heralded, &basis)? {
            let (si, sj) = (
                matches!(label, OutcomeLabel::PlusPlus | OutcomeLabel::PlusMinus),
                matches!(label, OutcomeLabel::PlusPlus | OutcomeLabel::MinusPlus),
            );
            let pauli = if si == sj { Pauli::Y } else { Pauli::X };
            let corrected = if vec_norm_sq(&collapsed) > 0.0 {
                pauli_matrix(&self.space, 2, pauli).mul_vec(&collapsed)
            } else {
                collapsed
            };
            let ket_i = basis.ket(si);
            let ket_j = basis.ket(sj);
            let target = dense_product(
                &self.space,
                &[
                    qubit_factor(0, ket_i.0, ket_i.1),
                    qubit_factor(1, ket_j.0, ket_j.1),
                    qubit_factor(2, alpha, beta),
                ],
            );
            outcomes.push(OutcomeRecord {
                label,
                probability,
                fidelity_vs_target: Self::fidelity(&corrected, &target, probability),
                success: probability > 1e-15,
                correction: Some(vec![PauliOp { op: pauli, ion: 2 }]),
                collapsed_state: self.space.to_state(&corrected),
            });
        }

        let target_space = LabelSpace::new(1)?;
        let target_state = target_space.to_state(&dense_product(
            &target_space,
            &[qubit_factor(0, alpha, beta)],
        ));
        ReportBuilder {
            protocol: "teleport".to_string(),
            inputs: BTreeMap::from([
                ("alpha".to_string(), ComplexIo::from(alpha)),
                ("beta".to_string(), ComplexIo::from(beta)),
            ]),
            herald_probability: run.herald,
            upper_mass: run.upper_mass,
            no_photon_mass: run.no_photon_mass,
            outcomes,
            target_state: target_state.to_records(),
            notes: vec![
                TELEPORT_ION_NOTE.to_string(),
                TELEPORT_TARGET_NOTE.to_string(),
            ],
        }
        .build()
    }

    fn four_ion_initial(&self, inputs: &ConcentrateInputs) -> Vec<C64> {
        dense_product(
            &self.space,
            &[
                correlated_factor(0, 1, inputs.alpha, inputs.beta),
                correlated_factor(2, 3, inputs.a, inputs.b),
            ],
        )
    }

    /// Dense concentration-via-swapping run.
    pub fn run_concentrate(&self, inputs: &ConcentrateInputs) -> Result<ProtocolReport> {
        if self.space.ion_count() != 4 {
            return Err(Error::Invariant(
                "swapping requires the four-ion context".into(),
            ));
        }
        check_pair_norm(inputs.alpha, inputs.beta)?;
        check_pair_norm(inputs.a, inputs.b)?;

        let run = self.run_interferometer(&self.four_ion_initial(inputs))?;
        let basis = DenseBasis::pm();
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);

        let mut outcomes = Vec::with_capacity(4);
        for (label, probability, collapsed) in self.measure(&run.heralded, &basis)? {
            let (si, sj) = (
                matches!(label, OutcomeLabel::PlusPlus | OutcomeLabel::PlusMinus),
                matches!(label, OutcomeLabel::PlusPlus | OutcomeLabel::MinusPlus),
            );
            let bell_sign = if si == sj { -1.0 } else { 1.0 };
            let ket_i = basis.ket(si);
            let ket_j = basis.ket(sj);
            let target = dense_product(
                &self.space,
                &[
                    entangled_factor(0, 3, h, h * bell_sign),
                    qubit_factor(1, ket_i.0, ket_i.1),
                    qubit_factor(2, ket_j.0, ket_j.1),
                ],
            );
            let fidelity = Self::fidelity(&collapsed, &target, probability);
            outcomes.push(OutcomeRecord {
                label,
                probability,
                success: matches!(fidelity, Some(f) if f >= 1.0 - 1e-9),
                fidelity_vs_target: fidelity,
                correction: None,
                collapsed_state: self.space.to_state(&collapsed),
            });
        }

        let target_space = LabelSpace::new(2)?;
        let target_state = target_space.to_state(&dense_product(
            &target_space,
            &[entangled_factor(0, 1, h, -h)],
        ));
        ReportBuilder {
            protocol: "concentrate".to_string(),
            inputs: BTreeMap::from([
                ("alpha".to_string(), ComplexIo::from(inputs.alpha)),
                ("beta".to_string(), ComplexIo::from(inputs.beta)),
                ("a".to_string(), ComplexIo::from(inputs.a)),
                ("b".to_string(), ComplexIo::from(inputs.b)),
            ]),
            herald_probability: run.herald,
            upper_mass: run.upper_mass,
            no_photon_mass: run.no_photon_mass,
            outcomes,
            target_state: target_state.to_records(),
            notes: vec![RELAY_ION_NOTE.to_string(), SWAP_TARGET_NOTE.to_string()],
        }
        .build()
    }

    /// Dense remote-preparation run.
    pub fn run_remote_prepare(&self, inputs: &RemotePrepareInputs) -> Result<ProtocolReport> {
        if self.space.ion_count() != 4 {
            return Err(Error::Invariant(
                "swapping requires the four-ion context".into(),
            ));
        }
        check_pair_norm(inputs.a, inputs.b)?;
        check_pair_norm(inputs.nu, inputs.mu)?;

        let channel = ConcentrateInputs::matched(inputs.a, inputs.b);
        let run = self.run_interferometer(&self.four_ion_initial(&channel))?;
        let basis = DenseBasis {
            nu: inputs.nu,
            mu: inputs.mu,
        };
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);

        let nu2 = inputs.nu.norm_sqr();
        let mu2 = inputs.mu.norm_sqr();
        let quartic_norm = (nu2 * nu2 + mu2 * mu2).sqrt();
        let m = C64::new(nu2 / quartic_norm, 0.0);
        let n = C64::new(mu2 / quartic_norm, 0.0);

        let mut outcomes = Vec::with_capacity(4);
        for (label, probability, collapsed) in self.measure(&run.heralded, &basis)? {
            let (si, sj) = (
                matches!(label, OutcomeLabel::PlusPlus | OutcomeLabel::PlusMinus),
                matches!(label, OutcomeLabel::PlusPlus | OutcomeLabel::MinusPlus),
            );
            let is_target_outcome = si != sj;
            let mut correction = None;
            let corrected = if label == OutcomeLabel::MinusPlus && vec_norm_sq(&collapsed) > 0.0 {
                correction = Some(vec![
                    PauliOp {
                        op: Pauli::X,
                        ion: 0,
                    },
                    PauliOp {
                        op: Pauli::X,
                        ion: 3,
                    },
                ]);
                let x0 = pauli_matrix(&self.space, 0, Pauli::X).mul_vec(&collapsed);
                pauli_matrix(&self.space, 3, Pauli::X).mul_vec(&x0)
            } else {
                if label == OutcomeLabel::MinusPlus {
                    correction = Some(vec![
                        PauliOp {
                            op: Pauli::X,
                            ion: 0,
                        },
                        PauliOp {
                            op: Pauli::X,
                            ion: 3,
                        },
                    ]);
                }
                collapsed
            };
            let payload = if is_target_outcome {
                entangled_factor(0, 3, n, m)
            } else {
                entangled_factor(0, 3, h, -h)
            };
            let ket_i = basis.ket(si);
            let ket_j = basis.ket(sj);
            let target = dense_product(
                &self.space,
                &[
                    payload,
                    qubit_factor(1, ket_i.0, ket_i.1),
                    qubit_factor(2, ket_j.0, ket_j.1),
                ],
            );
            outcomes.push(OutcomeRecord {
                label,
                probability,
                fidelity_vs_target: Self::fidelity(&corrected, &target, probability),
                success: is_target_outcome && probability > 1e-15,
                correction,
                collapsed_state: self.space.to_state(&corrected),
            });
        }

        let bell_each = run.herald * outcomes[0].probability;
        let bell_note = format!(
            "bell byproduct (plus_plus, minus_minus): absolute probability per_outcome={} combined={}",
            crate::report::fmt_f64(bell_each),
            crate::report::fmt_f64(bell_each + run.herald * outcomes[3].probability)
        );

        let target_space = LabelSpace::new(2)?;
        let target_state = target_space.to_state(&dense_product(
            &target_space,
            &[entangled_factor(0, 1, n, m)],
        ));
        ReportBuilder {
            protocol: "rsp".to_string(),
            inputs: BTreeMap::from([
                ("a".to_string(), ComplexIo::from(inputs.a)),
                ("b".to_string(), ComplexIo::from(inputs.b)),
                ("mu".to_string(), ComplexIo::from(inputs.mu)),
                ("nu".to_string(), ComplexIo::from(inputs.nu)),
            ]),
            herald_probability: run.herald,
            upper_mass: run.upper_mass,
            no_photon_mass: run.no_photon_mass,
            outcomes,
            target_state: target_state.to_records(),
            notes: vec![
                RELAY_ION_NOTE.to_string(),
                RSP_TARGET_NOTE.to_string(),
                bell_note,
            ],
        }
        .build()
    }
}

/// One-shot dense teleportation (builds its context on the fly).
pub fn dense_teleport(inputs: &TeleportInputs) -> Result<ProtocolReport> {
    DenseContext::teleport()?.run_teleport(inputs)
}

/// One-shot dense concentration via swapping.
pub fn dense_concentrate(inputs: &ConcentrateInputs) -> Result<ProtocolReport> {
    DenseContext::swapping()?.run_concentrate(inputs)
}

/// One-shot dense remote preparation.
pub fn dense_remote_prepare(inputs: &RemotePrepareInputs) -> Result<ProtocolReport> {
    DenseContext::swapping()?.run_remote_prepare(inputs)
}
