//! Machine-readable report schema and deterministic JSON emission.
//!
//! Floating-point numbers are written with 17 significant digits so that
//! parsing a report recovers every double bit-exactly, and identical inputs
//! always produce byte-identical output (no timestamps anywhere).

use std::collections::BTreeMap;
use std::io;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::AmplitudeRecord;
use crate::measurement::{OutcomeLabel, OutcomeRecord, PauliOp};

pub const SCHEMA_VERSION: u32 = 1;

/// Complex number in wire form.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexIo {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for ComplexIo {
    fn from(z: C64) -> Self {
        ComplexIo { re: z.re, im: z.im }
    }
}

impl From<ComplexIo> for C64 {
    fn from(z: ComplexIo) -> Self {
        C64::new(z.re, z.im)
    }
}

/// One measurement branch as it appears in a report. Probabilities are given
/// both conditional on the herald and absolute (times the herald mass).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportOutcome {
    pub label: OutcomeLabel,
    pub conditional_probability: f64,
    pub absolute_probability: f64,
    pub state: Vec<AmplitudeRecord>,
    pub correction: Option<Vec<PauliOp>>,
    pub fidelity_vs_target: Option<f64>,
}

/// Structured result of one protocol run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub schema_version: u32,
    pub protocol: String,
    pub inputs: BTreeMap<String, ComplexIo>,
    pub herald_probability: f64,
    pub outcomes: Vec<ReportOutcome>,
    pub total_success_probability: f64,
    pub failure_mass: f64,
    pub target_state: Vec<AmplitudeRecord>,
    pub notes: Vec<String>,
}

/// Cavity-model and rate results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityResults {
    pub cavity_decay_rate: Option<f64>,
    pub mode_volume: Option<f64>,
    pub coupling_constant: Option<f64>,
    pub emission_probability: f64,
    pub success_probability_per_photon: f64,
    pub pairs_per_second: f64,
}

/// Report emitted by the feasibility calculator. Shares the envelope of
/// [`ProtocolReport`]; the heralding fields do not apply to a closed-form
/// rate estimate, so results get their own block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub schema_version: u32,
    pub protocol: String,
    pub inputs: BTreeMap<String, f64>,
    pub results: FeasibilityResults,
    pub notes: Vec<String>,
}

/// Either kind of per-run report; sweep output is a homogeneous list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnyReport {
    Protocol(ProtocolReport),
    Feasibility(FeasibilityReport),
}

/// Envelope for a parameter sweep: one entry per grid point, in grid order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub protocol: String,
    pub runs: Vec<AnyReport>,
}

impl SweepReport {
    pub fn new(runs: Vec<AnyReport>) -> Self {
        SweepReport {
            schema_version: SCHEMA_VERSION,
            protocol: "sweep".to_string(),
            runs,
        }
    }
}

/// serde_json formatter printing every float with 17 significant digits.
struct SigFigFormatter;

impl serde_json::ser::Formatter for SigFigFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        if !value.is_finite() {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                "non-finite float in report",
            ));
        }
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.write_f64(writer, f64::from(value))
    }
}

/// Serialize any report value to deterministic JSON.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigFigFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Invariant(format!("report serialization failed: {e}")))?;
    String::from_utf8(out).map_err(|e| Error::Invariant(format!("report not utf-8: {e}")))
}

/// Parse a report back; inverse of [`to_json`] for finite values.
pub fn from_json<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid report JSON: {e}")))
}

/// Float formatting used inside note strings, matching the JSON body.
pub fn fmt_f64(value: f64) -> String {
    format!("{value:.16e}")
}

pub fn label_str(label: OutcomeLabel) -> &'static str {
    match label {
        OutcomeLabel::PhotonUpper => "photon_upper",
        OutcomeLabel::PhotonLower => "photon_lower",
        OutcomeLabel::NoPhoton => "no_photon",
        OutcomeLabel::PlusPlus => "plus_plus",
        OutcomeLabel::PlusMinus => "plus_minus",
        OutcomeLabel::MinusPlus => "minus_plus",
        OutcomeLabel::MinusMinus => "minus_minus",
    }
}

/// Note recording the full detector probability budget of a run.
pub fn budget_note(upper: f64, lower: f64, none: f64) -> String {
    format!(
        "probability budget: photon_lower={} photon_upper={} no_photon={}",
        fmt_f64(lower),
        fmt_f64(upper),
        fmt_f64(none)
    )
}

/// Note naming the outcomes counted into `total_success_probability`.
pub fn success_note(labels: &[OutcomeLabel]) -> String {
    if labels.is_empty() {
        "success outcomes: none".to_string()
    } else {
        let names: Vec<&str> = labels.iter().map(|&l| label_str(l)).collect();
        format!("success outcomes: {}", names.join(", "))
    }
}

/// Assemble and validate a protocol report.
///
/// Validation enforces the bookkeeping invariants: absolute = herald ×
/// conditional, Σ absolute = herald, herald + failure mass = 1, and every
/// success-marked outcome at corrected fidelity 1 within 1e-9. A violation
/// is an internal-consistency failure, not a user error.
pub struct ReportBuilder {
    pub protocol: String,
    pub inputs: BTreeMap<String, ComplexIo>,
    pub herald_probability: f64,
    pub upper_mass: f64,
    pub no_photon_mass: f64,
    pub outcomes: Vec<OutcomeRecord>,
    pub target_state: Vec<AmplitudeRecord>,
    pub notes: Vec<String>,
}

impl ReportBuilder {
    pub fn build(self) -> Result<ProtocolReport> {
        let herald = self.herald_probability;
        let port_sum = herald + self.upper_mass + self.no_photon_mass;
        if (port_sum - 1.0).abs() > 1e-12 {
            return Err(Error::Invariant(format!(
                "detector masses sum to {port_sum}, expected 1"
            )));
        }

        let mut conditional_sum = 0.0;
        let mut absolute_sum = 0.0;
        let mut success_labels = Vec::new();
        let mut total_success = 0.0;
        let mut outcomes = Vec::with_capacity(self.outcomes.len());
        for record in self.outcomes {
            let conditional = record.probability;
            if !(0.0..=1.0 + 1e-12).contains(&conditional) {
                return Err(Error::Invariant(format!(
                    "conditional probability {conditional} out of range"
                )));
            }
            let absolute = herald * conditional;
            conditional_sum += conditional;
            absolute_sum += absolute;
            if record.success {
                match record.fidelity_vs_target {
                    Some(f) if f >= 1.0 - 1e-9 => {}
                    other => {
                        return Err(Error::Invariant(format!(
                            "success outcome {} has fidelity {:?}",
                            label_str(record.label),
                            other
                        )));
                    }
                }
                success_labels.push(record.label);
                total_success += absolute;
            }
            outcomes.push(ReportOutcome {
                label: record.label,
                conditional_probability: conditional,
                absolute_probability: absolute,
                state: record.collapsed_state.to_records(),
                correction: record.correction,
                fidelity_vs_target: record.fidelity_vs_target,
            });
        }
        if herald > 1e-12 && (conditional_sum - 1.0).abs() > 1e-9 {
            return Err(Error::Invariant(format!(
                "conditional probabilities sum to {conditional_sum}"
            )));
        }
        if (absolute_sum - herald).abs() > 1e-9 {
            return Err(Error::Invariant(format!(
                "absolute probabilities sum to {absolute_sum}, herald is {herald}"
            )));
        }

        let mut notes = self.notes;
        notes.push(budget_note(self.upper_mass, herald, self.no_photon_mass));
        notes.push(success_note(&success_labels));

        Ok(ProtocolReport {
            schema_version: SCHEMA_VERSION,
            protocol: self.protocol,
            inputs: self.inputs,
            herald_probability: herald,
            outcomes,
            total_success_probability: total_success,
            failure_mass: self.upper_mass + self.no_photon_mass,
            target_state: self.target_state,
            notes,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digit_floats_round_trip() {
        for v in [
            0.0,
            0.1,
            0.125,
            1.0 / 3.0,
            7.35,
            6.6093037449433446e7,
            -2.5e-15,
        ] {
            let json = to_json(&v).unwrap();
            let back: f64 = from_json(&json).unwrap();
            assert_eq!(v, back, "json was {json}");
        }
    }

    #[test]
    fn non_finite_floats_do_not_round_trip() {
        // serde_json writes non-finite values as null before they reach the
        // formatter; parsing then fails rather than smuggling a NaN through.
        assert_eq!(to_json(&f64::NAN).unwrap(), "null");
        assert!(from_json::<f64>("null").is_err());
    }

    #[test]
    fn outcome_labels_have_stable_wire_names() {
        let json = to_json(&OutcomeLabel::PlusMinus).unwrap();
        assert_eq!(json, "\"plus_minus\"");
        assert_eq!(label_str(OutcomeLabel::PlusMinus), "plus_minus");
    }
}
