//! `mzi` — run trapped-ion linear-optics protocols and feasibility estimates
//! from the command line, emitting deterministic JSON reports.
//!
//! Exit codes: 0 on success, 2 for invalid input (normalization or range
//! violations, bad flags, unreadable config), 3 when a runtime consistency
//! invariant is breached inside the engine.

mod sweep_config;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;

use mzi_sim::error::Error;
use mzi_sim::feasibility::{CavityParams, FeasibilitySpec};
use mzi_sim::oracle;
use mzi_sim::protocols::{
    concentrate_via_swapping, normalize_pair, remote_prepare, teleport, ConcentrateInputs,
    RemotePrepareInputs, TeleportInputs,
};
use mzi_sim::report::{fmt_f64, to_json, AnyReport, ProtocolReport, SweepReport};
use mzi_sim::sweep::run_points;

use sweep_config::{parse_complex, parse_feasibility_kv, parse_quantity, parse_sweep};

#[derive(Parser)]
#[command(
    name = "mzi",
    version,
    about = "Linear-optics protocol simulator for trapped ions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Engine {
    /// Sparse amplitude-map engine (default).
    Sparse,
    /// Dense reference implementation, for debugging.
    Dense,
}

#[derive(Args)]
struct CommonRunArgs {
    /// Rescale input pairs to unit norm instead of rejecting them; the
    /// rescaling is recorded in the report notes.
    #[arg(long)]
    normalize: bool,

    /// Write the report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    #[arg(long, hide = true, value_enum, default_value = "sparse")]
    engine: Engine,
}

#[derive(Subcommand)]
enum Command {
    /// Teleport the qubit α|m₊⟩ + β|m₋⟩ through a Bell channel.
    Teleport {
        /// Input coefficient on |m₊⟩ (decimal, or re±imi for complex).
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        /// Input coefficient on |m₋⟩.
        #[arg(long, allow_hyphen_values = true)]
        beta: String,
        #[command(flatten)]
        common: CommonRunArgs,
    },
    /// Concentrate two partially entangled pairs into one Bell pair by
    /// entanglement swapping.
    Concentrate {
        /// Coefficient on |m₊m₊⟩ of Bob's pair.
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        /// Coefficient on |m₋m₋⟩ of Bob's pair.
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        /// Coefficient on |m₊m₊⟩ of Alice's pair (defaults to a).
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
        /// Coefficient on |m₋m₋⟩ of Alice's pair (defaults to b).
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<String>,
        #[command(flatten)]
        common: CommonRunArgs,
    },
    /// Remotely prepare an entangled state on the outer ions by measuring
    /// the relay ions in a tailored basis.
    Rsp {
        /// Channel coefficient on |m₊m₊⟩.
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        /// Channel coefficient on |m₋m₋⟩.
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        /// Basis coefficient μ.
        #[arg(long, allow_hyphen_values = true)]
        mu: String,
        /// Basis coefficient ν.
        #[arg(long, allow_hyphen_values = true)]
        nu: String,
        #[command(flatten)]
        common: CommonRunArgs,
    },
    /// Closed-form cavity-emission and concentration-rate estimate.
    Feasibility {
        /// Read every parameter from a key-value file instead of flags.
        #[arg(
            long,
            value_name = "FILE",
            conflicts_with_all = [
                "fcav", "length", "wavelength", "dipole", "gamma_nc", "pcav", "eta", "xi",
                "rate", "a2",
            ]
        )]
        config: Option<PathBuf>,
        /// Cavity finesse.
        #[arg(long)]
        fcav: Option<String>,
        /// Cavity length (accepts mm/um/nm suffixes).
        #[arg(long)]
        length: Option<String>,
        /// Transition wavelength (accepts mm/um/nm suffixes).
        #[arg(long)]
        wavelength: Option<String>,
        /// Transition dipole element, C·m.
        #[arg(long)]
        dipole: Option<String>,
        /// Non-cavity loss rate Γ, 1/s.
        #[arg(long, value_name = "GAMMA")]
        gamma_nc: Option<String>,
        /// Emission probability supplied directly, bypassing the cavity
        /// model.
        #[arg(long)]
        pcav: Option<String>,
        /// Detector efficiency η.
        #[arg(long)]
        eta: Option<String>,
        /// Out-coupling efficiency ξ.
        #[arg(long)]
        xi: Option<String>,
        /// Input photon rate R, 1/s.
        #[arg(long)]
        rate: Option<String>,
        /// Channel weight a².
        #[arg(long)]
        a2: Option<String>,
        /// Write the report here instead of stdout.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Run a grid of protocol or feasibility points from a config file.
    Sweep {
        /// Sweep configuration file (flat key = value lines).
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Invariant(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn emit(text: String, out: Option<&PathBuf>) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text.as_bytes())
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{}", text.trim_end_matches('\n'));
            Ok(())
        }
    }
}

/// Optionally rescale a pair, returning the note to attach to the report.
fn prepare_pair(
    normalize: bool,
    name_x: &str,
    name_y: &str,
    x: C64,
    y: C64,
) -> Result<(C64, C64, Option<String>), Error> {
    if !normalize {
        return Ok((x, y, None));
    }
    let (x, y, norm_sq_before) = normalize_pair(x, y)?;
    let note = if (norm_sq_before - 1.0).abs() > 1e-15 {
        Some(format!(
            "inputs ({name_x}, {name_y}) rescaled to unit norm: original squared norm {}",
            fmt_f64(norm_sq_before)
        ))
    } else {
        None
    };
    Ok((x, y, note))
}

fn finish_protocol_report(
    mut report: ProtocolReport,
    notes: Vec<String>,
    out: Option<&PathBuf>,
) -> Result<(), Error> {
    report.notes.extend(notes);
    emit(to_json(&report)? + "\n", out)
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Teleport {
            alpha,
            beta,
            common,
        } => {
            let (alpha, beta, note) = prepare_pair(
                common.normalize,
                "alpha",
                "beta",
                parse_complex(&alpha)?,
                parse_complex(&beta)?,
            )?;
            let inputs = TeleportInputs { alpha, beta };
            let report = match common.engine {
                Engine::Sparse => teleport(&inputs)?,
                Engine::Dense => oracle::dense_teleport(&inputs)?,
            };
            finish_protocol_report(report, note.into_iter().collect(), common.out.as_ref())
        }
        Command::Concentrate {
            a,
            b,
            alpha,
            beta,
            common,
        } => {
            let (a, b, note_ab) = prepare_pair(
                common.normalize,
                "a",
                "b",
                parse_complex(&a)?,
                parse_complex(&b)?,
            )?;
            let mut notes: Vec<String> = note_ab.into_iter().collect();
            let inputs = match (alpha, beta) {
                (None, None) => ConcentrateInputs::matched(a, b),
                (alpha, beta) => {
                    let alpha = parse_complex(&alpha.unwrap_or_else(|| "missing".into()))?;
                    let beta = parse_complex(&beta.unwrap_or_else(|| "missing".into()))?;
                    let (alpha, beta, note) =
                        prepare_pair(common.normalize, "alpha", "beta", alpha, beta)?;
                    notes.extend(note);
                    ConcentrateInputs { alpha, beta, a, b }
                }
            };
            let report = match common.engine {
                Engine::Sparse => concentrate_via_swapping(&inputs)?,
                Engine::Dense => oracle::dense_concentrate(&inputs)?,
            };
            finish_protocol_report(report, notes, common.out.as_ref())
        }
        Command::Rsp {
            a,
            b,
            mu,
            nu,
            common,
        } => {
            let (a, b, note_ab) = prepare_pair(
                common.normalize,
                "a",
                "b",
                parse_complex(&a)?,
                parse_complex(&b)?,
            )?;
            let (nu, mu, note_basis) = prepare_pair(
                common.normalize,
                "nu",
                "mu",
                parse_complex(&nu)?,
                parse_complex(&mu)?,
            )?;
            let mut notes: Vec<String> = note_ab.into_iter().collect();
            notes.extend(note_basis);
            let inputs = RemotePrepareInputs { a, b, mu, nu };
            let report = match common.engine {
                Engine::Sparse => remote_prepare(&inputs)?,
                Engine::Dense => oracle::dense_remote_prepare(&inputs)?,
            };
            finish_protocol_report(report, notes, common.out.as_ref())
        }
        Command::Feasibility {
            config,
            fcav,
            length,
            wavelength,
            dipole,
            gamma_nc,
            pcav,
            eta,
            xi,
            rate,
            a2,
            out,
        } => {
            let spec = if let Some(path) = config {
                let text = fs::read_to_string(&path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                parse_feasibility_kv(&text)?
            } else {
                let require = |value: Option<String>, name: &str| {
                    value.ok_or_else(|| Error::Config(format!("--{name} is required")))
                };
                let p_cav_override = pcav.as_deref().map(parse_quantity).transpose()?;
                let cavity = if p_cav_override.is_none() {
                    Some(CavityParams {
                        finesse: parse_quantity(&require(fcav, "fcav")?)?,
                        length: parse_quantity(&require(length, "length")?)?,
                        wavelength: parse_quantity(&require(wavelength, "wavelength")?)?,
                        dipole: parse_quantity(&require(dipole, "dipole")?)?,
                        loss_rate: parse_quantity(&require(gamma_nc, "gamma-nc")?)?,
                    })
                } else {
                    None
                };
                FeasibilitySpec {
                    cavity,
                    p_cav_override,
                    eta: parse_quantity(&require(eta, "eta")?)?,
                    xi: parse_quantity(&require(xi, "xi")?)?,
                    a_sq: parse_quantity(&require(a2, "a2")?)?,
                    photon_rate: parse_quantity(&require(rate, "rate")?)?,
                }
            };
            let report = spec.evaluate()?;
            emit(to_json(&report)? + "\n", out.as_ref())
        }
        Command::Sweep { config, out } => {
            let text = fs::read_to_string(&config)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", config.display())))?;
            let sweep = parse_sweep(&text)?;
            let mut runs = run_points(&sweep.points)?;
            for (run, notes) in runs.iter_mut().zip(sweep.notes) {
                if let AnyReport::Protocol(report) = run {
                    report.notes.extend(notes);
                }
            }
            let report = SweepReport::new(runs);
            emit(to_json(&report)? + "\n", out.as_ref())
        }
    }
}
