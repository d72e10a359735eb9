//! Flat key-value sweep configuration.
//!
//! One `key = value` pair per line; `#` starts a comment. A value may be a
//! single entry or a comma-separated grid list. The sweep enumerates the
//! cartesian product of all grid lists in file order, last key varying
//! fastest, which fixes the output order.
//!
//! ```text
//! protocol = concentrate
//! normalize = true
//! a = 0.32, 0.45, 0.55
//! b = 0.95, 0.89, 0.84
//! ```

use num_complex::Complex64 as C64;

use mzi_sim::error::{Error, Result};
use mzi_sim::feasibility::{CavityParams, FeasibilitySpec};
use mzi_sim::protocols::{normalize_pair, ConcentrateInputs, RemotePrepareInputs, TeleportInputs};
use mzi_sim::report::fmt_f64;
use mzi_sim::sweep::SweepPoint;

/// Parse a real number with an optional metric length suffix (m, mm, um,
/// nm); bare numbers are meters when a length is expected.
pub fn parse_quantity(token: &str) -> Result<f64> {
    let token = token.trim();
    let (digits, scale) = if let Some(stripped) = token.strip_suffix("nm") {
        (stripped, 1e-9)
    } else if let Some(stripped) = token.strip_suffix("um") {
        (stripped, 1e-6)
    } else if let Some(stripped) = token.strip_suffix("mm") {
        (stripped, 1e-3)
    } else if let Some(stripped) = token.strip_suffix('m') {
        (stripped, 1.0)
    } else {
        (token, 1.0)
    };
    digits
        .trim()
        .parse::<f64>()
        .map(|v| v * scale)
        .map_err(|_| Error::Config(format!("cannot parse quantity '{token}'")))
}

/// Parse a complex coefficient: a plain decimal, or `re±imi` (e.g. `0.6`,
/// `0.6+0.2i`, `-0.8i`).
pub fn parse_complex(token: &str) -> Result<C64> {
    token
        .trim()
        .parse::<C64>()
        .map_err(|_| Error::Config(format!("cannot parse coefficient '{token}'")))
}

fn parse_bool(token: &str) -> Result<bool> {
    match token.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(Error::Config(format!("cannot parse boolean '{other}'"))),
    }
}

/// A parsed sweep: points in grid order plus any per-point rescaling notes
/// to append to the corresponding reports.
pub struct Sweep {
    pub points: Vec<SweepPoint>,
    pub notes: Vec<Vec<String>>,
}

struct RawConfig {
    protocol: Option<String>,
    normalize: bool,
    keys: Vec<String>,
    grids: Vec<Vec<String>>,
}

fn parse_raw(text: &str) -> Result<RawConfig> {
    let mut protocol = None;
    let mut normalize = false;
    let mut keys: Vec<String> = Vec::new();
    let mut grids: Vec<Vec<String>> = Vec::new();

    for (line_no, raw_line) in text.lines().enumerate() {
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected 'key = value'", line_no + 1))
        })?;
        let key = key.trim().to_lowercase();
        let value = value.trim();
        match key.as_str() {
            "protocol" => protocol = Some(value.to_lowercase()),
            "normalize" => normalize = parse_bool(value)?,
            _ => {
                if keys.contains(&key) {
                    return Err(Error::Config(format!("duplicate key '{key}'")));
                }
                let entries: Vec<String> = value
                    .split(',')
                    .map(|t| t.trim().to_string())
                    .filter(|t| !t.is_empty())
                    .collect();
                if entries.is_empty() {
                    return Err(Error::Config(format!("key '{key}' has no values")));
                }
                keys.push(key);
                grids.push(entries);
            }
        }
    }

    Ok(RawConfig {
        protocol,
        normalize,
        keys,
        grids,
    })
}

/// Cartesian product of the grid lists, file order, last key fastest.
fn combinations(grids: &[Vec<String>]) -> Vec<Vec<String>> {
    let mut combos: Vec<Vec<String>> = vec![Vec::new()];
    for grid in grids {
        let mut next = Vec::with_capacity(combos.len() * grid.len());
        for combo in &combos {
            for entry in grid {
                let mut combo = combo.clone();
                combo.push(entry.clone());
                next.push(combo);
            }
        }
        combos = next;
    }
    combos
}

struct PointValues<'a> {
    keys: &'a [String],
    values: &'a [String],
}

impl<'a> PointValues<'a> {
    fn get(&self, key: &str) -> Option<&str> {
        self.keys
            .iter()
            .position(|k| k == key)
            .map(|k| self.values[k].as_str())
    }

    fn complex(&self, key: &str) -> Result<C64> {
        parse_complex(
            self.get(key)
                .ok_or_else(|| Error::Config(format!("missing key '{key}'")))?,
        )
    }

    fn quantity(&self, key: &str) -> Result<f64> {
        parse_quantity(
            self.get(key)
                .ok_or_else(|| Error::Config(format!("missing key '{key}'")))?,
        )
    }
}

/// Rescale a pair when asked; returns the note recording the rescale.
fn pair(
    values: &PointValues,
    normalize: bool,
    key_x: &str,
    key_y: &str,
    notes: &mut Vec<String>,
) -> Result<(C64, C64)> {
    let x = values.complex(key_x)?;
    let y = values.complex(key_y)?;
    if !normalize {
        return Ok((x, y));
    }
    let (x, y, norm_sq_before) = normalize_pair(x, y)?;
    if (norm_sq_before - 1.0).abs() > 1e-15 {
        notes.push(format!(
            "inputs ({key_x}, {key_y}) rescaled to unit norm: original squared norm {}",
            fmt_f64(norm_sq_before)
        ));
    }
    Ok((x, y))
}

fn feasibility_spec_from(values: &PointValues) -> Result<FeasibilitySpec> {
    let p_cav_override = match values.get("pcav") {
        Some(token) => Some(parse_quantity(token)?),
        None => None,
    };
    let cavity = if p_cav_override.is_none() {
        Some(CavityParams {
            finesse: values.quantity("fcav")?,
            length: values.quantity("length")?,
            wavelength: values.quantity("wavelength")?,
            dipole: values.quantity("dipole")?,
            loss_rate: values.quantity("gamma_nc")?,
        })
    } else {
        None
    };
    Ok(FeasibilitySpec {
        cavity,
        p_cav_override,
        eta: values.quantity("eta")?,
        xi: values.quantity("xi")?,
        a_sq: values.quantity("a2")?,
        photon_rate: values.quantity("rate")?,
    })
}

/// Parse a single-point feasibility key-value file. The `protocol` line is
/// optional (it must say `feasibility` when present); grid lists are not
/// allowed here — that is the sweep subcommand's job.
pub fn parse_feasibility_kv(text: &str) -> Result<FeasibilitySpec> {
    let raw = parse_raw(text)?;
    if let Some(protocol) = &raw.protocol {
        if protocol != "feasibility" {
            return Err(Error::Config(format!(
                "feasibility config names protocol '{protocol}'"
            )));
        }
    }
    let allowed = allowed_keys("feasibility")?;
    for (key, grid) in raw.keys.iter().zip(&raw.grids) {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::Config(format!(
                "key '{key}' is not a feasibility parameter"
            )));
        }
        if grid.len() != 1 {
            return Err(Error::Config(format!(
                "key '{key}' lists {} values; use the sweep subcommand for grids",
                grid.len()
            )));
        }
    }
    let values: Vec<String> = raw.grids.iter().map(|g| g[0].clone()).collect();
    feasibility_spec_from(&PointValues {
        keys: &raw.keys,
        values: &values,
    })
}

fn allowed_keys(protocol: &str) -> Result<&'static [&'static str]> {
    Ok(match protocol {
        "teleport" => &["alpha", "beta"],
        "concentrate" => &["a", "b", "alpha", "beta"],
        "rsp" => &["a", "b", "mu", "nu"],
        "feasibility" => &[
            "pcav",
            "fcav",
            "length",
            "wavelength",
            "dipole",
            "gamma_nc",
            "eta",
            "xi",
            "a2",
            "rate",
        ],
        other => return Err(Error::Config(format!("unknown protocol '{other}'"))),
    })
}

/// Parse and expand a sweep configuration into executable points.
pub fn parse_sweep(text: &str) -> Result<Sweep> {
    let raw = parse_raw(text)?;
    let protocol = raw
        .protocol
        .clone()
        .ok_or_else(|| Error::Config("missing 'protocol = ...' line".into()))?;
    let allowed = allowed_keys(&protocol)?;
    for key in &raw.keys {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::Config(format!(
                "key '{key}' is not a parameter of protocol '{protocol}'"
            )));
        }
    }

    let mut points = Vec::new();
    let mut notes = Vec::new();
    for combo in combinations(&raw.grids) {
        let values = PointValues {
            keys: &raw.keys,
            values: &combo,
        };
        let mut point_notes = Vec::new();
        let point = match protocol.as_str() {
            "teleport" => {
                let (alpha, beta) =
                    pair(&values, raw.normalize, "alpha", "beta", &mut point_notes)?;
                SweepPoint::Teleport(TeleportInputs { alpha, beta })
            }
            "concentrate" => {
                let (a, b) = pair(&values, raw.normalize, "a", "b", &mut point_notes)?;
                let inputs = if values.get("alpha").is_some() || values.get("beta").is_some() {
                    let (alpha, beta) =
                        pair(&values, raw.normalize, "alpha", "beta", &mut point_notes)?;
                    ConcentrateInputs { alpha, beta, a, b }
                } else {
                    ConcentrateInputs::matched(a, b)
                };
                SweepPoint::Concentrate(inputs)
            }
            "rsp" => {
                let (a, b) = pair(&values, raw.normalize, "a", "b", &mut point_notes)?;
                let (nu, mu) = pair(&values, raw.normalize, "nu", "mu", &mut point_notes)?;
                SweepPoint::RemotePrepare(RemotePrepareInputs { a, b, mu, nu })
            }
            "feasibility" => SweepPoint::Feasibility(feasibility_spec_from(&values)?),
            _ => unreachable!("protocol validated"),
        };
        points.push(point);
        notes.push(point_notes);
    }
    Ok(Sweep { points, notes })
}
