//! Config-file plus flag-override handling and initial-state parsing.

use donorspin::bloch::BlochState;
use donorspin::params::{self, SystemParams};
use nalgebra::Vector3;
use std::path::Path;

use crate::CliError;

/// Merge the optional config file with `--set KEY=VALUE` overrides (later
/// entries win) and build the parameter set.
pub fn load_params(config: Option<&Path>, overrides: &[String]) -> Result<SystemParams, CliError> {
    let mut kv: Vec<(String, String)> = Vec::new();
    if let Some(path) = config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))?;
        kv.extend(params::parse_key_values(&text).map_err(CliError::from_params)?);
    }
    for item in overrides {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("--set expects KEY=VALUE, got {item:?}")))?;
        kv.push((k.trim().to_string(), v.trim().to_string()));
    }
    if kv.is_empty() {
        return Err(CliError::Validation(
            "no parameters given: use --config and/or --set".into(),
        ));
    }
    params::build_from_keys(&kv).map_err(CliError::from_params)
}

/// Parse an initial-state specification.
///
/// Either named presets joined with `+` (`iz_up`: nucleus along +z,
/// `ix`: nucleus along +x, `thermal_e`: electron at its equilibrium
/// polarization) — combined as a product state — or 15 comma-separated
/// numbers in the flat component order (s, i, then the correlation matrix
/// row by row).
pub fn parse_state(spec: &str, params: &SystemParams) -> Result<BlochState, CliError> {
    if spec.contains(',') {
        let values: Vec<f64> = spec
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Validation(format!("state: not a number: {x:?}")))
            })
            .collect::<Result<_, _>>()?;
        if values.len() != 15 {
            return Err(CliError::Validation(format!(
                "state: expected 15 numbers, got {}",
                values.len()
            )));
        }
        let mut arr = [0.0; 15];
        arr.copy_from_slice(&values);
        return Ok(BlochState::from_array(&arr));
    }

    let mut s = Vector3::zeros();
    let mut i = Vector3::zeros();
    for preset in spec.split('+') {
        match preset.trim() {
            "iz_up" => i += Vector3::new(0.0, 0.0, 0.5),
            "ix" => i += Vector3::new(0.5, 0.0, 0.0),
            "thermal_e" => s += Vector3::new(0.0, 0.0, params.p_e() / 2.0),
            other => {
                return Err(CliError::Validation(format!(
                    "unknown state preset {other:?} (expected iz_up, ix, thermal_e, \
                     combinations with '+', or 15 comma-separated numbers)"
                )))
            }
        }
    }
    if s.norm() > 0.5 || i.norm() > 0.5 {
        return Err(CliError::Validation(
            "state presets combine to an overlong spin vector".into(),
        ));
    }
    Ok(BlochState::product(s, i))
}
