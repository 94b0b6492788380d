//! Deterministic CSV and JSON emission.
//!
//! Data files carry no timestamps and format every float with 17
//! significant digits, so identical configs produce byte-identical files.
//! Run metadata (including a timestamp) goes to a `.meta.json` sidecar.

use donorspin::bloch::Trajectory;
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::CliError;

/// 17 significant digits, bit-stable.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub const TRAJECTORY_HEADER: &str =
    "t,Sx,Sy,Sz,Ix,Iy,Iz,SIxx,SIxy,SIxz,SIyx,SIyy,SIyz,SIzx,SIzy,SIzz";

pub fn write_trajectory_csv(out: &mut dyn Write, traj: &Trajectory) -> std::io::Result<()> {
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    for (t, state) in traj.times().iter().zip(traj.states()) {
        let mut row = Vec::with_capacity(16);
        row.push(fmt_float(*t));
        for v in state.to_array() {
            row.push(fmt_float(v));
        }
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Write `content` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, content: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, content)
            .map_err(|e| CliError::Validation(format!("write {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(content)
            .map_err(|e| CliError::Validation(format!("stdout: {e}"))),
    }
}

/// Sidecar metadata written next to CSV outputs; the only place a
/// timestamp appears.
#[derive(Serialize)]
pub struct Sidecar<'a, P: Serialize> {
    pub command: &'a str,
    pub params: P,
    pub solver: &'a str,
    pub frame: &'a str,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub detail: serde_json::Value,
    pub generated_unix_ms: u128,
}

pub fn write_sidecar<P: Serialize>(csv_path: &Path, sidecar: &Sidecar<P>) -> Result<(), CliError> {
    let path = sidecar_path(csv_path);
    let text = serde_json::to_string_pretty(sidecar)
        .map_err(|e| CliError::Validation(format!("sidecar: {e}")))?;
    std::fs::write(&path, text + "\n")
        .map_err(|e| CliError::Validation(format!("write {}: {e}", path.display())))
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    let mut os = csv_path.as_os_str().to_owned();
    os.push(".meta.json");
    PathBuf::from(os)
}

/// Insert a tag before the extension: `out.csv` -> `out.bloch.csv`.
pub fn tagged_path(path: &Path, tag: &str) -> PathBuf {
    match path.extension() {
        Some(ext) => {
            let stem = path.with_extension("");
            PathBuf::from(format!(
                "{}.{tag}.{}",
                stem.display(),
                ext.to_string_lossy()
            ))
        }
        None => PathBuf::from(format!("{}.{tag}", path.display())),
    }
}

pub fn now_unix_ms() -> u128 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

pub fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Validation(format!("json: {e}")))?;
    println!("{text}");
    Ok(())
}
