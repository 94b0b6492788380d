//! Validated container for all physical inputs.
//!
//! [`SystemParams`] is built either from laboratory quantities (field,
//! temperature, hyperfine coupling in rad/s) or in dimensionless mode, where
//! every frequency is a multiple of the hyperfine coupling and times are
//! `tau = A*t`. Derived quantities (Zeeman frequencies, combined frequency
//! `b_tilde = omega_e + omega_n`, equilibrium electron polarization `p_e`,
//! drive precession frequency `omega_perp`) are computed once at
//! construction and exposed read-only.
//!
//! `p_e = -tanh(hbar*omega_e / (2 k_B T))` carries a negative sign: the
//! electron polarizes against the field. All longitudinal fixed points in
//! this crate are `p_e/2` with that sign.

use serde::Serialize;
use thiserror::Error;

use crate::kondo::{self, KondoError};
use crate::units::Constants;

/// Ratio used to default the nuclear Zeeman frequency in dimensionless mode.
fn nuclear_ratio(constants: &Constants) -> f64 {
    constants.gamma_n / constants.gamma_e
}

#[derive(Debug, Error, PartialEq)]
pub enum ParamsError {
    #[error("missing mandatory key: {0}")]
    MissingKey(String),
    #[error("{field}: {requirement} (got {value})")]
    InvalidValue {
        field: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("both T_kondo and gamma_e_override supplied; exactly one allowed")]
    ConflictingGammaSources,
    #[error("gamma_e unavailable: supply T_kondo or gamma_e_override")]
    GammaUnavailable,
    #[error(transparent)]
    Kondo(#[from] KondoError),
    #[error("config line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown key: {0}")]
    UnknownKey(String),
    #[error("key {key} is not valid in {mode} mode")]
    WrongMode { key: String, mode: &'static str },
}

/// All inputs of the spin-pair model plus derived frequencies.
///
/// Immutable after construction; cheap to clone and safe to share across
/// threads.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemParams {
    constants: Constants,
    dimensionless: bool,
    /// Hyperfine coupling (rad/s, or multiples of the unit scale).
    a: f64,
    b_field: Option<f64>,
    temperature: Option<f64>,
    t_kondo: Option<f64>,
    gamma_e_override: Option<f64>,
    b_perp: Option<f64>,
    omega_esr: Option<f64>,
    current: Option<f64>,
    gamma_i: Option<f64>,
    gamma_c: Option<f64>,
    // Derived.
    omega_e: f64,
    omega_n: f64,
    p_e: f64,
    omega_perp: Option<f64>,
}

impl SystemParams {
    /// Start a builder from laboratory inputs: hyperfine coupling (rad/s),
    /// static field (T), temperature (K).
    pub fn physical(a: f64, b_field: f64, temperature: f64) -> PhysicalBuilder {
        PhysicalBuilder {
            constants: Constants::default(),
            a,
            b_field,
            temperature,
            t_kondo: None,
            gamma_e_override: None,
            b_perp: None,
            omega_esr: None,
            current: None,
            gamma_i: None,
            gamma_c: None,
        }
    }

    /// Start a builder in dimensionless mode: frequencies in units of the
    /// hyperfine coupling (which defaults to 1), times in `tau = A*t`.
    pub fn dimensionless() -> DimensionlessBuilder {
        DimensionlessBuilder {
            constants: Constants::default(),
            a: 1.0,
            omega_e: 0.0,
            omega_n: None,
            gamma_e: None,
            p_e: 0.0,
            omega_perp: None,
            omega_esr: None,
            gamma_i: None,
            gamma_c: None,
        }
    }

    pub fn constants(&self) -> &Constants {
        &self.constants
    }

    pub fn is_dimensionless(&self) -> bool {
        self.dimensionless
    }

    /// Hyperfine coupling (rad/s).
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Electron Zeeman frequency (rad/s).
    pub fn omega_e(&self) -> f64 {
        self.omega_e
    }

    /// Nuclear Zeeman frequency (rad/s).
    pub fn omega_n(&self) -> f64 {
        self.omega_n
    }

    /// Combined frequency `omega_e + omega_n`, the flip-flop coherence
    /// frequency.
    pub fn b_tilde(&self) -> f64 {
        self.omega_e + self.omega_n
    }

    /// Equilibrium electron polarization, in [-1, 0].
    pub fn p_e(&self) -> f64 {
        self.p_e
    }

    /// Drive precession frequency `gamma_e * B_perp` (rad/s), if a drive is
    /// configured.
    pub fn omega_perp(&self) -> Option<f64> {
        self.omega_perp
    }

    /// Drive carrier frequency (rad/s), if configured.
    pub fn omega_esr(&self) -> Option<f64> {
        self.omega_esr
    }

    pub fn b_field(&self) -> Option<f64> {
        self.b_field
    }

    pub fn b_perp(&self) -> Option<f64> {
        self.b_perp
    }

    pub fn temperature(&self) -> Option<f64> {
        self.temperature
    }

    pub fn t_kondo(&self) -> Option<f64> {
        self.t_kondo
    }

    pub fn gamma_e_override(&self) -> Option<f64> {
        self.gamma_e_override
    }

    /// Device current (A), if configured.
    pub fn current(&self) -> Option<f64> {
        self.current
    }

    /// Ionization rate (1/s), if configured.
    pub fn gamma_i(&self) -> Option<f64> {
        self.gamma_i
    }

    /// Capture rate (1/s), if configured.
    pub fn gamma_c(&self) -> Option<f64> {
        self.gamma_c
    }

    /// Exchange-scattering rate of the electron spin (rad/s).
    ///
    /// Resolved from the override when present, otherwise from the Kondo
    /// temperature. `T_kondo = 0` means the spin pair is decoupled from the
    /// electron gas and yields zero. Temperatures at or below the Kondo
    /// temperature are refused: there the screened rate scale is
    /// `k_B T_K / hbar` but the exponential-decay model does not apply.
    pub fn gamma_e(&self) -> Result<f64, ParamsError> {
        if let Some(g) = self.gamma_e_override {
            return Ok(g);
        }
        match (self.t_kondo, self.temperature) {
            (Some(tk), _) if tk == 0.0 => Ok(0.0),
            (Some(tk), Some(t)) => {
                let jeff = kondo::jeff_nu_squared(t, tk)?;
                Ok(kondo::gamma_e(jeff, self.omega_e, t, &self.constants))
            }
            _ => Err(ParamsError::GammaUnavailable),
        }
    }

    /// True when a resonant drive is configured.
    pub fn has_drive(&self) -> bool {
        self.omega_perp.is_some() && self.omega_esr.is_some()
    }
}

#[derive(Debug, Clone)]
pub struct PhysicalBuilder {
    constants: Constants,
    a: f64,
    b_field: f64,
    temperature: f64,
    t_kondo: Option<f64>,
    gamma_e_override: Option<f64>,
    b_perp: Option<f64>,
    omega_esr: Option<f64>,
    current: Option<f64>,
    gamma_i: Option<f64>,
    gamma_c: Option<f64>,
}

impl PhysicalBuilder {
    pub fn constants(mut self, c: Constants) -> Self {
        self.constants = c;
        self
    }

    /// Kondo temperature (K). Mutually exclusive with the rate override.
    pub fn t_kondo(mut self, t_kondo_k: f64) -> Self {
        self.t_kondo = Some(t_kondo_k);
        self
    }

    /// Direct exchange rate (rad/s), bypassing the Kondo formulas.
    pub fn gamma_e_override(mut self, gamma: f64) -> Self {
        self.gamma_e_override = Some(gamma);
        self
    }

    /// Resonant microwave drive: amplitude (T) and carrier frequency (rad/s).
    pub fn drive(mut self, b_perp_tesla: f64, omega_esr: f64) -> Self {
        self.b_perp = Some(b_perp_tesla);
        self.omega_esr = Some(omega_esr);
        self
    }

    /// Device current (A).
    pub fn current(mut self, amps: f64) -> Self {
        self.current = Some(amps);
        self
    }

    /// Ionization and capture rates (1/s) for recombination-based read-out.
    pub fn recombination(mut self, gamma_i: f64, gamma_c: f64) -> Self {
        self.gamma_i = Some(gamma_i);
        self.gamma_c = Some(gamma_c);
        self
    }

    pub fn build(self) -> Result<SystemParams, ParamsError> {
        if !self.constants.is_valid() {
            return Err(ParamsError::InvalidValue {
                field: "constants",
                requirement: "all constants strictly positive",
                value: f64::NAN,
            });
        }
        require(self.a, "A", Sign::NonNegative)?;
        require(self.b_field, "B", Sign::Positive)?;
        require(self.temperature, "temperature", Sign::Positive)?;
        if self.t_kondo.is_some() && self.gamma_e_override.is_some() {
            return Err(ParamsError::ConflictingGammaSources);
        }
        if let Some(tk) = self.t_kondo {
            require(tk, "T_kondo", Sign::NonNegative)?;
        }
        if let Some(g) = self.gamma_e_override {
            require(g, "gamma_e_override", Sign::NonNegative)?;
        }
        if let Some(bp) = self.b_perp {
            require(bp, "B_perp", Sign::Positive)?;
        }
        if let Some(w) = self.omega_esr {
            require(w, "omega_esr", Sign::Positive)?;
        }
        if let Some(i) = self.current {
            require(i, "current", Sign::Positive)?;
        }
        if let Some(g) = self.gamma_i {
            require(g, "gamma_i", Sign::NonNegative)?;
        }
        if let Some(g) = self.gamma_c {
            require(g, "gamma_c", Sign::NonNegative)?;
        }

        let omega_e = self.constants.gamma_e * self.b_field;
        let omega_n = self.constants.gamma_n * self.b_field;
        let p_e =
            -(self.constants.hbar * omega_e / (2.0 * self.constants.k_b * self.temperature)).tanh();
        let omega_perp = self.b_perp.map(|bp| self.constants.gamma_e * bp);

        Ok(SystemParams {
            constants: self.constants,
            dimensionless: false,
            a: self.a,
            b_field: Some(self.b_field),
            temperature: Some(self.temperature),
            t_kondo: self.t_kondo,
            gamma_e_override: self.gamma_e_override,
            b_perp: self.b_perp,
            omega_esr: self.omega_esr,
            current: self.current,
            gamma_i: self.gamma_i,
            gamma_c: self.gamma_c,
            omega_e,
            omega_n,
            p_e,
            omega_perp,
        })
    }
}

#[derive(Debug, Clone)]
pub struct DimensionlessBuilder {
    constants: Constants,
    a: f64,
    omega_e: f64,
    omega_n: Option<f64>,
    gamma_e: Option<f64>,
    p_e: f64,
    omega_perp: Option<f64>,
    omega_esr: Option<f64>,
    gamma_i: Option<f64>,
    gamma_c: Option<f64>,
}

impl DimensionlessBuilder {
    pub fn constants(mut self, c: Constants) -> Self {
        self.constants = c;
        self
    }

    /// Hyperfine coupling in unit-scale multiples (default 1).
    pub fn hyperfine(mut self, a: f64) -> Self {
        self.a = a;
        self
    }

    /// Electron Zeeman frequency, multiples of the unit scale.
    pub fn omega_e(mut self, x: f64) -> Self {
        self.omega_e = x;
        self
    }

    /// Nuclear Zeeman frequency. Defaults to `omega_e * gamma_n/gamma_e`.
    pub fn omega_n(mut self, x: f64) -> Self {
        self.omega_n = Some(x);
        self
    }

    /// Exchange rate, multiples of the unit scale.
    pub fn gamma_e(mut self, x: f64) -> Self {
        self.gamma_e = Some(x);
        self
    }

    /// Electron equilibrium polarization, in [-1, 0].
    pub fn p_e(mut self, x: f64) -> Self {
        self.p_e = x;
        self
    }

    /// Resonant drive: precession frequency and carrier, unit-scale
    /// multiples.
    pub fn drive(mut self, omega_perp: f64, omega_esr: f64) -> Self {
        self.omega_perp = Some(omega_perp);
        self.omega_esr = Some(omega_esr);
        self
    }

    /// Ionization and capture rates, unit-scale multiples.
    pub fn recombination(mut self, gamma_i: f64, gamma_c: f64) -> Self {
        self.gamma_i = Some(gamma_i);
        self.gamma_c = Some(gamma_c);
        self
    }

    pub fn build(self) -> Result<SystemParams, ParamsError> {
        require(self.a, "A", Sign::NonNegative)?;
        require(self.omega_e, "omega_e", Sign::NonNegative)?;
        if let Some(w) = self.omega_n {
            require(w, "omega_n", Sign::NonNegative)?;
        }
        if let Some(g) = self.gamma_e {
            require(g, "gamma_e", Sign::NonNegative)?;
        }
        if !(self.p_e.is_finite() && (-1.0..=0.0).contains(&self.p_e)) {
            return Err(ParamsError::InvalidValue {
                field: "p_e",
                requirement: "must lie in [-1, 0]",
                value: self.p_e,
            });
        }
        if let Some(w) = self.omega_perp {
            require(w, "omega_perp", Sign::Positive)?;
        }
        if let Some(w) = self.omega_esr {
            require(w, "omega_esr", Sign::Positive)?;
        }
        if let Some(g) = self.gamma_i {
            require(g, "gamma_i", Sign::NonNegative)?;
        }
        if let Some(g) = self.gamma_c {
            require(g, "gamma_c", Sign::NonNegative)?;
        }

        let omega_n = self
            .omega_n
            .unwrap_or_else(|| self.omega_e * nuclear_ratio(&self.constants));
        Ok(SystemParams {
            constants: self.constants,
            dimensionless: true,
            a: self.a,
            b_field: None,
            temperature: None,
            t_kondo: None,
            gamma_e_override: self.gamma_e,
            b_perp: None,
            omega_esr: self.omega_esr,
            current: None,
            gamma_i: self.gamma_i,
            gamma_c: self.gamma_c,
            omega_e: self.omega_e,
            omega_n,
            p_e: self.p_e,
            omega_perp: self.omega_perp,
        })
    }
}

enum Sign {
    Positive,
    NonNegative,
}

fn require(value: f64, field: &'static str, sign: Sign) -> Result<(), ParamsError> {
    let ok = value.is_finite()
        && match sign {
            Sign::Positive => value > 0.0,
            Sign::NonNegative => value >= 0.0,
        };
    if ok {
        Ok(())
    } else {
        Err(ParamsError::InvalidValue {
            field,
            requirement: match sign {
                Sign::Positive => "must be finite and > 0",
                Sign::NonNegative => "must be finite and >= 0",
            },
            value,
        })
    }
}

/// Parse the flat `key=value` config format into parameters.
///
/// One `key=value` per line, `#` starts a comment, blank lines ignored.
/// Physical-mode keys: `A_MHz`, `B_T`, `temperature_K`, `T_kondo_K`,
/// `gamma_e_override_rad_s`, `B_perp_G`, `f_esr_GHz`, `current_uA`,
/// `gamma_i_per_s`, `gamma_c_per_s`. With `dimensionless=true` the keys are
/// instead unit-scale multiples: `A` (default 1), `omega_e`, `omega_n`,
/// `gamma_e`, `p_e`, `omega_perp`, `omega_esr`, `gamma_i`, `gamma_c`.
pub fn load_params(config_text: &str) -> Result<SystemParams, ParamsError> {
    let kv = parse_key_values(config_text)?;
    build_from_keys(&kv)
}

/// A parsed `key=value` map, in file order. Later duplicates win.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>, ParamsError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ParamsError::Parse {
            line: idx + 1,
            msg: format!("expected key=value, got {line:?}"),
        })?;
        out.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(out)
}

const PHYSICAL_KEYS: &[&str] = &[
    "A_MHz",
    "B_T",
    "temperature_K",
    "T_kondo_K",
    "gamma_e_override_rad_s",
    "B_perp_G",
    "f_esr_GHz",
    "current_uA",
    "gamma_i_per_s",
    "gamma_c_per_s",
];

const DIMENSIONLESS_KEYS: &[&str] = &[
    "A", "omega_e", "omega_n", "gamma_e", "p_e", "omega_perp", "omega_esr", "gamma_i", "gamma_c",
];

/// Build parameters from an already-parsed key list (the CLI merges file
/// keys with flag overrides before calling this).
pub fn build_from_keys(kv: &[(String, String)]) -> Result<SystemParams, ParamsError> {
    let mut map = std::collections::BTreeMap::new();
    for (k, v) in kv {
        map.insert(k.as_str(), v.as_str());
    }

    let dimensionless = match map.remove("dimensionless") {
        None => false,
        Some(v) => parse_bool(v)?,
    };

    let known: &[&str] = if dimensionless {
        DIMENSIONLESS_KEYS
    } else {
        PHYSICAL_KEYS
    };
    for key in map.keys() {
        if !known.contains(key) {
            let other: &[&str] = if dimensionless {
                PHYSICAL_KEYS
            } else {
                DIMENSIONLESS_KEYS
            };
            if other.contains(key) {
                return Err(ParamsError::WrongMode {
                    key: key.to_string(),
                    mode: if dimensionless {
                        "dimensionless"
                    } else {
                        "physical"
                    },
                });
            }
            return Err(ParamsError::UnknownKey(key.to_string()));
        }
    }

    let get = |key: &str| -> Result<Option<f64>, ParamsError> {
        map.get(key)
            .map(|v| {
                v.parse::<f64>().map_err(|_| ParamsError::Parse {
                    line: 0,
                    msg: format!("key {key}: not a number: {v:?}"),
                })
            })
            .transpose()
    };
    let need = |key: &'static str, v: Option<f64>| -> Result<f64, ParamsError> {
        v.ok_or_else(|| ParamsError::MissingKey(key.to_string()))
    };

    if dimensionless {
        let mut b = SystemParams::dimensionless();
        if let Some(a) = get("A")? {
            b = b.hyperfine(a);
        }
        b = b.omega_e(need("omega_e", get("omega_e")?)?);
        if let Some(x) = get("omega_n")? {
            b = b.omega_n(x);
        }
        if let Some(x) = get("gamma_e")? {
            b = b.gamma_e(x);
        }
        if let Some(x) = get("p_e")? {
            b = b.p_e(x);
        }
        match (get("omega_perp")?, get("omega_esr")?) {
            (Some(wp), Some(we)) => b = b.drive(wp, we),
            (Some(wp), None) => b = b.drive(wp, need("omega_esr", None)?),
            (None, Some(_)) => return Err(ParamsError::MissingKey("omega_perp".into())),
            (None, None) => {}
        }
        if let (Some(gi), Some(gc)) = (get("gamma_i")?, get("gamma_c")?) {
            b = b.recombination(gi, gc);
        }
        b.build()
    } else {
        let a = crate::units::to_angular(need("A_MHz", get("A_MHz")?)? * 1.0e6);
        let b_t = need("B_T", get("B_T")?)?;
        let temp = need("temperature_K", get("temperature_K")?)?;
        let mut b = SystemParams::physical(a, b_t, temp);
        if let Some(tk) = get("T_kondo_K")? {
            b = b.t_kondo(tk);
        }
        if let Some(g) = get("gamma_e_override_rad_s")? {
            b = b.gamma_e_override(g);
        }
        match (get("B_perp_G")?, get("f_esr_GHz")?) {
            (Some(bp), Some(f)) => {
                b = b.drive(
                    crate::units::gauss_to_tesla(bp),
                    crate::units::to_angular(f * 1.0e9),
                )
            }
            (Some(_), None) => return Err(ParamsError::MissingKey("f_esr_GHz".into())),
            (None, Some(_)) => return Err(ParamsError::MissingKey("B_perp_G".into())),
            (None, None) => {}
        }
        if let Some(i) = get("current_uA")? {
            b = b.current(i * 1.0e-6);
        }
        if let (Some(gi), Some(gc)) = (get("gamma_i_per_s")?, get("gamma_c_per_s")?) {
            b = b.recombination(gi, gc);
        }
        b.build()
    }
}

fn parse_bool(v: &str) -> Result<bool, ParamsError> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(ParamsError::Parse {
            line: 0,
            msg: format!("key dimensionless: not a bool: {v:?}"),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::TAU;

    fn phosphorus(temp_k: f64) -> SystemParams {
        SystemParams::physical(crate::units::to_angular(120.0e6), 1.0, temp_k)
            .gamma_e_override(1.0e9)
            .build()
            .unwrap()
    }

    #[test]
    fn derived_zeeman_frequencies() {
        let p = phosphorus(1.0);
        assert_relative_eq!(p.omega_e() / TAU, 28.0e9, max_relative = 1e-12);
        assert_relative_eq!(p.omega_n() / TAU, 17.23e6, max_relative = 1e-12);
        assert!(p.b_tilde() > p.omega_e());
    }

    #[test]
    fn polarization_saturates_cold() {
        let p = phosphorus(1.0e-6);
        assert_abs_diff_eq!(p.p_e(), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn polarization_negative_and_monotone_in_temperature() {
        let mut prev = -2.0;
        for t in [0.1, 0.5, 1.0, 4.2, 77.0, 300.0] {
            let p = phosphorus(t);
            assert!(p.p_e() < 0.0 && p.p_e() > -1.0);
            assert!(p.p_e() > prev, "p_e must increase toward 0 with T");
            prev = p.p_e();
        }
    }

    #[test]
    fn gamma_sources_are_exclusive() {
        let err = SystemParams::physical(1.0, 1.0, 1.0)
            .t_kondo(0.1)
            .gamma_e_override(1.0)
            .build()
            .unwrap_err();
        assert_eq!(err, ParamsError::ConflictingGammaSources);
    }

    #[test]
    fn gamma_unavailable_without_source() {
        let p = SystemParams::physical(1.0, 1.0, 1.0).build().unwrap();
        assert_eq!(p.gamma_e().unwrap_err(), ParamsError::GammaUnavailable);
    }

    #[test]
    fn kondo_zero_means_decoupled() {
        let p = SystemParams::physical(1.0, 1.0, 1.0)
            .t_kondo(0.0)
            .build()
            .unwrap();
        assert_eq!(p.gamma_e().unwrap(), 0.0);
    }

    #[test]
    fn rejects_nonpositive_inputs() {
        assert!(SystemParams::physical(1.0, 0.0, 1.0).build().is_err());
        assert!(SystemParams::physical(1.0, 1.0, -3.0).build().is_err());
        assert!(SystemParams::physical(-1.0, 1.0, 1.0).build().is_err());
        assert!(SystemParams::physical(f64::NAN, 1.0, 1.0).build().is_err());
    }

    #[test]
    fn load_params_physical() {
        let text = "\
# phosphorus donor at 1 T
A_MHz = 120
B_T = 1.0
temperature_K = 1.0
gamma_e_override_rad_s = 1.0e9
";
        let p = load_params(text).unwrap();
        assert_relative_eq!(p.omega_e() / TAU / 1e9, 28.0, max_relative = 1e-12);
        assert_eq!(p.gamma_e().unwrap(), 1.0e9);
    }

    #[test]
    fn load_params_dimensionless() {
        let text = "dimensionless=true\nomega_e=50\ngamma_e=1.0\np_e=-1\n";
        let p = load_params(text).unwrap();
        assert!(p.is_dimensionless());
        assert_eq!(p.a(), 1.0);
        assert_eq!(p.omega_e(), 50.0);
        assert_eq!(p.p_e(), -1.0);
        assert_eq!(p.gamma_e().unwrap(), 1.0);
        // Default nuclear frequency follows the gyromagnetic ratio.
        assert_relative_eq!(p.omega_n(), 50.0 * 17.23e6 / 28.0e9, max_relative = 1e-12);
    }

    #[test]
    fn load_params_is_deterministic() {
        let text = "A_MHz=120\nB_T=1.0\ntemperature_K=1.0\nT_kondo_K=0.1\n";
        let p1 = load_params(text).unwrap();
        let p2 = load_params(text).unwrap();
        assert_eq!(p1, p2);
        assert_eq!(p1.p_e().to_bits(), p2.p_e().to_bits());
    }

    #[test]
    fn load_params_rejects_wrong_mode_keys() {
        let err = load_params("dimensionless=true\nomega_e=50\nB_T=1.0\n").unwrap_err();
        assert!(matches!(err, ParamsError::WrongMode { .. }));
        let err = load_params("A_MHz=120\nB_T=1\ntemperature_K=1\np_e=-0.5\n").unwrap_err();
        assert!(matches!(err, ParamsError::WrongMode { .. }));
    }

    #[test]
    fn load_params_reports_missing_keys() {
        let err = load_params("A_MHz=120\nB_T=1.0\n").unwrap_err();
        assert_eq!(err, ParamsError::MissingKey("temperature_K".into()));
    }
}
