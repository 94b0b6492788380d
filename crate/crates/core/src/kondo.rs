//! Exchange-scattering rate from the Kondo-renormalized coupling, and
//! classification of the gate-tunable coupling regimes.
//!
//! Above the Kondo temperature the effective exchange between the donor
//! electron and the conduction band is universal: it depends on `T/T_K`
//! only, through `|J_eff nu|^2 = [pi^2 + (4/3) |ln(T/T_K)|^2]^(-1)`. The
//! electron spin then relaxes isotropically at
//! `Gamma_e = 2 pi |J_eff nu|^2 omega_e coth(hbar omega_e / 2 k_B T)`.
//!
//! At or below `T_K` the conduction electrons screen the donor spin into a
//! singlet, the decay is non-exponential with only a scale `k_B T_K / hbar`
//! known, and this module refuses to produce a rate.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::params::SystemParams;
use crate::units::Constants;

#[derive(Debug, Error, PartialEq)]
pub enum KondoError {
    /// Perturbative exchange requires `T > T_K`.
    #[error("kondo screened: temperature {temperature} K <= T_K {t_kondo} K")]
    Screened { temperature: f64, t_kondo: f64 },
    #[error("polarization is zero; the requested temperature ratio diverges")]
    ZeroPolarization,
    #[error("drive amplitude must satisfy 0 < B_perp < B (B_perp={b_perp}, B={b})")]
    InvalidDrive { b_perp: f64, b: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
}

/// Gate-tunable coupling regime of the donor relative to the electron gas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CouplingRegime {
    /// `T <= T_K`: the donor spin is screened into a Kondo singlet.
    KondoScreened,
    /// `Gamma_e` within a factor 3 of `omega_e`: fast nuclear initialization.
    Strong,
    /// Drive present and `Gamma_e` within a factor 3 of `Omega_perp`:
    /// saturable resonance, quantum read-out.
    Weak,
    /// `Gamma_e < 1e-6 A`: effectively no contact with the electron gas.
    Decoupled,
    Intermediate,
}

/// Classification result with the raw numbers behind it, so callers can
/// apply their own bands.
#[derive(Debug, Clone, Serialize)]
pub struct RegimeReport {
    /// Exchange rate (rad/s). For [`CouplingRegime::KondoScreened`] this is
    /// the advisory scale `k_B T_K / hbar`, not a decay rate.
    pub gamma_e: f64,
    /// True when `gamma_e` is the screened advisory scale.
    pub gamma_e_is_advisory_scale: bool,
    /// Renormalized coupling `|J_eff nu|^2`; present only when derived from
    /// a Kondo temperature.
    pub jeff_nu_sq: Option<f64>,
    /// `ln(T/T_K)`; present only when both temperatures are known.
    pub log_ratio: Option<f64>,
    pub regime: CouplingRegime,
    /// `ln(T/T_K)` at which `Gamma_e ~ omega_e` (strong coupling).
    pub strong_threshold: Option<f64>,
    /// `ln(T/T_K)` at which `Gamma_e ~ Omega_perp` (optimal read-out).
    pub weak_threshold: Option<f64>,
}

/// Renormalized exchange coupling `|J_eff nu|^2` from the temperature ratio.
///
/// Valid for `T > T_K > 0`; the absolute value in `|ln(T/T_K)|^2` keeps the
/// expression well-defined arbitrarily close to `T_K` from above, where the
/// value tends to `1/pi^2`.
pub fn jeff_nu_squared(temperature: f64, t_kondo: f64) -> Result<f64, KondoError> {
    if !(temperature.is_finite() && t_kondo.is_finite() && t_kondo > 0.0) {
        return Err(KondoError::InvalidInput(
            "temperature and T_kondo must be finite with T_kondo > 0",
        ));
    }
    if temperature <= t_kondo {
        return Err(KondoError::Screened {
            temperature,
            t_kondo,
        });
    }
    let log = (temperature / t_kondo).ln().abs();
    Ok(1.0 / (PI * PI + (4.0 / 3.0) * log * log))
}

/// Exchange-scattering rate of the electron spin (rad/s).
///
/// `2 pi |J_eff nu|^2 omega_e coth(hbar omega_e / 2 k_B T)`. For small
/// arguments the product `omega_e coth(x)` is evaluated through its series
/// `2 k_B T / hbar + omega_e x / 3`, which keeps the result finite down to
/// `omega_e = 0` (where the thermal rate survives).
pub fn gamma_e(jeff_nu_sq: f64, omega_e: f64, temperature: f64, constants: &Constants) -> f64 {
    let x = constants.hbar * omega_e / (2.0 * constants.k_b * temperature);
    let omega_coth = if x < 1.0e-4 {
        2.0 * constants.k_b * temperature / constants.hbar + omega_e * x / 3.0
    } else {
        omega_e / x.tanh()
    };
    2.0 * PI * jeff_nu_sq * omega_coth
}

/// `ln(T/T_K)` at which the exchange rate reaches the electron Zeeman
/// frequency, `sqrt(3 pi / (2 |p_e|))`, in the approximation that drops the
/// `pi^2` in the coupling denominator.
pub fn strong_coupling_log_ratio(p_e: f64) -> Result<f64, KondoError> {
    let p = p_e.abs();
    if p == 0.0 {
        return Err(KondoError::ZeroPolarization);
    }
    if !(p.is_finite() && p <= 1.0) {
        return Err(KondoError::InvalidInput("|p_e| must lie in (0, 1]"));
    }
    Ok((3.0 * PI / (2.0 * p)).sqrt())
}

/// `ln(T/T_K)` at which the exchange rate matches the drive precession
/// frequency, `sqrt((3 pi / (2 |p_e|)) (B / B_perp))` — the saturation
/// threshold where read-out sensitivity is optimal.
pub fn weak_coupling_log_ratio(p_e: f64, b: f64, b_perp: f64) -> Result<f64, KondoError> {
    let p = p_e.abs();
    if p == 0.0 {
        return Err(KondoError::ZeroPolarization);
    }
    if !(p.is_finite() && p <= 1.0) {
        return Err(KondoError::InvalidInput("|p_e| must lie in (0, 1]"));
    }
    if !(b > 0.0 && b_perp > 0.0 && b_perp < b) {
        return Err(KondoError::InvalidDrive { b_perp, b });
    }
    Ok((3.0 * PI / (2.0 * p) * (b / b_perp)).sqrt())
}

/// Classify the coupling regime of a parameter set.
///
/// Regime bands are factor-3 windows around the exact conditions
/// `Gamma_e = omega_e` (strong) and `Gamma_e = Omega_perp` (weak); the
/// report carries the raw numbers so the bands are advisory.
pub fn classify_regime(params: &SystemParams) -> Result<RegimeReport, crate::params::ParamsError> {
    let strong_threshold = strong_coupling_log_ratio(params.p_e()).ok();
    let weak_threshold = match (params.b_field(), params.b_perp()) {
        (Some(b), Some(bp)) => weak_coupling_log_ratio(params.p_e(), b, bp).ok(),
        _ => None,
    };

    if let (Some(t), Some(tk)) = (params.temperature(), params.t_kondo()) {
        if tk > 0.0 && t <= tk {
            return Ok(RegimeReport {
                gamma_e: params.constants().k_b * tk / params.constants().hbar,
                gamma_e_is_advisory_scale: true,
                jeff_nu_sq: None,
                log_ratio: Some((t / tk).ln()),
                regime: CouplingRegime::KondoScreened,
                strong_threshold,
                weak_threshold,
            });
        }
    }

    let gamma = params.gamma_e()?;
    let (jeff, log_ratio) = match (params.temperature(), params.t_kondo()) {
        (Some(t), Some(tk)) if tk > 0.0 => (
            jeff_nu_squared(t, tk).ok(),
            Some((t / tk).ln()),
        ),
        _ => (None, None),
    };

    let omega_e = params.omega_e();
    let regime = if omega_e > 0.0 && gamma >= omega_e / 3.0 && gamma <= 3.0 * omega_e {
        CouplingRegime::Strong
    } else if let Some(op) = params.omega_perp().filter(|&op| {
        gamma >= op / 3.0 && gamma <= 3.0 * op
    }) {
        let _ = op;
        CouplingRegime::Weak
    } else if gamma < 1.0e-6 * params.a() {
        CouplingRegime::Decoupled
    } else {
        CouplingRegime::Intermediate
    };

    Ok(RegimeReport {
        gamma_e: gamma,
        gamma_e_is_advisory_scale: false,
        jeff_nu_sq: jeff,
        log_ratio,
        regime,
        strong_threshold,
        weak_threshold,
    })
}
