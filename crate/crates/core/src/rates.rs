//! Nuclear-spin relaxation and decoherence rates.
//!
//! Closed forms for the current-induced nuclear decoherence rate `1/T2n`
//! and spin-flip rate `1/T1n`, their exact maximizers, the substitution
//! rules for driven and recombination-based read-out, and least-squares
//! extraction of rates from solver trajectories.
//!
//! In the frame co-rotating with both spins, the transverse nuclear
//! envelope and the longitudinal deviation `<I_z> - p_e/2` decay as single
//! exponentials up to corrections of order `(A/omega_e)^2`:
//!
//! ```text
//! 1/T2n = (1/2) Gamma_e / (1 + 2 (Gamma_e/A)^2)
//! 1/T1n =       Gamma_e / (1 + 2 (Gamma_e/A)^2 + 2 (Btilde/A)^2)
//! ```
//!
//! `1/T2n` is maximal at `Gamma_e = A/sqrt(2)` and falls off as
//! `A^2/(4 Gamma_e)` beyond it (motional narrowing). `1/T1n` peaks where
//! the electron fluctuation rate matches the flip-flop frequency `Btilde`.

use serde::Serialize;
use thiserror::Error;

use crate::bloch::Trajectory;

#[derive(Debug, Error, PartialEq)]
pub enum RatesError {
    #[error("drive precession frequency must be positive (got {0})")]
    NonPositiveDrive(f64),
    #[error("recombination substitution requested with gamma_i = gamma_c = 0")]
    NoRecombinationChannel,
    #[error("negative rate input: {0}")]
    NegativeRate(&'static str),
}

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error(
        "observable does not decay enough to fit (reached {decayed_to_fraction:.3} of its \
         initial deviation; need 1/e)"
    )]
    InsufficientDecay { decayed_to_fraction: f64 },
    #[error("too few samples inside the fit window ({0})")]
    TooFewPoints(usize),
}

/// Where a rate came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RateSource {
    Analytic,
    FittedFromBloch,
    FittedFromLindblad,
}

/// Diagnostics of an exponential fit.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FitDiagnostics {
    /// RMS residual of the straight-line fit in log space.
    pub rms_log_residual: f64,
    /// Time window `[start, end]` actually used.
    pub window: (f64, f64),
    pub n_points: usize,
    /// Asymptote subtracted before fitting.
    pub asymptote: f64,
    /// Mean of the raw observable over the trailing tenth of the
    /// trajectory, for comparison with the assumed asymptote.
    pub long_time_mean: f64,
    /// Set when the log residual exceeds 0.05: the decay is not a single
    /// exponential over the window.
    pub non_exponential: bool,
}

/// A consistent set of electron and nuclear rates.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateSet {
    /// Electron exchange rate actually used (rad/s).
    pub gamma_e: f64,
    /// Nuclear decoherence rate (1/s).
    pub inv_t2n: f64,
    /// Nuclear spin-flip rate (1/s).
    pub inv_t1n: f64,
    pub source: RateSource,
    pub fit: Option<FitDiagnostics>,
    /// Set when a substitution rule was applied outside its soft validity
    /// window.
    pub validity_warning: bool,
}

/// Nuclear decoherence rate `1/T2n` from the electron exchange rate.
pub fn inv_t2n_analytic(gamma_e: f64, a: f64) -> f64 {
    inv_t2n_analytic_asq(gamma_e, a * a)
}

/// `1/T2n` parameterized by the squared coupling, for recombination-mode
/// inputs where only an averaged `A^2` survives.
pub fn inv_t2n_analytic_asq(gamma_e: f64, a_sq: f64) -> f64 {
    0.5 * gamma_e / (1.0 + 2.0 * gamma_e * gamma_e / a_sq)
}

/// Nuclear spin-flip rate `1/T1n` from the electron exchange rate.
pub fn inv_t1n_analytic(gamma_e: f64, a: f64, b_tilde: f64) -> f64 {
    inv_t1n_analytic_asq(gamma_e, a * a, b_tilde)
}

/// `1/T1n` parameterized by the squared coupling.
pub fn inv_t1n_analytic_asq(gamma_e: f64, a_sq: f64, b_tilde: f64) -> f64 {
    gamma_e / (1.0 + 2.0 * gamma_e * gamma_e / a_sq + 2.0 * b_tilde * b_tilde / a_sq)
}

/// Exact maximizer of `1/T1n` over the exchange rate.
///
/// Returns `(gamma_e_star, max_rate)` with
/// `gamma_e_star = sqrt(A^2/2 + Btilde^2)` and
/// `max_rate = A / (2 sqrt(2) sqrt(1 + 2 (Btilde/A)^2))`. For
/// `Btilde >> A` these reduce to `gamma_e_star ~ Btilde` and
/// `max_rate ~ A^2/(4 Btilde)`.
pub fn t1n_peak(a: f64, b_tilde: f64) -> (f64, f64) {
    let gamma_star = (a * a / 2.0 + b_tilde * b_tilde).sqrt();
    let max_rate = a / (2.0 * std::f64::consts::SQRT_2 * (1.0 + 2.0 * (b_tilde / a).powi(2)).sqrt());
    (gamma_star, max_rate)
}

/// Nuclear rates under saturating resonant drive: the electron fluctuation
/// rate is replaced by the drive precession frequency `Omega_perp`.
///
/// The substitution holds for `Omega_perp >~ Gamma_e` (saturation) and
/// `Omega_perp << A`; outside that soft window the rates are still computed
/// but `validity_warning` is set. For `Omega_perp << A` and
/// `Btilde ~ omega_e` the results reduce to `T1n ~ 2 (omega_e/A)^2 /
/// Omega_perp` and `T2n ~ 2 / Omega_perp`.
pub fn apply_drive_substitution(
    a: f64,
    b_tilde: f64,
    gamma_e: Option<f64>,
    omega_perp: f64,
) -> Result<RateSet, RatesError> {
    if !(omega_perp > 0.0) {
        return Err(RatesError::NonPositiveDrive(omega_perp));
    }
    let saturated = gamma_e.map(|g| omega_perp >= g).unwrap_or(true);
    let weak_drive = omega_perp <= 0.1 * a;
    Ok(RateSet {
        gamma_e: omega_perp,
        inv_t2n: inv_t2n_analytic(omega_perp, a),
        inv_t1n: inv_t1n_analytic(omega_perp, a, b_tilde),
        source: RateSource::Analytic,
        fit: None,
        validity_warning: !(saturated && weak_drive),
    })
}

/// Effective inputs for recombination-based read-out: capture and
/// ionization add to the fluctuation rate, and capture dilutes the
/// effective squared hyperfine coupling (a captured singlet exerts no
/// hyperfine field on the nucleus).
///
/// Returns `(gamma_eff, a_sq_eff) = (Gamma_e + Gamma_i + Gamma_c,
/// A^2 Gamma_i / (Gamma_i + Gamma_c))`.
pub fn apply_recombination_substitution(
    gamma_e: f64,
    gamma_i: f64,
    gamma_c: f64,
    a: f64,
) -> Result<(f64, f64), RatesError> {
    if gamma_e < 0.0 {
        return Err(RatesError::NegativeRate("gamma_e"));
    }
    if gamma_i < 0.0 {
        return Err(RatesError::NegativeRate("gamma_i"));
    }
    if gamma_c < 0.0 {
        return Err(RatesError::NegativeRate("gamma_c"));
    }
    if gamma_i + gamma_c == 0.0 {
        return Err(RatesError::NoRecombinationChannel);
    }
    Ok((
        gamma_e + gamma_i + gamma_c,
        a * a * gamma_i / (gamma_i + gamma_c),
    ))
}

/// Probability that the nuclear spin survives a projective read-out of
/// duration `max(T2n, t_edmr)` unflipped: `exp(-max(T2n, t_edmr)/T1n)`.
pub fn readout_contrast(inv_t2n: f64, inv_t1n: f64, t_edmr: f64) -> f64 {
    (-(1.0 / inv_t2n).max(t_edmr) * inv_t1n).exp()
}

/// Observable to extract a decay rate from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Observable {
    /// `|<I>_perp|`, the rotating-frame transverse envelope (equal to the
    /// lab-frame magnitude by rotation invariance). Decays to zero at
    /// `1/T2n`.
    TransversePerpMagnitude,
    /// `<I_z>`, decaying toward `p_e/2` at `1/T1n`.
    Iz,
}

/// Result of [`fit_exponential_rate`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateFit {
    /// Fitted decay rate (same inverse-time unit as the trajectory axis).
    pub rate: f64,
    pub diagnostics: FitDiagnostics,
}

/// Least-squares exponential rate extraction.
///
/// The asymptote is subtracted analytically (`p_e/2` for `<I_z>`, zero for
/// the transverse envelope), then `ln|y - y_inf|` is fit linearly over the
/// window where the deviation lies within `[5%, 80%]` of its initial value.
/// The window excludes both the early non-secular wiggles at the Zeeman
/// scale and the late-time noise floor.
pub fn fit_exponential_rate(
    traj: &Trajectory,
    observable: Observable,
    p_e: f64,
) -> Result<RateFit, FitError> {
    let (values, asymptote): (Vec<f64>, f64) = match observable {
        Observable::TransversePerpMagnitude => {
            (traj.states().iter().map(|s| s.i_perp()).collect(), 0.0)
        }
        Observable::Iz => (traj.states().iter().map(|s| s.i[2]).collect(), p_e / 2.0),
    };
    let times = traj.times();

    let deviations: Vec<f64> = values.iter().map(|y| (y - asymptote).abs()).collect();
    let d0 = deviations[0];
    let d_min = deviations.iter().copied().fold(f64::INFINITY, f64::min);
    if d0 == 0.0 || d_min > d0 / std::f64::consts::E {
        return Err(FitError::InsufficientDecay {
            decayed_to_fraction: if d0 == 0.0 { 1.0 } else { d_min / d0 },
        });
    }

    let lo = 0.05 * d0;
    let hi = 0.80 * d0;
    let window: Vec<(f64, f64)> = times
        .iter()
        .zip(&deviations)
        .filter(|(_, &d)| d >= lo && d <= hi)
        .map(|(&t, &d)| (t, d.ln()))
        .collect();
    if window.len() < 4 {
        return Err(FitError::TooFewPoints(window.len()));
    }

    // Straight-line least squares in log space.
    let n = window.len() as f64;
    let mean_t: f64 = window.iter().map(|(t, _)| t).sum::<f64>() / n;
    let mean_l: f64 = window.iter().map(|(_, l)| l).sum::<f64>() / n;
    let mut stt = 0.0;
    let mut stl = 0.0;
    for (t, l) in &window {
        stt += (t - mean_t) * (t - mean_t);
        stl += (t - mean_t) * (l - mean_l);
    }
    let slope = stl / stt;
    let intercept = mean_l - slope * mean_t;
    let rms = (window
        .iter()
        .map(|(t, l)| (l - (intercept + slope * t)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();

    let rate = -slope;
    if rate <= 0.0 {
        return Err(FitError::InsufficientDecay {
            decayed_to_fraction: d_min / d0,
        });
    }

    let tail_start = values.len() - (values.len() / 10).max(1);
    let long_time_mean =
        values[tail_start..].iter().sum::<f64>() / (values.len() - tail_start) as f64;

    Ok(RateFit {
        rate,
        diagnostics: FitDiagnostics {
            rms_log_residual: rms,
            window: (window.first().unwrap().0, window.last().unwrap().0),
            n_points: window.len(),
            asymptote,
            long_time_mean,
            non_exponential: rms > 0.05,
        },
    })
}
