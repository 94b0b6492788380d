//! Read-out analysis for electrically detected magnetic resonance (EDMR):
//! resonance field positions, the shot-noise floor, and the sensitivity
//! criterion for detecting a single nuclear spin through the device current.
//!
//! The hyperfine coupling splits the electron resonance into two lines at
//! `B_-+ = (omega_esr -+ A/2) / gamma_e`; which line appears tells the
//! nuclear spin state. Detection requires the relative EDMR current change
//! to beat the shot noise accumulated over one nuclear spin-flip time:
//!
//! ```text
//! (dI/I)_EDMR  >  1/sqrt(N),   N = I T1n / e
//! ```
//!
//! which, at the driven spin-flip time `T1n = 2 (omega_e/A)^2 / Omega_perp`,
//! becomes the closed-form threshold `sqrt(e Omega_perp / 2I) (A/omega_e)`.

use serde::Serialize;
use thiserror::Error;

use crate::params::SystemParams;
use crate::units::{Constants, E_CHARGE};

#[derive(Debug, Error, PartialEq)]
pub enum EdmrError {
    #[error("carrier frequency {omega_esr} must exceed half the hyperfine splitting {half_a}")]
    CarrierBelowSplitting { omega_esr: f64, half_a: f64 },
    #[error("device current not configured")]
    MissingCurrent,
    #[error("drive not configured")]
    MissingDrive,
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("recombination rates configured but gamma_i = gamma_c = 0")]
    NoRecombinationChannel,
}

/// Outcome of the shot-noise sensitivity comparison.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SensitivityResult {
    /// Minimum detectable relative current change.
    pub threshold: f64,
    /// Shot-noise floor `1/sqrt(N)` over one spin-flip time.
    pub shot_noise_relative: f64,
    /// Electrons transported during one spin-flip time.
    pub n_electrons: f64,
    /// Caller-supplied expected EDMR contrast, if any.
    pub measured_or_model_contrast: Option<f64>,
    /// True when the supplied contrast beats the threshold.
    pub pass: bool,
    /// Contrast over threshold.
    pub margin: f64,
    /// Caller's attestation that the hyperfine splitting exceeds the
    /// electron linewidth (`A > 1/T2e*`), which the threshold assumes.
    pub linewidth_condition_attested: bool,
    /// Optional supporting `T2e*` value (s).
    pub t2e_star: Option<f64>,
    /// Spin-flip time used for the shot-noise integration window (s).
    pub t1n_readout: f64,
    /// Set when ionization/capture channels entered the rate substitution.
    pub recombination_applied: bool,
}

/// Resonance fields of the two hyperfine-split electron lines (tesla).
///
/// `B_- = (omega_esr - A/2)/gamma_e` (nucleus along the field),
/// `B_+ = (omega_esr + A/2)/gamma_e` (nucleus against it); the splitting is
/// `A/gamma_e`.
pub fn resonance_fields(
    omega_esr: f64,
    a: f64,
    gamma_e_gyromag: f64,
) -> Result<(f64, f64), EdmrError> {
    if !(gamma_e_gyromag > 0.0) {
        return Err(EdmrError::NonPositive("gamma_e_gyromag"));
    }
    if omega_esr <= a / 2.0 {
        return Err(EdmrError::CarrierBelowSplitting {
            omega_esr,
            half_a: a / 2.0,
        });
    }
    Ok((
        (omega_esr - a / 2.0) / gamma_e_gyromag,
        (omega_esr + a / 2.0) / gamma_e_gyromag,
    ))
}

/// Relative shot-noise floor `1/sqrt(I t1n / e)` for a current integrated
/// over one spin-flip time.
pub fn shot_noise_relative(current: f64, t1n: f64) -> f64 {
    1.0 / (current * t1n / E_CHARGE).sqrt()
}

/// Minimum detectable relative EDMR contrast,
/// `sqrt(e Omega_perp / (2 I)) * (A / omega_e)`.
///
/// Identical to [`shot_noise_relative`] evaluated at the driven spin-flip
/// time `T1n = 2 (omega_e/A)^2 / Omega_perp`.
pub fn sensitivity_threshold(current: f64, omega_perp: f64, a_hf: f64, omega_e: f64) -> f64 {
    (E_CHARGE * omega_perp / (2.0 * current)).sqrt() * (a_hf / omega_e)
}

/// Relative EDMR contrast predicted by the spin-dependent scattering
/// mechanism for a single donor in a 0.1 um^2 transistor channel.
///
/// External model shipped for convenience; it is an input to
/// [`evaluate_readout`], not part of the shot-noise analysis itself:
/// `6e-6 * tanh(hbar omega_e / 2 k_B T) * (B/1 T) * (B_perp/0.3 G)`.
pub fn spin_scattering_contrast_model(
    b: f64,
    temperature: f64,
    b_perp: f64,
    constants: &Constants,
) -> f64 {
    let omega_e = constants.gamma_e * b;
    6.0e-6
        * (constants.hbar * omega_e / (2.0 * constants.k_b * temperature)).tanh()
        * (b / 1.0)
        * (b_perp / crate::units::gauss_to_tesla(0.3))
}

/// Compare an expected contrast against the shot-noise threshold for the
/// configured current and drive.
///
/// Without recombination channels the shot-noise window is the weak-drive
/// spin-flip time `2 (omega_e/A)^2 / Omega_perp` and the threshold is its
/// exact closed form. With ionization/capture rates configured, the drive
/// substitution combines with the recombination substitution: the
/// fluctuation rate becomes `Omega_perp + Gamma_i + Gamma_c`, the squared
/// coupling is diluted to `A^2 Gamma_i/(Gamma_i + Gamma_c)`, and the
/// threshold is the shot-noise floor over the resulting spin-flip time.
pub fn evaluate_readout(
    params: &SystemParams,
    model_contrast: f64,
    linewidth_condition_attested: bool,
    t2e_star: Option<f64>,
) -> Result<SensitivityResult, EdmrError> {
    let current = params.current().ok_or(EdmrError::MissingCurrent)?;
    let omega_perp = params.omega_perp().ok_or(EdmrError::MissingDrive)?;
    if !(model_contrast > 0.0) {
        return Err(EdmrError::NonPositive("model_contrast"));
    }
    let a = params.a();
    let omega_e = params.omega_e();
    if !(a > 0.0) {
        return Err(EdmrError::NonPositive("A"));
    }

    let (t1n_readout, threshold, recombination_applied) =
        match (params.gamma_i(), params.gamma_c()) {
            (Some(gi), Some(gc)) => {
                if gi + gc <= 0.0 {
                    return Err(EdmrError::NoRecombinationChannel);
                }
                let a_sq_eff = a * a * gi / (gi + gc);
                let rate = crate::rates::inv_t1n_analytic_asq(
                    omega_perp + gi + gc,
                    a_sq_eff,
                    params.b_tilde(),
                );
                if !(rate > 0.0) {
                    return Err(EdmrError::NonPositive("substituted spin-flip rate"));
                }
                let t1n = 1.0 / rate;
                (t1n, shot_noise_relative(current, t1n), true)
            }
            _ => {
                let t1n = 2.0 * (omega_e / a).powi(2) / omega_perp;
                (
                    t1n,
                    sensitivity_threshold(current, omega_perp, a, omega_e),
                    false,
                )
            }
        };

    let n_electrons = current * t1n_readout / E_CHARGE;
    let shot = shot_noise_relative(current, t1n_readout);
    let margin = model_contrast / threshold;

    Ok(SensitivityResult {
        threshold,
        shot_noise_relative: shot,
        n_electrons,
        measured_or_model_contrast: Some(model_contrast),
        pass: model_contrast > threshold,
        margin,
        linewidth_condition_attested,
        t2e_star,
        t1n_readout,
        recombination_applied,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{self, gauss_to_tesla, to_angular};
    use approx::assert_relative_eq;

    #[test]
    fn hyperfine_split_resonance_fields() {
        let omega_esr = to_angular(28.0e9);
        let a = to_angular(120.0e6);
        let (b_minus, b_plus) = resonance_fields(omega_esr, a, units::GAMMA_E_DEFAULT).unwrap();
        assert_relative_eq!(b_minus, 0.9978571428571428, max_relative = 1e-12);
        assert_relative_eq!(b_plus, 1.0021428571428572, max_relative = 1e-12);
        assert_relative_eq!(b_plus - b_minus, a / units::GAMMA_E_DEFAULT, max_relative = 1e-12);
        assert_relative_eq!(b_plus - b_minus, 4.2857e-3, max_relative = 1e-4);
    }

    #[test]
    fn resonance_degenerate_without_coupling() {
        let (bm, bp) = resonance_fields(to_angular(28.0e9), 0.0, units::GAMMA_E_DEFAULT).unwrap();
        assert_eq!(bm, bp);
    }

    #[test]
    fn resonance_splitting_linear_in_coupling() {
        let w = to_angular(28.0e9);
        let g = units::GAMMA_E_DEFAULT;
        let (bm1, bp1) = resonance_fields(w, 1.0e8, g).unwrap();
        let (bm2, bp2) = resonance_fields(w, 2.0e8, g).unwrap();
        assert_relative_eq!((bp2 - bm2) / (bp1 - bm1), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn resonance_rejects_low_carrier() {
        let err = resonance_fields(1.0, 4.0, units::GAMMA_E_DEFAULT).unwrap_err();
        assert!(matches!(err, EdmrError::CarrierBelowSplitting { .. }));
    }

    #[test]
    fn shot_noise_values() {
        // One electron on average: relative noise ~ 1.
        let r = shot_noise_relative(1.0e-6, 1.6e-13);
        assert_relative_eq!(r, 1.0, max_relative = 1e-3);
        // One second of microamp current.
        let r = shot_noise_relative(1.0e-6, 1.0);
        assert_relative_eq!(r, 4.002719867789901e-7, max_relative = 1e-12);
        // Scaling 1/sqrt(I T1n).
        assert_relative_eq!(
            shot_noise_relative(4.0e-6, 1.0),
            r / 2.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn threshold_for_the_reference_device() {
        let a = to_angular(120.0e6);
        let omega_e = to_angular(28.0e9);
        let omega_perp = units::GAMMA_E_DEFAULT * gauss_to_tesla(0.3);
        let thr = sensitivity_threshold(1.0e-6, omega_perp, a, omega_e);
        assert_relative_eq!(thr, 2.786717795589293e-6, max_relative = 1e-12);
        // Rounds to the few-per-million scale.
        assert!(thr > 2.6e-6 && thr < 3.1e-6);
        // Doubling the current gains sqrt(2).
        assert_relative_eq!(
            sensitivity_threshold(2.0e-6, omega_perp, a, omega_e) * 2.0f64.sqrt(),
            thr,
            max_relative = 1e-12
        );
    }

    #[test]
    fn threshold_is_shot_noise_at_driven_flip_time() {
        for (i, wp, a, we) in [
            (1.0e-6_f64, 5.2778e6_f64, 7.54e8_f64, 1.759e11_f64),
            (3.0e-5, 1.0e5, 1.0e9, 5.0e10),
            (2.0e-9, 9.0e7, 2.0e8, 8.0e11),
        ] {
            let t1n = 2.0 * (we / a).powi(2) / wp;
            assert_relative_eq!(
                sensitivity_threshold(i, wp, a, we),
                shot_noise_relative(i, t1n),
                max_relative = 1e-12
            );
        }
    }

    fn reference_params() -> SystemParams {
        SystemParams::physical(to_angular(120.0e6), 1.0, 1.0)
            .gamma_e_override(5.0e6)
            .drive(gauss_to_tesla(0.3), to_angular(28.0e9))
            .current(1.0e-6)
            .build()
            .unwrap()
    }

    #[test]
    fn scattering_model_sits_just_above_threshold() {
        let p = reference_params();
        let contrast = spin_scattering_contrast_model(
            1.0,
            1.0,
            gauss_to_tesla(0.3),
            p.constants(),
        );
        let result = evaluate_readout(&p, contrast, true, None).unwrap();
        assert!(result.pass);
        assert!(
            result.margin > 1.0 && result.margin < 3.0,
            "margin {}",
            result.margin
        );
        assert_relative_eq!(result.shot_noise_relative, result.threshold, max_relative = 1e-12);
    }

    #[test]
    fn half_threshold_contrast_fails() {
        let p = reference_params();
        let thr = sensitivity_threshold(
            1.0e-6,
            p.omega_perp().unwrap(),
            p.a(),
            p.omega_e(),
        );
        let result = evaluate_readout(&p, thr / 2.0, true, None).unwrap();
        assert!(!result.pass);
        assert_relative_eq!(result.margin, 0.5, max_relative = 1e-12);
    }

    #[test]
    fn margin_grows_with_field() {
        // Higher field: contrast grows, threshold shrinks.
        let mut prev = 0.0;
        for b in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let p = SystemParams::physical(to_angular(120.0e6), b, 1.0)
                .gamma_e_override(5.0e6)
                .drive(gauss_to_tesla(0.3), units::GAMMA_E_DEFAULT * b)
                .current(1.0e-6)
                .build()
                .unwrap();
            let contrast =
                spin_scattering_contrast_model(b, 1.0, gauss_to_tesla(0.3), p.constants());
            let r = evaluate_readout(&p, contrast, true, None).unwrap();
            assert!(r.margin > prev, "margin must grow with B");
            prev = r.margin;
        }
    }

    #[test]
    fn recombination_channels_enter_the_readout_window() {
        let plain = reference_params();
        let with_rec = SystemParams::physical(to_angular(120.0e6), 1.0, 1.0)
            .gamma_e_override(5.0e6)
            .drive(gauss_to_tesla(0.3), to_angular(28.0e9))
            .current(1.0e-6)
            .recombination(2.0e6, 2.0e6)
            .build()
            .unwrap();
        let r_plain = evaluate_readout(&plain, 1.0e-5, true, None).unwrap();
        let r_rec = evaluate_readout(&with_rec, 1.0e-5, true, None).unwrap();
        assert!(r_rec.recombination_applied && !r_plain.recombination_applied);
        // Equal ionization and capture rates dilute the squared coupling by
        // half and add to the fluctuation rate; the integration window and
        // threshold both move.
        assert!(r_rec.t1n_readout != r_plain.t1n_readout);
        assert!(r_rec.threshold != r_plain.threshold);
        assert_relative_eq!(
            r_rec.shot_noise_relative,
            r_rec.threshold,
            max_relative = 1e-12
        );
    }

    #[test]
    fn missing_inputs_are_reported() {
        let p = SystemParams::physical(to_angular(120.0e6), 1.0, 1.0)
            .gamma_e_override(5.0e6)
            .build()
            .unwrap();
        assert_eq!(
            evaluate_readout(&p, 1.0e-6, true, None).unwrap_err(),
            EdmrError::MissingCurrent
        );
    }
}
