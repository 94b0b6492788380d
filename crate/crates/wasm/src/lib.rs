//! Browser bindings for the interactive demo page (`www/index.html`).
//!
//! Three operations, each returning a flat `Float64Array` the page plots
//! on a canvas:
//! * [`rate_curve`] — nuclear decoherence and spin-flip rates over an
//!   exchange-rate sweep, with the peak location,
//! * [`trajectory`] — dimensionless spin-pair evolution of `<I_z>` and the
//!   transverse nuclear envelope,
//! * [`sensitivity_scan`] — shot-noise read-out threshold and the expected
//!   contrast as functions of the static field.

use donorspin::bloch::{self, BlochState};
use donorspin::edmr;
use donorspin::params::SystemParams;
use donorspin::rates;
use donorspin::units;
use nalgebra::Vector3;
use wasm_bindgen::prelude::*;

/// Rows of `[gamma_e, 1/T2n, 1/T1n]` on a log grid of the exchange rate
/// (rad/s), followed by one row `[gamma_star, peak 1/T1n, A/sqrt(2)]`.
///
/// Inputs: hyperfine coupling in MHz, static field in tesla, grid decades
/// relative to the coupling.
#[wasm_bindgen]
pub fn rate_curve(
    a_mhz: f64,
    b_tesla: f64,
    decades_below: f64,
    decades_above: f64,
    n: usize,
) -> Vec<f64> {
    let a = units::to_angular(a_mhz * 1.0e6);
    let c = units::Constants::default();
    let b_tilde = (c.gamma_e + c.gamma_n) * b_tesla;
    let lo = a * 10f64.powf(-decades_below);
    let hi = a * 10f64.powf(decades_above);
    let mut out = Vec::with_capacity(3 * n + 3);
    for k in 0..n {
        let gamma = lo * (hi / lo).powf(k as f64 / (n - 1) as f64);
        out.push(gamma);
        out.push(rates::inv_t2n_analytic(gamma, a));
        out.push(rates::inv_t1n_analytic(gamma, a, b_tilde));
    }
    let (g_star, peak) = rates::t1n_peak(a, b_tilde);
    out.push(g_star);
    out.push(peak);
    out.push(a / std::f64::consts::SQRT_2);
    out
}

/// Rows of `[tau, <I_z>, |<I>_perp|]` for a dimensionless run starting
/// from a polarized-up nucleus (plus a transverse component) and the
/// electron at equilibrium.
#[wasm_bindgen]
pub fn trajectory(
    omega_e_over_a: f64,
    gamma_over_a: f64,
    p_e: f64,
    t_end: f64,
    n: usize,
) -> Result<Vec<f64>, JsValue> {
    let params = SystemParams::dimensionless()
        .omega_e(omega_e_over_a)
        .gamma_e(gamma_over_a)
        .p_e(p_e)
        .build()
        .map_err(|e| JsValue::from_str(&e.to_string()))?;
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let st0 = BlochState::product(
        Vector3::new(0.0, 0.0, p_e / 2.0),
        Vector3::new(0.5 * inv_sqrt2, 0.0, 0.5 * inv_sqrt2),
    );
    let grid: Vec<f64> = (0..n).map(|k| k as f64 * t_end / (n - 1) as f64).collect();
    let traj = bloch::evolve_bloch(&st0, &params, &grid, 1e-8, 1e-11)
        .map_err(|e| JsValue::from_str(&e.to_string()))?;
    let mut out = Vec::with_capacity(3 * n);
    for (t, s) in traj.times().iter().zip(traj.states()) {
        out.push(*t);
        out.push(s.i[2]);
        out.push(s.i_perp());
    }
    Ok(out)
}

/// Rows of `[B, threshold, model_contrast]` over a static-field scan at
/// fixed current (uA) and drive amplitude (gauss), for a phosphorus-like
/// coupling (MHz). The contrast column is the bundled spin-dependent
/// scattering estimate at the given temperature.
#[wasm_bindgen]
pub fn sensitivity_scan(
    current_ua: f64,
    b_perp_gauss: f64,
    a_mhz: f64,
    temperature_k: f64,
    b_min: f64,
    b_max: f64,
    n: usize,
) -> Vec<f64> {
    let c = units::Constants::default();
    let a = units::to_angular(a_mhz * 1.0e6);
    let current = current_ua * 1.0e-6;
    let b_perp = units::gauss_to_tesla(b_perp_gauss);
    let omega_perp = c.gamma_e * b_perp;
    let mut out = Vec::with_capacity(3 * n);
    for k in 0..n {
        let b = b_min + (b_max - b_min) * k as f64 / (n - 1) as f64;
        let omega_e = c.gamma_e * b;
        out.push(b);
        out.push(edmr::sensitivity_threshold(current, omega_perp, a, omega_e));
        out.push(edmr::spin_scattering_contrast_model(b, temperature_k, b_perp, &c));
    }
    out
}
