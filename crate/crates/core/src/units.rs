//! Physical constants and unit conversions.
//!
//! Every frequency-like quantity in this crate is an angular frequency in
//! rad/s. Fields are tesla, temperatures kelvin, currents amperes. The two
//! conversion helpers here are the only places a linear frequency or a gauss
//! value should be turned into internal units.

use std::f64::consts::TAU;

use serde::Serialize;

/// Reduced Planck constant (J·s), CODATA 2018.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Boltzmann constant (J/K), exact SI.
pub const K_B: f64 = 1.380_649e-23;

/// Elementary charge (C), exact SI.
pub const E_CHARGE: f64 = 1.602_176_634e-19;

/// Electron gyromagnetic ratio, rad/(s·T): 28 GHz/T for g_e ≈ 2.
pub const GAMMA_E_DEFAULT: f64 = TAU * 28.0e9;

/// Gyromagnetic ratio of the phosphorus-31 nucleus, rad/(s·T): 17.23 MHz/T.
pub const GAMMA_N_P31: f64 = TAU * 17.23e6;

/// Fundamental constants plus the two gyromagnetic ratios.
///
/// The gyromagnetic ratios are configurable (other donor species or host
/// nuclei); everything else is fixed by SI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    /// Reduced Planck constant (J·s).
    pub hbar: f64,
    /// Boltzmann constant (J/K).
    pub k_b: f64,
    /// Elementary charge (C).
    pub e_charge: f64,
    /// Electron gyromagnetic ratio (rad/(s·T)).
    pub gamma_e: f64,
    /// Nuclear gyromagnetic ratio (rad/(s·T)).
    pub gamma_n: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            hbar: HBAR,
            k_b: K_B,
            e_charge: E_CHARGE,
            gamma_e: GAMMA_E_DEFAULT,
            gamma_n: GAMMA_N_P31,
        }
    }
}

impl Constants {
    /// All constants strictly positive.
    pub fn is_valid(&self) -> bool {
        self.hbar > 0.0
            && self.k_b > 0.0
            && self.e_charge > 0.0
            && self.gamma_e > 0.0
            && self.gamma_n > 0.0
    }
}

/// Convert a linear frequency in Hz to an angular frequency in rad/s.
pub fn to_angular(frequency_hz: f64) -> f64 {
    TAU * frequency_hz
}

/// Convert a field in gauss to tesla.
pub fn gauss_to_tesla(b_gauss: f64) -> f64 {
    b_gauss * 1.0e-4
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn angular_conversion() {
        assert_relative_eq!(to_angular(120.0e6), 7.5398e8, max_relative = 1e-4);
        assert_relative_eq!(to_angular(28.0e9), 1.7593e11, max_relative = 1e-4);
        assert_eq!(to_angular(0.0), 0.0);
    }

    #[test]
    fn gauss_conversion() {
        assert_abs_diff_eq!(gauss_to_tesla(0.3), 3.0e-5);
        assert_abs_diff_eq!(gauss_to_tesla(1.0e4), 1.0);
        assert_eq!(gauss_to_tesla(0.0), 0.0);
    }

    #[test]
    fn electron_zeeman_at_one_tesla_is_28_ghz() {
        let c = Constants::default();
        let f_ghz = c.gamma_e * 1.0 / TAU / 1e9;
        assert!((f_ghz - 28.0).abs() / 28.0 < 0.01);
    }

    #[test]
    fn default_constants_valid() {
        assert!(Constants::default().is_valid());
    }

    #[test]
    fn roundtrip_machine_precision() {
        for x in [0.3, 1.0, 120.0e6, 5.5e-7, 91363927223.45648] {
            assert_relative_eq!(to_angular(x) / TAU, x, max_relative = 2.0 * f64::EPSILON);
            assert_relative_eq!(gauss_to_tesla(x) * 1.0e4, x, max_relative = 2.0 * f64::EPSILON);
        }
    }
}
