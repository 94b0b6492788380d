//! Adaptive embedded Runge-Kutta integrator (Dormand-Prince 5(4)).
//!
//! Both solvers in this crate integrate non-stiff oscillatory linear
//! systems; an order-5 pair with FSAL and step clamping onto the requested
//! output grid is accurate and cheap. The right-hand side writes into a
//! caller-provided buffer so the stepping loop performs no allocation.

use nalgebra::DVector;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OdeError {
    /// Step size collapsed below the resolution of the time axis.
    #[error("step size underflow at t = {t_reached} (stiff or discontinuous system)")]
    Stiffness { t_reached: f64 },
    #[error("step budget exhausted at t = {t_reached}")]
    MaxSteps { t_reached: f64 },
    #[error("invalid time grid: {0}")]
    InvalidGrid(&'static str),
    #[error("tolerances must be finite and positive")]
    InvalidTolerance,
}

/// Dormand-Prince 5(4) with proportional step control.
#[derive(Debug, Clone, Copy)]
pub struct DormandPrince {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
}

impl Default for DormandPrince {
    fn default() -> Self {
        Self {
            rel_tol: 1.0e-9,
            abs_tol: 1.0e-12,
            max_steps: 400_000_000,
        }
    }
}

// Butcher tableau, classic DOPRI5 coefficients.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the 5th- and 4th-order weights (error estimate).
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

impl DormandPrince {
    /// Integrate `dy/dt = rhs(t, y)` from `t = 0`, returning the state at
    /// every grid point. The grid must be strictly increasing and
    /// non-negative; a leading `0.0` yields the initial state unchanged.
    pub fn solve<F>(
        &self,
        mut rhs: F,
        y0: DVector<f64>,
        t_grid: &[f64],
    ) -> Result<Vec<DVector<f64>>, OdeError>
    where
        F: FnMut(f64, &DVector<f64>, &mut DVector<f64>),
    {
        if !(self.rel_tol.is_finite() && self.rel_tol > 0.0 && self.abs_tol.is_finite() && self.abs_tol > 0.0) {
            return Err(OdeError::InvalidTolerance);
        }
        if t_grid.is_empty() {
            return Err(OdeError::InvalidGrid("empty"));
        }
        if t_grid[0] < 0.0 {
            return Err(OdeError::InvalidGrid("must start at or after 0"));
        }
        if t_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(OdeError::InvalidGrid("must be strictly increasing"));
        }

        let n = y0.len();
        let mut out = Vec::with_capacity(t_grid.len());
        let mut t = 0.0_f64;
        let mut y = y0;

        let mut k1 = DVector::zeros(n);
        let mut k2 = DVector::zeros(n);
        let mut k3 = DVector::zeros(n);
        let mut k4 = DVector::zeros(n);
        let mut k5 = DVector::zeros(n);
        let mut k6 = DVector::zeros(n);
        let mut k7 = DVector::zeros(n);
        let mut stage = DVector::zeros(n);
        let mut y_next = DVector::zeros(n);

        rhs(t, &y, &mut k1);
        let t_end = *t_grid.last().unwrap();
        let mut h = self.initial_step(t_end, &y, &k1);

        let mut grid_idx = 0;
        while grid_idx < t_grid.len() && t_grid[grid_idx] <= t {
            out.push(y.clone());
            grid_idx += 1;
        }

        let mut steps = 0usize;
        let mut rejects_in_a_row = 0u32;

        while grid_idx < t_grid.len() {
            let t_target = t_grid[grid_idx];
            let mut clamped = false;
            if t + h >= t_target {
                h = t_target - t;
                clamped = true;
            }
            if !(h.is_finite()) || t + h == t {
                return Err(OdeError::Stiffness { t_reached: t });
            }
            steps += 1;
            if steps > self.max_steps {
                return Err(OdeError::MaxSteps { t_reached: t });
            }

            // Stages 2..7; k1 is fresh from FSAL or initialization.
            stage.copy_from(&y);
            stage.axpy(h * A21, &k1, 1.0);
            rhs(t + C2 * h, &stage, &mut k2);

            stage.copy_from(&y);
            stage.axpy(h * A31, &k1, 1.0);
            stage.axpy(h * A32, &k2, 1.0);
            rhs(t + C3 * h, &stage, &mut k3);

            stage.copy_from(&y);
            stage.axpy(h * A41, &k1, 1.0);
            stage.axpy(h * A42, &k2, 1.0);
            stage.axpy(h * A43, &k3, 1.0);
            rhs(t + C4 * h, &stage, &mut k4);

            stage.copy_from(&y);
            stage.axpy(h * A51, &k1, 1.0);
            stage.axpy(h * A52, &k2, 1.0);
            stage.axpy(h * A53, &k3, 1.0);
            stage.axpy(h * A54, &k4, 1.0);
            rhs(t + C5 * h, &stage, &mut k5);

            stage.copy_from(&y);
            stage.axpy(h * A61, &k1, 1.0);
            stage.axpy(h * A62, &k2, 1.0);
            stage.axpy(h * A63, &k3, 1.0);
            stage.axpy(h * A64, &k4, 1.0);
            stage.axpy(h * A65, &k5, 1.0);
            rhs(t + h, &stage, &mut k6);

            y_next.copy_from(&y);
            y_next.axpy(h * B1, &k1, 1.0);
            y_next.axpy(h * B3, &k3, 1.0);
            y_next.axpy(h * B4, &k4, 1.0);
            y_next.axpy(h * B5, &k5, 1.0);
            y_next.axpy(h * B6, &k6, 1.0);
            rhs(t + h, &y_next, &mut k7);

            // Weighted RMS of the embedded error estimate.
            let mut err_sq = 0.0;
            for i in 0..n {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                        + E7 * k7[i]);
                let scale = self.abs_tol + self.rel_tol * y[i].abs().max(y_next[i].abs());
                let r = e / scale;
                err_sq += r * r;
            }
            let err = (err_sq / n as f64).sqrt();

            if err <= 1.0 {
                // Accept.
                t += h;
                std::mem::swap(&mut y, &mut y_next);
                std::mem::swap(&mut k1, &mut k7); // FSAL
                rejects_in_a_row = 0;
                if clamped {
                    // Floating-point clamping lands exactly on the target.
                    t = t_target;
                    out.push(y.clone());
                    grid_idx += 1;
                }
                let factor = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                h = (h * factor).max(f64::MIN_POSITIVE);
            } else {
                if !err.is_finite() {
                    return Err(OdeError::Stiffness { t_reached: t });
                }
                rejects_in_a_row += 1;
                if rejects_in_a_row > 60 {
                    return Err(OdeError::Stiffness { t_reached: t });
                }
                h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.5);
            }
        }

        Ok(out)
    }

    fn initial_step(&self, t_end: f64, y0: &DVector<f64>, f0: &DVector<f64>) -> f64 {
        let n = y0.len() as f64;
        let wnorm = |v: &DVector<f64>, reference: &DVector<f64>| -> f64 {
            let s: f64 = v
                .iter()
                .zip(reference.iter())
                .map(|(vi, ri)| {
                    let scale = self.abs_tol + self.rel_tol * ri.abs();
                    (vi / scale).powi(2)
                })
                .sum();
            (s / n).sqrt()
        };
        let d0 = wnorm(y0, y0);
        let d1 = wnorm(f0, y0);
        let h = if d0 < 1.0e-5 || d1 < 1.0e-5 {
            1.0e-6 * t_end.max(1.0e-30)
        } else {
            0.01 * d0 / d1
        };
        h.min(t_end / 10.0).max(f64::MIN_POSITIVE)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_decay() {
        let solver = DormandPrince::default();
        let grid: Vec<f64> = (0..=50).map(|i| i as f64 * 0.2).collect();
        let out = solver
            .solve(
                |_t, y, dy| dy[0] = -y[0],
                DVector::from_vec(vec![1.0]),
                &grid,
            )
            .unwrap();
        for (t, y) in grid.iter().zip(&out) {
            assert_relative_eq!(y[0], (-t).exp(), max_relative = 1e-8, epsilon = 1e-12);
        }
    }

    #[test]
    fn harmonic_oscillator_phase_accuracy() {
        let solver = DormandPrince::default();
        let omega = 40.0;
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 * 0.05).collect();
        let out = solver
            .solve(
                |_t, y, dy| {
                    dy[0] = y[1];
                    dy[1] = -omega * omega * y[0];
                },
                DVector::from_vec(vec![1.0, 0.0]),
                &grid,
            )
            .unwrap();
        for (t, y) in grid.iter().zip(&out) {
            assert_relative_eq!(y[0], (omega * t).cos(), epsilon = 2e-7);
        }
    }

    #[test]
    fn grid_points_hit_exactly() {
        let solver = DormandPrince::default();
        let grid = vec![0.0, 0.1, 0.25, 1.0];
        let out = solver
            .solve(
                |t, _y, dy| dy[0] = t,
                DVector::from_vec(vec![0.0]),
                &grid,
            )
            .unwrap();
        assert_eq!(out.len(), 4);
        for (t, y) in grid.iter().zip(&out) {
            assert_relative_eq!(y[0], t * t / 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn invalid_grids_rejected() {
        let solver = DormandPrince::default();
        let f = |_t: f64, _y: &DVector<f64>, dy: &mut DVector<f64>| dy[0] = 0.0;
        assert_eq!(
            solver.solve(f, DVector::from_vec(vec![0.0]), &[]),
            Err(OdeError::InvalidGrid("empty"))
        );
        assert_eq!(
            solver.solve(f, DVector::from_vec(vec![0.0]), &[0.0, 0.0]),
            Err(OdeError::InvalidGrid("must be strictly increasing"))
        );
        assert_eq!(
            solver.solve(f, DVector::from_vec(vec![0.0]), &[-1.0, 1.0]),
            Err(OdeError::InvalidGrid("must start at or after 0"))
        );
    }

    #[test]
    fn step_budget_enforced() {
        let solver = DormandPrince {
            max_steps: 10,
            ..DormandPrince::default()
        };
        let err = solver
            .solve(
                |_t, y, dy| dy[0] = (1.0 + y[0] * y[0]).sin() * 50.0,
                DVector::from_vec(vec![1.0]),
                &[0.0, 1.0e3],
            )
            .unwrap_err();
        assert!(matches!(err, OdeError::MaxSteps { .. }));
    }
}
