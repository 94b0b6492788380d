//! Generalized Bloch equations: the 15 coupled expectation values
//! `<S>`, `<I>` and the correlation matrix `<S_a I_b>`.
//!
//! This is the exact algebraic twin of the master equation in
//! [`crate::lindblad`] — the same linear system written in expectation-value
//! coordinates:
//!
//! ```text
//! d<S>/dt  =  omega_e z x <S>  -  A <SxI>  -  Gamma_e (<S> - (p_e/2) z)
//! d<I>/dt  = -omega_n z x <I>  +  A <SxI>
//! d<SI>/dt =  omega_e (z x)<SI>  +  omega_n <SI>(x z)
//!             + (A/4) eps.(<S> - <I>)  -  Gamma_e <SI>
//! ```
//!
//! where `<SxI>_a = eps_abc <S_b I_c>`, the first rotation acts on the
//! electron (row) index and the second, with opposite sign, on the nuclear
//! (column) index, and `[eps.w]_ab = eps_abg w_g`. Sign and index
//! conventions are pinned by the oracle-equivalence test, which requires
//! pointwise agreement with the density-matrix solver.

use nalgebra::{DVector, Matrix3, Vector3};
use serde::Serialize;
use thiserror::Error;

use crate::ode::{DormandPrince, OdeError};
use crate::params::{ParamsError, SystemParams};

#[derive(Debug, Error, PartialEq)]
pub enum BlochError {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error("trajectory is already in the rotating frame")]
    AlreadyRotating,
}

/// Which frame the expectation values are expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FrameTag {
    Lab,
    Rotating,
}

/// Unit of the time axis of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TimeUnit {
    Seconds,
    /// `tau = A t`: times in units of the inverse hyperfine coupling.
    DimensionlessTau,
}

/// The 15 real expectation values of the pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlochState {
    /// Electron spin expectation `<S>`.
    pub s: Vector3<f64>,
    /// Nuclear spin expectation `<I>`.
    pub i: Vector3<f64>,
    /// Correlation matrix `<S_a I_b>`, electron index first.
    pub si: Matrix3<f64>,
    pub frame: FrameTag,
}

impl BlochState {
    pub fn new(s: Vector3<f64>, i: Vector3<f64>, si: Matrix3<f64>) -> Self {
        Self {
            s,
            i,
            si,
            frame: FrameTag::Lab,
        }
    }

    pub fn with_frame(mut self, frame: FrameTag) -> Self {
        self.frame = frame;
        self
    }

    /// Product state of an electron polarization and a nuclear
    /// polarization: `<S_a I_b> = <S_a><I_b>`, which is always jointly
    /// realizable when both vectors have length <= 1/2.
    pub fn product(s: Vector3<f64>, i: Vector3<f64>) -> Self {
        Self::new(s, i, s * i.transpose())
    }

    /// Flat component order: `s, i`, then `si` row by row.
    pub fn to_array(&self) -> [f64; 15] {
        let mut out = [0.0; 15];
        out[..3].copy_from_slice(self.s.as_slice());
        out[3..6].copy_from_slice(self.i.as_slice());
        for a in 0..3 {
            for b in 0..3 {
                out[6 + 3 * a + b] = self.si[(a, b)];
            }
        }
        out
    }

    pub fn from_array(x: &[f64; 15]) -> Self {
        let s = Vector3::new(x[0], x[1], x[2]);
        let i = Vector3::new(x[3], x[4], x[5]);
        let si = Matrix3::from_fn(|a, b| x[6 + 3 * a + b]);
        Self::new(s, i, si)
    }

    /// Largest absolute component-wise difference to another state.
    pub fn max_abs_diff(&self, other: &BlochState) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array().iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Spin lengths and correlations within their physical bounds
    /// (1/2, 1/2 and 1/4) up to `tol`.
    pub fn within_bounds(&self, tol: f64) -> bool {
        self.s.norm() <= 0.5 + tol
            && self.i.norm() <= 0.5 + tol
            && self.si.iter().all(|x| x.abs() <= 0.25 + tol)
    }

    /// Transverse nuclear magnitude `|<I>_perp|`, invariant under z
    /// rotations and hence frame-independent.
    pub fn i_perp(&self) -> f64 {
        self.i.xy().norm()
    }
}

/// Time derivative of a [`BlochState`] (no frame tag: derivatives live in
/// the same frame as the state).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochDerivative {
    pub s: Vector3<f64>,
    pub i: Vector3<f64>,
    pub si: Matrix3<f64>,
}

/// Precomputed coefficients of the lab-frame, undriven equations.
#[derive(Debug, Clone, Copy)]
pub struct BlochGenerator {
    omega_e: f64,
    omega_n: f64,
    a: f64,
    gamma_e: f64,
    p_e: f64,
    /// Sign of the Levi-Civita source term; flipped only by the
    /// self-test corruption hook of the comparison harness.
    k_sign: f64,
}

impl BlochGenerator {
    pub fn new(params: &SystemParams) -> Result<Self, ParamsError> {
        Ok(Self {
            omega_e: params.omega_e(),
            omega_n: params.omega_n(),
            a: params.a(),
            gamma_e: params.gamma_e()?,
            p_e: params.p_e(),
            k_sign: 1.0,
        })
    }

    /// Deliberately corrupt the tensor-source sign so harness failures can
    /// be exercised end to end. Not part of the physics API.
    #[doc(hidden)]
    pub fn corrupt_tensor_sign(mut self) -> Self {
        self.k_sign = -1.0;
        self
    }

    pub fn rhs(&self, state: &BlochState) -> BlochDerivative {
        let mut x = state.to_array();
        let mut dx = [0.0; 15];
        self.rhs_flat(&x, &mut dx);
        x.copy_from_slice(&dx);
        let d = BlochState::from_array(&x);
        BlochDerivative {
            s: d.s,
            i: d.i,
            si: d.si,
        }
    }

    /// Flat-layout right-hand side; the solver hot path.
    #[inline]
    fn rhs_flat(&self, x: &[f64], dx: &mut [f64]) {
        let (we, wn, a, g, p) = (self.omega_e, self.omega_n, self.a, self.gamma_e, self.p_e);
        let (sx, sy, sz) = (x[0], x[1], x[2]);
        let (ix, iy, iz) = (x[3], x[4], x[5]);
        // si rows: electron index a, nuclear index b: x[6 + 3a + b].
        let (mxx, mxy, mxz) = (x[6], x[7], x[8]);
        let (myx, myy, myz) = (x[9], x[10], x[11]);
        let (mzx, mzy, mzz) = (x[12], x[13], x[14]);

        // <S x I>_a = eps_abc <S_b I_c>.
        let vx = myz - mzy;
        let vy = mzx - mxz;
        let vz = mxy - myx;

        // d<S>/dt = omega_e z x s - A v - Gamma (s - (p/2) z).
        dx[0] = -we * sy - a * vx - g * sx;
        dx[1] = we * sx - a * vy - g * sy;
        dx[2] = -a * vz - g * (sz - 0.5 * p);

        // d<I>/dt = -omega_n z x i + A v.
        dx[3] = wn * iy + a * vx;
        dx[4] = -wn * ix + a * vy;
        dx[5] = a * vz;

        // d<SI>/dt: electron rows rotate at +omega_e, nuclear columns at
        // -omega_n (realized as the right cross product), plus the
        // Levi-Civita source (A/4) eps.(s - i) and isotropic damping.
        let k = self.k_sign * 0.25 * a;
        let (wx, wy, wz) = (sx - ix, sy - iy, sz - iz);

        dx[6] = -we * myx + wn * mxy - g * mxx;
        dx[7] = -we * myy - wn * mxx + k * wz - g * mxy;
        dx[8] = -we * myz - k * wy - g * mxz;
        dx[9] = we * mxx + wn * myy - k * wz - g * myx;
        dx[10] = we * mxy - wn * myx - g * myy;
        dx[11] = we * mxz + k * wx - g * myz;
        dx[12] = wn * mzy + k * wy - g * mzx;
        dx[13] = -wn * mzx - k * wx - g * mzy;
        dx[14] = -g * mzz;
    }

    /// Matrix form `dx/dt = M x + b` of the 15-dimensional system.
    pub fn system_matrix(&self) -> (nalgebra::SMatrix<f64, 15, 15>, nalgebra::SVector<f64, 15>) {
        let mut b = [0.0; 15];
        self.rhs_flat(&[0.0; 15], &mut b);
        let mut m = nalgebra::SMatrix::<f64, 15, 15>::zeros();
        let mut col = [0.0; 15];
        let mut unit = [0.0; 15];
        for k in 0..15 {
            unit[k] = 1.0;
            self.rhs_flat(&unit, &mut col);
            unit[k] = 0.0;
            for r in 0..15 {
                m[(r, k)] = col[r] - b[r];
            }
        }
        (m, nalgebra::SVector::<f64, 15>::from_column_slice(&b))
    }

    /// Stationary state `M x = -b`, when the generator is invertible
    /// (requires `Gamma_e > 0`).
    pub fn fixed_point(&self) -> Option<BlochState> {
        let (m, b) = self.system_matrix();
        let lu = m.lu();
        lu.solve(&(-b)).map(|x| {
            let mut arr = [0.0; 15];
            arr.copy_from_slice(x.as_slice());
            BlochState::from_array(&arr)
        })
    }
}

/// Right-hand side of the generalized Bloch equations for one state.
pub fn bloch_rhs(state: &BlochState, params: &SystemParams) -> Result<BlochDerivative, ParamsError> {
    Ok(BlochGenerator::new(params)?.rhs(state))
}

/// Time-stamped series of Bloch states with frame and unit metadata.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<BlochState>,
    time_unit: TimeUnit,
    params: SystemParams,
}

impl Trajectory {
    /// Panics if lengths differ or times are not strictly increasing; both
    /// are construction bugs, not run-time conditions.
    pub fn new(
        times: Vec<f64>,
        states: Vec<BlochState>,
        time_unit: TimeUnit,
        params: SystemParams,
    ) -> Self {
        assert_eq!(times.len(), states.len(), "times/states length mismatch");
        assert!(
            times.windows(2).all(|w| w[1] > w[0]),
            "times must be strictly increasing"
        );
        Self {
            times,
            states,
            time_unit,
            params,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[BlochState] {
        &self.states
    }

    pub fn time_unit(&self) -> TimeUnit {
        self.time_unit
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn frame(&self) -> FrameTag {
        self.states.first().map(|s| s.frame).unwrap_or(FrameTag::Lab)
    }
}

/// Integrate the lab-frame equations, sampling at the grid points.
pub fn evolve_bloch(
    state0: &BlochState,
    params: &SystemParams,
    t_grid: &[f64],
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Trajectory, BlochError> {
    let generator = BlochGenerator::new(params)?;
    evolve_with_generator(&generator, state0, params, t_grid, rel_tol, abs_tol)
}

/// Like [`evolve_bloch`] but with an explicit generator (the comparison
/// harness uses this to inject its corrupted self-test variant).
pub fn evolve_with_generator(
    generator: &BlochGenerator,
    state0: &BlochState,
    params: &SystemParams,
    t_grid: &[f64],
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Trajectory, BlochError> {
    let solver = DormandPrince {
        rel_tol,
        abs_tol,
        ..DormandPrince::default()
    };
    let y0 = DVector::from_column_slice(&state0.to_array());
    let raw = solver.solve(
        |_t, y, dy| generator.rhs_flat(y.as_slice(), dy.as_mut_slice()),
        y0,
        t_grid,
    )?;
    let states: Vec<BlochState> = raw
        .iter()
        .map(|y| {
            let mut arr = [0.0; 15];
            arr.copy_from_slice(y.as_slice());
            BlochState::from_array(&arr)
        })
        .collect();
    let unit = if params.is_dimensionless() {
        TimeUnit::DimensionlessTau
    } else {
        TimeUnit::Seconds
    };
    Ok(Trajectory::new(t_grid.to_vec(), states, unit, params.clone()))
}

fn rot_z(theta: f64) -> Matrix3<f64> {
    let (s, c) = theta.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Transform a lab-frame trajectory into the frame where the electron
/// rotates at `+omega_e` and the nucleus at `-omega_n`:
/// `s' = R_z(-omega_e t) s`, `i' = R_z(+omega_n t) i`,
/// `si' = R_z(-omega_e t) si R_z(+omega_n t)^T`.
pub fn to_rotating_frame(
    traj: &Trajectory,
    omega_e: f64,
    omega_n: f64,
) -> Result<Trajectory, BlochError> {
    if traj.frame() == FrameTag::Rotating {
        return Err(BlochError::AlreadyRotating);
    }
    let states: Vec<BlochState> = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, st)| {
            let re = rot_z(-omega_e * t);
            let rn = rot_z(omega_n * t);
            BlochState::new(re * st.s, rn * st.i, re * st.si * rn.transpose())
                .with_frame(FrameTag::Rotating)
        })
        .collect();
    Ok(Trajectory::new(
        traj.times.clone(),
        states,
        traj.time_unit,
        traj.params.clone(),
    ))
}
