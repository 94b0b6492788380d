//! Exact oracle: evolution of the full 4x4 density matrix of the
//! electron-nucleus pair under coherent hyperfine dynamics plus the
//! exchange-scattering dissipator.
//!
//! Basis order is fixed as (up-Up, up-Down, down-Up, down-Down), electron
//! arrow first: index `2*e + n` with 0 = aligned along +z. All output files
//! and golden values depend on this ordering.
//!
//! The dissipator is
//!
//! ```text
//! D(rho) = Gamma_e ( sum_a S_a rho S_a - (3/4) rho + (p_e/2) S_z )
//! ```
//!
//! The inhomogeneous pump constant is the electron operator `p_e sigma_z/2`
//! tensored with the *normalized* nuclear identity, i.e. `(p_e/2) S_z` on
//! the product space. That normalization is the linearization of the
//! detailed-balance exchange dissipator and the only reading under which the
//! electron equilibrates to `<S_z> = p_e/2`, matching the generalized Bloch
//! equations evolved by [`crate::bloch`]. The linearized pump is not of
//! Lindblad form: positivity is a tested property within the model's
//! validity domain (see `min_eigenvalue` in [`InvariantReport`]), not a
//! structural guarantee.

use nalgebra::{Matrix2, Matrix4, Vector3, Vector4};
use num_complex::Complex64 as C64;
use serde::Serialize;
use thiserror::Error;

use crate::bloch::{BlochState, FrameTag, TimeUnit, Trajectory};
use crate::ode::{DormandPrince, OdeError};
use crate::params::{ParamsError, SystemParams};

/// Hermiticity and trace tolerance for a freshly constructed state.
pub const STATE_TOL: f64 = 1.0e-12;
/// Eigenvalues above this (slightly negative) floor count as non-negative.
pub const PSD_TOL: f64 = -1.0e-10;

#[derive(Debug, Error, PartialEq)]
pub enum StateError {
    #[error("matrix is not hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("trace deviates from one by {deviation:.3e}")]
    BadTrace { deviation: f64 },
    #[error("not a physical state: minimum eigenvalue {min_eigenvalue:.3e}")]
    NotAState { min_eigenvalue: f64 },
}

#[derive(Debug, Error, PartialEq)]
pub enum LindbladError {
    #[error("rotating frame requested without a configured drive")]
    DriveNotConfigured,
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    State(#[from] StateError),
}

/// Reference frame for the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Frame {
    /// Static field along z, full isotropic hyperfine coupling.
    Lab,
    /// Lab frame plus a circularly polarized transverse drive
    /// `Omega_perp (cos(omega_esr t) S_x + sin(omega_esr t) S_y)`. The
    /// time-dependent reference model for driven runs: unitarily
    /// equivalent to the co-rotating frame with the exactly transformed
    /// (time-dependent) hyperfine coupling.
    LabDriven,
    /// Frame co-rotating with a resonant microwave drive: the electron
    /// Zeeman term becomes the detuning `omega_e - omega_esr`, the drive
    /// enters as `Omega_perp S_x`, and the hyperfine term is frozen per
    /// [`RotatingHyperfine`]. A static reconstruction of the driven
    /// problem; compare against [`Frame::LabDriven`].
    RotatingResonant { hyperfine: RotatingHyperfine },
}

/// Treatment of the hyperfine coupling in the rotating frame.
///
/// The co-rotating transformation makes the transverse hyperfine components
/// time-dependent; `Secular` keeps only the static `A S_z I_z` part, `Full`
/// freezes the complete `A S.I` instead. The two bracket the unwritten
/// time-dependent problem and can be compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RotatingHyperfine {
    Secular,
    Full,
}

/// The six spin-1/2 operators on the product space.
#[derive(Debug, Clone)]
pub struct SpinOperators {
    /// Electron operators `sigma_a/2 (x) 1`, order x, y, z.
    pub s: [Matrix4<C64>; 3],
    /// Nuclear operators `1 (x) sigma_a/2`, order x, y, z.
    pub i: [Matrix4<C64>; 3],
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn pauli() -> [Matrix2<C64>; 3] {
    [
        Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
        Matrix2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)),
        Matrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)),
    ]
}

impl SpinOperators {
    pub fn new() -> Self {
        let half = c(0.5, 0.0);
        let id = Matrix2::identity();
        let sigma = pauli();
        let s = [
            (sigma[0] * half).kronecker(&id),
            (sigma[1] * half).kronecker(&id),
            (sigma[2] * half).kronecker(&id),
        ];
        let i = [
            id.kronecker(&(sigma[0] * half)),
            id.kronecker(&(sigma[1] * half)),
            id.kronecker(&(sigma[2] * half)),
        ];
        Self { s, i }
    }
}

impl Default for SpinOperators {
    fn default() -> Self {
        Self::new()
    }
}

fn adjoint(m: &Matrix4<C64>) -> Matrix4<C64> {
    m.map(|z| z.conj()).transpose()
}

fn hermiticity_deviation(m: &Matrix4<C64>) -> f64 {
    let d = m - adjoint(m);
    d.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenvalues of a hermitian 4x4 matrix, ascending.
fn hermitian_eigenvalues(m: &Matrix4<C64>) -> Vector4<f64> {
    let sym = nalgebra::SymmetricEigen::new(*m);
    let mut ev: Vec<f64> = sym.eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Vector4::from_iterator(ev)
}

/// 4x4 hermitian, unit-trace, positive-semidefinite state of the pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(Matrix4<C64>);

impl DensityMatrix {
    /// Validate hermiticity, unit trace and positivity.
    pub fn new(m: Matrix4<C64>) -> Result<Self, StateError> {
        let herm = hermiticity_deviation(&m);
        if herm >= STATE_TOL {
            return Err(StateError::NotHermitian { deviation: herm });
        }
        let tr = m.trace();
        let trace_dev = (tr - c(1.0, 0.0)).norm();
        if trace_dev >= STATE_TOL {
            return Err(StateError::BadTrace {
                deviation: trace_dev,
            });
        }
        let symmetrized = (m + adjoint(&m)) * c(0.5, 0.0);
        let min_eig = hermitian_eigenvalues(&symmetrized)[0];
        if min_eig <= PSD_TOL {
            return Err(StateError::NotAState {
                min_eigenvalue: min_eig,
            });
        }
        Ok(Self(symmetrized))
    }

    /// Symmetrize and wrap without the positivity check; used on solver
    /// output where positivity is a reported diagnostic.
    pub fn from_evolution(m: Matrix4<C64>) -> Self {
        Self((m + adjoint(&m)) * c(0.5, 0.0))
    }

    /// The maximally mixed state `1/4`.
    pub fn maximally_mixed() -> Self {
        Self(Matrix4::identity() * c(0.25, 0.0))
    }

    /// Projector onto a pure state (normalized internally).
    pub fn from_pure(v: Vector4<C64>) -> Self {
        let n = v.norm();
        let v = v / c(n, 0.0);
        Self(v * adjoint_vec(&v))
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// `Tr rho^2`; 1 for pure states.
    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.0)[0]
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        hermiticity_deviation(&self.0)
    }
}

fn adjoint_vec(v: &Vector4<C64>) -> nalgebra::Matrix1x4<C64> {
    v.map(|z| z.conj()).transpose()
}

/// Build the pair Hamiltonian in the requested frame (rad/s, hbar = 1).
///
/// Lab frame: `omega_e S_z - omega_n I_z + A S.I`. Rotating frame: the
/// electron Zeeman frequency is replaced by the detuning and the drive term
/// `Omega_perp S_x` is added; the hyperfine term follows the
/// [`RotatingHyperfine`] choice.
pub fn build_hamiltonian(
    params: &SystemParams,
    frame: Frame,
) -> Result<Matrix4<C64>, LindbladError> {
    let ops = SpinOperators::new();
    build_hamiltonian_with(params, frame, &ops)
}

fn build_hamiltonian_with(
    params: &SystemParams,
    frame: Frame,
    ops: &SpinOperators,
) -> Result<Matrix4<C64>, LindbladError> {
    let a = params.a();
    let si_full: Matrix4<C64> =
        ops.s[0] * ops.i[0] + ops.s[1] * ops.i[1] + ops.s[2] * ops.i[2];
    let re = |x: f64| c(x, 0.0);
    let lab_static =
        ops.s[2] * re(params.omega_e()) - ops.i[2] * re(params.omega_n()) + si_full * re(a);
    match frame {
        Frame::Lab => Ok(lab_static),
        // Static part only; the oscillating drive term lives in the
        // generator.
        Frame::LabDriven => {
            if params.omega_perp().is_none() || params.omega_esr().is_none() {
                return Err(LindbladError::DriveNotConfigured);
            }
            Ok(lab_static)
        }
        Frame::RotatingResonant { hyperfine } => {
            let (omega_perp, omega_esr) = match (params.omega_perp(), params.omega_esr()) {
                (Some(wp), Some(we)) => (wp, we),
                _ => return Err(LindbladError::DriveNotConfigured),
            };
            let detuning = params.omega_e() - omega_esr;
            let hf = match hyperfine {
                RotatingHyperfine::Secular => ops.s[2] * ops.i[2],
                RotatingHyperfine::Full => si_full,
            };
            Ok(ops.s[2] * re(detuning) - ops.i[2] * re(params.omega_n())
                + ops.s[0] * re(omega_perp)
                + hf * re(a))
        }
    }
}

/// Precomputed generator of the master equation; `apply_at` is the hot
/// path.
pub struct Liouvillian {
    h: Matrix4<C64>,
    /// `(omega_perp, omega_esr)` of the oscillating lab-frame drive term.
    drive: Option<(f64, f64)>,
    gamma_e: f64,
    pump: Matrix4<C64>,
    ops: SpinOperators,
}

impl Liouvillian {
    pub fn new(params: &SystemParams, frame: Frame) -> Result<Self, LindbladError> {
        let ops = SpinOperators::new();
        let h = build_hamiltonian_with(params, frame, &ops)?;
        let drive = match frame {
            Frame::LabDriven => Some((
                params.omega_perp().ok_or(LindbladError::DriveNotConfigured)?,
                params.omega_esr().ok_or(LindbladError::DriveNotConfigured)?,
            )),
            _ => None,
        };
        let gamma_e = params.gamma_e()?;
        let pump = ops.s[2] * c(gamma_e * params.p_e() / 2.0, 0.0);
        Ok(Self {
            h,
            drive,
            gamma_e,
            pump,
            ops,
        })
    }

    /// Static part of the Hamiltonian.
    pub fn hamiltonian(&self) -> &Matrix4<C64> {
        &self.h
    }

    /// `-i[H(t), rho] + Gamma_e (sum_a S_a rho S_a - (3/4) rho + (p_e/2) S_z)`.
    pub fn apply_at(&self, t: f64, rho: &Matrix4<C64>) -> Matrix4<C64> {
        let minus_i = c(0.0, -1.0);
        let h = match self.drive {
            None => self.h,
            Some((omega_perp, omega_esr)) => {
                let (sin, cos) = (omega_esr * t).sin_cos();
                self.h
                    + self.ops.s[0] * c(omega_perp * cos, 0.0)
                    + self.ops.s[1] * c(omega_perp * sin, 0.0)
            }
        };
        let mut out = (h * rho - rho * h) * minus_i;
        if self.gamma_e != 0.0 {
            let mut diss = self.pump - rho * c(0.75 * self.gamma_e, 0.0);
            for s in &self.ops.s {
                diss += s * rho * s * c(self.gamma_e, 0.0);
            }
            out += diss;
        }
        out
    }

    /// The generator at `t = 0`; exact for every static frame.
    pub fn apply(&self, rho: &Matrix4<C64>) -> Matrix4<C64> {
        self.apply_at(0.0, rho)
    }
}

/// Right-hand side of the master equation for one state.
pub fn liouville_rhs(
    rho: &DensityMatrix,
    params: &SystemParams,
    frame: Frame,
) -> Result<Matrix4<C64>, LindbladError> {
    Ok(Liouvillian::new(params, frame)?.apply(rho.matrix()))
}

/// Worst-case structural diagnostics over the output samples of an
/// evolution.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InvariantReport {
    /// max over samples of `|Tr rho - 1|`.
    pub max_trace_deviation: f64,
    /// max over samples of the pre-symmetrization hermiticity deviation.
    pub max_hermiticity_deviation: f64,
    /// min over samples of the smallest eigenvalue.
    pub min_eigenvalue: f64,
    /// max over samples of `Tr rho^2 - 1` (positive means purity excess).
    pub max_purity_excess: f64,
}

/// Output of [`evolve_density`]: states at the grid points plus worst-case
/// invariant diagnostics.
pub struct DensityEvolution {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub invariants: InvariantReport,
}

const RHO_DIM: usize = 32;

fn flatten(m: &Matrix4<C64>, out: &mut [f64]) {
    for (k, z) in m.iter().enumerate() {
        out[2 * k] = z.re;
        out[2 * k + 1] = z.im;
    }
}

fn unflatten(v: &[f64]) -> Matrix4<C64> {
    let mut m = Matrix4::zeros();
    for (k, z) in m.iter_mut().enumerate() {
        *z = c(v[2 * k], v[2 * k + 1]);
    }
    m
}

/// Integrate the master equation, sampling at the grid points.
///
/// Output states are symmetrized (`rho <- (rho + rho^dagger)/2`); trace,
/// hermiticity drift, positivity and purity are accumulated into the
/// returned [`InvariantReport`] rather than enforced, so that runs outside
/// the linearized pump's positivity domain remain inspectable.
pub fn evolve_density(
    rho0: &DensityMatrix,
    params: &SystemParams,
    frame: Frame,
    t_grid: &[f64],
    rel_tol: f64,
    abs_tol: f64,
) -> Result<DensityEvolution, LindbladError> {
    let liouvillian = Liouvillian::new(params, frame)?;
    let solver = DormandPrince {
        rel_tol,
        abs_tol,
        ..DormandPrince::default()
    };

    let mut y0 = nalgebra::DVector::zeros(RHO_DIM);
    flatten(rho0.matrix(), y0.as_mut_slice());

    let raw = solver.solve(
        |t, y, dy| {
            let rho = unflatten(y.as_slice());
            let d = liouvillian.apply_at(t, &rho);
            flatten(&d, dy.as_mut_slice());
        },
        y0,
        t_grid,
    )?;

    let mut report = InvariantReport {
        max_trace_deviation: 0.0,
        max_hermiticity_deviation: 0.0,
        min_eigenvalue: f64::INFINITY,
        max_purity_excess: f64::NEG_INFINITY,
    };
    let mut states = Vec::with_capacity(raw.len());
    for y in &raw {
        let m = unflatten(y.as_slice());
        report.max_hermiticity_deviation = report
            .max_hermiticity_deviation
            .max(hermiticity_deviation(&m));
        let state = DensityMatrix::from_evolution(m);
        report.max_trace_deviation = report.max_trace_deviation.max((state.trace() - 1.0).abs());
        report.min_eigenvalue = report.min_eigenvalue.min(state.min_eigenvalue());
        report.max_purity_excess = report.max_purity_excess.max(state.purity() - 1.0);
        states.push(state);
    }

    Ok(DensityEvolution {
        times: t_grid.to_vec(),
        states,
        invariants: report,
    })
}

/// Integrate and return expectation values as a [`Trajectory`], alongside
/// the invariant diagnostics.
pub fn evolve_trajectory(
    rho0: &DensityMatrix,
    params: &SystemParams,
    frame: Frame,
    t_grid: &[f64],
    rel_tol: f64,
    abs_tol: f64,
) -> Result<(Trajectory, InvariantReport), LindbladError> {
    let evo = evolve_density(rho0, params, frame, t_grid, rel_tol, abs_tol)?;
    let tag = match frame {
        Frame::Lab | Frame::LabDriven => FrameTag::Lab,
        Frame::RotatingResonant { .. } => FrameTag::Rotating,
    };
    let states: Vec<BlochState> = evo
        .states
        .iter()
        .map(|rho| expectations(rho).with_frame(tag))
        .collect();
    let unit = if params.is_dimensionless() {
        TimeUnit::DimensionlessTau
    } else {
        TimeUnit::Seconds
    };
    Ok((
        Trajectory::new(evo.times, states, unit, params.clone()),
        evo.invariants,
    ))
}

/// The 15 expectation values `<S_a>`, `<I_b>`, `<S_a I_b>` of a state.
pub fn expectations(rho: &DensityMatrix) -> BlochState {
    expectations_raw(rho.matrix())
}

/// Expectation map applied to an arbitrary matrix. Because the map is
/// linear, feeding it `d rho/dt` yields the time derivative of the
/// expectation values; the Bloch-equivalence tests rely on this.
pub fn expectations_raw(m: &Matrix4<C64>) -> BlochState {
    let ops = SpinOperators::new();
    let tr = |x: &Matrix4<C64>| -> f64 { (m * x).trace().re };
    let s = Vector3::new(tr(&ops.s[0]), tr(&ops.s[1]), tr(&ops.s[2]));
    let i = Vector3::new(tr(&ops.i[0]), tr(&ops.i[1]), tr(&ops.i[2]));
    let mut si = nalgebra::Matrix3::zeros();
    for a in 0..3 {
        for b in 0..3 {
            si[(a, b)] = tr(&(ops.s[a] * ops.i[b]));
        }
    }
    BlochState::new(s, i, si)
}

/// Reconstruct the density matrix with the given expectation values:
///
/// ```text
/// rho = (1/4) [ 1 + sum_a 2 s_a sigma_a(x)1 + sum_b 2 i_b 1(x)sigma_b
///               + sum_ab 4 si_ab sigma_a(x)sigma_b ]
/// ```
///
/// Fails with [`StateError::NotAState`] when the 15 numbers are not jointly
/// realizable (reconstructed matrix has a negative eigenvalue).
pub fn density_from_expectations(state: &BlochState) -> Result<DensityMatrix, StateError> {
    let ops = SpinOperators::new();
    let mut m = Matrix4::identity() * c(0.25, 0.0);
    for a in 0..3 {
        // sigma(x)1 = 2 S_a, scaled by s_a/2 gives s_a S_a here.
        m += ops.s[a] * c(state.s[a], 0.0);
        m += ops.i[a] * c(state.i[a], 0.0);
        for b in 0..3 {
            m += ops.s[a] * ops.i[b] * c(4.0 * state.si[(a, b)], 0.0);
        }
    }
    DensityMatrix::new(m)
}
