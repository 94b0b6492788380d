//! Equivalence harness: the Bloch solver against the density-matrix oracle.
//!
//! The two solvers integrate the same linear system in different
//! coordinates; any sign or index error in either shows up as a pointwise
//! deviation far above integrator noise. The harness evolves randomly drawn
//! valid initial states through both solvers and reports the worst
//! deviation together with the structural invariants of the oracle
//! trajectory.

use nalgebra::Matrix4;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bloch::{self, BlochGenerator, BlochState};
use crate::lindblad::{self, DensityMatrix, Frame, InvariantReport};
use crate::params::SystemParams;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CompareError {
    #[error(transparent)]
    Bloch(#[from] bloch::BlochError),
    #[error(transparent)]
    Lindblad(#[from] lindblad::LindbladError),
}

/// Settings of one equivalence run.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CompareConfig {
    pub n_runs: usize,
    pub seed: u64,
    /// Trajectory span in units of `1/A` (or unit-scale time when
    /// dimensionless).
    pub t_end: f64,
    pub samples: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum allowed pointwise deviation.
    pub tolerance: f64,
    /// Self-test hook: corrupt a sign in the Bloch generator so the harness
    /// itself can be seen to fail.
    pub corrupt_sign: bool,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            n_runs: 20,
            seed: 42,
            t_end: 5.0,
            samples: 40,
            rel_tol: 1.0e-9,
            abs_tol: 1.0e-12,
            tolerance: 1.0e-8,
            corrupt_sign: false,
        }
    }
}

/// Worst-case outcome over all runs.
#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub n_runs: usize,
    pub max_deviation: f64,
    pub worst_run: usize,
    /// Worst structural diagnostics of the oracle trajectories.
    pub invariants: InvariantReport,
    /// Largest excess of any Bloch component beyond its physical bound.
    pub max_bloch_bound_excess: f64,
    /// Worst purity drift `max_t |Tr rho(t)^2 - Tr rho(0)^2|`; only
    /// meaningful as a conservation check when the exchange rate is zero.
    pub purity_drift: f64,
    /// Name of the worst-offending invariant, for failure messages.
    pub worst_invariant: String,
    pub pass: bool,
    pub tolerance: f64,
}

/// Gaussian sample via Box-Muller; avoids a distributions dependency.
fn standard_normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Random full-rank density matrix: `G G^dagger / Tr(G G^dagger)` with `G`
/// a complex Gaussian matrix.
pub fn random_density_matrix(rng: &mut impl Rng) -> DensityMatrix {
    let g = Matrix4::from_fn(|_, _| C64::new(standard_normal(rng), standard_normal(rng)));
    let gg = g * g.map(|z| z.conj()).transpose();
    let tr = gg.trace().re;
    DensityMatrix::new(gg / C64::new(tr, 0.0)).expect("Gram matrix is a valid state")
}

/// Random realizable Bloch state (expectations of a random density matrix).
pub fn random_bloch_state(rng: &mut impl Rng) -> BlochState {
    lindblad::expectations(&random_density_matrix(rng))
}

/// Random pure product state: polarized electron and nucleus in random
/// directions. These sit on the boundary of the state space and exercise
/// the solvers harder than full-rank states.
pub fn random_pure_product_state(rng: &mut impl Rng) -> BlochState {
    let dir = |rng: &mut dyn rand::RngCore| {
        let z: f64 = rng.gen_range(-1.0..1.0);
        let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let r = (1.0 - z * z).sqrt();
        nalgebra::Vector3::new(r * phi.cos(), r * phi.sin(), z) * 0.5
    };
    BlochState::product(dir(rng), dir(rng))
}

/// Evolve `n_runs` random initial states through both solvers and report
/// the worst pointwise deviation of the 15 expectation values.
pub fn compare_solvers(
    params: &SystemParams,
    config: &CompareConfig,
) -> Result<CompareReport, CompareError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let grid: Vec<f64> = (0..=config.samples)
        .map(|k| k as f64 * config.t_end / config.samples as f64)
        .collect();

    let mut generator = BlochGenerator::new(params).map_err(bloch::BlochError::from)?;
    if config.corrupt_sign {
        generator = generator.corrupt_tensor_sign();
    }

    let mut report = CompareReport {
        n_runs: config.n_runs,
        max_deviation: 0.0,
        worst_run: 0,
        invariants: InvariantReport {
            max_trace_deviation: 0.0,
            max_hermiticity_deviation: 0.0,
            min_eigenvalue: f64::INFINITY,
            max_purity_excess: f64::NEG_INFINITY,
        },
        max_bloch_bound_excess: 0.0,
        purity_drift: 0.0,
        worst_invariant: String::new(),
        pass: false,
        tolerance: config.tolerance,
    };

    for run in 0..config.n_runs {
        let rho0 = random_density_matrix(&mut rng);
        let state0 = lindblad::expectations(&rho0);

        let evo = lindblad::evolve_density(
            &rho0,
            params,
            Frame::Lab,
            &grid,
            config.rel_tol,
            config.abs_tol,
        )?;
        let bloch_traj = bloch::evolve_with_generator(
            &generator,
            &state0,
            params,
            &grid,
            config.rel_tol,
            config.abs_tol,
        )?;

        let purity0 = evo.states[0].purity();
        for (rho, b) in evo.states.iter().zip(bloch_traj.states()) {
            let dev = lindblad::expectations(rho).max_abs_diff(b);
            if dev > report.max_deviation {
                report.max_deviation = dev;
                report.worst_run = run;
            }
            let bound_excess = [
                b.s.norm() - 0.5,
                b.i.norm() - 0.5,
                b.si.iter().map(|x| x.abs()).fold(0.0, f64::max) - 0.25,
            ]
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
            report.max_bloch_bound_excess = report.max_bloch_bound_excess.max(bound_excess);
            report.purity_drift = report
                .purity_drift
                .max((rho.purity() - purity0).abs());
        }
        let inv = &evo.invariants;
        report.invariants.max_trace_deviation = report
            .invariants
            .max_trace_deviation
            .max(inv.max_trace_deviation);
        report.invariants.max_hermiticity_deviation = report
            .invariants
            .max_hermiticity_deviation
            .max(inv.max_hermiticity_deviation);
        report.invariants.min_eigenvalue =
            report.invariants.min_eigenvalue.min(inv.min_eigenvalue);
        report.invariants.max_purity_excess = report
            .invariants
            .max_purity_excess
            .max(inv.max_purity_excess);
    }

    report.pass = report.max_deviation < config.tolerance;
    report.worst_invariant = worst_invariant_name(&report);
    Ok(report)
}

fn worst_invariant_name(report: &CompareReport) -> String {
    let candidates = [
        ("solver_deviation", report.max_deviation / report.tolerance),
        (
            "trace_deviation",
            report.invariants.max_trace_deviation / 1.0e-8,
        ),
        (
            "negative_eigenvalue",
            -report.invariants.min_eigenvalue / 1.0e-8,
        ),
        (
            "bloch_bound_excess",
            report.max_bloch_bound_excess / 1.0e-8,
        ),
        (
            "purity_excess",
            report.invariants.max_purity_excess / 1.0e-10,
        ),
    ];
    candidates
        .into_iter()
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .map(|(name, _)| name.to_string())
        .unwrap()
}
