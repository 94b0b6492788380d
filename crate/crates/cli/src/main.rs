//! Command-line frontend for the spin-pair simulator.
//!
//! Exit codes: 0 success, 2 validation error, 3 physics-domain refusal
//! (Kondo-screened regime), 4 solver failure. Errors print a single
//! machine-readable line on stderr.

mod commands;
mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use donorspin::bloch::BlochError;
use donorspin::compare::CompareConfig;
use donorspin::kondo::KondoError;
use donorspin::lindblad::LindbladError;
use donorspin::ode::OdeError;
use donorspin::params::ParamsError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Refusal(String),
    Solver(String),
}

impl CliError {
    fn from_params(e: ParamsError) -> Self {
        match e {
            ParamsError::Kondo(KondoError::Screened { .. }) => CliError::Refusal(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }

    fn from_bloch(e: BlochError) -> Self {
        match e {
            BlochError::Ode(ode) => CliError::from_ode(ode),
            BlochError::Params(p) => CliError::from_params(p),
            other => CliError::Validation(other.to_string()),
        }
    }

    fn from_lindblad(e: LindbladError) -> Self {
        match e {
            LindbladError::Ode(ode) => CliError::from_ode(ode),
            LindbladError::Params(p) => CliError::from_params(p),
            other => CliError::Validation(other.to_string()),
        }
    }

    fn from_ode(e: OdeError) -> Self {
        match e {
            OdeError::Stiffness { .. } | OdeError::MaxSteps { .. } => {
                CliError::Solver(e.to_string())
            }
            other => CliError::Validation(other.to_string()),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Refusal(_) => 3,
            CliError::Solver(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Refusal(m) | CliError::Solver(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "donorspin",
    version,
    about = "Donor electron-nuclear spin pair under a conduction-electron current: \
             rates, trajectories, sweeps, read-out sensitivity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ParamArgs {
    /// Flat key=value config file ('#' comments).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override or supply a config key (repeatable), e.g. --set B_T=2.0.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Exchange rate, coupling regime, nuclear relaxation rates, peak and
    /// read-out contrast as a JSON report.
    Rates {
        #[command(flatten)]
        params: ParamArgs,
        /// Read-out duration for the contrast estimate (s; 0 = optimal).
        #[arg(long, default_value_t = 0.0)]
        t_edmr: f64,
        /// Output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the spin pair and write the 15 expectation values as CSV.
    Trajectory {
        #[command(flatten)]
        params: ParamArgs,
        /// Initial state: presets iz_up | ix | thermal_e (combine with '+')
        /// or 15 comma-separated numbers.
        #[arg(long, default_value = "iz_up+thermal_e")]
        state: String,
        /// End time (seconds, or tau units when dimensionless).
        #[arg(long)]
        t_end: f64,
        /// Number of output intervals (>= 2).
        #[arg(long, default_value_t = 500)]
        samples: usize,
        /// bloch | lindblad | both.
        #[arg(long, default_value = "bloch")]
        solver: String,
        /// lab | rotating-secular | rotating-full (lindblad only).
        #[arg(long, default_value = "lab")]
        frame: String,
        /// Transform the output into the co-rotating frame before writing.
        #[arg(long, default_value_t = false)]
        rotate_output: bool,
        #[arg(long, default_value_t = 1.0e-9)]
        rel_tol: f64,
        #[arg(long, default_value_t = 1.0e-12)]
        abs_tol: f64,
        /// Output path (stdout when omitted; required for --solver both).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep one input over a grid and tabulate rates (CSV).
    Sweep {
        #[command(flatten)]
        params: ParamArgs,
        /// gamma_e | temperature | B | B_perp | current.
        #[arg(long)]
        sweep: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 25)]
        points: usize,
        /// Logarithmic grid spacing.
        #[arg(long, default_value_t = false)]
        log: bool,
        /// Also fit rates from solver trajectories at every point.
        #[arg(long, default_value_t = false)]
        fit: bool,
        /// Worker threads for --fit.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value_t = 1.0e-9)]
        rel_tol: f64,
        #[arg(long, default_value_t = 1.0e-12)]
        abs_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Shot-noise sensitivity analysis for nuclear-spin read-out (JSON).
    Sensitivity {
        #[command(flatten)]
        params: ParamArgs,
        /// Expected relative EDMR contrast; defaults to the bundled
        /// spin-dependent-scattering model (physical mode only).
        #[arg(long)]
        contrast: Option<f64>,
        /// Attest that the hyperfine splitting exceeds the electron
        /// linewidth (A > 1/T2e*), which the threshold assumes.
        #[arg(long, default_value_t = false)]
        attest_linewidth: bool,
        /// Supporting T2e* value (s), recorded in the report.
        #[arg(long)]
        t2e_star: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run random states through both solvers and report the worst
    /// deviation and invariant diagnostics (JSON); non-zero exit on breach.
    Compare {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 5.0)]
        t_end: f64,
        #[arg(long, default_value_t = 40)]
        samples: usize,
        #[arg(long, default_value_t = 1.0e-9)]
        rel_tol: f64,
        #[arg(long, default_value_t = 1.0e-12)]
        abs_tol: f64,
        /// Maximum allowed pointwise deviation.
        #[arg(long, default_value_t = 1.0e-8)]
        tolerance: f64,
        /// Self-test hook: corrupt a sign in the expectation-value solver
        /// so the harness can be seen to fail.
        #[arg(long, default_value_t = false, hide = true)]
        corrupt_sign: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Rates { params, t_edmr, out } => {
            let p = config::load_params(params.config.as_deref(), &params.set)?;
            commands::cmd_rates(&p, t_edmr, out.as_deref())
        }
        Command::Trajectory {
            params,
            state,
            t_end,
            samples,
            solver,
            frame,
            rotate_output,
            rel_tol,
            abs_tol,
            out,
        } => {
            let p = config::load_params(params.config.as_deref(), &params.set)?;
            commands::cmd_trajectory(
                &p,
                &commands::TrajectoryOptions {
                    state_spec: &state,
                    t_end,
                    samples,
                    solver: &solver,
                    frame: &frame,
                    rotate_output,
                    rel_tol,
                    abs_tol,
                    out: out.as_deref(),
                },
            )
        }
        Command::Sweep {
            params,
            sweep,
            from,
            to,
            points,
            log,
            fit,
            jobs,
            rel_tol,
            abs_tol,
            out,
        } => {
            let p = config::load_params(params.config.as_deref(), &params.set)?;
            commands::cmd_sweep(
                &p,
                &commands::SweepOptions {
                    variable: &sweep,
                    from,
                    to,
                    points,
                    log,
                    fit,
                    jobs,
                    rel_tol,
                    abs_tol,
                    out: out.as_deref(),
                },
            )
        }
        Command::Sensitivity {
            params,
            contrast,
            attest_linewidth,
            t2e_star,
            out,
        } => {
            let p = config::load_params(params.config.as_deref(), &params.set)?;
            commands::cmd_sensitivity(&p, contrast, attest_linewidth, t2e_star, out.as_deref())
        }
        Command::Compare {
            params,
            n,
            seed,
            t_end,
            samples,
            rel_tol,
            abs_tol,
            tolerance,
            corrupt_sign,
            out,
        } => {
            let p = config::load_params(params.config.as_deref(), &params.set)?;
            commands::cmd_compare(
                &p,
                &CompareConfig {
                    n_runs: n,
                    seed,
                    t_end,
                    samples,
                    rel_tol,
                    abs_tol,
                    tolerance,
                    corrupt_sign,
                },
                out.as_deref(),
            )
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
