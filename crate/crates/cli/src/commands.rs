//! The five subcommands: rates, trajectory, sweep, sensitivity, compare.

use donorspin::bloch::{self, BlochState, Trajectory};
use donorspin::compare::{self, CompareConfig};
use donorspin::edmr;
use donorspin::kondo::{self, CouplingRegime};
use donorspin::lindblad::{self, Frame, RotatingHyperfine};
use donorspin::params::SystemParams;
use donorspin::rates::{self, Observable};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use std::path::Path;

use crate::output::{self, Sidecar};
use crate::CliError;

/// Map the exchange-rate resolution onto the CLI's exit-code contract:
/// screened is a physics refusal, a missing source is a validation error.
fn resolve_gamma(params: &SystemParams) -> Result<f64, CliError> {
    params.gamma_e().map_err(CliError::from_params)
}

#[derive(Serialize)]
struct RatesReport {
    gamma_e_rad_s: f64,
    jeff_nu_sq: Option<f64>,
    p_e: f64,
    polarization_magnitude: f64,
    regime: kondo::RegimeReport,
    inv_t2n_per_s: f64,
    inv_t1n_per_s: f64,
    t2n_s: f64,
    t1n_s: f64,
    t1n_peak: PeakReport,
    readout_contrast: f64,
    t_edmr_s: f64,
    driven: Option<rates::RateSet>,
    recombination: Option<RecombinationReport>,
}

#[derive(Serialize)]
struct PeakReport {
    gamma_e_star_rad_s: f64,
    max_rate_per_s: f64,
    min_t1n_s: f64,
}

#[derive(Serialize)]
struct RecombinationReport {
    gamma_eff_rad_s: f64,
    a_sq_eff: f64,
    inv_t2n_per_s: f64,
    inv_t1n_per_s: f64,
}

pub fn cmd_rates(params: &SystemParams, t_edmr: f64, out: Option<&Path>) -> Result<(), CliError> {
    let gamma = resolve_gamma(params)?;
    let regime = kondo::classify_regime(params).map_err(CliError::from_params)?;
    let a = params.a();
    let b_tilde = params.b_tilde();
    if a <= 0.0 {
        return Err(CliError::Validation(
            "rates require a positive hyperfine coupling".into(),
        ));
    }

    let inv_t2n = rates::inv_t2n_analytic(gamma, a);
    let inv_t1n = rates::inv_t1n_analytic(gamma, a, b_tilde);
    let (g_star, max_rate) = rates::t1n_peak(a, b_tilde);

    let driven = match params.omega_perp() {
        Some(op) => Some(
            rates::apply_drive_substitution(a, b_tilde, Some(gamma), op)
                .map_err(|e| CliError::Validation(e.to_string()))?,
        ),
        None => None,
    };

    let recombination = match (params.gamma_i(), params.gamma_c()) {
        (Some(gi), Some(gc)) => {
            let (gamma_eff, a_sq_eff) = rates::apply_recombination_substitution(gamma, gi, gc, a)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            Some(RecombinationReport {
                gamma_eff_rad_s: gamma_eff,
                a_sq_eff,
                inv_t2n_per_s: rates::inv_t2n_analytic_asq(gamma_eff, a_sq_eff),
                inv_t1n_per_s: rates::inv_t1n_analytic_asq(gamma_eff, a_sq_eff, b_tilde),
            })
        }
        _ => None,
    };

    let report = RatesReport {
        gamma_e_rad_s: gamma,
        jeff_nu_sq: regime.jeff_nu_sq,
        p_e: params.p_e(),
        polarization_magnitude: params.p_e().abs(),
        regime,
        inv_t2n_per_s: inv_t2n,
        inv_t1n_per_s: inv_t1n,
        t2n_s: 1.0 / inv_t2n,
        t1n_s: 1.0 / inv_t1n,
        t1n_peak: PeakReport {
            gamma_e_star_rad_s: g_star,
            max_rate_per_s: max_rate,
            min_t1n_s: 1.0 / max_rate,
        },
        readout_contrast: rates::readout_contrast(inv_t2n, inv_t1n, t_edmr),
        t_edmr_s: t_edmr,
        driven,
        recombination,
    };

    let text = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Validation(format!("json: {e}")))?
        + "\n";
    output::emit(out, text.as_bytes())
}

pub struct TrajectoryOptions<'a> {
    pub state_spec: &'a str,
    pub t_end: f64,
    pub samples: usize,
    pub solver: &'a str,
    pub frame: &'a str,
    pub rotate_output: bool,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub out: Option<&'a Path>,
}

fn parse_frame(name: &str) -> Result<Frame, CliError> {
    match name {
        "lab" => Ok(Frame::Lab),
        "rotating-secular" => Ok(Frame::RotatingResonant {
            hyperfine: RotatingHyperfine::Secular,
        }),
        "rotating-full" => Ok(Frame::RotatingResonant {
            hyperfine: RotatingHyperfine::Full,
        }),
        other => Err(CliError::Validation(format!(
            "unknown frame {other:?} (lab, rotating-secular, rotating-full)"
        ))),
    }
}

fn time_grid(t_end: f64, samples: usize) -> Result<Vec<f64>, CliError> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(CliError::Validation("t-end must be positive".into()));
    }
    if samples < 2 {
        return Err(CliError::Validation("samples must be >= 2".into()));
    }
    Ok((0..=samples)
        .map(|k| k as f64 * t_end / samples as f64)
        .collect())
}

fn check_tolerances(rel: f64, abs: f64) -> Result<(), CliError> {
    for (name, v) in [("rel-tol", rel), ("abs-tol", abs)] {
        if !(v > 0.0 && v <= 1.0e-3) {
            return Err(CliError::Validation(format!(
                "{name} must lie in (0, 1e-3], got {v}"
            )));
        }
    }
    Ok(())
}

fn run_solver(
    solver: &str,
    state0: &BlochState,
    params: &SystemParams,
    frame: Frame,
    grid: &[f64],
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Trajectory, CliError> {
    match solver {
        "bloch" => {
            if frame != Frame::Lab {
                return Err(CliError::Validation(
                    "the bloch solver integrates the lab-frame equations; use \
                     --solver lindblad for rotating frames"
                        .into(),
                ));
            }
            bloch::evolve_bloch(state0, params, grid, rel_tol, abs_tol)
                .map_err(CliError::from_bloch)
        }
        "lindblad" => {
            let rho0 =
                lindblad::density_from_expectations(state0).map_err(|e| {
                    CliError::Validation(format!("initial state is not realizable: {e}"))
                })?;
            let (traj, _invariants) =
                lindblad::evolve_trajectory(&rho0, params, frame, grid, rel_tol, abs_tol)
                    .map_err(CliError::from_lindblad)?;
            Ok(traj)
        }
        other => Err(CliError::Validation(format!(
            "unknown solver {other:?} (bloch, lindblad, both)"
        ))),
    }
}

fn maybe_rotate(traj: Trajectory, params: &SystemParams, rotate: bool) -> Result<Trajectory, CliError> {
    if !rotate {
        return Ok(traj);
    }
    bloch::to_rotating_frame(&traj, params.omega_e(), params.omega_n())
        .map_err(CliError::from_bloch)
}

pub fn cmd_trajectory(params: &SystemParams, opts: &TrajectoryOptions) -> Result<(), CliError> {
    check_tolerances(opts.rel_tol, opts.abs_tol)?;
    let frame = parse_frame(opts.frame)?;
    let state0 = crate::config::parse_state(opts.state_spec, params)?;
    let grid = time_grid(opts.t_end, opts.samples)?;

    let solvers: Vec<&str> = match opts.solver {
        "both" => vec!["bloch", "lindblad"],
        s => vec![s],
    };

    let mut trajectories = Vec::new();
    for solver in &solvers {
        let traj = run_solver(solver, &state0, params, frame, &grid, opts.rel_tol, opts.abs_tol)?;
        trajectories.push((solver.to_string(), maybe_rotate(traj, params, opts.rotate_output)?));
    }

    let detail = |solver: &str| {
        json!({
            "state": opts.state_spec,
            "t_end": opts.t_end,
            "samples": opts.samples,
            "solver": solver,
            "rotated_output": opts.rotate_output,
        })
    };

    if trajectories.len() == 1 {
        let (solver, traj) = &trajectories[0];
        let mut buf = Vec::new();
        output::write_trajectory_csv(&mut buf, traj)
            .map_err(|e| CliError::Validation(format!("csv: {e}")))?;
        output::emit(opts.out, &buf)?;
        if let Some(path) = opts.out {
            output::write_sidecar(
                path,
                &Sidecar {
                    command: "trajectory",
                    params,
                    solver,
                    frame: opts.frame,
                    rel_tol: opts.rel_tol,
                    abs_tol: opts.abs_tol,
                    detail: detail(solver),
                    generated_unix_ms: output::now_unix_ms(),
                },
            )?;
        }
        return Ok(());
    }

    // Both solvers: two files plus a deviation summary on stdout.
    let base = opts.out.ok_or_else(|| {
        CliError::Validation("--solver both requires --out to name the two files".into())
    })?;
    let mut files = Vec::new();
    for (solver, traj) in &trajectories {
        let path = output::tagged_path(base, solver);
        let mut buf = Vec::new();
        output::write_trajectory_csv(&mut buf, traj)
            .map_err(|e| CliError::Validation(format!("csv: {e}")))?;
        std::fs::write(&path, &buf)
            .map_err(|e| CliError::Validation(format!("write {}: {e}", path.display())))?;
        output::write_sidecar(
            &path,
            &Sidecar {
                command: "trajectory",
                params,
                solver,
                frame: opts.frame,
                rel_tol: opts.rel_tol,
                abs_tol: opts.abs_tol,
                detail: detail(solver),
                generated_unix_ms: output::now_unix_ms(),
            },
        )?;
        files.push(path.display().to_string());
    }
    let max_deviation = trajectories[0]
        .1
        .states()
        .iter()
        .zip(trajectories[1].1.states())
        .map(|(a, b)| a.max_abs_diff(b))
        .fold(0.0, f64::max);
    output::print_json(&json!({
        "files": files,
        "max_deviation": max_deviation,
    }))
}

pub struct SweepOptions<'a> {
    pub variable: &'a str,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    pub log: bool,
    pub fit: bool,
    pub jobs: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub out: Option<&'a Path>,
}

pub const SWEEP_HEADER: &str = "sweep_value,gamma_e_rad_s,jeff_nu_sq,log_ratio,regime,\
strong_log_ratio,weak_log_ratio,inv_t2n_per_s,inv_t1n_per_s,sensitivity_threshold,\
fitted_inv_t2n_per_s,fit_rms_t2n,fitted_inv_t1n_per_s,fit_rms_t1n,fit_status";

fn params_at(
    params: &SystemParams,
    variable: &str,
    value: f64,
) -> Result<SystemParams, CliError> {
    if params.is_dimensionless() {
        if variable != "gamma_e" {
            return Err(CliError::Validation(format!(
                "dimensionless mode can only sweep gamma_e, not {variable}"
            )));
        }
        let mut b = SystemParams::dimensionless()
            .hyperfine(params.a())
            .omega_e(params.omega_e())
            .omega_n(params.omega_n())
            .gamma_e(value)
            .p_e(params.p_e());
        if let (Some(op), Some(oe)) = (params.omega_perp(), params.omega_esr()) {
            b = b.drive(op, oe);
        }
        if let (Some(gi), Some(gc)) = (params.gamma_i(), params.gamma_c()) {
            b = b.recombination(gi, gc);
        }
        return b.build().map_err(CliError::from_params);
    }

    let b_field = params.b_field().unwrap();
    let temperature = params.temperature().unwrap();
    let (b_field, temperature, b_perp, current, gamma_override, t_kondo) = match variable {
        "gamma_e" => (b_field, temperature, params.b_perp(), params.current(), Some(value), None),
        "temperature" => (
            b_field,
            value,
            params.b_perp(),
            params.current(),
            params.gamma_e_override(),
            params.t_kondo(),
        ),
        "B" => (
            value,
            temperature,
            params.b_perp(),
            params.current(),
            params.gamma_e_override(),
            params.t_kondo(),
        ),
        "B_perp" => (
            b_field,
            temperature,
            Some(value),
            params.current(),
            params.gamma_e_override(),
            params.t_kondo(),
        ),
        "current" => (
            b_field,
            temperature,
            params.b_perp(),
            Some(value),
            params.gamma_e_override(),
            params.t_kondo(),
        ),
        other => {
            return Err(CliError::Validation(format!(
                "unknown sweep variable {other:?} (gamma_e, temperature, B, B_perp, current)"
            )))
        }
    };

    let mut b = SystemParams::physical(params.a(), b_field, temperature);
    if let Some(tk) = t_kondo {
        b = b.t_kondo(tk);
    }
    if let Some(g) = gamma_override {
        b = b.gamma_e_override(g);
    }
    if let (Some(bp), Some(oe)) = (b_perp, params.omega_esr()) {
        b = b.drive(bp, oe);
    }
    if let Some(i) = current {
        b = b.current(i);
    }
    if let (Some(gi), Some(gc)) = (params.gamma_i(), params.gamma_c()) {
        b = b.recombination(gi, gc);
    }
    b.build().map_err(CliError::from_params)
}

struct SweepRow {
    cells: Vec<String>,
}

fn fit_point(
    point: &SystemParams,
    gamma: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<(rates::RateFit, rates::RateFit), String> {
    let a = point.a();
    let p_e = point.p_e();
    let run = |state0: BlochState, rate_expect: f64, observable: Observable| {
        if !(rate_expect > 0.0) {
            return Err("analytic rate is zero; nothing to fit".to_string());
        }
        let t_end = 3.2 / rate_expect;
        let grid: Vec<f64> = (0..=900).map(|k| k as f64 * t_end / 900.0).collect();
        let traj = bloch::evolve_bloch(&state0, point, &grid, rel_tol, abs_tol)
            .map_err(|e| e.to_string())?;
        rates::fit_exponential_rate(&traj, observable, p_e).map_err(|e| e.to_string())
    };
    let t2n = run(
        BlochState::product(
            nalgebra::Vector3::new(0.0, 0.0, p_e / 2.0),
            nalgebra::Vector3::new(0.5, 0.0, 0.0),
        ),
        rates::inv_t2n_analytic(gamma, a),
        Observable::TransversePerpMagnitude,
    )?;
    let t1n = run(
        BlochState::product(
            nalgebra::Vector3::new(0.0, 0.0, p_e / 2.0),
            nalgebra::Vector3::new(0.0, 0.0, 0.5),
        ),
        rates::inv_t1n_analytic(gamma, a, point.b_tilde()),
        Observable::Iz,
    )?;
    Ok((t2n, t1n))
}

fn sweep_row(
    base: &SystemParams,
    opts: &SweepOptions,
    value: f64,
) -> Result<SweepRow, CliError> {
    let f = output::fmt_float;
    let empty = String::new();

    let point = params_at(base, opts.variable, value)?;
    let regime = kondo::classify_regime(&point).map_err(CliError::from_params)?;

    let mut cells: Vec<String> = Vec::with_capacity(15);
    cells.push(f(value));

    if regime.regime == CouplingRegime::KondoScreened {
        // Screened rows keep the regime label and advisory scale but no
        // rates.
        cells.push(empty.clone());
        cells.push(empty.clone());
        cells.push(regime.log_ratio.map(f).unwrap_or_default());
        cells.push(format!("{:?}", regime.regime));
        cells.push(regime.strong_threshold.map(f).unwrap_or_default());
        cells.push(regime.weak_threshold.map(f).unwrap_or_default());
        for _ in 0..8 {
            cells.push(empty.clone());
        }
        return Ok(SweepRow { cells });
    }

    let gamma = regime.gamma_e;
    let a = point.a();
    let inv_t2n = rates::inv_t2n_analytic(gamma, a);
    let inv_t1n = rates::inv_t1n_analytic(gamma, a, point.b_tilde());
    let threshold = match (point.current(), point.omega_perp()) {
        (Some(i), Some(op)) if a > 0.0 => {
            Some(edmr::sensitivity_threshold(i, op, a, point.omega_e()))
        }
        _ => None,
    };

    cells.push(f(gamma));
    cells.push(regime.jeff_nu_sq.map(f).unwrap_or_default());
    cells.push(regime.log_ratio.map(f).unwrap_or_default());
    cells.push(format!("{:?}", regime.regime));
    cells.push(regime.strong_threshold.map(f).unwrap_or_default());
    cells.push(regime.weak_threshold.map(f).unwrap_or_default());
    cells.push(f(inv_t2n));
    cells.push(f(inv_t1n));
    cells.push(threshold.map(f).unwrap_or_default());

    if opts.fit {
        match fit_point(&point, gamma, opts.rel_tol, opts.abs_tol) {
            Ok((t2n, t1n)) => {
                cells.push(f(t2n.rate));
                cells.push(f(t2n.diagnostics.rms_log_residual));
                cells.push(f(t1n.rate));
                cells.push(f(t1n.diagnostics.rms_log_residual));
                cells.push("ok".into());
            }
            Err(e) => {
                for _ in 0..4 {
                    cells.push(empty.clone());
                }
                cells.push(e.replace(',', ";"));
            }
        }
    } else {
        for _ in 0..5 {
            cells.push(empty.clone());
        }
    }
    Ok(SweepRow { cells })
}

pub fn cmd_sweep(params: &SystemParams, opts: &SweepOptions) -> Result<(), CliError> {
    check_tolerances(opts.rel_tol, opts.abs_tol)?;
    if opts.points < 2 {
        return Err(CliError::Validation("points must be >= 2".into()));
    }
    if !(opts.from.is_finite() && opts.to.is_finite() && opts.from < opts.to) {
        return Err(CliError::Validation(
            "sweep grid must satisfy from < to".into(),
        ));
    }
    if opts.log && opts.from <= 0.0 {
        return Err(CliError::Validation(
            "log grids need a positive lower bound".into(),
        ));
    }

    let grid: Vec<f64> = (0..opts.points)
        .map(|k| {
            let s = k as f64 / (opts.points - 1) as f64;
            if opts.log {
                opts.from * (opts.to / opts.from).powf(s)
            } else {
                opts.from + (opts.to - opts.from) * s
            }
        })
        .collect();

    let rows: Vec<Result<SweepRow, CliError>> = if opts.fit && opts.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
        pool.install(|| {
            grid.par_iter()
                .map(|&v| sweep_row(params, opts, v))
                .collect()
        })
    } else {
        grid.iter().map(|&v| sweep_row(params, opts, v)).collect()
    };

    let mut buf = String::new();
    buf.push_str(SWEEP_HEADER);
    buf.push('\n');
    for row in rows {
        let row = row?;
        buf.push_str(&row.cells.join(","));
        buf.push('\n');
    }
    output::emit(opts.out, buf.as_bytes())?;

    if let Some(path) = opts.out {
        output::write_sidecar(
            path,
            &Sidecar {
                command: "sweep",
                params,
                solver: "bloch",
                frame: "lab",
                rel_tol: opts.rel_tol,
                abs_tol: opts.abs_tol,
                detail: json!({
                    "variable": opts.variable,
                    "from": opts.from,
                    "to": opts.to,
                    "points": opts.points,
                    "log": opts.log,
                    "fit": opts.fit,
                }),
                generated_unix_ms: output::now_unix_ms(),
            },
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SensitivityReport {
    #[serde(flatten)]
    result: edmr::SensitivityResult,
    contrast_source: &'static str,
    resonance_b_minus_t: f64,
    resonance_b_plus_t: f64,
    resonance_splitting_t: f64,
}

pub fn cmd_sensitivity(
    params: &SystemParams,
    contrast: Option<f64>,
    attest_linewidth: bool,
    t2e_star: Option<f64>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let omega_esr = params
        .omega_esr()
        .ok_or_else(|| CliError::Validation("drive not configured".into()))?;

    let (contrast, source) = match contrast {
        Some(c) => (c, "user"),
        None => {
            let (b, t, bp) = match (params.b_field(), params.temperature(), params.b_perp()) {
                (Some(b), Some(t), Some(bp)) => (b, t, bp),
                _ => {
                    return Err(CliError::Validation(
                        "default contrast model needs physical B, temperature and B_perp; \
                         pass --contrast explicitly otherwise"
                            .into(),
                    ))
                }
            };
            (
                edmr::spin_scattering_contrast_model(b, t, bp, params.constants()),
                "external_spin_scattering_model",
            )
        }
    };

    let result = edmr::evaluate_readout(params, contrast, attest_linewidth, t2e_star)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let (b_minus, b_plus) =
        edmr::resonance_fields(omega_esr, params.a(), params.constants().gamma_e)
            .map_err(|e| CliError::Validation(e.to_string()))?;

    let report = SensitivityReport {
        result,
        contrast_source: source,
        resonance_b_minus_t: b_minus,
        resonance_b_plus_t: b_plus,
        resonance_splitting_t: b_plus - b_minus,
    };
    let text = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Validation(format!("json: {e}")))?
        + "\n";
    output::emit(out, text.as_bytes())
}

pub fn cmd_compare(
    params: &SystemParams,
    config: &CompareConfig,
    out: Option<&Path>,
) -> Result<(), CliError> {
    // Comparison needs a resolvable exchange rate up front so refusals map
    // to the right exit code.
    resolve_gamma(params)?;
    let report = compare::compare_solvers(params, config).map_err(|e| match e {
        compare::CompareError::Bloch(b) => CliError::from_bloch(b),
        compare::CompareError::Lindblad(l) => CliError::from_lindblad(l),
    })?;
    let text = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Validation(format!("json: {e}")))?
        + "\n";
    output::emit(out, text.as_bytes())?;
    if !report.pass {
        return Err(CliError::Solver(format!(
            "solver comparison failed: worst invariant {} (max deviation {:.3e})",
            report.worst_invariant, report.max_deviation
        )));
    }
    Ok(())
}
