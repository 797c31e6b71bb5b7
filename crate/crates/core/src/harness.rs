//! Study driver: per-mesh EE, EE+RE and PF runs, power-law fits of the
//! energy error, wall-time comparison and CSV output.

use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use log::{info, warn};

use crate::analytic::{reference_energies, ReferenceEnergies};
use crate::config::{Method, ProblemParams, Reference, StudyConfig};
use crate::eigenerosion::{optimal_epsilon, richardson_reliable, solve_ee, solve_ee_elastic, EEOptions, EEVariant};
use crate::error::{Error, Result};
use crate::fem::{EnergyBreakdown, LinearSolverKind, QuadratureMode};
use crate::grid::build_grid;
use crate::phasefield::{auto_epsilon_list, epsilon_sweep, optimal_epsilon_pf, PFParams, PhaseField, SweepRecord};

/// Limit potentials of one problem under the selected reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub reference: Reference,
    /// Elastic potential (strain energy minus load work).
    pub elastic: f64,
    /// Griffith fracture energy `Gc·2a`.
    pub inelastic: f64,
    pub total: f64,
}

impl Limits {
    pub fn new(energies: &ReferenceEnergies, reference: Reference) -> Self {
        let elastic = match reference {
            Reference::Domain => energies.pi_elastic_domain,
            Reference::ClosedForm => energies.pi_elastic_exact,
        };
        Limits {
            reference,
            elastic,
            inelastic: energies.e_fracture_exact,
            total: elastic + energies.e_fracture_exact,
        }
    }

    pub fn for_problem(problem: &ProblemParams, reference: Reference) -> Self {
        Limits::new(&reference_energies(problem), reference)
    }
}

/// One (method, mesh) result of the study.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRecord {
    pub method: Method,
    pub h: f64,
    pub h_over_2a: f64,
    pub epsilon: f64,
    pub energy: EnergyBreakdown,
    /// `potential − Π0`.
    pub error: f64,
    /// `error / |Π0|`.
    pub normalized_error: f64,
    pub elastic_error: f64,
    pub inelastic_error: f64,
    /// Alternating iterations (PF only).
    pub iterations: usize,
    /// Minimum of `v` on the crack line (PF only).
    pub crack_retention: Option<f64>,
    pub wall_time_s: f64,
    pub quadrature: QuadratureMode,
    pub converged: bool,
    /// Whether the coarse level of the extrapolation resolves the crack (EE+RE only).
    pub richardson_reliable: Option<bool>,
    pub failure: Option<String>,
}

impl StudyRecord {
    #[allow(clippy::too_many_arguments)]
    fn new(
        method: Method,
        h: f64,
        problem: &ProblemParams,
        limits: &Limits,
        epsilon: f64,
        energy: EnergyBreakdown,
        wall_time_s: f64,
        quadrature: QuadratureMode,
    ) -> Self {
        let error = energy.potential - limits.total;
        StudyRecord {
            method,
            h,
            h_over_2a: if problem.a > 0.0 { h / (2.0 * problem.a) } else { f64::NAN },
            epsilon,
            energy,
            error,
            normalized_error: error / limits.total.abs(),
            elastic_error: energy.elastic - energy.load_work - limits.elastic,
            inelastic_error: energy.inelastic - limits.inelastic,
            iterations: 0,
            crack_retention: None,
            wall_time_s,
            quadrature,
            converged: true,
            richardson_reliable: None,
            failure: None,
        }
    }

    fn failed(method: Method, h: f64, problem: &ProblemParams, quadrature: QuadratureMode, message: String) -> Self {
        let nan = EnergyBreakdown::new(f64::NAN, f64::NAN, f64::NAN);
        let limits = Limits {
            reference: Reference::Domain,
            elastic: f64::NAN,
            inelastic: f64::NAN,
            total: f64::NAN,
        };
        StudyRecord {
            converged: false,
            failure: Some(message),
            ..StudyRecord::new(method, h, problem, &limits, f64::NAN, nan, 0.0, quadrature)
        }
    }
}

/// The ε sweep of one mesh.
#[derive(Debug, Clone)]
pub struct PfSweep {
    pub h: f64,
    pub records: Vec<SweepRecord>,
    /// Interpolated `(ε_h, Π(ε_h))`, or why it is unavailable.
    pub optimum: std::result::Result<(f64, f64), String>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone)]
pub struct StudyRun {
    pub limits: Limits,
    /// Ordered by method, then by decreasing `h`.
    pub records: Vec<StudyRecord>,
    pub sweeps: Vec<PfSweep>,
}

impl StudyRun {
    pub fn method(&self, method: Method) -> impl Iterator<Item = &StudyRecord> {
        self.records.iter().filter(move |r| r.method == method)
    }

    pub fn any_failed(&self) -> bool {
        self.records.iter().any(|r| r.failure.is_some() || !r.converged)
    }
}

fn sorted_meshes(cfg: &StudyConfig) -> Vec<f64> {
    let mut meshes = cfg.h_over_d.clone();
    meshes.sort_by(|a, b| b.total_cmp(a));
    meshes.dedup();
    meshes
}

/// Runs every configured method on every mesh. Failures of single runs are
/// recorded and the study continues.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyRun> {
    let problem = cfg.problem;
    let limits = Limits::for_problem(&problem, cfg.reference);
    let meshes = sorted_meshes(cfg);
    let mut ee = Vec::new();
    let mut ee_re = Vec::new();
    let mut pf = Vec::new();
    let mut sweeps = Vec::new();
    for &ratio in &meshes {
        let grid = build_grid(problem.d, ratio)?;
        let h = grid.h;
        if cfg.runs(Method::Ee) || cfg.runs(Method::EeRe) {
            let (a, b) = run_ee_pair(cfg, &limits, &grid);
            if cfg.runs(Method::Ee) {
                ee.push(a);
            }
            if cfg.runs(Method::EeRe) {
                ee_re.push(b);
            }
        }
        if cfg.runs(Method::Pf) {
            match run_pf_mesh(cfg, &limits, &grid) {
                Ok((record, sweep)) => {
                    pf.push(record);
                    sweeps.push(sweep);
                }
                Err(e) => {
                    warn!("pf at h = {h}: {e}");
                    pf.push(StudyRecord::failed(Method::Pf, h, &problem, cfg.quadrature, e.to_string()));
                }
            }
        }
    }
    let mut records = ee;
    records.extend(ee_re);
    records.extend(pf);
    Ok(StudyRun {
        limits,
        records,
        sweeps,
    })
}

fn run_ee_pair(cfg: &StudyConfig, limits: &Limits, grid: &crate::grid::Grid) -> (StudyRecord, StudyRecord) {
    let problem = &cfg.problem;
    let h = grid.h;
    let options = EEOptions {
        quadrature: cfg.quadrature,
        residual: cfg.ee.residual,
        solver: LinearSolverKind::Direct,
    };
    let start = Instant::now();
    let elastic = match solve_ee_elastic(grid, problem, &options) {
        Ok(e) => e,
        Err(e) => {
            warn!("ee at h = {h}: {e}");
            let fail = |m| StudyRecord::failed(m, h, problem, cfg.quadrature, e.to_string());
            return (fail(Method::Ee), fail(Method::EeRe));
        }
    };
    let time = start.elapsed().as_secs_f64();
    let record = |variant, method| match elastic.with_fracture(problem, cfg.ee.epsilon, variant) {
        Ok(r) => StudyRecord::new(method, h, problem, limits, r.epsilon, r.energy, time, cfg.quadrature),
        Err(e) => StudyRecord::failed(method, h, problem, cfg.quadrature, e.to_string()),
    };
    let plain = record(EEVariant::Plain, Method::Ee);
    let mut extrapolated = record(EEVariant::Richardson, Method::EeRe);
    if problem.a > 0.0 {
        let reliable = richardson_reliable(problem.a, h);
        if !reliable {
            warn!("ee-re at h = {h}: the 2h level resolves the crack with fewer than 3 elements");
        }
        extrapolated.richardson_reliable = Some(reliable);
    }
    info!("ee at h = {h}: Π = {:.9e} in {time:.3} s", plain.energy.potential);
    (plain, extrapolated)
}

/// The ε values swept on a mesh of size `h`.
pub fn sweep_epsilons(cfg: &StudyConfig, h: f64) -> Result<Vec<f64>> {
    match &cfg.pf.epsilon_list {
        Some(list) => Ok(list.clone()),
        None if cfg.problem.a > 0.0 => Ok(auto_epsilon_list(cfg.problem.a, h, cfg.pf.sweep_points)),
        None => Err(Error::InvalidInput(
            "the automatic ε bracket needs a crack; give pf.epsilon_list".into(),
        )),
    }
}

fn run_pf_mesh(cfg: &StudyConfig, limits: &Limits, grid: &crate::grid::Grid) -> Result<(StudyRecord, PfSweep)> {
    let problem = &cfg.problem;
    let h = grid.h;
    let epsilons = sweep_epsilons(cfg, h)?;
    let mut pf = PhaseField::new(grid, problem, cfg.quadrature, LinearSolverKind::Direct)?;
    let start = Instant::now();
    let records = epsilon_sweep(&mut pf, &cfg.pf, &epsilons);
    let sweep_time = start.elapsed().as_secs_f64();
    let optimum = if records.len() == 1 {
        let r = &records[0];
        if r.converged {
            Ok((r.epsilon, r.energy.potential))
        } else {
            Err(r.failure.clone().unwrap_or_else(|| "single run did not converge".into()))
        }
    } else {
        optimal_epsilon_pf(&records).map_err(|e| e.to_string())
    };
    let sweep = PfSweep {
        h,
        records,
        optimum: optimum.clone(),
        wall_time_s: sweep_time,
    };
    let record = match optimum {
        Ok((eps, interpolated)) => {
            let params = PFParams::new(eps, problem.d, &cfg.pf)?;
            let start = Instant::now();
            let state = pf.alternate_minimize(&params, None)?;
            let time = start.elapsed().as_secs_f64();
            let mut r = StudyRecord::new(Method::Pf, h, problem, limits, eps, state.energy(), time, cfg.quadrature);
            r.iterations = state.iterations;
            r.crack_retention = Some(state.crack_retention());
            r.converged = state.converged;
            info!(
                "pf at h = {h}: ε_h = {eps:.5e}, Π(ε_h) = {:.9e} (interpolated {interpolated:.9e})",
                r.energy.potential
            );
            r
        }
        Err(message) => {
            // Keep the best sampled point so the record still carries data.
            let best = sweep
                .records
                .iter()
                .filter(|r| r.energy.potential.is_finite())
                .min_by(|a, b| a.energy.potential.total_cmp(&b.energy.potential));
            match best {
                Some(b) => {
                    let mut r =
                        StudyRecord::new(Method::Pf, h, problem, limits, b.epsilon, b.energy, b.wall_time_s, cfg.quadrature);
                    r.iterations = b.iterations;
                    r.crack_retention = Some(b.crack_retention);
                    r.converged = false;
                    r.failure = Some(message);
                    r
                }
                None => StudyRecord::failed(Method::Pf, h, problem, cfg.quadrature, message),
            }
        }
    };
    if let Some(f) = &record.failure {
        warn!("pf at h = {h}: {f}");
    }
    Ok((record, sweep))
}

/// `|error| = C·h^α` fitted by least squares in log–log coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub c: f64,
    pub alpha: f64,
    /// Root-mean-square residual of the log–log regression.
    pub residual: f64,
    pub points: usize,
}

/// Fits `|potential − Π0| = C·h^α` to `(h, potential)` samples, skipping
/// samples whose error is below `1e-14·|Π0|`.
pub fn fit_power_law(samples: &[(f64, f64)], pi0: f64) -> Result<PowerLawFit> {
    let floor = 1e-14 * pi0.abs();
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(h, p)| *h > 0.0 && p.is_finite() && (p - pi0).abs() > floor)
        .map(|&(h, p)| (h, (p - pi0).abs()))
        .collect();
    fit_log_log(&pts)
}

/// Fits `y = C·x^α` to positive `(x, y)` points by least squares in log-log space.
pub fn fit_log_log(pts: &[(f64, f64)]) -> Result<PowerLawFit> {
    let pts: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 usable points for a power-law fit, have {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InsufficientData("power-law fit needs distinct h values".into()));
    }
    let alpha = sxy / sxx;
    let intercept = my - alpha * mx;
    let residual = (pts.iter().map(|p| (p.1 - intercept - alpha * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Ok(PowerLawFit {
        c: intercept.exp(),
        alpha,
        residual,
        points: pts.len(),
    })
}

/// Fit of one method's total-potential error across the study meshes.
pub fn fit_method(run: &StudyRun, method: Method) -> Result<PowerLawFit> {
    let samples: Vec<(f64, f64)> = run
        .method(method)
        .filter(|r| r.failure.is_none())
        .map(|r| (r.h, r.energy.potential))
        .collect();
    fit_power_law(&samples, run.limits.total)
}

/// Wall times of one mesh in `fast` mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingRow {
    pub h: f64,
    pub epsilon: f64,
    pub ee_time: f64,
    pub pf_time: f64,
    pub pf_iterations: usize,
    /// `pf_time / ee_time`.
    pub ratio: f64,
}

/// Median wall time of `reps` runs after one discarded warm-up.
fn median_time<T>(reps: usize, mut run: impl FnMut() -> Result<T>) -> Result<(f64, T)> {
    run()?;
    let mut times = Vec::with_capacity(reps);
    let mut last = None;
    for _ in 0..reps.max(1) {
        let start = Instant::now();
        let out = run()?;
        times.push(start.elapsed().as_secs_f64());
        last = Some(out);
    }
    times.sort_by(f64::total_cmp);
    Ok((times[times.len() / 2], last.expect("at least one repetition")))
}

/// The ε of the single timed PF run: the configured value when exactly one
/// is given, otherwise the eigenerosion optimum of the mesh.
pub fn timing_epsilon(cfg: &StudyConfig, h: f64) -> f64 {
    match cfg.pf.epsilon_list.as_deref() {
        Some([eps]) => *eps,
        _ => optimal_epsilon(cfg.problem.a, h).0,
    }
}

/// EE solve against one PF alternating minimization per mesh, both with
/// `fast` quadrature and the direct solver, timed as median of `reps`.
pub fn timing_comparison(cfg: &StudyConfig, reps: usize, pf_epsilon: impl Fn(f64) -> f64) -> Result<Vec<TimingRow>> {
    let problem = cfg.problem;
    let mode = QuadratureMode::Fast;
    let options = EEOptions {
        quadrature: mode,
        residual: cfg.ee.residual,
        solver: LinearSolverKind::Direct,
    };
    let mut rows = Vec::new();
    for ratio in sorted_meshes(cfg) {
        let grid = build_grid(problem.d, ratio)?;
        let h = grid.h;
        let eps = pf_epsilon(h);
        let params = PFParams::new(eps, problem.d, &cfg.pf)?;
        let (ee_time, _) = median_time(reps, || {
            solve_ee(&grid, &problem, cfg.ee.epsilon, EEVariant::Plain, &options)
        })?;
        let (pf_time, iterations) = median_time(reps, || {
            let mut pf = PhaseField::new(&grid, &problem, mode, LinearSolverKind::Direct)?;
            Ok(pf.alternate_minimize(&params, None)?.iterations)
        })?;
        info!("timing h = {h}: ee {ee_time:.3} s, pf {pf_time:.3} s ({iterations} iterations)");
        rows.push(TimingRow {
            h,
            epsilon: eps,
            ee_time,
            pf_time,
            pf_iterations: iterations,
            ratio: pf_time / ee_time,
        });
    }
    Ok(rows)
}

pub const RECORD_COLUMNS: [&str; 17] = [
    "method",
    "h",
    "h_over_2a",
    "epsilon",
    "elastic",
    "inelastic",
    "load_work",
    "potential",
    "error",
    "normalized_error",
    "elastic_error",
    "inelastic_error",
    "iterations",
    "crack_retention",
    "wall_time_s",
    "quadrature",
    "converged",
];

fn num(x: f64) -> String {
    format!("{x:e}")
}

/// Writes study records as CSV with [`RECORD_COLUMNS`].
pub fn write_records<W: Write>(records: &[StudyRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORD_COLUMNS)?;
    for r in records {
        w.write_record([
            r.method.as_str().to_string(),
            num(r.h),
            num(r.h_over_2a),
            num(r.epsilon),
            num(r.energy.elastic),
            num(r.energy.inelastic),
            num(r.energy.load_work),
            num(r.energy.potential),
            num(r.error),
            num(r.normalized_error),
            num(r.elastic_error),
            num(r.inelastic_error),
            r.iterations.to_string(),
            r.crack_retention.map(num).unwrap_or_default(),
            num(r.wall_time_s),
            r.quadrature.as_str().to_string(),
            r.converged.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[StudyRecord], path: impl AsRef<Path>) -> Result<()> {
    write_records(records, File::create(path)?)
}

/// Writes one row per sweep point: `h,epsilon,elastic,inelastic,load_work,
/// potential,iterations,converged,crack_retention,max_trace_increase,v_min,v_max,wall_time_s,failure`.
pub fn write_sweeps<W: Write>(sweeps: &[PfSweep], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "h",
        "epsilon",
        "elastic",
        "inelastic",
        "load_work",
        "potential",
        "iterations",
        "converged",
        "crack_retention",
        "max_trace_increase",
        "v_min",
        "v_max",
        "wall_time_s",
        "failure",
    ])?;
    for s in sweeps {
        for r in &s.records {
            w.write_record([
                num(s.h),
                num(r.epsilon),
                num(r.energy.elastic),
                num(r.energy.inelastic),
                num(r.energy.load_work),
                num(r.energy.potential),
                r.iterations.to_string(),
                r.converged.to_string(),
                num(r.crack_retention),
                num(r.max_trace_increase),
                num(r.v_bounds.0),
                num(r.v_bounds.1),
                num(r.wall_time_s),
                r.failure.clone().unwrap_or_default(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes fits as `method,reference,c,alpha,residual,points`.
pub fn write_fits<W: Write>(fits: &[(Method, Reference, PowerLawFit)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", "reference", "c", "alpha", "residual", "points"])?;
    for (m, reference, f) in fits {
        w.write_record([
            m.as_str().to_string(),
            reference.as_str().to_string(),
            num(f.c),
            num(f.alpha),
            num(f.residual),
            f.points.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes timing rows as `h,epsilon,ee_time_s,pf_time_s,pf_iterations,ratio`.
pub fn write_timings<W: Write>(rows: &[TimingRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["h", "epsilon", "ee_time_s", "pf_time_s", "pf_iterations", "ratio"])?;
    for r in rows {
        w.write_record([
            num(r.h),
            num(r.epsilon),
            num(r.ee_time),
            num(r.pf_time),
            r.pf_iterations.to_string(),
            num(r.ratio),
        ])?;
    }
    w.flush()?;
    Ok(())
}
