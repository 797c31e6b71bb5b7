//! Ambrosio–Tortorelli phase field, minimized by alternating directions.
//!
//! `Π(u, v) = ∫ (v² + η) W(ε(u)) + Gc ∫ ((1 − v)²/(4ε) + ε|∇v|²) − ∫∂Ω σn·u`.
//! Each half-step minimizes a convex quadratic exactly, so the potential is
//! non-increasing along the iteration.

use std::cell::Cell;
use std::io::Write;

use log::{debug, info};

use crate::analytic::strain_energy_density;
use crate::config::{PfSettings, ProblemParams};
use crate::error::{Error, Result};
use crate::fem::assembly::{assemble_scalar_into, scalar_load};
use crate::fem::loads::crack_loads;
use crate::fem::{
    assemble_into, kernel_for, CsrMatrix, ElasticKernel, EnergyBreakdown, EquilibriumSolver, LinearSolverKind,
    QuadratureMode, SpdSolver, StiffnessMultiplierField, VectorField,
};
use crate::grid::{register_crack_pf, CrackRegistration, Grid};

/// Relative residual of the phase-field linear solve.
const V_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PFParams {
    pub epsilon: f64,
    pub eta: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub pin_crack_nodes: bool,
}

impl PFParams {
    /// Parameters for one ε; `eta` defaults to `(ε/D)²`.
    pub fn new(epsilon: f64, d: f64, settings: &PfSettings) -> Result<Self> {
        let params = PFParams {
            epsilon,
            eta: settings.eta.unwrap_or((epsilon / d).powi(2)),
            tol: settings.tol,
            max_iters: settings.max_iters,
            pin_crack_nodes: settings.pin_crack_nodes,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidInput(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(0.0..1.0).contains(&self.eta) {
            return Err(Error::InvalidInput(format!("eta must lie in [0, 1), got {}", self.eta)));
        }
        if !(self.tol > 0.0) || self.max_iters == 0 {
            return Err(Error::InvalidInput("tol and max_iters must be positive".into()));
        }
        Ok(())
    }
}

/// Outcome of one alternating minimization.
#[derive(Debug, Clone)]
pub struct PFState {
    pub u: VectorField,
    pub v: Vec<f64>,
    /// Energies after every half-step, starting with the first `u` solve.
    pub trace: Vec<EnergyBreakdown>,
    /// Minimum of `v` over the crack nodes after every half-step.
    pub crack_min_v: Vec<f64>,
    /// Smallest and largest nodal `v` over every `v` solve.
    pub v_bounds: (f64, f64),
    /// Full iterations performed.
    pub iterations: usize,
    pub converged: bool,
}

impl PFState {
    pub fn energy(&self) -> EnergyBreakdown {
        *self.trace.last().expect("trace is never empty")
    }

    /// Minimum of `v` along the crack line at the end of the run.
    pub fn crack_retention(&self) -> f64 {
        *self.crack_min_v.last().expect("trace is never empty")
    }

    /// Largest increase of the potential between successive half-steps,
    /// relative to `|Π|`.
    pub fn max_trace_increase(&self) -> f64 {
        self.trace
            .windows(2)
            .map(|w| (w[1].potential - w[0].potential) / w[0].potential.abs())
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

thread_local! {
    static RUNS: Cell<usize> = const { Cell::new(0) };
}

/// Alternating minimizations started on the calling thread so far.
pub fn runs_on_this_thread() -> usize {
    RUNS.with(Cell::get)
}

/// Grid-bound phase-field machinery. Solvers, patterns and loads are reused
/// across `ε` values and iterations.
pub struct PhaseField<'g> {
    pub grid: &'g Grid,
    pub problem: ProblemParams,
    pub crack: CrackRegistration,
    pub kernel: ElasticKernel,
    pub loads: Vec<f64>,
    u_solver: EquilibriumSolver,
    v_solver: SpdSolver,
    k: CsrMatrix,
    a_v: CsrMatrix,
    ones_load: Vec<f64>,
}

impl<'g> PhaseField<'g> {
    pub fn new(grid: &'g Grid, problem: &ProblemParams, mode: QuadratureMode, solver: LinearSolverKind) -> Result<Self> {
        let mut crack = register_crack_pf(grid, problem.a)?;
        if problem.a == 0.0 {
            crack.crack_nodes.clear();
        }
        let kernel = kernel_for(mode, problem.material);
        let loads = crack_loads(grid, problem, &crack, mode)?;
        let nq = kernel.quad.len();
        let ones_load = scalar_load(grid, &kernel.quad, &vec![1.0; grid.element_count() * nq]);
        Ok(PhaseField {
            grid,
            problem: *problem,
            crack,
            u_solver: EquilibriumSolver::new(grid, solver)?,
            v_solver: SpdSolver::new(grid, 1, solver)?,
            k: CsrMatrix::grid_pattern(grid, 2),
            a_v: CsrMatrix::grid_pattern(grid, 1),
            kernel,
            loads,
            ones_load,
        })
    }

    /// Initial phase field: 0 on the crack nodes, 1 elsewhere.
    pub fn initial_v(&self) -> Vec<f64> {
        let mut v = vec![1.0; self.grid.node_count()];
        for &n in &self.crack.crack_nodes {
            v[n] = 0.0;
        }
        v
    }

    fn check_sizes(&self, u: &VectorField, v: &[f64]) -> Result<()> {
        let nodes = self.grid.node_count();
        if v.len() != nodes {
            return Err(Error::Dimension {
                expected: nodes,
                actual: v.len(),
            });
        }
        if u.values.len() != 2 * nodes {
            return Err(Error::Dimension {
                expected: 2 * nodes,
                actual: u.values.len(),
            });
        }
        Ok(())
    }

    /// Energies of `(u, v)` with the kernel's element quadrature.
    pub fn energy(&self, u: &VectorField, v: &[f64], params: &PFParams) -> Result<EnergyBreakdown> {
        self.check_sizes(u, v)?;
        let grid = self.grid;
        let quad = &self.kernel.quad;
        let area = 0.25 * grid.h * grid.h;
        let gc = self.problem.material.gc;
        let eps = params.epsilon;
        let (mut elastic, mut inelastic) = (0.0, 0.0);
        for e in 0..grid.element_count() {
            let nodes = grid.element_nodes(e);
            let ue = u.element(nodes);
            let ve = nodes.map(|n| v[n]);
            for (q, p) in quad.points.iter().enumerate() {
                let vq = p.n[0] * ve[0] + p.n[1] * ve[1] + p.n[2] * ve[2] + p.n[3] * ve[3];
                let g = quad.gradient(q, grid.h, ve);
                let w = strain_energy_density(quad.strain(q, grid.h, &ue), &self.kernel.material);
                let dx = p.weight * area;
                elastic += dx * (vq * vq + params.eta) * w;
                inelastic += dx * gc * ((1.0 - vq) * (1.0 - vq) / (4.0 * eps) + eps * (g[0] * g[0] + g[1] * g[1]));
            }
        }
        let load_work = self.loads.iter().zip(&u.values).map(|(f, x)| f * x).sum();
        Ok(EnergyBreakdown::new(elastic, inelastic, load_work))
    }

    /// Minimizer in `u` at fixed `v`.
    pub fn solve_u(&mut self, v: &[f64], params: &PFParams) -> Result<VectorField> {
        let multipliers = StiffnessMultiplierField::from_nodal(self.grid, &self.kernel.quad, v, params.eta)?;
        assemble_into(&mut self.k, self.grid, &self.kernel, &multipliers)?;
        Ok(self.u_solver.solve(&self.k, &self.loads)?.u)
    }

    /// Minimizer in `v` at fixed `u`, with crack nodes held at 0 when pinned.
    pub fn solve_v(&mut self, u: &VectorField, v_guess: &[f64], params: &PFParams) -> Result<Vec<f64>> {
        self.check_sizes(u, v_guess)?;
        let grid = self.grid;
        let quad = &self.kernel.quad;
        let gc = self.problem.material.gc;
        let eps = params.epsilon;
        let nq = quad.len();
        let mut weights = vec![0.0; grid.element_count() * nq];
        for e in 0..grid.element_count() {
            let ue = u.element(grid.element_nodes(e));
            for q in 0..nq {
                let w = strain_energy_density(quad.strain(q, grid.h, &ue), &self.kernel.material);
                weights[e * nq + q] = 2.0 * w + gc / (2.0 * eps);
            }
        }
        assemble_scalar_into(&mut self.a_v, grid, quad, &weights, 2.0 * gc * eps)?;
        let mut rhs: Vec<f64> = self.ones_load.iter().map(|l| gc / (2.0 * eps) * l).collect();
        let mut v = v_guess.to_vec();
        if params.pin_crack_nodes && !self.crack.crack_nodes.is_empty() {
            let diag = self.a_v.diagonal();
            let scale = diag.iter().sum::<f64>() / diag.len() as f64;
            self.a_v.constrain(&self.crack.crack_nodes, scale);
            for &n in &self.crack.crack_nodes {
                rhs[n] = 0.0;
                v[n] = 0.0;
            }
        }
        self.v_solver.solve(&self.a_v, &rhs, &mut v, V_TOL)?;
        Ok(v)
    }

    fn crack_min(&self, v: &[f64]) -> f64 {
        self.crack
            .crack_nodes
            .iter()
            .map(|&n| v[n])
            .fold(f64::INFINITY, f64::min)
    }

    /// Alternating minimization from the cracked initial state. Hitting the
    /// iteration cap is reported through `converged`, not as an error.
    pub fn alternate_minimize(&mut self, params: &PFParams, mut trace_out: Option<&mut dyn Write>) -> Result<PFState> {
        params.validate()?;
        RUNS.with(|r| r.set(r.get() + 1));
        self.u_solver.invalidate();
        self.v_solver.invalidate();
        let mut v = self.initial_v();
        let mut trace = Vec::new();
        let mut crack_min_v = Vec::new();
        if let Some(out) = trace_out.as_deref_mut() {
            writeln!(out, "iteration,half,elastic,inelastic,potential,min_v_crack")?;
        }
        let mut u = VectorField::zeros(self.grid);
        let mut previous = f64::NAN;
        let mut converged = false;
        let mut iterations = 0;
        let mut v_bounds = (f64::INFINITY, f64::NEG_INFINITY);
        while iterations < params.max_iters {
            iterations += 1;
            u = self.solve_u(&v, params)?;
            let after_u = self.energy(&u, &v, params)?;
            trace.push(after_u);
            crack_min_v.push(self.crack_min(&v));
            v = self.solve_v(&u, &v, params)?;
            for &x in &v {
                v_bounds = (v_bounds.0.min(x), v_bounds.1.max(x));
            }
            let after_v = self.energy(&u, &v, params)?;
            trace.push(after_v);
            crack_min_v.push(self.crack_min(&v));
            if let Some(out) = trace_out.as_deref_mut() {
                let m = crack_min_v.len();
                writeln!(
                    out,
                    "{iterations},u,{:e},{:e},{:e},{:e}",
                    after_u.elastic, after_u.inelastic, after_u.potential, crack_min_v[m - 2]
                )?;
                writeln!(
                    out,
                    "{iterations},v,{:e},{:e},{:e},{:e}",
                    after_v.elastic, after_v.inelastic, after_v.potential, crack_min_v[m - 1]
                )?;
            }
            let change = ((after_v.potential - previous) / after_v.potential).abs();
            debug!(
                "pf ε={:.4e} it {iterations}: Π={:.12e} change {change:.2e}",
                params.epsilon, after_v.potential
            );
            previous = after_v.potential;
            if change < params.tol {
                converged = true;
                break;
            }
        }
        info!(
            "pf ε={:.4e}: {iterations} iterations, converged={converged}, Π={:.9e}",
            params.epsilon, previous
        );
        Ok(PFState {
            u,
            v,
            trace,
            crack_min_v,
            v_bounds,
            iterations,
            converged,
        })
    }

    /// Directional derivative of the potential along `(du, dv)` by central
    /// differences, and the sum of the magnitudes of its three parts.
    pub fn directional_derivative(
        &self,
        u: &VectorField,
        v: &[f64],
        du: &[f64],
        dv: &[f64],
        step: f64,
        params: &PFParams,
    ) -> Result<(f64, f64)> {
        let shifted = |t: f64| -> Result<EnergyBreakdown> {
            let uu = VectorField {
                values: u.values.iter().zip(du).map(|(a, b)| a + t * b).collect(),
            };
            let vv: Vec<f64> = v.iter().zip(dv).map(|(a, b)| a + t * b).collect();
            self.energy(&uu, &vv, params)
        };
        let (p, m) = (shifted(step)?, shifted(-step)?);
        let d = |a: f64, b: f64| (a - b) / (2.0 * step);
        let scale = d(p.elastic, m.elastic).abs() + d(p.inelastic, m.inelastic).abs() + d(p.load_work, m.load_work).abs();
        Ok((d(p.potential, m.potential), scale))
    }

    pub fn u_stats(&self) -> crate::fem::SolverStats {
        self.u_solver.stats()
    }
}

/// Energies of a phase-field state on a fresh context.
pub fn pf_energy(
    grid: &Grid,
    problem: &ProblemParams,
    u: &VectorField,
    v: &[f64],
    params: &PFParams,
    mode: QuadratureMode,
) -> Result<EnergyBreakdown> {
    PhaseField::new(grid, problem, mode, LinearSolverKind::Direct)?.energy(u, v, params)
}

/// Largest ε for which the intact homogeneous state under the far-field
/// load is still a local minimum (`η = 0`): `27·Gc/(1024·W0)`. Above it the
/// alternating iteration degrades the whole panel.
pub fn homogeneous_instability_epsilon(problem: &ProblemParams) -> f64 {
    27.0 * problem.material.gc / (1024.0 * crate::analytic::far_field_energy_density(problem))
}

/// The `auto` sweep: `points` values spaced geometrically over
/// `[max(h/2, 0.2 s), 5 s]` with `s = √(2ah/π)`.
pub fn auto_epsilon_list(a: f64, h: f64, points: usize) -> Vec<f64> {
    let s = (2.0 * a * h / std::f64::consts::PI).sqrt();
    let lo = (0.5 * h).max(0.2 * s);
    let hi = 5.0 * s;
    if points <= 1 {
        return vec![(lo * hi).sqrt()];
    }
    let ratio = (hi / lo).ln() / (points - 1) as f64;
    (0..points).map(|k| lo * (ratio * k as f64).exp()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub epsilon: f64,
    pub energy: EnergyBreakdown,
    pub iterations: usize,
    pub converged: bool,
    pub crack_retention: f64,
    pub max_trace_increase: f64,
    pub v_bounds: (f64, f64),
    pub wall_time_s: f64,
    /// Set when the run failed; the energy is then NaN.
    pub failure: Option<String>,
}

/// One alternating minimization per ε. Failures are recorded, not raised.
pub fn epsilon_sweep(pf: &mut PhaseField, settings: &PfSettings, epsilons: &[f64]) -> Vec<SweepRecord> {
    epsilons
        .iter()
        .map(|&eps| {
            let start = std::time::Instant::now();
            let run = PFParams::new(eps, pf.problem.d, settings).and_then(|p| pf.alternate_minimize(&p, None));
            let wall_time_s = start.elapsed().as_secs_f64();
            match run {
                Ok(state) => SweepRecord {
                    epsilon: eps,
                    energy: state.energy(),
                    iterations: state.iterations,
                    converged: state.converged,
                    crack_retention: state.crack_retention(),
                    max_trace_increase: state.max_trace_increase(),
                    v_bounds: state.v_bounds,
                    wall_time_s,
                    failure: None,
                },
                Err(e) => SweepRecord {
                    epsilon: eps,
                    energy: EnergyBreakdown::new(f64::NAN, f64::NAN, f64::NAN),
                    iterations: 0,
                    converged: false,
                    crack_retention: f64::NAN,
                    max_trace_increase: f64::NAN,
                    v_bounds: (f64::NAN, f64::NAN),
                    wall_time_s,
                    failure: Some(e.to_string()),
                },
            }
        })
        .collect()
}

/// Minimizer of the quadratic in `ln ε` through the discrete minimum of the
/// converged records and its two neighbors: `(ε_h, Π(ε_h))`.
pub fn optimal_epsilon_pf(records: &[SweepRecord]) -> Result<(f64, f64)> {
    let usable: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.converged && r.energy.potential.is_finite())
        .map(|r| (r.epsilon, r.energy.potential))
        .collect();
    optimal_epsilon_from_samples(&usable)
}

/// As [`optimal_epsilon_pf`] on raw `(ε, Π)` samples sorted by ε.
pub fn optimal_epsilon_from_samples(samples: &[(f64, f64)]) -> Result<(f64, f64)> {
    if samples.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 converged sweep points, have {}",
            samples.len()
        )));
    }
    if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::InvalidInput("sweep epsilons must be strictly increasing".into()));
    }
    let k = samples
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, _)| i)
        .expect("non-empty");
    if k == 0 || k == samples.len() - 1 {
        return Err(Error::SweepBracket(format!(
            "discrete minimum at ε = {} is an endpoint of [{}, {}]",
            samples[k].0,
            samples[0].0,
            samples[samples.len() - 1].0
        )));
    }
    let (x0, x1, x2) = (samples[k - 1].0.ln(), samples[k].0.ln(), samples[k + 1].0.ln());
    let (y0, y1, y2) = (samples[k - 1].1, samples[k].1, samples[k + 1].1);
    // Newton divided differences.
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let c = (d12 - d01) / (x2 - x0);
    let b = d01 - c * (x0 + x1);
    if !(c > 0.0) {
        return Ok((samples[k].0, y1));
    }
    let xm = -b / (2.0 * c);
    let ym = y0 + d01 * (xm - x0) + c * (xm - x0) * (xm - x1);
    Ok((xm.exp(), ym))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::StudyConfig;
    use crate::grid::build_grid;

    #[test]
    fn interpolation_recovers_quadratic_minimum() {
        let (xm, ym) = (0.37f64, -2.5);
        let f = |e: f64| 3.0 * (e.ln() - xm.ln()).powi(2) + ym;
        let samples: Vec<(f64, f64)> = [0.1, 0.2, 0.4, 0.8].iter().map(|&e| (e, f(e))).collect();
        let (eps, val) = optimal_epsilon_from_samples(&samples).unwrap();
        assert!((eps - xm).abs() < 1e-12 * xm);
        assert!((val - ym).abs() < 1e-12);
    }

    #[test]
    fn symmetric_samples_give_midpoint() {
        let samples = [(1.0, 2.0), (2.0, 1.0), (4.0, 2.0)];
        let (eps, _) = optimal_epsilon_from_samples(&samples).unwrap();
        assert!((eps - 2.0).abs() < 1e-14);
    }

    #[test]
    fn endpoint_minimum_is_rejected() {
        let samples = [(1.0, 1.0), (2.0, 2.0), (4.0, 3.0)];
        assert!(matches!(optimal_epsilon_from_samples(&samples), Err(Error::SweepBracket(_))));
        assert!(matches!(
            optimal_epsilon_from_samples(&samples[..2]),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn auto_list_bracket() {
        let list = auto_epsilon_list(0.2015625, 0.1, 12);
        assert_eq!(list.len(), 12);
        let s = (2.0 * 0.2015625 * 0.1 / std::f64::consts::PI).sqrt();
        assert!((list[0] - 0.05).abs() < 1e-15);
        assert!((list[11] - 5.0 * s).abs() < 1e-12);
        assert!(list.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn energy_of_trivial_fields() {
        let cfg = StudyConfig::table1();
        let g = build_grid(cfg.problem.d, 0.1).unwrap();
        let pf = PhaseField::new(&g, &cfg.problem, QuadratureMode::Reference, LinearSolverKind::Direct).unwrap();
        let params = PFParams::new(0.1, cfg.problem.d, &cfg.pf).unwrap();
        let u = VectorField::zeros(&g);
        let e = pf.energy(&u, &vec![1.0; g.node_count()], &params).unwrap();
        assert_eq!((e.elastic, e.inelastic, e.load_work), (0.0, 0.0, 0.0));
        let e = pf.energy(&u, &vec![0.0; g.node_count()], &params).unwrap();
        let expect = cfg.problem.material.gc * 25.0 / (4.0 * 0.1);
        assert!((e.inelastic - expect).abs() < 1e-13 * expect);
    }
}
