//! Eigenerosion: the crack is a row of elements with zero stiffness and the
//! fracture energy is `Gc/(2ε)` times the area of the ε-neighborhood of the
//! eroded set.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use crate::config::{EpsilonSetting, ProblemParams};
use crate::error::{Error, Result};
use crate::fem::{
    assemble, energies, kernel_for, loads::crack_loads, EnergyBreakdown, EquilibriumSolver, LinearSolverKind,
    QuadratureMode, StiffnessMultiplierField, VectorField,
};
use crate::grid::{eroded_count, register_crack_ee, CrackRegistration, Grid};

/// Richardson weight that cancels the `√h` term of the inelastic energy.
pub const RICHARDSON_LAMBDA: f64 = SQRT_2 / (SQRT_2 - 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EEParams {
    pub epsilon: EpsilonSetting,
    pub a: f64,
    pub h: f64,
    pub gc: f64,
    /// Eroded element count `⌈2a/h⌉`.
    pub n: usize,
    /// `(N − 2a/h)/2`, in `[0, 1)`.
    pub delta: f64,
}

impl EEParams {
    pub fn new(a: f64, h: f64, gc: f64, epsilon: EpsilonSetting) -> Result<Self> {
        if !(a > 0.0) || !(h > 0.0) || !(gc > 0.0) {
            return Err(Error::InvalidInput(format!(
                "eigenerosion needs a, h, Gc > 0 (a = {a}, h = {h}, Gc = {gc})"
            )));
        }
        if let EpsilonSetting::Value(e) = epsilon {
            if !(e > 0.0) {
                return Err(Error::InvalidInput(format!("epsilon must be positive, got {e}")));
            }
        }
        let n = eroded_count(a, h);
        let delta = ((n as f64 - 2.0 * a / h) / 2.0).max(0.0);
        Ok(EEParams {
            epsilon,
            a,
            h,
            gc,
            n,
            delta,
        })
    }

    /// The explicit ε, or the optimal one for `auto`.
    pub fn resolved_epsilon(&self) -> f64 {
        match self.epsilon {
            EpsilonSetting::Value(e) => e,
            EpsilonSetting::Auto => optimal_epsilon(self.a, self.h).0,
        }
    }
}

/// Area of the ε-neighborhood of the `⌈2a/h⌉` eroded elements.
pub fn neighborhood_area(a: f64, h: f64, epsilon: f64) -> f64 {
    let n = eroded_count(a, h) as f64;
    n * h * h + 2.0 * (n + 1.0) * h * epsilon + PI * epsilon * epsilon
}

pub fn inelastic_energy(a: f64, h: f64, epsilon: f64, gc: f64) -> f64 {
    gc / (2.0 * epsilon) * neighborhood_area(a, h, epsilon)
}

/// Minimizing `ε_h = h√(N/π)` and its small-`h` asymptote `√(2ah/π)`.
pub fn optimal_epsilon(a: f64, h: f64) -> (f64, f64) {
    let n = eroded_count(a, h) as f64;
    (h * (n / PI).sqrt(), (2.0 * a * h / PI).sqrt())
}

/// `Gc·h·(1 + N + √(πN))`.
pub fn optimal_inelastic_energy(a: f64, h: f64, gc: f64) -> f64 {
    let n = eroded_count(a, h) as f64;
    gc * h * (1.0 + n + (PI * n).sqrt())
}

/// `λ·E_h + (1 − λ)·E_2h` with the optimal energies at `h` and `2h`.
pub fn richardson_inelastic_energy(a: f64, h: f64, gc: f64) -> f64 {
    RICHARDSON_LAMBDA * optimal_inelastic_energy(a, h, gc)
        + (1.0 - RICHARDSON_LAMBDA) * optimal_inelastic_energy(a, 2.0 * h, gc)
}

/// Whether the coarse level of the extrapolation resolves the crack with at
/// least three elements.
pub fn richardson_reliable(a: f64, h: f64) -> bool {
    eroded_count(a, 2.0 * h) >= 3
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EEVariant {
    Plain,
    Richardson,
}

impl fmt::Display for EEVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EEVariant::Plain => "plain",
            EEVariant::Richardson => "richardson",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EEResult {
    pub energy: EnergyBreakdown,
    pub epsilon: f64,
    pub n: usize,
    pub variant: EEVariant,
    pub relative_residual: f64,
}

/// Solver options shared by the EE runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EEOptions {
    pub quadrature: QuadratureMode,
    /// Multiplier on eroded elements.
    pub residual: f64,
    pub solver: LinearSolverKind,
}

impl Default for EEOptions {
    fn default() -> Self {
        EEOptions {
            quadrature: QuadratureMode::Reference,
            residual: 0.0,
            solver: LinearSolverKind::Direct,
        }
    }
}

/// Elastic part of an EE solve, shared by both variants and every ε.
#[derive(Debug, Clone)]
pub struct EEElastic {
    pub h: f64,
    pub crack: CrackRegistration,
    pub energy: EnergyBreakdown,
    pub u: VectorField,
    pub relative_residual: f64,
}

impl EEElastic {
    /// Adds the fracture energy of the given variant and ε.
    pub fn with_fracture(&self, problem: &ProblemParams, epsilon: EpsilonSetting, variant: EEVariant) -> Result<EEResult> {
        let gc = problem.material.gc;
        let h = self.h;
        if problem.a == 0.0 {
            return Ok(EEResult {
                energy: self.energy,
                epsilon: 0.0,
                n: 0,
                variant,
                relative_residual: self.relative_residual,
            });
        }
        let params = EEParams::new(problem.a, h, gc, epsilon)?;
        let eps = params.resolved_epsilon();
        let inelastic = match variant {
            EEVariant::Plain => inelastic_energy(problem.a, h, eps, gc),
            EEVariant::Richardson => {
                // The extrapolation acts on the optimal energies, so ε only
                // enters through the plain variant.
                richardson_inelastic_energy(problem.a, h, gc)
            }
        };
        Ok(EEResult {
            energy: self.energy.with_inelastic(inelastic),
            epsilon: eps,
            n: params.n,
            variant,
            relative_residual: self.relative_residual,
        })
    }
}

/// Elastic equilibrium with the crack row eroded.
pub fn solve_ee_elastic(grid: &Grid, problem: &ProblemParams, options: &EEOptions) -> Result<EEElastic> {
    let crack = register_crack_ee(grid, problem.a)?;
    if problem.a > 0.0 && crack.eroded.is_empty() {
        return Err(Error::Registration(format!(
            "no elements eroded for a crack of half-length {}",
            problem.a
        )));
    }
    if !(options.residual >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "eroded-element residual stiffness must be ≥ 0, got {}",
            options.residual
        )));
    }
    let mut mult = vec![1.0; grid.element_count()];
    for &e in &crack.eroded {
        mult[e] = options.residual;
    }
    let multipliers = StiffnessMultiplierField::PerElement(mult);
    let kernel = kernel_for(options.quadrature, problem.material);
    let k = assemble(grid, &kernel, &multipliers)?;
    let f = crack_loads(grid, problem, &crack, options.quadrature)?;
    let mut solver = EquilibriumSolver::new(grid, options.solver)?;
    let sol = solver.solve(&k, &f)?;
    let energy = energies(grid, &kernel, &sol.u, &multipliers, &f)?;
    Ok(EEElastic {
        h: grid.h,
        crack,
        energy,
        u: sol.u,
        relative_residual: sol.relative_residual,
    })
}

/// Full EE benchmark solve.
pub fn solve_ee(
    grid: &Grid,
    problem: &ProblemParams,
    epsilon: EpsilonSetting,
    variant: EEVariant,
    options: &EEOptions,
) -> Result<EEResult> {
    solve_ee_elastic(grid, problem, options)?.with_fracture(problem, epsilon, variant)
}
