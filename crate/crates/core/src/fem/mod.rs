//! Bilinear plane-strain finite elements on the structured grid.

pub mod assembly;
pub mod cholesky;
pub mod element;
pub mod energy;
pub mod loads;
pub mod pcg;
pub mod quadrature;
pub mod solve;
pub mod sparse;

pub use assembly::{assemble, assemble_into, StiffnessMultiplierField};
pub use element::{element_stiffness, ElasticKernel, ElementMatrix, QuadKernel};
pub use energy::{energies, quadrature_strains, EnergyBreakdown};
pub use loads::traction_loads;
pub use quadrature::{GaussRule, QuadratureMode};
pub use solve::{EquilibriumSolution, EquilibriumSolver, LinearSolverKind, SolverStats, SpdSolver, VectorField};
pub use sparse::CsrMatrix;

use crate::config::MaterialParams;
use crate::error::Result;

/// Convenience one-shot equilibrium solve with a direct factorization.
pub fn solve_equilibrium(grid: &crate::grid::Grid, k: &CsrMatrix, loads: &[f64]) -> Result<VectorField> {
    let mut solver = EquilibriumSolver::new(grid, LinearSolverKind::Direct)?;
    Ok(solver.solve(k, loads)?.u)
}

/// Element kernel for a quadrature mode.
pub fn kernel_for(mode: QuadratureMode, material: MaterialParams) -> ElasticKernel {
    ElasticKernel::new(mode.element_order(), material)
}
