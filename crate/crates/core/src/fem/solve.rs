//! Equilibrium solves with the rigid-body modes removed.
//!
//! The loads are projected onto the orthogonal complement of the rigid modes,
//! three displacement components are fixed to make the operator definite, and
//! the rigid component of the result is subtracted afterwards. The outcome is
//! the unique minimizer of `½uᵀKu − fᵀu` subject to zero nodal-mean
//! displacement and zero nodal-mean rotation.

use std::sync::Arc;

use log::{debug, warn};

use crate::error::{Error, Result};
use crate::fem::cholesky::{CholeskyFactor, SymbolicCholesky};
use crate::fem::pcg::{iteration_cap, jacobi, pcg};
use crate::fem::sparse::{dot, norm, CsrMatrix};
use crate::grid::Grid;

/// Relative residual required of every equilibrium solve.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Nodal displacement vector, `[u_x, u_y]` per node.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub values: Vec<f64>,
}

impl VectorField {
    pub fn zeros(grid: &Grid) -> Self {
        VectorField {
            values: vec![0.0; 2 * grid.node_count()],
        }
    }

    pub fn node(&self, n: usize) -> [f64; 2] {
        [self.values[2 * n], self.values[2 * n + 1]]
    }

    pub fn element(&self, nodes: [usize; 4]) -> [f64; 8] {
        let mut ue = [0.0; 8];
        for (k, n) in nodes.iter().enumerate() {
            ue[2 * k] = self.values[2 * n];
            ue[2 * k + 1] = self.values[2 * n + 1];
        }
        ue
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearSolverKind {
    /// Sparse Cholesky; later solves are preconditioned by the last factor
    /// and refactor once that stops paying off.
    Direct,
    /// Conjugate gradients with diagonal preconditioning.
    JacobiPcg,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub solves: usize,
    pub factorizations: usize,
    pub pcg_iterations: usize,
}

/// SPD solver bound to one grid pattern.
#[derive(Debug, Clone)]
pub struct SpdSolver {
    kind: LinearSolverKind,
    symbolic: Option<Arc<SymbolicCholesky>>,
    factor: Option<CholeskyFactor>,
    stale: bool,
    /// PCG iterations allowed on a reused factor before refactoring.
    pub reuse_iters: usize,
    pub stats: SolverStats,
}

impl SpdSolver {
    pub fn new(grid: &Grid, dofs_per_node: usize, kind: LinearSolverKind) -> Result<Self> {
        let symbolic = match kind {
            LinearSolverKind::Direct => Some(SymbolicCholesky::for_grid(grid, dofs_per_node)?),
            LinearSolverKind::JacobiPcg => None,
        };
        Ok(SpdSolver {
            kind,
            symbolic,
            factor: None,
            stale: true,
            reuse_iters: 16,
            stats: SolverStats::default(),
        })
    }

    /// Shares the symbolic analysis of another solver on the same pattern.
    pub fn sharing(other: &SpdSolver) -> Self {
        SpdSolver {
            kind: other.kind,
            symbolic: other.symbolic.clone(),
            factor: None,
            stale: true,
            reuse_iters: other.reuse_iters,
            stats: SolverStats::default(),
        }
    }

    pub fn kind(&self) -> LinearSolverKind {
        self.kind
    }

    /// Drops any cached factor so the next solve factorizes afresh.
    pub fn invalidate(&mut self) {
        self.factor = None;
        self.stale = true;
    }

    /// Solves `A x = b` to `‖Ax − b‖ ≤ tol·‖b‖`, starting from `x` when the
    /// method is iterative.
    pub fn solve(&mut self, a: &CsrMatrix, b: &[f64], x: &mut [f64], tol: f64) -> Result<()> {
        self.stats.solves += 1;
        match self.kind {
            LinearSolverKind::JacobiPcg => {
                let out = pcg(a, b, x, jacobi(a), tol, iteration_cap(a.n))?;
                self.stats.pcg_iterations += out.iterations;
                Ok(())
            }
            LinearSolverKind::Direct => {
                if !self.stale {
                    if let Some(factor) = &self.factor {
                        let precond = |r: &[f64], z: &mut [f64]| factor.solve_into(r, z);
                        match pcg(a, b, x, precond, tol, self.reuse_iters) {
                            Ok(out) => {
                                self.stats.pcg_iterations += out.iterations;
                                if out.iterations > self.reuse_iters / 2 {
                                    self.stale = true;
                                }
                                return Ok(());
                            }
                            Err(Error::SolverNonConvergence { .. }) => {
                                debug!("reused factor too far off, refactoring");
                                self.stats.pcg_iterations += self.reuse_iters;
                            }
                            Err(e) => return Err(e),
                        }
                    }
                }
                let symbolic = self.symbolic.as_ref().expect("direct solver has a symbolic analysis");
                let factor = symbolic.factorize(a)?;
                self.stats.factorizations += 1;
                factor.solve_into(b, x);
                let bnorm = norm(b);
                let mut r = vec![0.0; a.n];
                for _ in 0..3 {
                    a.matvec(x, &mut r);
                    for (ri, bi) in r.iter_mut().zip(b) {
                        *ri = bi - *ri;
                    }
                    if norm(&r) <= 0.01 * tol * bnorm {
                        break;
                    }
                    let dx = factor.solve(&r);
                    for (xi, di) in x.iter_mut().zip(&dx) {
                        *xi += di;
                    }
                }
                self.factor = Some(factor);
                self.stale = false;
                Ok(())
            }
        }
    }
}

/// Elastic equilibrium on one grid with rigid modes removed.
#[derive(Debug, Clone)]
pub struct EquilibriumSolver {
    coords: Vec<[f64; 2]>,
    spd: SpdSolver,
    /// Last solution in the pinned gauge, used as a warm start.
    gauge: Option<Vec<f64>>,
}

/// Outcome of one constrained equilibrium solve.
#[derive(Debug, Clone)]
pub struct EquilibriumSolution {
    pub u: VectorField,
    /// `‖Ku − f'‖ / ‖f'‖` with `f'` the rigid-free part of the loads.
    pub relative_residual: f64,
    /// Relative size of the rigid-mode component removed from the loads.
    pub load_imbalance: f64,
}

impl EquilibriumSolver {
    pub fn new(grid: &Grid, kind: LinearSolverKind) -> Result<Self> {
        Ok(EquilibriumSolver {
            coords: (0..grid.node_count()).map(|n| grid.node_coords(n)).collect(),
            spd: SpdSolver::new(grid, 2, kind)?,
            gauge: None,
        })
    }

    pub fn stats(&self) -> SolverStats {
        self.spd.stats
    }

    pub fn invalidate(&mut self) {
        self.spd.invalidate();
        self.gauge = None;
    }

    /// Minimizes `½uᵀKu − fᵀu` over displacements orthogonal to the rigid modes.
    pub fn solve(&mut self, k: &CsrMatrix, f: &[f64]) -> Result<EquilibriumSolution> {
        let n_nodes = self.coords.len();
        if k.n != 2 * n_nodes || f.len() != k.n {
            return Err(Error::Dimension {
                expected: 2 * n_nodes,
                actual: if k.n != 2 * n_nodes { k.n } else { f.len() },
            });
        }
        let diag = k.diagonal();
        let active: Vec<bool> = (0..n_nodes).map(|n| diag[2 * n] > 0.0 || diag[2 * n + 1] > 0.0).collect();
        let active_nodes: Vec<usize> = (0..n_nodes).filter(|&n| active[n]).collect();
        if active_nodes.len() < 2 {
            return Err(Error::InvalidInput("operator has no stiffness".into()));
        }
        let modes = rigid_modes(&self.coords, &active);

        let fnorm = norm(f);
        let mut fp = f.to_vec();
        project_out(&modes, &mut fp);
        let load_imbalance = if fnorm > 0.0 {
            norm(&f.iter().zip(&fp).map(|(a, b)| a - b).collect::<Vec<_>>()) / fnorm
        } else {
            0.0
        };
        if load_imbalance > 1e-8 {
            warn!("loads not self-equilibrated: rigid component {load_imbalance:.3e} of ‖f‖");
        }
        let fpnorm = norm(&fp);
        if fpnorm == 0.0 {
            return Ok(EquilibriumSolution {
                u: VectorField { values: vec![0.0; k.n] },
                relative_residual: 0.0,
                load_imbalance,
            });
        }

        let mut fixed: Vec<usize> = (0..n_nodes)
            .filter(|&n| !active[n])
            .flat_map(|n| [2 * n, 2 * n + 1])
            .collect();
        let orphans = fixed.len() / 2;
        if orphans > 0 {
            debug!("{orphans} nodes without stiffness excluded");
        }
        let (a, b) = (active_nodes[0], *active_nodes.last().unwrap());
        let (pa, pb) = (self.coords[a], self.coords[b]);
        let third = if (pb[0] - pa[0]).abs() >= (pb[1] - pa[1]).abs() {
            2 * b + 1
        } else {
            2 * b
        };
        fixed.extend([2 * a, 2 * a + 1, third]);

        let active_diag: Vec<f64> = diag.iter().copied().filter(|&d| d > 0.0).collect();
        let scale = active_diag.iter().sum::<f64>() / active_diag.len() as f64;
        let mut kc = k.clone();
        kc.constrain(&fixed, scale);
        let mut rhs = fp.clone();
        for &d in &fixed {
            rhs[d] = 0.0;
        }
        let mut x = self.gauge.take().filter(|g| g.len() == k.n).unwrap_or_else(|| vec![0.0; k.n]);
        for &d in &fixed {
            x[d] = 0.0;
        }
        self.spd.solve(&kc, &rhs, &mut x, 0.1 * RESIDUAL_TOL)?;

        // The fixed rows are satisfied only through the balance of all others,
        // so refine against the full residual with its rigid part removed.
        let mut r = vec![0.0; k.n];
        let mut dx = vec![0.0; k.n];
        let mut previous = f64::INFINITY;
        for _ in 0..8 {
            k.matvec(&x, &mut r);
            for (ri, fi) in r.iter_mut().zip(&fp) {
                *ri = fi - *ri;
            }
            let rnorm = norm(&r);
            if rnorm <= 0.01 * RESIDUAL_TOL * fpnorm {
                break;
            }
            // A stale factor that stalls the refinement is replaced.
            if rnorm > 0.5 * previous {
                self.spd.invalidate();
            }
            previous = rnorm;
            project_out(&modes, &mut r);
            for &d in &fixed {
                r[d] = 0.0;
            }
            dx.iter_mut().for_each(|v| *v = 0.0);
            self.spd.solve(&kc, &r, &mut dx, 1e-3)?;
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi += di;
            }
        }
        self.gauge = Some(x.clone());

        project_out(&modes, &mut x);
        for n in (0..n_nodes).filter(|&n| !active[n]) {
            x[2 * n] = 0.0;
            x[2 * n + 1] = 0.0;
        }
        k.matvec(&x, &mut r);
        for (ri, fi) in r.iter_mut().zip(&fp) {
            *ri -= fi;
        }
        let relative_residual = norm(&r) / fpnorm;
        if !(relative_residual <= RESIDUAL_TOL) {
            return Err(Error::SolverNonConvergence {
                iterations: self.spd.stats.pcg_iterations,
                residual: relative_residual,
            });
        }
        Ok(EquilibriumSolution {
            u: VectorField { values: x },
            relative_residual,
            load_imbalance,
        })
    }
}

/// Orthonormal translations and rotation over the active nodes.
pub fn rigid_modes(coords: &[[f64; 2]], active: &[bool]) -> [Vec<f64>; 3] {
    let n = coords.len();
    let count = active.iter().filter(|&&a| a).count() as f64;
    let mut centroid = [0.0; 2];
    for (c, _) in coords.iter().zip(active).filter(|(_, &a)| a) {
        centroid[0] += c[0] / count;
        centroid[1] += c[1] / count;
    }
    let mut modes = [vec![0.0; 2 * n], vec![0.0; 2 * n], vec![0.0; 2 * n]];
    for (i, c) in coords.iter().enumerate() {
        if active[i] {
            modes[0][2 * i] = 1.0;
            modes[1][2 * i + 1] = 1.0;
            modes[2][2 * i] = -(c[1] - centroid[1]);
            modes[2][2 * i + 1] = c[0] - centroid[0];
        }
    }
    // Gram–Schmidt; the centered rotation is already orthogonal up to rounding.
    for k in 0..3 {
        for j in 0..k {
            let (head, tail) = modes.split_at_mut(k);
            let c = dot(&tail[0], &head[j]);
            for (t, h) in tail[0].iter_mut().zip(&head[j]) {
                *t -= c * h;
            }
        }
        let s = norm(&modes[k]);
        modes[k].iter_mut().for_each(|v| *v /= s);
    }
    modes
}

fn project_out(modes: &[Vec<f64>; 3], x: &mut [f64]) {
    for m in modes {
        let c = dot(m, x);
        for (xi, mi) in x.iter_mut().zip(m) {
            *xi -= c * mi;
        }
    }
}
