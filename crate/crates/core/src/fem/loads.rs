use crate::analytic::{stress_at, StressState};
use crate::config::ProblemParams;
use crate::error::{Error, Result};
use crate::fem::quadrature::{GaussRule, QuadratureMode};
use crate::grid::{CrackRegistration, Grid};

/// Consistent nodal forces `∫ N_i σ·n ds` over the domain boundary, with the
/// stress evaluated in grid coordinates and `order` Gauss points per edge.
pub fn traction_loads<F>(grid: &Grid, stress: F, order: usize) -> Result<Vec<f64>>
where
    F: Fn([f64; 2]) -> Result<StressState>,
{
    if order < 2 {
        return Err(Error::InvalidInput(format!("edge quadrature order {order} < 2")));
    }
    let rule = GaussRule::new(order);
    let mut f = vec![0.0; 2 * grid.node_count()];
    for edge in grid.boundary_edges() {
        let [n0, n1] = edge.nodes;
        let (p0, p1) = (grid.node_coords(n0), grid.node_coords(n1));
        let half = 0.5 * grid.h;
        for (&s, &w) in rule.points.iter().zip(&rule.weights) {
            let x = [
                0.5 * (1.0 - s) * p0[0] + 0.5 * (1.0 + s) * p1[0],
                0.5 * (1.0 - s) * p0[1] + 0.5 * (1.0 + s) * p1[1],
            ];
            let t = stress(x)?.traction(edge.normal);
            let (w0, w1) = (0.5 * (1.0 - s) * w * half, 0.5 * (1.0 + s) * w * half);
            f[2 * n0] += w0 * t[0];
            f[2 * n0 + 1] += w0 * t[1];
            f[2 * n1] += w1 * t[0];
            f[2 * n1 + 1] += w1 * t[1];
        }
    }
    Ok(f)
}

/// Tractions of the exact crack field, with the crack placed as registered.
pub fn crack_loads(
    grid: &Grid,
    problem: &ProblemParams,
    crack: &CrackRegistration,
    mode: QuadratureMode,
) -> Result<Vec<f64>> {
    traction_loads(
        grid,
        |x| stress_at(crack.to_crack_frame(x), problem.a, problem.sigma0),
        mode.edge_order(),
    )
}

/// Net force and moment about the origin of a nodal load vector.
pub fn resultants(grid: &Grid, f: &[f64]) -> ([f64; 2], f64) {
    let mut force = [0.0; 2];
    let mut moment = 0.0;
    for n in 0..grid.node_count() {
        let x = grid.node_coords(n);
        let (fx, fy) = (f[2 * n], f[2 * n + 1]);
        force[0] += fx;
        force[1] += fy;
        moment += x[0] * fy - x[1] * fx;
    }
    (force, moment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;

    #[test]
    fn uniform_tension_resultants() {
        let g = build_grid(2.0, 0.125).unwrap();
        let sigma0 = 3.0;
        let f = traction_loads(&g, |_| Ok(StressState { s11: sigma0, s22: sigma0, s12: 0.0 }), 2).unwrap();
        let right: f64 = (0..=g.ny).map(|j| f[2 * g.node_id(g.nx, j)]).sum();
        let top: f64 = (0..=g.nx).map(|i| f[2 * g.node_id(i, g.ny) + 1]).sum();
        assert!((right - sigma0 * 2.0).abs() < 1e-12);
        assert!((top - sigma0 * 2.0).abs() < 1e-12);
        let (force, moment) = resultants(&g, &f);
        assert!(force[0].abs() < 1e-13 && force[1].abs() < 1e-13 && moment.abs() < 1e-13);
    }

    #[test]
    fn rejects_low_order() {
        let g = build_grid(1.0, 0.5).unwrap();
        assert!(traction_loads(&g, |_| Ok(StressState::default()), 1).is_err());
    }
}
