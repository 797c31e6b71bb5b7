use crate::error::{Error, Result};
use crate::fem::element::{ElasticKernel, QuadKernel};
use crate::fem::sparse::CsrMatrix;
use crate::grid::Grid;

/// Stiffness multiplier over the mesh.
#[derive(Debug, Clone, PartialEq)]
pub enum StiffnessMultiplierField {
    /// One value per element.
    PerElement(Vec<f64>),
    /// `order²` values per element, element-major, in kernel point order.
    PerQuadPoint { order: usize, values: Vec<f64> },
}

impl StiffnessMultiplierField {
    pub fn uniform(grid: &Grid, value: f64) -> Self {
        StiffnessMultiplierField::PerElement(vec![value; grid.element_count()])
    }

    /// `v² + η` sampled at the quadrature points of a nodal field `v`.
    pub fn from_nodal(grid: &Grid, quad: &QuadKernel, v: &[f64], eta: f64) -> Result<Self> {
        if v.len() != grid.node_count() {
            return Err(Error::Dimension {
                expected: grid.node_count(),
                actual: v.len(),
            });
        }
        let nq = quad.len();
        let mut values = vec![0.0; grid.element_count() * nq];
        let mut vq = vec![0.0; nq];
        for e in 0..grid.element_count() {
            let nodes = grid.element_nodes(e);
            quad.interpolate(nodes.map(|n| v[n]), &mut vq);
            for (out, &x) in values[e * nq..(e + 1) * nq].iter_mut().zip(&vq) {
                *out = x * x + eta;
            }
        }
        Ok(StiffnessMultiplierField::PerQuadPoint {
            order: quad.order,
            values,
        })
    }

    /// Multiplier samples of one element.
    pub fn element(&self, e: usize) -> &[f64] {
        match self {
            StiffnessMultiplierField::PerElement(v) => &v[e..e + 1],
            StiffnessMultiplierField::PerQuadPoint { order, values } => {
                let nq = order * order;
                &values[e * nq..(e + 1) * nq]
            }
        }
    }

    /// Whether element `e` carries no stiffness at all.
    pub fn is_void(&self, e: usize) -> bool {
        self.element(e).iter().all(|&m| m == 0.0)
    }

    pub fn check(&self, grid: &Grid, quad_order: usize) -> Result<()> {
        let (expected, actual) = match self {
            StiffnessMultiplierField::PerElement(v) => (grid.element_count(), v.len()),
            StiffnessMultiplierField::PerQuadPoint { order, values } => {
                if *order != quad_order {
                    return Err(Error::Dimension {
                        expected: quad_order,
                        actual: *order,
                    });
                }
                (grid.element_count() * order * order, values.len())
            }
        };
        if expected != actual {
            return Err(Error::Dimension { expected, actual });
        }
        let values = match self {
            StiffnessMultiplierField::PerElement(v) => v,
            StiffnessMultiplierField::PerQuadPoint { values, .. } => values,
        };
        if let Some(bad) = values.iter().find(|&&m| !(m >= 0.0)) {
            return Err(Error::InvalidInput(format!("negative stiffness multiplier {bad}")));
        }
        Ok(())
    }
}

#[inline]
pub fn element_dofs(nodes: [usize; 4]) -> [usize; 8] {
    let mut d = [0; 8];
    for (k, n) in nodes.iter().enumerate() {
        d[2 * k] = 2 * n;
        d[2 * k + 1] = 2 * n + 1;
    }
    d
}

/// Global stiffness operator for the given multipliers.
pub fn assemble(grid: &Grid, kernel: &ElasticKernel, multipliers: &StiffnessMultiplierField) -> Result<CsrMatrix> {
    let mut k = CsrMatrix::grid_pattern(grid, 2);
    assemble_into(&mut k, grid, kernel, multipliers)?;
    Ok(k)
}

/// Reassembles into an operator that already has the grid pattern.
pub fn assemble_into(
    k: &mut CsrMatrix,
    grid: &Grid,
    kernel: &ElasticKernel,
    multipliers: &StiffnessMultiplierField,
) -> Result<()> {
    multipliers.check(grid, kernel.quad.order)?;
    if k.n != 2 * grid.node_count() {
        return Err(Error::Dimension {
            expected: 2 * grid.node_count(),
            actual: k.n,
        });
    }
    k.clear();
    for e in 0..grid.element_count() {
        if multipliers.is_void(e) {
            continue;
        }
        let ke = kernel.stiffness(multipliers.element(e))?;
        k.add_block(&element_dofs(grid.element_nodes(e)), &ke);
    }
    Ok(())
}

/// Scalar operator `∫ c φ_i φ_j + κ ∇φ_i·∇φ_j` with `c` sampled per quadrature
/// point (element-major) and a constant `κ`.
pub fn assemble_scalar_into(
    a: &mut CsrMatrix,
    grid: &Grid,
    quad: &QuadKernel,
    mass_weights: &[f64],
    kappa: f64,
) -> Result<()> {
    let nq = quad.len();
    if mass_weights.len() != grid.element_count() * nq {
        return Err(Error::Dimension {
            expected: grid.element_count() * nq,
            actual: mass_weights.len(),
        });
    }
    if a.n != grid.node_count() {
        return Err(Error::Dimension {
            expected: grid.node_count(),
            actual: a.n,
        });
    }
    // Reference-coordinate Laplacian; the (2/h)² and h²/4 factors cancel.
    let mut lap = [[0.0; 4]; 4];
    for q in &quad.points {
        for i in 0..4 {
            for j in 0..4 {
                lap[i][j] += q.weight * (q.dn[i][0] * q.dn[j][0] + q.dn[i][1] * q.dn[j][1]);
            }
        }
    }
    let area = 0.25 * grid.h * grid.h;
    a.clear();
    for e in 0..grid.element_count() {
        let mut ae = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                ae[i][j] = kappa * lap[i][j];
            }
        }
        for (q, &c) in quad.points.iter().zip(&mass_weights[e * nq..(e + 1) * nq]) {
            let s = c * q.weight * area;
            for i in 0..4 {
                for j in 0..4 {
                    ae[i][j] += s * (q.n[i] * q.n[j]);
                }
            }
        }
        a.add_block(&grid.element_nodes(e), &ae);
    }
    Ok(())
}

/// Load vector `∫ c φ_i` with `c` sampled per quadrature point.
pub fn scalar_load(grid: &Grid, quad: &QuadKernel, weights: &[f64]) -> Vec<f64> {
    let nq = quad.len();
    let area = 0.25 * grid.h * grid.h;
    let mut f = vec![0.0; grid.node_count()];
    for e in 0..grid.element_count() {
        let nodes = grid.element_nodes(e);
        for (q, &c) in quad.points.iter().zip(&weights[e * nq..(e + 1) * nq]) {
            for k in 0..4 {
                f[nodes[k]] += c * q.weight * area * q.n[k];
            }
        }
    }
    f
}
