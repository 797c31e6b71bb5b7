//! Bilinear square element in plane strain.
//!
//! For a square of side `h` the Jacobian is `h/2·I`, so shape-function
//! gradients scale as `2/h` and the area element as `h²/4`. Stiffness and
//! Laplacian contributions are therefore independent of `h`; only mass-type
//! terms carry the `h²/4` factor.

use crate::analytic::{strain_energy_density, StrainState};
use crate::config::MaterialParams;
use crate::error::{Error, Result};
use crate::fem::quadrature::GaussRule;

pub type ElementMatrix = [[f64; 8]; 8];

/// Reference-element corner coordinates, counterclockwise from lower-left.
const CORNERS: [[f64; 2]; 4] = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];

#[inline]
pub fn shape(xi: f64, eta: f64) -> [f64; 4] {
    let mut n = [0.0; 4];
    for (k, c) in CORNERS.iter().enumerate() {
        n[k] = 0.25 * (1.0 + c[0] * xi) * (1.0 + c[1] * eta);
    }
    n
}

/// Reference gradients `[∂N/∂ξ, ∂N/∂η]` per corner.
#[inline]
pub fn shape_grad(xi: f64, eta: f64) -> [[f64; 2]; 4] {
    let mut g = [[0.0; 2]; 4];
    for (k, c) in CORNERS.iter().enumerate() {
        g[k] = [0.25 * c[0] * (1.0 + c[1] * eta), 0.25 * c[1] * (1.0 + c[0] * xi)];
    }
    g
}

#[derive(Debug, Clone, Copy)]
pub struct QuadPoint {
    pub xi: f64,
    pub eta: f64,
    /// Tensor-product reference weight.
    pub weight: f64,
    pub n: [f64; 4],
    pub dn: [[f64; 2]; 4],
}

/// Tensor-product Gauss points of one element.
#[derive(Debug, Clone)]
pub struct QuadKernel {
    pub order: usize,
    pub points: Vec<QuadPoint>,
}

impl QuadKernel {
    pub fn new(order: usize) -> Self {
        let rule = GaussRule::new(order);
        let mut points = Vec::with_capacity(order * order);
        // η outer, ξ inner.
        for (&eta, &we) in rule.points.iter().zip(&rule.weights) {
            for (&xi, &wx) in rule.points.iter().zip(&rule.weights) {
                points.push(QuadPoint {
                    xi,
                    eta,
                    weight: wx * we,
                    n: shape(xi, eta),
                    dn: shape_grad(xi, eta),
                });
            }
        }
        QuadKernel { order, points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Interpolates nodal values at every quadrature point.
    #[inline]
    pub fn interpolate(&self, nodal: [f64; 4], out: &mut [f64]) {
        for (o, q) in out.iter_mut().zip(&self.points) {
            *o = q.n[0] * nodal[0] + q.n[1] * nodal[1] + q.n[2] * nodal[2] + q.n[3] * nodal[3];
        }
    }

    /// Strain at point `q` from element displacements `[u0x, u0y, u1x, ...]`.
    #[inline]
    pub fn strain(&self, q: usize, h: f64, ue: &[f64; 8]) -> StrainState {
        let dn = &self.points[q].dn;
        let s = 2.0 / h;
        let mut e = StrainState::default();
        for k in 0..4 {
            let (ux, uy) = (ue[2 * k], ue[2 * k + 1]);
            e.e11 += dn[k][0] * ux;
            e.e22 += dn[k][1] * uy;
            e.g12 += dn[k][1] * ux + dn[k][0] * uy;
        }
        e.scale(s)
    }

    /// Gradient of a nodal scalar at point `q`.
    #[inline]
    pub fn gradient(&self, q: usize, h: f64, ve: [f64; 4]) -> [f64; 2] {
        let dn = &self.points[q].dn;
        let s = 2.0 / h;
        let mut g = [0.0; 2];
        for k in 0..4 {
            g[0] += dn[k][0] * ve[k];
            g[1] += dn[k][1] * ve[k];
        }
        [s * g[0], s * g[1]]
    }
}

/// Per-quadrature-point stiffness contributions at unit multiplier.
#[derive(Debug, Clone)]
pub struct ElasticKernel {
    pub quad: QuadKernel,
    pub material: MaterialParams,
    /// `w_q B_qᵀ D B_q det J`, one 8×8 block per point (independent of `h`).
    pub point_stiffness: Vec<ElementMatrix>,
    /// Sum of `point_stiffness`.
    pub unit_stiffness: ElementMatrix,
}

impl ElasticKernel {
    pub fn new(order: usize, material: MaterialParams) -> Self {
        let quad = QuadKernel::new(order);
        let (lam, mu) = (material.lambda, material.mu);
        let d = [[lam + 2.0 * mu, lam, 0.0], [lam, lam + 2.0 * mu, 0.0], [0.0, 0.0, mu]];
        let mut point_stiffness = Vec::with_capacity(quad.len());
        let mut unit = [[0.0; 8]; 8];
        for q in &quad.points {
            // B in reference coordinates; the (2/h)² and h²/4 factors cancel.
            let mut b = [[0.0; 8]; 3];
            for k in 0..4 {
                b[0][2 * k] = q.dn[k][0];
                b[1][2 * k + 1] = q.dn[k][1];
                b[2][2 * k] = q.dn[k][1];
                b[2][2 * k + 1] = q.dn[k][0];
            }
            let mut db = [[0.0; 8]; 3];
            for r in 0..3 {
                for c in 0..8 {
                    db[r][c] = (0..3).map(|s| d[r][s] * b[s][c]).sum();
                }
            }
            let mut kq = [[0.0; 8]; 8];
            for i in 0..8 {
                for j in 0..8 {
                    kq[i][j] = q.weight * (0..3).map(|r| b[r][i] * db[r][j]).sum::<f64>();
                }
            }
            // Exact symmetry.
            for i in 0..8 {
                for j in 0..i {
                    let avg = 0.5 * (kq[i][j] + kq[j][i]);
                    kq[i][j] = avg;
                    kq[j][i] = avg;
                }
            }
            for i in 0..8 {
                for j in 0..8 {
                    unit[i][j] += kq[i][j];
                }
            }
            point_stiffness.push(kq);
        }
        ElasticKernel {
            quad,
            material,
            point_stiffness,
            unit_stiffness: unit,
        }
    }

    /// Element stiffness for per-point multipliers (`samples.len() == n_q`) or a
    /// single element-wide multiplier (`samples.len() == 1`).
    pub fn stiffness(&self, samples: &[f64]) -> Result<ElementMatrix> {
        if let Some(&bad) = samples.iter().find(|&&m| !(m >= 0.0)) {
            return Err(Error::InvalidInput(format!("negative stiffness multiplier {bad}")));
        }
        let mut k = [[0.0; 8]; 8];
        match samples.len() {
            1 => {
                let m = samples[0];
                for i in 0..8 {
                    for j in 0..8 {
                        k[i][j] = m * self.unit_stiffness[i][j];
                    }
                }
            }
            n if n == self.quad.len() => {
                for (m, kq) in samples.iter().zip(&self.point_stiffness) {
                    for i in 0..8 {
                        for j in 0..8 {
                            k[i][j] += m * kq[i][j];
                        }
                    }
                }
            }
            n => {
                return Err(Error::Dimension {
                    expected: self.quad.len(),
                    actual: n,
                })
            }
        }
        Ok(k)
    }

    /// `∫ m W(ε(u)) dx` over one element.
    pub fn energy(&self, h: f64, ue: &[f64; 8], multipliers: &[f64]) -> f64 {
        let area = 0.25 * h * h;
        let constant = multipliers.len() == 1;
        self.quad
            .points
            .iter()
            .enumerate()
            .map(|(q, p)| {
                let m = if constant { multipliers[0] } else { multipliers[q] };
                m * p.weight * area * strain_energy_density(self.quad.strain(q, h, ue), &self.material)
            })
            .sum()
    }
}

/// Stiffness of one square element of side `h` with the given multiplier samples.
///
/// Samples are either one value for the whole element or one per point of the
/// `order × order` Gauss rule.
pub fn element_stiffness(
    h: f64,
    material: &MaterialParams,
    samples: &[f64],
    order: usize,
) -> Result<ElementMatrix> {
    if !(h > 0.0) {
        return Err(Error::InvalidInput(format!("element size must be positive, got {h}")));
    }
    ElasticKernel::new(order, *material).stiffness(samples)
}
