//! Closed-form reference solution of the slit crack in an infinite plate under
//! all-around tension, and the plane-strain constitutive relations.

use std::f64::consts::PI;

use crate::config::{MaterialParams, ProblemParams};
use crate::error::{Error, Result};

/// Cauchy stress in crack-aligned coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StressState {
    pub s11: f64,
    pub s22: f64,
    pub s12: f64,
}

impl StressState {
    /// Traction `σ·n` on a surface with unit normal `n`.
    #[inline]
    pub fn traction(&self, n: [f64; 2]) -> [f64; 2] {
        [
            self.s11 * n[0] + self.s12 * n[1],
            self.s12 * n[0] + self.s22 * n[1],
        ]
    }
}

/// Small strain with the engineering shear `g12 = 2ε12`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StrainState {
    pub e11: f64,
    pub e22: f64,
    pub g12: f64,
}

impl StrainState {
    pub fn scale(&self, c: f64) -> Self {
        StrainState {
            e11: c * self.e11,
            e22: c * self.e22,
            g12: c * self.g12,
        }
    }
}

/// Stress at `x` (crack frame, crack along `x1 ∈ [−a, a]`) for remote stress `sigma0`.
///
/// Angles are measured from the positive `x1` axis with `atan2`, so the field is
/// single-valued off the slit and jumps across it.
pub fn stress_at(x: [f64; 2], a: f64, sigma0: f64) -> Result<StressState> {
    if a == 0.0 {
        return Ok(StressState {
            s11: sigma0,
            s22: sigma0,
            s12: 0.0,
        });
    }
    if !(a > 0.0) {
        return Err(Error::Domain(format!("negative crack half-length {a}")));
    }
    let [x1, x2] = x;
    let r = x1.hypot(x2);
    let theta = x2.atan2(x1);
    let (d1, d2) = (x1 - a, x1 + a);
    let r1 = d1.hypot(x2);
    let r2 = d2.hypot(x2);
    let tip_radius = 1e-12 * a;
    if r1 <= tip_radius || r2 <= tip_radius {
        return Err(Error::Domain(format!("stress evaluated at a crack tip ({x1}, {x2})")));
    }
    let theta1 = x2.atan2(d1);
    let theta2 = x2.atan2(d2);

    let rr = r1 * r2;
    let amp = sigma0 * r / rr.sqrt();
    let half_sum = 0.5 * (theta1 + theta2);
    let base = (theta - half_sum).cos();
    let k = a * a / rr * theta.sin();
    let (sin3, cos3) = (3.0 * half_sum).sin_cos();
    Ok(StressState {
        s11: amp * (base - k * sin3),
        s22: amp * (base + k * sin3),
        s12: amp * k * cos3,
    })
}

/// Displacement at `x` (crack frame), up to a rigid motion, from the
/// Westergaard potentials `Z̄ = σ0 √(z² − a²)` and `Z = σ0 z / √(z² − a²)`.
pub fn displacement_at(x: [f64; 2], a: f64, sigma0: f64, m: &MaterialParams) -> Result<[f64; 2]> {
    if !(a >= 0.0) {
        return Err(Error::Domain(format!("negative crack half-length {a}")));
    }
    let [x1, x2] = x;
    let (d1, d2) = (x1 - a, x1 + a);
    let (r1, r2) = (d1.hypot(x2), d2.hypot(x2));
    if a > 0.0 && (r1 <= 1e-12 * a || r2 <= 1e-12 * a) {
        return Err(Error::Domain(format!("displacement evaluated at a crack tip ({x1}, {x2})")));
    }
    let half_sum = 0.5 * (x2.atan2(d1) + x2.atan2(d2));
    let root = (r1 * r2).sqrt();
    let (re_zb, im_zb) = (sigma0 * root * half_sum.cos(), sigma0 * root * half_sum.sin());
    let (re_z, im_z) = if a == 0.0 {
        (sigma0, 0.0)
    } else {
        let phase = x2.atan2(x1) - half_sum;
        let amp = sigma0 * x1.hypot(x2) / root;
        (amp * phase.cos(), amp * phase.sin())
    };
    let two_mu = 2.0 * m.mu;
    let nu = m.poisson;
    Ok([
        ((1.0 - 2.0 * nu) * re_zb - x2 * im_z) / two_mu,
        (2.0 * (1.0 - nu) * im_zb - x2 * re_z) / two_mu,
    ])
}

/// Minimum potential of the square domain `[−D/2, D/2]²` loaded by the
/// tractions of the exact field, `−½ ∮ σn·u ds` with the exact displacements.
///
/// Unlike the closed form in [`ReferenceEnergies::pi_elastic_exact`], this
/// accounts for the crack's effect on the boundary tractions themselves.
pub fn domain_potential(p: &ProblemParams) -> Result<f64> {
    const PANELS: usize = 128;
    let rule = crate::fem::GaussRule::new(16);
    let half = 0.5 * p.d;
    let len = p.d / PANELS as f64;
    let sides: [([f64; 2], [f64; 2], [f64; 2]); 4] = [
        ([half, -half], [0.0, 1.0], [1.0, 0.0]),
        ([half, half], [-1.0, 0.0], [0.0, 1.0]),
        ([-half, half], [0.0, -1.0], [-1.0, 0.0]),
        ([-half, -half], [1.0, 0.0], [0.0, -1.0]),
    ];
    let mut work = 0.0;
    for (start, dir, normal) in sides {
        for k in 0..PANELS {
            for (&s, &w) in rule.points.iter().zip(&rule.weights) {
                let t = (k as f64 + 0.5 * (1.0 + s)) * len;
                let x = [start[0] + t * dir[0], start[1] + t * dir[1]];
                let traction = stress_at(x, p.a, p.sigma0)?.traction(normal);
                let u = displacement_at(x, p.a, p.sigma0, &p.material)?;
                work += 0.5 * w * len * (traction[0] * u[0] + traction[1] * u[1]);
            }
        }
    }
    Ok(-0.5 * work)
}

/// Plane-strain Hooke's law solved for strains.
pub fn strain_from_stress(s: StressState, m: &MaterialParams) -> StrainState {
    let (e, nu) = (m.young, m.poisson);
    let c = (1.0 - nu * nu) / e;
    let x = nu * (1.0 + nu) / e;
    StrainState {
        e11: c * s.s11 - x * s.s22,
        e22: c * s.s22 - x * s.s11,
        g12: 2.0 * (1.0 + nu) / e * s.s12,
    }
}

/// Isotropic plane-strain energy density
/// `λ/2 (ε11 + ε22)² + μ (ε11² + ε22² + γ12²/2)`.
#[inline]
pub fn strain_energy_density(e: StrainState, m: &MaterialParams) -> f64 {
    let tr = e.e11 + e.e22;
    0.5 * m.lambda * tr * tr + m.mu * (e.e11 * e.e11 + e.e22 * e.e22 + 0.5 * e.g12 * e.g12)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceEnergies {
    /// Far-field energy density.
    pub w0: f64,
    /// Closed-form elastic potential `−W0·D² − (1 − ν²)πa²σ0²/E`.
    pub pi_elastic_exact: f64,
    /// Griffith fracture energy `Gc·2a`.
    pub e_fracture_exact: f64,
    /// `pi_elastic_exact + e_fracture_exact`.
    pub pi_total_exact: f64,
    /// Mode-I stress-intensity factor.
    pub k_i: f64,
    /// Exact minimum potential of the bounded domain under the exact-field
    /// tractions (see [`domain_potential`]).
    pub pi_elastic_domain: f64,
    /// `pi_elastic_domain + e_fracture_exact`.
    pub pi_total_domain: f64,
}

/// Energy density of the uncracked equibiaxial state, `(1 − 2ν)(1 + ν)σ0²/E`.
pub fn far_field_energy_density(p: &ProblemParams) -> f64 {
    let m = &p.material;
    (1.0 - 2.0 * m.poisson) * (1.0 + m.poisson) / m.young * p.sigma0 * p.sigma0
}

pub fn reference_energies(p: &ProblemParams) -> ReferenceEnergies {
    let m = &p.material;
    let w0 = far_field_energy_density(p);
    let area = p.d * p.d;
    let pi_elastic_exact = -w0 * area - m.plane_strain_compliance() * PI * p.a * p.a * p.sigma0 * p.sigma0;
    let e_fracture_exact = m.gc * 2.0 * p.a;
    // Tips lie strictly inside a validated domain; NaN flags a malformed one.
    let pi_elastic_domain = domain_potential(p).unwrap_or(f64::NAN);
    ReferenceEnergies {
        w0,
        pi_elastic_exact,
        e_fracture_exact,
        pi_total_exact: pi_elastic_exact + e_fracture_exact,
        k_i: p.sigma0 * (PI * p.a).sqrt(),
        pi_elastic_domain,
        pi_total_domain: pi_elastic_domain + e_fracture_exact,
    }
}
