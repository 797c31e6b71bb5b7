use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Gauss–Legendre rule on `[−1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// `n`-point rule, exact for polynomials of degree `2n − 1`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "quadrature order must be positive");
        let mut points = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..(n + 1) / 2 {
            // Chebyshev-like initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            points[i] = -x;
            points[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            points[n / 2] = 0.0;
        }
        GaussRule { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Value and derivative of the Legendre polynomial `P_n` at `x`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Quadrature settings for element and boundary-edge integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuadratureMode {
    /// 3×3 Gauss per element, 8-point Gauss per boundary edge.
    Reference,
    /// 2×2 Gauss per element, 2-point Gauss per boundary edge.
    Fast,
}

impl QuadratureMode {
    /// Points per direction for element integrals.
    pub fn element_order(&self) -> usize {
        match self {
            QuadratureMode::Reference => 3,
            QuadratureMode::Fast => 2,
        }
    }

    /// Points per boundary edge.
    pub fn edge_order(&self) -> usize {
        match self {
            QuadratureMode::Reference => 8,
            QuadratureMode::Fast => 2,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            QuadratureMode::Reference => "reference",
            QuadratureMode::Fast => "fast",
        }
    }
}

impl fmt::Display for QuadratureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QuadratureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "reference" => Ok(QuadratureMode::Reference),
            "fast" => Ok(QuadratureMode::Fast),
            other => Err(Error::InvalidInput(format!(
                "unknown quadrature mode `{other}` (expected reference or fast)"
            ))),
        }
    }
}
