//! Preconditioned conjugate gradients.

use crate::error::{Error, Result};
use crate::fem::sparse::{dot, norm, CsrMatrix};

#[derive(Debug, Clone)]
pub struct PcgOutcome {
    pub iterations: usize,
    /// Final `‖b − Ax‖ / ‖b‖`.
    pub relative_residual: f64,
}

/// Default iteration cap for an unknown count `n`.
pub fn iteration_cap(n: usize) -> usize {
    20 * (n as f64).sqrt().ceil() as usize + 1000
}

/// Solves `A x = b` in place from the initial guess in `x`. `precond(r, z)`
/// applies an SPD approximation of `A⁻¹`.
pub fn pcg<P>(
    a: &CsrMatrix,
    b: &[f64],
    x: &mut [f64],
    mut precond: P,
    tol: f64,
    max_iters: usize,
) -> Result<PcgOutcome>
where
    P: FnMut(&[f64], &mut [f64]),
{
    let n = a.n;
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(PcgOutcome {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut r = vec![0.0; n];
    a.matvec(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut res = norm(&r) / bnorm;
    let mut it = 0;
    while res > tol {
        if it == max_iters {
            return Err(Error::SolverNonConvergence {
                iterations: it,
                residual: res,
            });
        }
        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::SolverNonConvergence {
                iterations: it,
                residual: res,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        it += 1;
        // Recompute the true residual now and then to avoid drift.
        if it % 50 == 0 {
            a.matvec(x, &mut r);
            for (ri, bi) in r.iter_mut().zip(b) {
                *ri = bi - *ri;
            }
        }
        res = norm(&r) / bnorm;
        precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Ok(PcgOutcome {
        iterations: it,
        relative_residual: res,
    })
}

/// Inverse-diagonal preconditioner. Zero diagonal entries map to zero.
pub fn jacobi(a: &CsrMatrix) -> impl FnMut(&[f64], &mut [f64]) {
    let inv: Vec<f64> = a
        .diagonal()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 0.0 })
        .collect();
    move |r: &[f64], z: &mut [f64]| {
        for ((zi, ri), di) in z.iter_mut().zip(r).zip(&inv) {
            *zi = ri * di;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;

    #[test]
    fn solves_laplacian_plus_mass() {
        let g = build_grid(1.0, 0.05).unwrap();
        let mut a = CsrMatrix::grid_pattern(&g, 1);
        for row in 0..a.n {
            for p in a.row_ptr[row]..a.row_ptr[row + 1] {
                a.values[p] = if a.col_idx[p] == row { 8.5 } else { -1.0 };
            }
        }
        let b: Vec<f64> = (0..a.n).map(|i| (i as f64).sin()).collect();
        let mut x = vec![0.0; a.n];
        let out = pcg(&a, &b, &mut x, jacobi(&a), 1e-12, iteration_cap(a.n)).unwrap();
        assert!(out.relative_residual <= 1e-12);
        let r: Vec<f64> = a.mul(&x).iter().zip(&b).map(|(p, q)| p - q).collect();
        assert!(norm(&r) <= 1e-11 * norm(&b));
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let g = build_grid(1.0, 0.5).unwrap();
        let a = CsrMatrix::grid_pattern(&g, 1);
        let mut x = vec![1.0; a.n];
        pcg(&a, &vec![0.0; a.n], &mut x, |r, z| z.copy_from_slice(r), 1e-10, 10).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
    }
}
