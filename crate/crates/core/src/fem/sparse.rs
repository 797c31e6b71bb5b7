//! Compressed-row storage for symmetric operators on a [`Grid`].

use crate::grid::Grid;

/// Square sparse matrix in CSR form. Both triangles are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Zero matrix with the pattern of all node pairs sharing an element,
    /// `dofs_per_node` unknowns per node numbered `node·dofs_per_node + c`.
    pub fn grid_pattern(grid: &Grid, dofs_per_node: usize) -> Self {
        let (nnx, nny) = (grid.nx + 1, grid.ny + 1);
        let n = grid.node_count() * dofs_per_node;
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(n * 9 * dofs_per_node);
        row_ptr.push(0);
        for j in 0..nny {
            for i in 0..nnx {
                let jr = j.saturating_sub(1)..(j + 2).min(nny);
                let ir = i.saturating_sub(1)..(i + 2).min(nnx);
                for _ in 0..dofs_per_node {
                    for jj in jr.clone() {
                        for ii in ir.clone() {
                            let node = ii + jj * nnx;
                            for c in 0..dofs_per_node {
                                col_idx.push(node * dofs_per_node + c);
                            }
                        }
                    }
                    row_ptr.push(col_idx.len());
                }
            }
        }
        let nnz = col_idx.len();
        CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values: vec![0.0; nnz],
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn clear(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
    }

    #[inline]
    fn position(&self, row: usize, col: usize) -> Option<usize> {
        let (lo, hi) = (self.row_ptr[row], self.row_ptr[row + 1]);
        self.col_idx[lo..hi].binary_search(&col).ok().map(|p| lo + p)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.position(row, col).map_or(0.0, |p| self.values[p])
    }

    /// Scatters a dense block. Panics if an entry falls outside the pattern.
    pub fn add_block<const N: usize>(&mut self, dofs: &[usize; N], block: &[[f64; N]; N]) {
        for (a, &row) in dofs.iter().enumerate() {
            let (lo, hi) = (self.row_ptr[row], self.row_ptr[row + 1]);
            let cols = &self.col_idx[lo..hi];
            for (b, &col) in dofs.iter().enumerate() {
                let p = cols.binary_search(&col).expect("entry outside sparsity pattern");
                self.values[lo + p] += block[a][b];
            }
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (row, yr) in y.iter_mut().enumerate().take(self.n) {
            let mut acc = 0.0;
            for p in self.row_ptr[row]..self.row_ptr[row + 1] {
                acc += self.values[p] * x[self.col_idx[p]];
            }
            *yr = acc;
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y
    }

    /// `xᵀ A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let y = self.mul(x);
        dot(x, &y)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Largest absolute asymmetry `max |A_ij − A_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for row in 0..self.n {
            for p in self.row_ptr[row]..self.row_ptr[row + 1] {
                let col = self.col_idx[p];
                worst = worst.max((self.values[p] - self.get(col, row)).abs());
            }
        }
        worst
    }

    /// Replaces the rows and columns of `dofs` by those of a scaled identity,
    /// so the unknowns decouple with value `rhs/scale`.
    pub fn constrain(&mut self, dofs: &[usize], scale: f64) {
        let mut flagged = vec![false; self.n];
        for &d in dofs {
            flagged[d] = true;
        }
        for row in 0..self.n {
            for p in self.row_ptr[row]..self.row_ptr[row + 1] {
                let col = self.col_idx[p];
                if flagged[row] || flagged[col] {
                    self.values[p] = if row == col { scale } else { 0.0 };
                }
            }
        }
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
