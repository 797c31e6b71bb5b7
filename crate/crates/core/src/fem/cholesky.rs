//! Supernodal multifrontal Cholesky factorization for operators on a
//! structured grid, ordered by geometric nested dissection.
//!
//! The symbolic analysis depends only on the grid and the number of unknowns
//! per node, so one [`SymbolicCholesky`] serves every operator assembled on the
//! same pattern. Factorization and solves are sequential and deterministic.

use std::ops::Range;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::sparse::CsrMatrix;
use crate::grid::Grid;

/// Boxes with at most this many nodes are eliminated as one dense leaf.
const LEAF_NODES: usize = 64;
/// Column block width of the dense partial factorization.
const BLOCK: usize = 48;

/// Fill-reducing ordering: `perm[new] = old` plus the supernode partition.
#[derive(Debug, Clone)]
pub struct NestedDissection {
    pub perm: Vec<usize>,
    pub supernodes: Vec<Range<usize>>,
}

/// Recursively bisects the node box by grid-line separators. Sub-boxes are
/// numbered before their separator, so every supernode follows its descendants.
pub fn nested_dissection(grid: &Grid, dofs_per_node: usize) -> NestedDissection {
    let nnx = grid.nx + 1;
    let mut nodes = Vec::with_capacity(grid.node_count());
    let mut groups = Vec::new();
    dissect(0..nnx, 0..grid.ny + 1, nnx, &mut nodes, &mut groups);
    let perm = nodes
        .iter()
        .flat_map(|&n| (0..dofs_per_node).map(move |c| n * dofs_per_node + c))
        .collect();
    let supernodes = groups
        .into_iter()
        .map(|r: Range<usize>| r.start * dofs_per_node..r.end * dofs_per_node)
        .collect();
    NestedDissection { perm, supernodes }
}

fn dissect(
    is: Range<usize>,
    js: Range<usize>,
    nnx: usize,
    nodes: &mut Vec<usize>,
    groups: &mut Vec<Range<usize>>,
) {
    let (w, h) = (is.len(), js.len());
    if w == 0 || h == 0 {
        return;
    }
    let start = nodes.len();
    if w * h <= LEAF_NODES || w < 3 && h < 3 {
        for j in js {
            for i in is.clone() {
                nodes.push(i + j * nnx);
            }
        }
    } else if w >= h {
        let s = is.start + w / 2;
        dissect(is.start..s, js.clone(), nnx, nodes, groups);
        dissect(s + 1..is.end, js.clone(), nnx, nodes, groups);
        let sep = nodes.len();
        for j in js {
            nodes.push(s + j * nnx);
        }
        groups.push(sep..nodes.len());
        return;
    } else {
        let s = js.start + h / 2;
        dissect(is.clone(), js.start..s, nnx, nodes, groups);
        dissect(is.clone(), s + 1..js.end, nnx, nodes, groups);
        let sep = nodes.len();
        for i in is {
            nodes.push(i + s * nnx);
        }
        groups.push(sep..nodes.len());
        return;
    }
    groups.push(start..nodes.len());
}

#[derive(Debug, Clone)]
struct Supernode {
    cols: Range<usize>,
    /// Off-diagonal row structure, new indices, sorted.
    rows: Vec<usize>,
    children: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SymbolicCholesky {
    n: usize,
    perm: Vec<usize>,
    iperm: Vec<usize>,
    supernodes: Vec<Supernode>,
    /// Pattern the analysis was built for.
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl SymbolicCholesky {
    pub fn analyze(pattern: &CsrMatrix, ordering: NestedDissection) -> Result<Self> {
        let n = pattern.n;
        if ordering.perm.len() != n {
            return Err(Error::Dimension {
                expected: n,
                actual: ordering.perm.len(),
            });
        }
        let perm = ordering.perm;
        let mut iperm = vec![usize::MAX; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }
        let mut owner = vec![0usize; n];
        for (s, r) in ordering.supernodes.iter().enumerate() {
            for k in r.clone() {
                owner[k] = s;
            }
        }
        let mut supernodes: Vec<Supernode> = ordering
            .supernodes
            .iter()
            .map(|r| Supernode {
                cols: r.clone(),
                rows: Vec::new(),
                children: Vec::new(),
            })
            .collect();

        let mut mark = vec![usize::MAX; n];
        for s in 0..supernodes.len() {
            let end = supernodes[s].cols.end;
            let mut rows = Vec::new();
            for k in supernodes[s].cols.clone() {
                let old = perm[k];
                for p in pattern.row_ptr[old]..pattern.row_ptr[old + 1] {
                    let nk = iperm[pattern.col_idx[p]];
                    if nk >= end && mark[nk] != s {
                        mark[nk] = s;
                        rows.push(nk);
                    }
                }
            }
            for c in supernodes[s].children.clone() {
                for &r in &supernodes[c].rows {
                    if r >= end && mark[r] != s {
                        mark[r] = s;
                        rows.push(r);
                    }
                }
            }
            rows.sort_unstable();
            if let Some(&first) = rows.first() {
                let parent = owner[first];
                supernodes[parent].children.push(s);
            }
            supernodes[s].rows = rows;
        }
        Ok(SymbolicCholesky {
            n,
            perm,
            iperm,
            supernodes,
            row_ptr: pattern.row_ptr.clone(),
            col_idx: pattern.col_idx.clone(),
        })
    }

    pub fn for_grid(grid: &Grid, dofs_per_node: usize) -> Result<Arc<Self>> {
        let pattern = CsrMatrix::grid_pattern(grid, dofs_per_node);
        SymbolicCholesky::analyze(&pattern, nested_dissection(grid, dofs_per_node)).map(Arc::new)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of the factor (dense supernodal blocks).
    pub fn factor_entries(&self) -> usize {
        self.supernodes
            .iter()
            .map(|s| (s.cols.len() + s.rows.len()) * s.cols.len())
            .sum()
    }

    /// Numeric factorization `P A Pᵀ = L Lᵀ`.
    pub fn factorize(self: &Arc<Self>, a: &CsrMatrix) -> Result<CholeskyFactor> {
        if a.n != self.n || a.row_ptr != self.row_ptr || a.col_idx != self.col_idx {
            return Err(Error::InvalidInput(
                "matrix pattern differs from the analyzed pattern".into(),
            ));
        }
        let mut pos = vec![usize::MAX; self.n];
        let mut blocks: Vec<Vec<f64>> = Vec::with_capacity(self.supernodes.len());
        let mut updates: Vec<Option<Vec<f64>>> = vec![None; self.supernodes.len()];

        for (s, sn) in self.supernodes.iter().enumerate() {
            let p = sn.cols.len();
            let r = sn.rows.len();
            let m = p + r;
            for (local, k) in sn.cols.clone().enumerate() {
                pos[k] = local;
            }
            for (t, &row) in sn.rows.iter().enumerate() {
                pos[row] = p + t;
            }
            let mut front = vec![0.0; m * m];
            for (jl, k) in sn.cols.clone().enumerate() {
                let old = self.perm[k];
                for q in a.row_ptr[old]..a.row_ptr[old + 1] {
                    let nk = self.iperm[a.col_idx[q]];
                    if nk >= k {
                        front[pos[nk] + jl * m] += a.values[q];
                    }
                }
            }
            for &c in &sn.children {
                let update = updates[c].take().expect("child update consumed once");
                let crow = &self.supernodes[c].rows;
                let rc = crow.len();
                for jj in 0..rc {
                    let gj = pos[crow[jj]];
                    let col = &mut front[gj * m..(gj + 1) * m];
                    let ucol = &update[jj * rc..(jj + 1) * rc];
                    for ii in jj..rc {
                        col[pos[crow[ii]]] += ucol[ii];
                    }
                }
            }
            partial_cholesky(&mut front, m, p).map_err(|(local, value)| Error::NotPositiveDefinite {
                pivot: self.perm[sn.cols.start + local],
                value,
            })?;
            if r > 0 {
                let mut update = vec![0.0; r * r];
                for j in 0..r {
                    let src = &front[(p + j) * m + p..(p + j + 1) * m];
                    update[j * r..(j + 1) * r].copy_from_slice(src);
                }
                updates[s] = Some(update);
            }
            front.truncate(m * p);
            front.shrink_to_fit();
            blocks.push(front);
        }
        Ok(CholeskyFactor {
            symbolic: Arc::clone(self),
            blocks,
        })
    }
}

/// Eliminates the first `p` columns of the dense lower-triangular front
/// (column-major, order `m`), leaving the Schur complement in the trailing block.
/// Returns the offending local pivot on breakdown.
fn partial_cholesky(f: &mut [f64], m: usize, p: usize) -> std::result::Result<(), (usize, f64)> {
    let mut k0 = 0;
    while k0 < p {
        let k1 = (k0 + BLOCK).min(p);
        for j in k0..k1 {
            let d = f[j + j * m];
            if !(d > 0.0) || !d.is_finite() {
                return Err((j, d));
            }
            let d = d.sqrt();
            f[j + j * m] = d;
            let inv = 1.0 / d;
            for v in &mut f[j * m + j + 1..(j + 1) * m] {
                *v *= inv;
            }
            // Update the remaining columns of the panel.
            let (head, tail) = f.split_at_mut((j + 1) * m);
            let colj = &head[j * m..];
            for jj in j + 1..k1 {
                let factor = colj[jj];
                if factor == 0.0 {
                    continue;
                }
                let off = (jj - j - 1) * m;
                let target = &mut tail[off + jj..off + m];
                for (t, &l) in target.iter_mut().zip(&colj[jj..m]) {
                    *t -= l * factor;
                }
            }
        }
        // Trailing update F[k1.., k1..] -= P Pᵀ (lower part, column blocks).
        let nb = k1 - k0;
        let mut c0 = k1;
        while c0 < m {
            let c1 = (c0 + 4 * BLOCK).min(m);
            let rows = m - c0;
            let cols = c1 - c0;
            // SAFETY: A and B read columns k0..k1, C writes columns c0..c1 with
            // c0 >= k1; all ranges lie inside `f` (length m*m).
            unsafe {
                let base = f.as_mut_ptr();
                let a = base.add(c0 + k0 * m) as *const f64;
                let b = base.add(c0 + k0 * m) as *const f64;
                let c = base.add(c0 + c0 * m);
                matrixmultiply::dgemm(
                    rows, nb, cols, -1.0, a, 1, m as isize, b, m as isize, 1, 1.0, c, 1, m as isize,
                );
            }
            c0 = c1;
        }
        k0 = k1;
    }
    Ok(())
}

/// Numeric factor bound to its symbolic analysis.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    symbolic: Arc<SymbolicCholesky>,
    blocks: Vec<Vec<f64>>,
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.symbolic.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; b.len()];
        self.solve_into(b, &mut x);
        x
    }

    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) {
        let sym = &*self.symbolic;
        let mut y: Vec<f64> = sym.perm.iter().map(|&old| b[old]).collect();
        for (sn, l) in sym.supernodes.iter().zip(&self.blocks) {
            let p = sn.cols.len();
            let m = p + sn.rows.len();
            let base = sn.cols.start;
            for j in 0..p {
                let col = &l[j * m..(j + 1) * m];
                let yj = y[base + j] / col[j];
                y[base + j] = yj;
                for i in j + 1..p {
                    y[base + i] -= col[i] * yj;
                }
                for (t, &row) in sn.rows.iter().enumerate() {
                    y[row] -= col[p + t] * yj;
                }
            }
        }
        for (sn, l) in sym.supernodes.iter().zip(&self.blocks).rev() {
            let p = sn.cols.len();
            let m = p + sn.rows.len();
            let base = sn.cols.start;
            for j in (0..p).rev() {
                let col = &l[j * m..(j + 1) * m];
                let mut acc = y[base + j];
                for i in j + 1..p {
                    acc -= col[i] * y[base + i];
                }
                for (t, &row) in sn.rows.iter().enumerate() {
                    acc -= col[p + t] * y[row];
                }
                y[base + j] = acc / col[j];
            }
        }
        for (k, &old) in sym.perm.iter().enumerate() {
            x[old] = y[k];
        }
    }
}
