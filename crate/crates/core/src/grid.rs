//! Regular square-element mesh of the panel and registration of the crack
//! against it.
//!
//! Grid coordinates are centered on the domain: the lower-left node sits at
//! `(−D/2, −D/2)`. Nodes are numbered lexicographically, `i + j·(nx + 1)`;
//! element corners run counterclockwise from the lower-left node.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// One edge of the domain boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    /// End nodes, ordered counterclockwise around the domain.
    pub nodes: [usize; 2],
    /// The single element the edge belongs to.
    pub element: usize,
    /// Outward unit normal.
    pub normal: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    /// Coordinates of node (0, 0).
    pub origin: [f64; 2],
    boundary: Vec<BoundaryEdge>,
}

impl Grid {
    /// Square grid of `nx × ny` elements of side `h`.
    pub fn new(h: f64, nx: usize, ny: usize, origin: [f64; 2]) -> Result<Self> {
        if nx == 0 || ny == 0 || !(h > 0.0) {
            return Err(Error::Grid(format!("degenerate grid {nx}x{ny} with h = {h}")));
        }
        let mut grid = Grid {
            h,
            nx,
            ny,
            origin,
            boundary: Vec::with_capacity(2 * (nx + ny)),
        };
        grid.boundary = grid.collect_boundary();
        Ok(grid)
    }

    pub fn node_count(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    pub fn element_count(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn node_id(&self, i: usize, j: usize) -> usize {
        i + j * (self.nx + 1)
    }

    #[inline]
    pub fn node_ij(&self, node: usize) -> (usize, usize) {
        (node % (self.nx + 1), node / (self.nx + 1))
    }

    #[inline]
    pub fn node_coords(&self, node: usize) -> [f64; 2] {
        let (i, j) = self.node_ij(node);
        [
            self.origin[0] + i as f64 * self.h,
            self.origin[1] + j as f64 * self.h,
        ]
    }

    #[inline]
    pub fn element_id(&self, i: usize, j: usize) -> usize {
        i + j * self.nx
    }

    #[inline]
    pub fn element_ij(&self, element: usize) -> (usize, usize) {
        (element % self.nx, element / self.nx)
    }

    /// Corner nodes, counterclockwise from the lower-left corner.
    #[inline]
    pub fn element_nodes(&self, element: usize) -> [usize; 4] {
        let (i, j) = self.element_ij(element);
        let n0 = self.node_id(i, j);
        let row = self.nx + 1;
        [n0, n0 + 1, n0 + row + 1, n0 + row]
    }

    pub fn element_center(&self, element: usize) -> [f64; 2] {
        let (i, j) = self.element_ij(element);
        [
            self.origin[0] + (i as f64 + 0.5) * self.h,
            self.origin[1] + (j as f64 + 0.5) * self.h,
        ]
    }

    pub fn width(&self) -> f64 {
        self.nx as f64 * self.h
    }

    pub fn height(&self) -> f64 {
        self.ny as f64 * self.h
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary
    }

    fn collect_boundary(&self) -> Vec<BoundaryEdge> {
        let (nx, ny) = (self.nx, self.ny);
        let mut edges = Vec::with_capacity(2 * (nx + ny));
        for i in 0..nx {
            edges.push(BoundaryEdge {
                nodes: [self.node_id(i, 0), self.node_id(i + 1, 0)],
                element: self.element_id(i, 0),
                normal: [0.0, -1.0],
            });
        }
        for j in 0..ny {
            edges.push(BoundaryEdge {
                nodes: [self.node_id(nx, j), self.node_id(nx, j + 1)],
                element: self.element_id(nx - 1, j),
                normal: [1.0, 0.0],
            });
        }
        for i in (0..nx).rev() {
            edges.push(BoundaryEdge {
                nodes: [self.node_id(i + 1, ny), self.node_id(i, ny)],
                element: self.element_id(i, ny - 1),
                normal: [0.0, 1.0],
            });
        }
        for j in (0..ny).rev() {
            edges.push(BoundaryEdge {
                nodes: [self.node_id(0, j + 1), self.node_id(0, j)],
                element: self.element_id(0, j),
                normal: [-1.0, 0.0],
            });
        }
        edges
    }

    /// Elements sharing `node`.
    pub fn node_elements(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        let (i, j) = self.node_ij(node);
        let candidates = [
            (i.wrapping_sub(1), j.wrapping_sub(1)),
            (i, j.wrapping_sub(1)),
            (i.wrapping_sub(1), j),
            (i, j),
        ];
        candidates
            .into_iter()
            .filter(move |&(ei, ej)| ei < self.nx && ej < self.ny)
            .map(move |(ei, ej)| self.element_id(ei, ej))
    }
}

/// Builds the `n × n` grid over the square `[−D/2, D/2]²` with `n = 1/h_over_d`.
pub fn build_grid(d: f64, h_over_d: f64) -> Result<Grid> {
    if !(d > 0.0) || !(h_over_d > 0.0) {
        return Err(Error::Grid(format!("invalid domain D = {d} or h/D = {h_over_d}")));
    }
    let count = 1.0 / h_over_d;
    let n = count.round();
    if n < 1.0 || (count - n).abs() > 1e-9 * count {
        return Err(Error::Grid(format!(
            "h/D = {h_over_d} does not give an integer element count (1/(h/D) = {count})"
        )));
    }
    let n = n as usize;
    Grid::new(d / n as f64, n, n, [-0.5 * d, -0.5 * d])
}

/// Number of elements of side `h` needed to cover a crack of length `2a`:
/// `⌈2a/h⌉`, with ratios within 1e-9 of an integer treated as exact.
pub fn eroded_count(a: f64, h: f64) -> usize {
    let ratio = 2.0 * a / h;
    let rounded = ratio.round();
    if (ratio - rounded).abs() <= 1e-9 * rounded.max(1.0) {
        rounded as usize
    } else {
        ratio.ceil() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrackMode {
    /// Crack along the mid-height of an element row; the crossed elements are eroded.
    EeAligned,
    /// Crack along a grid line; the nodes on it are flagged.
    PfAligned,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrackRegistration {
    pub mode: CrackMode,
    /// Crack half-length.
    pub a: f64,
    /// Eroded elements, sorted (EE mode only).
    pub eroded: Vec<usize>,
    /// Nodes on the crack, sorted (PF mode only).
    pub crack_nodes: Vec<usize>,
    /// Crack midpoint in grid coordinates; `center[1]` is the crack-line ordinate.
    pub center: [f64; 2],
}

impl CrackRegistration {
    /// Maps a grid point to crack-aligned coordinates (origin at the crack midpoint).
    #[inline]
    pub fn to_crack_frame(&self, p: [f64; 2]) -> [f64; 2] {
        [p[0] - self.center[0], p[1] - self.center[1]]
    }
}

/// Erodes the `⌈2a/h⌉` elements of the row containing the crack. The run is
/// centered on the crack midpoint; the midpoint is placed at the center of the
/// middle element (odd run) or on the shared edge of the two middle elements
/// (even run), as close to the domain center as the grid allows.
pub fn register_crack_ee(grid: &Grid, a: f64) -> Result<CrackRegistration> {
    if !(a >= 0.0) || 2.0 * a >= grid.width() {
        return Err(Error::Registration(format!(
            "crack longer than domain: 2a = {} vs width {}",
            2.0 * a,
            grid.width()
        )));
    }
    let count = eroded_count(a, grid.h);
    if count > grid.nx {
        return Err(Error::Registration(format!("{count} eroded elements exceed the row of {}", grid.nx)));
    }
    let row = grid.ny / 2;
    let first = if count % 2 == 1 {
        grid.nx / 2 - count / 2
    } else {
        (grid.nx - count) / 2
    };
    let center_x = if count % 2 == 1 {
        grid.origin[0] + (first + count / 2) as f64 * grid.h + 0.5 * grid.h
    } else {
        grid.origin[0] + (first + count / 2) as f64 * grid.h
    };
    if first + count > grid.nx {
        return Err(Error::Registration("eroded run leaves the domain".into()));
    }
    let eroded = (first..first + count).map(|i| grid.element_id(i, row)).collect();
    Ok(CrackRegistration {
        mode: CrackMode::EeAligned,
        a,
        eroded,
        crack_nodes: Vec::new(),
        center: [center_x, grid.origin[1] + (row as f64 + 0.5) * grid.h],
    })
}

/// Flags the nodes on the mid-height grid line within `a` of the domain center.
pub fn register_crack_pf(grid: &Grid, a: f64) -> Result<CrackRegistration> {
    if grid.ny % 2 != 0 {
        return Err(Error::Registration(format!(
            "ny = {} is odd: no grid line at mid-height",
            grid.ny
        )));
    }
    if !(a >= 0.0) || 2.0 * a >= grid.width() {
        return Err(Error::Registration(format!(
            "crack longer than domain: 2a = {} vs width {}",
            2.0 * a,
            grid.width()
        )));
    }
    let center = [
        grid.origin[0] + 0.5 * grid.width(),
        grid.origin[1] + 0.5 * grid.height(),
    ];
    let j = grid.ny / 2;
    let slack = 1e-12 * grid.width();
    let crack_nodes = (0..=grid.nx)
        .map(|i| grid.node_id(i, j))
        .filter(|&n| (grid.node_coords(n)[0] - center[0]).abs() <= a + slack)
        .collect();
    Ok(CrackRegistration {
        mode: CrackMode::PfAligned,
        a,
        eroded: Vec::new(),
        crack_nodes,
        center,
    })
}

/// Debug dump: one row per node plus one per eroded element, flagged when on
/// the crack. Columns: `entity,id,x,y,marked`.
pub fn write_debug_csv(grid: &Grid, crack: &CrackRegistration, path: impl AsRef<Path>) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "entity,id,x,y,marked")?;
    for n in 0..grid.node_count() {
        let [x, y] = grid.node_coords(n);
        let marked = crack.crack_nodes.binary_search(&n).is_ok() as u8;
        writeln!(out, "node,{n},{x},{y},{marked}")?;
    }
    for &e in &crack.eroded {
        let [x, y] = grid.element_center(e);
        writeln!(out, "element,{e},{x},{y},1")?;
    }
    out.flush()?;
    Ok(())
}
