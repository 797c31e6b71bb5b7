//! Integral form of the ε-neighborhood fracture energy: the eroded indicator
//! is convolved with a mollifier, passed through a step activation, and the
//! result is integrated over a sample lattice.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Coarsest admissible sample spacing, as a fraction of ε.
pub const MAX_SPACING_FRACTION: f64 = 1.0 / 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Two,
    Three,
}

/// Uniform bump of radius ε with unit integral.
pub fn mollifier_value(r: f64, epsilon: f64, dim: Dimension) -> f64 {
    if !(r < epsilon) {
        return 0.0;
    }
    match dim {
        Dimension::Two => 1.0 / (PI * epsilon * epsilon),
        Dimension::Three => 3.0 / (4.0 * PI * epsilon.powi(3)),
    }
}

/// Heaviside step: 0 for `w ≤ 0`, 1 otherwise.
pub fn activation(w: f64) -> f64 {
    if w > 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Binary field on a square-cell lattice, stored as the set of samples equal
/// to 1. Sample `(i, j)` sits at the center of its cell.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorField {
    pub spacing: f64,
    pub origin: [f64; 2],
    pub nx: usize,
    pub ny: usize,
    ones: BTreeSet<(usize, usize)>,
}

impl IndicatorField {
    pub fn new(origin: [f64; 2], spacing: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(spacing > 0.0) || nx == 0 || ny == 0 {
            return Err(Error::InvalidInput(format!(
                "lattice needs positive spacing and size, got {spacing} and {nx}×{ny}"
            )));
        }
        Ok(IndicatorField {
            spacing,
            origin,
            nx,
            ny,
            ones: BTreeSet::new(),
        })
    }

    /// Lattice over the grid's domain padded by `pad` on every side, with the
    /// samples inside the eroded elements set to 1.
    pub fn from_eroded(grid: &Grid, eroded: &[usize], spacing: f64, pad: f64) -> Result<Self> {
        if !(pad >= 0.0) {
            return Err(Error::InvalidInput(format!("negative padding {pad}")));
        }
        // Cell boundaries pass through the lower-left corner of the eroded set.
        let anchor = eroded
            .iter()
            .filter(|&&e| e < grid.element_count())
            .map(|&e| {
                let (i, j) = grid.element_ij(e);
                (j, i)
            })
            .min()
            .map_or(grid.origin, |(j, i)| {
                [grid.origin[0] + i as f64 * grid.h, grid.origin[1] + j as f64 * grid.h]
            });
        let start = |axis: usize| anchor[axis] - ((anchor[axis] - grid.origin[axis] + pad) / spacing).ceil() * spacing;
        let origin = [start(0), start(1)];
        let cells = |axis: usize, len: f64| ((grid.origin[axis] + len + pad - origin[axis]) / spacing).ceil() as usize;
        let mut field = IndicatorField::new(origin, spacing, cells(0, grid.width()), cells(1, grid.height()))?;
        for &e in eroded {
            if e >= grid.element_count() {
                return Err(Error::InvalidInput(format!("element {e} outside the grid")));
            }
            let (ei, ej) = grid.element_ij(e);
            let x0 = grid.origin[0] + ei as f64 * grid.h;
            let y0 = grid.origin[1] + ej as f64 * grid.h;
            let (i0, i1) = field.covered(x0, grid.h, 0);
            let (j0, j1) = field.covered(y0, grid.h, 1);
            for j in j0..j1 {
                for i in i0..i1 {
                    field.ones.insert((j, i));
                }
            }
        }
        Ok(field)
    }

    /// Sample indices whose centers fall in `[start, start + len)` along `axis`.
    fn covered(&self, start: f64, len: f64, axis: usize) -> (usize, usize) {
        let n = if axis == 0 { self.nx } else { self.ny };
        let first = |x: f64| ((x - self.origin[axis]) / self.spacing - 0.5).ceil().clamp(0.0, n as f64) as usize;
        (first(start), first(start + len))
    }

    pub fn set(&mut self, i: usize, j: usize) -> Result<()> {
        if i >= self.nx || j >= self.ny {
            return Err(Error::InvalidInput(format!("sample ({i}, {j}) outside {}×{}", self.nx, self.ny)));
        }
        self.ones.insert((j, i));
        Ok(())
    }

    pub fn value(&self, i: usize, j: usize) -> u8 {
        self.ones.contains(&(j, i)) as u8
    }

    /// Number of samples equal to 1.
    pub fn count(&self) -> usize {
        self.ones.len()
    }

    pub fn sample_center(&self, i: usize, j: usize) -> [f64; 2] {
        [
            self.origin[0] + (i as f64 + 0.5) * self.spacing,
            self.origin[1] + (j as f64 + 0.5) * self.spacing,
        ]
    }

    /// Samples equal to 1 as `(i, j)`, row by row.
    pub fn ones(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.ones.iter().map(|&(j, i)| (i, j))
    }

    fn check_resolution(&self, epsilon: f64) -> Result<()> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidInput(format!("epsilon must be positive, got {epsilon}")));
        }
        if self.spacing > MAX_SPACING_FRACTION * epsilon * (1.0 + 1e-12) {
            return Err(Error::InvalidInput(format!(
                "sample spacing {} exceeds ε/8 = {}",
                self.spacing,
                MAX_SPACING_FRACTION * epsilon
            )));
        }
        Ok(())
    }

    /// Offsets `(di, dj)` with center distance below ε, and that distance.
    fn stencil(&self, epsilon: f64) -> Vec<(isize, isize, f64)> {
        let reach = (epsilon / self.spacing).ceil() as isize;
        let mut out = Vec::new();
        for dj in -reach..=reach {
            for di in -reach..=reach {
                let r = offset_distance(di, dj, self.spacing);
                if r < epsilon {
                    out.push((di, dj, r));
                }
            }
        }
        out
    }
}

#[inline]
fn offset_distance(di: isize, dj: isize, spacing: f64) -> f64 {
    spacing * ((di * di + dj * dj) as f64).sqrt()
}

/// Sampled neighborhood area and the fracture energy `Gc/(2ε)·area`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaEstimate {
    pub area: f64,
    pub energy: f64,
    /// Samples in the neighborhood.
    pub marked: usize,
}

/// Fracture energy from the uniform-bump convolution and step activation.
pub fn fracture_energy_ann(indicator: &IndicatorField, epsilon: f64, gc: f64) -> Result<AreaEstimate> {
    fracture_energy_with(
        indicator,
        epsilon,
        gc,
        |r| mollifier_value(r, epsilon, Dimension::Two),
        activation,
    )
}

/// As [`fracture_energy_ann`] with a caller-supplied mollifier (a function of
/// distance, supported in `r < ε`) and activation.
pub fn fracture_energy_with<M, A>(
    indicator: &IndicatorField,
    epsilon: f64,
    gc: f64,
    mollifier: M,
    activation: A,
) -> Result<AreaEstimate>
where
    M: Fn(f64) -> f64,
    A: Fn(f64) -> f64,
{
    indicator.check_resolution(epsilon)?;
    let Some(bbox) = padded_bounds(indicator, epsilon) else {
        return Ok(AreaEstimate {
            area: 0.0,
            energy: 0.0,
            marked: 0,
        });
    };
    let (i0, j0, w, hgt) = bbox;
    let cell = indicator.spacing * indicator.spacing;
    let weights: Vec<(isize, isize, f64)> = indicator
        .stencil(epsilon)
        .into_iter()
        .map(|(di, dj, r)| (di, dj, mollifier(r) * cell))
        .collect();
    let mut conv = vec![0.0; w * hgt];
    for (i, j) in indicator.ones() {
        for &(di, dj, c) in &weights {
            let x = i as isize + di - i0;
            let y = j as isize + dj - j0;
            if x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < hgt {
                conv[y as usize * w + x as usize] += c;
            }
        }
    }
    let active: f64 = conv.iter().map(|&c| activation(c)).sum();
    let area = active * cell;
    Ok(AreaEstimate {
        area,
        energy: gc / (2.0 * epsilon) * area,
        marked: active.round() as usize,
    })
}

/// The same area counted as the samples within distance `< ε` of a set
/// sample, by interval unions row by row. Cost is independent of the disc size.
pub fn neighborhood_area_distance(indicator: &IndicatorField, epsilon: f64, gc: f64) -> Result<AreaEstimate> {
    indicator.check_resolution(epsilon)?;
    let Some((i0, j0, w, hgt)) = padded_bounds(indicator, epsilon) else {
        return Ok(AreaEstimate {
            area: 0.0,
            energy: 0.0,
            marked: 0,
        });
    };
    let reach = (epsilon / indicator.spacing).ceil() as isize;
    // half_width[d]: largest |di| reachable at row offset d, or None.
    let half_width: Vec<Option<isize>> = (0..=reach)
        .map(|dj| (0..=reach).rev().find(|&di| offset_distance(di, dj, indicator.spacing) < epsilon))
        .collect();
    // Runs of consecutive set samples per row.
    let mut rows: Vec<Vec<(isize, isize)>> = vec![Vec::new(); hgt];
    for (i, j) in indicator.ones() {
        let row = &mut rows[(j as isize - j0) as usize];
        let i = i as isize - i0;
        match row.last_mut() {
            Some(run) if run.1 + 1 == i => run.1 = i,
            _ => row.push((i, i)),
        }
    }
    let mut marked = 0usize;
    let mut spans = Vec::new();
    for y in 0..hgt as isize {
        spans.clear();
        for dy in -reach..=reach {
            let src = y + dy;
            if src < 0 || src >= hgt as isize {
                continue;
            }
            if let Some(hw) = half_width[dy.unsigned_abs()] {
                for &(lo, hi) in &rows[src as usize] {
                    spans.push(((lo - hw).max(0), (hi + hw).min(w as isize - 1)));
                }
            }
        }
        spans.sort_unstable();
        let mut end = -1isize;
        for &(lo, hi) in &spans {
            let lo = lo.max(end + 1);
            if hi >= lo {
                marked += (hi - lo + 1) as usize;
                end = hi;
            }
        }
    }
    let area = marked as f64 * indicator.spacing * indicator.spacing;
    Ok(AreaEstimate {
        area,
        energy: gc / (2.0 * epsilon) * area,
        marked,
    })
}

/// Bounding box of the set samples grown by the stencil reach and clipped to
/// the lattice: `(i0, j0, width, height)`.
fn padded_bounds(indicator: &IndicatorField, epsilon: f64) -> Option<(isize, isize, usize, usize)> {
    let reach = (epsilon / indicator.spacing).ceil() as isize;
    let mut it = indicator.ones();
    let (fi, fj) = it.next()?;
    let (mut imin, mut imax, mut jmin, mut jmax) = (fi, fi, fj, fj);
    for (i, j) in it {
        imin = imin.min(i);
        imax = imax.max(i);
        jmin = jmin.min(j);
        jmax = jmax.max(j);
    }
    let i0 = (imin as isize - reach).max(0);
    let j0 = (jmin as isize - reach).max(0);
    let i1 = (imax as isize + reach).min(indicator.nx as isize - 1);
    let j1 = (jmax as isize + reach).min(indicator.ny as isize - 1);
    Some((i0, j0, (i1 - i0 + 1) as usize, (j1 - j0 + 1) as usize))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mollifier_values() {
        let e = 0.3;
        assert_eq!(mollifier_value(e / 2.0, e, Dimension::Three), 3.0 / (4.0 * PI * e.powi(3)));
        assert_eq!(mollifier_value(e, e, Dimension::Two), 0.0);
        assert_eq!(mollifier_value(2.0 * e, e, Dimension::Three), 0.0);
    }

    #[test]
    fn mollifier_normalization() {
        // Radial Gauss–Legendre over [0, ε].
        let e = 0.7;
        let rule = crate::fem::GaussRule::new(10);
        let mut two = 0.0;
        let mut three = 0.0;
        for (&s, &w) in rule.points.iter().zip(&rule.weights) {
            let r = 0.5 * e * (1.0 + s);
            let dr = 0.5 * e * w;
            two += 2.0 * PI * r * mollifier_value(r, e, Dimension::Two) * dr;
            three += 4.0 * PI * r * r * mollifier_value(r, e, Dimension::Three) * dr;
        }
        assert!((two - 1.0).abs() < 1e-10 && (three - 1.0).abs() < 1e-10);
    }

    #[test]
    fn activation_values() {
        assert_eq!(activation(0.0), 0.0);
        assert_eq!(activation(-1.0), 0.0);
        assert_eq!(activation(1e-300), 1.0);
    }

    #[test]
    fn empty_and_coarse() {
        let f = IndicatorField::new([0.0, 0.0], 0.01, 100, 100).unwrap();
        assert_eq!(fracture_energy_ann(&f, 0.1, 1.0).unwrap().area, 0.0);
        assert!(fracture_energy_ann(&f, 0.05, 1.0).is_err());
        assert!(neighborhood_area_distance(&f, 0.05, 1.0).is_err());
    }

    #[test]
    fn single_sample_approaches_disc() {
        let e = 0.1;
        let mut last = f64::INFINITY;
        for k in [16, 64, 256] {
            let s = e / k as f64;
            let n = 2 * k + 3;
            let mut f = IndicatorField::new([0.0, 0.0], s, n, n).unwrap();
            f.set(k + 1, k + 1).unwrap();
            let a = neighborhood_area_distance(&f, e, 1.0).unwrap().area;
            let err = (a - PI * e * e).abs();
            assert!(err < last);
            last = err;
        }
        assert!(last < 1e-3 * PI * e * e);
    }
}
