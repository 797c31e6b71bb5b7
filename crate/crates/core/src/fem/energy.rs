use crate::analytic::{strain_energy_density, StrainState};
use crate::error::{Error, Result};
use crate::fem::assembly::StiffnessMultiplierField;
use crate::fem::element::ElasticKernel;
use crate::fem::solve::VectorField;
use crate::fem::sparse::dot;
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EnergyBreakdown {
    pub elastic: f64,
    pub inelastic: f64,
    pub load_work: f64,
    pub potential: f64,
}

impl EnergyBreakdown {
    pub fn new(elastic: f64, inelastic: f64, load_work: f64) -> Self {
        EnergyBreakdown {
            elastic,
            inelastic,
            load_work,
            potential: elastic + inelastic - load_work,
        }
    }

    pub fn with_inelastic(&self, inelastic: f64) -> Self {
        EnergyBreakdown::new(self.elastic, inelastic, self.load_work)
    }
}

/// Elastic energy by element quadrature and load work `fᵀu`; `inelastic` is 0.
pub fn energies(
    grid: &Grid,
    kernel: &ElasticKernel,
    u: &VectorField,
    multipliers: &StiffnessMultiplierField,
    loads: &[f64],
) -> Result<EnergyBreakdown> {
    multipliers.check(grid, kernel.quad.order)?;
    if u.values.len() != 2 * grid.node_count() || loads.len() != u.values.len() {
        return Err(Error::Dimension {
            expected: 2 * grid.node_count(),
            actual: u.values.len().max(loads.len()),
        });
    }
    let elastic = (0..grid.element_count())
        .filter(|&e| !multipliers.is_void(e))
        .map(|e| kernel.energy(grid.h, &u.element(grid.element_nodes(e)), multipliers.element(e)))
        .sum();
    Ok(EnergyBreakdown::new(elastic, 0.0, dot(loads, &u.values)))
}

/// Strain at every quadrature point, element-major.
pub fn quadrature_strains(grid: &Grid, kernel: &ElasticKernel, u: &VectorField) -> Vec<StrainState> {
    let nq = kernel.quad.len();
    let mut out = Vec::with_capacity(grid.element_count() * nq);
    for e in 0..grid.element_count() {
        let ue = u.element(grid.element_nodes(e));
        out.extend((0..nq).map(|q| kernel.quad.strain(q, grid.h, &ue)));
    }
    out
}

/// Unit-multiplier energy density `W(ε(u))` at every quadrature point.
pub fn quadrature_energy_densities(grid: &Grid, kernel: &ElasticKernel, u: &VectorField) -> Vec<f64> {
    quadrature_strains(grid, kernel, u)
        .into_iter()
        .map(|e| strain_energy_density(e, &kernel.material))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::MaterialParams;
    use crate::grid::build_grid;

    #[test]
    fn zero_displacement_has_zero_energy() {
        let g = build_grid(1.0, 0.25).unwrap();
        let kern = ElasticKernel::new(3, MaterialParams::new(1.0, 0.3, 1.0).unwrap());
        let u = VectorField::zeros(&g);
        let e = energies(&g, &kern, &u, &StiffnessMultiplierField::uniform(&g, 1.0), &vec![1.0; u.values.len()]).unwrap();
        assert_eq!(e, EnergyBreakdown::default());
    }

    #[test]
    fn potential_identity() {
        let e = EnergyBreakdown::new(2.0, 0.5, 3.0).with_inelastic(0.25);
        assert_eq!(e.potential, 2.0 + 0.25 - 3.0);
    }
}
