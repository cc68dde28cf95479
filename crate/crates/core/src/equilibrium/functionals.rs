use crate::error::{Error, Result};
use crate::potential::{reference_density, DensityOnGrid, PotentialSpec};

use super::kernel::LogKernel;

fn entropy_term(rho: f64) -> f64 {
    if rho > 0.0 {
        rho * rho.ln()
    } else {
        0.0
    }
}

/// Evaluates `H_c` repeatedly on one grid, caching `V` at the nodes, the
/// kernel and `log Z`.
#[derive(Debug, Clone)]
pub struct FreeEnergy {
    kernel: LogKernel,
    potential_nodes: Vec<f64>,
    log_z: f64,
}

impl FreeEnergy {
    pub fn new(v: &PotentialSpec, kernel: LogKernel) -> Result<Self> {
        let grid = *kernel.grid();
        let z = reference_density(v, &grid)?.z;
        Ok(Self {
            potential_nodes: grid.nodes().into_iter().map(|x| v.value(x)).collect(),
            log_z: z.ln(),
            kernel,
        })
    }

    pub fn kernel(&self) -> &LogKernel {
        &self.kernel
    }

    pub fn potential_nodes(&self) -> &[f64] {
        &self.potential_nodes
    }

    /// `H_c(rho)` given a precomputed `U[rho]`.
    pub fn evaluate_with_potential(&self, rho: &[f64], log_potential: &[f64], c: f64) -> f64 {
        let grid = self.kernel.grid();
        let integrand: Vec<f64> = rho
            .iter()
            .zip(&self.potential_nodes)
            .zip(log_potential)
            .map(|((&r, &v), &u)| entropy_term(r) + v * r - c * r * u)
            .collect();
        grid.trapezoid(&integrand) + self.log_z
    }

    pub fn evaluate(&self, rho: &[f64], c: f64) -> f64 {
        let u = self.kernel.apply(rho);
        self.evaluate_with_potential(rho, &u, c)
    }
}

/// `H_c(rho) = ∫ rho log rho + ∫ V rho - c ∬ log|x-y| rho rho + log Z`, with
/// the double integral taken as `∫ rho U[rho]`.
pub fn free_energy(rho: &DensityOnGrid, c: f64, v: &PotentialSpec) -> Result<f64> {
    let functional = FreeEnergy::new(v, LogKernel::new(rho.grid()))?;
    Ok(functional.evaluate(rho.values(), c))
}

/// Kullback-Leibler divergence `∫ rho log(rho / alpha)`.
pub fn relative_entropy(rho: &DensityOnGrid, alpha: &DensityOnGrid) -> Result<f64> {
    if rho.grid() != alpha.grid() {
        return Err(Error::InvalidArgument(
            "relative entropy needs both densities on the same grid".into(),
        ));
    }
    let grid = rho.grid();
    let mut integrand = Vec::with_capacity(grid.len());
    for (i, (&r, &a)) in rho.values().iter().zip(alpha.values()).enumerate() {
        if r == 0.0 {
            integrand.push(0.0);
        } else if a == 0.0 {
            return Err(Error::DivergentEntropy {
                x: grid.node(i),
                rho: r,
            });
        } else {
            integrand.push(r * (r / a).ln());
        }
    }
    Ok(grid.trapezoid(&integrand))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Grid;

    fn gaussian_alpha() -> DensityOnGrid {
        let grid = Grid::new(-10.0, 10.0, 2001).unwrap();
        reference_density(&PotentialSpec::gaussian(), &grid)
            .unwrap()
            .density
    }

    #[test]
    fn free_energy_of_alpha_without_interaction_vanishes() {
        let alpha = gaussian_alpha();
        let h = free_energy(&alpha, 0.0, &PotentialSpec::gaussian()).unwrap();
        assert!(h.abs() < 1e-12, "H_0(alpha) = {h}");
    }

    #[test]
    fn free_energy_of_alpha_is_gaussian_log_energy() {
        // -E log|X - Y| for independent standard normals is gamma/2.
        let alpha = gaussian_alpha();
        let h = free_energy(&alpha, 1.0, &PotentialSpec::gaussian()).unwrap();
        let euler_gamma = 0.577_215_664_901_532_9;
        assert!((h - euler_gamma / 2.0).abs() < 1e-4, "H_1(alpha) = {h}");
    }

    #[test]
    fn relative_entropy_values() {
        let alpha = gaussian_alpha();
        assert!(relative_entropy(&alpha, &alpha).unwrap().abs() < 1e-15);
        let wide = DensityOnGrid::from_fn(*alpha.grid(), |x| (-x * x / 4.0).exp()).unwrap();
        let kl = relative_entropy(&wide, &alpha).unwrap();
        assert!((kl - (1.0 - 2f64.ln()) / 2.0).abs() < 1e-8, "KL = {kl}");
        let shifted = DensityOnGrid::from_fn(*alpha.grid(), |x| (-(x - 0.5f64).powi(2) / 2.0).exp()).unwrap();
        assert!(relative_entropy(&shifted, &alpha).unwrap() > 0.0);
    }

    #[test]
    fn relative_entropy_diverges_off_support() {
        let grid = Grid::new(-1.0, 1.0, 5).unwrap();
        let rho = DensityOnGrid::normalized(grid, vec![1.0; 5]).unwrap();
        let alpha = DensityOnGrid::normalized(grid, vec![1.0, 1.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(matches!(
            relative_entropy(&rho, &alpha),
            Err(Error::DivergentEntropy { .. })
        ));
        // the other way round is finite
        assert!(relative_entropy(&alpha, &rho).unwrap().is_finite());
    }
}
