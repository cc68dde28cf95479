//! Equilibrium density `rho_c` of the high-temperature log-gas.
//!
//! `rho_c` is the unique minimizer of
//! `H_c(rho) = ∫ rho log rho + ∫ V rho - c ∬ log|x-y| rho(x) rho(y) + log Z`
//! and satisfies the Gibbs fixed-point equation
//! `rho_c = exp(-V + 2c U[rho_c]) / Z_c` with `U[rho](x) = ∫ log|x-y| rho(y) dy`.
//!
//! [`solve_equilibrium`] runs a damped Picard iteration on that equation
//! starting from `alpha`. A step that would raise `H_c`, or fail to shrink the
//! fixed-point defect, is retried with half the damping, so accepted iterates
//! have non-increasing free energy.

mod functionals;
mod kernel;
mod stieltjes;

use serde::{Deserialize, Serialize};

pub use functionals::{free_energy, relative_entropy, FreeEnergy};
pub use kernel::{log_kernel_apply, log_potential_at, LogKernel};
pub use stieltjes::{stieltjes_derivative, stieltjes_residual, stieltjes_transform};

use crate::error::{Error, Result};
use crate::potential::{choose_truncation, reference_density, DensityOnGrid, Grid, PotentialSpec};

/// Added to `2c` when sizing envelopes and truncation domains.
pub const KAPPA_MARGIN: f64 = 0.5;
/// Envelope mass allowed outside the working domain.
pub const TRUNCATION_EPS: f64 = 1e-10;
/// Default node spacing of solver grids.
pub const DEFAULT_SPACING: f64 = 0.02;

/// Slack on the free-energy comparison below which a step is not considered
/// an increase (rounding of `H_c` near the optimum).
const DESCENT_SLACK: f64 = 1e-13;
const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10_000,
            damping: 0.5,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tol must be > 0, got {}", self.tol)));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct EquilibriumSolution {
    pub c: f64,
    pub rho: DensityOnGrid,
    /// `U_c` at the grid nodes.
    pub log_potential: Vec<f64>,
    pub z_c: f64,
    pub iterations: usize,
    /// `sup_i |rho_c(x_i) - exp(-V(x_i) + 2c U_c(x_i)) / Z_c|`.
    pub residual: f64,
    pub free_energy: f64,
    /// `H_c` of every accepted iterate, starting with `alpha`.
    pub free_energy_history: Vec<f64>,
    pub residual_history: Vec<f64>,
}

impl EquilibriumSolution {
    pub fn grid(&self) -> &Grid {
        self.rho.grid()
    }

    /// `rho_c(x)` by linear interpolation.
    pub fn density_at(&self, x: f64) -> f64 {
        self.rho.value_at(x)
    }

    /// `U_c(x)` at any point, including outside the grid.
    pub fn log_potential_at(&self, x: f64) -> f64 {
        log_potential_at(&self.rho, x)
    }
}

/// Working domain for coupling `c`: the envelope with `kappa = 2c + margin`
/// has mass below [`TRUNCATION_EPS`] outside it.
pub fn default_grid(v: &PotentialSpec, c: f64) -> Result<Grid> {
    let (lo, hi) = choose_truncation(v, 2.0 * c + KAPPA_MARGIN, TRUNCATION_EPS)?;
    Grid::with_spacing(lo, hi, DEFAULT_SPACING)
}

/// Normalized `exp(-V + 2c U)` and its trapezoid normalizer, computed with
/// the maximum exponent subtracted.
fn gibbs_update(grid: &Grid, potential: &[f64], log_potential: &[f64], c: f64) -> Result<(Vec<f64>, f64)> {
    let exponent: Vec<f64> = potential
        .iter()
        .zip(log_potential)
        .map(|(v, u)| -v + 2.0 * c * u)
        .collect();
    let top = exponent.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() || exponent.iter().any(|e| e.is_nan()) {
        return Err(Error::InadequateDomain(
            "non-finite Gibbs exponent; widen or refine the truncation domain".into(),
        ));
    }
    let mut values: Vec<f64> = exponent.iter().map(|e| (e - top).exp()).collect();
    let mass = grid.trapezoid(&values);
    values.iter_mut().for_each(|v| *v /= mass);
    Ok((values, mass.ln() + top))
}

/// One undamped Gibbs update `rho -> exp(-V + 2c U[rho]) / Z_c`.
pub fn fixed_point_step(rho: &DensityOnGrid, c: f64, v: &PotentialSpec) -> Result<(DensityOnGrid, f64)> {
    if !(c >= 0.0) {
        return Err(Error::InvalidArgument(format!("c must be >= 0, got {c}")));
    }
    let grid = *rho.grid();
    let potential: Vec<f64> = grid.nodes().into_iter().map(|x| v.value(x)).collect();
    let u = log_kernel_apply(rho);
    let (values, log_z) = gibbs_update(&grid, &potential, &u, c)?;
    Ok((DensityOnGrid::new(grid, values)?, log_z.exp()))
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn solve_equilibrium(v: &PotentialSpec, c: f64, grid: &Grid, cfg: &SolverConfig) -> Result<EquilibriumSolution> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!("c must be >= 0, got {c}")));
    }
    cfg.validate()?;
    v.check_admissible(grid.lo(), grid.hi())?;

    let functional = FreeEnergy::new(v, LogKernel::new(grid))?;
    let mut rho = reference_density(v, grid)?.density.into_values();
    let mut u = functional.kernel().apply(&rho);
    let mut energy = functional.evaluate_with_potential(&rho, &u, c);
    let mut free_energy_history = vec![energy];
    let mut residual_history = Vec::new();
    let mut iterations = 0;

    loop {
        let (update, log_z) = gibbs_update(grid, functional.potential_nodes(), &u, c)?;
        let residual = sup_diff(&update, &rho);
        residual_history.push(residual);
        if residual <= cfg.tol {
            let rho = DensityOnGrid::new(*grid, rho)?;
            if let Some(i) = rho.values().iter().position(|r| !(*r > 0.0)) {
                return Err(Error::InadequateDomain(format!(
                    "equilibrium density underflows at x = {}",
                    grid.node(i)
                )));
            }
            return Ok(EquilibriumSolution {
                c,
                rho,
                log_potential: u,
                z_c: log_z.exp(),
                iterations,
                residual,
                free_energy: energy,
                free_energy_history,
                residual_history,
            });
        }
        if iterations >= cfg.max_iter {
            return Err(Error::NonConvergence {
                iterations,
                residual,
                residual_history,
            });
        }

        let mut theta = cfg.damping;
        let mut halvings = 0;
        let (candidate, candidate_u, candidate_energy) = loop {
            let candidate: Vec<f64> = rho
                .iter()
                .zip(&update)
                .map(|(r, t)| (1.0 - theta) * r + theta * t)
                .collect();
            let candidate_u = functional.kernel().apply(&candidate);
            let candidate_energy = functional.evaluate_with_potential(&candidate, &candidate_u, c);
            let increase = candidate_energy - energy;
            let descends = increase <= DESCENT_SLACK * (1.0 + energy.abs());
            // Near the optimum H_c changes drop below rounding; the defect
            // must then shrink instead.
            let contracts = || -> Result<bool> {
                let (next, _) = gibbs_update(grid, functional.potential_nodes(), &candidate_u, c)?;
                Ok(sup_diff(&next, &candidate) < residual)
            };
            if halvings == MAX_HALVINGS || (descends && contracts()?) {
                break (candidate, candidate_u, candidate_energy);
            }
            theta *= 0.5;
            halvings += 1;
        };
        rho = candidate;
        u = candidate_u;
        energy = candidate_energy;
        free_energy_history.push(energy);
        iterations += 1;
    }
}
