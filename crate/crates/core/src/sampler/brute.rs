use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::potential::{choose_truncation, Grid, PotentialSpec};

const TRUNCATION_EPS: f64 = 1e-12;

/// Marginals of the ensemble for `N <= 3` by nested trapezoid sums over a
/// uniform grid. The normalizer `Z_{β,N}` is computed by the same rule, so
/// the first marginal integrates to one on the grid up to rounding.
#[derive(Debug, Clone)]
pub struct BruteForceOracle {
    n: usize,
    beta: f64,
    potential: PotentialSpec,
    grid: Grid,
    nodes: Vec<f64>,
    /// trapezoid weight times `exp(-V)` at each node
    mass: Vec<f64>,
    /// `|k h|^β` for node offsets `k`
    power: Vec<f64>,
    z: f64,
    z_lower: f64,
}

fn default_spacing(n: usize) -> f64 {
    if n == 2 {
        0.02
    } else {
        0.05
    }
}

fn pow_beta(d: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        1.0
    } else {
        d.abs().powf(beta)
    }
}

impl BruteForceOracle {
    pub fn new(n: usize, beta: f64, v: &PotentialSpec) -> Result<Self> {
        Self::with_spacing(n, beta, v, default_spacing(n))
    }

    pub fn with_spacing(n: usize, beta: f64, v: &PotentialSpec, spacing: f64) -> Result<Self> {
        if !(2..=3).contains(&n) {
            return Err(Error::Unsupported(format!(
                "brute-force marginals are limited to N in {{2, 3}}, got {n}"
            )));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidArgument(format!("beta must be >= 0, got {beta}")));
        }
        v.validate()?;
        let kappa = beta * (n - 1) as f64 + 0.5;
        let (lo, hi) = choose_truncation(v, kappa, TRUNCATION_EPS)?;
        let grid = Grid::with_spacing(lo, hi, spacing)?;
        let nodes = grid.nodes();
        let mass: Vec<f64> = nodes
            .iter()
            .enumerate()
            .map(|(i, x)| grid.weight(i) * (-v.value(*x)).exp())
            .collect();
        let h = grid.spacing();
        let power: Vec<f64> = (0..nodes.len()).map(|k| pow_beta(k as f64 * h, beta)).collect();
        let mut oracle = Self {
            n,
            beta,
            potential: v.clone(),
            grid,
            nodes,
            mass,
            power,
            z: f64::NAN,
            z_lower: f64::NAN,
        };
        oracle.z = oracle.grid_partition(n);
        oracle.z_lower = oracle.grid_partition(n - 1);
        Ok(oracle)
    }

    fn pair(&self, i: usize, j: usize) -> f64 {
        self.power[i.abs_diff(j)]
    }

    fn grid_partition(&self, particles: usize) -> f64 {
        let len = self.nodes.len();
        match particles {
            1 => self.mass.iter().sum(),
            2 => (0..len)
                .into_par_iter()
                .map(|i| self.mass[i] * (0..len).map(|j| self.mass[j] * self.pair(i, j)).sum::<f64>())
                .collect::<Vec<_>>()
                .iter()
                .sum(),
            _ => (0..len)
                .into_par_iter()
                .map(|i| {
                    let mut acc = 0.0;
                    for j in 0..len {
                        let outer = self.mass[j] * self.pair(i, j);
                        let inner: f64 = (0..len).map(|k| self.mass[k] * self.pair(i, k) * self.pair(j, k)).sum();
                        acc += outer * inner;
                    }
                    self.mass[i] * acc
                })
                .collect::<Vec<_>>()
                .iter()
                .sum(),
        }
    }

    pub fn n_particles(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `Z_{β,N}` on the oracle grid.
    pub fn partition_function(&self) -> f64 {
        self.z
    }

    /// `Z_{β,N} / Z_{β,N-1}` with both normalizers on the oracle grid.
    pub fn partition_ratio(&self) -> f64 {
        self.z / self.z_lower
    }

    /// Weights `mass_j |x - y_j|^β` over the grid.
    fn tilted(&self, x: f64) -> Vec<f64> {
        self.nodes
            .iter()
            .zip(&self.mass)
            .map(|(y, m)| m * pow_beta(x - y, self.beta))
            .collect()
    }

    /// One-point marginal `ρ_N^{(1)}(x)`.
    pub fn marginal1(&self, x: f64) -> f64 {
        let a = self.tilted(x);
        let inner = match self.n {
            2 => a.iter().sum::<f64>(),
            _ => (0..a.len())
                .map(|j| a[j] * (0..a.len()).map(|k| a[k] * self.pair(j, k)).sum::<f64>())
                .sum(),
        };
        (-self.potential.value(x)).exp() * inner / self.z
    }

    /// Two-point marginal `ρ_N^{(2)}(x, y)`.
    pub fn marginal2(&self, x: f64, y: f64) -> f64 {
        let base = (-self.potential.value(x) - self.potential.value(y)).exp() * pow_beta(x - y, self.beta);
        let inner = match self.n {
            2 => 1.0,
            _ => self
                .nodes
                .iter()
                .zip(&self.mass)
                .map(|(w, m)| m * pow_beta(x - w, self.beta) * pow_beta(y - w, self.beta))
                .sum(),
        };
        base * inner / self.z
    }

    /// `ρ_N^{(k)}` at a point of `R^k`; `k = N` is the normalized joint
    /// density.
    pub fn marginal(&self, point: &[f64]) -> Result<f64> {
        if point.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("marginal point must be finite".into()));
        }
        match point.len() {
            1 => Ok(self.marginal1(point[0])),
            2 => Ok(self.marginal2(point[0], point[1])),
            3 if self.n == 3 => {
                let mut value: f64 = point.iter().map(|x| (-self.potential.value(*x)).exp()).product();
                for i in 0..3 {
                    for j in i + 1..3 {
                        value *= pow_beta(point[i] - point[j], self.beta);
                    }
                }
                Ok(value / self.z)
            }
            k => Err(Error::InvalidArgument(format!("marginal order {k} not available for N = {}", self.n))),
        }
    }
}

/// Evaluates `ρ_N^{(k)}` at each point (each of length `k`) for `N <= 3`.
pub fn brute_force_marginal(
    n: usize,
    beta: f64,
    v: &PotentialSpec,
    k: usize,
    points: &[Vec<f64>],
) -> Result<Vec<f64>> {
    if !(1..=2).contains(&k) && k != n {
        return Err(Error::InvalidArgument(format!("marginal order must be 1, 2 or N, got {k}")));
    }
    let oracle = BruteForceOracle::new(n, beta, v)?;
    points
        .iter()
        .map(|p| {
            if p.len() != k {
                return Err(Error::InvalidArgument(format!("point {p:?} does not have {k} coordinates")));
            }
            oracle.marginal(p)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn n_two_gaussian_closed_forms() {
        // beta = 2: Z_{2,2} = (2 pi) * Γ(2)Γ(3)/(Γ(2)Γ(2)) = 4 pi, and
        // ρ^{(1)}(x) = e^{-x²/2} (x² + 1) / (2 sqrt(2 pi))
        let oracle = BruteForceOracle::new(2, 2.0, &PotentialSpec::gaussian()).unwrap();
        assert!((oracle.partition_function() - 4.0 * PI).abs() < 1e-9);
        assert!((oracle.partition_ratio() - 4.0 * PI / (2.0 * PI).sqrt()).abs() < 1e-9);
        for x in [0.0, 0.7, -2.0] {
            let exact = (-x * x / 2.0f64).exp() * (x * x + 1.0) / (2.0 * (2.0 * PI).sqrt());
            assert!((oracle.marginal1(x) - exact).abs() < 1e-9);
        }
    }

    #[test]
    fn marginal_normalization_under_same_rule() {
        for (n, beta) in [(2, 1.0), (3, 0.5), (3, 1.0)] {
            let oracle = BruteForceOracle::new(n, beta, &PotentialSpec::gaussian()).unwrap();
            let grid = *oracle.grid();
            let values: Vec<f64> = grid.nodes().iter().map(|x| oracle.marginal1(*x)).collect();
            let total = grid.trapezoid(&values);
            assert!((total - 1.0).abs() < 1e-8, "N = {n}: {total}");
        }
    }

    #[test]
    fn top_order_is_the_joint_density_and_beta_zero_factorizes() {
        let v = PotentialSpec::gaussian();
        let oracle = BruteForceOracle::new(2, 1.0, &v).unwrap();
        let joint = oracle.marginal(&[0.3, -0.4]).unwrap();
        let direct = (-(0.09 + 0.16) / 2.0f64).exp() * 0.7 / oracle.partition_function();
        assert!((joint - direct).abs() < 1e-15);
        let free = BruteForceOracle::new(3, 0.0, &v).unwrap();
        let phi = |x: f64| (-x * x / 2.0).exp() / (2.0 * PI).sqrt();
        let got = free.marginal(&[0.1, 1.2, -0.5]).unwrap();
        assert!((got - phi(0.1) * phi(1.2) * phi(-0.5)).abs() < 1e-9);
        assert!((free.marginal2(0.2, 0.9) - phi(0.2) * phi(0.9)).abs() < 1e-9);
    }

    #[test]
    fn large_n_rejected() {
        let v = PotentialSpec::gaussian();
        assert!(matches!(BruteForceOracle::new(4, 1.0, &v), Err(Error::Unsupported(_))));
        assert!(brute_force_marginal(2, 1.0, &v, 1, &[vec![0.0, 1.0]]).is_err());
        let vals = brute_force_marginal(2, 1.0, &v, 2, &[vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(vals[0] > 0.0);
        assert_eq!(vals[1], 0.0);
    }
}
