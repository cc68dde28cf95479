//! Finite-N samples of the beta ensemble
//! `p(λ) ∝ |Δ(λ)|^β exp(-Σ V(λ_i))`.
//!
//! Three routes are provided: single-site Metropolis for any potential
//! ([`mcmc_sample`]), the exact tridiagonal matrix model for `V = x²/2`
//! ([`tridiagonal_gaussian_sample`]), and nested quadrature of the marginals
//! for `N <= 3` ([`BruteForceOracle`]).

mod brute;
mod container;
mod estimators;
mod mcmc;
mod tridiag;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use brute::{brute_force_marginal, BruteForceOracle};
pub use container::{decode_batch, encode_batch, read_batch, write_batch, write_batch_csv, BATCH_MAGIC};
pub use estimators::{
    cell_masses, empirical_marginal, estimate_exp_log_potential, estimate_partition_ratio, exp_log_potential_samples,
    marginal_histogram, MarginalHistogram,
};
pub use mcmc::{mcmc_sample, proposal_log_ratio};
pub use tridiag::{symmetric_tridiagonal_eigenvalues, tridiagonal_gaussian_sample, tridiagonal_sample};

use crate::error::{Error, Result};
use crate::potential::PotentialSpec;

/// Acceptance rates outside this band after burn-in raise a warning.
pub const ACCEPTANCE_BAND: (f64, f64) = (0.05, 0.9);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McmcSettings {
    pub step_size: f64,
    pub sweeps_burnin: usize,
    pub sweeps_between: usize,
    pub target_acceptance: f64,
    pub adapt: bool,
    /// Independent chains run in parallel; samples are split evenly between
    /// them and ordered by chain index.
    pub chains: usize,
}

impl Default for McmcSettings {
    fn default() -> Self {
        Self {
            step_size: 1.0,
            sweeps_burnin: 2000,
            sweeps_between: 10,
            target_acceptance: 0.35,
            adapt: true,
            chains: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub n_particles: usize,
    pub beta: f64,
    pub potential: PotentialSpec,
    #[serde(default)]
    pub mcmc: McmcSettings,
    pub seed: u64,
}

impl EnsembleConfig {
    pub fn new(n_particles: usize, beta: f64, potential: PotentialSpec, seed: u64) -> Result<Self> {
        let config = Self {
            n_particles,
            beta,
            potential,
            mcmc: McmcSettings::default(),
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    /// `beta = 2c / N`.
    pub fn high_temperature(n_particles: usize, c: f64, potential: PotentialSpec, seed: u64) -> Result<Self> {
        if n_particles == 0 {
            return Err(Error::InvalidArgument("need at least one particle".into()));
        }
        Self::new(n_particles, 2.0 * c / n_particles as f64, potential, seed)
    }

    pub fn with_mcmc(mut self, mcmc: McmcSettings) -> Self {
        self.mcmc = mcmc;
        self
    }

    /// Effective interaction strength `c = beta N / 2`.
    pub fn coupling(&self) -> f64 {
        0.5 * self.beta * self.n_particles as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_particles == 0 {
            return Err(Error::InvalidArgument("need at least one particle".into()));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidArgument(format!("beta must be >= 0, got {}", self.beta)));
        }
        let m = &self.mcmc;
        if !(m.step_size > 0.0 && m.step_size.is_finite()) {
            return Err(Error::InvalidArgument(format!("step_size must be > 0, got {}", m.step_size)));
        }
        if m.sweeps_between == 0 || m.chains == 0 {
            return Err(Error::InvalidArgument("sweeps_between and chains must be >= 1".into()));
        }
        if !(m.target_acceptance > 0.0 && m.target_acceptance < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "target_acceptance must lie in (0,1), got {}",
                m.target_acceptance
            )));
        }
        self.potential.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Mcmc,
    Tridiagonal,
    Brute,
    Synthetic,
}

/// One configuration `λ_1 <= ... <= λ_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    lambdas: Vec<f64>,
    pub provenance: Provenance,
}

impl Sample {
    pub fn new(mut lambdas: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if lambdas.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("sample coordinates must be finite".into()));
        }
        lambdas.sort_by(f64::total_cmp);
        Ok(Self { lambdas, provenance })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainDiagnostics {
    pub acceptance_rate: f64,
    pub final_step_size: f64,
    pub sweeps_total: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl ChainDiagnostics {
    /// Diagnostics of a batch that did not come from a Markov chain.
    pub fn exact() -> Self {
        Self {
            acceptance_rate: 1.0,
            final_step_size: 0.0,
            sweeps_total: 0,
            warning: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub config: EnsembleConfig,
    pub samples: Vec<Sample>,
    pub diagnostics: ChainDiagnostics,
}

impl SampleBatch {
    pub fn new(config: EnsembleConfig, samples: Vec<Sample>, diagnostics: ChainDiagnostics) -> Result<Self> {
        if let Some(bad) = samples.iter().find(|s| s.len() != config.n_particles) {
            return Err(Error::InvalidArgument(format!(
                "sample of length {} in a batch of N = {}",
                bad.len(),
                config.n_particles
            )));
        }
        if !(0.0..=1.0).contains(&diagnostics.acceptance_rate) {
            return Err(Error::InvalidArgument("acceptance rate outside [0,1]".into()));
        }
        Ok(Self {
            config,
            samples,
            diagnostics,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn n_particles(&self) -> usize {
        self.config.n_particles
    }

    /// All coordinates of all samples, in sample order.
    pub fn pooled(&self) -> Vec<f64> {
        self.samples.iter().flat_map(|s| s.lambdas().iter().copied()).collect()
    }

    pub fn provenance(&self) -> Option<Provenance> {
        self.samples.first().map(|s| s.provenance)
    }
}

/// `β Σ_{i<j} log|λ_j - λ_i| - Σ_i V(λ_i)`; `-inf` when two coordinates
/// coincide.
pub fn log_density_unnormalized(config: &EnsembleConfig, lambdas: &[f64]) -> f64 {
    let mut interaction = 0.0;
    for (i, a) in lambdas.iter().enumerate() {
        for b in &lambdas[i + 1..] {
            let d = (a - b).abs();
            if d == 0.0 {
                return f64::NEG_INFINITY;
            }
            interaction += d.ln();
        }
    }
    let confinement: f64 = lambdas.iter().map(|x| config.potential.value(*x)).sum();
    let interaction = if config.beta == 0.0 { 0.0 } else { config.beta * interaction };
    interaction - confinement
}

/// Generator for stream `index` of `seed`; every replica and chain draws
/// from its own stream so results do not depend on scheduling.
pub(crate) fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_density_examples() {
        let g = PotentialSpec::gaussian();
        let one = EnsembleConfig::new(1, 1.0, g.clone(), 0).unwrap();
        assert_eq!(log_density_unnormalized(&one, &[0.0]), 0.0);
        let two = EnsembleConfig::new(2, 1.0, g.clone(), 0).unwrap();
        assert!((log_density_unnormalized(&two, &[-1.0, 1.0]) - (2f64.ln() - 1.0)).abs() < 1e-15);
        for beta in [0.0, 0.3, 2.0] {
            let cfg = EnsembleConfig::new(2, beta, g.clone(), 0).unwrap();
            assert_eq!(log_density_unnormalized(&cfg, &[0.7, 0.7]), f64::NEG_INFINITY);
        }
    }

    #[test]
    fn config_validation() {
        let g = PotentialSpec::gaussian();
        assert!(EnsembleConfig::new(0, 1.0, g.clone(), 0).is_err());
        assert!(EnsembleConfig::new(3, -1.0, g.clone(), 0).is_err());
        let mut cfg = EnsembleConfig::high_temperature(100, 1.0, g, 0).unwrap();
        assert!((cfg.beta - 0.02).abs() < 1e-15);
        assert!((cfg.coupling() - 1.0).abs() < 1e-15);
        cfg.mcmc.step_size = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn samples_are_sorted_and_batches_checked() {
        let s = Sample::new(vec![0.3, -1.0, 0.1], Provenance::Brute).unwrap();
        assert_eq!(s.lambdas(), &[-1.0, 0.1, 0.3]);
        assert!(Sample::new(vec![f64::NAN], Provenance::Brute).is_err());
        let cfg = EnsembleConfig::new(2, 1.0, PotentialSpec::gaussian(), 0).unwrap();
        assert!(SampleBatch::new(cfg, vec![s], ChainDiagnostics::exact()).is_err());
    }
}
