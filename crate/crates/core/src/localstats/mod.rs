//! Local statistics of a batch around a reference energy `E`: the rescaled
//! points `N(λ_i - E)` inside `[-W, W]`, count and spacing tests against a
//! homogeneous Poisson process of intensity `ρ_c(E)`, correlation-function
//! estimates, and a two-window independence test.

mod correlation;
mod counting;
mod independence;
mod spacing;
mod synthetic;

use serde::{Deserialize, Serialize};

pub use correlation::{
    correlation_estimate, pair_factorization, CorrelationCell, CorrelationEstimate, FactorizationCell, DEFAULT_BINS,
    FACTORIZATION_BAND,
};
pub use counting::{
    counting_report, window_counts, write_counts_csv, ChiSquareTest, PoissonReport, FANO_RANGE, MEAN_SIGMAS, MIN_EXPECTED,
};
pub use independence::{two_energy_independence, IndependenceTest, Z_CRITICAL};
pub use spacing::{pooled_gaps, spacing_test, windowed_gap_cdf, SpacingTest};
pub use synthetic::{duplicated_fixture, picket_fence_fixture, poisson_fixture};

use crate::error::{Error, Result};
use crate::sampler::{Sample, SampleBatch};

/// Significance level of every test.
pub const SIGNIFICANCE: f64 = 0.01;
pub const MIN_REPLICAS: usize = 100;
pub const MIN_GAPS: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalWindow {
    pub energy: f64,
    pub half_width: f64,
    /// `N(λ_i - E)` for the coordinates with `|N(λ_i - E)| <= W`, ascending.
    pub points: Vec<f64>,
}

impl LocalWindow {
    pub fn count(&self) -> usize {
        self.points.len()
    }

    /// Number of points in `[a, b)`.
    pub fn count_in(&self, a: f64, b: f64) -> usize {
        self.points.partition_point(|x| *x < b) - self.points.partition_point(|x| *x < a)
    }
}

fn check_window(energy: f64, half_width: f64) -> Result<()> {
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(Error::InvalidArgument(format!("window half-width must be > 0, got {half_width}")));
    }
    if !energy.is_finite() {
        return Err(Error::InvalidArgument(format!("energy must be finite, got {energy}")));
    }
    Ok(())
}

/// Rescaled window of one sample; `N` is the sample length.
pub fn local_statistics(sample: &Sample, energy: f64, half_width: f64) -> Result<LocalWindow> {
    check_window(energy, half_width)?;
    let lambdas = sample.lambdas();
    let n = lambdas.len() as f64;
    let start = lambdas.partition_point(|l| n * (l - energy) < -half_width);
    let end = lambdas.partition_point(|l| n * (l - energy) <= half_width);
    Ok(LocalWindow {
        energy,
        half_width,
        points: lambdas[start..end].iter().map(|l| n * (l - energy)).collect(),
    })
}

pub(crate) fn batch_windows(batch: &SampleBatch, energy: f64, half_width: f64) -> Result<Vec<LocalWindow>> {
    batch
        .samples
        .iter()
        .map(|s| local_statistics(s, energy, half_width))
        .collect()
}

pub(crate) fn require_replicas(batch: &SampleBatch) -> Result<()> {
    if batch.len() < MIN_REPLICAS {
        return Err(Error::UnderPowered(format!(
            "{} replicas, at least {MIN_REPLICAS} required",
            batch.len()
        )));
    }
    Ok(())
}

pub(crate) fn check_reference(rho_ref: f64) -> Result<()> {
    if !(rho_ref > 0.0 && rho_ref.is_finite()) {
        return Err(Error::InvalidArgument(format!("reference intensity must be > 0, got {rho_ref}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::Provenance;

    fn sample(xs: &[f64]) -> Sample {
        Sample::new(xs.to_vec(), Provenance::Synthetic).unwrap()
    }

    #[test]
    fn rescale_and_cut() {
        let s = sample(&[0.1, 0.2]);
        let w = local_statistics(&s, 0.0, 1.0).unwrap();
        assert_eq!(w.points, vec![0.2, 0.4]);
        let w = local_statistics(&s, 0.0, 0.3).unwrap();
        assert_eq!(w.points, vec![0.2]);
        assert!(local_statistics(&s, 0.0, 0.0).is_err());
        assert!(local_statistics(&s, 100.0, 5.0).unwrap().points.is_empty());
    }

    #[test]
    fn shift_covariance_and_count_additivity() {
        let xs: Vec<f64> = (0..64).map(|k| (k as f64 - 32.0) / 64.0).collect();
        let s = sample(&xs);
        let shifted = sample(&xs.iter().map(|x| x + 3.0).collect::<Vec<_>>());
        for e in [0.0, 0.25, -0.125] {
            let a = local_statistics(&s, e, 5.0).unwrap();
            let b = local_statistics(&shifted, e + 3.0, 5.0).unwrap();
            assert_eq!(a.points, b.points);
            assert_eq!(a.count(), a.count_in(-5.0, 0.0) + a.count_in(0.0, f64::INFINITY));
        }
    }
}
