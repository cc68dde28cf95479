use serde::{Deserialize, Serialize};

use super::{batch_windows, check_reference, check_window, require_replicas, MIN_GAPS, SIGNIFICANCE};
use crate::error::{Error, Result};
use crate::sampler::SampleBatch;
use crate::stats::{ks_critical_one_sample, ks_one_sample};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacingTest {
    pub ks_distance: f64,
    pub critical: f64,
    pub gaps: usize,
    pub pass: bool,
}

/// Gaps between consecutive points inside each window, pooled over
/// replicas. Gaps to the window edges are not included.
pub fn pooled_gaps(batch: &SampleBatch, energy: f64, half_width: f64) -> Result<Vec<f64>> {
    Ok(batch_windows(batch, energy, half_width)?
        .iter()
        .flat_map(|w| w.points.windows(2).map(|p| p[1] - p[0]).collect::<Vec<_>>())
        .collect())
}

/// CDF of a pooled interior gap of a Poisson process of intensity `rho`
/// observed through a window of length `length`: the gap density is
/// proportional to `(length - g) exp(-rho g)` on `[0, length]`.
pub fn windowed_gap_cdf(g: f64, rho: f64, length: f64) -> f64 {
    if g <= 0.0 {
        return 0.0;
    }
    if g >= length {
        return 1.0;
    }
    let a = |t: f64| -(-rho * t).exp_m1() / rho;
    let b = |t: f64| (1.0 - (-rho * t).exp() * (1.0 + rho * t)) / (rho * rho);
    (length * a(g) - b(g)) / (length * a(length) - b(length))
}

/// One-sample KS test of the pooled interior gaps against the windowed
/// exponential law of intensity `rho_ref`.
pub fn spacing_test(batch: &SampleBatch, energy: f64, half_width: f64, rho_ref: f64) -> Result<SpacingTest> {
    check_window(energy, half_width)?;
    require_replicas(batch)?;
    check_reference(rho_ref)?;
    let gaps = pooled_gaps(batch, energy, half_width)?;
    if gaps.len() < MIN_GAPS {
        return Err(Error::UnderPowered(format!(
            "{} pooled gaps, at least {MIN_GAPS} required",
            gaps.len()
        )));
    }
    let length = 2.0 * half_width;
    let ks_distance = ks_one_sample(&gaps, |g| windowed_gap_cdf(g, rho_ref, length));
    let critical = ks_critical_one_sample(gaps.len(), SIGNIFICANCE);
    Ok(SpacingTest {
        ks_distance,
        critical,
        gaps: gaps.len(),
        pass: ks_distance < critical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windowed_cdf_limits() {
        let (rho, l) = (0.3, 10.0);
        assert_eq!(windowed_gap_cdf(0.0, rho, l), 0.0);
        assert_eq!(windowed_gap_cdf(l, rho, l), 1.0);
        // long windows recover the exponential law
        let g = 2.0;
        let long = windowed_gap_cdf(g, rho, 1e7);
        assert!((long - (1.0 - (-rho * g).exp())).abs() < 1e-6);
        // density check by finite differences
        let norm: f64 = (0..100_000)
            .map(|k| {
                let t = (k as f64 + 0.5) * l / 100_000.0;
                (l - t) * (-rho * t).exp() * l / 100_000.0
            })
            .sum();
        let h = 1e-5;
        let fd = (windowed_gap_cdf(3.0 + h, rho, l) - windowed_gap_cdf(3.0 - h, rho, l)) / (2.0 * h);
        assert!((fd - (l - 3.0) * (-rho * 3.0f64).exp() / norm).abs() < 1e-6);
    }
}
