use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_window, window_counts};
use crate::error::{Error, Result};
use crate::sampler::SampleBatch;

/// Two-sided 1% normal quantile.
pub const Z_CRITICAL: f64 = 2.58;
const BOOTSTRAP_RESAMPLES: usize = 1000;
const BOOTSTRAP_SEED: u64 = 0x1d_e9e4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependenceTest {
    pub energy: f64,
    pub energy_prime: f64,
    pub half_width: f64,
    pub covariance: f64,
    pub variance: f64,
    pub variance_prime: f64,
    pub std_error: f64,
    pub z_score: f64,
    pub pass: bool,
}

fn covariance(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (n - 1.0)
}

/// Covariance of the window counts at `energy` and `energy_prime`, with a
/// replica-level bootstrap standard error from a fixed generator.
pub fn two_energy_independence(
    batch: &SampleBatch,
    energy: f64,
    energy_prime: f64,
    half_width: f64,
) -> Result<IndependenceTest> {
    check_window(energy, half_width)?;
    check_window(energy_prime, half_width)?;
    let n = batch.n_particles() as f64;
    if n * (energy - energy_prime).abs() <= 4.0 * half_width {
        return Err(Error::InvalidArgument(format!(
            "rescaled windows overlap: N |E - E'| = {} <= 4 W = {}",
            n * (energy - energy_prime).abs(),
            4.0 * half_width
        )));
    }
    if batch.len() < 2 {
        return Err(Error::UnderPowered("need at least two replicas".into()));
    }
    let a: Vec<f64> = window_counts(batch, energy, half_width)?.iter().map(|c| *c as f64).collect();
    let b: Vec<f64> = window_counts(batch, energy_prime, half_width)?
        .iter()
        .map(|c| *c as f64)
        .collect();
    let cov = covariance(&a, &b);

    let m = a.len();
    let mut rng = ChaCha8Rng::seed_from_u64(BOOTSTRAP_SEED);
    let mut ra = vec![0.0; m];
    let mut rb = vec![0.0; m];
    let replicates: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            for k in 0..m {
                let i = rng.random_range(0..m);
                ra[k] = a[i];
                rb[k] = b[i];
            }
            covariance(&ra, &rb)
        })
        .collect();
    let std_error = crate::stats::mean_variance(&replicates).1.sqrt();
    let z_score = if std_error > 0.0 {
        cov / std_error
    } else if cov == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(IndependenceTest {
        energy,
        energy_prime,
        half_width,
        covariance: cov,
        variance: covariance(&a, &a),
        variance_prime: covariance(&b, &b),
        std_error,
        z_score,
        pass: z_score.abs() < Z_CRITICAL,
    })
}
