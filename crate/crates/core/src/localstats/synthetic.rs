//! Batches whose rescaled windows are known point processes, used to
//! calibrate the tests. Coordinates not needed in any window are parked far
//! to the right of every energy.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::potential::PotentialSpec;
use crate::sampler::{stream_rng, ChainDiagnostics, EnsembleConfig, Provenance, Sample, SampleBatch};

const PARKING_OFFSET: f64 = 1e3;

fn assemble(
    windows: Vec<Vec<(f64, Vec<f64>)>>,
    n_particles: usize,
    seed: u64,
) -> Result<SampleBatch> {
    let far = windows
        .iter()
        .flat_map(|w| w.iter().map(|(e, _)| *e))
        .fold(0.0f64, |acc, e| acc.max(e.abs()))
        + PARKING_OFFSET;
    let config = EnsembleConfig::new(n_particles, 0.0, PotentialSpec::gaussian(), seed)?;
    let samples = windows
        .into_iter()
        .map(|replica| {
            let n = n_particles as f64;
            let mut lambdas: Vec<f64> = replica
                .iter()
                .flat_map(|(e, xs)| xs.iter().map(move |x| e + x / n))
                .collect();
            if lambdas.len() > n_particles {
                return Err(Error::InvalidArgument(format!(
                    "{} window points exceed N = {n_particles}",
                    lambdas.len()
                )));
            }
            let missing = n_particles - lambdas.len();
            lambdas.extend((0..missing).map(|k| far + k as f64));
            Sample::new(lambdas, Provenance::Synthetic)
        })
        .collect::<Result<Vec<_>>>()?;
    SampleBatch::new(config, samples, ChainDiagnostics::exact())
}

fn poisson_points<R: Rng>(rng: &mut R, intensity: f64, half_width: f64) -> Result<Vec<f64>> {
    let law = Poisson::new(2.0 * half_width * intensity).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let count = law.sample(rng) as usize;
    Ok((0..count).map(|_| rng.random_range(-half_width..=half_width)).collect())
}

/// Independent homogeneous Poisson processes of the given intensity in the
/// rescaled window around each energy.
pub fn poisson_fixture(
    intensity: f64,
    energies: &[f64],
    half_width: f64,
    replicas: usize,
    n_particles: usize,
    seed: u64,
) -> Result<SampleBatch> {
    let windows = (0..replicas)
        .map(|m| {
            let mut rng = stream_rng(seed, m as u64);
            energies
                .iter()
                .map(|e| Ok((*e, poisson_points(&mut rng, intensity, half_width)?)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    assemble(windows, n_particles, seed)
}

/// Equally spaced points `1 / intensity` apart, identical in every replica.
pub fn picket_fence_fixture(
    intensity: f64,
    energies: &[f64],
    half_width: f64,
    replicas: usize,
    n_particles: usize,
) -> Result<SampleBatch> {
    if !(intensity > 0.0) {
        return Err(Error::InvalidArgument("intensity must be > 0".into()));
    }
    let fence: Vec<f64> = (0..)
        .map(|j| -half_width + (j as f64 + 0.5) / intensity)
        .take_while(|x| *x <= half_width)
        .collect();
    let windows = (0..replicas)
        .map(|_| energies.iter().map(|e| (*e, fence.clone())).collect())
        .collect();
    assemble(windows, n_particles, 0)
}

/// One Poisson stream copied into the windows at both energies.
pub fn duplicated_fixture(
    intensity: f64,
    energy: f64,
    energy_prime: f64,
    half_width: f64,
    replicas: usize,
    n_particles: usize,
    seed: u64,
) -> Result<SampleBatch> {
    let windows = (0..replicas)
        .map(|m| {
            let mut rng = stream_rng(seed, m as u64);
            let xs = poisson_points(&mut rng, intensity, half_width)?;
            Ok(vec![(energy, xs.clone()), (energy_prime, xs)])
        })
        .collect::<Result<Vec<_>>>()?;
    assemble(windows, n_particles, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localstats::local_statistics;

    #[test]
    fn fixtures_place_points_in_windows() {
        let batch = poisson_fixture(0.5, &[0.0, 1.0], 5.0, 10, 64, 3).unwrap();
        assert!(batch.samples.iter().all(|s| s.len() == 64));
        let fence = picket_fence_fixture(0.5, &[0.0], 5.0, 3, 20).unwrap();
        let w = local_statistics(&fence.samples[0], 0.0, 5.0).unwrap();
        assert_eq!(w.points.len(), 5);
        assert!(w.points.windows(2).all(|p| (p[1] - p[0] - 2.0).abs() < 1e-9));
        let dup = duplicated_fixture(0.5, 0.0, 1.0, 5.0, 5, 64, 1).unwrap();
        for s in &dup.samples {
            let a = local_statistics(s, 0.0, 5.0).unwrap().points;
            let b = local_statistics(s, 1.0, 5.0).unwrap().points;
            assert_eq!(a.len(), b.len());
        }
        assert!(poisson_fixture(50.0, &[0.0], 5.0, 2, 10, 0).is_err());
    }
}
