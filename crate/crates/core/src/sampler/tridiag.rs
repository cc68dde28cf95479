use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;

use super::{stream_rng, ChainDiagnostics, EnsembleConfig, Provenance, Sample, SampleBatch};
use crate::error::{Error, Result};
use crate::potential::PotentialSpec;

const MAX_QL_SWEEPS: usize = 60;

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `diag` and
/// off-diagonal `off`, by implicit QL with Wilkinson shifts. Sorted
/// ascending.
pub fn symmetric_tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 || off.len() + 1 != n {
        return Err(Error::InvalidArgument(format!(
            "tridiagonal matrix needs n >= 1 diagonal and n - 1 off-diagonal entries, got {} and {}",
            n,
            off.len()
        )));
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_QL_SWEEPS {
                return Err(Error::NonConvergence {
                    iterations: sweeps,
                    residual: e[l].abs(),
                    residual_history: Vec::new(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

fn draw_matrix_eigenvalues<R: Rng>(n: usize, beta: f64, rng: &mut R) -> Result<Vec<f64>> {
    let diag: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let off = (1..n)
        .map(|k| {
            let a = beta * (n - k) as f64;
            if a == 0.0 {
                return Ok(0.0);
            }
            let gamma = Gamma::new(0.5 * a, 1.0).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            Ok(gamma.sample(rng).sqrt())
        })
        .collect::<Result<Vec<f64>>>()?;
    symmetric_tridiagonal_eigenvalues(&diag, &off)
}

/// Exact draws for `V = x²/2`: eigenvalues of the tridiagonal model with
/// standard normal diagonal and `χ_{β(N-k)} / √2` off-diagonal entries.
/// Replica `m` uses its own random stream.
pub fn tridiagonal_sample(config: &EnsembleConfig, count: usize) -> Result<SampleBatch> {
    config.validate()?;
    if !config.potential.is_gaussian() {
        return Err(Error::Unsupported(
            "the tridiagonal model is exact only for the Gaussian potential".into(),
        ));
    }
    if count == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let samples = (0..count)
        .into_par_iter()
        .map(|m| {
            let mut rng = stream_rng(config.seed, m as u64);
            let lambdas = draw_matrix_eigenvalues(config.n_particles, config.beta, &mut rng)?;
            Sample::new(lambdas, Provenance::Tridiagonal)
        })
        .collect::<Result<Vec<_>>>()?;
    SampleBatch::new(config.clone(), samples, ChainDiagnostics::exact())
}

pub fn tridiagonal_gaussian_sample(n: usize, beta: f64, seed: u64, count: usize) -> Result<SampleBatch> {
    let config = EnsembleConfig::new(n, beta, PotentialSpec::gaussian(), seed)?;
    tridiagonal_sample(&config, count)
}
