use rayon::prelude::*;
use serde::Serialize;

use super::SampleBatch;
use crate::error::{Error, Result};
use crate::potential::{DensityOnGrid, Grid, PotentialSpec};
use crate::stats::{mean_variance, Estimate};

const LOG_CHUNK: usize = 8;

/// Counts of pooled coordinates in the node-centred cells of a grid
/// (half cells at the two ends), with per-block counts for batch-means
/// standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalHistogram {
    grid: Grid,
    counts: Vec<u64>,
    coordinates: u64,
    block_counts: Vec<Vec<u64>>,
    block_coordinates: Vec<u64>,
}

fn cell_index(grid: &Grid, x: f64) -> Option<usize> {
    if !(x >= grid.lo() && x <= grid.hi()) {
        return None;
    }
    let i = ((x - grid.lo()) / grid.spacing()).round() as usize;
    Some(i.min(grid.len() - 1))
}

/// Histogram of every coordinate of every sample; the samples are split into
/// `blocks` contiguous groups of near-equal size.
pub fn marginal_histogram(batch: &SampleBatch, grid: &Grid, blocks: usize) -> Result<MarginalHistogram> {
    if batch.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    if blocks == 0 || blocks > batch.len() {
        return Err(Error::InvalidArgument(format!(
            "block count must lie in 1..={}, got {blocks}",
            batch.len()
        )));
    }
    let m = batch.len();
    let mut block_counts = vec![vec![0u64; grid.len()]; blocks];
    let mut block_coordinates = vec![0u64; blocks];
    for (s, sample) in batch.samples.iter().enumerate() {
        let b = s * blocks / m;
        block_coordinates[b] += sample.len() as u64;
        for x in sample.lambdas() {
            if let Some(i) = cell_index(grid, *x) {
                block_counts[b][i] += 1;
            }
        }
    }
    let counts = (0..grid.len()).map(|i| block_counts.iter().map(|c| c[i]).sum()).collect();
    Ok(MarginalHistogram {
        grid: *grid,
        counts,
        coordinates: block_coordinates.iter().sum(),
        block_counts,
        block_coordinates,
    })
}

impl MarginalHistogram {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// All coordinates, including those outside the grid.
    pub fn coordinates(&self) -> u64 {
        self.coordinates
    }

    pub fn blocks(&self) -> usize {
        self.block_counts.len()
    }

    /// Fraction of all coordinates falling in each cell.
    pub fn cell_probabilities(&self) -> Vec<f64> {
        let n = self.coordinates as f64;
        self.counts.iter().map(|c| *c as f64 / n).collect()
    }

    /// `sqrt(p (1 - p) / n)` for each cell fraction.
    pub fn binomial_std_errors(&self) -> Vec<f64> {
        let n = self.coordinates as f64;
        self.cell_probabilities()
            .iter()
            .map(|p| (p * (1.0 - p) / n).sqrt())
            .collect()
    }

    /// Standard error of each cell fraction from the spread of block
    /// fractions; requires at least two blocks.
    pub fn block_std_errors(&self) -> Result<Vec<f64>> {
        let b = self.blocks();
        if b < 2 {
            return Err(Error::UnderPowered("block errors need at least two blocks".into()));
        }
        Ok((0..self.grid.len())
            .map(|i| {
                let fractions: Vec<f64> = self
                    .block_counts
                    .iter()
                    .zip(&self.block_coordinates)
                    .map(|(c, n)| c[i] as f64 / *n as f64)
                    .collect();
                (mean_variance(&fractions).1 / b as f64).sqrt()
            })
            .collect())
    }

    /// Cell counts divided by cell width and by the number of coordinates
    /// inside the grid, so the result integrates to one.
    pub fn density(&self) -> Result<DensityOnGrid> {
        let inside: u64 = self.counts.iter().sum();
        if inside == 0 {
            return Err(Error::Normalization("no coordinates inside the grid".into()));
        }
        let values = self
            .counts
            .iter()
            .enumerate()
            .map(|(i, c)| *c as f64 / (inside as f64 * self.grid.weight(i)))
            .collect();
        DensityOnGrid::new(self.grid, values)
    }
}

/// Histogram estimate of the one-point function on the grid's cells.
pub fn empirical_marginal(batch: &SampleBatch, grid: &Grid) -> Result<DensityOnGrid> {
    marginal_histogram(batch, grid, 1)?.density()
}

/// `∫ f` over each node-centred cell of the grid, by composite Simpson.
pub fn cell_masses(grid: &Grid, f: impl Fn(f64) -> f64) -> Vec<f64> {
    const PANELS: usize = 8;
    let h = grid.spacing();
    (0..grid.len())
        .map(|i| {
            let x = grid.node(i);
            let a = (x - 0.5 * h).max(grid.lo());
            let b = (x + 0.5 * h).min(grid.hi());
            let step = (b - a) / PANELS as f64;
            let mut acc = f(a) + f(b);
            for k in 1..PANELS {
                acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * step);
            }
            acc * step / 3.0
        })
        .collect()
}

/// `Σ_j log|x - λ_j|`; `-inf` when `x` hits a coordinate.
fn log_abs_sum(x: f64, lambdas: &[f64]) -> f64 {
    let mut total = 0.0;
    for chunk in lambdas.chunks(LOG_CHUNK) {
        let prod: f64 = chunk.iter().map(|l| (x - l).abs()).product();
        if prod.is_normal() {
            total += prod.ln();
        } else {
            total += chunk.iter().map(|l| (x - l).abs().ln()).sum::<f64>();
        }
    }
    total
}

fn product_power(x: f64, lambdas: &[f64], beta: f64) -> f64 {
    if beta == 0.0 {
        1.0
    } else {
        (beta * log_abs_sum(x, lambdas)).exp()
    }
}

/// Per-sample values of `Π_j |x - λ_j|^β`.
pub fn exp_log_potential_samples(batch: &SampleBatch, x: f64) -> Vec<f64> {
    let beta = batch.config.beta;
    batch
        .samples
        .par_iter()
        .map(|s| product_power(x, s.lambdas(), beta))
        .collect()
}

/// Monte Carlo mean of `Π_j |x - λ_j|^β` with its standard error, for a
/// batch drawn at `(β, N - 1)`.
pub fn estimate_exp_log_potential(batch: &SampleBatch, x: f64) -> Result<Estimate> {
    if batch.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    if !x.is_finite() {
        return Err(Error::InvalidArgument(format!("x must be finite, got {x}")));
    }
    Ok(Estimate::from_samples(&exp_log_potential_samples(batch, x)))
}

/// Trapezoid integral of `Π_j |x - λ_j|^β exp(-V(x))` over the grid,
/// averaged over samples; estimates `Z_{β,N} / Z_{β,N-1}` for a batch drawn
/// at `(β, N - 1)`.
pub fn estimate_partition_ratio(batch: &SampleBatch, v: &PotentialSpec, grid: &Grid) -> Result<Estimate> {
    if batch.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    v.validate()?;
    let nodes = grid.nodes();
    let weights: Vec<f64> = nodes
        .iter()
        .enumerate()
        .map(|(i, x)| grid.weight(i) * (-v.value(*x)).exp())
        .collect();
    let beta = batch.config.beta;
    let per_sample: Vec<f64> = batch
        .samples
        .par_iter()
        .map(|s| {
            nodes
                .iter()
                .zip(&weights)
                .map(|(x, w)| w * product_power(*x, s.lambdas(), beta))
                .sum()
        })
        .collect();
    Ok(Estimate::from_samples(&per_sample))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{ChainDiagnostics, EnsembleConfig, Provenance, Sample};

    fn batch_of(n: usize, beta: f64, rows: Vec<Vec<f64>>) -> SampleBatch {
        let cfg = EnsembleConfig::new(n, beta, PotentialSpec::gaussian(), 0).unwrap();
        let samples = rows
            .into_iter()
            .map(|r| Sample::new(r, Provenance::Synthetic).unwrap())
            .collect();
        SampleBatch::new(cfg, samples, ChainDiagnostics::exact()).unwrap()
    }

    #[test]
    fn single_point_lands_in_one_cell() {
        let grid = Grid::new(-1.0, 1.0, 21).unwrap();
        let rho = empirical_marginal(&batch_of(1, 1.0, vec![vec![0.0]]), &grid).unwrap();
        let nonzero: Vec<usize> = (0..21).filter(|i| rho.values()[*i] > 0.0).collect();
        assert_eq!(nonzero, vec![10]);
        assert!((rho.integral() - 1.0).abs() < 1e-12);
        // end cells are half cells
        let edge = empirical_marginal(&batch_of(1, 1.0, vec![vec![-1.0]]), &grid).unwrap();
        assert!((edge.integral() - 1.0).abs() < 1e-12);
        assert!(empirical_marginal(&batch_of(1, 1.0, vec![vec![5.0]]), &grid).is_err());
    }

    #[test]
    fn block_errors_and_probabilities() {
        let rows: Vec<Vec<f64>> = (0..40).map(|m| vec![if m % 2 == 0 { -0.5 } else { 0.5 }, 3.0]).collect();
        let grid = Grid::new(-1.0, 1.0, 3).unwrap();
        let h = marginal_histogram(&batch_of(2, 1.0, rows), &grid, 4).unwrap();
        assert_eq!(h.coordinates(), 80);
        let p = h.cell_probabilities();
        assert!((p.iter().sum::<f64>() - 0.5).abs() < 1e-15);
        assert!(h.block_std_errors().unwrap().iter().all(|s| *s >= 0.0));
        assert!(h.density().unwrap().is_normalized());
    }

    #[test]
    fn exp_log_potential_basics() {
        let b0 = batch_of(3, 0.0, vec![vec![0.0, 1.0, 2.0], vec![-1.0, 0.5, 4.0]]);
        for x in [-3.0, 0.0, 1.7] {
            let e = estimate_exp_log_potential(&b0, x).unwrap();
            assert_eq!(e.value, 1.0);
        }
        let b = batch_of(2, 0.5, vec![vec![1.0, 2.0]]);
        assert_eq!(estimate_exp_log_potential(&b, 1.0).unwrap().value, 0.0);
        let got = estimate_exp_log_potential(&b, 4.0).unwrap().value;
        assert!((got - 6f64.sqrt()).abs() < 1e-14);
        let many: Vec<f64> = (0..40).map(|k| 1e-9 * k as f64).collect();
        let tiny = batch_of(40, 1.0, vec![many.clone()]);
        let direct: f64 = many.iter().map(|l| (0.5f64 - l).abs().ln()).sum();
        let got = estimate_exp_log_potential(&tiny, 0.5).unwrap().value;
        assert!((got.ln() - direct).abs() < 1e-10);
    }

    #[test]
    fn partition_ratio_at_zero_beta_is_reference_normalizer() {
        let grid = Grid::new(-10.0, 10.0, 2001).unwrap();
        let b0 = batch_of(2, 0.0, vec![vec![0.0, 1.0]]);
        let z = estimate_partition_ratio(&b0, &PotentialSpec::gaussian(), &grid).unwrap();
        assert!((z.value - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn cell_masses_of_linear_function() {
        let grid = Grid::new(0.0, 2.0, 5).unwrap();
        let m = cell_masses(&grid, |x| x);
        assert!((m.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        assert!((m[0] - 0.125 * 0.25).abs() < 1e-15);
    }
}
