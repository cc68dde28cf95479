use serde::{Deserialize, Serialize};

use super::{batch_windows, check_window, LocalWindow};
use crate::error::{Error, Result};
use crate::sampler::SampleBatch;

/// Default number of bins per axis on `[-W, W]`.
pub const DEFAULT_BINS: usize = 4;
/// Accepted band for `R2 / (R1 R1)` in each off-diagonal cell.
pub const FACTORIZATION_BAND: (f64, f64) = (0.9, 1.1);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCell {
    /// Bin index along each axis.
    pub index: Vec<usize>,
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub k: usize,
    pub energy: f64,
    pub half_width: f64,
    pub n_replicas: usize,
    pub edges: Vec<f64>,
    /// For `k = 2` only cells at least two bins off the diagonal are kept,
    /// so every pair counted is more than one bin width apart.
    pub cells: Vec<CorrelationCell>,
}

impl CorrelationEstimate {
    pub fn bin_width(&self) -> f64 {
        self.edges[1] - self.edges[0]
    }

    /// `∫ R1` over the window; equals the mean window count.
    pub fn integrated_intensity(&self) -> Option<f64> {
        (self.k == 1).then(|| self.cells.iter().map(|c| c.value).sum::<f64>() * self.bin_width())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationCell {
    pub index: [usize; 2],
    pub ratio: f64,
    pub std_error: f64,
    pub in_band: bool,
    /// `|ratio - 1| <= 3 std_error`.
    pub overlaps_one: bool,
}

/// Leave-one-out jackknife of `f` applied to the mean of per-replica rows.
pub(crate) fn jackknife_of_means(rows: &[Vec<f64>], f: impl Fn(&[f64]) -> f64) -> (f64, f64) {
    let m = rows.len();
    let d = rows[0].len();
    let mut sum = vec![0.0; d];
    for row in rows {
        for (s, y) in sum.iter_mut().zip(row) {
            *s += y;
        }
    }
    let mean: Vec<f64> = sum.iter().map(|s| s / m as f64).collect();
    let theta = f(&mean);
    if m < 2 {
        return (theta, f64::NAN);
    }
    let mut scratch = vec![0.0; d];
    let loo: Vec<f64> = rows
        .iter()
        .map(|row| {
            for ((x, s), y) in scratch.iter_mut().zip(&sum).zip(row) {
                *x = (s - y) / (m - 1) as f64;
            }
            f(&scratch)
        })
        .collect();
    let centre = loo.iter().sum::<f64>() / m as f64;
    let var = (m - 1) as f64 / m as f64 * loo.iter().map(|t| (t - centre).powi(2)).sum::<f64>();
    (theta, var.sqrt())
}

fn bin_counts(windows: &[LocalWindow], half_width: f64, bins: usize) -> Vec<Vec<f64>> {
    let width = 2.0 * half_width / bins as f64;
    windows
        .iter()
        .map(|w| {
            let mut counts = vec![0.0; bins];
            for x in &w.points {
                let b = (((x + half_width) / width).floor().max(0.0) as usize).min(bins - 1);
                counts[b] += 1.0;
            }
            counts
        })
        .collect()
}

fn prepare(
    batch: &SampleBatch,
    energy: f64,
    half_width: f64,
    bins: usize,
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    check_window(energy, half_width)?;
    if batch.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    if bins == 0 {
        return Err(Error::InvalidArgument("need at least one bin".into()));
    }
    let windows = batch_windows(batch, energy, half_width)?;
    let width = 2.0 * half_width / bins as f64;
    let edges = (0..=bins).map(|i| -half_width + i as f64 * width).collect();
    Ok((bin_counts(&windows, half_width, bins), edges))
}

fn far_cells(bins: usize) -> Vec<[usize; 2]> {
    let mut cells = Vec::new();
    for a in 0..bins {
        for b in 0..bins {
            if a.abs_diff(b) >= 2 {
                cells.push([a, b]);
            }
        }
    }
    cells
}

/// Histogram estimates of the rescaled correlation functions: points per
/// unit length per replica (`k = 1`) or ordered distinct pairs per unit
/// area per replica (`k = 2`), with jackknife errors over replicas.
pub fn correlation_estimate(
    batch: &SampleBatch,
    energy: f64,
    half_width: f64,
    k: usize,
    bins: usize,
) -> Result<CorrelationEstimate> {
    let (counts, edges) = prepare(batch, energy, half_width, bins)?;
    let width = 2.0 * half_width / bins as f64;
    let cells = match k {
        1 => (0..bins)
            .map(|a| {
                let rows: Vec<Vec<f64>> = counts.iter().map(|c| vec![c[a]]).collect();
                let (value, std_error) = jackknife_of_means(&rows, |m| m[0] / width);
                CorrelationCell {
                    index: vec![a],
                    value,
                    std_error,
                }
            })
            .collect(),
        2 => {
            let cells = far_cells(bins);
            if cells.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "k = 2 needs at least 3 bins for off-diagonal cells, got {bins}"
                )));
            }
            cells
                .into_iter()
                .map(|[a, b]| {
                    let rows: Vec<Vec<f64>> = counts.iter().map(|c| vec![c[a] * c[b]]).collect();
                    let (value, std_error) = jackknife_of_means(&rows, |m| m[0] / (width * width));
                    CorrelationCell {
                        index: vec![a, b],
                        value,
                        std_error,
                    }
                })
                .collect()
        }
        _ => return Err(Error::InvalidArgument(format!("k must be 1 or 2, got {k}"))),
    };
    Ok(CorrelationEstimate {
        k,
        energy,
        half_width,
        n_replicas: batch.len(),
        edges,
        cells,
    })
}

/// `R2(a, b) / (R1(a) R1(b))` for each off-diagonal cell, with the
/// jackknife error of the ratio itself.
pub fn pair_factorization(
    batch: &SampleBatch,
    energy: f64,
    half_width: f64,
    bins: usize,
) -> Result<Vec<FactorizationCell>> {
    let (counts, _) = prepare(batch, energy, half_width, bins)?;
    let cells = far_cells(bins);
    if cells.is_empty() {
        return Err(Error::InvalidArgument(format!("need at least 3 bins, got {bins}")));
    }
    Ok(cells
        .into_iter()
        .map(|[a, b]| {
            let rows: Vec<Vec<f64>> = counts.iter().map(|c| vec![c[a] * c[b], c[a], c[b]]).collect();
            let (ratio, std_error) = jackknife_of_means(&rows, |m| m[0] / (m[1] * m[2]));
            FactorizationCell {
                index: [a, b],
                ratio,
                std_error,
                in_band: (FACTORIZATION_BAND.0..=FACTORIZATION_BAND.1).contains(&ratio),
                overlaps_one: (ratio - 1.0).abs() <= 3.0 * std_error,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localstats::{counting_report, poisson_fixture};

    #[test]
    fn jackknife_of_a_mean_is_the_standard_error() {
        let rows: Vec<Vec<f64>> = [1.0, 2.0, 4.0, 7.0].iter().map(|x| vec![*x]).collect();
        let (theta, se) = jackknife_of_means(&rows, |m| m[0]);
        let (mean, var) = crate::stats::mean_variance(&[1.0, 2.0, 4.0, 7.0]);
        assert!((theta - mean).abs() < 1e-15);
        assert!((se - (var / 4.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn poisson_fixture_factorizes() {
        let rho = 0.6;
        let batch = poisson_fixture(rho, &[0.0], 5.0, 2000, 100, 12).unwrap();
        let r1 = correlation_estimate(&batch, 0.0, 5.0, 1, 4).unwrap();
        for c in &r1.cells {
            assert!((c.value - rho).abs() < 3.0 * c.std_error, "{c:?}");
        }
        let r2 = correlation_estimate(&batch, 0.0, 5.0, 2, 4).unwrap();
        assert_eq!(r2.cells.len(), 6);
        for c in &r2.cells {
            assert!((c.value - rho * rho).abs() < 3.0 * c.std_error, "{c:?}");
        }
        let report = counting_report(&batch, 0.0, 5.0, rho).unwrap();
        assert!((r1.integrated_intensity().unwrap() - report.count_mean).abs() < 1e-12);
        for cell in pair_factorization(&batch, 0.0, 5.0, 4).unwrap() {
            assert!(cell.overlaps_one, "{cell:?}");
        }
        assert!(correlation_estimate(&batch, 0.0, 5.0, 3, 4).is_err());
        assert!(correlation_estimate(&batch, 0.0, 5.0, 2, 2).is_err());
    }
}
