use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::distribution::{Discrete, DiscreteCDF, Poisson};

use super::{batch_windows, check_reference, require_replicas, spacing_test, SIGNIFICANCE};
use crate::error::{Error, Result};
use crate::sampler::SampleBatch;
use crate::stats::{chi_square_critical, mean_variance};

/// Smallest expected count allowed in a chi-square group.
pub const MIN_EXPECTED: f64 = 5.0;
/// Acceptable range of the Fano factor.
pub const FANO_RANGE: (f64, f64) = (0.85, 1.15);
/// Count mean tolerance in standard errors.
pub const MEAN_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub critical: f64,
    /// Lower count of each merged group; the last group is open-ended.
    pub group_starts: Vec<usize>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonReport {
    pub energy: f64,
    pub half_width: f64,
    pub intensity_ref: f64,
    pub n_replicas: usize,
    pub significance: f64,
    pub expected_mean: f64,
    pub count_mean: f64,
    pub count_mean_std_error: f64,
    pub count_variance: f64,
    /// `None` when every window is empty.
    pub fano: Option<f64>,
    pub no_points: bool,
    pub chi2: Option<ChiSquareTest>,
    pub ks_spacing: Option<f64>,
    pub ks_critical: Option<f64>,
    pub spacing_gaps: usize,
    pub mean_pass: bool,
    pub fano_pass: bool,
    pub chi2_pass: bool,
    pub spacing_pass: bool,
    /// Reasons a test could not be run.
    pub notes: Vec<String>,
}

impl PoissonReport {
    pub fn all_pass(&self) -> bool {
        self.mean_pass && self.fano_pass && self.chi2_pass && self.spacing_pass
    }
}

/// Per-replica number of rescaled points in `[-W, W]`.
pub fn window_counts(batch: &SampleBatch, energy: f64, half_width: f64) -> Result<Vec<usize>> {
    Ok(batch_windows(batch, energy, half_width)?
        .iter()
        .map(|w| w.count())
        .collect())
}

/// Chi-square goodness of fit of counts against Poisson(`mean`), grouping
/// adjacent counts from zero upward until every group expects at least
/// [`MIN_EXPECTED`] replicas.
pub(crate) fn poisson_chi_square(counts: &[usize], mean: f64) -> Result<ChiSquareTest> {
    let m = counts.len() as f64;
    let poisson = Poisson::new(mean).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let max_observed = counts.iter().copied().max().unwrap_or(0);
    let top = max_observed.max((mean + 20.0 * mean.sqrt() + 20.0) as usize);
    // cells 0..top-1 individually, `top` holds the tail P(X >= top)
    let mut expected: Vec<f64> = (0..top).map(|k| m * poisson.pmf(k as u64)).collect();
    expected.push(m * poisson.sf(top as u64 - 1));
    let mut observed = vec![0.0; top + 1];
    for &c in counts {
        observed[c.min(top)] += 1.0;
    }

    let mut starts = Vec::new();
    let mut groups: Vec<(f64, f64)> = Vec::new();
    let mut current = (0.0, 0.0);
    let mut start = 0;
    for k in 0..=top {
        current.0 += observed[k];
        current.1 += expected[k];
        if current.1 >= MIN_EXPECTED {
            starts.push(start);
            groups.push(current);
            current = (0.0, 0.0);
            start = k + 1;
        }
    }
    if current.1 > 0.0 || current.0 > 0.0 {
        match groups.last_mut() {
            Some(last) => {
                last.0 += current.0;
                last.1 += current.1;
            }
            None => {
                starts.push(0);
                groups.push(current);
            }
        }
    }
    if groups.len() < 2 {
        return Err(Error::UnderPowered(format!(
            "only {} chi-square group(s) with expected count >= {MIN_EXPECTED}",
            groups.len()
        )));
    }
    let statistic = groups.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = groups.len() - 1;
    let critical = chi_square_critical(dof, SIGNIFICANCE);
    Ok(ChiSquareTest {
        statistic,
        dof,
        critical,
        group_starts: starts,
        pass: statistic <= critical,
    })
}

/// Count statistics of the window `[-W, W]` around `energy` against a
/// Poisson process of intensity `rho_ref`, plus the spacing test.
pub fn counting_report(batch: &SampleBatch, energy: f64, half_width: f64, rho_ref: f64) -> Result<PoissonReport> {
    require_replicas(batch)?;
    check_reference(rho_ref)?;
    let counts = window_counts(batch, energy, half_width)?;
    let m = counts.len();
    let as_f64: Vec<f64> = counts.iter().map(|c| *c as f64).collect();
    let (count_mean, count_variance) = mean_variance(&as_f64);
    let count_mean_std_error = (count_variance / m as f64).sqrt();
    let expected_mean = 2.0 * half_width * rho_ref;
    let no_points = count_mean == 0.0;
    let fano = (!no_points).then(|| count_variance / count_mean);
    let mut notes = Vec::new();
    if no_points {
        notes.push("no points in any window".to_string());
    }

    let chi2 = match poisson_chi_square(&counts, expected_mean) {
        Ok(t) => Some(t),
        Err(e) => {
            notes.push(format!("chi-square: {e}"));
            None
        }
    };
    let spacing = match spacing_test(batch, energy, half_width, rho_ref) {
        Ok(t) => Some(t),
        Err(e) => {
            notes.push(format!("spacing: {e}"));
            None
        }
    };

    let mean_pass = (count_mean - expected_mean).abs() <= MEAN_SIGMAS * count_mean_std_error;
    let fano_pass = fano.is_some_and(|f| (FANO_RANGE.0..=FANO_RANGE.1).contains(&f));
    Ok(PoissonReport {
        energy,
        half_width,
        intensity_ref: rho_ref,
        n_replicas: m,
        significance: SIGNIFICANCE,
        expected_mean,
        count_mean,
        count_mean_std_error,
        count_variance,
        fano,
        no_points,
        chi2_pass: chi2.as_ref().is_some_and(|t| t.pass),
        chi2,
        ks_spacing: spacing.as_ref().map(|s| s.ks_distance),
        ks_critical: spacing.as_ref().map(|s| s.critical),
        spacing_gaps: spacing.as_ref().map_or(0, |s| s.gaps),
        spacing_pass: spacing.as_ref().is_some_and(|s| s.pass),
        mean_pass,
        fano_pass,
        notes,
    })
}

/// One row per replica: `replica,count`.
pub fn write_counts_csv(path: &Path, counts: &[usize]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "replica,count")?;
    for (i, c) in counts.iter().enumerate() {
        writeln!(out, "{i},{c}")?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localstats::{picket_fence_fixture, poisson_fixture};

    #[test]
    fn synthetic_poisson_passes() {
        let batch = poisson_fixture(0.3, &[0.0], 5.0, 2000, 200, 1).unwrap();
        let r = counting_report(&batch, 0.0, 5.0, 0.3).unwrap();
        let fano = r.fano.unwrap();
        assert!((0.85..=1.15).contains(&fano), "fano {fano}");
        assert!(r.chi2_pass && r.mean_pass && r.spacing_pass, "{r:?}");
        assert!(r.chi2.as_ref().unwrap().dof >= 3);
    }

    #[test]
    fn picket_fence_fails_and_empty_windows_flagged() {
        let fence = picket_fence_fixture(0.3, &[0.0], 5.0, 500, 50).unwrap();
        let r = counting_report(&fence, 0.0, 5.0, 0.3).unwrap();
        assert!(!r.chi2_pass && !r.spacing_pass);

        let batch = poisson_fixture(0.3, &[0.0], 5.0, 200, 50, 2).unwrap();
        let r = counting_report(&batch, 100.0, 5.0, 0.3).unwrap();
        assert!(r.no_points && r.fano.is_none() && !r.all_pass());
        assert_eq!(r.count_mean, 0.0);

        let small = poisson_fixture(0.3, &[0.0], 5.0, 99, 50, 2).unwrap();
        assert!(matches!(counting_report(&small, 0.0, 5.0, 0.3), Err(Error::UnderPowered(_))));
    }

    #[test]
    fn groups_have_enough_expected_mass() {
        let counts: Vec<usize> = (0..1000).map(|i| i % 7).collect();
        let t = poisson_chi_square(&counts, 3.0).unwrap();
        assert_eq!(t.group_starts[0], 0);
        assert!(t.group_starts.windows(2).all(|w| w[0] < w[1]));
        assert!(!t.pass);
    }
}
