//! Small statistics toolkit shared by the sampler checks and the local
//! Poisson tests.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Asymptotic 1% critical constant of the Kolmogorov distribution.
pub const KS_CRITICAL_1PCT: f64 = 1.628;

/// Asymptotic Kolmogorov critical constant `sqrt(-ln(alpha/2) / 2)`.
pub fn ks_critical_constant(significance: f64) -> f64 {
    if (significance - 0.01).abs() < 1e-15 {
        KS_CRITICAL_1PCT
    } else {
        (-(0.5 * significance).ln() / 2.0).sqrt()
    }
}

pub fn ks_critical_one_sample(n: usize, significance: f64) -> f64 {
    ks_critical_constant(significance) / (n as f64).sqrt()
}

pub fn ks_critical_two_sample(n: usize, m: usize, significance: f64) -> f64 {
    let (n, m) = (n as f64, m as f64);
    ks_critical_constant(significance) * ((n + m) / (n * m)).sqrt()
}

fn sorted(data: &[f64]) -> Vec<f64> {
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// One-sample Kolmogorov-Smirnov distance `sup |F_n - F|`.
pub fn ks_one_sample(data: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let xs = sorted(data);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0, |acc, (i, &x)| {
        let f = cdf(x);
        let above = (i as f64 + 1.0) / n - f;
        let below = f - i as f64 / n;
        acc.max(above).max(below)
    })
}

/// Two-sample Kolmogorov-Smirnov distance `sup |F_n - G_m|`, evaluated after
/// every distinct value so ties are handled correctly.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let xs = sorted(a);
    let ys = sorted(b);
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let t = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= t {
            i += 1;
        }
        while j < ys.len() && ys[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Upper `significance` quantile of the chi-square distribution.
pub fn chi_square_critical(dof: usize, significance: f64) -> f64 {
    ChiSquared::new(dof as f64)
        .expect("chi-square needs positive degrees of freedom")
        .inverse_cdf(1.0 - significance)
}

/// Mean and unbiased variance.
pub fn mean_variance(data: &[f64]) -> (f64, f64) {
    let n = data.len() as f64;
    if data.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = data.iter().sum::<f64>() / n;
    if data.len() < 2 {
        return (mean, 0.0);
    }
    let var = data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Mean with its standard error `sd / sqrt(n)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn from_samples(data: &[f64]) -> Self {
        let (mean, var) = mean_variance(data);
        Self {
            value: mean,
            std_error: (var / data.len() as f64).sqrt(),
        }
    }

    /// `|value - target|` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.value - target) / self.std_error
    }

    pub fn within(&self, target: f64, sigmas: f64) -> bool {
        (self.value - target).abs() <= sigmas * self.std_error
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}
