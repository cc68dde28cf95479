//! Built-in acceptance suite with pinned seeds, shared by `betagas validate`
//! and the `acceptance` test target.

use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::equilibrium::{default_grid, solve_equilibrium, stieltjes_residual, EquilibriumSolution, SolverConfig};
use crate::error::{Error, Result};
use crate::localstats::{
    counting_report, duplicated_fixture, pair_factorization, picket_fence_fixture, poisson_fixture, spacing_test,
    two_energy_independence, DEFAULT_BINS,
};
use crate::potential::{reference_density, Grid, PotentialSpec};
use crate::sampler::{
    cell_masses, estimate_exp_log_potential, estimate_partition_ratio, marginal_histogram, mcmc_sample, read_batch,
    tridiagonal_gaussian_sample, write_batch, BruteForceOracle, EnsembleConfig, McmcSettings, SampleBatch,
};
use crate::stats::{ks_critical_two_sample, ks_two_sample};

const LOCAL_N: usize = 500;
const LOCAL_REPLICAS: usize = 2000;
const LOCAL_W: f64 = 5.0;
const LOCAL_ENERGIES: [f64; 2] = [0.0, 1.0];
const LOCAL_SEED: u64 = 20_500;
const FIXTURE_RHO: f64 = 0.3;

#[derive(Debug, Clone, Default)]
pub struct ValidateOptions {
    /// Skip the criteria that need the Poisson-scale runs.
    pub quick: bool,
    /// Directory holding the calibration fixtures; missing files are
    /// generated and written there.
    pub fixtures: Option<PathBuf>,
    /// Restrict to these criterion numbers.
    pub only: Option<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: String,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

pub struct Criterion {
    pub id: u8,
    pub title: &'static str,
    pub quick: bool,
    run: fn(&Suite) -> Result<(bool, String)>,
}

pub const CRITERIA: [Criterion; 12] = [
    Criterion { id: 1, title: "c=0 collapse", quick: true, run: c01_collapse },
    Criterion { id: 2, title: "moment identity", quick: true, run: c02_moments },
    Criterion { id: 3, title: "fixed-point self-consistency", quick: true, run: c03_self_consistency },
    Criterion { id: 4, title: "Stieltjes residual", quick: true, run: c04_stieltjes },
    Criterion { id: 5, title: "sampler cross-validation", quick: true, run: c05_cross_validation },
    Criterion { id: 6, title: "global law", quick: false, run: c06_global_law },
    Criterion { id: 7, title: "marginal-identity bridge", quick: true, run: c07_bridge },
    Criterion { id: 8, title: "Poisson limit", quick: false, run: c08_poisson },
    Criterion { id: 9, title: "correlation factorization", quick: false, run: c09_factorization },
    Criterion { id: 10, title: "two-energy independence", quick: false, run: c10_independence },
    Criterion { id: 11, title: "test-harness calibration", quick: false, run: c11_calibration },
    Criterion { id: 12, title: "small-N oracle", quick: true, run: c12_small_n },
];

/// Lazily shared inputs of several criteria.
pub struct Suite {
    options: ValidateOptions,
    gaussian_c1: OnceLock<Result<EquilibriumSolution>>,
    local_batch: OnceLock<Result<SampleBatch>>,
}

fn shared<T>(cell: &OnceLock<Result<T>>, init: impl FnOnce() -> Result<T>) -> Result<&T> {
    cell.get_or_init(init).as_ref().map_err(|e| Error::InvalidArgument(e.to_string()))
}

impl Suite {
    pub fn new(options: ValidateOptions) -> Self {
        Self {
            options,
            gaussian_c1: OnceLock::new(),
            local_batch: OnceLock::new(),
        }
    }

    fn gaussian_c1(&self) -> Result<&EquilibriumSolution> {
        shared(&self.gaussian_c1, || solve_gaussian(1.0))
    }

    /// Exact Gaussian batch at N = 500, c = 1 used by criteria 6 and 8-10.
    fn local_batch(&self) -> Result<&SampleBatch> {
        shared(&self.local_batch, || {
            tridiagonal_gaussian_sample(LOCAL_N, 2.0 / LOCAL_N as f64, LOCAL_SEED, LOCAL_REPLICAS)
        })
    }

    fn selected(&self) -> impl Iterator<Item = &'static Criterion> + '_ {
        CRITERIA.iter().filter(move |c| {
            (!self.options.quick || c.quick) && self.options.only.as_ref().is_none_or(|ids| ids.contains(&c.id))
        })
    }

    pub fn run_one(&self, criterion: &Criterion) -> CriterionOutcome {
        let start = Instant::now();
        let (pass, detail) = match (criterion.run)(self) {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        CriterionOutcome {
            id: criterion.id,
            title: criterion.title.to_string(),
            pass,
            detail,
            seconds: start.elapsed().as_secs_f64(),
        }
    }

    /// Runs the selected criteria in order, calling `report` after each.
    pub fn run(&self, mut report: impl FnMut(&CriterionOutcome)) -> Vec<CriterionOutcome> {
        self.selected()
            .map(|c| {
                let outcome = self.run_one(c);
                report(&outcome);
                outcome
            })
            .collect()
    }
}

pub fn run_suite(options: ValidateOptions) -> Vec<CriterionOutcome> {
    Suite::new(options).run(|_| {})
}

pub fn format_outcome(o: &CriterionOutcome) -> String {
    format!(
        "criterion {:>2} {:<30} {}  ({:.1} s)  {}",
        o.id,
        o.title,
        if o.pass { "PASS" } else { "FAIL" },
        o.seconds,
        o.detail
    )
}

fn solve_gaussian(c: f64) -> Result<EquilibriumSolution> {
    let v = PotentialSpec::gaussian();
    solve_equilibrium(&v, c, &default_grid(&v, c)?, &SolverConfig::default())
}

fn c01_collapse(_: &Suite) -> Result<(bool, String)> {
    let start = Instant::now();
    let sol = solve_gaussian(0.0)?;
    let seconds = start.elapsed().as_secs_f64();
    let alpha = reference_density(&PotentialSpec::gaussian(), sol.grid())?.density;
    let err = sol.rho.sup_distance(&alpha);
    Ok((err <= 1e-12 && seconds < 1.0, format!("sup |rho_0 - alpha| = {err:.2e}, solve {seconds:.3} s")))
}

fn c02_moments(_: &Suite) -> Result<(bool, String)> {
    let mut pass = true;
    let mut parts = Vec::new();
    for c in [0.25, 1.0, 4.0] {
        let start = Instant::now();
        let sol = solve_gaussian(c)?;
        let seconds = start.elapsed().as_secs_f64();
        let (m1, m2) = (sol.rho.moment(1), sol.rho.moment(2));
        pass &= m1.abs() <= 1e-6 && (m2 - 1.0 - c).abs() <= 2e-3 && seconds < 10.0;
        parts.push(format!("c={c}: m1 {m1:.1e}, m2-1-c {:.1e}, {seconds:.2} s", m2 - 1.0 - c));
    }
    Ok((pass, parts.join("; ")))
}

fn c03_self_consistency(_: &Suite) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for v in [PotentialSpec::gaussian(), PotentialSpec::quartic()] {
        for c in [0.5, 2.0] {
            let sol = solve_equilibrium(&v, c, &default_grid(&v, c)?, &SolverConfig::default())?;
            worst = worst.max(sol.residual);
        }
    }
    Ok((worst <= 1e-10, format!("max residual {worst:.2e}")))
}

fn c04_stieltjes(suite: &Suite) -> Result<(bool, String)> {
    let v = PotentialSpec::gaussian();
    let coarse = suite.gaussian_c1()?;
    let fine = solve_equilibrium(&v, 1.0, &coarse.grid().refined(), &SolverConfig::default())?;
    let mut pass = true;
    let mut parts = Vec::new();
    for z in [Complex64::new(0.0, 1.0), Complex64::new(0.0, 2.0), Complex64::new(1.0, 1.0)] {
        let r0 = stieltjes_residual(coarse, &v, z)?;
        let r1 = stieltjes_residual(&fine, &v, z)?;
        pass &= r0 < 1e-3 && r1 <= 0.5 * r0;
        parts.push(format!("z={z}: {r0:.2e} -> {r1:.2e}"));
    }
    Ok((pass, parts.join("; ")))
}

fn c05_cross_validation(_: &Suite) -> Result<(bool, String)> {
    let start = Instant::now();
    let (n, c, m) = (50, 1.0, 10_000);
    let config = EnsembleConfig::high_temperature(n, c, PotentialSpec::gaussian(), 505)?;
    let chain = mcmc_sample(&config, m)?;
    let exact = tridiagonal_gaussian_sample(n, config.beta, 506, m)?;
    let (a, b) = (chain.pooled(), exact.pooled());
    let d = ks_two_sample(&a, &b);
    let critical = ks_critical_two_sample(a.len(), b.len(), 0.01);
    let seconds = start.elapsed().as_secs_f64();
    Ok((
        d < critical && seconds < 300.0,
        format!(
            "KS {d:.5} vs critical {critical:.5}, acceptance {:.3}, {seconds:.1} s",
            chain.diagnostics.acceptance_rate
        ),
    ))
}

fn c06_global_law(suite: &Suite) -> Result<(bool, String)> {
    let sol = suite.gaussian_c1()?;
    let batch = suite.local_batch()?;
    let grid = Grid::new(-6.0, 6.0, 49)?;
    let hist = marginal_histogram(batch, &grid, 1)?;
    let expected = cell_masses(&grid, |x| sol.density_at(x));
    let p = hist.cell_probabilities();
    let se = hist.binomial_std_errors();
    let mut worst: f64 = 0.0;
    let mut bins = 0;
    for i in 0..grid.len() {
        if sol.density_at(grid.node(i)) > 0.01 {
            worst = worst.max((p[i] - expected[i]).abs() / se[i]);
            bins += 1;
        }
    }
    Ok((
        worst <= 3.0 && hist.coordinates() >= 1_000_000,
        format!("{} coordinates, {bins} bins, worst deviation {worst:.2} SE", hist.coordinates()),
    ))
}

fn c07_bridge(suite: &Suite) -> Result<(bool, String)> {
    let sol = suite.gaussian_c1()?;
    let (n, c) = (200usize, 1.0);
    let beta = 2.0 * c / n as f64;
    let batch = tridiagonal_gaussian_sample(n - 1, beta, 707, 2000)?;
    let mut pass = true;
    let mut parts = Vec::new();
    for x in [0.0, 1.0, -1.0, 2.0, -2.0] {
        let est = estimate_exp_log_potential(&batch, x)?;
        let target = (2.0 * c * sol.log_potential_at(x)).exp();
        pass &= est.within(target, 3.0);
        parts.push(format!("x={x}: z {:+.2}", est.z_score(target)));
    }
    let ratio = estimate_partition_ratio(&batch, &PotentialSpec::gaussian(), sol.grid())?;
    pass &= ratio.within(sol.z_c, 3.0);
    // exact Z_{β,N} / Z_{β,N-1} for the Gaussian potential at this N
    let finite_n = (2.0 * std::f64::consts::PI).sqrt() * gamma(1.0 + n as f64 * beta / 2.0) / gamma(1.0 + beta / 2.0);
    parts.push(format!(
        "Z ratio {:.4} +- {:.4} vs Z_c {:.4}: z {:+.2} (vs finite-N value {finite_n:.4}: z {:+.2})",
        ratio.value,
        ratio.std_error,
        sol.z_c,
        ratio.z_score(sol.z_c),
        ratio.z_score(finite_n)
    ));
    Ok((pass, parts.join("; ")))
}

fn c08_poisson(suite: &Suite) -> Result<(bool, String)> {
    let start = Instant::now();
    let sol = suite.gaussian_c1()?;
    let batch = suite.local_batch()?;
    let mut pass = true;
    let mut parts = Vec::new();
    for e in LOCAL_ENERGIES {
        let r = counting_report(batch, e, LOCAL_W, sol.density_at(e))?;
        pass &= r.all_pass();
        parts.push(format!(
            "E={e}: mean {:.3} vs {:.3} (z {:+.2}), fano {:.3}, chi2 {:.1}/{:.1}, KS {:.4}/{:.4}",
            r.count_mean,
            r.expected_mean,
            (r.count_mean - r.expected_mean) / r.count_mean_std_error,
            r.fano.unwrap_or(f64::NAN),
            r.chi2.as_ref().map_or(f64::NAN, |t| t.statistic),
            r.chi2.as_ref().map_or(f64::NAN, |t| t.critical),
            r.ks_spacing.unwrap_or(f64::NAN),
            r.ks_critical.unwrap_or(f64::NAN),
        ));
    }
    let seconds = start.elapsed().as_secs_f64();
    Ok((pass && seconds <= 1200.0, parts.join("; ")))
}

fn c09_factorization(suite: &Suite) -> Result<(bool, String)> {
    let batch = suite.local_batch()?;
    let mut pass = true;
    let mut parts = Vec::new();
    for e in LOCAL_ENERGIES {
        let cells = pair_factorization(batch, e, LOCAL_W, DEFAULT_BINS)?;
        pass &= cells.iter().all(|c| c.in_band && c.overlaps_one);
        let lo = cells.iter().map(|c| c.ratio).fold(f64::INFINITY, f64::min);
        let hi = cells.iter().map(|c| c.ratio).fold(f64::NEG_INFINITY, f64::max);
        let z = cells.iter().map(|c| ((c.ratio - 1.0) / c.std_error).abs()).fold(0.0, f64::max);
        parts.push(format!("E={e}: ratios in [{lo:.3}, {hi:.3}], max |ratio-1|/SE {z:.2}"));
    }
    Ok((pass, parts.join("; ")))
}

fn c10_independence(suite: &Suite) -> Result<(bool, String)> {
    let batch = suite.local_batch()?;
    let t = two_energy_independence(batch, LOCAL_ENERGIES[0], LOCAL_ENERGIES[1], LOCAL_W)?;
    Ok((t.pass, format!("covariance {:.4}, z {:+.2}", t.covariance, t.z_score)))
}

fn load_or_create(dir: &Path, name: &str, make: impl FnOnce() -> Result<SampleBatch>) -> Result<SampleBatch> {
    let path = dir.join(format!("{name}.bin"));
    if path.exists() {
        return read_batch(&path).map_err(|e| Error::Container(format!("fixture {}: {e}", path.display())));
    }
    let batch = make()?;
    std::fs::create_dir_all(dir)?;
    write_batch(&path, &batch)?;
    Ok(batch)
}

fn fixture(suite: &Suite, name: &str, make: impl FnOnce() -> Result<SampleBatch>) -> Result<SampleBatch> {
    match &suite.options.fixtures {
        Some(dir) => load_or_create(dir, name, make),
        None => make(),
    }
}

fn c11_calibration(suite: &Suite) -> Result<(bool, String)> {
    let (mut chi2, mut ks, mut indep) = (0, 0, 0);
    for rep in 0..100u64 {
        let batch = poisson_fixture(FIXTURE_RHO, &LOCAL_ENERGIES, LOCAL_W, LOCAL_REPLICAS, LOCAL_N, 1100 + rep)?;
        let report = counting_report(&batch, 0.0, LOCAL_W, FIXTURE_RHO)?;
        chi2 += usize::from(report.chi2_pass);
        ks += usize::from(report.spacing_pass);
        indep += usize::from(two_energy_independence(&batch, 0.0, 1.0, LOCAL_W)?.pass);
    }
    let poisson = fixture(suite, "poisson", || {
        poisson_fixture(FIXTURE_RHO, &LOCAL_ENERGIES, LOCAL_W, LOCAL_REPLICAS, LOCAL_N, 1099)
    })?;
    let fence = fixture(suite, "picket_fence", || {
        picket_fence_fixture(FIXTURE_RHO, &[0.0], LOCAL_W, LOCAL_REPLICAS, LOCAL_N)
    })?;
    let dup = fixture(suite, "duplicated", || {
        duplicated_fixture(FIXTURE_RHO, 0.0, 1.0, LOCAL_W, LOCAL_REPLICAS, LOCAL_N, 1098)
    })?;
    let fixture_pass = counting_report(&poisson, 0.0, LOCAL_W, FIXTURE_RHO)?.all_pass();
    let fence_rejected = !spacing_test(&fence, 0.0, LOCAL_W, FIXTURE_RHO)?.pass
        && !counting_report(&fence, 0.0, LOCAL_W, FIXTURE_RHO)?.chi2_pass;
    let dup_rejected = !two_energy_independence(&dup, 0.0, 1.0, LOCAL_W)?.pass;
    let pass = chi2 >= 97 && ks >= 97 && indep >= 97 && fixture_pass && fence_rejected && dup_rejected;
    Ok((
        pass,
        format!(
            "null passes chi2 {chi2}/100, spacing {ks}/100, independence {indep}/100; \
             poisson fixture {}, picket fence rejected {fence_rejected}, duplicated rejected {dup_rejected}",
            if fixture_pass { "passes" } else { "fails" }
        ),
    ))
}

fn c12_small_n(_: &Suite) -> Result<(bool, String)> {
    let v = PotentialSpec::gaussian();
    let oracle = BruteForceOracle::new(2, 1.0, &v)?;
    let config = EnsembleConfig::new(2, 1.0, v, 1212)?.with_mcmc(McmcSettings {
        sweeps_burnin: 1000,
        sweeps_between: 5,
        ..McmcSettings::default()
    });
    let batch = mcmc_sample(&config, 100_000)?;
    let grid = Grid::new(-5.0, 5.0, 41)?;
    let hist = marginal_histogram(&batch, &grid, 100)?;
    let expected = cell_masses(&grid, |x| oracle.marginal1(x));
    let p = hist.cell_probabilities();
    let se = hist.block_std_errors()?;
    let coordinates = hist.coordinates() as f64;
    let mut worst: f64 = 0.0;
    let mut bins = 0;
    for i in 0..grid.len() {
        if expected[i] * coordinates >= 25.0 {
            worst = worst.max((p[i] - expected[i]).abs() / se[i]);
            bins += 1;
        }
    }
    Ok((worst <= 3.0, format!("{bins} bins, worst deviation {worst:.2} batch-means SE")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn criteria_are_numbered_in_order() {
        for (i, c) in CRITERIA.iter().enumerate() {
            assert_eq!(c.id as usize, i + 1);
        }
        let quick = Suite::new(ValidateOptions {
            quick: true,
            ..Default::default()
        });
        assert!(quick.selected().all(|c| c.quick));
        let one = Suite::new(ValidateOptions {
            only: Some(vec![1]),
            ..Default::default()
        });
        let outcomes = one.run(|_| {});
        assert_eq!(outcomes.len(), 1);
        assert!(outcomes[0].pass, "{}", outcomes[0].detail);
    }
}
