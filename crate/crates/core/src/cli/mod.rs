//! Command-line pipeline: `equilibrium`, `sample`, `localstats`, `validate`
//! and `report`. Every stage reads one [`ExperimentConfig`] and records its
//! outputs in `manifest.json` inside the output directory.
//!
//! Exit codes: 0 success, 1 failed test or solver failure, 2 invalid input,
//! 3 sampler warning under `--strict`. `validate` exits with the number of
//! failed criteria (at most 125).

mod config;
mod manifest;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub use config::{
    canonical, config_hash, ExperimentConfig, GridOverrides, LocalSettings, SamplerMethod, SamplerSettings,
    SCHEMA_VERSION,
};
pub use manifest::{to_canonical_json, unix_now, write_json, Manifest, StageRecord, StageStatus, MANIFEST_FILE};

use crate::equilibrium::{solve_equilibrium, EquilibriumSolution};
use crate::error::{Error, Result};
use crate::localstats::{
    correlation_estimate, counting_report, pair_factorization, two_energy_independence, window_counts,
    write_counts_csv,
};
use crate::potential::{reference_density, PotentialSpec};
use crate::sampler::{
    encode_batch, mcmc_sample, read_batch, tridiagonal_sample, write_batch_csv, EnsembleConfig, SampleBatch,
};
use crate::stats::{ks_critical_two_sample, ks_two_sample};
use crate::validate::{format_outcome, Suite, ValidateOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_WARNING: i32 = 3;
const MAX_EXIT: usize = 125;

/// Relative tolerance when comparing couplings across stages.
const COUPLING_TOL: f64 = 1e-9;

#[derive(Parser, Debug)]
#[command(name = "betagas", version, about = "High-temperature beta ensembles: equilibrium, sampling, local statistics")]
struct Cli {
    /// Size of the worker thread pool (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Oracle {
    Tridiagonal,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for rho_c and write rho_c.csv, alpha.csv and equilibrium.json.
    Equilibrium(Common),
    /// Draw a batch and write batch.bin and sample.json.
    Sample {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
        /// Also draw an exact batch and compare the pooled marginals.
        #[arg(long, value_enum)]
        oracle: Option<Oracle>,
        /// Exit 3 when the sampler reports a warning.
        #[arg(long)]
        strict: bool,
    },
    /// Window counts, spacing, correlation and independence tests.
    Localstats {
        #[command(flatten)]
        common: Common,
        /// Batch file (default: <out>/batch.bin).
        #[arg(long)]
        batch: Option<PathBuf>,
        /// equilibrium.json of the matching solve (default: <out>/equilibrium.json).
        #[arg(long, visible_alias = "rho")]
        equilibrium: Option<PathBuf>,
        /// Constant reference intensity instead of rho_c(E); skips the coupling check.
        #[arg(long)]
        intensity: Option<f64>,
    },
    /// Run the acceptance criteria.
    Validate {
        #[arg(long)]
        quick: bool,
        /// Directory for the calibration fixtures.
        #[arg(long)]
        fixtures: Option<PathBuf>,
        /// Comma-separated criterion numbers.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<u8>>,
        /// Also write validate.json here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Flatten JSON outputs into a long CSV (file, key, value).
    Report {
        /// Directory whose *.json files are merged.
        #[arg(long)]
        out: PathBuf,
        /// Destination (default: <out>/summary.csv).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return fail(None, "startup", &Error::InvalidArgument("--threads must be >= 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(pool) => pool,
        Err(e) => return fail(None, "startup", &Error::InvalidArgument(e.to_string())),
    };
    pool.install(|| dispatch(cli.command))
}

fn dispatch(command: Command) -> i32 {
    match command {
        Command::Equilibrium(common) => staged("equilibrium", &common, None, cmd_equilibrium),
        Command::Sample {
            common,
            seed,
            oracle,
            strict,
        } => staged("sample", &common, seed, |cfg, out| {
            cmd_sample(cfg, out, oracle.is_some(), strict)
        }),
        Command::Localstats {
            common,
            batch,
            equilibrium,
            intensity,
        } => staged("localstats", &common, None, |cfg, out| {
            cmd_localstats(cfg, out, batch.as_deref(), equilibrium.as_deref(), intensity)
        }),
        Command::Validate {
            quick,
            fixtures,
            only,
            out,
        } => cmd_validate(quick, fixtures, only, out.as_deref()),
        Command::Report { out, csv } => match cmd_report(&out, csv.as_deref()) {
            Ok(()) => EXIT_OK,
            Err(e) => fail(Some(&out), "report", &e),
        },
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonConvergence { .. } | Error::Normalization(_) => EXIT_FAILED,
        _ => EXIT_INVALID,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidArgument(_) => "invalid_argument",
        Error::InadmissiblePotential(_) => "inadmissible_potential",
        Error::InadequateDomain(_) => "inadequate_domain",
        Error::Normalization(_) => "normalization",
        Error::DivergentEntropy { .. } => "divergent_entropy",
        Error::NonConvergence { .. } => "non_convergence",
        Error::Unsupported(_) => "unsupported",
        Error::UnderPowered(_) => "under_powered",
        Error::Container(_) => "container",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
    }
}

/// Prints a structured error to stderr, writes `error_<stage>.json` when an
/// output directory is known, and returns the exit code.
fn fail(out: Option<&Path>, stage: &str, e: &Error) -> i32 {
    let mut record = json!({
        "schema_version": SCHEMA_VERSION,
        "stage": stage,
        "error": error_kind(e),
        "message": e.to_string(),
    });
    if let Error::NonConvergence {
        iterations,
        residual,
        residual_history,
    } = e
    {
        record["iterations"] = json!(iterations);
        record["residual"] = json!(residual);
        record["residual_history"] = json!(residual_history);
    }
    eprintln!("{}", serde_json::to_string(&record).unwrap_or_default());
    if let Some(dir) = out {
        if std::fs::create_dir_all(dir).is_ok() {
            let _ = write_json(&dir.join(format!("error_{stage}.json")), &record);
        }
    }
    exit_code(e)
}

struct StageResult {
    status: StageStatus,
    outputs: Vec<String>,
    code: i32,
}

/// Loads the config, runs one stage and records it in the manifest.
fn staged(
    stage: &str,
    common: &Common,
    seed: Option<u64>,
    body: impl FnOnce(&ExperimentConfig, &Path) -> Result<StageResult>,
) -> i32 {
    let started = unix_now();
    let mut cfg = match ExperimentConfig::load(&common.config) {
        Ok(cfg) => cfg,
        Err(e) => return fail(common.out.as_deref(), stage, &e),
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let out = common.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    if let Err(e) = std::fs::create_dir_all(&out) {
        return fail(None, stage, &e.into());
    }
    let mut manifest = Manifest::open(&out, &cfg.hash);
    let (result, code) = match body(&cfg, &out) {
        Ok(r) => {
            let code = r.code;
            (r, code)
        }
        Err(e) => {
            let code = fail(Some(&out), stage, &e);
            let r = StageResult {
                status: StageStatus::Error,
                outputs: vec![format!("error_{stage}.json")],
                code,
            };
            (r, code)
        }
    };
    manifest.record(
        stage,
        StageRecord {
            status: result.status,
            started_unix: started,
            finished_unix: unix_now(),
            outputs: result.outputs,
            seed: (stage == "sample").then_some(cfg.seed),
        },
    );
    match manifest.save(&out) {
        Ok(()) => code,
        Err(e) => fail(None, stage, &e),
    }
}

fn write_profile_csv(path: &Path, header: &str, xs: &[f64], columns: &[&[f64]]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{header}")?;
    for (i, x) in xs.iter().enumerate() {
        write!(out, "{x:e}")?;
        for col in columns {
            write!(out, ",{:e}", col[i])?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

fn equilibrium_record(cfg: &ExperimentConfig, sol: &EquilibriumSolution) -> Value {
    let grid = sol.grid();
    json!({
        "schema_version": SCHEMA_VERSION,
        "config_hash": cfg.hash,
        "c": cfg.c,
        "potential": cfg.potential,
        "grid": {"lo": grid.lo(), "hi": grid.hi(), "n": grid.len(), "spacing": grid.spacing()},
        "solver": cfg.solver,
        "z_c": sol.z_c,
        "iterations": sol.iterations,
        "residual": sol.residual,
        "converged": sol.residual <= cfg.solver.tol,
        "free_energy": sol.free_energy,
        "mass": sol.rho.integral(),
        "first_moment": sol.rho.moment(1),
        "second_moment": sol.rho.moment(2),
        "rho_csv": "rho_c.csv",
        "alpha_csv": "alpha.csv",
    })
}

fn cmd_equilibrium(cfg: &ExperimentConfig, out: &Path) -> Result<StageResult> {
    let grid = cfg.solver_grid()?;
    let sol = solve_equilibrium(&cfg.potential, cfg.c, &grid, &cfg.solver)?;
    let alpha = reference_density(&cfg.potential, &grid)?;
    let xs = grid.nodes();
    write_profile_csv(
        &out.join("rho_c.csv"),
        "x,rho_c,U_c",
        &xs,
        &[sol.rho.values(), &sol.log_potential],
    )?;
    write_profile_csv(&out.join("alpha.csv"), "x,alpha", &xs, &[alpha.density.values()])?;
    let record = equilibrium_record(cfg, &sol);
    write_json(&out.join("equilibrium.json"), &record)?;
    let converged = sol.residual <= cfg.solver.tol;
    Ok(StageResult {
        status: if converged { StageStatus::Pass } else { StageStatus::Fail },
        outputs: vec!["rho_c.csv".into(), "alpha.csv".into(), "equilibrium.json".into()],
        code: if converged { EXIT_OK } else { EXIT_FAILED },
    })
}

fn draw(config: &EnsembleConfig, method: SamplerMethod, count: usize) -> Result<SampleBatch> {
    match method {
        SamplerMethod::Mcmc => mcmc_sample(config, count),
        SamplerMethod::Tridiagonal => tridiagonal_sample(config, count),
    }
}

/// Writes the encoded batch and returns its SHA-256.
fn save_batch(path: &Path, batch: &SampleBatch) -> Result<String> {
    let bytes = encode_batch(batch)?;
    std::fs::write(path, &bytes)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn cmd_sample(cfg: &ExperimentConfig, out: &Path, oracle: bool, strict: bool) -> Result<StageResult> {
    let s = &cfg.sampler;
    let ensemble = EnsembleConfig::high_temperature(s.n_particles, cfg.c, cfg.potential.clone(), cfg.seed)?
        .with_mcmc(s.mcmc.clone());
    if oracle && !cfg.potential.is_gaussian() {
        return Err(Error::Unsupported("the tridiagonal oracle needs the Gaussian potential".into()));
    }
    let batch = draw(&ensemble, s.method, s.replicas)?;
    let mut outputs = vec!["batch.bin".to_string()];
    let digest = save_batch(&out.join("batch.bin"), &batch)?;
    if s.write_csv {
        write_batch_csv(&out.join("batch.csv"), &batch)?;
        outputs.push("batch.csv".into());
    }
    let mut warning = batch.diagnostics.warning.clone();
    let mut record = json!({
        "schema_version": SCHEMA_VERSION,
        "config_hash": cfg.hash,
        "method": s.method,
        "n_particles": s.n_particles,
        "replicas": batch.len(),
        "c": cfg.c,
        "beta": ensemble.beta,
        "seed": cfg.seed,
        "diagnostics": batch.diagnostics,
        "batch": "batch.bin",
        "batch_sha256": digest,
    });

    if oracle {
        let exact = tridiagonal_sample(&ensemble, s.replicas)?;
        let exact_digest = save_batch(&out.join("batch_tridiagonal.bin"), &exact)?;
        let (a, b) = (batch.pooled(), exact.pooled());
        let distance = ks_two_sample(&a, &b);
        let critical = ks_critical_two_sample(a.len(), b.len(), crate::localstats::SIGNIFICANCE);
        let pass = distance <= critical;
        if !pass {
            warning.get_or_insert_with(|| format!("oracle KS distance {distance:.4} exceeds {critical:.4}"));
        }
        record["oracle"] = json!({
            "method": "tridiagonal",
            "batch": "batch_tridiagonal.bin",
            "batch_sha256": exact_digest,
            "ks_distance": distance,
            "ks_critical": critical,
            "pass": pass,
        });
        outputs.push("batch_tridiagonal.bin".into());
    }
    record["warning"] = json!(warning);
    write_json(&out.join("sample.json"), &record)?;
    outputs.push("sample.json".into());
    let (status, code) = match (&warning, strict) {
        (None, _) => (StageStatus::Pass, EXIT_OK),
        (Some(_), false) => (StageStatus::Warning, EXIT_OK),
        (Some(_), true) => (StageStatus::Warning, EXIT_WARNING),
    };
    if let Some(w) = &warning {
        eprintln!("warning: {w}");
    }
    Ok(StageResult { status, outputs, code })
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

/// `(x, rho_c)` columns of a profile CSV.
fn read_profile(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = read_text(path)?;
    let bad = |line: usize| Error::InvalidArgument(format!("{}: malformed line {line}", path.display()));
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let mut fields = line.split(',');
        let x: f64 = fields.next().and_then(|f| f.trim().parse().ok()).ok_or_else(|| bad(i + 1))?;
        let y: f64 = fields.next().and_then(|f| f.trim().parse().ok()).ok_or_else(|| bad(i + 1))?;
        xs.push(x);
        ys.push(y);
    }
    if xs.len() < 2 || xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(format!("{}: need increasing x", path.display())));
    }
    Ok((xs, ys))
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x < xs[0] || x > xs[xs.len() - 1] {
        return 0.0;
    }
    let j = xs.partition_point(|t| *t <= x).clamp(1, xs.len() - 1);
    let t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
    ys[j - 1] + t * (ys[j] - ys[j - 1])
}

fn same_coupling(a: f64, b: f64) -> bool {
    (a - b).abs() <= COUPLING_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Reference intensity at each configured energy, after checking that the
/// batch, the equilibrium record and the config describe the same system.
fn reference_intensities(
    cfg: &ExperimentConfig,
    batch: &SampleBatch,
    equilibrium: &Path,
) -> Result<Vec<f64>> {
    let record: Value = serde_json::from_str(&read_text(equilibrium)?)?;
    let eq_c = record["c"]
        .as_f64()
        .ok_or_else(|| Error::InvalidArgument(format!("{}: missing \"c\"", equilibrium.display())))?;
    let eq_potential: PotentialSpec = serde_json::from_value(record["potential"].clone())?;
    let batch_c = batch.config.coupling();
    if !same_coupling(eq_c, cfg.c) || !same_coupling(batch_c, cfg.c) {
        return Err(Error::InvalidArgument(format!(
            "coupling mismatch: config c = {}, equilibrium c = {eq_c}, batch c = {batch_c}",
            cfg.c
        )));
    }
    if eq_potential != cfg.potential || batch.config.potential != cfg.potential {
        return Err(Error::InvalidArgument(
            "potential mismatch between config, equilibrium and batch".into(),
        ));
    }
    let rho_csv = record["rho_csv"].as_str().unwrap_or("rho_c.csv");
    let base = equilibrium.parent().unwrap_or(Path::new("."));
    let (xs, ys) = read_profile(&base.join(rho_csv))?;
    Ok(cfg
        .localstats
        .energies
        .iter()
        .map(|e| interpolate(&xs, &ys, *e))
        .collect())
}

fn energy_tag(e: f64) -> String {
    format!("E{e}")
}

fn cmd_localstats(
    cfg: &ExperimentConfig,
    out: &Path,
    batch_path: Option<&Path>,
    equilibrium: Option<&Path>,
    intensity: Option<f64>,
) -> Result<StageResult> {
    let batch_path = batch_path.map_or_else(|| out.join("batch.bin"), Path::to_path_buf);
    if !batch_path.is_file() {
        return Err(Error::InvalidArgument(format!("{}: batch file not found", batch_path.display())));
    }
    let batch = read_batch(&batch_path)?;
    let settings = &cfg.localstats;
    if settings.energies.is_empty() {
        return Err(Error::InvalidArgument("localstats.energies is empty".into()));
    }
    let intensities = match intensity {
        Some(rho) => vec![rho; settings.energies.len()],
        None => reference_intensities(
            cfg,
            &batch,
            &equilibrium.map_or_else(|| out.join("equilibrium.json"), Path::to_path_buf),
        )?,
    };
    let w = settings.half_width;
    let mut outputs = Vec::new();
    let mut summary = Vec::new();
    let mut all_pass = true;
    for (&e, &rho) in settings.energies.iter().zip(&intensities) {
        let tag = energy_tag(e);
        let report = counting_report(&batch, e, w, rho)?;
        write_json(&out.join(format!("poisson_{tag}.json")), &report)?;
        write_counts_csv(&out.join(format!("counts_{tag}.csv")), &window_counts(&batch, e, w)?)?;
        let r1 = correlation_estimate(&batch, e, w, 1, settings.bins)?;
        let factorization = if settings.bins >= 3 {
            Some(pair_factorization(&batch, e, w, settings.bins)?)
        } else {
            None
        };
        let factorization_pass = factorization
            .as_ref()
            .is_none_or(|cells| cells.iter().all(|c| c.in_band || c.overlaps_one));
        write_json(
            &out.join(format!("correlation_{tag}.json")),
            &json!({
                "schema_version": SCHEMA_VERSION,
                "energy": e,
                "r1": r1,
                "factorization": factorization,
                "factorization_pass": factorization_pass,
            }),
        )?;
        outputs.extend([
            format!("poisson_{tag}.json"),
            format!("counts_{tag}.csv"),
            format!("correlation_{tag}.json"),
        ]);
        let pass = report.all_pass() && factorization_pass;
        all_pass &= pass;
        summary.push(json!({
            "energy": e,
            "intensity_ref": rho,
            "poisson_pass": report.all_pass(),
            "factorization_pass": factorization_pass,
        }));
    }

    let n = batch.n_particles() as f64;
    let mut independence = Vec::new();
    for (i, &e) in settings.energies.iter().enumerate() {
        for &f in &settings.energies[i + 1..] {
            if n * (e - f).abs() > 4.0 * w {
                let t = two_energy_independence(&batch, e, f, w)?;
                all_pass &= t.pass;
                independence.push(t);
            }
        }
    }
    write_json(
        &out.join("localstats.json"),
        &json!({
            "schema_version": SCHEMA_VERSION,
            "config_hash": cfg.hash,
            "half_width": w,
            "n_replicas": batch.len(),
            "energies": summary,
            "independence": independence,
            "pass": all_pass,
        }),
    )?;
    outputs.push("localstats.json".into());
    Ok(StageResult {
        status: if all_pass { StageStatus::Pass } else { StageStatus::Fail },
        outputs,
        code: if all_pass { EXIT_OK } else { EXIT_FAILED },
    })
}

fn cmd_validate(quick: bool, fixtures: Option<PathBuf>, only: Option<Vec<u8>>, out: Option<&Path>) -> i32 {
    let suite = Suite::new(ValidateOptions { quick, fixtures, only });
    let outcomes = suite.run(|o| println!("{}", format_outcome(o)));
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    println!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    if let Some(dir) = out {
        let written = std::fs::create_dir_all(dir).map_err(Error::from).and_then(|()| {
            write_json(
                &dir.join("validate.json"),
                &json!({"schema_version": SCHEMA_VERSION, "quick": quick, "criteria": outcomes}),
            )
        });
        if let Err(e) = written {
            return fail(None, "validate", &e);
        }
    }
    failed.min(MAX_EXIT) as i32
}

fn flatten(prefix: &str, value: &Value, rows: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, rows);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), v, rows);
            }
        }
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        Value::Null => rows.push((prefix.to_string(), String::new())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn cmd_report(dir: &Path, csv: Option<&Path>) -> Result<()> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::InvalidArgument(format!("no JSON files in {}", dir.display())));
    }
    let target = csv.map_or_else(|| dir.join("summary.csv"), Path::to_path_buf);
    let mut out = std::io::BufWriter::new(std::fs::File::create(&target)?);
    writeln!(out, "file,key,value")?;
    for path in &files {
        let value: Value = serde_json::from_str(&std::fs::read_to_string(path)?)
            .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let mut rows = Vec::new();
        flatten("", &canonical(&value), &mut rows);
        for (key, v) in rows {
            writeln!(out, "{},{},{}", csv_field(&name), csv_field(&key), csv_field(&v))?;
        }
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_and_flattening() {
        let xs = [0.0, 1.0, 2.0];
        let ys = [0.0, 2.0, 0.0];
        assert_eq!(interpolate(&xs, &ys, 0.5), 1.0);
        assert_eq!(interpolate(&xs, &ys, 2.0), 0.0);
        assert_eq!(interpolate(&xs, &ys, 3.0), 0.0);

        let mut rows = Vec::new();
        flatten("", &json!({"a": {"b": [1, "x,y"]}, "c": null}), &mut rows);
        assert_eq!(
            rows,
            vec![
                ("a.b[0]".to_string(), "1".to_string()),
                ("a.b[1]".to_string(), "x,y".to_string()),
                ("c".to_string(), String::new())
            ]
        );
        assert_eq!(csv_field("x,y"), "\"x,y\"");
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["betagas", "frobnicate"]), EXIT_INVALID);
        assert_eq!(run(["betagas", "--help"]), EXIT_OK);
        assert_eq!(run(["betagas", "equilibrium", "--config", "/nonexistent.json"]), EXIT_INVALID);
    }
}
