use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::equilibrium::{default_grid, SolverConfig, DEFAULT_SPACING};
use crate::error::{Error, Result};
use crate::localstats::DEFAULT_BINS;
use crate::potential::{Grid, PotentialSpec};
use crate::sampler::McmcSettings;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SamplerMethod {
    #[default]
    Mcmc,
    Tridiagonal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridOverrides {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub spacing: f64,
}

impl Default for GridOverrides {
    fn default() -> Self {
        Self {
            lo: None,
            hi: None,
            spacing: DEFAULT_SPACING,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerSettings {
    pub n_particles: usize,
    pub replicas: usize,
    pub method: SamplerMethod,
    pub mcmc: McmcSettings,
    pub write_csv: bool,
}

impl Default for SamplerSettings {
    fn default() -> Self {
        Self {
            n_particles: 500,
            replicas: 2000,
            method: SamplerMethod::Mcmc,
            mcmc: McmcSettings::default(),
            write_csv: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalSettings {
    pub energies: Vec<f64>,
    pub half_width: f64,
    pub bins: usize,
}

impl Default for LocalSettings {
    fn default() -> Self {
        Self {
            energies: vec![0.0],
            half_width: 5.0,
            bins: DEFAULT_BINS,
        }
    }
}

/// One experiment: a potential, the coupling `c`, and the settings of every
/// pipeline stage.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub potential: PotentialSpec,
    pub c: f64,
    pub grid: GridOverrides,
    pub solver: SolverConfig,
    pub sampler: SamplerSettings,
    pub localstats: LocalSettings,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// SHA-256 of the canonical (key-sorted) config document.
    pub hash: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: u32,
    potential: Value,
    c: f64,
    #[serde(default)]
    grid: GridOverrides,
    #[serde(default)]
    solver: SolverConfig,
    #[serde(default)]
    sampler: SamplerSettings,
    #[serde(default)]
    localstats: LocalSettings,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Rebuilds every object with sorted keys.
pub fn canonical(value: &Value) -> Value {
    match value {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            let mut out = Map::new();
            for k in keys {
                out.insert(k.clone(), canonical(&map[k]));
            }
            Value::Object(out)
        }
        Value::Array(items) => Value::Array(items.iter().map(canonical).collect()),
        other => other.clone(),
    }
}

pub fn config_hash(value: &Value) -> String {
    let bytes = serde_json::to_vec(&canonical(value)).expect("JSON values always serialize");
    hex::encode(Sha256::digest(&bytes))
}

/// Potential entry: either a [`PotentialSpec`] or
/// `{"kind": "table", "path": ..., "shift": ..., "growth_floor": ...}` with
/// the path relative to the config file.
fn parse_potential(value: &Value, base: &Path) -> Result<PotentialSpec> {
    if value.get("kind").and_then(Value::as_str) == Some("table") {
        let path = value
            .get("path")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::InvalidArgument("table potential needs a \"path\"".into()))?;
        let mut spec = PotentialSpec::from_table_csv(&base.join(path))?;
        if let Some(shift) = value.get("shift").and_then(Value::as_f64) {
            spec = spec.with_shift(shift);
        }
        if let Some(floor) = value.get("growth_floor").and_then(Value::as_f64) {
            spec = spec.with_growth_floor(floor);
        }
        return Ok(spec);
    }
    let spec: PotentialSpec =
        serde_json::from_value(value.clone()).map_err(|e| Error::InvalidArgument(format!("potential: {e}")))?;
    spec.validate()?;
    Ok(spec)
}

impl ExperimentConfig {
    pub fn from_value(value: &Value, base: &Path) -> Result<Self> {
        let raw: RawConfig =
            serde_json::from_value(value.clone()).map_err(|e| Error::InvalidArgument(format!("config: {e}")))?;
        if raw.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                raw.schema_version
            )));
        }
        if !(raw.c >= 0.0 && raw.c.is_finite()) {
            return Err(Error::InvalidArgument(format!("c must be >= 0, got {}", raw.c)));
        }
        raw.solver.validate()?;
        if raw.sampler.n_particles == 0 || raw.sampler.replicas == 0 {
            return Err(Error::InvalidArgument("sampler needs n_particles >= 1 and replicas >= 1".into()));
        }
        if !(raw.localstats.half_width > 0.0) || raw.localstats.bins == 0 {
            return Err(Error::InvalidArgument("localstats needs half_width > 0 and bins >= 1".into()));
        }
        if !(raw.grid.spacing > 0.0) {
            return Err(Error::InvalidArgument("grid spacing must be > 0".into()));
        }
        Ok(Self {
            potential: parse_potential(&raw.potential, base)?,
            c: raw.c,
            grid: raw.grid,
            solver: raw.solver,
            sampler: raw.sampler,
            localstats: raw.localstats,
            seed: raw.seed,
            output_dir: raw.output_dir,
            hash: config_hash(value),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let value: Value =
            serde_json::from_str(&text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
        Self::from_value(&value, path.parent().unwrap_or(Path::new(".")))
    }

    /// `beta = 2c / N` for the configured particle number.
    pub fn beta(&self) -> f64 {
        2.0 * self.c / self.sampler.n_particles as f64
    }

    pub fn solver_grid(&self) -> Result<Grid> {
        let default = default_grid(&self.potential, self.c)?;
        let lo = self.grid.lo.unwrap_or(default.lo());
        let hi = self.grid.hi.unwrap_or(default.hi());
        Grid::with_spacing(lo, hi, self.grid.spacing)
    }
}
