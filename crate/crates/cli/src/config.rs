//! JSON experiment configs. Every struct rejects unknown fields; kernels and
//! functionals stay as raw JSON until a grid is known.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use wiener_fft::{ExpCombo64, Grid64, Kernel64, SupportSet, TransformParam};

use crate::CliError;

pub const DEFAULT_STEPS: usize = wiener_fft::kernel::DEFAULT_STEPS;
pub const DEFAULT_N: usize = 100_000;

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    #[serde(rename = "T")]
    pub horizon: Option<f64>,
    #[serde(rename = "M")]
    pub steps: Option<usize>,
    pub seed: Option<u64>,
    #[serde(alias = "N")]
    pub n: Option<usize>,
}

/// Command-line overrides; each wins over the config file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub n: Option<usize>,
    pub grid: Option<usize>,
}

/// Resolved sampling parameters.
#[derive(Debug, Clone, Copy)]
pub struct Sampling {
    pub grid: Grid64,
    pub seed: u64,
    pub n: usize,
}

impl SamplerConfig {
    pub fn resolve(&self, o: &Overrides) -> Result<Sampling, CliError> {
        let steps = o.grid.or(self.steps).unwrap_or(DEFAULT_STEPS);
        let grid = Grid64::new(self.horizon.unwrap_or(1.0), steps)?;
        let n = o.n.or(self.n).unwrap_or(DEFAULT_N);
        if n < 2 {
            return Err(CliError::Config("sample count n must be at least 2".into()));
        }
        Ok(Sampling { grid, seed: o.seed.or(self.seed).unwrap_or(1), n })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FftConfig {
    #[serde(default)]
    pub sampler: SamplerConfig,
    pub f: Value,
    pub k: Value,
    pub param: Value,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CtoConfig {
    #[serde(default)]
    pub sampler: SamplerConfig,
    pub f: Value,
    pub g: Value,
    pub g1: Value,
    pub g2: Value,
    pub h1: Value,
    pub h2: Value,
    pub param: Value,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotationConfig {
    #[serde(default)]
    pub sampler: SamplerConfig,
    /// Defaults to `[1, 2, 3]`; `--seed` replaces the list with one seed.
    pub seeds: Option<Vec<u64>>,
    pub h1: Value,
    pub h2: Value,
    pub h3: Value,
    pub h4: Value,
    /// Battery functional names; all five when absent.
    pub functionals: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thm52Config {
    #[serde(default)]
    pub sampler: SamplerConfig,
    pub f: Value,
    pub g: Value,
    pub g1: Value,
    pub g2: Value,
    pub h1: Value,
    pub h2: Value,
    pub k: Value,
    pub param: Value,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thm54Config {
    #[serde(default)]
    pub sampler: SamplerConfig,
    pub f: Value,
    pub g: Value,
    pub g1: Value,
    pub g2: Value,
    pub h3: Value,
    pub h4: Value,
    pub k1: Value,
    pub k2: Value,
    pub param: Value,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComposedConfig {
    pub system: Value,
    pub f: Value,
    pub g: Value,
    pub param: Value,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    pub system: Value,
    pub tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigConfig {
    #[serde(default)]
    pub sampler: SamplerConfig,
    pub g1: Value,
    pub g2: Value,
    pub k: Value,
    #[serde(rename = "A")]
    pub a: Value,
    #[serde(rename = "B")]
    pub b: Value,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HaarConfig {
    #[serde(default)]
    pub sampler: SamplerConfig,
    pub g1: Value,
    pub g2: Value,
    pub k: Value,
    /// Inclusive depth range; defaults to `[3, 8]`.
    pub depths: Option<[u32; 2]>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: Option<u64>,
    pub n: Option<usize>,
    #[serde(rename = "M")]
    pub steps: Option<usize>,
    pub draws: Option<usize>,
    pub mc_draws: Option<usize>,
}

pub fn load<T: DeserializeOwned>(path: Option<&Path>) -> Result<T, CliError> {
    let path = path.ok_or_else(|| CliError::Config("this command needs --config <path>".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// As [`load`], but an absent path yields the default config.
pub fn load_or_default<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, CliError> {
    match path {
        Some(_) => load(path),
        None => Ok(T::default()),
    }
}

pub fn kernel(v: &Value, grid: Grid64, name: &str) -> Result<Kernel64, CliError> {
    Kernel64::from_value(v, grid).map_err(|e| CliError::Config(format!("kernel `{name}`: {e}")))
}

pub fn combo(v: &Value, grid: Grid64, name: &str) -> Result<ExpCombo64, CliError> {
    ExpCombo64::from_json(v, grid).map_err(|e| CliError::Config(format!("functional `{name}`: {e}")))
}

pub fn param(v: &Value) -> Result<TransformParam<f64>, CliError> {
    TransformParam::from_json(v).map_err(|e| CliError::Config(format!("param: {e}")))
}

pub fn support_set(v: &Value, name: &str) -> Result<SupportSet<f64>, CliError> {
    SupportSet::from_json(v).map_err(|e| CliError::Config(format!("set `{name}`: {e}")))
}
