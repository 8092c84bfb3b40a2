//! TOML run configuration. Each subcommand reads its own section.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::exit::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub illposed_scan: Option<ScanCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bend: Option<BendCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_check: Option<KernelCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectra: Option<SpectraCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_nonlipschitz: Option<ProbeCfg>,
}

/// Initial contour. `shape` selects which of the other keys are read.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeCfg {
    Circle { radius: f64 },
    Ellipse { a: f64, b: f64 },
    PerturbedCircle { mode: usize, amplitude: f64 },
    /// Star-shaped curve with seeded random radial modes 2..=modes.
    RandomStar { modes: usize, amplitude: f64 },
    File { path: PathBuf },
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateCfg {
    pub alpha: f64,
    pub n: usize,
    pub t_end: f64,
    pub dt: f64,
    /// When set, dt = cfl / max|∂_s v| capped by `dt`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfl: Option<f64>,
    #[serde(default = "default_renormalize")]
    pub renormalize_every: usize,
    #[serde(default = "one")]
    pub output_every: usize,
    /// Snapshot every this many output rows; 0 writes only the final curve.
    #[serde(default)]
    pub snapshot_every: usize,
    #[serde(default)]
    pub filter: bool,
    #[serde(default = "default_p_list")]
    pub p_list: Vec<f64>,
    #[serde(default = "default_beta")]
    pub beta: f64,
    pub initial: ShapeCfg,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    Growth,
    Pairing,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Identity,
    Frozen,
    Ramp,
}

/// Metric g = 1 + amplitude·cos(mode x), frozen or ramped in time.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MetricCfg {
    pub kind: MetricKind,
    #[serde(default = "default_metric_amplitude")]
    pub amplitude: f64,
    #[serde(default = "one")]
    pub mode: usize,
}

impl Default for MetricCfg {
    fn default() -> Self {
        Self { kind: MetricKind::Ramp, amplitude: default_metric_amplitude(), mode: 1 }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScanCfg {
    pub mode: ScanMode,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    pub n: usize,
    pub q_range: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(default)]
    pub metric: MetricCfg,
    #[serde(default = "default_min_steps")]
    pub min_steps: usize,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum KappaSource {
    Zero,
    Wainger,
    File,
    Patch,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BendCfg {
    pub n: usize,
    pub kappa_sharp: KappaSource,
    /// Fixed ε; automatic choice when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct KernelCfg {
    pub alpha: f64,
    pub q_range: Vec<i64>,
    #[serde(default = "default_t_factors")]
    pub t_factors: Vec<f64>,
    #[serde(default = "default_delta_kernel")]
    pub delta: f64,
    #[serde(default = "one")]
    pub refine: usize,
    /// Exit 2 when the measured constant exceeds this.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_constant: Option<f64>,
    /// Seeded random-block Bernstein check at this p (and r = ∞).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bernstein_p: Option<f64>,
    #[serde(default = "default_trials")]
    pub bernstein_trials: usize,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SpectraCfg {
    /// Resample to this many arc-length nodes; the curve's own N otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default = "default_p_list")]
    pub p_list: Vec<f64>,
    pub curve: ShapeCfg,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeCfg {
    pub alpha: f64,
    pub p: f64,
    pub eps: f64,
    #[serde(default = "default_probe_n")]
    pub n: usize,
    #[serde(default = "default_probe_amplitude")]
    pub amplitude: f64,
    #[serde(default = "default_s_grid")]
    pub s_grid: Vec<f64>,
    /// σ of the smooth-curve Hölder check; (1 − 2α)/2 when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default = "default_smooth_grids")]
    pub smooth_grids: Vec<usize>,
}

fn one() -> usize {
    1
}
fn default_renormalize() -> usize {
    10
}
fn default_p_list() -> Vec<f64> {
    vec![2.0]
}
fn default_beta() -> f64 {
    0.5
}
fn default_metric_amplitude() -> f64 {
    0.1
}
fn default_min_steps() -> usize {
    16
}
fn default_t_factors() -> Vec<f64> {
    vec![1.0, 4.0]
}
fn default_delta_kernel() -> f64 {
    0.5
}
fn default_trials() -> usize {
    8
}
fn default_probe_n() -> usize {
    1 << 18
}
fn default_probe_amplitude() -> f64 {
    -0.2
}
fn default_s_grid() -> Vec<f64> {
    (4..=9).map(|k| 2f64.powi(-k)).collect()
}
fn default_smooth_grids() -> Vec<usize> {
    vec![256, 512, 1024]
}

/// Parses config text. Syntax errors are data-format errors; schema errors
/// (missing or unknown keys, wrong types) are usage errors.
pub fn parse(text: &str) -> Result<ConfigFile, CliError> {
    let table: toml::Table = toml::from_str(text).map_err(|e| CliError::Data(format!("config is not valid TOML: {}", e.message())))?;
    let cfg = ConfigFile::deserialize(toml::Value::Table(table)).map_err(|e| CliError::Usage(format!("config: {}", e.message())))?;
    if cfg.schema_version != SCHEMA_VERSION {
        return Err(CliError::Usage(format!("config: unsupported schema_version {} (expected {SCHEMA_VERSION})", cfg.schema_version)));
    }
    Ok(cfg)
}

pub fn load(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut cfg = parse(&text)?;
    let base = path.parent().unwrap_or(Path::new("."));
    cfg.resolve_paths(base)?;
    Ok(cfg)
}

fn absolute(base: &Path, p: &mut PathBuf) -> Result<(), CliError> {
    let joined = if p.is_absolute() { p.clone() } else { base.join(&*p) };
    *p = joined.canonicalize().map_err(|e| CliError::Usage(format!("cannot resolve {}: {e}", joined.display())))?;
    Ok(())
}

impl ConfigFile {
    fn resolve_paths(&mut self, base: &Path) -> Result<(), CliError> {
        if let Some(ShapeCfg::File { path }) = self.simulate.as_mut().map(|s| &mut s.initial) {
            absolute(base, path)?;
        }
        if let Some(ShapeCfg::File { path }) = self.spectra.as_mut().map(|s| &mut s.curve) {
            absolute(base, path)?;
        }
        if let Some(path) = self.bend.as_mut().and_then(|b| b.path.as_mut()) {
            absolute(base, path)?;
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// `[lo, hi]` with lo ≤ hi expanded to every index in between.
pub fn q_range(v: &[i64], key: &str) -> Result<Vec<i32>, CliError> {
    match v {
        [lo, hi] if lo <= hi && *lo >= -1 && *hi <= 40 => Ok((*lo as i32..=*hi as i32).collect()),
        _ => Err(CliError::Usage(format!("{key} must be [lo, hi] with -1 ≤ lo ≤ hi ≤ 40, got {v:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_key_is_usage_error_naming_key() {
        let text = "schema_version = 1\n[simulate]\nalpha = 0.25\nn = 64\ndt = 0.01\n[simulate.initial]\nshape = \"circle\"\nradius = 1.0\n";
        match parse(text) {
            Err(CliError::Usage(m)) => assert!(m.contains("t_end"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_toml_is_data_error() {
        assert!(matches!(parse("schema_version = = 1"), Err(CliError::Data(_))));
    }

    #[test]
    fn canonical_roundtrip() {
        let text = "schema_version = 1\nseed = 7\n[simulate]\nalpha = 0.25\nn = 64\nt_end = 0.1\ndt = 0.01\n[simulate.initial]\nshape = \"ellipse\"\na = 1.0\nb = 0.8\n";
        let c = parse(text).unwrap();
        let again = parse(&c.to_toml()).unwrap();
        assert_eq!(c.to_toml(), again.to_toml());
        assert_eq!(again.simulate.unwrap().renormalize_every, 10);
    }

    #[test]
    fn q_range_shape() {
        assert_eq!(q_range(&[6, 8], "q").unwrap(), vec![6, 7, 8]);
        assert!(q_range(&[8, 6], "q").is_err());
        assert!(q_range(&[6], "q").is_err());
    }
}
