//! Run configuration: TOML files, built-in presets, and override layering.
//!
//! A configuration is read in three layers with fixed precedence: the file
//! (or preset) is parsed first, environment variables prefixed `WAVEMAPS_`
//! are applied on top, and `--set key=value` flags win over both. Unknown
//! keys are rejected at every layer.

use serde::{Deserialize, Serialize};
use std::fmt;
use wavemaps_core::grid::GridSpec;
use wavemaps_core::stepper::{PiMode, SchemeParams};

/// Environment variables with this prefix override file keys; the rest of
/// the name is lowercased and `__` separates table levels, so
/// `WAVEMAPS_SCHEME__FILTER_CONSTANT=2.0` targets `scheme.filter_constant`.
pub const ENV_PREFIX: &str = "WAVEMAPS_";

/// Built-in configurations, selectable by name with `--preset`.
pub const PRESETS: &[(&str, &str)] = &[
    ("smooth-geodesic", include_str!("../presets/smooth-geodesic.toml")),
    ("rough-1.7", include_str!("../presets/rough-1.7.toml")),
    ("fig1-1d", include_str!("../presets/fig1-1d.toml")),
    ("constant-map", include_str!("../presets/constant-map.toml")),
];

/// Configuration-stage failure: bad file, unknown key, out-of-range value.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

impl From<wavemaps_core::CoreError> for ConfigError {
    fn from(e: wavemaps_core::CoreError) -> Self {
        ConfigError(e.to_string())
    }
}

/// Spatial grid: `n` points per axis on a `period`-periodic box.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default = "default_dim")]
    pub dim: usize,
    pub n: usize,
    pub period: f64,
}

impl GridSection {
    pub fn build(&self) -> Result<GridSpec, ConfigError> {
        Ok(GridSpec::new(self.dim, self.n, self.period)?)
    }
}

/// Splitting-scheme options shared by single runs and ladder studies.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub filter_constant: f64,
    #[serde(default = "default_activation")]
    pub activation_steps: usize,
    #[serde(default)]
    pub pi_mode: PiModeChoice,
}

/// Where the normalization projection is applied inside the nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PiModeChoice {
    #[default]
    PerFactor,
    OutputOnly,
}

impl PiModeChoice {
    pub fn to_core(self) -> PiMode {
        match self {
            PiModeChoice::PerFactor => PiMode::PerFactor,
            PiModeChoice::OutputOnly => PiMode::OutputOnly,
        }
    }
}

/// Initial-data generator selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataSource {
    /// Geodesic map with a Gaussian angle profile, at rest.
    GeodesicSmooth,
    /// Geodesic map with the prescribed rough angle spectrum, at rest.
    GeodesicRough,
    /// The shipped bump-profile sphere map with nonzero velocity.
    #[serde(rename = "fig1-1d")]
    Fig1,
    /// State snapshot read back from a CSV file.
    CustomFile,
}

/// Initial-data section; fields beyond `source` apply only where noted.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub source: DataSource,
    /// Peak of the Gaussian angle profile (`geodesic-smooth`).
    #[serde(default = "default_amplitude")]
    pub theta_amplitude: f64,
    /// Peak of the Gaussian angular-velocity profile (`geodesic-smooth`);
    /// zero starts the geodesic at rest.
    #[serde(default)]
    pub theta_dot_amplitude: f64,
    /// Regularity exponent of the rough spectrum (`geodesic-rough`).
    #[serde(default)]
    pub s: Option<f64>,
    /// Phase seed for random spectra; 0 keeps all phases at zero.
    #[serde(default)]
    pub seed: u64,
    /// Snapshot path (`custom-file`).
    #[serde(default)]
    pub path: Option<String>,
}

/// Which reference solution ladder errors are measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reference {
    /// Closed-form geodesic solution (geodesic sources only).
    Exact,
    /// The run at the smallest ladder step; its own row reads error zero.
    FinestTau,
    /// Independent Runge-Kutta integration of the filtered system.
    Rk4Oracle,
}

/// Convergence-study section: ladder, horizon, norms, reference.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    pub t_final: f64,
    /// Step sizes, strictly decreasing, each dividing `t_final`.
    pub ladder: Vec<f64>,
    pub reference: Reference,
    /// Error is measured in `H^{s1} x H^{s1-1}`.
    pub norm_s1: f64,
    /// The oracle runs at `min(ladder) / oracle_divisor` (`rk4-oracle`).
    #[serde(default = "default_divisor")]
    pub oracle_divisor: f64,
    /// Record wall-clock times in the report; off by default so repeated
    /// runs produce byte-identical files.
    #[serde(default)]
    pub record_walltime: bool,
    /// Also write a log-log plot of the ladder.
    #[serde(default = "default_true")]
    pub svg: bool,
}

impl StudySection {
    /// Ladder sanity: nonempty, positive, strictly decreasing, and every
    /// step divides the horizon to rounding accuracy.
    pub fn validate_ladder(&self) -> Result<(), ConfigError> {
        if self.ladder.is_empty() {
            return Err(ConfigError("study.ladder must not be empty".into()));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(ConfigError("study.t_final must be finite and nonnegative".into()));
        }
        for pair in self.ladder.windows(2) {
            if pair[1] >= pair[0] {
                return Err(ConfigError(format!(
                    "study.ladder must be strictly decreasing, got {} before {}",
                    pair[0], pair[1]
                )));
            }
        }
        for &tau in &self.ladder {
            if !(tau.is_finite() && tau > 0.0) {
                return Err(ConfigError(format!("ladder step {tau} is not positive")));
            }
            let ratio = self.t_final / tau;
            if (ratio - ratio.round()).abs() > 1e-9 * (1.0 + ratio) {
                return Err(ConfigError(format!(
                    "ladder step {tau} does not divide t_final {}",
                    self.t_final
                )));
            }
        }
        Ok(())
    }
}

/// Single-evolution section for the `run` subcommand.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub tau: f64,
    pub t_end: f64,
    /// Write a state snapshot every this many steps; 0 disables
    /// intermediate snapshots (the final state is always written).
    #[serde(default)]
    pub snapshot_every: usize,
}

/// Options for the `diagnostics` subcommand.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsSection {
    /// Random trials per product-support check and per Strichartz draw.
    pub trials: usize,
    pub seed: u64,
    /// Multiplies the identity-check tolerances; 1 is the shipped gate.
    pub tolerance_scale: f64,
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        DiagnosticsSection { trials: 20, seed: 7, tolerance_scale: 1.0 }
    }
}

/// Full configuration tree as deserialized from the merged TOML value.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSection,
    pub scheme: SchemeSection,
    pub data: DataSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub study: Option<StudySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<RunSection>,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
}

impl RunConfig {
    pub fn grid(&self) -> Result<GridSpec, ConfigError> {
        self.grid.build()
    }

    /// Scheme parameters for one step size and horizon, with the shared
    /// filter and projection options applied.
    pub fn scheme_params(
        &self,
        grid: GridSpec,
        tau: f64,
        t_end: f64,
    ) -> Result<SchemeParams, ConfigError> {
        Ok(SchemeParams::with_options(
            grid,
            tau,
            t_end,
            self.scheme.filter_constant,
            self.scheme.activation_steps,
            self.scheme.pi_mode.to_core(),
        )?)
    }

    pub fn study(&self) -> Result<&StudySection, ConfigError> {
        self.study
            .as_ref()
            .ok_or_else(|| ConfigError("this command needs a [study] section".into()))
    }

    pub fn run(&self) -> Result<&RunSection, ConfigError> {
        self.run
            .as_ref()
            .ok_or_else(|| ConfigError("this command needs a [run] section".into()))
    }
}

/// Parsed configuration together with the merged TOML tree it came from;
/// the tree is echoed verbatim into output manifests.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub resolved: toml::Table,
}

/// Parse a configuration text and layer environment and `--set` overrides
/// on top, in that order.
pub fn parse_with_overrides(
    text: &str,
    env: &[(String, String)],
    sets: &[String],
) -> Result<LoadedConfig, ConfigError> {
    let mut table: toml::Table =
        text.parse().map_err(|e| ConfigError(format!("config parse error: {e}")))?;

    for (name, raw) in env {
        let Some(rest) = name.strip_prefix(ENV_PREFIX) else { continue };
        if rest.is_empty() {
            continue;
        }
        let lowered = rest.to_ascii_lowercase();
        let path: Vec<&str> = lowered.split("__").collect();
        let value = parse_override_value(raw)
            .map_err(|e| ConfigError(format!("environment override {name}: {e}")))?;
        set_path(&mut table, &path, value)
            .map_err(|e| ConfigError(format!("environment override {name}: {e}")))?;
    }

    for spec in sets {
        let Some((key, raw)) = spec.split_once('=') else {
            return Err(ConfigError(format!("--set needs key=value, got {spec:?}")));
        };
        let key = key.trim();
        let path: Vec<&str> = key.split('.').collect();
        if path.iter().any(|p| p.is_empty()) {
            return Err(ConfigError(format!("--set key {key:?} has an empty segment")));
        }
        let value = parse_override_value(raw)
            .map_err(|e| ConfigError(format!("--set {key}: {e}")))?;
        set_path(&mut table, &path, value)
            .map_err(|e| ConfigError(format!("--set {key}: {e}")))?;
    }

    let config: RunConfig = toml::Value::Table(table.clone())
        .try_into()
        .map_err(|e| ConfigError(format!("config: {e}")))?;
    Ok(LoadedConfig { config, resolved: table })
}

/// Look up a preset body by name.
pub fn preset_text(name: &str) -> Result<&'static str, ConfigError> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
        .ok_or_else(|| {
            let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
            ConfigError(format!("unknown preset {name:?}; available: {}", names.join(", ")))
        })
}

/// Parse an override value with TOML scalar syntax, falling back to a bare
/// string when it is not valid TOML (so `--set data.source=fig1-1d` works
/// without inner quotes).
fn parse_override_value(raw: &str) -> Result<toml::Value, String> {
    let wrapped = format!("x = {raw}");
    match wrapped.parse::<toml::Table>() {
        Ok(mut t) if t.len() == 1 => Ok(t.remove("x").expect("just inserted")),
        Ok(_) => Err(format!("value {raw:?} is not a single TOML value")),
        Err(_) => Ok(toml::Value::String(raw.to_string())),
    }
}

fn set_path(root: &mut toml::Table, path: &[&str], leaf: toml::Value) -> Result<(), String> {
    let mut current = root;
    for (i, key) in path.iter().enumerate() {
        if i + 1 == path.len() {
            current.insert((*key).to_string(), leaf);
            return Ok(());
        }
        let slot = current
            .entry((*key).to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        current = slot
            .as_table_mut()
            .ok_or_else(|| format!("key {key:?} is not a table"))?;
    }
    Err("empty override path".into())
}


fn default_dim() -> usize {
    1
}

fn default_activation() -> usize {
    2
}

fn default_amplitude() -> f64 {
    2.0
}

fn default_divisor() -> f64 {
    16.0
}

fn default_true() -> bool {
    true
}
