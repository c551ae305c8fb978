//! File ingestion and result serialization: delimited time series,
//! named parameter configs with provenance notes, and the table format
//! every command prints. Configs are TOML with a `model` discriminator;
//! series are comma-separated with one header row. All parsing is
//! locale-independent (dot decimal separator only).

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calibration::{SeriesKind, TwoStateParams};
use crate::disaster::DisasterSpec;
use crate::habit::HabitParams;
use crate::lrr::LrrParams;
use crate::types::{CoreError, MomentTargets, PreferenceParams, TimeSeries};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DataError {
    #[error("Io: {path}: {detail}")]
    Io { path: String, detail: String },
    #[error("ParseError: line {line}: {detail}")]
    ParseError { line: u64, detail: String },
    #[error("EmptyFile: no data rows")]
    EmptyFile,
    #[error("MissingColumn: column '{0}' not found in header")]
    MissingColumn(String),
    #[error("SchemaError: {0}")]
    SchemaError(String),
    #[error("InvariantViolation: {0}")]
    InvariantViolation(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// How to read one delimited series file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub path: PathBuf,
    pub period_column: String,
    pub value_column: String,
    pub kind: SeriesKind,
    /// Where the numbers come from; required so datasets stay
    /// self-documenting.
    pub provenance: String,
}

impl DatasetManifest {
    /// Conventional header names `period,value`.
    pub fn csv(path: impl Into<PathBuf>, kind: SeriesKind, provenance: &str) -> Self {
        DatasetManifest {
            path: path.into(),
            period_column: "period".to_string(),
            value_column: "value".to_string(),
            kind,
            provenance: provenance.to_string(),
        }
    }
}

/// Load the series a manifest points at. Periods must be numeric and
/// strictly increasing.
pub fn load_series(manifest: &DatasetManifest) -> Result<TimeSeries, DataError> {
    if manifest.provenance.trim().is_empty() {
        return Err(DataError::InvariantViolation(
            "manifest provenance must be non-empty".to_string(),
        ));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(&manifest.path)
        .map_err(|e| DataError::Io {
            path: manifest.path.display().to_string(),
            detail: e.to_string(),
        })?;
    let headers = reader
        .headers()
        .map_err(|e| DataError::ParseError {
            line: 1,
            detail: e.to_string(),
        })?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))
    };
    let period_idx = col(&manifest.period_column)?;
    let value_idx = col(&manifest.value_column)?;

    let mut timestamps = Vec::new();
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| DataError::ParseError {
            line: e.position().map_or(0, |p| p.line()),
            detail: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let parse = |idx: usize, what: &str| -> Result<f64, DataError> {
            let field = record.get(idx).ok_or(DataError::ParseError {
                line,
                detail: format!("missing {what} field"),
            })?;
            field.parse::<f64>().map_err(|_| DataError::ParseError {
                line,
                detail: format!("{what} '{field}' is not a number"),
            })
        };
        timestamps.push(parse(period_idx, "period")?);
        values.push(parse(value_idx, "value")?);
    }
    if values.is_empty() {
        return Err(DataError::EmptyFile);
    }
    Ok(TimeSeries::new(timestamps, values)?)
}

/// A validated parameter record of any model family.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelConfig {
    TwoState(TwoStateParams),
    Moments(MomentTargets),
    Preferences(PreferenceParams),
    Disaster(DisasterSpec),
    Habit(HabitParams),
    LongRunRisks(LrrParams),
}

impl ModelConfig {
    pub fn model_name(&self) -> &'static str {
        match self {
            ModelConfig::TwoState(_) => "two_state",
            ModelConfig::Moments(_) => "moments",
            ModelConfig::Preferences(_) => "preferences",
            ModelConfig::Disaster(_) => "disaster",
            ModelConfig::Habit(_) => "habit",
            ModelConfig::LongRunRisks(_) => "long_run_risks",
        }
    }
}

/// A config as loaded: validated record plus its provenance note.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub config: ModelConfig,
    pub provenance: String,
}

// On-disk schema. Raw mirrors keep serde away from the validated domain
// types: every load goes through the constructors.
#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
enum RawConfig {
    TwoState {
        provenance: String,
        params: RawTwoState,
    },
    Moments {
        provenance: String,
        params: RawMoments,
    },
    Preferences {
        provenance: String,
        params: RawPreferences,
    },
    Disaster {
        provenance: String,
        params: RawDisaster,
    },
    Habit {
        provenance: String,
        params: RawHabit,
    },
    LongRunRisks {
        provenance: String,
        params: RawLrr,
    },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTwoState {
    mu: f64,
    gamma: f64,
    phi: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMoments {
    mean_growth: f64,
    variance: f64,
    autocorr: f64,
}

/// `beta` and `delta` are alternatives; exactly one must be present.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPreferences {
    alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDisaster {
    mu: f64,
    gamma: f64,
    psi: f64,
    phi: f64,
    eta: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHabit {
    alpha: f64,
    beta: f64,
    g: f64,
    sigma: f64,
    rho: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLrr {
    beta: f64,
    alpha: f64,
    ies: f64,
    mu: f64,
    mu_d: f64,
    rho: f64,
    phi_e: f64,
    phi_lev: f64,
    phi_d: f64,
    sigma2_bar: f64,
    nu1: f64,
    sigma_w: f64,
}

/// Parse and validate a config document.
pub fn parse_model_config(content: &str) -> Result<LoadedConfig, DataError> {
    let raw: RawConfig =
        toml::from_str(content).map_err(|e| DataError::SchemaError(e.to_string()))?;
    let invariant = |e: &dyn fmt::Display| DataError::InvariantViolation(e.to_string());
    let (config, provenance) = match raw {
        RawConfig::TwoState { provenance, params } => (
            ModelConfig::TwoState(
                TwoStateParams::new(params.mu, params.gamma, params.phi)
                    .map_err(|e| invariant(&e))?,
            ),
            provenance,
        ),
        RawConfig::Moments { provenance, params } => (
            ModelConfig::Moments(
                MomentTargets::new(params.mean_growth, params.variance, params.autocorr)
                    .map_err(|e| invariant(&e))?,
            ),
            provenance,
        ),
        RawConfig::Preferences { provenance, params } => {
            let prefs = match (params.beta, params.delta) {
                (Some(beta), None) => PreferenceParams::from_beta(params.alpha, beta),
                (None, Some(delta)) => PreferenceParams::from_delta(params.alpha, delta),
                _ => {
                    return Err(DataError::SchemaError(
                        "preferences need exactly one of beta or delta".to_string(),
                    ))
                }
            }
            .map_err(|e| invariant(&e))?;
            (ModelConfig::Preferences(prefs), provenance)
        }
        RawConfig::Disaster { provenance, params } => (
            ModelConfig::Disaster(
                DisasterSpec::new(params.mu, params.gamma, params.psi, params.phi, params.eta)
                    .map_err(|e| invariant(&e))?,
            ),
            provenance,
        ),
        RawConfig::Habit { provenance, params } => (
            ModelConfig::Habit(
                HabitParams::new(params.alpha, params.beta, params.g, params.sigma, params.rho)
                    .map_err(|e| invariant(&e))?,
            ),
            provenance,
        ),
        RawConfig::LongRunRisks { provenance, params } => (
            ModelConfig::LongRunRisks(
                LrrParams::new(
                    params.beta,
                    params.alpha,
                    params.ies,
                    params.mu,
                    params.mu_d,
                    params.rho,
                    params.phi_e,
                    params.phi_lev,
                    params.phi_d,
                    params.sigma2_bar,
                    params.nu1,
                    params.sigma_w,
                )
                .map_err(|e| invariant(&e))?,
            ),
            provenance,
        ),
    };
    if provenance.trim().is_empty() {
        return Err(DataError::InvariantViolation(
            "config provenance must be non-empty".to_string(),
        ));
    }
    Ok(LoadedConfig { config, provenance })
}

/// Load a config from disk.
pub fn load_model_config(path: &Path) -> Result<LoadedConfig, DataError> {
    let content = std::fs::read_to_string(path).map_err(|e| DataError::Io {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    parse_model_config(&content)
}

/// Serialize a config to the same TOML schema `parse_model_config`
/// reads. Floats round-trip exactly (shortest representation).
pub fn model_config_to_toml(loaded: &LoadedConfig) -> String {
    let provenance = loaded.provenance.clone();
    let raw = match &loaded.config {
        ModelConfig::TwoState(p) => RawConfig::TwoState {
            provenance,
            params: RawTwoState {
                mu: p.mu,
                gamma: p.gamma,
                phi: p.phi,
            },
        },
        ModelConfig::Moments(m) => RawConfig::Moments {
            provenance,
            params: RawMoments {
                mean_growth: m.mean_growth,
                variance: m.variance,
                autocorr: m.autocorr,
            },
        },
        ModelConfig::Preferences(p) => RawConfig::Preferences {
            provenance,
            params: RawPreferences {
                alpha: p.alpha(),
                beta: Some(p.beta()),
                delta: None,
            },
        },
        ModelConfig::Disaster(d) => RawConfig::Disaster {
            provenance,
            params: RawDisaster {
                mu: d.mu,
                gamma: d.gamma,
                psi: d.psi,
                phi: d.phi,
                eta: d.eta,
            },
        },
        ModelConfig::Habit(h) => RawConfig::Habit {
            provenance,
            params: RawHabit {
                alpha: h.alpha,
                beta: h.beta,
                g: h.g,
                sigma: h.sigma,
                rho: h.rho,
            },
        },
        ModelConfig::LongRunRisks(p) => RawConfig::LongRunRisks {
            provenance,
            params: RawLrr {
                beta: p.beta,
                alpha: p.alpha,
                ies: p.ies,
                mu: p.mu,
                mu_d: p.mu_d,
                rho: p.rho,
                phi_e: p.phi_e,
                phi_lev: p.phi_lev,
                phi_d: p.phi_d,
                sigma2_bar: p.sigma2_bar,
                nu1: p.nu1,
                sigma_w: p.sigma_w,
            },
        },
    };
    toml::to_string_pretty(&raw).expect("config serialization cannot fail")
}

/// Fixed-significant-digit representation used for every number the
/// tool prints: 6 significant digits, round-half-even (the platform
/// float formatter's tie rule), positional in [1e-4, 1e7), scientific
/// outside.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0.000000".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    if (-4..7).contains(&magnitude) {
        let decimals = (5 - magnitude).max(0) as usize;
        format!("{:.*}", decimals, x)
    } else {
        format!("{:.5e}", x)
    }
}

/// A printable result table: one header row, column-stable string cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    /// CSV with one header row, stable column order, no quoting needed
    /// for the numeric content the tool emits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Space-aligned text: columns padded to their widest cell.
    pub fn to_aligned(&self) -> String {
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.len()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let mut out = String::new();
        let fmt_row = |cells: &[String], widths: &[usize]| {
            cells
                .iter()
                .zip(widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
        };
        out.push_str(&fmt_row(&self.columns, &widths));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&fmt_row(row, &widths));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn temp_csv(content: &str) -> PathBuf {
        let mut path = std::env::temp_dir();
        path.push(format!(
            "premia-test-{}-{}.csv",
            std::process::id(),
            content.len()
        ));
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn loads_well_formed_series() {
        let path = temp_csv("period,value\n1889,1.02\n1890,0.99\n1891,1.04\n");
        let manifest = DatasetManifest::csv(&path, SeriesKind::GrossGrowth, "test fixture");
        let series = load_series(&manifest).unwrap();
        assert_eq!(series.len(), 3);
        assert_eq!(series.values(), &[1.02, 0.99, 1.04]);
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn parse_error_names_the_line() {
        let path = temp_csv("period,value\n1889,1.02\n1890,not-a-number\n");
        let manifest = DatasetManifest::csv(&path, SeriesKind::GrossGrowth, "test fixture");
        let err = load_series(&manifest).unwrap_err();
        match err {
            DataError::ParseError { line, detail } => {
                assert_eq!(line, 3);
                assert!(detail.contains("not-a-number"));
            }
            other => panic!("unexpected {other:?}"),
        }
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn duplicate_period_is_non_monotonic() {
        let path = temp_csv("period,value\n1889,1.02\n1889,0.99\n");
        let manifest = DatasetManifest::csv(&path, SeriesKind::GrossGrowth, "test fixture");
        let err = load_series(&manifest).unwrap_err();
        assert!(matches!(
            err,
            DataError::Core(CoreError::NonMonotonicTime { .. })
        ));
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn header_only_file_is_empty() {
        let path = temp_csv("period,value\n");
        let manifest = DatasetManifest::csv(&path, SeriesKind::GrossGrowth, "test fixture");
        assert!(matches!(load_series(&manifest), Err(DataError::EmptyFile)));
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn missing_column_is_reported() {
        let path = temp_csv("year,value\n1889,1.02\n1890,1.0\n");
        let manifest = DatasetManifest::csv(&path, SeriesKind::GrossGrowth, "test fixture");
        assert!(matches!(
            load_series(&manifest),
            Err(DataError::MissingColumn(c)) if c == "period"
        ));
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn two_state_config_round_trip() {
        let doc = r#"
model = "two_state"
provenance = "mean/variance/autocorr of per-capita consumption growth, 1889-1978 vintage"

[params]
mu = 0.018
gamma = 0.036
phi = 0.43
"#;
        let loaded = parse_model_config(doc).unwrap();
        let ModelConfig::TwoState(p) = &loaded.config else {
            panic!("wrong variant");
        };
        assert_eq!((p.mu, p.gamma, p.phi), (0.018, 0.036, 0.43));

        let serialized = model_config_to_toml(&loaded);
        let reloaded = parse_model_config(&serialized).unwrap();
        assert_eq!(loaded, reloaded);
    }

    #[test]
    fn every_family_round_trips() {
        let configs = [
            LoadedConfig {
                config: ModelConfig::Moments(MomentTargets::new(1.018, 1.296e-3, -0.14).unwrap()),
                provenance: "p".to_string(),
            },
            LoadedConfig {
                config: ModelConfig::Preferences(
                    PreferenceParams::from_beta(2.0, 1.02).unwrap(),
                ),
                provenance: "p".to_string(),
            },
            LoadedConfig {
                config: ModelConfig::Disaster(
                    DisasterSpec::new(0.018, 0.036, 0.85, 0.43, 0.01).unwrap(),
                ),
                provenance: "p".to_string(),
            },
            LoadedConfig {
                config: ModelConfig::Habit(
                    HabitParams::new(2.0, 0.9034, 0.0189, 0.015, 0.87).unwrap(),
                ),
                provenance: "p".to_string(),
            },
            LoadedConfig {
                config: ModelConfig::LongRunRisks(
                    LrrParams::new(
                        0.998, 10.0, 1.5, 0.0015, 0.0015, 0.979, 0.044, 3.0, 4.5, 6.084e-5,
                        0.987, 2.3e-6,
                    )
                    .unwrap(),
                ),
                provenance: "p".to_string(),
            },
        ];
        for loaded in configs {
            let reloaded = parse_model_config(&model_config_to_toml(&loaded)).unwrap();
            assert_eq!(loaded, reloaded, "round trip failed");
        }
    }

    #[test]
    fn unorthodox_beta_loads() {
        let doc = r#"
model = "preferences"
provenance = "discount factor above one is admissible"

[params]
alpha = 2.0
beta = 1.02
"#;
        let loaded = parse_model_config(doc).unwrap();
        let ModelConfig::Preferences(p) = &loaded.config else {
            panic!("wrong variant");
        };
        assert!(!p.orthodox());
        assert!(p.delta() < 0.0);
    }

    #[test]
    fn unit_ies_config_is_invariant_violation() {
        let doc = r#"
model = "long_run_risks"
provenance = "broken on purpose"

[params]
beta = 0.998
alpha = 10.0
ies = 1.0
mu = 0.0015
mu_d = 0.0015
rho = 0.979
phi_e = 0.044
phi_lev = 3.0
phi_d = 4.5
sigma2_bar = 6.084e-5
nu1 = 0.987
sigma_w = 2.3e-6
"#;
        let err = parse_model_config(doc).unwrap_err();
        assert!(matches!(err, DataError::InvariantViolation(m) if m.contains("UnitIes")));
    }

    #[test]
    fn schema_errors_are_schema_errors() {
        assert!(matches!(
            parse_model_config("model = \"no_such_model\"\n"),
            Err(DataError::SchemaError(_))
        ));
        assert!(matches!(
            parse_model_config("not even toml [[["),
            Err(DataError::SchemaError(_))
        ));
        // Missing provenance field fails the schema, empty fails the
        // invariant.
        let doc = "model = \"two_state\"\nprovenance = \"\"\n[params]\nmu = 0.0\ngamma = 0.0\nphi = 0.5\n";
        assert!(matches!(
            parse_model_config(doc),
            Err(DataError::InvariantViolation(_))
        ));
    }

    #[test]
    fn sig6_formatting() {
        assert_eq!(sig6(0.0), "0.000000");
        assert_eq!(sig6(0.5), "0.500000");
        assert_eq!(sig6(-2.49), "-2.49000");
        assert_eq!(sig6(24.0), "24.0000");
        assert_eq!(sig6(0.532940331), "0.532940");
        assert_eq!(sig6(250.0000001), "250.000");
        assert_eq!(sig6(0.0035), "0.00350000");
        assert_eq!(sig6(123456.7), "123457");
        assert_eq!(sig6(1.5e-9), "1.50000e-9");
        assert_eq!(sig6(-3.2e12), "-3.20000e12");
    }

    #[test]
    fn table_rendering_is_stable() {
        let mut t = Table::new(&["state", "weight", "return"]);
        t.push_row(vec!["1".into(), sig6(24.0), sig6(1.0 / 24.0)]);
        t.push_row(vec!["2".into(), sig6(18.5), sig6(-0.005)]);
        assert_eq!(
            t.to_csv(),
            "state,weight,return\n1,24.0000,0.0416667\n2,18.5000,-0.00500000\n"
        );
        let aligned = t.to_aligned();
        let lines: Vec<&str> = aligned.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines.iter().all(|l| l.len() == lines[0].len()));
    }
}
