use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Scale, Suite, SCHEMA_VERSION};
use crate::kernel::interchange::ChainDocument;
use crate::kernel::ChainSequence;
use crate::sim::{Coefficients, Domain, DomainSpec, ShellLadder, SimParams};
use crate::wedge::{HittingGrid, Vec2, WedgeSpec, WedgeSpecFile};

/// A validation failure located by a dotted field path such as
/// `simulate.params.eta`.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{path}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl fmt::Display) -> Self {
        Self {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    ErgodicSynthetic,
    WedgeAnalyze,
    Simulate,
    EstimateKernels,
    Verify,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::ErgodicSynthetic => "ergodic_synthetic",
            Scenario::WedgeAnalyze => "wedge_analyze",
            Scenario::Simulate => "simulate",
            Scenario::EstimateKernels => "estimate_kernels",
            Scenario::Verify => "verify",
        }
    }

    fn section(self) -> &'static str {
        match self {
            Scenario::ErgodicSynthetic => "ergodic",
            Scenario::WedgeAnalyze => "wedge",
            Scenario::Simulate => "simulate",
            Scenario::EstimateKernels => "kernels",
            Scenario::Verify => "verify",
        }
    }
}

/// Either an inline value or `{ "path": "file.json" }`, resolved relative to
/// the configuration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Reference(pub Value);

impl Reference {
    pub fn inline<T: Serialize>(value: &T) -> Self {
        Self(serde_json::to_value(value).expect("inline references serialize"))
    }

    pub fn file(path: &str) -> Self {
        Self(serde_json::json!({ "path": path }))
    }

    fn file_path(&self) -> Option<&str> {
        match &self.0 {
            Value::Object(m) if m.len() == 1 => m.get("path").and_then(Value::as_str),
            _ => None,
        }
    }

    /// The referenced text and a label for error paths.
    fn text(&self, field: &str, base: &Path) -> Result<(String, String), ConfigError> {
        match self.file_path() {
            Some(p) => {
                let full = base.join(p);
                let text = fs::read_to_string(&full)
                    .map_err(|e| ConfigError::new(field, format!("cannot read {}: {e}", full.display())))?;
                Ok((text, format!("{field}({p})")))
            }
            None => Ok((self.0.to_string(), field.to_string())),
        }
    }

    pub fn load<T: DeserializeOwned>(&self, field: &str, base: &Path) -> Result<T, ConfigError> {
        let (text, label) = self.text(field, base)?;
        parse_at(&text, &label)
    }

    /// Loads a kernel chain, reporting invalid entries by their JSON path.
    pub fn load_chain(&self, field: &str, base: &Path) -> Result<ChainSequence, ConfigError> {
        let (text, label) = self.text(field, base)?;
        let doc: ChainDocument = parse_at(&text, &label)?;
        doc.to_chain().map_err(|e| match e {
            crate::kernel::interchange::InterchangeError::Invalid { path, source } => {
                ConfigError::new(format!("{label}.{path}"), source)
            }
            crate::kernel::interchange::InterchangeError::Structure { path, message } => {
                ConfigError::new(format!("{label}.{path}"), message)
            }
            other => ConfigError::new(label, other),
        })
    }
}

fn parse_at<T: DeserializeOwned>(text: &str, label: &str) -> Result<T, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.path().to_string();
        let path = if inner == "." {
            label.to_string()
        } else {
            format!("{label}.{inner}")
        };
        ConfigError::new(path, e.into_inner())
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomChainConfig {
    /// Sizes of `E_0, …, E_K`.
    pub sizes: Vec<usize>,
    pub c0_floor: f64,
    pub eps0_floor: f64,
}

impl Default for RandomChainConfig {
    fn default() -> Self {
        Self {
            sizes: vec![10; 21],
            c0_floor: 0.3,
            eps0_floor: 0.2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErgodicSection {
    /// A kernel document; a random chain is drawn when absent.
    #[serde(default)]
    pub chain: Option<Reference>,
    #[serde(default)]
    pub random: RandomChainConfig,
    /// Test function on `E_0`; a ramp from 0 to 1 when absent.
    #[serde(default)]
    pub f: Option<Vec<f64>>,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    1e-10
}

impl Default for ErgodicSection {
    fn default() -> Self {
        Self {
            chain: None,
            random: RandomChainConfig::default(),
            f: None,
            tol: default_tol(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WedgeSection {
    pub spec: Reference,
    /// Radii of the field table; a log grid over `[1e-3, 1]` when absent.
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
    #[serde(default = "default_angular")]
    pub n_angular: usize,
    #[serde(default)]
    pub grid: HittingGrid,
}

fn default_angular() -> usize {
    16
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub domain: Reference,
    #[serde(default)]
    pub coefficients: Option<Reference>,
    pub params: SimParams,
    pub start: Vec2,
    pub target: f64,
    pub replicates: u64,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default)]
    pub restart: bool,
    /// Replicates whose full paths are dumped.
    #[serde(default)]
    pub record_paths: u64,
}

fn default_bins() -> usize {
    16
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    pub domain: Reference,
    #[serde(default)]
    pub coefficients: Option<Reference>,
    pub params: SimParams,
    pub ladder: ShellLadder,
    #[serde(default = "default_first")]
    pub first: usize,
    pub last: usize,
    pub n_per_bin: u64,
}

fn default_first() -> usize {
    1
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    #[serde(default)]
    pub suite: Option<Suite>,
    #[serde(default)]
    pub scale: Scale,
    /// A kernel document validated and checked by the kernel suite.
    #[serde(default)]
    pub chain: Option<Reference>,
}

/// A versioned experiment definition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    /// Must match the command it is run with, when given.
    #[serde(default)]
    pub scenario: Option<Scenario>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Where artifacts go when no directory is given on the command line;
    /// relative to the configuration file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub ergodic: Option<ErgodicSection>,
    #[serde(default)]
    pub wedge: Option<WedgeSection>,
    #[serde(default)]
    pub simulate: Option<SimulateSection>,
    #[serde(default)]
    pub kernels: Option<KernelSection>,
    #[serde(default)]
    pub verify: Option<VerifySection>,
    /// Directory that file references are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_workers() -> usize {
    1
}

impl ExperimentConfig {
    pub fn new(scenario: Scenario, seed: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            scenario: Some(scenario),
            seed,
            workers: 1,
            output_dir: None,
            ergodic: None,
            wedge: None,
            simulate: None,
            kernels: None,
            verify: None,
            base_dir: PathBuf::from("."),
        }
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError::new(path.display().to_string(), format!("cannot read: {e}")))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, &base)
    }

    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let raw: Value = serde_json::from_str(text).map_err(|e| ConfigError::new("config", e))?;
        match raw.get("schema_version").map(Value::as_u64) {
            None => return Err(ConfigError::new("schema_version", "missing")),
            Some(Some(v)) if v == SCHEMA_VERSION as u64 => {}
            Some(_) => {
                return Err(ConfigError::new(
                    "schema_version",
                    format!("unsupported, expected {SCHEMA_VERSION}"),
                ))
            }
        }
        let mut cfg: Self = parse_at(text, "config")?;
        cfg.base_dir = base_dir.to_path_buf();
        if cfg.workers == 0 {
            return Err(ConfigError::new("workers", "must be at least 1"));
        }
        Ok(cfg)
    }

    /// Checks that the configuration may be run as `scenario`.
    pub fn check_scenario(&self, scenario: Scenario) -> Result<(), ConfigError> {
        match self.scenario {
            Some(s) if s != scenario => Err(ConfigError::new(
                "scenario",
                format!("config is for {}, not {}", s.name(), scenario.name()),
            )),
            _ => Ok(()),
        }
    }

    /// `output_dir` resolved against the configuration's directory.
    pub fn resolved_output_dir(&self) -> Option<PathBuf> {
        self.output_dir.as_ref().map(|d| self.base_dir.join(d))
    }

    pub fn missing(scenario: Scenario) -> ConfigError {
        ConfigError::new(scenario.section(), "section required for this scenario")
    }

    pub(crate) fn params(&self, field: &str, params: &SimParams) -> Result<SimParams, ConfigError> {
        let mut p = *params;
        p.seed = self.seed;
        p.workers = self.workers;
        p.validate().map_err(|e| ConfigError::new(field, e))?;
        Ok(p)
    }
}

pub(crate) fn load_domain(r: &Reference, field: &str, base: &Path) -> Result<Domain, ConfigError> {
    let spec: DomainSpec = r.load(field, base)?;
    Domain::new(&spec).map_err(|e| ConfigError::new(field, e))
}

pub(crate) fn load_coefficients(r: Option<&Reference>, field: &str, base: &Path) -> Result<Coefficients, ConfigError> {
    let c = match r {
        Some(r) => r.load(field, base)?,
        None => Coefficients::brownian(),
    };
    c.validate().map_err(|e| ConfigError::new(field, e))?;
    Ok(c)
}

pub(crate) fn load_wedge(r: &Reference, field: &str, base: &Path) -> Result<WedgeSpec, ConfigError> {
    let f: WedgeSpecFile = r.load(field, base)?;
    WedgeSpec::from_file(&f).map_err(|e| ConfigError::new(field, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let c = ExperimentConfig::from_json(r#"{"schema_version": 1}"#, Path::new(".")).unwrap();
        assert_eq!(c.workers, 1);
        assert!(c.scenario.is_none());
    }

    #[test]
    fn errors_carry_field_paths() {
        let e = ExperimentConfig::from_json(r#"{"schema_version": 2}"#, Path::new(".")).unwrap_err();
        assert_eq!(e.path, "schema_version");
        let c = ExperimentConfig::from_json(
            r#"{"schema_version": 1, "wedge": {"spec": {"zeta": "wide", "g1": [0, 1], "g2": [0, 1]}}}"#,
            Path::new("."),
        )
        .unwrap();
        let spec = &c.wedge.as_ref().unwrap().spec;
        let e = load_wedge(spec, "wedge.spec", Path::new(".")).unwrap_err();
        assert_eq!(e.path, "wedge.spec.zeta", "{e}");
        let e = ExperimentConfig::from_json(r#"{"schema_version": 1, "bogus": 1}"#, Path::new(".")).unwrap_err();
        assert!(e.message.contains("bogus"), "{e}");
    }

    #[test]
    fn scenario_mismatch() {
        let c = ExperimentConfig::new(Scenario::Simulate, 0);
        assert!(c.check_scenario(Scenario::Verify).is_err());
        assert!(c.check_scenario(Scenario::Simulate).is_ok());
    }

    #[test]
    fn inline_reference_paths() {
        let r = Reference(serde_json::json!({"zeta": 1.0, "g1": [0.0, 1.0], "g2": "x"}));
        let e = load_wedge(&r, "wedge.spec", Path::new(".")).unwrap_err();
        assert_eq!(e.path, "wedge.spec.g2");
    }
}
