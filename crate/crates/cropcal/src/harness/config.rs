//! Experiment configuration: JSON file plus CLI overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{DeConfig, GaConfig, HhoConfig, PsoConfig};
use crate::core::{Error, Result};
use crate::demmogc::DemmogcConfig;
use crate::enkf::EnkfConfig;
use crate::wofost::{variety_presets, CropVariety, DEFAULT_DAYS};

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, Hash)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Demmogc,
    De,
    Ga,
    Pso,
    Hho,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Demmogc,
        Algorithm::De,
        Algorithm::Ga,
        Algorithm::Pso,
        Algorithm::Hho,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Algorithm::Demmogc => "demmogc",
            Algorithm::De => "de",
            Algorithm::Ga => "ga",
            Algorithm::Pso => "pso",
            Algorithm::Hho => "hho",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .iter()
            .copied()
            .find(|a| a.id() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown algorithm '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Objective is the error of the filter-corrected trajectory.
    #[default]
    Assimilation,
    /// Objective is the error of the free-running model trajectory.
    WofostOnly,
}

impl Mode {
    pub fn id(&self) -> &'static str {
        match self {
            Mode::Assimilation => "assimilation",
            Mode::WofostOnly => "wofost-only",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "assimilation" => Ok(Mode::Assimilation),
            "wofost-only" | "wofost_only" | "wofost" => Ok(Mode::WofostOnly),
            other => Err(Error::Config(format!("unknown mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(default)]
pub struct OptimizerSettings {
    pub demmogc: DemmogcConfig,
    pub de: DeConfig,
    pub ga: GaConfig,
    pub pso: PsoConfig,
    pub hho: HhoConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Preset or custom variety name.
    pub variety: String,
    /// Extra varieties that extend or shadow the embedded presets.
    pub custom_varieties: Vec<CropVariety>,
    pub algorithm: Algorithm,
    pub mode: Mode,
    pub runs: usize,
    pub seed: u64,
    pub days: usize,
    /// Relative sigma of the day-to-day weather jitter in the target.
    pub target_jitter: f64,
    /// Optional known weather genome (TAVG, seasonal RAIN) for the target;
    /// midpoint weather when absent.
    pub target_genome: Option<[f64; 2]>,
    pub optimizer: OptimizerSettings,
    pub enkf: EnkfConfig,
    pub out_dir: Option<PathBuf>,
    pub format: OutputFormat,
    /// Run comparison cells in parallel when compiled with the parallel
    /// feature.
    pub parallel: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            variety: "HD-2967".to_string(),
            custom_varieties: Vec::new(),
            algorithm: Algorithm::Demmogc,
            mode: Mode::default(),
            runs: 1,
            seed: 42,
            days: DEFAULT_DAYS,
            target_jitter: 0.05,
            target_genome: None,
            optimizer: OptimizerSettings::default(),
            enkf: EnkfConfig::default(),
            out_dir: None,
            format: OutputFormat::default(),
            parallel: true,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config: ExperimentConfig = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if self.days < 2 {
            return Err(Error::Config("season must span at least 2 days".into()));
        }
        if self.target_jitter < 0.0 {
            return Err(Error::Config(format!(
                "target jitter {} must be non-negative",
                self.target_jitter
            )));
        }
        for v in &self.custom_varieties {
            v.validate()?;
        }
        self.resolve_variety(&self.variety)?;
        self.optimizer.demmogc.validate()?;
        self.enkf.validate()?;
        Ok(())
    }

    /// Custom varieties shadow presets of the same name.
    pub fn resolve_variety(&self, name: &str) -> Result<CropVariety> {
        self.custom_varieties
            .iter()
            .find(|v| v.name.eq_ignore_ascii_case(name))
            .cloned()
            .map(Ok)
            .unwrap_or_else(|| crate::wofost::find_preset(name))
    }

    pub fn known_varieties(&self) -> Vec<CropVariety> {
        let mut all = self.custom_varieties.clone();
        for preset in variety_presets() {
            if !all.iter().any(|v| v.name.eq_ignore_ascii_case(&preset.name)) {
                all.push(preset);
            }
        }
        all
    }
}
