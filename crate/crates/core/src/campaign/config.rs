//! Campaign configuration: a versioned TOML schema with strict parsing.
//! Unknown keys are errors so an archived config always means what it meant.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::evolve::GaConfig;
use crate::geometry::{PanelChainSpec, VehicleGeometry};
use crate::rig::synthetic::SyntheticDragModel;
use crate::trace::RigConditions;

use super::CampaignError;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// Which experiment a campaign runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CampaignMode {
    Exp1Baseline,
    Exp2Optimize,
    DynamicValidate,
    Enumerate,
}

impl std::fmt::Display for CampaignMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            CampaignMode::Exp1Baseline => "exp1-baseline",
            CampaignMode::Exp2Optimize => "exp2-optimize",
            CampaignMode::DynamicValidate => "dynamic-validate",
            CampaignMode::Enumerate => "enumerate",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RigBackendKind {
    #[default]
    Synthetic,
    Replay,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RigSettings {
    pub backend: RigBackendKind,
    /// Pace synthetic acquisitions at wall-clock speed.
    pub realtime: bool,
    pub synthetic: SyntheticDragModel,
    pub replay_archive_dir: Option<PathBuf>,
    pub remote_address: Option<String>,
    pub remote_timeout_s: f64,
}

impl Default for RigSettings {
    fn default() -> Self {
        Self {
            backend: RigBackendKind::Synthetic,
            realtime: false,
            synthetic: SyntheticDragModel::morphing_vehicle(),
            replay_archive_dir: None,
            remote_address: None,
            remote_timeout_s: 30.0,
        }
    }
}

/// Baseline-experiment protocol (two vehicle configurations across a speed
/// sweep, several repeated trials each).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Exp1Settings {
    pub wind_speeds_m_s: Vec<f64>,
    pub trials_per_cell: usize,
    pub trial_duration_s: f64,
}

impl Default for Exp1Settings {
    fn default() -> Self {
        Self {
            wind_speeds_m_s: vec![5.79, 7.33, 8.65, 10.13],
            trials_per_cell: 5,
            trial_duration_s: 30.0,
        }
    }
}

/// Dynamic-morph validation protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateSettings {
    /// Elite shapes as grid-index triples.
    pub elites: Vec<[u8; 3]>,
    pub trials_per_elite: usize,
    pub hold_before_s: f64,
    pub transition_s: f64,
    pub hold_after_s: f64,
}

impl Default for ValidateSettings {
    fn default() -> Self {
        Self {
            elites: Vec::new(),
            trials_per_elite: 4,
            hold_before_s: 10.0,
            transition_s: 2.0,
            hold_after_s: 15.0,
        }
    }
}

/// Statistical and plotting parameters shared by the analysis stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSettings {
    pub alpha: f64,
    pub filter: crate::dsp::FilterSpec,
    pub average_window_s: f64,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self { alpha: 0.01, filter: crate::dsp::FilterSpec::default(), average_window_s: 1.0 }
    }
}

/// Complete campaign description. One root `seed` drives every random
/// stream; `resolve` copies it into the GA and the synthetic model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub version: u32,
    /// Expected experiment; commands refuse a config written for a
    /// different one.
    pub mode: Option<CampaignMode>,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Keep per-trial trace files on disk.
    pub persist_traces: bool,
    pub ga: GaConfig,
    pub rig: RigSettings,
    pub conditions: RigConditions,
    pub geometry: PanelChainSpec,
    pub vehicle: VehicleGeometry,
    pub exp1: Exp1Settings,
    pub validate: ValidateSettings,
    pub analysis: AnalysisSettings,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            version: CONFIG_SCHEMA_VERSION,
            mode: None,
            seed: 0,
            output_dir: PathBuf::from("out"),
            persist_traces: true,
            ga: GaConfig::default(),
            rig: RigSettings::default(),
            conditions: RigConditions::default(),
            geometry: PanelChainSpec::default(),
            vehicle: VehicleGeometry::default(),
            exp1: Exp1Settings::default(),
            validate: ValidateSettings::default(),
            analysis: AnalysisSettings::default(),
        }
    }
}

impl CampaignConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CampaignError> {
        let config: CampaignConfig =
            toml::from_str(text).map_err(|e| CampaignError::Config(e.to_string()))?;
        if config.version != CONFIG_SCHEMA_VERSION {
            return Err(CampaignError::Config(format!(
                "config schema version {} is not supported (expected {})",
                config.version, CONFIG_SCHEMA_VERSION
            )));
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CampaignError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CampaignError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_toml_str(&text)
    }

    /// Propagates the root seed into every seeded component and validates
    /// cross-field constraints. Campaigns run resolved configs only.
    pub fn resolve(mut self) -> Result<Self, CampaignError> {
        self.ga.rng_seed = self.seed;
        self.rig.synthetic.seed = self.seed;
        self.ga.validate().map_err(|e| CampaignError::Config(e.to_string()))?;
        self.geometry.validate().map_err(|e| CampaignError::Config(e.to_string()))?;
        self.vehicle.validate().map_err(|e| CampaignError::Config(e.to_string()))?;
        self.conditions.validate().map_err(|e| CampaignError::Config(e.to_string()))?;
        self.rig.synthetic.validate().map_err(|e| CampaignError::Config(e.to_string()))?;
        if !(self.analysis.alpha > 0.0 && self.analysis.alpha < 1.0) {
            return Err(CampaignError::Config(format!(
                "analysis.alpha must be in (0, 1), got {}",
                self.analysis.alpha
            )));
        }
        match self.rig.backend {
            RigBackendKind::Replay => {
                let dir = self.rig.replay_archive_dir.as_ref().ok_or_else(|| {
                    CampaignError::Config("replay backend needs rig.replay_archive_dir".into())
                })?;
                if !dir.is_dir() {
                    return Err(CampaignError::Config(format!(
                        "replay archive {} does not exist",
                        dir.display()
                    )));
                }
            }
            RigBackendKind::Remote => {
                if self.rig.remote_address.is_none() {
                    return Err(CampaignError::Config(
                        "remote backend needs rig.remote_address".into(),
                    ));
                }
            }
            RigBackendKind::Synthetic => {}
        }
        Ok(self)
    }

    pub fn expect_mode(&self, mode: CampaignMode) -> Result<(), CampaignError> {
        match self.mode {
            Some(declared) if declared != mode => Err(CampaignError::Config(format!(
                "config declares mode {declared} but the {mode} command was invoked"
            ))),
            _ => Ok(()),
        }
    }

    /// Hash of the resolved config, stamped into every output artifact.
    /// The output directory is excluded: the same campaign re-run elsewhere
    /// reproduces identical artifacts, hash included.
    pub fn hash(&self) -> String {
        let mut hashed = self.clone();
        hashed.output_dir = PathBuf::new();
        let canonical = serde_json::to_string(&hashed).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}
