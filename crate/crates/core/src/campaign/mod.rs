//! Campaign orchestration: the operator-facing experiment runners and their
//! reproducible file outputs.
//!
//! Four campaign kinds mirror the experimental program:
//!
//! - [`run_exp1`]: baseline drag of the bare vehicle vs the morphing vehicle
//!   at the neutral shape, across the wind-speed sweep, with wind-off
//!   calibration per trial and one pooled t-test per speed.
//! - [`run_exp2`]: the hardware-in-the-loop optimization — a delta-mode GA
//!   campaign with per-generation neutral recalibration.
//! - [`run_dynamic_validation`]: neutral→elite morph transitions with
//!   raw/filtered/binned plot data and pre-vs-post t-tests.
//! - [`run_enumerate`]: the brute-force oracle — every admissible shape
//!   scored on the noiseless synthetic objective, ranked ascending.
//!
//! One campaign owns an output directory at a time (lock file). Every
//! artifact embeds the resolved config hash and seed, and a fixed config
//! reproduces every output byte for byte on the synthetic rig.

pub mod artifacts;
mod config;

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::dsp;
use crate::evolve::{self, run_campaign, CampaignResult, TerminationReason};
use crate::fullscale;
use crate::geometry::{Domain, MorphShape};
use crate::rig::remote::RemoteRig;
use crate::rig::replay::ReplayRig;
use crate::rig::synthetic::{SyntheticDragModel, SyntheticRig};
use crate::rig::{DragRig, MeanDragEvaluator, FITNESS_WINDOW_S};
use crate::stats::{self, TTestResult};
use crate::trace::{compute_drag_coefficient, compute_reynolds, ForceTrace, RigConditions};

pub use artifacts::{GenerationLog, Stamp, GENERATION_LOG_HEADER};
pub use config::{
    AnalysisSettings, CampaignConfig, CampaignMode, Exp1Settings, RigBackendKind, RigSettings,
    ValidateSettings, CONFIG_SCHEMA_VERSION,
};

#[derive(Debug, thiserror::Error)]
pub enum CampaignError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("output directory is locked by another campaign: {0}")]
    Locked(PathBuf),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
    #[error(transparent)]
    Rig(#[from] crate::rig::RigError),
    #[error(transparent)]
    Evolve(#[from] evolve::EvolveError),
    #[error(transparent)]
    Dsp(#[from] dsp::DspError),
    #[error(transparent)]
    Stats(#[from] stats::StatsError),
    #[error(transparent)]
    Trace(#[from] crate::trace::TraceError),
}

/// Exclusive ownership of an output directory for the campaign's duration.
pub struct CampaignLock {
    path: PathBuf,
}

impl CampaignLock {
    pub fn acquire(dir: &Path) -> Result<Self, CampaignError> {
        let path = dir.join(".morphlab.lock");
        match std::fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut file) => {
                let _ = writeln!(file, "locked");
                Ok(Self { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(CampaignError::Locked(path))
            }
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for CampaignLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}

/// Deterministic sub-seed for a named campaign component.
fn subseed(root: u64, tag: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(b"morphlab.campaign.subseed");
    hasher.update(root.to_le_bytes());
    hasher.update(tag.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

#[derive(Serialize)]
struct ConfigArtifact<'a> {
    schema_version: u32,
    config_hash: &'a str,
    config: &'a CampaignConfig,
}

struct Prepared {
    dir: PathBuf,
    hash: String,
    _lock: CampaignLock,
}

fn prepare_output(config: &CampaignConfig) -> Result<Prepared, CampaignError> {
    std::fs::create_dir_all(&config.output_dir)?;
    let lock = CampaignLock::acquire(&config.output_dir)?;
    let hash = config.hash();
    artifacts::write_json(
        &config.output_dir.join("config.json"),
        &ConfigArtifact { schema_version: 1, config_hash: &hash, config },
    )?;
    Ok(Prepared { dir: config.output_dir.clone(), hash, _lock: lock })
}

fn build_rig(
    config: &CampaignConfig,
    model: SyntheticDragModel,
    conditions: RigConditions,
) -> Result<Box<dyn DragRig>, CampaignError> {
    match config.rig.backend {
        RigBackendKind::Synthetic => Ok(Box::new(
            SyntheticRig::new(model, conditions)?.with_realtime(config.rig.realtime),
        )),
        RigBackendKind::Replay => {
            let dir = config
                .rig
                .replay_archive_dir
                .as_ref()
                .ok_or_else(|| CampaignError::Config("replay archive dir missing".into()))?;
            Ok(Box::new(ReplayRig::open(dir)?))
        }
        RigBackendKind::Remote => {
            let address = config
                .rig
                .remote_address
                .as_ref()
                .ok_or_else(|| CampaignError::Config("remote address missing".into()))?;
            let timeout = std::time::Duration::from_secs_f64(config.rig.remote_timeout_s);
            Ok(Box::new(RemoteRig::connect(address.as_str(), conditions, timeout)?))
        }
    }
}

// ---------------------------------------------------------------------------
// Exp 1: baseline drag characterization
// ---------------------------------------------------------------------------

/// One (configuration, wind speed) cell of the drag table, pooled over all
/// trials.
#[derive(Debug, Clone, Serialize)]
pub struct Exp1Cell {
    pub wind_speed_m_s: f64,
    pub mean_drag_n: f64,
    pub sample_std_n: f64,
    pub drag_coefficient: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Exp1SpeedTest {
    pub wind_speed_m_s: f64,
    /// One-sided test of base > neutral on pooled raw samples.
    pub ttest: TTestResult,
}

#[derive(Debug, Serialize)]
pub struct Exp1Report {
    pub schema_version: u32,
    pub config_hash: String,
    pub seed: u64,
    pub mode: CampaignMode,
    pub trials_per_cell: usize,
    pub base: Vec<Exp1Cell>,
    pub neutral: Vec<Exp1Cell>,
    pub reynolds: Vec<f64>,
    pub ttests: Vec<Exp1SpeedTest>,
}

struct Exp1Block {
    cells: Vec<Exp1Cell>,
    pooled_samples: Vec<Vec<f64>>,
}

fn run_exp1_block(
    rig: &mut dyn DragRig,
    label: &str,
    set_neutral_shape: bool,
    config: &CampaignConfig,
    out: Option<&Path>,
) -> Result<Exp1Block, CampaignError> {
    let mut cells = Vec::new();
    let mut pooled_samples = Vec::new();
    for (speed_index, &u) in config.exp1.wind_speeds_m_s.iter().enumerate() {
        let conditions = RigConditions { wind_speed_m_s: u, ..config.conditions };
        rig.set_conditions(conditions)?;
        if set_neutral_shape {
            rig.set_shape(&MorphShape::neutral())?;
        }
        let mut samples = Vec::new();
        for trial in 0..config.exp1.trials_per_cell {
            let wind_off = rig.acquire_wind_off()?;
            let wind_on = rig.acquire(config.exp1.trial_duration_s)?;
            let calibrated = dsp::calibrate_wind_off(&wind_on, &wind_off)?;
            if let Some(dir) = out {
                calibrated
                    .write_files(&dir.join(format!("{label}_u{speed_index}_t{trial}.csv")))?;
            }
            samples.extend_from_slice(&calibrated.samples);
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
        cells.push(Exp1Cell {
            wind_speed_m_s: u,
            mean_drag_n: mean,
            sample_std_n: var.sqrt(),
            drag_coefficient: compute_drag_coefficient(
                mean,
                &conditions,
                config.vehicle.frontal_area_m2,
            )?,
        });
        pooled_samples.push(samples);
    }
    Ok(Exp1Block { cells, pooled_samples })
}

/// Baseline experiment: bare vehicle and neutral-configuration morphing
/// vehicle across the speed sweep, with per-trial wind-off calibration.
/// Emits `drag_table.csv` and `exp1_report.json`.
pub fn run_exp1(config: &CampaignConfig) -> Result<Exp1Report, CampaignError> {
    config.expect_mode(CampaignMode::Exp1Baseline)?;
    let prepared = prepare_output(config)?;
    let traces_dir = prepared.dir.join("traces");
    let out = if config.persist_traces {
        std::fs::create_dir_all(&traces_dir)?;
        Some(traces_dir.as_path())
    } else {
        None
    };

    let (base, neutral) = match config.rig.backend {
        RigBackendKind::Remote => {
            return Err(CampaignError::Config(
                "the baseline experiment needs the base-vehicle model swapped in and out, \
                 which a remote rig cannot do; use the synthetic or replay backend"
                    .into(),
            ))
        }
        RigBackendKind::Synthetic => {
            let base_model = SyntheticDragModel {
                seed: subseed(config.seed, "exp1-base"),
                noise: config.rig.synthetic.noise,
                drift_std_n_per_sqrt_s: config.rig.synthetic.drift_std_n_per_sqrt_s,
                ..SyntheticDragModel::base_vehicle()
            };
            let mut base_rig = SyntheticRig::new(base_model, config.conditions)?
                .with_realtime(config.rig.realtime);
            let base = run_exp1_block(&mut base_rig, "base", false, config, out)?;

            let neutral_model = SyntheticDragModel {
                seed: subseed(config.seed, "exp1-neutral"),
                ..config.rig.synthetic.clone()
            };
            let mut neutral_rig = SyntheticRig::new(neutral_model, config.conditions)?
                .with_realtime(config.rig.realtime);
            let neutral = run_exp1_block(&mut neutral_rig, "neutral", true, config, out)?;
            (base, neutral)
        }
        RigBackendKind::Replay => {
            // One archive holds the whole protocol in block order.
            let mut rig = build_rig(config, config.rig.synthetic.clone(), config.conditions)?;
            let base = run_exp1_block(&mut rig, "base", false, config, out)?;
            let neutral = run_exp1_block(&mut rig, "neutral", true, config, out)?;
            (base, neutral)
        }
    };

    let reynolds: Vec<f64> = config
        .exp1
        .wind_speeds_m_s
        .iter()
        .map(|&u| {
            compute_reynolds(
                &RigConditions { wind_speed_m_s: u, ..config.conditions },
                config.vehicle.length_m,
            )
        })
        .collect();

    let mut ttests = Vec::new();
    for (i, &u) in config.exp1.wind_speeds_m_s.iter().enumerate() {
        let result = stats::t_test_one_sided(
            &base.pooled_samples[i],
            &neutral.pooled_samples[i],
            config.analysis.alpha,
        )?;
        ttests.push(Exp1SpeedTest { wind_speed_m_s: u, ttest: result });
    }

    let stamp = Stamp { config_hash: &prepared.hash, seed: config.seed };
    let mut table = artifacts::create_csv(
        &prepared.dir.join("drag_table.csv"),
        &stamp,
        "U_m_s,base_mean_N,base_std_N,neutral_mean_N,neutral_std_N,cd_base,cd_neutral,reynolds",
    )?;
    for (i, &wind_speed) in config.exp1.wind_speeds_m_s.iter().enumerate() {
        writeln!(
            table,
            "{:.3},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.0}",
            wind_speed,
            base.cells[i].mean_drag_n,
            base.cells[i].sample_std_n,
            neutral.cells[i].mean_drag_n,
            neutral.cells[i].sample_std_n,
            base.cells[i].drag_coefficient,
            neutral.cells[i].drag_coefficient,
            reynolds[i],
        )?;
    }
    table.flush()?;

    let report = Exp1Report {
        schema_version: 1,
        config_hash: prepared.hash.clone(),
        seed: config.seed,
        mode: CampaignMode::Exp1Baseline,
        trials_per_cell: config.exp1.trials_per_cell,
        base: base.cells,
        neutral: neutral.cells,
        reynolds,
        ttests,
    };
    artifacts::write_json(&prepared.dir.join("exp1_report.json"), &report)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// Exp 2: hardware-in-the-loop optimization
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct BestShapeSummary {
    pub indices: [u8; 3],
    pub theta_deg: [f64; 3],
    pub chromosome: String,
    /// Recorded fitness: mean drag delta vs the neutral reference, N.
    pub fitness_n: f64,
    pub evaluated_at_generation: usize,
}

/// Noise-free surrogate truth about the winning shape; synthetic rigs only.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModelTruth {
    /// Drag removed at the winning shape as a fraction of the no-morphing
    /// baseline (the recovered share of the planted bowl depth).
    pub reduction_vs_baseline: f64,
    /// Reduction relative to the neutral configuration's noiseless drag.
    pub reduction_vs_neutral: f64,
}

#[derive(Debug, Serialize)]
pub struct Exp2Summary {
    pub schema_version: u32,
    pub config_hash: String,
    pub seed: u64,
    pub mode: CampaignMode,
    pub wind_speed_m_s: f64,
    pub generations: usize,
    pub evaluator_calls: u64,
    pub shapes_explored: u64,
    pub termination: TerminationReason,
    pub best: BestShapeSummary,
    pub best_fitness_by_generation: Vec<f64>,
    pub model_truth: Option<ModelTruth>,
}

#[derive(Debug)]
pub struct Exp2Report {
    pub summary: Exp2Summary,
    pub result: CampaignResult,
}

/// The surrogate's noise-free assessment of a shape.
pub fn model_truth_for(model: &SyntheticDragModel, shape: &MorphShape, wind_speed_m_s: f64) -> ModelTruth {
    let neutral = model.noiseless_drag_n(&MorphShape::neutral(), wind_speed_m_s);
    let found = model.noiseless_drag_n(shape, wind_speed_m_s);
    ModelTruth {
        reduction_vs_baseline: model.reduction_fraction(&shape.theta_deg),
        reduction_vs_neutral: (neutral - found) / neutral,
    }
}

/// Optimization campaign in delta-vs-neutral mode with per-generation
/// recalibration. Emits `generations.csv`, `elites_history.csv`, and
/// `summary.json`.
pub fn run_exp2(config: &CampaignConfig) -> Result<Exp2Report, CampaignError> {
    config.expect_mode(CampaignMode::Exp2Optimize)?;
    let prepared = prepare_output(config)?;
    let stamp = Stamp { config_hash: &prepared.hash, seed: config.seed };

    let domain = Domain::new(config.geometry)?;
    let rig = build_rig(config, config.rig.synthetic.clone(), config.conditions)?;
    let mut evaluator = MeanDragEvaluator::delta_vs_neutral(rig).with_window(FITNESS_WINDOW_S);
    let mut log = GenerationLog::create(&prepared.dir, &stamp)?;

    let result = run_campaign(&config.ga, &domain, &mut evaluator, &mut log)?;
    artifacts::write_elite_history(&prepared.dir, &stamp, &result.records)?;

    let best = &result.best;
    let model_truth = match config.rig.backend {
        RigBackendKind::Synthetic => Some(model_truth_for(
            &config.rig.synthetic,
            &best.shape,
            config.conditions.wind_speed_m_s,
        )),
        _ => None,
    };
    let summary = Exp2Summary {
        schema_version: 1,
        config_hash: prepared.hash.clone(),
        seed: config.seed,
        mode: CampaignMode::Exp2Optimize,
        wind_speed_m_s: config.conditions.wind_speed_m_s,
        generations: result.records.len(),
        evaluator_calls: result.evaluator_calls,
        shapes_explored: result.evaluator_calls,
        termination: result.termination,
        best: BestShapeSummary {
            indices: best.shape.indices.expect("grid shape"),
            theta_deg: best.shape.theta_deg,
            chromosome: best.chromosome.bit_string(),
            fitness_n: best.fitness_n.expect("best is evaluated"),
            evaluated_at_generation: best.evaluated_at.expect("best is evaluated"),
        },
        best_fitness_by_generation: result
            .records
            .iter()
            .map(|r| r.elites[0].fitness_n.expect("elites evaluated"))
            .collect(),
        model_truth,
    };
    artifacts::write_json(&prepared.dir.join("summary.json"), &summary)?;
    Ok(Exp2Report { summary, result })
}

// ---------------------------------------------------------------------------
// Dynamic-morph validation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct DynamicTrial {
    pub elite_indices: [u8; 3],
    pub trial: usize,
    pub mean_before_n: f64,
    pub mean_after_n: f64,
    pub drop_n: f64,
    /// One-sided test of before > after on raw samples.
    pub ttest: TTestResult,
}

#[derive(Debug, Serialize)]
pub struct ValidationReport {
    pub schema_version: u32,
    pub config_hash: String,
    pub seed: u64,
    pub mode: CampaignMode,
    /// Morph onset and end within each trace, seconds.
    pub morph_onset_s: f64,
    pub morph_end_s: f64,
    pub alpha: f64,
    pub trials: Vec<DynamicTrial>,
}

/// Dynamic-morph trials for a set of elite shapes: hold neutral, morph,
/// hold the elite; t-test post-transition vs pre-transition raw samples and
/// emit raw/filtered/binned plot data per trial.
pub fn run_dynamic_validation(config: &CampaignConfig) -> Result<ValidationReport, CampaignError> {
    config.expect_mode(CampaignMode::DynamicValidate)?;
    if config.validate.elites.is_empty() {
        return Err(CampaignError::Config(
            "validate.elites is empty; list at least one elite shape as grid indices".into(),
        ));
    }
    let domain = Domain::new(config.geometry)?;
    let mut elites = Vec::new();
    for &indices in &config.validate.elites {
        let shape = MorphShape::from_indices(indices)?;
        if !domain.contains(&shape) {
            return Err(CampaignError::Config(format!(
                "elite shape {indices:?} is not admissible under the configured geometry"
            )));
        }
        elites.push(shape);
    }

    let prepared = prepare_output(config)?;
    let stamp = Stamp { config_hash: &prepared.hash, seed: config.seed };
    let plots_dir = prepared.dir.join("plots");
    std::fs::create_dir_all(&plots_dir)?;
    let traces_dir = prepared.dir.join("traces");
    if config.persist_traces {
        std::fs::create_dir_all(&traces_dir)?;
    }

    let mut rig = build_rig(config, config.rig.synthetic.clone(), config.conditions)?;
    let v = &config.validate;
    let onset = v.hold_before_s;
    let end = v.hold_before_s + v.transition_s;
    let total = end + v.hold_after_s;
    let neutral = MorphShape::neutral();

    let mut trials = Vec::new();
    for (elite_index, elite) in elites.iter().enumerate() {
        for trial in 0..v.trials_per_elite {
            let trace =
                rig.dynamic_trace(&neutral, elite, v.hold_before_s, v.transition_s, v.hold_after_s)?;
            let stem = format!("elite{elite_index}_trial{trial}");
            if config.persist_traces {
                trace.write_files(&traces_dir.join(format!("{stem}.csv")))?;
            }
            let filtered = dsp::lowpass(&trace, &config.analysis.filter)?;
            let bins =
                dsp::moving_average(&trace, config.analysis.average_window_s, dsp::AverageKind::Binned)?;
            artifacts::write_plot_data(
                &plots_dir,
                &stem,
                &stamp,
                trace.sample_rate_hz,
                &trace.samples,
                &filtered.samples,
                &bins,
            )?;

            let before = trace.slice_seconds(0.0, onset);
            let after = trace.slice_seconds(end, total);
            let ttest = stats::t_test_traces(&before, &after, config.analysis.alpha)?;
            trials.push(DynamicTrial {
                elite_indices: elite.indices.expect("grid shape"),
                trial,
                mean_before_n: before.mean(),
                mean_after_n: after.mean(),
                drop_n: before.mean() - after.mean(),
                ttest,
            });
        }
    }

    let report = ValidationReport {
        schema_version: 1,
        config_hash: prepared.hash.clone(),
        seed: config.seed,
        mode: CampaignMode::DynamicValidate,
        morph_onset_s: onset,
        morph_end_s: end,
        alpha: config.analysis.alpha,
        trials,
    };
    artifacts::write_json(&prepared.dir.join("validation.json"), &report)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// Brute-force enumeration
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct EnumerateReport {
    pub schema_version: u32,
    pub config_hash: String,
    pub seed: u64,
    pub mode: CampaignMode,
    pub total_shapes: usize,
    pub best_indices: [u8; 3],
    pub best_theta_deg: [f64; 3],
    pub best_drag_n: f64,
}

/// Scores every admissible shape on the noiseless synthetic objective and
/// writes the ascending ranking (`ranking.csv`). Synthetic backend only:
/// exhaustive sweeps are infeasible on hardware.
pub fn run_enumerate(config: &CampaignConfig) -> Result<EnumerateReport, CampaignError> {
    config.expect_mode(CampaignMode::Enumerate)?;
    if config.rig.backend != RigBackendKind::Synthetic {
        return Err(CampaignError::Config(
            "enumeration needs the synthetic backend; 274k measurements are infeasible on a tunnel"
                .into(),
        ));
    }
    let prepared = prepare_output(config)?;
    let stamp = Stamp { config_hash: &prepared.hash, seed: config.seed };
    let domain = Domain::new(config.geometry)?;
    let model = &config.rig.synthetic;
    let u = config.conditions.wind_speed_m_s;

    let mut scored: Vec<(f64, [u8; 3])> = domain
        .iter()
        .map(|shape| (model.noiseless_drag_n(&shape, u), shape.indices.expect("grid shape")))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));

    let mut ranking = artifacts::create_csv(
        &prepared.dir.join("ranking.csv"),
        &stamp,
        "rank,i1,i2,i3,theta1_deg,theta2_deg,theta3_deg,drag_N",
    )?;
    for (rank, (drag, indices)) in scored.iter().enumerate() {
        let shape = MorphShape::from_indices(*indices).expect("in range");
        let t = shape.theta_deg;
        writeln!(
            ranking,
            "{},{},{},{},{:.6},{:.6},{:.6},{:.9}",
            rank, indices[0], indices[1], indices[2], t[0], t[1], t[2], drag
        )?;
    }
    ranking.flush()?;

    let (best_drag, best_indices) = scored[0];
    let best_shape = MorphShape::from_indices(best_indices).expect("in range");
    let report = EnumerateReport {
        schema_version: 1,
        config_hash: prepared.hash.clone(),
        seed: config.seed,
        mode: CampaignMode::Enumerate,
        total_shapes: scored.len(),
        best_indices,
        best_theta_deg: best_shape.theta_deg,
        best_drag_n: best_drag,
    };
    artifacts::write_json(&prepared.dir.join("enumerate_report.json"), &report)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// Full-scale design tables (CLI `scale` / `economics` backends)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct MaterialRow {
    pub name: String,
    pub youngs_modulus_gpa: f64,
    pub ultimate_strength_mpa: f64,
    pub density_kg_m3: f64,
    pub min_thickness_mm: f64,
    pub governed_by: fullscale::GoverningCriterion,
    pub actuation_torque_nm: f64,
    pub recovery_distance_m: f64,
}

/// Sizes each candidate material and estimates its morph-energy recovery
/// distance at cruise.
pub fn material_table(
    materials: &[fullscale::MaterialSpec],
    panel: &fullscale::FullScalePanelSpec,
    econ: &fullscale::EconomicsSpec,
    drag_coefficient: f64,
    frontal_area_m2: f64,
    air_density_kg_m3: f64,
) -> Result<Vec<MaterialRow>, CampaignError> {
    let mut rows = Vec::new();
    for material in materials {
        material.validate().map_err(|e| CampaignError::Config(e.to_string()))?;
        let sizing = fullscale::min_half_thickness(material, panel);
        rows.push(MaterialRow {
            name: material.name.clone(),
            youngs_modulus_gpa: material.youngs_modulus_pa / 1e9,
            ultimate_strength_mpa: material.ultimate_strength_pa / 1e6,
            density_kg_m3: material.density_kg_m3,
            min_thickness_mm: 2.0 * sizing.half_thickness_m * 1e3,
            governed_by: sizing.governed_by,
            actuation_torque_nm: fullscale::actuation_torque(
                material,
                panel,
                sizing.half_thickness_m,
            ),
            recovery_distance_m: fullscale::morph_energy_recovery_distance(
                material,
                panel,
                econ,
                drag_coefficient,
                frontal_area_m2,
                air_density_kg_m3,
            ),
        });
    }
    Ok(rows)
}

/// Writes the material table as CSV.
pub fn write_material_table_csv<W: Write>(rows: &[MaterialRow], mut out: W) -> Result<(), CampaignError> {
    writeln!(
        out,
        "name,E_GPa,sigma_u_MPa,rho_kg_m3,min_thickness_2h_mm,governed_by,actuation_torque_Nm,recovery_distance_m"
    )?;
    for r in rows {
        let governed = match r.governed_by {
            fullscale::GoverningCriterion::Stress => "stress",
            fullscale::GoverningCriterion::Deflection => "deflection",
        };
        writeln!(
            out,
            "{},{:.1},{:.1},{:.1},{:.3},{},{:.1},{:.2}",
            r.name.replace(',', ";"),
            r.youngs_modulus_gpa,
            r.ultimate_strength_mpa,
            r.density_kg_m3,
            r.min_thickness_mm,
            governed,
            r.actuation_torque_nm,
            r.recovery_distance_m
        )?;
    }
    Ok(())
}

/// Reads a materials CSV with header `name,E_GPa,sigma_u_MPa,rho_kg_m3`.
pub fn read_materials_csv<R: std::io::Read>(
    reader: R,
) -> Result<Vec<fullscale::MaterialSpec>, CampaignError> {
    let mut csv_reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(reader);
    let mut materials = Vec::new();
    for record in csv_reader.records() {
        let record = record.map_err(|e| CampaignError::Config(format!("materials csv: {e}")))?;
        if record.len() != 4 {
            return Err(CampaignError::Config(format!(
                "materials csv expects `name,E_GPa,sigma_u_MPa,rho_kg_m3`, got {} fields",
                record.len()
            )));
        }
        let parse = |i: usize| -> Result<f64, CampaignError> {
            record[i]
                .trim()
                .parse()
                .map_err(|e| CampaignError::Config(format!("materials csv field {i}: {e}")))
        };
        materials.push(fullscale::MaterialSpec::new(
            record[0].trim(),
            parse(1)?,
            parse(2)?,
            parse(3)?,
        ));
    }
    Ok(materials)
}

/// Deterministic streamed trace for plotting or ad-hoc analysis: raw,
/// filtered, and binned series of one recorded trace file.
pub fn replay_trace_report(
    trace_csv: &Path,
    analysis: &AnalysisSettings,
    out_dir: &Path,
) -> Result<(), CampaignError> {
    let trace = ForceTrace::read_files(trace_csv)?;
    std::fs::create_dir_all(out_dir)?;
    let filtered = dsp::lowpass(&trace, &analysis.filter)?;
    let bins = dsp::moving_average(&trace, analysis.average_window_s, dsp::AverageKind::Binned)?;
    let stem = trace_csv
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| CampaignError::Config("trace path has no file stem".into()))?;
    let stamp = Stamp { config_hash: "replayed-trace", seed: 0 };
    artifacts::write_plot_data(
        out_dir,
        stem,
        &stamp,
        trace.sample_rate_hz,
        &trace.samples,
        &filtered.samples,
        &bins,
    )?;
    Ok(())
}
