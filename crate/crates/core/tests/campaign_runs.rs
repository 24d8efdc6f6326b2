//! End-to-end campaign runs against the synthetic rig: artifact layout,
//! formats, locking, and replay-archive compatibility.

use std::path::Path;

use morphlab::campaign::{
    run_dynamic_validation, run_enumerate, run_exp1, run_exp2, CampaignConfig, CampaignError,
    CampaignLock, RigBackendKind,
};
use morphlab::evolve::GaConfig;
use morphlab::rig::replay::RecordingRig;
use morphlab::rig::synthetic::{SyntheticDragModel, SyntheticRig};
use morphlab::rig::{DragRig, MeanDragEvaluator};
use morphlab::{MorphShape, RigConditions};

fn small_config(dir: &Path, seed: u64) -> CampaignConfig {
    let mut config = CampaignConfig {
        seed,
        output_dir: dir.to_path_buf(),
        persist_traces: false,
        ga: GaConfig { max_generations: 6, ..GaConfig::default() },
        ..CampaignConfig::default()
    };
    config.exp1.trials_per_cell = 2;
    config.exp1.trial_duration_s = 5.0;
    config.validate.elites = vec![[10, 52, 60]];
    config.validate.trials_per_elite = 2;
    config
}

#[test]
fn exp2_campaign_writes_generation_log_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path(), 5).resolve().unwrap();
    let report = run_exp2(&config).unwrap();

    let log = std::fs::read_to_string(dir.path().join("generations.csv")).unwrap();
    let mut lines = log.lines();
    let stamp = lines.next().unwrap();
    assert!(stamp.starts_with("# config_hash=") && stamp.ends_with("seed=5"), "{stamp}");
    assert_eq!(
        lines.next().unwrap(),
        "generation,i1,i2,i3,theta1_deg,theta2_deg,theta3_deg,fitness_N,is_elite"
    );
    // 50 rows for generation 0 plus 20 per later generation.
    let rows = log.lines().count() - 2;
    assert_eq!(rows, 50 + 20 * (report.summary.generations - 1));

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["seed"], 5);
    assert_eq!(summary["mode"], "exp2-optimize");
    assert!(summary["model_truth"]["reduction_vs_baseline"].as_f64().unwrap() > 0.0);
    assert!(dir.path().join("elites_history.csv").exists());
    assert!(dir.path().join("config.json").exists());
    // Lock is released at campaign end.
    assert!(!dir.path().join(".morphlab.lock").exists());

    // Best-fitness trajectory is non-increasing (elitism).
    let history: Vec<f64> = report.summary.best_fitness_by_generation.clone();
    assert!(history.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn exp2_reruns_byte_identically() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let run = |dir: &Path| {
        let config = small_config(dir, 11).resolve().unwrap();
        run_exp2(&config).unwrap();
        let strip_output_dir = |name: &str| {
            // config.json embeds the output path, which necessarily differs.
            
            std::fs::read_to_string(dir.join(name)).unwrap()
        };
        (
            strip_output_dir("generations.csv"),
            strip_output_dir("elites_history.csv"),
            std::fs::read_to_string(dir.join("summary.json"))
                .unwrap()
                .replace(&dir.display().to_string(), "OUT"),
        )
    };
    assert_eq!(run(dir_a.path()), run(dir_b.path()));
}

#[test]
fn exp1_produces_expected_table_shape() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path(), 3).resolve().unwrap();
    let report = run_exp1(&config).unwrap();
    assert_eq!(report.base.len(), 4);
    assert_eq!(report.neutral.len(), 4);
    assert_eq!(report.ttests.len(), 4);
    // Means are ordered by speed and drag coefficients sit in a plausible band.
    for cells in [&report.base, &report.neutral] {
        assert!(cells.windows(2).all(|w| w[1].mean_drag_n > w[0].mean_drag_n));
        for cell in cells.iter() {
            assert!(cell.drag_coefficient > 0.9 && cell.drag_coefficient < 1.3);
        }
    }
    let table = std::fs::read_to_string(dir.path().join("drag_table.csv")).unwrap();
    assert_eq!(table.lines().count(), 2 + 4);
    assert!(table.lines().nth(1).unwrap().starts_with("U_m_s,base_mean_N"));
}

#[test]
fn exp1_persists_traces_when_asked() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small_config(dir.path(), 3);
    config.persist_traces = true;
    config.exp1.wind_speeds_m_s = vec![7.33];
    let config = config.resolve().unwrap();
    run_exp1(&config).unwrap();
    let traces = dir.path().join("traces");
    assert!(traces.join("base_u0_t0.csv").exists());
    assert!(traces.join("base_u0_t0.json").exists());
    assert!(traces.join("neutral_u0_t1.csv").exists());
    let trace = morphlab::ForceTrace::read_files(&traces.join("neutral_u0_t0.csv")).unwrap();
    assert_eq!(trace.len(), 3000);
    assert!(trace.calibration_reference_n.is_some());
}

#[test]
fn zero_noise_exp1_reads_configured_baselines_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small_config(dir.path(), 9);
    config.rig.synthetic = config.rig.synthetic.noiseless();
    let config = config.resolve().unwrap();
    let report = run_exp1(&config).unwrap();
    let base_table = [1.227, 1.901, 2.703, 3.551];
    for (cell, expected) in report.base.iter().zip(base_table) {
        assert!((cell.mean_drag_n - expected).abs() < 1e-9, "{} vs {expected}", cell.mean_drag_n);
        assert!(cell.sample_std_n.abs() < 1e-9);
    }
    // The neutral column sits at baseline x (1 - bowl tail at zero angles).
    let model = SyntheticDragModel::morphing_vehicle();
    let neutral_table = [1.259, 1.888, 2.621, 3.485];
    for (cell, table) in report.neutral.iter().zip(neutral_table) {
        let expected = table * (1.0 - model.reduction_fraction(&[0.0; 3]));
        assert!((cell.mean_drag_n - expected).abs() < 1e-9);
    }
}

#[test]
fn noisy_exp1_lands_within_the_published_scatter() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small_config(dir.path(), 17);
    config.exp1.trials_per_cell = 5;
    config.exp1.trial_duration_s = 30.0;
    config.exp1.wind_speeds_m_s = vec![7.33];
    let config = config.resolve().unwrap();
    let report = run_exp1(&config).unwrap();
    // Pooled 150 s mean of AR(1) noise with raw std 0.334: sigma ~ 7e-3 N.
    assert!((report.base[0].mean_drag_n - 1.901).abs() < 0.022, "{}", report.base[0].mean_drag_n);
    assert!((report.base[0].sample_std_n - 0.334).abs() < 0.05);
}

#[test]
fn default_noisy_campaign_matches_published_scale() {
    // Tens of generations and a few hundred measured shapes, well under a
    // minute of wall clock without real-time pacing.
    let dir = tempfile::tempdir().unwrap();
    let mut config = small_config(dir.path(), 2);
    config.ga = GaConfig::default();
    let config = config.resolve().unwrap();
    let start = std::time::Instant::now();
    let report = run_exp2(&config).unwrap();
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "campaign took {elapsed:?}");
    assert!(
        report.summary.generations >= 6 && report.summary.generations <= 50,
        "{} generations",
        report.summary.generations
    );
    assert!(
        report.summary.evaluator_calls >= 100 && report.summary.evaluator_calls <= 900,
        "{} evaluations",
        report.summary.evaluator_calls
    );
}

#[test]
fn exp1_refuses_remote_backend() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small_config(dir.path(), 3);
    config.rig.backend = RigBackendKind::Remote;
    config.rig.remote_address = Some("127.0.0.1:1".into());
    let config = config.resolve().unwrap();
    assert!(matches!(run_exp1(&config), Err(CampaignError::Config(_))));
}

#[test]
fn validation_emits_plots_and_rejections() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path(), 7).resolve().unwrap();
    let report = run_dynamic_validation(&config).unwrap();
    assert_eq!(report.trials.len(), 2);
    assert_eq!(report.morph_onset_s, 10.0);
    assert_eq!(report.morph_end_s, 12.0);
    for trial in &report.trials {
        // The planted optimum sits at this elite: the underlying drop is
        // ~0.15 N, far beyond the windowed-mean noise, so every trial
        // rejects decisively.
        assert!(trial.drop_n > 0.02, "drop {}", trial.drop_n);
        assert!(trial.ttest.reject_null, "p = {}", trial.ttest.p_value);
    }
    assert!(dir.path().join("plots/elite0_trial0.csv").exists());
    assert!(dir.path().join("plots/elite0_trial0_bins.csv").exists());
    let bins = std::fs::read_to_string(dir.path().join("plots/elite0_trial1_bins.csv")).unwrap();
    assert_eq!(bins.lines().count(), 2 + 27);

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("validation.json")).unwrap())
            .unwrap();
    assert_eq!(json["morph_onset_s"], 10.0);
    assert_eq!(json["morph_end_s"], 12.0);
}

#[test]
fn validation_rejects_inadmissible_elites() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small_config(dir.path(), 7);
    config.validate.elites = vec![[64, 64, 64]]; // violates the roof-rise limit
    let config = config.resolve().unwrap();
    assert!(matches!(run_dynamic_validation(&config), Err(CampaignError::Config(_))));
}

#[test]
fn enumeration_ranks_ascending_with_oracle_on_top() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path(), 0).resolve().unwrap();
    let report = run_enumerate(&config).unwrap();
    assert_eq!(report.best_indices, [10, 52, 60]);
    assert_eq!(report.total_shapes, 207_062);
    let ranking = std::fs::read_to_string(dir.path().join("ranking.csv")).unwrap();
    let mut lines = ranking.lines().skip(2);
    let first = lines.next().unwrap();
    assert!(first.starts_with("0,10,52,60,"), "{first}");
    let drags: Vec<f64> = ranking
        .lines()
        .skip(2)
        .take(2000)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(drags.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn enumeration_requires_synthetic_backend() {
    let dir = tempfile::tempdir().unwrap();
    let archive = tempfile::tempdir().unwrap();
    // Provide a syntactically valid replay archive so resolve() passes.
    let live = SyntheticRig::new(
        SyntheticDragModel::morphing_vehicle().noiseless(),
        RigConditions::default(),
    )
    .unwrap();
    let mut recorder = RecordingRig::new(live, archive.path()).unwrap();
    recorder.acquire(1.0).unwrap();

    let mut config = small_config(dir.path(), 0);
    config.rig.backend = RigBackendKind::Replay;
    config.rig.replay_archive_dir = Some(archive.path().to_path_buf());
    let config = config.resolve().unwrap();
    assert!(matches!(run_enumerate(&config), Err(CampaignError::Config(_))));
}

#[test]
fn lock_excludes_concurrent_campaigns() {
    let dir = tempfile::tempdir().unwrap();
    let _held = CampaignLock::acquire(dir.path()).unwrap();
    let config = small_config(dir.path(), 1).resolve().unwrap();
    match run_exp2(&config) {
        Err(CampaignError::Locked(path)) => assert!(path.ends_with(".morphlab.lock")),
        other => panic!("expected lock error, got {other:?}"),
    }
}

#[test]
fn recorded_exp2_replays_to_identical_best() {
    // Record a small campaign's acquisitions, then rerun it from the archive.
    let archive = tempfile::tempdir().unwrap();
    let ga = GaConfig { max_generations: 3, ..GaConfig::default() };
    let domain = morphlab::Domain::new(morphlab::PanelChainSpec::default()).unwrap();

    let live = SyntheticRig::new(
        SyntheticDragModel::morphing_vehicle().with_seed(99),
        RigConditions::default(),
    )
    .unwrap();
    let recorder = RecordingRig::new(live, archive.path()).unwrap();
    let mut evaluator = MeanDragEvaluator::delta_vs_neutral(recorder);
    let recorded = morphlab::evolve::run_campaign(
        &ga,
        &domain,
        &mut evaluator,
        &mut morphlab::evolve::NoSink,
    )
    .unwrap();

    let replayer = morphlab::rig::replay::ReplayRig::open(archive.path()).unwrap();
    let mut evaluator = MeanDragEvaluator::delta_vs_neutral(replayer);
    let replayed = morphlab::evolve::run_campaign(
        &ga,
        &domain,
        &mut evaluator,
        &mut morphlab::evolve::NoSink,
    )
    .unwrap();

    assert_eq!(recorded.best.chromosome, replayed.best.chromosome);
    assert_eq!(recorded.records.len(), replayed.records.len());
    let delta = (recorded.best.fitness_n.unwrap() - replayed.best.fitness_n.unwrap()).abs();
    assert!(delta < 1e-6, "replayed fitness drifted by {delta}");
}

#[test]
fn neutral_shape_is_off_grid_but_measurable() {
    // The neutral configuration (all angles zero) is not a grid point, yet
    // rigs must accept it for calibration.
    assert_eq!(MorphShape::neutral().indices, None);
    assert!(MorphShape::grid_indices_of([0.0, 0.0, 0.0]).is_none());
}
