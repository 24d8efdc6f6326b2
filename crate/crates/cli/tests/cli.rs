//! Black-box tests of the `morphlab` binary: exit codes, output formats,
//! JSON errors on stderr, and run-to-run reproducibility.

use std::path::Path;
use std::process::{Command, Output};

use morphlab::rig::synthetic::{SyntheticDragModel, SyntheticRig};
use morphlab::rig::DragRig;
use morphlab::{MorphShape, RigConditions};

fn morphlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_morphlab")).args(args).output().expect("binary runs")
}

fn stdout_of(output: &Output) -> String {
    assert!(
        output.status.success(),
        "exit {:?}, stderr: {}",
        output.status.code(),
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn write_small_config(path: &Path, out_dir: &Path, seed: u64) {
    let text = format!(
        r#"
version = 1
seed = {seed}
output_dir = "{}"
persist_traces = false

[ga]
max_generations = 4

[exp1]
trials_per_cell = 1
trial_duration_s = 4.0
wind_speeds_m_s = [5.79, 7.33]

[validate]
elites = [[10, 52, 60]]
trials_per_elite = 1
"#,
        out_dir.display()
    );
    std::fs::write(path, text).unwrap();
}

#[test]
fn economics_prints_reference_figures_as_json() {
    let out = morphlab(&["economics"]);
    let json: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert!((json["saving_per_km_usd"].as_f64().unwrap() - 6.6e-3).abs() < 1e-6);
    assert!((json["annual_co2_kg"].as_f64().unwrap() - 427.0).abs() < 2.0);
}

#[test]
fn scale_emits_the_material_table() {
    let out = stdout_of(&morphlab(&["scale"]));
    assert!(out.starts_with("name,E_GPa,sigma_u_MPa,rho_kg_m3,min_thickness_2h_mm"));
    assert_eq!(out.lines().count(), 5);
    assert!(out.contains("3.510"));
    assert!(out.contains("deflection"));
}

#[test]
fn scale_accepts_a_materials_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("materials.csv");
    std::fs::write(&path, "name,E_GPa,sigma_u_MPa,rho_kg_m3\nCFRP-70,181,1500,1600\n").unwrap();
    let out = stdout_of(&morphlab(&["scale", "--materials", path.to_str().unwrap()]));
    assert_eq!(out.lines().count(), 2);
    assert!(out.contains("CFRP-70"));
}

#[test]
fn optimize_runs_and_reproduces_bytes() {
    let workspace = tempfile::tempdir().unwrap();
    let run = |tag: &str| -> Vec<u8> {
        let out_dir = workspace.path().join(tag);
        let config = workspace.path().join(format!("{tag}.toml"));
        write_small_config(&config, &out_dir, 12);
        let output = morphlab(&["optimize", "--config", config.to_str().unwrap()]);
        let text = stdout_of(&output);
        assert!(text.contains("best shape"), "{text}");
        assert!(out_dir.join("summary.json").exists());
        std::fs::read(out_dir.join("generations.csv")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn seed_override_changes_outputs() {
    let workspace = tempfile::tempdir().unwrap();
    let out_a = workspace.path().join("a");
    let out_b = workspace.path().join("b");
    let config = workspace.path().join("c.toml");
    write_small_config(&config, &out_a, 12);
    stdout_of(&morphlab(&["optimize", "--config", config.to_str().unwrap()]));
    write_small_config(&config, &out_b, 12);
    stdout_of(&morphlab(&[
        "optimize",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "13",
    ]));
    let a = std::fs::read(out_a.join("generations.csv")).unwrap();
    let b = std::fs::read(out_b.join("generations.csv")).unwrap();
    assert_ne!(a, b);
}

#[test]
fn baseline_writes_drag_table() {
    let workspace = tempfile::tempdir().unwrap();
    let out_dir = workspace.path().join("exp1");
    let config = workspace.path().join("c.toml");
    write_small_config(&config, &out_dir, 5);
    let output = morphlab(&["baseline", "--config", config.to_str().unwrap()]);
    let text = stdout_of(&output);
    assert!(text.contains("U=5.79"));
    let table = std::fs::read_to_string(out_dir.join("drag_table.csv")).unwrap();
    assert_eq!(table.lines().count(), 2 + 2);
}

#[test]
fn validate_accepts_shape_flags() {
    let workspace = tempfile::tempdir().unwrap();
    let out_dir = workspace.path().join("val");
    let config = workspace.path().join("c.toml");
    write_small_config(&config, &out_dir, 5);
    let output = morphlab(&[
        "validate",
        "--config",
        config.to_str().unwrap(),
        "--shape",
        "9,50,62",
    ]);
    let text = stdout_of(&output);
    assert!(text.contains("1/1 trials rejected"), "{text}");
    let report = std::fs::read_to_string(out_dir.join("validation.json")).unwrap();
    assert!(report.contains("\"elite_indices\": [\n        9,"));
}

#[test]
fn enumerate_reports_the_oracle_optimum() {
    let workspace = tempfile::tempdir().unwrap();
    let out_dir = workspace.path().join("enum");
    let config = workspace.path().join("c.toml");
    write_small_config(&config, &out_dir, 5);
    let output = morphlab(&["enumerate", "--config", config.to_str().unwrap()]);
    let text = stdout_of(&output);
    assert!(text.contains("optimum Some([10, 52, 60])") || text.contains("[10, 52, 60]"), "{text}");
    let ranking = std::fs::read_to_string(out_dir.join("ranking.csv")).unwrap();
    assert!(ranking.lines().nth(2).unwrap().starts_with("0,10,52,60,"));
}

#[test]
fn analyze_emits_ttest_json_and_rejects_filtered_traces() {
    let dir = tempfile::tempdir().unwrap();
    let mut rig = SyntheticRig::new(
        SyntheticDragModel::morphing_vehicle().with_seed(3),
        RigConditions::default(),
    )
    .unwrap();
    rig.set_shape(&MorphShape::neutral()).unwrap();
    let a = rig.acquire(5.0).unwrap();
    rig.set_shape(&MorphShape::from_indices([10, 52, 60]).unwrap()).unwrap();
    let b = rig.acquire(5.0).unwrap();
    let path_a = dir.path().join("a.csv");
    let path_b = dir.path().join("b.csv");
    a.write_files(&path_a).unwrap();
    b.write_files(&path_b).unwrap();

    let out = morphlab(&["analyze", path_a.to_str().unwrap(), path_b.to_str().unwrap()]);
    let json: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert!(json["reject_null"].as_bool().unwrap());
    assert_eq!(json["degrees_of_freedom"].as_u64().unwrap(), 5998);

    // A filtered input must be refused with a JSON error on stderr.
    let filtered = morphlab::dsp::lowpass(&a, &morphlab::dsp::FilterSpec::default()).unwrap();
    let path_f = dir.path().join("f.csv");
    filtered.write_files(&path_f).unwrap();
    let err = morphlab(&["analyze", path_f.to_str().unwrap(), path_b.to_str().unwrap()]);
    assert_eq!(err.status.code(), Some(1));
    let payload: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&err.stderr).trim()).unwrap();
    assert_eq!(payload["kind"], "stats");
    assert!(payload["error"].as_str().unwrap().contains("filtered"));
}

#[test]
fn filter_writes_a_filtered_trace() {
    let dir = tempfile::tempdir().unwrap();
    let mut rig = SyntheticRig::new(
        SyntheticDragModel::morphing_vehicle().with_seed(9),
        RigConditions::default(),
    )
    .unwrap();
    rig.set_shape(&MorphShape::neutral()).unwrap();
    let trace = rig.acquire(3.0).unwrap();
    let input = dir.path().join("raw.csv");
    trace.write_files(&input).unwrap();

    let out_path = dir.path().join("smooth.csv");
    stdout_of(&morphlab(&[
        "filter",
        input.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]));
    let filtered = morphlab::ForceTrace::read_files(&out_path).unwrap();
    assert!(filtered.filtered);
    assert_eq!(filtered.len(), trace.len());
    assert!(filtered.sample_std() < trace.sample_std());
}

#[test]
fn replay_emits_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let mut rig = SyntheticRig::new(
        SyntheticDragModel::morphing_vehicle().with_seed(4),
        RigConditions::default(),
    )
    .unwrap();
    rig.set_shape(&MorphShape::neutral()).unwrap();
    let trace = rig.acquire(3.0).unwrap();
    let input = dir.path().join("run.csv");
    trace.write_files(&input).unwrap();

    let out_dir = dir.path().join("plots");
    stdout_of(&morphlab(&["replay", input.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]));
    assert!(out_dir.join("run.csv").exists());
    assert!(out_dir.join("run_bins.csv").exists());
    let bins = std::fs::read_to_string(out_dir.join("run_bins.csv")).unwrap();
    assert_eq!(bins.lines().count(), 2 + 3);
}

#[test]
fn config_errors_land_on_stderr_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "version = 1\nnot_a_key = true\n").unwrap();
    let output = morphlab(&["optimize", "--config", config.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
    let payload: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&output.stderr).trim()).unwrap();
    assert_eq!(payload["kind"], "config");
    assert!(payload["error"].as_str().unwrap().contains("not_a_key"));
}

#[test]
fn mode_mismatch_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.toml");
    std::fs::write(&config, "version = 1\nmode = \"exp1-baseline\"\n").unwrap();
    let output = morphlab(&["optimize", "--config", config.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
    let payload: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&output.stderr).trim()).unwrap();
    assert_eq!(payload["kind"], "config");
}
