//! `morphlab` — campaign harness for morphing-vehicle drag optimization.
//!
//! Campaign commands (`optimize`, `baseline`, `validate`, `enumerate`) read
//! a TOML config (defaults apply when omitted), honor `--seed/--out/--rig/
//! --realtime` overrides, and write reproducible artifacts into the output
//! directory. Utility commands (`analyze`, `filter`, `scale`, `economics`,
//! `replay`) operate on files directly. Errors land on stderr as one JSON
//! object and a nonzero exit code.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use morphlab::campaign::{
    material_table, read_materials_csv, replay_trace_report, run_dynamic_validation,
    run_enumerate, run_exp1, run_exp2, write_material_table_csv, AnalysisSettings, CampaignConfig,
    CampaignError, CampaignMode, RigBackendKind,
};
use morphlab::dsp::{lowpass, FilterSpec};
use morphlab::fullscale::{fuel_and_emissions, EconomicsSpec, FullScalePanelSpec, MaterialSpec};
use morphlab::geometry::write_grid_csv;
use morphlab::stats::t_test_traces;
use morphlab::trace::{sidecar_path, ForceTrace, RigConditions, TraceMode};

#[derive(Parser)]
#[command(name = "morphlab", version, about = "Morphing-vehicle drag-optimization toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum RigChoice {
    Synthetic,
    Replay,
    Remote,
}

#[derive(Args)]
struct CampaignArgs {
    /// Campaign config (TOML). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Root RNG seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory override.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Measurement backend override.
    #[arg(long, value_enum)]
    rig: Option<RigChoice>,
    /// Pace synthetic acquisitions at wall-clock speed.
    #[arg(long)]
    realtime: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Drag-minimization campaign: delta-mode GA with per-generation
    /// neutral recalibration.
    Optimize(CampaignArgs),
    /// Baseline drag of the bare vehicle vs the neutral morphing vehicle
    /// across the wind-speed sweep.
    Baseline(CampaignArgs),
    /// Dynamic-morph trials of elite shapes with plot data and t-tests.
    Validate {
        #[command(flatten)]
        campaign: CampaignArgs,
        /// Elite shape as comma-separated grid indices (repeatable);
        /// overrides the config list.
        #[arg(long = "shape", value_parser = parse_indices)]
        shapes: Vec<[u8; 3]>,
    },
    /// Rank every admissible shape on the noiseless synthetic objective.
    Enumerate {
        #[command(flatten)]
        campaign: CampaignArgs,
        /// Also export the full design grid with admissibility flags.
        #[arg(long)]
        grid: bool,
    },
    /// One-sided two-sample t-test (mean A > mean B) of two trace files.
    Analyze {
        trace_a: PathBuf,
        trace_b: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
    },
    /// Zero-phase low-pass filter a trace file for plotting.
    Filter {
        trace: PathBuf,
        /// Output CSV path (default: `<stem>_filtered.csv`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 5.0)]
        cutoff_hz: f64,
        #[arg(long, default_value_t = 4)]
        order: usize,
    },
    /// Full-size panel sizing table (thickness, torque, recovery distance).
    Scale {
        /// Materials CSV `name,E_GPa,sigma_u_MPa,rho_kg_m3`; built-in
        /// candidates when omitted.
        #[arg(long)]
        materials: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
        /// Full-scale drag coefficient for the recovery-distance estimate.
        #[arg(long, default_value_t = 1.1)]
        cd: f64,
        /// Full-scale frontal area in m² (default: 64x the model area).
        #[arg(long, default_value_t = 64.0 * 5.321e-2)]
        frontal_area_m2: f64,
    },
    /// Fuel-cost and CO₂ savings of the configured drag reduction.
    Economics {
        #[arg(long)]
        drag_reduction: Option<f64>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
    /// Re-emit raw/filtered/binned plot data from a recorded trace.
    Replay {
        trace: PathBuf,
        #[arg(long, default_value = "replay-out")]
        out: PathBuf,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

fn parse_indices(text: &str) -> Result<[u8; 3], String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected `i1,i2,i3`, got `{text}`"));
    }
    let mut indices = [0u8; 3];
    for (slot, part) in indices.iter_mut().zip(parts) {
        *slot = part.trim().parse().map_err(|e| format!("bad index `{part}`: {e}"))?;
    }
    Ok(indices)
}

fn load_campaign_config(args: &CampaignArgs, mode: CampaignMode) -> Result<CampaignConfig, CampaignError> {
    let mut config = match &args.config {
        Some(path) => CampaignConfig::load(path)?,
        None => CampaignConfig::default(),
    };
    config.expect_mode(mode)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = &args.out {
        config.output_dir = out.clone();
    }
    if let Some(rig) = args.rig {
        config.rig.backend = match rig {
            RigChoice::Synthetic => RigBackendKind::Synthetic,
            RigChoice::Replay => RigBackendKind::Replay,
            RigChoice::Remote => RigBackendKind::Remote,
        };
    }
    if args.realtime {
        config.rig.realtime = true;
    }
    config.resolve()
}

/// Reads a trace; bare CSVs without a sidecar get raw-trace defaults.
fn read_trace_lenient(path: &PathBuf) -> Result<ForceTrace, CampaignError> {
    if sidecar_path(path).exists() {
        return Ok(ForceTrace::read_files(path)?);
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| CampaignError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut samples = Vec::new();
    let mut times: Vec<f64> = Vec::new();
    for line in text.lines().skip(1).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let mut fields = line.split(',');
        let (t, force) = (fields.next(), fields.next());
        let parse = |s: Option<&str>| s.and_then(|v| v.trim().parse::<f64>().ok());
        match (parse(t), parse(force)) {
            (Some(t), Some(f)) => {
                times.push(t);
                samples.push(f);
            }
            _ => {
                return Err(CampaignError::Config(format!(
                    "{}: expected `t_s,force_N` rows",
                    path.display()
                )))
            }
        }
    }
    if samples.len() < 2 {
        return Err(CampaignError::Config(format!("{}: too few samples", path.display())));
    }
    let rate = (times.len() as f64 - 1.0) / (times[times.len() - 1] - times[0]);
    Ok(ForceTrace::new(samples, rate, TraceMode::Absolute, RigConditions::default()))
}

fn run(cli: Cli) -> Result<(), CampaignError> {
    match cli.command {
        Command::Optimize(args) => {
            let config = load_campaign_config(&args, CampaignMode::Exp2Optimize)?;
            let report = run_exp2(&config)?;
            println!(
                "optimize: best shape {:?} (theta {:?} deg), fitness {:.4} N, {} generations, \
                 {} evaluations, outputs in {}",
                report.summary.best.indices,
                report.summary.best.theta_deg,
                report.summary.best.fitness_n,
                report.summary.generations,
                report.summary.evaluator_calls,
                config.output_dir.display()
            );
        }
        Command::Baseline(args) => {
            let config = load_campaign_config(&args, CampaignMode::Exp1Baseline)?;
            let report = run_exp1(&config)?;
            for (i, test) in report.ttests.iter().enumerate() {
                println!(
                    "baseline: U={:.2} m/s base {:.3} N vs neutral {:.3} N, p={:.3e}, {}",
                    test.wind_speed_m_s,
                    report.base[i].mean_drag_n,
                    report.neutral[i].mean_drag_n,
                    test.ttest.p_value,
                    if test.ttest.reject_null { "drag decrease significant" } else { "null upheld" }
                );
            }
            println!("baseline: outputs in {}", config.output_dir.display());
        }
        Command::Validate { campaign: args, shapes } => {
            let mut config = load_campaign_config(&args, CampaignMode::DynamicValidate)?;
            if !shapes.is_empty() {
                config.validate.elites = shapes;
            }
            let report = run_dynamic_validation(&config)?;
            let rejections = report.trials.iter().filter(|t| t.ttest.reject_null).count();
            println!(
                "validate: {}/{} trials rejected the null at alpha={}, outputs in {}",
                rejections,
                report.trials.len(),
                report.alpha,
                config.output_dir.display()
            );
        }
        Command::Enumerate { campaign: args, grid } => {
            let config = load_campaign_config(&args, CampaignMode::Enumerate)?;
            let report = run_enumerate(&config)?;
            if grid {
                let file = std::fs::File::create(config.output_dir.join("grid.csv"))?;
                write_grid_csv(&config.geometry, std::io::BufWriter::new(file))
                    .map_err(|e| CampaignError::Config(format!("grid export: {e}")))?;
            }
            println!(
                "enumerate: {} admissible shapes, optimum {:?} at {:.4} N, outputs in {}",
                report.total_shapes,
                report.best_indices,
                report.best_drag_n,
                config.output_dir.display()
            );
        }
        Command::Analyze { trace_a, trace_b, alpha } => {
            let a = read_trace_lenient(&trace_a)?;
            let b = read_trace_lenient(&trace_b)?;
            let result = t_test_traces(&a, &b, alpha)?;
            println!("{}", serde_json::to_string_pretty(&result).expect("serializable"));
        }
        Command::Filter { trace, out, cutoff_hz, order } => {
            let input = read_trace_lenient(&trace)?;
            let filtered = lowpass(&input, &FilterSpec { order, cutoff_hz })?;
            let out_path = out.unwrap_or_else(|| {
                let stem = trace.file_stem().and_then(|s| s.to_str()).unwrap_or("trace");
                trace.with_file_name(format!("{stem}_filtered.csv"))
            });
            filtered.write_files(&out_path)?;
            println!("filter: wrote {}", out_path.display());
        }
        Command::Scale { materials, format, cd, frontal_area_m2 } => {
            let specs = match materials {
                Some(path) => {
                    let file = std::fs::File::open(&path).map_err(|e| {
                        CampaignError::Config(format!("cannot open {}: {e}", path.display()))
                    })?;
                    read_materials_csv(file)?
                }
                None => MaterialSpec::candidates(),
            };
            let rows = material_table(
                &specs,
                &FullScalePanelSpec::default(),
                &EconomicsSpec::default(),
                cd,
                frontal_area_m2,
                1.225,
            )?;
            match format {
                OutputFormat::Csv => {
                    write_material_table_csv(&rows, std::io::stdout().lock())?;
                }
                OutputFormat::Json => {
                    println!("{}", serde_json::to_string_pretty(&rows).expect("serializable"));
                }
            }
        }
        Command::Economics { drag_reduction, format } => {
            let mut spec = EconomicsSpec::default();
            if let Some(reduction) = drag_reduction {
                spec.drag_reduction_fraction = reduction;
            }
            spec.validate().map_err(|e| CampaignError::Config(e.to_string()))?;
            let out = fuel_and_emissions(&spec);
            match format {
                OutputFormat::Json => {
                    println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
                }
                OutputFormat::Csv => {
                    println!("saving_per_km_usd,annual_saving_usd,co2_per_km_kg,annual_co2_kg");
                    println!(
                        "{:.6},{:.2},{:.6},{:.1}",
                        out.saving_per_km_usd,
                        out.annual_saving_usd,
                        out.co2_per_km_kg,
                        out.annual_co2_kg
                    );
                }
            }
        }
        Command::Replay { trace, out } => {
            replay_trace_report(&trace, &AnalysisSettings::default(), &out)?;
            println!("replay: plot data written to {}", out.display());
        }
    }
    Ok(())
}

fn error_kind(error: &CampaignError) -> &'static str {
    match error {
        CampaignError::Config(_) => "config",
        CampaignError::Locked(_) => "locked",
        CampaignError::Io(_) => "io",
        CampaignError::Geometry(_) => "geometry",
        CampaignError::Rig(_) => "rig",
        CampaignError::Evolve(_) => "evolve",
        CampaignError::Dsp(_) => "dsp",
        CampaignError::Stats(_) => "stats",
        CampaignError::Trace(_) => "trace",
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(error) = run(cli) {
        let payload = serde_json::json!({
            "error": error.to_string(),
            "kind": error_kind(&error),
        });
        eprintln!("{payload}");
        std::process::exit(1);
    }
}
