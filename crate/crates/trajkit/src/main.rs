//! `trajkit` command-line interface.
//!
//! Subcommands cover the full workflow: `simulate` a scenario dataset,
//! `fit` one model, `scan` a range of group counts, `abt`/`dist` for
//! area-between-trajectories output, `report` for the plot-ready bundle,
//! and `pipeline` to run everything end to end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use trajkit::abt::{
    group_pair_abt, individual_to_group_abt, pairwise_distributions, DEFAULT_SEGMENTS,
};
use trajkit::gbtm::{fit_em, FitConfig, DEFAULT_FIT_SEED, RNG_ALGORITHM};
use trajkit::io::{atomic_write, load_dataset, load_model, save_dataset, save_model};
use trajkit::report::{abt_csv, dist_csv, dist_summary_csv, write_report, ReportBundle};
use trajkit::selection::{scan_models, ScanOutcome, ScanResult};
use trajkit::simulate::{default_scenario, generate_dataset, ScenarioSpec};
use trajkit::{Error, Result};

#[derive(Parser)]
#[command(
    name = "trajkit",
    version,
    about = "Group-based trajectory modeling with area-between-trajectories heterogeneity measures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for simulation and fitting; overrides any scenario-file seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for multi-file commands (report, pipeline).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Trapezoid segments per grid interval for area computations.
    #[arg(long, global = true)]
    segments: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a longitudinal dataset from a scenario spec.
    Simulate {
        /// Scenario JSON; omitted = built-in five-group default scenario.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Dataset CSV to write (long format: id,time,score).
        #[arg(long)]
        out: PathBuf,
        /// Also write the true group label per individual (id,label).
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Fit a single model with a fixed number of groups.
    Fit {
        /// Input dataset CSV (long format: id,time,score).
        #[arg(long)]
        data: PathBuf,
        /// Number of trajectory groups K.
        #[arg(long)]
        groups: usize,
        /// Polynomial degree of every group curve (0..=3).
        #[arg(long, default_value_t = 3)]
        degree: usize,
        /// Random starts for EM.
        #[arg(long, default_value_t = 10)]
        starts: usize,
        /// Model JSON to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit ascending K and tabulate BIC, SABIC, APPA, and the 5% size rule.
    Scan {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 3)]
        degree: usize,
        /// Smallest K to fit.
        #[arg(long, default_value_t = 2)]
        min_groups: usize,
        /// Largest K to consider; the scan stops early after the first
        /// size-rule exclusion.
        #[arg(long, default_value_t = 10)]
        max_groups: usize,
        #[arg(long, default_value_t = 10)]
        starts: usize,
        /// Scan table CSV to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Area between two group curves, or between an individual and a group.
    Abt {
        /// Fitted model JSON.
        #[arg(long)]
        model: PathBuf,
        /// Two 1-based group numbers, e.g. --pair 1,5.
        #[arg(long)]
        pair: Option<String>,
        /// Dataset CSV (required with --individual).
        #[arg(long)]
        data: Option<PathBuf>,
        /// Individual id to compare against a group curve.
        #[arg(long)]
        individual: Option<String>,
        /// 1-based group number (required with --individual).
        #[arg(long)]
        group: Option<usize>,
        /// Area table CSV to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Interval-level ABT distributions across all group pairs.
    Dist {
        /// Fitted model JSON.
        #[arg(long)]
        model: PathBuf,
        /// Emit per-pair mean/sd/min/max instead of the long-form table.
        #[arg(long)]
        summary: bool,
        /// Distribution CSV to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Scan a dataset and emit the plot-ready report bundle.
    Report {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 3)]
        degree: usize,
        #[arg(long, default_value_t = 2)]
        min_groups: usize,
        #[arg(long, default_value_t = 10)]
        max_groups: usize,
        #[arg(long, default_value_t = 10)]
        starts: usize,
    },
    /// Simulate (or load) a dataset, scan it, and emit the report bundle.
    Pipeline {
        /// Scenario JSON to simulate from (default scenario if neither
        /// --spec nor --data is given).
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Existing dataset CSV to use instead of simulating.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        degree: usize,
        #[arg(long, default_value_t = 2)]
        min_groups: usize,
        #[arg(long, default_value_t = 10)]
        max_groups: usize,
        #[arg(long, default_value_t = 10)]
        starts: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let segments = cli.segments.unwrap_or(DEFAULT_SEGMENTS);
    let fit_seed = cli.seed.unwrap_or(DEFAULT_FIT_SEED);
    match cli.command {
        Command::Simulate { spec, out, labels } => cmd_simulate(spec.as_deref(), cli.seed, &out, labels.as_deref()),
        Command::Fit {
            data,
            groups,
            degree,
            starts,
            out,
        } => cmd_fit(&data, groups, degree, fit_config(starts, fit_seed), &out),
        Command::Scan {
            data,
            degree,
            min_groups,
            max_groups,
            starts,
            out,
        } => cmd_scan(
            &data,
            degree,
            min_groups,
            max_groups,
            fit_config(starts, fit_seed),
            &out,
        ),
        Command::Abt {
            model,
            pair,
            data,
            individual,
            group,
            out,
        } => cmd_abt(&model, pair.as_deref(), data.as_deref(), individual.as_deref(), group, segments, &out),
        Command::Dist {
            model,
            summary,
            out,
        } => cmd_dist(&model, summary, segments, &out),
        Command::Report {
            data,
            degree,
            min_groups,
            max_groups,
            starts,
        } => cmd_pipeline(
            PipelineInput::Data(data),
            degree,
            min_groups,
            max_groups,
            fit_config(starts, fit_seed),
            cli.seed,
            segments,
            &require_out_dir(cli.out_dir)?,
            "report",
        ),
        Command::Pipeline {
            spec,
            data,
            degree,
            min_groups,
            max_groups,
            starts,
        } => {
            let input = match (spec, data) {
                (Some(_), Some(_)) => {
                    return Err(Error::InvalidConfig(
                        "--spec and --data are mutually exclusive".into(),
                    ))
                }
                (None, Some(data)) => PipelineInput::Data(data),
                (spec, None) => PipelineInput::Scenario(spec),
            };
            cmd_pipeline(
                input,
                degree,
                min_groups,
                max_groups,
                fit_config(starts, fit_seed),
                cli.seed,
                segments,
                &require_out_dir(cli.out_dir)?,
                "pipeline",
            )
        }
    }
}

fn fit_config(starts: usize, seed: u64) -> FitConfig {
    FitConfig {
        n_starts: starts,
        seed,
        ..FitConfig::default()
    }
}

fn require_out_dir(dir: Option<PathBuf>) -> Result<PathBuf> {
    dir.ok_or_else(|| Error::InvalidConfig("--out-dir is required for this command".into()))
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Read and validate a scenario spec, or fall back to the default scenario;
/// `seed` overrides the scenario's own seed.
fn load_scenario(path: Option<&Path>, seed: Option<u64>) -> Result<ScenarioSpec> {
    let mut spec = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| io_err(p, e))?;
            serde_json::from_str::<ScenarioSpec>(&text).map_err(|e| Error::Parse {
                path: p.to_path_buf(),
                message: e.to_string(),
            })?
        }
        None => default_scenario(),
    };
    if let Some(s) = seed {
        spec.seed = s;
    }
    spec.validate()?;
    Ok(spec)
}

fn labels_csv(labels: &[(String, String)]) -> Vec<u8> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["id", "label"]).expect("vec write");
    for (id, label) in labels {
        writer.write_record([id, label]).expect("vec write");
    }
    writer.into_inner().expect("vec writer never errors")
}

fn cmd_simulate(
    spec: Option<&Path>,
    seed: Option<u64>,
    out: &Path,
    labels_out: Option<&Path>,
) -> Result<()> {
    let spec = load_scenario(spec, seed)?;
    let (data, labels) = generate_dataset(&spec)?;
    save_dataset(&data, out)?;
    println!(
        "wrote {} ({} individuals x {} times, seed {})",
        out.display(),
        data.n_individuals(),
        data.grid().len(),
        spec.seed
    );
    if let Some(path) = labels_out {
        atomic_write(path, &labels_csv(&labels))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_fit(data: &Path, groups: usize, degree: usize, config: FitConfig, out: &Path) -> Result<()> {
    let data = load_dataset(data, None)?;
    let (model, _) = fit_em(&data, groups, degree, &config)?;
    save_model(&model, out)?;
    println!(
        "fitted K={} (degree {}): log-likelihood {}, converged {}, {} iterations; wrote {}",
        model.k,
        model.degree,
        model.log_likelihood,
        model.converged,
        model.iterations,
        out.display()
    );
    Ok(())
}

fn describe_scan(scan: &ScanResult) {
    match scan.recommended_by_bic {
        Some(k) => println!(
            "candidate set {:?}; lowest BIC at K={}",
            scan.candidate_set, k
        ),
        None => println!("candidate set is empty: every K was excluded or failed"),
    }
}

fn cmd_scan(
    data: &Path,
    degree: usize,
    min_groups: usize,
    max_groups: usize,
    config: FitConfig,
    out: &Path,
) -> Result<()> {
    let data = load_dataset(data, None)?;
    let scan = scan_models(&data, degree, &config, min_groups, max_groups)?;
    atomic_write(out, &trajkit::report::scan_csv(&scan))?;
    describe_scan(&scan);
    println!("wrote {}", out.display());
    Ok(())
}

/// Parse `--pair A,B` (1-based group numbers) into 0-based indices.
fn parse_pair(pair: &str, k: usize) -> Result<(usize, usize)> {
    let invalid =
        || Error::InvalidConfig(format!("--pair must be two 1-based group numbers, got {pair:?}"));
    let (a, b) = pair.split_once(',').ok_or_else(invalid)?;
    let a: usize = a.trim().parse().map_err(|_| invalid())?;
    let b: usize = b.trim().parse().map_err(|_| invalid())?;
    for g in [a, b] {
        if g == 0 || g > k {
            return Err(Error::GroupIndexOutOfRange { index: g, k });
        }
    }
    Ok((a - 1, b - 1))
}

fn cmd_abt(
    model: &Path,
    pair: Option<&str>,
    data: Option<&Path>,
    individual: Option<&str>,
    group: Option<usize>,
    segments: usize,
    out: &Path,
) -> Result<()> {
    let model = load_model(model)?;
    let result = match (pair, individual) {
        (Some(pair), None) => {
            let (a, b) = parse_pair(pair, model.k)?;
            group_pair_abt(&model, a, b, segments)?
        }
        (None, Some(id)) => {
            let data_path = data.ok_or_else(|| {
                Error::InvalidConfig("--individual requires --data".into())
            })?;
            let g = group.ok_or_else(|| {
                Error::InvalidConfig("--individual requires --group".into())
            })?;
            if g == 0 || g > model.k {
                return Err(Error::GroupIndexOutOfRange {
                    index: g,
                    k: model.k,
                });
            }
            let data = load_dataset(data_path, None)?;
            individual_to_group_abt(&data, id, &model, g - 1, segments)?
        }
        _ => {
            return Err(Error::InvalidConfig(
                "provide either --pair A,B or --data/--individual/--group".into(),
            ))
        }
    };
    atomic_write(out, &abt_csv(&result, &model.grid))?;
    println!("total area {}; wrote {}", result.total, out.display());
    Ok(())
}

fn cmd_dist(model: &Path, summary: bool, segments: usize, out: &Path) -> Result<()> {
    let model = load_model(model)?;
    let dist = pairwise_distributions(&model, segments)?;
    let bytes = if summary {
        dist_summary_csv(&dist)
    } else {
        dist_csv(&dist)
    };
    atomic_write(out, &bytes)?;
    println!("{} group pairs; wrote {}", dist.pairs.len(), out.display());
    Ok(())
}

enum PipelineInput {
    /// Simulate from a scenario file (`None` = default scenario).
    Scenario(Option<PathBuf>),
    /// Use an existing dataset.
    Data(PathBuf),
}

#[derive(Serialize)]
struct RunMetadata {
    command: String,
    tool: String,
    version: String,
    /// Wall-clock creation time; the only field exempt from byte-identical
    /// reruns.
    created_utc: String,
    rng_algorithm: String,
    scenario_spec: Option<String>,
    input_data: Option<String>,
    scenario_seed: Option<u64>,
    fit_seed: u64,
    n_starts: usize,
    degree: usize,
    min_groups: usize,
    max_groups: usize,
    segments: usize,
    /// Curves are fitted on raw time/score units; no internal rescaling.
    fit_scale: String,
    candidate_set: Vec<usize>,
    recommended_by_bic: Option<usize>,
    warnings: Vec<String>,
    files: Vec<String>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_pipeline(
    input: PipelineInput,
    degree: usize,
    min_groups: usize,
    max_groups: usize,
    config: FitConfig,
    seed_override: Option<u64>,
    segments: usize,
    out_dir: &Path,
    command_name: &str,
) -> Result<()> {
    // Resolve and validate all inputs before the first write, so a bad
    // spec or dataset leaves no partial output behind.
    let (data, labels, scenario) = match &input {
        PipelineInput::Scenario(spec_path) => {
            let spec = load_scenario(spec_path.as_deref(), seed_override)?;
            let (data, labels) = generate_dataset(&spec)?;
            (data, Some(labels), Some(spec))
        }
        PipelineInput::Data(path) => (load_dataset(path, None)?, None, None),
    };

    fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
    let mut files: Vec<PathBuf> = Vec::new();

    if let Some(labels) = &labels {
        let data_path = out_dir.join("data.csv");
        save_dataset(&data, &data_path)?;
        files.push(data_path);
        let labels_path = out_dir.join("labels.csv");
        atomic_write(&labels_path, &labels_csv(labels))?;
        files.push(labels_path);
    }

    let scan = scan_models(&data, degree, &config, min_groups, max_groups)?;

    let scan_path = out_dir.join("scan.csv");
    atomic_write(&scan_path, &trajkit::report::scan_csv(&scan))?;
    files.push(scan_path);

    for row in &scan.rows {
        if let ScanOutcome::Fitted { model, .. } = &row.outcome {
            let path = out_dir.join(format!("model_K{}.json", row.k));
            save_model(model, &path)?;
            files.push(path);
        }
    }

    let ReportBundle {
        files: report_files,
        warnings,
    } = write_report(out_dir, &scan, segments)?;
    files.extend(report_files);

    if let Some((model, _)) = scan.recommended_by_bic.and_then(|k| scan.model_for(k)) {
        if model.k >= 2 {
            let dist = pairwise_distributions(model, segments)?;
            let hist_path = out_dir.join("dist.csv");
            atomic_write(&hist_path, &dist_csv(&dist))?;
            files.push(hist_path);
        }
    }

    for warning in &warnings {
        eprintln!("warning: {warning}");
    }

    let metadata = RunMetadata {
        command: command_name.to_string(),
        tool: "trajkit".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        created_utc: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        rng_algorithm: RNG_ALGORITHM.to_string(),
        scenario_spec: match &input {
            PipelineInput::Scenario(Some(p)) => Some(p.display().to_string()),
            PipelineInput::Scenario(None) => Some("<default scenario>".to_string()),
            PipelineInput::Data(_) => None,
        },
        input_data: match &input {
            PipelineInput::Data(p) => Some(p.display().to_string()),
            _ => None,
        },
        scenario_seed: scenario.as_ref().map(|s| s.seed),
        fit_seed: config.seed,
        n_starts: config.n_starts,
        degree,
        min_groups,
        max_groups,
        segments,
        fit_scale: "raw".to_string(),
        candidate_set: scan.candidate_set.clone(),
        recommended_by_bic: scan.recommended_by_bic,
        warnings: warnings.clone(),
        files: files.iter().map(|p| p.display().to_string()).collect(),
    };
    let metadata_path = out_dir.join("run_metadata.json");
    let bytes =
        serde_json::to_vec_pretty(&metadata).expect("metadata serialization cannot fail");
    atomic_write(&metadata_path, &bytes)?;
    files.push(metadata_path);

    describe_scan(&scan);
    for file in &files {
        println!("wrote {}", file.display());
    }
    Ok(())
}
