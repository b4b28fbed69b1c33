//! `stacklab` — batch front end for the Stackelberg learning simulator.
//!
//! Runs either a config file or a built-in preset, writes per-round traces
//! and cross-seed summaries as CSV plus a machine-readable JSON report, and
//! exits 0 only when every run completed and every declared expectation
//! held (1: an expectation failed; 2: usage, config, or I/O errors).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;
use stacklab::game::{ActionPair, GameInstance};
use stacklab::sim::{batch_run, LeaderAlgo, NoiseMode, SimConfig, SummaryRow};
use stacklab::{BatchResult, RunMetrics};
use stacklab_cli::error::CliError;
use stacklab_cli::preset::{Expectation, ExpectationResult};
use stacklab_cli::{config, csvio, preset};

#[derive(Debug, Parser)]
#[command(
    name = "stacklab",
    version,
    about = "Simulator for repeated Stackelberg games between decentralized bandit learners",
    after_help = "Exactly one of --config or --preset selects what to run. Outputs per batch:\n\
                  <out>/<name>/game.json, report.json, and per-run <label>-trace.csv /\n\
                  <label>-summary.csv. The STACKLAB_OUT environment variable overrides --out."
)]
struct Cli {
    /// JSON config file describing a single batch
    #[arg(
        long,
        value_name = "PATH",
        conflicts_with = "preset",
        required_unless_present = "preset"
    )]
    config: Option<PathBuf>,

    /// Built-in experiment to run (see --help for the list)
    #[arg(long, value_name = "NAME", help = preset_help())]
    preset: Option<String>,

    /// Output directory root
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Replace the seed list (comma-separated)
    #[arg(long, value_name = "S1,S2,...", value_delimiter = ',')]
    seeds: Option<Vec<u64>>,

    /// Replace the horizon (any explicit checkpoint grid resets to the
    /// default log-spaced one, since its rounds need not exist anymore)
    #[arg(long, value_name = "N")]
    horizon: Option<u64>,

    /// Use exact expected rewards instead of Bernoulli draws
    #[arg(long)]
    noiseless: bool,

    /// Worker threads for independent seeds
    #[arg(long, value_name = "N", default_value_t = 4)]
    threads: usize,

    /// Drop pinned exponential-weights rates so runs use the
    /// horizon-derived schedule (exploration = learning rate = T^(-1/3))
    #[arg(long)]
    theorem_schedules: bool,
}

fn preset_help() -> String {
    format!("Built-in experiment to run: {}", preset::names().join(", "))
}

/// Everything the JSON report records about one finished batch.
#[derive(Serialize)]
struct RunReport<'a> {
    label: &'a str,
    config: &'a SimConfig,
    metrics: Vec<&'a RunMetrics>,
    summary: &'a [SummaryRow],
}

/// Top-level JSON report: the resolved instance, its analytical targets,
/// every run's metrics, and each expectation's verdict.
#[derive(Serialize)]
struct Report<'a> {
    name: &'a str,
    mode: &'static str,
    game: &'a GameInstance,
    equilibrium: ActionPair,
    equilibrium_unique: bool,
    manipulation_target: Option<ActionPair>,
    manipulation_gap: f64,
    runs: Vec<RunReport<'a>>,
    expectations: &'a [ExpectationResult],
    all_passed: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            let mut source = std::error::Error::source(&err);
            while let Some(cause) = source {
                eprintln!("  caused by: {cause}");
                source = cause.source();
            }
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let (name, mode, runs, expectations) = select_experiment(cli)?;

    let mut configs = Vec::with_capacity(runs.len());
    for (label, mut config) in runs {
        apply_overrides(&mut config, cli);
        config
            .validate()
            .map_err(|source| CliError::OverrideInvalid {
                label: label.clone(),
                source,
            })?;
        configs.push((label, config));
    }

    let out_dir = output_root(cli).join(&name);
    std::fs::create_dir_all(&out_dir).map_err(|source| CliError::Io {
        path: out_dir.clone(),
        source,
    })?;

    let mut batches: Vec<(String, BatchResult)> = Vec::with_capacity(configs.len());
    for (label, config) in &configs {
        println!(
            "{name}/{label}: {} vs {}, horizon {}, {} seed(s)",
            config.leader.algo.name(),
            config.follower.strategy.name(),
            config.horizon,
            config.seeds.len(),
        );
        let batch = batch_run(config, cli.threads)?;
        write_batch_files(&out_dir, label, config, &batch)?;
        batches.push((label.clone(), batch));
    }

    let results: Vec<ExpectationResult> =
        expectations.iter().map(|e| e.evaluate(&batches)).collect();
    let all_passed = results.iter().all(|r| r.passed);
    for result in &results {
        println!(
            "  [{}] {} = {} (want {})",
            if result.passed { "ok" } else { "FAIL" },
            result.description,
            csvio::format_value(result.measured),
            result.bound,
        );
    }

    write_report(
        &out_dir, &name, mode, &configs, &batches, &results, all_passed,
    )?;
    println!(
        "{name}: wrote {} run(s) to {}{}",
        batches.len(),
        out_dir.display(),
        if results.is_empty() {
            String::new()
        } else if all_passed {
            format!("; all {} expectation(s) held", results.len())
        } else {
            let failed = results.iter().filter(|r| !r.passed).count();
            format!("; {failed} of {} expectation(s) FAILED", results.len())
        }
    );
    Ok(all_passed)
}

type Experiment = (
    String,
    &'static str,
    Vec<(String, SimConfig)>,
    Vec<Expectation>,
);

/// Resolves --preset / --config into a named list of labeled run configs
/// plus the expectations to check afterwards.
fn select_experiment(cli: &Cli) -> Result<Experiment, CliError> {
    if let Some(name) = &cli.preset {
        let preset = preset::find(name).ok_or_else(|| CliError::UnknownPreset {
            name: name.clone(),
            available: preset::names().join(", "),
        })?;
        println!("{}: {}", preset.name, preset.description);
        let runs = preset
            .runs
            .into_iter()
            .map(|(label, config)| (label.to_string(), config))
            .collect();
        Ok((preset.name.to_string(), "preset", runs, preset.expectations))
    } else {
        let path = cli
            .config
            .as_ref()
            .expect("clap guarantees --config when --preset is absent");
        let config = config::load_config(path)?;
        let name = path
            .file_stem()
            .map(|stem| stem.to_string_lossy().into_owned())
            .unwrap_or_else(|| "config".to_string());
        Ok((
            name,
            "config",
            vec![("run".to_string(), config)],
            Vec::new(),
        ))
    }
}

/// `STACKLAB_OUT` beats `--out`, so wrappers can redirect whole suites
/// without threading a flag through.
fn output_root(cli: &Cli) -> PathBuf {
    std::env::var_os("STACKLAB_OUT")
        .map(PathBuf::from)
        .unwrap_or_else(|| cli.out.clone())
}

fn apply_overrides(config: &mut SimConfig, cli: &Cli) {
    if let Some(seeds) = &cli.seeds {
        config.seeds = seeds.clone();
    }
    if let Some(horizon) = cli.horizon {
        config.horizon = horizon;
        config.checkpoints = None;
    }
    if cli.noiseless {
        config.noise = NoiseMode::Noiseless;
    }
    if cli.theorem_schedules && config.leader.algo == LeaderAlgo::Exp3 {
        config.leader.alpha = None;
        config.leader.eta = None;
    }
}

fn write_batch_files(
    out_dir: &Path,
    label: &str,
    config: &SimConfig,
    batch: &BatchResult,
) -> Result<(), CliError> {
    csvio::write_trace_csv(
        &out_dir.join(format!("{label}-trace.csv")),
        &batch.runs,
        config.leader.algo.name(),
        config.follower.strategy.name(),
    )?;
    csvio::write_summary_csv(
        &out_dir.join(format!("{label}-summary.csv")),
        &batch.summary,
    )
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_report(
    out_dir: &Path,
    name: &str,
    mode: &'static str,
    configs: &[(String, SimConfig)],
    batches: &[(String, BatchResult)],
    expectations: &[ExpectationResult],
    all_passed: bool,
) -> Result<(), CliError> {
    let first = &batches[0].1;
    write_json(&out_dir.join("game.json"), &first.game)?;

    let runs = configs
        .iter()
        .zip(batches)
        .map(|((label, config), (_, batch))| RunReport {
            label,
            config,
            metrics: batch.runs.iter().map(|r| &r.metrics).collect(),
            summary: &batch.summary,
        })
        .collect();
    let report = Report {
        name,
        mode,
        game: &first.game,
        equilibrium: first.truth.equilibrium.pair,
        equilibrium_unique: first.truth.equilibrium.unique,
        manipulation_target: first.truth.manipulation.as_ref().map(|p| p.target()),
        manipulation_gap: first.truth.gaps.manipulation_gap,
        runs,
        expectations,
        all_passed,
    };
    write_json(&out_dir.join("report.json"), &report)
}
