//! Batch front end: single trials, the condition matrix, metrics over saved
//! logs and the canned verification checks.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use shared_steer::config::{parse_seeds, select_conditions, Config};
use shared_steer::metrics::{self, Grouping, TrialMetrics};
use shared_steer::scenario::{build_course, run_trial, Condition, PredictorSpec};
use shared_steer::telemetry::{write_atomic, DriveLog};
use shared_steer::{verify, Error};

const EXIT_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_ABORTED: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "shared-steer", version, about = "Haptic shared-steering simulator")]
struct Cli {
    /// TOML configuration; built-in defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Print the effective configuration as TOML and exit.
    #[arg(long)]
    dump_config: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one trial and write its drive log.
    Run(RunArgs),
    /// Run every selected condition for every seed.
    Matrix(MatrixArgs),
    /// Recompute trial metrics and the summary from saved drive logs.
    Metrics(MetricsArgs),
    /// Run the canned scenarios and invariant checks.
    Verify,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    condition: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct MatrixArgs {
    /// Seed list such as `1-12` or `1,3,5`; defaults to the config's seeds.
    #[arg(long)]
    seeds: Option<String>,
    /// Condition name or `strength-*` pattern; repeatable.
    #[arg(long)]
    condition: Vec<String>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct MetricsArgs {
    /// Directory holding `{condition}_{seed}.csv` logs; defaults to `--out`.
    #[arg(long)]
    logs: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let config = match load_config(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if cli.dump_config {
        return match config.to_toml() {
            Ok(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_CONFIG)
            }
        };
    }
    let Some(command) = cli.command else {
        eprintln!("error: a command is required (run, matrix, metrics, verify); see --help");
        return ExitCode::from(EXIT_CONFIG);
    };
    let result = match command {
        Command::Run(a) => cmd_run(&config, &a),
        Command::Matrix(a) => cmd_matrix(&config, &a),
        Command::Metrics(a) => cmd_metrics(&config, &a),
        Command::Verify => cmd_verify(&config),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_of(&e))
        }
    }
}

fn exit_code_of(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Config(_) | Error::Toml(_)) => EXIT_CONFIG,
        Some(Error::TrialAborted { .. }) => EXIT_ABORTED,
        _ => EXIT_FAILED,
    }
}

fn load_config(path: Option<&Path>) -> shared_steer::Result<Config> {
    match path {
        Some(p) => Config::load(p),
        None => Ok(Config::default()),
    }
}

fn predictor(config: &Config) -> anyhow::Result<PredictorSpec> {
    Ok(PredictorSpec::from_choice(&config.scenario.predictor)?)
}

/// Runs, saves and scores one trial.
fn trial(config: &Config, predictor: &PredictorSpec, condition: Condition, seed: u64, out: &Path) -> shared_steer::Result<TrialMetrics> {
    let log = run_trial(condition, &config.scenario, predictor, seed)?;
    log.save(out)?;
    let course = build_course(&config.scenario, seed)?;
    metrics::evaluate(&log, &course, &config.metrics)
}

fn cmd_run(config: &Config, a: &RunArgs) -> anyhow::Result<u8> {
    let condition: Condition = a.condition.parse()?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let m = trial(config, &predictor(config)?, condition, a.seed, &a.out)?;
    upsert_trial_row(&a.out.join("trials.csv"), &m)?;
    println!("{}", a.out.join(format!("{condition}_{}.csv", a.seed)).display());
    Ok(0)
}

/// Replaces the row for the same condition and seed, or appends it.
fn upsert_trial_row(path: &Path, m: &TrialMetrics) -> anyhow::Result<()> {
    let row = metrics::trial_row(m);
    let mut rows: Vec<Vec<String>> = Vec::new();
    if path.exists() {
        let mut r = csv::Reader::from_path(path)?;
        if r.headers()?.iter().ne(metrics::trial_header()) {
            return Err(anyhow!("{} has a different header", path.display()));
        }
        for rec in r.records() {
            let rec: Vec<String> = rec?.iter().map(str::to_string).collect();
            if rec[..2] != row[..2] {
                rows.push(rec);
            }
        }
    }
    rows.push(row);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(metrics::trial_header())?;
    for r in &rows {
        w.write_record(r)?;
    }
    write_atomic(path, &w.into_inner()?)?;
    Ok(())
}

fn write_tables(out: &Path, trials: &[TrialMetrics]) -> anyhow::Result<()> {
    let mut buf = Vec::new();
    metrics::write_trials_csv(trials, &mut buf)?;
    write_atomic(&out.join("trials.csv"), &buf)?;
    let rows = metrics::summarize(trials, &Grouping::ALL)?;
    let mut buf = Vec::new();
    metrics::write_summary_csv(&rows, &mut buf)?;
    write_atomic(&out.join("summary.csv"), &buf)?;
    let by_condition: Vec<_> = rows.into_iter().filter(|r| r.grouping == Grouping::Condition).collect();
    print!("{}", metrics::pretty_summary(&by_condition));
    Ok(())
}

fn cmd_matrix(config: &Config, a: &MatrixArgs) -> anyhow::Result<u8> {
    let seeds = match &a.seeds {
        Some(s) => parse_seeds(s)?,
        None => config.run.seeds.clone(),
    };
    if seeds.is_empty() {
        return Err(Error::Config("no seeds selected".into()).into());
    }
    let conditions = if a.condition.is_empty() { config.conditions()? } else { select_conditions(&a.condition)? };
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let predictor = predictor(config)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(a.jobs).build()?;
    let cells: Vec<(Condition, u64)> = conditions.iter().flat_map(|&c| seeds.iter().map(move |&s| (c, s))).collect();
    let results: Vec<_> = pool.install(|| {
        cells.par_iter().map(|&(c, s)| (c, s, trial(config, &predictor, c, s, &a.out))).collect()
    });

    let mut trials = Vec::new();
    let mut failed = 0;
    for (c, s, r) in results {
        match r {
            Ok(m) => trials.push(m),
            Err(e) => {
                failed += 1;
                eprintln!("{c}_{s}: {e}");
            }
        }
    }
    if !trials.is_empty() {
        write_tables(&a.out, &trials)?;
    }
    log::info!("{} trials, {failed} failed", cells.len());
    Ok(if failed > 0 { EXIT_FAILED } else { 0 })
}

fn cmd_metrics(config: &Config, a: &MetricsArgs) -> anyhow::Result<u8> {
    let dir = a.logs.as_ref().unwrap_or(&a.out);
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| is_log_name(p))
        .collect();
    paths.sort_by_key(|p| log_order(p));
    if paths.is_empty() {
        return Err(anyhow!("no drive logs in {}", dir.display()));
    }
    let trials = paths
        .par_iter()
        .map(|p| {
            let log = DriveLog::load(p)?;
            let course = build_course(&config.scenario, log.seed)?;
            metrics::evaluate(&log, &course, &config.metrics).with_context(|| p.display().to_string())
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    fs::create_dir_all(&a.out)?;
    write_tables(&a.out, &trials)?;
    Ok(0)
}

/// Condition and seed of a `{condition}_{seed}.csv` log name.
fn parse_log_name(p: &Path) -> Option<(Condition, u64)> {
    if p.extension().and_then(|e| e.to_str()) != Some("csv") {
        return None;
    }
    let (c, s) = p.file_stem()?.to_str()?.rsplit_once('_')?;
    Some((c.parse().ok()?, s.parse().ok()?))
}

fn is_log_name(p: &Path) -> bool {
    parse_log_name(p).is_some()
}

/// Table order of the condition, then seed: the order `matrix` writes.
fn log_order(p: &Path) -> (usize, u64) {
    let (c, s) = parse_log_name(p).expect("filtered to log names");
    (Condition::all().iter().position(|x| *x == c).unwrap_or(usize::MAX), s)
}

fn cmd_verify(config: &Config) -> anyhow::Result<u8> {
    let checks = verify::run_all(config);
    print!("{}", verify::render(&checks));
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} checks, {failed} failed", checks.len());
    Ok(if failed > 0 { EXIT_FAILED } else { 0 })
}
