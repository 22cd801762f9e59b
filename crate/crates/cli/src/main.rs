//! Command-line front door for the `blockcv` crate.
//!
//! One binary, five subcommands:
//!
//! * `partition` dumps a 5x2 block-regularized partition plan as JSON.
//! * `test` compares two classifiers on a CSV dataset with any of the
//!   eight supported significance tests.
//! * `simulate` runs a Monte Carlo scenario from a JSON config and writes
//!   rejection-rate tables.
//! * `rho` estimates the fold-correlation pair over (generator,
//!   algorithm-pair) jobs.
//! * `calibrate` estimates true-error curves, or resolves a lambda
//!   calibration target into a metric weight.
//!
//! Everything is seeded: identical invocations write byte-identical
//! `--out` files. Human-readable progress and timing go to the console
//! and never into an artifact. Usage errors exit with status 2, runtime
//! failures with status 1.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use blockcv::classifiers::ClassifierSpec;
use blockcv::dataset::Dataset;
use blockcv::partition::{bcv_5x2_partitions_n, overlap_count};
use blockcv::simulation::{
    calibration_config, calibration_curve, compare_on_dataset, interpolate_omega,
    rho_points_to_csv, rho_sweep, run_scenario, true_error_curve, RhoSweepConfig, ScenarioConfig,
    TestName,
};

#[derive(Parser)]
#[command(
    name = "blockcv",
    version,
    about = "5x2 block-regularized cross-validated McNemar's test and friends"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dump a 5x2 block-regularized partition plan as JSON.
    Partition(PartitionArgs),
    /// Compare two classifiers on a CSV dataset.
    Test(TestArgs),
    /// Run a Monte Carlo scenario from a JSON config.
    Simulate(SimulateArgs),
    /// Estimate fold correlations for (generator, algorithm-pair) jobs.
    Rho(RhoArgs),
    /// Estimate true-error curves, or resolve a lambda target to an omega.
    Calibrate(CalibrateArgs),
}

#[derive(Args)]
struct PartitionArgs {
    /// Number of records to partition.
    #[arg(long)]
    n: usize,
    /// Seed of the block shuffle.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the JSON plan here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TestArgs {
    /// CSV dataset: feature columns first, integer `label` column last.
    #[arg(long)]
    data: PathBuf,
    /// First algorithm, e.g. `majority` or `fnn_weighted:omega=0.29`.
    #[arg(long)]
    algo_a: String,
    /// Second algorithm.
    #[arg(long)]
    algo_b: String,
    /// Comma-separated test names.
    #[arg(long, value_delimiter = ',', default_value = "mcnemar_bcv_5x2")]
    tests: Vec<String>,
    /// Significance level shared by every test.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Master seed of the resampling draws.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON file with `{"rho1": .., "rho2": ..}` for mcnemar_bcv_general
    /// (both default to 0.5, the 5x2 block-regularized design values).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Write the CSV here (a JSON report lands next to it); stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's replication count.
    #[arg(long)]
    reps: Option<usize>,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RhoArgs {
    /// Correlation-sweep config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Write the CSV here (a JSON report lands next to it); stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's replication count.
    #[arg(long)]
    reps: Option<usize>,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Scenario config (JSON) naming the algorithms and training size.
    #[arg(long)]
    config: PathBuf,
    /// Resolve this calibration target to an omega instead of sweeping a
    /// true-error curve.
    #[arg(long)]
    lambda: Option<f64>,
    /// Write the CSV (or, with --lambda, the JSON) here; stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the replication count (curve replications, or the
    /// calibration replications when --lambda is given).
    #[arg(long)]
    reps: Option<usize>,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
}

/// rho1/rho2 overrides accepted by `test --config`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TestConfig {
    #[serde(default = "default_rho")]
    rho1: f64,
    #[serde(default = "default_rho")]
    rho2: f64,
}

fn default_rho() -> f64 {
    0.5
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Partition(args) => run_partition(args),
        Command::Test(args) => run_test(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Rho(args) => run_rho(args),
        Command::Calibrate(args) => run_calibrate(args),
    }
}

/// Writes `content` to `out` when given, otherwise prints it verbatim.
fn write_or_print(out: &Option<PathBuf>, content: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            fs::write(path, content)
                .with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{content}"),
    }
    Ok(())
}

/// Writes the JSON sibling of a CSV artifact (`foo.csv` -> `foo.json`).
fn write_json_sibling(csv_path: &Path, json: &str) -> anyhow::Result<PathBuf> {
    let path = csv_path.with_extension("json");
    fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?;
    eprintln!("wrote {}", path.display());
    Ok(path)
}

fn read_json_config<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn warn_on_thin_replications(replications: usize) {
    if replications < 100 {
        eprintln!(
            "warning: {replications} replications leave a Monte Carlo SE of up to \
             {:.3} on a rejection rate; 100 or more is advisable",
            0.5 / (replications as f64).sqrt()
        );
    }
}

fn run_partition(args: PartitionArgs) -> anyhow::Result<()> {
    let set = bcv_5x2_partitions_n(args.n, args.seed)?;
    let k = set.pairs.len();
    let overlaps: Vec<Vec<usize>> = (0..k)
        .map(|i| (0..k).map(|j| overlap_count(&set.pairs[i], &set.pairs[j])).collect())
        .collect();
    let mut doc = serde_json::to_string_pretty(&serde_json::json!({
        "n": args.n,
        "seed": args.seed,
        "blocks": set.blocks,
        "pairs": set.pairs,
        "train_overlaps": overlaps,
    }))?;
    doc.push('\n');
    write_or_print(&args.out, &doc)
}

fn run_test(args: TestArgs) -> anyhow::Result<()> {
    let data = Dataset::from_csv_path(&args.data)
        .with_context(|| format!("loading {}", args.data.display()))?;
    let algo_a: ClassifierSpec = args.algo_a.parse()?;
    let algo_b: ClassifierSpec = args.algo_b.parse()?;
    let tests: Vec<TestName> = args
        .tests
        .iter()
        .map(|s| s.parse())
        .collect::<Result<_, _>>()?;
    let (rho1, rho2) = match &args.config {
        Some(path) => {
            let cfg: TestConfig = read_json_config(path)?;
            (cfg.rho1, cfg.rho2)
        }
        None => (default_rho(), default_rho()),
    };

    let rows = compare_on_dataset(
        &data, &algo_a, &algo_b, &tests, args.alpha, rho1, rho2, args.seed,
    )?;

    for row in &rows {
        match (&row.result, &row.note) {
            (Some(r), _) => {
                let stat = r
                    .statistic
                    .map_or_else(|| "na".into(), |s| format!("{s:.4}"));
                let p = r.p_value.map_or_else(|| "na".into(), |p| format!("{p:.4}"));
                let verdict = if r.reject { "reject" } else { "fail to reject" };
                println!(
                    "{}: statistic={stat}, p={p}, {verdict} at alpha={} [{}]",
                    row.test,
                    r.alpha,
                    r.status.as_str()
                );
            }
            (None, Some(note)) => println!("{}: no result ({note})", row.test),
            (None, None) => unreachable!("rows carry a result or a note"),
        }
    }

    let mut doc = serde_json::to_string_pretty(&serde_json::json!({
        "data": args.data.display().to_string(),
        "algo_a": algo_a.to_string(),
        "algo_b": algo_b.to_string(),
        "alpha": args.alpha,
        "seed": args.seed,
        "rho1": rho1,
        "rho2": rho2,
        "results": rows
            .iter()
            .map(|row| serde_json::json!({
                "test": row.test.as_str(),
                "result": row.result.as_ref().map(|r| r.to_json()),
                "note": row.note,
            }))
            .collect::<Vec<_>>(),
    }))?;
    doc.push('\n');
    write_or_print(&args.out, &doc)
}

fn run_simulate(args: SimulateArgs) -> anyhow::Result<()> {
    let mut cfg: ScenarioConfig = read_json_config(&args.config)?;
    if let Some(reps) = args.reps {
        cfg.replications = reps;
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    warn_on_thin_replications(cfg.replications);

    let started = Instant::now();
    let report = run_scenario(&cfg)?;
    eprintln!(
        "simulated {} replications -> {} rows in {:.1}s",
        cfg.replications,
        report.rows.len(),
        started.elapsed().as_secs_f64()
    );
    if let Some(path) = &args.out {
        write_json_sibling(path, &report.to_json())?;
    }
    write_or_print(&args.out, &report.to_csv())
}

fn run_rho(args: RhoArgs) -> anyhow::Result<()> {
    let mut cfg: RhoSweepConfig = read_json_config(&args.config)?;
    if let Some(reps) = args.reps {
        cfg.replications = reps;
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }

    let started = Instant::now();
    let points = rho_sweep(&cfg)?;
    eprintln!(
        "estimated {} jobs in {:.1}s",
        points.len(),
        started.elapsed().as_secs_f64()
    );
    for p in &points {
        if let Some(note) = &p.note {
            eprintln!("skipped {} vs {} on {}: {note}", p.algo_a, p.algo_b, p.generator);
        }
    }
    if let Some(path) = &args.out {
        let mut json = serde_json::to_string_pretty(&points)?;
        json.push('\n');
        write_json_sibling(path, &json)?;
    }
    write_or_print(&args.out, &rho_points_to_csv(&points))
}

fn run_calibrate(args: CalibrateArgs) -> anyhow::Result<()> {
    let mut cfg: ScenarioConfig = read_json_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }

    match args.lambda {
        Some(lambda) => {
            if let Some(reps) = args.reps {
                cfg.calibration_replications = reps;
            }
            warn_on_thin_replications(cfg.calibration_replications);
            let calib = calibration_config(&cfg)?;
            let started = Instant::now();
            let curve = calibration_curve(&calib)?;
            let omega = interpolate_omega(&curve, lambda)?;
            eprintln!(
                "calibrated over {} grid points in {:.1}s",
                curve.points.len(),
                started.elapsed().as_secs_f64()
            );
            println!("lambda={lambda} -> omega={omega:.6}");
            if args.out.is_some() {
                let mut doc = serde_json::to_string_pretty(&serde_json::json!({
                    "lambda": lambda,
                    "omega": omega,
                    "curve": curve,
                }))?;
                doc.push('\n');
                write_or_print(&args.out, &doc)?;
            }
            Ok(())
        }
        None => {
            if let Some(reps) = args.reps {
                cfg.replications = reps;
            }
            let started = Instant::now();
            let curve = true_error_curve(&cfg)?;
            eprintln!(
                "estimated {} curve points in {:.1}s",
                curve.points.len(),
                started.elapsed().as_secs_f64()
            );
            if let Some(path) = &args.out {
                write_json_sibling(path, &curve.to_json())?;
            }
            write_or_print(&args.out, &curve.to_csv())
        }
    }
}
