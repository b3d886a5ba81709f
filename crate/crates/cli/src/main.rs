//! `nasenc`: runs JSON-configured encoding experiments and manages the
//! tabular benchmarks they consume.
//!
//! Exit codes: 0 on success, 2 for configuration problems (unreadable or
//! invalid config, wrong experiment kind, bad parameters), 3 for runtime
//! failures.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use nasenc_core::benchmark::TabularBenchmark;
use nasenc_core::encodings::{EncodingFamily, EncodingKind, Truncation};
use nasenc_core::experiments::{encoding_label, run_experiment, ExperimentConfig, RunOptions};
use nasenc_core::search_space::SearchSpaceSpec;
use nasenc_core::{Error, Result};

#[derive(Parser)]
#[command(name = "nasenc", version, about = "Encoding-study experiment harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep encodings through one subroutine slot per algorithm
    Ablation(RunArgs),
    /// Degrade one-hot encodings bit by bit under one search algorithm
    Truncation(RunArgs),
    /// Train predictors on one benchmark partition, select from a disjoint one
    #[command(name = "outside-ss")]
    OutsideSs(RunArgs),
    /// Tabulate exact and sampled short-path fractions of the random-graph model
    Bcurve(RunArgs),
    /// Tune an algorithm on one benchmark, compare default vs tuned on another
    Tune(RunArgs),
    /// Benchmark table utilities
    Bench {
        #[command(subcommand)]
        command: BenchCommand,
    },
}

impl Command {
    fn expected_kind(&self) -> Option<&'static str> {
        match self {
            Command::Ablation(_) => Some("ablation"),
            Command::Truncation(_) => Some("truncation"),
            Command::OutsideSs(_) => Some("outside-search-space"),
            Command::Bcurve(_) => Some("b-curve"),
            Command::Tune(_) => Some("tune"),
            Command::Bench { .. } => None,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Experiment description (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Master seed; every trial seed derives from it
    #[arg(long)]
    seed: u64,
    /// Output directory for config echo, traces, and summary
    #[arg(long)]
    out: PathBuf,
    /// Override the configured trial count
    #[arg(long)]
    trials: Option<usize>,
    /// Cap worker threads (default: all cores)
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Generate a synthetic benchmark over a full search space as JSONL
    Gen {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        max_edges: usize,
        #[arg(long)]
        num_ops: usize,
        #[arg(long)]
        seed: u64,
        /// Output JSONL path
        #[arg(long)]
        out: PathBuf,
        /// Restrict the space to architectures using every edge slot
        #[arg(long)]
        complete_only: bool,
    },
    /// Summarize how each encoding partitions a benchmark into classes
    Stats {
        /// Benchmark JSONL path
        #[arg(long)]
        benchmark: PathBuf,
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        max_edges: usize,
        #[arg(long)]
        num_ops: usize,
        /// Restrict rows to one encoding family
        #[arg(long)]
        family: Option<String>,
        /// Write the CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(classify(&err))
        }
    }
}

/// Configuration mistakes exit 2; runtime failures exit 3.
fn classify(err: &Error) -> u8 {
    match err {
        Error::Config(_)
        | Error::InvalidParameter(_)
        | Error::Json(_)
        | Error::Parse { .. }
        | Error::DuplicateRecord { .. }
        | Error::SpecMismatch(_) => 2,
        _ => 3,
    }
}

fn run(command: Command) -> Result<()> {
    let expected = command.expected_kind();
    match command {
        Command::Ablation(args)
        | Command::Truncation(args)
        | Command::OutsideSs(args)
        | Command::Bcurve(args)
        | Command::Tune(args) => run_configured(&args, expected.unwrap()),
        Command::Bench { command } => match command {
            BenchCommand::Gen {
                nodes,
                max_edges,
                num_ops,
                seed,
                out,
                complete_only,
            } => bench_gen(nodes, max_edges, num_ops, seed, &out, complete_only),
            BenchCommand::Stats {
                benchmark,
                nodes,
                max_edges,
                num_ops,
                family,
                out,
            } => bench_stats(&benchmark, nodes, max_edges, num_ops, family.as_deref(), out),
        },
    }
}

fn run_configured(args: &RunArgs, expected: &'static str) -> Result<()> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| {
        Error::Config(format!("cannot read {}: {e}", args.config.display()))
    })?;
    let config: ExperimentConfig = serde_json::from_str(&text)?;
    if config.kind() != expected {
        return Err(Error::Config(format!(
            "config describes a {} experiment, but the {expected} command was invoked",
            config.kind()
        )));
    }
    let report = run_experiment(
        &config,
        &RunOptions {
            seed: args.seed,
            out_dir: args.out.clone(),
            trials: args.trials,
            workers: args.workers,
        },
    )?;
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    println!(
        "wrote {} summary rows to {}",
        report.summary_rows,
        report.out_dir.join("summary.csv").display()
    );
    Ok(())
}

fn bench_gen(
    nodes: usize,
    max_edges: usize,
    num_ops: usize,
    seed: u64,
    out: &PathBuf,
    complete_only: bool,
) -> Result<()> {
    let spec = Arc::new(SearchSpaceSpec::new(nodes, max_edges, num_ops)?);
    let bench = if complete_only {
        TabularBenchmark::synthetic_complete(spec, seed)?
    } else {
        TabularBenchmark::synthetic(spec, seed)?
    };
    bench.to_jsonl(out)?;
    println!(
        "wrote {} classes to {} (digest {})",
        bench.len(),
        out.display(),
        bench.digest()
    );
    Ok(())
}

fn bench_stats(
    benchmark: &PathBuf,
    nodes: usize,
    max_edges: usize,
    num_ops: usize,
    family: Option<&str>,
    out: Option<PathBuf>,
) -> Result<()> {
    let spec = Arc::new(SearchSpaceSpec::new(nodes, max_edges, num_ops)?);
    let name = benchmark
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let bench = TabularBenchmark::from_jsonl(spec.clone(), benchmark, &name)?;

    let selected: Vec<EncodingFamily> = match family {
        None => EncodingFamily::ALL.to_vec(),
        Some(name) => {
            let found = EncodingFamily::ALL.into_iter().find(|f| f.name() == name);
            vec![found.ok_or_else(|| {
                Error::Config(format!("unknown encoding family {name:?}"))
            })?]
        }
    };

    // Full-width rows for every family; path-one-hot additionally sweeps the
    // length cutoff so class collapse is visible per truncation level.
    let mut kinds = Vec::new();
    for f in &selected {
        kinds.push(EncodingKind::new(spec.clone(), *f, Truncation::Full)?);
        if *f == EncodingFamily::PathOneHot {
            for x in 0..=spec.interior_nodes() {
                kinds.push(EncodingKind::new(
                    spec.clone(),
                    *f,
                    Truncation::PathLength(x),
                )?);
            }
        }
    }

    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record([
        "encoding",
        "family",
        "dim",
        "classes",
        "largest_class",
        "population_std",
        "mean_within_class_std",
    ])?;
    for kind in &kinds {
        let stats = bench.equivalence_class_stats(kind)?;
        writer.write_record([
            encoding_label(kind),
            kind.family().name().to_string(),
            kind.dim().to_string(),
            stats.class_count.to_string(),
            stats.largest_class.to_string(),
            stats.population_std.to_string(),
            stats.mean_within_class_std.to_string(),
        ])?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Config(format!("csv buffer: {e}")))?;
    let text = String::from_utf8(bytes).expect("csv output is utf-8");
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}
