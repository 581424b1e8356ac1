//! `sumprod`: reproducible experiments on sum and product structure over
//! prime fields. Every command prints one JSON report (or, for `report`,
//! a TSV table) to stdout or `--out`.

mod commands;
mod dist;
mod error;
mod report;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::Value;

use commands::*;
use error::{CliError, CliResult};
use report::{summarize_dir, to_json_value, ExperimentReport};

#[derive(Debug, Parser)]
#[command(
    name = "sumprod",
    version,
    about = "Finite-field information theory experiments"
)]
struct Cli {
    /// Worker threads (0 = one per core). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Experiment seed.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exhaustively check the field axioms for GF(q).
    FieldCheck(FieldCheckArgs),
    /// Rate bounds, confusability graph and line geometry for Y = A + B C.
    KmBounds(KmBoundsArgs),
    /// Monte-Carlo syndrome coding with exact ML coset decoding.
    KmSim(KmSimArgs),
    /// Decomposability, cancellation and operation laws of a truth table.
    Decompose(DecomposeArgs),
    /// Minimum conditional entropy over encoder maps for Y = X + S1 S2.
    Minent(MinentArgs),
    /// Evaluate or search auxiliary-variable designs for a state channel.
    GpEval(GpEvalArgs),
    /// Collect a directory of JSON reports into TSV tables.
    Report(ReportArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::FieldCheck(_) => "field-check",
            Command::KmBounds(_) => "km-bounds",
            Command::KmSim(_) => "km-sim",
            Command::Decompose(_) => "decompose",
            Command::Minent(_) => "minent",
            Command::GpEval(_) => "gp-eval",
            Command::Report(_) => "report",
        }
    }

    fn config(&self) -> Value {
        match self {
            Command::FieldCheck(a) => to_json_value(a),
            Command::KmBounds(a) => to_json_value(a),
            Command::KmSim(a) => to_json_value(a),
            Command::Decompose(a) => to_json_value(a),
            Command::Minent(a) => to_json_value(a),
            Command::GpEval(a) => to_json_value(a),
            Command::Report(a) => to_json_value(a),
        }
    }

    fn results(&self, seed: u64) -> CliResult<Value> {
        match self {
            Command::FieldCheck(a) => field_check(a),
            Command::KmBounds(a) => km_bounds(a),
            Command::KmSim(a) => km_sim(a, seed),
            Command::Decompose(a) => decompose_cmd(a),
            Command::Minent(a) => minent(a, seed),
            Command::GpEval(a) => gp_eval(a, seed),
            Command::Report(_) => unreachable!("report writes TSV"),
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io {
            path: p.clone(),
            source: e,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    if let Command::Report(a) = &cli.command {
        return emit(&cli.out, &summarize_dir(&a.dir)?);
    }
    let start = Instant::now();
    let results = cli.command.results(cli.seed)?;
    let report = ExperimentReport {
        command: cli.command.name().to_string(),
        config: cli.command.config(),
        results,
        seed: cli.seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_ms: start.elapsed().as_millis() as u64,
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    emit(&cli.out, &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start {} worker threads: {e}", cli.jobs);
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
