//! `catalyst-qlab`: catalyticity checks, compilation, one-clean-qubit runs
//! and the runtime census, each emitting a JSON report.
//!
//! Exit codes: 0 pass, 1 verification failed, 2 input error, 3 budget
//! exceeded. Size caps default from `QLAB_*` environment variables.

mod commands;
mod config;
mod error;
mod report;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use catalyst_core::catalytic::CatalyticSet;
use catalyst_core::compile::Backend;
use catalyst_core::Limits;
use clap::{CommandFactory, Parser, Subcommand};

use error::CliError;
use report::Outcome;

#[derive(Debug, Parser)]
#[command(name = "catalyst-qlab", version, about = "Catalytic circuit lab: verify, compile, run one-clean-qubit instances, census")]
struct Cli {
    /// Key-value file of flag defaults.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Also write the tabular results here.
    #[arg(long, global = true, value_name = "FILE")]
    csv: Option<PathBuf>,
    /// Record wall-clock time in `elapsed_ms`.
    #[arg(long, global = true)]
    timing: bool,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Check that a circuit restores every catalyst in a set.
    VerifyCatalytic {
        circuit: PathBuf,
        /// pauliprod, epr, random (density) or pure.
        #[arg(long, default_value = "pauliprod")]
        set: CatalyticSet,
        #[arg(long, default_value_t = catalyst_core::catalytic::DEFAULT_TOLERANCE)]
        tol: f64,
        /// Random catalysts for the sampled sets.
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Lower a register program on one input to a catalytic circuit.
    Compile {
        program: PathBuf,
        /// Input bits, first input first (e.g. 101).
        #[arg(long)]
        input: String,
        #[arg(long, default_value = "perm")]
        backend: Backend,
        /// Cycle-wrap with this many cycles.
        #[arg(long)]
        cycles: Option<usize>,
        /// Keep this many steps of the cycled stream.
        #[arg(long, requires = "cycles")]
        truncate: Option<usize>,
        /// Circuit file to write; permutation side-files land next to it.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Run the EPR catalyticity check on the result.
        #[arg(long)]
        check: bool,
    },
    /// One-clean-qubit run of a circuit file or `pipeline:PROG:BITS:L[:T]`.
    #[command(name = "run-dqc1")]
    RunDqc1 {
        target: String,
        /// Exact enumeration (the default).
        #[arg(long, conflicts_with = "shots")]
        exact: bool,
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Decide at threshold 1/2 + 1/q.
        #[arg(long)]
        q_bound: Option<f64>,
        /// Backend for pipeline targets.
        #[arg(long, default_value = "perm")]
        backend: Backend,
    },
    /// Run times of a reversible automaton over every tape.
    Census {
        /// immediate-halt, bit-scan-walker or modular-counter; all when omitted.
        automaton: Option<String>,
        #[arg(long, default_value_t = 4)]
        clean: usize,
        #[arg(long, default_value_t = 12)]
        tape: usize,
    },
    /// Print the report JSON Schema.
    Schema,
}

fn subcommand_name(cmd: &Cmd) -> &'static str {
    match cmd {
        Cmd::VerifyCatalytic { .. } => "verify-catalytic",
        Cmd::Compile { .. } => "compile",
        Cmd::RunDqc1 { .. } => "run-dqc1",
        Cmd::Census { .. } => "census",
        Cmd::Schema => "schema",
    }
}

/// Parses argv, then re-parses with the config file's flags appended.
fn parse_args(args: Vec<OsString>) -> Result<Cli, clap::Error> {
    let first = Cli::try_parse_from(&args)?;
    let Some(path) = first.config.clone() else {
        return Ok(first);
    };
    let sub = subcommand_name(&first.command);
    match config::merge(&Cli::command(), sub, &path, args) {
        Ok(merged) => Cli::try_parse_from(merged),
        Err(e) => Err(Cli::command().error(clap::error::ErrorKind::InvalidValue, e.to_string())),
    }
}

fn run(cli: &Cli, limits: &Limits) -> Result<Option<Outcome>, CliError> {
    let outcome = match &cli.command {
        Cmd::VerifyCatalytic { circuit, set, tol, trials, seed } => {
            commands::verify::run(circuit, *set, *tol, *trials, *seed, limits)?
        }
        Cmd::Compile { program, input, backend, cycles, truncate, out, check } => commands::compile::run(
            &commands::compile::Args { program, input, backend: *backend, cycles: *cycles, truncate: *truncate, out: out.as_deref(), check: *check },
            limits,
        )?,
        Cmd::RunDqc1 { target, exact: _, shots, seed, q_bound, backend } => {
            commands::dqc1::run(target, *shots, *seed, *q_bound, *backend, limits)?
        }
        Cmd::Census { automaton, clean, tape } => commands::census::run(automaton.as_deref(), *clean, *tape, limits)?,
        Cmd::Schema => return Ok(None),
    };
    Ok(Some(outcome))
}

fn main() -> ExitCode {
    let cli = match parse_args(std::env::args_os().collect()) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let limits = Limits::from_env();
    let start = Instant::now();
    let result = run(&cli, &limits).and_then(|outcome| {
        let Some(mut outcome) = outcome else {
            print!("{}", report::SCHEMA);
            return Ok(true);
        };
        if cli.timing {
            outcome.report.elapsed_ms = start.elapsed().as_millis() as u64;
        }
        if let Some(path) = &cli.csv {
            outcome.table.write(path)?;
        }
        let json = outcome.report.to_json();
        match &cli.report {
            Some(path) => fs::write(path, json).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
            None => print!("{json}"),
        }
        Ok(outcome.passed)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("catalyst-qlab: verification failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("catalyst-qlab: error: {e}");
            e.exit_code()
        }
    }
}
