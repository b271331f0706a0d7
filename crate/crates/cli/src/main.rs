//! `qf`: command-line front end for the quasifree library.
//!
//! Reads a JSON scenario, runs one command and writes a single JSON report
//! to stdout. Exit codes: 0 success, 1 failed check or internal error,
//! 2 validation, 3 inconclusive, 4 resource cap.

mod commands;
mod report;
mod scenario;

use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use quasifree::{Error, Result};
use report::{digest, Report, Status, TOOL};
use scenario::{Options, Scenario};

#[derive(Parser)]
#[command(name = "qf", version, about = "Transition probabilities and quasi-equivalence of quasi-free states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that the scenario describes valid states.
    Validate(Args),
    /// Transition probability and its intermediate determinant.
    TransProb(Args),
    /// Quasi-equivalent/disjoint verdict for a ccr-pair or a sequence.
    Classify(Args),
    /// Transition probability of the quadratures against t².
    QuadratureCheck(Args),
    /// Determinant formula against the explicit Fock-space overlap.
    OracleCompare(Args),
    /// Run the Fock/co-Fock product family end to end.
    DemoCounterexample(DemoArgs),
}

#[derive(clap::Args)]
struct Flags {
    /// Agreement tolerance and CCR classification threshold [default: 1e-8].
    #[arg(long)]
    tol: Option<f64>,
    /// Largest Fock cutoff for the bosonic oracle [default: 80].
    #[arg(long)]
    cutoff: Option<usize>,
    /// Number of modes for sequence scenarios [default: 4096].
    #[arg(long)]
    n_max: Option<usize>,
    /// Seed for random scenarios [default: 0].
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(clap::Args)]
struct Args {
    /// Scenario file, or `-` for stdin.
    scenario: PathBuf,
    #[command(flatten)]
    flags: Flags,
}

#[derive(clap::Args)]
struct DemoArgs {
    /// Optional scenario supplying options.
    scenario: Option<PathBuf>,
    #[command(flatten)]
    flags: Flags,
}

impl Flags {
    fn options(&self) -> Options {
        Options { tol: self.tol, cutoff: self.cutoff, n_max: self.n_max, seed: self.seed }
    }
}

fn read_scenario(path: &PathBuf) -> Result<Scenario> {
    let text = if path.as_os_str() == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Error::Shape { expected: "readable stdin".into(), found: e.to_string() })?;
        buf
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| Error::Shape { expected: format!("readable file {}", path.display()), found: e.to_string() })?
    };
    Scenario::parse(&text)
}

fn status_of(err: &Error) -> Status {
    match err {
        Error::Inconclusive { .. } => Status::Inconclusive,
        Error::SizeCap { .. } => Status::SizeCap,
        e if e.is_validation() => Status::ValidationError,
        _ => Status::InternalError,
    }
}

fn configure_threads() {
    let Ok(raw) = std::env::var("QF_THREADS") else { return };
    match raw.parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("could not size the thread pool: {e}");
            }
        }
        _ => log::warn!("ignoring QF_THREADS={raw:?}"),
    }
}

fn run(command: &Command) -> (String, Option<Scenario>, Result<commands::Outcome>) {
    let (name, path, flags) = match command {
        Command::Validate(a) => ("validate", Some(&a.scenario), &a.flags),
        Command::TransProb(a) => ("trans-prob", Some(&a.scenario), &a.flags),
        Command::Classify(a) => ("classify", Some(&a.scenario), &a.flags),
        Command::QuadratureCheck(a) => ("quadrature-check", Some(&a.scenario), &a.flags),
        Command::OracleCompare(a) => ("oracle-compare", Some(&a.scenario), &a.flags),
        Command::DemoCounterexample(a) => ("demo-counterexample", a.scenario.as_ref(), &a.flags),
    };
    let mut scenario = match path.map(read_scenario).transpose() {
        Ok(sc) => sc,
        Err(e) => return (name.to_string(), None, Err(e)),
    };
    let opts = match scenario.as_mut() {
        Some(sc) => sc.resolve(&flags.options()),
        None => Options::default().resolve(&flags.options(), None),
    };
    log::info!("{name}: tol {:e}, cutoff {}, n_max {}, seed {}", opts.tol, opts.cutoff, opts.n_max, opts.seed);
    let outcome = match (command, scenario.as_ref()) {
        (Command::DemoCounterexample(_), _) => commands::demo_counterexample(&opts),
        (Command::Validate(_), Some(sc)) => commands::validate(sc, &opts),
        (Command::TransProb(_), Some(sc)) => commands::trans_prob(sc, &opts),
        (Command::Classify(_), Some(sc)) => commands::classify(sc, &opts),
        (Command::QuadratureCheck(_), Some(sc)) => commands::quadrature_check(sc, &opts),
        (Command::OracleCompare(_), Some(sc)) => commands::oracle_compare(sc, &opts),
        (_, None) => unreachable!("every other command takes a scenario"),
    };
    (name.to_string(), scenario, outcome)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    configure_threads();

    let start = Instant::now();
    let (command, scenario, outcome) = run(&cli.command);
    let (results, status, error) = match outcome {
        Ok(o) => (o.results, o.status, None),
        Err(e) => {
            log::error!("{command}: {e}");
            (serde_json::Value::Null, status_of(&e), Some(e.to_string()))
        }
    };
    let report = Report {
        tool: TOOL,
        version: env!("CARGO_PKG_VERSION"),
        inputs_digest: digest(&command, scenario.as_ref()),
        command,
        scenario,
        results,
        timing_ms: start.elapsed().as_secs_f64() * 1e3,
        status,
        error,
    };
    let text = serde_json::to_string(&report).expect("report serializes");
    // a closed pipe downstream is not our failure
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    ExitCode::from(status.exit_code() as u8)
}
