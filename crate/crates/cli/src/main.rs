use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use icnsim::harness::{load_scenario, read_trace, run, write_trace, MetricsReport, RunOptions, TraceEvent, TraceRecord};
use icnsim::SimTime;

const EXIT_SCENARIO: u8 = 2;
const EXIT_VIOLATION: u8 = 3;

#[derive(Parser)]
#[command(name = "icnsim", version, about = "Deterministic ICN slicing and mobility simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and print its metrics report.
    Run {
        scenario: PathBuf,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the JSONL event trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Stop at this simulated time (microseconds).
        #[arg(long, value_name = "USEC")]
        until: Option<SimTime>,
    },
    /// Parse and validate a scenario without running it.
    Validate { scenario: PathBuf },
    /// Re-derive the report from a saved trace and check its invariants.
    Oracle { trace: PathBuf },
}

enum Failure {
    Scenario(String),
    Violation(String),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

fn emit_report(report: &MetricsReport, path: Option<&Path>) -> anyhow::Result<()> {
    let json = report.to_json();
    match path {
        Some(p) => std::fs::write(p, json).with_context(|| format!("writing {}", p.display())),
        None => io::stdout().write_all(json.as_bytes()).context("writing report"),
    }
}

fn violations(trace: &[TraceRecord], report: &MetricsReport) -> Vec<String> {
    let mut out: Vec<String> = trace
        .iter()
        .filter_map(|r| match &r.event {
            TraceEvent::InvariantViolation { what } => Some(format!("t={} {}: {what}", r.t, r.node)),
            _ => None,
        })
        .collect();
    out.extend(report.check().into_iter().filter(|c| !c.contains("invariant violations traced")));
    out
}

fn cmd_run(
    scenario: &Path,
    seed: Option<u64>,
    trace: Option<&Path>,
    report: Option<&Path>,
    until: Option<SimTime>,
) -> Result<(), Failure> {
    let s = load_scenario(scenario).map_err(|e| Failure::Scenario(format!("{}: {e}", scenario.display())))?;
    log::info!("running {} (seed {})", scenario.display(), seed.unwrap_or(s.seed));
    let out = run(&s, RunOptions { seed, until });
    if let Some(p) = trace {
        let file = File::create(p).with_context(|| format!("creating {}", p.display()))?;
        let mut w = BufWriter::new(file);
        write_trace(&mut w, &out.trace).with_context(|| format!("writing {}", p.display()))?;
        w.flush().with_context(|| format!("writing {}", p.display()))?;
    }
    emit_report(&out.report, report)?;
    log::info!("{} trace records", out.trace.len());
    let found = violations(&out.trace, &out.report);
    if !found.is_empty() {
        return Err(Failure::Violation(found.join("\n")));
    }
    Ok(())
}

fn cmd_validate(scenario: &Path) -> Result<(), Failure> {
    let s = load_scenario(scenario).map_err(|e| Failure::Scenario(format!("{}: {e}", scenario.display())))?;
    println!(
        "{}: ok ({} nodes, {} links, {} ues, {} actions, {} us)",
        scenario.display(),
        s.nodes.len(),
        s.links.len(),
        s.ues.len(),
        s.timeline.len(),
        s.duration_us
    );
    Ok(())
}

fn cmd_oracle(path: &Path) -> Result<(), Failure> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let trace = read_trace(BufReader::new(file)).map_err(|e| Failure::Scenario(format!("{}: {e}", path.display())))?;
    let report = MetricsReport::from_trace(&trace);
    emit_report(&report, None)?;
    let found = violations(&trace, &report);
    if !found.is_empty() {
        return Err(Failure::Violation(found.join("\n")));
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("ICNSIM_LOG")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run {
            scenario,
            seed,
            trace,
            report,
            until,
        } => cmd_run(scenario, *seed, trace.as_deref(), report.as_deref(), *until),
        Command::Validate { scenario } => cmd_validate(scenario),
        Command::Oracle { trace } => cmd_oracle(trace),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Scenario(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_SCENARIO)
        }
        Err(Failure::Violation(msg)) => {
            eprintln!("invariant violation:\n{msg}");
            ExitCode::from(EXIT_VIOLATION)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
