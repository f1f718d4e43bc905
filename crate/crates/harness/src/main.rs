use std::io::Read;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use hypercover_harness::gen::{generate, GenOptions, TraceKind};
use hypercover_harness::runner::{run_many, run_trace, CheckMode, RunOptions};
use hypercover_harness::trace::Trace;

/// Dynamic hypergraph cover harness: generate update traces, replay them
/// with optional verification, and benchmark sweeps.
#[derive(Parser)]
#[command(name = "hypercover", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GenArgs {
    /// Number of vertices.
    #[arg(long)]
    n: u32,
    /// Maximum edge cardinality.
    #[arg(long)]
    f: u32,
    /// Number of updates to emit.
    #[arg(long)]
    updates: u64,
    /// RNG seed; the same seed yields a byte-identical trace.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stream shape.
    #[arg(long, value_enum, default_value_t = TraceKind::RandomChurn)]
    kind: TraceKind,
    /// Live-edge target for sliding-window traces.
    #[arg(long)]
    window: Option<u64>,
}

impl GenArgs {
    fn options(&self, seed: u64) -> GenOptions {
        GenOptions {
            n: self.n,
            f: self.f,
            updates: self.updates,
            seed,
            kind: self.kind,
            window: self.window,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a trace and write it as text.
    Gen {
        #[command(flatten)]
        args: GenArgs,
        /// Output path; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a trace and emit metrics JSON.
    Run {
        /// Trace file, or `-` for stdin.
        #[arg(default_value = "-")]
        trace: String,
        /// Checking depth during replay.
        #[arg(long, value_enum, default_value_t = CheckMode::None)]
        check: CheckMode,
        /// Updates between optimum-oracle comparisons in full mode.
        #[arg(long, default_value_t = 20)]
        oracle_every: u64,
        /// Metrics path; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate one trace per job and replay them in parallel.
    Bench {
        #[command(flatten)]
        args: GenArgs,
        /// Worker count; also the number of (trace, seed) pairs, seeded
        /// seed, seed+1, ...
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Checking depth during replay.
        #[arg(long, value_enum, default_value_t = CheckMode::None)]
        check: CheckMode,
        /// Summary path; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and validate a trace without running it.
    Check {
        /// Trace file, or `-` for stdin.
        #[arg(default_value = "-")]
        trace: String,
    },
}

fn read_trace(arg: &str) -> Result<Trace> {
    if arg == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .context("reading trace from stdin")?;
        Ok(Trace::parse(&text)?)
    } else {
        Ok(Trace::load(arg).with_context(|| format!("reading trace {arg}"))?)
    }
}

fn emit(out: &Option<PathBuf>, text: String) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen { args, out } => {
            let trace = generate(&args.options(args.seed))?;
            emit(&out, trace.to_text())
        }
        Command::Run {
            trace,
            check,
            oracle_every,
            out,
        } => {
            let trace = read_trace(&trace)?;
            let opts = RunOptions {
                check,
                oracle_every,
            };
            let metrics = run_trace(&trace, &opts)?;
            emit(&out, serde_json::to_string_pretty(&metrics)?)
        }
        Command::Bench {
            args,
            jobs,
            check,
            out,
        } => {
            let workers = jobs.max(1);
            let traces: Vec<Trace> = (0..workers as u64)
                .map(|i| generate(&args.options(args.seed + i)))
                .collect::<Result<_, _>>()?;
            let opts = RunOptions {
                check,
                ..Default::default()
            };
            let started = std::time::Instant::now();
            let results = run_many(&traces, &opts, workers)?;
            let total_wall_ms = started.elapsed().as_secs_f64() * 1e3;
            let total_ops: u64 = results
                .iter()
                .map(|m| m.elementary_ops.parse::<u64>().unwrap())
                .sum();
            let total_updates: u64 = results.iter().map(|m| m.T).sum();
            let summary = serde_json::json!({
                "jobs": workers,
                "total_wall_ms": total_wall_ms,
                "total_updates": total_updates,
                "total_elementary_ops": total_ops.to_string(),
                "ops_per_update": total_ops as f64 / total_updates.max(1) as f64,
                "traces": results,
            });
            emit(&out, serde_json::to_string_pretty(&summary)?)
        }
        Command::Check { trace } => {
            let trace = read_trace(&trace)?;
            println!(
                "ok: n={} f={} updates={} live_at_end={}",
                trace.n,
                trace.f,
                trace.updates.len(),
                trace.live_at_end()
            );
            Ok(())
        }
    }
}
