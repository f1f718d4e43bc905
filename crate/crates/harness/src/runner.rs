//! Trace replay with selectable checking depth, and the metrics snapshot
//! emitted afterwards.
//!
//! Replay is deterministic: the same trace and options produce the same
//! metrics except for wall time. Checks are read-only; running with
//! `CheckMode::None` and `CheckMode::Full` yields identical final states
//! and counters.

use std::time::Instant;

use hypercover_core::naive::SchedulerOrder;
use hypercover_core::{oracle, Config, ConfigError, Graph, GraphError, BETA};
use serde::Serialize;
use thiserror::Error;

use crate::trace::Trace;

/// Full mode only consults the exponential optimum oracle on instances this
/// small; larger runs still get every other check.
const FULL_ORACLE_NODE_LIMIT: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum CheckMode {
    /// Replay only.
    #[default]
    None,
    /// Steady-state invariants after every update: no flagged nodes, weight
    /// window, cover validity, matching feasibility.
    Light,
    /// Light plus the internal self-checking assertions, a full structural
    /// recomputation per update, the counter inequalities, and on small
    /// instances a periodic brute-force optimum comparison.
    Full,
    /// Lockstep replay against the recompute-everything twin before the
    /// metrics pass.
    Differential,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub check: CheckMode,
    /// Updates between brute-force optimum comparisons in full mode.
    pub oracle_every: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            check: CheckMode::None,
            oracle_every: 20,
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("update {step}: {source}")]
    Update { step: u64, source: GraphError },
    #[error("check failed after update {step}: {msg}")]
    Check { step: u64, msg: String },
    #[error("lockstep replay diverged: {0}")]
    Differential(String),
}

/// One replay's outcome. Exact quantities are rendered as decimal strings
/// (the credit numerator is a big integer and the matching value a
/// rational); instance parameters stay numeric.
#[derive(Debug, Clone, Serialize)]
#[allow(non_snake_case)]
pub struct RunMetrics {
    pub n: u32,
    pub f: u32,
    pub beta: u64,
    pub alpha: u64,
    pub L: u32,
    pub T: u64,
    pub C_up: String,
    pub C_down: String,
    pub I_down_num: String,
    pub I_down_den: String,
    pub elementary_ops: String,
    pub cover_size: u64,
    pub matching_value: String,
    pub wall_ms: f64,
    pub checks_passed: u64,
    pub ops_per_update: f64,
}

pub fn run_trace(trace: &Trace, opts: &RunOptions) -> Result<RunMetrics, RunError> {
    let cfg = Config::new(trace.n, trace.f)?;

    let mut checks_passed: u64 = 0;
    if opts.check == CheckMode::Differential {
        oracle::differential_run(trace.n, trace.f, &trace.updates, SchedulerOrder::Lifo)
            .map_err(RunError::Differential)?;
        checks_passed += trace.updates.len() as u64;
    }

    let mut g = Graph::from_config(cfg.clone());
    g.set_verify(opts.check == CheckMode::Full);

    let started = Instant::now();
    for (i, update) in trace.updates.iter().enumerate() {
        let step = i as u64 + 1;
        g.apply(update)
            .map_err(|source| RunError::Update { step, source })?;
        match opts.check {
            CheckMode::None | CheckMode::Differential => {}
            CheckMode::Light => {
                oracle::check_quiescent_invariants(&g)
                    .map_err(|msg| RunError::Check { step, msg })?;
                checks_passed += 1;
            }
            CheckMode::Full => {
                oracle::run_full_checks(&g).map_err(|msg| RunError::Check { step, msg })?;
                checks_passed += 1;
                if step % opts.oracle_every.max(1) == 0 && trace.n <= FULL_ORACLE_NODE_LIMIT {
                    oracle::check_approximation(&g).map_err(|msg| RunError::Check { step, msg })?;
                    checks_passed += 1;
                }
            }
        }
    }
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;

    let ledger = g.ledger();
    let t = ledger.updates();
    Ok(RunMetrics {
        n: trace.n,
        f: trace.f,
        beta: BETA,
        alpha: cfg.alpha(),
        L: cfg.level_cap(),
        T: t,
        C_up: ledger.up_touches().to_string(),
        C_down: ledger.down_touches().to_string(),
        I_down_num: ledger.down_credit_numerator().to_string(),
        I_down_den: ledger.down_credit_denominator(&cfg).to_string(),
        elementary_ops: ledger.elementary_ops().to_string(),
        cover_size: g.cover_size(),
        matching_value: g.weight_ctx().render(&g.matching_value()),
        wall_ms,
        checks_passed,
        ops_per_update: ledger.elementary_ops() as f64 / t.max(1) as f64,
    })
}

pub fn run_many_sequential(
    traces: &[Trace],
    opts: &RunOptions,
) -> Result<Vec<RunMetrics>, RunError> {
    traces.iter().map(|t| run_trace(t, opts)).collect()
}

/// Independent traces across a thread pool; one trace stays one worker.
#[cfg(feature = "parallel")]
pub fn run_many_parallel(
    traces: &[Trace],
    opts: &RunOptions,
    jobs: usize,
) -> Result<Vec<RunMetrics>, RunError> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool construction");
    pool.install(|| traces.par_iter().map(|t| run_trace(t, opts)).collect())
}

/// Dispatches on `jobs` and the compiled features: `jobs == 1` or a build
/// without the `parallel` feature runs sequentially.
pub fn run_many(
    traces: &[Trace],
    opts: &RunOptions,
    jobs: usize,
) -> Result<Vec<RunMetrics>, RunError> {
    #[cfg(feature = "parallel")]
    {
        if jobs != 1 {
            return run_many_parallel(traces, opts, jobs);
        }
    }
    let _ = jobs;
    run_many_sequential(traces, opts)
}
