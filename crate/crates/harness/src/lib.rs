//! Workload harness for the dynamic cover structure: text traces, seeded
//! generators for several churn shapes, and a replay runner that can verify
//! as it goes and reports exact counters as JSON-ready metrics.

pub mod gen;
pub mod runner;
pub mod trace;

pub use gen::{generate, GenOptions, TraceKind};
pub use runner::{run_many, run_trace, CheckMode, RunMetrics, RunOptions};
pub use trace::{Trace, TraceError};
