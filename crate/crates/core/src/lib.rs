//! Dynamic hypergraph approximate minimum vertex cover and maximum
//! fractional matching.
//!
//! The structure maintains a level for every node of an `n`-node hypergraph
//! with edges of at most `f` endpoints, under edge insertions and deletions.
//! Edge weights are `beta^-level(e)` with `level(e)` the maximum endpoint
//! level, node weights are exact sums of incident edge weights, and a
//! deterministic settle loop keeps every node inside a fixed weight window.
//! The nodes above level zero then form a vertex cover whose size is within
//! a factor `f * alpha * beta^2` of optimal, and the edge weights form a
//! feasible fractional matching.
//!
//! Everything is exact: weights are integer numerators over `beta^L`, all
//! invariant and counter checks are integer comparisons, and identical
//! update sequences produce identical states and metrics.
//!
//! Layout:
//! * [`config`] instance parameters and derived constants
//! * [`weight`] exact fixed-point weight arithmetic
//! * [`graph`] the maintained structure and its update operations
//! * [`accounting`] update counters and their provable inequalities
//! * [`naive`] an independent from-scratch mirror of the algorithm
//! * [`oracle`] state recomputation, invariant checks, brute-force cover
//!   oracle, and differential replay

pub mod accounting;
pub mod config;
pub mod graph;
pub mod naive;
pub mod oracle;
pub mod weight;

pub use config::{Config, ConfigError, BETA};
pub use graph::{EdgeId, Graph, GraphError, JumpEvent, NodeId, Update};
pub use weight::{FixedWeight, NumeratorRepr, Threshold, WeightCtx};
