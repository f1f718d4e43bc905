//! Instance parameters shared by every structure in the crate.
//!
//! All derived constants are computed with exact integer arithmetic; in
//! particular the level cap is the smallest `L` with `beta^(L-1) >= n^f`,
//! never a floating-point logarithm.

use num_bigint::BigUint;
use thiserror::Error;

/// Base of the geometric level hierarchy.
pub const BETA: u64 = 17;

/// Largest supported hyperedge cardinality. Endpoint slots are packed into a
/// byte inside intrusive bucket links.
pub const MAX_EDGE_ARITY: u32 = 255;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("node count must be at least 2, got {0}")]
    NodeCountTooSmall(u64),
    #[error("max edge cardinality must be at least 2, got {0}")]
    ArityTooSmall(u32),
    #[error("max edge cardinality {0} exceeds the supported limit {MAX_EDGE_ARITY}")]
    ArityTooLarge(u32),
}

/// Frozen per-instance parameters: node universe size `n`, maximum edge
/// cardinality `f`, and the constants derived from them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    n: u32,
    f: u32,
    alpha: u64,
    level_cap: u32,
    approx_factor: u64,
}

impl Config {
    /// Validates `n >= 2` and `2 <= f <= 255`, then derives:
    /// `alpha = 1 + 36 f^2 beta^2`, the level cap
    /// `L = ceil(f log_beta n) + 1`, and the cover guarantee `f alpha beta^2`.
    pub fn new(n: u32, f: u32) -> Result<Self, ConfigError> {
        if n < 2 {
            return Err(ConfigError::NodeCountTooSmall(n as u64));
        }
        if f < 2 {
            return Err(ConfigError::ArityTooSmall(f));
        }
        if f > MAX_EDGE_ARITY {
            return Err(ConfigError::ArityTooLarge(f));
        }
        let alpha = 1 + 36 * (f as u64) * (f as u64) * BETA * BETA;
        let level_cap = level_cap(n, f);
        let approx_factor = (f as u64) * alpha * BETA * BETA;
        Ok(Config {
            n,
            f,
            alpha,
            level_cap,
            approx_factor,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Maximum hyperedge cardinality.
    pub fn f(&self) -> u32 {
        self.f
    }

    pub fn beta(&self) -> u64 {
        BETA
    }

    pub fn alpha(&self) -> u64 {
        self.alpha
    }

    /// Highest node level; levels range over `0..=level_cap`.
    pub fn level_cap(&self) -> u32 {
        self.level_cap
    }

    /// Worst-case ratio between the maintained cover and a minimum one.
    pub fn approx_factor(&self) -> u64 {
        self.approx_factor
    }
}

/// Smallest `k` with `beta^k >= n^f`, plus one. Exact: a power ladder in big
/// integers, so `n^f` landing exactly on a power of beta is handled right.
fn level_cap(n: u32, f: u32) -> u32 {
    let target = BigUint::from(n).pow(f);
    let beta = BigUint::from(BETA);
    let mut pow = BigUint::from(1u32);
    let mut k = 0u32;
    while pow < target {
        pow *= &beta;
        k += 1;
    }
    k + 1
}
