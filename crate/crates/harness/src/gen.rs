//! Deterministic workload generators. A fixed seed yields a byte-identical
//! trace; every emitted delete references a live id and no two live edges
//! share a vertex set, so generated traces always parse and replay cleanly.

use std::collections::{HashSet, VecDeque};

use hypercover_core::{Config, ConfigError, Update};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::trace::Trace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum TraceKind {
    /// Mixed inserts and deletes with a bounded live-edge count.
    RandomChurn,
    /// Insert every step once warm, deleting the oldest edge to hold the
    /// live count at the window size.
    SlidingWindow,
    /// Grow a star on node 0, then tear it down, repeatedly; hammers raises
    /// and drops of the hub.
    StarYoyo,
    /// First half inserts distinct edges, second half deletes them all;
    /// starts and ends empty.
    InsertAllDeleteAll,
}

#[derive(Debug, Clone)]
pub struct GenOptions {
    pub n: u32,
    pub f: u32,
    pub updates: u64,
    pub seed: u64,
    pub kind: TraceKind,
    /// Live-edge target for sliding-window; defaults to `min(n, pool/2)`.
    pub window: Option<u64>,
}

#[derive(Debug, Error)]
pub enum GenError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("infeasible generator parameters: {0}")]
    Infeasible(String),
}

/// Number of distinct vertex sets of size 2..=f over n vertices, saturating.
fn distinct_edges(n: u32, f: u32) -> u64 {
    let mut total: u64 = 0;
    for k in 2..=f.min(n) {
        let mut c: u64 = 1;
        for i in 0..k as u64 {
            c = match c.checked_mul(n as u64 - i) {
                Some(x) => x / (i + 1),
                None => return u64::MAX,
            };
            // Dividing stepwise keeps intermediate products small; the
            // running value after step i is C(n, i+1) * something bounded,
            // and the final value is exact because C(n, j) divides the
            // product of j consecutive integers.
        }
        total = total.saturating_add(c);
    }
    total
}

pub fn generate(opts: &GenOptions) -> Result<Trace, GenError> {
    let cfg = Config::new(opts.n, opts.f)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let updates = match opts.kind {
        TraceKind::RandomChurn => random_churn(&cfg, opts.updates, &mut rng),
        TraceKind::SlidingWindow => sliding_window(&cfg, opts, &mut rng)?,
        TraceKind::StarYoyo => star_yoyo(&cfg, opts.updates),
        TraceKind::InsertAllDeleteAll => insert_all_delete_all(&cfg, opts, &mut rng)?,
    };
    Ok(Trace {
        n: opts.n,
        f: opts.f,
        updates,
    })
}

/// A fresh vertex set not currently in `used`, sorted ascending.
fn fresh_edge(cfg: &Config, rng: &mut ChaCha8Rng, used: &HashSet<Vec<u32>>) -> Vec<u32> {
    loop {
        let arity = rng.gen_range(2..=cfg.f());
        let mut vs: Vec<u32> = Vec::with_capacity(arity as usize);
        while vs.len() < arity as usize {
            let v = rng.gen_range(0..cfg.n());
            if !vs.contains(&v) {
                vs.push(v);
            }
        }
        vs.sort_unstable();
        if !used.contains(&vs) {
            return vs;
        }
    }
}

fn random_churn(cfg: &Config, updates: u64, rng: &mut ChaCha8Rng) -> Vec<Update> {
    // Cap the live count well under the distinct pool so fresh draws stay
    // cheap, but keep enough density that nodes climb levels.
    let pool = distinct_edges(cfg.n(), cfg.f());
    let cap = (pool / 2).clamp(1, (cfg.n() as u64).max(8));
    let mut live_ids: Vec<u64> = Vec::new();
    let mut live_keys: HashSet<Vec<u32>> = HashSet::new();
    let mut key_of: Vec<Vec<u32>> = Vec::new();
    let mut out = Vec::with_capacity(updates as usize);
    while (out.len() as u64) < updates {
        let must_delete = live_ids.len() as u64 >= cap;
        let may_delete = !live_ids.is_empty();
        if must_delete || (may_delete && rng.gen_bool(0.45)) {
            let idx = rng.gen_range(0..live_ids.len());
            let id = live_ids.swap_remove(idx);
            live_keys.remove(&key_of[id as usize - 1]);
            out.push(Update::Delete(id));
        } else {
            let vs = fresh_edge(cfg, rng, &live_keys);
            live_keys.insert(vs.clone());
            key_of.push(vs.clone());
            live_ids.push(key_of.len() as u64);
            out.push(Update::Insert(vs));
        }
    }
    out
}

fn sliding_window(
    cfg: &Config,
    opts: &GenOptions,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Update>, GenError> {
    let pool = distinct_edges(cfg.n(), cfg.f());
    let window = opts.window.unwrap_or((cfg.n() as u64).min(pool / 2).max(1));
    if window == 0 {
        return Err(GenError::Infeasible("window must be positive".into()));
    }
    if window > pool / 2 {
        return Err(GenError::Infeasible(format!(
            "window {window} too close to the {pool} distinct edges over n={}, f={}",
            cfg.n(),
            cfg.f()
        )));
    }
    let mut oldest: VecDeque<u64> = VecDeque::new();
    let mut live_keys: HashSet<Vec<u32>> = HashSet::new();
    let mut key_of: Vec<Vec<u32>> = Vec::new();
    let mut out = Vec::with_capacity(opts.updates as usize);
    while (out.len() as u64) < opts.updates {
        if (oldest.len() as u64) < window {
            let vs = fresh_edge(cfg, rng, &live_keys);
            live_keys.insert(vs.clone());
            key_of.push(vs.clone());
            oldest.push_back(key_of.len() as u64);
            out.push(Update::Insert(vs));
        } else {
            let id = oldest.pop_front().unwrap();
            live_keys.remove(&key_of[id as usize - 1]);
            out.push(Update::Delete(id));
        }
    }
    Ok(out)
}

fn star_yoyo(cfg: &Config, updates: u64) -> Vec<Update> {
    // Enough leaves to push the hub past level 1 when n allows it.
    let leaves = (cfg.n() as u64 - 1).min(2 * 17 * 17);
    let mut out = Vec::with_capacity(updates as usize);
    let mut next_id: u64 = 1;
    'outer: loop {
        let first = next_id;
        for leaf in 1..=leaves {
            if out.len() as u64 >= updates {
                break 'outer;
            }
            out.push(Update::Insert(vec![0, leaf as u32]));
            next_id += 1;
        }
        for id in first..next_id {
            if out.len() as u64 >= updates {
                break 'outer;
            }
            out.push(Update::Delete(id));
        }
    }
    out
}

fn insert_all_delete_all(
    cfg: &Config,
    opts: &GenOptions,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Update>, GenError> {
    if opts.updates % 2 != 0 {
        return Err(GenError::Infeasible(
            "insert-all-delete-all needs an even update count to end empty".into(),
        ));
    }
    let m = opts.updates / 2;
    let pool = distinct_edges(cfg.n(), cfg.f());
    if m > pool / 2 {
        return Err(GenError::Infeasible(format!(
            "{m} simultaneous distinct edges wanted, only {pool} exist over n={}, f={}",
            cfg.n(),
            cfg.f()
        )));
    }
    let mut keys: HashSet<Vec<u32>> = HashSet::new();
    let mut out = Vec::with_capacity(opts.updates as usize);
    for _ in 0..m {
        let vs = fresh_edge(cfg, rng, &keys);
        keys.insert(vs.clone());
        out.push(Update::Insert(vs));
    }
    for id in 1..=m {
        out.push(Update::Delete(id));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(kind: TraceKind, n: u32, f: u32, updates: u64, seed: u64) -> GenOptions {
        GenOptions {
            n,
            f,
            updates,
            seed,
            kind,
            window: None,
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        for kind in [
            TraceKind::RandomChurn,
            TraceKind::SlidingWindow,
            TraceKind::StarYoyo,
            TraceKind::InsertAllDeleteAll,
        ] {
            let a = generate(&opts(kind, 30, 3, 200, 9)).unwrap();
            let b = generate(&opts(kind, 30, 3, 200, 9)).unwrap();
            assert_eq!(a.to_text(), b.to_text());
        }
        let a = generate(&opts(TraceKind::RandomChurn, 30, 3, 200, 9)).unwrap();
        let b = generate(&opts(TraceKind::RandomChurn, 30, 3, 200, 10)).unwrap();
        assert_ne!(a.to_text(), b.to_text());
    }

    #[test]
    fn generated_traces_reparse() {
        for kind in [
            TraceKind::RandomChurn,
            TraceKind::SlidingWindow,
            TraceKind::StarYoyo,
            TraceKind::InsertAllDeleteAll,
        ] {
            let t = generate(&opts(kind, 20, 3, 300, 4)).unwrap();
            assert_eq!(t.updates.len(), 300);
            let reparsed = Trace::parse(&t.to_text()).unwrap();
            assert_eq!(reparsed, t);
        }
    }

    #[test]
    fn insert_all_delete_all_ends_empty() {
        let t = generate(&opts(TraceKind::InsertAllDeleteAll, 50, 2, 400, 1)).unwrap();
        assert_eq!(t.live_at_end(), 0);
        assert!(matches!(t.updates[0], Update::Insert(_)));
        assert!(matches!(t.updates[399], Update::Delete(_)));
    }

    #[test]
    fn sliding_window_live_count_oscillates_at_the_window() {
        let t = generate(&GenOptions {
            window: Some(25),
            ..opts(TraceKind::SlidingWindow, 40, 2, 500, 2)
        })
        .unwrap();
        let mut live = 0i64;
        let mut peak = 0i64;
        for (i, u) in t.updates.iter().enumerate() {
            match u {
                Update::Insert(_) => live += 1,
                Update::Delete(_) => live -= 1,
            }
            peak = peak.max(live);
            assert!(live <= 25, "live count exceeded the window at update {i}");
            if i >= 50 {
                assert!(live >= 24, "window drained at update {i}");
            }
        }
        assert_eq!(peak, 25);
    }

    #[test]
    fn star_yoyo_cycles_through_the_hub() {
        let t = generate(&opts(TraceKind::StarYoyo, 6, 2, 24, 0)).unwrap();
        // 5 leaves: ids 1..=5 inserted, then deleted, then the cycle repeats
        // under fresh ids.
        assert_eq!(t.updates[0], Update::Insert(vec![0, 1]));
        assert_eq!(t.updates[5], Update::Delete(1));
        assert_eq!(t.updates[10], Update::Insert(vec![0, 1]));
        assert_eq!(t.live_at_end(), 4);
    }

    #[test]
    fn infeasible_parameters_are_rejected() {
        assert!(matches!(
            generate(&opts(TraceKind::InsertAllDeleteAll, 5, 2, 100, 0)),
            Err(GenError::Infeasible(_))
        ));
        assert!(matches!(
            generate(&opts(TraceKind::InsertAllDeleteAll, 5, 2, 101, 0)),
            Err(GenError::Infeasible(_))
        ));
        assert!(matches!(
            generate(&GenOptions {
                window: Some(1000),
                ..opts(TraceKind::SlidingWindow, 10, 2, 100, 0)
            }),
            Err(GenError::Infeasible(_))
        ));
        assert!(matches!(
            generate(&opts(TraceKind::RandomChurn, 1, 2, 10, 0)),
            Err(GenError::Config(_))
        ));
    }

    #[test]
    fn distinct_edge_pool_counts() {
        assert_eq!(distinct_edges(5, 2), 10);
        assert_eq!(distinct_edges(5, 3), 20);
        assert_eq!(distinct_edges(6, 4), 15 + 20 + 15);
        assert_eq!(
            distinct_edges(100_000, 3),
            u64::MAX.min(4999950000 + 166661666700000)
        );
    }
}
