//! Independent validation of everything the maintained structure claims.
//!
//! Nothing here reuses the incremental bookkeeping: weights, edge levels,
//! and bucket occupancy are recomputed from the live edge list, the
//! optimum cover comes from subset enumeration, and the counter inequalities
//! are evaluated in exact arithmetic. Checkers return `Err` with a
//! description of the first violation instead of panicking, so callers can
//! decide whether a failure aborts a test or fails a run.

use num_bigint::BigUint;

use crate::accounting;
use crate::graph::{EdgeId, Graph, NodeId, Update};
use crate::naive::{NaiveGraph, SchedulerOrder};
use crate::weight::{FixedWeight, Threshold};

use std::cmp::Ordering;

/// Largest instance the subset-enumeration optimum will attempt.
pub const BRUTE_FORCE_NODE_LIMIT: u32 = 20;

/// Every derived quantity, evaluated from scratch off the live edge list
/// and the node levels: per-node incident weight and above-level weight,
/// and per-edge effective level.
pub struct ReferenceState {
    pub levels: Vec<u32>,
    pub weights: Vec<FixedWeight>,
    pub up_weights: Vec<FixedWeight>,
    pub edge_levels: Vec<(EdgeId, u32)>,
}

pub fn recompute_state(g: &Graph) -> ReferenceState {
    let cfg = g.config();
    let n = cfg.n() as usize;
    let ctx = g.weight_ctx();
    let levels: Vec<u32> = (0..cfg.n()).map(|v| g.level(v)).collect();
    let mut weights = vec![BigUint::from(0u32); n];
    let mut up_weights = vec![BigUint::from(0u32); n];
    let mut edge_levels = Vec::new();
    for (id, ends, _) in g.live_edges() {
        let lvl = ends.iter().map(|&u| levels[u as usize]).max().unwrap();
        edge_levels.push((id, lvl));
        let w = ctx.pow(lvl).to_biguint();
        for &u in ends {
            weights[u as usize] += &w;
            if lvl > levels[u as usize] {
                up_weights[u as usize] += &w;
            }
        }
    }
    ReferenceState {
        levels,
        weights: weights.into_iter().map(|w| ctx.from_biguint(w)).collect(),
        up_weights: up_weights
            .into_iter()
            .map(|w| ctx.from_biguint(w))
            .collect(),
        edge_levels,
    }
}

/// Full structural audit: the reference recomputation must agree with every
/// maintained quantity, including bucket occupancy.
pub fn check_structure(g: &Graph) -> Result<(), String> {
    let cfg = g.config();
    let n = cfg.n() as usize;
    let cap = cfg.level_cap();
    let ctx = g.weight_ctx();

    let mut occupancy = vec![0u32; n * (cap as usize + 1)];
    let mut live = 0u64;
    for (id, ends, lvl) in g.live_edges() {
        live += 1;
        if ends.len() < 2 || ends.len() > cfg.f() as usize {
            return Err(format!("edge {id} has arity {}", ends.len()));
        }
        if ends.windows(2).any(|p| p[0] >= p[1]) {
            return Err(format!("edge {id} endpoints not sorted and distinct"));
        }
        if ends.iter().any(|&u| u >= cfg.n()) {
            return Err(format!("edge {id} has an out-of-range endpoint"));
        }
        for &u in ends {
            occupancy[u as usize * (cap as usize + 1) + lvl as usize] += 1;
        }
    }
    if live != g.live_edge_count() {
        return Err(format!(
            "live edge count {} disagrees with recount {live}",
            g.live_edge_count()
        ));
    }

    let reference = recompute_state(g);
    for (id, lvl) in &reference.edge_levels {
        if g.edge_level(*id) != Some(*lvl) {
            return Err(format!(
                "edge {id} stored at level {:?}, endpoints say {lvl}",
                g.edge_level(*id)
            ));
        }
    }
    for v in 0..cfg.n() {
        let vi = v as usize;
        if g.level(v) > cap {
            return Err(format!("node {v} above the level cap"));
        }
        if g.node_weight(v) != reference.weights[vi] {
            return Err(format!(
                "node {v} weight {} disagrees with recomputation {}",
                ctx.render(&g.node_weight(v)),
                ctx.render(&reference.weights[vi])
            ));
        }
        if g.up_weight(v) != reference.up_weights[vi] {
            return Err(format!("node {v} above-level weight disagrees"));
        }
        for lvl in 0..=cap {
            let have = g.bucket_count(v, lvl);
            let want = occupancy[vi * (cap as usize + 1) + lvl as usize];
            if have != want {
                return Err(format!(
                    "node {v} bucket {lvl} holds {have} edges, recount says {want}"
                ));
            }
            if lvl < g.level(v) && have != 0 {
                return Err(format!("node {v} has edges below its own level"));
            }
        }
    }
    Ok(())
}

/// Panicking wrapper for tests.
pub fn assert_consistent(g: &Graph) {
    if let Err(msg) = check_structure(g) {
        panic!("structure check failed: {msg}");
    }
}

/// The steady-state guarantees that must hold between updates: weight
/// window per node, every edge covered, fractional matching feasible.
pub fn check_quiescent_invariants(g: &Graph) -> Result<(), String> {
    if !g.is_quiescent() {
        return Err("structure still has flagged nodes".into());
    }
    let ctx = g.weight_ctx();
    for v in 0..g.config().n() {
        let w = g.node_weight(v);
        if g.level(v) == 0 {
            if ctx.cmp_threshold(&w, Threshold::InvBetaSq) == Ordering::Greater {
                return Err(format!("floor node {v} over 1/beta^2"));
            }
        } else {
            if ctx.cmp_threshold(&w, Threshold::InvAlphaBetaSq) != Ordering::Greater {
                return Err(format!(
                    "node {v} at level {} under 1/(alpha beta^2)",
                    g.level(v)
                ));
            }
            if ctx.cmp_threshold(&w, Threshold::One) != Ordering::Less {
                return Err(format!("node {v} at level {} at or over 1", g.level(v)));
            }
        }
        if ctx.cmp_threshold(&w, Threshold::One) == Ordering::Greater {
            return Err(format!("node {v} infeasible for the matching"));
        }
    }
    for (id, _, lvl) in g.live_edges() {
        if lvl == 0 {
            return Err(format!("edge {id} has no endpoint above the floor"));
        }
    }
    Ok(())
}

/// Minimum vertex cover by subset enumeration, smallest subsets first and
/// ascending bitmask within a size, so the witness is deterministic.
/// `None` when the instance exceeds [`BRUTE_FORCE_NODE_LIMIT`].
pub fn brute_force_min_vertex_cover(g: &Graph) -> Option<(u64, Vec<NodeId>)> {
    let n = g.config().n();
    if n > BRUTE_FORCE_NODE_LIMIT {
        return None;
    }
    let edge_masks: Vec<u32> = g
        .live_edges()
        .map(|(_, ends, _)| ends.iter().fold(0u32, |m, &u| m | 1 << u))
        .collect();
    let full: u32 = if n == 32 { u32::MAX } else { (1 << n) - 1 };
    for size in 0..=n {
        // Ascending masks of the given popcount via the next-combination trick.
        let mut mask: u32 = if size == 0 { 0 } else { (1 << size) - 1 };
        loop {
            if edge_masks.iter().all(|&e| e & mask != 0) {
                let witness = (0..n).filter(|&v| mask & (1 << v) != 0).collect();
                return Some((size as u64, witness));
            }
            if size == 0 {
                break;
            }
            let c = mask & mask.wrapping_neg();
            let r = mask + c;
            let next = (((r ^ mask) >> 2) / c) | r;
            if next > full {
                break;
            }
            mask = next;
        }
    }
    unreachable!("the full vertex set covers everything");
}

/// Outcome of [`check_approximation`]: the maintained cover size, the exact
/// optimum when the instance is small enough to enumerate, and the
/// empirical ratio between them (`None` when the optimum is unavailable or
/// zero).
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxReport {
    pub cover_size: u64,
    pub optimum: Option<u64>,
    pub ratio: Option<f64>,
}

/// The approximation contract, clause by clause in exact arithmetic:
/// (a) the matching is feasible (W_v <= 1 everywhere, part of the
/// steady-state invariants); (b) the cover is within `f * alpha * beta^2`
/// of the matching value, established through its two halves: the summed
/// cover weight strictly exceeds `|cover| / (alpha beta^2)`, and is at most
/// `f` times the matching value; (c) on enumerable instances the cover is
/// within the same factor of the true optimum, with the matching value a
/// lower bound on that optimum (weak duality through the integral cover).
pub fn check_approximation(g: &Graph) -> Result<ApproxReport, String> {
    check_quiescent_invariants(g)?;
    let cfg = g.config();
    let ctx = g.weight_ctx();
    let den = ctx.denominator().clone();
    let matching = g.matching_value().to_biguint();
    let cover = g.vertex_cover();
    let cover_size = cover.len() as u64;
    let cover_weight: BigUint = cover.iter().map(|&v| g.node_weight(v).to_biguint()).sum();
    let alpha_beta_sq = BigUint::from(cfg.alpha()) * (crate::config::BETA * crate::config::BETA);
    if cover_size > 0 {
        if cover_weight.clone() * &alpha_beta_sq <= BigUint::from(cover_size) * &den {
            return Err("summed cover weight not above |cover| / (alpha beta^2)".into());
        }
        if BigUint::from(cover_size) * &den >= BigUint::from(cfg.approx_factor()) * &matching {
            return Err(format!(
                "cover size {cover_size} not under {} times the matching value",
                cfg.approx_factor()
            ));
        }
    }
    if cover_weight > BigUint::from(cfg.f() as u64) * &matching {
        return Err("summed cover weight exceeds f times the matching value".into());
    }

    let mut optimum = None;
    if let Some((opt, witness)) = brute_force_min_vertex_cover(g) {
        let witness_mask = witness.iter().fold(0u32, |m, &u| m | 1 << u);
        for (id, ends, _) in g.live_edges() {
            if ends.iter().all(|&u| witness_mask & (1 << u) == 0) {
                return Err(format!("optimum witness misses edge {id}"));
            }
        }
        if matching > BigUint::from(opt) * &den {
            return Err(format!(
                "matching value {} exceeds the optimum cover {opt}",
                ctx.render(&g.matching_value())
            ));
        }
        if opt > g.cover_size() {
            return Err(format!(
                "optimum {opt} larger than the maintained cover {cover_size}"
            ));
        }
        if BigUint::from(cover_size) > BigUint::from(cfg.approx_factor()) * opt {
            return Err(format!(
                "cover size {cover_size} beyond {} times the optimum {opt}",
                cfg.approx_factor()
            ));
        }
        optimum = Some(opt);
    }
    let ratio = match optimum {
        Some(opt) if opt > 0 => Some(cover_size as f64 / opt as f64),
        _ => None,
    };
    Ok(ApproxReport {
        cover_size,
        optimum,
        ratio,
    })
}

/// Counter inequalities in exact arithmetic; the two end-state bounds are
/// included only when the graph is empty.
pub fn check_counter_lemmas(g: &Graph) -> Result<(), String> {
    let report = accounting::check_counters(g.ledger(), g.config(), g.live_edge_count() == 0);
    match report.first_violation() {
        None => Ok(()),
        Some(check) => Err(format!(
            "counter inequality '{}' fails: {} vs {}",
            check.name, check.lhs, check.rhs
        )),
    }
}

/// Everything at once: structure, steady-state invariants, counters.
pub fn run_full_checks(g: &Graph) -> Result<(), String> {
    check_structure(g)?;
    check_quiescent_invariants(g)?;
    check_counter_lemmas(g)
}

/// Replays `updates` on the real structure and the recompute-everything
/// twin in lockstep and compares the complete observable state after every
/// step. With [`SchedulerOrder::Lifo`] the states must match exactly; other
/// orders may legitimately diverge.
pub fn differential_run(
    n: u32,
    f: u32,
    updates: &[Update],
    order: SchedulerOrder,
) -> Result<(), String> {
    let mut real = Graph::new(n, f).map_err(|e| e.to_string())?;
    let mut naive = NaiveGraph::new(n, f, order).map_err(|e| e.to_string())?;
    let mut next_edge = 0u64;
    for (step, update) in updates.iter().enumerate() {
        let a = real
            .apply(update)
            .map_err(|e| format!("step {step}: {e}"))?;
        let b = naive
            .apply(update)
            .map_err(|e| format!("naive step {step}: {e}"))?;
        if a != b {
            return Err(format!("step {step}: edge ids diverge ({a:?} vs {b:?})"));
        }
        if let Some(id) = a {
            next_edge = next_edge.max(id);
        }
        if !real.is_quiescent() || !naive.is_quiescent() {
            return Err(format!("step {step}: a structure is not quiescent"));
        }
        for v in 0..n {
            if real.level(v) != naive.level(v) {
                return Err(format!(
                    "step {step}: node {v} level {} vs {}",
                    real.level(v),
                    naive.level(v)
                ));
            }
            if real.node_weight(v) != naive.node_weight(v) {
                return Err(format!("step {step}: node {v} weight diverges"));
            }
        }
        for id in 1..=next_edge {
            if real.edge_level(id) != naive.edge_level(id) {
                return Err(format!(
                    "step {step}: edge {id} level {:?} vs {:?}",
                    real.edge_level(id),
                    naive.edge_level(id)
                ));
            }
        }
        if real.matching_value() != naive.matching_value() {
            return Err(format!("step {step}: matching value diverges"));
        }
        if real.vertex_cover() != naive.vertex_cover() {
            return Err(format!("step {step}: cover diverges"));
        }
    }
    Ok(())
}
