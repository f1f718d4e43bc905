//! Update counters and the exact inequalities they obey.
//!
//! The ledger tracks, per graph instance: update count, edges touched by
//! upward and downward node moves, a per-level histogram of downward jumps,
//! and an elementary-operation tally. The downward-jump credit is the exact
//! rational `sum_i D[i] beta^(i-2) / alpha`, carried as the integer numerator
//! `sum_i D[i] beta^i` over denominator `alpha beta^2`. Every inequality is
//! checked with cleared denominators in big integers, never floats.

use num_bigint::BigUint;

use crate::config::{Config, BETA};

/// Monotone counters for one graph instance.
#[derive(Debug, Clone)]
pub struct CounterLedger {
    updates: u64,
    up_touches: u64,
    down_touches: u64,
    up_jumps: u64,
    down_hist: Vec<u64>,
    elementary_ops: u64,
}

impl CounterLedger {
    pub fn new(level_cap: u32) -> Self {
        CounterLedger {
            updates: 0,
            up_touches: 0,
            down_touches: 0,
            up_jumps: 0,
            down_hist: vec![0; level_cap as usize + 1],
            elementary_ops: 0,
        }
    }

    pub(crate) fn record_update(&mut self, arity: u64) {
        self.updates += 1;
        self.elementary_ops += arity;
    }

    pub(crate) fn record_up_jump(&mut self, touched: u64) {
        self.up_jumps += 1;
        self.up_touches += touched;
    }

    pub(crate) fn record_down_jump(&mut self, from_level: u32, touched: u64) {
        debug_assert!(from_level >= 1, "downward jumps start above the floor");
        self.down_hist[from_level as usize] += 1;
        self.down_touches += touched;
    }

    pub(crate) fn ops(&mut self, count: u64) {
        self.elementary_ops += count;
    }

    /// Total updates applied (inserts plus deletes).
    pub fn updates(&self) -> u64 {
        self.updates
    }

    /// Edges touched across all upward moves.
    pub fn up_touches(&self) -> u64 {
        self.up_touches
    }

    /// Edges touched across all downward moves.
    pub fn down_touches(&self) -> u64 {
        self.down_touches
    }

    pub fn up_jumps(&self) -> u64 {
        self.up_jumps
    }

    pub fn down_jumps(&self) -> u64 {
        self.down_hist.iter().sum()
    }

    /// Downward jumps recorded from each level.
    pub fn down_hist(&self) -> &[u64] {
        &self.down_hist
    }

    pub fn elementary_ops(&self) -> u64 {
        self.elementary_ops
    }

    /// Numerator of the downward-jump credit: `sum_i D[i] beta^i`.
    /// The denominator is `alpha beta^2`.
    pub fn down_credit_numerator(&self) -> BigUint {
        let beta = BigUint::from(BETA);
        let mut acc = BigUint::from(0u32);
        let mut pow = BigUint::from(1u32);
        for &count in &self.down_hist {
            if count != 0 {
                acc += count * &pow;
            }
            pow *= &beta;
        }
        acc
    }

    pub fn down_credit_denominator(&self, cfg: &Config) -> u64 {
        cfg.alpha() * BETA * BETA
    }
}

/// One checked inequality, with both sides rendered for reporting.
#[derive(Debug, Clone)]
pub struct CounterCheck {
    pub name: &'static str,
    pub holds: bool,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone, Default)]
pub struct CounterReport {
    pub checks: Vec<CounterCheck>,
}

impl CounterReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn first_violation(&self) -> Option<&CounterCheck> {
        self.checks.iter().find(|c| !c.holds)
    }
}

fn push(report: &mut CounterReport, name: &'static str, lhs: BigUint, rhs: BigUint) {
    report.checks.push(CounterCheck {
        holds: lhs <= rhs,
        lhs: lhs.to_string(),
        rhs: rhs.to_string(),
        name,
    });
}

/// Checks the counter inequalities the maintenance algorithm guarantees.
///
/// On any trace that started from an empty graph:
/// * `down-touches-vs-credit`: `C_down <= I_down`, cleared to
///   `C_down * alpha beta^2 <= sum_i D[i] beta^i`.
/// * `credit-vs-updates-and-up`: `I_down <= f/(alpha-1) * (T + C_up)`,
///   cleared to `(alpha-1) * sum_i D[i] beta^i <= alpha f beta^2 (T + C_up)`.
///
/// Only when the graph is empty again (`end_empty`), so every raise has been
/// paid back by deletions:
/// * `up-touches-vs-down`: `C_up <= 9 f beta^2 (T + C_down)`.
/// * `up-touches-vs-updates`: `C_up <= 13 f beta^2 T`.
pub fn check_counters(ledger: &CounterLedger, cfg: &Config, end_empty: bool) -> CounterReport {
    let mut report = CounterReport::default();
    let f = BigUint::from(cfg.f());
    let alpha = BigUint::from(cfg.alpha());
    let beta_sq = BigUint::from(BETA * BETA);
    let credit_num = ledger.down_credit_numerator();

    push(
        &mut report,
        "down-touches-vs-credit",
        ledger.down_touches * &alpha * &beta_sq,
        credit_num.clone(),
    );
    push(
        &mut report,
        "credit-vs-updates-and-up",
        (&alpha - 1u32) * &credit_num,
        &alpha * &f * &beta_sq * (ledger.updates + ledger.up_touches),
    );
    if end_empty {
        push(
            &mut report,
            "up-touches-vs-down",
            BigUint::from(ledger.up_touches),
            9u32 * &f * &beta_sq * (ledger.updates + ledger.down_touches),
        );
        push(
            &mut report,
            "up-touches-vs-updates",
            BigUint::from(ledger.up_touches),
            13u32 * &f * &beta_sq * ledger.updates,
        );
    }
    report
}

/// Checks the measured-constant running-time bound
/// `elementary_ops <= c * (f (T + C_up + C_down) + f^2 I_down)`,
/// cleared by `alpha beta^2`. Meaningful on traces that end empty.
pub fn check_time_bound(ledger: &CounterLedger, cfg: &Config, c: u64) -> CounterCheck {
    let f = BigUint::from(cfg.f());
    let scale = BigUint::from(cfg.alpha() * BETA * BETA);
    let lhs = ledger.elementary_ops * &scale;
    let linear = &scale * &f * (ledger.updates + ledger.up_touches + ledger.down_touches);
    let credit = &f * &f * ledger.down_credit_numerator();
    let rhs = c * (linear + credit);
    CounterCheck {
        name: "ops-vs-amortized-bound",
        holds: lhs <= rhs,
        lhs: lhs.to_string(),
        rhs: rhs.to_string(),
    }
}

/// Generous elementary-operation budget used to turn a runaway settle loop
/// into a loud failure when verification is on: `10^6 * f^2 * (T + 1)`.
pub fn ops_budget(f: u32, updates: u64) -> u64 {
    1_000_000u64
        .saturating_mul((f as u64) * (f as u64))
        .saturating_mul(updates.saturating_add(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> Config {
        Config::new(100, 2).unwrap()
    }

    #[test]
    fn credit_accumulates_per_level() {
        let mut ledger = CounterLedger::new(5);
        ledger.record_down_jump(1, 0);
        ledger.record_down_jump(1, 0);
        ledger.record_down_jump(3, 4);
        // 2 * 17 + 1 * 17^3 = 4947
        assert_eq!(ledger.down_credit_numerator(), BigUint::from(4947u64));
        assert_eq!(ledger.down_credit_denominator(&cfg()), 41_617 * 289);
        assert_eq!(ledger.down_touches(), 4);
        assert_eq!(ledger.down_jumps(), 3);
    }

    #[test]
    fn single_edge_trace_counters_satisfy_all_checks() {
        // T=2, one up-touch, two down-jumps from level 1 touching nothing.
        let mut ledger = CounterLedger::new(2);
        ledger.record_update(2);
        ledger.record_up_jump(1);
        ledger.record_up_jump(0);
        ledger.record_update(2);
        ledger.record_down_jump(1, 0);
        ledger.record_down_jump(1, 0);
        let report = check_counters(&ledger, &cfg(), true);
        assert_eq!(report.checks.len(), 4);
        assert!(report.all_hold(), "{:?}", report.first_violation());
    }

    #[test]
    fn tampered_ledger_is_caught() {
        let mut ledger = CounterLedger::new(5);
        ledger.record_update(2);
        // Claim five touched edges on a downward jump that banked credit for
        // at most beta^(1-2)/alpha of work.
        ledger.record_down_jump(1, 5);
        let report = check_counters(&ledger, &cfg(), false);
        let bad = report.first_violation().expect("violation detected");
        assert_eq!(bad.name, "down-touches-vs-credit");
        assert!(!report.all_hold());
    }

    #[test]
    fn up_bounds_only_apply_on_empty_end_state() {
        let mut ledger = CounterLedger::new(5);
        ledger.record_update(2);
        let open = check_counters(&ledger, &cfg(), false);
        assert_eq!(open.checks.len(), 2);
        let closed = check_counters(&ledger, &cfg(), true);
        assert_eq!(closed.checks.len(), 4);
    }

    #[test]
    fn budget_is_generous_and_saturating() {
        assert_eq!(ops_budget(2, 0), 4_000_000);
        assert_eq!(ops_budget(3, 10), 99_000_000);
        assert_eq!(ops_budget(255, u64::MAX), u64::MAX);
    }

    #[test]
    fn time_bound_check_clears_denominators() {
        let mut ledger = CounterLedger::new(5);
        ledger.record_update(2);
        ledger.record_up_jump(1);
        ledger.ops(7);
        let ok = check_time_bound(&ledger, &cfg(), 4);
        // 7 * scale <= 4 * (scale * 2 * 3) with zero credit.
        assert!(ok.holds);
        let tight = check_time_bound(&ledger, &cfg(), 1);
        assert!(!tight.holds);
    }
}
