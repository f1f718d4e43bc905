//! Exact weight arithmetic in units of `beta^-L`.
//!
//! Every weight in the structure is a nonnegative integer numerator over the
//! fixed denominator `beta^L`, so sums and comparisons are exact; no floats
//! appear anywhere. A `WeightCtx` freezes the denominator and the power table
//! `beta^(L-i)` for one instance and chooses the numerator representation:
//! `u128` when every product a threshold comparison can form provably fits
//! (`2 beta^L alpha <= u128::MAX`), arbitrary precision otherwise.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::config::Config;

/// Numerator over the instance denominator `beta^L`.
///
/// Both variants order and compare by numeric value; a `Small` and a `Big`
/// holding the same numerator are equal. Within one `WeightCtx` all values
/// share a variant, so the promotion path is cold.
#[derive(Debug, Clone)]
pub enum FixedWeight {
    Small(u128),
    Big(BigUint),
}

/// Numerator representation for one instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumeratorRepr {
    U128,
    Big,
}

/// Comparison thresholds used by the maintenance algorithm. All four are
/// checked exactly by cross-multiplication against the numerator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threshold {
    /// 1
    One,
    /// 1/beta
    InvBeta,
    /// 1/beta^2
    InvBetaSq,
    /// 1/(alpha beta^2)
    InvAlphaBetaSq,
}

impl FixedWeight {
    pub fn to_biguint(&self) -> BigUint {
        match self {
            FixedWeight::Small(v) => BigUint::from(*v),
            FixedWeight::Big(v) => v.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            FixedWeight::Small(v) => *v == 0,
            FixedWeight::Big(v) => v.bits() == 0,
        }
    }
}

impl PartialEq for FixedWeight {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for FixedWeight {}

impl PartialOrd for FixedWeight {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FixedWeight {
    fn cmp(&self, other: &Self) -> Ordering {
        use FixedWeight::*;
        match (self, other) {
            (Small(a), Small(b)) => a.cmp(b),
            (Big(a), Big(b)) => a.cmp(b),
            (Small(a), Big(b)) => BigUint::from(*a).cmp(b),
            (Big(a), Small(b)) => a.cmp(&BigUint::from(*b)),
        }
    }
}

/// Per-instance arithmetic context: the power table `pow[i] = beta^(L-i)` for
/// `i in 0..=L`, plus `alpha` for the mixed threshold.
#[derive(Debug, Clone)]
pub struct WeightCtx {
    level_cap: u32,
    alpha: u64,
    repr: NumeratorRepr,
    pows_small: Vec<u128>,
    pows_big: Vec<BigUint>,
    denominator: BigUint,
}

impl WeightCtx {
    pub fn new(cfg: &Config) -> Self {
        let denominator = BigUint::from(crate::config::BETA).pow(cfg.level_cap());
        let worst_product = 2u32 * &denominator * cfg.alpha();
        let repr = if worst_product.bits() <= 128 {
            NumeratorRepr::U128
        } else {
            NumeratorRepr::Big
        };
        Self::build(cfg, repr, denominator)
    }

    /// Forces a representation regardless of instance size. Exists so the
    /// arbitrary-precision arm can be exercised on small instances; semantics
    /// are identical either way.
    pub fn with_repr(cfg: &Config, repr: NumeratorRepr) -> Self {
        let denominator = BigUint::from(crate::config::BETA).pow(cfg.level_cap());
        if repr == NumeratorRepr::U128 {
            let worst_product = 2u32 * &denominator * cfg.alpha();
            assert!(
                worst_product.bits() <= 128,
                "instance too large for the u128 numerator path"
            );
        }
        Self::build(cfg, repr, denominator)
    }

    fn build(cfg: &Config, repr: NumeratorRepr, denominator: BigUint) -> Self {
        let level_cap = cfg.level_cap();
        let beta = BigUint::from(crate::config::BETA);
        let mut pows_big = Vec::with_capacity(level_cap as usize + 1);
        for i in 0..=level_cap {
            pows_big.push(beta.pow(level_cap - i));
        }
        let pows_small = match repr {
            NumeratorRepr::U128 => pows_big
                .iter()
                .map(|p| p.to_u128().expect("power table exceeds u128"))
                .collect(),
            NumeratorRepr::Big => Vec::new(),
        };
        WeightCtx {
            level_cap,
            alpha: cfg.alpha(),
            repr,
            pows_small,
            pows_big,
            denominator,
        }
    }

    pub fn repr(&self) -> NumeratorRepr {
        self.repr
    }

    pub fn level_cap(&self) -> u32 {
        self.level_cap
    }

    /// The common denominator `beta^L`; numerators are always relative to it.
    pub fn denominator(&self) -> &BigUint {
        &self.denominator
    }

    pub fn zero(&self) -> FixedWeight {
        match self.repr {
            NumeratorRepr::U128 => FixedWeight::Small(0),
            NumeratorRepr::Big => FixedWeight::Big(BigUint::from(0u32)),
        }
    }

    /// The weight `beta^-lvl`, i.e. numerator `beta^(L-lvl)`.
    pub fn pow(&self, lvl: u32) -> FixedWeight {
        assert!(
            lvl <= self.level_cap,
            "level {lvl} beyond cap {}",
            self.level_cap
        );
        match self.repr {
            NumeratorRepr::U128 => FixedWeight::Small(self.pows_small[lvl as usize]),
            NumeratorRepr::Big => FixedWeight::Big(self.pows_big[lvl as usize].clone()),
        }
    }

    pub fn add_pow(&self, w: &mut FixedWeight, lvl: u32) {
        self.add_pow_scaled(w, lvl, 1)
    }

    pub fn sub_pow(&self, w: &mut FixedWeight, lvl: u32) {
        self.sub_pow_scaled(w, lvl, 1)
    }

    /// `w += count * beta^-lvl`, exactly.
    pub fn add_pow_scaled(&self, w: &mut FixedWeight, lvl: u32, count: u64) {
        assert!(
            lvl <= self.level_cap,
            "level {lvl} beyond cap {}",
            self.level_cap
        );
        match w {
            FixedWeight::Small(v) => {
                let delta = (count as u128)
                    .checked_mul(self.pows_small[lvl as usize])
                    .expect("weight numerator overflow");
                *v = v.checked_add(delta).expect("weight numerator overflow");
            }
            FixedWeight::Big(v) => *v += count * &self.pows_big[lvl as usize],
        }
    }

    /// `w -= count * beta^-lvl`; panics on underflow, which would mean the
    /// caller's bookkeeping lost track of an edge.
    pub fn sub_pow_scaled(&self, w: &mut FixedWeight, lvl: u32, count: u64) {
        assert!(
            lvl <= self.level_cap,
            "level {lvl} beyond cap {}",
            self.level_cap
        );
        match w {
            FixedWeight::Small(v) => {
                let delta = (count as u128)
                    .checked_mul(self.pows_small[lvl as usize])
                    .expect("weight numerator overflow");
                *v = v.checked_sub(delta).expect("weight numerator underflow");
            }
            FixedWeight::Big(v) => {
                let delta = count * &self.pows_big[lvl as usize];
                assert!(*v >= delta, "weight numerator underflow");
                *v -= delta;
            }
        }
    }

    /// Exact three-way comparison against a threshold.
    ///
    /// `1/beta^k` thresholds compare the numerator against a power-table
    /// entry directly; `1/(alpha beta^2)` cross-multiplies by `alpha`
    /// (`w > 1/(alpha beta^2)` iff `num * alpha > beta^(L-2)`).
    pub fn cmp_threshold(&self, w: &FixedWeight, t: Threshold) -> Ordering {
        match t {
            Threshold::One => self.cmp_pow_entry(w, 0),
            Threshold::InvBeta => self.cmp_pow_entry(w, 1),
            Threshold::InvBetaSq => self.cmp_pow_entry(w, 2),
            Threshold::InvAlphaBetaSq => match w {
                FixedWeight::Small(v) => match v.checked_mul(self.alpha as u128) {
                    Some(scaled) => scaled.cmp(&self.pows_small[2]),
                    // Out-of-range hypothetical weight; fall back to exact
                    // big-integer comparison.
                    None => (BigUint::from(*v) * self.alpha).cmp(&self.pows_big[2]),
                },
                FixedWeight::Big(v) => (v * self.alpha).cmp(&self.pows_big[2]),
            },
        }
    }

    fn cmp_pow_entry(&self, w: &FixedWeight, idx: usize) -> Ordering {
        match w {
            FixedWeight::Small(v) => v.cmp(&self.pows_small[idx]),
            FixedWeight::Big(v) => v.cmp(&self.pows_big[idx]),
        }
    }

    /// `w < 2`, the hard ceiling every maintained weight stays under.
    pub fn is_below_two(&self, w: &FixedWeight) -> bool {
        match w {
            FixedWeight::Small(v) => *v < 2 * self.pows_small[0],
            FixedWeight::Big(v) => *v < 2u32 * &self.pows_big[0],
        }
    }

    /// Wraps a raw numerator, downcasting into the fast arm when it fits.
    pub fn from_biguint(&self, num: BigUint) -> FixedWeight {
        match self.repr {
            NumeratorRepr::U128 => match num.to_u128() {
                Some(v) => FixedWeight::Small(v),
                None => FixedWeight::Big(num),
            },
            NumeratorRepr::Big => FixedWeight::Big(num),
        }
    }

    /// Renders `numerator/beta^L` with both parts in decimal.
    pub fn render(&self, w: &FixedWeight) -> String {
        format!("{}/{}", w.to_biguint(), self.denominator)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigRational;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn ctx_l5() -> WeightCtx {
        // n=100, f=2 gives L=5, alpha=41617.
        WeightCtx::new(&Config::new(100, 2).unwrap())
    }

    fn ctx_l8() -> WeightCtx {
        WeightCtx::new(&Config::new(5000, 2).unwrap())
    }

    #[test]
    fn power_table_numerators() {
        let ctx = ctx_l5();
        assert_eq!(ctx.pow(0).to_biguint(), BigUint::from(1_419_857u64));
        assert_eq!(ctx.pow(2).to_biguint(), BigUint::from(4_913u64));
        assert_eq!(ctx.pow(5).to_biguint(), BigUint::from(1u64));
    }

    #[test]
    fn threshold_boundaries_are_exact() {
        let ctx = ctx_l5();
        // 1/beta^2 sits strictly above 1/(alpha beta^2) and exactly on
        // the beta^-2 threshold.
        let w = ctx.pow(2);
        assert_eq!(
            ctx.cmp_threshold(&w, Threshold::InvAlphaBetaSq),
            Ordering::Greater
        );
        assert_eq!(ctx.cmp_threshold(&w, Threshold::InvBetaSq), Ordering::Equal);
        assert_eq!(ctx.cmp_threshold(&w, Threshold::InvBeta), Ordering::Less);
    }

    #[test]
    fn alpha_threshold_below_boundary() {
        // 2 * 17^-6 vs 1/(alpha beta^2): 2 * 41617 = 83234 < 83521 = 17^4,
        // so the weight lies below the threshold.
        let ctx = ctx_l8();
        let mut w = ctx.zero();
        ctx.add_pow_scaled(&mut w, 6, 2);
        assert_eq!(
            ctx.cmp_threshold(&w, Threshold::InvAlphaBetaSq),
            Ordering::Less
        );
    }

    #[test]
    fn ceiling_check() {
        let ctx = ctx_l5();
        let mut w = ctx.zero();
        ctx.add_pow_scaled(&mut w, 0, 1);
        assert!(ctx.is_below_two(&w));
        ctx.add_pow(&mut w, 0);
        assert!(!ctx.is_below_two(&w));
    }

    #[test]
    fn rendering_uses_instance_denominator() {
        let ctx = ctx_l5();
        let mut w = ctx.zero();
        ctx.add_pow(&mut w, 1);
        assert_eq!(ctx.render(&w), "83521/1419857");
        assert_eq!(ctx.render(&ctx.zero()), "0/1419857");
    }

    #[test]
    #[should_panic(expected = "underflow")]
    fn subtracting_past_zero_panics() {
        let ctx = ctx_l5();
        let mut w = ctx.pow(3);
        ctx.sub_pow(&mut w, 2);
    }

    #[test]
    fn forced_big_repr_matches_small() {
        let cfg = Config::new(100, 2).unwrap();
        let small = WeightCtx::new(&cfg);
        let big = WeightCtx::with_repr(&cfg, NumeratorRepr::Big);
        assert_eq!(small.repr(), NumeratorRepr::U128);
        let mut a = small.zero();
        let mut b = big.zero();
        for lvl in [0, 3, 3, 5, 1] {
            small.add_pow(&mut a, lvl);
            big.add_pow(&mut b, lvl);
        }
        small.sub_pow(&mut a, 3);
        big.sub_pow(&mut b, 3);
        // Cross-arm equality is by numeric value.
        assert_eq!(a, b);
        assert_eq!(small.render(&a), big.render(&b));
    }

    #[test]
    fn huge_instance_selects_big_repr() {
        // L = 28 here, so 2 * beta^L * alpha needs more than 128 bits.
        let cfg = Config::new(250_000, 6).unwrap();
        assert_eq!(WeightCtx::new(&cfg).repr(), NumeratorRepr::Big);
    }

    /// Independent reference: the same add/sub sequence evaluated as exact
    /// rationals `sum beta^-i`.
    fn rational_of(ops: &[(bool, u32)]) -> BigRational {
        let mut acc = BigRational::from_integer(BigInt::from(0));
        for &(add, lvl) in ops {
            let term = BigRational::new(BigInt::from(1), BigInt::from(17u64).pow(lvl));
            if add {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }

    fn weight_as_rational(ctx: &WeightCtx, w: &FixedWeight) -> BigRational {
        BigRational::new(
            BigInt::from(w.to_biguint()),
            BigInt::from(17u64).pow(ctx.level_cap()),
        )
    }

    /// Interleaved add/sub schedule that never goes negative: adds come from
    /// the raw level stream, subs replay earlier adds.
    fn schedule(levels: &[u32], take: &[bool]) -> Vec<(bool, u32)> {
        let mut pending: Vec<u32> = Vec::new();
        let mut ops = Vec::new();
        let mut take_iter = take.iter().cycle();
        for &lvl in levels {
            ops.push((true, lvl));
            pending.push(lvl);
            if *take_iter.next().unwrap() && !pending.is_empty() {
                let lvl = pending.swap_remove(pending.len() / 2);
                ops.push((false, lvl));
            }
        }
        ops
    }

    proptest! {
        #[test]
        fn add_sub_sequences_match_rational_reference(
            levels in proptest::collection::vec(0u32..=5, 1..40),
            take in proptest::collection::vec(any::<bool>(), 1..8),
        ) {
            let ctx = ctx_l5();
            let ops = schedule(&levels, &take);
            let mut w = ctx.zero();
            for &(add, lvl) in &ops {
                if add { ctx.add_pow(&mut w, lvl) } else { ctx.sub_pow(&mut w, lvl) }
            }
            prop_assert_eq!(weight_as_rational(&ctx, &w), rational_of(&ops));
        }

        #[test]
        fn big_arm_matches_rational_reference(
            levels in proptest::collection::vec(0u32..=5, 1..40),
            take in proptest::collection::vec(any::<bool>(), 1..8),
        ) {
            let cfg = Config::new(100, 2).unwrap();
            let ctx = WeightCtx::with_repr(&cfg, NumeratorRepr::Big);
            let ops = schedule(&levels, &take);
            let mut w = ctx.zero();
            for &(add, lvl) in &ops {
                if add { ctx.add_pow(&mut w, lvl) } else { ctx.sub_pow(&mut w, lvl) }
            }
            prop_assert_eq!(weight_as_rational(&ctx, &w), rational_of(&ops));
        }

        #[test]
        fn threshold_comparisons_match_rational_reference(
            levels in proptest::collection::vec(0u32..=5, 0..20),
        ) {
            let ctx = ctx_l5();
            let mut w = ctx.zero();
            for &lvl in &levels {
                ctx.add_pow(&mut w, lvl);
            }
            let value = weight_as_rational(&ctx, &w);
            let one = BigRational::from_integer(BigInt::from(1));
            let beta = BigInt::from(17);
            let cases = [
                (Threshold::One, one.clone()),
                (Threshold::InvBeta, BigRational::new(BigInt::from(1), beta.clone())),
                (Threshold::InvBetaSq, BigRational::new(BigInt::from(1), &beta * &beta)),
                (Threshold::InvAlphaBetaSq,
                 BigRational::new(BigInt::from(1), BigInt::from(41_617) * &beta * &beta)),
            ];
            for (t, bound) in cases {
                prop_assert_eq!(ctx.cmp_threshold(&w, t), value.cmp(&bound));
            }
        }

        #[test]
        fn ordering_matches_numeric_value(
            a in proptest::collection::vec(0u32..=5, 0..12),
            b in proptest::collection::vec(0u32..=5, 0..12),
        ) {
            let cfg = Config::new(100, 2).unwrap();
            let small = WeightCtx::new(&cfg);
            let big = WeightCtx::with_repr(&cfg, NumeratorRepr::Big);
            let mut ws = small.zero();
            let mut wb = big.zero();
            for &lvl in &a { small.add_pow(&mut ws, lvl); }
            for &lvl in &b { big.add_pow(&mut wb, lvl); }
            let expect = weight_as_rational(&small, &ws).cmp(&weight_as_rational(&big, &wb));
            // Mixed-arm comparison must agree with numeric comparison.
            prop_assert_eq!(ws.cmp(&wb), expect);
        }
    }
}
