//! Closed-form Gittins indices for the four-state product chain.
//!
//! A product starts undeveloped (U); exploring it costs `c` and reveals it
//! good (G, reward `r_g` per step, probability `p`) or bad (B, reward
//! `r_b`). The platform enters a good product after `T_p` steps (state E,
//! seller reward 0) and takes fraction `alpha` of every seller receipt.
//!
//! For the undeveloped state it suffices to consider three stopping rules:
//!
//! 1. stop in {U}: do not explore — index 0;
//! 2. stop in {E}: keep selling a bad product, quit at platform entry;
//! 3. stop in {B, E}: quit as soon as the product is bad or entered.
//!
//! Each rule has an index of the form V/D (expected discounted reward over
//! expected discounted time); the product's index is the maximum over the
//! rules. Both `V` and `D` are affine in `x = gamma^{T_p}`, which is what
//! the boundary solver exploits. `T_p` is accepted as a real number so the
//! solver can place fractional boundaries; policies themselves stay
//! integer.

use crate::types::{ProductSpec, ProductState, MONEY_EPS};
use serde::{Deserialize, Serialize};

/// Stopping rule attaining an undeveloped-state index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StoppingRule {
    /// Stop in {U}: never explore.
    Rule1,
    /// Stop in {E}: sell through the bad state, quit at entry.
    Rule2,
    /// Stop in {B, E}: quit on a bad reveal or at entry.
    Rule3,
}

/// Index value together with the stopping rule attaining it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GittinsResult {
    pub value: f64,
    pub rule: StoppingRule,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GittinsError {
    #[error("discount factor {0} outside (0, 1)")]
    Discount(f64),
    #[error("entry time {0} invalid (need >= 0 or +inf)")]
    EntryTime(f64),
    #[error("fee {0} outside [0, 1]")]
    Fee(f64),
}

fn check_domain(gamma: f64, entry_time: f64, alpha: f64) -> Result<(), GittinsError> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(GittinsError::Discount(gamma));
    }
    if entry_time.is_nan() || entry_time < 0.0 {
        return Err(GittinsError::EntryTime(entry_time));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(GittinsError::Fee(alpha));
    }
    Ok(())
}

/// Numerator and denominator of one rule's index, affine in
/// `x = gamma^{T_p}`. Exposed to the boundary solver.
pub(crate) struct RuleRatio {
    /// numerator = n0 + n1 * x
    pub n0: f64,
    pub n1: f64,
    /// denominator = d0 + d1 * x
    pub d0: f64,
    pub d1: f64,
}

impl RuleRatio {
    pub fn value_at(&self, x: f64) -> f64 {
        (self.n0 + self.n1 * x) / (self.d0 + self.d1 * x)
    }
}

/// Rule-2 ratio coefficients (stop in {E}).
pub(crate) fn rule2_ratio(p: &ProductSpec, cost: f64, gamma: f64, alpha: f64) -> RuleRatio {
    let keep = 1.0 - alpha;
    let q = 1.0 - p.p_good;
    RuleRatio {
        n0: (1.0 - gamma) * (-cost) + keep * (p.p_good * p.r_good + q * p.r_bad),
        n1: -keep * p.p_good * p.r_good,
        d0: p.p_good + q,
        d1: -p.p_good,
    }
}

/// Rule-3 ratio coefficients (stop in {B, E}).
pub(crate) fn rule3_ratio(p: &ProductSpec, cost: f64, gamma: f64, alpha: f64) -> RuleRatio {
    let keep = 1.0 - alpha;
    let q = 1.0 - p.p_good;
    let g = 1.0 - gamma;
    RuleRatio {
        n0: -cost + keep * (p.p_good * p.r_good / g + q * p.r_bad),
        n1: -keep * p.p_good * p.r_good / g,
        d0: p.p_good / g + q,
        d1: -p.p_good / g,
    }
}

/// `gamma^{T_p}`, with `T_p = +inf` mapping to 0.
#[inline]
pub(crate) fn entry_discount(gamma: f64, entry_time: f64) -> f64 {
    if entry_time.is_infinite() {
        0.0
    } else {
        gamma.powf(entry_time)
    }
}

/// Index under stopping rule 2: the seller keeps selling through a bad
/// state and stops only at platform entry.
pub fn index_rule2(
    product: &ProductSpec,
    cost: f64,
    gamma: f64,
    entry_time: f64,
    alpha: f64,
) -> Result<f64, GittinsError> {
    check_domain(gamma, entry_time, alpha)?;
    let x = entry_discount(gamma, entry_time);
    Ok(rule2_ratio(product, cost, gamma, alpha).value_at(x))
}

/// Index under stopping rule 3: the seller quits on a bad reveal or at
/// platform entry.
pub fn index_rule3(
    product: &ProductSpec,
    cost: f64,
    gamma: f64,
    entry_time: f64,
    alpha: f64,
) -> Result<f64, GittinsError> {
    check_domain(gamma, entry_time, alpha)?;
    let x = entry_discount(gamma, entry_time);
    Ok(rule3_ratio(product, cost, gamma, alpha).value_at(x))
}

/// Undeveloped-state index: the maximum over the three candidate rules,
/// with ties broken toward the simpler rule (Rule1 < Rule2 < Rule3).
pub fn index_undeveloped(
    product: &ProductSpec,
    cost: f64,
    gamma: f64,
    entry_time: f64,
    alpha: f64,
) -> Result<GittinsResult, GittinsError> {
    check_domain(gamma, entry_time, alpha)?;
    Ok(index_undeveloped_unchecked(
        product, cost, gamma, entry_time, alpha,
    ))
}

/// Infallible path for callers that validated the domain once.
pub(crate) fn index_undeveloped_unchecked(
    product: &ProductSpec,
    cost: f64,
    gamma: f64,
    entry_time: f64,
    alpha: f64,
) -> GittinsResult {
    let x = entry_discount(gamma, entry_time);
    let v2 = rule2_ratio(product, cost, gamma, alpha).value_at(x);
    let v3 = rule3_ratio(product, cost, gamma, alpha).value_at(x);
    if v2 <= MONEY_EPS && v3 <= MONEY_EPS {
        GittinsResult {
            value: 0.0,
            rule: StoppingRule::Rule1,
        }
    } else if v2 + MONEY_EPS >= v3 {
        GittinsResult {
            value: v2.max(v3),
            rule: StoppingRule::Rule2,
        }
    } else {
        GittinsResult {
            value: v3,
            rule: StoppingRule::Rule3,
        }
    }
}

/// Index of a product in an arbitrary state. Developed-state indices are
/// in seller-receipt units, so the fee scales them by `1 - alpha`.
pub fn index_state(
    product: &ProductSpec,
    cost: f64,
    gamma: f64,
    state: ProductState,
    entry_time: f64,
    alpha: f64,
) -> Result<f64, GittinsError> {
    check_domain(gamma, entry_time, alpha)?;
    Ok(match state {
        ProductState::Undeveloped => {
            index_undeveloped_unchecked(product, cost, gamma, entry_time, alpha).value
        }
        ProductState::Good => (1.0 - alpha) * product.r_good,
        ProductState::Bad => (1.0 - alpha) * product.r_bad,
        ProductState::Entered => 0.0,
    })
}

/// Shared-reward (clustered) index: the no-entry index of the product with
/// per-step rewards split evenly among `n_sellers`. The innovation cost is
/// not split.
pub fn clustered_index_undeveloped(
    product: &ProductSpec,
    cost: f64,
    gamma: f64,
    n_sellers: usize,
) -> Result<GittinsResult, GittinsError> {
    assert!(n_sellers >= 1, "n_sellers >= 1");
    index_undeveloped(
        &product.shared_rewards(n_sellers),
        cost,
        gamma,
        f64::INFINITY,
        0.0,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{product_type_a, product_type_b};

    // Appendix-A oracle: evaluate the reward-rate ratio of one stopping
    // rule by direct numerical summation over the chain's two branches.
    // Independent of the closed forms above.
    pub(crate) fn oracle_rule_index(
        product: &ProductSpec,
        cost: f64,
        gamma: f64,
        entry_time: f64,
        alpha: f64,
        rule: StoppingRule,
    ) -> f64 {
        let keep = 1.0 - alpha;
        // Sum gamma^t * r for t in [0, until), where `until` may be +inf.
        let discounted = |r: f64, until: f64| -> f64 {
            let mut acc = 0.0;
            let mut w = 1.0;
            let mut t = 0.0;
            while t < until && w > 1e-18 {
                acc += w * r;
                w *= gamma;
                t += 1.0;
            }
            acc
        };
        match rule {
            StoppingRule::Rule1 => 0.0,
            StoppingRule::Rule2 => {
                // Good branch runs until entry; bad branch never stops.
                let v = -cost
                    + product.p_good * discounted(keep * product.r_good, entry_time)
                    + (1.0 - product.p_good) * discounted(keep * product.r_bad, f64::INFINITY);
                let d = product.p_good * discounted(1.0, entry_time)
                    + (1.0 - product.p_good) * discounted(1.0, f64::INFINITY);
                v / d
            }
            StoppingRule::Rule3 => {
                // Bad branch stops after the reveal step.
                let v = -cost
                    + product.p_good * discounted(keep * product.r_good, entry_time)
                    + (1.0 - product.p_good) * keep * product.r_bad;
                let d = product.p_good * discounted(1.0, entry_time) + (1.0 - product.p_good);
                v / d
            }
        }
    }

    pub(crate) fn oracle_index(
        product: &ProductSpec,
        cost: f64,
        gamma: f64,
        entry_time: f64,
        alpha: f64,
    ) -> f64 {
        let v2 = oracle_rule_index(product, cost, gamma, entry_time, alpha, StoppingRule::Rule2);
        let v3 = oracle_rule_index(product, cost, gamma, entry_time, alpha, StoppingRule::Rule3);
        v2.max(v3).max(0.0)
    }

    #[test]
    fn type_a_no_entry_rule_values() {
        let (a, c) = product_type_a();
        // Oracle-checked by hand: rule 2 gives 70, rule 3 gives 475/5.5.
        let v2 = index_rule2(&a, c, 0.9, f64::INFINITY, 0.0).unwrap();
        let v3 = index_rule3(&a, c, 0.9, f64::INFINITY, 0.0).unwrap();
        assert!((v2 - 70.0).abs() < 1e-12);
        assert!((v3 - 475.0 / 5.5).abs() < 1e-12);
        assert!((v2 - oracle_index(&a, c, 0.9, f64::INFINITY, 0.0).min(v2)).abs() < 1e-9);
    }

    #[test]
    fn type_b_no_entry_rule_values() {
        let (b, c) = product_type_b();
        let v2 = index_rule2(&b, c, 0.9, f64::INFINITY, 0.0).unwrap();
        let v3 = index_rule3(&b, c, 0.9, f64::INFINITY, 0.0).unwrap();
        assert!((v2 - 28.0).abs() < 1e-12);
        assert!((v3 - 100.0).abs() < 1e-12);
        let top = index_undeveloped(&b, c, 0.9, f64::INFINITY, 0.0).unwrap();
        assert_eq!(top.rule, StoppingRule::Rule3);
        assert!((top.value - 100.0).abs() < 1e-12);
    }

    #[test]
    fn full_fee_zero_cost_is_worthless() {
        let (a, _) = product_type_a();
        let v = index_undeveloped(&a, 0.0, 0.9, f64::INFINITY, 1.0).unwrap();
        assert_eq!(v.value, 0.0);
        assert_eq!(v.rule, StoppingRule::Rule1);
    }

    #[test]
    fn type_b_zero_boundary_is_near_three_point_four() {
        // gamma^T = 0.7 at the root of the rule-3 numerator.
        let (b, c) = product_type_b();
        let t = (0.7f64).ln() / (0.9f64).ln();
        let v3 = index_rule3(&b, c, 0.9, t, 0.0).unwrap();
        assert!(v3.abs() < 1e-9, "v3 = {v3}");
        assert!((t - 3.385).abs() < 0.01);
    }

    #[test]
    fn below_zero_boundary_rule1_wins() {
        let (b, c) = product_type_b();
        let r = index_undeveloped(&b, c, 0.9, 2.0, 0.0).unwrap();
        assert_eq!(r.rule, StoppingRule::Rule1);
        assert_eq!(r.value, 0.0);
        assert_eq!(oracle_index(&b, c, 0.9, 2.0, 0.0), 0.0);
    }

    #[test]
    fn deterministic_good_arm_ties_to_rule2() {
        let p = ProductSpec::new(1.0, 100.0, 0.0);
        let r = index_undeveloped(&p, 0.0, 0.9, f64::INFINITY, 0.0).unwrap();
        assert!((r.value - 100.0).abs() < 1e-12);
        assert_eq!(r.rule, StoppingRule::Rule2);
    }

    #[test]
    fn state_indices() {
        let (a, ca) = product_type_a();
        let (b, cb) = product_type_b();
        let idx = |p: &ProductSpec, c, s| index_state(p, c, 0.9, s, f64::INFINITY, 0.0).unwrap();
        assert_eq!(idx(&a, ca, ProductState::Entered), 0.0);
        assert_eq!(idx(&a, ca, ProductState::Bad), 50.0);
        assert_eq!(idx(&b, cb, ProductState::Good), 200.0);
        // Fee scales developed-state indices into seller-receipt units.
        let g = index_state(&b, cb, 0.9, ProductState::Good, f64::INFINITY, 0.25).unwrap();
        assert_eq!(g, 150.0);
    }

    #[test]
    fn clustered_degenerate_split_matches_plain_index() {
        let (a, c) = product_type_a();
        let plain = index_undeveloped(&a, c, 0.9, f64::INFINITY, 0.0).unwrap();
        let clustered = clustered_index_undeveloped(&a, c, 0.9, 1).unwrap();
        assert_eq!(plain, clustered);
    }

    #[test]
    fn clustered_two_sellers_type_a() {
        // Halved rewards 50/25 with the original cost 50: rule 2 gives
        // -5 + 25 + 12.5 = 32.5, rule 3 gives 212.5/5.5; the max wins.
        let (a, c) = product_type_a();
        let r = clustered_index_undeveloped(&a, c, 0.9, 2).unwrap();
        let expect = oracle_index(&a.shared_rewards(2), c, 0.9, f64::INFINITY, 0.0);
        assert!((r.value - expect).abs() < 1e-9);
        assert!((r.value - 212.5 / 5.5).abs() < 1e-9);
        assert_eq!(r.rule, StoppingRule::Rule3);
    }

    #[test]
    fn zero_reward_product_is_worthless() {
        let p = ProductSpec::new(0.5, 0.0, 0.0);
        // r_good > r_bad is violated here, but the index math still
        // applies; the clustered generator relies on the 0 floor.
        let r = clustered_index_undeveloped(&p, 10.0, 0.9, 2).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.rule, StoppingRule::Rule1);
    }

    #[test]
    fn domain_errors() {
        let (a, c) = product_type_a();
        assert!(matches!(
            index_rule2(&a, c, 1.0, f64::INFINITY, 0.0),
            Err(GittinsError::Discount(_))
        ));
        assert!(matches!(
            index_rule3(&a, c, 0.0, f64::INFINITY, 0.0),
            Err(GittinsError::Discount(_))
        ));
        assert!(matches!(
            index_undeveloped(&a, c, 0.9, -1.0, 0.0),
            Err(GittinsError::EntryTime(_))
        ));
        assert!(matches!(
            index_undeveloped(&a, c, 0.9, 3.0, 1.5),
            Err(GittinsError::Fee(_))
        ));
    }

    #[test]
    fn closed_forms_match_oracle_on_grid() {
        // Small version of the acceptance grid: every product/entry-time
        // pair agrees with the Appendix-A summation oracle to 1e-9.
        let mut k = 0u32;
        for &rg in &[75.0, 100.0, 200.0] {
            for &rb in &[0.0, 25.0, 50.0] {
                for &p in &[0.2, 0.5, 0.8] {
                    for &c in &[0.0, 40.0, 120.0] {
                        let spec = ProductSpec::new(p, rg, rb);
                        for t in [1.0, 2.0, 5.0, 13.0, f64::INFINITY] {
                            let got = index_undeveloped(&spec, c, 0.9, t, 0.0).unwrap().value;
                            let want = oracle_index(&spec, c, 0.9, t, 0.0);
                            assert!(
                                (got - want).abs() < 1e-9,
                                "mismatch at rg={rg} rb={rb} p={p} c={c} t={t}: {got} vs {want}"
                            );
                            k += 1;
                        }
                    }
                }
            }
        }
        assert!(k > 200);
    }
}
