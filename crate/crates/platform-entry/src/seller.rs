//! Exact evaluation of the single seller's Gittins-index policy under a
//! platform policy.
//!
//! Indices of the four-state chains do not depend on the timestep, so the
//! seller's decision depends only on the product-state vector. The
//! evaluator recurses over the good/bad outcome branches of each
//! exploration, accumulating four channels: seller receipts (fee-scaled,
//! net of costs), platform receipts (entry streams plus fees), buyer value
//! (realized rewards of whatever is offered, by seller or platform), and
//! the expected number of products explored. Infinite tails are geometric
//! series in closed form; branch values are kept in relative time and
//! discounted multiplicatively, one factor per party.

use crate::gittins::{index_undeveloped_unchecked, GittinsResult};
use crate::types::{
    validate, EntryTime, MarketConfig, PlatformPolicy, ProductState, MONEY_EPS,
};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Largest product count the outcome-tree enumeration accepts.
pub const MAX_PRODUCTS_EXACT: usize = 12;

/// Market state for the single-seller problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingleMarketState {
    pub product_states: Vec<ProductState>,
    pub t: u32,
}

impl SingleMarketState {
    pub fn initial(n_products: usize) -> Self {
        Self {
            product_states: vec![ProductState::Undeveloped; n_products],
            t: 0,
        }
    }
}

/// Outputs of the exact evaluation, shaped like one market-table row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleSellerMetrics {
    pub seller_utility: f64,
    pub platform_utility: f64,
    pub buyer_utility: f64,
    pub products_explored: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("invalid config: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),
    #[error("invalid policy: {}", .0.join("; "))]
    InvalidPolicy(Vec<String>),
    #[error("{0} products exceed the exact-enumeration limit {MAX_PRODUCTS_EXACT}")]
    TooManyProducts(usize),
}

// ── Gittins action ───────────────────────────────────────────────────────

/// The seller's index-optimal action in `state`: the product with the
/// highest state index, or `None` when every index is zero (nothing worth
/// offering). Ties break toward the lowest product id.
pub fn gittins_action(
    state: &SingleMarketState,
    policy: &PlatformPolicy,
    config: &MarketConfig,
) -> Option<usize> {
    let alpha = policy.alpha();
    let gamma = config.discounts.gamma_seller;
    let mut best: Option<(usize, f64)> = None;
    for (j, &s) in state.product_states.iter().enumerate() {
        let value = match s {
            ProductState::Undeveloped => {
                index_undeveloped_unchecked(
                    &config.products[j],
                    config.costs.cost(0, j),
                    gamma,
                    policy.entry_time(j).as_f64(),
                    alpha,
                )
                .value
            }
            ProductState::Good => (1.0 - alpha) * config.products[j].r_good,
            ProductState::Bad => (1.0 - alpha) * config.products[j].r_bad,
            ProductState::Entered => 0.0,
        };
        if value > MONEY_EPS && best.map_or(true, |(_, b)| value > b + MONEY_EPS) {
            best = Some((j, value));
        }
    }
    best.map(|(j, _)| j)
}

// ── Exact evaluation ─────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, Default)]
struct Channels {
    seller: f64,
    platform: f64,
    buyer: f64,
    explored: f64,
}

/// Per-product data precomputed once per (policy, config) pair.
struct ProductView {
    p_good: f64,
    r_good: f64,
    r_bad: f64,
    cost: f64,
    entry: EntryTime,
    undeveloped_index: f64,
    bad_index: f64,
}

struct Evaluator<'a> {
    products: Vec<ProductView>,
    alpha: f64,
    gs: f64,
    gp: f64,
    gb: f64,
    memo: HashMap<u32, Channels>,
    _config: &'a MarketConfig,
}

/// 2-bit encoding per product: U=0, B=1, E=2.
fn encode(states: &[u8]) -> u32 {
    states
        .iter()
        .enumerate()
        .fold(0u32, |acc, (j, &s)| acc | ((s as u32) << (2 * j)))
}

impl<'a> Evaluator<'a> {
    fn new(policy: &PlatformPolicy, config: &'a MarketConfig) -> Self {
        let alpha = policy.alpha();
        let gs = config.discounts.gamma_seller;
        let products = config
            .products
            .iter()
            .enumerate()
            .map(|(j, p)| {
                let entry = policy.entry_time(j);
                let undeveloped_index = index_undeveloped_unchecked(
                    p,
                    config.costs.cost(0, j),
                    gs,
                    entry.as_f64(),
                    alpha,
                )
                .value;
                ProductView {
                    p_good: p.p_good,
                    r_good: p.r_good,
                    r_bad: p.r_bad,
                    cost: config.costs.cost(0, j),
                    entry,
                    undeveloped_index,
                    bad_index: (1.0 - alpha) * p.r_bad,
                }
            })
            .collect();
        Self {
            products,
            alpha,
            gs,
            gp: config.discounts.gamma_platform,
            gb: config.discounts.gamma_buyer,
            memo: HashMap::new(),
            _config: config,
        }
    }

    /// Index-optimal choice among undeveloped and bad products.
    fn action(&self, states: &[u8]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (j, &s) in states.iter().enumerate() {
            let value = match s {
                0 => self.products[j].undeveloped_index,
                1 => self.products[j].bad_index,
                _ => 0.0,
            };
            if value > MONEY_EPS && best.map_or(true, |(_, b)| value > b + MONEY_EPS) {
                best = Some((j, value));
            }
        }
        best.map(|(j, _)| j)
    }

    fn eval(&mut self, states: &mut [u8]) -> Channels {
        let key = encode(states);
        if let Some(&cached) = self.memo.get(&key) {
            return cached;
        }
        let out = match self.action(states) {
            None => Channels::default(),
            Some(j) if states[j] == 1 => {
                // Bad continuation: the argmax is a revealed-bad product;
                // the seller sells it forever.
                let pv = &self.products[j];
                Channels {
                    seller: (1.0 - self.alpha) * pv.r_bad / (1.0 - self.gs),
                    platform: self.alpha * pv.r_bad / (1.0 - self.gp),
                    buyer: pv.r_bad / (1.0 - self.gb),
                    explored: 0.0,
                }
            }
            Some(j) => self.explore(states, j),
        };
        self.memo.insert(key, out);
        out
    }

    /// Exploration branch: pay the cost now, split on the reveal.
    fn explore(&mut self, states: &mut [u8], j: usize) -> Channels {
        let keep = 1.0 - self.alpha;
        let (p_good, r_good, r_bad, cost, entry) = {
            let pv = &self.products[j];
            (pv.p_good, pv.r_good, pv.r_bad, pv.cost, pv.entry)
        };
        let mut out = Channels {
            seller: -cost,
            explored: 1.0,
            ..Channels::default()
        };

        // Good branch: the seller sells for T_p steps starting at the
        // reveal; the platform's stream starts at entry and the buyer sees
        // the product forever, whoever offers it.
        let mut good = Channels::default();
        match entry {
            EntryTime::Steps(k) => {
                let k = k as f64;
                let xs = self.gs.powf(k);
                let xp = self.gp.powf(k);
                let xb = self.gb.powf(k);
                good.seller += keep * r_good * (1.0 - xs) / (1.0 - self.gs);
                good.platform += self.alpha * r_good * (1.0 - xp) / (1.0 - self.gp)
                    + r_good * xp / (1.0 - self.gp);
                good.buyer += r_good / (1.0 - self.gb);
                states[j] = 2;
                let cont = self.eval(states);
                states[j] = 0;
                good.seller += xs * cont.seller;
                good.platform += xp * cont.platform;
                good.buyer += xb * cont.buyer;
                good.explored += cont.explored;
            }
            EntryTime::Never => {
                // No entry: the good product is sold forever; its index
                // dominates every alternative, so the branch is absorbing.
                good.seller += keep * r_good / (1.0 - self.gs);
                good.platform += self.alpha * r_good / (1.0 - self.gp);
                good.buyer += r_good / (1.0 - self.gb);
            }
        }

        // Bad branch: collect the bad reward at the reveal step, then
        // re-decide one step later.
        let mut bad = Channels {
            seller: keep * r_bad,
            platform: self.alpha * r_bad,
            buyer: r_bad,
            ..Channels::default()
        };
        states[j] = 1;
        let cont = self.eval(states);
        states[j] = 0;
        bad.seller += self.gs * cont.seller;
        bad.platform += self.gp * cont.platform;
        bad.buyer += self.gb * cont.buyer;
        bad.explored += cont.explored;

        let q = 1.0 - p_good;
        out.seller += p_good * good.seller + q * bad.seller;
        out.platform += p_good * good.platform + q * bad.platform;
        out.buyer += p_good * good.buyer + q * bad.buyer;
        out.explored += p_good * good.explored + q * bad.explored;
        out
    }
}

/// Exact expectation of the Gittins-policy play from the all-undeveloped
/// state under `policy`.
pub fn evaluate_exact(
    policy: &PlatformPolicy,
    config: &MarketConfig,
) -> Result<SingleSellerMetrics, EvalError> {
    let violations = validate(config);
    if !violations.is_empty() {
        return Err(EvalError::InvalidConfig(violations));
    }
    let pv = crate::types::validate_policy(policy, config);
    if !pv.is_empty() {
        return Err(EvalError::InvalidPolicy(pv));
    }
    if config.n_products() > MAX_PRODUCTS_EXACT {
        return Err(EvalError::TooManyProducts(config.n_products()));
    }
    let mut ev = Evaluator::new(policy, config);
    let mut states = vec![0u8; config.n_products()];
    let ch = ev.eval(&mut states);
    Ok(SingleSellerMetrics {
        seller_utility: ch.seller,
        platform_utility: ch.platform,
        buyer_utility: ch.buyer,
        products_explored: ch.explored,
    })
}

/// Undeveloped-state index of product `j` under a concrete policy; kept
/// next to `is_dominating` which compares policy extremes.
pub fn undeveloped_index(
    j: usize,
    config: &MarketConfig,
    entry_time: f64,
    alpha: f64,
) -> GittinsResult {
    index_undeveloped_unchecked(
        &config.products[j],
        config.costs.cost(0, j),
        config.discounts.gamma_seller,
        entry_time,
        alpha,
    )
}

/// True when product `j`'s undeveloped index beats every rival's under any
/// entry policy. Monotonicity in the entry time reduces the check to the
/// extremes: `j` at its policy minimum (immediate entry) against each
/// rival at its maximum (no entry).
pub fn is_dominating(j: usize, config: &MarketConfig) -> bool {
    let j_min = undeveloped_index(j, config, 1.0, 0.0).value;
    (0..config.n_products())
        .filter(|&k| k != j)
        .all(|k| j_min > undeveloped_index(k, config, f64::INFINITY, 0.0).value)
}

#[test]
fn dbg_states() {
    use crate::types::*;
    let cfg = ab_market(2, 0);
    let policy = PlatformPolicy::global(3);
    let mut ev = Evaluator::new(&policy, &cfg);
    for (name, st) in [("UU", [0u8,0]), ("BU", [1,0]), ("UB", [0,1]), ("BE", [1,2]), ("BB", [1,1]), ("EU", [2,0])] {
        let mut s = st.to_vec();
        let ch = ev.eval(&mut s);
        println!("{name}: seller={:.9} action={:?} undix={:?}", ch.seller, ev.action(&st), ev.products.iter().map(|p| p.undeveloped_index).collect::<Vec<_>>());
    }
}
