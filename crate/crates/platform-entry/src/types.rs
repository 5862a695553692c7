//! Domain model shared by the solvers and simulators.
//!
//! A market is a set of products, each a four-state chain
//! (undeveloped / good / bad / entered), a per-seller innovation cost
//! matrix, and the discount factors of the three parties. The platform
//! commits to one of three policy shapes: a global entry time, a global
//! entry time plus a transaction fee, or a per-product entry vector.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// Absolute tolerance for monetary comparisons throughout the crate.
pub const MONEY_EPS: f64 = 1e-9;

// ── Products ─────────────────────────────────────────────────────────────

/// A product's prior and two-state reward model.
///
/// Exploration reveals the product as good (probability `p_good`, reward
/// `r_good` per timestep) or bad (reward `r_bad` per timestep). Both states
/// persist once revealed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductSpec {
    pub p_good: f64,
    pub r_good: f64,
    pub r_bad: f64,
}

impl ProductSpec {
    pub fn new(p_good: f64, r_good: f64, r_bad: f64) -> Self {
        Self {
            p_good,
            r_good,
            r_bad,
        }
    }

    /// The product with per-step rewards split evenly among `n` sellers.
    /// Costs are not split; they are per-seller.
    pub fn shared_rewards(&self, n: usize) -> Self {
        let n = n as f64;
        Self {
            p_good: self.p_good,
            r_good: self.r_good / n,
            r_bad: self.r_bad / n,
        }
    }
}

/// One-time innovation cost for seller `i` exploring product `j`.
///
/// Row `i` is private to seller `i`; the single-seller solvers use row 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CostMatrix(pub Vec<Vec<f64>>);

impl CostMatrix {
    pub fn n_sellers(&self) -> usize {
        self.0.len()
    }

    pub fn cost(&self, seller: usize, product: usize) -> f64 {
        self.0[seller][product]
    }

    pub fn row(&self, seller: usize) -> &[f64] {
        &self.0[seller]
    }
}

/// State of one product chain. Transitions are `U -> G`, `U -> B`,
/// `G -> E`; `B` and `E` are absorbing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProductState {
    Undeveloped,
    Good,
    Bad,
    Entered,
}

impl fmt::Display for ProductState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            ProductState::Undeveloped => 'U',
            ProductState::Good => 'G',
            ProductState::Bad => 'B',
            ProductState::Entered => 'E',
        };
        write!(f, "{c}")
    }
}

// ── Platform policy ──────────────────────────────────────────────────────

/// Entry delay committed by the platform: a whole number of timesteps the
/// platform waits after a product is revealed good, or `Never` for the
/// no-entry baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EntryTime {
    Steps(u32),
    Never,
}

impl EntryTime {
    /// Value used by the closed forms: `Never` maps to `+inf`, so that
    /// `gamma^T_p = 0`.
    pub fn as_f64(&self) -> f64 {
        match self {
            EntryTime::Steps(k) => *k as f64,
            EntryTime::Never => f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, EntryTime::Steps(_))
    }
}

impl fmt::Display for EntryTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntryTime::Steps(k) => write!(f, "{k}"),
            EntryTime::Never => write!(f, "inf"),
        }
    }
}

impl Serialize for EntryTime {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            EntryTime::Steps(k) => s.serialize_u32(*k),
            EntryTime::Never => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for EntryTime {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u32),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(k) => Ok(EntryTime::Steps(k)),
            Raw::Str(s) if s == "inf" => Ok(EntryTime::Never),
            Raw::Str(s) => Err(D::Error::custom(format!("bad entry time {s:?}"))),
        }
    }
}

/// The platform's committed policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "setting", rename_all = "snake_case")]
pub enum PlatformPolicy {
    /// One entry time for every product, no fee.
    GlobalEntry { t_p: EntryTime },
    /// One entry time plus a transaction fee `alpha` on every seller
    /// receipt.
    GlobalEntryFee { t_p: EntryTime, alpha: f64 },
    /// An independent entry time per product, no fee.
    HeterogeneousEntry { t_p: Vec<EntryTime> },
}

impl PlatformPolicy {
    /// The no-entry, no-fee baseline.
    pub fn no_entry() -> Self {
        PlatformPolicy::GlobalEntry {
            t_p: EntryTime::Never,
        }
    }

    pub fn global(steps: u32) -> Self {
        PlatformPolicy::GlobalEntry {
            t_p: EntryTime::Steps(steps),
        }
    }

    pub fn fee(steps: u32, alpha: f64) -> Self {
        PlatformPolicy::GlobalEntryFee {
            t_p: EntryTime::Steps(steps),
            alpha,
        }
    }

    pub fn hetero(steps: &[u32]) -> Self {
        PlatformPolicy::HeterogeneousEntry {
            t_p: steps.iter().map(|&k| EntryTime::Steps(k)).collect(),
        }
    }

    /// Entry time applying to product `j`.
    pub fn entry_time(&self, j: usize) -> EntryTime {
        match self {
            PlatformPolicy::GlobalEntry { t_p } => *t_p,
            PlatformPolicy::GlobalEntryFee { t_p, .. } => *t_p,
            PlatformPolicy::HeterogeneousEntry { t_p } => t_p[j],
        }
    }

    /// The transaction fee, zero outside the fee setting.
    pub fn alpha(&self) -> f64 {
        match self {
            PlatformPolicy::GlobalEntryFee { alpha, .. } => *alpha,
            _ => 0.0,
        }
    }
}

impl fmt::Display for PlatformPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlatformPolicy::GlobalEntry { t_p } => write!(f, "T_p={t_p}"),
            PlatformPolicy::GlobalEntryFee { t_p, alpha } => {
                write!(f, "(T_p, alpha)=({t_p}, {alpha})")
            }
            PlatformPolicy::HeterogeneousEntry { t_p } => {
                write!(f, "T_p=(")?;
                for (i, t) in t_p.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")
            }
        }
    }
}

// ── Market configuration ─────────────────────────────────────────────────

/// Discount factors for the three parties, each in (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscountProfile {
    pub gamma_seller: f64,
    pub gamma_platform: f64,
    pub gamma_buyer: f64,
}

impl Default for DiscountProfile {
    /// The market-illustration setting: gamma_s = 0.9, gamma_p = 0.95.
    /// The buyer column is discounted at the platform's rate; that choice
    /// is calibrated against the no-entry buyer anchor (see seller module
    /// tests) and configurable here.
    fn default() -> Self {
        Self {
            gamma_seller: 0.9,
            gamma_platform: 0.95,
            gamma_buyer: 0.95,
        }
    }
}

/// A full market: products, costs, discounts, and (for the finite-horizon
/// multi-seller game) the horizon and seller count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketConfig {
    pub products: Vec<ProductSpec>,
    pub costs: CostMatrix,
    pub discounts: DiscountProfile,
    pub horizon: u32,
    pub n_sellers: usize,
}

impl MarketConfig {
    /// Single-seller market over `products` with cost row `costs`.
    pub fn single_seller(products: Vec<ProductSpec>, costs: Vec<f64>, discounts: DiscountProfile) -> Self {
        Self {
            products,
            costs: CostMatrix(vec![costs]),
            discounts,
            horizon: 30,
            n_sellers: 1,
        }
    }

    pub fn n_products(&self) -> usize {
        self.products.len()
    }

    /// Parse from the structured-text config schema (JSON).
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: MarketConfig = serde_json::from_str(text)?;
        let violations = validate(&cfg);
        if violations.is_empty() {
            Ok(cfg)
        } else {
            Err(ConfigError::Invalid(violations))
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

// ── Validation ───────────────────────────────────────────────────────────

fn check_product(j: usize, p: &ProductSpec, out: &mut Vec<String>) {
    if !(p.r_good > p.r_bad) {
        out.push(format!("product {j}: r_good > r_bad violated"));
    }
    if !(p.r_bad >= 0.0) {
        out.push(format!("product {j}: r_bad >= 0 violated"));
    }
    if !(0.0..=1.0).contains(&p.p_good) {
        out.push(format!("product {j}: p_good in [0,1] violated"));
    }
    if !p.r_good.is_finite() || !p.r_bad.is_finite() {
        out.push(format!("product {j}: rewards must be finite"));
    }
}

/// Collect every invariant violation in `config`. Pure; an empty list
/// means the configuration is valid.
pub fn validate(config: &MarketConfig) -> Vec<String> {
    let mut out = Vec::new();
    for (j, p) in config.products.iter().enumerate() {
        check_product(j, p, &mut out);
    }
    if config.costs.n_sellers() != config.n_sellers {
        out.push(format!(
            "cost matrix has {} rows, expected n_sellers = {}",
            config.costs.n_sellers(),
            config.n_sellers
        ));
    }
    for (i, row) in config.costs.0.iter().enumerate() {
        if row.len() != config.products.len() {
            out.push(format!(
                "cost row {i} has {} entries, expected {}",
                row.len(),
                config.products.len()
            ));
        }
        for (j, &c) in row.iter().enumerate() {
            if !c.is_finite() || c < 0.0 {
                out.push(format!("cost[{i}][{j}] must be finite and >= 0"));
            }
        }
    }
    for (name, g) in [
        ("gamma_seller", config.discounts.gamma_seller),
        ("gamma_platform", config.discounts.gamma_platform),
        ("gamma_buyer", config.discounts.gamma_buyer),
    ] {
        if !(g > 0.0 && g < 1.0) {
            out.push(format!("{name} in (0,1) violated"));
        }
    }
    if config.horizon < 1 {
        out.push("horizon >= 1 violated".into());
    }
    out
}

/// Validate a policy against a market (dimensions, ranges).
pub fn validate_policy(policy: &PlatformPolicy, config: &MarketConfig) -> Vec<String> {
    let mut out = Vec::new();
    let check_t = |t: EntryTime, out: &mut Vec<String>| {
        if let EntryTime::Steps(k) = t {
            if k < 1 {
                out.push("entry time >= 1 violated".into());
            }
        }
    };
    match policy {
        PlatformPolicy::GlobalEntry { t_p } => check_t(*t_p, &mut out),
        PlatformPolicy::GlobalEntryFee { t_p, alpha } => {
            check_t(*t_p, &mut out);
            if !(0.0..=1.0).contains(alpha) {
                out.push("alpha in [0,1] violated".into());
            }
        }
        PlatformPolicy::HeterogeneousEntry { t_p } => {
            if t_p.len() != config.products.len() {
                out.push(format!(
                    "entry vector length {} != {} products",
                    t_p.len(),
                    config.products.len()
                ));
            }
            for t in t_p {
                check_t(*t, &mut out);
            }
        }
    }
    out
}

// ── Canned markets ───────────────────────────────────────────────────────

/// Type A: moderate, stable payoffs at low cost.
pub fn product_type_a() -> (ProductSpec, f64) {
    (ProductSpec::new(0.5, 100.0, 50.0), 50.0)
}

/// Type B: riskier, higher reward, higher cost.
pub fn product_type_b() -> (ProductSpec, f64) {
    (ProductSpec::new(0.2, 200.0, 0.0), 120.0)
}

/// Market with `n_a` Type A products followed by `n_b` Type B products.
pub fn ab_market(n_a: usize, n_b: usize) -> MarketConfig {
    let (a, ca) = product_type_a();
    let (b, cb) = product_type_b();
    let mut products = vec![a; n_a];
    products.extend(std::iter::repeat(b).take(n_b));
    let mut costs = vec![ca; n_a];
    costs.extend(std::iter::repeat(cb).take(n_b));
    MarketConfig::single_seller(products, costs, DiscountProfile::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type_a_market_is_valid() {
        let cfg = ab_market(3, 1);
        assert!(validate(&cfg).is_empty());
    }

    #[test]
    fn equal_rewards_are_flagged() {
        let mut cfg = ab_market(1, 0);
        cfg.products[0].r_bad = cfg.products[0].r_good;
        let v = validate(&cfg);
        assert!(v.iter().any(|m| m.contains("r_good > r_bad")));
    }

    #[test]
    fn alpha_out_of_range_is_flagged() {
        let cfg = ab_market(1, 1);
        let policy = PlatformPolicy::fee(3, 1.2);
        let v = validate_policy(&policy, &cfg);
        assert!(v.iter().any(|m| m.contains("alpha")));
    }

    #[test]
    fn probability_out_of_range_is_flagged() {
        let mut cfg = ab_market(1, 0);
        cfg.products[0].p_good = 1.5;
        assert!(!validate(&cfg).is_empty());
    }

    #[test]
    fn cost_shape_mismatch_is_flagged() {
        let mut cfg = ab_market(2, 0);
        cfg.costs.0[0].pop();
        assert!(!validate(&cfg).is_empty());
    }

    #[test]
    fn validate_is_idempotent() {
        let cfg = ab_market(2, 2);
        assert_eq!(validate(&cfg), validate(&cfg));
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = ab_market(3, 1);
        let text = cfg.to_json();
        let back = MarketConfig::from_json(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn entry_time_serde_round_trip() {
        for policy in [
            PlatformPolicy::no_entry(),
            PlatformPolicy::global(3),
            PlatformPolicy::fee(4, 0.4),
            PlatformPolicy::hetero(&[3, 3, 3, 8]),
        ] {
            let text = serde_json::to_string(&policy).unwrap();
            let back: PlatformPolicy = serde_json::from_str(&text).unwrap();
            assert_eq!(policy, back);
        }
    }

    #[test]
    fn decimal_parsing_is_bit_exact() {
        let text = r#"{
            "products": [{"p_good": 0.2, "r_good": 200.0, "r_bad": 0.1}],
            "costs": [[120.25]],
            "discounts": {"gamma_seller": 0.9, "gamma_platform": 0.95, "gamma_buyer": 0.95},
            "horizon": 30,
            "n_sellers": 1
        }"#;
        let cfg = MarketConfig::from_json(text).unwrap();
        assert_eq!(cfg.products[0].p_good, 0.2);
        assert_eq!(cfg.products[0].r_bad, 0.1);
        assert_eq!(cfg.costs.cost(0, 0), 120.25);
        assert_eq!(cfg.discounts.gamma_platform, 0.95);
    }
}
