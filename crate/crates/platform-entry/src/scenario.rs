//! Gittins-guided generation of clustered and diverse market scenarios.
//!
//! Product reward profiles are sampled from discrete sets; innovation
//! costs are then chosen by inverting the no-entry index closed forms so
//! that each product's index hits a drawn target. Focal products sit above
//! the threshold `G_bar`, control products below it, and the diverse
//! scenarios use per-seller costs to carve niches:
//!
//! - C1 (standard cluster): one product whose shared-reward index beats
//!   everything else for both sellers;
//! - C2 (high stakes): the same with the good reward raised by 500 and a
//!   correspondingly larger cost;
//! - D1 (specialists): each seller has their own niche and a prohibitive
//!   cost (index zero) for the rival's;
//! - D2 (specialist and generalist): the generalist can profitably enter
//!   the specialist's niche but still prefers their own product.
//!
//! Every generated spec carries a certificate of the index values proving
//! its defining inequalities; `validate_scenario` recomputes them from
//! scratch.

use crate::gittins::{clustered_index_undeveloped, index_undeveloped};
use crate::seller::is_dominating;
use crate::types::{CostMatrix, DiscountProfile, MarketConfig, ProductSpec, MONEY_EPS};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const GOOD_REWARDS: [f64; 3] = [75.0, 100.0, 200.0];
pub const BAD_REWARDS: [f64; 3] = [0.0, 25.0, 50.0];
pub const GOOD_PROBS: [f64; 3] = [0.2, 0.5, 0.8];
/// Additional good reward for high-stakes products.
pub const HIGH_STAKES_BONUS: f64 = 500.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    C1Standard,
    C2HighStakes,
    D1Specialists,
    D2SpecGen,
}

impl ScenarioKind {
    pub fn all() -> [ScenarioKind; 4] {
        [
            ScenarioKind::C1Standard,
            ScenarioKind::C2HighStakes,
            ScenarioKind::D1Specialists,
            ScenarioKind::D2SpecGen,
        ]
    }
}

/// Generation knobs. The threshold and control count are not pinned by the
/// market model; these defaults keep control products relevant but
/// non-dominant against the sampled reward scale.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub n_control: usize,
    pub g_bar: f64,
    pub gamma: f64,
    pub horizon: u32,
    pub max_resamples: u32,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            n_control: 3,
            g_bar: 50.0,
            gamma: 0.9,
            horizon: 30,
            max_resamples: 400,
        }
    }
}

/// Index values proving the scenario's defining inequalities, recorded at
/// generation time for auditability.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    /// plain_index[i][j]: seller i's no-entry index of product j.
    pub plain_index: Vec<Vec<f64>>,
    /// clustered_index[i][j]: shared-reward (two-seller) variant.
    pub clustered_index: Vec<Vec<f64>>,
    pub g_bar: f64,
    /// Focal products: the clustered product (C kinds) or each seller's
    /// niche in seller order (D kinds).
    pub focal: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub seed: u64,
    pub params: ScenarioParams,
    pub config: MarketConfig,
    pub certificate: Certificate,
}

#[derive(Debug, thiserror::Error)]
pub enum GenError {
    #[error("gave up generating {kind:?} after {attempts} resamples")]
    ResampleBudget { kind: ScenarioKind, attempts: u32 },
}

// ── Sampling and cost inversion ──────────────────────────────────────────

/// Draw a product profile from the discrete parameter sets.
pub fn sample_product(rng: &mut impl Rng, high_stakes: bool) -> ProductSpec {
    let r_good = GOOD_REWARDS[rng.gen_range(0..3)] + if high_stakes { HIGH_STAKES_BONUS } else { 0.0 };
    let r_bad = BAD_REWARDS[rng.gen_range(0..3)];
    let p_good = GOOD_PROBS[rng.gen_range(0..3)];
    ProductSpec::new(p_good, r_good, r_bad)
}

/// Innovation cost making the product's no-entry index equal `target`
/// (rewards pre-split by `clustered_n` sellers when given). Each stopping
/// rule's index is affine in the cost; a candidate is accepted when it is
/// nonnegative and its rule attains the max, preferring rule 3. `None`
/// means no cost realizes the target.
pub fn cost_for_target_index(
    product: &ProductSpec,
    gamma: f64,
    target: f64,
    clustered_n: Option<usize>,
) -> Option<f64> {
    if target < 0.0 {
        return None;
    }
    let p = match clustered_n {
        Some(n) => product.shared_rewards(n),
        None => *product,
    };
    let q = 1.0 - p.p_good;
    // Rule 3 first: c = p r_g/(1-gamma) + q r_b - target * D3.
    let d3 = p.p_good / (1.0 - gamma) + q;
    let c3 = p.p_good * p.r_good / (1.0 - gamma) + q * p.r_bad - target * d3;
    // Rule 2: D2 = 1 at no entry, so c = (p r_g + q r_b - target)/(1-gamma).
    let c2 = (p.p_good * p.r_good + q * p.r_bad - target) / (1.0 - gamma);
    for c in [c3, c2] {
        if c >= 0.0 {
            let got = index_undeveloped(&p, c, gamma, f64::INFINITY, 0.0)
                .expect("valid domain")
                .value;
            if (got - target).abs() < 1e-9 {
                return Some(c);
            }
        }
    }
    None
}

// ── Generation ───────────────────────────────────────────────────────────

fn plain_index(product: &ProductSpec, cost: f64, gamma: f64) -> f64 {
    index_undeveloped(product, cost, gamma, f64::INFINITY, 0.0)
        .expect("valid domain")
        .value
}

/// Sample a (product, cost) pair whose plain or clustered index hits a
/// target drawn from `range`.
fn sample_with_target(
    rng: &mut ChaCha8Rng,
    gamma: f64,
    range: (f64, f64),
    high_stakes: bool,
    clustered_n: Option<usize>,
) -> (ProductSpec, f64) {
    loop {
        let product = sample_product(rng, high_stakes);
        let target = rng.gen_range(range.0..range.1);
        if let Some(cost) = cost_for_target_index(&product, gamma, target, clustered_n) {
            return (product, cost);
        }
    }
}

/// Generate one scenario, resampling until `validate_scenario` passes.
pub fn generate(
    kind: ScenarioKind,
    params: &ScenarioParams,
    seed: u64,
) -> Result<ScenarioSpec, GenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gamma = params.gamma;
    let focal_range = (params.g_bar + 10.0, params.g_bar + 60.0);
    let control_range = (5.0, params.g_bar - 10.0);

    for _attempt in 0..params.max_resamples {
        // Shared control products: same cost row for both sellers.
        let mut products: Vec<ProductSpec> = Vec::new();
        let mut cost0: Vec<f64> = Vec::new();
        let mut cost1: Vec<f64> = Vec::new();
        let mut focal: Vec<usize> = Vec::new();

        match kind {
            ScenarioKind::C1Standard | ScenarioKind::C2HighStakes => {
                let high = kind == ScenarioKind::C2HighStakes;
                let (p, c) = sample_with_target(&mut rng, gamma, focal_range, high, Some(2));
                products.push(p);
                cost0.push(c);
                cost1.push(c);
                focal.push(0);
            }
            ScenarioKind::D1Specialists => {
                // Niche products: each seller's own index above the bar,
                // the rival priced out entirely (index zero).
                for i in 0..2usize {
                    let (p, own_cost) =
                        sample_with_target(&mut rng, gamma, focal_range, false, None);
                    let rival_cost = match cost_for_target_index(&p, gamma, 0.0, None) {
                        Some(c) => c,
                        None => continue,
                    };
                    products.push(p);
                    if i == 0 {
                        cost0.push(own_cost);
                        cost1.push(rival_cost);
                    } else {
                        cost0.push(rival_cost);
                        cost1.push(own_cost);
                    }
                    focal.push(i);
                }
                if products.len() != 2 {
                    continue;
                }
            }
            ScenarioKind::D2SpecGen => {
                // Product 0: the specialist's niche (seller 0). The
                // generalist's index on it sits strictly between the bar
                // and the generalist's own-product index.
                let (p0, spec_cost) = sample_with_target(&mut rng, gamma, focal_range, false, None);
                let (p1, gen_own_cost) = sample_with_target(
                    &mut rng,
                    gamma,
                    (params.g_bar + 20.0, focal_range.1),
                    false,
                    None,
                );
                let gen_own = plain_index(&p1, gen_own_cost, gamma);
                let cross_target = rng.gen_range(params.g_bar + 5.0..gen_own - 5.0);
                let gen_cross_cost = match cost_for_target_index(&p0, gamma, cross_target, None) {
                    Some(c) => c,
                    None => continue,
                };
                // The specialist stays out of the generalist's product.
                let spec_cross_target = rng.gen_range(control_range.0..control_range.1);
                let spec_cross_cost =
                    match cost_for_target_index(&p1, gamma, spec_cross_target, None) {
                        Some(c) => c,
                        None => continue,
                    };
                products.push(p0);
                products.push(p1);
                cost0.push(spec_cost);
                cost0.push(spec_cross_cost);
                cost1.push(gen_cross_cost);
                cost1.push(gen_own_cost);
                focal.push(0);
                focal.push(1);
            }
        }

        let mut ok = true;
        for _ in 0..params.n_control {
            let (p, c) = sample_with_target(&mut rng, gamma, control_range, false, None);
            if plain_index(&p, c, gamma) >= params.g_bar {
                ok = false;
                break;
            }
            products.push(p);
            cost0.push(c);
            cost1.push(c);
        }
        if !ok {
            continue;
        }

        let config = MarketConfig {
            products,
            costs: CostMatrix(vec![cost0, cost1]),
            discounts: DiscountProfile::default(),
            horizon: params.horizon,
            n_sellers: 2,
        };
        let spec = ScenarioSpec {
            kind,
            seed,
            params: params.clone(),
            certificate: certificate_for(&config, params, &focal),
            config,
        };
        if validate_scenario(&spec) {
            return Ok(spec);
        }
    }
    Err(GenError::ResampleBudget {
        kind,
        attempts: params.max_resamples,
    })
}

fn certificate_for(config: &MarketConfig, params: &ScenarioParams, focal: &[usize]) -> Certificate {
    let m = config.n_products();
    let gamma = params.gamma;
    let index_rows = |clustered: bool| -> Vec<Vec<f64>> {
        (0..2)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        let c = config.costs.cost(i, j);
                        if clustered {
                            clustered_index_undeveloped(&config.products[j], c, gamma, 2)
                                .expect("valid domain")
                                .value
                        } else {
                            plain_index(&config.products[j], c, gamma)
                        }
                    })
                    .collect()
            })
            .collect()
    };
    Certificate {
        plain_index: index_rows(false),
        clustered_index: index_rows(true),
        g_bar: params.g_bar,
        focal: focal.to_vec(),
    }
}

/// Recompute every index from scratch and check the kind's inequality
/// set, including the absence of a dominating product for either seller.
pub fn validate_scenario(spec: &ScenarioSpec) -> bool {
    let config = &spec.config;
    let params = &spec.params;
    let cert = certificate_for(config, params, &spec.certificate.focal);
    let m = config.n_products();
    let g_bar = params.g_bar;
    let focal = &cert.focal;
    let is_control = |j: usize| !focal.contains(&j);

    // Controls below the bar for both sellers.
    for i in 0..2 {
        for j in 0..m {
            if is_control(j) && cert.plain_index[i][j] >= g_bar - MONEY_EPS {
                return false;
            }
        }
    }

    let inequalities = match spec.kind {
        ScenarioKind::C1Standard | ScenarioKind::C2HighStakes => {
            let j_star = focal[0];
            (0..2).all(|i| {
                cert.clustered_index[i][j_star] > g_bar + MONEY_EPS
                    && (0..m).filter(|&j| j != j_star).all(|j| {
                        cert.clustered_index[i][j_star] > cert.plain_index[i][j] + MONEY_EPS
                            && cert.plain_index[i][j] < g_bar - MONEY_EPS
                    })
            })
        }
        ScenarioKind::D1Specialists => {
            let (j0, j1) = (focal[0], focal[1]);
            cert.plain_index[0][j0] > g_bar + MONEY_EPS
                && cert.plain_index[1][j1] > g_bar + MONEY_EPS
                && cert.plain_index[0][j1] < g_bar - MONEY_EPS
                && cert.plain_index[1][j0] < g_bar - MONEY_EPS
        }
        ScenarioKind::D2SpecGen => {
            let (j_spec, j_gen) = (focal[0], focal[1]);
            // Specialist (seller 0): own niche above the bar, the
            // generalist's product below it.
            // Generalist (seller 1): own product first, the specialist's
            // niche profitable but second.
            cert.plain_index[0][j_spec] > g_bar + MONEY_EPS
                && cert.plain_index[0][j_gen] < g_bar - MONEY_EPS
                && cert.plain_index[1][j_gen] > cert.plain_index[1][j_spec] + MONEY_EPS
                && cert.plain_index[1][j_spec] > g_bar + MONEY_EPS
        }
    };
    if !inequalities {
        return false;
    }

    // No product may dominate under every entry policy, for either
    // seller's cost row.
    for i in 0..2 {
        let single = MarketConfig::single_seller(
            config.products.clone(),
            config.costs.row(i).to_vec(),
            config.discounts,
        );
        if (0..m).any(|j| is_dominating(j, &single)) {
            return false;
        }
    }
    true
}
