//! Optimal platform policy via boundary/region decomposition.
//!
//! The seller's optimal strategy changes only across a finite boundary set:
//! zero boundaries (explore vs. don't), bad-indifference boundaries (keep a
//! bad product vs. explore another), and undeveloped-indifference
//! boundaries (explore j vs. j'). Every rule index is a ratio of functions
//! affine in `x = gamma^{T_p}` and affine in the fee `alpha`, so boundary
//! loci solve in closed form: affine equations for zero and
//! bad-indifference, quadratics in `x` for undeveloped indifference.
//!
//! Regions are maximal policy sets with an identical seller decision tree.
//! Within a region the platform's utility is monotone (decreasing in each
//! entry time, increasing in the fee), so each region is maximized over its
//! Pareto-optimal policies and the global optimum is the best candidate
//! across regions.
//!
//! Regions are found by classifying integer policies by the seller's full
//! decision-tree signature rather than by geometric construction; at desk
//! scale the classification is exact and sidesteps the exponential growth
//! of the heterogeneous region count.

use crate::gittins::{index_undeveloped_unchecked, rule2_ratio, rule3_ratio, RuleRatio};
use crate::seller::evaluate_exact;
use crate::types::{MarketConfig, PlatformPolicy, MONEY_EPS};
use serde::{Deserialize, Serialize};
use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

/// Policy setting being optimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicySetting {
    Global,
    GlobalFee,
    Heterogeneous,
}

/// Search bounds for boundary solving and policy enumeration.
#[derive(Debug, Clone, Copy)]
pub struct Bounds {
    pub t_floor: u32,
    pub t_max: u32,
    pub alpha_cap: f64,
    /// Fee grid pitch. Exact alpha boundary roots are solved in closed
    /// form; the candidate fees the platform may commit to live on this
    /// grid (the published optima sit on it).
    pub alpha_step: f64,
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            t_floor: 1,
            t_max: 30,
            alpha_cap: 1.0,
            alpha_step: 0.02,
        }
    }
}

/// Optional regulatory constraints for `optimize`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Constraints {
    /// Fee cap: alpha <= cap.
    pub alpha_cap: Option<f64>,
    /// Entry floor: every entry time >= floor.
    pub entry_floor: Option<u32>,
}

#[derive(Debug, thiserror::Error)]
pub enum OptError {
    #[error("invalid config: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),
    #[error("{0} products exceed the heterogeneous lattice limit {MAX_HETERO_PRODUCTS}")]
    TooManyProducts(usize),
    #[error("empty search range")]
    EmptyRange,
    #[error(transparent)]
    Eval(#[from] crate::seller::EvalError),
}

/// Lattice classification caps the heterogeneous setting.
pub const MAX_HETERO_PRODUCTS: usize = 6;

// ── Boundaries ───────────────────────────────────────────────────────────

/// Which seller indifference defines the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryKind {
    /// G_j(U) = 0.
    Zero(usize),
    /// G_j(B) = G_{j'}(U); `j` is the bad product.
    BadIndiff(usize, usize),
    /// G_j(U) = G_{j'}(U).
    UndevIndiff(usize, usize),
}

/// Where the boundary sits in policy space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Locus {
    /// Global setting: a real entry time.
    EntryTime(f64),
    /// Heterogeneous setting: a real entry time for one product's
    /// component.
    EntryTimeFor { product: usize, t: f64 },
    /// Fee setting: exact fee root at a fixed integer entry time.
    FeeAt { t_p: u32, alpha: f64 },
    /// Heterogeneous pairwise indifference: for each integer T of the
    /// first product, the real root in the second product's component.
    Curve { points: Vec<(u32, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Boundary {
    pub kind: BoundaryKind,
    pub locus: Locus,
}

struct ProductParams {
    cost: f64,
    r_bad: f64,
}

fn ratios(config: &MarketConfig, j: usize, alpha: f64) -> (RuleRatio, RuleRatio) {
    let gamma = config.discounts.gamma_seller;
    let p = &config.products[j];
    let c = config.costs.cost(0, j);
    (
        rule2_ratio(p, c, gamma, alpha),
        rule3_ratio(p, c, gamma, alpha),
    )
}

fn index_at(config: &MarketConfig, j: usize, t: f64, alpha: f64) -> f64 {
    index_undeveloped_unchecked(
        &config.products[j],
        config.costs.cost(0, j),
        config.discounts.gamma_seller,
        t,
        alpha,
    )
    .value
}

/// Map `x = gamma^T` back to an entry time.
fn x_to_t(x: f64, gamma: f64) -> Option<f64> {
    if x > 0.0 && x < 1.0 {
        Some(x.ln() / gamma.ln())
    } else {
        None
    }
}

/// Roots of `a x^2 + b x + c = 0`, numerically stable.
fn quad_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    const TINY: f64 = 1e-13;
    if a.abs() < TINY {
        if b.abs() < TINY {
            return Vec::new();
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let s = disc.sqrt();
    let q = -0.5 * (b + b.signum() * s);
    let mut out = vec![q / a];
    if q.abs() > TINY {
        out.push(c / q);
    }
    out
}

const RESIDUAL_TOL: f64 = 1e-6;

/// Solve the three boundary families in the given setting. Roots outside
/// the bounds or not satisfied by the true (max-of-rules) indices are
/// discarded.
pub fn solve_boundaries(
    config: &MarketConfig,
    setting: PolicySetting,
    bounds: &Bounds,
) -> Vec<Boundary> {
    let gamma = config.discounts.gamma_seller;
    let m = config.n_products();
    let params: Vec<ProductParams> = (0..m)
        .map(|j| ProductParams {
            cost: config.costs.cost(0, j),
            r_bad: config.products[j].r_bad,
        })
        .collect();

    let t_lo = bounds.t_floor as f64;
    let t_hi = bounds.t_max as f64;
    let in_range = |t: f64| t >= t_lo - 1e-9 && t <= t_hi + 1e-9;

    let mut out: Vec<Boundary> = Vec::new();
    let push_t = |kind: BoundaryKind, t: f64, hetero_product: Option<usize>, out: &mut Vec<Boundary>| {
        let dup = out.iter().any(|b| {
            b.kind == kind
                && match (&b.locus, hetero_product) {
                    (Locus::EntryTime(t0), None) => (t0 - t).abs() < 1e-9,
                    (Locus::EntryTimeFor { product, t: t0 }, Some(p)) => {
                        *product == p && (t0 - t).abs() < 1e-9
                    }
                    _ => false,
                }
        });
        if !dup {
            out.push(Boundary {
                kind,
                locus: match hetero_product {
                    None => Locus::EntryTime(t),
                    Some(p) => Locus::EntryTimeFor { product: p, t },
                },
            });
        }
    };

    // 1-D roots in a single product's entry time (used by the global and
    // heterogeneous settings at alpha = 0).
    let zero_roots = |j: usize| -> Vec<f64> {
        let (r2, r3) = ratios(config, j, 0.0);
        let mut ts = Vec::new();
        for r in [&r2, &r3] {
            if r.n1.abs() > 1e-13 {
                if let Some(t) = x_to_t(-r.n0 / r.n1, gamma) {
                    if in_range(t) && index_at(config, j, t, 0.0).abs() < RESIDUAL_TOL {
                        ts.push(t);
                    }
                }
            }
        }
        ts
    };
    let bad_indiff_roots = |j: usize, jp: usize| -> Vec<f64> {
        // (1-alpha) r_b_j = G_{j'}(U; T_{j'}) at alpha = 0.
        let level = config.products[j].r_bad;
        let (r2, r3) = ratios(config, jp, 0.0);
        let mut ts = Vec::new();
        for r in [&r2, &r3] {
            let denom = r.n1 - level * r.d1;
            if denom.abs() > 1e-13 {
                let x = (level * r.d0 - r.n0) / denom;
                if let Some(t) = x_to_t(x, gamma) {
                    if in_range(t) && (index_at(config, jp, t, 0.0) - level).abs() < RESIDUAL_TOL {
                        ts.push(t);
                    }
                }
            }
        }
        ts
    };

    match setting {
        PolicySetting::Global | PolicySetting::Heterogeneous => {
            let hetero = setting == PolicySetting::Heterogeneous;
            for j in 0..m {
                for t in zero_roots(j) {
                    push_t(BoundaryKind::Zero(j), t, hetero.then_some(j), &mut out);
                }
            }
            for j in 0..m {
                for jp in 0..m {
                    if j == jp {
                        continue;
                    }
                    for t in bad_indiff_roots(j, jp) {
                        push_t(
                            BoundaryKind::BadIndiff(j, jp),
                            t,
                            hetero.then_some(jp),
                            &mut out,
                        );
                    }
                }
            }
            for j in 0..m {
                for jp in (j + 1)..m {
                    if hetero {
                        // Indifference couples two components; trace the
                        // curve over integer values of T_j.
                        let mut points = Vec::new();
                        for tj in bounds.t_floor..=bounds.t_max {
                            let level = index_at(config, j, tj as f64, 0.0);
                            if level <= MONEY_EPS {
                                continue;
                            }
                            let (r2, r3) = ratios(config, jp, 0.0);
                            for r in [&r2, &r3] {
                                let denom = r.n1 - level * r.d1;
                                if denom.abs() > 1e-13 {
                                    let x = (level * r.d0 - r.n0) / denom;
                                    if let Some(t) = x_to_t(x, gamma) {
                                        if in_range(t)
                                            && (index_at(config, jp, t, 0.0) - level).abs()
                                                < RESIDUAL_TOL
                                        {
                                            points.push((tj, t));
                                        }
                                    }
                                }
                            }
                        }
                        if !points.is_empty() {
                            points.dedup_by(|a, b| a.0 == b.0 && (a.1 - b.1).abs() < 1e-9);
                            out.push(Boundary {
                                kind: BoundaryKind::UndevIndiff(j, jp),
                                locus: Locus::Curve { points },
                            });
                        }
                    } else {
                        // Shared T: cross-multiplied rule pair gives a
                        // quadratic in x.
                        let (a2, a3) = ratios(config, j, 0.0);
                        let (b2, b3) = ratios(config, jp, 0.0);
                        for ra in [&a2, &a3] {
                            for rb in [&b2, &b3] {
                                let a = ra.n1 * rb.d1 - rb.n1 * ra.d1;
                                let b = ra.n0 * rb.d1 + ra.n1 * rb.d0
                                    - rb.n0 * ra.d1
                                    - rb.n1 * ra.d0;
                                let c = ra.n0 * rb.d0 - rb.n0 * ra.d0;
                                for x in quad_roots(a, b, c) {
                                    if let Some(t) = x_to_t(x, gamma) {
                                        let vj = index_at(config, j, t, 0.0);
                                        let vjp = index_at(config, jp, t, 0.0);
                                        if in_range(t)
                                            && (vj - vjp).abs() < RESIDUAL_TOL
                                            && vj.max(vjp) > MONEY_EPS
                                        {
                                            push_t(
                                                BoundaryKind::UndevIndiff(j, jp),
                                                t,
                                                None,
                                                &mut out,
                                            );
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        PolicySetting::GlobalFee => {
            // Exact alpha roots at each integer entry time; every rule
            // numerator is affine in beta = 1 - alpha.
            let x_of = |t: u32| gamma.powi(t as i32);
            let push_fee = |kind: BoundaryKind, t_p: u32, alpha: f64, out: &mut Vec<Boundary>| {
                if (0.0..=bounds.alpha_cap + 1e-12).contains(&alpha) {
                    out.push(Boundary {
                        kind,
                        locus: Locus::FeeAt { t_p, alpha },
                    });
                }
            };
            for t in bounds.t_floor..=bounds.t_max {
                let x = x_of(t);
                for j in 0..m {
                    // Zero boundary: last rule to die as alpha grows.
                    let (r2, r3) = ratios(config, j, 0.0);
                    let mut best: Option<f64> = None;
                    for r in [&r2, &r3] {
                        // numerator = A + beta * B with A the cost part.
                        let full = r.n0 + r.n1 * x; // value at beta = 1
                        let a_part = if std::ptr::eq(r, &r2) {
                            -(1.0 - gamma) * params[j].cost
                        } else {
                            -params[j].cost
                        };
                        let b_part = full - a_part;
                        if b_part.abs() > 1e-13 {
                            let beta = -a_part / b_part;
                            let alpha = 1.0 - beta;
                            if (0.0..=1.0).contains(&alpha) {
                                best = Some(best.map_or(alpha, |b: f64| b.max(alpha)));
                            }
                        }
                    }
                    if let Some(alpha) = best {
                        if index_at(config, j, t as f64, alpha).abs() < RESIDUAL_TOL {
                            push_fee(BoundaryKind::Zero(j), t, alpha, &mut out);
                        }
                    }
                }
                for j in 0..m {
                    for jp in 0..m {
                        if j == jp {
                            continue;
                        }
                        // beta r_b_j * den_{j'} = A_{j'} + beta B_{j'}
                        let (r2, r3) = ratios(config, jp, 0.0);
                        for r in [&r2, &r3] {
                            let den = r.d0 + r.d1 * x;
                            let full = r.n0 + r.n1 * x;
                            let a_part = if std::ptr::eq(r, &r2) {
                                -(1.0 - gamma) * params[jp].cost
                            } else {
                                -params[jp].cost
                            };
                            let b_part = full - a_part;
                            let denom = params[j].r_bad * den - b_part;
                            if denom.abs() > 1e-13 {
                                let beta = a_part / denom;
                                let alpha = 1.0 - beta;
                                if (0.0..=1.0).contains(&alpha) {
                                    let lhs = beta * params[j].r_bad;
                                    if (index_at(config, jp, t as f64, alpha) - lhs).abs()
                                        < RESIDUAL_TOL
                                        && lhs > MONEY_EPS
                                    {
                                        push_fee(BoundaryKind::BadIndiff(j, jp), t, alpha, &mut out);
                                    }
                                }
                            }
                        }
                    }
                }
                for j in 0..m {
                    for jp in (j + 1)..m {
                        let (a2, a3) = ratios(config, j, 0.0);
                        let (b2, b3) = ratios(config, jp, 0.0);
                        for ra in [&a2, &a3] {
                            for rb in [&b2, &b3] {
                                let den_a = ra.d0 + ra.d1 * x;
                                let den_b = rb.d0 + rb.d1 * x;
                                let full_a = ra.n0 + ra.n1 * x;
                                let full_b = rb.n0 + rb.n1 * x;
                                let a_a = if std::ptr::eq(ra, &a2) {
                                    -(1.0 - gamma) * params[j].cost
                                } else {
                                    -params[j].cost
                                };
                                let a_b = if std::ptr::eq(rb, &b2) {
                                    -(1.0 - gamma) * params[jp].cost
                                } else {
                                    -params[jp].cost
                                };
                                let bcoef_a = full_a - a_a;
                                let bcoef_b = full_b - a_b;
                                // (a_a + beta b_a)/den_a = (a_b + beta b_b)/den_b
                                let denom = bcoef_a * den_b - bcoef_b * den_a;
                                if denom.abs() > 1e-13 {
                                    let beta = (a_b * den_a - a_a * den_b) / denom;
                                    let alpha = 1.0 - beta;
                                    if (0.0..=1.0).contains(&alpha) {
                                        let vj = index_at(config, j, t as f64, alpha);
                                        let vjp = index_at(config, jp, t as f64, alpha);
                                        if (vj - vjp).abs() < RESIDUAL_TOL
                                            && vj.max(vjp) > MONEY_EPS
                                        {
                                            push_fee(
                                                BoundaryKind::UndevIndiff(j, jp),
                                                t,
                                                alpha,
                                                &mut out,
                                            );
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
            out.dedup_by(|a, b| {
                a.kind == b.kind
                    && match (&a.locus, &b.locus) {
                        (
                            Locus::FeeAt { t_p: t1, alpha: a1 },
                            Locus::FeeAt { t_p: t2, alpha: a2 },
                        ) => t1 == t2 && (a1 - a2).abs() < 1e-9,
                        _ => false,
                    }
            });
        }
    }
    out
}

// ── Decision-tree signatures ─────────────────────────────────────────────

/// Per-product index table under one concrete policy.
struct IndexTable {
    undeveloped: Vec<f64>,
    bad: Vec<f64>,
}

fn index_table(config: &MarketConfig, policy: &PlatformPolicy) -> IndexTable {
    let alpha = policy.alpha();
    let gamma = config.discounts.gamma_seller;
    let m = config.n_products();
    let mut undeveloped = Vec::with_capacity(m);
    let mut bad = Vec::with_capacity(m);
    for j in 0..m {
        undeveloped.push(
            index_undeveloped_unchecked(
                &config.products[j],
                config.costs.cost(0, j),
                gamma,
                policy.entry_time(j).as_f64(),
                alpha,
            )
            .value,
        );
        bad.push((1.0 - alpha) * config.products[j].r_bad);
    }
    IndexTable { undeveloped, bad }
}

fn tree_action(table: &IndexTable, states: &[u8]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, &s) in states.iter().enumerate() {
        let v = match s {
            0 => table.undeveloped[j],
            1 => table.bad[j],
            _ => continue,
        };
        if v > MONEY_EPS && best.map_or(true, |(_, b)| v > b + MONEY_EPS) {
            best = Some((j, v));
        }
    }
    best.map(|(j, _)| j)
}

fn walk_tree(table: &IndexTable, entry_finite: &[bool], states: &mut [u8], h: &mut DefaultHasher) {
    let key: u32 = states
        .iter()
        .enumerate()
        .fold(0, |acc, (j, &s)| acc | ((s as u32) << (2 * j)));
    match tree_action(table, states) {
        None => (key, u32::MAX).hash(h),
        Some(j) if states[j] == 1 => (key, j as u32 | 0x8000_0000).hash(h),
        Some(j) => {
            (key, j as u32).hash(h);
            if entry_finite[j] {
                states[j] = 2;
                walk_tree(table, entry_finite, states, h);
                states[j] = 0;
            }
            states[j] = 1;
            walk_tree(table, entry_finite, states, h);
            states[j] = 0;
        }
    }
}

fn signature_from_table(table: &IndexTable, entry_finite: &[bool]) -> u64 {
    let mut h = DefaultHasher::new();
    let mut states = vec![0u8; entry_finite.len()];
    walk_tree(table, entry_finite, &mut states, &mut h);
    h.finish()
}

/// Decision-tree signature of `policy` on `config`: a hash of the
/// seller's argmax at every reachable market state.
pub fn seller_signature(config: &MarketConfig, policy: &PlatformPolicy) -> u64 {
    let table = index_table(config, policy);
    let entry_finite: Vec<bool> = (0..config.n_products())
        .map(|j| policy.entry_time(j).is_finite())
        .collect();
    signature_from_table(&table, &entry_finite)
}

// ── Regions ──────────────────────────────────────────────────────────────

/// A maximal set of integer policies inducing one seller decision tree.
#[derive(Debug, Clone)]
pub struct Region {
    /// Hash of the seller's decision tree on this region.
    pub signature: u64,
    /// Sign of each boundary's defining function at a representative
    /// policy, parallel to the boundary list handed to `enumerate_regions`.
    pub sign_vector: Vec<i8>,
    /// Number of integer policies in the region.
    pub size: usize,
    /// A member policy (the lexicographically smallest).
    pub representative: PlatformPolicy,
    /// Pareto-optimal policies of the region.
    pub candidate_policies: Vec<PlatformPolicy>,
}

/// Accessor mirroring the per-region Pareto step of the optimization
/// algorithm; candidates are materialized during enumeration.
pub fn pareto_candidates(region: &Region) -> &[PlatformPolicy] {
    &region.candidate_policies
}

/// Unclamped undeveloped index (no rule-1 floor), used for boundary
/// signs: below a zero boundary the clamped index is identically zero and
/// carries no sign information.
fn index_signed(config: &MarketConfig, j: usize, t: f64, alpha: f64) -> f64 {
    let gamma = config.discounts.gamma_seller;
    let x = if t.is_infinite() { 0.0 } else { gamma.powf(t) };
    let (r2, r3) = ratios(config, j, alpha);
    r2.value_at(x).max(r3.value_at(x))
}

fn boundary_sign(config: &MarketConfig, b: &Boundary, policy: &PlatformPolicy) -> i8 {
    let alpha = policy.alpha();
    let f = match b.kind {
        BoundaryKind::Zero(j) => index_signed(config, j, policy.entry_time(j).as_f64(), alpha),
        BoundaryKind::BadIndiff(j, jp) => {
            (1.0 - alpha) * config.products[j].r_bad
                - index_at(config, jp, policy.entry_time(jp).as_f64(), alpha)
        }
        BoundaryKind::UndevIndiff(j, jp) => {
            index_at(config, j, policy.entry_time(j).as_f64(), alpha)
                - index_at(config, jp, policy.entry_time(jp).as_f64(), alpha)
        }
    };
    if f >= 0.0 {
        1
    } else {
        -1
    }
}

fn alphas_on_grid(bounds: &Bounds) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0u32;
    loop {
        let a = k as f64 * bounds.alpha_step;
        if a > bounds.alpha_cap + 1e-12 {
            break;
        }
        out.push(a);
        k += 1;
    }
    if let Some(&last) = out.last() {
        if (bounds.alpha_cap - last).abs() > 1e-12 {
            out.push(bounds.alpha_cap);
        }
    }
    out
}

/// Enumerate regions of the integer policy space by decision-tree
/// signature. Contiguity is enforced for the 1-D global setting so
/// regions match the interval picture.
pub fn enumerate_regions(
    config: &MarketConfig,
    boundaries: &[Boundary],
    setting: PolicySetting,
    bounds: &Bounds,
) -> Result<Vec<Region>, OptError> {
    let violations = crate::types::validate(config);
    if !violations.is_empty() {
        return Err(OptError::InvalidConfig(violations));
    }
    if bounds.t_floor > bounds.t_max {
        return Err(OptError::EmptyRange);
    }
    let m = config.n_products();
    let finish = |members: Vec<PlatformPolicy>, signature: u64| -> Region {
        let representative = members[0].clone();
        let candidates = pareto_of(&members, setting);
        Region {
            signature,
            sign_vector: boundaries
                .iter()
                .map(|b| boundary_sign(config, b, &representative))
                .collect(),
            size: members.len(),
            representative,
            candidate_policies: candidates,
        }
    };

    match setting {
        PolicySetting::Global => {
            let mut regions: Vec<Region> = Vec::new();
            let mut run: Vec<PlatformPolicy> = Vec::new();
            let mut run_sig = 0u64;
            for t in bounds.t_floor..=bounds.t_max {
                let policy = PlatformPolicy::global(t);
                let sig = seller_signature(config, &policy);
                if run.is_empty() || sig == run_sig {
                    run_sig = sig;
                    run.push(policy);
                } else {
                    regions.push(finish(std::mem::take(&mut run), run_sig));
                    run_sig = sig;
                    run.push(policy);
                }
            }
            if !run.is_empty() {
                regions.push(finish(run, run_sig));
            }
            Ok(regions)
        }
        PolicySetting::GlobalFee => {
            let mut groups: HashMap<u64, Vec<PlatformPolicy>> = HashMap::new();
            let mut order: Vec<u64> = Vec::new();
            for t in bounds.t_floor..=bounds.t_max {
                for &a in &alphas_on_grid(bounds) {
                    let policy = PlatformPolicy::fee(t, a);
                    let sig = seller_signature(config, &policy);
                    let slot = groups.entry(sig).or_insert_with(|| {
                        order.push(sig);
                        Vec::new()
                    });
                    slot.push(policy);
                }
            }
            Ok(order
                .into_iter()
                .map(|sig| finish(groups.remove(&sig).unwrap(), sig))
                .collect())
        }
        PolicySetting::Heterogeneous => {
            if m > MAX_HETERO_PRODUCTS {
                return Err(OptError::TooManyProducts(m));
            }
            // Per-component index cache: the undeveloped index depends
            // only on the product's own entry time.
            let gamma = config.discounts.gamma_seller;

            let und: Vec<Vec<f64>> = (0..m)
                .map(|j| {
                    (bounds.t_floor..=bounds.t_max)
                        .map(|t| {
                            index_undeveloped_unchecked(
                                &config.products[j],
                                config.costs.cost(0, j),
                                gamma,
                                t as f64,
                                0.0,
                            )
                            .value
                        })
                        .collect()
                })
                .collect();
            let bad: Vec<f64> = config.products.iter().map(|p| p.r_bad).collect();

            let mut groups: HashMap<u64, Vec<Vec<u32>>> = HashMap::new();
            let mut order: Vec<u64> = Vec::new();
            let mut point = vec![bounds.t_floor; m];
            let entry_finite = vec![true; m];
            loop {
                let table = IndexTable {
                    undeveloped: (0..m)
                        .map(|j| und[j][(point[j] - bounds.t_floor) as usize])
                        .collect(),
                    bad: bad.clone(),
                };
                let sig = signature_from_table(&table, &entry_finite);
                let slot = groups.entry(sig).or_insert_with(|| {
                    order.push(sig);
                    Vec::new()
                });
                slot.push(point.clone());

                // Advance the lattice point.
                let mut j = 0;
                loop {
                    if j == m {
                        break;
                    }
                    point[j] += 1;
                    if point[j] <= bounds.t_max {
                        break;
                    }
                    point[j] = bounds.t_floor;
                    j += 1;
                }
                if j == m {
                    break;
                }
            }
            let mut regions = Vec::new();
            for sig in order {
                let pts = groups.remove(&sig).unwrap();
                let members: Vec<PlatformPolicy> = pareto_min_vectors(&pts)
                    .into_iter()
                    .map(|p| PlatformPolicy::hetero(&p))
                    .collect();
                // Keep memory in check: the region carries its Pareto set
                // and a representative, not every lattice point.
                let representative = PlatformPolicy::hetero(&pts[0]);
                regions.push(Region {
                    signature: sig,
                    sign_vector: boundaries
                        .iter()
                        .map(|b| boundary_sign(config, b, &representative))
                        .collect(),
                    size: pts.len(),
                    representative,
                    candidate_policies: members,
                });
            }
            Ok(regions)
        }
    }
}

/// Pareto filter for global and fee settings (members are few).
fn pareto_of(members: &[PlatformPolicy], setting: PolicySetting) -> Vec<PlatformPolicy> {
    match setting {
        PolicySetting::Global => {
            let min = members
                .iter()
                .min_by_key(|p| match p.entry_time(0) {
                    crate::types::EntryTime::Steps(k) => k,
                    crate::types::EntryTime::Never => u32::MAX,
                })
                .unwrap();
            vec![min.clone()]
        }
        PolicySetting::GlobalFee => {
            // Minimal entry time, maximal fee.
            let mut pts: Vec<(u32, f64, &PlatformPolicy)> = members
                .iter()
                .map(|p| {
                    let t = match p.entry_time(0) {
                        crate::types::EntryTime::Steps(k) => k,
                        crate::types::EntryTime::Never => u32::MAX,
                    };
                    (t, p.alpha(), p)
                })
                .collect();
            pts.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.partial_cmp(&a.1).unwrap()));
            let mut out = Vec::new();
            let mut best_alpha = f64::NEG_INFINITY;
            let mut last_t = u32::MAX;
            for (t, a, p) in pts {
                if t == last_t {
                    continue; // only the max-alpha point per T survives
                }
                last_t = t;
                if a > best_alpha + 1e-12 {
                    out.push(p.clone());
                    best_alpha = a;
                }
            }
            out
        }
        PolicySetting::Heterogeneous => unreachable!("hetero uses pareto_min_vectors"),
    }
}

/// Component-wise minimal vectors of a lattice subset.
fn pareto_min_vectors(points: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let mut sorted: Vec<&Vec<u32>> = points.iter().collect();
    sorted.sort_by_key(|p| (p.iter().sum::<u32>(), (*p).clone()));
    let mut frontier: Vec<&Vec<u32>> = Vec::new();
    'outer: for p in sorted {
        for f in &frontier {
            if f.iter().zip(p.iter()).all(|(a, b)| a <= b) {
                continue 'outer;
            }
        }
        frontier.push(p);
    }
    frontier.into_iter().cloned().collect()
}

// ── Optimization ─────────────────────────────────────────────────────────

/// Platform utility of a concrete policy (the platform channel of the
/// exact evaluator).
pub fn platform_utility(policy: &PlatformPolicy, config: &MarketConfig) -> Result<f64, OptError> {
    Ok(evaluate_exact(policy, config)?.platform_utility)
}

fn tie_breaker_key(policy: &PlatformPolicy) -> (i64, f64, Vec<u32>) {
    // Larger total entry time first, then smaller alpha, then
    // lexicographically larger vector; used only among utility ties.
    let sum: i64 = match policy {
        PlatformPolicy::GlobalEntry { t_p } | PlatformPolicy::GlobalEntryFee { t_p, .. } => {
            match t_p {
                crate::types::EntryTime::Steps(k) => *k as i64,
                crate::types::EntryTime::Never => i64::MAX,
            }
        }
        PlatformPolicy::HeterogeneousEntry { t_p } => t_p
            .iter()
            .map(|t| match t {
                crate::types::EntryTime::Steps(k) => *k as i64,
                crate::types::EntryTime::Never => 1 << 40,
            })
            .sum(),
    };
    let ts: Vec<u32> = match policy {
        PlatformPolicy::HeterogeneousEntry { t_p } => t_p
            .iter()
            .map(|t| match t {
                crate::types::EntryTime::Steps(k) => *k,
                crate::types::EntryTime::Never => u32::MAX,
            })
            .collect(),
        _ => Vec::new(),
    };
    (sum, policy.alpha(), ts)
}

/// Algorithm: solve boundaries, enumerate regions, evaluate each region's
/// Pareto candidates, return the utility-maximal policy.
pub fn optimize(
    config: &MarketConfig,
    setting: PolicySetting,
    constraints: Constraints,
    bounds: &Bounds,
) -> Result<(PlatformPolicy, f64), OptError> {
    let mut bounds = *bounds;
    if let Some(cap) = constraints.alpha_cap {
        bounds.alpha_cap = cap;
    }
    if let Some(floor) = constraints.entry_floor {
        bounds.t_floor = floor.max(1);
    }
    let boundaries = solve_boundaries(config, setting, &bounds);
    let regions = enumerate_regions(config, &boundaries, setting, &bounds)?;
    let mut best: Option<(PlatformPolicy, f64)> = None;
    for region in &regions {
        for cand in &region.candidate_policies {
            let u = platform_utility(cand, config)?;
            let better = match &best {
                None => true,
                Some((bp, bu)) => {
                    if u > bu + MONEY_EPS {
                        true
                    } else if u < bu - MONEY_EPS {
                        false
                    } else {
                        // Utility tie: prefer the less aggressive policy.
                        let (s1, a1, v1) = tie_breaker_key(cand);
                        let (s0, a0, v0) = tie_breaker_key(bp);
                        (s1, a0, v1) > (s0, a1, v0)
                    }
                }
            };
            if better {
                best = Some((cand.clone(), u));
            }
        }
    }
    best.ok_or(OptError::EmptyRange)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{ab_market, EntryTime};

    fn toy() -> MarketConfig {
        ab_market(1, 1)
    }

    fn boundary_ts(boundaries: &[Boundary]) -> Vec<f64> {
        let mut ts: Vec<f64> = boundaries
            .iter()
            .filter_map(|b| match &b.locus {
                Locus::EntryTime(t) => Some(*t),
                _ => None,
            })
            .collect();
        ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ts
    }

    #[test]
    fn toy_boundaries_match_appendix_values() {
        let cfg = toy();
        let bounds = Bounds::default();
        let bs = solve_boundaries(&cfg, PolicySetting::Global, &bounds);
        let ts = boundary_ts(&bs);
        assert_eq!(ts.len(), 3, "{bs:?}");
        assert!((ts[0] - 3.385).abs() < 0.01);
        assert!((ts[1] - 7.228).abs() < 0.01);
        assert!((ts[2] - 15.275).abs() < 0.01);
        // Type A's index is positive over the whole range: no zero
        // boundary for product 0, only the domain's left endpoint.
        assert!(!bs.iter().any(|b| b.kind == BoundaryKind::Zero(0)));
    }

    #[test]
    fn toy_zero_boundary_by_bisection() {
        // Cross-check the closed-form root against bisection on the
        // undeveloped index of product B.
        let cfg = toy();
        let f = |t: f64| index_at(&cfg, 1, t, 0.0);
        let (mut lo, mut hi) = (1.0, 10.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let bs = solve_boundaries(&cfg, PolicySetting::Global, &Bounds::default());
        let zero = bs
            .iter()
            .find(|b| b.kind == BoundaryKind::Zero(1))
            .and_then(|b| match &b.locus {
                Locus::EntryTime(t) => Some(*t),
                _ => None,
            })
            .unwrap();
        assert!((zero - 0.5 * (lo + hi)).abs() < 1e-6);
    }

    #[test]
    fn single_product_market_has_only_its_zero_boundary() {
        let cfg = ab_market(0, 1);
        let bs = solve_boundaries(&cfg, PolicySetting::Global, &Bounds::default());
        assert_eq!(bs.len(), 1);
        assert_eq!(bs[0].kind, BoundaryKind::Zero(0));
    }

    #[test]
    fn toy_regions_and_candidates() {
        let cfg = toy();
        let bounds = Bounds::default();
        let bs = solve_boundaries(&cfg, PolicySetting::Global, &bounds);
        let regions = enumerate_regions(&cfg, &bs, PolicySetting::Global, &bounds).unwrap();
        assert_eq!(regions.len(), 4, "{regions:#?}");
        let candidates: Vec<u32> = regions
            .iter()
            .flat_map(|r| r.candidate_policies.iter())
            .map(|p| match p.entry_time(0) {
                EntryTime::Steps(k) => k,
                EntryTime::Never => u32::MAX,
            })
            .collect();
        assert_eq!(candidates, vec![1, 4, 8, 16]);
    }

    #[test]
    fn toy_optimum_is_eight() {
        let cfg = toy();
        let (policy, _) = optimize(
            &cfg,
            PolicySetting::Global,
            Constraints::default(),
            &Bounds::default(),
        )
        .unwrap();
        assert_eq!(policy, PlatformPolicy::global(8));
    }

    #[test]
    fn toy_hetero_optimum() {
        let cfg = toy();
        let (policy, _) = optimize(
            &cfg,
            PolicySetting::Heterogeneous,
            Constraints::default(),
            &Bounds::default(),
        )
        .unwrap();
        assert_eq!(policy, PlatformPolicy::hetero(&[1, 7]));
    }

    #[test]
    fn global_optimum_matches_brute_force() {
        for cfg in [toy(), ab_market(3, 1), ab_market(1, 3)] {
            let bounds = Bounds::default();
            let (policy, u) = optimize(
                &cfg,
                PolicySetting::Global,
                Constraints::default(),
                &bounds,
            )
            .unwrap();
            let mut best = f64::NEG_INFINITY;
            let mut best_t = 0;
            for t in 1..=bounds.t_max {
                let v = platform_utility(&PlatformPolicy::global(t), &cfg).unwrap();
                if v > best + MONEY_EPS {
                    best = v;
                    best_t = t;
                }
            }
            assert!((u - best).abs() < 1e-6);
            assert_eq!(policy, PlatformPolicy::global(best_t));
        }
    }

    #[test]
    fn region_members_share_decision_trees() {
        let cfg = toy();
        let bounds = Bounds::default();
        let bs = solve_boundaries(&cfg, PolicySetting::Global, &bounds);
        let regions = enumerate_regions(&cfg, &bs, PolicySetting::Global, &bounds).unwrap();
        // Signatures differ across regions and pin the membership.
        let sigs: Vec<u64> = regions.iter().map(|r| r.signature).collect();
        let mut uniq = sigs.clone();
        uniq.dedup();
        assert_eq!(sigs.len(), uniq.len());
    }

    #[test]
    fn monotone_within_region() {
        // Platform utility weakly decreases in T inside each global
        // region of the toy market.
        let cfg = toy();
        let bounds = Bounds::default();
        let bs = solve_boundaries(&cfg, PolicySetting::Global, &bounds);
        let regions = enumerate_regions(&cfg, &bs, PolicySetting::Global, &bounds).unwrap();
        for r in &regions {
            let ts: Vec<u32> = (1..=bounds.t_max)
                .filter(|&t| {
                    seller_signature(&cfg, &PlatformPolicy::global(t)) == r.signature
                })
                .collect();
            let mut prev = f64::INFINITY;
            for t in ts {
                let u = platform_utility(&PlatformPolicy::global(t), &cfg).unwrap();
                assert!(u <= prev + 1e-9);
                prev = u;
            }
        }
    }

    #[test]
    fn fee_setting_alpha_is_monotone_within_region() {
        let cfg = ab_market(3, 1);
        // Sample interior fee points of the region around (4, 0.3).
        let sig = seller_signature(&cfg, &PlatformPolicy::fee(4, 0.30));
        let mut prev = f64::NEG_INFINITY;
        for a in [0.20, 0.30, 0.40] {
            if seller_signature(&cfg, &PlatformPolicy::fee(4, a)) == sig {
                let u = platform_utility(&PlatformPolicy::fee(4, a), &cfg).unwrap();
                assert!(u >= prev - 1e-9);
                prev = u;
            }
        }
    }

    #[test]
    fn hetero_rejects_large_markets() {
        let cfg = ab_market(4, 3);
        let err = enumerate_regions(
            &cfg,
            &[],
            PolicySetting::Heterogeneous,
            &Bounds {
                t_max: 3,
                ..Bounds::default()
            },
        );
        assert!(matches!(err, Err(OptError::TooManyProducts(7))));
    }

    #[test]
    fn boundary_residuals_hold() {
        let cfg = ab_market(3, 1);
        let bounds = Bounds::default();
        for b in solve_boundaries(&cfg, PolicySetting::Global, &bounds) {
            if let Locus::EntryTime(t) = b.locus {
                let res = match b.kind {
                    BoundaryKind::Zero(j) => index_at(&cfg, j, t, 0.0),
                    BoundaryKind::BadIndiff(j, jp) => {
                        cfg.products[j].r_bad - index_at(&cfg, jp, t, 0.0)
                    }
                    BoundaryKind::UndevIndiff(j, jp) => {
                        index_at(&cfg, j, t, 0.0) - index_at(&cfg, jp, t, 0.0)
                    }
                };
                assert!(res.abs() < 1e-6, "{b:?} residual {res}");
            }
        }
    }
}
