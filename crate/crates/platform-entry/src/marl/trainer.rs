//! Independent Q-learning with iterative best-response certification.
//!
//! Each seller trains its own action-value network from its private
//! observations (independent DQN). An approximate equilibrium is certified
//! by freezing the profile, retraining each seller alone against the
//! frozen opponents, and measuring the unilateral deviation gain (regret,
//! clamped at zero). When the maximum regret falls below the threshold the
//! profile is an approximate Nash equilibrium; otherwise the best
//! responses are adopted and training resumes.
//!
//! Rewards are scaled by `1 / max r_good` for training and for the regret
//! threshold, keeping returns O(1) across market scales; reported values
//! are unscaled.

use crate::game::{MarketGame, Observation};
use crate::marl::net::Mlp;
use crate::marl::replay::{ReplayBuffer, Transition};
use crate::types::{EntryTime, MarketConfig};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Training hyperparameters. Defaults follow the experiment configuration
/// the sweep harness reproduces; `episodes_per_round` and `br_episodes`
/// are derived from the total budget when unset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub lr: f64,
    pub discount: f64,
    pub batch: usize,
    pub buffer: usize,
    pub explore_decay: f64,
    pub explore_start: f64,
    pub explore_floor: f64,
    pub br_explore_decay: f64,
    pub br_explore_start: f64,
    pub br_explore_floor: f64,
    pub total_episodes: u32,
    pub epsilon_nash: f64,
    /// Hard target-network copy cadence, in gradient updates.
    pub target_sync: u32,
    pub hidden: usize,
    /// Episodes per independent-training round (K). Default:
    /// total_episodes / (2 * max_rounds).
    pub episodes_per_round: Option<u32>,
    /// Episodes per best-response retraining. Default: K / n_sellers.
    pub br_episodes: Option<u32>,
    /// Monte-Carlo episodes per value estimate.
    pub eval_episodes: u32,
    /// Gradient updates every k environment steps.
    pub update_every: u32,
    /// Reward scale override; default 1 / max r_good.
    pub reward_scale: Option<f64>,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self {
            lr: 0.0001,
            discount: 0.9,
            batch: 32,
            buffer: 450_000,
            explore_decay: 0.99995,
            explore_start: 1.0,
            explore_floor: 0.25,
            br_explore_decay: 0.999925,
            br_explore_start: 1.0,
            br_explore_floor: 0.1,
            total_episodes: 70_000,
            epsilon_nash: 0.33,
            target_sync: 500,
            hidden: 64,
            episodes_per_round: None,
            br_episodes: None,
            eval_episodes: 1000,
            update_every: 1,
            reward_scale: None,
        }
    }
}

impl Hyperparameters {
    /// Desk-scale profile: same algorithm, smaller budget. The scale
    /// factor relative to the full budget is recorded in sweep reports.
    pub fn desk_scale() -> Self {
        Self {
            lr: 0.001,
            total_episodes: 2400,
            explore_decay: 0.9995,
            br_explore_decay: 0.99925,
            eval_episodes: 400,
            target_sync: 200,
            ..Self::default()
        }
    }

    pub fn scale_factor(&self) -> f64 {
        self.total_episodes as f64 / 70_000.0
    }

    fn round_episodes(&self, max_rounds: u32) -> u32 {
        self.episodes_per_round
            .unwrap_or_else(|| (self.total_episodes / (2 * max_rounds.max(1))).max(1))
    }

    fn response_episodes(&self, k: u32, n_sellers: usize) -> u32 {
        self.br_episodes
            .unwrap_or_else(|| (k / n_sellers.max(1) as u32).max(1))
    }
}

fn reward_scale(config: &MarketConfig, hyper: &Hyperparameters) -> f64 {
    hyper.reward_scale.unwrap_or_else(|| {
        let r_max = config
            .products
            .iter()
            .map(|p| p.r_good)
            .fold(f64::MIN, f64::max);
        1.0 / r_max.max(1e-9)
    })
}

// ── Observation encoding ─────────────────────────────────────────────────

/// Encoded feature length for a market.
pub fn encoded_dim(config: &MarketConfig) -> usize {
    let m = config.n_products();
    let n = config.n_sellers;
    4 * m + 2 * n * m + 2 * m + 1
}

/// Fixed-length encoding of a seller observation: product-state one-hots,
/// the offering matrix, elapsed clocks over horizon, entry countdowns over
/// T_p, own costs over the row maximum, and t over horizon.
pub fn encode(obs: &Observation, config: &MarketConfig, t_p: EntryTime) -> Vec<f64> {
    let horizon = config.horizon as f64;
    let mut out = Vec::with_capacity(encoded_dim(config));
    for s in &obs.product_states {
        let mut one_hot = [0.0; 4];
        one_hot[*s as usize] = 1.0;
        out.extend_from_slice(&one_hot);
    }
    for row in &obs.offering {
        out.extend(row.iter().map(|&o| if o { 1.0 } else { 0.0 }));
    }
    for row in &obs.elapsed {
        out.extend(row.iter().map(|&e| e as f64 / horizon));
    }
    let t_div = match t_p {
        EntryTime::Steps(k) => k as f64,
        EntryTime::Never => f64::INFINITY,
    };
    for c in &obs.entry_countdown {
        out.push(match c {
            Some(k) => *k as f64 / t_div,
            None => 0.0,
        });
    }
    let cost_max = obs.own_costs.iter().fold(1e-9f64, |a, &b| a.max(b));
    out.extend(obs.own_costs.iter().map(|&c| c / cost_max));
    out.push(obs.t as f64 / horizon);
    out
}

// ── Q-function ───────────────────────────────────────────────────────────

/// Action-value approximator with a periodically synced target copy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QFunction {
    pub net: Mlp,
    target: Mlp,
    updates: u64,
}

impl QFunction {
    fn new(input: usize, hidden: usize, n_actions: usize, rng: &mut impl Rng) -> Self {
        let net = Mlp::new(input, hidden, n_actions, rng);
        let target = net.clone();
        Self {
            net,
            target,
            updates: 0,
        }
    }

    pub fn q_values(&self, x: &[f64]) -> Vec<f64> {
        self.net.forward(x)
    }

    /// Greedy action; ties break toward the lowest action index.
    pub fn greedy(&self, x: &[f64]) -> usize {
        let q = self.net.forward(x);
        let mut best = 0;
        for (a, &v) in q.iter().enumerate() {
            if v > q[best] {
                best = a;
            }
        }
        best
    }

    /// One batch of TD learning against the target network; mean squared
    /// TD error is minimized by plain SGD.
    fn learn(&mut self, batch: &[&Transition], gamma: f64, lr: f64, sync_every: u32) {
        let mut grad = vec![0.0; self.net.n_params()];
        let inv = 1.0 / batch.len() as f64;
        for t in batch {
            let target_q = if t.done {
                t.reward
            } else {
                let next = self.target.forward(&t.next_obs);
                t.reward + gamma * next.iter().cloned().fold(f64::MIN, f64::max)
            };
            let cache = self.net.forward_cached(&t.obs);
            self.net
                .accumulate_grad(&t.obs, &cache, t.action, target_q, &mut grad);
        }
        for g in &mut grad {
            *g *= inv;
        }
        self.net.sgd_step(&grad, lr);
        self.updates += 1;
        if self.updates % sync_every as u64 == 0 {
            self.target = self.net.clone();
        }
    }

    #[cfg(test)]
    pub(crate) fn force_sync(&mut self) {
        self.target = self.net.clone();
    }
}

/// Trained profile with its certification outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquilibriumProfile {
    pub policies: Vec<QFunction>,
    /// Best-response regrets in scaled-reward units (the units of
    /// `epsilon_nash`); empty when never evaluated.
    pub regrets: Vec<f64>,
    pub converged: bool,
    pub seed: u64,
    pub rounds_used: u32,
}

/// Versioned checkpoint: parameter vectors, hyperparameters, RNG state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub hyper: Hyperparameters,
    pub profile: EquilibriumProfile,
    pub rng: ChaCha8Rng,
}

pub const CHECKPOINT_VERSION: u32 = 1;

impl Checkpoint {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

fn derive_seed(base: u64, stream: u64) -> u64 {
    // splitmix64 of the pair; cheap decorrelation of seed streams.
    let mut z = base ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

// ── Training loops ───────────────────────────────────────────────────────

struct EpsSchedule {
    eps: f64,
    decay: f64,
    floor: f64,
}

impl EpsSchedule {
    fn next(&mut self) -> f64 {
        let e = self.eps;
        self.eps = (self.eps * self.decay).max(self.floor);
        e
    }
}

/// Core loop: run `episodes` episodes, training the sellers listed in
/// `trainable` epsilon-greedily while the rest act greedily.
#[allow(clippy::too_many_arguments)]
fn run_training(
    config: &MarketConfig,
    t_p: EntryTime,
    qs: &mut [QFunction],
    buffers: &mut [ReplayBuffer],
    hyper: &Hyperparameters,
    episodes: u32,
    schedule: &mut EpsSchedule,
    trainable: &[bool],
    rng: &mut ChaCha8Rng,
    episode_seed_base: u64,
) {
    let n = config.n_sellers;
    let n_actions = config.n_products() + 1;
    let scale = reward_scale(config, hyper);
    let mut env = MarketGame::new(config.clone(), t_p, 0).expect("validated config");
    let mut step_count: u64 = 0;

    for ep in 0..episodes {
        env.reset(derive_seed(episode_seed_base, ep as u64));
        let mut obs: Vec<Vec<f64>> = (0..n).map(|i| encode(&env.observe(i), config, t_p)).collect();
        loop {
            let eps = schedule.next();
            let actions: Vec<usize> = (0..n)
                .map(|i| {
                    if trainable[i] && rng.gen::<f64>() < eps {
                        rng.gen_range(0..n_actions)
                    } else {
                        qs[i].greedy(&obs[i])
                    }
                })
                .collect();
            let out = env.step(&actions).expect("in-horizon step");
            let next_obs: Vec<Vec<f64>> =
                (0..n).map(|i| encode(&env.observe(i), config, t_p)).collect();
            for i in 0..n {
                if trainable[i] {
                    buffers[i].push(Transition {
                        obs: std::mem::take(&mut obs[i]),
                        action: actions[i],
                        reward: out.seller_rewards[i] * scale,
                        next_obs: next_obs[i].clone(),
                        done: out.done,
                    });
                }
            }
            step_count += 1;
            if step_count % hyper.update_every as u64 == 0 {
                for i in 0..n {
                    if trainable[i] && buffers[i].len() >= hyper.batch {
                        let batch = buffers[i].sample(rng, hyper.batch);
                        qs[i].learn(&batch, hyper.discount, hyper.lr, hyper.target_sync);
                    }
                }
            }
            obs = next_obs;
            if out.done {
                break;
            }
        }
    }
}

/// Train all sellers in parallel (independent DQN) for `episodes`
/// episodes from scratch.
pub fn train_independent(
    config: &MarketConfig,
    t_p: EntryTime,
    hyper: &Hyperparameters,
    episodes: u32,
    seed: u64,
) -> Vec<QFunction> {
    let n = config.n_sellers;
    let dim = encoded_dim(config);
    let n_actions = config.n_products() + 1;
    let mut qs: Vec<QFunction> = (0..n)
        .map(|i| {
            let mut wrng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 10 + i as u64));
            QFunction::new(dim, hyper.hidden, n_actions, &mut wrng)
        })
        .collect();
    let mut buffers: Vec<ReplayBuffer> = (0..n).map(|_| ReplayBuffer::new(hyper.buffer)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1));
    let mut schedule = EpsSchedule {
        eps: hyper.explore_start,
        decay: hyper.explore_decay,
        floor: hyper.explore_floor,
    };
    run_training(
        config,
        t_p,
        &mut qs,
        &mut buffers,
        hyper,
        episodes,
        &mut schedule,
        &vec![true; n],
        &mut rng,
        derive_seed(seed, 2),
    );
    qs
}

/// Greedy Monte-Carlo value of the joint profile, per seller, in unscaled
/// currency units discounted at `hyper.discount`.
pub fn greedy_value(
    config: &MarketConfig,
    t_p: EntryTime,
    qs: &[QFunction],
    hyper: &Hyperparameters,
    episodes: u32,
    eval_seed: u64,
) -> Vec<f64> {
    let n = config.n_sellers;
    let mut env = MarketGame::new(config.clone(), t_p, 0).expect("validated config");
    let mut totals = vec![0.0; n];
    for ep in 0..episodes {
        env.reset(derive_seed(eval_seed, ep as u64));
        let mut disc = 1.0;
        loop {
            let obs: Vec<Vec<f64>> = (0..n).map(|i| encode(&env.observe(i), config, t_p)).collect();
            let actions: Vec<usize> = (0..n).map(|i| qs[i].greedy(&obs[i])).collect();
            let out = env.step(&actions).expect("in-horizon step");
            for i in 0..n {
                totals[i] += disc * out.seller_rewards[i];
            }
            disc *= hyper.discount;
            if out.done {
                break;
            }
        }
    }
    totals.iter().map(|v| v / episodes as f64).collect()
}

/// Freeze everyone but seller `i`, retrain `i` from its current policy
/// with the best-response exploration schedule, and return the retrained
/// Q-function with its Monte-Carlo value estimate (unscaled).
pub fn best_response(
    config: &MarketConfig,
    t_p: EntryTime,
    frozen: &[QFunction],
    i: usize,
    hyper: &Hyperparameters,
    episodes: u32,
    seed: u64,
) -> (QFunction, f64) {
    let n = config.n_sellers;
    let mut qs: Vec<QFunction> = frozen.to_vec();
    let mut buffers: Vec<ReplayBuffer> = (0..n)
        .map(|k| ReplayBuffer::new(if k == i { hyper.buffer } else { 1 }))
        .collect();
    let mut trainable = vec![false; n];
    trainable[i] = true;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 3 + i as u64));
    let mut schedule = EpsSchedule {
        eps: hyper.br_explore_start,
        decay: hyper.br_explore_decay,
        floor: hyper.br_explore_floor,
    };
    run_training(
        config,
        t_p,
        &mut qs,
        &mut buffers,
        hyper,
        episodes,
        &mut schedule,
        &trainable,
        &mut rng,
        derive_seed(seed, 40 + i as u64),
    );
    let value = greedy_value(
        config,
        t_p,
        &qs,
        hyper,
        hyper.eval_episodes,
        derive_seed(seed, 7),
    )[i];
    (qs.swap_remove(i), value)
}

/// Iterate independent training and best-response checks until the
/// maximum regret falls below `epsilon_nash` or the round budget runs out.
pub fn find_equilibrium(
    config: &MarketConfig,
    t_p: EntryTime,
    hyper: &Hyperparameters,
    seed: u64,
    max_rounds: u32,
) -> EquilibriumProfile {
    let n = config.n_sellers;
    let scale = reward_scale(config, hyper);
    let k = hyper.round_episodes(max_rounds);
    let br_eps = hyper.response_episodes(k, n);

    let dim = encoded_dim(config);
    let n_actions = config.n_products() + 1;
    let mut qs: Vec<QFunction> = (0..n)
        .map(|i| {
            let mut wrng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 10 + i as u64));
            QFunction::new(dim, hyper.hidden, n_actions, &mut wrng)
        })
        .collect();
    let mut buffers: Vec<ReplayBuffer> = (0..n).map(|_| ReplayBuffer::new(hyper.buffer)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1));

    let mut regrets: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut rounds_used = 0;

    for round in 0..max_rounds {
        rounds_used = round + 1;
        let mut schedule = EpsSchedule {
            eps: hyper.explore_start,
            decay: hyper.explore_decay,
            floor: hyper.explore_floor,
        };
        run_training(
            config,
            t_p,
            &mut qs,
            &mut buffers,
            hyper,
            k,
            &mut schedule,
            &vec![true; n],
            &mut rng,
            derive_seed(seed, 100 + round as u64),
        );

        let eval_seed = derive_seed(seed, 500 + round as u64);
        let current = greedy_value(config, t_p, &qs, hyper, hyper.eval_episodes, eval_seed);
        let mut round_regrets = vec![0.0; n];
        let mut responses: Vec<QFunction> = Vec::with_capacity(n);
        for i in 0..n {
            let (br, _) = best_response(
                config,
                t_p,
                &qs,
                i,
                hyper,
                br_eps,
                derive_seed(seed, 1000 + (round as u64) * 16 + i as u64),
            );
            // Value the deviation on the same evaluation seeds as the
            // current profile (common random numbers).
            let mut deviated = qs.to_vec();
            deviated[i] = br.clone();
            let v_br =
                greedy_value(config, t_p, &deviated, hyper, hyper.eval_episodes, eval_seed)[i];
            round_regrets[i] = ((v_br - current[i]) * scale).max(0.0);
            responses.push(br);
        }
        regrets = round_regrets;
        if regrets.iter().cloned().fold(0.0f64, f64::max) <= hyper.epsilon_nash {
            converged = true;
            break;
        }
        // Adopt the profitable deviations and keep training.
        for (i, br) in responses.into_iter().enumerate() {
            if regrets[i] > hyper.epsilon_nash {
                qs[i] = br;
            }
        }
    }

    EquilibriumProfile {
        policies: qs,
        regrets,
        converged,
        seed,
        rounds_used,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{CostMatrix, DiscountProfile, ProductSpec};

    fn single_seller_config() -> MarketConfig {
        MarketConfig {
            products: vec![ProductSpec::new(0.8, 100.0, 0.0)],
            costs: CostMatrix(vec![vec![30.0]]),
            discounts: DiscountProfile::default(),
            horizon: 10,
            n_sellers: 1,
        }
    }

    fn fast_hyper() -> Hyperparameters {
        Hyperparameters {
            lr: 0.002,
            explore_decay: 0.999,
            target_sync: 100,
            eval_episodes: 200,
            hidden: 32,
            ..Hyperparameters::default()
        }
    }

    #[test]
    fn encode_shapes_and_reset_features() {
        let cfg = single_seller_config();
        let game = MarketGame::new(cfg.clone(), EntryTime::Steps(4), 1).unwrap();
        let obs = game.observe(0);
        let x = encode(&obs, &cfg, EntryTime::Steps(4));
        assert_eq!(x.len(), encoded_dim(&cfg));
        // Undeveloped one-hot and t = 0.
        assert_eq!(&x[0..4], &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(x[x.len() - 1], 0.0);
    }

    #[test]
    fn encode_is_injective_on_sampled_states() {
        use std::collections::HashMap;
        let cfg = MarketConfig {
            products: vec![
                ProductSpec::new(0.5, 100.0, 25.0),
                ProductSpec::new(0.4, 80.0, 10.0),
            ],
            costs: CostMatrix(vec![vec![20.0, 30.0], vec![25.0, 35.0]]),
            discounts: DiscountProfile::default(),
            horizon: 12,
            n_sellers: 2,
        };
        let t_p = EntryTime::Steps(3);
        let mut env = MarketGame::new(cfg.clone(), t_p, 9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut seen: HashMap<Vec<u64>, crate::game::MultiMarketState> = HashMap::new();
        for ep in 0..200u64 {
            env.reset(ep);
            loop {
                let state = env.state().clone();
                let x = encode(&env.observe(0), &cfg, t_p);
                let bits: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
                if let Some(prev) = seen.insert(bits, state.clone()) {
                    assert_eq!(prev, state, "encoding collision across distinct states");
                }
                let a = vec![rng.gen_range(0..3), rng.gen_range(0..3)];
                if env.step(&a).unwrap().done {
                    break;
                }
            }
        }
    }

    #[test]
    fn entered_product_encoding() {
        let cfg = single_seller_config();
        let mut game = MarketGame::new(cfg.clone(), EntryTime::Steps(1), 1).unwrap();
        game.step(&[1]).unwrap();
        let x = encode(&game.observe(0), &cfg, EntryTime::Steps(1));
        // Product is Entered (one-hot slot 3) and the countdown feature
        // is back to zero.
        assert_eq!(&x[0..4], &[0.0, 0.0, 0.0, 1.0]);
        let m = cfg.n_products();
        let n = cfg.n_sellers;
        let countdown_at = 4 * m + 2 * n * m;
        assert_eq!(x[countdown_at], 0.0);
    }

    #[test]
    fn training_is_deterministic_per_seed() {
        let cfg = single_seller_config();
        let hyper = fast_hyper();
        let a = train_independent(&cfg, EntryTime::Steps(4), &hyper, 40, 7);
        let b = train_independent(&cfg, EntryTime::Steps(4), &hyper, 40, 7);
        assert_eq!(a[0].net.params, b[0].net.params);
    }

    #[test]
    fn target_sync_preserves_greedy_actions() {
        let cfg = single_seller_config();
        let hyper = fast_hyper();
        let mut qs = train_independent(&cfg, EntryTime::Steps(4), &hyper, 30, 3);
        let game = MarketGame::new(cfg.clone(), EntryTime::Steps(4), 1).unwrap();
        let x = encode(&game.observe(0), &cfg, EntryTime::Steps(4));
        let before = qs[0].greedy(&x);
        qs[0].force_sync();
        assert_eq!(before, qs[0].greedy(&x));
    }

    #[test]
    fn single_seller_learns_to_explore_good_product() {
        let cfg = single_seller_config();
        let hyper = fast_hyper();
        let qs = train_independent(&cfg, EntryTime::Steps(6), &hyper, 900, 11);
        let game = MarketGame::new(cfg.clone(), EntryTime::Steps(6), 1).unwrap();
        let x = encode(&game.observe(0), &cfg, EntryTime::Steps(6));
        assert_eq!(qs[0].greedy(&x), 1, "should explore the product at t=0");
    }

    #[test]
    fn hopeless_market_learns_to_abstain() {
        // Cost dwarfs any possible return; the greedy policy should pay
        // nothing.
        let cfg = MarketConfig {
            products: vec![ProductSpec::new(0.5, 5.0, 0.0)],
            costs: CostMatrix(vec![vec![500.0]]),
            discounts: DiscountProfile::default(),
            horizon: 10,
            n_sellers: 1,
        };
        let hyper = fast_hyper();
        let qs = train_independent(&cfg, EntryTime::Steps(4), &hyper, 600, 5);
        let v = greedy_value(&cfg, EntryTime::Steps(4), &qs, &hyper, 50, 99)[0];
        assert!(v.abs() < 1e-9, "expected no spending, got value {v}");
    }

    #[test]
    fn best_response_regret_nonnegative_and_detects_corruption() {
        let cfg = single_seller_config();
        let hyper = fast_hyper();
        let t_p = EntryTime::Steps(6);
        // Corrupted profile: untrained network.
        let mut wrng = ChaCha8Rng::seed_from_u64(1234);
        let corrupted = vec![QFunction::new(
            encoded_dim(&cfg),
            hyper.hidden,
            cfg.n_products() + 1,
            &mut wrng,
        )];
        let v_cur = greedy_value(&cfg, t_p, &corrupted, &hyper, hyper.eval_episodes, 77);
        let (_, v_br) = best_response(&cfg, t_p, &corrupted, 0, &hyper, 900, 8);
        let scale = reward_scale(&cfg, &hyper);
        let regret = ((v_br - v_cur[0]) * scale).max(0.0);
        assert!(regret >= 0.0);
        assert!(
            regret > hyper.epsilon_nash,
            "corrupted policy should show regret, got {regret}"
        );
    }

    #[test]
    fn zero_rounds_is_flagged_unconverged() {
        let cfg = single_seller_config();
        let profile = find_equilibrium(&cfg, EntryTime::Steps(4), &fast_hyper(), 3, 0);
        assert!(!profile.converged);
        assert!(profile.regrets.is_empty());
    }

    #[test]
    fn degenerate_game_converges_quickly() {
        let cfg = single_seller_config();
        let hyper = Hyperparameters {
            episodes_per_round: Some(900),
            br_episodes: Some(400),
            eval_episodes: 300,
            ..fast_hyper()
        };
        let profile = find_equilibrium(&cfg, EntryTime::Steps(6), &hyper, 21, 2);
        assert!(profile.converged, "regrets: {:?}", profile.regrets);
        assert!(profile.regrets.iter().all(|&r| r <= hyper.epsilon_nash));
    }

    #[test]
    fn checkpoint_round_trip() {
        let cfg = single_seller_config();
        let hyper = fast_hyper();
        let qs = train_independent(&cfg, EntryTime::Steps(4), &hyper, 20, 3);
        let ckpt = Checkpoint {
            version: CHECKPOINT_VERSION,
            hyper: hyper.clone(),
            profile: EquilibriumProfile {
                policies: qs,
                regrets: vec![0.1],
                converged: true,
                seed: 3,
                rounds_used: 1,
            },
            rng: ChaCha8Rng::seed_from_u64(3),
        };
        let text = ckpt.to_json();
        let back = Checkpoint::from_json(&text).unwrap();
        assert_eq!(back.version, CHECKPOINT_VERSION);
        assert_eq!(
            back.profile.policies[0].net.params,
            ckpt.profile.policies[0].net.params
        );
    }
}
