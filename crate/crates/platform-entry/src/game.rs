//! Finite-horizon multi-seller Markov game induced by a global entry time.
//!
//! Each step every seller offers at most one product. First-time offers pay
//! the seller's private innovation cost, whether or not another seller
//! already revealed the product (the state is public; costs are not).
//! Undeveloped products chosen this step resolve good or bad once, shared
//! by all choosers. Sellers offering the same product split its realized
//! reward evenly. A product revealed good is entered by the platform
//! exactly `T_p` steps later, after which it pays sellers nothing and pays
//! the platform its good reward every remaining step.
//!
//! Rewards in [`StepOutcome`] are undiscounted; the harness applies each
//! party's discount factor.

use crate::types::{validate, EntryTime, MarketConfig, ProductState};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Joint state of the sellers' game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiMarketState {
    pub product_states: Vec<ProductState>,
    /// offering[i][j]: seller i offered product j this step.
    pub offering: Vec<Vec<bool>>,
    /// elapsed[i][j]: steps since seller i first offered product j; -1 if
    /// never.
    pub elapsed: Vec<Vec<i32>>,
    /// Steps until platform entry for each Good product; `None` while the
    /// product is not Good.
    pub entry_countdown: Vec<Option<u32>>,
    pub t: u32,
}

impl MultiMarketState {
    fn initial(n_sellers: usize, n_products: usize) -> Self {
        Self {
            product_states: vec![ProductState::Undeveloped; n_products],
            offering: vec![vec![false; n_products]; n_sellers],
            elapsed: vec![vec![-1; n_products]; n_sellers],
            entry_countdown: vec![None; n_products],
            t: 0,
        }
    }
}

/// Seller-private view: the full public state plus the seller's own cost
/// row, and the committed entry time. Other sellers' costs are absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub seller: usize,
    pub product_states: Vec<ProductState>,
    pub offering: Vec<Vec<bool>>,
    pub elapsed: Vec<Vec<i32>>,
    pub entry_countdown: Vec<Option<u32>>,
    pub t: u32,
    pub horizon: u32,
    pub t_p: EntryTime,
    pub own_costs: Vec<f64>,
}

/// One transition of the game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepOutcome {
    pub next_state: MultiMarketState,
    pub seller_rewards: Vec<f64>,
    pub platform_reward: f64,
    pub done: bool,
}

/// One trajectory-log line (line-delimited JSON for replay/debugging).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub t: u32,
    pub joint_action: Vec<usize>,
    pub seller_rewards: Vec<f64>,
    pub platform_reward: f64,
    pub product_states: Vec<ProductState>,
}

#[derive(Debug, thiserror::Error)]
pub enum GameError {
    #[error("invalid config: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),
    #[error("episode is over (t = horizon = {0})")]
    EpisodeOver(u32),
    #[error("joint action has {got} entries, expected {want}")]
    JointLen { got: usize, want: usize },
    #[error("seller {seller} action {action} out of range 0..={max}")]
    BadAction {
        seller: usize,
        action: usize,
        max: usize,
    },
    #[error("entry time must be >= 1")]
    BadEntryTime,
}

/// The environment. One instance is single-threaded; run many instances
/// with independent seeds for parallel evaluation.
#[derive(Debug, Clone)]
pub struct MarketGame {
    config: MarketConfig,
    t_p: EntryTime,
    state: MultiMarketState,
    rng: ChaCha8Rng,
}

impl MarketGame {
    pub fn new(config: MarketConfig, t_p: EntryTime, seed: u64) -> Result<Self, GameError> {
        let violations = validate(&config);
        if !violations.is_empty() {
            return Err(GameError::InvalidConfig(violations));
        }
        if matches!(t_p, EntryTime::Steps(0)) {
            return Err(GameError::BadEntryTime);
        }
        let state = MultiMarketState::initial(config.n_sellers, config.n_products());
        Ok(Self {
            config,
            t_p,
            state,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// Restart the episode with a deterministic RNG stream for `seed`.
    pub fn reset(&mut self, seed: u64) -> &MultiMarketState {
        self.state = MultiMarketState::initial(self.config.n_sellers, self.config.n_products());
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        &self.state
    }

    pub fn state(&self) -> &MultiMarketState {
        &self.state
    }

    pub fn config(&self) -> &MarketConfig {
        &self.config
    }

    pub fn t_p(&self) -> EntryTime {
        self.t_p
    }

    pub fn n_actions(&self) -> usize {
        self.config.n_products() + 1
    }

    /// Advance one step under the joint action (0 = offer nothing,
    /// j in 1..=M = offer product j-1).
    pub fn step(&mut self, joint_action: &[usize]) -> Result<StepOutcome, GameError> {
        let n = self.config.n_sellers;
        let m = self.config.n_products();
        let horizon = self.config.horizon;
        if self.state.t >= horizon {
            return Err(GameError::EpisodeOver(horizon));
        }
        if joint_action.len() != n {
            return Err(GameError::JointLen {
                got: joint_action.len(),
                want: n,
            });
        }
        for (i, &a) in joint_action.iter().enumerate() {
            if a > m {
                return Err(GameError::BadAction {
                    seller: i,
                    action: a,
                    max: m,
                });
            }
        }

        let mut rewards = vec![0.0; n];

        // First-time costs and the fresh offering matrix.
        for i in 0..n {
            for j in 0..m {
                self.state.offering[i][j] = false;
            }
            if joint_action[i] > 0 {
                let j = joint_action[i] - 1;
                self.state.offering[i][j] = true;
                if self.state.elapsed[i][j] < 0 {
                    rewards[i] -= self.config.costs.cost(i, j);
                    self.state.elapsed[i][j] = 0;
                }
            }
        }

        // Shared reveal of undeveloped products chosen this step.
        let mut chooser_count = vec![0usize; m];
        for i in 0..n {
            if joint_action[i] > 0 {
                chooser_count[joint_action[i] - 1] += 1;
            }
        }
        for j in 0..m {
            if chooser_count[j] > 0 && self.state.product_states[j] == ProductState::Undeveloped {
                if self.rng.gen::<f64>() < self.config.products[j].p_good {
                    self.state.product_states[j] = ProductState::Good;
                    if let EntryTime::Steps(k) = self.t_p {
                        self.state.entry_countdown[j] = Some(k);
                    }
                } else {
                    self.state.product_states[j] = ProductState::Bad;
                }
            }
        }

        // Congestion shares.
        for i in 0..n {
            if joint_action[i] > 0 {
                let j = joint_action[i] - 1;
                let share = match self.state.product_states[j] {
                    ProductState::Good => self.config.products[j].r_good / chooser_count[j] as f64,
                    ProductState::Bad => self.config.products[j].r_bad / chooser_count[j] as f64,
                    ProductState::Entered => 0.0,
                    ProductState::Undeveloped => unreachable!("chosen products are revealed"),
                };
                rewards[i] += share;
            }
        }

        // Platform collects from products already entered this step.
        let platform_reward: f64 = (0..m)
            .filter(|&j| self.state.product_states[j] == ProductState::Entered)
            .fold(0.0, |acc, j| acc + self.config.products[j].r_good);

        // End of step: elapsed clocks tick, entry countdowns run while the
        // product stays Good (whether or not anyone offers it).
        for i in 0..n {
            for j in 0..m {
                if self.state.elapsed[i][j] >= 0 {
                    self.state.elapsed[i][j] += 1;
                }
            }
        }
        for j in 0..m {
            if self.state.product_states[j] == ProductState::Good {
                if let Some(c) = self.state.entry_countdown[j] {
                    let c = c - 1;
                    if c == 0 {
                        self.state.product_states[j] = ProductState::Entered;
                        self.state.entry_countdown[j] = None;
                    } else {
                        self.state.entry_countdown[j] = Some(c);
                    }
                }
            }
        }

        self.state.t += 1;
        let done = self.state.t == horizon;
        Ok(StepOutcome {
            next_state: self.state.clone(),
            seller_rewards: rewards,
            platform_reward,
            done,
        })
    }

    /// Seller `i`'s observation of the current state.
    pub fn observe(&self, i: usize) -> Observation {
        observe(&self.state, i, &self.config, self.t_p)
    }
}

/// Masked view of `state` for seller `i`.
pub fn observe(
    state: &MultiMarketState,
    i: usize,
    config: &MarketConfig,
    t_p: EntryTime,
) -> Observation {
    Observation {
        seller: i,
        product_states: state.product_states.clone(),
        offering: state.offering.clone(),
        elapsed: state.elapsed.clone(),
        entry_countdown: state.entry_countdown.clone(),
        t: state.t,
        horizon: config.horizon,
        t_p,
        own_costs: config.costs.row(i).to_vec(),
    }
}

/// Serialize one step into a trajectory-log line.
pub fn log_line(record: &TrajectoryRecord) -> String {
    serde_json::to_string(record).expect("record serializes")
}

/// Parse one trajectory-log line.
pub fn parse_log_line(line: &str) -> Result<TrajectoryRecord, serde_json::Error> {
    serde_json::from_str(line)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{CostMatrix, DiscountProfile, ProductSpec};

    fn two_seller_config() -> MarketConfig {
        MarketConfig {
            products: vec![
                ProductSpec::new(1.0, 100.0, 0.0),
                ProductSpec::new(0.0, 80.0, 20.0),
                ProductSpec::new(0.5, 75.0, 25.0),
            ],
            costs: CostMatrix(vec![vec![10.0, 20.0, 30.0], vec![15.0, 25.0, 35.0]]),
            discounts: DiscountProfile::default(),
            horizon: 12,
            n_sellers: 2,
        }
    }

    #[test]
    fn reset_state_is_all_undeveloped() {
        let mut game = MarketGame::new(two_seller_config(), EntryTime::Steps(3), 7).unwrap();
        let s = game.reset(7).clone();
        assert!(s
            .product_states
            .iter()
            .all(|&p| p == ProductState::Undeveloped));
        assert!(s.offering.iter().flatten().all(|&o| !o));
        assert!(s.elapsed.iter().flatten().all(|&e| e == -1));
        assert_eq!(s.t, 0);
    }

    #[test]
    fn even_split_on_shared_good_product() {
        let mut game = MarketGame::new(two_seller_config(), EntryTime::Steps(5), 1).unwrap();
        // Product 0 is deterministically good. Both sellers offer it; the
        // first step pays costs, the second step is a pure split.
        let o1 = game.step(&[1, 1]).unwrap();
        assert_eq!(o1.seller_rewards, vec![50.0 - 10.0, 50.0 - 15.0]);
        let o2 = game.step(&[1, 1]).unwrap();
        assert_eq!(o2.seller_rewards, vec![50.0, 50.0]);
    }

    #[test]
    fn entered_product_pays_nothing_but_costs_still_apply() {
        let mut game = MarketGame::new(two_seller_config(), EntryTime::Steps(1), 1).unwrap();
        game.step(&[1, 0]).unwrap(); // revealed good, entered at t=1
        assert_eq!(game.state().product_states[0], ProductState::Entered);
        let o = game.step(&[1, 1]).unwrap();
        // Seller 0 already paid; seller 1 pays its first-time cost even
        // though the product is already entered.
        assert_eq!(o.seller_rewards, vec![0.0, -15.0]);
        assert_eq!(o.platform_reward, 100.0);
    }

    #[test]
    fn noop_action_pays_zero() {
        let mut game = MarketGame::new(two_seller_config(), EntryTime::Steps(3), 1).unwrap();
        let o = game.step(&[0, 0]).unwrap();
        assert_eq!(o.seller_rewards, vec![0.0, 0.0]);
        assert_eq!(o.platform_reward, 0.0);
    }

    #[test]
    fn entry_happens_exactly_t_p_steps_after_reveal() {
        let t_p = 4u32;
        let mut game = MarketGame::new(two_seller_config(), EntryTime::Steps(t_p), 3).unwrap();
        let o = game.step(&[1, 0]).unwrap(); // reveal good at t=0
        assert_eq!(o.seller_rewards[0], 100.0 - 10.0);
        // Seller collects for exactly t_p steps (the reveal step plus
        // t_p - 1 more), regardless of offering later.
        for k in 1..t_p {
            let o = game.step(&[1, 0]).unwrap();
            assert_eq!(
                game.state().product_states[0],
                if k == t_p - 1 {
                    ProductState::Entered
                } else {
                    ProductState::Good
                }
            );
            assert_eq!(o.seller_rewards[0], 100.0);
            assert_eq!(o.platform_reward, 0.0);
        }
        let o = game.step(&[1, 0]).unwrap();
        assert_eq!(o.seller_rewards[0], 0.0);
        assert_eq!(o.platform_reward, 100.0);
    }

    #[test]
    fn countdown_runs_even_when_nobody_offers() {
        let mut game = MarketGame::new(two_seller_config(), EntryTime::Steps(2), 3).unwrap();
        game.step(&[1, 0]).unwrap();
        game.step(&[0, 0]).unwrap(); // countdown ticks anyway
        assert_eq!(game.state().product_states[0], ProductState::Entered);
    }

    #[test]
    fn no_entry_under_never() {
        let mut game = MarketGame::new(two_seller_config(), EntryTime::Never, 3).unwrap();
        for _ in 0..12 {
            game.step(&[1, 0]).unwrap();
        }
        assert_eq!(game.state().product_states[0], ProductState::Good);
    }

    #[test]
    fn reveal_is_shared_and_cost_is_first_time_only() {
        // Product 1 is deterministically bad.
        let mut game = MarketGame::new(two_seller_config(), EntryTime::Steps(3), 5).unwrap();
        let o = game.step(&[2, 0]).unwrap();
        assert_eq!(o.seller_rewards[0], 20.0 - 20.0);
        assert_eq!(game.state().product_states[1], ProductState::Bad);
        // Seller 1 explores the already-revealed product: pays its own
        // cost, collects a bad share; seller 0 re-offers free.
        let o = game.step(&[2, 2]).unwrap();
        assert_eq!(o.seller_rewards, vec![10.0, 10.0 - 25.0]);
        // A gap then a re-offer does not re-charge.
        game.step(&[0, 0]).unwrap();
        let o = game.step(&[2, 0]).unwrap();
        assert_eq!(o.seller_rewards[0], 20.0);
    }

    #[test]
    fn observation_masks_other_cost_rows() {
        let game = MarketGame::new(two_seller_config(), EntryTime::Steps(3), 5).unwrap();
        let o0 = game.observe(0);
        let o1 = game.observe(1);
        assert_eq!(o0.own_costs, vec![10.0, 20.0, 30.0]);
        assert_eq!(o1.own_costs, vec![15.0, 25.0, 35.0]);
        assert_eq!(o0.product_states, o1.product_states);
    }

    #[test]
    fn same_seed_same_trajectory() {
        let cfg = two_seller_config();
        let actions: Vec<Vec<usize>> = (0..12).map(|t| vec![(t % 4), ((t + 1) % 4)]).collect();
        let run = |seed: u64| {
            let mut game = MarketGame::new(cfg.clone(), EntryTime::Steps(3), seed).unwrap();
            actions
                .iter()
                .map(|a| game.step(a).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(run(42), run(42));
        let a = run(42);
        let b = run(43);
        assert_eq!(a.len(), b.len());
    }

    #[test]
    fn done_exactly_at_horizon() {
        let cfg = two_seller_config();
        let mut game = MarketGame::new(cfg, EntryTime::Steps(3), 1).unwrap();
        for t in 0..12 {
            let o = game.step(&[0, 0]).unwrap();
            assert_eq!(o.done, t == 11);
        }
        assert!(matches!(game.step(&[0, 0]), Err(GameError::EpisodeOver(12))));
    }

    #[test]
    fn rejects_malformed_actions() {
        let mut game = MarketGame::new(two_seller_config(), EntryTime::Steps(3), 1).unwrap();
        assert!(matches!(
            game.step(&[0]),
            Err(GameError::JointLen { got: 1, want: 2 })
        ));
        assert!(matches!(
            game.step(&[4, 0]),
            Err(GameError::BadAction { .. })
        ));
    }

    #[test]
    fn trajectory_log_round_trip() {
        let rec = TrajectoryRecord {
            t: 3,
            joint_action: vec![1, 0],
            seller_rewards: vec![50.0, 0.0],
            platform_reward: 100.0,
            product_states: vec![
                ProductState::Good,
                ProductState::Bad,
                ProductState::Undeveloped,
            ],
        };
        let line = log_line(&rec);
        assert_eq!(parse_log_line(&line).unwrap(), rec);
    }
}
