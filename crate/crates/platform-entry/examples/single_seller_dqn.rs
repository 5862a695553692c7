//! Sanity check of the learner against the exact solver: with a single
//! seller the learned greedy value should approach the Gittins-policy
//! optimum.

use platform_entry::marl::{greedy_value, train_independent, Hyperparameters};
use platform_entry::seller::evaluate_exact;
use platform_entry::types::{
    CostMatrix, DiscountProfile, MarketConfig, PlatformPolicy, ProductSpec,
};

fn main() {
    let config = MarketConfig {
        products: vec![
            ProductSpec::new(0.8, 100.0, 0.0),
            ProductSpec::new(0.3, 200.0, 0.0),
        ],
        costs: CostMatrix(vec![vec![30.0, 45.0]]),
        discounts: DiscountProfile::default(),
        horizon: 12,
        n_sellers: 1,
    };
    let t_p = platform_entry::types::EntryTime::Steps(4);
    let exact = evaluate_exact(&PlatformPolicy::global(4), &config)
        .unwrap()
        .seller_utility;

    let hyper = Hyperparameters {
        lr: 0.002,
        explore_decay: 0.9997,
        target_sync: 200,
        hidden: 32,
        ..Hyperparameters::default()
    };
    println!("exact optimum: {exact:.2}");
    for episodes in [200u32, 1000, 3000] {
        let qs = train_independent(&config, t_p, &hyper, episodes, 5);
        let learned = greedy_value(&config, t_p, &qs, &hyper, 2000, 99)[0];
        println!(
            "after {episodes:>5} episodes: learned greedy value {learned:>8.2} ({:+.1}% of exact)",
            100.0 * (learned - exact) / exact
        );
    }
}
