//! Roll out the multi-seller market game with scripted actions and print
//! the trajectory log (line-delimited JSON, the replay format).

use platform_entry::game::{log_line, MarketGame, TrajectoryRecord};
use platform_entry::scenario::{generate, ScenarioKind, ScenarioParams};
use platform_entry::types::EntryTime;

fn main() {
    let spec = generate(ScenarioKind::C1Standard, &ScenarioParams::default(), 7).unwrap();
    let mut game = MarketGame::new(spec.config.clone(), EntryTime::Steps(4), 11).unwrap();
    println!("# clustered scenario, entry time 4, both sellers chase product 1");
    let m = spec.config.n_products();
    let mut t = 0u32;
    loop {
        // Both sellers offer the clustered product until it dies, then
        // walk the control products.
        let target = if game.state().product_states[0] != platform_entry::types::ProductState::Entered
        {
            1
        } else {
            1 + (t as usize % m)
        };
        let out = game.step(&vec![target, target]).unwrap();
        let record = TrajectoryRecord {
            t,
            joint_action: vec![target, target],
            seller_rewards: out.seller_rewards.clone(),
            platform_reward: out.platform_reward,
            product_states: out.next_state.product_states.clone(),
        };
        println!("{}", log_line(&record));
        t += 1;
        if out.done {
            break;
        }
    }
}
