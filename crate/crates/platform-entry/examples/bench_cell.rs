//! Scratch: empirical sweep check on candidate seeds.
use platform_entry::experiment::sweep_tp;
use platform_entry::marl::Hyperparameters;
use platform_entry::scenario::{generate, ScenarioKind, ScenarioParams};

fn main() {
    let hyper = Hyperparameters {
        lr: 0.001,
        total_episodes: 4000,
        explore_decay: 0.9995,
        br_explore_decay: 0.99925,
        eval_episodes: 200,
        target_sync: 200,
        ..Hyperparameters::default()
    };
    for (label, kind, seed) in [
        ("C1", ScenarioKind::C1Standard, 27u64),
        ("D2", ScenarioKind::D2SpecGen, 50),
    ] {
        let spec = generate(kind, &ScenarioParams::default(), seed).unwrap();
        let t0 = std::time::Instant::now();
        let report = sweep_tp(&spec.config, 1..=15, &[0], 600, &hyper, 2);
        println!("== {label} gen-seed {seed} took {:.0?}", t0.elapsed());
        for a in &report.aggregates {
            println!(
                "T={:<2} conv {}/{} platform {:>8.1} seller {:>7.1} buyer {:>7.1} welfare {:>8.1} explored {:.3} variety {:.3} cluster {:.3}",
                a.t_p, a.n_converged, a.n_cells, a.platform.mean, a.seller.mean, a.buyer.mean,
                a.welfare.mean, a.products_explored.mean, a.product_variety.mean, a.cluster_rate.mean
            );
        }
        println!(
            "T*platform={:?} T*welfare={:?}",
            report.t_star_platform, report.t_star_welfare
        );
    }
}
