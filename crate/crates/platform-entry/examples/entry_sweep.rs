//! Small entry-time sweep over trained equilibria on a generated
//! clustered market. Full-scale sweeps run through the CLI; this keeps the
//! budget tiny so the example finishes in a couple of minutes.

use platform_entry::experiment::{sweep_csv, sweep_tp};
use platform_entry::marl::Hyperparameters;
use platform_entry::scenario::{generate, ScenarioKind, ScenarioParams};

fn main() {
    let spec = generate(ScenarioKind::C1Standard, &ScenarioParams::default(), 3).unwrap();
    let hyper = Hyperparameters {
        total_episodes: 600,
        eval_episodes: 120,
        ..Hyperparameters::desk_scale()
    };
    println!(
        "# clustered market, budget scale factor {:.5} of the full training run",
        hyper.scale_factor()
    );
    let report = sweep_tp(&spec.config, 1..=6, &[0, 1], 240, &hyper, 2);
    print!("{}", sweep_csv(&report));
    println!(
        "# T_p*(platform) = {:?}, T_p*(welfare) = {:?}",
        report.t_star_platform, report.t_star_welfare
    );
}
