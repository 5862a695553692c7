//! Optimal platform policies under regulatory constraints: a fee cap in
//! the safe-heavy market, an entry floor in the risky-heavy one, and the
//! unconstrained optima for comparison.

use platform_entry::optimizer::{optimize, Bounds, Constraints, PolicySetting};
use platform_entry::seller::evaluate_exact;
use platform_entry::types::{ab_market, MarketConfig};

fn report(label: &str, config: &MarketConfig, setting: PolicySetting, constraints: Constraints) {
    let (policy, utility) = optimize(config, setting, constraints, &Bounds::default()).unwrap();
    let m = evaluate_exact(&policy, config).unwrap();
    println!(
        "{label:<28} {policy:<24} platform {utility:>8.1}  seller {:>7.1}  buyer {:>7.1}",
        m.seller_utility, m.buyer_utility
    );
}

fn main() {
    let safe_heavy = ab_market(3, 1);
    let risky_heavy = ab_market(1, 3);

    println!("3A1B:");
    report("  global", &safe_heavy, PolicySetting::Global, Constraints::default());
    report("  fee", &safe_heavy, PolicySetting::GlobalFee, Constraints::default());
    report(
        "  fee, cap alpha <= 0.2",
        &safe_heavy,
        PolicySetting::GlobalFee,
        Constraints {
            alpha_cap: Some(0.2),
            entry_floor: None,
        },
    );
    report("  heterogeneous", &safe_heavy, PolicySetting::Heterogeneous, Constraints::default());

    println!("1A3B:");
    report("  global", &risky_heavy, PolicySetting::Global, Constraints::default());
    report("  fee", &risky_heavy, PolicySetting::GlobalFee, Constraints::default());
    report("  heterogeneous", &risky_heavy, PolicySetting::Heterogeneous, Constraints::default());
    report(
        "  heterogeneous, floor 5",
        &risky_heavy,
        PolicySetting::Heterogeneous,
        Constraints {
            alpha_cap: None,
            entry_floor: Some(5),
        },
    );
}
