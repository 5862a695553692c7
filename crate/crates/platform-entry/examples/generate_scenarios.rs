//! Generate one market environment of each scenario kind and print its
//! certificate: the index values proving the defining inequalities.

use platform_entry::scenario::{generate, validate_scenario, ScenarioKind, ScenarioParams};

fn main() {
    let params = ScenarioParams::default();
    for kind in ScenarioKind::all() {
        let spec = generate(kind, &params, 42).unwrap();
        println!("== {:?} (seed 42, G_bar = {}) ==", kind, params.g_bar);
        for (j, p) in spec.config.products.iter().enumerate() {
            let tag = if spec.certificate.focal.contains(&j) {
                "focal"
            } else {
                "control"
            };
            println!(
                "  product {j} [{tag}]: p={:.1} r_good={:.0} r_bad={:.0} costs=({:.1}, {:.1})",
                p.p_good,
                p.r_good,
                p.r_bad,
                spec.config.costs.cost(0, j),
                spec.config.costs.cost(1, j),
            );
        }
        for i in 0..2 {
            let plain: Vec<String> = spec.certificate.plain_index[i]
                .iter()
                .map(|v| format!("{v:.1}"))
                .collect();
            let clustered: Vec<String> = spec.certificate.clustered_index[i]
                .iter()
                .map(|v| format!("{v:.1}"))
                .collect();
            println!("  seller {i} plain index:     [{}]", plain.join(", "));
            println!("  seller {i} clustered index: [{}]", clustered.join(", "));
        }
        println!("  validates: {}\n", validate_scenario(&spec));
    }
}
