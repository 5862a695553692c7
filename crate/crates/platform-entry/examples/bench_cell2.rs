//! Scratch: scan scenario seeds for learnable sweep structure.
use platform_entry::gittins::index_undeveloped;
use platform_entry::scenario::{generate, ScenarioKind, ScenarioParams};
use platform_entry::types::ProductSpec;

fn zero_boundary(p: &ProductSpec, cost: f64, shared: bool) -> Option<u32> {
    let spec = if shared { p.shared_rewards(2) } else { *p };
    (1..=30u32).find(|&t| {
        index_undeveloped(&spec, cost, 0.9, t as f64, 0.0).unwrap().value > 1e-9
    })
}

fn main() {
    let params = ScenarioParams::default();
    println!("== C1 ==");
    for seed in 200..200u64 {
        if let Ok(spec) = generate(ScenarioKind::C1Standard, &params, seed) {
            let c = &spec.config;
            let cl = zero_boundary(&c.products[0], c.costs.cost(0, 0), true);
            let ctrl: Vec<(f64, f64, Option<u32>, f64)> = (1..c.n_products())
                .map(|j| {
                    (
                        c.products[j].p_good,
                        c.costs.cost(0, j),
                        zero_boundary(&c.products[j], c.costs.cost(0, j), false),
                        spec.certificate.plain_index[0][j],
                    )
                })
                .collect();
            let good = cl.map_or(false, |b| b <= 3)
                && ctrl.iter().any(|(p, cost, b, _)| {
                    *p >= 0.8 && *cost < 600.0 && b.map_or(false, |b| (3..=9).contains(&b))
                });
            if good {
                println!(
                    "seed {seed}: cluster p={} r=({},{}) cost={:.0} shared-boundary={cl:?}; controls {:?}",
                    c.products[0].p_good, c.products[0].r_good, c.products[0].r_bad,
                    c.costs.cost(0, 0), ctrl
                );
            }
        }
    }
    println!("== D2 ==");
    for seed in 0..300u64 {
        if let Ok(spec) = generate(ScenarioKind::D2SpecGen, &params, seed) {
            let c = &spec.config;
            let spec_b = zero_boundary(&c.products[0], c.costs.cost(0, 0), false);
            let gen_b = zero_boundary(&c.products[1], c.costs.cost(1, 1), false);
            let gen_cross_b = zero_boundary(&c.products[0], c.costs.cost(1, 0), false);
            let ok = c.products[0].p_good >= 0.5
                && c.products[1].p_good >= 0.5
                && c.costs.cost(0, 0) < 650.0
                && c.costs.cost(1, 1) < 650.0
                && c.products[0].p_good >= 0.8
                && spec_b.map_or(false, |b| (3..=9).contains(&b))
                && gen_b.map_or(false, |b| (3..=9).contains(&b));
            if ok {
                println!(
                    "seed {seed}: spec p={} r=({},{}) c={:.0} b={spec_b:?} | gen p={} r=({},{}) c={:.0} b={gen_b:?} cross_b={gen_cross_b:?}",
                    c.products[0].p_good, c.products[0].r_good, c.products[0].r_bad, c.costs.cost(0,0),
                    c.products[1].p_good, c.products[1].r_good, c.products[1].r_bad, c.costs.cost(1,1),
                );
            }
        }
    }
}
