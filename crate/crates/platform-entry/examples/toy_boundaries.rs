//! Boundary and region structure of the two-product toy market (one
//! Type A, one Type B): seller-indifference boundaries, the four regions
//! they induce, each region's Pareto candidate, and the optimal policies
//! in the global and heterogeneous settings.

use platform_entry::optimizer::{
    enumerate_regions, optimize, pareto_candidates, solve_boundaries, Bounds, Constraints,
    PolicySetting,
};
use platform_entry::types::ab_market;

fn main() {
    let config = ab_market(1, 1);
    let bounds = Bounds::default();

    let boundaries = solve_boundaries(&config, PolicySetting::Global, &bounds);
    println!("boundaries (global entry):");
    for b in &boundaries {
        println!("  {:?}", b);
    }

    let regions = enumerate_regions(&config, &boundaries, PolicySetting::Global, &bounds).unwrap();
    println!("\nregions and Pareto candidates:");
    for (k, r) in regions.iter().enumerate() {
        let candidates: Vec<String> = pareto_candidates(r).iter().map(|p| p.to_string()).collect();
        println!(
            "  region {k}: {} integer policies, signs {:?}, candidates {}",
            r.size,
            r.sign_vector,
            candidates.join(", ")
        );
    }

    let (global, u_global) =
        optimize(&config, PolicySetting::Global, Constraints::default(), &bounds).unwrap();
    println!("\noptimal global policy: {global} (platform utility {u_global:.2})");

    let (hetero, u_hetero) = optimize(
        &config,
        PolicySetting::Heterogeneous,
        Constraints::default(),
        &bounds,
    )
    .unwrap();
    println!("optimal heterogeneous policy: {hetero} (platform utility {u_hetero:.2})");
}
