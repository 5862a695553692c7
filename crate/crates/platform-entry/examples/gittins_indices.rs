//! Closed-form Gittins indices for the two canned product types, across
//! states, stopping rules, entry times, and fees.

use platform_entry::gittins::{index_rule2, index_rule3, index_state, index_undeveloped};
use platform_entry::types::{product_type_a, product_type_b, ProductState};

fn main() {
    let gamma = 0.9;
    for (name, (product, cost)) in [("Type A", product_type_a()), ("Type B", product_type_b())] {
        println!("{name}: p={} r_good={} r_bad={} cost={cost}", product.p_good, product.r_good, product.r_bad);
        println!("  T_p      rule2      rule3      index   rule");
        for t in [1.0, 2.0, 4.0, 8.0, 16.0, f64::INFINITY] {
            let v2 = index_rule2(&product, cost, gamma, t, 0.0).unwrap();
            let v3 = index_rule3(&product, cost, gamma, t, 0.0).unwrap();
            let top = index_undeveloped(&product, cost, gamma, t, 0.0).unwrap();
            println!("  {t:<6} {v2:>9.3} {v3:>10.3} {:>10.3}   {:?}", top.value, top.rule);
        }
        for state in [ProductState::Good, ProductState::Bad, ProductState::Entered] {
            let v = index_state(&product, cost, gamma, state, f64::INFINITY, 0.0).unwrap();
            println!("  state {state}: {v:.1}");
        }
        // A 25% transaction fee scales every receipt the seller keeps.
        let fee = index_undeveloped(&product, cost, gamma, f64::INFINITY, 0.25).unwrap();
        println!("  with alpha=0.25: {:.3} ({:?})", fee.value, fee.rule);
        println!();
    }
}
