//! The first published setup (N=20, C=3, S=3): one scenario, both methods.
//!
//! cargo run --release --example fig3_scenario -- [seed]

use coalsim::sim::{run_scenario, Method, Preset, ScenarioConfig};

fn main() -> coalsim::Result<()> {
    let mut cfg = ScenarioConfig::preset(Preset::Fig3);
    if let Some(seed) = std::env::args().nth(1).and_then(|a| a.parse().ok()) {
        cfg.rng_seed = seed;
    }
    for method in Method::ALL {
        let r = run_scenario(&cfg, method)?;
        println!("{method}: coverage {:?}", r.coverage.iter().map(|c| format!("{c:.2}")).collect::<Vec<_>>());
        for (co, v) in r.coalitions.iter().zip(&r.values) {
            println!(
                "  leader {} at ({:.0}, {:.0}): members {:?} value {v}",
                co.leader_id, co.center.x, co.center.y, co.members
            );
        }
        println!("  mean distance {:.1} m, total value {}", r.mean_distance_m, r.total_value);
    }
    Ok(())
}
