//! The centralized baseline in both search modes next to the distributed
//! protocol, on one seeded scenario.
//!
//! cargo run --release --example central_baseline -- [seed]

use coalsim::sim::{run_scenario, CentralMode, Method, Preset, ScenarioConfig};

fn main() -> coalsim::Result<()> {
    let seed = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(7);
    let base = ScenarioConfig { rng_seed: seed, ..ScenarioConfig::preset(Preset::Fig3) };

    let dist = run_scenario(&base, Method::Distributed)?;
    println!("distributed   value {:>14} mean distance {:>8.1} m", dist.total_value, dist.mean_distance_m);
    for mode in [CentralMode::Exhaustive, CentralMode::MinDistance] {
        let cfg = ScenarioConfig { central_mode: mode, ..base.clone() };
        let r = run_scenario(&cfg, Method::Central)?;
        println!("{:<13} value {:>14} mean distance {:>8.1} m", format!("{mode:?}"), r.total_value, r.mean_distance_m);
    }
    Ok(())
}
