//! One hundred seeded runs of the second published setup (N=15, C=3, S=2),
//! comparing mean member-to-anchor distance per sector position.
//!
//! cargo run --release --example fig4_batch -- [runs] [base_seed]

use coalsim::sim::{run_batch, Preset, ScenarioConfig};

fn main() -> coalsim::Result<()> {
    let mut args = std::env::args().skip(1);
    let runs = args.next().and_then(|a| a.parse().ok()).unwrap_or(100);
    let mut cfg = ScenarioConfig::preset(Preset::Fig4);
    if let Some(seed) = args.next().and_then(|a| a.parse().ok()) {
        cfg.rng_seed = seed;
    }
    let batch = run_batch(&cfg, runs, rayon::current_num_threads())?;
    let m = &batch.metrics;

    println!("position  distributed_m  central_m  filled(d/c)");
    for p in &m.positions {
        let show = |v: Option<f64>| v.map_or("-".to_string(), |d| format!("{d:.1}"));
        println!(
            "{:>8}  {:>13}  {:>9}  {}/{}",
            p.position,
            show(p.distributed_mean_m),
            show(p.central_mean_m),
            p.distributed_filled,
            p.central_filled
        );
    }
    println!("mean distance: distributed {:.1} m, central {:.1} m", m.mean_distance_distributed_m, m.mean_distance_central_m);
    println!("relative gap: {:.1}%", 100.0 * m.relative_gap);
    println!("central never worse per position: {}", m.central_never_worse());
    println!("dominance violations: {}", m.dominance_violations);
    Ok(())
}
