//! Greedy hill-climbing of leader circles onto the fire zone.
//!
//! cargo run --release --example leader_placement -- [zone_seed] [leaders]

use coalsim::geometry::{generate_fire_zone, Point2D};
use coalsim::placement::{place_leaders, PlacementConfig};

fn main() -> coalsim::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed = args.next().and_then(|a| a.parse().ok()).unwrap_or(42);
    let leaders: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(3);
    let side = 10_000.0;
    let zone = generate_fire_zone(side, seed, 12)?;
    let starts: Vec<Point2D> =
        (0..leaders).map(|i| Point2D::new(side * (i as f64 + 0.5) / leaders as f64, 0.1 * side)).collect();

    let placement = place_leaders(&zone, &starts, &PlacementConfig::for_field(side))?;
    println!("converged {} after {} rounds, {} accepted moves", placement.converged, placement.rounds, placement.trace.len());
    for step in placement.trace.iter().take(10) {
        println!(
            "round {:>3} leader {} {:?}: score {:.3} -> {:.3}",
            step.round, step.leader, step.chosen, step.before.coverage, step.after.coverage
        );
    }
    for (i, c) in placement.centers.iter().enumerate() {
        println!("leader {i} at ({:.0}, {:.0})", c.x, c.y);
    }
    Ok(())
}
