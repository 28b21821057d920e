//! Fire-zone generation, disc coverage and sector anchors.
//!
//! cargo run --example geometry_coverage -- [seed]

use coalsim::geometry::{coverage_fraction, generate_fire_zone, sector_anchors, Disc, Point2D, DEFAULT_GRID_RESOLUTION};

fn main() -> coalsim::Result<()> {
    let seed = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(42);
    let side = 10_000.0;
    let zone = generate_fire_zone(side, seed, 12)?;
    println!("zone seed {seed}: {} vertices, area {:.0} m^2", zone.vertices().len(), zone.area());

    let centroid = zone.vertices().iter().fold(Point2D::new(0.0, 0.0), |acc, v| {
        let n = zone.vertices().len() as f64;
        Point2D::new(acc.x + v.x / n, acc.y + v.y / n)
    });
    for (label, center) in [("centroid", centroid), ("corner", Point2D::new(0.0, 0.0))] {
        let disc = Disc::new(center, 1500.0)?;
        let cov = coverage_fraction(&disc, &zone, DEFAULT_GRID_RESOLUTION)?;
        println!("{label:>8} ({:.0}, {:.0}): coverage {cov:.3}, inside zone {}", center.x, center.y, zone.contains(center));
        for (k, a) in sector_anchors(&disc, 3, 0.0).iter().enumerate() {
            println!("         sector {k} anchor ({:.0}, {:.0})", a.x, a.y);
        }
    }
    Ok(())
}
