//! Minimum flight-time matching of coalition members to sectors.

use coalsim::geometry::{sector_anchors, Disc, Point2D};
use coalsim::protocol::assign_sectors;

fn main() -> coalsim::Result<()> {
    let disc = Disc::new(Point2D::new(5000.0, 5000.0), 1500.0)?;
    let anchors = sector_anchors(&disc, 3, 0.0);
    let members = [(10, Point2D::new(7000.0, 5200.0)), (11, Point2D::new(3000.0, 6500.0)), (12, Point2D::new(4500.0, 2000.0))];
    let speeds = [500.0, 250.0, 500.0];

    let a = assign_sectors(&members, &anchors, &speeds)?;
    for (id, sector) in &a.map {
        println!("uav {id} -> sector {sector}");
    }
    println!("total flight time {:.2} min", a.cost);
    Ok(())
}
