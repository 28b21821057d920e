use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use crate::geometry::Point2D;
use crate::model::{IdentityVector, UavAgent, UavId};

/// Stream of the seeded generator reserved for the fleet. The fire zone uses
/// the default stream of the same seed.
pub const FLEET_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fleet {
    /// Ids `0..C`.
    pub leaders: Vec<UavAgent>,
    /// Ids `C..C+N`.
    pub followers: Vec<UavAgent>,
}

/// Draws the fleet. Order of draws: every leader's x then y, then per
/// follower x, y, flight time and the property draw.
///
/// Each UAV carries one property (1 when qualified, else 0) and one
/// resource equal to its flight time in minutes.
pub fn generate_fleet(cfg: &ScenarioConfig) -> Fleet {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    rng.set_stream(FLEET_STREAM);
    let l = cfg.field_side;
    let coord = |rng: &mut ChaCha8Rng| Point2D::new(rng.gen_range(0.0..=l), rng.gen_range(0.0..=l));

    let leaders = (0..cfg.n_leaders)
        .map(|c| {
            let position = coord(&mut rng);
            agent(c as UavId, position, 1.0, cfg.battery_max, cfg.speed)
        })
        .collect();
    let followers = (0..cfg.n_followers)
        .map(|i| {
            let position = coord(&mut rng);
            let battery = if cfg.battery_min < cfg.battery_max {
                rng.gen_range(cfg.battery_min..cfg.battery_max)
            } else {
                cfg.battery_min
            };
            let qualified = rng.gen::<f64>() < cfg.qualified_fraction;
            agent((cfg.n_leaders + i) as UavId, position, if qualified { 1.0 } else { 0.0 }, battery, cfg.speed)
        })
        .collect();
    Fleet { leaders, followers }
}

fn agent(id: UavId, position: Point2D, property: f64, battery: f64, speed: f64) -> UavAgent {
    UavAgent {
        id,
        position,
        identity: IdentityVector::new(vec![property], vec![battery]).expect("non-negative draws"),
        remaining_flight_time: battery,
        speed,
        alive: true,
    }
}
