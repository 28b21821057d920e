//! Two leaders competing for five followers over the bid-response protocol.

use coalsim::geometry::{sector_anchors, Disc, Point2D};
use coalsim::model::{CoalitionRequirement, IdentityVector, UavAgent, ValueParams};
use coalsim::protocol::{run_negotiation, CoalitionSpec, EligibilityRules, FollowerAgent, LeaderAgent, NegotiationSettings, Transport};

fn uav(id: u32, x: f64, y: f64, battery: f64) -> UavAgent {
    UavAgent {
        id,
        position: Point2D::new(x, y),
        identity: IdentityVector::new(vec![1.0], vec![battery]).expect("valid identity"),
        remaining_flight_time: battery,
        speed: 1000.0,
        alive: true,
    }
}

fn spec(leader_id: u32, center: Point2D) -> coalsim::Result<CoalitionSpec> {
    let disc = Disc::new(center, 500.0)?;
    Ok(CoalitionSpec {
        leader_id,
        leader_position: center,
        center,
        radius: 500.0,
        requirement: CoalitionRequirement { properties_floor: vec![1.0], resources_total: vec![0.0] },
        anchors: sector_anchors(&disc, 2, 0.0),
        region_priority: 1.0,
    })
}

fn main() -> coalsim::Result<()> {
    let mut leaders = vec![
        LeaderAgent::new(spec(0, Point2D::new(2000.0, 2000.0))?),
        LeaderAgent::new(spec(1, Point2D::new(4000.0, 2000.0))?),
    ];
    let mut followers: Vec<FollowerAgent> = [
        uav(2, 2500.0, 2500.0, 30.0),
        uav(3, 3000.0, 2000.0, 30.0),
        uav(4, 3500.0, 1500.0, 30.0),
        uav(5, 1500.0, 1500.0, 30.0),
        uav(6, 3000.0, 3000.0, 30.0),
    ]
    .into_iter()
    .map(FollowerAgent::new)
    .collect();

    let mut transport = Transport::new(5000.0);
    let settings = NegotiationSettings {
        mission_time: 15.0,
        params: ValueParams::default(),
        rules: EligibilityRules { comm_range: 5000.0, max_distance: None },
        max_rounds: 20,
    };
    let out = run_negotiation(&mut leaders, &mut followers, &mut transport, &settings)?;

    println!("{} rounds, {} logged events", out.rounds, transport.log().len());
    for (co, score) in out.coalitions.iter().zip(&out.scores) {
        println!("leader {}: members {:?} sectors {:?} score {score}", co.leader_id, co.members, co.sector_map);
    }
    for e in transport.log().iter().filter(|e| e.kind == "bid" || e.kind == "bid_reply").take(8) {
        println!("round {} {:?} -> {:?}: {} {}", e.round, e.from, e.to, e.kind, e.payload);
    }
    Ok(())
}
