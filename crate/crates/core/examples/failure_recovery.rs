//! Scripted member and leader failures during the mission.

use coalsim::sim::{run_scenario, FailureEvent, Method, Preset, ScenarioConfig, SlotRole};

fn main() -> coalsim::Result<()> {
    let base = ScenarioConfig { rng_seed: 3, battery_min: 60.0, battery_max: 90.0, ..ScenarioConfig::preset(Preset::Fig3) };
    let healthy = run_scenario(&base, Method::Distributed)?;
    let member = healthy.coalitions[0].members[0];
    let leader = healthy.coalitions[1].leader_id;
    println!("failing member {member} at t=10 and leader {leader} at t=5");

    let cfg = ScenarioConfig {
        failures: vec![FailureEvent { time: 10.0, uav: member }, FailureEvent { time: 5.0, uav: leader }],
        ..base
    };
    let r = run_scenario(&cfg, Method::Distributed)?;
    for m in r.members.iter().filter(|m| m.role != SlotRole::Member) {
        println!(
            "uav {:>2} {:?} coalition {} sector {} from t={:.2}: flew {:.0} m, battery {:.2} -> {:.2}",
            m.uav_id, m.role, m.coalition, m.sector, m.dispatched_at, m.distance_m, m.initial_flight_time, m.final_flight_time
        );
    }
    for e in r.events.iter().filter(|e| matches!(e.kind.as_str(), "member_failed" | "leader_failed" | "promoted" | "replacement")) {
        println!("{} {}", e.kind, e.payload);
    }
    for co in &r.coalitions {
        println!("coalition led by {}: members {:?} complete {}", co.leader_id, co.members, co.is_complete());
    }
    Ok(())
}
