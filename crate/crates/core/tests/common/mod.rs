//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use coalsim::geometry::Point2D;
use coalsim::model::{CoalitionRequirement, IdentityVector, UavAgent};
use coalsim::protocol::CoalitionSpec;
use coalsim::sim::{run_scenario, FailureEvent, Method, Preset, ScenarioConfig};

pub const TIE: f64 = 1e-9;

fn dist(a: Point2D, b: Point2D) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

/// All permutations of `0..n` in lexicographic order.
pub fn lex_permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for s in 0..n {
            if !cur.contains(&s) {
                cur.push(s);
                go(n, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(n, &mut Vec::new(), &mut out);
    out
}

/// Minimum summed flight time over all orderings; the winner is the
/// lexicographically first permutation within `TIE` of the minimum.
pub fn sector_oracle(members: &[Point2D], anchors: &[Point2D], speeds: &[f64]) -> (f64, Vec<usize>) {
    let costs: Vec<(f64, Vec<usize>)> = lex_permutations(members.len())
        .into_iter()
        .map(|p| {
            let c = p.iter().enumerate().map(|(i, &s)| dist(members[i], anchors[s]) / speeds[i]).sum();
            (c, p)
        })
        .collect();
    let best = costs.iter().map(|(c, _)| *c).fold(f64::INFINITY, f64::min);
    costs.into_iter().find(|(c, _)| *c <= best + TIE).expect("at least one permutation")
}

/// Eligibility written out from the contract: alive, in broadcast range of
/// the leader, qualified, and able to reach the far edge of the circle and
/// still work the whole mission.
pub fn may_serve(u: &UavAgent, spec: &CoalitionSpec, comm_range: f64, mission: f64) -> bool {
    u.alive
        && dist(u.position, spec.leader_position) <= comm_range
        && u.identity.properties.iter().zip(&spec.requirement.properties_floor).all(|(p, f)| p >= f)
        && u.remaining_flight_time >= (dist(u.position, spec.center) + spec.radius) / u.speed + mission
}

/// Best (filled positions, total follower-to-anchor distance) over every
/// partial injective map of positions to eligible followers.
pub fn min_distance_oracle(followers: &[UavAgent], specs: &[CoalitionSpec], comm_range: f64, mission: f64) -> (usize, f64) {
    let slots: Vec<(usize, Point2D)> =
        specs.iter().enumerate().flat_map(|(c, s)| s.anchors.iter().map(move |a| (c, *a))).collect();
    fn go(
        k: usize,
        slots: &[(usize, Point2D)],
        allowed: &dyn Fn(usize, usize) -> Option<f64>,
        used: &mut Vec<bool>,
        acc: (usize, f64),
        best: &mut (usize, f64),
    ) {
        if k == slots.len() {
            if acc.0 > best.0 || (acc.0 == best.0 && acc.1 < best.1) {
                *best = acc;
            }
            return;
        }
        go(k + 1, slots, allowed, used, acc, best);
        for i in 0..used.len() {
            if used[i] {
                continue;
            }
            if let Some(d) = allowed(k, i) {
                used[i] = true;
                go(k + 1, slots, allowed, used, (acc.0 + 1, acc.1 + d), best);
                used[i] = false;
            }
        }
    }
    let allowed = |k: usize, i: usize| {
        let (c, anchor) = slots[k];
        may_serve(&followers[i], &specs[c], comm_range, mission).then(|| dist(followers[i].position, anchor))
    };
    let mut best = (0, 0.0);
    go(0, &slots, &allowed, &mut vec![false; followers.len()], (0, 0.0), &mut best);
    best
}

pub fn follower(id: u32, x: f64, y: f64, property: f64, battery: f64, speed: f64) -> UavAgent {
    UavAgent {
        id,
        position: Point2D::new(x, y),
        identity: IdentityVector::new(vec![property], vec![battery]).unwrap(),
        remaining_flight_time: battery,
        speed,
        alive: true,
    }
}

pub fn single_resource_requirement() -> CoalitionRequirement {
    CoalitionRequirement { properties_floor: vec![1.0], resources_total: vec![0.0] }
}

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

/// Setup with batteries long enough that every coalition fills.
pub fn failure_base() -> ScenarioConfig {
    ScenarioConfig { rng_seed: 3, battery_min: 60.0, battery_max: 90.0, ..ScenarioConfig::preset(Preset::Fig3) }
}

pub fn member_failure_config() -> (ScenarioConfig, u32) {
    let base = failure_base();
    let healthy = run_scenario(&base, Method::Distributed).unwrap();
    let victim = healthy.coalitions[0].members[0];
    (ScenarioConfig { failures: vec![FailureEvent { time: 10.0, uav: victim }], ..base }, victim)
}

pub fn leader_failure_config() -> (ScenarioConfig, u32) {
    let base = failure_base();
    let healthy = run_scenario(&base, Method::Distributed).unwrap();
    let leader = healthy.coalitions[1].leader_id;
    (ScenarioConfig { failures: vec![FailureEvent { time: 5.0, uav: leader }], ..base }, leader)
}

/// Compares `actual` with the frozen file, or rewrites it when
/// UPDATE_GOLDEN is set.
pub fn check_golden(name: &str, actual: &str) -> Result<(), String> {
    let path = golden_dir().join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(golden_dir()).map_err(|e| e.to_string())?;
        std::fs::write(&path, actual).map_err(|e| e.to_string())?;
        return Ok(());
    }
    let expected = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if expected == actual {
        Ok(())
    } else {
        let line = expected.lines().zip(actual.lines()).position(|(a, b)| a != b);
        Err(format!("{name} differs from the golden log (first differing line {line:?})"))
    }
}
