use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::config::{CentralMode, ScenarioConfig, SCHEMA_VERSION};
use super::fleet::{generate_fleet, Fleet};
use crate::central::{central_min_distance_assignment, central_optimal_assignment, MAX_EXHAUSTIVE_POSITIONS};
use crate::error::{Error, Result};
use crate::geometry::{coverage_fraction, distance, generate_fire_zone, sector_anchors, Disc, FireZone, Point2D};
use crate::model::{aggregate_requirements, coalition_score, feasible_for_mission, Coalition, IdentityVector, Task, UavAgent, UavId};
use crate::placement::place_leaders;
use crate::protocol::{
    handle_leader_failure, handle_member_failure, run_negotiation, AgentRef, CoalitionSpec, Event, FailureContext,
    FollowerAgent, FollowerPhase, LeaderAgent, NegotiationSettings, Recovery, Transport,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Distributed,
    Central,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Distributed, Method::Central];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Distributed => "distributed",
            Method::Central => "central",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotRole {
    Member,
    Replacement,
    Failed,
    Promoted,
}

/// One UAV's stint in one sector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemberRecord {
    pub uav_id: UavId,
    pub coalition: usize,
    pub sector: usize,
    pub role: SlotRole,
    pub anchor: Point2D,
    /// Minutes after the first dispatch.
    pub dispatched_at: f64,
    pub distance_m: f64,
    pub travel_min: f64,
    pub hover_min: f64,
    pub initial_flight_time: f64,
    pub final_flight_time: f64,
    #[serde(skip)]
    origin: Point2D,
    #[serde(skip)]
    speed: f64,
    #[serde(skip)]
    planned_distance: f64,
    #[serde(skip)]
    planned_hover: f64,
}

impl MemberRecord {
    fn arrival(&self) -> f64 {
        self.dispatched_at + self.planned_distance / self.speed
    }

    fn sector_end(&self) -> f64 {
        self.arrival() + self.planned_hover
    }

    fn position_at(&self, t: f64) -> Point2D {
        let planned = self.planned_distance;
        let flown = ((t - self.dispatched_at) * self.speed).clamp(0.0, planned);
        if planned == 0.0 {
            return self.anchor;
        }
        let f = flown / planned;
        Point2D::new(self.origin.x + f * (self.anchor.x - self.origin.x), self.origin.y + f * (self.anchor.y - self.origin.y))
    }

    fn battery_at(&self, t: f64) -> f64 {
        self.initial_flight_time - (t - self.dispatched_at).clamp(0.0, self.planned_distance / self.speed + self.planned_hover)
    }

    /// Stops the stint at time `t`.
    fn cut(&mut self, t: f64, role: SlotRole) {
        let elapsed = (t - self.dispatched_at).max(0.0);
        let full_travel = self.planned_distance / self.speed;
        self.travel_min = elapsed.min(full_travel);
        self.hover_min = (elapsed - full_travel).clamp(0.0, self.planned_hover);
        self.distance_m = self.travel_min * self.speed;
        self.final_flight_time = self.initial_flight_time - self.travel_min - self.hover_min;
        self.role = role;
    }
}

/// The UAV dispatched to one position at formation time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionRecord {
    pub coalition: usize,
    pub sector: usize,
    pub uav_id: Option<UavId>,
    pub distance_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioResult {
    pub schema_version: u32,
    pub method: Method,
    pub seed: u64,
    pub zone: FireZone,
    pub fleet: Fleet,
    pub leader_starts: Vec<Point2D>,
    pub centers: Vec<Point2D>,
    /// Unclamped coverage of each coalition circle.
    pub coverage: Vec<f64>,
    pub placement_converged: bool,
    pub negotiation_rounds: u32,
    /// Coalitions after the mission, failures applied.
    pub coalitions: Vec<Coalition>,
    /// Scores at formation; incomplete coalitions carry the incomplete penalty.
    pub values: Vec<f64>,
    pub total_value: f64,
    pub complete: Vec<bool>,
    pub positions: Vec<PositionRecord>,
    pub members: Vec<MemberRecord>,
    pub total_distance_m: f64,
    pub mean_distance_m: f64,
    #[serde(skip)]
    pub events: Vec<Event>,
}

impl ScenarioResult {
    pub fn all_complete(&self) -> bool {
        self.complete.iter().all(|c| *c)
    }

    pub fn events_jsonl(&self) -> String {
        crate::protocol::events_to_jsonl(&self.events)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Setup {
    pub zone: FireZone,
    pub fleet: Fleet,
    pub centers: Vec<Point2D>,
    pub converged: bool,
    pub specs: Vec<CoalitionSpec>,
}

pub(crate) fn setup(cfg: &ScenarioConfig) -> Result<Setup> {
    cfg.validate()?;
    let zone = generate_fire_zone(cfg.field_side, cfg.rng_seed, cfg.zone_complexity)?;
    let fleet = generate_fleet(cfg);
    let starts: Vec<Point2D> = fleet.leaders.iter().map(|l| l.position).collect();
    let placement = place_leaders(&zone, &starts, &cfg.placement())?;
    let mut specs = Vec::with_capacity(cfg.n_leaders);
    for (c, (leader, center)) in fleet.leaders.iter().zip(&placement.centers).enumerate() {
        let tasks: Vec<Task> = (0..cfg.tasks_per_coalition)
            .map(|k| Task {
                id: (c * cfg.tasks_per_coalition + k) as u32,
                required_properties: vec![1.0],
                required_resources: vec![cfg.task_resource],
                location: *center,
            })
            .collect();
        let disc = Disc::new(*center, cfg.coalition_radius)?;
        specs.push(CoalitionSpec {
            leader_id: leader.id,
            leader_position: *center,
            center: *center,
            radius: cfg.coalition_radius,
            requirement: aggregate_requirements(&tasks)?,
            anchors: sector_anchors(&disc, cfg.sectors, 0.0),
            region_priority: cfg.region_priority(c),
        });
    }
    Ok(Setup { zone, fleet, centers: placement.centers, converged: placement.converged, specs })
}

/// Generates zone and fleet, places the leaders, forms coalitions with the
/// chosen method, flies the mission and applies the failure schedule.
pub fn run_scenario(cfg: &ScenarioConfig, method: Method) -> Result<ScenarioResult> {
    run_prepared(cfg, &setup(cfg)?, method)
}

pub(crate) fn run_prepared(cfg: &ScenarioConfig, setup: &Setup, method: Method) -> Result<ScenarioResult> {
    let mut transport = Transport::new(cfg.comm_range);
    let mut followers: Vec<FollowerAgent> = setup.fleet.followers.iter().cloned().map(FollowerAgent::new).collect();

    let (coalitions, rounds) = match method {
        Method::Distributed => {
            let mut leaders: Vec<LeaderAgent> = setup.specs.iter().cloned().map(LeaderAgent::new).collect();
            let settings = NegotiationSettings {
                mission_time: cfg.mission_time,
                params: cfg.value_params(),
                rules: cfg.rules(),
                max_rounds: cfg.max_rounds,
            };
            let out = run_negotiation(&mut leaders, &mut followers, &mut transport, &settings)?;
            (out.coalitions, out.rounds)
        }
        Method::Central => {
            let exhaustive = match cfg.central_mode {
                CentralMode::Auto => cfg.positions() <= MAX_EXHAUSTIVE_POSITIONS,
                CentralMode::Exhaustive => true,
                CentralMode::MinDistance => false,
            };
            let solve = if exhaustive { central_optimal_assignment } else { central_min_distance_assignment };
            let out = solve(&setup.fleet.followers, &setup.specs, &cfg.rules(), cfg.mission_time, cfg.value_params())?;
            for f in &mut followers {
                if let Some(c) = out.coalitions.iter().find(|c| c.members.contains(&f.uav.id)) {
                    f.state.phase = FollowerPhase::Committed;
                    f.state.committed_to = Some(c.leader_id);
                }
            }
            (out.coalitions, 0)
        }
    };

    let mut values = Vec::with_capacity(coalitions.len());
    let mut positions = Vec::new();
    let mut members = Vec::new();
    for (c, co) in coalitions.iter().enumerate() {
        let identities: Vec<IdentityVector> = co
            .members
            .iter()
            .map(|id| follower(&followers, *id).uav.identity.clone())
            .collect();
        values.push(coalition_score(&identities, &co.requirement, co.sectors(), cfg.value_params())?);
        let by_sector: BTreeMap<usize, UavId> = co.sector_map.iter().map(|(id, s)| (*s, *id)).collect();
        for (sector, anchor) in co.anchors.iter().enumerate() {
            let uav = by_sector.get(&sector).copied();
            let mut d = None;
            if let Some(id) = uav {
                let agent = &follower(&followers, id).uav;
                if !feasible_for_mission(agent, *anchor, cfg.mission_time) {
                    return Err(Error::Invariant(format!("uav {id} dispatched without enough battery")));
                }
                let rec = dispatch(agent, c, sector, *anchor, 0.0, cfg.mission_time, SlotRole::Member);
                d = Some(rec.distance_m);
                members.push(rec);
            }
            positions.push(PositionRecord { coalition: c, sector, uav_id: uav, distance_m: d });
        }
    }
    let complete: Vec<bool> = coalitions.iter().map(Coalition::is_complete).collect();

    let mut mission = Mission { cfg, followers, members, coalitions, transport };
    mission.transport.set_round(rounds + 1);
    mission.run_failures()?;
    let Mission { coalitions, members, transport, .. } = mission;

    for m in &members {
        let expected = m.initial_flight_time - m.travel_min - m.hover_min;
        if (m.final_flight_time - expected).abs() > 1e-9 || m.final_flight_time < -1e-9 {
            return Err(Error::Invariant(format!("battery of uav {} not conserved", m.uav_id)));
        }
    }

    let coverage = setup
        .centers
        .iter()
        .map(|c| coverage_fraction(&Disc::new(*c, cfg.coalition_radius)?, &setup.zone, cfg.grid_resolution))
        .collect::<Result<Vec<_>>>()?;
    let total_distance_m: f64 = members.iter().map(|m| m.distance_m).sum();
    let mean_distance_m = if members.is_empty() { 0.0 } else { total_distance_m / members.len() as f64 };
    Ok(ScenarioResult {
        schema_version: SCHEMA_VERSION,
        method,
        seed: cfg.rng_seed,
        leader_starts: setup.fleet.leaders.iter().map(|l| l.position).collect(),
        zone: setup.zone.clone(),
        fleet: setup.fleet.clone(),
        centers: setup.centers.clone(),
        coverage,
        placement_converged: setup.converged,
        negotiation_rounds: rounds,
        coalitions,
        total_value: values.iter().sum(),
        values,
        complete,
        positions,
        members,
        total_distance_m,
        mean_distance_m,
        events: transport.into_log(),
    })
}

fn follower(followers: &[FollowerAgent], id: UavId) -> &FollowerAgent {
    followers.iter().find(|f| f.uav.id == id).expect("coalition members are followers")
}

fn dispatch(agent: &UavAgent, coalition: usize, sector: usize, anchor: Point2D, t: f64, hover: f64, role: SlotRole) -> MemberRecord {
    let d = distance(agent.position, anchor);
    MemberRecord {
        uav_id: agent.id,
        coalition,
        sector,
        role,
        anchor,
        dispatched_at: t,
        distance_m: d,
        travel_min: d / agent.speed,
        hover_min: hover,
        initial_flight_time: agent.remaining_flight_time,
        final_flight_time: agent.remaining_flight_time - d / agent.speed - hover,
        origin: agent.position,
        speed: agent.speed,
        planned_distance: d,
        planned_hover: hover,
    }
}

fn context<'t>(
    cfg: &ScenarioConfig,
    transport: &'t mut Transport,
    leader_position: Point2D,
    c: usize,
    hover_left: f64,
) -> FailureContext<'t> {
    FailureContext {
        transport,
        rules: cfg.rules(),
        params: cfg.value_params(),
        mission_time: hover_left.max(0.0),
        leader_position,
        radius: cfg.coalition_radius,
        region_priority: cfg.region_priority(c),
    }
}

struct Mission<'a> {
    cfg: &'a ScenarioConfig,
    followers: Vec<FollowerAgent>,
    members: Vec<MemberRecord>,
    coalitions: Vec<Coalition>,
    transport: Transport,
}

impl Mission<'_> {
    fn run_failures(&mut self) -> Result<()> {
        let mut schedule = self.cfg.failures.clone();
        schedule.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.uav.cmp(&b.uav)));
        for ev in schedule {
            self.fail(ev.time, ev.uav)?;
        }
        Ok(())
    }

    /// Index of the active stint of `uav`.
    fn active_slot(&self, uav: UavId, t: f64) -> Option<usize> {
        self.members.iter().rposition(|m| {
            m.uav_id == uav && matches!(m.role, SlotRole::Member | SlotRole::Replacement) && m.sector_end() > t
        })
    }

    /// Brings follower positions and batteries up to time `t`.
    fn sync(&mut self, t: f64) {
        for i in 0..self.members.len() {
            let m = &self.members[i];
            if !matches!(m.role, SlotRole::Member | SlotRole::Replacement) {
                continue;
            }
            let (id, pos, battery) = (m.uav_id, m.position_at(t), m.battery_at(t));
            if let Some(f) = self.followers.iter_mut().find(|f| f.uav.id == id) {
                f.uav.position = pos;
                f.uav.remaining_flight_time = battery;
            }
        }
    }

    fn fail(&mut self, t: f64, uav: UavId) -> Result<()> {
        self.sync(t);
        let led = self.coalitions.iter().position(|c| c.leader_id == uav);
        let leader_alive = led.is_some() && !self.followers.iter().any(|f| f.uav.id == uav && !f.uav.alive);
        let note = |tr: &mut Transport, kind: &str| {
            tr.note(AgentRef::follower(uav), kind, json!({ "time": t }));
        };

        if let (Some(c), true) = (led, leader_alive) {
            let leader_position = self.coalitions[c].center;
            if let Some(f) = self.followers.iter_mut().find(|f| f.uav.id == uav) {
                f.uav.alive = false;
            }
            let co = self.coalitions[c].clone();
            // the promoted member's sector is refilled for the rest of its stint
            let hover_left = self
                .promotion_candidate(&co, t)
                .map_or(self.cfg.mission_time, |i| self.members[i].sector_end() - t.max(self.members[i].arrival()));
            let mut ctx = context(self.cfg, &mut self.transport, leader_position, c, hover_left);
            match handle_leader_failure(&co, &mut self.followers, &mut ctx) {
                Ok(rec) => {
                    if let Some(p) = rec.promoted {
                        if let Some(i) = self.active_slot(p, t) {
                            self.members[i].cut(t, SlotRole::Promoted);
                        }
                    }
                    self.apply(c, rec, t, hover_left)?;
                }
                Err(Error::CoalitionDissolved(_)) => {
                    self.coalitions[c].degraded = true;
                    self.coalitions[c].members.clear();
                    self.coalitions[c].sector_map.clear();
                    self.transport.note(AgentRef::leader(uav), "dissolved", json!({ "time": t }));
                }
                Err(e) => return Err(e),
            }
            return Ok(());
        }

        let Some(i) = self.active_slot(uav, t) else {
            if let Some(f) = self.followers.iter_mut().find(|f| f.uav.id == uav) {
                f.uav.alive = false;
            }
            note(&mut self.transport, "uav_failed");
            return Ok(());
        };
        let c = self.members[i].coalition;
        let hover_left = self.members[i].sector_end() - t.max(self.members[i].arrival());
        self.members[i].cut(t, SlotRole::Failed);
        let leader_position = self.leader_position(c, t);
        let co = self.coalitions[c].clone();
        let mut ctx = context(self.cfg, &mut self.transport, leader_position, c, hover_left);
        let rec = handle_member_failure(&co, uav, &mut self.followers, &mut ctx)?;
        self.apply(c, rec, t, hover_left)
    }

    fn promotion_candidate(&self, co: &Coalition, t: f64) -> Option<usize> {
        let best = self
            .followers
            .iter()
            .filter(|f| f.uav.alive && co.members.contains(&f.uav.id))
            .max_by(|a, b| {
                a.uav.remaining_flight_time.total_cmp(&b.uav.remaining_flight_time).then_with(|| b.uav.id.cmp(&a.uav.id))
            })?;
        self.active_slot(best.uav.id, t)
    }

    /// Leaders hold their center; a promoted leader stays where it was promoted.
    fn leader_position(&self, c: usize, _t: f64) -> Point2D {
        let id = self.coalitions[c].leader_id;
        self.followers.iter().find(|f| f.uav.id == id).map_or(self.coalitions[c].center, |f| f.uav.position)
    }

    fn apply(&mut self, c: usize, rec: Recovery, t: f64, hover: f64) -> Result<()> {
        if let (Some(id), Some(sector)) = (rec.replacement, rec.vacated_sector) {
            let agent = &follower(&self.followers, id).uav;
            let anchor = rec.coalition.anchors[sector];
            let hover = hover.max(0.0);
            if !feasible_for_mission(agent, anchor, hover) {
                return Err(Error::Invariant(format!("replacement {id} dispatched without enough battery")));
            }
            let slot = dispatch(agent, c, sector, anchor, t, hover, SlotRole::Replacement);
            self.members.push(slot);
        }
        self.coalitions[c] = rec.coalition;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::config::{FailureEvent, Preset};

    fn small() -> ScenarioConfig {
        ScenarioConfig { rng_seed: 3, ..ScenarioConfig::preset(Preset::Fig3) }
    }

    #[test]
    fn deterministic_and_serializable() {
        let cfg = small();
        for m in Method::ALL {
            let a = run_scenario(&cfg, m).unwrap();
            let b = run_scenario(&cfg, m).unwrap();
            assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
            assert_eq!(a.events_jsonl(), b.events_jsonl());
            assert_eq!(a.coalitions.len(), cfg.n_leaders);
            assert!(a.members.iter().all(|m| m.distance_m >= 0.0 && m.final_flight_time >= 0.0));
        }
    }

    #[test]
    fn ample_batteries_complete_everything() {
        let cfg = ScenarioConfig { battery_min: 60.0, battery_max: 90.0, ..small() };
        let r = run_scenario(&cfg, Method::Distributed).unwrap();
        assert!(r.all_complete());
        assert!(r.coalitions.iter().all(|c| !c.degraded));
        let r = run_scenario(&cfg, Method::Central).unwrap();
        assert!(r.all_complete());
    }

    #[test]
    fn member_failure_midway_gets_one_replacement() {
        let base = ScenarioConfig { battery_min: 60.0, battery_max: 90.0, ..small() };
        let first = run_scenario(&base, Method::Distributed).unwrap();
        let victim = first.coalitions[0].members[0];
        let sector = first.coalitions[0].sector_map[&victim];
        let cfg = ScenarioConfig { failures: vec![FailureEvent { time: 10.0, uav: victim }], ..base };
        let r = run_scenario(&cfg, Method::Distributed).unwrap();
        let replacements: Vec<_> = r.members.iter().filter(|m| m.role == SlotRole::Replacement).collect();
        assert_eq!(replacements.len(), 1);
        assert_eq!(replacements[0].sector, sector);
        assert!(r.coalitions[0].is_complete());
        assert!(!r.coalitions[0].members.contains(&victim));
        assert_eq!(r.events.iter().filter(|e| e.kind == "replacement").count(), 1);
    }

    #[test]
    fn leader_failure_promotes_longest_battery() {
        let base = ScenarioConfig { battery_min: 60.0, battery_max: 90.0, ..small() };
        let first = run_scenario(&base, Method::Distributed).unwrap();
        let t: f64 = 5.0;
        let co = &first.coalitions[1];
        let best = co
            .members
            .iter()
            .map(|id| first.members.iter().find(|m| m.uav_id == *id).unwrap())
            .max_by(|a, b| {
                (a.initial_flight_time - t.min(a.travel_min + a.hover_min))
                    .total_cmp(&(b.initial_flight_time - t.min(b.travel_min + b.hover_min)))
                    .then(b.uav_id.cmp(&a.uav_id))
            })
            .unwrap()
            .uav_id;
        let cfg = ScenarioConfig { failures: vec![FailureEvent { time: t, uav: co.leader_id }], ..base };
        let r = run_scenario(&cfg, Method::Distributed).unwrap();
        assert_eq!(r.coalitions[1].leader_id, best);
        assert!(r.members.iter().any(|m| m.uav_id == best && m.role == SlotRole::Promoted));
    }
}
