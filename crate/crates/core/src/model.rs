//! UAV identity vectors, task requirements and coalition value.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance, Point2D};

pub type UavId = u32;

/// Default insufficiency penalty. Large but finite so totals stay comparable.
pub const DEFAULT_BIG_L: f64 = 1e9;

/// Capability vector `p` and resource vector `r` of a follower. A
/// non-consumable resource (an onboard sensor, say) is stored as `+∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityVector {
    pub properties: Vec<f64>,
    #[serde(with = "inf_as_null")]
    pub resources: Vec<f64>,
}

impl IdentityVector {
    pub fn new(properties: Vec<f64>, resources: Vec<f64>) -> Result<Self> {
        if properties.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidRequirement("properties must be finite and non-negative".into()));
        }
        if resources.iter().any(|r| r.is_nan() || *r < 0.0) {
            return Err(Error::InvalidRequirement("resources must be non-negative".into()));
        }
        Ok(Self { properties, resources })
    }
}

/// JSON has no infinity; non-consumable resources round-trip as `null`.
pub(crate) mod inf_as_null {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(values: &[f64], s: S) -> Result<S::Ok, S::Error> {
        values
            .iter()
            .map(|v| if v.is_infinite() { None } else { Some(*v) })
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let raw: Vec<Option<f64>> = Vec::deserialize(d)?;
        Ok(raw.into_iter().map(|v| v.unwrap_or(f64::INFINITY)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawUav", into = "RawUav")]
pub struct UavAgent {
    pub id: UavId,
    pub position: Point2D,
    pub identity: IdentityVector,
    /// Minutes of flight left on the battery.
    pub remaining_flight_time: f64,
    /// Meters per minute.
    pub speed: f64,
    pub alive: bool,
}

#[derive(Serialize, Deserialize)]
struct RawUav {
    id: UavId,
    position: Point2D,
    properties: Vec<f64>,
    #[serde(with = "inf_as_null")]
    resources: Vec<f64>,
    flight_time_min: f64,
    speed_m_per_min: f64,
    #[serde(default = "yes")]
    alive: bool,
}

fn yes() -> bool {
    true
}

impl From<RawUav> for UavAgent {
    fn from(r: RawUav) -> Self {
        UavAgent {
            id: r.id,
            position: r.position,
            identity: IdentityVector { properties: r.properties, resources: r.resources },
            remaining_flight_time: r.flight_time_min,
            speed: r.speed_m_per_min,
            alive: r.alive,
        }
    }
}

impl From<UavAgent> for RawUav {
    fn from(u: UavAgent) -> Self {
        RawUav {
            id: u.id,
            position: u.position,
            properties: u.identity.properties,
            resources: u.identity.resources,
            flight_time_min: u.remaining_flight_time,
            speed_m_per_min: u.speed,
            alive: u.alive,
        }
    }
}

impl UavAgent {
    pub fn travel_time(&self, target: Point2D) -> f64 {
        distance(self.position, target) / self.speed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: u32,
    pub required_properties: Vec<f64>,
    pub required_resources: Vec<f64>,
    pub location: Point2D,
}

/// Aggregated needs of one coalition: element-wise maximum of the task
/// property floors and element-wise sum of the task resources.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoalitionRequirement {
    pub properties_floor: Vec<f64>,
    #[serde(with = "inf_as_null")]
    pub resources_total: Vec<f64>,
}

impl CoalitionRequirement {
    /// Resource dimensions that enter the value (zero requirements are skipped).
    pub fn required_dimensions(&self) -> usize {
        self.resources_total.iter().filter(|r| **r > 0.0).count()
    }
}

pub fn aggregate_requirements(tasks: &[Task]) -> Result<CoalitionRequirement> {
    let first = tasks.first().ok_or(Error::NoTasks)?;
    let (np, nr) = (first.required_properties.len(), first.required_resources.len());
    let mut floor = vec![0.0f64; np];
    let mut total = vec![0.0f64; nr];
    for t in tasks {
        check_dim("task properties", np, t.required_properties.len())?;
        check_dim("task resources", nr, t.required_resources.len())?;
        if t.required_properties.iter().chain(&t.required_resources).any(|v| v.is_nan() || *v < 0.0) {
            return Err(Error::InvalidRequirement(format!("task {} has a negative requirement", t.id)));
        }
        for (f, p) in floor.iter_mut().zip(&t.required_properties) {
            *f = f.max(*p);
        }
        for (s, r) in total.iter_mut().zip(&t.required_resources) {
            *s += r;
        }
    }
    Ok(CoalitionRequirement { properties_floor: floor, resources_total: total })
}

fn check_dim(what: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { what, expected, actual });
    }
    Ok(())
}

pub fn satisfies_properties(candidate: &IdentityVector, req: &CoalitionRequirement) -> Result<bool> {
    check_dim("properties", req.properties_floor.len(), candidate.properties.len())?;
    Ok(candidate.properties.iter().zip(&req.properties_floor).all(|(p, f)| p >= f))
}

/// Penalty parameters of the coalition value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueParams {
    pub big_l: f64,
    /// When set, exact sufficiency (`x == 1`) is feasible and scores `-1`.
    /// When clear, `x == 1` is penalized like a deficit.
    pub boundary_feasible: bool,
}

impl Default for ValueParams {
    fn default() -> Self {
        Self { big_l: DEFAULT_BIG_L, boundary_feasible: true }
    }
}

/// Resource penalty: `-L` on a deficit, `-x` on a surplus.
pub fn gamma(x: f64, big_l: f64, boundary_feasible: bool) -> f64 {
    let deficit = if boundary_feasible { x < 1.0 } else { x <= 1.0 };
    if deficit {
        -big_l
    } else {
        -x
    }
}

/// Sum over resource dimensions of `gamma(pooled / required)`.
///
/// Dimensions with a zero requirement contribute nothing. If either the
/// requirement or the pool is infinite the dimension is non-consumable and is
/// scored as presence: `-1` when available, `-L` when not.
pub fn coalition_value(members: &[IdentityVector], req: &CoalitionRequirement, params: ValueParams) -> Result<f64> {
    if members.is_empty() {
        return Err(Error::EmptyCoalition);
    }
    let nr = req.resources_total.len();
    for m in members {
        check_dim("resources", nr, m.resources.len())?;
    }
    let mut value = 0.0;
    for (l, &required) in req.resources_total.iter().enumerate() {
        if required.is_nan() || required < 0.0 {
            return Err(Error::InvalidRequirement(format!("resource {l} requirement is {required}")));
        }
        if required == 0.0 {
            continue;
        }
        let pooled: f64 = members.iter().map(|m| m.resources[l]).sum();
        value += if required.is_infinite() || pooled.is_infinite() {
            if pooled >= required {
                -1.0
            } else {
                -params.big_l
            }
        } else {
            gamma(pooled / required, params.big_l, params.boundary_feasible)
        };
    }
    Ok(value)
}

/// Value used when comparing whole assignments: a coalition with fewer than
/// `sectors` members scores strictly below any complete coalition.
pub fn coalition_score(
    members: &[IdentityVector],
    req: &CoalitionRequirement,
    sectors: usize,
    params: ValueParams,
) -> Result<f64> {
    if members.len() == sectors && sectors > 0 {
        coalition_value(members, req, params)
    } else {
        Ok(incomplete_score(req, params))
    }
}

pub fn incomplete_score(req: &CoalitionRequirement, params: ValueParams) -> f64 {
    -params.big_l * (req.required_dimensions() + 1) as f64
}

/// Battery check: enough flight time to reach `target` and then work for
/// `mission_time` minutes. The bound is inclusive.
pub fn feasible_for_mission(agent: &UavAgent, target: Point2D, mission_time: f64) -> bool {
    agent.remaining_flight_time >= agent.travel_time(target) + mission_time
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coalition {
    pub leader_id: UavId,
    pub center: Point2D,
    pub members: Vec<UavId>,
    pub requirement: CoalitionRequirement,
    /// Member id to sector index.
    pub sector_map: BTreeMap<UavId, usize>,
    pub anchors: Vec<Point2D>,
    pub degraded: bool,
}

impl Coalition {
    pub fn sectors(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_complete(&self) -> bool {
        self.members.len() == self.sectors() && self.sector_map.len() == self.sectors()
    }

    pub fn vacant_sectors(&self) -> Vec<usize> {
        (0..self.sectors()).filter(|s| !self.sector_map.values().any(|v| v == s)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn iv(p: &[f64], r: &[f64]) -> IdentityVector {
        IdentityVector::new(p.to_vec(), r.to_vec()).unwrap()
    }

    fn req(p: &[f64], r: &[f64]) -> CoalitionRequirement {
        CoalitionRequirement { properties_floor: p.to_vec(), resources_total: r.to_vec() }
    }

    fn task(id: u32, p: &[f64], r: &[f64]) -> Task {
        Task { id, required_properties: p.to_vec(), required_resources: r.to_vec(), location: Point2D::new(0.0, 0.0) }
    }

    const P: ValueParams = ValueParams { big_l: 1e9, boundary_feasible: true };

    #[test]
    fn aggregation() {
        let r = aggregate_requirements(&[task(0, &[1.0, 2.0], &[5.0]), task(1, &[3.0, 1.0], &[7.0])]).unwrap();
        assert_eq!(r.properties_floor, vec![3.0, 2.0]);
        assert_eq!(r.resources_total, vec![12.0]);
        let single = aggregate_requirements(&[task(0, &[4.0], &[2.0, 3.0])]).unwrap();
        assert_eq!(single, req(&[4.0], &[2.0, 3.0]));
        assert_eq!(aggregate_requirements(&[]), Err(Error::NoTasks));
        assert!(matches!(
            aggregate_requirements(&[task(0, &[1.0], &[1.0]), task(1, &[1.0, 1.0], &[1.0])]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn property_floor() {
        assert!(satisfies_properties(&iv(&[2.0, 2.0], &[]), &req(&[1.0, 2.0], &[])).unwrap());
        assert!(!satisfies_properties(&iv(&[2.0, 1.0], &[]), &req(&[1.0, 2.0], &[])).unwrap());
        assert!(satisfies_properties(&iv(&[0.0, 0.0], &[]), &req(&[0.0, 0.0], &[])).unwrap());
        assert!(satisfies_properties(&iv(&[0.0], &[]), &req(&[0.0, 0.0], &[])).is_err());
    }

    #[test]
    fn gamma_branches() {
        assert_eq!(gamma(0.5, 1e9, true), -1e9);
        assert_eq!(gamma(0.5, 1e9, false), -1e9);
        assert_eq!(gamma(2.0, 1e9, true), -2.0);
        assert_eq!(gamma(2.0, 1e9, false), -2.0);
        assert_eq!(gamma(1.0, 1e9, true), -1.0);
        assert_eq!(gamma(1.0, 1e9, false), -1e9);
    }

    #[test]
    fn value_examples() {
        let r10 = req(&[], &[10.0]);
        let v = coalition_value(&[iv(&[], &[6.0]), iv(&[], &[6.0])], &r10, P).unwrap();
        assert!((v + 1.2).abs() < 1e-12);
        assert_eq!(coalition_value(&[iv(&[], &[4.0]), iv(&[], &[4.0])], &r10, P).unwrap(), -1e9);

        // γ(20/10) + γ(5/5) = -2 - 1
        let two = req(&[], &[10.0, 5.0]);
        let v = coalition_value(&[iv(&[], &[12.0, 1.0]), iv(&[], &[8.0, 4.0])], &two, P).unwrap();
        assert_eq!(v, -3.0);

        assert_eq!(coalition_value(&[], &r10, P), Err(Error::EmptyCoalition));
        assert!(coalition_value(&[iv(&[], &[1.0])], &req(&[], &[-1.0]), P).is_err());
    }

    #[test]
    fn zero_requirement_dimension_skipped() {
        let r = req(&[], &[0.0, 4.0]);
        let v = coalition_value(&[iv(&[], &[100.0, 8.0])], &r, P).unwrap();
        assert_eq!(v, -2.0);
        let none = req(&[], &[0.0]);
        assert_eq!(coalition_value(&[iv(&[], &[3.0])], &none, P).unwrap(), 0.0);
    }

    #[test]
    fn non_consumable_presence() {
        let needs_sensor = req(&[], &[f64::INFINITY]);
        assert_eq!(coalition_value(&[iv(&[], &[f64::INFINITY]), iv(&[], &[0.0])], &needs_sensor, P).unwrap(), -1.0);
        assert_eq!(coalition_value(&[iv(&[], &[3.0])], &needs_sensor, P).unwrap(), -1e9);
        // an infinite pool against a finite requirement is satisfied, not -∞
        assert_eq!(coalition_value(&[iv(&[], &[f64::INFINITY])], &req(&[], &[5.0]), P).unwrap(), -1.0);
    }

    #[test]
    fn infinite_resources_round_trip_as_null() {
        let v = iv(&[1.0], &[2.0, f64::INFINITY]);
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(json, r#"{"properties":[1.0],"resources":[2.0,null]}"#);
        assert_eq!(serde_json::from_str::<IdentityVector>(&json).unwrap(), v);
    }

    #[test]
    fn uav_json_fields() {
        let u = UavAgent {
            id: 3,
            position: Point2D::new(1.0, 2.0),
            identity: iv(&[1.0], &[12.0]),
            remaining_flight_time: 12.0,
            speed: 500.0,
            alive: true,
        };
        let v = serde_json::to_value(&u).unwrap();
        for key in ["id", "position", "properties", "resources", "flight_time_min", "speed_m_per_min"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(serde_json::from_value::<UavAgent>(v).unwrap(), u);
    }

    #[test]
    fn mission_feasibility() {
        let mut u = UavAgent {
            id: 1,
            position: Point2D::new(0.0, 0.0),
            identity: iv(&[], &[]),
            remaining_flight_time: 20.0,
            speed: 500.0,
            alive: true,
        };
        let target = Point2D::new(2000.0, 0.0); // 4 minutes away
        assert!(feasible_for_mission(&u, target, 15.0));
        u.remaining_flight_time = 18.0;
        assert!(!feasible_for_mission(&u, target, 15.0));
        u.remaining_flight_time = 15.0;
        assert!(feasible_for_mission(&u, u.position, 15.0));
    }

    #[test]
    fn incomplete_scores_below_complete() {
        let r = req(&[], &[10.0]);
        let full = coalition_score(&[iv(&[], &[1.0]), iv(&[], &[1.0])], &r, 2, P).unwrap();
        let partial = coalition_score(&[iv(&[], &[50.0])], &r, 2, P).unwrap();
        assert_eq!(full, -1e9);
        assert!(partial < full);
    }

    fn members_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
        prop::collection::vec(prop::collection::vec(0.0f64..50.0, 2), 1..6)
    }

    proptest! {
        #[test]
        fn gamma_monotone_and_capped(a in 1.0f64..1e6, b in 1.0f64..1e6) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(gamma(hi, 1e9, true) <= gamma(lo, 1e9, true));
            prop_assert!(gamma(lo, 1e9, true) <= -1.0);
        }

        #[test]
        fn value_is_permutation_invariant(ms in members_strategy(), r0 in 1.0f64..100.0, r1 in 1.0f64..100.0,
                                          rot in 0usize..6) {
            let members: Vec<_> = ms.iter().map(|r| iv(&[], r)).collect();
            let mut shuffled = members.clone();
            shuffled.reverse();
            let k = rot % shuffled.len();
            shuffled.rotate_left(k);
            let rq = req(&[], &[r0, r1]);
            let a = coalition_value(&members, &rq, P).unwrap();
            let b = coalition_value(&shuffled, &rq, P).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }

        #[test]
        fn zero_resource_member_changes_nothing(ms in members_strategy(), r0 in 1.0f64..100.0, r1 in 1.0f64..100.0) {
            let members: Vec<_> = ms.iter().map(|r| iv(&[], r)).collect();
            let rq = req(&[], &[r0, r1]);
            let mut more = members.clone();
            more.push(iv(&[], &[0.0, 0.0]));
            prop_assert_eq!(coalition_value(&members, &rq, P).unwrap(), coalition_value(&more, &rq, P).unwrap());
        }

        #[test]
        fn ratio_scaling_invariance(ms in members_strategy(), r0 in 1.0f64..100.0, r1 in 1.0f64..100.0,
                                    scale in 0.01f64..100.0) {
            let members: Vec<_> = ms.iter().map(|r| iv(&[], r)).collect();
            let scaled: Vec<_> = ms.iter().map(|r| iv(&[], &[r[0] * scale, r[1]])).collect();
            let a = coalition_value(&members, &req(&[], &[r0, r1]), P).unwrap();
            let b = coalition_value(&scaled, &req(&[], &[r0 * scale, r1]), P).unwrap();
            // the deficit test x < 1 can flip only at exact ties lost to rounding
            let x = ms.iter().map(|r| r[0]).sum::<f64>() / r0;
            prop_assume!((x - 1.0).abs() > 1e-9);
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }

        #[test]
        fn deficit_dominates(ms in members_strategy(), r0 in 1.0f64..400.0, r1 in 1.0f64..400.0) {
            let members: Vec<_> = ms.iter().map(|r| iv(&[], r)).collect();
            let pooled0: f64 = ms.iter().map(|r| r[0]).sum();
            let pooled1: f64 = ms.iter().map(|r| r[1]).sum();
            let v = coalition_value(&members, &req(&[], &[r0, r1]), P).unwrap();
            if pooled0 / r0 < 1.0 || pooled1 / r1 < 1.0 {
                prop_assert!(v <= -1e9);
            }
        }
    }
}
