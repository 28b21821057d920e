use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::MIN_GRID_RESOLUTION;
use crate::model::{UavId, ValueParams, DEFAULT_BIG_L};
use crate::placement::PlacementConfig;
use crate::protocol::{EligibilityRules, MAX_SECTORS};

pub const SCHEMA_VERSION: u32 = 1;

/// How the centralized method searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CentralMode {
    /// Exhaustive when the position count allows it, else minimum distance.
    #[default]
    Auto,
    Exhaustive,
    MinDistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FailureEvent {
    /// Minutes after dispatch.
    pub time: f64,
    pub uav: UavId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    #[serde(rename = "paper-fig3")]
    Fig3,
    #[serde(rename = "paper-fig4")]
    Fig4,
}

impl Preset {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "paper-fig3" => Some(Preset::Fig3),
            "paper-fig4" => Some(Preset::Fig4),
            _ => None,
        }
    }

    pub fn default_seed(self) -> u64 {
        match self {
            Preset::Fig3 => 7,
            Preset::Fig4 => 1,
        }
    }
}

/// Everything needed to reproduce a scenario. Distances in meters, times in
/// minutes, speeds in meters per minute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub field_side: f64,
    pub n_followers: usize,
    pub n_leaders: usize,
    pub sectors: usize,
    pub coalition_radius: f64,
    pub mission_time: f64,
    pub battery_min: f64,
    pub battery_max: f64,
    pub speed: f64,
    pub rng_seed: u64,
    pub boundary_feasible: bool,
    pub big_l: f64,
    pub failures: Vec<FailureEvent>,
    /// Per coalition; missing entries default to 1.
    pub region_priorities: Vec<f64>,
    pub comm_range: f64,
    pub max_distance: Option<f64>,
    pub zone_complexity: usize,
    pub coverage_threshold: f64,
    pub step_size: f64,
    pub max_iterations: usize,
    pub grid_resolution: usize,
    /// Share of followers carrying the required property.
    pub qualified_fraction: f64,
    pub tasks_per_coalition: usize,
    /// Flight-time requirement of each task; 0 leaves only the battery
    /// feasibility check.
    pub task_resource: f64,
    pub max_rounds: u32,
    pub runs: usize,
    pub central_mode: CentralMode,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::for_field(10_000.0)
    }
}

impl ScenarioConfig {
    pub fn for_field(l: f64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            field_side: l,
            n_followers: 20,
            n_leaders: 3,
            sectors: 3,
            coalition_radius: 0.15 * l,
            mission_time: 15.0,
            battery_min: 10.0,
            battery_max: 20.0,
            speed: 500.0,
            rng_seed: 0,
            boundary_feasible: true,
            big_l: DEFAULT_BIG_L,
            failures: Vec::new(),
            region_priorities: Vec::new(),
            comm_range: 0.5 * l,
            max_distance: None,
            zone_complexity: 12,
            coverage_threshold: 0.8,
            step_size: l / 100.0,
            max_iterations: 500,
            grid_resolution: 128,
            qualified_fraction: 1.0,
            tasks_per_coalition: 1,
            task_resource: 0.0,
            max_rounds: 20,
            runs: 1,
            central_mode: CentralMode::Auto,
        }
    }

    /// The two published experiment setups. Leaders broadcast over the
    /// whole field and fly at 2000 m/min so that the 10 to 20 minute
    /// batteries can reach a 15 minute mission.
    pub fn preset(p: Preset) -> Self {
        let l = 10_000.0;
        let base = Self {
            speed: 2000.0,
            comm_range: l * std::f64::consts::SQRT_2,
            rng_seed: p.default_seed(),
            ..Self::for_field(l)
        };
        match p {
            Preset::Fig3 => Self { n_followers: 20, n_leaders: 3, sectors: 3, ..base },
            Preset::Fig4 => Self {
                n_followers: 15,
                n_leaders: 3,
                sectors: 2,
                runs: 100,
                central_mode: CentralMode::MinDistance,
                ..base
            },
        }
    }

    pub fn positions(&self) -> usize {
        self.n_leaders * self.sectors
    }

    pub fn value_params(&self) -> ValueParams {
        ValueParams { big_l: self.big_l, boundary_feasible: self.boundary_feasible }
    }

    pub fn rules(&self) -> EligibilityRules {
        EligibilityRules { comm_range: self.comm_range, max_distance: self.max_distance }
    }

    pub fn placement(&self) -> PlacementConfig {
        PlacementConfig {
            coalition_radius: self.coalition_radius,
            coverage_threshold: self.coverage_threshold,
            step_size: self.step_size,
            max_iterations: self.max_iterations,
            candidate_moves: 8,
            grid_resolution: self.grid_resolution,
        }
    }

    pub fn region_priority(&self, coalition: usize) -> f64 {
        self.region_priorities.get(coalition).copied().unwrap_or(1.0)
    }

    /// Checks every invariant; the message names the violated one.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        let positive = [
            ("field_side", self.field_side),
            ("coalition_radius", self.coalition_radius),
            ("speed", self.speed),
            ("big_l", self.big_l),
            ("comm_range", self.comm_range),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return fail(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if self.schema_version != SCHEMA_VERSION {
            return fail(format!("schema_version must be {SCHEMA_VERSION}, got {}", self.schema_version));
        }
        if self.n_leaders == 0 {
            return fail("n_leaders must be at least 1".into());
        }
        if self.sectors == 0 || self.sectors > MAX_SECTORS {
            return fail(format!("sectors must be in 1..={MAX_SECTORS}, got {}", self.sectors));
        }
        if !(self.mission_time.is_finite() && self.mission_time >= 0.0) {
            return fail(format!("mission_time must be non-negative, got {}", self.mission_time));
        }
        if !(self.battery_min >= 0.0 && self.battery_min <= self.battery_max && self.battery_max.is_finite()) {
            return fail(format!(
                "battery range must satisfy 0 <= min <= max, got ({}, {})",
                self.battery_min, self.battery_max
            ));
        }
        if !(0.0..=1.0).contains(&self.qualified_fraction) {
            return fail(format!("qualified_fraction must be in [0, 1], got {}", self.qualified_fraction));
        }
        if self.tasks_per_coalition == 0 {
            return fail("tasks_per_coalition must be at least 1".into());
        }
        if !(self.task_resource.is_finite() && self.task_resource >= 0.0) {
            return fail(format!("task_resource must be non-negative, got {}", self.task_resource));
        }
        if self.grid_resolution < MIN_GRID_RESOLUTION {
            return fail(format!("grid_resolution must be at least {MIN_GRID_RESOLUTION}"));
        }
        if self.zone_complexity < 3 {
            return fail("zone_complexity must be at least 3".into());
        }
        if self.max_rounds == 0 {
            return fail("max_rounds must be at least 1".into());
        }
        if self.runs == 0 {
            return fail("runs must be at least 1".into());
        }
        if let Some(d) = self.max_distance {
            if !(d > 0.0) {
                return fail(format!("max_distance must be positive, got {d}"));
            }
        }
        if self.region_priorities.len() > self.n_leaders || self.region_priorities.iter().any(|p| !p.is_finite()) {
            return fail("region_priorities needs at most one finite value per coalition".into());
        }
        let n_uav = (self.n_leaders + self.n_followers) as UavId;
        for f in &self.failures {
            if !(f.time.is_finite() && f.time >= 0.0) {
                return fail(format!("failure time must be non-negative, got {}", f.time));
            }
            if f.uav >= n_uav {
                return fail(format!("failure names uav {} but only {n_uav} exist", f.uav));
            }
        }
        self.placement().validate()
    }

    /// Non-fatal remarks about the configuration.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.positions() > self.n_followers {
            w.push(format!(
                "{} positions but only {} followers; some coalitions will stay incomplete",
                self.positions(),
                self.n_followers
            ));
        }
        w
    }

    /// Reads JSON or TOML, chosen by file extension.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let cfg: Self = match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => toml::from_str(&text).map_err(|e| Error::InvalidConfig(e.to_string()))?,
            _ => serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(e.to_string()))?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets() {
        let f3 = ScenarioConfig::preset(Preset::Fig3);
        assert_eq!((f3.n_followers, f3.n_leaders, f3.sectors, f3.field_side), (20, 3, 3, 10_000.0));
        assert_eq!(f3.rng_seed, 7);
        let f4 = ScenarioConfig::preset(Preset::Fig4);
        assert_eq!((f4.n_followers, f4.n_leaders, f4.sectors, f4.runs), (15, 3, 2, 100));
        f3.validate().unwrap();
        f4.validate().unwrap();
        assert_eq!(Preset::parse("paper-fig4"), Some(Preset::Fig4));
        assert_eq!(Preset::parse("fig5"), None);
    }

    #[test]
    fn invalid_values_are_named() {
        let bad = ScenarioConfig { battery_min: 20.0, battery_max: 10.0, ..Default::default() };
        assert!(bad.validate().unwrap_err().to_string().contains("battery range"));
        let bad = ScenarioConfig { speed: 0.0, ..Default::default() };
        assert!(bad.validate().unwrap_err().to_string().contains("speed"));
        let bad = ScenarioConfig { failures: vec![FailureEvent { time: 1.0, uav: 99 }], ..Default::default() };
        assert!(bad.validate().is_err());
        let degenerate = ScenarioConfig { battery_min: 15.0, battery_max: 15.0, ..Default::default() };
        degenerate.validate().unwrap();
    }

    #[test]
    fn toml_and_json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ScenarioConfig {
            rng_seed: 11,
            failures: vec![FailureEvent { time: 3.0, uav: 4 }],
            max_distance: Some(4000.0),
            ..Default::default()
        };
        let json = dir.path().join("c.json");
        std::fs::write(&json, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
        assert_eq!(ScenarioConfig::load(&json).unwrap(), cfg);
        let toml_path = dir.path().join("c.toml");
        std::fs::write(&toml_path, toml::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(ScenarioConfig::load(&toml_path).unwrap(), cfg);

        let partial = dir.path().join("p.toml");
        std::fs::write(&partial, "n_followers = 9\nrng_seed = 3\n").unwrap();
        let loaded = ScenarioConfig::load(&partial).unwrap();
        assert_eq!(loaded.n_followers, 9);
        assert_eq!(loaded.sectors, 3);

        let unknown = dir.path().join("u.json");
        std::fs::write(&unknown, r#"{"n_folowers": 9}"#).unwrap();
        assert!(matches!(ScenarioConfig::load(&unknown), Err(Error::InvalidConfig(_))));
    }
}
