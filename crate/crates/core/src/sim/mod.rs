//! Scenario assembly, mission timeline and batch experiments.

mod batch;
mod config;
mod fleet;
mod scenario;

pub use batch::{run_batch, BatchMetrics, BatchResult, BatchRow, PositionStats, RunSummary};
pub use config::{CentralMode, FailureEvent, Preset, ScenarioConfig, SCHEMA_VERSION};
pub use fleet::{generate_fleet, Fleet, FLEET_STREAM};
pub use scenario::{run_scenario, MemberRecord, Method, PositionRecord, ScenarioResult, SlotRole};
