//! Leader-follower coalition formation for UAV wildfire monitoring.
//!
//! Leaders spread over a fire zone, recruit followers through a bid-response
//! protocol and split their coverage circle into sectors. A centralized
//! planner over the same constraints serves as the baseline.

pub mod assignment;
pub mod central;
pub mod error;
pub mod geometry;
pub mod model;
pub mod placement;
pub mod protocol;
pub mod sim;

pub use error::{Error, Result};
