//! Distributed bid-response negotiation between coalition leaders and
//! follower UAVs.
//!
//! A leader broadcasts a [`Proposal`]; qualified followers in range answer
//! with a [`VolunteerResponse`]; the leader picks the subset that maximizes
//! the coalition value and sends each pick a [`Bid`]; a follower holding
//! several bids accepts one and refuses the rest with a [`BidReply`].
//! Leaders never talk to each other.

mod agents;
mod failure;
mod negotiation;
mod sectors;
pub(crate) mod selection;
mod transport;

use serde::{Deserialize, Serialize};

use crate::geometry::{distance, Point2D};
use crate::model::{satisfies_properties, CoalitionRequirement, IdentityVector, UavAgent, UavId};

pub use agents::{
    follower_choose_bid, follower_handle_proposal, FollowerAgent, FollowerPhase, FollowerState, LeaderAgent, LeaderPhase,
    LeaderState,
};
pub use failure::{handle_leader_failure, handle_member_failure, FailureContext, Recovery};
pub use negotiation::{run_negotiation, NegotiationOutcome, NegotiationSettings};
pub use sectors::{assign_sectors, assign_sectors_partial, SectorAssignment, MAX_SECTORS, TIE_EPS};
pub use selection::{leader_select_members, Selection, MAX_SUBSETS};
pub use transport::{events_to_jsonl, Event, Transport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Leader,
    Follower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AgentRef {
    pub role: Role,
    pub id: UavId,
}

impl AgentRef {
    pub fn leader(id: UavId) -> Self {
        Self { role: Role::Leader, id }
    }

    pub fn follower(id: UavId) -> Self {
        Self { role: Role::Follower, id }
    }
}

/// What a leader advertises: where it works, what members must be able to do,
/// how long the job lasts and how urgent the region is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Proposal {
    pub leader_id: UavId,
    pub leader_position: Point2D,
    pub center: Point2D,
    pub radius: f64,
    pub properties_floor: Vec<f64>,
    pub mission_time: f64,
    pub region_priority: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolunteerResponse {
    pub follower_id: UavId,
    pub identity: IdentityVector,
    pub position: Point2D,
    pub remaining_flight_time: f64,
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bid {
    pub leader_id: UavId,
    pub follower_id: UavId,
    pub sector: usize,
    pub anchor: Point2D,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BidReply {
    pub follower_id: UavId,
    pub leader_id: UavId,
    pub accept: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ProtocolMessage {
    Proposal(Proposal),
    VolunteerResponse(VolunteerResponse),
    Bid(Bid),
    BidReply(BidReply),
}

impl ProtocolMessage {
    pub fn kind(&self) -> &'static str {
        match self {
            ProtocolMessage::Proposal(_) => "proposal",
            ProtocolMessage::VolunteerResponse(_) => "volunteer_response",
            ProtocolMessage::Bid(_) => "bid",
            ProtocolMessage::BidReply(_) => "bid_reply",
        }
    }

    /// The message body without the variant tag.
    pub fn payload(&self) -> serde_json::Value {
        match self {
            ProtocolMessage::Proposal(m) => serde_json::to_value(m),
            ProtocolMessage::VolunteerResponse(m) => serde_json::to_value(m),
            ProtocolMessage::Bid(m) => serde_json::to_value(m),
            ProtocolMessage::BidReply(m) => serde_json::to_value(m),
        }
        .expect("messages serialize")
    }

    pub fn sender(&self) -> UavId {
        match self {
            ProtocolMessage::Proposal(p) => p.leader_id,
            ProtocolMessage::VolunteerResponse(v) => v.follower_id,
            ProtocolMessage::Bid(b) => b.leader_id,
            ProtocolMessage::BidReply(r) => r.follower_id,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub from: AgentRef,
    pub to: AgentRef,
    /// Per-sender, starting at 1.
    pub seq: u64,
    pub message: ProtocolMessage,
}

/// Constraints shared by the distributed and the centralized methods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EligibilityRules {
    /// Leader broadcast radius.
    pub comm_range: f64,
    /// Optional fixed bound on the follower-to-center distance.
    pub max_distance: Option<f64>,
}

/// Static description of one coalition slot set, as seen by every method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoalitionSpec {
    pub leader_id: UavId,
    pub leader_position: Point2D,
    pub center: Point2D,
    pub radius: f64,
    pub requirement: CoalitionRequirement,
    pub anchors: Vec<Point2D>,
    pub region_priority: f64,
}

impl CoalitionSpec {
    pub fn sectors(&self) -> usize {
        self.anchors.len()
    }

    pub fn proposal(&self, mission_time: f64) -> Proposal {
        Proposal {
            leader_id: self.leader_id,
            leader_position: self.leader_position,
            center: self.center,
            radius: self.radius,
            properties_floor: self.requirement.properties_floor.clone(),
            mission_time,
            region_priority: self.region_priority,
        }
    }
}

/// Battery check against the farthest point of the coalition circle, so any
/// sector the follower may later receive is reachable.
pub fn feasible_for_coalition(agent: &UavAgent, center: Point2D, radius: f64, mission_time: f64) -> bool {
    agent.remaining_flight_time >= (distance(agent.position, center) + radius) / agent.speed + mission_time
}

/// Whether `agent` may serve in the coalition advertised by `proposal`.
pub fn eligible(agent: &UavAgent, proposal: &Proposal, rules: &EligibilityRules) -> bool {
    agent.alive
        && distance(agent.position, proposal.leader_position) <= rules.comm_range
        && rules.max_distance.is_none_or(|d| distance(agent.position, proposal.center) <= d)
        && meets_floor(&agent.identity, &proposal.properties_floor)
        && feasible_for_coalition(agent, proposal.center, proposal.radius, proposal.mission_time)
}

fn meets_floor(identity: &IdentityVector, floor: &[f64]) -> bool {
    satisfies_properties(
        identity,
        &CoalitionRequirement { properties_floor: floor.to_vec(), resources_total: Vec::new() },
    )
    .unwrap_or(false)
}
