use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{eligible, Bid, BidReply, CoalitionSpec, EligibilityRules, Proposal, VolunteerResponse};
use crate::geometry::distance;
use crate::model::{UavAgent, UavId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeaderPhase {
    Broadcasting,
    Collecting,
    Selecting,
    Bidding,
    Complete,
    Failed,
}

impl LeaderPhase {
    pub fn is_done(self) -> bool {
        matches!(self, LeaderPhase::Complete | LeaderPhase::Failed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderState {
    pub phase: LeaderPhase,
    /// Volunteers not yet recruited and not known to be taken.
    pub candidates: Vec<VolunteerResponse>,
    /// Follower id to offered sector.
    pub pending: BTreeMap<UavId, usize>,
    pub recruited: Vec<VolunteerResponse>,
    pub refused: BTreeSet<UavId>,
    pub shortfall: usize,
    pub under_resourced: bool,
}

impl Default for LeaderState {
    fn default() -> Self {
        Self {
            phase: LeaderPhase::Broadcasting,
            candidates: Vec::new(),
            pending: BTreeMap::new(),
            recruited: Vec::new(),
            refused: BTreeSet::new(),
            shortfall: 0,
            under_resourced: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderAgent {
    pub spec: CoalitionSpec,
    pub state: LeaderState,
}

impl LeaderAgent {
    pub fn new(spec: CoalitionSpec) -> Self {
        Self { spec, state: LeaderState::default() }
    }

    pub fn open_slots(&self) -> usize {
        self.spec.sectors().saturating_sub(self.state.recruited.len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FollowerPhase {
    Idle,
    Volunteered,
    Committed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FollowerState {
    pub phase: FollowerPhase,
    pub bids: Vec<Bid>,
    pub committed_to: Option<UavId>,
}

impl Default for FollowerState {
    fn default() -> Self {
        Self { phase: FollowerPhase::Idle, bids: Vec::new(), committed_to: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FollowerAgent {
    pub uav: UavAgent,
    pub state: FollowerState,
}

impl FollowerAgent {
    pub fn new(uav: UavAgent) -> Self {
        Self { uav, state: FollowerState::default() }
    }

    pub fn is_available(&self) -> bool {
        self.uav.alive && self.state.phase != FollowerPhase::Committed
    }
}

/// A follower answers a proposal only if it has the requested properties,
/// enough battery to reach the coalition and work through the mission, and
/// is within the leader's range. Committed followers stay silent.
pub fn follower_handle_proposal(
    state: &mut FollowerState,
    proposal: &Proposal,
    me: &UavAgent,
    rules: &EligibilityRules,
) -> Option<VolunteerResponse> {
    if state.phase == FollowerPhase::Committed || !eligible(me, proposal, rules) {
        return None;
    }
    state.phase = FollowerPhase::Volunteered;
    Some(VolunteerResponse {
        follower_id: me.id,
        identity: me.identity.clone(),
        position: me.position,
        remaining_flight_time: me.remaining_flight_time,
        speed: me.speed,
    })
}

/// Accepts the bid of the highest-priority region, then the nearest anchor,
/// then the lowest leader id. Every other bid is refused. A committed
/// follower refuses everything.
pub fn follower_choose_bid(
    state: &mut FollowerState,
    bids: &[Bid],
    me: &UavAgent,
    region_priorities: &BTreeMap<UavId, f64>,
) -> Vec<BidReply> {
    let priority = |b: &Bid| region_priorities.get(&b.leader_id).copied().unwrap_or(1.0);
    let chosen = if state.phase == FollowerPhase::Committed {
        None
    } else {
        bids.iter()
            .min_by(|a, b| {
                priority(b)
                    .partial_cmp(&priority(a))
                    .unwrap_or(Ordering::Equal)
                    .then_with(|| {
                        distance(me.position, a.anchor)
                            .partial_cmp(&distance(me.position, b.anchor))
                            .unwrap_or(Ordering::Equal)
                    })
                    .then_with(|| a.leader_id.cmp(&b.leader_id))
            })
            .map(|b| b.leader_id)
    };
    if let Some(leader) = chosen {
        state.phase = FollowerPhase::Committed;
        state.committed_to = Some(leader);
    }
    state.bids = bids.to_vec();
    bids.iter()
        .map(|b| BidReply { follower_id: me.id, leader_id: b.leader_id, accept: Some(b.leader_id) == chosen })
        .collect()
}
