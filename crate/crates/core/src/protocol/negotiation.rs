use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::agents::{follower_choose_bid, follower_handle_proposal, FollowerAgent, FollowerPhase, LeaderAgent, LeaderPhase};
use super::sectors::assign_sectors_partial;
use super::selection::leader_select_members;
use super::{AgentRef, Bid, EligibilityRules, ProtocolMessage, Transport, VolunteerResponse};
use crate::error::Result;
use crate::model::{coalition_score, coalition_value, Coalition, IdentityVector, UavId, ValueParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegotiationSettings {
    pub mission_time: f64,
    pub params: ValueParams,
    pub rules: EligibilityRules,
    pub max_rounds: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegotiationOutcome {
    /// In leader order.
    pub coalitions: Vec<Coalition>,
    pub rounds: u32,
    /// Unfilled slots per coalition.
    pub shortfalls: Vec<usize>,
    pub under_resourced: Vec<bool>,
    /// Per-coalition score; incomplete coalitions get the incomplete penalty.
    pub scores: Vec<f64>,
}

impl NegotiationOutcome {
    pub fn all_complete(&self) -> bool {
        self.shortfalls.iter().all(|s| *s == 0)
    }
}

fn set_leader_phase(leader: &mut LeaderAgent, phase: LeaderPhase, transport: &mut Transport) {
    if leader.state.phase != phase {
        leader.state.phase = phase;
        transport.note(AgentRef::leader(leader.spec.leader_id), "phase", json!({ "phase": phase }));
    }
}

fn note_follower_phase(f: &FollowerAgent, before: FollowerPhase, transport: &mut Transport) {
    if f.state.phase != before {
        transport.note(AgentRef::follower(f.uav.id), "phase", json!({ "phase": f.state.phase }));
    }
}

/// Synchronous rounds of the bid-response protocol.
///
/// Round 1 opens with every leader broadcasting its proposal and collecting
/// volunteers. In every round each unfinished leader then selects members
/// from its remaining volunteers and bids on them; followers accept at most
/// one bid; leaders lock the acceptances and drop the refusals. A leader with
/// no volunteers left but open slots fails with a shortfall.
///
/// `leaders` and `followers` are processed in slice order, which callers keep
/// sorted by id.
pub fn run_negotiation(
    leaders: &mut [LeaderAgent],
    followers: &mut [FollowerAgent],
    transport: &mut Transport,
    settings: &NegotiationSettings,
) -> Result<NegotiationOutcome> {
    let priorities: BTreeMap<UavId, f64> =
        leaders.iter().map(|l| (l.spec.leader_id, l.spec.region_priority)).collect();
    let mut round = 0;

    while round < settings.max_rounds && leaders.iter().any(|l| !l.state.phase.is_done()) {
        round += 1;
        transport.set_round(round);

        for leader in leaders.iter_mut().filter(|l| l.state.phase == LeaderPhase::Broadcasting) {
            transport.note(AgentRef::leader(leader.spec.leader_id), "phase", json!({ "phase": LeaderPhase::Broadcasting }));
            let proposal = leader.spec.proposal(settings.mission_time);
            for f in followers.iter().filter(|f| f.uav.alive) {
                transport.send(
                    AgentRef::leader(leader.spec.leader_id),
                    leader.spec.leader_position,
                    AgentRef::follower(f.uav.id),
                    f.uav.position,
                    ProtocolMessage::Proposal(proposal.clone()),
                )?;
            }
            set_leader_phase(leader, LeaderPhase::Collecting, transport);
        }

        for f in followers.iter_mut() {
            for env in transport.drain(AgentRef::follower(f.uav.id)) {
                if let ProtocolMessage::Proposal(p) = env.message {
                    let before = f.state.phase;
                    if let Some(resp) = follower_handle_proposal(&mut f.state, &p, &f.uav, &settings.rules) {
                        note_follower_phase(f, before, transport);
                        transport.send(
                            AgentRef::follower(f.uav.id),
                            f.uav.position,
                            AgentRef::leader(p.leader_id),
                            p.leader_position,
                            ProtocolMessage::VolunteerResponse(resp),
                        )?;
                    }
                }
            }
        }

        for leader in leaders.iter_mut().filter(|l| l.state.phase == LeaderPhase::Collecting) {
            for env in transport.drain(AgentRef::leader(leader.spec.leader_id)) {
                if let ProtocolMessage::VolunteerResponse(v) = env.message {
                    leader.state.candidates.push(v);
                }
            }
            set_leader_phase(leader, LeaderPhase::Selecting, transport);
        }

        for leader in leaders.iter_mut().filter(|l| l.state.phase == LeaderPhase::Selecting) {
            select_and_bid(leader, followers, transport, settings)?;
        }

        for f in followers.iter_mut() {
            let bids: Vec<Bid> = transport
                .drain(AgentRef::follower(f.uav.id))
                .into_iter()
                .filter_map(|e| match e.message {
                    ProtocolMessage::Bid(b) => Some(b),
                    _ => None,
                })
                .collect();
            if bids.is_empty() {
                continue;
            }
            let before = f.state.phase;
            let replies = follower_choose_bid(&mut f.state, &bids, &f.uav, &priorities);
            note_follower_phase(f, before, transport);
            for (reply, bid) in replies.into_iter().zip(&bids) {
                let to = leaders.iter().find(|l| l.spec.leader_id == bid.leader_id).map(|l| l.spec.leader_position);
                if let Some(to_pos) = to {
                    transport.send(
                        AgentRef::follower(f.uav.id),
                        f.uav.position,
                        AgentRef::leader(bid.leader_id),
                        to_pos,
                        ProtocolMessage::BidReply(reply),
                    )?;
                }
            }
        }

        for leader in leaders.iter_mut().filter(|l| l.state.phase == LeaderPhase::Bidding) {
            for env in transport.drain(AgentRef::leader(leader.spec.leader_id)) {
                let ProtocolMessage::BidReply(r) = env.message else { continue };
                if leader.state.pending.remove(&r.follower_id).is_none() {
                    continue;
                }
                let idx = leader.state.candidates.iter().position(|c| c.follower_id == r.follower_id);
                let cand = idx.map(|i| leader.state.candidates.remove(i));
                if r.accept {
                    leader.state.recruited.extend(cand);
                } else {
                    leader.state.refused.insert(r.follower_id);
                }
            }
            leader.state.pending.clear();
            let next = if leader.open_slots() == 0 { LeaderPhase::Complete } else { LeaderPhase::Selecting };
            set_leader_phase(leader, next, transport);
        }
    }

    let mut outcome = NegotiationOutcome {
        coalitions: Vec::with_capacity(leaders.len()),
        rounds: round,
        shortfalls: Vec::new(),
        under_resourced: Vec::new(),
        scores: Vec::new(),
    };
    for leader in leaders.iter_mut() {
        let shortfall = leader.open_slots();
        leader.state.shortfall = shortfall;
        let coalition = build_coalition(leader)?;
        let identities: Vec<IdentityVector> = leader.state.recruited.iter().map(|c| c.identity.clone()).collect();
        let value = if identities.is_empty() {
            None
        } else {
            Some(coalition_value(&identities, &leader.spec.requirement, settings.params)?)
        };
        leader.state.under_resourced = value.is_none_or(|v| v <= -settings.params.big_l);
        outcome.scores.push(coalition_score(&identities, &leader.spec.requirement, leader.spec.sectors(), settings.params)?);
        outcome.shortfalls.push(shortfall);
        outcome.under_resourced.push(leader.state.under_resourced);
        outcome.coalitions.push(coalition);
    }
    Ok(outcome)
}

fn select_and_bid(
    leader: &mut LeaderAgent,
    followers: &[FollowerAgent],
    transport: &mut Transport,
    settings: &NegotiationSettings,
) -> Result<()> {
    if leader.state.candidates.is_empty() {
        leader.state.shortfall = leader.open_slots();
        set_leader_phase(leader, LeaderPhase::Failed, transport);
        return Ok(());
    }
    let locked: Vec<IdentityVector> = leader.state.recruited.iter().map(|c| c.identity.clone()).collect();
    let selection = leader_select_members(
        &leader.state.candidates,
        &locked,
        &leader.spec.requirement,
        leader.open_slots(),
        leader.spec.center,
        settings.params,
    )?;

    // tentative sectors for the bids; the final layout is recomputed once
    // the coalition is formed
    let mut team: Vec<&VolunteerResponse> = leader.state.recruited.iter().collect();
    team.extend(leader.state.candidates.iter().filter(|c| selection.ids.contains(&c.follower_id)));
    team.sort_by_key(|c| c.follower_id);
    let members: Vec<(UavId, _)> = team.iter().map(|c| (c.follower_id, c.position)).collect();
    let speeds: Vec<f64> = team.iter().map(|c| c.speed).collect();
    let layout = assign_sectors_partial(&members, &leader.spec.anchors, &speeds)?;

    let me = AgentRef::leader(leader.spec.leader_id);
    for id in &selection.ids {
        let sector = layout.map[id];
        let bid = Bid { leader_id: leader.spec.leader_id, follower_id: *id, sector, anchor: leader.spec.anchors[sector] };
        let to_pos = followers.iter().find(|f| f.uav.id == *id).map(|f| f.uav.position);
        if let Some(pos) = to_pos {
            if transport.send(me, leader.spec.leader_position, AgentRef::follower(*id), pos, ProtocolMessage::Bid(bid))? {
                leader.state.pending.insert(*id, sector);
            }
        }
    }
    set_leader_phase(leader, LeaderPhase::Bidding, transport);
    Ok(())
}

fn build_coalition(leader: &LeaderAgent) -> Result<Coalition> {
    let mut team: Vec<&VolunteerResponse> = leader.state.recruited.iter().collect();
    team.sort_by_key(|c| c.follower_id);
    let members: Vec<(UavId, _)> = team.iter().map(|c| (c.follower_id, c.position)).collect();
    let speeds: Vec<f64> = team.iter().map(|c| c.speed).collect();
    let layout = assign_sectors_partial(&members, &leader.spec.anchors, &speeds)?;
    Ok(Coalition {
        leader_id: leader.spec.leader_id,
        center: leader.spec.center,
        members: members.iter().map(|(id, _)| *id).collect(),
        requirement: leader.spec.requirement.clone(),
        sector_map: layout.map,
        anchors: leader.spec.anchors.clone(),
        degraded: false,
    })
}
