//! Recovery when a member or the leader drops out during the mission.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::agents::{follower_choose_bid, follower_handle_proposal, FollowerAgent};
use super::selection::leader_select_members;
use super::{AgentRef, Bid, EligibilityRules, Proposal, ProtocolMessage, Transport};
use crate::error::{Error, Result};
use crate::geometry::Point2D;
use crate::model::{Coalition, IdentityVector, UavId, ValueParams};

pub struct FailureContext<'a> {
    pub transport: &'a mut Transport,
    pub rules: EligibilityRules,
    pub params: ValueParams,
    /// Minutes of work left for the vacated sector.
    pub mission_time: f64,
    /// Where the (possibly promoted) leader is.
    pub leader_position: Point2D,
    pub radius: f64,
    pub region_priority: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recovery {
    pub coalition: Coalition,
    pub vacated_sector: Option<usize>,
    pub replacement: Option<UavId>,
    pub promoted: Option<UavId>,
}

/// Removes `failed_id` from the coalition and recruits one available follower
/// into the vacated sector with the ordinary proposal and bid exchange. With
/// nobody to recruit the coalition is marked degraded.
///
/// `followers` holds every follower (members included); the failed one is
/// marked dead.
pub fn handle_member_failure(
    coalition: &Coalition,
    failed_id: UavId,
    followers: &mut [FollowerAgent],
    ctx: &mut FailureContext<'_>,
) -> Result<Recovery> {
    if !coalition.members.contains(&failed_id) {
        return Err(Error::NotAMember(failed_id));
    }
    let mut next = coalition.clone();
    next.members.retain(|m| *m != failed_id);
    let sector = next.sector_map.remove(&failed_id);
    if let Some(f) = followers.iter_mut().find(|f| f.uav.id == failed_id) {
        f.uav.alive = false;
    }
    ctx.transport.note(
        AgentRef::follower(failed_id),
        "member_failed",
        json!({ "leader_id": coalition.leader_id, "sector": sector }),
    );
    let replacement = match sector {
        Some(s) => fill_vacancy(&mut next, s, followers, ctx)?,
        None => None,
    };
    Ok(Recovery { coalition: next, vacated_sector: sector, replacement, promoted: None })
}

/// The living member with the most flight time left (lowest id on ties)
/// takes over as leader; its own sector is then refilled like a member
/// failure. Followers' `remaining_flight_time` must be current.
pub fn handle_leader_failure(
    coalition: &Coalition,
    followers: &mut [FollowerAgent],
    ctx: &mut FailureContext<'_>,
) -> Result<Recovery> {
    let promoted = followers
        .iter()
        .filter(|f| f.uav.alive && coalition.members.contains(&f.uav.id))
        .max_by(|a, b| {
            a.uav
                .remaining_flight_time
                .total_cmp(&b.uav.remaining_flight_time)
                .then_with(|| b.uav.id.cmp(&a.uav.id))
        })
        .map(|f| (f.uav.id, f.uav.position));
    ctx.transport.note(AgentRef::leader(coalition.leader_id), "leader_failed", json!({ "promoted": promoted.map(|p| p.0) }));
    let Some((new_leader, position)) = promoted else {
        return Err(Error::CoalitionDissolved(coalition.leader_id));
    };

    let mut next = coalition.clone();
    next.leader_id = new_leader;
    next.members.retain(|m| *m != new_leader);
    let sector = next.sector_map.remove(&new_leader);
    ctx.leader_position = position;
    ctx.transport.note(
        AgentRef::leader(new_leader),
        "promoted",
        json!({ "previous_leader": coalition.leader_id, "vacated_sector": sector }),
    );
    let replacement = match sector {
        Some(s) => fill_vacancy(&mut next, s, followers, ctx)?,
        None => {
            next.degraded = true;
            None
        }
    };
    Ok(Recovery { coalition: next, vacated_sector: sector, replacement, promoted: Some(new_leader) })
}

fn fill_vacancy(
    coalition: &mut Coalition,
    sector: usize,
    followers: &mut [FollowerAgent],
    ctx: &mut FailureContext<'_>,
) -> Result<Option<UavId>> {
    let me = AgentRef::leader(coalition.leader_id);
    let proposal = Proposal {
        leader_id: coalition.leader_id,
        leader_position: ctx.leader_position,
        center: coalition.center,
        radius: ctx.radius,
        properties_floor: coalition.requirement.properties_floor.clone(),
        mission_time: ctx.mission_time,
        region_priority: ctx.region_priority,
    };
    for f in followers.iter().filter(|f| f.is_available() && f.uav.id != coalition.leader_id) {
        ctx.transport.send(
            me,
            ctx.leader_position,
            AgentRef::follower(f.uav.id),
            f.uav.position,
            ProtocolMessage::Proposal(proposal.clone()),
        )?;
    }
    for f in followers.iter_mut() {
        for env in ctx.transport.drain(AgentRef::follower(f.uav.id)) {
            if let ProtocolMessage::Proposal(p) = env.message {
                if let Some(resp) = follower_handle_proposal(&mut f.state, &p, &f.uav, &ctx.rules) {
                    ctx.transport.send(
                        AgentRef::follower(f.uav.id),
                        f.uav.position,
                        me,
                        ctx.leader_position,
                        ProtocolMessage::VolunteerResponse(resp),
                    )?;
                }
            }
        }
    }
    let candidates: Vec<_> = ctx
        .transport
        .drain(me)
        .into_iter()
        .filter_map(|e| match e.message {
            ProtocolMessage::VolunteerResponse(v) => Some(v),
            _ => None,
        })
        .collect();
    let locked: Vec<IdentityVector> = followers
        .iter()
        .filter(|f| coalition.members.contains(&f.uav.id))
        .map(|f| f.uav.identity.clone())
        .collect();
    let selection =
        leader_select_members(&candidates, &locked, &coalition.requirement, 1, coalition.center, ctx.params)?;

    let Some(&chosen) = selection.ids.first() else {
        coalition.degraded = true;
        ctx.transport.note(me, "degraded", json!({ "vacant_sectors": coalition.vacant_sectors() }));
        return Ok(None);
    };
    let bid = Bid { leader_id: coalition.leader_id, follower_id: chosen, sector, anchor: coalition.anchors[sector] };
    let follower = followers.iter_mut().find(|f| f.uav.id == chosen).expect("candidate is a known follower");
    ctx.transport.send(me, ctx.leader_position, AgentRef::follower(chosen), follower.uav.position, ProtocolMessage::Bid(bid))?;
    let bids: Vec<Bid> = ctx
        .transport
        .drain(AgentRef::follower(chosen))
        .into_iter()
        .filter_map(|e| match e.message {
            ProtocolMessage::Bid(b) => Some(b),
            _ => None,
        })
        .collect();
    let priorities = BTreeMap::from([(coalition.leader_id, ctx.region_priority)]);
    let replies = follower_choose_bid(&mut follower.state, &bids, &follower.uav, &priorities);
    let accepted = replies.iter().any(|r| r.accept);
    for r in replies {
        ctx.transport.send(
            AgentRef::follower(chosen),
            follower.uav.position,
            me,
            ctx.leader_position,
            ProtocolMessage::BidReply(r),
        )?;
    }
    ctx.transport.drain(me);
    if !accepted {
        coalition.degraded = true;
        ctx.transport.note(me, "degraded", json!({ "vacant_sectors": coalition.vacant_sectors() }));
        return Ok(None);
    }
    coalition.members.push(chosen);
    coalition.members.sort_unstable();
    coalition.sector_map.insert(chosen, sector);
    coalition.degraded = !coalition.vacant_sectors().is_empty();
    ctx.transport.note(me, "replacement", json!({ "follower_id": chosen, "sector": sector }));
    Ok(Some(chosen))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sector_anchors, Disc};
    use crate::model::{CoalitionRequirement, UavAgent};
    use crate::protocol::FollowerPhase;

    fn follower(id: UavId, x: f64, battery: f64, committed: bool) -> FollowerAgent {
        let mut f = FollowerAgent::new(UavAgent {
            id,
            position: Point2D::new(x, 0.0),
            identity: IdentityVector::new(vec![1.0], vec![battery]).unwrap(),
            remaining_flight_time: battery,
            speed: 1000.0,
            alive: true,
        });
        if committed {
            f.state.phase = FollowerPhase::Committed;
            f.state.committed_to = Some(0);
        }
        f
    }

    fn coalition(members: &[UavId]) -> Coalition {
        let center = Point2D::new(0.0, 0.0);
        Coalition {
            leader_id: 0,
            center,
            members: members.to_vec(),
            requirement: CoalitionRequirement { properties_floor: vec![1.0], resources_total: vec![0.0] },
            sector_map: members.iter().enumerate().map(|(s, m)| (*m, s)).collect(),
            anchors: sector_anchors(&Disc::new(center, 100.0).unwrap(), 3, 0.0),
            degraded: false,
        }
    }

    fn ctx(t: &mut Transport) -> FailureContext<'_> {
        FailureContext {
            transport: t,
            rules: EligibilityRules { comm_range: 5000.0, max_distance: None },
            params: ValueParams::default(),
            mission_time: 7.5,
            leader_position: Point2D::new(0.0, 0.0),
            radius: 100.0,
            region_priority: 1.0,
        }
    }

    #[test]
    fn standby_fills_the_vacated_sector() {
        let mut fs = vec![follower(1, 10.0, 20.0, true), follower(2, 20.0, 20.0, true), follower(3, 30.0, 20.0, true)];
        fs.push(follower(7, 500.0, 20.0, false));
        let mut t = Transport::new(5000.0);
        let r = handle_member_failure(&coalition(&[1, 2, 3]), 2, &mut fs, &mut ctx(&mut t)).unwrap();
        assert_eq!(r.replacement, Some(7));
        assert_eq!(r.coalition.sector_map[&7], 1);
        assert_eq!(r.coalition.members, vec![1, 3, 7]);
        assert!(!r.coalition.degraded);
        assert!(!fs[1].uav.alive);
        assert_eq!(fs[3].state.phase, FollowerPhase::Committed);
    }

    #[test]
    fn empty_pool_degrades() {
        let mut fs = vec![follower(1, 10.0, 20.0, true), follower(2, 20.0, 20.0, true), follower(3, 30.0, 20.0, true)];
        fs.push(follower(8, 500.0, 3.0, false)); // not enough battery
        let mut t = Transport::new(5000.0);
        let r = handle_member_failure(&coalition(&[1, 2, 3]), 3, &mut fs, &mut ctx(&mut t)).unwrap();
        assert!(r.coalition.degraded);
        assert_eq!(r.replacement, None);
        assert_eq!(r.coalition.members, vec![1, 2]);
        assert_eq!(r.coalition.vacant_sectors(), vec![2]);
        assert!(handle_member_failure(&coalition(&[1]), 9, &mut fs, &mut ctx(&mut t)).is_err());
    }

    /// With two standbys and no resource requirement, the one nearer the
    /// center wins; brute force over the two singletons agrees.
    #[test]
    fn nearer_standby_wins() {
        let mut fs = vec![follower(1, 10.0, 20.0, true), follower(2, 20.0, 20.0, true), follower(3, 30.0, 20.0, true)];
        fs.push(follower(8, 900.0, 20.0, false));
        fs.push(follower(9, 400.0, 20.0, false));
        let oracle = [(8, 900.0f64), (9, 400.0)].into_iter().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0;
        let mut t = Transport::new(5000.0);
        let r = handle_member_failure(&coalition(&[1, 2, 3]), 1, &mut fs, &mut ctx(&mut t)).unwrap();
        assert_eq!(r.replacement, Some(oracle));
        assert_eq!(r.coalition.sector_map[&9], 0);
    }

    #[test]
    fn longest_battery_is_promoted() {
        let mut fs = vec![follower(1, 10.0, 12.0, true), follower(2, 20.0, 18.0, true), follower(3, 30.0, 9.0, true)];
        let mut t = Transport::new(5000.0);
        let r = handle_leader_failure(&coalition(&[1, 2, 3]), &mut fs, &mut ctx(&mut t)).unwrap();
        assert_eq!(r.promoted, Some(2));
        assert_eq!(r.coalition.leader_id, 2);
        assert_eq!(r.vacated_sector, Some(1));
        assert!(r.coalition.degraded);

        let mut fs = vec![follower(4, 10.0, 15.0, true), follower(3, 20.0, 15.0, true)];
        let r = handle_leader_failure(&coalition(&[4, 3]), &mut fs, &mut ctx(&mut t)).unwrap();
        assert_eq!(r.promoted, Some(3));
    }

    #[test]
    fn single_member_and_empty_coalitions() {
        let mut fs = vec![follower(5, 10.0, 20.0, true)];
        let mut t = Transport::new(5000.0);
        let r = handle_leader_failure(&coalition(&[5]), &mut fs, &mut ctx(&mut t)).unwrap();
        assert_eq!(r.promoted, Some(5));
        assert!(r.coalition.members.is_empty());
        assert!(r.coalition.degraded);
        fs[0].uav.alive = false;
        assert_eq!(
            handle_leader_failure(&coalition(&[5]), &mut fs, &mut ctx(&mut t)),
            Err(Error::CoalitionDissolved(0))
        );
    }
}
