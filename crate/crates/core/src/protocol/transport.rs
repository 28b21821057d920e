use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{AgentRef, Envelope, ProtocolMessage, Role};
use crate::error::{Error, Result};
use crate::geometry::{distance, Point2D};

/// One line of the event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub tick: u64,
    pub round: u32,
    pub from: AgentRef,
    pub to: AgentRef,
    pub kind: String,
    pub payload: Value,
}

/// Reliable, in-order delivery between agents within `range` of each other.
/// Every delivery and every state transition reported through [`Transport::note`]
/// is appended to the log with a global tick.
#[derive(Debug, Clone)]
pub struct Transport {
    range: f64,
    tick: u64,
    round: u32,
    seqs: BTreeMap<AgentRef, u64>,
    inboxes: BTreeMap<AgentRef, VecDeque<Envelope>>,
    log: Vec<Event>,
}

impl Transport {
    pub fn new(range: f64) -> Self {
        Self { range, tick: 0, round: 0, seqs: BTreeMap::new(), inboxes: BTreeMap::new(), log: Vec::new() }
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn set_round(&mut self, round: u32) {
        self.round = round;
    }

    /// Returns `Ok(false)` when the receiver is out of range and nothing was delivered.
    pub fn send(&mut self, from: AgentRef, from_pos: Point2D, to: AgentRef, to_pos: Point2D, message: ProtocolMessage) -> Result<bool> {
        if from.role == Role::Leader && to.role == Role::Leader {
            return Err(Error::LeaderToLeader { from: from.id, to: to.id });
        }
        if distance(from_pos, to_pos) > self.range {
            return Ok(false);
        }
        let seq = self.seqs.entry(from).or_insert(0);
        *seq += 1;
        let env = Envelope { from, to, seq: *seq, message };
        let mut payload = env.message.payload();
        if let Value::Object(map) = &mut payload {
            map.insert("seq".into(), Value::from(env.seq));
        }
        self.push(from, to, env.message.kind(), payload);
        self.inboxes.entry(to).or_default().push_back(env);
        Ok(true)
    }

    pub fn drain(&mut self, who: AgentRef) -> Vec<Envelope> {
        self.inboxes.remove(&who).map(Vec::from).unwrap_or_default()
    }

    /// Records a state transition or mission event of `agent`.
    pub fn note(&mut self, agent: AgentRef, kind: &str, payload: Value) {
        self.push(agent, agent, kind, payload);
    }

    fn push(&mut self, from: AgentRef, to: AgentRef, kind: &str, payload: Value) {
        self.tick += 1;
        self.log.push(Event { tick: self.tick, round: self.round, from, to, kind: kind.to_string(), payload });
    }

    pub fn log(&self) -> &[Event] {
        &self.log
    }

    pub fn into_log(self) -> Vec<Event> {
        self.log
    }
}

pub fn events_to_jsonl(events: &[Event]) -> String {
    events.iter().map(|e| serde_json::to_string(e).expect("events serialize") + "\n").collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::BidReply;

    #[test]
    fn leader_to_leader_is_refused() {
        let mut t = Transport::new(100.0);
        let p = Point2D::new(0.0, 0.0);
        let msg = ProtocolMessage::BidReply(BidReply { follower_id: 1, leader_id: 2, accept: true });
        assert!(t.send(AgentRef::leader(0), p, AgentRef::leader(1), p, msg).is_err());
        assert!(t.log().is_empty());
    }

    #[test]
    fn out_of_range_drops_and_seq_is_per_sender() {
        let mut t = Transport::new(10.0);
        let near = Point2D::new(5.0, 0.0);
        let far = Point2D::new(50.0, 0.0);
        let o = Point2D::new(0.0, 0.0);
        let msg = |a| ProtocolMessage::BidReply(BidReply { follower_id: 3, leader_id: 0, accept: a });
        assert!(!t.send(AgentRef::follower(3), far, AgentRef::leader(0), o, msg(true)).unwrap());
        assert!(t.send(AgentRef::follower(3), near, AgentRef::leader(0), o, msg(true)).unwrap());
        assert!(t.send(AgentRef::follower(3), near, AgentRef::leader(0), o, msg(false)).unwrap());
        let got = t.drain(AgentRef::leader(0));
        assert_eq!(got.iter().map(|e| e.seq).collect::<Vec<_>>(), vec![1, 2]);
        assert!(t.drain(AgentRef::leader(0)).is_empty());
        let line = events_to_jsonl(&t.log()[..1]);
        assert!(line.starts_with(r#"{"tick":1,"round":0,"from":{"role":"follower","id":3},"to":{"role":"leader","id":0},"kind":"bid_reply""#));
    }
}
