//! Centralized baseline: one planner that sees every follower and every
//! coalition at once.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::assignment::solve_rectangular;
use crate::error::{Error, Result};
use crate::geometry::distance;
use crate::model::{coalition_score, Coalition, IdentityVector, UavAgent, UavId, ValueParams};
use crate::protocol::selection::{binomial, MAX_SUBSETS};
use crate::protocol::{assign_sectors_partial, eligible, CoalitionSpec, EligibilityRules};

/// Largest number of positions (coalitions times sectors) searched exhaustively.
pub const MAX_EXHAUSTIVE_POSITIONS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralAssignment {
    /// In coalition order.
    pub coalitions: Vec<Coalition>,
    pub scores: Vec<f64>,
    pub shortfalls: Vec<usize>,
}

impl CentralAssignment {
    pub fn total_score(&self) -> f64 {
        self.scores.iter().sum()
    }

    pub fn all_complete(&self) -> bool {
        self.shortfalls.iter().all(|s| *s == 0)
    }

    /// Follower id to (coalition index, sector).
    pub fn mapping(&self) -> BTreeMap<UavId, (usize, usize)> {
        self.coalitions
            .iter()
            .enumerate()
            .flat_map(|(c, co)| co.sector_map.iter().map(move |(id, s)| (*id, (c, *s))))
            .collect()
    }
}

/// Followers allowed in each coalition, by index into `followers`.
fn eligibility(
    followers: &[UavAgent],
    specs: &[CoalitionSpec],
    rules: &EligibilityRules,
    mission_time: f64,
) -> Vec<Vec<usize>> {
    specs
        .iter()
        .map(|spec| {
            let proposal = spec.proposal(mission_time);
            (0..followers.len()).filter(|&i| eligible(&followers[i], &proposal, rules)).collect()
        })
        .collect()
}

fn finish(
    followers: &[UavAgent],
    specs: &[CoalitionSpec],
    chosen: Vec<Vec<usize>>,
    sector_maps: Option<Vec<BTreeMap<UavId, usize>>>,
    params: ValueParams,
) -> Result<CentralAssignment> {
    let mut out = CentralAssignment { coalitions: Vec::new(), scores: Vec::new(), shortfalls: Vec::new() };
    for (c, (spec, mut idx)) in specs.iter().zip(chosen).enumerate() {
        idx.sort_by_key(|&i| followers[i].id);
        let ids: Vec<UavId> = idx.iter().map(|&i| followers[i].id).collect();
        let identities: Vec<IdentityVector> = idx.iter().map(|&i| followers[i].identity.clone()).collect();
        let sector_map = match &sector_maps {
            Some(maps) => maps[c].clone(),
            None => {
                let members: Vec<_> = idx.iter().map(|&i| (followers[i].id, followers[i].position)).collect();
                let speeds: Vec<f64> = idx.iter().map(|&i| followers[i].speed).collect();
                assign_sectors_partial(&members, &spec.anchors, &speeds)?.map
            }
        };
        out.scores.push(coalition_score(&identities, &spec.requirement, spec.sectors(), params)?);
        out.shortfalls.push(spec.sectors() - ids.len());
        out.coalitions.push(Coalition {
            leader_id: spec.leader_id,
            center: spec.center,
            members: ids,
            requirement: spec.requirement.clone(),
            sector_map,
            anchors: spec.anchors.clone(),
            degraded: false,
        });
    }
    Ok(out)
}

/// One candidate member set for one coalition.
struct Item {
    members: Vec<usize>,
    score: f64,
    dist: f64,
}

/// Lexicographic key: score high, filled high, distance low.
#[derive(Clone, Copy)]
struct Key {
    score: f64,
    filled: usize,
    dist: f64,
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn cmp_key(a: &Key, b: &Key) -> Ordering {
    if !near(a.score, b.score) {
        return a.score.total_cmp(&b.score);
    }
    if a.filled != b.filled {
        return a.filled.cmp(&b.filled);
    }
    if !near(a.dist, b.dist) {
        return b.dist.total_cmp(&a.dist);
    }
    Ordering::Equal
}

struct Search<'a> {
    followers: &'a [UavAgent],
    items: Vec<Vec<Item>>,
    /// Optimistic key of coalitions `c..` ignoring conflicts.
    rest: Vec<Key>,
    used: Vec<bool>,
    stack: Vec<usize>,
    best: Option<(Key, Vec<UavId>, Vec<usize>)>,
}

impl Search<'_> {
    fn ids(&self, picks: &[usize]) -> Vec<UavId> {
        picks
            .iter()
            .enumerate()
            .flat_map(|(c, &k)| {
                let mut ids: Vec<UavId> = self.items[c][k].members.iter().map(|&i| self.followers[i].id).collect();
                ids.sort_unstable();
                ids
            })
            .collect()
    }

    fn descend(&mut self, c: usize, acc: Key) {
        if c == self.items.len() {
            let ids = self.ids(&self.stack);
            let better = match &self.best {
                None => true,
                Some((k, best_ids, _)) => match cmp_key(&acc, k) {
                    Ordering::Greater => true,
                    Ordering::Less => false,
                    Ordering::Equal => ids < *best_ids,
                },
            };
            if better {
                self.best = Some((acc, ids, self.stack.clone()));
            }
            return;
        }
        let rest = self.rest[c + 1];
        for k in 0..self.items[c].len() {
            let item = &self.items[c][k];
            let with = Key {
                score: acc.score + item.score,
                filled: acc.filled + item.members.len(),
                dist: acc.dist + item.dist,
            };
            if let Some((best, _, _)) = &self.best {
                let bound = Key { score: with.score + rest.score, filled: with.filled + rest.filled, dist: with.dist + rest.dist };
                // items are sorted so later bounds are no better
                if cmp_key(&bound, best) == Ordering::Less {
                    break;
                }
            }
            if item.members.iter().any(|&i| self.used[i]) {
                continue;
            }
            let members = item.members.clone();
            for &i in &members {
                self.used[i] = true;
            }
            self.stack.push(k);
            self.descend(c + 1, with);
            self.stack.pop();
            for &i in &members {
                self.used[i] = false;
            }
        }
    }
}

/// Exhaustive search over every way to give each coalition a disjoint set of
/// eligible followers, maximizing the summed coalition score. Ties go to more
/// filled positions, then the smaller summed member-to-center distance, then
/// the smaller id list. Sectors are laid out per coalition by minimum flight
/// time.
///
/// Positions that cannot be filled are reported in `shortfalls`.
pub fn central_optimal_assignment(
    followers: &[UavAgent],
    specs: &[CoalitionSpec],
    rules: &EligibilityRules,
    mission_time: f64,
    params: ValueParams,
) -> Result<CentralAssignment> {
    let positions: usize = specs.iter().map(CoalitionSpec::sectors).sum();
    if positions > MAX_EXHAUSTIVE_POSITIONS {
        return Err(Error::SearchTooLarge(format!(
            "{positions} positions exceed the exhaustive limit of {MAX_EXHAUSTIVE_POSITIONS}; use the minimum-distance assignment"
        )));
    }
    let allowed = eligibility(followers, specs, rules, mission_time);

    let mut items = Vec::with_capacity(specs.len());
    for (spec, pool) in specs.iter().zip(&allowed) {
        let s = spec.sectors();
        let count: u64 = (0..=s.min(pool.len())).map(|k| binomial(pool.len(), k)).sum();
        if count > MAX_SUBSETS {
            return Err(Error::SearchTooLarge(format!(
                "{count} member sets for coalition {} exceed the limit of {MAX_SUBSETS}",
                spec.leader_id
            )));
        }
        let mut list = Vec::new();
        for k in 0..=s.min(pool.len()) {
            for members in pool.iter().copied().combinations(k) {
                let identities: Vec<IdentityVector> = members.iter().map(|&i| followers[i].identity.clone()).collect();
                let score = coalition_score(&identities, &spec.requirement, s, params)?;
                let dist = members.iter().map(|&i| distance(followers[i].position, spec.center)).sum();
                list.push(Item { members, score, dist });
            }
        }
        list.sort_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then(b.members.len().cmp(&a.members.len()))
                .then(a.dist.total_cmp(&b.dist))
        });
        items.push(list);
    }

    let mut rest = vec![Key { score: 0.0, filled: 0, dist: 0.0 }; specs.len() + 1];
    for c in (0..specs.len()).rev() {
        let top = &items[c][0];
        let (filled, dist) = items[c]
            .iter()
            .filter(|it| it.score == top.score)
            .fold((0, f64::INFINITY), |(f, d), it| match it.members.len().cmp(&f) {
                Ordering::Greater => (it.members.len(), it.dist),
                Ordering::Equal => (f, d.min(it.dist)),
                Ordering::Less => (f, d),
            });
        rest[c] = Key { score: rest[c + 1].score + top.score, filled: rest[c + 1].filled + filled, dist: rest[c + 1].dist + dist };
    }

    let mut search = Search {
        followers,
        items,
        rest,
        used: vec![false; followers.len()],
        stack: Vec::new(),
        best: None,
    };
    search.descend(0, Key { score: 0.0, filled: 0, dist: 0.0 });
    let (_, _, picks) = search.best.expect("the all-empty assignment is always available");
    let chosen = picks.iter().enumerate().map(|(c, &k)| search.items[c][k].members.clone()).collect();
    finish(followers, specs, chosen, None, params)
}

/// Single-resource reduction: assigns followers to the C x S anchors so that
/// the number of filled positions is maximal and the summed follower-to-anchor
/// distance is minimal, in polynomial time. Eligibility is the same as for the
/// other methods.
pub fn central_min_distance_assignment(
    followers: &[UavAgent],
    specs: &[CoalitionSpec],
    rules: &EligibilityRules,
    mission_time: f64,
    params: ValueParams,
) -> Result<CentralAssignment> {
    let allowed = eligibility(followers, specs, rules, mission_time);
    let slots: Vec<(usize, usize)> =
        specs.iter().enumerate().flat_map(|(c, s)| (0..s.sectors()).map(move |k| (c, k))).collect();
    let costs: Vec<Vec<Option<f64>>> = slots
        .iter()
        .map(|&(c, k)| {
            let anchor = specs[c].anchors[k];
            (0..followers.len())
                .map(|i| allowed[c].binary_search(&i).is_ok().then(|| distance(followers[i].position, anchor)))
                .collect()
        })
        .collect();
    let solved = solve_rectangular(&costs);

    let mut chosen = vec![Vec::new(); specs.len()];
    let mut maps = vec![BTreeMap::new(); specs.len()];
    for (&(c, k), col) in slots.iter().zip(&solved.row_to_col) {
        if let Some(i) = *col {
            chosen[c].push(i);
            maps[c].insert(followers[i].id, k);
        }
    }
    finish(followers, specs, chosen, Some(maps), params)
}
