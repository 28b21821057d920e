use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::VolunteerResponse;
use crate::error::{Error, Result};
use crate::geometry::{distance, Point2D};
use crate::model::{coalition_value, CoalitionRequirement, IdentityVector, UavId, ValueParams};

/// Upper bound on subsets a leader will enumerate, C(25, 5).
pub const MAX_SUBSETS: u64 = 53_130;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    /// Ascending ids.
    pub ids: Vec<UavId>,
    /// Value of the coalition formed by the locked members plus `ids`.
    pub value: f64,
    /// Slots that could not be filled for lack of candidates.
    pub shortfall: usize,
    /// No subset reaches a value above `-L`.
    pub under_resourced: bool,
}

pub(crate) fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc.saturating_mul((n - i) as u64) / (i as u64 + 1))
}

/// Picks `s_needed` candidates that, together with the already `locked`
/// members, maximize the coalition value. Every subset of the right size is
/// evaluated. Ties go to the smaller summed distance to `center`, then to the
/// lexicographically smallest id set.
///
/// Candidates are expected to be filtered for properties and battery already.
pub fn leader_select_members(
    candidates: &[VolunteerResponse],
    locked: &[IdentityVector],
    req: &CoalitionRequirement,
    s_needed: usize,
    center: Point2D,
    params: ValueParams,
) -> Result<Selection> {
    let mut pool: Vec<&VolunteerResponse> = candidates.iter().collect();
    pool.sort_by_key(|c| c.follower_id);
    pool.dedup_by_key(|c| c.follower_id);

    let value_of = |chosen: &[&VolunteerResponse]| -> Result<f64> {
        if locked.is_empty() && chosen.is_empty() {
            return Ok(0.0);
        }
        let members: Vec<IdentityVector> =
            locked.iter().cloned().chain(chosen.iter().map(|c| c.identity.clone())).collect();
        coalition_value(&members, req, params)
    };

    if s_needed == 0 || pool.len() <= s_needed {
        let take = if s_needed == 0 { 0 } else { pool.len() };
        let chosen = &pool[..take];
        let value = value_of(chosen)?;
        return Ok(Selection {
            ids: chosen.iter().map(|c| c.follower_id).collect(),
            value,
            shortfall: s_needed - take,
            under_resourced: value <= -params.big_l,
        });
    }

    let subsets = binomial(pool.len(), s_needed);
    if subsets > MAX_SUBSETS {
        return Err(Error::SearchTooLarge(format!(
            "{subsets} subsets of {} candidates exceed the limit of {MAX_SUBSETS}",
            pool.len()
        )));
    }

    let mut best: Option<(f64, f64, Vec<usize>)> = None;
    // combinations come out in lexicographic index order, and the pool is
    // sorted by id, so keeping the first of equal keys keeps the smallest ids
    for combo in (0..pool.len()).combinations(s_needed) {
        let chosen: Vec<&VolunteerResponse> = combo.iter().map(|&i| pool[i]).collect();
        let value = value_of(&chosen)?;
        let dist: f64 = chosen.iter().map(|c| distance(c.position, center)).sum();
        let better = match &best {
            None => true,
            Some((bv, bd, _)) => value > *bv || (value == *bv && dist < *bd),
        };
        if better {
            best = Some((value, dist, combo));
        }
    }
    let (value, _, combo) = best.expect("at least one subset");
    Ok(Selection {
        ids: combo.iter().map(|&i| pool[i].follower_id).collect(),
        value,
        shortfall: 0,
        under_resourced: value <= -params.big_l,
    })
}
