use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance, Point2D};
use crate::model::UavId;

/// Exhaustive enumeration is capped at 8! orderings.
pub const MAX_SECTORS: usize = 8;

/// Costs closer than this are ties.
pub const TIE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorAssignment {
    /// Member id to sector index.
    pub map: BTreeMap<UavId, usize>,
    /// `permutation[i]` is the sector of the i-th input member.
    pub permutation: Vec<usize>,
    /// Total flight time in minutes.
    pub cost: f64,
}

/// Gives each of the S members one of the S anchors so that the summed
/// flight time is minimal over all S! orderings. Among equal costs the
/// lexicographically smallest permutation wins.
pub fn assign_sectors(members: &[(UavId, Point2D)], anchors: &[Point2D], speeds: &[f64]) -> Result<SectorAssignment> {
    if members.len() != anchors.len() {
        return Err(Error::SectorMismatch { members: members.len(), anchors: anchors.len() });
    }
    assign_sectors_partial(members, anchors, speeds)
}

/// As [`assign_sectors`], but allows fewer members than anchors; the
/// remaining sectors stay vacant.
pub fn assign_sectors_partial(
    members: &[(UavId, Point2D)],
    anchors: &[Point2D],
    speeds: &[f64],
) -> Result<SectorAssignment> {
    if members.len() > anchors.len() || speeds.len() != members.len() {
        return Err(Error::SectorMismatch { members: members.len(), anchors: anchors.len() });
    }
    if anchors.len() > MAX_SECTORS {
        return Err(Error::SearchTooLarge(format!("{} sectors exceed the limit of {MAX_SECTORS}", anchors.len())));
    }
    let times: Vec<Vec<f64>> = members
        .iter()
        .zip(speeds)
        .map(|((_, p), v)| anchors.iter().map(|a| distance(*p, *a) / v).collect())
        .collect();

    let mut search = Search { times: &times, used: vec![false; anchors.len()], current: Vec::new(), best: None };
    search.descend();
    let (cost, permutation) = search.best.unwrap_or((0.0, Vec::new()));
    let map = members.iter().zip(&permutation).map(|((id, _), s)| (*id, *s)).collect();
    Ok(SectorAssignment { map, permutation, cost })
}

struct Search<'a> {
    times: &'a [Vec<f64>],
    used: Vec<bool>,
    current: Vec<usize>,
    best: Option<(f64, Vec<usize>)>,
}

impl Search<'_> {
    // Depth-first in lexicographic order; a leaf replaces the incumbent only
    // when cheaper by more than TIE_EPS, so ties keep the earliest permutation.
    fn descend(&mut self) {
        let depth = self.current.len();
        if depth == self.times.len() {
            let cost: f64 = self.current.iter().enumerate().map(|(i, s)| self.times[i][*s]).sum();
            if self.best.as_ref().is_none_or(|(b, _)| cost < *b - TIE_EPS) {
                self.best = Some((cost, self.current.clone()));
            }
            return;
        }
        for s in 0..self.used.len() {
            if self.used[s] {
                continue;
            }
            self.used[s] = true;
            self.current.push(s);
            self.descend();
            self.current.pop();
            self.used[s] = false;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> Point2D {
        Point2D::new(x, y)
    }

    #[test]
    fn single_member() {
        let a = assign_sectors(&[(7, pt(0.0, 0.0))], &[pt(3.0, 4.0)], &[1.0]).unwrap();
        assert_eq!(a.permutation, vec![0]);
        assert_eq!(a.map[&7], 0);
        assert_eq!(a.cost, 5.0);
    }

    #[test]
    fn identity_dominates_crossing() {
        let a = assign_sectors(
            &[(1, pt(0.0, 0.0)), (2, pt(10.0, 0.0))],
            &[pt(0.0, 1.0), pt(10.0, 1.0)],
            &[1.0, 1.0],
        )
        .unwrap();
        assert_eq!(a.permutation, vec![0, 1]);
        assert_eq!(a.cost, 2.0);
    }

    #[test]
    fn ties_take_smallest_permutation() {
        let a = assign_sectors(&[(1, pt(0.0, 0.0)), (2, pt(0.0, 0.0))], &[pt(1.0, 0.0), pt(-1.0, 0.0)], &[1.0, 1.0])
            .unwrap();
        assert_eq!(a.permutation, vec![0, 1]);
    }

    #[test]
    fn speed_weights_the_cost() {
        // the fast member takes the far anchor
        let a = assign_sectors(
            &[(1, pt(0.0, 0.0)), (2, pt(0.0, 0.0))],
            &[pt(100.0, 0.0), pt(1.0, 0.0)],
            &[1.0, 100.0],
        )
        .unwrap();
        assert_eq!(a.permutation, vec![1, 0]);
    }

    #[test]
    fn mismatch_and_size_errors() {
        assert!(assign_sectors(&[(1, pt(0.0, 0.0))], &[pt(0.0, 0.0), pt(1.0, 1.0)], &[1.0]).is_err());
        let many = vec![pt(0.0, 0.0); 9];
        let ms: Vec<_> = (0..9).map(|i| (i, pt(0.0, 0.0))).collect();
        assert!(matches!(assign_sectors(&ms, &many, &[1.0; 9]), Err(Error::SearchTooLarge(_))));
    }

    #[test]
    fn partial_leaves_sectors_vacant() {
        let a = assign_sectors_partial(&[(4, pt(0.0, -5.0))], &[pt(0.0, 5.0), pt(0.0, -5.0), pt(5.0, 0.0)], &[1.0])
            .unwrap();
        assert_eq!(a.map[&4], 1);
        assert_eq!(a.cost, 0.0);
        let empty = assign_sectors_partial(&[], &[pt(0.0, 0.0)], &[]).unwrap();
        assert!(empty.map.is_empty());
    }
}
