//! Greedy displacement of coalition leaders over the fire zone.
//!
//! Leaders move one at a time, in id order, choosing between staying put and
//! a fixed set of compass steps. A candidate position is scored first by the
//! coverage of its disc (clamped at the threshold, so that a leader which
//! already covers enough stops chasing coverage) and second by the distance
//! to its nearest peer. A leader whose disc misses the zone entirely is
//! scored by its negative distance to the zone instead, which pulls it in.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{coverage_fraction, distance, Disc, FireZone, Point2D, DEFAULT_GRID_RESOLUTION};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacementConfig {
    pub coalition_radius: f64,
    pub coverage_threshold: f64,
    pub step_size: f64,
    pub max_iterations: usize,
    /// How many compass moves (in N, NE, E, SE, S, SW, W, NW order) are tried.
    pub candidate_moves: usize,
    pub grid_resolution: usize,
}

impl PlacementConfig {
    pub fn for_field(field_side: f64) -> Self {
        Self {
            coalition_radius: 0.15 * field_side,
            coverage_threshold: 0.8,
            step_size: field_side / 100.0,
            max_iterations: 500,
            candidate_moves: 8,
            grid_resolution: DEFAULT_GRID_RESOLUTION,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.coverage_threshold > 0.0 && self.coverage_threshold <= 1.0) {
            return Err(Error::InvalidConfig("coverage_threshold must be in (0, 1]".into()));
        }
        if !(self.step_size > 0.0) {
            return Err(Error::InvalidConfig("step_size must be positive".into()));
        }
        if !(self.coalition_radius > 0.0) {
            return Err(Error::InvalidConfig("coalition_radius must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        if !(1..=8).contains(&self.candidate_moves) {
            return Err(Error::InvalidConfig("candidate_moves must be between 1 and 8".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Move {
    Stay,
    N,
    NE,
    E,
    SE,
    S,
    SW,
    W,
    NW,
}

impl Move {
    /// Tie-break order.
    pub const ALL: [Move; 9] = [Move::Stay, Move::N, Move::NE, Move::E, Move::SE, Move::S, Move::SW, Move::W, Move::NW];

    fn delta(self, step: f64) -> (f64, f64) {
        let d = step * std::f64::consts::FRAC_1_SQRT_2;
        match self {
            Move::Stay => (0.0, 0.0),
            Move::N => (0.0, step),
            Move::NE => (d, d),
            Move::E => (step, 0.0),
            Move::SE => (d, -d),
            Move::S => (0.0, -step),
            Move::SW => (-d, -d),
            Move::W => (-step, 0.0),
            Move::NW => (-d, d),
        }
    }
}

/// Lexicographic placement score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacementScore {
    pub coverage: f64,
    /// `None` stands for +∞ (no peers).
    pub separation: Option<f64>,
}

impl PlacementScore {
    fn separation_value(&self) -> f64 {
        self.separation.unwrap_or(f64::INFINITY)
    }
}

impl PartialOrd for PlacementScore {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.coverage.partial_cmp(&other.coverage)? {
            Ordering::Equal => self.separation_value().partial_cmp(&other.separation_value()),
            ord => Some(ord),
        }
    }
}

pub fn placement_objective(center: Point2D, others: &[Point2D], zone: &FireZone, cfg: &PlacementConfig) -> Result<PlacementScore> {
    let coverage = coverage_term(center, zone, cfg)?;
    Ok(PlacementScore { coverage, separation: separation(center, others) })
}

fn coverage_term(center: Point2D, zone: &FireZone, cfg: &PlacementConfig) -> Result<f64> {
    let disc = Disc::new(center, cfg.coalition_radius)?;
    let covered = coverage_fraction(&disc, zone, cfg.grid_resolution)?;
    Ok(if covered > 0.0 {
        covered.min(cfg.coverage_threshold)
    } else if zone.contains(center) {
        0.0
    } else {
        -zone.boundary_distance(center) / zone.field_side()
    })
}

fn separation(center: Point2D, others: &[Point2D]) -> Option<f64> {
    others.iter().map(|o| distance(center, *o)).reduce(f64::min)
}

/// Coverage depends on the center alone, and the greedy walk revisits
/// lattice points often.
struct CoverageCache<'a> {
    zone: &'a FireZone,
    cfg: &'a PlacementConfig,
    seen: HashMap<(u64, u64), f64>,
}

impl CoverageCache<'_> {
    fn score(&mut self, center: Point2D, others: &[Point2D]) -> Result<PlacementScore> {
        let key = (center.x.to_bits(), center.y.to_bits());
        let coverage = match self.seen.get(&key) {
            Some(c) => *c,
            None => {
                let c = coverage_term(center, self.zone, self.cfg)?;
                self.seen.insert(key, c);
                c
            }
        };
        Ok(PlacementScore { coverage, separation: separation(center, others) })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementStep {
    pub round: usize,
    pub leader: usize,
    #[serde(rename = "move")]
    pub chosen: Move,
    pub before: PlacementScore,
    pub after: PlacementScore,
    pub position: Point2D,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub centers: Vec<Point2D>,
    pub rounds: usize,
    pub converged: bool,
    pub trace: Vec<PlacementStep>,
}

impl Placement {
    /// One JSON object per line.
    pub fn trace_jsonl(&self) -> String {
        self.trace
            .iter()
            .map(|s| serde_json::to_string(s).expect("trace serializes") + "\n")
            .collect()
    }
}

/// Round-robin greedy placement. `starts` are in leader-id order.
pub fn place_leaders(zone: &FireZone, starts: &[Point2D], cfg: &PlacementConfig) -> Result<Placement> {
    cfg.validate()?;
    let side = zone.field_side();
    if let Some(p) = starts.iter().find(|p| !p.within_field(side)) {
        return Err(Error::InvalidConfig(format!("leader start ({}, {}) outside the field", p.x, p.y)));
    }
    let mut centers = starts.to_vec();
    let mut trace = Vec::new();
    let mut converged = false;
    let mut rounds = 0;
    let mut cache = CoverageCache { zone, cfg, seen: HashMap::new() };

    while rounds < cfg.max_iterations {
        rounds += 1;
        let mut improved = false;
        for i in 0..centers.len() {
            let others: Vec<Point2D> = centers.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, p)| *p).collect();
            let here = centers[i];
            let before = cache.score(here, &others)?;
            let (mut best_move, mut best_pos, mut best) = (Move::Stay, here, before);
            for &m in &Move::ALL[1..=cfg.candidate_moves] {
                let (dx, dy) = m.delta(cfg.step_size);
                let cand = here.offset(dx, dy).clamp_to_field(side);
                if cand == here {
                    continue;
                }
                let score = cache.score(cand, &others)?;
                if score.partial_cmp(&best) == Some(Ordering::Greater) {
                    (best_move, best_pos, best) = (m, cand, score);
                }
            }
            if best_move != Move::Stay {
                centers[i] = best_pos;
                improved = true;
            }
            trace.push(PlacementStep { round: rounds, leader: i, chosen: best_move, before, after: best, position: best_pos });
        }
        if !improved {
            converged = true;
            break;
        }
    }
    Ok(Placement { centers, rounds, converged, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::generate_fire_zone;

    fn big_square() -> FireZone {
        FireZone::new(
            10_000.0,
            vec![
                Point2D::new(1000.0, 1000.0),
                Point2D::new(9000.0, 1000.0),
                Point2D::new(9000.0, 9000.0),
                Point2D::new(1000.0, 9000.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn clamped_coverage_and_infinite_separation() {
        let zone = big_square();
        let mut cfg = PlacementConfig::for_field(10_000.0);
        cfg.coalition_radius = 500.0;
        // 95% covered disc near the square's edge
        let s = placement_objective(Point2D::new(1000.0 + 450.0, 5000.0), &[], &zone, &cfg).unwrap();
        assert_eq!(s.coverage, 0.8);
        assert_eq!(s.separation, None);
    }

    #[test]
    fn equal_coverage_prefers_farther_peer() {
        let zone = big_square();
        let cfg = PlacementConfig { coalition_radius: 300.0, ..PlacementConfig::for_field(10_000.0) };
        let peer = [Point2D::new(5000.0, 5000.0)];
        let near = placement_objective(Point2D::new(5500.0, 5000.0), &peer, &zone, &cfg).unwrap();
        let far = placement_objective(Point2D::new(7000.0, 5000.0), &peer, &zone, &cfg).unwrap();
        assert_eq!(near.coverage, far.coverage);
        assert!(far > near);
    }

    #[test]
    fn single_leader_inside_large_zone_stays_covered() {
        let zone = big_square();
        let cfg = PlacementConfig { coalition_radius: 800.0, ..PlacementConfig::for_field(10_000.0) };
        let p = place_leaders(&zone, &[Point2D::new(4000.0, 6000.0)], &cfg).unwrap();
        assert!(p.converged);
        let disc = Disc::new(p.centers[0], 800.0).unwrap();
        assert_eq!(coverage_fraction(&disc, &zone, 128).unwrap(), 1.0);
    }

    #[test]
    fn coincident_leaders_separate() {
        let zone = big_square();
        let cfg = PlacementConfig { coalition_radius: 500.0, max_iterations: 3, ..PlacementConfig::for_field(10_000.0) };
        let start = Point2D::new(5000.0, 5000.0);
        let p = place_leaders(&zone, &[start, start], &cfg).unwrap();
        assert!(distance(p.centers[0], p.centers[1]) > 0.0);
        assert_ne!(p.trace[0].chosen, Move::Stay);
    }

    #[test]
    fn leaders_outside_the_zone_are_drawn_in() {
        let zone = generate_fire_zone(10_000.0, 42, 12).unwrap();
        let cfg = PlacementConfig::for_field(10_000.0);
        let p = place_leaders(&zone, &[Point2D::new(0.0, 0.0), Point2D::new(10_000.0, 10_000.0)], &cfg).unwrap();
        for c in &p.centers {
            let cov = coverage_fraction(&Disc::new(*c, cfg.coalition_radius).unwrap(), &zone, 128).unwrap();
            assert!(cov > 0.5, "{cov}");
        }
    }

    #[test]
    fn rejects_bad_input() {
        let zone = big_square();
        let cfg = PlacementConfig::for_field(10_000.0);
        assert!(place_leaders(&zone, &[Point2D::new(-1.0, 0.0)], &cfg).is_err());
        let bad = PlacementConfig { coverage_threshold: 0.0, ..cfg };
        assert!(place_leaders(&zone, &[Point2D::new(1.0, 0.0)], &bad).is_err());
    }

    #[test]
    fn deterministic_and_in_field() {
        let zone = generate_fire_zone(10_000.0, 9, 8).unwrap();
        let cfg = PlacementConfig::for_field(10_000.0);
        let starts = [Point2D::new(100.0, 9900.0), Point2D::new(9900.0, 100.0), Point2D::new(5000.0, 5000.0)];
        let a = place_leaders(&zone, &starts, &cfg).unwrap();
        let b = place_leaders(&zone, &starts, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.centers.iter().all(|c| c.within_field(10_000.0)));
        assert!(a.trace.iter().all(|s| s.after >= s.before));
    }
}
