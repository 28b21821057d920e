//! Planar primitives: points, discs, fire-zone polygons, grid coverage and
//! sector anchors.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cells per axis used by [`coverage_fraction`] callers.
pub const DEFAULT_GRID_RESOLUTION: usize = 128;
pub const MIN_GRID_RESOLUTION: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn within_field(&self, side: f64) -> bool {
        (0.0..=side).contains(&self.x) && (0.0..=side).contains(&self.y)
    }

    pub fn clamp_to_field(self, side: f64) -> Self {
        Self::new(self.x.clamp(0.0, side), self.y.clamp(0.0, side))
    }

    pub fn offset(self, dx: f64, dy: f64) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }
}

/// Euclidean distance in meters.
pub fn distance(a: Point2D, b: Point2D) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disc {
    pub center: Point2D,
    pub radius: f64,
}

impl Disc {
    pub fn new(center: Point2D, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || !center.is_finite() {
            return Err(Error::InvalidConfig(format!("disc radius must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn contains(&self, p: Point2D) -> bool {
        let dx = p.x - self.center.x;
        let dy = p.y - self.center.y;
        dx * dx + dy * dy <= self.radius * self.radius
    }
}

/// Simple polygon describing the burning area inside a square field `[0, L]²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawZone", into = "RawZone")]
pub struct FireZone {
    field_side: f64,
    vertices: Vec<Point2D>,
}

#[derive(Serialize, Deserialize)]
struct RawZone {
    field_side: f64,
    vertices: Vec<[f64; 2]>,
}

impl TryFrom<RawZone> for FireZone {
    type Error = Error;

    fn try_from(raw: RawZone) -> Result<Self> {
        let vertices = raw.vertices.into_iter().map(|[x, y]| Point2D::new(x, y)).collect();
        FireZone::new(raw.field_side, vertices)
    }
}

impl From<FireZone> for RawZone {
    fn from(zone: FireZone) -> Self {
        RawZone {
            field_side: zone.field_side,
            vertices: zone.vertices.iter().map(|p| [p.x, p.y]).collect(),
        }
    }
}

impl FireZone {
    pub fn new(field_side: f64, vertices: Vec<Point2D>) -> Result<Self> {
        if !(field_side > 0.0 && field_side.is_finite()) {
            return Err(Error::InvalidZone(format!("field side must be positive, got {field_side}")));
        }
        if vertices.len() < 3 {
            return Err(Error::InvalidZone(format!("{} vertices, need at least 3", vertices.len())));
        }
        if let Some(p) = vertices.iter().find(|p| !p.is_finite() || !p.within_field(field_side)) {
            return Err(Error::InvalidZone(format!("vertex ({}, {}) outside the field", p.x, p.y)));
        }
        if signed_area(&vertices).abs() <= 0.0 {
            return Err(Error::InvalidZone("polygon has zero area".into()));
        }
        if !is_simple(&vertices) {
            return Err(Error::InvalidZone("polygon self-intersects".into()));
        }
        Ok(Self { field_side, vertices })
    }

    pub fn field_side(&self) -> f64 {
        self.field_side
    }

    pub fn vertices(&self) -> &[Point2D] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices).abs()
    }

    pub fn contains(&self, p: Point2D) -> bool {
        point_in_polygon(p, &self.vertices)
    }

    /// Distance from `p` to the nearest point of the boundary.
    pub fn boundary_distance(&self, p: Point2D) -> f64 {
        edges(&self.vertices)
            .map(|(a, b)| segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    fn bbox(&self) -> (Point2D, Point2D) {
        let mut lo = Point2D::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point2D::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.vertices {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }
}

fn edges(vertices: &[Point2D]) -> impl Iterator<Item = (Point2D, Point2D)> + '_ {
    let n = vertices.len();
    (0..n).map(move |i| (vertices[i], vertices[(i + 1) % n]))
}

fn signed_area(vertices: &[Point2D]) -> f64 {
    0.5 * edges(vertices).map(|(a, b)| a.x * b.y - b.x * a.y).sum::<f64>()
}

fn cross(o: Point2D, a: Point2D, b: Point2D) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn on_segment(p: Point2D, a: Point2D, b: Point2D) -> bool {
    let len = distance(a, b);
    let tol = 1e-9 * len.max(1.0);
    if cross(a, b, p).abs() > tol * len.max(1.0) {
        return false;
    }
    p.x >= a.x.min(b.x) - tol
        && p.x <= a.x.max(b.x) + tol
        && p.y >= a.y.min(b.y) - tol
        && p.y <= a.y.max(b.y) + tol
}

fn segments_intersect(a: Point2D, b: Point2D, c: Point2D, d: Point2D) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    on_segment(a, c, d) || on_segment(b, c, d) || on_segment(c, a, b) || on_segment(d, a, b)
}

fn is_simple(vertices: &[Point2D]) -> bool {
    let n = vertices.len();
    for i in 0..n {
        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
        if a == b {
            return false;
        }
        for j in (i + 1)..n {
            // adjacent edges share a vertex by construction
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (vertices[j], vertices[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

fn segment_distance(p: Point2D, a: Point2D, b: Point2D) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return distance(p, a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    distance(p, Point2D::new(a.x + t * dx, a.y + t * dy))
}

/// Even-odd ray casting; points on the boundary count as inside.
pub fn point_in_polygon(p: Point2D, vertices: &[Point2D]) -> bool {
    if edges(vertices).any(|(a, b)| on_segment(p, a, b)) {
        return true;
    }
    let mut inside = false;
    for (a, b) in edges(vertices) {
        if (a.y > p.y) != (b.y > p.y) {
            let xc = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < xc {
                inside = !inside;
            }
        }
    }
    inside
}

/// Fraction of `disc` covered by `zone`, estimated on a `grid_resolution`²
/// grid over the disc's bounding box. Only cells whose centers fall in the
/// disc are counted.
pub fn coverage_fraction(disc: &Disc, zone: &FireZone, grid_resolution: usize) -> Result<f64> {
    if grid_resolution < MIN_GRID_RESOLUTION {
        return Err(Error::GridTooCoarse(grid_resolution));
    }
    if zone.area() <= 0.0 {
        return Err(Error::InvalidZone("polygon has zero area".into()));
    }
    let r = disc.radius;
    let c = disc.center;
    let (lo, hi) = zone.bbox();
    let disjoint = c.x + r < lo.x || c.x - r > hi.x || c.y + r < lo.y || c.y - r > hi.y;

    let h = 2.0 * r / grid_resolution as f64;
    let verts = zone.vertices();
    let mut crossings: Vec<f64> = Vec::with_capacity(verts.len());
    let mut in_disc = 0usize;
    let mut in_both = 0usize;

    for row in 0..grid_resolution {
        let y = c.y - r + (row as f64 + 0.5) * h;
        let dy = y - c.y;
        let half_sq = r * r - dy * dy;
        if half_sq < 0.0 {
            continue;
        }
        crossings.clear();
        let mut vertex_row = false;
        if !disjoint {
            for (a, b) in edges(verts) {
                if a.y == y {
                    vertex_row = true;
                }
                if (a.y > y) != (b.y > y) {
                    crossings.push(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
                }
            }
            crossings.sort_by(f64::total_cmp);
        }
        for col in 0..grid_resolution {
            let x = c.x - r + (col as f64 + 0.5) * h;
            let dx = x - c.x;
            if dx * dx > half_sq {
                continue;
            }
            in_disc += 1;
            if disjoint {
                continue;
            }
            let above = crossings.len() - crossings.partition_point(|&xc| xc <= x);
            let inside = if above % 2 == 1 {
                true
            } else {
                let near = crossings.iter().any(|&xc| (xc - x).abs() <= 1e-9 * zone.field_side());
                (vertex_row || near) && point_in_polygon(Point2D::new(x, y), verts)
            };
            if inside {
                in_both += 1;
            }
        }
    }
    if in_disc == 0 {
        return Ok(0.0);
    }
    Ok(in_both as f64 / in_disc as f64)
}

/// Station points on the disc's circle: one per sector, at the midpoint of
/// each arc of central angle `2π / s_count`.
pub fn sector_anchors(disc: &Disc, s_count: usize, phase: f64) -> Vec<Point2D> {
    assert!(s_count >= 1, "sector count must be at least 1");
    (0..s_count)
        .map(|s| {
            let theta = phase + TAU * s as f64 / s_count as f64;
            disc.center.offset(disc.radius * theta.cos(), disc.radius * theta.sin())
        })
        .collect()
}

/// Random star-shaped polygon around an interior centroid. Vertex angles are
/// jittered within equal slots so that every angular gap stays below π and
/// the polygon is simple; radii are uniform in `[0.1L, 0.35L]` and shortened
/// where the ray would leave the field.
pub fn generate_fire_zone(field_side: f64, rng_seed: u64, complexity: usize) -> Result<FireZone> {
    if complexity < 3 {
        return Err(Error::InvalidZone(format!("complexity {complexity} below 3")));
    }
    let l = field_side;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let centroid = Point2D::new(rng.gen_range(0.25 * l..=0.75 * l), rng.gen_range(0.25 * l..=0.75 * l));
    let phase = rng.gen_range(0.0..TAU);
    let slot = TAU / complexity as f64;
    let vertices = (0..complexity)
        .map(|i| {
            let jitter: f64 = rng.gen_range(-0.2..0.2);
            let theta = phase + slot * (i as f64 + 0.5 + jitter);
            let radius: f64 = rng.gen_range(0.1 * l..=0.35 * l);
            let (dx, dy) = (theta.cos(), theta.sin());
            let reach = ray_exit(centroid, dx, dy, l);
            let r = radius.min(reach);
            centroid.offset(r * dx, r * dy).clamp_to_field(l)
        })
        .collect();
    FireZone::new(l, vertices)
}

fn ray_exit(from: Point2D, dx: f64, dy: f64, side: f64) -> f64 {
    let along = |p: f64, d: f64| {
        if d > 0.0 {
            (side - p) / d
        } else if d < 0.0 {
            -p / d
        } else {
            f64::INFINITY
        }
    };
    along(from.x, dx).min(along(from.y, dy))
}
