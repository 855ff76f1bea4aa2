//! Seeded synthetic archipelago used by the benchmark and the tests.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Point2, Polygon, PolygonMap, Rect};

use super::Pose;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArchipelagoParams {
    pub width: f64,
    pub height: f64,
    /// Total island count, including the two that form the channel.
    pub islands: usize,
    /// Narrowest gap between the two central islands.
    pub channel_width: f64,
    /// Safety margin stored in the map.
    pub margin: f64,
}

impl Default for ArchipelagoParams {
    fn default() -> Self {
        Self {
            width: 5000.0,
            height: 4500.0,
            islands: 9,
            channel_width: 150.0,
            margin: 25.0,
        }
    }
}

/// A map with a start and a goal pose.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub map: PolygonMap,
    pub start: Pose,
    pub goal: Pose,
}

/// Convex island: points on a rotated ellipse at jittered, increasing angles.
fn island(rng: &mut ChaCha8Rng, center: Point2, a: f64, b: f64, vertices: usize) -> Vec<Point2> {
    let rot = rng.random_range(0.0..PI);
    let (s, c) = rot.sin_cos();
    let step = 2.0 * PI / vertices as f64;
    (0..vertices)
        .map(|k| {
            let t = (k as f64 + rng.random_range(-0.3..0.3)) * step;
            let (x, y) = (a * t.cos(), b * t.sin());
            center + Point2::new(c * x - s * y, s * x + c * y)
        })
        .collect()
}

/// Distance between two disjoint convex vertex rings.
fn polygon_gap(a: &[Point2], b: &[Point2]) -> Result<f64> {
    let (pa, pb) = (Polygon::new(a.to_vec())?, Polygon::new(b.to_vec())?);
    let d1 = b.iter().map(|&p| pa.distance(p)).fold(f64::INFINITY, f64::min);
    let d2 = a.iter().map(|&p| pb.distance(p)).fold(f64::INFINITY, f64::min);
    Ok(d1.min(d2))
}

fn translate(poly: &mut [Point2], d: Point2) {
    for p in poly {
        *p = *p + d;
    }
}

/// Start and goal sit near the west and east edges, the goal at mid height
/// and the start lower, so the straight line between them crosses the
/// southern of two large central islands. These leave a channel of
/// `channel_width` at their closest point; the remaining islands are placed
/// at random with at least twice the channel width between any two.
pub fn archipelago(seed: u64, params: &ArchipelagoParams) -> Result<Scenario> {
    if params.islands < 2 {
        return Err(Error::Parameter("an archipelago needs at least 2 islands".into()));
    }
    if !(params.width > 0.0 && params.height > 0.0 && params.channel_width > 0.0) {
        return Err(Error::Parameter("archipelago dimensions must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (params.width, params.height);
    let mid = Point2::new(0.5 * w, 0.5 * h);
    let scale = w.min(h);

    let mut north = island(&mut rng, mid, 0.16 * scale, 0.12 * scale, 18);
    let mut south = island(&mut rng, mid, 0.16 * scale, 0.12 * scale, 18);
    let lowest = north.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let highest = south.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
    translate(&mut north, Point2::new(0.0, mid.y + 0.5 * params.channel_width - lowest));
    translate(&mut south, Point2::new(0.0, mid.y - 0.5 * params.channel_width - highest));
    // Vertical offsets give the gap at equal x; move the pair until the true
    // distance matches. A vertical move of `d` changes the distance by at
    // most `d`, so closing in never makes them overlap.
    for _ in 0..100 {
        let fix = params.channel_width - polygon_gap(&north, &south)?;
        if fix.abs() <= 1e-6 * params.channel_width {
            break;
        }
        translate(&mut north, Point2::new(0.0, 0.5 * fix));
        translate(&mut south, Point2::new(0.0, -0.5 * fix));
    }

    let start = Pose::new(0.06 * w, 0.3 * h, 0.0);
    let goal = Pose::new(0.94 * w, 0.5 * h, 0.0);
    // Bounding circles of placed islands.
    let circle = |v: &[Point2]| {
        let c = v.iter().fold(Point2::new(0.0, 0.0), |a, &p| a + p) * (1.0 / v.len() as f64);
        (c, v.iter().map(|p| p.dist(c)).fold(0.0, f64::max))
    };
    let mut rings = vec![north, south];
    let keep_out = 2.0 * params.channel_width;
    let mut attempts = 0;
    while rings.len() < params.islands && attempts < 10_000 {
        attempts += 1;
        let r = rng.random_range(0.04..0.09) * scale;
        let c = Point2::new(rng.random_range(r..w - r), rng.random_range(r..h - r));
        let clear_of_islands = rings.iter().all(|v| {
            let (cv, rv) = circle(v);
            c.dist(cv) > r + rv + keep_out
        });
        let clear_of_ends = [start.position(), goal.position()]
            .iter()
            .all(|p| p.dist(c) > r + 3.0 * keep_out);
        let inside = c.x - r > keep_out && c.y - r > keep_out && c.x + r < w - keep_out && c.y + r < h - keep_out;
        if clear_of_islands && clear_of_ends && inside {
            let aspect = rng.random_range(0.6..1.0);
            rings.push(island(&mut rng, c, r, aspect * r, 14));
        }
    }
    if rings.len() < params.islands {
        return Err(Error::Parameter(format!(
            "could only place {} of {} islands",
            rings.len(),
            params.islands
        )));
    }
    let obstacles = rings.into_iter().map(Polygon::new).collect::<Result<Vec<_>>>()?;
    let bounds = Rect::new(Point2::new(0.0, 0.0), Point2::new(w, h))?;
    let map = PolygonMap::new(bounds, obstacles, params.margin)?;
    Ok(Scenario { map, start, goal })
}
