//! Planar geometry in NED meters: points, simple polygons, the obstacle map
//! and the collision predicates every planning stage relies on.
//!
//! Boundaries are closed: a point on an obstacle edge is inside the obstacle,
//! and a segment that grazes an obstacle is not collision-free.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance of the orientation and on-boundary predicates, in meters.
pub const EPS: f64 = 1e-9;

/// A point (or vector) in the horizontal NED plane: `x` North, `y` East.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn dist(self, o: Point2) -> f64 {
        (self - o).norm()
    }

    pub fn lerp(self, o: Point2, t: f64) -> Point2 {
        self + (o - self) * t
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Counter-clockwise perpendicular.
    pub fn perp(self) -> Point2 {
        Point2::new(-self.y, self.x)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// Signed area of the parallelogram spanned by `b - a` and `c - a`;
/// positive when `a, b, c` turn counter-clockwise.
pub fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

fn orient_sign(a: Point2, b: Point2, c: Point2) -> i8 {
    let o = orient(a, b, c);
    if o > EPS {
        1
    } else if o < -EPS {
        -1
    } else {
        0
    }
}

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Point2,
    pub max: Point2,
}

impl Rect {
    pub fn new(min: Point2, max: Point2) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) {
            return Err(Error::MalformedInput("non-finite bounds".into()));
        }
        if !(min.x < max.x && min.y < max.y) {
            return Err(Error::MalformedInput(format!(
                "bounds must satisfy min < max, got ({}, {})..({}, {})",
                min.x, min.y, max.x, max.y
            )));
        }
        Ok(Self { min, max })
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.min.x - EPS
            && p.x <= self.max.x + EPS
            && p.y >= self.min.y - EPS
            && p.y <= self.max.y + EPS
    }

    pub fn clamp(&self, p: Point2) -> Point2 {
        Point2::new(
            p.x.clamp(self.min.x, self.max.x),
            p.y.clamp(self.min.y, self.max.y),
        )
    }

    fn overlaps(&self, o: &Rect, pad: f64) -> bool {
        self.min.x - pad <= o.max.x
            && o.min.x <= self.max.x + pad
            && self.min.y - pad <= o.max.y
            && o.min.y <= self.max.y + pad
    }

    /// The rectangle as a counter-clockwise polygon.
    pub fn to_polygon(&self) -> Polygon {
        Polygon::new(vec![
            self.min,
            Point2::new(self.max.x, self.min.y),
            self.max,
            Point2::new(self.min.x, self.max.y),
        ])
        .expect("a valid rectangle is a valid polygon")
    }

    /// Clips segment `a -> b` to the rectangle (Liang-Barsky). Returns the
    /// parameters `(t0, t1)` of the visible part, if any.
    pub fn clip_segment(&self, a: Point2, b: Point2) -> Option<(f64, f64)> {
        let d = b - a;
        let mut t0 = 0.0_f64;
        let mut t1 = 1.0_f64;
        let checks = [
            (-d.x, a.x - self.min.x),
            (d.x, self.max.x - a.x),
            (-d.y, a.y - self.min.y),
            (d.y, self.max.y - a.y),
        ];
        for (p, q) in checks {
            if p == 0.0 {
                if q < 0.0 {
                    return None;
                }
            } else {
                let r = q / p;
                if p < 0.0 {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
                if t0 > t1 {
                    return None;
                }
            }
        }
        Some((t0, t1))
    }
}

/// A simple polygon with counter-clockwise vertex order. The closing edge
/// from the last vertex back to the first is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point2>,
    bbox: Rect,
}

impl Polygon {
    /// Validates and canonicalizes a vertex ring: at least three finite
    /// vertices, non-zero area, no self-intersection. Clockwise input is
    /// reversed.
    pub fn new(mut vertices: Vec<Point2>) -> Result<Self> {
        if vertices.len() >= 2 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(Error::MalformedInput(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if let Some(i) = vertices.iter().position(|v| !v.is_finite()) {
            return Err(Error::MalformedInput(format!("vertex {i} is not finite")));
        }
        let area = signed_area(&vertices);
        if area.abs() <= EPS {
            return Err(Error::MalformedInput("polygon has zero area".into()));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        let n = vertices.len();
        for i in 0..n {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            if a.dist(b) <= EPS {
                return Err(Error::MalformedInput(format!(
                    "vertices {i} and {} coincide",
                    (i + 1) % n
                )));
            }
            for j in i + 1..n {
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (c, d) = (vertices[j], vertices[(j + 1) % n]);
                if segments_intersect(a, b, c, d) {
                    return Err(Error::MalformedInput(format!(
                        "polygon edges {i} and {j} intersect"
                    )));
                }
            }
        }
        let bbox = bbox_of(&vertices);
        Ok(Self { vertices, bbox })
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn bbox(&self) -> Rect {
        self.bbox
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.dist(b)).sum()
    }

    pub fn centroid(&self) -> Point2 {
        let mut c = Point2::default();
        let mut a2 = 0.0;
        for (p, q) in self.edges() {
            let w = p.cross(q);
            a2 += w;
            c = c + (p + q) * w;
        }
        c * (1.0 / (3.0 * a2))
    }

    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            orient(
                self.vertices[i],
                self.vertices[(i + 1) % n],
                self.vertices[(i + 2) % n],
            ) >= -EPS
        })
    }

    /// Distance from `p` to the polygon boundary.
    pub fn boundary_distance(&self, p: Point2) -> f64 {
        self.edges()
            .map(|(a, b)| distance_point_segment(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance from `p` to the closed polygon region (0 inside).
    pub fn distance(&self, p: Point2) -> f64 {
        if point_in_polygon(p, self) {
            0.0
        } else {
            self.boundary_distance(p)
        }
    }

    /// Distance from segment `a b` to the closed polygon region.
    pub fn segment_distance(&self, a: Point2, b: Point2) -> f64 {
        if point_in_polygon(a, self) || point_in_polygon(b, self) {
            return 0.0;
        }
        let mut d = f64::INFINITY;
        for (c, e) in self.edges() {
            if segments_intersect(a, b, c, e) {
                return 0.0;
            }
            d = d
                .min(distance_point_segment(c, a, b))
                .min(distance_point_segment(a, c, e))
                .min(distance_point_segment(b, c, e));
        }
        d
    }
}

fn signed_area(v: &[Point2]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>()
}

fn bbox_of(v: &[Point2]) -> Rect {
    let mut min = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut max = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in v {
        min.x = min.x.min(p.x);
        min.y = min.y.min(p.y);
        max.x = max.x.max(p.x);
        max.y = max.y.max(p.y);
    }
    Rect { min, max }
}

/// Whether the closed segments `ab` and `cd` share a point.
pub fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let o1 = orient_sign(a, b, c);
    let o2 = orient_sign(a, b, d);
    let o3 = orient_sign(c, d, a);
    let o4 = orient_sign(c, d, b);
    if o1 * o2 < 0 && o3 * o4 < 0 {
        return true;
    }
    (o1 == 0 && on_segment(c, a, b))
        || (o2 == 0 && on_segment(d, a, b))
        || (o3 == 0 && on_segment(a, c, d))
        || (o4 == 0 && on_segment(b, c, d))
}

// `p` collinear with `ab`: is it within the segment's extent?
fn on_segment(p: Point2, a: Point2, b: Point2) -> bool {
    p.x >= a.x.min(b.x) - EPS
        && p.x <= a.x.max(b.x) + EPS
        && p.y >= a.y.min(b.y) - EPS
        && p.y <= a.y.max(b.y) + EPS
}

/// Euclidean distance from `p` to the closed segment `ab`.
pub fn distance_point_segment(p: Point2, a: Point2, b: Point2) -> f64 {
    let d = b - a;
    let len_sq = d.norm_sq();
    if len_sq == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(d) / len_sq).clamp(0.0, 1.0);
    p.dist(a + d * t)
}

/// Inside-or-on-boundary test (crossing number, boundary inclusive).
pub fn point_in_polygon(p: Point2, poly: &Polygon) -> bool {
    let bb = poly.bbox();
    if !bb.overlaps(&Rect { min: p, max: p }, EPS) {
        return false;
    }
    let v = poly.vertices();
    let n = v.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (v[j], v[i]);
        if distance_point_segment(p, a, b) <= EPS {
            return true;
        }
        if (b.y > p.y) != (a.y > p.y) {
            let x = b.x + (p.y - b.y) * (a.x - b.x) / (a.y - b.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Points along the polygon perimeter, starting at vertex 0 and following
/// the vertex order, with every arc-length gap at most `spacing`. Each edge
/// is split into the fewest equal parts that satisfy the bound; all vertices
/// are kept.
pub fn boundary_samples(poly: &Polygon, spacing: f64) -> Result<Vec<Point2>> {
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::Parameter(format!(
            "boundary sample spacing must be positive, got {spacing}"
        )));
    }
    let mut out = Vec::new();
    for (a, b) in poly.edges() {
        let parts = ((a.dist(b) / spacing) - 1e-9).ceil().max(1.0) as usize;
        out.push(a);
        for k in 1..parts {
            out.push(a.lerp(b, k as f64 / parts as f64));
        }
    }
    Ok(out)
}

/// The planning world: a rectangular workspace with polygonal obstacles and
/// a clearance every collision check must respect.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonMap {
    bounds: Rect,
    obstacles: Vec<Polygon>,
    safety_margin: f64,
}

impl PolygonMap {
    pub fn new(bounds: Rect, obstacles: Vec<Polygon>, safety_margin: f64) -> Result<Self> {
        if !(safety_margin >= 0.0) || !safety_margin.is_finite() {
            return Err(Error::Parameter(format!(
                "safety margin must be finite and >= 0, got {safety_margin}"
            )));
        }
        for (k, obs) in obstacles.iter().enumerate() {
            if let Some(i) = obs.vertices().iter().position(|&v| !bounds.contains(v)) {
                let v = obs.vertices()[i];
                return Err(Error::MalformedInput(format!(
                    "obstacle {k} vertex {i} ({}, {}) lies outside the bounds",
                    v.x, v.y
                )));
            }
        }
        for i in 0..obstacles.len() {
            for j in i + 1..obstacles.len() {
                if polygons_overlap(&obstacles[i], &obstacles[j]) {
                    return Err(Error::MalformedInput(format!(
                        "obstacles {i} and {j} overlap"
                    )));
                }
            }
        }
        Ok(Self {
            bounds,
            obstacles,
            safety_margin,
        })
    }

    pub fn empty(bounds: Rect) -> Self {
        Self {
            bounds,
            obstacles: Vec::new(),
            safety_margin: 0.0,
        }
    }

    pub fn bounds(&self) -> Rect {
        self.bounds
    }

    pub fn obstacles(&self) -> &[Polygon] {
        &self.obstacles
    }

    pub fn safety_margin(&self) -> f64 {
        self.safety_margin
    }

    pub fn with_safety_margin(mut self, margin: f64) -> Result<Self> {
        if !(margin >= 0.0) || !margin.is_finite() {
            return Err(Error::Parameter(format!(
                "safety margin must be finite and >= 0, got {margin}"
            )));
        }
        self.safety_margin = margin;
        Ok(self)
    }

    /// Whether `p` is at least `safety_margin` away from every obstacle and
    /// not on or inside one. Points outside the bounds are never free.
    pub fn point_free(&self, p: Point2) -> bool {
        if !self.bounds.contains(p) {
            return false;
        }
        let m = self.safety_margin;
        self.obstacles.iter().all(|obs| {
            if !obs.bbox().overlaps(&Rect { min: p, max: p }, m + EPS) {
                return true;
            }
            let d = obs.distance(p);
            d > EPS && d >= m
        })
    }

    /// Smallest distance from `p` to any obstacle region.
    pub fn clearance(&self, p: Point2) -> f64 {
        self.obstacles
            .iter()
            .map(|o| o.distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Whether segment `ab` stays at least `safety_margin` away from every
    /// obstacle and touches none.
    pub fn segment_collision_free(&self, a: Point2, b: Point2) -> Result<bool> {
        for p in [a, b] {
            if !self.bounds.contains(p) {
                return Err(Error::OutOfBounds { x: p.x, y: p.y });
            }
        }
        Ok(self.segment_free_unchecked(a, b))
    }

    pub(crate) fn segment_free_unchecked(&self, a: Point2, b: Point2) -> bool {
        let m = self.safety_margin;
        let seg_box = Rect {
            min: Point2::new(a.x.min(b.x), a.y.min(b.y)),
            max: Point2::new(a.x.max(b.x), a.y.max(b.y)),
        };
        self.obstacles.iter().all(|obs| {
            if !obs.bbox().overlaps(&seg_box, m + EPS) {
                return true;
            }
            let d = obs.segment_distance(a, b);
            d > EPS && d >= m
        })
    }
}

fn polygons_overlap(p: &Polygon, q: &Polygon) -> bool {
    if !p.bbox().overlaps(&q.bbox(), EPS) {
        return false;
    }
    for (a, b) in p.edges() {
        for (c, d) in q.edges() {
            if segments_intersect(a, b, c, d) {
                return true;
            }
        }
    }
    point_in_polygon(p.vertices()[0], q) || point_in_polygon(q.vertices()[0], p)
}
