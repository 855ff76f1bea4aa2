use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Point2, PolygonMap};
use crate::roadmap::PiecewiseLinearPath;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PathElement {
    Line {
        a: Point2,
        b: Point2,
    },
    /// Circular arc starting at `center + radius * (cos, sin)(start_angle)`;
    /// positive `sweep` turns counter-clockwise in the x-y plane.
    Arc {
        center: Point2,
        radius: f64,
        start_angle: f64,
        sweep: f64,
    },
}

impl PathElement {
    pub fn length(&self) -> f64 {
        match *self {
            Self::Line { a, b } => a.dist(b),
            Self::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    pub fn end_angle(&self) -> Option<f64> {
        match *self {
            Self::Arc {
                start_angle, sweep, ..
            } => Some(start_angle + sweep),
            Self::Line { .. } => None,
        }
    }

    /// Position and tangent heading at arc length `s` from the start.
    pub fn eval(&self, s: f64) -> (Point2, f64) {
        match *self {
            Self::Line { a, b } => {
                let len = a.dist(b);
                (a.lerp(b, s / len), (b - a).angle())
            }
            Self::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                let dir = sweep.signum();
                let th = start_angle + dir * s / radius;
                let pos = center + Point2::new(th.cos(), th.sin()) * radius;
                (pos, th + dir * 0.5 * PI)
            }
        }
    }

    pub fn start(&self) -> Point2 {
        self.eval(0.0).0
    }

    pub fn end(&self) -> Point2 {
        match *self {
            Self::Line { b, .. } => b,
            Self::Arc { .. } => self.eval(self.length()).0,
        }
    }
}

/// Lines and fillet arcs forming a tangent-continuous curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricPath {
    elements: Vec<PathElement>,
}

impl GeometricPath {
    pub fn new(elements: Vec<PathElement>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidPath("a geometric path needs at least one element".into()));
        }
        let total: f64 = elements.iter().map(PathElement::length).sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidPath(format!("path length must be positive, got {total}")));
        }
        for (i, w) in elements.windows(2).enumerate() {
            let (p, h0) = w[0].eval(w[0].length());
            let (q, h1) = w[1].eval(0.0);
            let dh = (h1 - h0).sin().atan2((h1 - h0).cos());
            if p.dist(q) > 1e-6 * total.max(1.0) || dh.abs() > 1e-6 {
                return Err(Error::InvalidPath(format!(
                    "elements {i} and {} do not join tangentially",
                    i + 1
                )));
            }
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[PathElement] {
        &self.elements
    }

    pub fn length(&self) -> f64 {
        self.elements.iter().map(PathElement::length).sum()
    }

    /// Position and tangent heading at arc length `s`, clamped to the path.
    pub fn eval(&self, s: f64) -> (Point2, f64) {
        let mut rest = s.max(0.0);
        for e in &self.elements {
            let len = e.length();
            if rest <= len {
                return e.eval(rest);
            }
            rest -= len;
        }
        let last = self.elements.last().unwrap();
        last.eval(last.length())
    }

    /// Points at most `spacing` apart along the path, both ends included.
    pub fn sample(&self, spacing: f64) -> Vec<Point2> {
        let mut pts = vec![self.elements[0].start()];
        for e in &self.elements {
            let len = e.length();
            let n = (len / spacing).ceil().max(1.0) as usize;
            pts.extend((1..=n).map(|k| e.eval(len * k as f64 / n as f64).0));
        }
        pts
    }

    /// Sampled check that every point keeps `clearance` from obstacles and
    /// stays inside the bounds.
    pub fn keeps_clearance(&self, map: &PolygonMap, clearance: f64, spacing: f64) -> bool {
        let b = map.bounds();
        self.sample(spacing)
            .into_iter()
            .all(|p| b.contains(p) && map.obstacles().iter().all(|o| {
                let d = o.distance(p);
                d > 0.0 && d >= clearance
            }))
    }
}

/// Turning angle at `cur` (0 = straight, pi = reversal) and its sign
/// (+1 counter-clockwise).
fn deflection(prev: Point2, cur: Point2, next: Point2) -> (f64, f64) {
    let d1 = cur - prev;
    let d2 = next - cur;
    let ang = d1.cross(d2).atan2(d1.dot(d2));
    (ang.abs(), ang.signum())
}

/// Replaces each interior corner by a tangent circular fillet. The radius is
/// `turn_radius`, reduced where needed so that the tangent points stay in
/// the halves of the two adjacent segments nearest the corner.
pub fn smooth_with_arcs(path: &PiecewiseLinearPath, turn_radius: f64) -> Result<GeometricPath> {
    let n = path.len().saturating_sub(2);
    smooth_with_radii(path, &vec![turn_radius; n])
}

/// Like [`smooth_with_arcs`], but halves the radius at any corner whose fillet
/// comes closer than `clearance` to an obstacle (sampled every `spacing`).
/// After 30 halvings the last radius is kept as is.
pub fn smooth_with_arcs_checked(
    path: &PiecewiseLinearPath,
    turn_radius: f64,
    map: &PolygonMap,
    clearance: f64,
    spacing: f64,
) -> Result<GeometricPath> {
    let wp = path.waypoints();
    let mut radii = vec![turn_radius; wp.len().saturating_sub(2)];
    for (c, radius) in radii.iter_mut().enumerate() {
        let local = PiecewiseLinearPath::new(wp[c..c + 3].to_vec())?;
        for _ in 0..30 {
            let g = smooth_with_radii(&local, &[*radius])?;
            if g
                .elements()
                .iter()
                .filter(|e| matches!(e, PathElement::Arc { .. }))
                .all(|e| GeometricPath { elements: vec![*e] }.keeps_clearance(map, clearance, spacing))
            {
                break;
            }
            *radius *= 0.5;
        }
    }
    smooth_with_radii(path, &radii)
}

fn smooth_with_radii(path: &PiecewiseLinearPath, radii: &[f64]) -> Result<GeometricPath> {
    let wp = path.waypoints();
    if let Some(i) = wp.windows(2).position(|w| w[0].dist(w[1]) < 1e-6) {
        return Err(Error::DegenerateInput(format!(
            "waypoints {i} and {} are closer than 1e-6 m",
            i + 1
        )));
    }
    if let Some(r) = radii.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(Error::Parameter(format!("turn radius must be positive, got {r}")));
    }
    let mut elements = Vec::new();
    let mut cursor = wp[0];
    for c in 1..wp.len() - 1 {
        let (prev, cur, next) = (wp[c - 1], wp[c], wp[c + 1]);
        let (theta, dir) = deflection(prev, cur, next);
        if theta <= 1e-12 {
            continue;
        }
        if PI - theta <= 1e-9 {
            return Err(Error::DegenerateInput(format!(
                "waypoint {c} reverses the path direction"
            )));
        }
        let half = 0.5 * prev.dist(cur).min(cur.dist(next));
        let tan_half = (0.5 * theta).tan();
        let r = radii[c - 1].min(half / tan_half);
        let tangent_len = r * tan_half;
        let u1 = (cur - prev) * (1.0 / prev.dist(cur));
        let u2 = (next - cur) * (1.0 / cur.dist(next));
        let t1 = cur - u1 * tangent_len;
        let normal = if dir > 0.0 { u1.perp() } else { -u1.perp() };
        let center = t1 + normal * r;
        if cursor.dist(t1) > 0.0 {
            elements.push(PathElement::Line { a: cursor, b: t1 });
        }
        elements.push(PathElement::Arc {
            center,
            radius: r,
            start_angle: (t1 - center).angle(),
            sweep: dir * theta,
        });
        cursor = cur + u2 * tangent_len;
    }
    let end = *wp.last().unwrap();
    if cursor.dist(end) > 0.0 {
        elements.push(PathElement::Line { a: cursor, b: end });
    }
    GeometricPath::new(elements)
}
