//! Smooth obstacle encoding: each obstacle is covered by circles and a node
//! is feasible when it lies outside all of them.

use serde::{Deserialize, Serialize};

use crate::geom::{orient, point_in_polygon, Point2, Polygon, PolygonMap, EPS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Point2,
    pub radius: f64,
}

impl Circle {
    /// `r^2 - |p - c|^2`: negative outside, zero on the circle.
    pub fn constraint_value(&self, p: Point2) -> f64 {
        let d = p - self.center;
        self.radius * self.radius - d.dot(d)
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.dist(self.center) <= self.radius * (1.0 + 1e-12) + 1e-12
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CircleCovering {
    /// One smallest enclosing circle per obstacle.
    Single,
    /// One smallest enclosing circle per piece of a convex decomposition.
    #[default]
    ConvexPieces,
    /// Convex pieces, halved until no circle reaches further than
    /// `max_protrusion` beyond the obstacle edges it covers.
    Refined { max_protrusion: f64 },
}

/// Circles whose union contains every obstacle grown by `padding`.
pub fn obstacle_constraints(map: &PolygonMap, padding: f64, mode: CircleCovering) -> Vec<Circle> {
    let mut out = Vec::new();
    for obs in map.obstacles() {
        let circles = match mode {
            CircleCovering::Single => vec![smallest_enclosing_circle(obs.vertices())],
            CircleCovering::ConvexPieces => convex_pieces(obs)
                .iter()
                .map(|piece| smallest_enclosing_circle(piece))
                .collect(),
            CircleCovering::Refined { max_protrusion } => {
                let mut acc = Vec::new();
                for piece in convex_pieces(obs) {
                    let flagged = flag_boundary_edges(&piece, obs.vertices());
                    split_until_tight(flagged, max_protrusion.max(0.0), MAX_SPLIT_DEPTH, &mut acc);
                }
                acc
            }
        };
        out.extend(circles.into_iter().map(|c| Circle {
            center: c.center,
            radius: c.radius + padding.max(0.0),
        }));
    }
    out
}

const MAX_SPLIT_DEPTH: usize = 10;

/// Piece vertices, each paired with whether the edge leaving it lies on the
/// obstacle boundary.
fn flag_boundary_edges(piece: &[Point2], ring: &[Point2]) -> Vec<(Point2, bool)> {
    let n = ring.len();
    let on_boundary = |a: Point2, b: Point2| (0..n).any(|i| ring[i] == a && ring[(i + 1) % n] == b);
    (0..piece.len())
        .map(|i| (piece[i], on_boundary(piece[i], piece[(i + 1) % piece.len()])))
        .collect()
}

/// How far `c` reaches past the flagged edges of a CCW convex piece.
fn protrusion(c: &Circle, piece: &[(Point2, bool)]) -> f64 {
    let n = piece.len();
    (0..n)
        .filter(|&i| piece[i].1)
        .map(|i| {
            let (a, b) = (piece[i].0, piece[(i + 1) % n].0);
            let inward = (b - a).cross(c.center - a) / a.dist(b);
            c.radius - inward
        })
        .fold(0.0, f64::max)
}

fn split_until_tight(piece: Vec<(Point2, bool)>, tol: f64, depth: usize, out: &mut Vec<Circle>) {
    let pts: Vec<Point2> = piece.iter().map(|v| v.0).collect();
    let c = smallest_enclosing_circle(&pts);
    if depth == 0 || protrusion(&c, &piece) <= tol {
        out.push(c);
        return;
    }
    // Cut across the longer side of the bounding box, through its middle.
    let (lo, hi) = pts.iter().fold(
        (Point2::new(f64::INFINITY, f64::INFINITY), Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY)),
        |(lo, hi), p| (Point2::new(lo.x.min(p.x), lo.y.min(p.y)), Point2::new(hi.x.max(p.x), hi.y.max(p.y))),
    );
    let normal = if hi.x - lo.x >= hi.y - lo.y {
        Point2::new(1.0, 0.0)
    } else {
        Point2::new(0.0, 1.0)
    };
    let offset = normal.dot(lo.lerp(hi, 0.5));
    for side in [1.0, -1.0] {
        let half = clip_half_plane(&piece, normal * side, offset * side);
        if half.len() >= 3 {
            split_until_tight(half, tol, depth - 1, out);
        }
    }
}

/// The part of a convex piece with `normal . p <= offset`; new edges along
/// the cut are unflagged.
fn clip_half_plane(piece: &[(Point2, bool)], normal: Point2, offset: f64) -> Vec<(Point2, bool)> {
    let n = piece.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let (a, flag) = piece[i];
        let b = piece[(i + 1) % n].0;
        let (da, db) = (normal.dot(a) - offset, normal.dot(b) - offset);
        if da <= 0.0 {
            out.push((a, flag));
        }
        if (da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0) {
            let cut = a.lerp(b, da / (da - db));
            // Leaving the kept side starts a cut edge; entering it resumes
            // the original edge.
            out.push((cut, da > 0.0 && flag));
        }
    }
    out
}

/// Welzl's smallest enclosing circle, iterative move-to-front form.
pub fn smallest_enclosing_circle(points: &[Point2]) -> Circle {
    assert!(!points.is_empty(), "enclosing circle of no points");
    let pts = points.to_vec();
    let mut c = Circle {
        center: pts[0],
        radius: 0.0,
    };
    for i in 1..pts.len() {
        if c.contains(pts[i]) {
            continue;
        }
        c = Circle {
            center: pts[i],
            radius: 0.0,
        };
        for j in 0..i {
            if c.contains(pts[j]) {
                continue;
            }
            c = diameter_circle(pts[i], pts[j]);
            for k in 0..j {
                if !c.contains(pts[k]) {
                    c = circum_circle(pts[i], pts[j], pts[k]);
                }
            }
        }
    }
    c
}

fn diameter_circle(a: Point2, b: Point2) -> Circle {
    Circle {
        center: a.lerp(b, 0.5),
        radius: 0.5 * a.dist(b),
    }
}

fn circum_circle(a: Point2, b: Point2, c: Point2) -> Circle {
    let d = 2.0 * orient(a, b, c);
    if d.abs() <= EPS * a.dist(b).max(a.dist(c)).powi(2) {
        // Collinear: the two farthest points span the circle.
        let cands = [diameter_circle(a, b), diameter_circle(a, c), diameter_circle(b, c)];
        return cands.into_iter().max_by(|x, y| x.radius.total_cmp(&y.radius)).unwrap();
    }
    let (b, c) = (b - a, c - a);
    let (bb, cc) = (b.dot(b), c.dot(c));
    let center = Point2::new(c.y * bb - b.y * cc, b.x * cc - c.x * bb) * (1.0 / d);
    Circle {
        center: a + center,
        radius: center.norm(),
    }
}

/// Ear-clipping triangulation followed by greedy merging of neighbouring
/// pieces while the union stays convex.
fn convex_pieces(poly: &Polygon) -> Vec<Vec<Point2>> {
    if poly.is_convex() {
        return vec![poly.vertices().to_vec()];
    }
    let v = poly.vertices();
    let mut pieces: Vec<Vec<usize>> = ear_clip(poly).into_iter().map(|t| t.to_vec()).collect();
    loop {
        let mut merged = false;
        'search: for i in 0..pieces.len() {
            for j in i + 1..pieces.len() {
                if let Some(m) = merge_if_convex(&pieces[i], &pieces[j], v) {
                    pieces[i] = m;
                    pieces.swap_remove(j);
                    merged = true;
                    break 'search;
                }
            }
        }
        if !merged {
            break;
        }
    }
    pieces
        .into_iter()
        .map(|p| p.into_iter().map(|i| v[i]).collect())
        .collect()
}

fn ear_clip(poly: &Polygon) -> Vec<[usize; 3]> {
    let v = poly.vertices();
    let mut idx: Vec<usize> = (0..v.len()).collect();
    let mut tris = Vec::with_capacity(v.len() - 2);
    while idx.len() > 3 {
        let n = idx.len();
        let ear = (0..n).find(|&k| {
            let (a, b, c) = (idx[(k + n - 1) % n], idx[k], idx[(k + 1) % n]);
            if orient(v[a], v[b], v[c]) <= 0.0 {
                return false;
            }
            let tri = Polygon::new(vec![v[a], v[b], v[c]]);
            let Ok(tri) = tri else { return false };
            idx.iter()
                .filter(|&&q| q != a && q != b && q != c)
                .all(|&q| !point_in_polygon(v[q], &tri))
        });
        // A simple polygon always has an ear; fall back to the first corner
        // only if rounding hides it.
        let k = ear.unwrap_or(0);
        let n = idx.len();
        tris.push([idx[(k + n - 1) % n], idx[k], idx[(k + 1) % n]]);
        idx.remove(k);
    }
    tris.push([idx[0], idx[1], idx[2]]);
    tris
}

/// Union of two CCW index cycles sharing one edge, if it is convex.
fn merge_if_convex(p: &[usize], q: &[usize], v: &[Point2]) -> Option<Vec<usize>> {
    let (np, nq) = (p.len(), q.len());
    for i in 0..np {
        let (a, b) = (p[i], p[(i + 1) % np]);
        // The shared edge runs b -> a in q.
        let Some(j) = (0..nq).find(|&j| q[j] == b && q[(j + 1) % nq] == a) else {
            continue;
        };
        let mut m = Vec::with_capacity(np + nq - 2);
        // p from b around to a, then q's vertices strictly between a and b.
        for k in 0..np {
            m.push(p[(i + 1 + k) % np]);
        }
        for k in 2..nq {
            m.push(q[(j + k) % nq]);
        }
        let n = m.len();
        let convex = (0..n).all(|k| orient(v[m[k]], v[m[(k + 1) % n]], v[m[(k + 2) % n]]) >= -EPS);
        return convex.then_some(m);
    }
    None
}
