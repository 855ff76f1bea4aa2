//! Incremental Delaunay triangulation (Bowyer-Watson) over a bounding super
//! triangle, with neighbour links so point location can walk instead of scan.

use crate::geom::{orient, Point2};

pub(crate) const NONE: usize = usize::MAX;

#[derive(Debug, Clone)]
pub(crate) struct Triangle {
    /// Counter-clockwise vertex indices.
    pub v: [usize; 3],
    /// `n[i]` is the triangle across the edge opposite `v[i]`.
    pub n: [usize; 3],
    pub alive: bool,
}

#[derive(Debug)]
pub(crate) struct Triangulation {
    pub points: Vec<Point2>,
    pub triangles: Vec<Triangle>,
    /// Number of real input points; indices `>= n_real` are super vertices.
    pub n_real: usize,
    last: usize,
}

/// > 0 when `d` is strictly inside the circumcircle of counter-clockwise `a, b, c`.
pub(crate) fn in_circle(a: Point2, b: Point2, c: Point2, d: Point2) -> f64 {
    let (ax, ay) = (a.x - d.x, a.y - d.y);
    let (bx, by) = (b.x - d.x, b.y - d.y);
    let (cx, cy) = (c.x - d.x, c.y - d.y);
    let a2 = ax * ax + ay * ay;
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    ax * (by * c2 - b2 * cy) - ay * (bx * c2 - b2 * cx) + a2 * (bx * cy - by * cx)
}

pub(crate) fn circumcenter(a: Point2, b: Point2, c: Point2) -> Point2 {
    let (bx, by) = (b.x - a.x, b.y - a.y);
    let (cx, cy) = (c.x - a.x, c.y - a.y);
    let d = 2.0 * (bx * cy - by * cx);
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    Point2::new(
        a.x + (cy * b2 - by * c2) / d,
        a.y + (bx * c2 - cx * b2) / d,
    )
}

impl Triangulation {
    /// Triangulates `points`. Exact duplicates are skipped; the caller is
    /// responsible for rejecting fully collinear input.
    pub fn new(points: &[Point2]) -> Self {
        let n_real = points.len();
        let (mut lo, mut hi) = (points[0], points[0]);
        for p in points {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let center = (lo + hi) * 0.5;
        let span = (hi.x - lo.x).max(hi.y - lo.y).max(1.0);
        let big = 100.0 * span;
        let mut pts = points.to_vec();
        pts.push(center + Point2::new(-big, -big));
        pts.push(center + Point2::new(big, -big));
        pts.push(center + Point2::new(0.0, big));
        let mut tri = Self {
            points: pts,
            triangles: vec![Triangle {
                v: [n_real, n_real + 1, n_real + 2],
                n: [NONE; 3],
                alive: true,
            }],
            n_real,
            last: 0,
        };
        for i in 0..n_real {
            tri.insert(i);
        }
        tri
    }

    pub fn is_super(&self, v: usize) -> bool {
        v >= self.n_real
    }

    fn contains(&self, t: usize, p: Point2) -> Option<usize> {
        let tr = &self.triangles[t];
        for i in 0..3 {
            let a = self.points[tr.v[(i + 1) % 3]];
            let b = self.points[tr.v[(i + 2) % 3]];
            if orient(a, b, p) < 0.0 {
                return Some(i);
            }
        }
        None
    }

    fn locate(&self, p: Point2) -> usize {
        let mut t = if self.triangles[self.last].alive {
            self.last
        } else {
            self.triangles.iter().rposition(|t| t.alive).unwrap()
        };
        let limit = 4 * self.triangles.len() + 16;
        for _ in 0..limit {
            match self.contains(t, p) {
                None => return t,
                Some(i) => {
                    let next = self.triangles[t].n[i];
                    if next == NONE {
                        break;
                    }
                    t = next;
                }
            }
        }
        // Walk failed to terminate (near-degenerate orientation); scan.
        self.triangles
            .iter()
            .enumerate()
            .filter(|(_, tr)| tr.alive)
            .find(|(k, _)| self.contains(*k, p).is_none())
            .map(|(k, _)| k)
            .unwrap_or(t)
    }

    fn insert(&mut self, pi: usize) {
        let p = self.points[pi];
        let start = self.locate(p);
        if self.triangles[start]
            .v
            .iter()
            .any(|&v| self.points[v] == p)
        {
            return;
        }

        let mut in_cavity = vec![start];
        let mut stack = vec![start];
        let mut marked = std::collections::HashSet::from([start]);
        while let Some(t) = stack.pop() {
            for &nb in &self.triangles[t].n {
                if nb == NONE || marked.contains(&nb) {
                    continue;
                }
                let [a, b, c] = self.triangles[nb].v.map(|v| self.points[v]);
                if in_circle(a, b, c, p) > 0.0 {
                    marked.insert(nb);
                    in_cavity.push(nb);
                    stack.push(nb);
                }
            }
        }

        // Boundary edges (a, b, outer neighbour), counter-clockwise around the cavity.
        let mut boundary = Vec::new();
        for &t in &in_cavity {
            let tr = &self.triangles[t];
            for i in 0..3 {
                let nb = tr.n[i];
                if nb == NONE || !marked.contains(&nb) {
                    boundary.push((tr.v[(i + 1) % 3], tr.v[(i + 2) % 3], nb, t));
                }
            }
        }

        let first_new = self.triangles.len();
        let mut by_start = std::collections::HashMap::with_capacity(boundary.len());
        let mut by_end = std::collections::HashMap::with_capacity(boundary.len());
        for (k, &(a, b, nb, old)) in boundary.iter().enumerate() {
            let id = first_new + k;
            self.triangles.push(Triangle {
                v: [a, b, pi],
                n: [NONE, NONE, nb],
                alive: true,
            });
            by_start.insert(a, id);
            by_end.insert(b, id);
            if nb != NONE {
                let outer = &mut self.triangles[nb];
                for slot in outer.n.iter_mut() {
                    if *slot == old {
                        *slot = id;
                    }
                }
            }
        }
        for k in 0..boundary.len() {
            let id = first_new + k;
            let [a, b, _] = self.triangles[id].v;
            // Edge (b, p) is shared with the triangle starting at b; edge (p, a)
            // with the triangle ending at a.
            self.triangles[id].n[0] = by_start.get(&b).copied().unwrap_or(NONE);
            self.triangles[id].n[1] = by_end.get(&a).copied().unwrap_or(NONE);
        }
        for t in in_cavity {
            self.triangles[t].alive = false;
        }
        self.last = first_new;
    }

    pub fn alive(&self) -> impl Iterator<Item = (usize, &Triangle)> {
        self.triangles.iter().enumerate().filter(|(_, t)| t.alive)
    }

    pub fn is_real(&self, t: &Triangle) -> bool {
        t.v.iter().all(|&v| !self.is_super(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn every_real_triangle_has_an_empty_circumcircle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Point2> = (0..300)
            .map(|_| Point2::new(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0)))
            .collect();
        let tri = Triangulation::new(&pts);
        let mut count = 0;
        for (_, t) in tri.alive() {
            if !tri.is_real(t) {
                continue;
            }
            count += 1;
            let [a, b, c] = t.v.map(|v| tri.points[v]);
            assert!(orient(a, b, c) > 0.0);
            for (i, &p) in pts.iter().enumerate() {
                if t.v.contains(&i) {
                    continue;
                }
                assert!(in_circle(a, b, c, p) <= 1e-6, "point {i} inside");
            }
        }
        // Euler: 2n - 2 - h triangles for n points with h on the hull.
        assert!(count > 500 && count <= 2 * 300 - 5);
    }

    #[test]
    fn neighbour_links_are_mutual() {
        let pts: Vec<Point2> = (0..50)
            .map(|i| {
                let t = i as f64 * 0.7;
                Point2::new(t.cos() * (1.0 + i as f64), t.sin() * (1.0 + i as f64))
            })
            .collect();
        let tri = Triangulation::new(&pts);
        for (k, t) in tri.alive() {
            for &nb in &t.n {
                if nb != NONE {
                    assert!(tri.triangles[nb].alive);
                    assert!(tri.triangles[nb].n.contains(&k));
                }
            }
        }
    }
}
