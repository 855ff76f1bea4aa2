//! Voronoi diagram as the dual of the Delaunay triangulation, clipped to a
//! rectangle.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::geom::{orient, Point2, Rect};

use super::delaunay::{circumcenter, Triangulation, NONE};

/// A Voronoi diagram restricted to a rectangle.
#[derive(Debug, Clone)]
pub struct RawVoronoi {
    pub vertices: Vec<Point2>,
    /// Undirected edges, each stored once with `a < b`.
    pub edges: Vec<(usize, usize)>,
    /// `true` for circumcenters of Delaunay triangles, `false` for points
    /// created where an edge or ray crosses the rectangle.
    pub is_circumcenter: Vec<bool>,
}

/// Voronoi vertices and edges of `generators`, clipped to `bounds`.
/// Vertices closer than `1e-9` times the bounds diagonal are merged.
pub fn voronoi_of_points(generators: &[Point2], bounds: Rect) -> Result<RawVoronoi> {
    voronoi_diagram(generators, bounds, 1e-9 * bounds.diagonal())
}

pub(crate) fn voronoi_diagram(
    generators: &[Point2],
    bounds: Rect,
    merge_tol: f64,
) -> Result<RawVoronoi> {
    if generators.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "a Voronoi diagram needs at least 3 generators, got {}",
            generators.len()
        )));
    }
    if let Some(p) = generators.iter().find(|p| !bounds.contains(**p)) {
        return Err(Error::OutOfBounds { x: p.x, y: p.y });
    }
    if all_collinear(generators) {
        return Err(Error::DegenerateInput(
            "all Voronoi generators are collinear".into(),
        ));
    }

    let tri = Triangulation::new(generators);
    let mut builder = Builder::new(bounds, merge_tol);

    let mut center = vec![None; tri.triangles.len()];
    for (k, t) in tri.alive() {
        if tri.is_real(t) {
            let [a, b, c] = t.v.map(|v| tri.points[v]);
            center[k] = Some(circumcenter(a, b, c));
        }
    }

    let far = 4.0 * bounds.diagonal();
    for (k, t) in tri.alive() {
        let Some(ck) = center[k] else { continue };
        for i in 0..3 {
            let nb = t.n[i];
            let neighbour_center = if nb == NONE { None } else { center[nb] };
            match neighbour_center {
                Some(cn) => {
                    // Each interior edge is seen from both sides; emit once.
                    if k < nb {
                        builder.add_segment(ck, cn, true, true);
                    }
                }
                None => {
                    // Hull edge: ray from the circumcenter along the outward normal.
                    let a = tri.points[t.v[(i + 1) % 3]];
                    let b = tri.points[t.v[(i + 2) % 3]];
                    let e = b - a;
                    let normal = Point2::new(e.y, -e.x) * (1.0 / e.norm());
                    builder.add_segment(ck, ck + normal * (far + ck.dist(bounds.min)), true, false);
                }
            }
        }
    }
    Ok(builder.finish())
}

fn all_collinear(points: &[Point2]) -> bool {
    let a = points[0];
    let Some(&b) = points.iter().max_by(|p, q| a.dist(**p).total_cmp(&a.dist(**q))) else {
        return true;
    };
    let scale = a.dist(b);
    if scale == 0.0 {
        return true;
    }
    points
        .iter()
        .all(|&p| orient(a, b, p).abs() <= 1e-12 * scale * scale)
}

struct Builder {
    bounds: Rect,
    tol: f64,
    vertices: Vec<Point2>,
    is_circumcenter: Vec<bool>,
    grid: HashMap<(i64, i64), Vec<usize>>,
    edges: BTreeSet<(usize, usize)>,
}

impl Builder {
    fn new(bounds: Rect, tol: f64) -> Self {
        Self {
            bounds,
            tol: tol.max(f64::MIN_POSITIVE),
            vertices: Vec::new(),
            is_circumcenter: Vec::new(),
            grid: HashMap::new(),
            edges: BTreeSet::new(),
        }
    }

    fn cell(&self, p: Point2) -> (i64, i64) {
        ((p.x / self.tol).floor() as i64, (p.y / self.tol).floor() as i64)
    }

    fn vertex(&mut self, p: Point2, circum: bool) -> usize {
        let (cx, cy) = self.cell(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.grid.get(&(cx + dx, cy + dy)) {
                    if let Some(&id) = ids.iter().find(|&&id| self.vertices[id].dist(p) <= self.tol) {
                        self.is_circumcenter[id] |= circum;
                        return id;
                    }
                }
            }
        }
        let id = self.vertices.len();
        self.vertices.push(p);
        self.is_circumcenter.push(circum);
        self.grid.entry((cx, cy)).or_default().push(id);
        id
    }

    /// Adds the part of segment `a b` inside the bounds. `a_real`/`b_real`
    /// mark endpoints that are circumcenters (as opposed to ray tips).
    fn add_segment(&mut self, a: Point2, b: Point2, a_real: bool, b_real: bool) {
        let Some((t0, t1)) = self.bounds.clip_segment(a, b) else {
            return;
        };
        let (p, p_circ) = if t0 > 0.0 {
            (self.bounds.clamp(a.lerp(b, t0)), false)
        } else {
            (a, a_real)
        };
        let (q, q_circ) = if t1 < 1.0 {
            (self.bounds.clamp(a.lerp(b, t1)), false)
        } else {
            (b, b_real)
        };
        let i = self.vertex(p, p_circ);
        let j = self.vertex(q, q_circ);
        if i != j {
            self.edges.insert((i.min(j), i.max(j)));
        }
    }

    fn finish(self) -> RawVoronoi {
        RawVoronoi {
            vertices: self.vertices,
            edges: self.edges.into_iter().collect(),
            is_circumcenter: self.is_circumcenter,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn rect(lo: f64, hi: f64) -> Rect {
        Rect::new(Point2::new(lo, lo), Point2::new(hi, hi)).unwrap()
    }

    #[test]
    fn square_corners_give_single_center_vertex() {
        let gens = [
            Point2::new(-1.0, -1.0),
            Point2::new(1.0, -1.0),
            Point2::new(1.0, 1.0),
            Point2::new(-1.0, 1.0),
        ];
        let vor = voronoi_of_points(&gens, rect(-10.0, 10.0)).unwrap();
        let centers: Vec<Point2> = vor
            .vertices
            .iter()
            .zip(&vor.is_circumcenter)
            .filter(|(_, c)| **c)
            .map(|(p, _)| *p)
            .collect();
        assert_eq!(centers.len(), 1);
        assert!(centers[0].norm() < 1e-12);
        // Four rays reach the bounds.
        assert_eq!(vor.vertices.len(), 5);
        assert_eq!(vor.edges.len(), 4);
    }

    #[test]
    fn too_few_or_collinear_generators_are_degenerate() {
        let two = [Point2::new(-1.0, 0.0), Point2::new(1.0, 0.0)];
        assert!(matches!(
            voronoi_of_points(&two, rect(-5.0, 5.0)),
            Err(Error::DegenerateInput(_))
        ));
        let line = [
            Point2::new(-1.0, 0.0),
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
        ];
        assert!(matches!(
            voronoi_of_points(&line, rect(-5.0, 5.0)),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn vertices_are_equidistant_to_three_nearest_generators() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let gens: Vec<Point2> = (0..200)
            .map(|_| Point2::new(rng.random_range(0.0..1000.0), rng.random_range(0.0..1000.0)))
            .collect();
        let vor = voronoi_of_points(&gens, rect(0.0, 1000.0)).unwrap();
        let mut checked = 0;
        for (v, &circ) in vor.vertices.iter().zip(&vor.is_circumcenter) {
            if !circ {
                continue;
            }
            // Nearest-neighbour oracle by brute force.
            let mut d: Vec<f64> = gens.iter().map(|g| g.dist(*v)).collect();
            d.sort_by(f64::total_cmp);
            assert!(d[2] - d[0] <= 1e-6, "vertex {v:?}: {:?}", &d[..3]);
            checked += 1;
        }
        assert!(checked > 300);
        for &(a, b) in &vor.edges {
            assert!(a < b && b < vor.vertices.len());
        }
    }
}
