//! Step 1: discretize the free space into a searchable graph, either a
//! uniform 8-connected grid or a Voronoi roadmap seeded from obstacle
//! boundaries, and find the shortest piecewise-linear path with A*.

mod astar;
mod delaunay;
mod voronoi;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{boundary_samples, Point2, PolygonMap};

pub use astar::{astar, SearchResult};
pub use voronoi::{voronoi_of_points, RawVoronoi};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoadmapKind {
    UniformGrid,
    Voronoi,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub length: f64,
}

/// Undirected roadmap. Each edge is stored once and traversed both ways.
#[derive(Debug, Clone)]
pub struct RoadmapGraph {
    nodes: Vec<Point2>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, f64)>>,
    kind: RoadmapKind,
    spacing: f64,
}

impl RoadmapGraph {
    /// Builds a graph from nodes and index pairs; lengths are computed from
    /// the node positions. Self-loops and duplicate edges are dropped.
    pub fn from_parts(
        nodes: Vec<Point2>,
        pairs: impl IntoIterator<Item = (usize, usize)>,
        kind: RoadmapKind,
        spacing: f64,
    ) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        let mut edges = Vec::new();
        for (a, b) in pairs {
            if a >= nodes.len() || b >= nodes.len() {
                return Err(Error::MalformedInput(format!(
                    "edge ({a}, {b}) references a node outside 0..{}",
                    nodes.len()
                )));
            }
            if a == b || !seen.insert((a.min(b), a.max(b))) {
                continue;
            }
            edges.push(Edge {
                a,
                b,
                length: nodes[a].dist(nodes[b]),
            });
        }
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for e in &edges {
            adjacency[e.a].push((e.b, e.length));
            adjacency[e.b].push((e.a, e.length));
        }
        Ok(Self {
            nodes,
            edges,
            adjacency,
            kind,
            spacing,
        })
    }

    pub fn nodes(&self) -> &[Point2] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbours(&self, node: usize) -> &[(usize, f64)] {
        &self.adjacency[node]
    }

    pub fn kind(&self) -> RoadmapKind {
        self.kind
    }

    /// The `delta_d` the graph was built with.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Size of the connected component containing `node`.
    pub fn component_size(&self, node: usize) -> usize {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![node];
        seen[node] = true;
        let mut count = 0;
        while let Some(n) = stack.pop() {
            count += 1;
            for &(m, _) in &self.adjacency[n] {
                if !seen[m] {
                    seen[m] = true;
                    stack.push(m);
                }
            }
        }
        count
    }
}

/// Ordered waypoints; at least two, no two consecutive ones equal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinearPath {
    waypoints: Vec<Point2>,
}

impl PiecewiseLinearPath {
    pub fn new(waypoints: Vec<Point2>) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(Error::InvalidPath(format!(
                "a path needs at least 2 waypoints, got {}",
                waypoints.len()
            )));
        }
        if let Some(i) = waypoints.windows(2).position(|w| w[0] == w[1]) {
            return Err(Error::InvalidPath(format!(
                "waypoints {i} and {} coincide",
                i + 1
            )));
        }
        Ok(Self { waypoints })
    }

    pub fn waypoints(&self) -> &[Point2] {
        &self.waypoints
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| w[0].dist(w[1])).sum()
    }

    pub fn start(&self) -> Point2 {
        self.waypoints[0]
    }

    pub fn end(&self) -> Point2 {
        *self.waypoints.last().unwrap()
    }

    /// Whether every segment passes the map's collision check.
    pub fn is_collision_free(&self, map: &PolygonMap) -> bool {
        self.waypoints
            .windows(2)
            .all(|w| map.segment_collision_free(w[0], w[1]).unwrap_or(false))
    }
}

/// Grid nodes every `delta_d` across the bounds, colliding nodes removed,
/// 8-connected with collision-free edges.
pub fn build_uniform_grid(map: &PolygonMap, delta_d: f64) -> Result<RoadmapGraph> {
    let b = map.bounds();
    if !(delta_d > 0.0) || !delta_d.is_finite() {
        return Err(Error::Parameter(format!(
            "grid spacing must be positive, got {delta_d}"
        )));
    }
    if delta_d > b.width() || delta_d > b.height() {
        return Err(Error::Parameter(format!(
            "grid spacing {delta_d} exceeds the map size {} x {}",
            b.width(),
            b.height()
        )));
    }
    let nx = (b.width() / delta_d + 1e-9).floor() as usize + 1;
    let ny = (b.height() / delta_d + 1e-9).floor() as usize + 1;
    let mut index = vec![usize::MAX; nx * ny];
    let mut nodes = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            let p = Point2::new(b.min.x + i as f64 * delta_d, b.min.y + j as f64 * delta_d);
            if map.point_free(p) {
                index[i * ny + j] = nodes.len();
                nodes.push(p);
            }
        }
    }
    let mut pairs = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            let a = index[i * ny + j];
            if a == usize::MAX {
                continue;
            }
            let neighbours = [(1, 0), (0, 1), (1, 1), (1, -1)];
            for (di, dj) in neighbours {
                let (ni, nj) = (i as i64 + di, j as i64 + dj);
                if ni < 0 || nj < 0 || ni >= nx as i64 || nj >= ny as i64 {
                    continue;
                }
                let c = index[ni as usize * ny + nj as usize];
                if c != usize::MAX && map.segment_free_unchecked(nodes[a], nodes[c]) {
                    pairs.push((a, c));
                }
            }
        }
    }
    RoadmapGraph::from_parts(nodes, pairs, RoadmapKind::UniformGrid, delta_d)
}

/// Voronoi generators for a map: obstacle and map-edge boundary samples at
/// spacing `delta_d`.
pub fn voronoi_generators(map: &PolygonMap, delta_d: f64) -> Result<Vec<Point2>> {
    let mut gens = Vec::new();
    for obs in map.obstacles() {
        gens.extend(boundary_samples(obs, delta_d)?);
    }
    gens.extend(boundary_samples(&map.bounds().to_polygon(), delta_d)?);
    Ok(gens)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn unit_from_bits(bits: u64) -> f64 {
    (bits >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

/// Deterministic per-index perturbation of size `1e-7 * delta_d`, reflected
/// back into the bounds.
fn jitter(points: &mut [Point2], delta_d: f64, map: &PolygonMap) {
    let b = map.bounds();
    let amp = 1e-7 * delta_d;
    for (i, p) in points.iter_mut().enumerate() {
        let h = splitmix64(i as u64);
        let mut q = *p + Point2::new(unit_from_bits(h), unit_from_bits(splitmix64(h))) * amp;
        if q.x < b.min.x {
            q.x = 2.0 * b.min.x - q.x;
        }
        if q.x > b.max.x {
            q.x = 2.0 * b.max.x - q.x;
        }
        if q.y < b.min.y {
            q.y = 2.0 * b.min.y - q.y;
        }
        if q.y > b.max.y {
            q.y = 2.0 * b.max.y - q.y;
        }
        *p = q;
    }
}

/// Voronoi roadmap: diagram of the boundary generators with colliding
/// vertices and edges removed. Vertices closer than `1e-3 * delta_d` are
/// merged.
pub fn build_voronoi_roadmap(map: &PolygonMap, delta_d: f64) -> Result<RoadmapGraph> {
    if !(delta_d > 0.0) || !delta_d.is_finite() {
        return Err(Error::Parameter(format!(
            "generator spacing must be positive, got {delta_d}"
        )));
    }
    let mut gens = voronoi_generators(map, delta_d)?;
    jitter(&mut gens, delta_d, map);
    let raw = voronoi::voronoi_diagram(&gens, map.bounds(), 1e-3 * delta_d)?;

    let mut remap = vec![usize::MAX; raw.vertices.len()];
    let mut nodes = Vec::new();
    for (i, &v) in raw.vertices.iter().enumerate() {
        if map.point_free(v) {
            remap[i] = nodes.len();
            nodes.push(v);
        }
    }
    let pairs: Vec<(usize, usize)> = raw
        .edges
        .iter()
        .filter_map(|&(a, b)| {
            let (ra, rb) = (remap[a], remap[b]);
            (ra != usize::MAX && rb != usize::MAX && map.segment_free_unchecked(nodes[ra], nodes[rb]))
                .then_some((ra, rb))
        })
        .collect();
    log::debug!(
        "voronoi roadmap: {} generators, {} raw vertices, {} nodes, {} edges",
        gens.len(),
        raw.vertices.len(),
        nodes.len(),
        pairs.len()
    );
    RoadmapGraph::from_parts(nodes, pairs, RoadmapKind::Voronoi, delta_d)
}

/// Endpoint indices of a graph after [`attach_endpoints`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Endpoints {
    pub start: usize,
    pub goal: usize,
}

/// Adds `start` and `goal` to the graph. Each joins every original node
/// within `3 * spacing` that it can see, or the nearest visible node when
/// none is in range. A point coinciding with an existing node reuses it.
pub fn attach_endpoints(
    graph: &RoadmapGraph,
    start: Point2,
    goal: Point2,
    map: &PolygonMap,
) -> Result<(RoadmapGraph, Endpoints)> {
    let original = graph.node_count();
    let mut nodes = graph.nodes.clone();
    let mut pairs: Vec<(usize, usize)> = graph.edges.iter().map(|e| (e.a, e.b)).collect();
    let radius = 3.0 * graph.spacing;

    let mut attach = |p: Point2, which: &'static str| -> Result<usize> {
        if !map.bounds().contains(p) || !map.point_free(p) {
            return Err(Error::UnreachableEndpoint { which, x: p.x, y: p.y });
        }
        if let Some(existing) = (0..original).find(|&i| graph.nodes[i].dist(p) <= 1e-9) {
            return Ok(existing);
        }
        let id = nodes.len();
        nodes.push(p);
        let mut by_distance: Vec<(f64, usize)> =
            (0..original).map(|i| (graph.nodes[i].dist(p), i)).collect();
        by_distance.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        let mut linked = 0;
        for &(d, i) in &by_distance {
            if d > radius {
                break;
            }
            if map.segment_free_unchecked(p, graph.nodes[i]) {
                pairs.push((id, i));
                linked += 1;
            }
        }
        if linked == 0 {
            let nearest = by_distance
                .iter()
                .find(|&&(_, i)| map.segment_free_unchecked(p, graph.nodes[i]));
            match nearest {
                Some(&(_, i)) => pairs.push((id, i)),
                None => return Err(Error::UnreachableEndpoint { which, x: p.x, y: p.y }),
            }
        }
        Ok(id)
    };
    let s = attach(start, "start")?;
    let g = attach(goal, "goal")?;
    let out = RoadmapGraph::from_parts(nodes, pairs, graph.kind, graph.spacing)?;
    Ok((out, Endpoints { start: s, goal: g }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Polygon, Rect};

    fn empty_map(size: f64) -> PolygonMap {
        PolygonMap::empty(Rect::new(Point2::new(0.0, 0.0), Point2::new(size, size)).unwrap())
    }

    fn square(cx: f64, cy: f64, half: f64) -> Polygon {
        Polygon::new(vec![
            Point2::new(cx - half, cy - half),
            Point2::new(cx + half, cy - half),
            Point2::new(cx + half, cy + half),
            Point2::new(cx - half, cy + half),
        ])
        .unwrap()
    }

    /// Exhaustive enumeration of 8-connected lattice edges: all unordered
    /// pairs at Chebyshev distance 1.
    fn lattice_edge_count(n: i64) -> usize {
        let cells: Vec<(i64, i64)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
        let mut count = 0;
        for (k, a) in cells.iter().enumerate() {
            for b in &cells[k + 1..] {
                if (a.0 - b.0).abs().max((a.1 - b.1).abs()) == 1 {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn grid_on_empty_map() {
        let g = build_uniform_grid(&empty_map(100.0), 50.0).unwrap();
        assert_eq!(g.node_count(), 9);
        assert_eq!(lattice_edge_count(3), 20);
        assert_eq!(g.edge_count(), 20);
        let diag = g.edges().iter().filter(|e| e.length > 50.0 + 1e-9).count();
        assert_eq!(diag, 8);
        for e in g.edges() {
            assert!((e.length - g.nodes()[e.a].dist(g.nodes()[e.b])).abs() <= 1e-9);
        }
    }

    #[test]
    fn grid_fully_covered_is_empty() {
        let b = Rect::new(Point2::new(0.0, 0.0), Point2::new(100.0, 100.0)).unwrap();
        let map = PolygonMap::new(b, vec![b.to_polygon()], 0.0).unwrap();
        let g = build_uniform_grid(&map, 50.0).unwrap();
        assert!(g.is_empty());
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn grid_spacing_larger_than_map_rejected() {
        assert!(matches!(
            build_uniform_grid(&empty_map(100.0), 150.0),
            Err(Error::Parameter(_))
        ));
    }

    fn voronoi_map(obstacles: Vec<Polygon>) -> PolygonMap {
        let b = Rect::new(Point2::new(0.0, 0.0), Point2::new(1000.0, 1000.0)).unwrap();
        PolygonMap::new(b, obstacles, 0.0).unwrap()
    }

    #[test]
    fn voronoi_roadmap_encircles_a_central_obstacle() {
        let map = voronoi_map(vec![square(500.0, 500.0, 100.0)]);
        let g = build_voronoi_roadmap(&map, 50.0).unwrap();
        assert_eq!(g.kind(), RoadmapKind::Voronoi);
        for e in g.edges() {
            assert!(map.segment_collision_free(g.nodes()[e.a], g.nodes()[e.b]).unwrap());
        }
        // Cycle oracle: some cycle in the graph winds around the centroid.
        // Sum of signed angle increments along a closed walk found by DFS
        // back-edges: a back-edge whose tree path winds by 2*pi encloses it.
        let c = Point2::new(500.0, 500.0);
        assert!(encloses(&g, c), "no cycle around the obstacle");
    }

    // Depth-first search keeping the accumulated winding angle of every
    // node along the tree; a non-tree edge whose endpoints' angles differ by
    // about 2*pi (after adding the edge's own increment) closes a loop around `c`.
    fn encloses(g: &RoadmapGraph, c: Point2) -> bool {
        let n = g.node_count();
        let mut angle = vec![f64::NAN; n];
        for root in 0..n {
            if !angle[root].is_nan() {
                continue;
            }
            angle[root] = 0.0;
            let mut stack = vec![root];
            while let Some(u) = stack.pop() {
                for &(v, _) in g.neighbours(u) {
                    let du = g.nodes()[u] - c;
                    let dv = g.nodes()[v] - c;
                    let step = du.cross(dv).atan2(du.dot(dv));
                    if angle[v].is_nan() {
                        angle[v] = angle[u] + step;
                        stack.push(v);
                    } else if (angle[u] + step - angle[v]).abs() > 6.0 {
                        return true;
                    }
                }
            }
        }
        false
    }

    #[test]
    fn voronoi_roadmap_passes_between_two_obstacles() {
        // Gap between x = 450 and x = 550, midline x = 500.
        let left = square(350.0, 500.0, 100.0);
        let right = square(650.0, 500.0, 100.0);
        let map = voronoi_map(vec![left.clone(), right.clone()]);
        let g = build_voronoi_roadmap(&map, 25.0).unwrap();
        // Brute force: nodes strictly closer to the midline than to either
        // obstacle, restricted to the channel's extent, must connect y=400 to y=600.
        let in_channel = |p: Point2| {
            let mid = (p.x - 500.0).abs();
            p.y > 390.0 && p.y < 610.0 && mid < left.distance(p) && mid < right.distance(p)
        };
        let ids: Vec<usize> = (0..g.node_count()).filter(|&i| in_channel(g.nodes()[i])).collect();
        let south = ids.iter().copied().filter(|&i| g.nodes()[i].y < 420.0);
        let mut connected = false;
        for s in south {
            let mut seen = std::collections::HashSet::from([s]);
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                if g.nodes()[u].y > 580.0 {
                    connected = true;
                    break;
                }
                for &(v, _) in g.neighbours(u) {
                    if in_channel(g.nodes()[v]) && seen.insert(v) {
                        stack.push(v);
                    }
                }
            }
            if connected {
                break;
            }
        }
        assert!(connected, "no edge chain through the channel");
    }

    #[test]
    fn voronoi_roadmap_is_sparse() {
        let map = voronoi_map(vec![
            square(300.0, 300.0, 80.0),
            square(700.0, 300.0, 60.0),
            square(500.0, 700.0, 120.0),
        ]);
        let gens = voronoi_generators(&map, 40.0).unwrap();
        let g = build_voronoi_roadmap(&map, 40.0).unwrap();
        assert!(g.node_count() <= 2 * gens.len());
    }

    #[test]
    fn attach_reuses_coincident_node() {
        let map = empty_map(100.0);
        let g = build_uniform_grid(&map, 50.0).unwrap();
        let (h, ends) =
            attach_endpoints(&g, Point2::new(0.0, 0.0), Point2::new(100.0, 100.0), &map).unwrap();
        assert_eq!(h.node_count(), 9);
        assert_eq!(g.nodes()[ends.start], Point2::new(0.0, 0.0));
        assert_eq!(g.nodes()[ends.goal], Point2::new(100.0, 100.0));
    }

    #[test]
    fn attach_connects_within_radius() {
        let map = empty_map(100.0);
        let g = build_uniform_grid(&map, 50.0).unwrap();
        let (h, ends) =
            attach_endpoints(&g, Point2::new(10.0, 20.0), Point2::new(90.0, 70.0), &map).unwrap();
        assert_eq!(h.node_count(), 11);
        assert_eq!(h.neighbours(ends.start).len(), 9);
        assert_eq!(h.neighbours(ends.goal).len(), 9);
    }

    #[test]
    fn attach_inside_obstacle_fails() {
        let b = Rect::new(Point2::new(0.0, 0.0), Point2::new(100.0, 100.0)).unwrap();
        let map = PolygonMap::new(b, vec![square(50.0, 50.0, 10.0)], 0.0).unwrap();
        let g = build_uniform_grid(&map, 25.0).unwrap();
        let r = attach_endpoints(&g, Point2::new(50.0, 50.0), Point2::new(5.0, 5.0), &map);
        assert!(matches!(r, Err(Error::UnreachableEndpoint { which: "start", .. })));
    }

    #[test]
    fn path_rejects_repeated_waypoints() {
        let p = Point2::new(1.0, 1.0);
        assert!(PiecewiseLinearPath::new(vec![p, p]).is_err());
        assert!(PiecewiseLinearPath::new(vec![p]).is_err());
    }
}
