use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

use super::{PiecewiseLinearPath, RoadmapGraph};

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub path: PiecewiseLinearPath,
    pub node_indices: Vec<usize>,
    pub length: f64,
    /// Nodes expanded (popped and closed) during the search.
    pub explored: usize,
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    f: f64,
    h: f64,
    node: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Max-heap: reverse so the smallest f pops first, then smallest h, then
// smallest node index.
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.h.total_cmp(&self.h))
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Shortest path from `start` to `goal` with the straight-line distance as
/// heuristic.
pub fn astar(graph: &RoadmapGraph, start: usize, goal: usize) -> Result<SearchResult> {
    let n = graph.node_count();
    if start >= n || goal >= n {
        return Err(Error::Parameter(format!(
            "node index out of range: start {start}, goal {goal}, {n} nodes"
        )));
    }
    if start == goal {
        return Err(Error::Parameter("start and goal are the same node".into()));
    }
    let nodes = graph.nodes();
    let target = nodes[goal];
    let heuristic = |i: usize| nodes[i].dist(target);

    let mut g = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    g[start] = 0.0;
    let h0 = heuristic(start);
    open.push(Entry {
        f: h0,
        h: h0,
        node: start,
    });
    let mut explored = 0;

    while let Some(Entry { node, .. }) = open.pop() {
        if closed[node] {
            continue;
        }
        closed[node] = true;
        explored += 1;
        if node == goal {
            let mut ids = vec![goal];
            while let Some(&last) = ids.last() {
                if last == start {
                    break;
                }
                ids.push(parent[last]);
            }
            ids.reverse();
            let path = PiecewiseLinearPath::new(ids.iter().map(|&i| nodes[i]).collect())?;
            return Ok(SearchResult {
                path,
                node_indices: ids,
                length: g[goal],
                explored,
            });
        }
        for &(next, w) in graph.neighbours(node) {
            if closed[next] {
                continue;
            }
            let tentative = g[node] + w;
            if tentative < g[next] {
                g[next] = tentative;
                parent[next] = node;
                let h = heuristic(next);
                open.push(Entry {
                    f: tentative + h,
                    h,
                    node: next,
                });
            }
        }
    }
    Err(Error::NoPath {
        component_size: graph.component_size(start),
        node_count: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Point2, PolygonMap, Rect};
    use crate::roadmap::{build_uniform_grid, RoadmapKind};
    use rand::{Rng, SeedableRng};

    #[test]
    fn two_node_graph() {
        let g = RoadmapGraph::from_parts(
            vec![Point2::new(0.0, 0.0), Point2::new(3.0, 4.0)],
            [(0, 1)],
            RoadmapKind::Voronoi,
            1.0,
        )
        .unwrap();
        let r = astar(&g, 0, 1).unwrap();
        assert_eq!(r.path.len(), 2);
        assert_eq!(r.length, 5.0);
    }

    /// All simple paths between two nodes by depth-first enumeration.
    fn shortest_by_enumeration(g: &RoadmapGraph, s: usize, t: usize) -> f64 {
        fn go(g: &RoadmapGraph, u: usize, t: usize, seen: &mut Vec<bool>, len: f64, best: &mut f64) {
            if u == t {
                *best = best.min(len);
                return;
            }
            for &(v, w) in g.neighbours(u) {
                if !seen[v] {
                    seen[v] = true;
                    go(g, v, t, seen, len + w, best);
                    seen[v] = false;
                }
            }
        }
        let mut seen = vec![false; g.node_count()];
        seen[s] = true;
        let mut best = f64::INFINITY;
        go(g, s, t, &mut seen, 0.0, &mut best);
        best
    }

    #[test]
    fn grid_corner_to_corner() {
        let map = PolygonMap::empty(
            Rect::new(Point2::new(0.0, 0.0), Point2::new(100.0, 100.0)).unwrap(),
        );
        let g = build_uniform_grid(&map, 50.0).unwrap();
        let s = g.nodes().iter().position(|p| *p == Point2::new(0.0, 0.0)).unwrap();
        let t = g.nodes().iter().position(|p| *p == Point2::new(100.0, 100.0)).unwrap();
        let r = astar(&g, s, t).unwrap();
        let expected = shortest_by_enumeration(&g, s, t);
        assert!((expected - 2.0 * 2f64.sqrt() * 50.0).abs() < 1e-12);
        assert_eq!(r.length, expected);
        assert_eq!(r.path.len(), 3);
    }

    #[test]
    fn disconnected_goal_reports_component() {
        let g = RoadmapGraph::from_parts(
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(5.0, 5.0),
            ],
            [(0, 1)],
            RoadmapKind::Voronoi,
            1.0,
        )
        .unwrap();
        match astar(&g, 0, 2) {
            Err(Error::NoPath {
                component_size,
                node_count,
            }) => {
                assert_eq!(component_size, 2);
                assert_eq!(node_count, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn enumeration_agrees_on_small_random_graphs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let n = rng.random_range(3..9);
            let nodes: Vec<Point2> = (0..n)
                .map(|_| Point2::new(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)))
                .collect();
            let pairs: Vec<(usize, usize)> = (0..n)
                .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
                .filter(|_| rng.random_bool(0.4))
                .collect();
            let g = RoadmapGraph::from_parts(nodes, pairs, RoadmapKind::Voronoi, 1.0).unwrap();
            let best = shortest_by_enumeration(&g, 0, n - 1);
            match astar(&g, 0, n - 1) {
                Ok(r) => assert!((r.length - best).abs() <= 1e-12 * best.max(1.0)),
                Err(Error::NoPath { .. }) => assert!(best.is_infinite()),
                Err(e) => panic!("{e}"),
            }
        }
    }
}
