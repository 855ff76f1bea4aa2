//! Test problems shared by the integration test targets.
#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use asv_planner::geom::{Point2, Polygon, PolygonMap, Rect};
use asv_planner::ocp::NlpProblem;
use asv_planner::roadmap::{RoadmapGraph, RoadmapKind};
use nalgebra::{DMatrix, DVector};

/// Rest-to-rest double integrator, `x: 0 -> 1` in unit time, minimising
/// `sum u_k^2 dt` with the exact zero-order-hold discretisation.
/// Variables `[x_0, v_0, u_0, x_1, v_1, u_1, ..., x_N, v_N]`.
pub struct DoubleIntegrator {
    pub n: usize,
}

impl DoubleIntegrator {
    pub fn dt(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn control(&self, w: &[f64], k: usize) -> f64 {
        w[3 * k + 2]
    }
}

impl NlpProblem for DoubleIntegrator {
    fn num_vars(&self) -> usize {
        3 * self.n + 2
    }
    fn num_constraints(&self) -> usize {
        2 * self.n + 4
    }
    fn var_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (vec![f64::NEG_INFINITY; self.num_vars()], vec![f64::INFINITY; self.num_vars()])
    }
    fn constraint_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let mut b = vec![0.0; self.num_constraints()];
        b[2 * self.n + 2] = 1.0;
        (b.clone(), b)
    }
    fn objective(&self, w: &[f64]) -> f64 {
        (0..self.n).map(|k| self.control(w, k).powi(2) * self.dt()).sum()
    }
    fn objective_gradient(&self, w: &[f64], grad: &mut [f64]) -> f64 {
        grad.fill(0.0);
        for k in 0..self.n {
            grad[3 * k + 2] = 2.0 * self.control(w, k) * self.dt();
        }
        self.objective(w)
    }
    fn constraints(&self, w: &[f64], g: &mut [f64]) {
        let h = self.dt();
        for k in 0..self.n {
            let (x, v, u) = (w[3 * k], w[3 * k + 1], w[3 * k + 2]);
            g[2 * k] = x + h * v + 0.5 * h * h * u - w[3 * k + 3];
            g[2 * k + 1] = v + h * u - w[3 * k + 4];
        }
        let r = 2 * self.n;
        g[r] = w[0];
        g[r + 1] = w[1];
        g[r + 2] = w[3 * self.n];
        g[r + 3] = w[3 * self.n + 1];
    }
    fn jacobian_structure(&self) -> Vec<(usize, usize)> {
        let mut s = Vec::new();
        for k in 0..self.n {
            let c = 3 * k;
            s.extend([(2 * k, c), (2 * k, c + 1), (2 * k, c + 2), (2 * k, c + 3)]);
            s.extend([(2 * k + 1, c + 1), (2 * k + 1, c + 2), (2 * k + 1, c + 4)]);
        }
        let r = 2 * self.n;
        s.extend([(r, 0), (r + 1, 1), (r + 2, 3 * self.n), (r + 3, 3 * self.n + 1)]);
        s
    }
    fn constraints_jacobian(&self, w: &[f64], g: &mut [f64], v: &mut [f64]) {
        self.constraints(w, g);
        let h = self.dt();
        let mut i = 0;
        for _ in 0..self.n {
            for val in [1.0, h, 0.5 * h * h, -1.0, 1.0, h, -1.0] {
                v[i] = val;
                i += 1;
            }
        }
        for _ in 0..4 {
            v[i] = 1.0;
            i += 1;
        }
    }
}

/// `min 1/2 w'Qw + c'w  s.t.  A w = b`.
pub struct EqualityQp {
    pub q: DMatrix<f64>,
    pub c: DVector<f64>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl EqualityQp {
    /// Seeded problem with `n` variables and `m` equality rows; the Hessian
    /// is `L L^T + I`, so it is positive definite.
    pub fn random(seed: u64, n: usize, m: usize) -> Self {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let l = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        Self {
            q: &l * l.transpose() + DMatrix::identity(n, n),
            c: DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0)),
            a: DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0)),
            b: DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0)),
        }
    }

    /// Oracle: solve the KKT system `[Q A'; A 0] [w; y] = [-c; b]` by LU.
    pub fn kkt_solution(&self) -> DVector<f64> {
        let (n, m) = (self.q.nrows(), self.a.nrows());
        let mut k = DMatrix::zeros(n + m, n + m);
        k.view_mut((0, 0), (n, n)).copy_from(&self.q);
        k.view_mut((0, n), (n, m)).copy_from(&self.a.transpose());
        k.view_mut((n, 0), (m, n)).copy_from(&self.a);
        let mut rhs = DVector::zeros(n + m);
        rhs.rows_mut(0, n).copy_from(&(-&self.c));
        rhs.rows_mut(n, m).copy_from(&self.b);
        let sol = k.lu().solve(&rhs).expect("KKT matrix is nonsingular");
        sol.rows(0, n).into_owned()
    }
}

impl NlpProblem for EqualityQp {
    fn num_vars(&self) -> usize {
        self.q.nrows()
    }
    fn num_constraints(&self) -> usize {
        self.a.nrows()
    }
    fn var_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (vec![f64::NEG_INFINITY; self.num_vars()], vec![f64::INFINITY; self.num_vars()])
    }
    fn constraint_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (self.b.iter().copied().collect(), self.b.iter().copied().collect())
    }
    fn objective(&self, w: &[f64]) -> f64 {
        let w = DVector::from_column_slice(w);
        0.5 * w.dot(&(&self.q * &w)) + self.c.dot(&w)
    }
    fn objective_gradient(&self, w: &[f64], grad: &mut [f64]) -> f64 {
        let wv = DVector::from_column_slice(w);
        let g = &self.q * &wv + &self.c;
        grad.copy_from_slice(g.as_slice());
        self.objective(w)
    }
    fn constraints(&self, w: &[f64], g: &mut [f64]) {
        let r = &self.a * DVector::from_column_slice(w);
        g.copy_from_slice(r.as_slice());
    }
    fn jacobian_structure(&self) -> Vec<(usize, usize)> {
        (0..self.a.nrows())
            .flat_map(|r| (0..self.a.ncols()).map(move |c| (r, c)))
            .collect()
    }
    fn constraints_jacobian(&self, w: &[f64], g: &mut [f64], v: &mut [f64]) {
        self.constraints(w, g);
        let mut i = 0;
        for r in 0..self.a.nrows() {
            for c in 0..self.a.ncols() {
                v[i] = self.a[(r, c)];
                i += 1;
            }
        }
    }
}

/// Shortest 8-connected path over the free nodes of a `spacing` grid laid
/// from the map's lower-left corner, between the grid nodes nearest to `a`
/// and `b`. Returns the length and the node positions.
pub fn grid_dijkstra(map: &PolygonMap, spacing: f64, a: Point2, b: Point2) -> Option<(f64, Vec<Point2>)> {
    let bounds = map.bounds();
    let nx = (bounds.width() / spacing).floor() as usize + 1;
    let ny = (bounds.height() / spacing).floor() as usize + 1;
    let pos = |i: usize| Point2::new(bounds.min.x + (i % nx) as f64 * spacing, bounds.min.y + (i / nx) as f64 * spacing);
    let nearest = |p: Point2| {
        let ix = ((p.x - bounds.min.x) / spacing).round() as usize;
        let iy = ((p.y - bounds.min.y) / spacing).round() as usize;
        iy.min(ny - 1) * nx + ix.min(nx - 1)
    };
    let free: Vec<bool> = (0..nx * ny).map(|i| map.point_free(pos(i))).collect();
    let (s, g) = (nearest(a), nearest(b));
    if !free[s] || !free[g] {
        return None;
    }
    let mut dist = vec![f64::INFINITY; nx * ny];
    let mut prev = vec![usize::MAX; nx * ny];
    let mut heap = BinaryHeap::new();
    dist[s] = 0.0;
    heap.push(Reverse((OrdF64(0.0), s)));
    while let Some(Reverse((OrdF64(d), i))) = heap.pop() {
        if d > dist[i] {
            continue;
        }
        if i == g {
            break;
        }
        let (ix, iy) = ((i % nx) as i64, (i / nx) as i64);
        for (dx, dy) in [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)] {
            let (jx, jy) = (ix + dx, iy + dy);
            if jx < 0 || jy < 0 || jx >= nx as i64 || jy >= ny as i64 {
                continue;
            }
            let j = jy as usize * nx + jx as usize;
            if !free[j] || !map.segment_collision_free(pos(i), pos(j)).unwrap_or(false) {
                continue;
            }
            let nd = d + pos(i).dist(pos(j));
            if nd < dist[j] {
                dist[j] = nd;
                prev[j] = i;
                heap.push(Reverse((OrdF64(nd), j)));
            }
        }
    }
    if !dist[g].is_finite() {
        return None;
    }
    let mut path = vec![pos(g)];
    let mut i = g;
    while i != s {
        i = prev[i];
        path.push(pos(i));
    }
    path.reverse();
    Some((dist[g], path))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Two rectangular islands stacked at `x` in 1300..1700 of a 3000 x 2000
/// map, leaving a horizontal channel of `channel` metres centred at
/// `y = centre`.
pub fn two_islands(channel: f64, centre: f64) -> PolygonMap {
    let rect = |x0: f64, y0: f64, x1: f64, y1: f64| {
        Polygon::new(vec![
            Point2::new(x0, y0),
            Point2::new(x1, y0),
            Point2::new(x1, y1),
            Point2::new(x0, y1),
        ])
        .unwrap()
    };
    let h = 0.5 * channel;
    PolygonMap::new(
        Rect::new(Point2::new(0.0, 0.0), Point2::new(3000.0, 2000.0)).unwrap(),
        vec![rect(1300.0, 200.0, 1700.0, centre - h), rect(1300.0, centre + h, 1700.0, 1800.0)],
        0.0,
    )
    .unwrap()
}

/// The `y` where the polyline through `pts` first crosses the vertical line
/// at `x`.
pub fn crossing_y(pts: &[Point2], x: f64) -> Option<f64> {
    pts.windows(2).find_map(|w| {
        let (a, b) = (w[0], w[1]);
        if (a.x - x) * (b.x - x) <= 0.0 && a.x != b.x {
            let t = (x - a.x) / (b.x - a.x);
            Some(a.y + t * (b.y - a.y))
        } else {
            None
        }
    })
}

/// Seeded 1000 x 1000 map with 3 to 6 disjoint convex islands and a start
/// and goal near the west and east edges, both clear of the margin.
pub fn random_map(seed: u64, margin: f64) -> (PolygonMap, Point2, Point2) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let bounds = Rect::new(Point2::new(0.0, 0.0), Point2::new(1000.0, 1000.0)).unwrap();
    let count = rng.random_range(3..=6);
    let mut centres: Vec<(Point2, f64)> = Vec::new();
    let mut obstacles = Vec::new();
    while obstacles.len() < count {
        let radius = rng.random_range(60.0..150.0);
        let c = Point2::new(rng.random_range(200.0..800.0), rng.random_range(150.0..850.0));
        if centres.iter().any(|&(o, r)| o.dist(c) < r + radius + 3.0 * margin) {
            continue;
        }
        let n = rng.random_range(5..10);
        let step = std::f64::consts::TAU / n as f64;
        let pts = (0..n)
            .map(|k| {
                let t = (k as f64 + rng.random_range(-0.25..0.25)) * step;
                c + Point2::new(radius * t.cos(), radius * t.sin())
            })
            .collect();
        obstacles.push(Polygon::new(pts).unwrap());
        centres.push((c, radius));
    }
    let map = PolygonMap::new(bounds, obstacles, margin).unwrap();
    let start = Point2::new(50.0, rng.random_range(100.0..900.0));
    let goal = Point2::new(950.0, rng.random_range(100.0..900.0));
    (map, start, goal)
}

/// Plain Dijkstra distance between two nodes of `graph`.
pub fn graph_dijkstra(graph: &RoadmapGraph, s: usize, g: usize) -> Option<f64> {
    let mut dist = vec![f64::INFINITY; graph.node_count()];
    let mut heap = BinaryHeap::new();
    dist[s] = 0.0;
    heap.push(Reverse((OrdF64(0.0), s)));
    while let Some(Reverse((OrdF64(d), i))) = heap.pop() {
        if d > dist[i] {
            continue;
        }
        for &(j, len) in graph.neighbours(i) {
            let nd = d + len;
            if nd < dist[j] {
                dist[j] = nd;
                heap.push(Reverse((OrdF64(nd), j)));
            }
        }
    }
    dist[g].is_finite().then_some(dist[g])
}

/// Seeded graph of `n` nodes in a 1000 m square, each joined to its `k`
/// nearest neighbours.
pub fn random_graph(seed: u64, n: usize, k: usize) -> RoadmapGraph {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let nodes: Vec<Point2> = (0..n)
        .map(|_| Point2::new(rng.random_range(0.0..1000.0), rng.random_range(0.0..1000.0)))
        .collect();
    let mut pairs = Vec::new();
    for (i, &p) in nodes.iter().enumerate() {
        let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        order.sort_by(|&a, &b| p.dist(nodes[a]).total_cmp(&p.dist(nodes[b])));
        pairs.extend(order.into_iter().take(k).map(|j| (i, j)));
    }
    RoadmapGraph::from_parts(nodes, pairs, RoadmapKind::Voronoi, 0.0).unwrap()
}
