use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Point2, PolygonMap};
use crate::roadmap::PiecewiseLinearPath;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CornerOptions {
    /// Candidate cut points per incident edge.
    pub samples_per_edge: usize,
    /// Stop once a full pass shortens the path by less than this (m).
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CornerOptions {
    fn default() -> Self {
        Self {
            samples_per_edge: 8,
            tol: 0.1,
            max_iter: 50,
        }
    }
}

/// Result of [`refine_corners_traced`].
#[derive(Debug, Clone)]
pub struct CornerRefinement {
    pub path: PiecewiseLinearPath,
    /// Path length before the first pass and after each pass.
    pub pass_lengths: Vec<f64>,
}

impl CornerRefinement {
    pub fn passes(&self) -> usize {
        self.pass_lengths.len() - 1
    }
}

pub fn refine_corners(
    path: &PiecewiseLinearPath,
    map: &PolygonMap,
    opts: &CornerOptions,
) -> Result<PiecewiseLinearPath> {
    refine_corners_traced(path, map, opts).map(|r| r.path)
}

/// Iterative corner cutting. Each pass walks the interior waypoints in order
/// and replaces a corner by the widest collision-free cut between candidate
/// points on its two edges. Later corners see the already-cut path, so the
/// result depends on the walking order.
pub fn refine_corners_traced(
    path: &PiecewiseLinearPath,
    map: &PolygonMap,
    opts: &CornerOptions,
) -> Result<CornerRefinement> {
    if opts.samples_per_edge < 2 {
        return Err(Error::Parameter(format!(
            "samples_per_edge must be at least 2, got {}",
            opts.samples_per_edge
        )));
    }
    if !(opts.tol.is_finite() && opts.tol >= 0.0) {
        return Err(Error::Parameter(format!("tol must be >= 0, got {}", opts.tol)));
    }
    if !path.is_collision_free(map) {
        return Err(Error::InvalidPath(
            "cannot refine a path that is not collision-free".into(),
        ));
    }
    let order = cut_order(opts.samples_per_edge);
    let mut wp = path.waypoints().to_vec();
    let mut lengths = vec![path.length()];
    for _ in 0..opts.max_iter {
        wp = corner_pass(&wp, map, opts.samples_per_edge, &order);
        let len = polyline_length(&wp);
        let prev = *lengths.last().unwrap();
        lengths.push(len);
        if prev - len < opts.tol {
            break;
        }
    }
    Ok(CornerRefinement {
        path: PiecewiseLinearPath::new(wp)?,
        pass_lengths: lengths,
    })
}

fn polyline_length(wp: &[Point2]) -> f64 {
    wp.windows(2).map(|w| w[0].dist(w[1])).sum()
}

/// Fraction pairs `(i, j)` (in units of `1/s`) from widest to narrowest;
/// ties prefer the more symmetric cut.
fn cut_order(s: usize) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> = (1..=s).flat_map(|i| (1..=s).map(move |j| (i, j))).collect();
    pairs.sort_by_key(|&(i, j)| (std::cmp::Reverse(i + j), i.abs_diff(j), std::cmp::Reverse(i)));
    pairs
}

fn corner_pass(wp: &[Point2], map: &PolygonMap, s: usize, order: &[(usize, usize)]) -> Vec<Point2> {
    let mut out = vec![wp[0]];
    let mut k = 1;
    while k + 1 < wp.len() {
        let prev = *out.last().unwrap();
        let cur = wp[k];
        let next = wp[k + 1];
        let (e1, e2) = (prev - cur, next - cur);
        let (l1, l2) = (e1.norm(), e2.norm());
        // Already straight: drop the waypoint.
        if e1.cross(e2).abs() <= 1e-12 * l1 * l2 && e1.dot(e2) < 0.0 {
            k += 1;
            continue;
        }
        let cut = order.iter().find_map(|&(i, j)| {
            let a = if i == s { prev } else { cur + e1 * (i as f64 / s as f64) };
            let b = if j == s { next } else { cur + e2 * (j as f64 / s as f64) };
            let gain = a.dist(cur) + cur.dist(b) - a.dist(b);
            (gain > 1e-12 * (l1 + l2) && map.segment_free_unchecked(a, b)).then_some((a, b))
        });
        match cut {
            Some((a, b)) => {
                if a != prev {
                    out.push(a);
                }
                if b != next {
                    out.push(b);
                }
            }
            None => out.push(cur),
        }
        k += 1;
    }
    out.push(*wp.last().unwrap());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Polygon, Rect};

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    fn empty() -> PolygonMap {
        PolygonMap::empty(Rect::new(p(-10.0, -10.0), p(10.0, 10.0)).unwrap())
    }

    #[test]
    fn right_angle_converges_to_chord() {
        let path = PiecewiseLinearPath::new(vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0)]).unwrap();
        let r = refine_corners_traced(&path, &empty(), &CornerOptions::default()).unwrap();
        assert!((r.path.length() - 2f64.sqrt()).abs() <= 0.1);
        assert!(r.passes() <= 20);
    }

    #[test]
    fn blocked_corner_is_unchanged() {
        // The obstacle fills the corner triangle and the area beyond its
        // hypotenuse, a hair away from both legs.
        let block = Polygon::new(vec![p(0.01, 0.01), p(0.99, 0.01), p(0.99, 0.99), p(0.01, 0.99)]).unwrap();
        let map = PolygonMap::new(empty().bounds(), vec![block], 0.0).unwrap();
        let path = PiecewiseLinearPath::new(vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0)]).unwrap();
        let out = refine_corners(&path, &map, &CornerOptions::default()).unwrap();
        assert_eq!(out, path);
    }

    #[test]
    fn straight_path_takes_one_pass() {
        let path = PiecewiseLinearPath::new(vec![p(0.0, 0.0), p(5.0, 0.0)]).unwrap();
        let r = refine_corners_traced(&path, &empty(), &CornerOptions::default()).unwrap();
        assert_eq!(r.path, path);
        assert_eq!(r.passes(), 1);
    }

    #[test]
    fn cut_order_starts_widest_and_symmetric() {
        let order = cut_order(4);
        assert_eq!(order[0], (4, 4));
        assert_eq!(order[1], (4, 3));
        assert_eq!(order[3], (3, 3));
        assert_eq!(order.len(), 16);
    }

    #[test]
    fn rejects_too_few_samples() {
        let path = PiecewiseLinearPath::new(vec![p(0.0, 0.0), p(5.0, 0.0)]).unwrap();
        let opts = CornerOptions {
            samples_per_edge: 1,
            ..CornerOptions::default()
        };
        assert!(refine_corners(&path, &empty(), &opts).is_err());
    }
}
