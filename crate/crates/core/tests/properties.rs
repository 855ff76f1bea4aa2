mod common;

use asv_planner::geom::{point_in_polygon, Point2};
use asv_planner::ocp::{cost_to_go, obstacle_constraints, CircleCovering, CostWeights};
use asv_planner::refine::{reduce_waypoints, refine_corners_traced, CornerOptions};
use asv_planner::roadmap::{astar, attach_endpoints, build_uniform_grid, build_voronoi_roadmap};
use common::{graph_dijkstra, random_graph, random_map};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn astar_matches_dijkstra(seed in 0u64..1_000_000, n in 10usize..120, k in 2usize..6, s in 0usize..1000, d in 1usize..1000) {
        let graph = random_graph(seed, n, k);
        let (s, g) = (s % n, (s + 1 + d % (n - 1)) % n);
        match (astar(&graph, s, g), graph_dijkstra(&graph, s, g)) {
            (Ok(r), Some(oracle)) => {
                prop_assert_eq!(r.length, oracle);
                prop_assert_eq!(r.node_indices.first(), Some(&s));
                prop_assert_eq!(r.node_indices.last(), Some(&g));
            }
            (Err(_), None) => {}
            (r, oracle) => prop_assert!(false, "A* {:?} vs Dijkstra {:?}", r.map(|r| r.length), oracle),
        }
    }

    #[test]
    fn refinement_never_lengthens_or_collides(seed in 0u64..1_000_000, uniform in any::<bool>()) {
        let (map, a, b) = random_map(seed, 10.0);
        let base = if uniform { build_uniform_grid(&map, 40.0) } else { build_voronoi_roadmap(&map, 40.0) };
        let Ok((graph, ends)) = attach_endpoints(&base.unwrap(), a, b, &map) else { return Ok(()) };
        let Ok(found) = astar(&graph, ends.start, ends.goal) else { return Ok(()) };
        prop_assert!(found.path.is_collision_free(&map));
        let reduced = reduce_waypoints(&found.path, &map).unwrap();
        prop_assert!(reduced.length() <= found.path.length() + 1e-9);
        prop_assert!(reduced.is_collision_free(&map));
        prop_assert_eq!(reduced.start(), a);
        prop_assert_eq!(reduced.end(), b);
        let cut = refine_corners_traced(&reduced, &map, &CornerOptions::default()).unwrap();
        for w in cut.pass_lengths.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9, "{:?}", cut.pass_lengths);
        }
        prop_assert!(cut.path.is_collision_free(&map));
        prop_assert!(cut.path.length() >= a.dist(b) - 1e-9);
    }

    #[test]
    fn circle_covering_contains_every_obstacle(seed in 0u64..1_000_000, px in 0.0f64..1.0, py in 0.0f64..1.0) {
        let (map, _, _) = random_map(seed, 10.0);
        for mode in [CircleCovering::Single, CircleCovering::ConvexPieces, CircleCovering::Refined { max_protrusion: 5.0 }] {
            let circles = obstacle_constraints(&map, 0.0, mode);
            for obs in map.obstacles() {
                for &v in obs.vertices() {
                    prop_assert!(circles.iter().any(|c| c.contains(v)), "{mode:?} misses vertex {v:?}");
                }
                let bb = obs.bbox();
                let p = Point2::new(bb.min.x + px * bb.width(), bb.min.y + py * bb.height());
                if point_in_polygon(p, obs) {
                    prop_assert!(circles.iter().any(|c| c.contains(p)), "{mode:?} misses interior {p:?}");
                }
            }
        }
    }

    #[test]
    fn cost_is_nonnegative_and_homogeneous_in_weights(
        u in -2.0f64..8.0, v in -3.0f64..3.0, r in -0.3f64..0.3,
        x in -6000.0f64..13000.0, n in -3000.0f64..3000.0, lambda in 0.01f64..100.0,
    ) {
        let s = [0.0, 0.0, 0.0, u, v, r];
        let w = CostWeights::default();
        let f = cost_to_go(&s, &[x, n], &w);
        prop_assert!(f >= 0.0);
        let scaled = cost_to_go(&s, &[x, n], &w.scaled(lambda));
        prop_assert!((scaled - lambda * f).abs() <= 1e-12 * scaled.abs().max(1.0));
    }
}
