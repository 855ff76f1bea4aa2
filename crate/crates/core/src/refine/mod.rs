//! Step 2: shorten the A* path, round its corners with circle arcs, put it
//! on a clock, and annotate it with velocities, forces and running cost.

mod arcs;
mod corners;
mod reduce;
mod timing;
mod warm_start;

pub use arcs::{smooth_with_arcs, smooth_with_arcs_checked, GeometricPath, PathElement};
pub use corners::{refine_corners, refine_corners_traced, CornerOptions, CornerRefinement};
pub use reduce::reduce_waypoints;
pub use timing::{assign_time, unwrap_near, TimedSamples};
pub use warm_start::{
    build_warm_start, propagate_cost_heun, trapezoid_cumulative, TimedTrajectory, TrajectoryOrigin,
};
