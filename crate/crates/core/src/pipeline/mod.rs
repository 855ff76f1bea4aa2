//! The three planning steps end to end, with per-step timing, artifacts and
//! a benchmark harness.

mod artifacts;
mod bench;
mod scenario;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Point2, PolygonMap};
use crate::ocp::{
    extract_trajectory, obstacle_constraints, pack_warm_start, solve_nlp, transcribe, CircleCovering,
    CostWeights, GoalSpec, OcpSpec, SolveStatus, SolverOptions,
};
use crate::refine::{
    assign_time, build_warm_start, reduce_waypoints, refine_corners, smooth_with_arcs_checked, CornerOptions,
    GeometricPath, TimedTrajectory,
};
use crate::roadmap::{astar, attach_endpoints, build_uniform_grid, build_voronoi_roadmap, PiecewiseLinearPath, RoadmapGraph};
use crate::vessel::{State, VesselParams};

pub use artifacts::{emit_artifacts, Artifacts};
pub use bench::{match_node_count, run_benchmark, BenchCase, BenchRow, BenchSpec, BenchTable};
pub use scenario::{archipelago, ArchipelagoParams, Scenario};

/// Position and heading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub psi: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, psi: f64) -> Self {
        Self { x, y, psi }
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Voronoi,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerConfig {
    pub method: Method,
    /// Generator spacing (Voronoi) or grid pitch (uniform), m.
    pub delta_d: f64,
    pub cruise_speed: f64,
    /// Travel time; derived from the smoothed path length and
    /// `cruise_speed` when absent.
    pub t_max: Option<f64>,
    /// Shooting intervals.
    pub intervals: usize,
    pub weights: CostWeights,
    /// Lower bound on the map's own margin for Steps 1 and 2, m.
    pub safety_margin: f64,
    pub corners: CornerOptions,
    pub turn_radius: f64,
    pub covering: CircleCovering,
    /// Added to every obstacle circle, m.
    pub ocp_padding: f64,
    /// Parameter file; built-in defaults when absent.
    pub vessel_file: Option<PathBuf>,
    /// Fix the body velocity at the goal.
    pub goal_velocity: Option<[f64; 3]>,
    pub solver: SolverOptions,
    /// Seed for generated maps.
    pub seed: u64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            method: Method::Voronoi,
            delta_d: 100.0,
            cruise_speed: 4.0,
            t_max: None,
            intervals: 100,
            weights: CostWeights::default(),
            safety_margin: 25.0,
            corners: CornerOptions::default(),
            turn_radius: 80.0,
            covering: CircleCovering::Refined { max_protrusion: 25.0 },
            ocp_padding: 10.0,
            vessel_file: None,
            goal_velocity: None,
            solver: SolverOptions::default(),
            seed: 1,
        }
    }
}

impl PlannerConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("delta_d", self.delta_d),
            ("cruise_speed", self.cruise_speed),
            ("turn_radius", self.turn_radius),
            ("solver.tol_feas", self.solver.tol_feas),
            ("solver.tol_opt", self.solver.tol_opt),
            ("solver.time_budget", self.solver.time_budget),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("safety_margin", self.safety_margin), ("ocp_padding", self.ocp_padding)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("{name} must be >= 0, got {v}")));
            }
        }
        if let Some(t) = self.t_max {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::Config(format!("t_max must be positive, got {t}")));
            }
        }
        if self.intervals < 2 {
            return Err(Error::Config(format!("intervals must be at least 2, got {}", self.intervals)));
        }
        if let CircleCovering::Refined { max_protrusion } = self.covering {
            if !(max_protrusion.is_finite() && max_protrusion > 0.0) {
                return Err(Error::Config(format!("max_protrusion must be positive, got {max_protrusion}")));
            }
        }
        self.weights.validated().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn vessel(&self) -> Result<VesselParams> {
        match &self.vessel_file {
            Some(path) => VesselParams::load(path),
            None => Ok(VesselParams::default()),
        }
    }
}

/// Wall time per step, seconds.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StepTimes {
    pub step1: f64,
    pub step2: f64,
    pub step3: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    /// Solver converged and the trajectory passed the collision re-check.
    Converged,
    /// The returned trajectory is not a converged, verified solution.
    BestEffort,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub method: Method,
    pub delta_d: f64,
    pub times: StepTimes,
    pub node_count: usize,
    pub edge_count: usize,
    pub explored: usize,
    pub raw_length: f64,
    pub reduced_length: f64,
    pub cut_length: f64,
    pub smooth_length: f64,
    pub t_max: f64,
    pub intervals: usize,
    pub substeps: usize,
    pub obstacle_circles: usize,
    pub warm_start_cost: f64,
    /// Cost of the returned trajectory.
    pub objective: f64,
    pub iterations: usize,
    pub outer_iterations: usize,
    pub solver_status: SolveStatus,
    pub max_violation: f64,
    /// Smallest distance from the returned trajectory's segments to an
    /// obstacle; `None` when a node lies outside the bounds.
    pub min_clearance: Option<f64>,
    pub collision_free: bool,
    pub status: RunStatus,
}

impl RunReport {
    /// The report with every wall-time field zeroed.
    pub fn without_timing(&self) -> Self {
        Self {
            times: StepTimes::default(),
            ..self.clone()
        }
    }
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub trajectory: TimedTrajectory,
    pub warm_start: TimedTrajectory,
    pub report: RunReport,
    pub roadmap: RoadmapGraph,
    pub raw_path: PiecewiseLinearPath,
    pub smooth_path: GeometricPath,
}

/// RK4 sub-steps per shooting interval: at least 4, and none longer than
/// 1.5 s.
pub fn substeps_for(dt: f64) -> usize {
    ((dt / 1.5).ceil() as usize).max(4)
}

pub(crate) fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

pub fn build_roadmap(map: &PolygonMap, method: Method, delta_d: f64) -> Result<RoadmapGraph> {
    match method {
        Method::Voronoi => build_voronoi_roadmap(map, delta_d),
        Method::Uniform => build_uniform_grid(map, delta_d),
    }
}

/// Smallest obstacle distance along the polyline through `traj`'s positions,
/// or `None` when a node leaves the bounds.
fn polyline_clearance(map: &PolygonMap, traj: &TimedTrajectory) -> Option<f64> {
    let pts: Vec<Point2> = traj.eta.iter().map(|e| Point2::new(e[0], e[1])).collect();
    if pts.iter().any(|&p| !map.bounds().contains(p)) {
        return None;
    }
    let mut best = f64::INFINITY;
    for w in pts.windows(2) {
        for obs in map.obstacles() {
            best = best.min(obs.segment_distance(w[0], w[1]));
        }
    }
    Some(best)
}

/// Runs Step 1 (roadmap and A*), Step 2 (refinement and warm start) and
/// Step 3 (trajectory optimization). A solve that does not converge, or
/// whose result fails the collision re-check, is reported as best effort;
/// in the non-converged case the warm start is returned instead.
pub fn run_pipeline(map: &PolygonMap, start: Pose, goal: Pose, cfg: &PlannerConfig) -> Result<PipelineOutput> {
    let t_total = Instant::now();
    cfg.validate()?;
    let vessel = cfg.vessel()?;
    let planning_map = map
        .clone()
        .with_safety_margin(map.safety_margin().max(cfg.safety_margin))?;

    // Step 1.
    let t1 = Instant::now();
    let base = build_roadmap(&planning_map, cfg.method, cfg.delta_d)?;
    let (graph, ends) = attach_endpoints(&base, start.position(), goal.position(), &planning_map)?;
    let search = astar(&graph, ends.start, ends.goal)?;
    let step1 = secs(t1.elapsed());

    // Step 2.
    let t2 = Instant::now();
    let reduced = reduce_waypoints(&search.path, &planning_map)?;
    let cut = refine_corners(&reduced, &planning_map, &cfg.corners)?;
    let margin = planning_map.safety_margin();
    let smooth = smooth_with_arcs_checked(&cut, cfg.turn_radius, &planning_map, 0.9 * margin, 0.25 * cfg.turn_radius)?;
    let speed = match cfg.t_max {
        Some(t) => smooth.length() / t,
        None => cfg.cruise_speed,
    };
    let samples = assign_time(&smooth, speed, cfg.intervals)?;
    let warm = build_warm_start(&samples, &vessel, &cfg.weights)?;
    let step2 = secs(t2.elapsed());

    // Step 3.
    let t3 = Instant::now();
    let circles = obstacle_constraints(map, cfg.ocp_padding, cfg.covering);
    let n_circles = circles.len();
    let start_state = State {
        eta: [start.x, start.y, start.psi],
        nu: [speed, 0.0, 0.0],
    };
    let goal_spec = GoalSpec {
        position: goal.position(),
        heading: goal.psi,
        velocity: cfg.goal_velocity,
    };
    let mut spec = OcpSpec::new(
        samples.t_max,
        cfg.intervals,
        cfg.weights,
        start_state,
        goal_spec,
        circles,
        Some(map.bounds()),
        &vessel,
    )?;
    spec.substeps = substeps_for(spec.dt());
    let problem = transcribe(&spec, &vessel)?;
    let w0 = pack_warm_start(&warm, &problem)?;
    let solution = solve_nlp(&problem, &w0, &cfg.solver)?;
    let optimized = extract_trajectory(&solution, &problem)?;
    let step3 = secs(t3.elapsed());

    let converged = solution.status == SolveStatus::Converged;
    let trajectory = if converged { optimized } else { warm.clone() };
    let clearance = polyline_clearance(map, &trajectory);
    let collision_free = clearance.is_some_and(|c| c > 0.0);
    let status = if converged && collision_free {
        RunStatus::Converged
    } else {
        log::warn!(
            "returning a best-effort trajectory (solver {:?}, collision free: {collision_free})",
            solution.status
        );
        RunStatus::BestEffort
    };
    let report = RunReport {
        method: cfg.method,
        delta_d: cfg.delta_d,
        times: StepTimes {
            step1,
            step2,
            step3,
            total: secs(t_total.elapsed()),
        },
        node_count: base.node_count(),
        edge_count: base.edge_count(),
        explored: search.explored,
        raw_length: search.length,
        reduced_length: reduced.length(),
        cut_length: cut.length(),
        smooth_length: smooth.length(),
        t_max: samples.t_max,
        intervals: cfg.intervals,
        substeps: spec.substeps,
        obstacle_circles: n_circles,
        warm_start_cost: warm.total_cost(),
        objective: trajectory.total_cost(),
        iterations: solution.iterations,
        outer_iterations: solution.outer_iterations,
        solver_status: solution.status,
        max_violation: solution.max_violation,
        min_clearance: clearance.map(|c| if c.is_finite() { c } else { f64::MAX }),
        collision_free,
        status,
    };
    Ok(PipelineOutput {
        trajectory,
        warm_start: warm,
        report,
        roadmap: graph,
        raw_path: search.path,
        smooth_path: smooth,
    })
}
