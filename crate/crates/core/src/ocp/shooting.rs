use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Point2, Rect};
use crate::refine::{propagate_cost_heun, TimedTrajectory, TrajectoryOrigin};
use crate::vessel::{self, Interval, State, VesselParams, NU, NX};

use super::{cost_to_go, cost_to_go_grad, Circle, CostWeights, NlpProblem, NlpSolution};

/// Terminal conditions. Position and heading are always fixed; the body
/// velocity only when `velocity` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoalSpec {
    pub position: Point2,
    pub heading: f64,
    pub velocity: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OcpSpec {
    pub t_max: f64,
    /// Number of shooting intervals.
    pub intervals: usize,
    pub weights: CostWeights,
    pub start: State,
    pub goal: GoalSpec,
    pub obstacles: Vec<Circle>,
    /// Box for the `(x, y)` position of every node.
    pub position_bounds: Option<Rect>,
    /// Bounds on `u`, `v`, `r`.
    pub velocity_bounds: [Interval; 3],
    /// Bounds on `X`, `N`.
    pub input_bounds: [Interval; 2],
    /// RK4 sub-steps per shooting interval.
    pub substeps: usize,
}

impl OcpSpec {
    /// Spec with velocity and input bounds taken from `vessel`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        t_max: f64,
        intervals: usize,
        weights: CostWeights,
        start: State,
        goal: GoalSpec,
        obstacles: Vec<Circle>,
        position_bounds: Option<Rect>,
        vessel: &VesselParams,
    ) -> Result<Self> {
        let spec = Self {
            t_max,
            intervals,
            weights,
            start,
            goal,
            obstacles,
            position_bounds,
            velocity_bounds: vessel.velocity_bounds,
            input_bounds: [vessel.force_bounds, vessel.moment_bounds],
            substeps: 4,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.intervals < 2 {
            return Err(Error::Parameter(format!(
                "need at least 2 shooting intervals, got {}",
                self.intervals
            )));
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(Error::Parameter(format!("t_max must be positive, got {}", self.t_max)));
        }
        if self.substeps == 0 {
            return Err(Error::Parameter("substeps must be at least 1".into()));
        }
        self.weights.validated()?;
        if !self.start.is_finite() {
            return Err(Error::Parameter("start state must be finite".into()));
        }
        if let Some(c) = self.obstacles.iter().find(|c| !(c.radius > 0.0 && c.center.is_finite())) {
            return Err(Error::Parameter(format!("invalid obstacle circle {c:?}")));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.t_max / self.intervals as f64
    }
}

/// Multiple-shooting transcription.
///
/// Variables `[eta_0, nu_0, u_0, eta_1, nu_1, u_1, ..., eta_N, nu_N]`.
/// Constraint rows, in order: `6N` continuity defects
/// `rk4(x_k, u_k) - x_{k+1}`, 6 start rows, 3 goal rows (plus 3 when a goal
/// velocity is set), then one row per node and circle.
#[derive(Debug, Clone)]
pub struct ShootingProblem {
    spec: OcpSpec,
    vessel: VesselParams,
    goal_rows: usize,
    position_scale: f64,
}

const STRIDE: usize = NX + NU;

/// Angle difference wrapped to `(-pi, pi]`.
fn wrapped(a: f64) -> f64 {
    a.sin().atan2(a.cos())
}

pub fn transcribe(spec: &OcpSpec, vessel: &VesselParams) -> Result<ShootingProblem> {
    spec.validate()?;
    let position_scale = spec
        .position_bounds
        .map(|b| 0.01 * b.width().max(b.height()))
        .unwrap_or(100.0)
        .max(1.0);
    Ok(ShootingProblem {
        spec: spec.clone(),
        vessel: vessel.clone(),
        goal_rows: if spec.goal.velocity.is_some() { 6 } else { 3 },
        position_scale,
    })
}

impl ShootingProblem {
    pub fn spec(&self) -> &OcpSpec {
        &self.spec
    }

    fn n(&self) -> usize {
        self.spec.intervals
    }

    pub fn state_offset(&self, k: usize) -> usize {
        k * STRIDE
    }

    pub fn control_offset(&self, k: usize) -> usize {
        k * STRIDE + NX
    }

    fn state(&self, w: &[f64], k: usize) -> [f64; NX] {
        let o = self.state_offset(k);
        std::array::from_fn(|i| w[o + i])
    }

    /// Control acting at node `k`; the last node reuses the last interval's.
    fn control(&self, w: &[f64], k: usize) -> [f64; NU] {
        let o = self.control_offset(k.min(self.n() - 1));
        [w[o], w[o + 1]]
    }

    fn continuity_rows(&self) -> usize {
        NX * self.n()
    }

    fn obstacle_row0(&self) -> usize {
        self.continuity_rows() + NX + self.goal_rows
    }

    fn state_scale(&self) -> [f64; NX] {
        let s = self.position_scale;
        [s, s, 1.0, 1.0, 1.0, 0.1]
    }

    /// Sample times `k * t_max / N`.
    pub fn times(&self) -> Vec<f64> {
        let dt = self.spec.dt();
        (0..=self.n()).map(|k| k as f64 * dt).collect()
    }

    fn boundary_residuals(&self, w: &[f64], g: &mut [f64]) {
        let r0 = self.continuity_rows();
        let x0 = self.state(w, 0);
        let s = &self.spec.start;
        let target = [s.eta[0], s.eta[1], s.eta[2], s.nu[0], s.nu[1], s.nu[2]];
        for i in 0..NX {
            g[r0 + i] = if i == 2 { wrapped(x0[i] - target[i]) } else { x0[i] - target[i] };
        }
        let xn = self.state(w, self.n());
        let goal = &self.spec.goal;
        let rg = r0 + NX;
        g[rg] = xn[0] - goal.position.x;
        g[rg + 1] = xn[1] - goal.position.y;
        g[rg + 2] = wrapped(xn[2] - goal.heading);
        if let Some(v) = goal.velocity {
            for i in 0..3 {
                g[rg + 3 + i] = xn[3 + i] - v[i];
            }
        }
    }

    fn obstacle_residuals(&self, w: &[f64], g: &mut [f64]) {
        let mut row = self.obstacle_row0();
        for k in 0..=self.n() {
            let x = self.state(w, k);
            let p = Point2::new(x[0], x[1]);
            for c in &self.spec.obstacles {
                g[row] = c.constraint_value(p) / (c.radius * c.radius);
                row += 1;
            }
        }
    }
}

impl NlpProblem for ShootingProblem {
    fn num_vars(&self) -> usize {
        NX * (self.n() + 1) + NU * self.n()
    }

    fn num_constraints(&self) -> usize {
        self.obstacle_row0() + (self.n() + 1) * self.spec.obstacles.len()
    }

    fn var_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.num_vars();
        let mut lo = vec![f64::NEG_INFINITY; n];
        let mut hi = vec![f64::INFINITY; n];
        for k in 0..=self.n() {
            let o = self.state_offset(k);
            if let Some(b) = self.spec.position_bounds {
                lo[o] = b.min.x;
                hi[o] = b.max.x;
                lo[o + 1] = b.min.y;
                hi[o + 1] = b.max.y;
            }
            for i in 0..3 {
                lo[o + 3 + i] = self.spec.velocity_bounds[i].min;
                hi[o + 3 + i] = self.spec.velocity_bounds[i].max;
            }
            if k < self.n() {
                let o = self.control_offset(k);
                for i in 0..NU {
                    lo[o + i] = self.spec.input_bounds[i].min;
                    hi[o + i] = self.spec.input_bounds[i].max;
                }
            }
        }
        (lo, hi)
    }

    fn constraint_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let m = self.num_constraints();
        let mut lo = vec![0.0; m];
        let hi = vec![0.0; m];
        for v in lo.iter_mut().skip(self.obstacle_row0()) {
            *v = f64::NEG_INFINITY;
        }
        (lo, hi)
    }

    fn objective(&self, w: &[f64]) -> f64 {
        let dt = self.spec.dt();
        let wts = &self.spec.weights;
        (0..self.n())
            .map(|k| {
                let u = self.control(w, k);
                let f0 = cost_to_go(&self.state(w, k), &u, wts);
                let f1 = cost_to_go(&self.state(w, k + 1), &u, wts);
                0.5 * dt * (f0 + f1)
            })
            .sum()
    }

    fn objective_gradient(&self, w: &[f64], grad: &mut [f64]) -> f64 {
        grad.fill(0.0);
        let h = 0.5 * self.spec.dt();
        let wts = &self.spec.weights;
        let mut acc = 0.0;
        for k in 0..self.n() {
            let u = self.control(w, k);
            let ou = self.control_offset(k);
            for j in [k, k + 1] {
                let (f, gx, gu) = cost_to_go_grad(&self.state(w, j), &u, wts);
                acc += h * f;
                let o = self.state_offset(j);
                for i in 0..NX {
                    grad[o + i] += h * gx[i];
                }
                for i in 0..NU {
                    grad[ou + i] += h * gu[i];
                }
            }
        }
        acc
    }

    fn constraints(&self, w: &[f64], g: &mut [f64]) {
        let dt = self.spec.dt();
        for k in 0..self.n() {
            let next = vessel::rk4_flow(&self.state(w, k), &self.control(w, k), &self.vessel, dt, self.spec.substeps);
            let target = self.state(w, k + 1);
            for i in 0..NX {
                g[NX * k + i] = next[i] - target[i];
            }
        }
        self.boundary_residuals(w, g);
        self.obstacle_residuals(w, g);
    }

    fn jacobian_structure(&self) -> Vec<(usize, usize)> {
        let mut s = Vec::new();
        for k in 0..self.n() {
            for i in 0..NX {
                let row = NX * k + i;
                s.extend((0..STRIDE).map(|j| (row, self.state_offset(k) + j)));
                s.push((row, self.state_offset(k + 1) + i));
            }
        }
        let r0 = self.continuity_rows();
        s.extend((0..NX).map(|i| (r0 + i, i)));
        let on = self.state_offset(self.n());
        s.extend((0..self.goal_rows).map(|i| (r0 + NX + i, on + i)));
        let mut row = self.obstacle_row0();
        for k in 0..=self.n() {
            for _ in &self.spec.obstacles {
                s.push((row, self.state_offset(k)));
                s.push((row, self.state_offset(k) + 1));
                row += 1;
            }
        }
        s
    }

    fn constraints_jacobian(&self, w: &[f64], g: &mut [f64], values: &mut [f64]) {
        let dt = self.spec.dt();
        let mut v = 0;
        for k in 0..self.n() {
            let (next, sens) = vessel::rk4_flow_with_sensitivity(
                &self.state(w, k),
                &self.control(w, k),
                &self.vessel,
                dt,
                self.spec.substeps,
            );
            let target = self.state(w, k + 1);
            for i in 0..NX {
                g[NX * k + i] = next[i] - target[i];
                values[v..v + STRIDE].copy_from_slice(&sens[i]);
                values[v + STRIDE] = -1.0;
                v += STRIDE + 1;
            }
        }
        self.boundary_residuals(w, g);
        for _ in 0..NX + self.goal_rows {
            values[v] = 1.0;
            v += 1;
        }
        self.obstacle_residuals(w, g);
        for k in 0..=self.n() {
            let x = self.state(w, k);
            for c in &self.spec.obstacles {
                let r2 = c.radius * c.radius;
                values[v] = -2.0 * (x[0] - c.center.x) / r2;
                values[v + 1] = -2.0 * (x[1] - c.center.y) / r2;
                v += 2;
            }
        }
    }

    /// One block per stage `(x_k, u_k)`. The final state joins the last
    /// stage because the terminal cost term uses `u_{N-1}`.
    fn hessian_blocks(&self) -> Vec<Range<usize>> {
        let n = self.n();
        let mut blocks: Vec<Range<usize>> = (0..n - 1).map(|k| k * STRIDE..(k + 1) * STRIDE).collect();
        blocks.push((n - 1) * STRIDE..self.num_vars());
        blocks
    }

    fn var_scale(&self) -> Vec<f64> {
        let ss = self.state_scale();
        let us = [
            self.spec.input_bounds[0].min.abs().max(self.spec.input_bounds[0].max.abs()).max(1.0),
            self.spec.input_bounds[1].min.abs().max(self.spec.input_bounds[1].max.abs()).max(1.0),
        ];
        let mut d = Vec::with_capacity(self.num_vars());
        for k in 0..=self.n() {
            d.extend_from_slice(&ss);
            if k < self.n() {
                d.extend_from_slice(&us);
            }
        }
        d
    }

    fn constraint_scale(&self) -> Vec<f64> {
        let ss = self.state_scale();
        let mut c = Vec::with_capacity(self.num_constraints());
        for _ in 0..self.n() {
            c.extend(ss.iter().map(|s| 1.0 / s));
        }
        c.extend(ss.iter().map(|s| 1.0 / s));
        c.extend((0..self.goal_rows).map(|i| 1.0 / ss[i]));
        c.resize(self.num_constraints(), 1.0);
        c
    }
}

/// Decision vector holding `traj` (which must have `N + 1` samples). The
/// control of the last sample is not part of the vector.
pub fn pack_warm_start(traj: &TimedTrajectory, problem: &ShootingProblem) -> Result<Vec<f64>> {
    let n = problem.n();
    if traj.len() != n + 1 {
        return Err(Error::Parameter(format!(
            "warm start has {} samples, the transcription needs {}",
            traj.len(),
            n + 1
        )));
    }
    let mut w = Vec::with_capacity(problem.num_vars());
    for k in 0..=n {
        w.extend_from_slice(&traj.state(k));
        if k < n {
            w.extend_from_slice(&traj.ctrl[k]);
        }
    }
    Ok(w)
}

/// Samples of the solution on the shooting grid with recomputed running cost.
pub fn extract_trajectory(sol: &NlpSolution, problem: &ShootingProblem) -> Result<TimedTrajectory> {
    let n = problem.n();
    if sol.w.len() != problem.num_vars() {
        return Err(Error::Parameter("solution does not match the transcription".into()));
    }
    let mut traj = TimedTrajectory {
        t: problem.times(),
        eta: Vec::with_capacity(n + 1),
        nu: Vec::with_capacity(n + 1),
        ctrl: Vec::with_capacity(n + 1),
        cum_cost: Vec::new(),
        origin: TrajectoryOrigin::Solver {
            status: sol.status,
            iterations: sol.iterations,
            max_violation: sol.max_violation,
        },
    };
    for k in 0..=n {
        let x = problem.state(&sol.w, k);
        traj.eta.push([x[0], x[1], x[2]]);
        traj.nu.push([x[3], x[4], x[5]]);
        traj.ctrl.push(problem.control(&sol.w, k));
    }
    traj.cum_cost = propagate_cost_heun(&traj, &problem.spec.weights)?;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn spec(n: usize, obstacles: Vec<Circle>) -> OcpSpec {
        let v = VesselParams::default();
        OcpSpec::new(
            6.0 * n as f64,
            n,
            CostWeights::default(),
            State::new([0.0, 0.0, 0.0], [5.0, 0.0, 0.0]),
            GoalSpec {
                position: Point2::new(300.0, 0.0),
                heading: 0.0,
                velocity: None,
            },
            obstacles,
            Some(Rect::new(Point2::new(-500.0, -500.0), Point2::new(500.0, 500.0)).unwrap()),
            &v,
        )
        .unwrap()
    }

    #[test]
    fn layout_dimension() {
        let p = transcribe(&spec(2, vec![]), &VesselParams::default()).unwrap();
        assert_eq!(p.num_vars(), 22);
        assert_eq!(p.num_constraints(), 12 + 6 + 3);
        let (lo, hi) = p.constraint_bounds();
        assert!(lo.iter().zip(&hi).all(|(l, h)| l <= h));
    }

    #[test]
    fn rollout_satisfies_continuity() {
        let vessel = VesselParams::default();
        let sp = spec(10, vec![]);
        let p = transcribe(&sp, &vessel).unwrap();
        let mut w = vec![0.0; p.num_vars()];
        let mut x = sp.start.to_array();
        for k in 0..=10 {
            w[p.state_offset(k)..p.state_offset(k) + NX].copy_from_slice(&x);
            if k < 10 {
                let u = [2000.0 + 100.0 * k as f64, 50.0 * (k as f64 - 5.0)];
                w[p.control_offset(k)..p.control_offset(k) + NU].copy_from_slice(&u);
                x = vessel::rk4_flow(&x, &u, &vessel, sp.dt(), sp.substeps);
            }
        }
        let mut g = vec![0.0; p.num_constraints()];
        p.constraints(&w, &mut g);
        assert!(g[..60].iter().all(|v| v.abs() <= 1e-10), "{:?}", &g[..60]);
        // Start rows vanish because node 0 is the start state.
        assert!(g[60..66].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn goal_rows_vanish_at_goal() {
        let p = transcribe(&spec(3, vec![]), &VesselParams::default()).unwrap();
        let mut w = vec![0.0; p.num_vars()];
        let o = p.state_offset(3);
        w[o] = 300.0;
        w[o + 2] = 2.0 * std::f64::consts::PI;
        let mut g = vec![0.0; p.num_constraints()];
        p.constraints(&w, &mut g);
        let rg = 18 + 6;
        assert_eq!(g[rg], 0.0);
        assert_eq!(g[rg + 1], 0.0);
        assert!(g[rg + 2].abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_central_differences() {
        let circles = vec![
            Circle {
                center: Point2::new(100.0, 30.0),
                radius: 40.0,
            },
            Circle {
                center: Point2::new(200.0, -20.0),
                radius: 25.0,
            },
        ];
        let p = transcribe(&spec(4, circles), &VesselParams::default()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let n = p.num_vars();
        let m = p.num_constraints();
        let structure = p.jacobian_structure();
        let scale = p.var_scale();
        for _ in 0..10 {
            let w: Vec<f64> = scale.iter().map(|s| s * rng.random_range(-0.8..0.8)).collect();
            let mut grad = vec![0.0; n];
            p.objective_gradient(&w, &mut grad);
            let mut g = vec![0.0; m];
            let mut vals = vec![0.0; structure.len()];
            p.constraints_jacobian(&w, &mut g, &mut vals);
            let mut dense = vec![vec![0.0; n]; m];
            for (k, &(r, c)) in structure.iter().enumerate() {
                dense[r][c] += vals[k];
            }
            let cscale = p.constraint_scale();
            // Compared in scaled units, relative to the larger magnitude with
            // a floor of 1e-3 of the largest scaled gradient entry.
            let gmax = grad.iter().zip(&scale).map(|(g, d)| (g * d).abs()).fold(0.0, f64::max);
            for j in 0..n {
                let h = 1e-6 * scale[j];
                let (mut wp, mut wm) = (w.clone(), w.clone());
                wp[j] += h;
                wm[j] -= h;
                let fd = (p.objective(&wp) - p.objective(&wm)) / (2.0 * h) * scale[j];
                let an = grad[j] * scale[j];
                assert!((fd - an).abs() <= 1e-5 * fd.abs().max(an.abs()).max(1e-3 * gmax), "grad {j}: {fd} vs {an}");
                let (mut gp, mut gm) = (vec![0.0; m], vec![0.0; m]);
                p.constraints(&wp, &mut gp);
                p.constraints(&wm, &mut gm);
                for r in 0..m {
                    let fd = (gp[r] - gm[r]) / (2.0 * h) * scale[j] * cscale[r];
                    let an = dense[r][j] * scale[j] * cscale[r];
                    assert!((fd - an).abs() <= 1e-5 * fd.abs().max(an.abs()).max(1.0), "J[{r}][{j}]: {fd} vs {an}");
                }
            }
        }
    }

    fn straight_warm_start(sp: &OcpSpec) -> TimedTrajectory {
        use crate::refine::{assign_time, build_warm_start, GeometricPath, PathElement};
        let gp = GeometricPath::new(vec![PathElement::Line {
            a: Point2::new(0.0, 0.0),
            b: sp.goal.position,
        }])
        .unwrap();
        let samples = assign_time(&gp, 300.0 / sp.t_max, sp.intervals).unwrap();
        build_warm_start(&samples, &VesselParams::default(), &sp.weights).unwrap()
    }

    fn solution_of(w: Vec<f64>, objective: f64) -> NlpSolution {
        NlpSolution {
            w,
            objective,
            multipliers: vec![],
            iterations: 0,
            outer_iterations: 0,
            status: crate::ocp::SolveStatus::Converged,
            max_violation: 0.0,
            optimality: 0.0,
            penalty: 1.0,
        }
    }

    #[test]
    fn pack_then_extract_is_identity() {
        let sp = spec(10, vec![]);
        let p = transcribe(&sp, &VesselParams::default()).unwrap();
        let ws = straight_warm_start(&sp);
        let w = pack_warm_start(&ws, &p).unwrap();
        let back = extract_trajectory(&solution_of(w.clone(), p.objective(&w)), &p).unwrap();
        assert_eq!(back.eta, ws.eta);
        assert_eq!(back.nu, ws.nu);
        assert_eq!(back.ctrl, ws.ctrl);
        assert_eq!(back.cum_cost, ws.cum_cost);
        assert_eq!(back.t, ws.t);
    }

    #[test]
    fn extracted_cost_equals_objective() {
        let sp = spec(10, vec![]);
        let vessel = VesselParams::default();
        let p = transcribe(&sp, &vessel).unwrap();
        let w0 = pack_warm_start(&straight_warm_start(&sp), &p).unwrap();
        let sol = crate::ocp::solve_nlp(&p, &w0, &crate::ocp::SolverOptions::default()).unwrap();
        assert_eq!(sol.status, crate::ocp::SolveStatus::Converged);
        let traj = extract_trajectory(&sol, &p).unwrap();
        assert!((traj.total_cost() - sol.objective).abs() <= 1e-8 * sol.objective.abs());
        let last = traj.eta[traj.len() - 1];
        // Position scale is 10 m, so the scaled tolerance is 1e-5 m.
        assert!((last[0] - 300.0).hypot(last[1]) <= 1e-5, "{last:?}");
    }
}
