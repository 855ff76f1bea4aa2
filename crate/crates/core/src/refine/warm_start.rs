use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ocp::{cost_to_go, CostWeights, SolveStatus};
use crate::vessel::{self, VesselParams};

use super::TimedSamples;

/// Where a trajectory came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum TrajectoryOrigin {
    WarmStart,
    /// Read back from a file that does not record the origin.
    Imported,
    Solver {
        status: SolveStatus,
        iterations: usize,
        max_violation: f64,
    },
}

/// States, controls and accumulated cost on a uniform time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedTrajectory {
    pub t: Vec<f64>,
    pub eta: Vec<[f64; 3]>,
    pub nu: Vec<[f64; 3]>,
    /// `[X, N]`; the control at the last sample repeats the one before it.
    pub ctrl: Vec<[f64; 2]>,
    pub cum_cost: Vec<f64>,
    pub origin: TrajectoryOrigin,
}

impl TimedTrajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn dt(&self) -> f64 {
        (self.t[self.t.len() - 1] - self.t[0]) / (self.t.len() - 1) as f64
    }

    pub fn total_cost(&self) -> f64 {
        *self.cum_cost.last().unwrap_or(&0.0)
    }

    pub fn state(&self, k: usize) -> [f64; 6] {
        let (e, n) = (self.eta[k], self.nu[k]);
        [e[0], e[1], e[2], n[0], n[1], n[2]]
    }

    /// Array lengths agree, at least two samples, uniform time step.
    pub fn validate(&self) -> Result<()> {
        let n = self.t.len();
        if n < 2 {
            return Err(Error::Parameter(format!("a trajectory needs at least 2 samples, got {n}")));
        }
        if [self.eta.len(), self.nu.len(), self.ctrl.len(), self.cum_cost.len()]
            .iter()
            .any(|&l| l != n)
        {
            return Err(Error::Parameter("trajectory arrays differ in length".into()));
        }
        uniform_step(&self.t).map(|_| ())
    }

    /// Largest position distance between the sampled points and `other`'s.
    pub fn max_position_deviation(&self, other: &TimedTrajectory) -> f64 {
        self.eta
            .iter()
            .zip(&other.eta)
            .map(|(a, b)| (a[0] - b[0]).hypot(a[1] - b[1]))
            .fold(0.0, f64::max)
    }
}

/// The common step of a uniform grid.
fn uniform_step(t: &[f64]) -> Result<f64> {
    let dt = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
    if !(dt > 0.0) {
        return Err(Error::Parameter("sample times must be strictly increasing".into()));
    }
    if let Some(k) = t.windows(2).position(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1.0)) {
        return Err(Error::Parameter(format!(
            "time grid is not uniform at sample {k}: step {} vs {dt}",
            t[k + 1] - t[k]
        )));
    }
    Ok(dt)
}

/// Running trapezoid sums: `out[0] = 0`, `out[k+1] = out[k] + dt/2 (f[k] + f[k+1])`.
pub fn trapezoid_cumulative(f: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(f.len());
    let mut acc = 0.0;
    out.push(acc);
    for w in f.windows(2) {
        acc += 0.5 * dt * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Accumulated cost evaluated only at the existing samples (improved Euler
/// on the cost integral). Each interval holds its starting control, so the
/// end-of-interval term pairs the next state with `ctrl[k]`.
pub fn propagate_cost_heun(traj: &TimedTrajectory, weights: &CostWeights) -> Result<Vec<f64>> {
    if traj.len() < 2 {
        return Err(Error::Parameter("need at least 2 samples".into()));
    }
    let dt = uniform_step(&traj.t)?;
    let mut out = Vec::with_capacity(traj.len());
    let mut acc = 0.0;
    out.push(acc);
    for k in 0..traj.len() - 1 {
        let u = &traj.ctrl[k];
        let f0 = cost_to_go(&traj.state(k), u, weights);
        let f1 = cost_to_go(&traj.state(k + 1), u, weights);
        acc += 0.5 * dt * (f0 + f1);
        out.push(acc);
    }
    Ok(out)
}

/// Central differences inside, one-sided at the ends.
fn differentiate(x: &[f64], dt: f64) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|k| match k {
            0 => (x[1] - x[0]) / dt,
            k if k == n - 1 => (x[k] - x[k - 1]) / dt,
            k => (x[k + 1] - x[k - 1]) / (2.0 * dt),
        })
        .collect()
}

/// Dynamically annotated initial guess from time-stamped path samples:
/// constant surge at the sample speed, no sway, yaw rate and accelerations
/// by finite differences, and forces from the surge and yaw rows of the
/// inverse dynamics.
pub fn build_warm_start(
    samples: &TimedSamples,
    vessel: &VesselParams,
    weights: &CostWeights,
) -> Result<TimedTrajectory> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::Parameter(format!(
            "a warm start needs at least 2 samples, got {n}"
        )));
    }
    let dt = uniform_step(&samples.t)?;
    let r = differentiate(&samples.heading, dt);
    let r_dot = differentiate(&r, dt);
    let eta: Vec<[f64; 3]> = samples
        .position
        .iter()
        .zip(&samples.heading)
        .map(|(p, &psi)| [p.x, p.y, psi])
        .collect();
    let nu: Vec<[f64; 3]> = r.iter().map(|&r| [samples.speed, 0.0, r]).collect();
    let mut ctrl: Vec<[f64; 2]> = nu
        .iter()
        .zip(&r_dot)
        .map(|(v, &rd)| {
            let tau = vessel::inverse_dynamics(vessel, &Vector3::from(*v), &Vector3::new(0.0, 0.0, rd));
            [tau[0], tau[2]]
        })
        .collect();
    // Zero-order hold: the final sample carries the last interval's control.
    ctrl[n - 1] = ctrl[n - 2];
    let mut traj = TimedTrajectory {
        t: samples.t.clone(),
        eta,
        nu,
        ctrl,
        cum_cost: vec![0.0; n],
        origin: TrajectoryOrigin::WarmStart,
    };
    traj.cum_cost = propagate_cost_heun(&traj, weights)?;
    Ok(traj)
}
