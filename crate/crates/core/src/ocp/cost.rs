//! Running cost: weighted actuator work plus an L1-like turn-rate penalty.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vessel::{ControlVec, StateVec, NU, NX};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostWeights {
    /// Weight on actuator work `|X u| + |N r|`.
    pub k_e: f64,
    /// Weight on the turn-rate penalty.
    pub k_t: f64,
    /// Smoothing width of the absolute value in the work term (W).
    #[serde(default = "default_eps")]
    pub eps_e: f64,
    /// Smoothing width of the turn-rate penalty (rad/s).
    #[serde(default = "default_eps")]
    pub eps_t: f64,
}

fn default_eps() -> f64 {
    1e-3
}

impl Default for CostWeights {
    fn default() -> Self {
        Self {
            k_e: 1.0,
            k_t: 1e5,
            eps_e: 1e-3,
            eps_t: 1e-3,
        }
    }
}

impl CostWeights {
    pub fn new(k_e: f64, k_t: f64) -> Result<Self> {
        Self {
            k_e,
            k_t,
            ..Self::default()
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !(ok(self.k_e) && ok(self.k_t)) {
            return Err(Error::Parameter(format!(
                "cost weights must be positive, got K_e = {}, K_t = {}",
                self.k_e, self.k_t
            )));
        }
        if !(ok(self.eps_e) && ok(self.eps_t)) {
            return Err(Error::Parameter("smoothing widths must be positive".into()));
        }
        Ok(self)
    }

    /// Both weights multiplied by `factor`.
    pub fn scaled(self, factor: f64) -> Self {
        Self {
            k_e: self.k_e * factor,
            k_t: self.k_t * factor,
            ..self
        }
    }
}

/// `sqrt(a^2 + eps^2) - eps` and its derivative.
fn smooth_abs(a: f64, eps: f64) -> (f64, f64) {
    let s = a.hypot(eps);
    // a^2 / (s + eps) avoids cancellation for |a| << eps.
    (a * a / (s + eps), a / s)
}

/// `K_e F_e + K_t F_t` at one sample.
pub fn cost_to_go(x: &StateVec, u: &ControlVec, w: &CostWeights) -> f64 {
    let (work_u, _) = smooth_abs(u[0] * x[3], w.eps_e);
    let (work_r, _) = smooth_abs(u[1] * x[5], w.eps_e);
    let (turn, _) = smooth_abs(x[5], w.eps_t);
    w.k_e * (work_u + work_r) + w.k_t * turn
}

/// Value and gradients `(dF/dx, dF/du)`.
pub fn cost_to_go_grad(x: &StateVec, u: &ControlVec, w: &CostWeights) -> (f64, [f64; NX], [f64; NU]) {
    let (work_u, dwu) = smooth_abs(u[0] * x[3], w.eps_e);
    let (work_r, dwr) = smooth_abs(u[1] * x[5], w.eps_e);
    let (turn, dt) = smooth_abs(x[5], w.eps_t);
    let mut gx = [0.0; NX];
    gx[3] = w.k_e * dwu * u[0];
    gx[5] = w.k_e * dwr * u[1] + w.k_t * dt;
    let gu = [w.k_e * dwu * x[3], w.k_e * dwr * x[5]];
    (w.k_e * (work_u + work_r) + w.k_t * turn, gx, gu)
}
