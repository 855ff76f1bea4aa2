//! Step 3: optimal control problem, multiple-shooting transcription and
//! the nonlinear programming solver.

mod circles;
mod cost;
mod shooting;
mod solver;

use serde::{Deserialize, Serialize};

pub use circles::{obstacle_constraints, smallest_enclosing_circle, Circle, CircleCovering};
pub use cost::{cost_to_go, cost_to_go_grad, CostWeights};
pub use shooting::{extract_trajectory, pack_warm_start, transcribe, GoalSpec, OcpSpec, ShootingProblem};
pub use solver::{solve_nlp, NlpProblem, NlpSolution, SolverOptions};

/// How a solve ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    TimeLimit,
}
