//! Trajectory dump: one header line, then one row per sample with columns
//! `t,x,y,psi,u,v,r,X,N,cum_cost` in `{:.16e}` notation (17 significant
//! digits, enough to read every `f64` back exactly).

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::refine::{TimedTrajectory, TrajectoryOrigin};

pub const CSV_HEADER: &str = "t,x,y,psi,u,v,r,X,N,cum_cost";

pub fn format_trajectory_csv(traj: &TimedTrajectory) -> String {
    let mut out = String::with_capacity(220 * (traj.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for k in 0..traj.len() {
        let (e, n, c) = (traj.eta[k], traj.nu[k], traj.ctrl[k]);
        let row = [traj.t[k], e[0], e[1], e[2], n[0], n[1], n[2], c[0], c[1], traj.cum_cost[k]];
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v:.16e}");
        }
        out.push('\n');
    }
    out
}

pub fn write_trajectory_csv(traj: &TimedTrajectory, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_trajectory_csv(traj)).map_err(|e| Error::io(path, e))
}

/// Reads a dump back. The file does not record where the trajectory came
/// from, so the result is tagged [`TrajectoryOrigin::Imported`].
pub fn parse_trajectory_csv(text: &str, origin: &str) -> Result<TimedTrajectory> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_string(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(err(1, format!("expected header `{CSV_HEADER}`"))),
    }
    let mut traj = TimedTrajectory {
        t: Vec::new(),
        eta: Vec::new(),
        nu: Vec::new(),
        ctrl: Vec::new(),
        cum_cost: Vec::new(),
        origin: TrajectoryOrigin::Imported,
    };
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let v: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| err(i + 1, e.to_string()))?;
        if v.len() != 10 {
            return Err(err(i + 1, format!("expected 10 columns, found {}", v.len())));
        }
        traj.t.push(v[0]);
        traj.eta.push([v[1], v[2], v[3]]);
        traj.nu.push([v[4], v[5], v[6]]);
        traj.ctrl.push([v[7], v[8]]);
        traj.cum_cost.push(v[9]);
    }
    Ok(traj)
}

pub fn read_trajectory_csv(path: impl AsRef<Path>) -> Result<TimedTrajectory> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trajectory_csv(&text, &path.display().to_string())
}
