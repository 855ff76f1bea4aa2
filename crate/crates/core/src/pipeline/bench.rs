use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::PolygonMap;

use super::{build_roadmap, emit_artifacts, run_pipeline, Method, PlannerConfig, Pose, RunReport};

/// One benchmark run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchCase {
    pub name: String,
    #[serde(default)]
    pub config: PlannerConfig,
    /// Replace `delta_d` by the grid spacing whose node count is within 5%
    /// of the named (earlier) case's.
    #[serde(default)]
    pub match_nodes_of: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub name: String,
    pub method: Method,
    pub delta_d: f64,
    pub report: Option<RunReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchTable {
    pub rows: Vec<BenchRow>,
}

/// A benchmark file: start and goal poses plus `[[case]]` tables.
///
/// ```toml
/// start = { x = 300.0, y = 2250.0, psi = 0.0 }
/// goal = { x = 4700.0, y = 2250.0, psi = 0.0 }
///
/// [[case]]
/// name = "R1"
/// config = { method = "voronoi", delta_d = 100.0 }
///
/// [[case]]
/// name = "R3"
/// config = { method = "uniform" }
/// match_nodes_of = "R1"
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSpec {
    pub start: Pose,
    pub goal: Pose,
    #[serde(rename = "case")]
    pub cases: Vec<BenchCase>,
}

impl BenchSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for case in &spec.cases {
            case.config
                .validate()
                .map_err(|e| Error::Config(format!("case `{}`: {e}", case.name)))?;
        }
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Bisection on `delta_d` for a roadmap of `method` whose node count is
/// within `rel_tol` of `target`. Node counts fall as the spacing grows.
pub fn match_node_count(
    map: &PolygonMap,
    method: Method,
    target: usize,
    mut lo: f64,
    mut hi: f64,
    rel_tol: f64,
) -> Result<(f64, usize)> {
    let count = |d: f64| build_roadmap(map, method, d).map(|g| g.node_count());
    let close = |n: usize| (n as f64 - target as f64).abs() <= rel_tol * target as f64;
    let (mut n_lo, n_hi) = (count(lo)?, count(hi)?);
    if n_lo < target || n_hi > target {
        return Err(Error::Parameter(format!(
            "spacings {lo} and {hi} give {n_lo} and {n_hi} nodes, which do not bracket {target}"
        )));
    }
    for (d, n) in [(lo, n_lo), (hi, n_hi)] {
        if close(n) {
            return Ok((d, n));
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let n = count(mid)?;
        if close(n) {
            return Ok((mid, n));
        }
        if n > target {
            lo = mid;
            n_lo = n;
        } else {
            hi = mid;
        }
    }
    Err(Error::Parameter(format!(
        "no spacing in [{lo}, {hi}] matches {target} nodes (closest above: {n_lo})"
    )))
}

/// Runs every case in order on one map. A failing case keeps its row with
/// the error text. With `out_dir`, each run's artifacts go to
/// `out_dir/<case name>/`.
pub fn run_benchmark(
    map: &PolygonMap,
    start: Pose,
    goal: Pose,
    cases: &[BenchCase],
    out_dir: Option<&Path>,
) -> Result<BenchTable> {
    if cases.len() < 2 {
        return Err(Error::Config(format!("a benchmark needs at least 2 cases, got {}", cases.len())));
    }
    let mut rows: Vec<BenchRow> = Vec::with_capacity(cases.len());
    for case in cases {
        let mut cfg = case.config.clone();
        if let Some(reference) = &case.match_nodes_of {
            let target = rows
                .iter()
                .find(|r| &r.name == reference)
                .and_then(|r| r.report.as_ref())
                .map(|r| r.node_count)
                .ok_or_else(|| {
                    Error::Config(format!("case `{}` matches `{reference}`, which has no result", case.name))
                })?;
            let planning = map.clone().with_safety_margin(map.safety_margin().max(cfg.safety_margin))?;
            let extent = map.bounds().width().max(map.bounds().height());
            let (d, n) = match_node_count(&planning, cfg.method, target, 1e-3 * extent, 0.5 * extent, 0.05)?;
            log::info!("case {}: delta_d {d:.2} gives {n} nodes (target {target})", case.name);
            cfg.delta_d = d;
        }
        let row = match run_pipeline(map, start, goal, &cfg) {
            Ok(out) => {
                if let Some(dir) = out_dir {
                    emit_artifacts(&out, map, dir.join(&case.name))?;
                }
                BenchRow {
                    name: case.name.clone(),
                    method: cfg.method,
                    delta_d: cfg.delta_d,
                    report: Some(out.report),
                    error: None,
                }
            }
            Err(e) => BenchRow {
                name: case.name.clone(),
                method: cfg.method,
                delta_d: cfg.delta_d,
                report: None,
                error: Some(e.to_string()),
            },
        };
        rows.push(row);
    }
    Ok(BenchTable { rows })
}

impl BenchTable {
    pub fn row(&self, name: &str) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    /// Markdown table with one column per case.
    pub fn to_markdown(&self) -> String {
        let mut s = String::from("|");
        for r in &self.rows {
            let _ = write!(s, " | {}", r.name);
        }
        s.push_str(" |\n|---");
        for _ in &self.rows {
            s.push_str("|---:");
        }
        s.push_str("|\n");
        fn with_report(r: &BenchRow, f: impl Fn(&RunReport) -> String) -> String {
            r.report.as_ref().map_or_else(|| "-".into(), f)
        }
        type Cell = fn(&BenchRow) -> String;
        let lines: [(&str, Cell); 12] = [
            ("Method", |r| format!("{:?}", r.method).to_lowercase()),
            ("Δd (m)", |r| format!("{:.1}", r.delta_d)),
            ("Roadmap nodes", |r| with_report(r, |p| p.node_count.to_string())),
            ("Energy cost", |r| with_report(r, |p| format!("{:.4e}", p.objective))),
            ("Warm-start cost", |r| with_report(r, |p| format!("{:.4e}", p.warm_start_cost))),
            ("Run time total (s)", |r| with_report(r, |p| format!("{:.2}", p.times.total))),
            ("Step 1 (s)", |r| with_report(r, |p| format!("{:.3}", p.times.step1))),
            ("Step 2 (s)", |r| with_report(r, |p| format!("{:.3}", p.times.step2))),
            ("Step 3 (s)", |r| with_report(r, |p| format!("{:.2}", p.times.step3))),
            ("Step 3 iterations", |r| with_report(r, |p| p.iterations.to_string())),
            ("Path length (m)", |r| with_report(r, |p| format!("{:.1}", p.smooth_length))),
            ("Status", |r| match (&r.report, &r.error) {
                (Some(p), _) => format!("{:?}", p.status),
                (None, e) => format!("failed: {}", e.as_deref().unwrap_or("unknown error")),
            }),
        ];
        for (label, cell) in lines {
            let _ = write!(s, "| {label}");
            for r in &self.rows {
                let _ = write!(s, " | {}", cell(r));
            }
            s.push_str(" |\n");
        }
        s.push_str(
            "\nStart and goal join every roadmap node within 3 Δd that they can see \
             (nearest visible node otherwise); this attachment rule is our own choice.\n",
        );
        s
    }
}
