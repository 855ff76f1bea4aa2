use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geom::PolygonMap;
use crate::io::{scene_svg, states_svg, write_trajectory_csv, Scene};

use super::PipelineOutput;

/// Paths of the files written by [`emit_artifacts`].
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub trajectory_csv: PathBuf,
    pub report_json: PathBuf,
    pub scene_svg: PathBuf,
    pub states_svg: PathBuf,
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `trajectory.csv`, `report.json`, `scene.svg` and `states.svg`
/// into `out_dir`, creating it if needed.
pub fn emit_artifacts(out: &PipelineOutput, map: &PolygonMap, out_dir: impl AsRef<Path>) -> Result<Artifacts> {
    let dir = out_dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = Artifacts {
        trajectory_csv: dir.join("trajectory.csv"),
        report_json: dir.join("report.json"),
        scene_svg: dir.join("scene.svg"),
        states_svg: dir.join("states.svg"),
    };
    write_trajectory_csv(&out.trajectory, &files.trajectory_csv)?;
    let json = serde_json::to_string_pretty(&out.report).expect("report fields are finite");
    write(&files.report_json, &(json + "\n"))?;
    let spacing = (0.002 * map.bounds().diagonal()).max(1e-3);
    let refined = out.smooth_path.sample(spacing);
    let scene = Scene {
        map,
        roadmap: Some(&out.roadmap),
        raw_path: Some(&out.raw_path),
        refined: Some(&refined),
        trajectory: Some(&out.trajectory),
    };
    write(&files.scene_svg, &scene_svg(&scene))?;
    write(&files.states_svg, &states_svg(&out.trajectory))?;
    Ok(files)
}
