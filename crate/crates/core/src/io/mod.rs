//! File formats: map text, trajectory CSV and SVG plots.

mod csv;
mod map_file;
mod svg;

pub use csv::{format_trajectory_csv, parse_trajectory_csv, read_trajectory_csv, write_trajectory_csv, CSV_HEADER};
pub use map_file::{format_map, load_map, parse_map};
pub use svg::{scene_svg, states_svg, Scene};
