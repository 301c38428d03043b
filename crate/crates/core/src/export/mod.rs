//! Serialization: versioned JSON, replayable trajectory CSV and SVG figures.

mod json;
mod svg;
mod trajectory;

pub use json::{to_json, to_json_pretty, Versioned, SCHEMA_VERSION};
pub use svg::{render_trajectory, render_unfolding, SvgStyle, UnfoldingFigure};
pub use trajectory::{
    read_trajectory, replay_trajectory, trajectory_csv, write_trajectory, TrajectoryRow,
    TRAJECTORY_HEADER,
};
