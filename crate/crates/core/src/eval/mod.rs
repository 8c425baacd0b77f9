//! Reconstruction-style metrics, an observation proxy and synthetic scenes.

mod metrics;
mod scene;
mod visibility;

pub use metrics::{c2c_against, c2c_distances, coverage_metrics, f1_score, format_table, CoverageReport};
pub use scene::{generate_scene, SceneKind, SceneSpec};
pub use visibility::{
    estimate_normals, is_vertical, surface_coverage, visible_points, SurfaceCoverage, VisibilityConfig,
    NORMAL_NEIGHBOURS, VERTICAL_NORMAL_Z,
};

use crate::pointcloud::CloudError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{0} point cloud is empty")]
    EmptyCloud(&'static str),
    #[error("at least one distance threshold is required")]
    NoThresholds,
    #[error("threshold {0} must be finite and >= 0")]
    InvalidThreshold(f64),
    #[error("viewpoint {index} has no gimbal angles")]
    Unannotated { index: usize },
    #[error("cloud has {points} points, normal estimation needs at least {needed}")]
    TooSparse { points: usize, needed: usize },
    #[error("unknown scene kind `{0}` (expected one of plane, ramp, box-on-plane, pile, staircase)")]
    UnknownScene(String),
    #[error("invalid `{key}`: {reason}")]
    InvalidConfig { key: &'static str, reason: String },
    #[error(transparent)]
    Cloud(#[from] CloudError),
}
