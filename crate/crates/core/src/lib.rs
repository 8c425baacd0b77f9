//! Terrain-aware refinement of drone survey missions.
//!
//! A fixed-altitude lawnmower plan is lifted onto a prior point cloud of the
//! site: every waypoint keeps a constant height above the local surface,
//! extra waypoints are inserted where the surface changes height, and each
//! waypoint gets a gimbal orientation aimed at nearby relief.

pub mod camera;
pub mod eval;
pub mod geo;
pub mod missionio;
pub mod planner;
pub mod pointcloud;
pub mod refine;

pub use camera::{annotate_angles, AnnotationWarning, CameraConfig, CameraError, GimbalAngles};
pub use eval::{CoverageReport, EvalError, SceneKind, SceneSpec, VisibilityConfig};
pub use geo::{GeoError, GeoPoint, LocalPoint, Origin};
pub use missionio::{read_config, read_paths, write_mission, Config, ConfigError, MissionError};
pub use planner::{boustrophedon, CameraModel, PlanConfig, PlanError};
pub use pointcloud::{load_cloud, CloudError, CloudFormat, PointCloud, PointSet, SpatialIndex};
pub use refine::{adjust_path, densify, lateral_standoff, DronePath, RefineConfig, RefineError, Waypoint};
