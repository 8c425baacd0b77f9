//! Gimbal orientation from a downward hemisphere search.
//!
//! For each waypoint a sphere of radius `r0, r0 + dr, ...` is grown until it
//! holds at least one cloud point strictly below the waypoint. Among those
//! points the one whose height is closest to their mean height becomes the view
//! target, and yaw/pitch aim the camera at it.

use crate::geo::LocalPoint;
use crate::pointcloud::{CloudError, PointSet, SpatialIndex};
use crate::refine::{DronePath, Waypoint};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CameraError {
    #[error("no point below ({x:.3}, {y:.3}, {z:.3}) within {r_max} m")]
    NoTargetFound { x: f64, y: f64, z: f64, r_max: f64 },
    #[error("invalid camera parameter `{key}`: {reason}")]
    InvalidConfig { key: &'static str, reason: String },
    #[error(transparent)]
    Cloud(#[from] CloudError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraConfig {
    /// Initial hemisphere radius (m).
    pub r0: f64,
    /// Radius increment (m).
    pub dr: f64,
    /// Largest radius tried (m).
    pub r_max: f64,
    /// Below this horizontal offset the target counts as straight down and yaw
    /// follows the path instead.
    pub eps_horizontal: f64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        CameraConfig { r0: 1.0, dr: 1.0, r_max: 200.0, eps_horizontal: 1e-6 }
    }
}

impl CameraConfig {
    pub fn validate(&self) -> Result<(), CameraError> {
        for (key, value) in [("r0", self.r0), ("dr", self.dr), ("r_max", self.r_max)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(CameraError::InvalidConfig { key, reason: format!("{value} must be finite and > 0") });
            }
        }
        if !(self.eps_horizontal.is_finite() && self.eps_horizontal >= 0.0) {
            return Err(CameraError::InvalidConfig { key: "eps_horizontal", reason: "must be finite and >= 0".into() });
        }
        if self.r0 > self.r_max {
            return Err(CameraError::InvalidConfig { key: "r_max", reason: "must be >= r0".into() });
        }
        Ok(())
    }

    fn radius(&self, k: u64) -> f64 {
        self.r0 + k as f64 * self.dr
    }
}

/// Camera orientation. Yaw is clockwise from north in (-180, 180]; pitch is 0
/// at the horizon and -90 straight down.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GimbalAngles {
    pub yaw_deg: f64,
    pub pitch_deg: f64,
}

impl GimbalAngles {
    pub fn is_valid(&self) -> bool {
        self.yaw_deg > -180.0 && self.yaw_deg <= 180.0 && (-90.0..=0.0).contains(&self.pitch_deg)
    }

    /// Unit view direction in east-north-up.
    pub fn direction(&self) -> [f64; 3] {
        let (yaw, pitch) = (self.yaw_deg.to_radians(), self.pitch_deg.to_radians());
        [pitch.cos() * yaw.sin(), pitch.cos() * yaw.cos(), pitch.sin()]
    }
}

/// A chosen view target together with the search state that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewTarget {
    pub point: LocalPoint,
    pub index: usize,
    /// Radius at which the below-hemisphere first became non-empty.
    pub radius: f64,
    /// Every cloud point in that hemisphere, ascending by index.
    pub hemisphere: PointSet,
}

/// Finds the view target for a camera at `at`.
pub fn hemisphere_target(at: &LocalPoint, index: &SpatialIndex, cfg: &CameraConfig) -> Result<ViewTarget, CameraError> {
    let no_target = || CameraError::NoTargetFound { x: at.x, y: at.y, z: at.z, r_max: cfg.r_max };
    let (_, nearest) = index.nearest_below(at).ok_or_else(no_target)?;
    if nearest > cfg.r_max {
        return Err(no_target());
    }
    let mut k = if nearest <= cfg.r0 { 0 } else { ((nearest - cfg.r0) / cfg.dr).ceil() as u64 };
    while k > 0 && cfg.radius(k - 1) >= nearest {
        k -= 1;
    }
    while cfg.radius(k) < nearest {
        k += 1;
    }
    let radius = cfg.radius(k);
    if radius > cfg.r_max {
        return Err(no_target());
    }
    let mut hemisphere = index.query_sphere(at, radius)?;
    hemisphere.retain(|p| p.z < at.z);
    let mean = hemisphere.mean_z().expect("nearest below-point lies inside the sphere");

    let score = |p: &LocalPoint| ((p.z - mean).abs(), p.distance(at));
    let (best, _) = hemisphere
        .points
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            let (sa, sb) = (score(a), score(b));
            sa.0.total_cmp(&sb.0)
                .then(sa.1.total_cmp(&sb.1))
                .then(a.x.total_cmp(&b.x))
                .then(a.y.total_cmp(&b.y))
                .then(a.z.total_cmp(&b.z))
        })
        .expect("hemisphere is non-empty");
    Ok(ViewTarget { point: hemisphere.points[best], index: hemisphere.indices[best], radius, hemisphere })
}

fn bearing_deg(dx: f64, dy: f64) -> f64 {
    let yaw = dx.atan2(dy).to_degrees();
    if yaw <= -180.0 {
        yaw + 360.0
    } else {
        yaw
    }
}

/// Heading from `at` toward `target`, clockwise from north.
///
/// When the target is within `eps_horizontal` of straight down the heading
/// toward `next` is used instead, or 0 if there is none.
pub fn compute_yaw(at: &LocalPoint, target: &LocalPoint, next: Option<&LocalPoint>, cfg: &CameraConfig) -> f64 {
    let (dx, dy) = (target.x - at.x, target.y - at.y);
    if dx.hypot(dy) >= cfg.eps_horizontal && (dx != 0.0 || dy != 0.0) {
        return bearing_deg(dx, dy);
    }
    match next {
        Some(n) => {
            let (nx, ny) = (n.x - at.x, n.y - at.y);
            if nx.hypot(ny) >= cfg.eps_horizontal && (nx != 0.0 || ny != 0.0) {
                bearing_deg(nx, ny)
            } else {
                0.0
            }
        }
        None => 0.0,
    }
}

/// Depression angle from `at` to a target below it, in [-90, 0).
pub fn compute_pitch(at: &LocalPoint, target: &LocalPoint) -> f64 {
    let horizontal = at.horizontal_distance(target);
    -(at.z - target.z).atan2(horizontal).to_degrees()
}

/// A waypoint that fell back to a nadir view.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationWarning {
    pub drone_id: String,
    pub waypoint: usize,
    pub position: LocalPoint,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Annotated {
    pub paths: Vec<DronePath>,
    pub warnings: Vec<AnnotationWarning>,
}

fn angles_for(
    wp: &Waypoint,
    next: Option<&Waypoint>,
    index: &SpatialIndex,
    cfg: &CameraConfig,
) -> Result<GimbalAngles, (GimbalAngles, CameraError)> {
    let next = next.map(|n| &n.local);
    match hemisphere_target(&wp.local, index, cfg) {
        Ok(target) => Ok(GimbalAngles {
            yaw_deg: compute_yaw(&wp.local, &target.point, next, cfg),
            pitch_deg: compute_pitch(&wp.local, &target.point),
        }),
        Err(e) => {
            let nadir = GimbalAngles { yaw_deg: compute_yaw(&wp.local, &wp.local, next, cfg), pitch_deg: -90.0 };
            Err((nadir, e))
        }
    }
}

/// Gives every waypoint gimbal angles. Waypoints without a target look straight
/// down and are reported as warnings.
pub fn annotate_angles(paths: &[DronePath], index: &SpatialIndex, cfg: &CameraConfig) -> Annotated {
    let mut warnings = Vec::new();
    let paths = paths
        .iter()
        .map(|path| {
            let wps = &path.waypoints;
            let results: Vec<_> =
                (0..wps.len()).into_par_iter().map(|i| angles_for(&wps[i], wps.get(i + 1), index, cfg)).collect();
            let waypoints = wps
                .iter()
                .zip(results)
                .enumerate()
                .map(|(i, (wp, r))| {
                    let gimbal = match r {
                        Ok(a) => a,
                        Err((a, e)) => {
                            warnings.push(AnnotationWarning {
                                drone_id: path.drone_id.clone(),
                                waypoint: i,
                                position: wp.local,
                                message: e.to_string(),
                            });
                            a
                        }
                    };
                    Waypoint { gimbal: Some(gimbal), ..wp.clone() }
                })
                .collect();
            DronePath { drone_id: path.drone_id.clone(), waypoints }
        })
        .collect();
    Annotated { paths, warnings }
}
