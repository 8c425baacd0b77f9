//! Terrain-following path refinement.
//!
//! Each waypoint's altitude is set from the terrain column beneath it: the
//! points whose horizontal distance to the waypoint is within a tolerance that
//! starts at `tol0` and grows by `dtol` until the column is non-empty. Paths are
//! then densified wherever the terrain-following altitude drifts by more than
//! `delta_z` from the last emitted waypoint, and optionally pushed away from
//! structures at flight height.

use crate::camera::GimbalAngles;
use crate::geo::{GeoError, GeoPoint, LocalPoint, Origin};
use crate::pointcloud::{CloudError, PointSet, SpatialIndex};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RefineError {
    #[error(
        "no terrain within {tol_max} m of ({x:.3}, {y:.3}){}",
        location.as_ref().map(|l| format!(" at {l}")).unwrap_or_default()
    )]
    NoTerrainFound { x: f64, y: f64, tol_max: f64, location: Option<WaypointRef> },
    #[error("could not clear {x_offset} m lateral standoff around ({x:.3}, {y:.3}, {z:.3})")]
    StandoffUnresolved { x: f64, y: f64, z: f64, x_offset: f64 },
    #[error("invalid refine parameter `{key}`: {reason}")]
    InvalidConfig { key: &'static str, reason: String },
    #[error("path `{0}` has no waypoints")]
    EmptyPath(String),
    #[error(transparent)]
    Geo(#[from] GeoError),
    #[error(transparent)]
    Cloud(#[from] CloudError),
}

/// Identifies a waypoint within a mission for error reporting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WaypointRef {
    pub drone_id: String,
    pub index: usize,
}

impl std::fmt::Display for WaypointRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "drone `{}` waypoint {}", self.drone_id, self.index)
    }
}

/// Tunables for altitude adjustment, densification and lateral standoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefineConfig {
    /// Initial horizontal search tolerance (m).
    pub tol0: f64,
    /// Tolerance increment per expansion (m).
    pub dtol: f64,
    /// Largest tolerance tried before giving up (m).
    pub tol_max: f64,
    /// Height kept above the terrain column mean (m).
    pub z_offset: f64,
    /// Horizontal clearance from structures at flight height (m); 0 disables.
    pub x_offset: f64,
    /// Sampling stride along path segments during densification (m).
    pub step: f64,
    /// Altitude change that triggers an inserted waypoint (m).
    pub delta_z: f64,
    /// Half-height of the vertical slab checked for lateral standoff (m).
    pub standoff_band: f64,
}

impl RefineConfig {
    pub fn with_z_offset(z_offset: f64) -> Self {
        RefineConfig {
            tol0: 0.5,
            dtol: 0.5,
            tol_max: 50.0,
            z_offset,
            x_offset: 0.0,
            step: 1.0,
            delta_z: 2.0,
            standoff_band: 2.0,
        }
    }

    pub fn validate(&self) -> Result<(), RefineError> {
        let fields = [
            ("tol0", self.tol0, true),
            ("dtol", self.dtol, true),
            ("tol_max", self.tol_max, true),
            ("z_offset", self.z_offset, false),
            ("x_offset", self.x_offset, false),
            ("step", self.step, true),
            ("delta_z", self.delta_z, true),
            ("standoff_band", self.standoff_band, false),
        ];
        for (key, value, strictly_positive) in fields {
            let ok = value.is_finite() && if strictly_positive { value > 0.0 } else { value >= 0.0 };
            if !ok {
                let bound = if strictly_positive { "> 0" } else { ">= 0" };
                return Err(RefineError::InvalidConfig { key, reason: format!("{value} is not finite and {bound}") });
            }
        }
        if self.tol0 > self.tol_max {
            return Err(RefineError::InvalidConfig { key: "tol_max", reason: "must be >= tol0".into() });
        }
        Ok(())
    }

    fn tolerance(&self, k: u64) -> f64 {
        self.tol0 + k as f64 * self.dtol
    }
}

/// A commanded position. `local` always mirrors `position` in the mission frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Waypoint {
    pub position: GeoPoint,
    pub local: LocalPoint,
    pub gimbal: Option<GimbalAngles>,
    /// Created by densification rather than supplied by the planner.
    pub inserted: bool,
    /// Whether an image is taken here.
    pub capture: bool,
}

impl Waypoint {
    pub fn from_local(origin: &Origin, local: LocalPoint) -> Result<Self, GeoError> {
        Ok(Waypoint { position: origin.to_wgs84(&local)?, local, gimbal: None, inserted: false, capture: true })
    }

    pub fn from_geo(origin: &Origin, position: GeoPoint) -> Result<Self, GeoError> {
        Ok(Waypoint { position, local: origin.to_local(&position)?, gimbal: None, inserted: false, capture: true })
    }

    /// Same waypoint moved to `local`, geodetic position re-derived.
    pub fn moved_to(&self, origin: &Origin, local: LocalPoint) -> Result<Self, GeoError> {
        Ok(Waypoint { position: origin.to_wgs84(&local)?, local, ..self.clone() })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DronePath {
    pub drone_id: String,
    pub waypoints: Vec<Waypoint>,
}

impl DronePath {
    pub fn new(drone_id: impl Into<String>, waypoints: Vec<Waypoint>) -> Self {
        DronePath { drone_id: drone_id.into(), waypoints }
    }

    /// Sum of horizontal leg lengths.
    pub fn horizontal_length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| w[0].local.horizontal_distance(&w[1].local)).sum()
    }

    fn locate(&self, index: usize) -> WaypointRef {
        WaypointRef { drone_id: self.drone_id.clone(), index }
    }
}

/// Terrain points beneath a horizontal position and the tolerance that found them.
#[derive(Debug, Clone, PartialEq)]
pub struct TerrainColumn {
    pub tolerance: f64,
    pub points: PointSet,
    pub mean_z: f64,
}

/// First non-empty disk among tolerances `tol0 + k * dtol`, `k = 0, 1, ...`.
///
/// The smallest admissible `k` is read off the nearest horizontal neighbour,
/// which yields the same set as querying every tolerance in turn.
pub fn terrain_column(index: &SpatialIndex, x: f64, y: f64, cfg: &RefineConfig) -> Result<TerrainColumn, RefineError> {
    let (_, nearest) = index.nearest_xy(x, y);
    let no_terrain = || RefineError::NoTerrainFound { x, y, tol_max: cfg.tol_max, location: None };
    if nearest > cfg.tol_max {
        return Err(no_terrain());
    }
    let mut k = if nearest <= cfg.tol0 { 0 } else { ((nearest - cfg.tol0) / cfg.dtol).ceil() as u64 };
    while k > 0 && cfg.tolerance(k - 1) >= nearest {
        k -= 1;
    }
    while cfg.tolerance(k) < nearest {
        if cfg.tolerance(k) > cfg.tol_max {
            return Err(no_terrain());
        }
        k += 1;
    }
    let tolerance = cfg.tolerance(k);
    if tolerance > cfg.tol_max {
        return Err(no_terrain());
    }
    let points = index.query_disk_xy(x, y, tolerance)?;
    let mean_z = points.mean_z().expect("nearest neighbour lies inside the disk");
    Ok(TerrainColumn { tolerance, points, mean_z })
}

/// Sets the waypoint `z_offset` above the mean height of its terrain column.
pub fn adjust_altitude(
    wp: &Waypoint,
    index: &SpatialIndex,
    origin: &Origin,
    cfg: &RefineConfig,
) -> Result<Waypoint, RefineError> {
    let column = terrain_column(index, wp.local.x, wp.local.y, cfg)?;
    let local = LocalPoint::new(wp.local.x, wp.local.y, column.mean_z + cfg.z_offset);
    Ok(wp.moved_to(origin, local)?)
}

fn attach(err: RefineError, at: WaypointRef) -> RefineError {
    match err {
        RefineError::NoTerrainFound { x, y, tol_max, location: None } => {
            RefineError::NoTerrainFound { x, y, tol_max, location: Some(at) }
        }
        other => other,
    }
}

/// Altitude-adjusts every waypoint; count and order are preserved.
pub fn adjust_path(
    path: &DronePath,
    index: &SpatialIndex,
    origin: &Origin,
    cfg: &RefineConfig,
) -> Result<DronePath, RefineError> {
    if path.waypoints.is_empty() {
        return Err(RefineError::EmptyPath(path.drone_id.clone()));
    }
    let results: Vec<Result<Waypoint, RefineError>> =
        path.waypoints.par_iter().map(|wp| adjust_altitude(wp, index, origin, cfg)).collect();
    let mut waypoints = Vec::with_capacity(results.len());
    for (i, r) in results.into_iter().enumerate() {
        waypoints.push(r.map_err(|e| attach(e, path.locate(i)))?);
    }
    Ok(DronePath { drone_id: path.drone_id.clone(), waypoints })
}

/// Inserts waypoints where the terrain-following altitude changes by more than
/// `delta_z` relative to the most recently emitted waypoint.
///
/// Each leg is sampled every `step` metres of horizontal distance (endpoints
/// excluded). Original waypoints are always kept, inserted ones are marked.
pub fn densify(
    path: &DronePath,
    index: &SpatialIndex,
    origin: &Origin,
    cfg: &RefineConfig,
) -> Result<DronePath, RefineError> {
    let Some(first) = path.waypoints.first() else {
        return Err(RefineError::EmptyPath(path.drone_id.clone()));
    };
    let mut out = vec![first.clone()];
    let mut last_alt = first.local.z;
    for (leg, pair) in path.waypoints.windows(2).enumerate() {
        let (a, b) = (&pair[0].local, &pair[1].local);
        let length = a.horizontal_distance(b);
        let mut samples = Vec::new();
        let mut k = 1u64;
        loop {
            let s = k as f64 * cfg.step;
            if s >= length || length - s < 1e-9 {
                break;
            }
            samples.push((a.x + s * (b.x - a.x) / length, a.y + s * (b.y - a.y) / length));
            k += 1;
        }
        let altitudes: Vec<Result<f64, RefineError>> = samples
            .par_iter()
            .map(|&(x, y)| terrain_column(index, x, y, cfg).map(|c| c.mean_z + cfg.z_offset))
            .collect();
        for (&(x, y), alt) in samples.iter().zip(altitudes) {
            let alt = alt.map_err(|e| attach(e, path.locate(leg)))?;
            if (alt - last_alt).abs() > cfg.delta_z {
                let mut wp = Waypoint::from_local(origin, LocalPoint::new(x, y, alt))?;
                wp.inserted = true;
                out.push(wp);
                last_alt = alt;
            }
        }
        out.push(pair[1].clone());
        last_alt = pair[1].local.z;
    }
    Ok(DronePath { drone_id: path.drone_id.clone(), waypoints: out })
}

/// Points within `x_offset` horizontally and `standoff_band` vertically of `at`.
fn standoff_conflicts(index: &SpatialIndex, at: &LocalPoint, cfg: &RefineConfig) -> Result<PointSet, RefineError> {
    let mut set = index.query_disk_xy(at.x, at.y, cfg.x_offset)?;
    set.retain(|p| (p.z - at.z).abs() <= cfg.standoff_band);
    Ok(set)
}

/// Pushes a waypoint horizontally away from structures at its own height.
///
/// While any point lies within `x_offset` horizontally and `standoff_band`
/// vertically, the waypoint steps `dtol` metres away from the centroid of those
/// points. Gives up after `ceil(2 * x_offset / dtol)` steps, or immediately if
/// the centroid sits on the waypoint.
pub fn lateral_standoff(
    wp: &Waypoint,
    index: &SpatialIndex,
    origin: &Origin,
    cfg: &RefineConfig,
) -> Result<Waypoint, RefineError> {
    if cfg.x_offset <= 0.0 {
        return Ok(wp.clone());
    }
    let unresolved =
        || RefineError::StandoffUnresolved { x: wp.local.x, y: wp.local.y, z: wp.local.z, x_offset: cfg.x_offset };
    let max_steps = (2.0 * cfg.x_offset / cfg.dtol).ceil() as usize;
    let mut at = wp.local;
    for taken in 0..=max_steps {
        let conflicts = standoff_conflicts(index, &at, cfg)?;
        if conflicts.is_empty() {
            return if taken == 0 { Ok(wp.clone()) } else { Ok(wp.moved_to(origin, at)?) };
        }
        if taken == max_steps {
            break;
        }
        let n = conflicts.len() as f64;
        let cx = conflicts.points.iter().map(|p| p.x).sum::<f64>() / n;
        let cy = conflicts.points.iter().map(|p| p.y).sum::<f64>() / n;
        let (dx, dy) = (at.x - cx, at.y - cy);
        let norm = dx.hypot(dy);
        if norm < 1e-12 {
            break;
        }
        at.x += cfg.dtol * dx / norm;
        at.y += cfg.dtol * dy / norm;
    }
    Err(unresolved())
}
