//! Observation proxy: a truth point counts as seen when some annotated
//! viewpoint has it inside the image frustum, within range, not blocked by the
//! voxelised truth surface, and (optionally) not at a grazing angle.

use super::EvalError;
use crate::geo::LocalPoint;
use crate::planner::CameraModel;
use crate::pointcloud::{PointCloud, PointSet, SpatialIndex};
use crate::refine::Waypoint;
use nalgebra::{Matrix3, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Neighbourhood size for normal estimation.
pub const NORMAL_NEIGHBOURS: usize = 16;
/// A point whose normal has |n_z| below this lies on a vertical surface.
pub const VERTICAL_NORMAL_Z: f64 = 0.5;
const MAX_GRID_CELLS: usize = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisibilityConfig {
    pub camera: CameraModel,
    /// Farthest observable distance (m).
    pub max_range: f64,
    /// Edge of the occlusion voxels (m).
    pub voxel: f64,
    /// Occupied voxels entered within this distance of the target do not block it (m).
    pub occlusion_slack: f64,
    /// Largest angle between the sight ray and the surface normal that still
    /// counts as observed; `None` ignores surface orientation.
    pub max_incidence_deg: Option<f64>,
}

impl Default for VisibilityConfig {
    fn default() -> Self {
        let voxel = 0.5;
        VisibilityConfig {
            camera: CameraModel::default(),
            max_range: 200.0,
            voxel,
            occlusion_slack: voxel * 3f64.sqrt(),
            max_incidence_deg: Some(60.0),
        }
    }
}

impl VisibilityConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        let bad = |key: &'static str, reason: String| Err(EvalError::InvalidConfig { key, reason });
        for (key, v) in
            [("max_range", self.max_range), ("voxel", self.voxel), ("occlusion_slack", self.occlusion_slack)]
        {
            if !(v.is_finite() && v > 0.0) {
                return bad(key, format!("{v} must be finite and > 0"));
            }
        }
        if let Some(a) = self.max_incidence_deg {
            if !(a > 0.0 && a <= 90.0) {
                return bad("max_incidence_deg", format!("{a} outside (0, 90]"));
            }
        }
        self.camera.validate().or_else(|e| bad("camera", e.to_string()))
    }
}

/// Unit normals from the best-fit plane of each point's neighbourhood,
/// oriented with non-negative z.
pub fn estimate_normals(index: &SpatialIndex) -> Result<Vec<[f64; 3]>, EvalError> {
    let n = index.len();
    if n < NORMAL_NEIGHBOURS {
        return Err(EvalError::TooSparse { points: n, needed: NORMAL_NEIGHBOURS });
    }
    let pts = index.cloud().points();
    Ok(pts
        .par_iter()
        .map(|p| {
            let nb = index.k_nearest(p, NORMAL_NEIGHBOURS);
            let k = nb.len() as f64;
            let mut mean = [0.0; 3];
            for &i in &nb {
                let q = pts[i].to_array();
                for a in 0..3 {
                    mean[a] += q[a];
                }
            }
            mean.iter_mut().for_each(|m| *m /= k);
            let mut cov = Matrix3::<f64>::zeros();
            for &i in &nb {
                let q = pts[i].to_array();
                let d = [q[0] - mean[0], q[1] - mean[1], q[2] - mean[2]];
                for r in 0..3 {
                    for c in 0..3 {
                        cov[(r, c)] += d[r] * d[c];
                    }
                }
            }
            let eig = SymmetricEigen::new(cov);
            let smallest =
                (0..3).min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b])).expect("three eigenvalues");
            let v = eig.eigenvectors.column(smallest);
            let s = if v[2] < 0.0 { -1.0 } else { 1.0 };
            [s * v[0], s * v[1], s * v[2]]
        })
        .collect())
}

pub fn is_vertical(normal: &[f64; 3]) -> bool {
    normal[2].abs() < VERTICAL_NORMAL_Z
}

struct OccupancyGrid {
    min: [f64; 3],
    voxel: f64,
    dims: [usize; 3],
    bits: Vec<u64>,
}

impl OccupancyGrid {
    fn build(points: &[LocalPoint], voxel: f64) -> Result<Self, EvalError> {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in points {
            for (a, v) in p.to_array().into_iter().enumerate() {
                lo[a] = lo[a].min(v);
                hi[a] = hi[a].max(v);
            }
        }
        // Half a voxel of margin puts points on axis-aligned planes mid-cell.
        let min = lo.map(|v| v - 0.5 * voxel);
        let mut dims = [0usize; 3];
        for a in 0..3 {
            dims[a] = ((hi[a] - min[a]) / voxel).floor() as usize + 1;
        }
        let cells = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
        let cells = match cells {
            Some(c) if c <= MAX_GRID_CELLS => c,
            _ => {
                return Err(EvalError::InvalidConfig {
                    key: "voxel",
                    reason: format!("{voxel} m voxels over this cloud exceed the grid size limit"),
                })
            }
        };
        let mut grid = OccupancyGrid { min, voxel, dims, bits: vec![0; cells.div_ceil(64)] };
        for p in points {
            let i = grid.cell_of(&p.to_array());
            let flat = grid.flat(i);
            grid.bits[flat / 64] |= 1 << (flat % 64);
        }
        Ok(grid)
    }

    fn cell_of(&self, q: &[f64; 3]) -> [usize; 3] {
        let mut i = [0; 3];
        for a in 0..3 {
            let c = ((q[a] - self.min[a]) / self.voxel).floor();
            i[a] = (c.max(0.0) as usize).min(self.dims[a] - 1);
        }
        i
    }

    fn flat(&self, i: [usize; 3]) -> usize {
        (i[2] * self.dims[1] + i[1]) * self.dims[0] + i[0]
    }

    fn occupied(&self, i: [usize; 3]) -> bool {
        let f = self.flat(i);
        self.bits[f / 64] >> (f % 64) & 1 == 1
    }

    /// Whether the segment `from -> to` enters an occupied voxel at a distance
    /// from `from` smaller than `|to - from| - slack`.
    fn blocked(&self, from: &[f64; 3], to: &[f64; 3], slack: f64) -> bool {
        let d = [to[0] - from[0], to[1] - from[1], to[2] - from[2]];
        let len = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        let limit = len - slack;
        if limit <= 0.0 {
            return false;
        }
        let u = d.map(|c| c / len);
        let max: [f64; 3] = std::array::from_fn(|a| self.min[a] + self.dims[a] as f64 * self.voxel);
        let (mut t0, mut t1) = (0.0f64, limit);
        for a in 0..3 {
            if u[a] == 0.0 {
                if from[a] < self.min[a] || from[a] > max[a] {
                    return false;
                }
            } else {
                let ta = (self.min[a] - from[a]) / u[a];
                let tb = (max[a] - from[a]) / u[a];
                t0 = t0.max(ta.min(tb));
                t1 = t1.min(ta.max(tb));
            }
        }
        if t0 >= t1 {
            return false;
        }
        let start: [f64; 3] = std::array::from_fn(|a| from[a] + u[a] * t0);
        let mut idx = self.cell_of(&start);
        let mut t_next = [f64::INFINITY; 3];
        let mut t_delta = [f64::INFINITY; 3];
        for a in 0..3 {
            if u[a] > 0.0 {
                t_next[a] = (self.min[a] + (idx[a] + 1) as f64 * self.voxel - from[a]) / u[a];
                t_delta[a] = self.voxel / u[a];
            } else if u[a] < 0.0 {
                t_next[a] = (self.min[a] + idx[a] as f64 * self.voxel - from[a]) / u[a];
                t_delta[a] = -self.voxel / u[a];
            }
        }
        loop {
            if self.occupied(idx) {
                return true;
            }
            let a = if t_next[0] <= t_next[1] && t_next[0] <= t_next[2] {
                0
            } else if t_next[1] <= t_next[2] {
                1
            } else {
                2
            };
            if t_next[a] >= t1 {
                return false;
            }
            if u[a] > 0.0 {
                if idx[a] + 1 >= self.dims[a] {
                    return false;
                }
                idx[a] += 1;
            } else {
                if idx[a] == 0 {
                    return false;
                }
                idx[a] -= 1;
            }
            t_next[a] += t_delta[a];
        }
    }
}

struct Frustum {
    eye: [f64; 3],
    forward: [f64; 3],
    right: [f64; 3],
    up: [f64; 3],
    tan_h: f64,
    tan_v: f64,
}

impl Frustum {
    fn contains(&self, p: &[f64; 3], max_range: f64) -> Option<[f64; 3]> {
        let v = [p[0] - self.eye[0], p[1] - self.eye[1], p[2] - self.eye[2]];
        let dot = |a: &[f64; 3]| v[0] * a[0] + v[1] * a[1] + v[2] * a[2];
        let depth = dot(&self.forward);
        if depth <= 0.0 || dot(&v) > max_range * max_range {
            return None;
        }
        if dot(&self.right).abs() > depth * self.tan_h || dot(&self.up).abs() > depth * self.tan_v {
            return None;
        }
        Some(v)
    }
}

fn frusta(viewpoints: &[Waypoint], camera: &CameraModel) -> Result<Vec<Frustum>, EvalError> {
    viewpoints
        .iter()
        .enumerate()
        .map(|(i, wp)| {
            let g = wp.gimbal.ok_or(EvalError::Unannotated { index: i })?;
            let forward = g.direction();
            let yaw = g.yaw_deg.to_radians();
            let right = [yaw.cos(), -yaw.sin(), 0.0];
            let up = [
                right[1] * forward[2] - right[2] * forward[1],
                right[2] * forward[0] - right[0] * forward[2],
                right[0] * forward[1] - right[1] * forward[0],
            ];
            Ok(Frustum {
                eye: wp.local.to_array(),
                forward,
                right,
                up,
                tan_h: (camera.hfov_deg.to_radians() / 2.0).tan(),
                tan_v: (camera.vfov_deg.to_radians() / 2.0).tan(),
            })
        })
        .collect()
}

fn visibility_mask(
    viewpoints: &[Waypoint],
    truth: &PointCloud,
    normals: Option<&[[f64; 3]]>,
    cfg: &VisibilityConfig,
) -> Result<Vec<bool>, EvalError> {
    cfg.validate()?;
    if truth.is_empty() {
        return Err(EvalError::EmptyCloud("truth"));
    }
    let views = frusta(viewpoints, &cfg.camera)?;
    let grid = OccupancyGrid::build(truth.points(), cfg.voxel)?;
    let min_cos = cfg.max_incidence_deg.map(|a| a.to_radians().cos());
    Ok(truth
        .points()
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let p = p.to_array();
            views.iter().any(|f| {
                let Some(v) = f.contains(&p, cfg.max_range) else {
                    return false;
                };
                if let (Some(min_cos), Some(normals)) = (min_cos, normals) {
                    let n = normals[i];
                    let len = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                    if ((v[0] * n[0] + v[1] * n[1] + v[2] * n[2]) / len).abs() < min_cos {
                        return false;
                    }
                }
                !grid.blocked(&f.eye, &p, cfg.occlusion_slack)
            })
        })
        .collect())
}

/// Truth points observed by at least one viewpoint.
pub fn visible_points(
    viewpoints: &[Waypoint],
    truth: &PointCloud,
    cfg: &VisibilityConfig,
) -> Result<PointSet, EvalError> {
    let normals = match cfg.max_incidence_deg {
        Some(_) => Some(estimate_normals(&SpatialIndex::build(truth.clone())?)?),
        None => None,
    };
    let mask = visibility_mask(viewpoints, truth, normals.as_deref(), cfg)?;
    let ids = mask.iter().enumerate().filter(|(_, &v)| v).map(|(i, _)| i).collect();
    Ok(PointSet::from_indices(ids, truth))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceCoverage {
    /// Observed share of vertical-surface points; `None` when there are none.
    pub vertical_fraction: Option<f64>,
    pub horizontal_fraction: Option<f64>,
    pub vertical_points: usize,
    pub horizontal_points: usize,
    pub visible_points: usize,
}

impl SurfaceCoverage {
    pub fn total_fraction(&self) -> f64 {
        self.visible_points as f64 / (self.vertical_points + self.horizontal_points) as f64
    }
}

/// Observed fractions of vertical and horizontal truth surface.
pub fn surface_coverage(
    viewpoints: &[Waypoint],
    truth: &PointCloud,
    cfg: &VisibilityConfig,
) -> Result<SurfaceCoverage, EvalError> {
    let normals = estimate_normals(&SpatialIndex::build(truth.clone())?)?;
    let mask = visibility_mask(viewpoints, truth, Some(&normals), cfg)?;
    let (mut nv, mut nh, mut sv, mut sh) = (0usize, 0usize, 0usize, 0usize);
    for (n, &seen) in normals.iter().zip(&mask) {
        if is_vertical(n) {
            nv += 1;
            sv += seen as usize;
        } else {
            nh += 1;
            sh += seen as usize;
        }
    }
    let frac = |s: usize, n: usize| (n > 0).then(|| s as f64 / n as f64);
    Ok(SurfaceCoverage {
        vertical_fraction: frac(sv, nv),
        horizontal_fraction: frac(sh, nh),
        vertical_points: nv,
        horizontal_points: nh,
        visible_points: sv + sh,
    })
}
