//! Fixed-altitude lawnmower coverage over a polygonal region, split among
//! several drones by contiguous groups of sweep rows.

use crate::geo::{GeoError, LocalPoint, Origin};
use crate::refine::{DronePath, Waypoint};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("invalid roi: {0}")]
    InvalidRoi(String),
    #[error("roi too small for a single sweep row")]
    PlanEmpty,
    #[error("only {rows} sweep rows for {drones} drones")]
    TooFewRows { rows: usize, drones: usize },
    #[error("invalid plan parameter `{key}`: {reason}")]
    InvalidConfig { key: &'static str, reason: String },
    #[error(transparent)]
    Geo(#[from] GeoError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub hfov_deg: f64,
    pub vfov_deg: f64,
    pub image_width_px: u32,
    pub image_height_px: u32,
}

impl Default for CameraModel {
    fn default() -> Self {
        CameraModel { hfov_deg: 73.7, vfov_deg: 53.1, image_width_px: 4000, image_height_px: 3000 }
    }
}

impl CameraModel {
    pub fn validate(&self) -> Result<(), PlanError> {
        for (key, v) in [("hfov_deg", self.hfov_deg), ("vfov_deg", self.vfov_deg)] {
            if !(v > 0.0 && v < 180.0) {
                return Err(PlanError::InvalidConfig { key, reason: format!("{v} outside (0, 180)") });
            }
        }
        for (key, v) in [("image_width_px", self.image_width_px), ("image_height_px", self.image_height_px)] {
            if v == 0 {
                return Err(PlanError::InvalidConfig { key, reason: "must be positive".into() });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanConfig {
    /// Flight altitude above the origin datum (m).
    pub altitude: f64,
    /// Overlap between adjacent rows, in [0, 1).
    pub sidelap: f64,
    /// Overlap between consecutive captures, in [0, 1).
    pub frontlap: f64,
    pub n_drones: usize,
    /// Simple polygon in local metres (x east, y north).
    pub roi: Vec<[f64; 2]>,
}

impl PlanConfig {
    pub fn validate(&self) -> Result<(), PlanError> {
        if !(self.altitude.is_finite() && self.altitude > 0.0) {
            return Err(PlanError::InvalidConfig { key: "altitude", reason: "must be finite and > 0".into() });
        }
        for (key, v) in [("sidelap", self.sidelap), ("frontlap", self.frontlap)] {
            if !(0.0..1.0).contains(&v) {
                return Err(PlanError::InvalidConfig { key, reason: format!("{v} outside [0, 1)") });
            }
        }
        if self.n_drones == 0 {
            return Err(PlanError::InvalidConfig { key: "n_drones", reason: "must be at least 1".into() });
        }
        validate_polygon(&self.roi)
    }
}

/// Ground footprint `(width, height)` of a nadir image taken at `altitude`.
pub fn footprint(altitude: f64, cam: &CameraModel) -> Result<(f64, f64), PlanError> {
    if !(altitude.is_finite() && altitude > 0.0) {
        return Err(PlanError::InvalidConfig { key: "altitude", reason: format!("{altitude} must be > 0") });
    }
    cam.validate()?;
    let extent = |fov: f64| 2.0 * altitude * (fov.to_radians() / 2.0).tan();
    Ok((extent(cam.hfov_deg), extent(cam.vfov_deg)))
}

fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
        / 2.0
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn on_segment(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

fn segments_touch(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let (o1, o2, o3, o4) = (orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b));
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0)) && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0)) {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

/// Checks the region is a finite, simple polygon with positive area.
pub fn validate_polygon(poly: &[[f64; 2]]) -> Result<(), PlanError> {
    if poly.len() < 3 {
        return Err(PlanError::InvalidRoi(format!("needs at least 3 vertices, got {}", poly.len())));
    }
    if poly.iter().flatten().any(|v| !v.is_finite()) {
        return Err(PlanError::InvalidRoi("non-finite vertex".into()));
    }
    if polygon_area(poly).abs() <= 1e-9 {
        return Err(PlanError::InvalidRoi("zero area".into()));
    }
    let n = poly.len();
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if segments_touch(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]) {
                return Err(PlanError::InvalidRoi(format!("edges {i} and {j} intersect")));
            }
        }
    }
    Ok(())
}

/// One sweep row: the covered intervals along it and their capture stations.
#[derive(Debug, Clone)]
struct Row {
    coord: f64,
    stations: Vec<Vec<f64>>,
    length: f64,
}

fn scanline(poly: &[[f64; 2]], y: f64) -> Vec<(f64, f64)> {
    let n = poly.len();
    let mut xs: Vec<f64> = (0..n)
        .filter_map(|i| {
            let (p, q) = (poly[i], poly[(i + 1) % n]);
            if (p[1] > y) != (q[1] > y) {
                Some(p[0] + (y - p[1]) * (q[0] - p[0]) / (q[1] - p[1]))
            } else {
                None
            }
        })
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.chunks_exact(2).map(|c| (c[0], c[1])).collect()
}

fn stations(a: f64, b: f64, spacing: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut j = 0u64;
    loop {
        let s = a + j as f64 * spacing;
        if s > b + 1e-9 {
            break;
        }
        out.push(s.min(b));
        j += 1;
    }
    if b - out.last().copied().unwrap_or(a) > 1e-9 {
        out.push(b);
    }
    out
}

/// Contiguous split of `weights` into `k` groups minimising the heaviest group.
/// Returns the group sizes.
fn linear_partition(weights: &[f64], k: usize) -> Vec<usize> {
    let n = weights.len();
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + weights[i];
    }
    // cost[g][i]: best max-group weight for the first i rows in g groups.
    let mut cost = vec![vec![f64::INFINITY; n + 1]; k + 1];
    let mut split = vec![vec![0usize; n + 1]; k + 1];
    cost[0][0] = 0.0;
    for g in 1..=k {
        for i in g..=n {
            for j in (g - 1)..i {
                let c = cost[g - 1][j].max(prefix[i] - prefix[j]);
                if c < cost[g][i] - 1e-12 {
                    cost[g][i] = c;
                    split[g][i] = j;
                }
            }
        }
    }
    let mut sizes = vec![0; k];
    let mut i = n;
    for g in (1..=k).rev() {
        let j = split[g][i];
        sizes[g - 1] = i - j;
        i = j;
    }
    sizes
}

/// Plans serpentine sweeps over `cfg.roi` and assigns contiguous rows to drones.
///
/// Rows run along the longer side of the region's bounding box, spaced by
/// `footprint_width * (1 - sidelap)`; captures along a row are spaced by
/// `footprint_height * (1 - frontlap)`, with the interval end always included.
pub fn boustrophedon(cfg: &PlanConfig, cam: &CameraModel, origin: &Origin) -> Result<Vec<DronePath>, PlanError> {
    cfg.validate()?;
    let (width, height) = footprint(cfg.altitude, cam)?;
    let row_spacing = width * (1.0 - cfg.sidelap);
    let capture_spacing = height * (1.0 - cfg.frontlap);

    let (min_x, max_x) =
        cfg.roi.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p[0]), hi.max(p[0])));
    let (min_y, max_y) =
        cfg.roi.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p[1]), hi.max(p[1])));
    // Sweep along x when the region is wider than tall, otherwise transpose.
    let transposed = (max_y - min_y) > (max_x - min_x);
    let poly: Vec<[f64; 2]> = if transposed { cfg.roi.iter().map(|p| [p[1], p[0]]).collect() } else { cfg.roi.clone() };
    let (lo, hi) = if transposed { (min_x, max_x) } else { (min_y, max_y) };

    let extent = hi - lo;
    let mut coords: Vec<f64> =
        (0..=((extent / row_spacing) + 1e-9).floor() as u64).map(|i| lo + i as f64 * row_spacing).collect();
    if hi - coords.last().copied().unwrap_or(lo) > 1e-6 * row_spacing {
        coords.push(hi);
    }
    let eps = 1e-9 * extent.max(1.0);
    let rows: Vec<Row> = coords
        .into_iter()
        .filter_map(|c| {
            let intervals: Vec<(f64, f64)> =
                scanline(&poly, c.clamp(lo + eps, hi - eps)).into_iter().filter(|(a, b)| b - a > 1e-9).collect();
            if intervals.is_empty() {
                return None;
            }
            let length = intervals.iter().map(|(a, b)| b - a).sum();
            let stations = intervals.iter().map(|&(a, b)| stations(a, b, capture_spacing)).collect();
            Some(Row { coord: c, stations, length })
        })
        .collect();
    if rows.is_empty() {
        return Err(PlanError::PlanEmpty);
    }
    if rows.len() < cfg.n_drones {
        return Err(PlanError::TooFewRows { rows: rows.len(), drones: cfg.n_drones });
    }

    let weights: Vec<f64> = rows.iter().map(|r| r.length).collect();
    let sizes = linear_partition(&weights, cfg.n_drones);
    let mut paths = Vec::with_capacity(cfg.n_drones);
    let mut start = 0;
    for (d, size) in sizes.into_iter().enumerate() {
        let mut waypoints = Vec::new();
        for (k, row) in rows[start..start + size].iter().enumerate() {
            let forward = k % 2 == 0;
            let mut along: Vec<f64> = row.stations.iter().flatten().copied().collect();
            if !forward {
                along.reverse();
            }
            for s in along {
                let (x, y) = if transposed { (row.coord, s) } else { (s, row.coord) };
                waypoints.push(Waypoint::from_local(origin, LocalPoint::new(x, y, cfg.altitude))?);
            }
        }
        start += size;
        paths.push(DronePath::new(format!("drone-{}", d + 1), waypoints));
    }
    Ok(paths)
}
