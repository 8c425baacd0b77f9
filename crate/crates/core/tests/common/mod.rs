//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use relief_core::camera::CameraConfig;
use relief_core::{LocalPoint, PointCloud, RefineConfig};

fn dist3(a: &LocalPoint, b: &LocalPoint) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2) + (a.z - b.z).powi(2)).sqrt()
}

fn dist2(a: &LocalPoint, x: f64, y: f64) -> f64 {
    ((a.x - x).powi(2) + (a.y - y).powi(2)).sqrt()
}

pub fn disk(points: &[LocalPoint], x: f64, y: f64, r: f64) -> Vec<usize> {
    (0..points.len()).filter(|&i| dist2(&points[i], x, y) <= r).collect()
}

pub fn sphere(points: &[LocalPoint], c: &LocalPoint, r: f64) -> Vec<usize> {
    (0..points.len()).filter(|&i| dist3(&points[i], c) <= r).collect()
}

pub fn nearest_distance(points: &[LocalPoint], q: &LocalPoint) -> f64 {
    points.iter().map(|p| dist3(p, q)).fold(f64::INFINITY, f64::min)
}

fn mean_z(points: &[LocalPoint], ids: &[usize]) -> f64 {
    ids.iter().map(|&i| points[i].z).sum::<f64>() / ids.len() as f64
}

/// Terrain column found by trying every tolerance in turn.
pub struct Column {
    pub tolerance: f64,
    pub indices: Vec<usize>,
    pub mean_z: f64,
}

pub fn column(points: &[LocalPoint], x: f64, y: f64, cfg: &RefineConfig) -> Option<Column> {
    for k in 0u64.. {
        let tolerance = cfg.tol0 + k as f64 * cfg.dtol;
        if tolerance > cfg.tol_max {
            return None;
        }
        let indices = disk(points, x, y, tolerance);
        if !indices.is_empty() {
            let mean_z = mean_z(points, &indices);
            return Some(Column { tolerance, indices, mean_z });
        }
    }
    unreachable!()
}

/// View target found by growing the sphere one increment at a time.
pub struct Target {
    pub index: usize,
    pub radius: f64,
    pub mean_z: f64,
}

pub fn below(points: &[LocalPoint], at: &LocalPoint, r: f64) -> Vec<usize> {
    sphere(points, at, r).into_iter().filter(|&i| points[i].z < at.z).collect()
}

pub fn target(points: &[LocalPoint], at: &LocalPoint, cfg: &CameraConfig) -> Option<Target> {
    for k in 0u64.. {
        let radius = cfg.r0 + k as f64 * cfg.dr;
        if radius > cfg.r_max {
            return None;
        }
        let h = below(points, at, radius);
        if h.is_empty() {
            continue;
        }
        let mean = mean_z(points, &h);
        let mut best = h[0];
        for &i in &h[1..] {
            let (p, q) = (&points[i], &points[best]);
            let key = |p: &LocalPoint| ((p.z - mean).abs(), dist3(p, at), p.x, p.y, p.z);
            if key(p).partial_cmp(&key(q)) == Some(std::cmp::Ordering::Less) {
                best = i;
            }
        }
        return Some(Target { index: best, radius, mean_z: mean });
    }
    unreachable!()
}

pub fn random_cloud(rng: &mut impl Rng, n: usize, extent: f64) -> PointCloud {
    // A coarse lattice makes exact ties and coincident points likely.
    let lattice = rng.random_bool(0.3);
    let pts = (0..n)
        .map(|_| {
            let mut c = || {
                let v = rng.random_range(-extent..extent);
                if lattice {
                    (v * 2.0).round() / 2.0
                } else {
                    v
                }
            };
            LocalPoint::new(c(), c(), c() * 0.3)
        })
        .collect();
    PointCloud::new(pts).unwrap()
}
