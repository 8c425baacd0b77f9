//! Point clouds and the exact spatial queries the refinement stages rely on.

mod io;
mod kdtree;

pub use io::{load_cloud, parse_ply, parse_xyz, write_ply_ascii, write_ply_binary, CloudFormat};

use crate::geo::LocalPoint;
use kdtree::KdTree;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CloudError {
    #[error("point cloud is empty")]
    Empty,
    #[error("search radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("unsupported point cloud format: {0}")]
    UnsupportedFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CloudError {
    pub(crate) fn parse(offset: usize, message: impl Into<String>) -> Self {
        CloudError::Parse { offset, message: message.into() }
    }
}

/// An unordered multiset of finite points in the mission's local frame.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    points: Vec<LocalPoint>,
}

impl PointCloud {
    /// Fails on the first non-finite point.
    pub fn new(points: Vec<LocalPoint>) -> Result<Self, CloudError> {
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(CloudError::parse(0, format!("point {i} has a non-finite coordinate")));
        }
        Ok(PointCloud { points })
    }

    pub fn points(&self) -> &[LocalPoint] {
        &self.points
    }

    pub fn count(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<LocalPoint> {
        self.points
    }
}

/// Result of a range query: ascending indices into the parent cloud together
/// with their coordinates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointSet {
    pub indices: Vec<usize>,
    pub points: Vec<LocalPoint>,
}

impl PointSet {
    fn resolve(mut ids: Vec<u32>, cloud: &PointCloud) -> Self {
        ids.sort_unstable();
        let indices: Vec<usize> = ids.into_iter().map(|i| i as usize).collect();
        let points = indices.iter().map(|&i| cloud.points[i]).collect();
        PointSet { indices, points }
    }

    /// Subset of `cloud` at the given indices, sorted ascending.
    pub fn from_indices(mut indices: Vec<usize>, cloud: &PointCloud) -> Self {
        indices.sort_unstable();
        let points = indices.iter().map(|&i| cloud.points[i]).collect();
        PointSet { indices, points }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Mean z, accumulated in index order.
    pub fn mean_z(&self) -> Option<f64> {
        if self.points.is_empty() {
            return None;
        }
        let sum: f64 = self.points.iter().map(|p| p.z).sum();
        Some(sum / self.points.len() as f64)
    }

    /// Keeps only members for which `keep` holds.
    pub fn retain(&mut self, mut keep: impl FnMut(&LocalPoint) -> bool) {
        let (indices, points) =
            self.indices.iter().zip(&self.points).filter(|(_, p)| keep(p)).map(|(i, p)| (*i, *p)).unzip();
        self.indices = indices;
        self.points = points;
    }
}

/// Immutable KD-tree accelerator over a cloud: one tree over (x, y, z) and one
/// over the (x, y) projection. Safe to share across threads.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    cloud: PointCloud,
    tree3: KdTree<3>,
    tree2: KdTree<2>,
}

fn check_radius(r: f64) -> Result<(), CloudError> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(CloudError::NonPositiveRadius(r))
    }
}

impl SpatialIndex {
    pub fn build(cloud: PointCloud) -> Result<Self, CloudError> {
        if cloud.is_empty() {
            return Err(CloudError::Empty);
        }
        let tree3 = KdTree::build(cloud.points.iter().map(|p| [p.x, p.y, p.z]));
        let tree2 = KdTree::build(cloud.points.iter().map(|p| [p.x, p.y]));
        Ok(SpatialIndex { cloud, tree3, tree2 })
    }

    pub fn cloud(&self) -> &PointCloud {
        &self.cloud
    }

    pub fn len(&self) -> usize {
        self.tree3.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tree3.len() == 0
    }

    /// All points whose horizontal distance to `(x, y)` is at most `tol`,
    /// regardless of z.
    pub fn query_disk_xy(&self, x: f64, y: f64, tol: f64) -> Result<PointSet, CloudError> {
        check_radius(tol)?;
        let mut ids = Vec::new();
        self.tree2.within(&[x, y], tol, &mut ids);
        Ok(PointSet::resolve(ids, &self.cloud))
    }

    /// All points within Euclidean distance `r` of `center`.
    pub fn query_sphere(&self, center: &LocalPoint, r: f64) -> Result<PointSet, CloudError> {
        check_radius(r)?;
        let mut ids = Vec::new();
        self.tree3.within(&center.to_array(), r, &mut ids);
        Ok(PointSet::resolve(ids, &self.cloud))
    }

    /// Smallest horizontal distance from `(x, y)` to any point, with its index.
    pub fn nearest_xy(&self, x: f64, y: f64) -> (usize, f64) {
        let (id, d) = self.tree2.nearest_filtered(&[x, y], |_| true, |_, _| true).expect("index is non-empty");
        (id as usize, d)
    }

    /// Nearest point overall.
    pub fn nearest(&self, p: &LocalPoint) -> (usize, f64) {
        let (id, d) = self.tree3.nearest_filtered(&p.to_array(), |_| true, |_, _| true).expect("index is non-empty");
        (id as usize, d)
    }

    /// Nearest point strictly below `p` (z < p.z), if any.
    pub fn nearest_below(&self, p: &LocalPoint) -> Option<(usize, f64)> {
        let z = p.z;
        self.tree3.nearest_filtered(&p.to_array(), |q| q[2] < z, |lo, _| lo[2] < z).map(|(id, d)| (id as usize, d))
    }

    /// Indices of the `k` nearest points, closest first.
    pub fn k_nearest(&self, p: &LocalPoint, k: usize) -> Vec<usize> {
        self.tree3.k_nearest(&p.to_array(), k).into_iter().map(|(id, _)| id as usize).collect()
    }
}
