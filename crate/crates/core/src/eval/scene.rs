//! Synthetic test scenes sampled on regular grids.

use super::EvalError;
use crate::geo::LocalPoint;
use crate::pointcloud::PointCloud;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SceneKind {
    /// z = 0.
    Plane,
    /// z = (height / width) * x.
    Ramp,
    /// Cuboid of footprint width/3 x depth/3 standing on the plane, with
    /// sampled roof and walls; the ground beneath it is omitted.
    BoxOnPlane,
    /// Paraboloid mound of radius min(width, depth)/3.
    Pile,
    /// `steps` treads rising along y from 0 to `height`, joined by risers.
    Staircase,
}

impl SceneKind {
    pub const NAMES: [&'static str; 5] = ["plane", "ramp", "box-on-plane", "pile", "staircase"];
}

impl FromStr for SceneKind {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plane" => Ok(SceneKind::Plane),
            "ramp" => Ok(SceneKind::Ramp),
            "box-on-plane" => Ok(SceneKind::BoxOnPlane),
            "pile" => Ok(SceneKind::Pile),
            "staircase" => Ok(SceneKind::Staircase),
            other => Err(EvalError::UnknownScene(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub kind: SceneKind,
    /// Extent along x (m), centred on the origin.
    pub width: f64,
    /// Extent along y (m), centred on the origin.
    pub depth: f64,
    pub height: f64,
    /// Samples per square metre of surface.
    pub density: f64,
    pub seed: u64,
    /// In-surface perturbation as a fraction of the grid cell, in [0, 1].
    pub jitter: f64,
    pub steps: usize,
}

impl SceneSpec {
    pub fn new(kind: SceneKind, width: f64, depth: f64, height: f64, density: f64) -> Self {
        SceneSpec { kind, width, depth, height, density, seed: 0, jitter: 0.0, steps: 4 }
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        let bad = |key: &'static str, reason: &str| Err(EvalError::InvalidConfig { key, reason: reason.to_string() });
        for (key, v) in [("width", self.width), ("depth", self.depth), ("density", self.density)] {
            if !(v.is_finite() && v > 0.0) {
                return bad(key, "must be finite and > 0");
            }
        }
        if !(self.height.is_finite() && self.height >= 0.0) {
            return bad("height", "must be finite and >= 0");
        }
        if !(0.0..=1.0).contains(&self.jitter) {
            return bad("jitter", "must be in [0, 1]");
        }
        if self.kind == SceneKind::Staircase && self.steps < 2 {
            return bad("steps", "a staircase needs at least 2 steps");
        }
        Ok(())
    }
}

struct Sampler {
    sqrt_density: f64,
    jitter: f64,
    rng: ChaCha8Rng,
    out: Vec<LocalPoint>,
}

impl Sampler {
    /// Cell centres of a rectangle in surface coordinates (u, v), mapped to
    /// space by `place`. `keep` sees the unperturbed centre.
    fn patch(
        &mut self,
        (u0, u1): (f64, f64),
        (v0, v1): (f64, f64),
        keep: impl Fn(f64, f64) -> bool,
        place: impl Fn(f64, f64) -> LocalPoint,
    ) {
        let nu = (((u1 - u0) * self.sqrt_density).round() as usize).max(1);
        let nv = (((v1 - v0) * self.sqrt_density).round() as usize).max(1);
        let (du, dv) = ((u1 - u0) / nu as f64, (v1 - v0) / nv as f64);
        for j in 0..nv {
            for i in 0..nu {
                let u = u0 + (i as f64 + 0.5) * du;
                let v = v0 + (j as f64 + 0.5) * dv;
                let ju = (self.rng.random::<f64>() - 0.5) * self.jitter * du;
                let jv = (self.rng.random::<f64>() - 0.5) * self.jitter * dv;
                if keep(u, v) {
                    self.out.push(place(u + ju, v + jv));
                }
            }
        }
    }
}

pub fn generate_scene(spec: &SceneSpec) -> Result<PointCloud, EvalError> {
    spec.validate()?;
    let (hw, hd, h) = (spec.width / 2.0, spec.depth / 2.0, spec.height);
    let mut s = Sampler {
        sqrt_density: spec.density.sqrt(),
        jitter: spec.jitter,
        rng: ChaCha8Rng::seed_from_u64(spec.seed),
        out: Vec::new(),
    };
    let all = |_: f64, _: f64| true;
    match spec.kind {
        SceneKind::Plane => s.patch((-hw, hw), (-hd, hd), all, |x, y| LocalPoint::new(x, y, 0.0)),
        SceneKind::Ramp => {
            let slope = h / spec.width;
            s.patch((-hw, hw), (-hd, hd), all, |x, y| LocalPoint::new(x, y, slope * x));
        }
        SceneKind::Pile => {
            let r = spec.width.min(spec.depth) / 3.0;
            s.patch((-hw, hw), (-hd, hd), all, |x, y| {
                let q = (x * x + y * y) / (r * r);
                LocalPoint::new(x, y, if q < 1.0 { h * (1.0 - q) } else { 0.0 })
            });
        }
        SceneKind::BoxOnPlane => {
            let (bx, by) = (spec.width / 6.0, spec.depth / 6.0);
            s.patch((-hw, hw), (-hd, hd), |x, y| !(x.abs() < bx && y.abs() < by), |x, y| LocalPoint::new(x, y, 0.0));
            if h > 0.0 {
                s.patch((-bx, bx), (-by, by), all, |x, y| LocalPoint::new(x, y, h));
                for side in [-1.0, 1.0] {
                    s.patch((-by, by), (0.0, h), all, |y, z| LocalPoint::new(side * bx, y, z));
                    s.patch((-bx, bx), (0.0, h), all, |x, z| LocalPoint::new(x, side * by, z));
                }
            }
        }
        SceneKind::Staircase => {
            let n = spec.steps;
            let run = spec.depth / n as f64;
            let rise = h / (n - 1) as f64;
            for k in 0..n {
                let (y0, z) = (-hd + k as f64 * run, k as f64 * rise);
                s.patch((-hw, hw), (y0, y0 + run), all, |x, y| LocalPoint::new(x, y, z));
                if k > 0 && rise > 0.0 {
                    s.patch((-hw, hw), (z - rise, z), all, |x, zz| LocalPoint::new(x, y0, zz));
                }
            }
        }
    }
    Ok(PointCloud::new(s.out)?)
}
