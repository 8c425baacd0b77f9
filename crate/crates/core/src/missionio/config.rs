//! Flat JSON configuration covering refinement, view angles, planning and the
//! camera model.

use crate::camera::CameraConfig;
use crate::geo::{GeoPoint, Origin};
use crate::planner::{CameraModel, PlanConfig};
use crate::refine::RefineConfig;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("config key `{key}`: {message}")]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

fn err(key: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError { key: key.into(), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OriginSpec {
    pub lat: f64,
    pub lon: f64,
    pub alt_m: f64,
}

/// File representation. Every key is optional except `z_offset`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    tol0: Option<f64>,
    dtol: Option<f64>,
    tol_max: Option<f64>,
    z_offset: Option<f64>,
    x_offset: Option<f64>,
    step: Option<f64>,
    delta_z: Option<f64>,
    standoff_band: Option<f64>,
    r0: Option<f64>,
    dr: Option<f64>,
    r_max: Option<f64>,
    eps_horizontal: Option<f64>,
    altitude: Option<f64>,
    sidelap: Option<f64>,
    frontlap: Option<f64>,
    n_drones: Option<usize>,
    hfov_deg: Option<f64>,
    vfov_deg: Option<f64>,
    image_width_px: Option<u32>,
    image_height_px: Option<u32>,
    capture_on_inserted: Option<bool>,
    roi: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    origin: Option<OriginSpec>,
}

/// Documented keys, in the order `config show` prints them.
pub const CONFIG_KEYS: [&str; 23] = [
    "tol0",
    "dtol",
    "tol_max",
    "z_offset",
    "x_offset",
    "step",
    "delta_z",
    "standoff_band",
    "r0",
    "dr",
    "r_max",
    "eps_horizontal",
    "altitude",
    "sidelap",
    "frontlap",
    "n_drones",
    "hfov_deg",
    "vfov_deg",
    "image_width_px",
    "image_height_px",
    "capture_on_inserted",
    "roi",
    "origin",
];

pub const DEFAULT_ALTITUDE: f64 = 80.0;
pub const DEFAULT_LAP: f64 = 0.8;
pub const DEFAULT_DRONES: usize = 3;

/// Effective configuration after defaults and range checks.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub refine: RefineConfig,
    pub camera: CameraConfig,
    pub plan: PlanConfig,
    pub camera_model: CameraModel,
    /// Whether waypoints inserted by densification trigger an image capture.
    pub capture_on_inserted: bool,
    /// Explicit mission frame anchor; absent means the first waypoint.
    pub origin: Option<GeoPoint>,
}

impl Config {
    pub fn with_z_offset(z_offset: f64) -> Self {
        Config {
            refine: RefineConfig::with_z_offset(z_offset),
            camera: CameraConfig::default(),
            plan: PlanConfig {
                altitude: DEFAULT_ALTITUDE,
                sidelap: DEFAULT_LAP,
                frontlap: DEFAULT_LAP,
                n_drones: DEFAULT_DRONES,
                roi: Vec::new(),
            },
            camera_model: CameraModel::default(),
            capture_on_inserted: true,
            origin: None,
        }
    }

    /// Range checks on everything except the polygon, which is checked when planning.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.refine.validate().map_err(|e| match e {
            crate::refine::RefineError::InvalidConfig { key, reason } => err(key, reason),
            other => err("refine", other.to_string()),
        })?;
        self.camera.validate().map_err(|e| match e {
            crate::camera::CameraError::InvalidConfig { key, reason } => err(key, reason),
            other => err("camera", other.to_string()),
        })?;
        let plan_err = |e: crate::planner::PlanError| match e {
            crate::planner::PlanError::InvalidConfig { key, reason } => err(key, reason),
            crate::planner::PlanError::InvalidRoi(m) => err("roi", m),
            other => err("plan", other.to_string()),
        };
        self.camera_model.validate().map_err(plan_err)?;
        let p = &self.plan;
        if !(p.altitude.is_finite() && p.altitude > 0.0) {
            return Err(err("altitude", format!("{} must be finite and > 0", p.altitude)));
        }
        for (key, v) in [("sidelap", p.sidelap), ("frontlap", p.frontlap)] {
            if !(0.0..1.0).contains(&v) {
                return Err(err(key, format!("{v} outside [0, 1)")));
            }
        }
        if p.n_drones == 0 {
            return Err(err("n_drones", "must be at least 1"));
        }
        if !p.roi.is_empty() {
            crate::planner::validate_polygon(&p.roi).map_err(plan_err)?;
        }
        if let Some(o) = self.origin {
            Origin::new(o).map_err(|e| err("origin", e.to_string()))?;
        }
        Ok(())
    }

    /// Pretty JSON listing every key with its effective value.
    pub fn to_json(&self) -> String {
        let raw = RawConfig {
            tol0: Some(self.refine.tol0),
            dtol: Some(self.refine.dtol),
            tol_max: Some(self.refine.tol_max),
            z_offset: Some(self.refine.z_offset),
            x_offset: Some(self.refine.x_offset),
            step: Some(self.refine.step),
            delta_z: Some(self.refine.delta_z),
            standoff_band: Some(self.refine.standoff_band),
            r0: Some(self.camera.r0),
            dr: Some(self.camera.dr),
            r_max: Some(self.camera.r_max),
            eps_horizontal: Some(self.camera.eps_horizontal),
            altitude: Some(self.plan.altitude),
            sidelap: Some(self.plan.sidelap),
            frontlap: Some(self.plan.frontlap),
            n_drones: Some(self.plan.n_drones),
            hfov_deg: Some(self.camera_model.hfov_deg),
            vfov_deg: Some(self.camera_model.vfov_deg),
            image_width_px: Some(self.camera_model.image_width_px),
            image_height_px: Some(self.camera_model.image_height_px),
            capture_on_inserted: Some(self.capture_on_inserted),
            roi: Some(self.plan.roi.clone()),
            origin: self.origin.map(|o| OriginSpec { lat: o.lat, lon: o.lon, alt_m: o.alt }),
        };
        let mut s = serde_json::to_string_pretty(&raw).expect("config serialises");
        s.push('\n');
        s
    }
}

/// Parses a configuration document, applying defaults for absent keys.
pub fn read_config(source: &str) -> Result<Config, ConfigError> {
    let value: serde_json::Value = serde_json::from_str(source).map_err(|e| err("$", format!("invalid JSON: {e}")))?;
    let map = value.as_object().ok_or_else(|| err("$", "expected a JSON object"))?;
    if let Some(k) = map.keys().find(|k| !CONFIG_KEYS.contains(&k.as_str())) {
        return Err(err(k.as_str(), "unknown key"));
    }
    let raw: RawConfig = serde_path_to_error::deserialize(&value).map_err(|e| {
        let key = e.path().to_string();
        err(key, e.into_inner().to_string())
    })?;
    let z_offset = raw.z_offset.ok_or_else(|| err("z_offset", "required"))?;
    let mut cfg = Config::with_z_offset(z_offset);
    let r = &mut cfg.refine;
    macro_rules! set {
        ($dst:expr, $src:expr) => {
            if let Some(v) = $src {
                $dst = v;
            }
        };
    }
    set!(r.tol0, raw.tol0);
    set!(r.dtol, raw.dtol);
    set!(r.tol_max, raw.tol_max);
    set!(r.x_offset, raw.x_offset);
    set!(r.step, raw.step);
    set!(r.delta_z, raw.delta_z);
    set!(r.standoff_band, raw.standoff_band);
    set!(cfg.camera.r0, raw.r0);
    set!(cfg.camera.dr, raw.dr);
    set!(cfg.camera.r_max, raw.r_max);
    set!(cfg.camera.eps_horizontal, raw.eps_horizontal);
    set!(cfg.plan.altitude, raw.altitude);
    set!(cfg.plan.sidelap, raw.sidelap);
    set!(cfg.plan.frontlap, raw.frontlap);
    set!(cfg.plan.n_drones, raw.n_drones);
    set!(cfg.plan.roi, raw.roi);
    set!(cfg.camera_model.hfov_deg, raw.hfov_deg);
    set!(cfg.camera_model.vfov_deg, raw.vfov_deg);
    set!(cfg.camera_model.image_width_px, raw.image_width_px);
    set!(cfg.camera_model.image_height_px, raw.image_height_px);
    set!(cfg.capture_on_inserted, raw.capture_on_inserted);
    cfg.origin = raw.origin.map(|o| GeoPoint { lat: o.lat, lon: o.lon, alt: o.alt_m });
    cfg.validate()?;
    Ok(cfg)
}
