//! Mission / path JSON documents (schema version "1").
//!
//! ```json
//! {
//!   "version": "1",
//!   "frame": "WGS84",
//!   "origin": {"lat": 37.0, "lon": 23.0, "alt_m": 0.0},
//!   "drones": [
//!     {"id": "drone-1", "waypoints": [
//!       {"lat": 37.0, "lon": 23.0, "alt_m": 80.0, "yaw_deg": 90.0, "gimbal_pitch_deg": -45.0,
//!        "capture": true, "inserted": false}
//!     ]}
//!   ]
//! }
//! ```
//!
//! `origin` is optional on input (the first waypoint is used instead), as are
//! the angle fields, `capture` (default true) and `inserted` (default false).
//! Unknown keys are rejected.

use crate::camera::GimbalAngles;
use crate::geo::{GeoPoint, Origin};
use crate::refine::{DronePath, Waypoint};
use serde_json::{Map, Value};
use std::fmt::Write;
use thiserror::Error;

pub const SCHEMA_VERSION: &str = "1";
pub const FRAME: &str = "WGS84";

/// A schema violation, located by a JSON path such as `$.drones[0].waypoints[3].lat`.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{path}: {message}")]
pub struct MissionError {
    pub path: String,
    pub message: String,
}

fn err(path: &str, message: impl Into<String>) -> MissionError {
    MissionError { path: path.to_string(), message: message.into() }
}

fn object<'a>(v: &'a Value, path: &str, allowed: &[&str]) -> Result<&'a Map<String, Value>, MissionError> {
    let map = v.as_object().ok_or_else(|| err(path, "expected an object"))?;
    if let Some(k) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(err(&format!("{path}.{k}"), "unknown key"));
    }
    Ok(map)
}

fn required<'a>(map: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value, MissionError> {
    map.get(key).ok_or_else(|| err(&format!("{path}.{key}"), "missing required key"))
}

fn number(v: &Value, path: &str) -> Result<f64, MissionError> {
    v.as_f64().filter(|x| x.is_finite()).ok_or_else(|| err(path, "expected a finite number"))
}

fn optional_number(map: &Map<String, Value>, key: &str, path: &str) -> Result<Option<f64>, MissionError> {
    map.get(key).map(|v| number(v, &format!("{path}.{key}"))).transpose()
}

fn optional_bool(map: &Map<String, Value>, key: &str, path: &str) -> Result<Option<bool>, MissionError> {
    map.get(key).map(|v| v.as_bool().ok_or_else(|| err(&format!("{path}.{key}"), "expected a boolean"))).transpose()
}

fn geo_point(map: &Map<String, Value>, path: &str) -> Result<GeoPoint, MissionError> {
    let lat = number(required(map, "lat", path)?, &format!("{path}.lat"))?;
    let lon = number(required(map, "lon", path)?, &format!("{path}.lon"))?;
    let alt = number(required(map, "alt_m", path)?, &format!("{path}.alt_m"))?;
    let p = GeoPoint { lat, lon, alt };
    if !(-90.0..=90.0).contains(&lat) {
        return Err(err(&format!("{path}.lat"), format!("{lat} outside [-90, 90]")));
    }
    if !(lon > -180.0 && lon <= 180.0) {
        return Err(err(&format!("{path}.lon"), format!("{lon} outside (-180, 180]")));
    }
    Ok(p)
}

fn gimbal(map: &Map<String, Value>, path: &str) -> Result<Option<GimbalAngles>, MissionError> {
    let yaw = optional_number(map, "yaw_deg", path)?;
    let pitch = optional_number(map, "gimbal_pitch_deg", path)?;
    match (yaw, pitch) {
        (None, None) => Ok(None),
        (Some(_), None) => Err(err(&format!("{path}.gimbal_pitch_deg"), "required when yaw_deg is present")),
        (None, Some(_)) => Err(err(&format!("{path}.yaw_deg"), "required when gimbal_pitch_deg is present")),
        (Some(yaw_deg), Some(pitch_deg)) => {
            if !(yaw_deg > -180.0 && yaw_deg <= 180.0) {
                return Err(err(&format!("{path}.yaw_deg"), format!("{yaw_deg} outside (-180, 180]")));
            }
            if !(-90.0..=0.0).contains(&pitch_deg) {
                return Err(err(&format!("{path}.gimbal_pitch_deg"), format!("{pitch_deg} outside [-90, 0]")));
            }
            Ok(Some(GimbalAngles { yaw_deg, pitch_deg }))
        }
    }
}

struct RawWaypoint {
    position: GeoPoint,
    gimbal: Option<GimbalAngles>,
    capture: bool,
    inserted: bool,
}

/// Parses a path or mission document into its origin and per-drone paths.
pub fn read_paths(source: &str) -> Result<(Origin, Vec<DronePath>), MissionError> {
    let doc: Value = serde_json::from_str(source)
        .map_err(|e| err("$", format!("invalid JSON at line {} column {}: {e}", e.line(), e.column())))?;
    let root = object(&doc, "$", &["version", "frame", "origin", "drones"])?;

    match required(root, "version", "$")? {
        Value::String(v) if v == SCHEMA_VERSION => {}
        _ => return Err(err("$.version", format!("expected \"{SCHEMA_VERSION}\""))),
    }
    match required(root, "frame", "$")? {
        Value::String(f) if f == FRAME => {}
        _ => return Err(err("$.frame", format!("expected \"{FRAME}\""))),
    }
    let origin = root
        .get("origin")
        .map(|o| object(o, "$.origin", &["lat", "lon", "alt_m"]).and_then(|m| geo_point(m, "$.origin")))
        .transpose()?;

    let drones = required(root, "drones", "$")?.as_array().ok_or_else(|| err("$.drones", "expected an array"))?;
    if drones.is_empty() {
        return Err(err("$.drones", "at least one drone required"));
    }
    let mut raw: Vec<(String, Vec<RawWaypoint>)> = Vec::with_capacity(drones.len());
    for (d, drone) in drones.iter().enumerate() {
        let dpath = format!("$.drones[{d}]");
        let dmap = object(drone, &dpath, &["id", "waypoints"])?;
        let id = required(dmap, "id", &dpath)?
            .as_str()
            .filter(|s| !s.is_empty())
            .ok_or_else(|| err(&format!("{dpath}.id"), "expected a non-empty string"))?;
        if raw.iter().any(|(other, _)| other == id) {
            return Err(err(&format!("{dpath}.id"), format!("duplicate drone id `{id}`")));
        }
        let wps = required(dmap, "waypoints", &dpath)?
            .as_array()
            .ok_or_else(|| err(&format!("{dpath}.waypoints"), "expected an array"))?;
        if wps.len() < 2 {
            return Err(err(&format!("{dpath}.waypoints"), "a path needs at least 2 waypoints"));
        }
        let mut out = Vec::with_capacity(wps.len());
        for (w, wp) in wps.iter().enumerate() {
            let wpath = format!("{dpath}.waypoints[{w}]");
            let wmap =
                object(wp, &wpath, &["lat", "lon", "alt_m", "yaw_deg", "gimbal_pitch_deg", "capture", "inserted"])?;
            out.push(RawWaypoint {
                position: geo_point(wmap, &wpath)?,
                gimbal: gimbal(wmap, &wpath)?,
                capture: optional_bool(wmap, "capture", &wpath)?.unwrap_or(true),
                inserted: optional_bool(wmap, "inserted", &wpath)?.unwrap_or(false),
            });
        }
        raw.push((id.to_string(), out));
    }

    let (anchor, anchor_path) = match origin {
        Some(o) => (o, "$.origin".to_string()),
        None => (raw[0].1[0].position, "$.drones[0].waypoints[0]".to_string()),
    };
    let origin = Origin::new(anchor).map_err(|e| err(&anchor_path, e.to_string()))?;
    let paths = raw
        .into_iter()
        .enumerate()
        .map(|(d, (id, wps))| {
            let waypoints = wps
                .into_iter()
                .enumerate()
                .map(|(w, r)| {
                    let mut wp = Waypoint::from_geo(&origin, r.position)
                        .map_err(|e| err(&format!("$.drones[{d}].waypoints[{w}]"), e.to_string()))?;
                    wp.gimbal = r.gimbal;
                    wp.capture = r.capture;
                    wp.inserted = r.inserted;
                    Ok(wp)
                })
                .collect::<Result<Vec<_>, MissionError>>()?;
            Ok(DronePath { drone_id: id, waypoints })
        })
        .collect::<Result<Vec<_>, MissionError>>()?;
    Ok((origin, paths))
}

/// Shortest round-trip decimal, zero-padded to at least `min_decimals`.
fn fmt_number(x: f64, min_decimals: usize) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    let mut s = format!("{x}");
    let decimals = s.find('.').map(|i| s.len() - i - 1).unwrap_or(0);
    if decimals < min_decimals {
        if decimals == 0 {
            s.push('.');
        }
        s.extend(std::iter::repeat_n('0', min_decimals - decimals));
    }
    s
}

/// At least nine significant digits for a coordinate in degrees.
fn fmt_degrees_coordinate(x: f64) -> String {
    let int_digits = if x.abs() < 1.0 { 1 } else { (x.abs().log10().floor() as usize) + 1 };
    fmt_number(x, 9usize.saturating_sub(int_digits).max(1))
}

fn write_point(out: &mut String, p: &GeoPoint) {
    let _ = write!(
        out,
        "\"lat\": {}, \"lon\": {}, \"alt_m\": {}",
        fmt_degrees_coordinate(p.lat),
        fmt_degrees_coordinate(p.lon),
        fmt_number(p.alt, 3)
    );
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialise")
}

/// Serialises a mission. Output bytes depend only on the logical content.
pub fn write_mission(origin: &Origin, paths: &[DronePath]) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"version\": \"{SCHEMA_VERSION}\",");
    let _ = writeln!(out, "  \"frame\": \"{FRAME}\",");
    out.push_str("  \"origin\": {");
    write_point(&mut out, &origin.anchor());
    out.push_str("},\n");
    out.push_str("  \"drones\": [");
    for (d, path) in paths.iter().enumerate() {
        out.push_str(if d == 0 { "\n" } else { ",\n" });
        let _ = write!(out, "    {{\n      \"id\": {},\n      \"waypoints\": [", json_string(&path.drone_id));
        for (w, wp) in path.waypoints.iter().enumerate() {
            out.push_str(if w == 0 { "\n        {" } else { ",\n        {" });
            write_point(&mut out, &wp.position);
            if let Some(g) = wp.gimbal {
                let _ = write!(
                    out,
                    ", \"yaw_deg\": {}, \"gimbal_pitch_deg\": {}",
                    fmt_number(g.yaw_deg, 3),
                    fmt_number(g.pitch_deg, 3)
                );
            }
            let _ = write!(out, ", \"capture\": {}, \"inserted\": {}}}", wp.capture, wp.inserted);
        }
        out.push_str("\n      ]\n    }");
    }
    out.push_str("\n  ]\n}\n");
    out
}
