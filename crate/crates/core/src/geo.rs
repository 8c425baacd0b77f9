//! WGS84 geodetic <-> local East-North-Up conversion.
//!
//! Missions cover at most a few hundred metres, so the local frame is an
//! equirectangular tangent plane anchored at a fixed [`Origin`]. Altitudes are
//! metres above the origin's datum; no geoid or ellipsoid height correction is
//! applied. Results degrade beyond [`VALIDITY_RADIUS_M`] from the origin.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// WGS84 semi-major axis in metres.
pub const EARTH_RADIUS_M: f64 = 6_378_137.0;

/// Horizontal distance from the origin past which the planar approximation
/// should not be trusted.
pub const VALIDITY_RADIUS_M: f64 = 10_000.0;

const METERS_PER_DEGREE: f64 = EARTH_RADIUS_M * std::f64::consts::PI / 180.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("latitude {0} outside [-90, 90]")]
    Latitude(f64),
    #[error("longitude {0} outside (-180, 180]")]
    Longitude(f64),
    #[error("origin latitude {0} too close to a pole for a tangent-plane frame")]
    PolarOrigin(f64),
    #[error("non-finite coordinate in {0}")]
    NonFinite(&'static str),
}

/// A WGS84 position: degrees of latitude/longitude and metres of altitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
    pub alt: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64, alt: f64) -> Result<Self, GeoError> {
        let p = GeoPoint { lat, lon, alt };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), GeoError> {
        if !self.lat.is_finite() || !self.lon.is_finite() || !self.alt.is_finite() {
            return Err(GeoError::NonFinite("geodetic point"));
        }
        if !(-90.0..=90.0).contains(&self.lat) {
            return Err(GeoError::Latitude(self.lat));
        }
        if !(self.lon > -180.0 && self.lon <= 180.0) {
            return Err(GeoError::Longitude(self.lon));
        }
        Ok(())
    }
}

/// Metres east (`x`), north (`y`) and up (`z`) of a mission origin.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LocalPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl LocalPoint {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        LocalPoint { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn distance(&self, other: &LocalPoint) -> f64 {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn horizontal_distance(&self, other: &LocalPoint) -> f64 {
        let (dx, dy) = (self.x - other.x, self.y - other.y);
        (dx * dx + dy * dy).sqrt()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for LocalPoint {
    fn from(a: [f64; 3]) -> Self {
        LocalPoint::new(a[0], a[1], a[2])
    }
}

/// Anchor of a mission's local frame. Every conversion within one mission must
/// go through the same origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Origin {
    anchor: GeoPoint,
    cos_lat: f64,
}

impl Origin {
    pub fn new(anchor: GeoPoint) -> Result<Self, GeoError> {
        anchor.validate()?;
        let cos_lat = anchor.lat.to_radians().cos();
        if cos_lat < 1e-6 {
            return Err(GeoError::PolarOrigin(anchor.lat));
        }
        Ok(Origin { anchor, cos_lat })
    }

    pub fn anchor(&self) -> GeoPoint {
        self.anchor
    }

    pub fn to_local(&self, p: &GeoPoint) -> Result<LocalPoint, GeoError> {
        p.validate()?;
        let dlon = wrap_degrees(p.lon - self.anchor.lon);
        Ok(LocalPoint {
            x: dlon * self.cos_lat * METERS_PER_DEGREE,
            y: (p.lat - self.anchor.lat) * METERS_PER_DEGREE,
            z: p.alt - self.anchor.alt,
        })
    }

    pub fn to_wgs84(&self, p: &LocalPoint) -> Result<GeoPoint, GeoError> {
        if !p.is_finite() {
            return Err(GeoError::NonFinite("local point"));
        }
        let lat = self.anchor.lat + p.y / METERS_PER_DEGREE;
        let lon = wrap_degrees(self.anchor.lon + p.x / (self.cos_lat * METERS_PER_DEGREE));
        GeoPoint::new(lat, lon, self.anchor.alt + p.z)
    }

    /// True when `p` is close enough to the origin for the planar model.
    pub fn within_validity(&self, p: &LocalPoint) -> bool {
        p.x.hypot(p.y) <= VALIDITY_RADIUS_M
    }
}

/// Wraps an angle in degrees into (-180, 180].
pub(crate) fn wrap_degrees(a: f64) -> f64 {
    let mut w = a % 360.0;
    if w > 180.0 {
        w -= 360.0;
    } else if w <= -180.0 {
        w += 360.0;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn origin(lat: f64, lon: f64, alt: f64) -> Origin {
        Origin::new(GeoPoint::new(lat, lon, alt).unwrap()).unwrap()
    }

    #[test]
    fn identity_and_altitude_offset() {
        let o = origin(37.0, 23.0, 0.0);
        let p = o.to_local(&GeoPoint::new(37.0, 23.0, 0.0).unwrap()).unwrap();
        assert_eq!(p, LocalPoint::new(0.0, 0.0, 0.0));
        let p = o.to_local(&GeoPoint::new(37.0, 23.0, 80.0).unwrap()).unwrap();
        assert_eq!(p, LocalPoint::new(0.0, 0.0, 80.0));
        let g = o.to_wgs84(&LocalPoint::default()).unwrap();
        assert_eq!((g.lat, g.lon, g.alt), (37.0, 23.0, 0.0));
    }

    #[test]
    fn one_millidegree_of_latitude() {
        // 0.001 * 6378137 * pi / 180, evaluated at 30 digits.
        let expected = 111.319_490_793_273_572_647_7;
        let o = origin(0.0, 0.0, 0.0);
        let p = o.to_local(&GeoPoint::new(0.001, 0.0, 0.0).unwrap()).unwrap();
        assert!(p.x.abs() < 1e-12);
        assert!((p.y - expected).abs() < 1e-9);
        let g = o.to_wgs84(&LocalPoint::new(0.0, 111.3194908, 0.0)).unwrap();
        assert!((g.lat - 0.001).abs() < 1e-11);
        assert!(g.lon.abs() < 1e-15);
    }

    #[test]
    fn rejects_out_of_range_input() {
        let o = origin(37.0, 23.0, 0.0);
        let bad = GeoPoint { lat: 91.0, lon: 0.0, alt: 0.0 };
        assert_eq!(o.to_local(&bad), Err(GeoError::Latitude(91.0)));
        let bad = GeoPoint { lat: 0.0, lon: -180.0, alt: 0.0 };
        assert_eq!(o.to_local(&bad), Err(GeoError::Longitude(-180.0)));
        assert!(o.to_wgs84(&LocalPoint::new(f64::NAN, 0.0, 0.0)).is_err());
        assert!(Origin::new(GeoPoint::new(90.0, 0.0, 0.0).unwrap()).is_err());
    }

    #[test]
    fn wraps_across_antimeridian() {
        let o = origin(10.0, 179.999, 0.0);
        let g = GeoPoint::new(10.0, -179.999, 0.0).unwrap();
        let p = o.to_local(&g).unwrap();
        assert!(p.x > 0.0 && p.x < 300.0);
        let back = o.to_wgs84(&p).unwrap();
        assert!((back.lon - g.lon).abs() < 1e-9);
    }

    fn haversine(a: &GeoPoint, b: &GeoPoint) -> f64 {
        let (p1, p2) = (a.lat.to_radians(), b.lat.to_radians());
        let dp = p2 - p1;
        let dl = (b.lon - a.lon).to_radians();
        let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
        2.0 * EARTH_RADIUS_M * h.sqrt().asin()
    }

    proptest! {
        #[test]
        fn round_trip_within_five_km(
            lat0 in -70.0f64..70.0, lon0 in -179.0f64..179.0, alt0 in -100.0f64..1000.0,
            x in -3500.0f64..3500.0, y in -3500.0f64..3500.0, z in -200.0f64..500.0,
        ) {
            let o = origin(lat0, lon0, alt0);
            let g = o.to_wgs84(&LocalPoint::new(x, y, z)).unwrap();
            let back = o.to_wgs84(&o.to_local(&g).unwrap()).unwrap();
            prop_assert!((back.lat - g.lat).abs() < 1e-9);
            prop_assert!((back.lon - g.lon).abs() < 1e-9);
            prop_assert!((back.alt - g.alt).abs() < 1e-6);
        }

        #[test]
        fn altitude_only_moves_z(
            lat in -80.0f64..80.0, lon in -179.0f64..179.0, alt in -50.0f64..500.0, delta in -100.0f64..100.0,
        ) {
            let o = origin(lat - 0.01, lon + 0.01, 3.0);
            let a = o.to_local(&GeoPoint::new(lat, lon, alt).unwrap()).unwrap();
            let b = o.to_local(&GeoPoint::new(lat, lon, alt + delta).unwrap()).unwrap();
            prop_assert_eq!(a.x, b.x);
            prop_assert_eq!(a.y, b.y);
            prop_assert!(((b.z - a.z) - delta).abs() < 1e-9);
        }

        #[test]
        fn planar_distance_matches_great_circle(
            lat0 in -60.0f64..60.0, lon0 in -170.0f64..170.0,
            x in -700.0f64..700.0, y in -700.0f64..700.0,
        ) {
            let o = origin(lat0, lon0, 0.0);
            let p = LocalPoint::new(x, y, 0.0);
            let planar = p.x.hypot(p.y);
            prop_assume!(planar > 1.0);
            let g = o.to_wgs84(&p).unwrap();
            let sphere = haversine(&o.anchor(), &g);
            prop_assert!((planar - sphere).abs() / sphere < 1e-3);
        }
    }
}
