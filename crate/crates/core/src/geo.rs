//! Coordinates, distances and the local planar projection.
//!
//! - Angles are in **degrees**, distances in **meters**.
//! - All clustering runs in an equirectangular plane centred on the dataset
//!   centroid. Haversine is kept for reporting.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Largest latitude offset from the projection origin accepted by [`project`].
pub const MAX_PROJECTION_LAT_SPAN_DEG: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error("invalid latitude {0}; expected finite degrees in [-90, 90]")]
    InvalidLatitude(f64),
    #[error("invalid longitude {0}; expected finite degrees in [-180, 180]")]
    InvalidLongitude(f64),
    #[error("point at latitude {lat} is more than 2 degrees from projection origin latitude {origin_lat}")]
    OutsideProjectionRange { lat: f64, origin_lat: f64 },
    #[error("invalid bounding box: min_lat={min_lat}, max_lat={max_lat}, min_lon={min_lon}, max_lon={max_lon}")]
    InvalidBoundingBox {
        min_lat: f64,
        max_lat: f64,
        min_lon: f64,
        max_lon: f64,
    },
}

/// WGS84 position in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    /// Validated constructor.
    pub fn new(lat: f64, lon: f64) -> Result<Self, GeoError> {
        if !lat.is_finite() || !(-90.0..=90.0).contains(&lat) {
            return Err(GeoError::InvalidLatitude(lat));
        }
        if !lon.is_finite() || !(-180.0..=180.0).contains(&lon) {
            return Err(GeoError::InvalidLongitude(lon));
        }
        Ok(Self { lat, lon })
    }
}

/// Position in meters east (`x`) and north (`y`) of a projection origin.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanarPoint<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> PlanarPoint<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn distance_sq(self, other: Self) -> T {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    #[inline]
    pub fn distance(self, other: Self) -> T {
        self.distance_sq(other).sqrt()
    }

    /// Boundary-inclusive eps-neighbourhood predicate.
    #[inline]
    pub fn within(self, other: Self, r: T) -> bool {
        self.distance_sq(other) <= r * r
    }

    pub fn cast<U: Scalar>(self) -> PlanarPoint<U> {
        PlanarPoint {
            x: U::of(self.x.as_f64()),
            y: U::of(self.y.as_f64()),
        }
    }
}

/// Axis-aligned lat/lon box, boundary inclusive. No antimeridian wrap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min_lat: f64,
    pub max_lat: f64,
    pub min_lon: f64,
    pub max_lon: f64,
}

impl BoundingBox {
    pub fn new(min_lat: f64, max_lat: f64, min_lon: f64, max_lon: f64) -> Result<Self, GeoError> {
        let bad = || GeoError::InvalidBoundingBox {
            min_lat,
            max_lat,
            min_lon,
            max_lon,
        };
        GeoPoint::new(min_lat, min_lon).map_err(|_| bad())?;
        GeoPoint::new(max_lat, max_lon).map_err(|_| bad())?;
        if min_lat > max_lat || min_lon > max_lon {
            return Err(bad());
        }
        Ok(Self {
            min_lat,
            max_lat,
            min_lon,
            max_lon,
        })
    }

    pub fn contains(&self, p: GeoPoint) -> bool {
        bbox_contains(self, p)
    }
}

impl std::str::FromStr for BoundingBox {
    type Err = String;

    /// Parses `minLat,minLon,maxLat,maxLon`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| format!("bad bbox {s:?}: {e}"))?;
        if parts.len() != 4 {
            return Err(format!(
                "bad bbox {s:?}: expected minLat,minLon,maxLat,maxLon"
            ));
        }
        BoundingBox::new(parts[0], parts[2], parts[1], parts[3]).map_err(|e| e.to_string())
    }
}

/// Great-circle distance on a sphere of radius [`EARTH_RADIUS_M`].
pub fn haversine_distance(a: GeoPoint, b: GeoPoint) -> f64 {
    let phi1 = a.lat.to_radians();
    let phi2 = b.lat.to_radians();
    let dphi = phi2 - phi1;
    let dlambda = (b.lon - a.lon).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

/// Equirectangular projection around `origin`:
/// `x = R·Δλ·cos(φ0)`, `y = R·Δφ`.
pub fn project<T: Scalar>(p: GeoPoint, origin: GeoPoint) -> Result<PlanarPoint<T>, GeoError> {
    if (p.lat - origin.lat).abs() >= MAX_PROJECTION_LAT_SPAN_DEG {
        return Err(GeoError::OutsideProjectionRange {
            lat: p.lat,
            origin_lat: origin.lat,
        });
    }
    let x = EARTH_RADIUS_M * (p.lon - origin.lon).to_radians() * origin.lat.to_radians().cos();
    let y = EARTH_RADIUS_M * (p.lat - origin.lat).to_radians();
    Ok(PlanarPoint::new(T::of(x), T::of(y)))
}

/// Inverse of [`project`].
pub fn unproject<T: Scalar>(p: PlanarPoint<T>, origin: GeoPoint) -> GeoPoint {
    let lat = origin.lat + (p.y.as_f64() / EARTH_RADIUS_M).to_degrees();
    let lon = origin.lon
        + (p.x.as_f64() / (EARTH_RADIUS_M * origin.lat.to_radians().cos())).to_degrees();
    GeoPoint { lat, lon }
}

pub fn bbox_contains(b: &BoundingBox, p: GeoPoint) -> bool {
    b.min_lat <= p.lat && p.lat <= b.max_lat && b.min_lon <= p.lon && p.lon <= b.max_lon
}

/// Arithmetic mean of the coordinates; used as the projection origin.
pub fn centroid<'a>(points: impl IntoIterator<Item = &'a GeoPoint>) -> Option<GeoPoint> {
    let (mut lat, mut lon, mut n) = (0.0, 0.0, 0usize);
    for p in points {
        lat += p.lat;
        lon += p.lon;
        n += 1;
    }
    (n > 0).then(|| GeoPoint {
        lat: lat / n as f64,
        lon: lon / n as f64,
    })
}
