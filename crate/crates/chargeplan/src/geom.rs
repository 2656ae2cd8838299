//! Local planar projection and the small amount of computational geometry the
//! rest of the crate needs.
//!
//! Study areas are tens of kilometres across, so a local equirectangular
//! projection around a fixed origin is accurate to well under a metre and
//! keeps every downstream distance computation in plain Euclidean metres.

use serde::{Deserialize, Serialize};

/// Metres per degree of latitude (spherical earth, adequate at desk scale).
pub const METERS_PER_DEGREE: f64 = 111_320.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Self {
        GeoPoint { lat, lon }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlanarPoint {
    /// Metres east of the projection origin.
    pub x: f64,
    /// Metres north of the projection origin.
    pub y: f64,
}

impl PlanarPoint {
    pub fn new(x: f64, y: f64) -> Self {
        PlanarPoint { x, y }
    }

    pub fn distance_sq(&self, other: &PlanarPoint) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn distance(&self, other: &PlanarPoint) -> f64 {
        self.distance_sq(other).sqrt()
    }
}

/// Equirectangular projection centred on `origin`; x is scaled by the cosine
/// of the origin latitude so distances are isotropic near the origin.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Projection {
    origin: GeoPoint,
    cos_lat: f64,
}

impl Projection {
    pub fn new(origin: GeoPoint) -> Self {
        Projection {
            origin,
            cos_lat: origin.lat.to_radians().cos(),
        }
    }

    pub fn origin(&self) -> GeoPoint {
        self.origin
    }

    pub fn project(&self, p: GeoPoint) -> PlanarPoint {
        PlanarPoint {
            x: (p.lon - self.origin.lon) * METERS_PER_DEGREE * self.cos_lat,
            y: (p.lat - self.origin.lat) * METERS_PER_DEGREE,
        }
    }

    pub fn unproject(&self, p: PlanarPoint) -> GeoPoint {
        GeoPoint {
            lat: self.origin.lat + p.y / METERS_PER_DEGREE,
            lon: self.origin.lon + p.x / (METERS_PER_DEGREE * self.cos_lat),
        }
    }
}

/// Even-odd ray casting. Points exactly on an edge may land on either side;
/// callers that care (the hex grid) arrange their geometry so centroids stay
/// strictly interior.
pub fn point_in_polygon(p: PlanarPoint, ring: &[PlanarPoint]) -> bool {
    let n = ring.len();
    if n < 3 {
        return false;
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (ring[i], ring[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Unsigned shoelace area in square metres.
pub fn polygon_area(ring: &[PlanarPoint]) -> f64 {
    if ring.len() < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    let n = ring.len();
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    acc.abs() / 2.0
}

/// Axis-aligned bounding box as (min, max) corners.
pub fn bounding_box(ring: &[PlanarPoint]) -> (PlanarPoint, PlanarPoint) {
    let mut min = PlanarPoint::new(f64::INFINITY, f64::INFINITY);
    let mut max = PlanarPoint::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in ring {
        min.x = min.x.min(p.x);
        min.y = min.y.min(p.y);
        max.x = max.x.max(p.x);
        max.y = max.y.max(p.y);
    }
    (min, max)
}
