//! Multi-resolution hexagonal tessellation over a local planar projection.
//!
//! Pointy-top hexagons on an axial (q, r) lattice. Each supported resolution
//! (6 through 10, coarse to fine) is its own tessellation with its own edge
//! length; consecutive resolutions are rotated against each other by the
//! hexagonal nesting skew atan(√3/5) ≈ 19.107°, the angle at which a lattice
//! scaled by √7 tiles its parent. Default edge ratios are close to √7, so
//! children pack their parent almost exactly; parent/child relations are
//! still defined purely by centroid containment, so the hierarchy stays
//! approximate at the fringe (mirroring production hierarchical hex systems)
//! and exact indexing is never assumed.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::geom::{
    bounding_box, point_in_polygon, polygon_area, GeoPoint, PlanarPoint, Projection,
};

pub const MIN_RESOLUTION: u8 = 6;
pub const MAX_RESOLUTION: u8 = 10;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Rotation between consecutive resolutions: atan(√3 / 5), the aperture-7
/// nesting skew.
const NESTING_SKEW_RAD: f64 = 0.333_473_172_251_832_1;

fn lattice_rotation(resolution: u8) -> f64 {
    (resolution - MIN_RESOLUTION) as f64 * NESTING_SKEW_RAD
}

/// Cell address: resolution plus axial lattice coordinates.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub struct HexIndex {
    pub resolution: u8,
    pub q: i64,
    pub r: i64,
}

impl HexIndex {
    pub fn new(resolution: u8, q: i64, r: i64) -> Self {
        HexIndex { resolution, q, r }
    }
}

impl fmt::Display for HexIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.resolution, self.q, self.r)
    }
}

/// Grid geometry: projection origin and per-resolution edge lengths.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub origin: GeoPoint,
    /// Edge lengths in metres for resolutions 6, 7, 8, 9, 10.
    pub edge_length_m: [f64; 5],
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            origin: GeoPoint::new(40.0, -100.0),
            edge_length_m: [14_000.0, 5_300.0, 2_000.0, 760.0, 600.0],
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.origin.lat.is_finite()
            || !self.origin.lon.is_finite()
            || self.origin.lat.abs() >= 85.0
        {
            return Err(Error::InvalidParameter(format!(
                "grid origin ({}, {}) out of range",
                self.origin.lat, self.origin.lon
            )));
        }
        for (i, len) in self.edge_length_m.iter().enumerate() {
            if !len.is_finite() || *len <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "edge length for resolution {} must be positive, got {len}",
                    MIN_RESOLUTION as usize + i
                )));
            }
            if i > 0 && self.edge_length_m[i - 1] <= *len {
                return Err(Error::InvalidParameter(
                    "edge lengths must strictly decrease with resolution".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn edge_length(&self, resolution: u8) -> Result<f64> {
        if !(MIN_RESOLUTION..=MAX_RESOLUTION).contains(&resolution) {
            return Err(Error::UnsupportedResolution(resolution));
        }
        Ok(self.edge_length_m[(resolution - MIN_RESOLUTION) as usize])
    }

    pub fn projection(&self) -> Projection {
        Projection::new(self.origin)
    }

    /// Area of one cell at `resolution`: (3√3 / 2) s².
    pub fn cell_area_m2(&self, resolution: u8) -> Result<f64> {
        let s = self.edge_length(resolution)?;
        Ok(1.5 * SQRT3 * s * s)
    }
}

/// A grid cell enriched with the per-cell attributes the pipeline carries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HexCell {
    pub index: HexIndex,
    pub centroid: GeoPoint,
    pub population: f64,
    pub poi_score: f64,
    pub median_income: f64,
    pub ev_share: f64,
    pub zone_id: String,
}

fn axial_to_planar(q: i64, r: i64, s: f64, rot: f64) -> PlanarPoint {
    let x = s * SQRT3 * (q as f64 + r as f64 / 2.0);
    let y = s * 1.5 * r as f64;
    let (sin, cos) = rot.sin_cos();
    PlanarPoint {
        x: x * cos - y * sin,
        y: x * sin + y * cos,
    }
}

fn planar_to_axial_fractional(p: PlanarPoint, s: f64, rot: f64) -> (f64, f64) {
    let (sin, cos) = rot.sin_cos();
    let x = p.x * cos + p.y * sin;
    let y = -p.x * sin + p.y * cos;
    let q = (SQRT3 / 3.0 * x - y / 3.0) / s;
    let r = (2.0 / 3.0 * y) / s;
    (q, r)
}

/// Round fractional axial coordinates to the containing cell via cube
/// coordinates: round all three, then fix the axis with the largest error so
/// x + y + z = 0 holds again.
fn axial_round(qf: f64, rf: f64) -> (i64, i64) {
    let xf = qf;
    let zf = rf;
    let yf = -xf - zf;
    let mut x = xf.round();
    let mut y = yf.round();
    let mut z = zf.round();
    let dx = (x - xf).abs();
    let dy = (y - yf).abs();
    let dz = (z - zf).abs();
    if dx > dy && dx > dz {
        x = -y - z;
    } else if dy > dz {
        y = -x - z;
    } else {
        z = -x - y;
    }
    let _ = y;
    (x as i64, z as i64)
}

/// Cell containing a projected point.
pub fn planar_to_cell(p: PlanarPoint, resolution: u8, spec: &GridSpec) -> Result<HexIndex> {
    let s = spec.edge_length(resolution)?;
    let (qf, rf) = planar_to_axial_fractional(p, s, lattice_rotation(resolution));
    let (q, r) = axial_round(qf, rf);
    Ok(HexIndex::new(resolution, q, r))
}

/// Cell containing a geographic point.
pub fn point_to_cell(p: GeoPoint, resolution: u8, spec: &GridSpec) -> Result<HexIndex> {
    planar_to_cell(spec.projection().project(p), resolution, spec)
}

pub fn centroid_planar(idx: HexIndex, spec: &GridSpec) -> Result<PlanarPoint> {
    let s = spec.edge_length(idx.resolution)?;
    Ok(axial_to_planar(idx.q, idx.r, s, lattice_rotation(idx.resolution)))
}

pub fn centroid(idx: HexIndex, spec: &GridSpec) -> Result<GeoPoint> {
    Ok(spec.projection().unproject(centroid_planar(idx, spec)?))
}

/// The cell's hexagonal outline in planar coordinates (pointy-top in the
/// lattice frame, vertices every 60 degrees starting from 30).
pub fn cell_polygon(idx: HexIndex, spec: &GridSpec) -> Result<[PlanarPoint; 6]> {
    let s = spec.edge_length(idx.resolution)?;
    let rot = lattice_rotation(idx.resolution);
    let c = centroid_planar(idx, spec)?;
    let mut ring = [PlanarPoint::default(); 6];
    for (k, v) in ring.iter_mut().enumerate() {
        let theta = (30.0 + 60.0 * k as f64).to_radians() + rot;
        *v = PlanarPoint::new(c.x + s * theta.cos(), c.y + s * theta.sin());
    }
    Ok(ring)
}

/// The unique cell one resolution coarser whose area contains this cell's
/// centroid.
pub fn parent(idx: HexIndex, spec: &GridSpec) -> Result<HexIndex> {
    if idx.resolution <= MIN_RESOLUTION {
        return Err(Error::CoarsestResolution(idx.resolution));
    }
    let c = centroid_planar(idx, spec)?;
    planar_to_cell(c, idx.resolution - 1, spec)
}

/// Parent chain up to `resolution` (which must be coarser or equal).
pub fn ancestor(idx: HexIndex, resolution: u8, spec: &GridSpec) -> Result<HexIndex> {
    if resolution > idx.resolution {
        return Err(Error::InvalidParameter(format!(
            "ancestor resolution {resolution} is finer than cell resolution {}",
            idx.resolution
        )));
    }
    let mut cur = idx;
    while cur.resolution > resolution {
        cur = parent(cur, spec)?;
    }
    Ok(cur)
}

fn axial_scan_range(
    min: PlanarPoint,
    max: PlanarPoint,
    s: f64,
    rot: f64,
) -> (i64, i64, i64, i64) {
    let corners = [
        PlanarPoint::new(min.x, min.y),
        PlanarPoint::new(min.x, max.y),
        PlanarPoint::new(max.x, min.y),
        PlanarPoint::new(max.x, max.y),
    ];
    let mut q_min = f64::INFINITY;
    let mut q_max = f64::NEG_INFINITY;
    let mut r_min = f64::INFINITY;
    let mut r_max = f64::NEG_INFINITY;
    for c in corners {
        let (qf, rf) = planar_to_axial_fractional(c, s, rot);
        q_min = q_min.min(qf);
        q_max = q_max.max(qf);
        r_min = r_min.min(rf);
        r_max = r_max.max(rf);
    }
    // q and r are linear in (x, y), so corner extrema bound the box; pad for
    // rounding.
    (
        q_min.floor() as i64 - 2,
        q_max.ceil() as i64 + 2,
        r_min.floor() as i64 - 2,
        r_max.ceil() as i64 + 2,
    )
}

/// Cells one resolution finer whose centroid falls inside this cell. Sorted
/// by (q, r).
pub fn children(idx: HexIndex, spec: &GridSpec) -> Result<Vec<HexIndex>> {
    if idx.resolution >= MAX_RESOLUTION {
        return Err(Error::FinestResolution(idx.resolution));
    }
    let child_res = idx.resolution + 1;
    let s_parent = spec.edge_length(idx.resolution)?;
    let s_child = spec.edge_length(child_res)?;
    let c = centroid_planar(idx, spec)?;
    let pad = s_parent + s_child;
    let (q_lo, q_hi, r_lo, r_hi) = axial_scan_range(
        PlanarPoint::new(c.x - pad, c.y - pad),
        PlanarPoint::new(c.x + pad, c.y + pad),
        s_child,
        lattice_rotation(child_res),
    );
    let mut out = Vec::new();
    for q in q_lo..=q_hi {
        for r in r_lo..=r_hi {
            let child = HexIndex::new(child_res, q, r);
            let cc = centroid_planar(child, spec)?;
            if planar_to_cell(cc, idx.resolution, spec)? == idx {
                out.push(child);
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Cells at `resolution` whose centroid lies inside the polygon. The ring may
/// be open or closed; fewer than three distinct vertices is an error, while a
/// valid ring with no interior yields an empty set. Sorted by (q, r).
pub fn polyfill(ring: &[GeoPoint], resolution: u8, spec: &GridSpec) -> Result<Vec<HexIndex>> {
    let s = spec.edge_length(resolution)?;
    let proj = spec.projection();
    let mut planar: Vec<PlanarPoint> = ring.iter().map(|p| proj.project(*p)).collect();
    if planar.len() >= 2 {
        let (first, last) = (planar[0], planar[planar.len() - 1]);
        if first == last {
            planar.pop();
        }
    }
    let mut distinct = planar.clone();
    distinct.dedup_by(|a, b| a == b);
    if distinct.len() < 3 {
        return Err(Error::DegeneratePolygon(format!(
            "{} distinct vertices, need at least 3",
            distinct.len()
        )));
    }
    if polygon_area(&planar) == 0.0 {
        return Ok(Vec::new());
    }
    let (min, max) = bounding_box(&planar);
    let (q_lo, q_hi, r_lo, r_hi) = axial_scan_range(min, max, s, lattice_rotation(resolution));
    let mut out = Vec::new();
    for q in q_lo..=q_hi {
        for r in r_lo..=r_hi {
            let idx = HexIndex::new(resolution, q, r);
            let c = centroid_planar(idx, spec)?;
            if point_in_polygon(c, &planar) {
                out.push(idx);
            }
        }
    }
    out.sort();
    Ok(out)
}
