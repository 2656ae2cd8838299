//! Demand construction: POI load scores per cell and composite demand
//! weights on fine-cell centroids.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{GeoPoint, PlanarPoint};
use crate::hexgrid::{self, GridSpec, HexIndex};

/// The six canonical POI classes, ordered by priority rank (1 is highest).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoiClass {
    CommercialRetail,
    Parking,
    TransportHub,
    Workplace,
    GovernmentPublic,
    Residential,
}

impl PoiClass {
    pub const ALL: [PoiClass; 6] = [
        PoiClass::CommercialRetail,
        PoiClass::Parking,
        PoiClass::TransportHub,
        PoiClass::Workplace,
        PoiClass::GovernmentPublic,
        PoiClass::Residential,
    ];

    pub fn priority_rank(self) -> u8 {
        match self {
            PoiClass::CommercialRetail => 1,
            PoiClass::Parking => 2,
            PoiClass::TransportHub => 3,
            PoiClass::Workplace => 4,
            PoiClass::GovernmentPublic => 5,
            PoiClass::Residential => 6,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PoiClass::CommercialRetail => "commercial-retail",
            PoiClass::Parking => "parking",
            PoiClass::TransportHub => "transport-hub",
            PoiClass::Workplace => "workplace",
            PoiClass::GovernmentPublic => "government-public",
            PoiClass::Residential => "residential",
        }
    }
}

impl fmt::Display for PoiClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PoiClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PoiClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::UnknownPoiClass(s.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct PoiRecord {
    pub location: GeoPoint,
    pub class: PoiClass,
    pub count: u32,
}

/// Per-class weights; the default inverts priority rank (rank 1 → weight 6).
#[derive(Debug, Clone, PartialEq)]
pub struct PoiWeightTable {
    weights: [f64; 6],
}

impl Default for PoiWeightTable {
    fn default() -> Self {
        let mut weights = [0.0; 6];
        for class in PoiClass::ALL {
            weights[class as usize] = (7 - class.priority_rank()) as f64;
        }
        PoiWeightTable { weights }
    }
}

impl PoiWeightTable {
    pub fn from_map(map: &BTreeMap<String, f64>) -> Result<PoiWeightTable> {
        let mut table = PoiWeightTable::default();
        for (name, w) in map {
            let class: PoiClass = name.parse()?;
            if !w.is_finite() || *w <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "POI weight for {name} must be positive, got {w}"
                )));
            }
            table.weights[class as usize] = *w;
        }
        Ok(table)
    }

    pub fn weight(&self, class: PoiClass) -> f64 {
        self.weights[class as usize]
    }

    pub fn to_map(&self) -> BTreeMap<String, f64> {
        PoiClass::ALL
            .into_iter()
            .map(|c| (c.as_str().to_string(), self.weight(c)))
            .collect()
    }
}

/// π_c = Σ_m w_m · (count of class-m POIs whose location falls in cell c).
/// Cells must share one resolution. Returns per-cell scores aligned with the
/// input order plus the number of POIs that landed outside every given cell.
pub fn poi_score(
    cells: &[HexIndex],
    pois: &[PoiRecord],
    table: &PoiWeightTable,
    spec: &GridSpec,
) -> Result<(Vec<f64>, usize)> {
    let Some(first) = cells.first() else {
        return Ok((Vec::new(), pois.len()));
    };
    let resolution = first.resolution;
    if cells.iter().any(|c| c.resolution != resolution) {
        return Err(Error::InvalidParameter(
            "poi_score cells must share one resolution".into(),
        ));
    }
    let position: BTreeMap<HexIndex, usize> =
        cells.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let mut scores = vec![0.0; cells.len()];
    let mut unassigned = 0usize;
    for poi in pois {
        let idx = hexgrid::point_to_cell(poi.location, resolution, spec)?;
        match position.get(&idx) {
            Some(&i) => scores[i] += table.weight(poi.class) * poi.count as f64,
            None => unassigned += 1,
        }
    }
    Ok((scores, unassigned))
}

/// A weighted demand location: a fine-cell centroid carrying normalised
/// population and POI load inherited from its coarser parent cell.
#[derive(Debug, Clone)]
pub struct DemandPoint {
    pub id: u64,
    pub cell: HexIndex,
    pub location: GeoPoint,
    pub pos: PlanarPoint,
    pub p_norm: f64,
    pub s_norm: f64,
    pub weight: f64,
}

/// Population and POI load of a parent cell, the quantities demand points
/// inherit.
#[derive(Debug, Clone, Copy)]
pub struct ParentFeatures {
    pub population: f64,
    pub poi_score: f64,
}

#[derive(Debug, Clone)]
pub struct DemandBuild {
    pub points: Vec<DemandPoint>,
    /// Fine cells excluded because no ancestor appeared in the feature map.
    pub orphans: usize,
}

/// Build demand points on fine-cell centroids: raw (population, poi) pairs
/// are looked up on each cell's ancestor at the feature map's resolution,
/// min-max normalised over all points, then combined as
/// d = w_pop·p̃ + w_poi·s̃. Ids are assigned in input order.
pub fn build_demand_points(
    fine_cells: &[HexIndex],
    parent_features: &BTreeMap<HexIndex, ParentFeatures>,
    w_pop: f64,
    w_poi: f64,
    spec: &GridSpec,
) -> Result<DemandBuild> {
    if !(w_pop >= 0.0 && w_poi >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "demand weights must be non-negative, got w_pop={w_pop} w_poi={w_poi}"
        )));
    }
    let Some(first_key) = parent_features.keys().next() else {
        return Ok(DemandBuild {
            points: Vec::new(),
            orphans: fine_cells.len(),
        });
    };
    let parent_res = first_key.resolution;
    if parent_features.keys().any(|k| k.resolution != parent_res) {
        return Err(Error::InvalidParameter(
            "parent features must share one resolution".into(),
        ));
    }

    let mut kept: Vec<(HexIndex, ParentFeatures)> = Vec::with_capacity(fine_cells.len());
    let mut orphans = 0usize;
    for cell in fine_cells {
        if cell.resolution < parent_res {
            return Err(Error::InvalidParameter(format!(
                "cell {cell} is coarser than the feature resolution {parent_res}"
            )));
        }
        let anc = hexgrid::ancestor(*cell, parent_res, spec)?;
        match parent_features.get(&anc) {
            Some(f) => kept.push((*cell, *f)),
            None => orphans += 1,
        }
    }

    let raw_p: Vec<f64> = kept.iter().map(|(_, f)| f.population).collect();
    let raw_s: Vec<f64> = kept.iter().map(|(_, f)| f.poi_score).collect();
    let p_norm = crate::roadgraph::min_max_normalize(&raw_p);
    let s_norm = crate::roadgraph::min_max_normalize(&raw_s);

    let projection = spec.projection();
    let mut points = Vec::with_capacity(kept.len());
    for (i, (cell, _)) in kept.iter().enumerate() {
        let pos = hexgrid::centroid_planar(*cell, spec)?;
        points.push(DemandPoint {
            id: i as u64,
            cell: *cell,
            location: projection.unproject(pos),
            pos,
            p_norm: p_norm[i],
            s_norm: s_norm[i],
            weight: w_pop * p_norm[i] + w_poi * s_norm[i],
        });
    }
    Ok(DemandBuild { points, orphans })
}
