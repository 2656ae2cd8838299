//! End-to-end run: load and validate inputs, then execute the fixed stage
//! sequence (grid, centrality, demand, selection, coverage repair, queue
//! sizing, staging, reports) and write every artifact deterministically.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::centrality::{self, NodeFeatures, TrainConfig, TrainingZone};
use crate::config::{PipelineConfig, SiteChargerType};
use crate::demand::{self, DemandPoint, ParentFeatures, PoiWeightTable};
use crate::equity::{self, CoverageMetrics, EquityCell, EquityReport};
use crate::error::{Error, Result};
use crate::forecast::{self, PenetrationEnvelope};
use crate::geom::{point_in_polygon, polygon_area, GeoPoint, PlanarPoint, Projection};
use crate::hexgrid::{self, HexCell, HexIndex};
use crate::io::{
    self, CentralityRow, ForecastRow, SelectionRow, SiteFeature, TrafficRow, ZonePolygon,
};
use crate::mclp::{self, CandidateSite};
use crate::queueing::{
    self, ChargerType, CostParams, OutageStats, QueueParams, SitePlan, SizingPolicy,
};
use crate::roadgraph::{self, EdgeRecord, RoadGraph};
use crate::voronoi::{self, CoarseCentroid, Hub, ReachabilityReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Fatal,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationIssue {
    pub severity: Severity,
    pub file: String,
    pub line: Option<u64>,
    pub message: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn warn(&mut self, file: impl Into<String>, line: Option<u64>, message: impl Into<String>) {
        self.issues.push(ValidationIssue {
            severity: Severity::Warning,
            file: file.into(),
            line,
            message: message.into(),
        });
    }

    pub fn fatal(&mut self, file: impl Into<String>, line: Option<u64>, message: impl Into<String>) {
        self.issues.push(ValidationIssue {
            severity: Severity::Fatal,
            file: file.into(),
            line,
            message: message.into(),
        });
    }

    pub fn fatal_count(&self) -> usize {
        self.issues
            .iter()
            .filter(|i| i.severity == Severity::Fatal)
            .count()
    }

    pub fn warning_count(&self) -> usize {
        self.issues.len() - self.fatal_count()
    }

    pub fn has_fatal(&self) -> bool {
        self.fatal_count() > 0
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for issue in &self.issues {
            let tag = match issue.severity {
                Severity::Warning => "warning",
                Severity::Fatal => "fatal",
            };
            match issue.line {
                Some(line) => {
                    writeln!(f, "{tag}: {}:{line}: {}", issue.file, issue.message)?
                }
                None => writeln!(f, "{tag}: {}: {}", issue.file, issue.message)?,
            }
        }
        write!(
            f,
            "{} fatal, {} warning(s)",
            self.fatal_count(),
            self.warning_count()
        )
    }
}

/// Everything read from disk, exactly as the files state it.
#[derive(Debug, Clone)]
pub struct LoadedInputs {
    pub cells: Vec<HexCell>,
    pub edges: Vec<EdgeRecord>,
    pub pois: Vec<crate::demand::PoiRecord>,
    pub counties: Vec<crate::forecast::CountyStats>,
    pub traffic: Vec<TrafficRow>,
    pub zones: Vec<ZonePolygon>,
    pub study_area: Vec<GeoPoint>,
    pub exclusions: Vec<Vec<GeoPoint>>,
    pub outages: Option<OutageStats>,
}

pub fn load_inputs(config: &PipelineConfig) -> Result<LoadedInputs> {
    let paths = &config.inputs;
    Ok(LoadedInputs {
        cells: io::read_cells(&paths.cells)?,
        edges: io::read_edges(&paths.edges)?,
        pois: io::read_pois(&paths.pois)?,
        counties: io::read_counties(&paths.counties)?,
        traffic: io::read_traffic(&paths.traffic)?,
        zones: io::read_zones(&paths.zones)?,
        study_area: io::read_study_area(&paths.study_area)?,
        exclusions: match &paths.exclusions {
            Some(p) => io::read_polygons(p)?,
            None => Vec::new(),
        },
        outages: match &paths.outages {
            Some(p) => Some(io::read_outages(p)?),
            None => None,
        },
    })
}

fn file_name(path: &std::path::Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Schema, range, and referential checks. Warnings flag suspicious but
/// usable data; any fatal issue means the run must not start.
pub fn validate_inputs(config: &PipelineConfig, inputs: &LoadedInputs) -> ValidationReport {
    let mut report = ValidationReport::default();
    let spec = &config.grid;
    let projection = spec.projection();
    let cells_file = file_name(&config.inputs.cells);
    let zones_file = file_name(&config.inputs.zones);
    let counties_file = file_name(&config.inputs.counties);
    let edges_file = file_name(&config.inputs.edges);
    let traffic_file = file_name(&config.inputs.traffic);
    let pois_file = file_name(&config.inputs.pois);
    let study_file = file_name(&config.inputs.study_area);

    // Counties first: zones reference them.
    let mut county_ids = BTreeSet::new();
    for (i, county) in inputs.counties.iter().enumerate() {
        let line = Some(i as u64 + 2);
        if !county_ids.insert(county.county_id.clone()) {
            report.fatal(
                &counties_file,
                line,
                format!("duplicate county id {}", county.county_id),
            );
            continue;
        }
        if let Err(e) = county.validate() {
            report.fatal(&counties_file, line, e.to_string());
            continue;
        }
        if let Err(e) = county.cagr() {
            report.fatal(&counties_file, line, e.to_string());
        }
    }
    if inputs.counties.is_empty() {
        report.fatal(&counties_file, None, "no counties");
    }

    // Zones: unique ids, valid geometry, resolvable county.
    let mut zone_ids = BTreeSet::new();
    for (i, zone) in inputs.zones.iter().enumerate() {
        if !zone_ids.insert(zone.zone_id.clone()) {
            report.fatal(
                &zones_file,
                None,
                format!("feature {i}: duplicate zone id {}", zone.zone_id),
            );
        }
        let ring: Vec<PlanarPoint> = zone.ring.iter().map(|p| projection.project(*p)).collect();
        if polygon_area(&ring) <= 0.0 {
            report.fatal(
                &zones_file,
                None,
                format!("zone {} has a degenerate boundary", zone.zone_id),
            );
        }
        match &zone.county_id {
            Some(id) if !county_ids.contains(id) => {
                report.fatal(
                    &zones_file,
                    None,
                    format!("zone {} references unknown county {id}", zone.zone_id),
                );
            }
            None if county_ids.len() > 1 => {
                report.fatal(
                    &zones_file,
                    None,
                    format!(
                        "zone {} names no county and {} counties exist",
                        zone.zone_id,
                        county_ids.len()
                    ),
                );
            }
            _ => {}
        }
    }
    if inputs.zones.is_empty() {
        report.fatal(&zones_file, None, "no zones");
    }
    let referenced: BTreeSet<&String> =
        inputs.zones.iter().filter_map(|z| z.county_id.as_ref()).collect();
    if county_ids.len() > 1 {
        for id in &county_ids {
            if !referenced.contains(id) {
                report.warn(&counties_file, None, format!("county {id} serves no zone"));
            }
        }
    }

    // Study area geometry.
    let study_ring: Vec<PlanarPoint> =
        inputs.study_area.iter().map(|p| projection.project(*p)).collect();
    if polygon_area(&study_ring) <= 0.0 {
        report.fatal(&study_file, None, "study area polygon has no interior");
    }

    // Cells: one resolution, sane ranges, known zones, unique indices.
    let fine_res = config.demand.fine_resolution;
    let mut seen_cells = BTreeSet::new();
    let mut nonzero_poi_scores = 0usize;
    let mut displaced_centroids = 0usize;
    for (i, cell) in inputs.cells.iter().enumerate() {
        let line = Some(i as u64 + 2);
        if cell.index.resolution != fine_res {
            report.fatal(
                &cells_file,
                line,
                format!(
                    "cell resolution {} does not match the configured {}",
                    cell.index.resolution, fine_res
                ),
            );
            continue;
        }
        if !seen_cells.insert((cell.index.q, cell.index.r)) {
            report.fatal(
                &cells_file,
                line,
                format!("duplicate cell ({}, {})", cell.index.q, cell.index.r),
            );
        }
        if !(cell.population >= 0.0) || !cell.population.is_finite() {
            report.fatal(
                &cells_file,
                line,
                format!("population {} must be a non-negative number", cell.population),
            );
        }
        if !(0.0..=1.0).contains(&cell.ev_share) {
            report.fatal(
                &cells_file,
                line,
                format!("ev_share {} outside [0, 1]", cell.ev_share),
            );
        }
        if !(cell.median_income >= 0.0) {
            report.fatal(
                &cells_file,
                line,
                format!("median_income {} must be non-negative", cell.median_income),
            );
        }
        if !zone_ids.contains(&cell.zone_id) {
            report.fatal(
                &cells_file,
                line,
                format!("unknown zone id {}", cell.zone_id),
            );
        }
        if cell.poi_score != 0.0 {
            nonzero_poi_scores += 1;
        }
        if let Ok(expected) = hexgrid::centroid_planar(cell.index, spec) {
            let actual = projection.project(cell.centroid);
            if expected.distance_sq(&actual).sqrt() > 25.0 {
                displaced_centroids += 1;
            }
        }
    }
    if inputs.cells.is_empty() {
        report.fatal(&cells_file, None, "no cells");
    }
    if nonzero_poi_scores > 0 {
        report.warn(
            &cells_file,
            None,
            format!(
                "{nonzero_poi_scores} rows carry a nonzero poi_score; the column is ignored and recomputed from {pois_file}"
            ),
        );
    }
    if displaced_centroids > 0 {
        report.warn(
            &cells_file,
            None,
            format!("{displaced_centroids} centroids sit more than 25 m from their cell index"),
        );
    }

    // POIs: counts start at one.
    for (i, poi) in inputs.pois.iter().enumerate() {
        if poi.count == 0 {
            report.fatal(&pois_file, Some(i as u64 + 2), "count must be >= 1");
        }
    }

    // Edges: known zones, consistent node coordinates.
    let mut node_pos: BTreeMap<u64, PlanarPoint> = BTreeMap::new();
    let mut node_ids = BTreeSet::new();
    for (i, edge) in inputs.edges.iter().enumerate() {
        let line = Some(i as u64 + 2);
        if !zone_ids.contains(&edge.zone_id) {
            report.fatal(&edges_file, line, format!("unknown zone id {}", edge.zone_id));
        }
        if edge.node_a == edge.node_b {
            report.warn(&edges_file, line, format!("self-loop at node {}", edge.node_a));
        }
        for (id, geo) in [(edge.node_a, edge.a), (edge.node_b, edge.b)] {
            node_ids.insert(id);
            let pos = projection.project(geo);
            match node_pos.get(&id) {
                Some(previous) if previous.distance_sq(&pos).sqrt() > 25.0 => {
                    report.fatal(
                        &edges_file,
                        line,
                        format!("node {id} reappears more than 25 m from its first position"),
                    );
                }
                Some(_) => {}
                None => {
                    node_pos.insert(id, pos);
                }
            }
        }
    }

    // Traffic: unique non-negative rows covering every road node.
    let mut traffic_ids = BTreeSet::new();
    for (i, row) in inputs.traffic.iter().enumerate() {
        let line = Some(i as u64 + 2);
        if !traffic_ids.insert(row.site_id) {
            report.fatal(
                &traffic_file,
                line,
                format!("duplicate traffic row for site {}", row.site_id),
            );
        }
        if row.gross.iter().any(|g| !(*g >= 0.0) || !g.is_finite()) {
            report.fatal(
                &traffic_file,
                line,
                format!("site {}: negative or non-finite hourly count", row.site_id),
            );
        }
        if !node_ids.contains(&row.site_id) {
            report.warn(
                &traffic_file,
                line,
                format!("site {} matches no road node", row.site_id),
            );
        }
    }
    let missing: Vec<u64> = node_ids
        .iter()
        .filter(|id| !traffic_ids.contains(id))
        .copied()
        .collect();
    if !missing.is_empty() {
        let shown: Vec<String> = missing.iter().take(5).map(u64::to_string).collect();
        report.fatal(
            &traffic_file,
            None,
            format!(
                "{} road nodes have no traffic row (first: {})",
                missing.len(),
                shown.join(", ")
            ),
        );
    }

    // Training zones must exist and have roads.
    let zones_with_edges: BTreeSet<&String> = inputs.edges.iter().map(|e| &e.zone_id).collect();
    for zone in &config.centrality.training_zones {
        if !zone_ids.contains(zone) {
            report.fatal(&zones_file, None, format!("training zone {zone} does not exist"));
        } else if !zones_with_edges.contains(zone) {
            report.fatal(
                &edges_file,
                None,
                format!("training zone {zone} has no road edges"),
            );
        }
    }
    if zones_with_edges.is_empty() && !inputs.edges.is_empty() {
        // Unreachable: edges imply a zone. Kept for clarity.
    }
    if inputs.edges.is_empty() {
        report.fatal(&edges_file, None, "no road edges");
    }

    if let Some(outages) = &inputs.outages {
        if let Err(e) = queueing::outage_rate(outages) {
            let file = config
                .inputs
                .outages
                .as_ref()
                .map(|p| file_name(p))
                .unwrap_or_else(|| "outages.json".into());
            report.fatal(&file, None, e.to_string());
        }
    }

    report
}

/// Which stage created a site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SiteSource {
    Selected,
    RepairHub,
}

/// One station in the final plan.
#[derive(Debug, Clone, Serialize)]
pub struct PlannedSite {
    pub site_id: u64,
    pub zone_id: String,
    pub county_id: String,
    #[serde(skip)]
    pub location: GeoPoint,
    #[serde(skip)]
    pub pos: PlanarPoint,
    pub source: SiteSource,
    /// First year the minimum build no longer satisfies the utilisation
    /// cap; 1 when that never happens inside the horizon.
    pub activation_year: u32,
    /// Sizing at the horizon-maximum arrival rate.
    pub plan: SitePlan,
    /// Design-hour mean gross arrivals before the EV share is applied.
    pub design_gross: f64,
}

/// The full plan: sites, the audit trail of the selection, and plan-level
/// metrics.
#[derive(Debug, Clone)]
pub struct BuildPlan {
    pub sites: Vec<PlannedSite>,
    pub selection: Vec<SelectionRow>,
    pub coverage_fraction: f64,
    pub total_demand: f64,
    pub reachability: ReachabilityReport,
    pub forecast: Vec<ForecastRow>,
    pub coverage: Vec<CoverageMetrics>,
    pub equity: EquityReport,
    /// Charger type -> summed re-optimised ports per plan year.
    pub capacity_path: BTreeMap<String, Vec<u32>>,
    /// Capital outlay of the sites activated in each year.
    pub yearly_capital: Vec<f64>,
    /// Best candidate per zone by the coverage/centrality blend.
    pub zone_best: BTreeMap<String, u64>,
    pub warnings: usize,
}

fn stage<T>(name: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    f().map_err(|e| Error::Stage {
        stage: name,
        source: Box::new(e),
    })
}

/// Validate, execute every stage, and write the artifacts into `out_dir`.
pub fn run(config: &PipelineConfig, out_dir: &Path, debug: bool) -> Result<BuildPlan> {
    config.validate()?;
    let inputs = load_inputs(config)?;
    let report = validate_inputs(config, &inputs);
    for issue in &report.issues {
        if issue.severity == Severity::Warning {
            log::warn!("{}: {}", issue.file, issue.message);
        }
    }
    if report.has_fatal() {
        return Err(Error::Validation(report));
    }
    execute(config, &inputs, report.warning_count(), out_dir, debug)
}

struct GridStage {
    projection: Projection,
    /// Parent-cell features keyed by parent index.
    parents: BTreeMap<HexIndex, ParentFeatures>,
    parent_positions: Vec<PlanarPoint>,
    coarse: Vec<CoarseCentroid>,
    /// zone and county of each coarse centroid, aligned with `coarse`.
    coarse_home: Vec<(String, String)>,
}

fn grid_stage(config: &PipelineConfig, inputs: &LoadedInputs) -> Result<GridStage> {
    let spec = &config.grid;
    let projection = spec.projection();
    let zone_county = zone_county_map(inputs);

    // Aggregate fine cells onto their parents.
    let mut populations: BTreeMap<HexIndex, f64> = BTreeMap::new();
    for cell in &inputs.cells {
        let parent = hexgrid::ancestor(cell.index, config.demand.parent_resolution, spec)?;
        *populations.entry(parent).or_insert(0.0) += cell.population;
    }
    let parent_indices: Vec<HexIndex> = populations.keys().copied().collect();
    let (poi_scores, orphan_pois) =
        demand::poi_score(&parent_indices, &inputs.pois, &poi_table(config)?, spec)?;
    if orphan_pois > 0 {
        log::warn!("{orphan_pois} POIs fall outside every parent cell and score nowhere");
    }
    let parents: BTreeMap<HexIndex, ParentFeatures> = parent_indices
        .iter()
        .zip(&poi_scores)
        .map(|(idx, poi)| {
            (
                *idx,
                ParentFeatures {
                    population: populations[idx],
                    poi_score: *poi,
                },
            )
        })
        .collect();
    let parent_positions = parent_indices
        .iter()
        .map(|idx| hexgrid::centroid_planar(*idx, spec))
        .collect::<Result<Vec<_>>>()?;

    // Coarse super-cells: population weight plus a majority zone, which
    // later tells repair hubs which county they serve.
    let mut coarse_weight: BTreeMap<HexIndex, f64> = BTreeMap::new();
    let mut coarse_zone_pop: BTreeMap<HexIndex, BTreeMap<&str, f64>> = BTreeMap::new();
    for cell in &inputs.cells {
        let coarse = hexgrid::ancestor(cell.index, config.reachability.coarse_resolution, spec)?;
        *coarse_weight.entry(coarse).or_insert(0.0) += cell.population;
        *coarse_zone_pop
            .entry(coarse)
            .or_default()
            .entry(cell.zone_id.as_str())
            .or_insert(0.0) += cell.population;
    }
    let mut coarse = Vec::with_capacity(coarse_weight.len());
    let mut coarse_home = Vec::with_capacity(coarse_weight.len());
    for (id, (idx, weight)) in coarse_weight.iter().enumerate() {
        coarse.push(CoarseCentroid {
            id: id as u64,
            pos: hexgrid::centroid_planar(*idx, spec)?,
            weight: *weight,
        });
        let zones = &coarse_zone_pop[idx];
        let zone = zones
            .iter()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(z, _)| (*z).to_string())
            .unwrap_or_default();
        let county = zone_county.get(zone.as_str()).cloned().unwrap_or_default();
        coarse_home.push((zone, county));
    }

    Ok(GridStage {
        projection,
        parents,
        parent_positions,
        coarse,
        coarse_home,
    })
}

fn poi_table(config: &PipelineConfig) -> Result<PoiWeightTable> {
    if config.demand.poi_weights.is_empty() {
        Ok(PoiWeightTable::default())
    } else {
        PoiWeightTable::from_map(&config.demand.poi_weights)
    }
}

/// zone id -> county id; a single county adopts every zone that names none.
fn zone_county_map(inputs: &LoadedInputs) -> BTreeMap<&str, String> {
    let single = (inputs.counties.len() == 1).then(|| inputs.counties[0].county_id.clone());
    inputs
        .zones
        .iter()
        .filter_map(|z| {
            z.county_id
                .clone()
                .or_else(|| single.clone())
                .map(|county| (z.zone_id.as_str(), county))
        })
        .collect()
}

struct CentralityStage {
    rows: Vec<CentralityRow>,
    candidates: Vec<CandidateSite>,
}

fn centrality_stage(
    config: &PipelineConfig,
    inputs: &LoadedInputs,
    grid: &GridStage,
) -> Result<CentralityStage> {
    let spec = &config.grid;
    let projection = &grid.projection;
    let mut by_zone: BTreeMap<&str, Vec<EdgeRecord>> = BTreeMap::new();
    for edge in &inputs.edges {
        by_zone.entry(edge.zone_id.as_str()).or_default().push(edge.clone());
    }
    let polygon_of: BTreeMap<&str, &[GeoPoint]> = inputs
        .zones
        .iter()
        .map(|z| (z.zone_id.as_str(), z.ring.as_slice()))
        .collect();

    // Node POI density = parent-cell POI score at the node's position.
    let node_poi = |g: &RoadGraph| -> Result<Vec<f64>> {
        g.nodes()
            .iter()
            .map(|node| {
                let parent =
                    hexgrid::planar_to_cell(node.pos, config.demand.parent_resolution, spec)?;
                Ok(grid.parents.get(&parent).map_or(0.0, |f| f.poi_score))
            })
            .collect()
    };

    let mut graphs: BTreeMap<&str, (RoadGraph, NodeFeatures)> = BTreeMap::new();
    for (zone, records) in &by_zone {
        let polygon = polygon_of.get(zone).copied().ok_or_else(|| {
            Error::InvalidParameter(format!("edges reference zone {zone} with no boundary"))
        })?;
        let g = RoadGraph::build(zone, polygon, records, projection)?;
        if g.node_count() == 0 {
            log::warn!("zone {zone}: every road node fell outside the zone boundary");
            continue;
        }
        let feats = NodeFeatures::build(&g, &node_poi(&g)?)?;
        graphs.insert(zone, (g, feats));
    }

    // Train on the configured zones (default: every zone with roads).
    let training: Vec<&str> = if config.centrality.training_zones.is_empty() {
        graphs.keys().copied().collect()
    } else {
        config.centrality.training_zones.iter().map(String::as_str).collect()
    };
    let mut zones = Vec::with_capacity(training.len());
    for zone in &training {
        let (g, feats) = graphs
            .get(zone)
            .ok_or_else(|| Error::InvalidParameter(format!("training zone {zone} has no graph")))?;
        let targets = roadgraph::betweenness_weighted(g).normalized;
        zones.push(TrainingZone::new(g, feats, &targets)?);
    }
    let train_config = TrainConfig {
        hidden_dim: config.centrality.hidden_dim,
        learning_rate: config.centrality.learning_rate,
        epochs: config.centrality.epochs,
        seed: config.seed,
    };
    let model = centrality::train(&zones, &train_config)?.model;

    // Score and filter every zone with the one model.
    let mut rows = Vec::new();
    let mut candidates = Vec::new();
    let exclusion_rings: Vec<Vec<PlanarPoint>> = inputs
        .exclusions
        .iter()
        .map(|ring| ring.iter().map(|p| projection.project(*p)).collect())
        .collect();
    for (zone, (g, feats)) in &graphs {
        let scores = centrality::forward(&model, g, feats)?;
        let kept = centrality::percentile_filter(&scores, config.centrality.tau)?;
        for (i, node) in g.nodes().iter().enumerate() {
            rows.push(CentralityRow {
                zone_id: (*zone).to_string(),
                node_id: node.id,
                score: scores.values[i],
                kept: kept[i],
            });
            if !kept[i] {
                continue;
            }
            let parent =
                hexgrid::planar_to_cell(node.pos, config.demand.parent_resolution, spec)?;
            let poi_load = grid.parents.get(&parent).map_or(0.0, |f| f.poi_score);
            let excluded = exclusion_rings
                .iter()
                .any(|ring| point_in_polygon(node.pos, ring));
            candidates.push(CandidateSite {
                id: node.id,
                location: node.geo,
                pos: node.pos,
                zone_id: (*zone).to_string(),
                c_gnn: scores.values[i],
                poi_load,
                sigma: 0.0,
                excluded,
            });
        }
    }
    mclp::compute_sigma(&mut candidates, config.mclp.beta_poi, config.mclp.beta_cent)?;
    Ok(CentralityStage { rows, candidates })
}

struct DemandStage {
    points: Vec<DemandPoint>,
    weights: Vec<f64>,
}

fn demand_stage(
    config: &PipelineConfig,
    inputs: &LoadedInputs,
    grid: &GridStage,
) -> Result<DemandStage> {
    let indices: Vec<HexIndex> = inputs.cells.iter().map(|c| c.index).collect();
    let build = demand::build_demand_points(
        &indices,
        &grid.parents,
        config.demand.w_pop,
        config.demand.w_poi,
        &config.grid,
    )?;
    if build.orphans > 0 {
        log::warn!("{} cells have no parent features and carry no demand", build.orphans);
    }
    let mut points = build.points;
    let mut weights: Vec<f64> = points.iter().map(|p| p.weight).collect();
    if config.mclp.income_upweight > 1.0 {
        // Points align with cells by construction (ids in input order).
        let incomes: Vec<f64> = inputs.cells.iter().map(|c| c.median_income).collect();
        weights = mclp::apply_income_upweight(&weights, &incomes, config.mclp.income_upweight)?;
        for (point, w) in points.iter_mut().zip(&weights) {
            point.weight = *w;
        }
    }
    Ok(DemandStage { points, weights })
}

struct SelectionStage {
    /// Candidates that survived per-zone thinning, in evaluation order.
    advanced: Vec<CandidateSite>,
    /// Index into the full candidate list per advanced candidate.
    advanced_from: Vec<usize>,
    selection: Vec<SelectionRow>,
    selected: Vec<usize>,
    coverage_fraction: f64,
    total_demand: f64,
    zone_best: BTreeMap<String, u64>,
}

fn selection_stage(
    config: &PipelineConfig,
    inputs: &LoadedInputs,
    candidates: &[CandidateSite],
    points: &[DemandPoint],
    weights: &[f64],
) -> Result<SelectionStage> {
    let ranked = mclp::rank_per_zone(candidates, config.mclp.top_k)?;
    let mut advanced = Vec::new();
    let mut advanced_from = Vec::new();
    for (_zone, indices) in &ranked {
        for &i in indices {
            advanced.push(candidates[i].clone());
            advanced_from.push(i);
        }
    }
    let index = mclp::build_coverage_index(&advanced, points, config.mclp.radius_m)?;
    let result = match (config.mclp.budget, config.mclp.alpha) {
        (Some(budget), None) => mclp::greedy_budget(&advanced, &index, weights, budget)?,
        (None, Some(alpha)) => mclp::greedy_coverage(&advanced, &index, weights, alpha)?,
        _ => unreachable!("config validation enforces exactly one mode"),
    };

    let selection: Vec<SelectionRow> = result
        .steps
        .iter()
        .enumerate()
        .map(|(i, step)| {
            let site = &advanced[step.candidate_index];
            SelectionRow {
                step: i + 1,
                site_id: site.id,
                zone_id: site.zone_id.clone(),
                location: site.location,
                marginal_demand: step.marginal_demand,
                cumulative_fraction: step.cumulative_fraction,
            }
        })
        .collect();

    // Zone recommendation: blend each candidate's standalone coverage with
    // its centrality.
    let standalone: Vec<f64> = index
        .sets
        .iter()
        .map(|set| set.iter().map(|&j| weights[j]).sum())
        .collect();
    let zone_list: Vec<String> = inputs.zones.iter().map(|z| z.zone_id.clone()).collect();
    let scores = mclp::score_zone_sites(
        &advanced,
        &standalone,
        &zone_list,
        config.mclp.beta_cent,
        config.mclp.beta_cov,
    )?;
    for zone in &scores.skipped {
        log::warn!("zone {zone}: no candidate to recommend");
    }
    let zone_best = scores
        .best
        .iter()
        .map(|(zone, &i)| (zone.clone(), advanced[i].id))
        .collect();

    Ok(SelectionStage {
        selected: result.steps.iter().map(|s| s.candidate_index).collect(),
        coverage_fraction: result.coverage_fraction,
        total_demand: result.total_demand,
        advanced,
        advanced_from,
        selection,
        zone_best,
    })
}

struct RepairStage {
    hubs: Vec<Hub>,
    report: ReachabilityReport,
    /// zone and county per added hub, aligned with the tail of `hubs`.
    added_home: BTreeMap<u64, (String, String)>,
}

fn repair_stage(
    config: &PipelineConfig,
    grid: &GridStage,
    advanced: &[CandidateSite],
    selected: &[usize],
) -> Result<RepairStage> {
    let initial: Vec<Hub> = selected
        .iter()
        .map(|&i| Hub {
            id: advanced[i].id,
            pos: advanced[i].pos,
            min_ports: config.queueing.min_ports,
            added_by_repair: false,
        })
        .collect();
    let result = voronoi::repair_coverage(&grid.coarse, &initial, config.reachability.threshold_m)?;
    let mut added_home = BTreeMap::new();
    for hub in &result.added {
        // An added hub sits exactly on the centroid that triggered it.
        let centroid = grid
            .coarse
            .iter()
            .position(|c| c.pos == hub.pos)
            .ok_or_else(|| Error::Numerical("repair hub lost its centroid".into()))?;
        added_home.insert(hub.id, grid.coarse_home[centroid].clone());
    }
    Ok(RepairStage {
        hubs: result.hubs,
        report: result.report,
        added_home,
    })
}

/// Penetration share per county per year offset.
fn county_shares(
    config: &PipelineConfig,
    inputs: &LoadedInputs,
) -> Result<BTreeMap<String, Vec<f64>>> {
    let envelope = PenetrationEnvelope::from_caps(config.forecast.envelope.clone())?;
    let mut shares = BTreeMap::new();
    for county in &inputs.counties {
        let growth = county.cagr()?;
        let betas = (0..config.forecast.years)
            .map(|k| forecast::project_share(county.beta(), growth, k, &envelope))
            .collect::<Result<Vec<f64>>>()?;
        shares.insert(county.county_id.clone(), betas);
    }
    Ok(shares)
}

fn mu_for(config: &PipelineConfig, charger_type: ChargerType) -> f64 {
    match charger_type {
        ChargerType::Dcfc => config.queueing.mu_dcfc,
        ChargerType::L2 => config.queueing.mu_l2,
    }
}

fn cost_for(config: &PipelineConfig, charger_type: ChargerType, wage: f64) -> CostParams {
    let costs = &config.queueing.costs;
    let multiplier = config.queueing.area_multipliers.multiplier(config.queueing.area_class);
    let (unit, install) = match charger_type {
        ChargerType::Dcfc => (costs.dcfc_unit, costs.dcfc_install),
        ChargerType::L2 => (costs.l2_unit, costs.l2_install),
    };
    CostParams {
        charger_type,
        service_rate: mu_for(config, charger_type),
        c_port: unit,
        c_install: install * multiplier,
        c_salary: wage,
    }
}

fn policy_for(config: &PipelineConfig, min_ports: u32) -> SizingPolicy {
    SizingPolicy {
        utilisation_cap: config.queueing.utilisation_cap,
        waiting_spaces: config.queueing.waiting_spaces,
        min_ports: min_ports.max(config.queueing.min_ports),
        max_ports: config.queueing.max_ports.max(min_ports),
    }
}

/// First year the minimum build violates the utilisation cap; 1 if never.
fn activation_year(
    config: &PipelineConfig,
    design_gross: f64,
    betas: &[f64],
    mu: f64,
    min_ports: u32,
    outage: f64,
) -> Result<u32> {
    for (k, beta) in betas.iter().enumerate() {
        let lambda = design_gross * beta;
        if lambda == 0.0 {
            continue;
        }
        let params = QueueParams::new(
            lambda,
            mu,
            min_ports,
            outage,
            min_ports + config.queueing.waiting_spaces,
        )?
        .with_mode(config.queueing.effective_ports);
        let binding = match params.and_then(|p| p.effective_ports()) {
            Ok(c_eff) => lambda / (c_eff * mu) > config.queueing.utilisation_cap,
            // Flooring wiped out the minimum build entirely.
            Err(Error::OutageInfeasible { .. }) => true,
            Err(e) => return Err(e),
        };
        if binding {
            return Ok(k as u32 + 1);
        }
    }
    Ok(1)
}

struct SizingStage {
    sites: Vec<PlannedSite>,
}

#[allow(clippy::too_many_arguments)]
fn sizing_stage(
    config: &PipelineConfig,
    inputs: &LoadedInputs,
    grid: &GridStage,
    advanced: &[CandidateSite],
    selected: &[usize],
    repair: &RepairStage,
    shares: &BTreeMap<String, Vec<f64>>,
) -> Result<SizingStage> {
    let zone_county = zone_county_map(inputs);
    let wages: BTreeMap<&str, f64> = inputs
        .counties
        .iter()
        .map(|c| (c.county_id.as_str(), c.avg_hourly_wage))
        .collect();
    let traffic: BTreeMap<u64, &[f64]> = inputs
        .traffic
        .iter()
        .map(|row| (row.site_id, row.gross.as_slice()))
        .collect();
    let outage = match &inputs.outages {
        Some(stats) => queueing::outage_rate(stats)?,
        None => 0.0,
    };

    // Population served by each repair hub, from the final assignment.
    let mut hub_population: BTreeMap<u64, f64> = BTreeMap::new();
    for assignment in &repair.report.assignments {
        *hub_population.entry(assignment.hub_id).or_insert(0.0) +=
            grid.coarse[assignment.centroid_id as usize].weight;
    }

    let selected_ids: BTreeSet<u64> = selected.iter().map(|&i| advanced[i].id).collect();
    let mut sites = Vec::new();
    for hub in &repair.hubs {
        let (zone_id, county_id, location, design_gross, source) = if hub.added_by_repair {
            let (zone, county) = repair
                .added_home
                .get(&hub.id)
                .cloned()
                .ok_or_else(|| Error::Numerical("added hub without a home zone".into()))?;
            let population = hub_population.get(&hub.id).copied().unwrap_or(0.0);
            let gross = population * config.queueing.hub_gross_per_capita;
            let location = grid.projection.unproject(hub.pos);
            (zone, county, location, gross, SiteSource::RepairHub)
        } else {
            debug_assert!(selected_ids.contains(&hub.id));
            let candidate = advanced
                .iter()
                .find(|c| c.id == hub.id)
                .ok_or_else(|| Error::Numerical("hub without a candidate".into()))?;
            let county = zone_county
                .get(candidate.zone_id.as_str())
                .cloned()
                .ok_or_else(|| {
                    Error::InvalidParameter(format!("zone {} has no county", candidate.zone_id))
                })?;
            let gross_profile = traffic.get(&hub.id).copied().ok_or_else(|| {
                Error::InvalidParameter(format!("site {} has no traffic row", hub.id))
            })?;
            // The design rate with the share factored out: profile mean
            // over the daytime window.
            let gross = forecast::arrival_rates(hub.id, gross_profile, 1.0)?.design_lambda;
            (
                candidate.zone_id.clone(),
                county,
                candidate.location,
                gross,
                SiteSource::Selected,
            )
        };
        let betas = shares.get(&county_id).ok_or_else(|| {
            Error::InvalidParameter(format!("no forecast for county {county_id}"))
        })?;
        let wage = wages.get(county_id.as_str()).copied().unwrap_or(0.0);
        let lambda_max = betas
            .iter()
            .map(|b| design_gross * b)
            .fold(0.0f64, f64::max);

        // Repair hubs are always fast-charge; otherwise the configured
        // type, with "auto" trying both and keeping the cheaper plan.
        let types: &[ChargerType] = if hub.added_by_repair {
            &[ChargerType::Dcfc]
        } else {
            match config.queueing.site_charger_type {
                SiteChargerType::Dcfc => &[ChargerType::Dcfc],
                SiteChargerType::L2 => &[ChargerType::L2],
                SiteChargerType::Auto => &[ChargerType::Dcfc, ChargerType::L2],
            }
        };
        let policy = policy_for(config, hub.min_ports);
        let mut best: Option<SitePlan> = None;
        let mut last_err = None;
        for &t in types {
            let cost = cost_for(config, t, wage);
            match queueing::optimize_ports(
                hub.id,
                lambda_max,
                outage,
                &cost,
                &policy,
                config.queueing.effective_ports,
            ) {
                Ok(plan) => {
                    if best.as_ref().map_or(true, |b| plan.objective < b.objective) {
                        best = Some(plan);
                    }
                }
                Err(e) => last_err = Some(e),
            }
        }
        let plan = match best {
            Some(plan) => plan,
            None => return Err(last_err.expect("at least one type attempted")),
        };
        let activation = activation_year(
            config,
            design_gross,
            betas,
            mu_for(config, plan.charger_type),
            policy.min_ports,
            outage,
        )?;
        sites.push(PlannedSite {
            site_id: hub.id,
            zone_id,
            county_id,
            location,
            pos: hub.pos,
            source: if hub.added_by_repair {
                SiteSource::RepairHub
            } else {
                SiteSource::Selected
            },
            activation_year: activation,
            plan,
            design_gross,
        });
        debug_assert_eq!(sites.last().unwrap().source, source);
    }
    sites.sort_by_key(|s| s.site_id);
    Ok(SizingStage { sites })
}

struct StagingStage {
    forecast: Vec<ForecastRow>,
    capacity_path: BTreeMap<String, Vec<u32>>,
    yearly_capital: Vec<f64>,
}

fn staging_stage(
    config: &PipelineConfig,
    inputs: &LoadedInputs,
    shares: &BTreeMap<String, Vec<f64>>,
    sites: &[PlannedSite],
) -> Result<StagingStage> {
    let years = config.forecast.years as usize;
    let mut forecast_rows = Vec::new();
    for (county, betas) in shares {
        for (k, beta) in betas.iter().enumerate() {
            forecast_rows.push(ForecastRow {
                county_id: county.clone(),
                year: k as u32 + 1,
                beta: *beta,
            });
        }
    }

    let wages: BTreeMap<&str, f64> = inputs
        .counties
        .iter()
        .map(|c| (c.county_id.as_str(), c.avg_hourly_wage))
        .collect();
    let outage = match &inputs.outages {
        Some(stats) => queueing::outage_rate(stats)?,
        None => 0.0,
    };
    let mut capacity_path: BTreeMap<String, Vec<u32>> = BTreeMap::new();
    capacity_path.insert(ChargerType::Dcfc.as_str().into(), vec![0; years]);
    capacity_path.insert(ChargerType::L2.as_str().into(), vec![0; years]);
    let mut yearly_capital = vec![0.0; years];
    for site in sites {
        yearly_capital[(site.activation_year - 1) as usize] += site.plan.c_station;
        let betas = &shares[&site.county_id];
        let wage = wages.get(site.county_id.as_str()).copied().unwrap_or(0.0);
        let cost = cost_for(config, site.plan.charger_type, wage);
        let min_ports = match site.source {
            SiteSource::RepairHub => voronoi::REPAIR_HUB_MIN_PORTS,
            SiteSource::Selected => config.queueing.min_ports,
        };
        let policy = policy_for(config, min_ports);
        let path = capacity_path
            .get_mut(site.plan.charger_type.as_str())
            .expect("both types present");
        for (k, beta) in betas.iter().enumerate().take(years) {
            if site.activation_year as usize > k + 1 {
                continue;
            }
            let lambda = site.design_gross * beta;
            let plan = queueing::optimize_ports(
                site.site_id,
                lambda,
                outage,
                &cost,
                &policy,
                config.queueing.effective_ports,
            )?;
            path[k] += plan.c;
        }
    }
    Ok(StagingStage {
        forecast: forecast_rows,
        capacity_path,
        yearly_capital,
    })
}

struct ReportsStage {
    coverage: Vec<CoverageMetrics>,
    equity: EquityReport,
}

fn reports_stage(
    config: &PipelineConfig,
    inputs: &LoadedInputs,
    grid: &GridStage,
    site_positions: &[PlanarPoint],
) -> Result<ReportsStage> {
    let study_ring: Vec<PlanarPoint> = inputs
        .study_area
        .iter()
        .map(|p| grid.projection.project(*p))
        .collect();
    let coverage = config
        .equity
        .radii_m
        .iter()
        .map(|&radius| {
            equity::coverage_metrics(
                &grid.parent_positions,
                &study_ring,
                site_positions,
                radius,
                config.equity.mc_samples,
                config.seed,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let spec = &config.grid;
    let equity_cells: Vec<EquityCell> = inputs
        .cells
        .iter()
        .map(|cell| {
            Ok(EquityCell {
                pos: hexgrid::centroid_planar(cell.index, spec)?,
                population: cell.population,
                median_income: cell.median_income,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let equity = equity::equity_report(&equity_cells, site_positions)?;
    Ok(ReportsStage { coverage, equity })
}

fn execute(
    config: &PipelineConfig,
    inputs: &LoadedInputs,
    warnings: usize,
    out_dir: &Path,
    debug: bool,
) -> Result<BuildPlan> {
    let grid = stage("grid", || grid_stage(config, inputs))?;
    let centrality = stage("centrality", || centrality_stage(config, inputs, &grid))?;
    let demand = stage("demand", || demand_stage(config, inputs, &grid))?;
    let selection = stage("selection", || {
        selection_stage(config, inputs, &centrality.candidates, &demand.points, &demand.weights)
    })?;
    let repair = stage("repair", || {
        repair_stage(config, &grid, &selection.advanced, &selection.selected)
    })?;
    let shares = stage("sizing", || county_shares(config, inputs))?;
    let sizing = stage("sizing", || {
        sizing_stage(
            config,
            inputs,
            &grid,
            &selection.advanced,
            &selection.selected,
            &repair,
            &shares,
        )
    })?;
    let staging = stage("staging", || {
        staging_stage(config, inputs, &shares, &sizing.sites)
    })?;
    let site_positions: Vec<PlanarPoint> = sizing.sites.iter().map(|s| s.pos).collect();
    let reports = stage("reports", || {
        reports_stage(config, inputs, &grid, &site_positions)
    })?;

    let plan = BuildPlan {
        sites: sizing.sites,
        selection: selection.selection.clone(),
        coverage_fraction: selection.coverage_fraction,
        total_demand: selection.total_demand,
        reachability: repair.report,
        forecast: staging.forecast,
        coverage: reports.coverage,
        equity: reports.equity,
        capacity_path: staging.capacity_path,
        yearly_capital: staging.yearly_capital,
        zone_best: selection.zone_best.clone(),
        warnings,
    };
    write_outputs(config, &plan, &centrality, &selection, &demand, &grid, out_dir, debug)?;
    Ok(plan)
}

#[allow(clippy::too_many_arguments)]
fn write_outputs(
    config: &PipelineConfig,
    plan: &BuildPlan,
    centrality: &CentralityStage,
    selection: &SelectionStage,
    demand: &DemandStage,
    grid: &GridStage,
    out_dir: &Path,
    debug: bool,
) -> Result<()> {
    let features: Vec<SiteFeature> = plan
        .sites
        .iter()
        .map(|s| SiteFeature {
            site_id: s.site_id,
            zone_id: s.zone_id.clone(),
            location: s.location,
            charger_type: s.plan.charger_type.as_str(),
            ports: s.plan.c,
            activation_year: s.activation_year,
            added_by_repair: s.source == SiteSource::RepairHub,
        })
        .collect();
    io::write_text(&out_dir.join("plan.geojson"), &io::sites_geojson(&features))?;
    let site_plans: Vec<SitePlan> = plan.sites.iter().map(|s| s.plan.clone()).collect();
    io::write_text(&out_dir.join("site_plans.csv"), &io::site_plans_csv(&site_plans))?;
    io::write_text(&out_dir.join("selection.csv"), &io::selection_csv(&plan.selection))?;
    io::write_text(
        &out_dir.join("reachability.csv"),
        &io::reachability_csv(&plan.reachability),
    )?;
    io::write_text(&out_dir.join("forecast.csv"), &io::forecast_csv(&plan.forecast))?;
    io::write_text(&out_dir.join("summary.json"), &summary_json(config, plan))?;

    if debug {
        io::write_text(&out_dir.join("demand.csv"), &io::demand_csv(&demand.points))?;
        io::write_text(
            &out_dir.join("centrality.csv"),
            &io::centrality_csv(&centrality.rows),
        )?;
        io::write_text(
            &out_dir.join("candidates.csv"),
            &candidates_csv(&centrality.candidates, selection),
        )?;
        io::write_text(&out_dir.join("parents.csv"), &parents_csv(grid))?;
    }
    Ok(())
}

fn candidates_csv(candidates: &[CandidateSite], selection: &SelectionStage) -> String {
    use std::fmt::Write as _;
    let advanced: BTreeSet<usize> = selection.advanced_from.iter().copied().collect();
    let mut s = String::from("site_id,zone_id,lat,lon,c_gnn,poi_load,sigma,excluded,advanced\n");
    for (i, c) in candidates.iter().enumerate() {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            c.id,
            c.zone_id,
            io::fmt_coord(c.location.lat),
            io::fmt_coord(c.location.lon),
            c.c_gnn,
            c.poi_load,
            c.sigma,
            c.excluded,
            advanced.contains(&i),
        );
    }
    s
}

fn parents_csv(grid: &GridStage) -> String {
    use std::fmt::Write as _;
    let mut s = String::from("res,q,r,population,poi_score\n");
    for (idx, f) in &grid.parents {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            idx.resolution, idx.q, idx.r, f.population, f.poi_score
        );
    }
    s
}

fn summary_json(config: &PipelineConfig, plan: &BuildPlan) -> String {
    let coverage: Vec<_> = plan
        .coverage
        .iter()
        .map(|c| {
            json!({
                "radius_m": c.radius_m,
                "tile_coverage": c.tile_coverage,
                "area_coverage": c.area_coverage,
            })
        })
        .collect();
    let mut sources = BTreeMap::new();
    sources.insert(
        "selected",
        plan.sites.iter().filter(|s| s.source == SiteSource::Selected).count(),
    );
    sources.insert(
        "repair_hubs",
        plan.sites.iter().filter(|s| s.source == SiteSource::RepairHub).count(),
    );
    let total_capital: f64 = plan.yearly_capital.iter().sum();
    let doc = json!({
        "capacity_path": plan.capacity_path,
        "coverage": coverage,
        "coverage_fraction": plan.coverage_fraction,
        "equity": {
            "low_income_mean_m": plan.equity.low_income_mean_m,
            "mid_income_mean_m": plan.equity.mid_income_mean_m,
            "high_income_mean_m": plan.equity.high_income_mean_m,
            "gap_m": plan.equity.gap_m,
        },
        "max_assignment_distance_m": plan.reachability.max_distance_m,
        "seed": config.seed,
        "sites": sources,
        "total_capital": total_capital,
        "total_demand": plan.total_demand,
        "validation_warnings": plan.warnings,
        "yearly_capital": plan.yearly_capital,
        "years": config.forecast.years,
        "zone_best": plan.zone_best,
    });
    io::json_to_string_sorted(&doc)
}

/// The selection stage alone: everything up to and including the greedy
/// cover, without repair, sizing, or staging.
#[derive(Debug, Clone)]
pub struct SelectionOutput {
    pub selection: Vec<SelectionRow>,
    pub coverage_fraction: f64,
    pub total_demand: f64,
    pub zone_best: BTreeMap<String, u64>,
}

pub fn run_selection(config: &PipelineConfig) -> Result<SelectionOutput> {
    config.validate()?;
    let inputs = load_inputs(config)?;
    let report = validate_inputs(config, &inputs);
    if report.has_fatal() {
        return Err(Error::Validation(report));
    }
    let grid = stage("grid", || grid_stage(config, &inputs))?;
    let centrality = stage("centrality", || centrality_stage(config, &inputs, &grid))?;
    let demand = stage("demand", || demand_stage(config, &inputs, &grid))?;
    let sel = stage("selection", || {
        selection_stage(config, &inputs, &centrality.candidates, &demand.points, &demand.weights)
    })?;
    Ok(SelectionOutput {
        selection: sel.selection,
        coverage_fraction: sel.coverage_fraction,
        total_demand: sel.total_demand,
        zone_best: sel.zone_best,
    })
}

/// Coverage and equity metrics recomputed for an existing set of station
/// locations, without re-running the plan itself.
#[derive(Debug, Clone)]
pub struct ReportOutput {
    pub coverage: Vec<CoverageMetrics>,
    pub equity: EquityReport,
    pub sites: usize,
}

pub fn recompute_reports(config: &PipelineConfig, sites: &[GeoPoint]) -> Result<ReportOutput> {
    config.validate()?;
    let inputs = load_inputs(config)?;
    let report = validate_inputs(config, &inputs);
    if report.has_fatal() {
        return Err(Error::Validation(report));
    }
    let grid = stage("grid", || grid_stage(config, &inputs))?;
    let positions: Vec<PlanarPoint> = sites.iter().map(|p| grid.projection.project(*p)).collect();
    let reports = stage("reports", || reports_stage(config, &inputs, &grid, &positions))?;
    Ok(ReportOutput {
        coverage: reports.coverage,
        equity: reports.equity,
        sites: sites.len(),
    })
}
