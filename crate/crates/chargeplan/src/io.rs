//! File formats: CSV and GeoJSON readers with line-addressed errors, and
//! bit-stable writers (LF endings, sorted JSON keys, fixed six-decimal
//! coordinates).
//!
//! Non-coordinate floats are written with the shortest round-trip
//! rendering, so re-reading a written file recovers the exact values.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;
use serde_json::Value;

use crate::demand::{DemandPoint, PoiClass, PoiRecord};
use crate::error::{Error, Result};
use crate::forecast::CountyStats;
use crate::geom::GeoPoint;
use crate::hexgrid::{HexCell, HexIndex};
use crate::queueing::{OutageEvent, OutageStats, SitePlan};
use crate::voronoi::ReachabilityReport;

pub use crate::roadgraph::EdgeRecord;

/// A zone boundary: outer ring only, no closing duplicate vertex. The
/// optional county links the zone to a row in the county table.
#[derive(Debug, Clone, PartialEq)]
pub struct ZonePolygon {
    pub zone_id: String,
    pub county_id: Option<String>,
    pub ring: Vec<GeoPoint>,
}

/// Hourly gross arrival counts for one candidate site.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficRow {
    pub site_id: u64,
    pub gross: Vec<f64>,
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_error(path: &Path, line: u64, message: String) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        line,
        message,
    }
}

fn format_error(path: &Path, message: String) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message,
    }
}

fn open_csv(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => io_error(path, source),
            other => format_error(path, format!("{other:?}")),
        })
}

/// Drive a typed row parser over every record, tagging failures with the
/// 1-based source line.
fn read_rows<T, R>(path: &Path, mut convert: impl FnMut(T, u64) -> Result<R>) -> Result<Vec<R>>
where
    T: for<'de> Deserialize<'de>,
{
    let mut reader = open_csv(path)?;
    let headers = reader
        .headers()
        .map_err(|e| format_error(path, e.to_string()))?
        .clone();
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            csv_error(path, line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let row: T = record
            .deserialize(Some(&headers))
            .map_err(|e| csv_error(path, line, e.to_string()))?;
        out.push(convert(row, line)?);
    }
    Ok(out)
}

#[derive(Deserialize)]
struct CellRow {
    res: u8,
    q: i64,
    r: i64,
    lat: f64,
    lon: f64,
    population: f64,
    poi_score: f64,
    median_income: f64,
    ev_share: f64,
    zone_id: String,
}

/// Columns: res,q,r,lat,lon,population,poi_score,median_income,ev_share,zone_id.
pub fn read_cells(path: &Path) -> Result<Vec<HexCell>> {
    read_rows(path, |row: CellRow, _line| {
        Ok(HexCell {
            index: HexIndex::new(row.res, row.q, row.r),
            centroid: GeoPoint::new(row.lat, row.lon),
            population: row.population,
            poi_score: row.poi_score,
            median_income: row.median_income,
            ev_share: row.ev_share,
            zone_id: row.zone_id,
        })
    })
}

#[derive(Deserialize)]
struct EdgeRow {
    zone_id: String,
    node_a_id: u64,
    node_b_id: u64,
    lat_a: f64,
    lon_a: f64,
    lat_b: f64,
    lon_b: f64,
}

/// Columns: zone_id,node_a_id,node_b_id,lat_a,lon_a,lat_b,lon_b.
pub fn read_edges(path: &Path) -> Result<Vec<EdgeRecord>> {
    read_rows(path, |row: EdgeRow, _line| {
        Ok(EdgeRecord {
            zone_id: row.zone_id,
            node_a: row.node_a_id,
            node_b: row.node_b_id,
            a: GeoPoint::new(row.lat_a, row.lon_a),
            b: GeoPoint::new(row.lat_b, row.lon_b),
        })
    })
}

#[derive(Deserialize)]
struct PoiRow {
    lat: f64,
    lon: f64,
    canonical_class: String,
    count: u32,
}

/// Columns: lat,lon,canonical_class,count. Unknown class names are fatal
/// and report the offending line.
pub fn read_pois(path: &Path) -> Result<Vec<PoiRecord>> {
    read_rows(path, |row: PoiRow, line| {
        let class: PoiClass = row
            .canonical_class
            .parse()
            .map_err(|e: Error| csv_error(path, line, e.to_string()))?;
        Ok(PoiRecord {
            location: GeoPoint::new(row.lat, row.lon),
            class,
            count: row.count,
        })
    })
}

/// Columns: county_id,ev_count,vehicle_count,share_2024,share_2025,avg_hourly_wage.
pub fn read_counties(path: &Path) -> Result<Vec<CountyStats>> {
    read_rows(path, |row: CountyStats, _line| Ok(row))
}

/// Columns: site_id,h0,...,h23. A missing hour column is fatal and named.
pub fn read_traffic(path: &Path) -> Result<Vec<TrafficRow>> {
    let mut reader = open_csv(path)?;
    let headers = reader
        .headers()
        .map_err(|e| format_error(path, e.to_string()))?
        .clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let site_col = column("site_id")
        .ok_or_else(|| format_error(path, "traffic header is missing column site_id".into()))?;
    let mut hour_cols = Vec::with_capacity(24);
    for hour in 0..24 {
        let name = format!("h{hour}");
        let col = column(&name).ok_or_else(|| {
            format_error(path, format!("traffic header is missing hour column {name}"))
        })?;
        hour_cols.push(col);
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            csv_error(path, line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |col: usize| {
            record
                .get(col)
                .ok_or_else(|| csv_error(path, line, format!("row has no column {col}")))
        };
        let site_id: u64 = field(site_col)?
            .parse()
            .map_err(|e| csv_error(path, line, format!("site_id: {e}")))?;
        let mut gross = Vec::with_capacity(24);
        for (hour, &col) in hour_cols.iter().enumerate() {
            let v: f64 = field(col)?
                .parse()
                .map_err(|e| csv_error(path, line, format!("h{hour}: {e}")))?;
            gross.push(v);
        }
        out.push(TrafficRow { site_id, gross });
    }
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OutageFile {
    total_households: f64,
    total_days: f64,
    #[serde(default)]
    events: Vec<OutageEventRow>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OutageEventRow {
    days: f64,
    households: f64,
}

/// JSON document: {"total_households": .., "total_days": .., "events":
/// [{"days": .., "households": ..}, ..]}.
pub fn read_outages(path: &Path) -> Result<OutageStats> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let file: OutageFile =
        serde_json::from_str(&text).map_err(|e| format_error(path, e.to_string()))?;
    Ok(OutageStats {
        events: file
            .events
            .into_iter()
            .map(|e| OutageEvent {
                days: e.days,
                households: e.households,
            })
            .collect(),
        total_households: file.total_households,
        total_days: file.total_days,
    })
}

fn parse_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| format_error(path, e.to_string()))
}

/// Decode one GeoJSON position array: [lon, lat].
fn parse_position(value: &Value) -> std::result::Result<GeoPoint, String> {
    let pair = value.as_array().ok_or("position is not an array")?;
    if pair.len() < 2 {
        return Err("position needs [lon, lat]".into());
    }
    let lon = pair[0].as_f64().ok_or("longitude is not a number")?;
    let lat = pair[1].as_f64().ok_or("latitude is not a number")?;
    Ok(GeoPoint::new(lat, lon))
}

/// Decode a linear ring, dropping the GeoJSON closing duplicate vertex.
fn parse_ring(value: &Value) -> std::result::Result<Vec<GeoPoint>, String> {
    let raw = value.as_array().ok_or("ring is not an array")?;
    let mut ring = raw
        .iter()
        .map(parse_position)
        .collect::<std::result::Result<Vec<GeoPoint>, String>>()?;
    if ring.len() >= 2 && ring.first() == ring.last() {
        ring.pop();
    }
    if ring.len() < 3 {
        return Err(format!("ring has {} distinct vertices, need >= 3", ring.len()));
    }
    Ok(ring)
}

/// Outer rings of a Polygon or MultiPolygon geometry; holes are ignored.
fn geometry_outer_rings(geometry: &Value) -> std::result::Result<Vec<Vec<GeoPoint>>, String> {
    let kind = geometry
        .get("type")
        .and_then(Value::as_str)
        .ok_or("geometry has no type")?;
    let coords = geometry.get("coordinates").ok_or("geometry has no coordinates")?;
    match kind {
        "Polygon" => {
            let rings = coords.as_array().ok_or("coordinates is not an array")?;
            let outer = rings.first().ok_or("polygon has no rings")?;
            Ok(vec![parse_ring(outer)?])
        }
        "MultiPolygon" => {
            let polys = coords.as_array().ok_or("coordinates is not an array")?;
            let mut out = Vec::with_capacity(polys.len());
            for poly in polys {
                let rings = poly.as_array().ok_or("polygon is not an array")?;
                let outer = rings.first().ok_or("polygon has no rings")?;
                out.push(parse_ring(outer)?);
            }
            Ok(out)
        }
        other => Err(format!("unsupported geometry type {other:?}")),
    }
}

/// Feature nodes of a document that is a FeatureCollection, a bare Feature,
/// or a bare geometry (returned as a single anonymous feature).
fn document_features(doc: &Value) -> std::result::Result<Vec<&Value>, String> {
    match doc.get("type").and_then(Value::as_str) {
        Some("FeatureCollection") => {
            let features = doc
                .get("features")
                .and_then(Value::as_array)
                .ok_or("FeatureCollection has no features array")?;
            Ok(features.iter().collect())
        }
        Some("Feature") => Ok(vec![doc]),
        Some("Polygon") | Some("MultiPolygon") => Ok(vec![doc]),
        Some(other) => Err(format!("unsupported document type {other:?}")),
        None => Err("document has no type".into()),
    }
}

fn feature_geometry(feature: &Value) -> std::result::Result<&Value, String> {
    match feature.get("type").and_then(Value::as_str) {
        Some("Feature") => feature.get("geometry").ok_or_else(|| "feature has no geometry".into()),
        _ => Ok(feature),
    }
}

/// Zone boundaries: FeatureCollection of Polygon features, each carrying a
/// string property `zone_id`.
pub fn read_zones(path: &Path) -> Result<Vec<ZonePolygon>> {
    let doc = parse_json(path)?;
    let features = document_features(&doc).map_err(|m| format_error(path, m))?;
    let mut zones = Vec::with_capacity(features.len());
    for (i, feature) in features.iter().enumerate() {
        let build = || -> std::result::Result<ZonePolygon, String> {
            let properties = feature.get("properties");
            let zone_id = properties
                .and_then(|p| p.get("zone_id"))
                .and_then(Value::as_str)
                .ok_or("feature has no string property zone_id")?
                .to_string();
            let county_id = match properties.and_then(|p| p.get("county_id")) {
                None | Some(Value::Null) => None,
                Some(Value::String(id)) => Some(id.clone()),
                Some(_) => return Err(format!("zone {zone_id}: county_id must be a string")),
            };
            let geometry = feature_geometry(feature)?;
            let mut rings = geometry_outer_rings(geometry)?;
            if rings.len() != 1 {
                return Err(format!("zone {zone_id} must be a single polygon"));
            }
            Ok(ZonePolygon {
                zone_id,
                county_id,
                ring: rings.pop().expect("one ring"),
            })
        };
        zones.push(build().map_err(|m| format_error(path, format!("feature {i}: {m}")))?);
    }
    Ok(zones)
}

/// Point locations of every feature in a station FeatureCollection.
pub fn read_site_locations(path: &Path) -> Result<Vec<GeoPoint>> {
    let doc = parse_json(path)?;
    let features = document_features(&doc).map_err(|m| format_error(path, m))?;
    let mut points = Vec::with_capacity(features.len());
    for (i, feature) in features.iter().enumerate() {
        let build = || -> std::result::Result<GeoPoint, String> {
            let geometry = feature_geometry(feature)?;
            match geometry.get("type").and_then(Value::as_str) {
                Some("Point") => {}
                other => return Err(format!("expected a Point geometry, got {other:?}")),
            }
            let coordinates = geometry.get("coordinates").ok_or("geometry has no coordinates")?;
            parse_position(coordinates)
        };
        points.push(build().map_err(|m| format_error(path, format!("feature {i}: {m}")))?);
    }
    Ok(points)
}

/// Study area: the first polygon's outer ring.
pub fn read_study_area(path: &Path) -> Result<Vec<GeoPoint>> {
    let rings = read_polygons(path)?;
    rings
        .into_iter()
        .next()
        .ok_or_else(|| format_error(path, "document contains no polygon".into()))
}

/// Every outer ring in the document, in feature order.
pub fn read_polygons(path: &Path) -> Result<Vec<Vec<GeoPoint>>> {
    let doc = parse_json(path)?;
    let features = document_features(&doc).map_err(|m| format_error(path, m))?;
    let mut rings = Vec::new();
    for (i, feature) in features.iter().enumerate() {
        let geometry =
            feature_geometry(feature).map_err(|m| format_error(path, format!("feature {i}: {m}")))?;
        let mut outer = geometry_outer_rings(geometry)
            .map_err(|m| format_error(path, format!("feature {i}: {m}")))?;
        rings.append(&mut outer);
    }
    Ok(rings)
}

/// Fixed six-decimal coordinate rendering; negative zero is normalised.
pub fn fmt_coord(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

/// Shortest round-trip float rendering shared by the CSV writers.
fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Write with LF endings only, creating parent directories as needed.
pub fn write_text(path: &Path, content: &str) -> Result<()> {
    debug_assert!(!content.contains('\r'), "writers must emit LF endings");
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| io_error(parent, e))?;
        }
    }
    std::fs::write(path, content.as_bytes()).map_err(|e| io_error(path, e))
}

/// Pretty JSON with keys sorted at every level and a trailing newline.
pub fn json_to_string_sorted(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON value serializes");
    s.push('\n');
    s
}

pub fn cells_csv(cells: &[HexCell]) -> String {
    let mut s = String::from(
        "res,q,r,lat,lon,population,poi_score,median_income,ev_share,zone_id\n",
    );
    for c in cells {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            c.index.resolution,
            c.index.q,
            c.index.r,
            fmt_coord(c.centroid.lat),
            fmt_coord(c.centroid.lon),
            fmt_f64(c.population),
            fmt_f64(c.poi_score),
            fmt_f64(c.median_income),
            fmt_f64(c.ev_share),
            c.zone_id,
        );
    }
    s
}

pub fn edges_csv(edges: &[EdgeRecord]) -> String {
    let mut s = String::from("zone_id,node_a_id,node_b_id,lat_a,lon_a,lat_b,lon_b\n");
    for e in edges {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            e.zone_id,
            e.node_a,
            e.node_b,
            fmt_coord(e.a.lat),
            fmt_coord(e.a.lon),
            fmt_coord(e.b.lat),
            fmt_coord(e.b.lon),
        );
    }
    s
}

pub fn pois_csv(pois: &[PoiRecord]) -> String {
    let mut s = String::from("lat,lon,canonical_class,count\n");
    for p in pois {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            fmt_coord(p.location.lat),
            fmt_coord(p.location.lon),
            p.class.as_str(),
            p.count,
        );
    }
    s
}

pub fn counties_csv(counties: &[CountyStats]) -> String {
    let mut s =
        String::from("county_id,ev_count,vehicle_count,share_2024,share_2025,avg_hourly_wage\n");
    for c in counties {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            c.county_id,
            fmt_f64(c.ev_count),
            fmt_f64(c.vehicle_count),
            fmt_f64(c.share_2024),
            fmt_f64(c.share_2025),
            fmt_f64(c.avg_hourly_wage),
        );
    }
    s
}

pub fn traffic_csv(rows: &[TrafficRow]) -> String {
    let mut s = String::from("site_id");
    for hour in 0..24 {
        let _ = write!(s, ",h{hour}");
    }
    s.push('\n');
    for row in rows {
        let _ = write!(s, "{}", row.site_id);
        for v in &row.gross {
            let _ = write!(s, ",{}", fmt_f64(*v));
        }
        s.push('\n');
    }
    s
}

pub fn demand_csv(points: &[DemandPoint]) -> String {
    let mut s = String::from("id,lat,lon,p_norm,s_norm,d\n");
    for p in points {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            p.id,
            fmt_coord(p.location.lat),
            fmt_coord(p.location.lon),
            fmt_f64(p.p_norm),
            fmt_f64(p.s_norm),
            fmt_f64(p.weight),
        );
    }
    s
}

/// One intersection's learned score and filter outcome.
#[derive(Debug, Clone)]
pub struct CentralityRow {
    pub zone_id: String,
    pub node_id: u64,
    pub score: f64,
    pub kept: bool,
}

pub fn centrality_csv(rows: &[CentralityRow]) -> String {
    let mut s = String::from("zone_id,node_id,c_v,kept\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            r.zone_id,
            r.node_id,
            fmt_f64(r.score),
            r.kept,
        );
    }
    s
}

/// One greedy selection step with the site's location and home zone.
#[derive(Debug, Clone)]
pub struct SelectionRow {
    pub step: usize,
    pub site_id: u64,
    pub zone_id: String,
    pub location: GeoPoint,
    pub marginal_demand: f64,
    pub cumulative_fraction: f64,
}

pub fn selection_csv(rows: &[SelectionRow]) -> String {
    let mut s = String::from("step,site_id,zone_id,lat,lon,marginal_demand,cumulative_fraction\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.step,
            r.site_id,
            r.zone_id,
            fmt_coord(r.location.lat),
            fmt_coord(r.location.lon),
            fmt_f64(r.marginal_demand),
            fmt_f64(r.cumulative_fraction),
        );
    }
    s
}

pub fn site_plans_csv(plans: &[SitePlan]) -> String {
    let mut s =
        String::from("site_id,type,c,c_eff,rho_eff,p0,lq,wq,c_station,c_waiting,objective\n");
    for p in plans {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            p.site_id,
            p.charger_type.as_str(),
            p.c,
            fmt_f64(p.metrics.c_eff),
            fmt_f64(p.metrics.rho_eff),
            fmt_f64(p.metrics.p0),
            fmt_f64(p.metrics.lq),
            fmt_f64(p.metrics.wq),
            fmt_f64(p.c_station),
            fmt_f64(p.c_waiting),
            fmt_f64(p.objective),
        );
    }
    s
}

pub fn reachability_csv(report: &ReachabilityReport) -> String {
    let mut s = String::from("centroid_id,hub_id,distance_m,violation\n");
    for a in &report.assignments {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            a.centroid_id,
            a.hub_id,
            fmt_f64(a.distance_m),
            a.distance_m > report.threshold_m,
        );
    }
    s
}

/// One county-year penetration projection.
#[derive(Debug, Clone)]
pub struct ForecastRow {
    pub county_id: String,
    pub year: u32,
    pub beta: f64,
}

pub fn forecast_csv(rows: &[ForecastRow]) -> String {
    let mut s = String::from("county_id,year,beta\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{}", r.county_id, r.year, fmt_f64(r.beta));
    }
    s
}

fn json_string(text: &str) -> String {
    serde_json::to_string(text).expect("string serializes")
}

/// A planned station as a GeoJSON point feature.
#[derive(Debug, Clone)]
pub struct SiteFeature {
    pub site_id: u64,
    pub zone_id: String,
    pub location: GeoPoint,
    pub charger_type: &'static str,
    pub ports: u32,
    pub activation_year: u32,
    pub added_by_repair: bool,
}

/// GeoJSON is assembled by hand so coordinates stay fixed six-decimal and
/// keys stay sorted, which `serde_json` number rendering cannot promise.
pub fn sites_geojson(features: &[SiteFeature]) -> String {
    let mut s = String::from("{\n  \"features\": [");
    for (i, f) in features.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(
            s,
            "\n    {{\n      \"geometry\": {{\n        \"coordinates\": [{}, {}],\n        \"type\": \"Point\"\n      }},\n      \"properties\": {{\n        \"activation_year\": {},\n        \"added_by_repair\": {},\n        \"charger_type\": {},\n        \"ports\": {},\n        \"site_id\": {},\n        \"zone_id\": {}\n      }},\n      \"type\": \"Feature\"\n    }}",
            fmt_coord(f.location.lon),
            fmt_coord(f.location.lat),
            f.activation_year,
            f.added_by_repair,
            json_string(f.charger_type),
            f.ports,
            f.site_id,
            json_string(&f.zone_id),
        );
    }
    if !features.is_empty() {
        s.push_str("\n  ");
    }
    s.push_str("],\n  \"type\": \"FeatureCollection\"\n}\n");
    s
}

fn ring_coordinates(ring: &[GeoPoint], indent: &str) -> String {
    let mut s = String::from("[\n");
    for p in ring.iter().chain(ring.first()) {
        let _ = writeln!(
            s,
            "{indent}  [{}, {}],",
            fmt_coord(p.lon),
            fmt_coord(p.lat)
        );
    }
    // Drop the trailing comma inserted above.
    s.truncate(s.trim_end_matches(",\n").len());
    let _ = write!(s, "\n{indent}]");
    s
}

pub fn zones_geojson(zones: &[ZonePolygon]) -> String {
    let mut s = String::from("{\n  \"features\": [");
    for (i, z) in zones.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let properties = match &z.county_id {
            Some(county) => format!(
                "\"county_id\": {},\n        \"zone_id\": {}",
                json_string(county),
                json_string(&z.zone_id)
            ),
            None => format!("\"zone_id\": {}", json_string(&z.zone_id)),
        };
        let _ = write!(
            s,
            "\n    {{\n      \"geometry\": {{\n        \"coordinates\": [{}],\n        \"type\": \"Polygon\"\n      }},\n      \"properties\": {{\n        {}\n      }},\n      \"type\": \"Feature\"\n    }}",
            ring_coordinates(&z.ring, "        "),
            properties,
        );
    }
    if !zones.is_empty() {
        s.push_str("\n  ");
    }
    s.push_str("],\n  \"type\": \"FeatureCollection\"\n}\n");
    s
}

pub fn polygon_geojson(ring: &[GeoPoint]) -> String {
    format!(
        "{{\n  \"coordinates\": [{}],\n  \"type\": \"Polygon\"\n}}\n",
        ring_coordinates(ring, "  ")
    )
}
