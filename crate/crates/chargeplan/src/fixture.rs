//! Deterministic synthetic study area for end-to-end runs and tests.
//!
//! A 36 x 13 km strip split into four zones: three western zones carry
//! road lattices of increasing sparsity, the eastern zone is roadless and
//! thinly populated so coverage repair has real work to do. Two counties
//! split the strip for the penetration forecast. All randomness flows from
//! one seeded generator in a fixed draw order, so a given seed reproduces
//! every file byte for byte.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::PipelineConfig;
use crate::demand::{PoiClass, PoiRecord};
use crate::error::Result;
use crate::forecast::CountyStats;
use crate::geom::{GeoPoint, PlanarPoint, Projection};
use crate::hexgrid::{self, GridSpec, HexCell};
use crate::io::{self, EdgeRecord, TrafficRow, ZonePolygon};
use crate::queueing::{OutageEvent, OutageStats};

pub const EXTENT_X_M: f64 = 36_000.0;
pub const EXTENT_Y_M: f64 = 13_000.0;
/// Zone boundaries along the west-east axis, in metres from the origin.
pub const ZONE_SPLITS_M: [f64; 3] = [11_000.0, 22_000.0, 29_000.0];
/// Resolution of the demand cells in cells.csv.
pub const CELL_RESOLUTION: u8 = 10;

/// Hourly traffic shape: commuter double peak, normalised to sum 1 below.
const SHAPE_RAW: [f64; 24] = [
    0.20, 0.15, 0.12, 0.12, 0.15, 0.30, 0.60, 0.90, 1.00, 0.85, 0.70, 0.65,
    0.70, 0.72, 0.75, 0.85, 0.95, 1.00, 0.90, 0.70, 0.50, 0.40, 0.30, 0.25,
];

#[derive(Debug, Clone)]
pub struct Fixture {
    pub config: PipelineConfig,
    pub cells: Vec<HexCell>,
    pub edges: Vec<EdgeRecord>,
    pub pois: Vec<PoiRecord>,
    pub counties: Vec<CountyStats>,
    pub traffic: Vec<TrafficRow>,
    pub zones: Vec<ZonePolygon>,
    pub study_area: Vec<GeoPoint>,
    pub outages: OutageStats,
}

struct ZoneDef {
    id: &'static str,
    county: &'static str,
    x0: f64,
    x1: f64,
    // columns, rows, first node id; None for the roadless zone
    lattice: Option<(usize, usize, u64)>,
    poi_count: usize,
    // daily vehicle volume range at an intersection
    volume: (f64, f64),
}

const ZONES: [ZoneDef; 4] = [
    ZoneDef {
        id: "Z1",
        county: "C01",
        x0: 0.0,
        x1: ZONE_SPLITS_M[0],
        lattice: Some((9, 8, 1000)),
        poi_count: 110,
        volume: (1_700.0, 2_600.0),
    },
    ZoneDef {
        id: "Z2",
        county: "C01",
        x0: ZONE_SPLITS_M[0],
        x1: ZONE_SPLITS_M[1],
        lattice: Some((8, 8, 2000)),
        poi_count: 80,
        volume: (1_100.0, 1_800.0),
    },
    ZoneDef {
        id: "Z3",
        county: "C02",
        x0: ZONE_SPLITS_M[1],
        x1: ZONE_SPLITS_M[2],
        lattice: Some((6, 8, 3000)),
        poi_count: 50,
        volume: (650.0, 1_250.0),
    },
    ZoneDef {
        id: "Z4",
        county: "C02",
        x0: ZONE_SPLITS_M[2],
        x1: EXTENT_X_M,
        lattice: None,
        poi_count: 18,
        volume: (0.0, 0.0),
    },
];

/// Zone splits above, restated for the field definitions below.
const MID_Y_M: f64 = EXTENT_Y_M / 2.0;

/// Zone containing a planar x coordinate.
pub fn zone_of_x(x: f64) -> &'static str {
    if x < ZONE_SPLITS_M[0] {
        "Z1"
    } else if x < ZONE_SPLITS_M[1] {
        "Z2"
    } else if x < ZONE_SPLITS_M[2] {
        "Z3"
    } else {
        "Z4"
    }
}

fn rect_ring(projection: &Projection, x0: f64, x1: f64) -> Vec<GeoPoint> {
    [
        PlanarPoint::new(x0, 0.0),
        PlanarPoint::new(x1, 0.0),
        PlanarPoint::new(x1, EXTENT_Y_M),
        PlanarPoint::new(x0, EXTENT_Y_M),
    ]
    .into_iter()
    .map(|p| projection.unproject(p))
    .collect()
}

fn gaussian(x: f64, y: f64, cx: f64, cy: f64, sigma: f64) -> f64 {
    let d2 = (x - cx).powi(2) + (y - cy).powi(2);
    (-d2 / (2.0 * sigma * sigma)).exp()
}

/// Residents per square kilometre: three urban bumps plus a rural floor.
fn population_density(x: f64, y: f64) -> f64 {
    900.0 * gaussian(x, y, 5_500.0, MID_Y_M, 4_200.0)
        + 650.0 * gaussian(x, y, 16_500.0, MID_Y_M, 3_800.0)
        + 350.0 * gaussian(x, y, 25_500.0, MID_Y_M, 3_200.0)
        + 8.0
}

/// Median household income: wealthy west, a low-income belt south of Z2.
fn income_field(x: f64, y: f64) -> f64 {
    let base = 38_000.0 + 26_000.0 * gaussian(x, y, 5_500.0, MID_Y_M, 7_000.0)
        - 14_000.0 * gaussian(x, y, 15_000.0, 3_500.0, 5_000.0)
        + 4_000.0 * (y / 2_500.0).sin();
    base.clamp(18_000.0, 95_000.0)
}

fn pick_class(rng: &mut ChaCha8Rng, urban: bool) -> PoiClass {
    let weights: [(PoiClass, f64); 6] = if urban {
        [
            (PoiClass::CommercialRetail, 0.30),
            (PoiClass::Parking, 0.22),
            (PoiClass::TransportHub, 0.12),
            (PoiClass::Workplace, 0.16),
            (PoiClass::GovernmentPublic, 0.08),
            (PoiClass::Residential, 0.12),
        ]
    } else {
        [
            (PoiClass::CommercialRetail, 0.18),
            (PoiClass::Parking, 0.10),
            (PoiClass::TransportHub, 0.06),
            (PoiClass::Workplace, 0.12),
            (PoiClass::GovernmentPublic, 0.14),
            (PoiClass::Residential, 0.40),
        ]
    };
    let draw: f64 = rng.gen();
    let mut acc = 0.0;
    for (class, w) in weights {
        acc += w;
        if draw < acc {
            return class;
        }
    }
    PoiClass::Residential
}

pub fn generate(seed: u64) -> Result<Fixture> {
    let spec = GridSpec::default();
    let projection = spec.projection();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let study_area = rect_ring(&projection, 0.0, EXTENT_X_M);
    let zones: Vec<ZonePolygon> = ZONES
        .iter()
        .map(|z| ZonePolygon {
            zone_id: z.id.to_string(),
            county_id: Some(z.county.to_string()),
            ring: rect_ring(&projection, z.x0, z.x1),
        })
        .collect();

    // Cells first: polyfill order is sorted by (q, r), so the per-cell
    // draws below are reproducible.
    let indices = hexgrid::polyfill(&study_area, CELL_RESOLUTION, &spec)?;
    let area_km2 = spec.cell_area_m2(CELL_RESOLUTION)? / 1.0e6;
    let mut cells = Vec::with_capacity(indices.len());
    for idx in indices {
        let pos = hexgrid::centroid_planar(idx, &spec)?;
        let jitter: f64 = rng.gen();
        let population =
            (population_density(pos.x, pos.y) * area_km2 * (0.85 + 0.3 * jitter)).round();
        let income_jitter: f64 = rng.gen();
        let median_income = (income_field(pos.x, pos.y) + 6_000.0 * (income_jitter - 0.5))
            .clamp(18_000.0, 95_000.0)
            .round();
        let share_jitter: f64 = rng.gen();
        let ev_share = 0.012 + median_income / 4.0e6 + 0.004 * share_jitter;
        cells.push(HexCell {
            index: idx,
            centroid: hexgrid::centroid(idx, &spec)?,
            population,
            // The pipeline recomputes POI scores from pois.csv; zero here
            // avoids the "input poi_score ignored" warning.
            poi_score: 0.0,
            median_income,
            ev_share,
            zone_id: zone_of_x(pos.x).to_string(),
        });
    }

    // Road lattices: nodes in id order, then lattice edges, then a seeded
    // sprinkling of diagonals for unequal shortest paths.
    let mut edges = Vec::new();
    let mut nodes: Vec<(u64, &'static str, PlanarPoint)> = Vec::new();
    for zone in ZONES.iter() {
        let Some((cols, rows, base)) = zone.lattice else {
            continue;
        };
        let margin_x = (zone.x1 - zone.x0) * 0.075;
        let step_x = (zone.x1 - zone.x0 - 2.0 * margin_x) / (cols as f64 - 1.0);
        let margin_y = EXTENT_Y_M * 0.06;
        let step_y = (EXTENT_Y_M - 2.0 * margin_y) / (rows as f64 - 1.0);
        let mut zone_nodes = Vec::with_capacity(cols * rows);
        for j in 0..rows {
            for i in 0..cols {
                let id = base + (j * cols + i) as u64;
                let dx: f64 = rng.gen_range(-250.0..250.0);
                let dy: f64 = rng.gen_range(-250.0..250.0);
                let x = (zone.x0 + margin_x + i as f64 * step_x + dx)
                    .clamp(zone.x0 + 40.0, zone.x1 - 40.0);
                let y = (margin_y + j as f64 * step_y + dy).clamp(40.0, EXTENT_Y_M - 40.0);
                zone_nodes.push((id, PlanarPoint::new(x, y)));
            }
        }
        let node_at = |i: usize, j: usize| zone_nodes[j * cols + i];
        let mut push_edge = |a: (u64, PlanarPoint), b: (u64, PlanarPoint)| {
            edges.push(EdgeRecord {
                zone_id: zone.id.to_string(),
                node_a: a.0,
                node_b: b.0,
                a: projection.unproject(a.1),
                b: projection.unproject(b.1),
            });
        };
        for j in 0..rows {
            for i in 0..cols {
                if i + 1 < cols {
                    push_edge(node_at(i, j), node_at(i + 1, j));
                }
                if j + 1 < rows {
                    push_edge(node_at(i, j), node_at(i, j + 1));
                }
            }
        }
        for j in 0..rows - 1 {
            for i in 0..cols - 1 {
                let draw: f64 = rng.gen();
                if draw < 0.15 {
                    push_edge(node_at(i, j), node_at(i + 1, j + 1));
                } else if draw < 0.30 {
                    push_edge(node_at(i + 1, j), node_at(i, j + 1));
                }
            }
        }
        nodes.extend(zone_nodes.into_iter().map(|(id, p)| (id, zone.id, p)));
    }

    // POIs cluster around intersections where roads exist and scatter
    // uniformly in the roadless zone.
    let mut pois = Vec::new();
    for zone in ZONES.iter() {
        let urban = matches!(zone.id, "Z1" | "Z2");
        let zone_nodes: Vec<PlanarPoint> = nodes
            .iter()
            .filter(|(_, z, _)| *z == zone.id)
            .map(|(_, _, p)| *p)
            .collect();
        for _ in 0..zone.poi_count {
            let (x, y) = if zone_nodes.is_empty() {
                (
                    rng.gen_range(zone.x0 + 50.0..zone.x1 - 50.0),
                    rng.gen_range(50.0..EXTENT_Y_M - 50.0),
                )
            } else {
                let anchor = zone_nodes[rng.gen_range(0..zone_nodes.len())];
                let dx: f64 = rng.gen_range(-650.0..650.0);
                let dy: f64 = rng.gen_range(-650.0..650.0);
                (
                    (anchor.x + dx).clamp(zone.x0 + 50.0, zone.x1 - 50.0),
                    (anchor.y + dy).clamp(50.0, EXTENT_Y_M - 50.0),
                )
            };
            let class = pick_class(&mut rng, urban);
            let count_draw: f64 = rng.gen();
            let count = 1 + if count_draw < 0.25 {
                2
            } else if count_draw < 0.55 {
                1
            } else {
                0
            };
            pois.push(PoiRecord {
                location: projection.unproject(PlanarPoint::new(x, y)),
                class,
                count,
            });
        }
    }

    // Hourly gross arrivals at every intersection: zone-scaled daily
    // volume spread over the commuter shape with per-hour jitter.
    let shape_sum: f64 = SHAPE_RAW.iter().sum();
    let mut traffic = Vec::with_capacity(nodes.len());
    for (id, zone_id, _) in &nodes {
        let zone = ZONES.iter().find(|z| z.id == *zone_id).expect("zone");
        let volume: f64 = rng.gen_range(zone.volume.0..zone.volume.1);
        let mut gross = Vec::with_capacity(24);
        for share in SHAPE_RAW {
            let jitter: f64 = rng.gen_range(0.9..1.1);
            gross.push(volume * share / shape_sum * jitter);
        }
        traffic.push(TrafficRow {
            site_id: *id,
            gross,
        });
    }

    let counties = vec![
        CountyStats {
            county_id: "C01".into(),
            ev_count: 5_200.0,
            vehicle_count: 148_000.0,
            share_2024: 0.0295,
            share_2025: 0.0351,
            avg_hourly_wage: 31.4,
        },
        CountyStats {
            county_id: "C02".into(),
            ev_count: 930.0,
            vehicle_count: 41_000.0,
            share_2024: 0.0197,
            share_2025: 0.0227,
            avg_hourly_wage: 27.6,
        },
    ];

    let outages = OutageStats {
        events: vec![
            OutageEvent {
                days: 9.0,
                households: 110_000.0,
            },
            OutageEvent {
                days: 5.0,
                households: 90_000.0,
            },
            OutageEvent {
                days: 2.1,
                households: 150_000.0,
            },
        ],
        total_households: 120_000.0,
        total_days: 365.0,
    };

    let mut config = PipelineConfig::default();
    config.seed = seed;
    config.centrality.training_zones = vec!["Z1".into(), "Z2".into()];
    config.mclp.top_k = 8;
    // Tight enough that the roadless east violates reachability and the
    // repair stage has to add hubs.
    config.reachability.threshold_m = 8_000.0;
    config.forecast.envelope = vec![0.05, 0.055, 0.06, 0.065, 0.07];
    config.inputs.outages = Some(PathBuf::from("outages.json"));
    config.validate()?;

    Ok(Fixture {
        config,
        cells,
        edges,
        pois,
        counties,
        traffic,
        zones,
        study_area,
        outages,
    })
}

/// File names written by [`write`], relative to the fixture directory.
pub const CONFIG_FILE: &str = "config.json";

/// Write every fixture file into `dir` and return the config path.
pub fn write(fixture: &Fixture, dir: &Path) -> Result<PathBuf> {
    let inputs = &fixture.config.inputs;
    io::write_text(&dir.join(&inputs.cells), &io::cells_csv(&fixture.cells))?;
    io::write_text(&dir.join(&inputs.edges), &io::edges_csv(&fixture.edges))?;
    io::write_text(&dir.join(&inputs.pois), &io::pois_csv(&fixture.pois))?;
    io::write_text(
        &dir.join(&inputs.counties),
        &io::counties_csv(&fixture.counties),
    )?;
    io::write_text(
        &dir.join(&inputs.traffic),
        &io::traffic_csv(&fixture.traffic),
    )?;
    io::write_text(&dir.join(&inputs.zones), &io::zones_geojson(&fixture.zones))?;
    io::write_text(
        &dir.join(&inputs.study_area),
        &io::polygon_geojson(&fixture.study_area),
    )?;
    if let Some(outages) = &inputs.outages {
        let doc = json!({
            "events": fixture
                .outages
                .events
                .iter()
                .map(|e| json!({"days": e.days, "households": e.households}))
                .collect::<Vec<_>>(),
            "total_days": fixture.outages.total_days,
            "total_households": fixture.outages.total_households,
        });
        io::write_text(&dir.join(outages), &io::json_to_string_sorted(&doc))?;
    }
    let config_path = dir.join(CONFIG_FILE);
    io::write_text(&config_path, &fixture.config.to_json_string())?;
    Ok(config_path)
}
