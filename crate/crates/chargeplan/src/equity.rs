//! Coverage and equity metrics: tile and land-area coverage at a service
//! radius, and population-weighted nearest-site distance by income tercile.

use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{self, PlanarPoint};
use crate::spatial::KdTree;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CoverageMetrics {
    pub radius_m: f64,
    /// Fraction of cells whose centroid lies within the radius of a site.
    pub tile_coverage: f64,
    /// Fraction of study-area land within the radius, by seeded
    /// Monte-Carlo sampling of the study polygon.
    pub area_coverage: f64,
}

/// Default Monte-Carlo sample count for area coverage.
pub const MC_SAMPLES: u32 = 100_000;

/// Tile coverage by exact centroid test, area coverage by Monte-Carlo over
/// the study polygon. An empty site list covers nothing; sampling is
/// seeded, so identical inputs give identical fractions.
pub fn coverage_metrics(
    centroids: &[PlanarPoint],
    study_area: &[PlanarPoint],
    sites: &[PlanarPoint],
    radius_m: f64,
    samples: u32,
    seed: u64,
) -> Result<CoverageMetrics> {
    if centroids.is_empty() {
        return Err(Error::NoCells);
    }
    if !(radius_m > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "coverage radius must be positive, got {radius_m}"
        )));
    }
    if study_area.len() < 3 {
        return Err(Error::DegeneratePolygon(
            "study area needs at least 3 vertices".into(),
        ));
    }
    if samples == 0 {
        return Err(Error::InvalidParameter(
            "area coverage needs at least one sample".into(),
        ));
    }
    if sites.is_empty() {
        return Ok(CoverageMetrics {
            radius_m,
            tile_coverage: 0.0,
            area_coverage: 0.0,
        });
    }
    let tree = KdTree::build(sites);
    let covered = |p: PlanarPoint| {
        let (_, d) = tree.nearest(p).expect("site list checked non-empty");
        d <= radius_m
    };

    let tiles_in = centroids.iter().filter(|c| covered(**c)).count();
    let tile_coverage = tiles_in as f64 / centroids.len() as f64;

    // Uniform samples inside the polygon by rejection from its bounding
    // box; the seeded stream makes the estimate reproducible bit-for-bit.
    let (lo, hi) = geom::bounding_box(study_area);
    if !(hi.x > lo.x) || !(hi.y > lo.y) {
        return Err(Error::DegeneratePolygon(
            "study area has a degenerate bounding box".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut area_in = 0u32;
    let mut accepted = 0u32;
    // Cap total draws so a sliver polygon cannot spin forever.
    let max_draws = (samples as u64).saturating_mul(1_000);
    let mut draws = 0u64;
    while accepted < samples {
        if draws >= max_draws {
            return Err(Error::Numerical(format!(
                "polygon rejection sampling accepted only {accepted} of \
                 {samples} after {draws} draws"
            )));
        }
        draws += 1;
        let p = PlanarPoint {
            x: rng.gen_range(lo.x..=hi.x),
            y: rng.gen_range(lo.y..=hi.y),
        };
        if !geom::point_in_polygon(p, study_area) {
            continue;
        }
        accepted += 1;
        if covered(p) {
            area_in += 1;
        }
    }
    Ok(CoverageMetrics {
        radius_m,
        tile_coverage,
        area_coverage: area_in as f64 / samples as f64,
    })
}

/// A cell's inputs to the equity report.
#[derive(Debug, Clone, Copy)]
pub struct EquityCell {
    pub pos: PlanarPoint,
    pub population: f64,
    pub median_income: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EquityReport {
    /// Population-weighted mean distance to the nearest site, per income
    /// tercile (meters).
    pub low_income_mean_m: f64,
    pub mid_income_mean_m: f64,
    pub high_income_mean_m: f64,
    /// low minus high: positive means poorer residents travel farther.
    pub gap_m: f64,
}

/// Population-weighted mean nearest-site distance by income tercile.
/// Cells are sorted by median income and split where cumulative population
/// crosses one and two thirds of the total; each cell lands in the tercile
/// containing its population midpoint. A tercile left empty reports 0.
pub fn equity_report(cells: &[EquityCell], sites: &[PlanarPoint]) -> Result<EquityReport> {
    if cells.is_empty() {
        return Err(Error::NoCells);
    }
    if sites.is_empty() {
        return Err(Error::InvalidParameter(
            "equity report requires at least one site".into(),
        ));
    }
    let total_pop: f64 = cells.iter().map(|c| c.population).sum();
    if !(total_pop > 0.0) {
        return Err(Error::ZeroPopulation);
    }
    if cells
        .iter()
        .any(|c| !(c.population >= 0.0) || !c.median_income.is_finite())
    {
        return Err(Error::InvalidParameter(
            "cell populations must be non-negative and incomes finite".into(),
        ));
    }

    let tree = KdTree::build(sites);
    let mut order: Vec<usize> = (0..cells.len()).collect();
    order.sort_by(|&a, &b| {
        cells[a]
            .median_income
            .total_cmp(&cells[b].median_income)
            .then(a.cmp(&b))
    });

    // weighted[t] = (sum of pop*distance, sum of pop) for tercile t.
    let mut weighted = [(0.0f64, 0.0f64); 3];
    let mut cum = 0.0;
    for &i in &order {
        let cell = &cells[i];
        let midpoint = cum + 0.5 * cell.population;
        cum += cell.population;
        let tercile = if midpoint < total_pop / 3.0 {
            0
        } else if midpoint < 2.0 * total_pop / 3.0 {
            1
        } else {
            2
        };
        let (_, dist) = tree.nearest(cell.pos).expect("site list checked non-empty");
        weighted[tercile].0 += cell.population * dist;
        weighted[tercile].1 += cell.population;
    }
    let mean = |(wd, wp): (f64, f64)| if wp > 0.0 { wd / wp } else { 0.0 };
    let low = mean(weighted[0]);
    let mid = mean(weighted[1]);
    let high = mean(weighted[2]);
    Ok(EquityReport {
        low_income_mean_m: low,
        mid_income_mean_m: mid,
        high_income_mean_m: high,
        gap_m: low - high,
    })
}
