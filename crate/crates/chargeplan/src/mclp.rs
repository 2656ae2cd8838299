//! Maximal-coverage site selection: distance-band coverage indexing,
//! budget-driven and coverage-driven greedy heuristics, per-zone candidate
//! ranking, and per-zone site scoring.

use std::collections::BTreeMap;

use crate::demand::DemandPoint;
use crate::error::{Error, Result};
use crate::geom::{GeoPoint, PlanarPoint};
use crate::roadgraph::min_max_normalize;
use crate::spatial::KdTree;

/// A road intersection that survived centrality filtering and may host a
/// charging site.
#[derive(Debug, Clone)]
pub struct CandidateSite {
    pub id: u64,
    pub location: GeoPoint,
    pub pos: PlanarPoint,
    pub zone_id: String,
    /// Learned centrality score in (0,1).
    pub c_gnn: f64,
    /// POI load of the cell containing the intersection.
    pub poi_load: f64,
    /// Rank score, filled in by [`compute_sigma`].
    pub sigma: f64,
    /// Fails basic engineering checks; dropped before ranking and selection.
    pub excluded: bool,
}

/// σ_i = β_poi·π̂ + β_cent·ĉ where π̂ and ĉ are min-max normalised within
/// each candidate's zone, keeping the ranking zone-local.
pub fn compute_sigma(candidates: &mut [CandidateSite], beta_poi: f64, beta_cent: f64) -> Result<()> {
    if !(beta_poi >= 0.0 && beta_cent >= 0.0) || beta_poi + beta_cent == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "rank weights must be non-negative and not both zero, got \
             beta_poi={beta_poi} beta_cent={beta_cent}"
        )));
    }
    let mut by_zone: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, c) in candidates.iter().enumerate() {
        by_zone.entry(&c.zone_id).or_default().push(i);
    }
    let zone_groups: Vec<Vec<usize>> = by_zone.into_values().collect();
    for idxs in zone_groups {
        let poi: Vec<f64> = idxs.iter().map(|&i| candidates[i].poi_load).collect();
        let cen: Vec<f64> = idxs.iter().map(|&i| candidates[i].c_gnn).collect();
        let poi_n = min_max_normalize(&poi);
        let cen_n = min_max_normalize(&cen);
        for (k, &i) in idxs.iter().enumerate() {
            candidates[i].sigma = beta_poi * poi_n[k] + beta_cent * cen_n[k];
        }
    }
    Ok(())
}

/// Exact distance-band coverage sets: `sets[i]` holds the indices of all
/// demand points within `radius` of candidate `i`, sorted ascending.
#[derive(Debug, Clone)]
pub struct CoverageIndex {
    pub radius: f64,
    pub sets: Vec<Vec<usize>>,
}

pub fn build_coverage_index(
    candidates: &[CandidateSite],
    points: &[DemandPoint],
    radius: f64,
) -> Result<CoverageIndex> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "service radius must be positive, got {radius}"
        )));
    }
    let tree = KdTree::build(&points.iter().map(|p| p.pos).collect::<Vec<_>>());
    let sets = candidates
        .iter()
        .map(|c| tree.within_radius(c.pos, radius))
        .collect();
    Ok(CoverageIndex { radius, sets })
}

#[derive(Debug, Clone)]
pub struct SelectionStep {
    pub candidate_index: usize,
    pub site_id: u64,
    /// Demand newly covered by this site at selection time.
    pub marginal_demand: f64,
    pub cumulative_demand: f64,
    pub cumulative_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct SelectionResult {
    pub steps: Vec<SelectionStep>,
    pub total_demand: f64,
    /// Final covered fraction; 1.0 when total demand is zero.
    pub coverage_fraction: f64,
    /// Per demand point, whether some selected site covers it.
    pub covered: Vec<bool>,
}

impl SelectionResult {
    pub fn site_ids(&self) -> Vec<u64> {
        self.steps.iter().map(|s| s.site_id).collect()
    }
}

#[derive(Debug, Clone, Copy)]
enum StopRule {
    Budget(usize),
    Coverage(f64),
}

/// Select up to `budget` sites, each step taking the candidate covering the
/// most still-uncovered demand. Ties break by higher σ, then lower site id.
/// Stops early once no candidate adds coverage.
pub fn greedy_budget(
    candidates: &[CandidateSite],
    index: &CoverageIndex,
    weights: &[f64],
    budget: usize,
) -> Result<SelectionResult> {
    greedy(candidates, index, weights, StopRule::Budget(budget))
}

/// Select sites until covered demand reaches `alpha` of the total; errors
/// with the achievable maximum when the candidate union cannot reach it.
pub fn greedy_coverage(
    candidates: &[CandidateSite],
    index: &CoverageIndex,
    weights: &[f64],
    alpha: f64,
) -> Result<SelectionResult> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "coverage target must lie in (0, 1], got {alpha}"
        )));
    }
    greedy(candidates, index, weights, StopRule::Coverage(alpha))
}

fn greedy(
    candidates: &[CandidateSite],
    index: &CoverageIndex,
    weights: &[f64],
    stop: StopRule,
) -> Result<SelectionResult> {
    if index.sets.len() != candidates.len() {
        return Err(Error::InvalidParameter(format!(
            "coverage index holds {} sets for {} candidates",
            index.sets.len(),
            candidates.len()
        )));
    }
    if let Some(j) = index.sets.iter().flatten().find(|&&j| j >= weights.len()) {
        return Err(Error::InvalidParameter(format!(
            "coverage set references demand point {j}, only {} weights given",
            weights.len()
        )));
    }
    let total: f64 = weights.iter().sum();
    let mut covered = vec![false; weights.len()];
    let mut selected = vec![false; candidates.len()];
    let mut steps: Vec<SelectionStep> = Vec::new();
    let mut cumulative = 0.0;

    loop {
        match stop {
            StopRule::Budget(p) => {
                if steps.len() >= p {
                    break;
                }
            }
            StopRule::Coverage(alpha) => {
                if cumulative >= alpha * total {
                    break;
                }
            }
        }
        // Best candidate by (marginal gain, σ, lower id); gains are summed
        // in ascending demand-index order so ties are exact.
        let mut best: Option<(f64, f64, u64, usize)> = None;
        for (i, cand) in candidates.iter().enumerate() {
            if selected[i] || cand.excluded {
                continue;
            }
            let gain: f64 = index.sets[i]
                .iter()
                .filter(|&&j| !covered[j])
                .map(|&j| weights[j])
                .sum();
            let better = match best {
                None => true,
                Some((bg, bs, bid, _)) => (gain, cand.sigma, std::cmp::Reverse(cand.id))
                    > (bg, bs, std::cmp::Reverse(bid)),
            };
            if better {
                best = Some((gain, cand.sigma, cand.id, i));
            }
        }
        let Some((gain, _, site_id, i)) = best else {
            // No selectable candidate left.
            match stop {
                StopRule::Budget(_) => break,
                StopRule::Coverage(alpha) => {
                    return Err(Error::CoverageInfeasible {
                        alpha,
                        achievable: fraction(cumulative, total),
                    });
                }
            }
        };
        if gain <= 0.0 {
            match stop {
                StopRule::Budget(_) => break,
                StopRule::Coverage(alpha) => {
                    return Err(Error::CoverageInfeasible {
                        alpha,
                        achievable: fraction(cumulative, total),
                    });
                }
            }
        }
        for &j in &index.sets[i] {
            covered[j] = true;
        }
        selected[i] = true;
        cumulative += gain;
        steps.push(SelectionStep {
            candidate_index: i,
            site_id,
            marginal_demand: gain,
            cumulative_demand: cumulative,
            cumulative_fraction: fraction(cumulative, total),
        });
    }

    Ok(SelectionResult {
        steps,
        total_demand: total,
        coverage_fraction: fraction(cumulative, total),
        covered,
    })
}

fn fraction(cumulative: f64, total: f64) -> f64 {
    if total > 0.0 {
        cumulative / total
    } else {
        1.0
    }
}

/// Top-k candidates per zone by σ (ties by lower id), excluded candidates
/// dropped first. Zones with fewer than k candidates return all of them.
/// Returns indices into `candidates`.
pub fn rank_per_zone(candidates: &[CandidateSite], k: usize) -> Result<BTreeMap<String, Vec<usize>>> {
    if k == 0 {
        return Err(Error::InvalidParameter("top-k rank requires k >= 1".into()));
    }
    let mut by_zone: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, c) in candidates.iter().enumerate() {
        if c.excluded {
            continue;
        }
        by_zone.entry(c.zone_id.clone()).or_default().push(i);
    }
    for idxs in by_zone.values_mut() {
        idxs.sort_by(|&a, &b| {
            candidates[b]
                .sigma
                .total_cmp(&candidates[a].sigma)
                .then(candidates[a].id.cmp(&candidates[b].id))
        });
        idxs.truncate(k);
    }
    Ok(by_zone)
}

#[derive(Debug, Clone)]
pub struct ZoneScores {
    /// Winning candidate index per zone.
    pub best: BTreeMap<String, usize>,
    /// Zones that had no selectable candidate.
    pub skipped: Vec<String>,
}

/// Per zone, the candidate maximising β_cent·ĉ + β_cov·cov̂, where ĉ and
/// cov̂ are the centrality and estimated covered demand min-max normalised
/// within the zone. `coverage` aligns with `candidates`.
pub fn score_zone_sites(
    candidates: &[CandidateSite],
    coverage: &[f64],
    zones: &[String],
    beta_cent: f64,
    beta_cov: f64,
) -> Result<ZoneScores> {
    if coverage.len() != candidates.len() {
        return Err(Error::InvalidParameter(format!(
            "{} coverage estimates for {} candidates",
            coverage.len(),
            candidates.len()
        )));
    }
    if !(beta_cent >= 0.0 && beta_cov >= 0.0) || beta_cent + beta_cov == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "zone score weights must be non-negative and not both zero, got \
             beta_cent={beta_cent} beta_cov={beta_cov}"
        )));
    }
    let mut by_zone: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, c) in candidates.iter().enumerate() {
        if c.excluded {
            continue;
        }
        by_zone.entry(&c.zone_id).or_default().push(i);
    }
    let mut best = BTreeMap::new();
    let mut skipped = Vec::new();
    for zone in zones {
        let Some(idxs) = by_zone.get(zone.as_str()) else {
            skipped.push(zone.clone());
            continue;
        };
        let cen: Vec<f64> = idxs.iter().map(|&i| candidates[i].c_gnn).collect();
        let cov: Vec<f64> = idxs.iter().map(|&i| coverage[i]).collect();
        let cen_n = min_max_normalize(&cen);
        let cov_n = min_max_normalize(&cov);
        let winner = idxs
            .iter()
            .enumerate()
            .map(|(k, &i)| (beta_cent * cen_n[k] + beta_cov * cov_n[k], i))
            .max_by(|a, b| {
                a.0.total_cmp(&b.0)
                    .then(candidates[b.1].id.cmp(&candidates[a.1].id))
            })
            .map(|(_, i)| i)
            .expect("zone groups are non-empty by construction");
        best.insert(zone.clone(), winner);
    }
    Ok(ZoneScores { best, skipped })
}

/// Optional equity adjustment: multiply the demand weight of points whose
/// cell income falls below the study-area median by `factor`. A factor of
/// 1.0 leaves weights untouched. `incomes` aligns with `weights`.
pub fn apply_income_upweight(weights: &[f64], incomes: &[f64], factor: f64) -> Result<Vec<f64>> {
    if incomes.len() != weights.len() {
        return Err(Error::InvalidParameter(format!(
            "{} incomes for {} demand weights",
            incomes.len(),
            weights.len()
        )));
    }
    if !(factor >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "income up-weight factor must be >= 1, got {factor}"
        )));
    }
    if factor == 1.0 || weights.is_empty() {
        return Ok(weights.to_vec());
    }
    let mut sorted = incomes.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    Ok(weights
        .iter()
        .zip(incomes)
        .map(|(w, inc)| if *inc < median { w * factor } else { *w })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn cand(id: u64, x: f64, y: f64) -> CandidateSite {
        CandidateSite {
            id,
            location: GeoPoint { lat: 0.0, lon: 0.0 },
            pos: PlanarPoint { x, y },
            zone_id: "Z1".to_string(),
            c_gnn: 0.5,
            poi_load: 0.0,
            sigma: 0.0,
            excluded: false,
        }
    }

    fn dpoint(id: u64, x: f64, y: f64, weight: f64) -> DemandPoint {
        DemandPoint {
            id,
            cell: crate::hexgrid::HexIndex::new(10, 0, 0),
            location: GeoPoint { lat: 0.0, lon: 0.0 },
            pos: PlanarPoint { x, y },
            p_norm: 0.0,
            s_norm: 0.0,
            weight,
        }
    }

    /// Index built directly from explicit coverage sets, bypassing geometry.
    fn index_from_sets(sets: Vec<Vec<usize>>) -> CoverageIndex {
        CoverageIndex { radius: 1.0, sets }
    }

    #[test]
    fn distant_candidate_covers_nothing() {
        let c = [cand(1, 0.0, 0.0)];
        let p = [dpoint(0, 6000.0, 0.0, 1.0)];
        let idx = build_coverage_index(&c, &p, 5000.0).unwrap();
        assert!(idx.sets[0].is_empty());
    }

    #[test]
    fn colocated_pair_covered() {
        let c = [cand(1, 100.0, 100.0)];
        let p = [dpoint(0, 100.0, 100.0, 1.0)];
        let idx = build_coverage_index(&c, &p, 5000.0).unwrap();
        assert_eq!(idx.sets[0], vec![0]);
    }

    #[test]
    fn index_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c: Vec<CandidateSite> = (0..200)
            .map(|i| cand(i, rng.gen_range(-2e4..2e4), rng.gen_range(-2e4..2e4)))
            .collect();
        let p: Vec<DemandPoint> = (0..2000)
            .map(|j| dpoint(j, rng.gen_range(-2e4..2e4), rng.gen_range(-2e4..2e4), 1.0))
            .collect();
        let radius = 5000.0;
        let idx = build_coverage_index(&c, &p, radius).unwrap();
        let r_sq = radius * radius;
        for (i, set) in idx.sets.iter().enumerate() {
            let brute: Vec<usize> = (0..p.len())
                .filter(|&j| c[i].pos.distance_sq(&p[j].pos) <= r_sq)
                .collect();
            assert_eq!(*set, brute, "candidate {i}");
        }
    }

    #[test]
    fn nonpositive_radius_rejected() {
        assert!(build_coverage_index(&[], &[], 0.0).is_err());
    }

    #[test]
    fn zero_budget_selects_nothing() {
        let c = [cand(1, 0.0, 0.0)];
        let idx = index_from_sets(vec![vec![0]]);
        let r = greedy_budget(&c, &idx, &[1.0], 0).unwrap();
        assert!(r.steps.is_empty());
        assert_eq!(r.coverage_fraction, 0.0);
    }

    #[test]
    fn all_covering_candidate_stops_after_one_step() {
        let c = [cand(1, 0.0, 0.0), cand(2, 0.0, 0.0)];
        let idx = index_from_sets(vec![vec![0, 1, 2], vec![0, 1]]);
        let r = greedy_budget(&c, &idx, &[1.0, 1.0, 1.0], 5).unwrap();
        assert_eq!(r.site_ids(), vec![1]);
        assert_eq!(r.coverage_fraction, 1.0);
    }

    #[test]
    fn tie_breaks_by_sigma_then_lower_id() {
        let mut a = cand(7, 0.0, 0.0);
        let mut b = cand(3, 0.0, 0.0);
        a.sigma = 0.2;
        b.sigma = 0.9;
        // Equal gains: σ decides.
        let idx = index_from_sets(vec![vec![0], vec![1]]);
        let r = greedy_budget(&[a.clone(), b.clone()], &idx, &[1.0, 1.0], 1).unwrap();
        assert_eq!(r.site_ids(), vec![3]);
        // Equal gains and σ: lower id decides.
        b.sigma = 0.2;
        let r = greedy_budget(&[a, b], &idx, &[1.0, 1.0], 1).unwrap();
        assert_eq!(r.site_ids(), vec![3]);
    }

    #[test]
    fn excluded_candidates_never_selected() {
        let mut a = cand(1, 0.0, 0.0);
        a.excluded = true;
        let b = cand(2, 0.0, 0.0);
        let idx = index_from_sets(vec![vec![0, 1], vec![0]]);
        let r = greedy_budget(&[a, b], &idx, &[1.0, 1.0], 2).unwrap();
        assert_eq!(r.site_ids(), vec![2]);
    }

    #[test]
    fn layered_coverage_trace() {
        // Weights 0.1 each; A covers 50%, B and C 30% each, B overlaps A.
        let a = cand(1, 0.0, 0.0);
        let b = cand(2, 0.0, 0.0);
        let c = cand(3, 0.0, 0.0);
        let idx = index_from_sets(vec![
            (0..5).collect(),
            vec![4, 5, 6],
            vec![7, 8, 9],
        ]);
        let w = [0.1; 10];
        let r = greedy_coverage(&[a, b, c], &idx, &w, 0.8).unwrap();
        // A first (0.5), then C (0.3, beats B's marginal 0.2), reaching 0.8.
        assert_eq!(r.site_ids(), vec![1, 3]);
        assert!(r.coverage_fraction >= 0.8);
        assert_eq!(r.steps.len(), 2);
    }

    #[test]
    fn full_coverage_single_site() {
        let a = cand(1, 0.0, 0.0);
        let idx = index_from_sets(vec![vec![0, 1]]);
        let r = greedy_coverage(&[a], &idx, &[2.0, 3.0], 1.0).unwrap();
        assert_eq!(r.site_ids(), vec![1]);
        assert_eq!(r.coverage_fraction, 1.0);
    }

    #[test]
    fn unreachable_alpha_reports_achievable() {
        let a = cand(1, 0.0, 0.0);
        let idx = index_from_sets(vec![vec![0]]);
        let err = greedy_coverage(&[a], &idx, &[1.0, 3.0], 0.9).unwrap_err();
        match err {
            Error::CoverageInfeasible { alpha, achievable } => {
                assert_eq!(alpha, 0.9);
                assert_eq!(achievable, 0.25);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn invalid_alpha_rejected() {
        let idx = index_from_sets(vec![]);
        assert!(greedy_coverage(&[], &idx, &[], 0.0).is_err());
        assert!(greedy_coverage(&[], &idx, &[], 1.5).is_err());
    }

    /// Random instance generator shared by the approximation-style tests.
    fn random_instance(
        rng: &mut ChaCha8Rng,
        n_cand: usize,
        n_pts: usize,
    ) -> (Vec<CandidateSite>, CoverageIndex, Vec<f64>) {
        let cands: Vec<CandidateSite> = (0..n_cand as u64).map(|i| cand(i + 1, 0.0, 0.0)).collect();
        let sets: Vec<Vec<usize>> = (0..n_cand)
            .map(|_| {
                (0..n_pts)
                    .filter(|_| rng.gen_bool(0.25))
                    .collect()
            })
            .collect();
        let weights: Vec<f64> = (0..n_pts).map(|_| rng.gen_range(0.0..10.0)).collect();
        (cands, index_from_sets(sets), weights)
    }

    fn exhaustive_optimum(index: &CoverageIndex, weights: &[f64], p: usize) -> f64 {
        let n = index.sets.len();
        (0..n)
            .combinations(p.min(n))
            .map(|combo| {
                let mut covered = vec![false; weights.len()];
                for &i in &combo {
                    for &j in &index.sets[i] {
                        covered[j] = true;
                    }
                }
                covered
                    .iter()
                    .zip(weights)
                    .filter(|(c, _)| **c)
                    .map(|(_, w)| w)
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn greedy_beats_submodular_bound_on_fixed_instance() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let (cands, idx, w) = random_instance(&mut rng, 10, 40);
        let p = 3;
        let greedy = greedy_budget(&cands, &idx, &w, p).unwrap();
        let covered: f64 = greedy.steps.iter().map(|s| s.marginal_demand).sum();
        let opt = exhaustive_optimum(&idx, &w, p);
        let bound = (1.0 - (-1.0f64).exp()) * opt;
        assert!(covered >= bound - 1e-9, "greedy {covered} < bound {bound}");
    }

    #[test]
    fn coverage_monotone_in_budget() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let (cands, idx, w) = random_instance(&mut rng, 8, 30);
            let mut last = 0.0;
            for p in 0..=8 {
                let r = greedy_budget(&cands, &idx, &w, p).unwrap();
                assert!(r.coverage_fraction >= last);
                last = r.coverage_fraction;
            }
        }
    }

    #[test]
    fn marginal_gains_non_increasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..10 {
            let (cands, idx, w) = random_instance(&mut rng, 10, 50);
            let r = greedy_budget(&cands, &idx, &w, 10).unwrap();
            for pair in r.steps.windows(2) {
                assert!(pair[1].marginal_demand <= pair[0].marginal_demand + 1e-12);
            }
        }
    }

    #[test]
    fn coverage_run_replays_as_budget_prefix() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let (cands, idx, w) = random_instance(&mut rng, 10, 50);
            let Ok(by_alpha) = greedy_coverage(&cands, &idx, &w, 0.6) else {
                continue;
            };
            let by_budget = greedy_budget(&cands, &idx, &w, by_alpha.steps.len()).unwrap();
            assert_eq!(by_alpha.site_ids(), by_budget.site_ids());
        }
    }

    #[test]
    fn rank_returns_all_when_zone_is_small() {
        let mut cands = vec![cand(1, 0.0, 0.0), cand(2, 0.0, 0.0), cand(3, 0.0, 0.0)];
        for (i, c) in cands.iter_mut().enumerate() {
            c.sigma = i as f64;
        }
        let ranked = rank_per_zone(&cands, 5).unwrap();
        assert_eq!(ranked["Z1"], vec![2, 1, 0]);
    }

    #[test]
    fn rank_drops_lowest_sigma() {
        let sigmas = [0.9, 0.7, 0.5, 0.3, 0.2, 0.1];
        let mut cands: Vec<CandidateSite> =
            (0..6).map(|i| cand(i as u64 + 1, 0.0, 0.0)).collect();
        for (c, s) in cands.iter_mut().zip(sigmas) {
            c.sigma = s;
        }
        let ranked = rank_per_zone(&cands, 5).unwrap();
        assert_eq!(ranked["Z1"], vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn rank_drops_excluded_first() {
        let mut top = cand(1, 0.0, 0.0);
        top.sigma = 0.99;
        top.excluded = true;
        let mut rest = cand(2, 0.0, 0.0);
        rest.sigma = 0.1;
        let ranked = rank_per_zone(&[top, rest], 1).unwrap();
        assert_eq!(ranked["Z1"], vec![1]);
    }

    #[test]
    fn zone_scoring_extremes() {
        let mut a = cand(1, 0.0, 0.0);
        let mut b = cand(2, 0.0, 0.0);
        a.c_gnn = 0.9;
        b.c_gnn = 0.2;
        let zones = vec!["Z1".to_string()];
        // Coverage weight zero: centrality decides.
        let s = score_zone_sites(&[a.clone(), b.clone()], &[0.0, 100.0], &zones, 1.0, 0.0).unwrap();
        assert_eq!(s.best["Z1"], 0);
        // Centrality weight zero: coverage decides.
        let s = score_zone_sites(&[a, b], &[0.0, 100.0], &zones, 0.0, 1.0).unwrap();
        assert_eq!(s.best["Z1"], 1);
    }

    #[test]
    fn zone_scoring_weighted_example() {
        let mut a = cand(1, 0.0, 0.0);
        let mut b = cand(2, 0.0, 0.0);
        a.c_gnn = 1.0;
        b.c_gnn = 0.0;
        let zones = vec!["Z1".to_string()];
        // (ĉ, cov̂) = (1,0) vs (0,1) with weights (0.4, 0.6): second wins.
        let s = score_zone_sites(&[a, b], &[0.0, 1.0], &zones, 0.4, 0.6).unwrap();
        assert_eq!(s.best["Z1"], 1);
    }

    #[test]
    fn empty_zone_reported_not_fatal() {
        let zones = vec!["Z1".to_string(), "Z9".to_string()];
        let s = score_zone_sites(&[cand(1, 0.0, 0.0)], &[1.0], &zones, 0.5, 0.5).unwrap();
        assert_eq!(s.best.len(), 1);
        assert_eq!(s.skipped, vec!["Z9".to_string()]);
    }

    #[test]
    fn sigma_normalises_per_zone() {
        let mut cands = vec![cand(1, 0.0, 0.0), cand(2, 0.0, 0.0), cand(3, 0.0, 0.0)];
        cands[0].poi_load = 10.0;
        cands[0].c_gnn = 0.2;
        cands[1].poi_load = 30.0;
        cands[1].c_gnn = 0.8;
        // A second zone with one candidate: degenerate min-max maps to 0.
        cands[2].zone_id = "Z2".to_string();
        cands[2].poi_load = 999.0;
        cands[2].c_gnn = 0.999;
        compute_sigma(&mut cands, 0.6, 0.4).unwrap();
        assert_eq!(cands[0].sigma, 0.0);
        assert_eq!(cands[1].sigma, 1.0);
        assert_eq!(cands[2].sigma, 0.0);
    }

    #[test]
    fn income_upweight_boosts_below_median() {
        let w = [1.0, 1.0, 1.0];
        let inc = [20_000.0, 50_000.0, 80_000.0];
        let out = apply_income_upweight(&w, &inc, 2.0).unwrap();
        assert_eq!(out, vec![2.0, 1.0, 1.0]);
    }

    #[test]
    fn income_upweight_factor_one_is_identity() {
        let w = [1.0, 2.0];
        let out = apply_income_upweight(&w, &[1.0, 2.0], 1.0).unwrap();
        assert_eq!(out, w.to_vec());
    }

    #[test]
    fn income_upweight_rejects_shrinking() {
        assert!(apply_income_upweight(&[1.0], &[1.0], 0.5).is_err());
    }
}
