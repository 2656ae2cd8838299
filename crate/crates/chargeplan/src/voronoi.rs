//! Nearest-hub assignment over coarse-cell centroids and the repair loop
//! that guarantees a five-port fast-charge hub within the reachability
//! threshold of every centroid.
//!
//! The guarantee in question is a distance bound, so membership is checked
//! by exact nearest-hub assignment; no polygon tessellation is built.

use crate::error::{Error, Result};
use crate::geom::PlanarPoint;

/// A coarse-cell centroid carrying the demand weight used to prioritise
/// repairs.
#[derive(Debug, Clone, Copy)]
pub struct CoarseCentroid {
    pub id: u64,
    pub pos: PlanarPoint,
    pub weight: f64,
}

/// A fast-charge hub location. Repair-added hubs carry the five-port
/// minimum; the queue sizing stage may enlarge them but never shrinks below
/// `min_ports`.
#[derive(Debug, Clone, Copy)]
pub struct Hub {
    pub id: u64,
    pub pos: PlanarPoint,
    pub min_ports: u32,
    pub added_by_repair: bool,
}

/// Minimum ports on a hub created to restore the reachability guarantee.
pub const REPAIR_HUB_MIN_PORTS: u32 = 5;

#[derive(Debug, Clone)]
pub struct Assignment {
    pub centroid_id: u64,
    pub hub_id: u64,
    pub distance_m: f64,
}

#[derive(Debug, Clone)]
pub struct ReachabilityReport {
    /// One row per centroid, in input order.
    pub assignments: Vec<Assignment>,
    pub max_distance_m: f64,
    pub threshold_m: f64,
    /// Centroid ids with distance strictly above the threshold.
    pub violations: Vec<u64>,
}

/// Assign every centroid to its Euclidean-nearest hub; exact ties go to the
/// lower hub id. Hub sets are small, so the scan is a plain pairwise
/// minimum with no index structure to trust.
pub fn assign_nearest(
    centroids: &[CoarseCentroid],
    hubs: &[Hub],
    threshold_m: f64,
) -> Result<ReachabilityReport> {
    if hubs.is_empty() {
        return Err(Error::NoHubs);
    }
    if !(threshold_m > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "reachability threshold must be positive, got {threshold_m}"
        )));
    }
    let mut assignments = Vec::with_capacity(centroids.len());
    let mut max_distance_m = 0.0f64;
    let mut violations = Vec::new();
    for c in centroids {
        let (hub_id, d_sq) = hubs
            .iter()
            .map(|h| (h.id, c.pos.distance_sq(&h.pos)))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .expect("hubs checked non-empty");
        let distance_m = d_sq.sqrt();
        max_distance_m = max_distance_m.max(distance_m);
        if distance_m > threshold_m {
            violations.push(c.id);
        }
        assignments.push(Assignment {
            centroid_id: c.id,
            hub_id,
            distance_m,
        });
    }
    Ok(ReachabilityReport {
        assignments,
        max_distance_m,
        threshold_m,
        violations,
    })
}

#[derive(Debug, Clone)]
pub struct RepairResult {
    /// All hubs after repair: the originals followed by additions.
    pub hubs: Vec<Hub>,
    /// Hubs added by the loop, in placement order.
    pub added: Vec<Hub>,
    /// Final assignment, guaranteed within the threshold.
    pub report: ReachabilityReport,
}

/// Add hubs until every centroid is within `threshold_m` of one. Each round
/// places a five-port hub at the violating centroid with the largest demand
/// weight (ties: larger distance, then lower centroid id), which fixes that
/// centroid permanently, so the loop terminates. An empty initial hub set
/// is allowed; the first round then seeds from the full centroid list.
pub fn repair_coverage(
    centroids: &[CoarseCentroid],
    initial_hubs: &[Hub],
    threshold_m: f64,
) -> Result<RepairResult> {
    if !(threshold_m > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "reachability threshold must be positive, got {threshold_m}"
        )));
    }
    let mut hubs = initial_hubs.to_vec();
    let mut added = Vec::new();
    let mut next_id = hubs.iter().map(|h| h.id + 1).max().unwrap_or(0);

    for _round in 0..=centroids.len() {
        // Violating centroids with their current nearest distance; with no
        // hubs yet every centroid violates at unbounded distance.
        let violating: Vec<(&CoarseCentroid, f64)> = if hubs.is_empty() {
            centroids.iter().map(|c| (c, f64::INFINITY)).collect()
        } else {
            let report = assign_nearest(centroids, &hubs, threshold_m)?;
            centroids
                .iter()
                .zip(&report.assignments)
                .filter(|(_, a)| a.distance_m > threshold_m)
                .map(|(c, a)| (c, a.distance_m))
                .collect()
        };
        let Some(&(worst, _)) = violating.iter().max_by(|(ca, da), (cb, db)| {
            ca.weight
                .total_cmp(&cb.weight)
                .then(da.total_cmp(db))
                .then(cb.id.cmp(&ca.id))
        }) else {
            let report = if hubs.is_empty() {
                // No hubs and no centroids: an empty, trivially satisfied plan.
                ReachabilityReport {
                    assignments: Vec::new(),
                    max_distance_m: 0.0,
                    threshold_m,
                    violations: Vec::new(),
                }
            } else {
                assign_nearest(centroids, &hubs, threshold_m)?
            };
            return Ok(RepairResult {
                hubs,
                added,
                report,
            });
        };
        let hub = Hub {
            id: next_id,
            pos: worst.pos,
            min_ports: REPAIR_HUB_MIN_PORTS,
            added_by_repair: true,
        };
        next_id += 1;
        hubs.push(hub);
        added.push(hub);
    }
    // Each round zeroes the chosen centroid's distance, so this is
    // unreachable; guard against a logic regression rather than looping.
    Err(Error::Numerical(
        "coverage repair failed to converge".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial::KdTree;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn centroid(id: u64, x: f64, y: f64, weight: f64) -> CoarseCentroid {
        CoarseCentroid {
            id,
            pos: PlanarPoint { x, y },
            weight,
        }
    }

    fn hub(id: u64, x: f64, y: f64) -> Hub {
        Hub {
            id,
            pos: PlanarPoint { x, y },
            min_ports: 1,
            added_by_repair: false,
        }
    }

    const THRESH: f64 = 30_000.0;

    #[test]
    fn single_hub_takes_everything() {
        let cs = [centroid(1, 0.0, 0.0, 1.0), centroid(2, 5e3, 5e3, 1.0)];
        let report = assign_nearest(&cs, &[hub(9, 1e3, 1e3)], THRESH).unwrap();
        assert!(report.assignments.iter().all(|a| a.hub_id == 9));
        assert!(report.violations.is_empty());
    }

    #[test]
    fn exact_tie_goes_to_lower_hub_id() {
        let cs = [centroid(1, 0.0, 0.0, 1.0)];
        let hubs = [hub(7, 10_000.0, 0.0), hub(3, -10_000.0, 0.0)];
        let report = assign_nearest(&cs, &hubs, THRESH).unwrap();
        assert_eq!(report.assignments[0].hub_id, 3);
    }

    #[test]
    fn no_hubs_is_an_error() {
        let cs = [centroid(1, 0.0, 0.0, 1.0)];
        assert!(matches!(
            assign_nearest(&cs, &[], THRESH),
            Err(Error::NoHubs)
        ));
    }

    #[test]
    fn random_assignment_matches_kd_tree() {
        // Independent check of the pairwise scan against the spatial index,
        // with hubs pre-sorted by id so index ties equal id ties.
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let cs: Vec<CoarseCentroid> = (0..500)
            .map(|i| {
                centroid(
                    i,
                    rng.gen_range(-4e4..4e4),
                    rng.gen_range(-4e4..4e4),
                    rng.gen_range(0.0..1.0),
                )
            })
            .collect();
        let mut hubs: Vec<Hub> = (0..20)
            .map(|i| hub(i, rng.gen_range(-4e4..4e4), rng.gen_range(-4e4..4e4)))
            .collect();
        hubs.sort_by_key(|h| h.id);
        let tree = KdTree::build(&hubs.iter().map(|h| h.pos).collect::<Vec<_>>());
        let report = assign_nearest(&cs, &hubs, 1e9).unwrap();
        for (c, a) in cs.iter().zip(&report.assignments) {
            let (idx, dist) = tree.nearest(c.pos).unwrap();
            assert_eq!(a.hub_id, hubs[idx].id);
            assert_eq!(a.distance_m, dist);
        }
    }

    #[test]
    fn already_covered_adds_nothing() {
        let cs = [centroid(1, 0.0, 0.0, 1.0), centroid(2, 10e3, 0.0, 1.0)];
        let r = repair_coverage(&cs, &[hub(1, 5e3, 0.0)], THRESH).unwrap();
        assert!(r.added.is_empty());
        assert_eq!(r.hubs.len(), 1);
    }

    #[test]
    fn distant_cluster_gets_exactly_one_hub() {
        // Cluster B sits 100 km east with diameter well under 60 km.
        let cs = [
            centroid(1, 0.0, 0.0, 1.0),
            centroid(2, 100e3, 0.0, 0.5),
            centroid(3, 110e3, 5e3, 0.9),
            centroid(4, 105e3, -5e3, 0.2),
        ];
        let r = repair_coverage(&cs, &[hub(1, 0.0, 0.0)], THRESH).unwrap();
        assert_eq!(r.added.len(), 1);
        // Highest-weight violating centroid hosts the new hub.
        assert_eq!(r.added[0].pos.x, 110e3);
        assert_eq!(r.added[0].min_ports, REPAIR_HUB_MIN_PORTS);
        assert!(r.added[0].added_by_repair);
        assert!(r.report.max_distance_m <= THRESH);
    }

    #[test]
    fn repair_postcondition_holds_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..20 {
            let cs: Vec<CoarseCentroid> = (0..60)
                .map(|i| {
                    centroid(
                        i,
                        rng.gen_range(-120e3..120e3),
                        rng.gen_range(-120e3..120e3),
                        rng.gen_range(0.0..5.0),
                    )
                })
                .collect();
            let hubs = [hub(1, 0.0, 0.0)];
            let r = repair_coverage(&cs, &hubs, THRESH).unwrap();
            assert!(r.report.max_distance_m <= THRESH);
            assert!(r.report.violations.is_empty());
            // No more additions than initial violations.
            let initial = assign_nearest(&cs, &hubs, THRESH).unwrap();
            assert!(r.added.len() <= initial.violations.len());
        }
    }

    #[test]
    fn repair_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let cs: Vec<CoarseCentroid> = (0..40)
            .map(|i| {
                centroid(
                    i,
                    rng.gen_range(-100e3..100e3),
                    rng.gen_range(-100e3..100e3),
                    rng.gen_range(0.0..1.0),
                )
            })
            .collect();
        let first = repair_coverage(&cs, &[hub(1, 0.0, 0.0)], THRESH).unwrap();
        let second = repair_coverage(&cs, &first.hubs, THRESH).unwrap();
        assert!(second.added.is_empty());
    }

    #[test]
    fn repair_prefers_heavier_centroid() {
        // Both violate; the heavier one is farther from nothing special,
        // weight alone must decide.
        let cs = [
            centroid(10, 50e3, 0.0, 0.1),
            centroid(11, -50e3, 0.0, 2.0),
        ];
        let r = repair_coverage(&cs, &[hub(1, 0.0, 40e3)], THRESH).unwrap();
        assert_eq!(r.added[0].pos.x, -50e3);
    }

    #[test]
    fn repair_bootstraps_from_no_hubs() {
        let cs = [centroid(1, 0.0, 0.0, 1.0), centroid(2, 200e3, 0.0, 3.0)];
        let r = repair_coverage(&cs, &[], THRESH).unwrap();
        // Heaviest centroid seeds the hub set; ids start at 0.
        assert_eq!(r.added[0].pos.x, 200e3);
        assert_eq!(r.added[0].id, 0);
        assert!(r.report.max_distance_m <= THRESH);
        assert_eq!(r.added.len(), 2);
    }

    #[test]
    fn empty_centroids_trivially_satisfied() {
        let r = repair_coverage(&[], &[], THRESH).unwrap();
        assert!(r.hubs.is_empty());
        assert!(r.report.violations.is_empty());
        assert_eq!(r.report.max_distance_m, 0.0);
    }

    #[test]
    fn added_hub_ids_continue_after_existing() {
        let cs = [centroid(1, 100e3, 0.0, 1.0)];
        let r = repair_coverage(&cs, &[hub(17, 0.0, 0.0)], THRESH).unwrap();
        assert_eq!(r.added[0].id, 18);
    }
}
