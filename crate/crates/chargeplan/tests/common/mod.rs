//! Independent oracles and generators for the integration suite. Everything
//! here is deliberately naive — different algorithms than the library uses,
//! so agreement is evidence rather than tautology.

#![allow(dead_code)]

use chargeplan::demand::DemandPoint;
use chargeplan::geom::{GeoPoint, PlanarPoint, Projection};
use chargeplan::hexgrid::HexIndex;
use chargeplan::mclp::CandidateSite;
use chargeplan::roadgraph::{EdgeRecord, RoadGraph};
use num::{BigInt, BigRational, ToPrimitive, Zero};
use rand::Rng;
use std::collections::VecDeque;

pub fn projection() -> Projection {
    Projection::new(GeoPoint::new(40.0, -100.0))
}

pub fn geo(x: f64, y: f64) -> GeoPoint {
    projection().unproject(PlanarPoint::new(x, y))
}

/// Road graph over one square zone from planar edge tuples
/// (node_a, (x, y), node_b, (x, y)). Keep coordinates within +-40 km.
pub fn graph_from_planar(edges: &[(u64, (f64, f64), u64, (f64, f64))]) -> RoadGraph {
    let polygon: Vec<GeoPoint> = [
        (-50_000.0, -50_000.0),
        (50_000.0, -50_000.0),
        (50_000.0, 50_000.0),
        (-50_000.0, 50_000.0),
    ]
    .iter()
    .map(|(x, y)| geo(*x, *y))
    .collect();
    let records: Vec<EdgeRecord> = edges
        .iter()
        .map(|(a, pa, b, pb)| EdgeRecord {
            zone_id: "Z".into(),
            node_a: *a,
            node_b: *b,
            a: geo(pa.0, pa.1),
            b: geo(pb.0, pb.1),
        })
        .collect();
    RoadGraph::build("Z", &polygon, &records, &projection()).unwrap()
}

/// Random connected graph: a spanning chain over shuffled planar positions
/// plus extra random links. Node ids are 0..n in position order, so the
/// graph's node index equals the id.
pub fn random_connected_graph(
    rng: &mut impl Rng,
    n: usize,
    extra_edges: usize,
) -> (RoadGraph, Vec<(usize, usize)>) {
    assert!(n >= 2);
    let positions: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            (
                rng.gen_range(-30_000.0..30_000.0),
                rng.gen_range(-30_000.0..30_000.0),
            )
        })
        .collect();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    for w in order.windows(2) {
        pairs.push((w[0].min(w[1]), w[0].max(w[1])));
    }
    for _ in 0..extra_edges {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            let e = (a.min(b), a.max(b));
            if !pairs.contains(&e) {
                pairs.push(e);
            }
        }
    }
    pairs.sort();
    pairs.dedup();
    let tuples: Vec<(u64, (f64, f64), u64, (f64, f64))> = pairs
        .iter()
        .map(|&(a, b)| (a as u64, positions[a], b as u64, positions[b]))
        .collect();
    (graph_from_planar(&tuples), pairs)
}

/// Random geometric graph: n points uniform in a centred square, edges
/// between all pairs within a connection radius. The radius starts at
/// `density_mult` times the connectivity threshold and grows until the graph
/// is connected, keeping positions fixed so the instance stays
/// seeded-deterministic.
pub fn random_geometric_graph(
    rng: &mut impl Rng,
    n: usize,
    half_extent: f64,
    density_mult: f64,
) -> RoadGraph {
    assert!(n >= 2);
    let positions: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            (
                rng.gen_range(-half_extent..half_extent),
                rng.gen_range(-half_extent..half_extent),
            )
        })
        .collect();
    let side = 2.0 * half_extent;
    let mut radius =
        side * ((n as f64).ln() / (std::f64::consts::PI * n as f64)).sqrt() * density_mult;
    loop {
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        let mut adj = vec![Vec::new(); n];
        for a in 0..n {
            for b in (a + 1)..n {
                let dx = positions[a].0 - positions[b].0;
                let dy = positions[a].1 - positions[b].1;
                if (dx * dx + dy * dy).sqrt() <= radius {
                    pairs.push((a, b));
                    adj[a].push(b);
                    adj[b].push(a);
                }
            }
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut reached = 1;
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    reached += 1;
                    stack.push(u);
                }
            }
        }
        if reached == n {
            let tuples: Vec<(u64, (f64, f64), u64, (f64, f64))> = pairs
                .iter()
                .map(|&(a, b)| (a as u64, positions[a], b as u64, positions[b]))
                .collect();
            return graph_from_planar(&tuples);
        }
        radius *= 1.15;
    }
}

/// Hop-count betweenness by brute-force path counting: per ordered pair,
/// enumerate which nodes sit on shortest paths via the distance identity
/// d(s,v) + d(v,t) = d(s,t), with exact rational accumulation. Halved for
/// undirected pair symmetry, matching the library's convention.
pub fn betweenness_by_path_counting(n: usize, edges: &[(usize, usize)]) -> Vec<f64> {
    let mut adjacency = vec![Vec::new(); n];
    for &(a, b) in edges {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    // BFS from every source: distances and exact path counts.
    let mut dist = vec![vec![-1i64; n]; n];
    let mut sigma = vec![vec![BigInt::zero(); n]; n];
    for s in 0..n {
        dist[s][s] = 0;
        sigma[s][s] = BigInt::from(1);
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &w in &adjacency[v] {
                if dist[s][w] < 0 {
                    dist[s][w] = dist[s][v] + 1;
                    queue.push_back(w);
                }
                if dist[s][w] == dist[s][v] + 1 {
                    let add = sigma[s][v].clone();
                    sigma[s][w] += add;
                }
            }
        }
    }
    let mut bc = vec![BigRational::zero(); n];
    for s in 0..n {
        for t in 0..n {
            if s == t || dist[s][t] < 0 {
                continue;
            }
            let total = BigRational::from(sigma[s][t].clone());
            for v in 0..n {
                if v == s || v == t || dist[s][v] < 0 || dist[t][v] < 0 {
                    continue;
                }
                if dist[s][v] + dist[t][v] == dist[s][t] {
                    let through = BigRational::from(sigma[s][v].clone() * sigma[t][v].clone());
                    bc[v] += through / total.clone();
                }
            }
        }
    }
    let two = BigRational::from(BigInt::from(2));
    bc.into_iter()
        .map(|v| (v / two.clone()).to_f64().expect("fits in f64"))
        .collect()
}

/// Queue metrics solved from the global balance equations of the finite
/// birth-death chain in exact rational arithmetic. The tridiagonal system
/// is eliminated row by row (each balance equation used exactly once) and
/// the final row is verified, so the result is the exact stationary vector
/// for the given f64 rates, converted to f64 only at the end.
pub struct OracleMetrics {
    pub p0: f64,
    pub lq: f64,
    pub wq: f64,
    pub pi_block: f64,
}

pub fn birth_death_oracle(lambda: f64, mu: f64, c_eff: f64, capacity: u32) -> OracleMetrics {
    let exact = |v: f64| BigRational::from_float(v).expect("finite rate");
    let lambda_r = exact(lambda);
    let mu_r = exact(mu);
    let c_eff_r = exact(c_eff);
    let service = |n: usize| -> BigRational {
        let n_r = BigRational::from(BigInt::from(n));
        if n_r < c_eff_r {
            n_r * mu_r.clone()
        } else {
            c_eff_r.clone() * mu_r.clone()
        }
    };
    let states = capacity as usize + 1;
    // Forward elimination with pi_0 = 1. Balance at state 0 fixes pi_1;
    // balance at state n (using the previously eliminated rows) fixes
    // pi_{n+1} = ((lambda + s_n) pi_n - lambda pi_{n-1}) / s_{n+1}.
    let mut pi = Vec::with_capacity(states);
    pi.push(BigRational::from(BigInt::from(1)));
    if states > 1 {
        pi.push(lambda_r.clone() / service(1));
    }
    for n in 1..states - 1 {
        let outflow = (lambda_r.clone() + service(n)) * pi[n].clone();
        let inflow = lambda_r.clone() * pi[n - 1].clone();
        pi.push((outflow - inflow) / service(n + 1));
    }
    // The remaining balance row must be satisfied identically.
    if states > 1 {
        let last = states - 1;
        assert_eq!(
            lambda_r.clone() * pi[last - 1].clone(),
            service(last) * pi[last].clone(),
            "balance residual at the boundary state"
        );
    }
    let total: BigRational = pi.iter().cloned().sum();
    let pi: Vec<BigRational> = pi.into_iter().map(|p| p / total.clone()).collect();

    let mut lq = BigRational::zero();
    for (n, p) in pi.iter().enumerate() {
        let excess = BigRational::from(BigInt::from(n)) - c_eff_r.clone();
        if excess > BigRational::zero() {
            lq += excess * p.clone();
        }
    }
    let pi_block = pi[pi.len() - 1].clone();
    let admitted = lambda_r * (BigRational::from(BigInt::from(1)) - pi_block.clone());
    let wq = if admitted > BigRational::zero() {
        lq.clone() / admitted
    } else {
        BigRational::zero()
    };
    OracleMetrics {
        p0: pi[0].to_f64().unwrap(),
        lq: lq.to_f64().unwrap(),
        wq: wq.to_f64().unwrap(),
        pi_block: pi_block.to_f64().unwrap(),
    }
}

/// Pairwise distance-band sets: for each candidate, the sorted indices of
/// points with squared distance at most radius².
pub fn brute_force_cover_sets(
    candidates: &[PlanarPoint],
    points: &[PlanarPoint],
    radius: f64,
) -> Vec<Vec<usize>> {
    let r_sq = radius * radius;
    candidates
        .iter()
        .map(|c| {
            points
                .iter()
                .enumerate()
                .filter(|(_, p)| c.distance_sq(p) <= r_sq)
                .map(|(j, _)| j)
                .collect()
        })
        .collect()
}

/// Exhaustive maximum covered weight over every candidate subset of size
/// at most `budget`. Points are packed into a u64 bitmask, so at most 64.
pub fn exhaustive_best_coverage(sets: &[Vec<usize>], weights: &[f64], budget: usize) -> f64 {
    assert!(sets.len() <= 20, "exhaustive search is exponential");
    assert!(weights.len() <= 64);
    let masks: Vec<u64> = sets
        .iter()
        .map(|s| s.iter().fold(0u64, |m, &j| m | (1 << j)))
        .collect();
    let mut best = 0.0f64;
    for choice in 0u32..(1 << sets.len()) {
        if choice.count_ones() as usize > budget {
            continue;
        }
        let mut union = 0u64;
        for (i, mask) in masks.iter().enumerate() {
            if choice & (1 << i) != 0 {
                union |= mask;
            }
        }
        let mut covered = 0.0;
        let mut bits = union;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            covered += weights[j];
            bits &= bits - 1;
        }
        best = best.max(covered);
    }
    best
}

/// Spearman rank correlation with average ranks for ties: Pearson
/// correlation of the rank vectors.
pub fn spearman_by_ranks(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let ra = average_ranks(a);
    let rb = average_ranks(b);
    pearson(&ra, &rb)
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        return 0.0;
    }
    cov / (va * vb).sqrt()
}

/// A bare demand point at a planar position with a weight; grid fields are
/// placeholders for solver-only tests.
pub fn demand_point(id: u64, x: f64, y: f64, weight: f64) -> DemandPoint {
    let pos = PlanarPoint::new(x, y);
    DemandPoint {
        id,
        cell: HexIndex::new(10, 0, 0),
        location: geo(x, y),
        pos,
        p_norm: 0.0,
        s_norm: 0.0,
        weight,
    }
}

/// A bare candidate at a planar position; scores are placeholders.
pub fn candidate(id: u64, x: f64, y: f64) -> CandidateSite {
    CandidateSite {
        id,
        location: geo(x, y),
        pos: PlanarPoint::new(x, y),
        zone_id: "Z".into(),
        c_gnn: 0.5,
        poi_load: 0.0,
        sigma: 0.0,
        excluded: false,
    }
}
