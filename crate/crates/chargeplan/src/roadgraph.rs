//! Per-zone road graphs and betweenness centrality.
//!
//! Graphs are built from edge records clipped to a zone polygon: nodes outside
//! the polygon are dropped together with their incident edges, interior
//! endpoints of clipped edges survive (possibly isolated). Betweenness is
//! computed with Brandes' algorithm in exact rational arithmetic, so raw
//! values are the true path-count fractions converted to f64 once at the end;
//! two implementations that agree as rationals agree bit-for-bit as floats.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num::{BigInt, BigRational, One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::geom::{point_in_polygon, GeoPoint, PlanarPoint, Projection};

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRecord {
    pub zone_id: String,
    pub node_a: u64,
    pub node_b: u64,
    pub a: GeoPoint,
    pub b: GeoPoint,
}

#[derive(Debug, Clone)]
pub struct RoadNode {
    pub id: u64,
    pub geo: GeoPoint,
    pub pos: PlanarPoint,
    pub degree: usize,
}

#[derive(Debug, Clone)]
pub struct RoadGraph {
    pub zone_id: String,
    nodes: Vec<RoadNode>,
    adjacency: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    edge_length_m: Vec<f64>,
}

impl RoadGraph {
    /// Build the zone graph from raw edge records. Clipping keeps a node iff
    /// its projected position lies inside the zone polygon; an edge survives
    /// iff both endpoints do. Self-loops and duplicate (unordered) edges are
    /// dropped. Node order is ascending id, which fixes every downstream
    /// iteration order.
    pub fn build(
        zone_id: &str,
        polygon: &[GeoPoint],
        records: &[EdgeRecord],
        projection: &Projection,
    ) -> Result<RoadGraph> {
        let mut ring: Vec<PlanarPoint> = polygon.iter().map(|p| projection.project(*p)).collect();
        if ring.len() >= 2 && ring[0] == ring[ring.len() - 1] {
            ring.pop();
        }
        if ring.len() < 3 {
            return Err(Error::DegeneratePolygon(format!(
                "zone {zone_id}: polygon has {} distinct vertices",
                ring.len()
            )));
        }

        // Collect node coordinates, rejecting records that redefine a node.
        let mut coords: BTreeMap<u64, GeoPoint> = BTreeMap::new();
        let mut note = |id: u64, geo: GeoPoint| -> Result<()> {
            match coords.get(&id) {
                None => {
                    coords.insert(id, geo);
                    Ok(())
                }
                Some(prev)
                    if (prev.lat - geo.lat).abs() > 1e-9 || (prev.lon - geo.lon).abs() > 1e-9 =>
                {
                    Err(Error::InvalidParameter(format!(
                        "node {id} appears with conflicting coordinates"
                    )))
                }
                Some(_) => Ok(()),
            }
        };
        for rec in records {
            note(rec.node_a, rec.a)?;
            note(rec.node_b, rec.b)?;
        }

        let inside: BTreeMap<u64, (GeoPoint, PlanarPoint)> = coords
            .into_iter()
            .filter_map(|(id, geo)| {
                let pos = projection.project(geo);
                point_in_polygon(pos, &ring).then_some((id, (geo, pos)))
            })
            .collect();
        if inside.is_empty() {
            return Err(Error::EmptyClip {
                zone_id: zone_id.to_string(),
            });
        }

        let index_of: BTreeMap<u64, usize> = inside
            .keys()
            .enumerate()
            .map(|(i, id)| (*id, i))
            .collect();

        let mut edge_set: BTreeSet<(usize, usize)> = BTreeSet::new();
        for rec in records {
            if rec.node_a == rec.node_b {
                continue;
            }
            let (Some(&ia), Some(&ib)) = (index_of.get(&rec.node_a), index_of.get(&rec.node_b))
            else {
                continue;
            };
            edge_set.insert((ia.min(ib), ia.max(ib)));
        }

        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); inside.len()];
        let mut edges = Vec::with_capacity(edge_set.len());
        for &(a, b) in &edge_set {
            adjacency[a].push(b);
            adjacency[b].push(a);
            edges.push((a, b));
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }

        let nodes: Vec<RoadNode> = inside
            .iter()
            .enumerate()
            .map(|(i, (id, (geo, pos)))| RoadNode {
                id: *id,
                geo: *geo,
                pos: *pos,
                degree: adjacency[i].len(),
            })
            .collect();
        let edge_length_m = edges
            .iter()
            .map(|&(a, b)| nodes[a].pos.distance(&nodes[b].pos))
            .collect();

        Ok(RoadGraph {
            zone_id: zone_id.to_string(),
            nodes,
            adjacency,
            edges,
            edge_length_m,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[RoadNode] {
        &self.nodes
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_length_m(&self, edge: usize) -> f64 {
        self.edge_length_m[edge]
    }

    /// Index of a node by external id (nodes are sorted by id).
    pub fn node_index(&self, id: u64) -> Option<usize> {
        self.nodes.binary_search_by_key(&id, |n| n.id).ok()
    }
}

#[derive(Debug, Clone)]
pub struct Betweenness {
    /// Unordered-pair path-count fractions (sum over s < t of sigma_st(v)/sigma_st).
    pub raw: Vec<f64>,
    /// Min-max normalised raw values; a constant raw vector maps to all zeros.
    pub normalized: Vec<f64>,
}

/// Exact Brandes over hop-count shortest paths. Accumulation runs over
/// ordered source-target pairs and is halved at the end (the graph is
/// undirected).
pub fn betweenness(g: &RoadGraph) -> Betweenness {
    let raw_exact = brandes_exact(&g.adjacency);
    let raw: Vec<f64> = raw_exact
        .iter()
        .map(|v| v.to_f64().expect("betweenness fits in f64"))
        .collect();
    let normalized = min_max_normalize(&raw);
    Betweenness { raw, normalized }
}

fn brandes_exact(adjacency: &[Vec<usize>]) -> Vec<BigRational> {
    let n = adjacency.len();
    let mut bc = vec![BigRational::zero(); n];
    for s in 0..n {
        let mut stack: Vec<usize> = Vec::with_capacity(n);
        let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut sigma: Vec<BigInt> = vec![BigInt::zero(); n];
        sigma[s] = BigInt::one();
        let mut dist: Vec<i64> = vec![-1; n];
        dist[s] = 0;
        let mut queue = VecDeque::new();
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in &adjacency[v] {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    let add = sigma[v].clone();
                    sigma[w] += add;
                    pred[w].push(v);
                }
            }
        }
        let mut delta = vec![BigRational::zero(); n];
        while let Some(w) = stack.pop() {
            if !sigma[w].is_zero() {
                let coeff = (BigRational::one() + delta[w].clone())
                    / BigRational::from(sigma[w].clone());
                for &v in &pred[w] {
                    let add = BigRational::from(sigma[v].clone()) * coeff.clone();
                    delta[v] += add;
                }
            }
            if w != s {
                let add = delta[w].clone();
                bc[w] += add;
            }
        }
    }
    let two = BigRational::from(BigInt::from(2));
    bc.into_iter().map(|v| v / two.clone()).collect()
}

/// Length-weighted variant (Dijkstra shortest paths, f64 arithmetic, relative
/// tolerance 1e-9 for equal-length path detection). Kept behind an explicit
/// call because hop-count is the calibrated default.
pub fn betweenness_weighted(g: &RoadGraph) -> Betweenness {
    let n = g.node_count();
    let mut weights: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (e, &(a, b)) in g.edges.iter().enumerate() {
        let len = g.edge_length_m[e].max(f64::MIN_POSITIVE);
        weights[a].push((b, len));
        weights[b].push((a, len));
    }
    let mut bc = vec![0.0; n];
    for s in 0..n {
        let mut dist = vec![f64::INFINITY; n];
        let mut sigma = vec![0.0; n];
        let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut visited = vec![false; n];
        dist[s] = 0.0;
        sigma[s] = 1.0;
        let mut order: Vec<usize> = Vec::with_capacity(n);
        loop {
            // O(V^2) extraction keeps ordering deterministic and is fast at
            // zone scale.
            let mut best = usize::MAX;
            let mut best_d = f64::INFINITY;
            for v in 0..n {
                if !visited[v] && dist[v] < best_d {
                    best = v;
                    best_d = dist[v];
                }
            }
            if best == usize::MAX {
                break;
            }
            visited[best] = true;
            order.push(best);
            for &(w, len) in &weights[best] {
                let cand = dist[best] + len;
                let scale = cand.abs().max(1.0);
                if !dist[w].is_finite() || cand < dist[w] - 1e-9 * scale {
                    dist[w] = cand;
                    sigma[w] = sigma[best];
                    pred[w] = vec![best];
                } else if (cand - dist[w]).abs() <= 1e-9 * scale && !visited[w] {
                    sigma[w] += sigma[best];
                    pred[w].push(best);
                }
            }
        }
        let mut delta = vec![0.0; n];
        for &w in order.iter().rev() {
            for &v in &pred[w] {
                if sigma[w] > 0.0 {
                    delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
                }
            }
            if w != s {
                bc[w] += delta[w];
            }
        }
    }
    let raw: Vec<f64> = bc.iter().map(|v| v / 2.0).collect();
    let normalized = min_max_normalize(&raw);
    Betweenness { raw, normalized }
}

/// (v - min) / (max - min); a constant vector maps to all zeros.
pub fn min_max_normalize(values: &[f64]) -> Vec<f64> {
    if values.is_empty() {
        return Vec::new();
    }
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max > min {
        values.iter().map(|v| (v - min) / (max - min)).collect()
    } else {
        vec![0.0; values.len()]
    }
}
