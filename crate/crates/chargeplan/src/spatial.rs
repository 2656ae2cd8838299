//! 2-d KD-tree for radius queries and nearest-neighbour lookups on
//! projected points.
//!
//! The tree is an accelerator only: membership decisions use the same
//! `distance_sq` arithmetic as a brute-force scan, so query results are
//! exactly equal to the naive pairwise check, not approximately.

use crate::geom::PlanarPoint;

/// Pruning slack in meters. Subtree rejection compares a freshly rounded
/// `center - radius` against stored coordinates; padding it by a micron
/// guarantees rounding can never skip a point the direct inclusion test
/// would accept. Visiting a few extra nodes is harmless.
const PRUNE_SLACK: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct KdTree {
    /// Points in kd order (alternating-axis median layout); `.1` is the
    /// index the point had in the build input.
    items: Vec<(PlanarPoint, usize)>,
}

fn key(p: PlanarPoint, axis: usize) -> f64 {
    if axis == 0 {
        p.x
    } else {
        p.y
    }
}

fn build_rec(items: &mut [(PlanarPoint, usize)], axis: usize) {
    if items.len() <= 1 {
        return;
    }
    let mid = items.len() / 2;
    items.select_nth_unstable_by(mid, |a, b| {
        key(a.0, axis).total_cmp(&key(b.0, axis)).then(a.1.cmp(&b.1))
    });
    let (lo, rest) = items.split_at_mut(mid);
    build_rec(lo, axis ^ 1);
    build_rec(&mut rest[1..], axis ^ 1);
}

impl KdTree {
    pub fn build(points: &[PlanarPoint]) -> KdTree {
        let mut items: Vec<(PlanarPoint, usize)> =
            points.iter().copied().enumerate().map(|(i, p)| (p, i)).collect();
        build_rec(&mut items, 0);
        KdTree { items }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Indices of all points with distance_sq(center, p) ≤ radius², sorted
    /// ascending. The boundary is inclusive.
    pub fn within_radius(&self, center: PlanarPoint, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if !self.items.is_empty() && radius >= 0.0 {
            let r_sq = radius * radius;
            radius_rec(&self.items, 0, center, radius, r_sq, &mut out);
            out.sort_unstable();
        }
        out
    }

    /// Index and distance of the closest point; exact ties resolve to the
    /// lowest input index. None on an empty tree.
    pub fn nearest(&self, center: PlanarPoint) -> Option<(usize, f64)> {
        if self.items.is_empty() {
            return None;
        }
        let mut best: Option<(f64, usize)> = None;
        nearest_rec(&self.items, 0, center, &mut best);
        best.map(|(d_sq, idx)| (idx, d_sq.sqrt()))
    }
}

fn radius_rec(
    items: &[(PlanarPoint, usize)],
    axis: usize,
    center: PlanarPoint,
    radius: f64,
    r_sq: f64,
    out: &mut Vec<usize>,
) {
    let mid = items.len() / 2;
    let (node, node_idx) = items[mid];
    if center.distance_sq(&node) <= r_sq {
        out.push(node_idx);
    }
    let c = key(center, axis);
    let k = key(node, axis);
    // Left subtree holds keys ≤ k, right subtree keys ≥ k.
    if mid > 0 && c - radius <= k + PRUNE_SLACK {
        radius_rec(&items[..mid], axis ^ 1, center, radius, r_sq, out);
    }
    if mid + 1 < items.len() && c + radius >= k - PRUNE_SLACK {
        radius_rec(&items[mid + 1..], axis ^ 1, center, radius, r_sq, out);
    }
}

fn nearest_rec(
    items: &[(PlanarPoint, usize)],
    axis: usize,
    center: PlanarPoint,
    best: &mut Option<(f64, usize)>,
) {
    let mid = items.len() / 2;
    let (node, node_idx) = items[mid];
    let d_sq = center.distance_sq(&node);
    let better = match *best {
        None => true,
        Some((bd, bi)) => d_sq < bd || (d_sq == bd && node_idx < bi),
    };
    if better {
        *best = Some((d_sq, node_idx));
    }
    let diff = key(center, axis) - key(node, axis);
    let (near, far): (&[_], &[_]) = if diff <= 0.0 {
        (&items[..mid], &items[mid + 1..])
    } else {
        (&items[mid + 1..], &items[..mid])
    };
    if !near.is_empty() {
        nearest_rec(near, axis ^ 1, center, best);
    }
    // Descend the far side when the splitting plane is within (or exactly
    // at) the best distance; the inclusive bound keeps lowest-index tie
    // resolution exact.
    if !far.is_empty() && best.map_or(true, |(bd, _)| diff * diff <= bd) {
        nearest_rec(far, axis ^ 1, center, best);
    }
}
