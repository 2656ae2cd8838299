//! Learned centrality: a two-layer mean-aggregation graph network trained to
//! predict normalised betweenness from cheap node features, deployed
//! inductively across all zones, plus the percentile filter that turns scores
//! into candidate sets.
//!
//! Training is full-batch gradient descent on MSE with a backtracking step
//! (halve until the loss does not increase), which makes the loss trajectory
//! monotonically non-increasing by construction.

use ndarray::{Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roadgraph::RoadGraph;

/// Positional encoding: sin/cos at two frequencies for each of lat and lon.
pub const POSITIONAL_VALUES: usize = 8;
/// degree + poi density + positional encoding.
pub const INPUT_DIM: usize = 2 + POSITIONAL_VALUES;

const MODEL_VERSION: u32 = 1;

/// Per-node input features, one row per graph node.
#[derive(Debug, Clone)]
pub struct NodeFeatures {
    matrix: Array2<f64>,
}

impl NodeFeatures {
    /// Features from graph structure and per-node POI density:
    /// degree / max degree, min-max normalised POI density, and sinusoidal
    /// encodings of zone-normalised latitude and longitude. Zone-local
    /// normalisation keeps the encodings informative at desk scale, where raw
    /// coordinate sinusoids would be constant to float precision.
    pub fn build(g: &RoadGraph, poi_density: &[f64]) -> Result<NodeFeatures> {
        let n = g.node_count();
        if poi_density.len() != n {
            return Err(Error::InvalidParameter(format!(
                "poi_density has {} entries for {} nodes",
                poi_density.len(),
                n
            )));
        }
        let max_degree = g.nodes().iter().map(|v| v.degree).max().unwrap_or(0);
        let poi = crate::roadgraph::min_max_normalize(poi_density);
        let unit = |lo: f64, hi: f64, v: f64| -> f64 {
            if hi > lo {
                (v - lo) / (hi - lo)
            } else {
                0.5
            }
        };
        let (mut lat_lo, mut lat_hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut lon_lo, mut lon_hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for node in g.nodes() {
            lat_lo = lat_lo.min(node.geo.lat);
            lat_hi = lat_hi.max(node.geo.lat);
            lon_lo = lon_lo.min(node.geo.lon);
            lon_hi = lon_hi.max(node.geo.lon);
        }
        let mut matrix = Array2::zeros((n, INPUT_DIM));
        for (i, node) in g.nodes().iter().enumerate() {
            matrix[[i, 0]] = if max_degree > 0 {
                node.degree as f64 / max_degree as f64
            } else {
                0.0
            };
            matrix[[i, 1]] = poi[i];
            let t_lat = unit(lat_lo, lat_hi, node.geo.lat);
            let t_lon = unit(lon_lo, lon_hi, node.geo.lon);
            for (k, t) in [t_lat, t_lon].into_iter().enumerate() {
                let base = 2 + k * 4;
                matrix[[i, base]] = (std::f64::consts::PI * t).sin();
                matrix[[i, base + 1]] = (std::f64::consts::PI * t).cos();
                matrix[[i, base + 2]] = (2.0 * std::f64::consts::PI * t).sin();
                matrix[[i, base + 3]] = (2.0 * std::f64::consts::PI * t).cos();
            }
        }
        Ok(NodeFeatures { matrix })
    }

    /// Raw feature matrix, for synthetic tests.
    pub fn from_matrix(matrix: Array2<f64>) -> Result<NodeFeatures> {
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "feature matrix contains non-finite values".into(),
            ));
        }
        Ok(NodeFeatures { matrix })
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }
}

/// Mean aggregation over {v} ∪ N(v), the fixed message-passing step.
pub fn aggregate(g: &RoadGraph, feats: &NodeFeatures) -> Array2<f64> {
    let x = &feats.matrix;
    let mut out = x.clone();
    for v in 0..g.node_count() {
        let mut row = x.row(v).to_owned();
        for &u in g.neighbors(v) {
            row += &x.row(u);
        }
        row /= (g.neighbors(v).len() + 1) as f64;
        out.row_mut(v).assign(&row);
    }
    out
}

#[derive(Debug, Clone)]
pub struct GnnModel {
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array1<f64>,
    pub b2: f64,
}

impl GnnModel {
    pub fn zeros(hidden_dim: usize, input_dim: usize) -> Self {
        GnnModel {
            w1: Array2::zeros((hidden_dim, input_dim)),
            b1: Array1::zeros(hidden_dim),
            w2: Array1::zeros(hidden_dim),
            b2: 0.0,
        }
    }

    /// Xavier-uniform weights, zero biases, seeded.
    pub fn xavier(hidden_dim: usize, input_dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bound1 = (6.0 / (input_dim + hidden_dim) as f64).sqrt();
        let w1 = Array2::from_shape_fn((hidden_dim, input_dim), |_| {
            rng.gen_range(-bound1..bound1)
        });
        let bound2 = (6.0 / (hidden_dim + 1) as f64).sqrt();
        let w2 = Array1::from_shape_fn(hidden_dim, |_| rng.gen_range(-bound2..bound2));
        GnnModel {
            w1,
            b1: Array1::zeros(hidden_dim),
            w2,
            b2: 0.0,
        }
    }

    pub fn hidden_dim(&self) -> usize {
        self.w1.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.w1.ncols()
    }

    fn stepped(&self, grad: &GnnGradient, step: f64) -> GnnModel {
        GnnModel {
            w1: &self.w1 - &(step * &grad.w1),
            b1: &self.b1 - &(step * &grad.b1),
            w2: &self.w2 - &(step * &grad.w2),
            b2: self.b2 - step * grad.b2,
        }
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            version: MODEL_VERSION,
            input_dim: self.input_dim(),
            hidden_dim: self.hidden_dim(),
            w1: self.w1.rows().into_iter().map(|r| r.to_vec()).collect(),
            b1: self.b1.to_vec(),
            w2: self.w2.to_vec(),
            b2: self.b2,
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<GnnModel> {
        let file: ModelFile = serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("model parse: {e}")))?;
        if file.version != MODEL_VERSION {
            return Err(Error::InvalidParameter(format!(
                "unsupported model version {}",
                file.version
            )));
        }
        if file.w1.len() != file.hidden_dim
            || file.w1.iter().any(|row| row.len() != file.input_dim)
            || file.b1.len() != file.hidden_dim
            || file.w2.len() != file.hidden_dim
        {
            return Err(Error::InvalidParameter(
                "model matrix shapes inconsistent with header".into(),
            ));
        }
        let mut w1 = Array2::zeros((file.hidden_dim, file.input_dim));
        for (i, row) in file.w1.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                w1[[i, j]] = *v;
            }
        }
        Ok(GnnModel {
            w1,
            b1: Array1::from_vec(file.b1),
            w2: Array1::from_vec(file.w2),
            b2: file.b2,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    input_dim: usize,
    hidden_dim: usize,
    w1: Vec<Vec<f64>>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: f64,
}

#[derive(Debug, Clone)]
pub struct CentralityScores {
    pub zone_id: String,
    pub node_ids: Vec<u64>,
    pub values: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn relu(h: &Array2<f64>) -> Array2<f64> {
    h.mapv(|x| x.max(0.0))
}

fn predict(model: &GnnModel, aggregated: &Array2<f64>) -> (Array2<f64>, Array1<f64>) {
    let h = aggregated.dot(&model.w1.t()) + &model.b1;
    let z = relu(&h);
    let p = (z.dot(&model.w2) + model.b2).mapv(sigmoid);
    (h, p)
}

/// Score every node: c_v = sigmoid(W2 · ReLU(W1 · mean_{u ∈ {v}∪N(v)} x_u + b1) + b2).
pub fn forward(model: &GnnModel, g: &RoadGraph, feats: &NodeFeatures) -> Result<CentralityScores> {
    if feats.matrix.ncols() != model.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.input_dim(),
            got: feats.matrix.ncols(),
        });
    }
    if feats.matrix.nrows() != g.node_count() {
        return Err(Error::InvalidParameter(format!(
            "feature matrix has {} rows for {} nodes",
            feats.matrix.nrows(),
            g.node_count()
        )));
    }
    let aggregated = aggregate(g, feats);
    let (_, p) = predict(model, &aggregated);
    Ok(CentralityScores {
        zone_id: g.zone_id.clone(),
        node_ids: g.nodes().iter().map(|n| n.id).collect(),
        values: p.to_vec(),
    })
}

/// One zone's training batch: aggregation is model-independent, so it is
/// precomputed once and training reduces to a plain two-layer network.
#[derive(Debug, Clone)]
pub struct TrainingZone {
    aggregated: Array2<f64>,
    targets: Array1<f64>,
}

impl TrainingZone {
    pub fn new(g: &RoadGraph, feats: &NodeFeatures, targets: &[f64]) -> Result<TrainingZone> {
        if targets.len() != g.node_count() {
            return Err(Error::InvalidParameter(format!(
                "{} targets for {} nodes",
                targets.len(),
                g.node_count()
            )));
        }
        if targets.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::InvalidParameter(
                "targets must be normalised to [0, 1]".into(),
            ));
        }
        Ok(TrainingZone {
            aggregated: aggregate(g, feats),
            targets: Array1::from_vec(targets.to_vec()),
        })
    }

    fn nodes(&self) -> usize {
        self.targets.len()
    }
}

#[derive(Debug, Clone)]
pub struct GnnGradient {
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array1<f64>,
    pub b2: f64,
}

/// Mean squared error over all nodes of all zones.
pub fn mse_loss(model: &GnnModel, zones: &[TrainingZone]) -> f64 {
    let total: usize = zones.iter().map(|z| z.nodes()).sum();
    if total == 0 {
        return 0.0;
    }
    let mut acc = 0.0;
    for z in zones {
        let (_, p) = predict(model, &z.aggregated);
        let diff = &p - &z.targets;
        acc += diff.mapv(|d| d * d).sum();
    }
    acc / total as f64
}

/// Analytic gradient of [`mse_loss`] with respect to every parameter.
pub fn mse_gradient(model: &GnnModel, zones: &[TrainingZone]) -> GnnGradient {
    let total: usize = zones.iter().map(|z| z.nodes()).sum();
    let mut gw1 = Array2::zeros(model.w1.raw_dim());
    let mut gb1 = Array1::zeros(model.b1.raw_dim());
    let mut gw2 = Array1::zeros(model.w2.raw_dim());
    let mut gb2 = 0.0;
    if total == 0 {
        return GnnGradient {
            w1: gw1,
            b1: gb1,
            w2: gw2,
            b2: gb2,
        };
    }
    for z in zones {
        let (h, p) = predict(model, &z.aggregated);
        let zrelu = relu(&h);
        // d loss / d pre-sigmoid = 2 (p - y) p (1 - p) / N
        let du = (&p - &z.targets) * &p.mapv(|v| v * (1.0 - v)) * (2.0 / total as f64);
        gw2 += &zrelu.t().dot(&du);
        gb2 += du.sum();
        let n = z.nodes();
        let hidden = model.hidden_dim();
        let dh = Array2::from_shape_fn((n, hidden), |(i, j)| {
            if h[[i, j]] > 0.0 {
                du[i] * model.w2[j]
            } else {
                0.0
            }
        });
        gw1 += &dh.t().dot(&z.aggregated);
        gb1 += &dh.sum_axis(Axis(0));
    }
    GnnGradient {
        w1: gw1,
        b1: gb1,
        w2: gw2,
        b2: gb2,
    }
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub hidden_dim: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            hidden_dim: 16,
            learning_rate: 0.01,
            epochs: 500,
            seed: 42,
        }
    }
}

#[derive(Debug)]
pub struct TrainResult {
    pub model: GnnModel,
    pub final_loss: f64,
    /// Loss after each accepted epoch, monotonically non-increasing.
    pub epoch_losses: Vec<f64>,
}

/// Full-batch gradient descent with a backtracking step: each epoch halves
/// the step until the loss does not increase, so the trajectory never rises.
/// Stops early when no descent is possible at float precision.
pub fn train(zones: &[TrainingZone], cfg: &TrainConfig) -> Result<TrainResult> {
    if zones.is_empty() {
        return Err(Error::InvalidParameter("no training zones".into()));
    }
    let input_dim = zones[0].aggregated.ncols();
    for z in zones {
        if z.aggregated.ncols() != input_dim {
            return Err(Error::DimensionMismatch {
                expected: input_dim,
                got: z.aggregated.ncols(),
            });
        }
    }
    let mut model = GnnModel::xavier(cfg.hidden_dim, input_dim, cfg.seed);
    let mut loss = mse_loss(&model, zones);
    if !loss.is_finite() {
        return Err(Error::Diverged { epoch: 0 });
    }
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let grad = mse_gradient(&model, zones);
        if grad.w1.iter().any(|v| !v.is_finite())
            || grad.b1.iter().any(|v| !v.is_finite())
            || grad.w2.iter().any(|v| !v.is_finite())
            || !grad.b2.is_finite()
        {
            return Err(Error::Diverged { epoch });
        }
        let mut step = cfg.learning_rate;
        let mut accepted = false;
        for _ in 0..60 {
            let cand = model.stepped(&grad, step);
            let cand_loss = mse_loss(&cand, zones);
            if cand_loss.is_finite() && cand_loss <= loss {
                model = cand;
                loss = cand_loss;
                accepted = true;
                break;
            }
            step /= 2.0;
        }
        if !accepted {
            break;
        }
        epoch_losses.push(loss);
    }
    Ok(TrainResult {
        model,
        final_loss: loss,
        epoch_losses,
    })
}

/// Keep nodes scoring at or above the zone's τ-quantile (nearest-rank,
/// inclusive): threshold = sorted[⌊τ·n⌋]. Returns a mask aligned with the
/// score order.
pub fn percentile_filter(scores: &CentralityScores, tau: f64) -> Result<Vec<bool>> {
    if scores.values.is_empty() {
        return Err(Error::EmptyScores);
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tau must lie in (0, 1), got {tau}"
        )));
    }
    let mut sorted = scores.values.clone();
    sorted.sort_by(f64::total_cmp);
    let k = ((tau * sorted.len() as f64).floor() as usize).min(sorted.len() - 1);
    let threshold = sorted[k];
    Ok(scores.values.iter().map(|v| *v >= threshold).collect())
}

/// Spearman rank correlation with average ranks for ties; 0.0 when either
/// side has no rank variance.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "rank correlation needs paired samples");
    let n = a.len();
    if n < 2 {
        return 0.0;
    }
    let ra = average_ranks(a);
    let rb = average_ranks(b);
    let mean = (n + 1) as f64 / 2.0;
    let mut num = 0.0;
    let mut da = 0.0;
    let mut db = 0.0;
    for i in 0..n {
        let xa = ra[i] - mean;
        let xb = rb[i] - mean;
        num += xa * xb;
        da += xa * xa;
        db += xb * xb;
    }
    if da == 0.0 || db == 0.0 {
        return 0.0;
    }
    num / (da * db).sqrt()
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
        // 1-based ranks; ties share the mean rank of their run.
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            ranks[order[k]] = rank;
        }
        i = j + 1;
    }
    ranks
}
