//! ELM and EELM training for single-hidden-layer networks, and prediction.
//!
//! The network is `G(X) = sum_i beta_i g(W_i·X + b_i)`. ELM draws `W_i`, `b_i`
//! at random and solves for `beta` with the SVD pseudoinverse. EELM picks
//! `n0` anchor samples, builds `W_i`, `b_i` with [`select_weights`] so the
//! anchor block of the hidden matrix is strictly diagonally dominant, and
//! solves by orthogonal projection.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{classification_rate, rmse, Dataset, Task};
use crate::error::{Error, Result};
use crate::matrix::{dot, pinv_normal, pinv_svd_rank, Mat};
use crate::order_embed::embed_or_identity;
use crate::weight_select::{select_weights, Activation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Elm { seed: u64 },
    Eelm,
}

/// A trained network.
#[derive(Debug, Clone, PartialEq)]
pub struct SlfnModel {
    /// `n0 x d`, one row per hidden node.
    pub node_weights: Mat,
    pub biases: Vec<f64>,
    /// `n0 x m`.
    pub output_weights: Mat,
    pub activation: Activation,
    pub provenance: Provenance,
}

impl SlfnModel {
    pub fn new(
        node_weights: Mat,
        biases: Vec<f64>,
        output_weights: Mat,
        activation: Activation,
        provenance: Provenance,
    ) -> Result<SlfnModel> {
        let n0 = node_weights.rows();
        if biases.len() != n0 || output_weights.rows() != n0 {
            return Err(Error::Shape(format!(
                "{n0} nodes but {} biases and {} output-weight rows",
                biases.len(),
                output_weights.rows()
            )));
        }
        if !node_weights.is_finite()
            || !output_weights.is_finite()
            || biases.iter().any(|b| !b.is_finite())
        {
            return Err(Error::Precondition(
                "model parameters must be finite".into(),
            ));
        }
        Ok(SlfnModel {
            node_weights,
            biases,
            output_weights,
            activation,
            provenance,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.node_weights.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.output_weights.cols()
    }

    pub fn hidden_nodes(&self) -> usize {
        self.node_weights.rows()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PinvPath {
    OrthogonalProjection,
    Svd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Rmse,
    ErrorRate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Whole training call, selection included.
    pub train_seconds: f64,
    /// EELM weight and bias selection alone; zero for ELM.
    pub selection_seconds: f64,
    /// Whether the hidden matrix had full column rank.
    pub hidden_matrix_rank_ok: bool,
    pub pinv_path: PinvPath,
    pub train_metric: f64,
    pub metric_kind: MetricKind,
}

/// Hidden layer output matrix, entry `(i, k) = g(W_k·X_i + b_k)`.
pub fn build_hidden_matrix(
    node_weights: &Mat,
    biases: &[f64],
    inputs: &Mat,
    act: &Activation,
) -> Result<Mat> {
    let n0 = node_weights.rows();
    if biases.len() != n0 {
        return Err(Error::Shape(format!(
            "{n0} nodes but {} biases",
            biases.len()
        )));
    }
    if node_weights.cols() != inputs.cols() {
        return Err(Error::Shape(format!(
            "node weights have dimension {}, inputs {}",
            node_weights.cols(),
            inputs.cols()
        )));
    }
    let h = Mat::from_fn(inputs.rows(), n0, |i, k| {
        act.eval(dot(node_weights.row(k), inputs.row(i)) + biases[k])
    });
    if let Some(pos) = h.as_slice().iter().position(|v| !v.is_finite()) {
        return Err(Error::Overflow {
            context: "hidden matrix",
            index: pos,
        });
    }
    Ok(h)
}

fn check_nodes(data: &Dataset, n0: usize) -> Result<()> {
    if n0 == 0 {
        return Err(Error::Precondition("need at least one hidden node".into()));
    }
    if n0 > data.len() {
        return Err(Error::Precondition(format!(
            "{n0} hidden nodes exceed {} training samples",
            data.len()
        )));
    }
    Ok(())
}

fn training_metric(data: &Dataset, pred: &Mat) -> Result<(f64, MetricKind)> {
    match data.task {
        Task::Regression => Ok((rmse(pred, &data.targets)?, MetricKind::Rmse)),
        Task::Classification { .. } => Ok((
            1.0 - classification_rate(pred, &data.targets)?,
            MetricKind::ErrorRate,
        )),
    }
}

/// Classic ELM: input weights and biases uniform on `[-1, 1]`, output weights
/// `H^+ T` through the SVD pseudoinverse.
pub fn train_elm(
    data: &Dataset,
    n0: usize,
    act: &Activation,
    seed: u64,
) -> Result<(SlfnModel, TrainReport)> {
    check_nodes(data, n0)?;
    let start = Instant::now();
    let d = data.input_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let node_weights = Mat::from_fn(n0, d, |_, _| rng.random_range(-1.0..=1.0));
    let biases: Vec<f64> = (0..n0).map(|_| rng.random_range(-1.0..=1.0)).collect();

    let h = build_hidden_matrix(&node_weights, &biases, &data.inputs, act)?;
    let (h_pinv, rank) = pinv_svd_rank(&h, None)?;
    let beta = h_pinv.matmul(&data.targets)?;
    let train_seconds = start.elapsed().as_secs_f64();

    let (train_metric, metric_kind) = training_metric(data, &h.matmul(&beta)?)?;
    let model = SlfnModel::new(node_weights, biases, beta, *act, Provenance::Elm { seed })?;
    Ok((
        model,
        TrainReport {
            train_seconds,
            selection_seconds: 0.0,
            hidden_matrix_rank_ok: rank == n0,
            pinv_path: PinvPath::Svd,
            train_metric,
            metric_kind,
        },
    ))
}

/// How EELM picks the samples that hidden nodes are centred on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorStrategy {
    /// The first `n0` samples in dataset order.
    FirstN0,
    /// `n0` distinct samples drawn at random.
    #[default]
    RandomN0,
    /// `n0` samples evenly spaced along the order embedding of all samples.
    EvenlySpacedByProjection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EelmOptions {
    pub anchor_strategy: AnchorStrategy,
    pub seed: u64,
    /// Solve with the SVD pseudoinverse instead of orthogonal projection.
    /// For cross-checking only.
    pub force_svd: bool,
}

impl Default for EelmOptions {
    fn default() -> Self {
        EelmOptions {
            anchor_strategy: AnchorStrategy::RandomN0,
            seed: 0,
            force_svd: false,
        }
    }
}

/// Output of the EELM selection step.
#[derive(Debug, Clone, PartialEq)]
pub struct EelmSelection {
    /// Dataset row indices of the anchors, sorted by ascending projection.
    pub anchors: Vec<usize>,
    /// Order-embedding weights `W` computed over the anchors.
    pub embedding: Vec<f64>,
    pub node_weights: Mat,
    pub biases: Vec<f64>,
}

fn choose_anchors(
    inputs: &Mat,
    n0: usize,
    strategy: AnchorStrategy,
    seed: u64,
) -> Result<Vec<usize>> {
    let n = inputs.rows();
    Ok(match strategy {
        AnchorStrategy::FirstN0 => (0..n0).collect(),
        AnchorStrategy::RandomN0 => {
            if n0 == n {
                (0..n).collect()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut idx = rand::seq::index::sample(&mut rng, n, n0).into_vec();
                idx.sort_unstable();
                idx
            }
        }
        AnchorStrategy::EvenlySpacedByProjection => {
            let w = embed_or_identity(inputs)?;
            let order = sort_by_projection(inputs, &(0..n).collect::<Vec<_>>(), &w);
            if n0 == 1 {
                vec![order[n / 2]]
            } else {
                (0..n0)
                    .map(|i| order[(i * (n - 1) + (n0 - 1) / 2) / (n0 - 1)])
                    .collect()
            }
        }
    })
}

fn sort_by_projection(inputs: &Mat, idx: &[usize], w: &[f64]) -> Vec<usize> {
    let mut keyed: Vec<(f64, usize)> = idx.iter().map(|&i| (dot(w, inputs.row(i)), i)).collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
    keyed.into_iter().map(|(_, i)| i).collect()
}

/// EELM step 1: anchors, order embedding over the anchors, anchors sorted by
/// projection, then node weights and biases.
pub fn eelm_select(
    inputs: &Mat,
    n0: usize,
    strategy: AnchorStrategy,
    seed: u64,
    act: &Activation,
) -> Result<EelmSelection> {
    if n0 == 0 || n0 > inputs.rows() {
        return Err(Error::Precondition(format!(
            "need 1 <= n0 <= {}, got {n0}",
            inputs.rows()
        )));
    }
    let chosen = choose_anchors(inputs, n0, strategy, seed)?;
    let anchor_inputs = inputs.select_rows(&chosen);
    let embedding = embed_or_identity(&anchor_inputs)?;
    let anchors = sort_by_projection(inputs, &chosen, &embedding);
    let sorted = inputs.select_rows(&anchors);
    if let Some(i) = (1..n0).find(|&i| sorted.row(i) == sorted.row(i - 1)) {
        return Err(Error::Precondition(format!(
            "duplicate anchor samples {} and {}",
            anchors[i - 1],
            anchors[i]
        )));
    }
    let params = select_weights(&sorted, &embedding, act)?;
    Ok(EelmSelection {
        anchors,
        embedding,
        node_weights: params.node_weights,
        biases: params.biases,
    })
}

/// Hidden-matrix row order used by EELM: anchors by ascending projection,
/// then the remaining samples in dataset order.
pub fn eelm_row_order(n: usize, anchors: &[usize]) -> Vec<usize> {
    let mut is_anchor = vec![false; n];
    for &a in anchors {
        is_anchor[a] = true;
    }
    anchors
        .iter()
        .copied()
        .chain((0..n).filter(|&i| !is_anchor[i]))
        .collect()
}

/// Effective ELM with the Gaussian activation.
///
/// The hidden matrix is built over all samples with the anchors as its first
/// `n0` rows, the targets reordered to match. Output weights come from
/// [`pinv_normal`]; a rank failure there means the selection guarantee was
/// violated and is returned as an error.
pub fn train_eelm(
    data: &Dataset,
    n0: usize,
    opts: &EelmOptions,
) -> Result<(SlfnModel, TrainReport)> {
    check_nodes(data, n0)?;
    let act = Activation::gaussian();
    let start = Instant::now();
    let sel = eelm_select(&data.inputs, n0, opts.anchor_strategy, opts.seed, &act)?;
    let selection_seconds = start.elapsed().as_secs_f64();

    let order = eelm_row_order(data.len(), &sel.anchors);
    let inputs = data.inputs.select_rows(&order);
    let targets = data.targets.select_rows(&order);
    let h = build_hidden_matrix(&sel.node_weights, &sel.biases, &inputs, &act)?;
    let (h_pinv, rank_ok, pinv_path) = if opts.force_svd {
        let (p, rank) = pinv_svd_rank(&h, None)?;
        (p, rank == n0, PinvPath::Svd)
    } else {
        match pinv_normal(&h) {
            Ok(p) => (p, true, PinvPath::OrthogonalProjection),
            Err(e @ Error::RankDeficient { .. }) => {
                log::error!("EELM hidden matrix lost full column rank: {e}");
                return Err(e);
            }
            Err(e) => return Err(e),
        }
    };
    let beta = h_pinv.matmul(&targets)?;
    let train_seconds = start.elapsed().as_secs_f64();

    let (train_metric, metric_kind) = training_metric(
        &Dataset {
            inputs,
            targets,
            ..data.clone()
        },
        &h.matmul(&beta)?,
    )?;
    let model = SlfnModel::new(sel.node_weights, sel.biases, beta, act, Provenance::Eelm)?;
    Ok((
        model,
        TrainReport {
            train_seconds,
            selection_seconds,
            hidden_matrix_rank_ok: rank_ok,
            pinv_path,
            train_metric,
            metric_kind,
        },
    ))
}

/// Network outputs for each input row, `n x m`.
pub fn predict(model: &SlfnModel, inputs: &Mat) -> Result<Mat> {
    if inputs.cols() != model.input_dim() {
        return Err(Error::Shape(format!(
            "model expects dimension {}, inputs have {}",
            model.input_dim(),
            inputs.cols()
        )));
    }
    let h = build_hidden_matrix(
        &model.node_weights,
        &model.biases,
        inputs,
        &model.activation,
    )?;
    h.matmul(&model.output_weights)
}
