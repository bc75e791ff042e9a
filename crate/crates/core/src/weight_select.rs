//! Constructive choice of hidden-node input weights and biases.
//!
//! Each hidden node is centred on one anchor sample: its input weights are
//! the order embedding `W` scaled by a per-node gain, and its bias puts the
//! activation peak exactly on that anchor. Gains are large enough that every
//! other anchor lands at least `2 * dist` away from the peak, where the
//! activation is below `M / n0^2`. The resulting `n0 x n0` anchor matrix has
//! `M` on the diagonal and off-diagonal mass below `M`, so it is strictly
//! diagonally dominant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, Mat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivationKind {
    /// `g(x) = exp(-x^2)`.
    GaussianRbf,
}

/// A positive single-peak activation vanishing at +-infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Activation {
    pub kind: ActivationKind,
}

impl Default for Activation {
    fn default() -> Self {
        Activation::gaussian()
    }
}

impl Activation {
    pub const fn gaussian() -> Activation {
        Activation {
            kind: ActivationKind::GaussianRbf,
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            ActivationKind::GaussianRbf => (-x * x).exp(),
        }
    }

    /// Maximum value `M`.
    pub fn peak_value(&self) -> f64 {
        match self.kind {
            ActivationKind::GaussianRbf => 1.0,
        }
    }

    /// Argmax `x0`.
    pub fn peak_location(&self) -> f64 {
        match self.kind {
            ActivationKind::GaussianRbf => 0.0,
        }
    }

    /// Radius `a` with `g(x) < M / n0^2` for `|x - x0| > a`.
    pub fn cutoff_radius(&self, n0: usize) -> f64 {
        match self.kind {
            ActivationKind::GaussianRbf => cutoff_radius(n0),
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ActivationKind::GaussianRbf => "gaussian_rbf",
        }
    }

    pub fn from_name(name: &str) -> Option<Activation> {
        match name {
            "gaussian_rbf" => Some(Activation::gaussian()),
            _ => None,
        }
    }
}

/// Cutoff radius for the Gaussian: `max(sqrt|2 ln n0|, 1) + 1`.
pub fn cutoff_radius(n0: usize) -> f64 {
    let n0 = n0.max(1) as f64;
    (2.0 * n0.ln()).abs().sqrt().max(1.0) + 1.0
}

/// Selected hidden-layer parameters, one row of `node_weights` per node.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionParams {
    pub n0: usize,
    pub a: f64,
    pub dist: f64,
    pub gains: Vec<f64>,
    pub node_weights: Mat,
    pub biases: Vec<f64>,
}

/// Chooses node weights and biases for anchors (rows) whose projections
/// `W·X_i` are strictly increasing.
///
/// Interior nodes use `k_i = 2 dist / min(gap_left, gap_right)`; the first
/// and last node copy their neighbour's gain. Two anchors share the single
/// gap, one anchor gets `k = 1`.
pub fn select_weights(anchors: &Mat, w: &[f64], act: &Activation) -> Result<SelectionParams> {
    let (n0, d) = anchors.shape();
    if w.len() != d {
        return Err(Error::Shape(format!(
            "embedding has {} weights, anchors have dimension {d}",
            w.len()
        )));
    }
    let proj: Vec<f64> = anchors.row_iter().map(|x| dot(w, x)).collect();
    if let Some(i) = proj.iter().position(|p| !p.is_finite()) {
        return Err(Error::Overflow {
            context: "anchor projection",
            index: i,
        });
    }
    if let Some(i) = proj.windows(2).position(|p| !(p[1] > p[0])) {
        return Err(Error::Precondition(format!(
            "anchor projections must be strictly increasing, {} >= {} at anchor {}",
            proj[i],
            proj[i + 1],
            i + 1
        )));
    }

    let a = act.cutoff_radius(n0);
    let x0 = act.peak_location();
    let dist = (a - x0).max(a + x0);
    let gaps: Vec<f64> = proj.windows(2).map(|p| p[1] - p[0]).collect();

    let gains: Vec<f64> = match n0 {
        1 => vec![1.0],
        2 => vec![2.0 * dist / gaps[0]; 2],
        _ => {
            let mut g = vec![0.0; n0];
            for i in 1..n0 - 1 {
                g[i] = 2.0 * dist / gaps[i - 1].min(gaps[i]);
            }
            g[0] = g[1];
            g[n0 - 1] = g[n0 - 2];
            g
        }
    };
    if let Some(i) = gains.iter().position(|k| !k.is_finite()) {
        return Err(Error::Overflow {
            context: "node gain",
            index: i,
        });
    }

    // |W_i·X| <= k_i * sum_j |w_j| max |x_j| for every anchor X.
    let bound: f64 = (0..d)
        .map(|j| w[j].abs() * anchors.row_iter().fold(0.0f64, |m, x| m.max(x[j].abs())))
        .sum();
    let node_weights = Mat::from_fn(n0, d, |i, j| gains[i] * w[j]);
    let mut biases = Vec::with_capacity(n0);
    for i in 0..n0 {
        let wi = node_weights.row(i);
        if wi.iter().any(|v| !v.is_finite()) {
            return Err(Error::Overflow {
                context: "node weights",
                index: i,
            });
        }
        if !(gains[i] * bound).is_finite() {
            return Err(Error::Overflow {
                context: "node pre-activation",
                index: i,
            });
        }
        biases.push(x0 - dot(wi, anchors.row(i)));
    }

    Ok(SelectionParams {
        n0,
        a,
        dist,
        gains,
        node_weights,
        biases,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::build_hidden_matrix;
    use crate::matrix::strict_dominance_report;
    use crate::order_embed::embed_or_identity;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cutoff_examples() {
        assert_eq!(cutoff_radius(1), 2.0);
        let expected = (2.0 * 200f64.ln()).sqrt() + 1.0;
        assert_eq!(cutoff_radius(200), expected);
        assert!((cutoff_radius(200) - 4.2552).abs() < 5e-5);
        for n0 in 1..=10_000usize {
            let a = cutoff_radius(n0);
            assert!((-a * a).exp() < 1.0 / (n0 * n0) as f64, "n0 = {n0}");
        }
    }

    #[test]
    fn two_anchor_trace() {
        // d = 1, W = 1, projections {0, 1}: both gains equal 2 dist / 1.
        let anchors = Mat::from_rows(&[[0.0], [1.0]]).unwrap();
        let act = Activation::gaussian();
        let p = select_weights(&anchors, &[1.0], &act).unwrap();
        let a = cutoff_radius(2);
        assert_eq!(p.a, a);
        assert_eq!(p.dist, a);
        assert_eq!(p.gains, vec![2.0 * a, 2.0 * a]);
        assert_eq!(p.biases, vec![0.0, -2.0 * a]);
        for i in 0..2 {
            let z = dot(p.node_weights.row(i), anchors.row(i)) + p.biases[i];
            assert_eq!(act.eval(z), 1.0);
        }
    }

    #[test]
    fn single_anchor_gets_unit_gain() {
        let anchors = Mat::from_rows(&[[2.0, 3.0]]).unwrap();
        let p = select_weights(&anchors, &[1.0, 10.0], &Activation::gaussian()).unwrap();
        assert_eq!(p.gains, vec![1.0]);
        assert_eq!(p.biases, vec![-32.0]);
    }

    #[test]
    fn rejects_non_increasing_projections() {
        let anchors = Mat::from_rows(&[[1.0], [1.0]]).unwrap();
        assert!(matches!(
            select_weights(&anchors, &[1.0], &Activation::gaussian()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn near_duplicate_projection_overflows() {
        let anchors = Mat::from_rows(&[[0.0], [1e-320], [1.0]]).unwrap();
        assert!(matches!(
            select_weights(&anchors, &[1.0], &Activation::gaussian()),
            Err(Error::Overflow { .. })
        ));
    }

    fn sorted_anchors(rng: &mut ChaCha8Rng, n0: usize, d: usize) -> (Mat, Vec<f64>) {
        let x = Mat::from_fn(n0, d, |_, _| rng.random_range(-10.0..10.0));
        let w = embed_or_identity(&x).unwrap();
        let mut idx: Vec<usize> = (0..n0).collect();
        idx.sort_by(|&a, &b| dot(&w, x.row(a)).total_cmp(&dot(&w, x.row(b))));
        (x.select_rows(&idx), w)
    }

    #[test]
    fn random_anchor_sets_are_dominant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let act = Activation::gaussian();
        for _ in 0..50 {
            let (anchors, w) = sorted_anchors(&mut rng, 20, 2);
            let p = select_weights(&anchors, &w, &act).unwrap();
            let h = build_hidden_matrix(&p.node_weights, &p.biases, &anchors, &act).unwrap();
            for i in 0..20 {
                assert_eq!(h.get(i, i), 1.0);
            }
            let rep = strict_dominance_report(&h).unwrap();
            assert!(rep.global && rep.row_wise, "{rep:?}");
        }
    }

    #[test]
    fn off_peak_suppression_and_monotone_placement() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let act = Activation::gaussian();
        for d in 1..=5 {
            let n0 = 15;
            let (anchors, w) = sorted_anchors(&mut rng, n0, d);
            let p = select_weights(&anchors, &w, &act).unwrap();
            let bound = 1.0 / (n0 * n0) as f64;
            for i in 0..n0 {
                let z: Vec<f64> = anchors
                    .row_iter()
                    .map(|x| dot(p.node_weights.row(i), x) + p.biases[i])
                    .collect();
                assert!(z.windows(2).all(|s| s[1] > s[0]), "node {i}: {z:?}");
                for (j, &zj) in z.iter().enumerate() {
                    if j != i {
                        assert!(
                            zj.abs() >= 2.0 * p.dist * (1.0 - 1e-9),
                            "{zj} vs {}",
                            p.dist
                        );
                        assert!(act.eval(zj) < bound);
                    }
                }
            }
        }
    }
}
