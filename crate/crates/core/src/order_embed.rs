//! Inverse lexicographical order on R^d and the affine map that turns it
//! into scalar order.
//!
//! Vectors are compared from the last coordinate backwards: the highest
//! index where two vectors differ (their *different attribute*) decides.
//! [`build_embedding`] constructs a weight vector `W` such that `W·X` is
//! strictly increasing along any invlex-sorted list of distinct samples.
//! Each attribute is rescaled into `[-1, 1]` and then shifted by a decimal
//! exponent large enough that a gap in attribute `j` outweighs any
//! combination of gaps in attributes `1..j`.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::matrix::{dot, Mat};

/// Compares two vectors in inverse lexicographical order.
pub fn invlex_compare(x1: &[f64], x2: &[f64]) -> Result<Ordering> {
    check_dims(x1, x2)?;
    Ok(invlex_cmp_unchecked(x1, x2))
}

#[inline]
fn invlex_cmp_unchecked(x1: &[f64], x2: &[f64]) -> Ordering {
    for (a, b) in x1.iter().zip(x2).rev() {
        if a != b {
            return a.total_cmp(b);
        }
    }
    Ordering::Equal
}

/// Zero-based index of the highest coordinate at which `x1` and `x2` differ.
pub fn different_attribute(x1: &[f64], x2: &[f64]) -> Result<usize> {
    check_dims(x1, x2)?;
    x1.iter()
        .zip(x2)
        .rposition(|(a, b)| a != b)
        .ok_or(Error::NoDifference)
}

fn check_dims(x1: &[f64], x2: &[f64]) -> Result<()> {
    if x1.len() != x2.len() {
        return Err(Error::Shape(format!(
            "cannot compare vectors of length {} and {}",
            x1.len(),
            x2.len()
        )));
    }
    Ok(())
}

/// Row indices of `samples` in ascending inverse lexicographical order.
pub fn invlex_order(samples: &Mat) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..samples.rows()).collect();
    idx.sort_by(|&a, &b| invlex_cmp_unchecked(samples.row(a), samples.row(b)));
    idx
}

/// The constructed order-embedding weights together with every
/// intermediate quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderEmbedding {
    /// Per-attribute scale `1 / max_i |x_ij|`.
    pub scale1: Vec<f64>,
    /// Smallest strictly positive gap between consecutive scaled samples,
    /// per attribute. `None` when the attribute never changes.
    pub diffs_min: Vec<Option<f64>>,
    /// `log10(2 d)`.
    pub delta: f64,
    /// Decimal exponent added at each attribute.
    pub exponents: Vec<f64>,
    /// `scale1[j] * 10^(exponents[0] + ... + exponents[j])`.
    pub weights: Vec<f64>,
}

impl OrderEmbedding {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn project(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x)
    }
}

/// Builds the order embedding for samples (rows) already sorted in strictly
/// ascending inverse lexicographical order.
///
/// Requires at least two samples of dimension two or more, no zero sample,
/// and no duplicates. Fails with [`Error::Overflow`] naming the attribute
/// whose cumulative exponent leaves the `f64` range.
pub fn build_embedding(samples: &Mat) -> Result<OrderEmbedding> {
    let (n, d) = samples.shape();
    if n < 2 {
        return Err(Error::Precondition(format!(
            "need at least 2 samples, got {n}"
        )));
    }
    if d < 2 {
        return Err(Error::Precondition(format!(
            "embedding needs dimension >= 2, got {d}"
        )));
    }
    for i in 0..n - 1 {
        match invlex_cmp_unchecked(samples.row(i), samples.row(i + 1)) {
            Ordering::Less => {}
            Ordering::Equal => {
                return Err(Error::Precondition(format!(
                    "samples {i} and {} are duplicates",
                    i + 1
                )))
            }
            Ordering::Greater => {
                return Err(Error::Precondition(format!(
                    "samples {i} and {} are not in ascending inverse lexicographical order",
                    i + 1
                )))
            }
        }
    }
    embed_sorted(samples)
}

/// Core construction; assumes sorted distinct rows, any `n >= 1`, `d >= 1`.
fn embed_sorted(samples: &Mat) -> Result<OrderEmbedding> {
    let (n, d) = samples.shape();
    if let Some(i) = (0..n).find(|&i| samples.row(i).iter().all(|&v| v == 0.0)) {
        return Err(Error::Precondition(format!(
            "sample {i} is the zero vector"
        )));
    }

    let delta = (d as f64).log10() + 2f64.log10();
    let mut scale1 = Vec::with_capacity(d);
    let mut diffs_min = Vec::with_capacity(d);
    let mut exponents = Vec::with_capacity(d);
    let mut weights = Vec::with_capacity(d);
    let mut cumulative = 0.0;

    for j in 0..d {
        let max_abs = (0..n).fold(0.0f64, |m, i| m.max(samples.get(i, j).abs()));
        // An all-zero attribute contributes nothing to any projection.
        let s = if max_abs > 0.0 { 1.0 / max_abs } else { 1.0 };
        if !s.is_finite() {
            return Err(Error::Overflow {
                context: "attribute scale",
                index: j,
            });
        }
        let min_gap = (0..n.saturating_sub(1))
            .map(|i| (s * samples.get(i + 1, j) - s * samples.get(i, j)).abs())
            .filter(|&y| y > 0.0)
            .fold(None, |acc: Option<f64>, y| {
                Some(acc.map_or(y, |m| m.min(y)))
            });
        let exponent = match min_gap {
            Some(y) => (-y.log10()).ceil() + delta,
            None => delta,
        };
        cumulative += exponent;
        if cumulative > f64::MAX_10_EXP as f64 {
            return Err(Error::Overflow {
                context: "embedding exponent",
                index: j,
            });
        }
        let w = s * 10f64.powf(cumulative);
        if !w.is_finite() {
            return Err(Error::Overflow {
                context: "embedding exponent",
                index: j,
            });
        }
        scale1.push(s);
        diffs_min.push(min_gap);
        exponents.push(exponent);
        weights.push(w);
    }

    // |W·X| over the samples is bounded by sum_j 10^cumulative_j.
    let bound: f64 = weights.iter().zip(&scale1).map(|(w, s)| w / s).sum();
    if !bound.is_finite() {
        return Err(Error::Overflow {
            context: "embedding projection",
            index: d - 1,
        });
    }

    Ok(OrderEmbedding {
        scale1,
        diffs_min,
        delta,
        exponents,
        weights,
    })
}

/// Order-embedding weights for an unsorted sample set.
///
/// One-dimensional data needs no embedding and gets `W = (1)`. Otherwise a
/// sorted copy is embedded, so the result does not depend on the order of
/// the input rows. A single sample is accepted and embedded on its own.
pub fn embed_or_identity(samples: &Mat) -> Result<Vec<f64>> {
    if samples.cols() == 1 {
        return Ok(vec![1.0]);
    }
    let sorted = samples.select_rows(&invlex_order(samples));
    if sorted.rows() == 1 {
        return Ok(embed_sorted(&sorted)?.weights);
    }
    Ok(build_embedding(&sorted)?.weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mat(rows: &[&[f64]]) -> Mat {
        Mat::from_rows(rows).unwrap()
    }

    #[test]
    fn compare_examples() {
        assert_eq!(
            invlex_compare(&[1.0, 2.0], &[3.0, 2.0]).unwrap(),
            Ordering::Less
        );
        assert_eq!(
            invlex_compare(&[9.0, 4.0], &[1.0, 5.0]).unwrap(),
            Ordering::Less
        );
        assert_eq!(
            invlex_compare(&[1.0, 5.0], &[9.0, 4.0]).unwrap(),
            Ordering::Greater
        );
        assert_eq!(
            invlex_compare(&[7.0, 7.0], &[7.0, 7.0]).unwrap(),
            Ordering::Equal
        );
        assert!(matches!(
            invlex_compare(&[1.0], &[1.0, 2.0]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn different_attribute_examples() {
        // zero-based: first attribute is 0
        assert_eq!(different_attribute(&[1.0, 2.0], &[3.0, 2.0]).unwrap(), 0);
        assert_eq!(different_attribute(&[9.0, 4.0], &[1.0, 5.0]).unwrap(), 1);
        assert_eq!(
            different_attribute(&[0.0, 0.0, 7.0], &[0.0, 1.0, 7.0]).unwrap(),
            1
        );
        assert!(matches!(
            different_attribute(&[1.0, 1.0], &[1.0, 1.0]),
            Err(Error::NoDifference)
        ));
    }

    #[test]
    fn three_sample_example_is_strictly_increasing() {
        let x = mat(&[&[0.1, 0.2], &[0.3, 0.2], &[0.2, 0.5]]);
        let e = build_embedding(&x).unwrap();
        let p: Vec<f64> = x.row_iter().map(|r| e.project(r)).collect();
        assert!(p.windows(2).all(|w| w[1] - w[0] > 0.0), "{p:?}");
    }

    #[test]
    fn two_sample_hand_trace() {
        // scale1 = (1, 1); attribute 0 gaps {2}, attribute 1 never changes.
        // delta = log10 4, n_0 = ceil(-log10 2) + delta = delta, n_1 = delta.
        let x = mat(&[&[-1.0, 0.0], &[1.0, 0.0]]);
        let e = build_embedding(&x).unwrap();
        let delta = 4f64.log10();
        assert_eq!(e.scale1, vec![1.0, 1.0]);
        assert_eq!(e.diffs_min, vec![Some(2.0), None]);
        assert_eq!(e.delta, delta);
        assert_eq!(e.exponents, vec![delta, delta]);
        let w0 = 10f64.powf(delta);
        assert!((e.weights[0] - 4.0).abs() < 1e-14);
        assert_eq!(e.weights[0], w0);
        assert_eq!(e.project(x.row(0)), -w0);
        assert_eq!(e.project(x.row(1)), w0);
    }

    #[test]
    fn rejects_bad_input() {
        let unsorted = mat(&[&[0.0, 2.0], &[0.0, 1.0]]);
        assert!(matches!(
            build_embedding(&unsorted),
            Err(Error::Precondition(_))
        ));
        let dup = mat(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert!(matches!(build_embedding(&dup), Err(Error::Precondition(_))));
        let zero = mat(&[&[0.0, 0.0], &[1.0, 1.0]]);
        assert!(matches!(
            build_embedding(&zero),
            Err(Error::Precondition(_))
        ));
        let one_dim = mat(&[&[1.0], &[2.0]]);
        assert!(matches!(
            build_embedding(&one_dim),
            Err(Error::Precondition(_))
        ));
        let single = mat(&[&[1.0, 2.0]]);
        assert!(matches!(
            build_embedding(&single),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn overflow_names_attribute() {
        let x = mat(&[&[1e-40; 8], &[2e-40; 8], &[1.0; 8]]);
        match build_embedding(&x) {
            Err(Error::Overflow { index, .. }) => assert_eq!(index, 7),
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn identity_for_one_dimension() {
        let x = mat(&[&[3.0], &[-2.0], &[0.5]]);
        assert_eq!(embed_or_identity(&x).unwrap(), vec![1.0]);
    }

    #[test]
    fn delegation_matches_build_on_sorted_input() {
        let x = mat(&[&[0.1, 0.2], &[0.3, 0.2], &[0.2, 0.5]]);
        assert_eq!(
            embed_or_identity(&x).unwrap(),
            build_embedding(&x).unwrap().weights
        );
    }

    #[test]
    fn single_sample_embeds() {
        let x = mat(&[&[0.5, -2.0, 1.0]]);
        let w = embed_or_identity(&x).unwrap();
        assert!(w.iter().all(|v| v.is_finite() && *v > 0.0));
    }

    fn distinct_rows(d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        prop::collection::vec(prop::collection::vec(-10.0f64..10.0, d), 2..32).prop_map(|mut v| {
            v.sort_by(|a, b| invlex_cmp_unchecked(a, b));
            v.dedup();
            v
        })
    }

    proptest! {
        #[test]
        fn invlex_is_antisymmetric(a in prop::collection::vec(-3i32..3, 3), b in prop::collection::vec(-3i32..3, 3)) {
            let a: Vec<f64> = a.into_iter().map(f64::from).collect();
            let b: Vec<f64> = b.into_iter().map(f64::from).collect();
            let ab = invlex_compare(&a, &b).unwrap();
            let ba = invlex_compare(&b, &a).unwrap();
            prop_assert_eq!(ab, ba.reverse());
            prop_assert_eq!(ab == Ordering::Equal, a == b);
        }

        #[test]
        fn invlex_is_transitive(
            a in prop::collection::vec(-2i32..2, 3),
            b in prop::collection::vec(-2i32..2, 3),
            c in prop::collection::vec(-2i32..2, 3),
        ) {
            let [a, b, c] = [a, b, c].map(|v| v.into_iter().map(f64::from).collect::<Vec<_>>());
            if invlex_compare(&a, &b).unwrap() == Ordering::Less && invlex_compare(&b, &c).unwrap() == Ordering::Less {
                prop_assert_eq!(invlex_compare(&a, &c).unwrap(), Ordering::Less);
            }
        }

        #[test]
        fn exponent_bound_holds(rows in (2usize..6).prop_flat_map(distinct_rows)) {
            prop_assume!(rows.len() >= 2);
            let x = Mat::from_rows(&rows).unwrap();
            let e = build_embedding(&x).unwrap();
            let d = x.cols() as f64;
            for (n_j, y) in e.exponents.iter().zip(&e.diffs_min) {
                if let Some(y) = y {
                    prop_assert!(10f64.powf(*n_j) >= 2.0 * d / y * (1.0 - 1e-12));
                }
            }
            let mut cum = 0.0;
            for j in 0..e.dim() {
                cum += e.exponents[j];
                prop_assert_eq!(e.weights[j], e.scale1[j] * 10f64.powf(cum));
            }
        }

        #[test]
        fn weights_ignore_row_order(rows in (2usize..6).prop_flat_map(distinct_rows), seed in any::<u64>()) {
            prop_assume!(rows.len() >= 2);
            let x = Mat::from_rows(&rows).unwrap();
            let mut perm: Vec<usize> = (0..rows.len()).collect();
            let mut s = seed;
            for i in (1..perm.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                perm.swap(i, (s >> 33) as usize % (i + 1));
            }
            let shuffled = x.select_rows(&perm);
            prop_assert_eq!(embed_or_identity(&x).unwrap(), embed_or_identity(&shuffled).unwrap());
        }
    }
}
