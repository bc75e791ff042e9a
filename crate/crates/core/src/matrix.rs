//! Dense row-major matrices, the two pseudoinverse routes and diagonal
//! dominance diagnostics.

use std::fmt;

use crate::error::{Error, Result};

/// Dense real matrix in row-major order. Entries are finite unless the
/// matrix was produced by arithmetic that overflowed, which callers check.
#[derive(Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        write!(f, "]")
    }
}

impl Mat {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Mat> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!("empty matrix {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Precondition(format!(
                "non-finite entry at ({}, {})",
                i / cols,
                i % cols
            )));
        }
        Ok(Mat { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Mat> {
        let cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Shape(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Mat::new(rows.len(), cols, data)
    }

    /// Column vector from a slice.
    pub fn column(values: &[f64]) -> Result<Mat> {
        Mat::new(values.len(), 1, values.to_vec())
    }

    pub fn zeros(rows: usize, cols: usize) -> Mat {
        assert!(rows > 0 && cols > 0, "empty matrix");
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Mat {
        assert!(rows > 0 && cols > 0, "empty matrix");
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Mat { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols)
    }

    pub fn col_vec(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// New matrix made of the given rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Mat {
        assert!(!idx.is_empty(), "empty row selection");
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Mat {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn matmul(&self, rhs: &Mat) -> Result<Mat> {
        if self.cols != rhs.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &Mat) -> Result<Mat> {
        if self.shape() != rhs.shape() {
            return Err(Error::Shape(format!(
                "cannot subtract {:?} from {:?}",
                rhs.shape(),
                self.shape()
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Mat {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, rhs: &Mat) -> Result<f64> {
        Ok(self.sub(rhs)?.max_abs())
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Default relative cutoff for [`pinv_svd`]: `max(rows, cols) * eps`.
pub fn default_pinv_rtol(a: &Mat) -> f64 {
    a.rows.max(a.cols) as f64 * f64::EPSILON
}

const MAX_SWEEPS: usize = 80;

/// Thin SVD of a tall (rows >= cols) matrix, by one-sided Jacobi rotations.
/// `u` and `v` are stored column by column.
struct ThinSvd {
    u: Vec<Vec<f64>>,
    sigma: Vec<f64>,
    v: Vec<Vec<f64>>,
}

fn jacobi_svd(a: &Mat) -> Result<ThinSvd> {
    let (m, n) = a.shape();
    debug_assert!(m >= n);
    // Work on a copy scaled to max |a_ij| = 1 so squared norms stay normal.
    let scale = a.max_abs();
    let mut u: Vec<Vec<f64>> = (0..n)
        .map(|c| {
            let mut col = a.col_vec(c);
            if scale > 0.0 {
                col.iter_mut().for_each(|x| *x /= scale);
            }
            col
        })
        .collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|c| {
            let mut e = vec![0.0; n];
            e[c] = 1.0;
            e
        })
        .collect();
    let tol = f64::EPSILON * (m as f64).sqrt();
    // Columns below this squared norm are at the accuracy floor and are
    // left out of rotations.
    let max_sq = u.iter().map(|c| dot(c, c)).fold(0.0, f64::max);
    let negligible = f64::EPSILON * f64::EPSILON * max_sq;

    let mut converged = n == 1;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (left, right) = u.split_at_mut(q);
                let (cp, cq) = (&mut left[p], &mut right[0]);
                let alpha = dot(cp, cp);
                let beta = dot(cq, cq);
                let gamma = dot(cp, cq);
                if gamma == 0.0
                    || alpha.min(beta) <= negligible
                    || gamma.abs() <= tol * alpha.sqrt() * beta.sqrt()
                {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(cp, cq, c, s);
                let (left, right) = v.split_at_mut(q);
                rotate(&mut left[p], &mut right[0], c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NumericalFailure(format!(
            "Jacobi SVD of {m}x{n} matrix did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let mut sigma = Vec::with_capacity(n);
    for col in u.iter_mut() {
        let s = dot(col, col).sqrt();
        if s > 0.0 {
            col.iter_mut().for_each(|x| *x /= s);
        }
        sigma.push(s * scale);
    }
    if sigma.iter().any(|s| !s.is_finite()) {
        return Err(Error::NumericalFailure("non-finite singular value".into()));
    }
    Ok(ThinSvd { u, sigma, v })
}

#[inline]
fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let (xa, yb) = (*a, *b);
        *a = c * xa - s * yb;
        *b = s * xa + c * yb;
    }
}

/// Singular values of `a`, in no particular order.
pub fn singular_values(a: &Mat) -> Result<Vec<f64>> {
    let svd = if a.rows >= a.cols {
        jacobi_svd(a)?
    } else {
        jacobi_svd(&a.transpose())?
    };
    Ok(svd.sigma)
}

/// Spectral condition number, `inf` for singular input.
pub fn condition_number(a: &Mat) -> Result<f64> {
    let s = singular_values(a)?;
    let max = s.iter().cloned().fold(0.0, f64::max);
    let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(if min == 0.0 { f64::INFINITY } else { max / min })
}

/// Moore-Penrose pseudoinverse through the singular value decomposition.
///
/// Singular values at or below `rtol * sigma_max` are treated as zero; `None`
/// selects [`default_pinv_rtol`]. Works for any rank.
pub fn pinv_svd(a: &Mat, rtol: Option<f64>) -> Result<Mat> {
    pinv_svd_rank(a, rtol).map(|(p, _)| p)
}

/// Like [`pinv_svd`], also returning the numerical rank used.
pub fn pinv_svd_rank(a: &Mat, rtol: Option<f64>) -> Result<(Mat, usize)> {
    let rtol = rtol.unwrap_or_else(|| default_pinv_rtol(a));
    if rtol.is_nan() || rtol < 0.0 {
        return Err(Error::Precondition(format!(
            "tolerance must be >= 0, got {rtol}"
        )));
    }
    if !a.is_finite() {
        return Err(Error::Precondition(
            "pseudoinverse of non-finite matrix".into(),
        ));
    }
    let transposed = a.rows < a.cols;
    let work = if transposed { a.transpose() } else { a.clone() };
    let svd = jacobi_svd(&work)?;
    let (m, n) = work.shape();

    let sigma_max = svd.sigma.iter().cloned().fold(0.0, f64::max);
    let cutoff = rtol * sigma_max;
    // pinv(work) = V * diag(1/s) * U^T, an n x m matrix.
    let mut p = Mat::zeros(n, m);
    let mut rank = 0;
    for (k, &s) in svd.sigma.iter().enumerate() {
        if s <= cutoff || s == 0.0 {
            continue;
        }
        rank += 1;
        let inv = 1.0 / s;
        let (uk, vk) = (&svd.u[k], &svd.v[k]);
        for (i, &vi) in vk.iter().enumerate() {
            let scale = vi * inv;
            if scale == 0.0 {
                continue;
            }
            for (dst, &uj) in p.row_mut(i).iter_mut().zip(uk) {
                *dst += scale * uj;
            }
        }
    }
    let p = if transposed { p.transpose() } else { p };
    Ok((p, rank))
}

/// Lower Cholesky factor of a symmetric positive-definite matrix, row-major.
/// A pivot that is not clearly positive relative to its diagonal entry is
/// reported as rank deficiency.
pub(crate) fn cholesky(g: &Mat) -> Result<Mat> {
    let k = g.rows;
    debug_assert_eq!(k, g.cols);
    let mut l = Mat::zeros(k, k);
    let floor = k as f64 * f64::EPSILON;
    for j in 0..k {
        let lj = &l.data[j * k..j * k + j];
        let d = g.get(j, j) - dot(lj, lj);
        if !(d > floor * g.get(j, j)) || !d.is_finite() {
            return Err(Error::RankDeficient { pivot: j });
        }
        let djj = d.sqrt();
        l.set(j, j, djj);
        for i in j + 1..k {
            let s = g.get(i, j) - dot(&l.data[i * k..i * k + j], &l.data[j * k..j * k + j]);
            l.set(i, j, s / djj);
        }
    }
    Ok(l)
}

/// Solves `L L^T X = B` in place for every column of `b`.
pub(crate) fn cholesky_solve(l: &Mat, b: &mut Mat) {
    let k = l.rows;
    debug_assert_eq!(b.rows, k);
    let nrhs = b.cols;
    let mut col = vec![0.0; k];
    for c in 0..nrhs {
        for i in 0..k {
            col[i] = b.get(i, c);
        }
        for i in 0..k {
            let s = col[i] - dot(&l.data[i * k..i * k + i], &col[..i]);
            col[i] = s / l.get(i, i);
        }
        for i in (0..k).rev() {
            let mut s = col[i];
            for r in i + 1..k {
                s -= l.get(r, i) * col[r];
            }
            col[i] = s / l.get(i, i);
        }
        for i in 0..k {
            b.set(i, c, col[i]);
        }
    }
}

/// `A^T A`, exploiting symmetry.
pub fn gram(a: &Mat) -> Mat {
    let k = a.cols;
    let mut g = Mat::zeros(k, k);
    for row in a.row_iter() {
        for i in 0..k {
            let ri = row[i];
            if ri == 0.0 {
                continue;
            }
            for j in i..k {
                g.data[i * k + j] += ri * row[j];
            }
        }
    }
    for i in 0..k {
        for j in 0..i {
            g.data[i * k + j] = g.data[j * k + i];
        }
    }
    g
}

/// Pseudoinverse by orthogonal projection, `(A^T A)^{-1} A^T`.
///
/// Only valid for full column rank. The Gram matrix is factored by Cholesky;
/// a failing pivot is returned as [`Error::RankDeficient`] and never
/// regularized away.
pub fn pinv_normal(a: &Mat) -> Result<Mat> {
    if !a.is_finite() {
        return Err(Error::Precondition(
            "pseudoinverse of non-finite matrix".into(),
        ));
    }
    let l = cholesky(&gram(a))?;
    let mut x = a.transpose();
    cholesky_solve(&l, &mut x);
    Ok(x)
}

/// Row-wise and global strict diagonal dominance of a square matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominanceReport {
    /// `|a_ii| > sum_{j != i} |a_ij|` for every row.
    pub row_wise: bool,
    /// Every `|a_ii|` exceeds the sum of magnitudes of all off-diagonal
    /// entries of the whole matrix.
    pub global: bool,
    /// `min_i (|a_ii| - sum_{j != i} |a_ij|)`.
    pub row_margin: f64,
    /// `min_i |a_ii| - sum_{k != j} |a_kj|`; never larger than `row_margin`.
    pub global_margin: f64,
}

impl DominanceReport {
    /// The worse of the two margins.
    pub fn worst_margin(&self) -> f64 {
        self.global_margin.min(self.row_margin)
    }
}

pub fn strict_dominance_report(a: &Mat) -> Result<DominanceReport> {
    if a.rows != a.cols {
        return Err(Error::Shape(format!(
            "dominance needs a square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    let n = a.rows;
    let mut row_margin = f64::INFINITY;
    let mut off_total = 0.0;
    let mut min_diag = f64::INFINITY;
    for i in 0..n {
        let diag = a.get(i, i).abs();
        let off: f64 = a
            .row(i)
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, v)| v.abs())
            .sum();
        row_margin = row_margin.min(diag - off);
        off_total += off;
        min_diag = min_diag.min(diag);
    }
    let global_margin = min_diag - off_total;
    Ok(DominanceReport {
        row_wise: row_margin > 0.0,
        global: global_margin > 0.0,
        row_margin,
        global_margin,
    })
}
