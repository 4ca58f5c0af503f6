//! Minimal dense linear algebra: symmetric eigendecomposition and Cholesky.
//!
//! The eigensolver is the classic two-stage route: Householder reduction to
//! symmetric tridiagonal form followed by the QL algorithm with implicit
//! shifts (EISPACK `tred2`/`tql2` lineage). Matrices here are small dense
//! blocks (a few hundred rows), so no banded storage is attempted.

// Index loops follow the published recurrences; iterator rewrites would
// obscure the correspondence.
#![allow(clippy::needless_range_loop)]

use crate::error::{Error, Result};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    /// Zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }

    /// Borrow row `i` as a slice.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Copy of column `j`.
    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.at(i, j)).collect()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Matrix-vector product.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![0.0; self.rows];
        for i in 0..self.rows {
            let row = self.row(i);
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(x) {
                acc += a * b;
            }
            y[i] = acc;
        }
        y
    }

    /// Transposed matrix-vector product `Aᵗ x`.
    pub fn tr_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut y = vec![0.0; self.cols];
        for i in 0..self.rows {
            let row = self.row(i);
            let xi = x[i];
            for (yj, a) in y.iter_mut().zip(row) {
                *yj += a * xi;
            }
        }
        y
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a == 0.0 {
                    continue;
                }
                let row_k = other.row(k);
                let out_row =
                    &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, b) in out_row.iter_mut().zip(row_k) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Transposed copy.
    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *out.at_mut(j, i) = self.at(i, j);
            }
        }
        out
    }
}

/// Householder reduction of a symmetric matrix to tridiagonal form.
///
/// On return `a` holds the accumulated orthogonal transform `Q` (so that
/// `QᵗAQ = tridiag(d, e)`), `d` the diagonal and `e` the subdiagonal with
/// `e[0] = 0`.
fn tred2(a: &mut Mat, d: &mut [f64], e: &mut [f64]) {
    let n = a.rows();
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let mut scale = 0.0;
            for k in 0..=l {
                scale += a.at(i, k).abs();
            }
            if scale == 0.0 {
                e[i] = a.at(i, l);
            } else {
                for k in 0..=l {
                    *a.at_mut(i, k) /= scale;
                    h += a.at(i, k) * a.at(i, k);
                }
                let mut f = a.at(i, l);
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                *a.at_mut(i, l) = f - g;
                f = 0.0;
                for j in 0..=l {
                    *a.at_mut(j, i) = a.at(i, j) / h;
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a.at(j, k) * a.at(i, k);
                    }
                    for k in (j + 1)..=l {
                        g += a.at(k, j) * a.at(i, k);
                    }
                    e[j] = g / h;
                    f += e[j] * a.at(i, j);
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = a.at(i, j);
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        *a.at_mut(j, k) -= f * e[k] + g * a.at(i, k);
                    }
                }
            }
        } else {
            e[i] = a.at(i, l);
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for i in 0..n {
        if d[i] != 0.0 {
            for j in 0..i {
                let mut g = 0.0;
                for k in 0..i {
                    g += a.at(i, k) * a.at(k, j);
                }
                for k in 0..i {
                    *a.at_mut(k, j) -= g * a.at(k, i);
                }
            }
        }
        d[i] = a.at(i, i);
        *a.at_mut(i, i) = 1.0;
        for j in 0..i {
            *a.at_mut(j, i) = 0.0;
            *a.at_mut(i, j) = 0.0;
        }
    }
}

/// QL iteration with implicit shifts on a symmetric tridiagonal matrix.
///
/// `d` holds the diagonal, `e` the subdiagonal in `e[1..]` (`e[0]` ignored).
/// Eigenvalues land in `d` (unsorted); the transforms are accumulated into
/// the columns of `z`, which should start as the orthogonal factor from
/// `tred2` or as the identity.
pub fn tql2(d: &mut [f64], e: &mut [f64], z: &mut Mat) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::numeric(format!(
                    "QL iteration failed to converge for eigenvalue {l}"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            let denom = g + if g >= 0.0 { r.abs() } else { -r.abs() };
            g = d[m] - d[l] + e[l] / denom;
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..z.rows() {
                    f = z.at(k, i + 1);
                    *z.at_mut(k, i + 1) = s * z.at(k, i) + c * f;
                    *z.at_mut(k, i) = c * z.at(k, i) - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Full eigendecomposition of a dense symmetric matrix.
///
/// Returns eigenvalues in ascending order with the matching orthonormal
/// eigenvectors as columns. Only the lower triangle of `a` is read.
pub fn sym_eigen(a: &Mat) -> Result<(Vec<f64>, Mat)> {
    let n = a.rows();
    if n != a.cols() {
        return Err(Error::invalid("sym_eigen requires a square matrix"));
    }
    if n == 0 {
        return Ok((Vec::new(), Mat::zeros(0, 0)));
    }
    let mut work = a.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut work, &mut d, &mut e);
    tql2(&mut d, &mut e, &mut work)?;
    // Stable ascending sort keeps the original order on ties.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vectors = Mat::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            *vectors.at_mut(r, new_col) = work.at(r, old_col);
        }
    }
    Ok((values, vectors))
}

/// Eigendecomposition of a symmetric tridiagonal matrix given by its
/// diagonal and subdiagonal (`sub.len() == diag.len() - 1`).
///
/// Returns ascending eigenvalues and the orthonormal eigenvector matrix.
pub fn tridiag_eigen(diag: &[f64], sub: &[f64]) -> Result<(Vec<f64>, Mat)> {
    let n = diag.len();
    if n == 0 {
        return Ok((Vec::new(), Mat::zeros(0, 0)));
    }
    if sub.len() + 1 != n {
        return Err(Error::invalid("tridiag_eigen: subdiagonal length mismatch"));
    }
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[1..n].copy_from_slice(sub);
    let mut z = Mat::identity(n);
    tql2(&mut d, &mut e, &mut z)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vectors = Mat::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            *vectors.at_mut(r, new_col) = z.at(r, old_col);
        }
    }
    Ok((values, vectors))
}

/// Cholesky factorization of a symmetric positive definite matrix.
///
/// Returns the lower factor; fails with a numeric error when a pivot is not
/// strictly positive, which doubles as a definiteness test.
pub fn cholesky(a: &Mat) -> Result<Mat> {
    let n = a.rows();
    if n != a.cols() {
        return Err(Error::invalid("cholesky requires a square matrix"));
    }
    let mut l = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a.at(i, j);
            for k in 0..j {
                sum -= l.at(i, k) * l.at(j, k);
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(Error::numeric(format!(
                        "matrix is not positive definite (pivot {i} = {sum:e})"
                    )));
                }
                *l.at_mut(i, i) = sum.sqrt();
            } else {
                *l.at_mut(i, j) = sum / l.at(j, j);
            }
        }
    }
    Ok(l)
}
