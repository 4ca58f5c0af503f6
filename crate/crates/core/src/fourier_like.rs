//! Fourier-like eigenbasis of the mapped Chebyshev stiffness matrix.
//!
//! Diagonalizing the stiffness matrix `S = E diag(lambda) E^t` with
//! orthonormal `E` produces combinations `T^_p = sum_j E[j][p] T~_j` that
//! are simultaneously orthonormal in `L^2(R)` and orthogonal in the
//! derivative pairing, with `(T^_p', T^_q') = lambda_p delta_pq`. Products
//! of these functions across dimensions diagonalize the fractional
//! Laplacian on the tensor approximation space.
//!
//! Conventions fixed here: eigenvalues ascend (ties keep the pre-sort
//! order, even block before odd), and each eigenvector is normalized so
//! its entry of largest magnitude (first such entry on ties) is positive.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sym_eigen, Mat};
use crate::mcf::{self, StiffnessMatrix};

/// Eigenpairs of a stiffness matrix, defining the Fourier-like basis for
/// one dimension.
#[derive(Debug, Clone)]
pub struct FourierLikeBasis1d {
    degree: usize,
    nu: f64,
    eigenvalues: Vec<f64>,
    /// Column `p` holds the coefficients of the p-th basis function in the
    /// mapped Chebyshev family.
    vectors: Mat,
}

fn finalize_pairs(
    degree: usize,
    nu: f64,
    mut pairs: Vec<(f64, Vec<f64>)>,
) -> FourierLikeBasis1d {
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let n = degree + 1;
    let mut vectors = Mat::zeros(n, n);
    let mut eigenvalues = Vec::with_capacity(n);
    for (p, (value, vec)) in pairs.into_iter().enumerate() {
        eigenvalues.push(value);
        let mut best = 0;
        for (j, v) in vec.iter().enumerate() {
            if v.abs() > vec[best].abs() {
                best = j;
            }
        }
        let flip = if vec[best] < 0.0 { -1.0 } else { 1.0 };
        for (j, v) in vec.iter().enumerate() {
            *vectors.at_mut(j, p) = flip * v;
        }
    }
    FourierLikeBasis1d { degree, nu, eigenvalues, vectors }
}

/// Eigendecomposition exploiting the parity structure of the stiffness
/// matrix: even and odd index sets decouple into two smaller banded
/// symmetric blocks, each reduced to tridiagonal form and diagonalized by
/// QL iteration.
pub fn eigendecompose(s: &StiffnessMatrix) -> Result<FourierLikeBasis1d> {
    let n = s.size();
    if n == 0 {
        return Err(Error::invalid("cannot decompose an empty stiffness matrix"));
    }
    let mut pairs: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n);
    for parity in 0..2usize {
        let idx: Vec<usize> = (parity..n).step_by(2).collect();
        if idx.is_empty() {
            continue;
        }
        let mut block = Mat::zeros(idx.len(), idx.len());
        for (bi, &i) in idx.iter().enumerate() {
            for (bj, &j) in idx.iter().enumerate() {
                *block.at_mut(bi, bj) = s.entry(i, j);
            }
        }
        let (vals, vecs) = sym_eigen(&block)?;
        for (p, &val) in vals.iter().enumerate() {
            let mut full = vec![0.0; n];
            for (bi, &i) in idx.iter().enumerate() {
                full[i] = vecs.at(bi, p);
            }
            pairs.push((val, full));
        }
    }
    Ok(finalize_pairs(s.size() - 1, s.nu(), pairs))
}

/// Reference decomposition of the full dense matrix, for cross-checking
/// the parity-split route.
pub fn eigendecompose_dense(s: &StiffnessMatrix) -> Result<FourierLikeBasis1d> {
    let n = s.size();
    if n == 0 {
        return Err(Error::invalid("cannot decompose an empty stiffness matrix"));
    }
    let (vals, vecs) = sym_eigen(&s.to_dense())?;
    let pairs = (0..n).map(|p| (vals[p], vecs.col(p))).collect();
    Ok(finalize_pairs(n - 1, s.nu(), pairs))
}

/// Serialized form of a basis (versioned).
#[derive(Serialize, Deserialize)]
struct BasisFile {
    format: String,
    version: u32,
    degree: usize,
    nu: f64,
    eigenvalues: Vec<f64>,
    /// Row-major `(degree+1) x (degree+1)` eigenvector matrix.
    vectors: Vec<f64>,
}

const BASIS_FORMAT: &str = "mcfrac-basis";
const BASIS_VERSION: u32 = 1;

impl FourierLikeBasis1d {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Number of basis functions (`degree + 1`).
    pub fn len(&self) -> usize {
        self.degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Ascending eigenvalues of the stiffness matrix.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Orthonormal eigenvector matrix; column `p` expands the p-th basis
    /// function over the mapped Chebyshev family.
    pub fn vectors(&self) -> &Mat {
        &self.vectors
    }

    /// Coefficient of mapped Chebyshev mode `j` in basis function `p`.
    pub fn coefficient(&self, j: usize, p: usize) -> f64 {
        self.vectors.at(j, p)
    }

    /// Rebuild a basis from raw parts, validating shapes and finiteness.
    /// `vectors` is row-major of order `degree + 1`.
    pub fn from_parts(
        degree: usize,
        nu: f64,
        eigenvalues: Vec<f64>,
        vectors: Vec<f64>,
    ) -> Result<Self> {
        let n = degree + 1;
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(Error::data(format!("basis scale nu = {nu} is not positive")));
        }
        if eigenvalues.len() != n {
            return Err(Error::data(format!(
                "expected {n} eigenvalues, got {}",
                eigenvalues.len()
            )));
        }
        if vectors.len() != n * n {
            return Err(Error::data(format!(
                "expected {} matrix entries, got {}",
                n * n,
                vectors.len()
            )));
        }
        if eigenvalues.iter().chain(vectors.iter()).any(|v| !v.is_finite()) {
            return Err(Error::data("basis data contains non-finite entries"));
        }
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                *m.at_mut(i, j) = vectors[i * n + j];
            }
        }
        Ok(FourierLikeBasis1d { degree, nu, eigenvalues, vectors: m })
    }

    /// Value of the p-th Fourier-like function at `x`.
    pub fn eval(&self, p: usize, x: f64) -> Result<f64> {
        if p > self.degree {
            return Err(Error::invalid(format!(
                "mode {p} out of range for degree {}",
                self.degree
            )));
        }
        let values = mcf::mcf_eval_all(self.degree, x, self.nu)?;
        Ok((0..=self.degree).map(|j| self.vectors.at(j, p) * values[j]).sum())
    }

    /// First derivative of the p-th Fourier-like function at `x`.
    pub fn deriv_eval(&self, p: usize, x: f64) -> Result<f64> {
        if p > self.degree {
            return Err(Error::invalid(format!(
                "mode {p} out of range for degree {}",
                self.degree
            )));
        }
        let derivs = mcf::mcf_deriv_eval_all(self.degree, x, self.nu)?;
        Ok((0..=self.degree).map(|j| self.vectors.at(j, p) * derivs[j]).sum())
    }

    /// Serialize to versioned JSON.
    pub fn to_json(&self) -> Result<String> {
        let n = self.degree + 1;
        let mut vectors = Vec::with_capacity(n * n);
        for i in 0..n {
            vectors.extend_from_slice(self.vectors.row(i));
        }
        let file = BasisFile {
            format: BASIS_FORMAT.to_string(),
            version: BASIS_VERSION,
            degree: self.degree,
            nu: self.nu,
            eigenvalues: self.eigenvalues.clone(),
            vectors,
        };
        serde_json::to_string(&file).map_err(|e| Error::Serialization(e.to_string()))
    }

    /// Deserialize from versioned JSON.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: BasisFile =
            serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        if file.format != BASIS_FORMAT {
            return Err(Error::data(format!("unknown basis format '{}'", file.format)));
        }
        if file.version != BASIS_VERSION {
            return Err(Error::data(format!(
                "unsupported basis version {} (expected {BASIS_VERSION})",
                file.version
            )));
        }
        Self::from_parts(file.degree, file.nu, file.eigenvalues, file.vectors)
    }
}

/// Sum of per-dimension eigenvalues selected by a multi-index; this is the
/// quantity the fractional Laplacian raises to the power `s` on the tensor
/// basis.
pub fn tensor_eigen_sum(bases: &[&FourierLikeBasis1d], index: &[usize]) -> Result<f64> {
    if bases.len() != index.len() {
        return Err(Error::invalid(format!(
            "multi-index length {} does not match dimension {}",
            index.len(),
            bases.len()
        )));
    }
    let mut acc = 0.0;
    for (basis, &p) in bases.iter().zip(index) {
        if p > basis.degree() {
            return Err(Error::invalid(format!(
                "index {p} out of range for degree {}",
                basis.degree()
            )));
        }
        acc += basis.eigenvalues()[p];
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcf::{mapped_quadrature, mcf_deriv_eval, mcf_eval, stiffness_matrix};

    fn basis(degree: usize, nu: f64) -> FourierLikeBasis1d {
        eigendecompose(&stiffness_matrix(degree, nu).unwrap()).unwrap()
    }

    #[test]
    fn degree_zero_single_pair() {
        let b = basis(0, 1.0);
        assert_eq!(b.len(), 1);
        assert!((b.eigenvalues()[0] - 0.125).abs() < 1e-15);
        assert!((b.coefficient(0, 0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eigenvalues_ascending_and_positive() {
        let b = basis(32, 2.5);
        assert!(b.eigenvalues()[0] > 0.0);
        for w in b.eigenvalues().windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn trace_is_preserved() {
        let degree = 64;
        let s = stiffness_matrix(degree, 1.0).unwrap();
        let b = eigendecompose(&s).unwrap();
        let trace: f64 = (0..=degree).map(|n| s.entry(n, n)).sum();
        let sum: f64 = b.eigenvalues().iter().sum();
        assert!(
            (trace - sum).abs() < 1e-10,
            "trace {trace} vs eigenvalue sum {sum}"
        );
    }

    #[test]
    fn eigen_residuals_small() {
        let degree = 128;
        let s = stiffness_matrix(degree, 1.0).unwrap();
        let b = eigendecompose(&s).unwrap();
        for p in 0..=degree {
            let v = b.vectors().col(p);
            let sv = s.matvec(&v);
            let lam = b.eigenvalues()[p];
            for i in 0..=degree {
                assert!(
                    (sv[i] - lam * v[i]).abs() < 1e-10,
                    "residual at pair {p}, row {i}"
                );
            }
        }
    }

    #[test]
    fn vectors_orthonormal() {
        let b = basis(48, 1.0);
        let e = b.vectors();
        let gram = e.transpose().matmul(e);
        for i in 0..e.rows() {
            for j in 0..e.cols() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((gram.at(i, j) - expect).abs() < 1e-11, "gram ({i}, {j})");
            }
        }
    }

    #[test]
    fn parity_is_pure() {
        let b = basis(17, 1.0);
        for p in 0..b.len() {
            let col = b.vectors().col(p);
            let even_mass: f64 = col.iter().step_by(2).map(|v| v * v).sum();
            let odd_mass: f64 = col.iter().skip(1).step_by(2).map(|v| v * v).sum();
            // Each eigenvector lives entirely in one parity class.
            assert!(even_mass < 1e-30 || odd_mass < 1e-30, "mode {p} mixes parity");
        }
    }

    #[test]
    fn sign_convention_applied() {
        let b = basis(24, 2.5);
        for p in 0..b.len() {
            let col = b.vectors().col(p);
            let mut best = 0;
            for (j, v) in col.iter().enumerate() {
                if v.abs() > col[best].abs() {
                    best = j;
                }
            }
            assert!(col[best] > 0.0, "mode {p} violates the sign convention");
        }
    }

    #[test]
    fn split_matches_dense() {
        let s = stiffness_matrix(33, 1.3).unwrap();
        let split = eigendecompose(&s).unwrap();
        let dense = eigendecompose_dense(&s).unwrap();
        for (a, b) in split.eigenvalues().iter().zip(dense.eigenvalues()) {
            assert!((a - b).abs() < 1e-11 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn quadrature_biorthogonality_small() {
        // (T^_p, T^_q) = delta and (T^_p', T^_q') = lambda_p delta by
        // oversampled mapped quadrature.
        let degree = 12;
        let nu = 2.5;
        let b = basis(degree, nu);
        let rule = mapped_quadrature(2 * (degree + 1), nu).unwrap();
        let npts = rule.len();
        let mut vals = Mat::zeros(npts, degree + 1);
        let mut ders = Mat::zeros(npts, degree + 1);
        for (j, &x) in rule.nodes().iter().enumerate() {
            for n in 0..=degree {
                *vals.at_mut(j, n) = mcf_eval(n, x, nu).unwrap();
                *ders.at_mut(j, n) = mcf_deriv_eval(n, x, nu).unwrap();
            }
        }
        let wv = vals.matmul(b.vectors());
        let wd = ders.matmul(b.vectors());
        for p in 0..=degree {
            for q in 0..=degree {
                let mut l2 = 0.0;
                let mut h1 = 0.0;
                for j in 0..npts {
                    l2 += rule.weights()[j] * wv.at(j, p) * wv.at(j, q);
                    h1 += rule.weights()[j] * wd.at(j, p) * wd.at(j, q);
                }
                let expect_l2 = if p == q { 1.0 } else { 0.0 };
                let expect_h1 = if p == q { b.eigenvalues()[p] } else { 0.0 };
                assert!((l2 - expect_l2).abs() < 1e-11, "L2 pairing ({p}, {q})");
                assert!(
                    (h1 - expect_h1).abs() < 1e-10 * (1.0 + expect_h1.abs()),
                    "H1 pairing ({p}, {q}): {h1} vs {expect_h1}"
                );
            }
        }
    }

    #[test]
    fn eval_consistency() {
        let b = basis(10, 1.0);
        // Direct summation against eval at a few points.
        for &x in &[-2.0, 0.0, 0.31, 5.5] {
            for p in [0usize, 3, 10] {
                let direct: f64 = (0..=10)
                    .map(|j| b.coefficient(j, p) * mcf_eval(j, x, 1.0).unwrap())
                    .sum();
                assert!((b.eval(p, x).unwrap() - direct).abs() < 1e-13);
            }
        }
        assert!(b.eval(11, 0.0).is_err());
    }

    #[test]
    fn tensor_sum() {
        let b = basis(6, 1.0);
        let refs = [&b, &b];
        let s = tensor_eigen_sum(&refs, &[2, 5]).unwrap();
        assert!((s - (b.eigenvalues()[2] + b.eigenvalues()[5])).abs() < 1e-15);
        assert!(tensor_eigen_sum(&refs, &[2]).is_err());
        assert!(tensor_eigen_sum(&refs, &[2, 7]).is_err());
    }

    #[test]
    fn json_roundtrip_exact() {
        let b = basis(9, 2.5);
        let text = b.to_json().unwrap();
        let back = FourierLikeBasis1d::from_json(&text).unwrap();
        assert_eq!(b.degree(), back.degree());
        assert_eq!(b.nu(), back.nu());
        assert_eq!(b.eigenvalues(), back.eigenvalues());
        assert_eq!(b.vectors().data(), back.vectors().data());
    }

    #[test]
    fn from_json_rejects_bad_input() {
        assert!(FourierLikeBasis1d::from_json("{}").is_err());
        let b = basis(3, 1.0);
        let text = b.to_json().unwrap().replace("\"version\":1", "\"version\":9");
        assert!(FourierLikeBasis1d::from_json(&text).is_err());
    }
}
