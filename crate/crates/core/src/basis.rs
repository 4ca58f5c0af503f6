//! Fully assembled per-dimension basis objects and their tensor products.

use std::f64::consts::PI;

use crate::cheb::ChebTransform;
use crate::error::{Error, Result};
use crate::fourier_like::{eigendecompose, FourierLikeBasis1d};
use crate::mcf::{mapped_quadrature, stiffness_matrix, MappedRule, StiffnessMatrix};
use crate::tensor::Tensor;

/// Everything one dimension of the discretization needs: the mapped
/// quadrature on `degree + 1` nodes, the decay factors at those nodes, the
/// stiffness matrix, its eigenbasis and a planned cosine transform.
/// Immutable once constructed.
#[derive(Debug, Clone)]
pub struct McfBasis1d {
    degree: usize,
    nu: f64,
    rule: MappedRule,
    gfactors: Vec<f64>,
    stiffness: StiffnessMatrix,
    fourier: Option<FourierLikeBasis1d>,
    transform: ChebTransform,
}

impl McfBasis1d {
    pub fn new(degree: usize, nu: f64) -> Result<Self> {
        let mut basis = Self::interpolation_only(degree, nu)?;
        basis.fourier = Some(eigendecompose(&basis.stiffness)?);
        Ok(basis)
    }

    /// Skips the eigendecomposition; supports interpolation and synthesis
    /// only. Useful at large `degree` where the dense solve would dominate.
    pub fn interpolation_only(degree: usize, nu: f64) -> Result<Self> {
        let num_points = degree + 1;
        let rule = mapped_quadrature(num_points, nu)?;
        let m = num_points as f64;
        let gfactors: Vec<f64> = (0..num_points)
            .map(|j| {
                let theta = (2 * j + 1) as f64 * PI / (2.0 * m);
                theta.sin() / nu.sqrt()
            })
            .collect();
        let stiffness = stiffness_matrix(degree, nu)?;
        let transform = ChebTransform::new(num_points)?;
        Ok(McfBasis1d { degree, nu, rule, gfactors, stiffness, fourier: None, transform })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Number of modes / quadrature nodes (`degree + 1`).
    pub fn len(&self) -> usize {
        self.degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn rule(&self) -> &MappedRule {
        &self.rule
    }

    /// Mapped quadrature nodes (descending).
    pub fn nodes(&self) -> &[f64] {
        self.rule.nodes()
    }

    pub fn weights(&self) -> &[f64] {
        self.rule.weights()
    }

    /// Decay factor `g_nu` evaluated at the nodes.
    pub fn gfactors(&self) -> &[f64] {
        &self.gfactors
    }

    pub fn stiffness(&self) -> &StiffnessMatrix {
        &self.stiffness
    }

    /// Panics when built with `interpolation_only`.
    pub fn fourier(&self) -> &FourierLikeBasis1d {
        self.fourier
            .as_ref()
            .expect("basis was built without its eigendecomposition")
    }

    pub fn has_fourier(&self) -> bool {
        self.fourier.is_some()
    }

    pub fn transform(&self) -> &ChebTransform {
        &self.transform
    }

    /// Stiffness eigenvalues (ascending). Panics when built with
    /// `interpolation_only`.
    pub fn eigenvalues(&self) -> &[f64] {
        self.fourier().eigenvalues()
    }
}

/// Tensor-product basis: one `McfBasis1d` per space dimension.
#[derive(Debug, Clone)]
pub struct TensorBasis {
    dims: Vec<McfBasis1d>,
}

impl TensorBasis {
    /// Same degree and scale in every dimension (the common case).
    pub fn isotropic(dim: usize, degree: usize, nu: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        let one = McfBasis1d::new(degree, nu)?;
        let dims = vec![one; dim];
        Ok(TensorBasis { dims })
    }

    pub fn from_dims(dims: Vec<McfBasis1d>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        Ok(TensorBasis { dims })
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[McfBasis1d] {
        &self.dims
    }

    pub fn axis(&self, k: usize) -> &McfBasis1d {
        &self.dims[k]
    }

    /// Grid/coefficient shape: `degree_k + 1` per axis.
    pub fn shape(&self) -> Vec<usize> {
        self.dims.iter().map(|b| b.len()).collect()
    }

    pub fn total_len(&self) -> usize {
        self.shape().iter().product()
    }

    /// Sum of per-dimension stiffness eigenvalues at a multi-index.
    pub fn eigen_sum(&self, index: &[usize]) -> Result<f64> {
        if index.len() != self.dims.len() {
            return Err(Error::invalid(format!(
                "multi-index length {} does not match dimension {}",
                index.len(),
                self.dims.len()
            )));
        }
        let mut acc = 0.0;
        for (basis, &p) in self.dims.iter().zip(index) {
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

    /// Tensor of eigenvalue sums `|lambda_p|_1` over the full index set.
    pub fn eigen_sum_tensor(&self) -> Tensor<f64> {
        let shape = self.shape();
        let mut t = Tensor::zeros(&shape);
        let mut stride: usize = t.len();
        // Accumulate axis by axis: add lambda_k[i_k] to every entry whose
        // k-th digit is i_k.
        let data = t.data_mut();
        for basis in &self.dims {
            let n = basis.len();
            stride /= n;
            let lam = basis.eigenvalues();
            let total = data.len();
            let block = n * stride;
            for start in (0..total).step_by(block) {
                for (i, &l) in lam.iter().enumerate() {
                    let base = start + i * stride;
                    for v in &mut data[base..base + stride] {
                        *v += l;
                    }
                }
            }
        }
        t
    }

    /// Tensor of product quadrature weights on the grid.
    pub fn weight_tensor(&self) -> Tensor<f64> {
        let shape = self.shape();
        let mut t = Tensor::filled(&shape, 1.0);
        let mut stride: usize = t.len();
        let data = t.data_mut();
        for basis in &self.dims {
            let n = basis.len();
            stride /= n;
            let w = basis.weights();
            let total = data.len();
            let block = n * stride;
            for start in (0..total).step_by(block) {
                for (i, &wi) in w.iter().enumerate() {
                    let base = start + i * stride;
                    for v in &mut data[base..base + stride] {
                        *v *= wi;
                    }
                }
            }
        }
        t
    }

    /// Coordinates of the grid point at a multi-index.
    pub fn point(&self, index: &[usize]) -> Vec<f64> {
        index
            .iter()
            .zip(&self.dims)
            .map(|(&i, b)| b.nodes()[i])
            .collect()
    }
}
