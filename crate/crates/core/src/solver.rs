//! Diagonal spectral solves and operator applications in the Fourier-like
//! basis, where the fractional Laplacian acts mode by mode through the
//! tensor eigenvalue sum.

use crate::basis::TensorBasis;
use crate::error::{Error, Result};
use crate::quad::gauss_jacobi;
use crate::special::c_s;

use crate::transforms::{interpolate_fn, to_fourier_like, BasisKind, Expansion};

/// One term rho * (-Delta)^s of a multi-term operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracTerm {
    pub coefficient: f64,
    pub order: f64,
}

/// Operator gamma * I + sum_j rho_j (-Delta)^{s_j}.
#[derive(Debug, Clone, PartialEq)]
pub struct FracOperatorSpec {
    terms: Vec<FracTerm>,
    gamma: f64,
}

impl FracOperatorSpec {
    pub fn new(terms: Vec<FracTerm>, gamma: f64) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::invalid("operator needs at least one term".to_string()));
        }
        for t in &terms {
            if !t.coefficient.is_finite() {
                return Err(Error::invalid("term coefficient must be finite".to_string()));
            }
            if !(0.0..=1.0).contains(&t.order) {
                return Err(Error::invalid(format!(
                    "term order {} outside [0, 1]",
                    t.order
                )));
            }
        }
        if !gamma.is_finite() {
            return Err(Error::invalid("shift gamma must be finite".to_string()));
        }
        Ok(Self { terms, gamma })
    }

    /// Single-term operator gamma * I + (-Delta)^s.
    pub fn single(s: f64, gamma: f64) -> Result<Self> {
        Self::new(vec![FracTerm { coefficient: 1.0, order: s }], gamma)
    }

    pub fn terms(&self) -> &[FracTerm] {
        &self.terms
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// gamma + sum_j rho_j * lambda^{s_j}.
    pub fn multiplier(&self, lambda: f64) -> f64 {
        let mut m = self.gamma;
        for t in &self.terms {
            m += t.coefficient * lambda.powf(t.order);
        }
        m
    }
}

/// Node count for the Dunford-Taylor validation quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DtQuadratureSpec {
    pub num_nodes: usize,
}

impl Default for DtQuadratureSpec {
    /// Picked by a convergence study: 256 nodes hold relative error below
    /// 1e-10 across the eigenvalue range of an N = 64 basis.
    fn default() -> Self {
        Self { num_nodes: 256 }
    }
}

fn check_fourier_like(e: &Expansion, basis: &TensorBasis, what: &str) -> Result<()> {
    if e.kind != BasisKind::FourierLike {
        return Err(Error::invalid(format!(
            "{what} must be given in Fourier-like coefficients"
        )));
    }
    if e.coeffs.shape() != basis.shape().as_slice() {
        return Err(Error::invalid(format!(
            "{what} shape {:?} does not match basis shape {:?}",
            e.coeffs.shape(),
            basis.shape()
        )));
    }
    if let Some(bad) = e.coeffs.data().iter().find(|v| !v.is_finite()) {
        return Err(Error::data(format!("{what} contains non-finite coefficient {bad}")));
    }
    Ok(())
}

fn multi_index_of(shape: &[usize], linear: usize) -> Vec<usize> {
    let mut idx = vec![0usize; shape.len()];
    let mut rem = linear;
    for axis in (0..shape.len()).rev() {
        idx[axis] = rem % shape[axis];
        rem /= shape[axis];
    }
    idx
}

/// Scale every mode of `f_hat` by `factor(lambda_sum)`, failing through
/// `on_bad` when the factor is unusable.
fn scale_modes<Fac>(f_hat: &Expansion, basis: &TensorBasis, factor: Fac) -> Result<Expansion>
where
    Fac: Fn(f64) -> Result<f64>,
{
    let lambda = basis.eigen_sum_tensor();
    let mut out = f_hat.coeffs.clone();
    for (lin, (c, lam)) in out.data_mut().iter_mut().zip(lambda.data()).enumerate() {
        match factor(*lam) {
            Ok(m) => *c *= m,
            Err(Error::SingularOperator { multiplier, .. }) => {
                return Err(Error::SingularOperator {
                    mode: multi_index_of(f_hat.coeffs.shape(), lin),
                    multiplier,
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Expansion { kind: BasisKind::FourierLike, nu: f_hat.nu, coeffs: out })
}

fn positive_eigenvalue(lambda: f64) -> Result<f64> {
    if lambda > 0.0 {
        Ok(lambda)
    } else {
        Err(Error::numeric(format!(
            "eigenvalue sum {lambda} is not positive; stiffness data corrupt"
        )))
    }
}

/// Solve (gamma I + sum_j rho_j (-Delta)^{s_j}) u = f given Fourier-like
/// coefficients of f: divides mode p by gamma + sum_j rho_j |lambda_p|^{s_j}.
pub fn solve_multiterm(
    f_hat: &Expansion,
    spec: &FracOperatorSpec,
    basis: &TensorBasis,
) -> Result<Expansion> {
    check_fourier_like(f_hat, basis, "source")?;
    scale_modes(f_hat, basis, |lam| {
        let lam = positive_eigenvalue(lam)?;
        let m = spec.multiplier(lam);
        if m <= 0.0 || !m.is_finite() {
            return Err(Error::SingularOperator { mode: Vec::new(), multiplier: m });
        }
        Ok(1.0 / m)
    })
}

/// `solve_multiterm` for a pointwise source function.
pub fn solve_multiterm_fn<F>(
    f: F,
    spec: &FracOperatorSpec,
    basis: &TensorBasis,
) -> Result<Expansion>
where
    F: Fn(&[f64]) -> f64,
{
    let f_hat = to_fourier_like(&interpolate_fn(f, basis)?, basis)?;
    solve_multiterm(&f_hat, spec, basis)
}

fn check_solve_order(s: f64) -> Result<()> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::invalid(format!(
            "fractional order s = {s} outside (0, 1]"
        )));
    }
    Ok(())
}

/// Solve ((-Delta)^s + gamma) u = f: u^_p = f^_p / (gamma + |lambda_p|^s).
///
/// s = 1 is admitted as the classical limit. gamma = 0 is allowed because
/// every eigenvalue sum is strictly positive.
pub fn solve_fractional(
    f_hat: &Expansion,
    s: f64,
    gamma: f64,
    basis: &TensorBasis,
) -> Result<Expansion> {
    check_solve_order(s)?;
    if !(gamma >= 0.0) {
        return Err(Error::invalid(format!("shift gamma = {gamma} must be >= 0")));
    }
    solve_multiterm(f_hat, &FracOperatorSpec::single(s, gamma)?, basis)
}

/// `solve_fractional` for a pointwise source function.
pub fn solve_fractional_fn<F>(f: F, s: f64, gamma: f64, basis: &TensorBasis) -> Result<Expansion>
where
    F: Fn(&[f64]) -> f64,
{
    let f_hat = to_fourier_like(&interpolate_fn(f, basis)?, basis)?;
    solve_fractional(&f_hat, s, gamma, basis)
}

/// Apply (-Delta)^s: multiplies mode p by |lambda_p|^s, s in [0, 1].
pub fn apply_fraclap(u: &Expansion, s: f64, basis: &TensorBasis) -> Result<Expansion> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::invalid(format!("fractional order s = {s} outside [0, 1]")));
    }
    check_fourier_like(u, basis, "operand")?;
    scale_modes(u, basis, |lam| Ok(positive_eigenvalue(lam)?.powf(s)))
}

/// Solve ((-Delta + gamma_in I)^s) u = f: u^_p = f^_p / (gamma_in + |lambda_p|)^s.
pub fn solve_shifted(
    f_hat: &Expansion,
    s: f64,
    gamma_in: f64,
    basis: &TensorBasis,
) -> Result<Expansion> {
    check_solve_order(s)?;
    if !(gamma_in > 0.0) {
        return Err(Error::invalid(format!(
            "interior shift gamma_in = {gamma_in} must be > 0"
        )));
    }
    check_fourier_like(f_hat, basis, "source")?;
    scale_modes(f_hat, basis, |lam| {
        Ok((gamma_in + positive_eigenvalue(lam)?).powf(-s))
    })
}

/// `solve_shifted` for a pointwise source function.
pub fn solve_shifted_fn<F>(f: F, s: f64, gamma_in: f64, basis: &TensorBasis) -> Result<Expansion>
where
    F: Fn(&[f64]) -> f64,
{
    let f_hat = to_fourier_like(&interpolate_fn(f, basis)?, basis)?;
    solve_shifted(&f_hat, s, gamma_in, basis)
}

fn check_dt_order(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::domain(format!(
            "Dunford-Taylor integrand requires s strictly inside (0, 1), got {s}"
        )));
    }
    Ok(())
}

/// Raw value of int_0^inf t^{1-2s} lambda / (1 + t^2 lambda) dt by the
/// substitution t = (1+y)/(1-y) and an (2s-1, 1-2s) Gauss-Jacobi rule.
fn dt_raw_integral(lambda: f64, s: f64, spec: DtQuadratureSpec) -> Result<f64> {
    check_dt_order(s)?;
    if !(lambda > 0.0) {
        return Err(Error::domain(format!("lambda = {lambda} must be positive")));
    }
    if spec.num_nodes == 0 {
        return Err(Error::invalid("quadrature needs at least one node".to_string()));
    }
    let rule = gauss_jacobi(spec.num_nodes, 2.0 * s - 1.0, 1.0 - 2.0 * s)?;
    let mut total = 0.0;
    for (y, w) in rule.nodes().iter().zip(rule.weights()) {
        // Smooth factor after pulling the Jacobi weight out:
        // 2 lambda / ((1-y)^2 + lambda (1+y)^2), no cancellation at y -> +-1.
        let um = 1.0 - y;
        let up = 1.0 + y;
        total += w * 2.0 * lambda / (um * um + lambda * up * up);
    }
    Ok(total)
}

/// Quadrature value of the multiplier C_s int_0^inf t^{1-2s} lambda /
/// (1 + t^2 lambda) dt, which converges to lambda^s as M grows.
pub fn dt_multiplier(lambda: f64, s: f64, spec: DtQuadratureSpec) -> Result<f64> {
    Ok(c_s(s) * dt_raw_integral(lambda, s, spec)?)
}

/// Quadrature value of int_0^inf t^{1-2s} lambda^{1-s} / (1 + t^2 lambda) dt,
/// equal to pi / (2 sin(pi s)) for every lambda > 0 (pi/2 at s = 1/2).
pub fn dt_inner_integral(lambda: f64, s: f64, spec: DtQuadratureSpec) -> Result<f64> {
    Ok(dt_raw_integral(lambda, s, spec)? * lambda.powf(-s))
}

/// Apply (-Delta)^s through the integral representation instead of the
/// closed-form multiplier. Validation oracle for `apply_fraclap`.
pub fn dt_quadrature_apply(
    u: &Expansion,
    s: f64,
    spec: DtQuadratureSpec,
    basis: &TensorBasis,
) -> Result<Expansion> {
    check_dt_order(s)?;
    check_fourier_like(u, basis, "operand")?;
    scale_modes(u, basis, |lam| dt_multiplier(positive_eigenvalue(lam)?, s, spec))
}
