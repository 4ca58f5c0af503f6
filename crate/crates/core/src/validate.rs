//! Named self-checks: fast end-to-end sanity tests of the assembled pieces,
//! runnable from the command line. Each check is independent and reports a
//! one-line PASS/FAIL detail.

use std::f64::consts::PI;

use crate::basis::TensorBasis;
use crate::error::Result;
use crate::fnls::{run_simulation, FnlsConfig, TS4_W1, TS4_W2, TS4_W3, TS4_W4};
use crate::fourier_like::eigendecompose;
use crate::mcf::{mapped_quadrature, mcf_eval, stiffness_matrix};
use crate::solver::{
    dt_inner_integral, dt_multiplier, solve_fractional, DtQuadratureSpec, FracOperatorSpec,
};
use crate::special::fraclap_gaussian;
use crate::tensor::Tensor;
use crate::transforms::{
    interpolate, sample_on_grid, synthesize_grid, to_fourier_like, BasisKind, Expansion,
};

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type CheckFn = fn() -> Result<(bool, String)>;

const CHECKS: &[(&str, CheckFn)] = &[
    ("stiffness-anchors", check_stiffness_anchors),
    ("quadrature-exactness", check_quadrature_exactness),
    ("eigenbasis-orthogonality", check_eigenbasis_orthogonality),
    ("transform-roundtrip", check_transform_roundtrip),
    ("solver-residual", check_solver_residual),
    ("dunford-taylor-constant", check_dt_constant),
    ("dunford-taylor-power", check_dt_power),
    ("gaussian-closed-form", check_gaussian_closed_form),
    ("splitting-weights", check_splitting_weights),
    ("mass-conservation", check_mass_conservation),
    ("perturbation-sensitivity", check_perturbation_sensitivity),
];

/// Names of all registered checks, in execution order.
pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|(n, _)| *n).collect()
}

/// Run every check whose name contains `filter` (all of them when `None`).
/// A check that returns an error is reported as failed, not propagated.
pub fn run_checks(filter: Option<&str>) -> Vec<CheckReport> {
    CHECKS
        .iter()
        .filter(|(name, _)| filter.is_none_or(|f| name.contains(f)))
        .map(|(name, check)| match check() {
            Ok((passed, detail)) => CheckReport { name, passed, detail },
            Err(e) => CheckReport {
                name,
                passed: false,
                detail: format!("errored: {e}"),
            },
        })
        .collect()
}

fn check_stiffness_anchors() -> Result<(bool, String)> {
    let s = stiffness_matrix(8, 1.0)?;
    let anchors = [
        (0usize, 0usize, 0.125),
        (1, 1, 0.5),
        (2, 2, 25.0 / 16.0),
        (0, 2, -0.5 / 2.0_f64.sqrt()),
        (2, 4, -9.0 / 4.0),
        (2, 6, 15.0 / 16.0),
    ];
    let worst = anchors
        .iter()
        .map(|&(i, j, v)| (s.entry(i, j) - v).abs())
        .fold(0.0, f64::max);
    Ok((worst < 1e-13, format!("max anchor deviation {worst:.2e}")))
}

fn check_quadrature_exactness() -> Result<(bool, String)> {
    let rule = mapped_quadrature(12, 1.7)?;
    let mut worst = 0.0f64;
    for n in 0..6 {
        for m in 0..6 {
            let un: Vec<f64> = rule
                .nodes()
                .iter()
                .map(|&x| mcf_eval(n, x, 1.7))
                .collect::<Result<_>>()?;
            let um: Vec<f64> = rule
                .nodes()
                .iter()
                .map(|&x| mcf_eval(m, x, 1.7))
                .collect::<Result<_>>()?;
            let exact = if n == m { 1.0 } else { 0.0 };
            worst = worst.max((rule.dot(&un, &um) - exact).abs());
        }
    }
    Ok((worst < 1e-13, format!("max orthonormality defect {worst:.2e}")))
}

/// Residuals of the eigendecomposition against an explicit stiffness matrix.
/// Returns (max |E^T E - I|, max |S E - E Lambda| / (1 + lambda_max)).
fn eigen_residuals(
    stiffness: &crate::mcf::StiffnessMatrix,
    basis: &crate::fourier_like::FourierLikeBasis1d,
) -> (f64, f64) {
    let e = basis.vectors();
    let n = basis.len();
    let mut ortho = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let mut dot = 0.0;
            for k in 0..n {
                dot += e.at(k, i) * e.at(k, j);
            }
            let expect = if i == j { 1.0 } else { 0.0 };
            ortho = ortho.max((dot - expect).abs());
        }
    }
    let lam_max = basis.eigenvalues()[n - 1];
    let mut resid = 0.0f64;
    for p in 0..n {
        let col: Vec<f64> = (0..n).map(|k| e.at(k, p)).collect();
        let se = stiffness.matvec(&col);
        for k in 0..n {
            resid = resid.max((se[k] - basis.eigenvalues()[p] * col[k]).abs());
        }
    }
    (ortho, resid / (1.0 + lam_max))
}

fn check_eigenbasis_orthogonality() -> Result<(bool, String)> {
    let s = stiffness_matrix(32, 1.3)?;
    let basis = eigendecompose(&s)?;
    let (ortho, resid) = eigen_residuals(&s, &basis);
    Ok((
        ortho < 1e-12 && resid < 1e-12,
        format!("orthogonality defect {ortho:.2e}, eigen residual {resid:.2e}"),
    ))
}

fn check_transform_roundtrip() -> Result<(bool, String)> {
    let basis = TensorBasis::isotropic(2, 12, 2.0)?;
    let values = sample_on_grid(
        |x: &[f64]| (1.0 + x[0]) * (-0.5 * (x[0] * x[0] + x[1] * x[1])).exp(),
        &basis,
    )?;
    let coeffs = interpolate(&values, &basis)?;
    let back = synthesize_grid(&coeffs, &basis)?;
    let worst = values
        .data()
        .iter()
        .zip(back.data())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok((worst < 1e-11, format!("roundtrip defect {worst:.2e}")))
}

fn check_solver_residual() -> Result<(bool, String)> {
    let basis = TensorBasis::isotropic(1, 48, 2.0)?;
    let values = sample_on_grid(|x: &[f64]| (1.0 + x[0]) * (-x[0] * x[0]).exp(), &basis)?;
    let f_hat = to_fourier_like(&interpolate(&values, &basis)?, &basis)?;
    let (s, gamma) = (0.6, 1.0);
    let u_hat = solve_fractional(&f_hat, s, gamma, &basis)?;
    let spec = FracOperatorSpec::single(s, gamma)?;
    let lambda = basis.eigen_sum_tensor();
    let mut worst = 0.0f64;
    for ((u, f), lam) in u_hat
        .coeffs
        .data()
        .iter()
        .zip(f_hat.coeffs.data())
        .zip(lambda.data())
    {
        worst = worst.max((u * spec.multiplier(*lam) - f).abs());
    }
    Ok((worst < 1e-13, format!("operator residual {worst:.2e}")))
}

fn check_dt_constant() -> Result<(bool, String)> {
    let spec = DtQuadratureSpec::default();
    let mut worst = 0.0f64;
    for &lambda in &[0.37, 1.0, 412.0] {
        let v = dt_inner_integral(lambda, 0.5, spec)?;
        worst = worst.max((v - PI / 2.0).abs() / (PI / 2.0));
    }
    let unit = dt_multiplier(1.0, 0.5, spec)?;
    worst = worst.max((unit - 1.0).abs());
    Ok((worst < 1e-10, format!("max deviation from pi/2 identity {worst:.2e}")))
}

fn check_dt_power() -> Result<(bool, String)> {
    let basis = TensorBasis::isotropic(1, 32, 1.0)?;
    let eig = basis.axis(0).eigenvalues();
    let spec = DtQuadratureSpec::default();
    let mut worst = 0.0f64;
    for &s in &[0.3, 0.5, 0.7] {
        for &lambda in &[eig[0], 1.0, eig[eig.len() - 1]] {
            let v = dt_multiplier(lambda, s, spec)?;
            worst = worst.max((v - lambda.powf(s)).abs() / lambda.powf(s));
        }
    }
    Ok((worst < 1e-8, format!("max relative deviation from lambda^s {worst:.2e}")))
}

fn check_gaussian_closed_form() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    // s = 1 reduces to -u'' of the Gaussian.
    for &x in &[0.0, 0.7, 1.9, 3.4] {
        let v = fraclap_gaussian(&[x], 1.0)?;
        let exact = 2.0 * (1.0 - 2.0 * x * x) * (-x * x).exp();
        worst = worst.max((v - exact).abs());
    }
    // s = 1/2 at the origin: 2 Gamma(1) / Gamma(1/2) = 2 / sqrt(pi).
    let origin = fraclap_gaussian(&[0.0], 0.5)?;
    worst = worst.max((origin - 2.0 / PI.sqrt()).abs());
    Ok((worst < 1e-12, format!("max closed-form deviation {worst:.2e}")))
}

fn check_splitting_weights() -> Result<(bool, String)> {
    let a = (2.0 * (TS4_W1 + TS4_W3) - 0.5).abs();
    let b = (2.0 * TS4_W2 + TS4_W4 - 0.5).abs();
    let worst = a.max(b);
    Ok((worst < 1e-15, format!("weight identity defect {worst:.2e}")))
}

fn check_mass_conservation() -> Result<(bool, String)> {
    let cfg = FnlsConfig {
        s: 0.7,
        gamma: -1.0,
        p: 1,
        dt: 0.05,
        t_final: 1.0,
        dim: 1,
        degree: 24,
        nu: 2.0,
        snapshot_stride: 0,
    };
    let out = run_simulation(&cfg, |x: &[f64]| {
        num_complex::Complex64::new((-0.5 * x[0] * x[0]).exp(), 0.0)
    })?;
    if out.blow_up.is_some() {
        return Ok((false, "unexpected blow-up flag".to_string()));
    }
    let m0 = out.mass_trace[0].mass;
    let drift = out
        .mass_trace
        .iter()
        .map(|s| ((s.mass - m0) / m0).abs())
        .fold(0.0, f64::max);
    Ok((drift < 1e-10, format!("relative mass drift {drift:.2e}")))
}

/// Meta-check: a deliberately corrupted stiffness matrix must make the
/// eigenbasis residual check fail. Guards against the residual being
/// insensitive to the data it claims to test.
fn check_perturbation_sensitivity() -> Result<(bool, String)> {
    let clean = stiffness_matrix(32, 1.3)?;
    let clean_basis = eigendecompose(&clean)?;
    let (_, clean_resid) = eigen_residuals(&clean, &clean_basis);

    let mut corrupt = clean.clone();
    corrupt.perturb_entry(2, 2, 1e-3)?;
    let corrupt_basis = eigendecompose(&corrupt)?;
    // Residual of the corrupted eigenpairs against the clean operator.
    let (_, cross_resid) = eigen_residuals(&clean, &corrupt_basis);

    let detected = cross_resid > 1e-6 && clean_resid < 1e-12;
    Ok((
        detected,
        format!(
            "clean residual {clean_resid:.2e}, perturbed residual {cross_resid:.2e} (must exceed 1e-6)"
        ),
    ))
}

/// Build a zero Fourier-like expansion (handy for command-line smoke paths).
pub fn zero_fourier_like(basis: &TensorBasis) -> Expansion {
    Expansion {
        kind: BasisKind::FourierLike,
        nu: basis.axis(0).nu(),
        coeffs: Tensor::zeros(&basis.shape()),
    }
}
