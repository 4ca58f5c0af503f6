//! General-purpose quadrature: adaptive Gauss-Kronrod on finite intervals
//! and Gauss-Jacobi rules built by the Golub-Welsch procedure.

// Node and weight tables quote their full published precision.
#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::cheb::GaussRule;
use crate::error::{Error, Result};
use crate::linalg::tridiag_eigen;
use crate::special::gamma_fn;

/// 15-point Kronrod abscissae on [0, 1] side of the symmetric rule.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

/// Embedded 7-point Gauss weights (nodes are the odd-indexed `XGK`).
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One Gauss-Kronrod 15(7) panel: returns (integral, error estimate).
pub(crate) fn gk15_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = WGK[7] * fc;
    let mut resg = WG[3] * fc;
    let mut resabs = WGK[7] * fc.abs();
    let mut fv = [0.0f64; 15];
    fv[7] = fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[j] = f1;
        fv[14 - j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let reskh = resk * 0.5;
    let mut resasc = WGK[7] * (fc - reskh).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[j] - reskh).abs() + (fv[14 - j] - reskh).abs());
    }
    let value = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (1.0f64).min((200.0 * err / resasc).powf(1.5));
    }
    let floor = 50.0 * f64::EPSILON * resabs;
    if floor > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(floor);
    }
    (value, err)
}

struct Region {
    err: f64,
    a: f64,
    b: f64,
    value: f64,
}

impl PartialEq for Region {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Region {}
impl PartialOrd for Region {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Region {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadOutcome {
    pub value: f64,
    pub error: f64,
    pub regions: usize,
}

/// Adaptive Gauss-Kronrod integration of `f` over [a, b].
///
/// Bisects the region with the largest error estimate until the summed
/// estimate meets `max(abs_tol, rel_tol * |integral|)` or `max_regions`
/// panels are in play; failure to converge is an error.
pub fn adaptive_gk15<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_regions: usize,
) -> Result<QuadOutcome> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::invalid("adaptive_gk15 needs a finite interval".to_string()));
    }
    if !(abs_tol >= 0.0 && rel_tol >= 0.0 && abs_tol + rel_tol > 0.0) {
        return Err(Error::invalid("quadrature tolerances must be nonnegative and not both zero".to_string()));
    }
    if a == b {
        return Ok(QuadOutcome { value: 0.0, error: 0.0, regions: 0 });
    }
    let (v0, e0) = gk15_panel(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Region { err: e0, a, b, value: v0 });
    let mut total = v0;
    let mut errsum = e0;
    while errsum > abs_tol.max(rel_tol * total.abs()) {
        if heap.len() >= max_regions {
            return Err(Error::numeric(format!(
                "adaptive quadrature stalled at error {errsum:.3e} with {} regions",
                heap.len()
            )));
        }
        let worst = heap.pop().expect("heap cannot be empty while error remains");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::numeric(
                "adaptive quadrature cannot split region further".to_string(),
            ));
        }
        let (v1, e1) = gk15_panel(&f, worst.a, mid);
        let (v2, e2) = gk15_panel(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        errsum += e1 + e2 - worst.err;
        heap.push(Region { err: e1, a: worst.a, b: mid, value: v1 });
        heap.push(Region { err: e2, a: mid, b: worst.b, value: v2 });
    }
    Ok(QuadOutcome { value: total, error: errsum, regions: heap.len() })
}

/// Recurrence coefficients of monic Jacobi polynomials for weight
/// (1-y)^alpha (1+y)^beta on [-1, 1].
fn jacobi_recurrence(n: usize, alpha: f64, beta: f64) -> (Vec<f64>, Vec<f64>) {
    let s = alpha + beta;
    let mut diag = Vec::with_capacity(n);
    let mut offsq = Vec::with_capacity(n.saturating_sub(1));
    for k in 0..n {
        if k == 0 {
            diag.push((beta - alpha) / (s + 2.0));
        } else {
            let t = 2.0 * k as f64 + s;
            diag.push((beta * beta - alpha * alpha) / (t * (t + 2.0)));
        }
    }
    for k in 1..n {
        let kf = k as f64;
        let b = if k == 1 {
            4.0 * (alpha + 1.0) * (beta + 1.0) / ((s + 2.0) * (s + 2.0) * (s + 3.0))
        } else {
            let t = 2.0 * kf + s;
            4.0 * kf * (kf + alpha) * (kf + beta) * (kf + s) / (t * t * (t + 1.0) * (t - 1.0))
        };
        offsq.push(b);
    }
    (diag, offsq)
}

/// Gauss-Jacobi rule with `n` nodes for weight (1-y)^alpha (1+y)^beta.
///
/// Nodes ascend in (-1, 1); weights are positive and sum to the weight
/// function's total mass.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Result<GaussRule> {
    if n == 0 {
        return Err(Error::invalid("gauss_jacobi needs at least one node".to_string()));
    }
    if !(alpha > -1.0 && beta > -1.0) {
        return Err(Error::domain(format!(
            "Jacobi exponents must exceed -1 (got alpha={alpha}, beta={beta})"
        )));
    }
    let mu0 = 2.0f64.powf(alpha + beta + 1.0) * gamma_fn(alpha + 1.0)? * gamma_fn(beta + 1.0)?
        / gamma_fn(alpha + beta + 2.0)?;
    let (diag, offsq) = jacobi_recurrence(n, alpha, beta);
    let sub: Vec<f64> = offsq.iter().map(|b| b.sqrt()).collect();
    let (nodes, vectors) = tridiag_eigen(&diag, &sub)?;
    let weights: Vec<f64> = (0..n)
        .map(|j| {
            let q0 = vectors.at(0, j);
            mu0 * q0 * q0
        })
        .collect();
    GaussRule::new(nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn single_panel_is_exact_for_low_degree() {
        let (v, _) = gk15_panel(&|x: f64| x * x, 0.0, 1.0);
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn smooth_integrals() {
        let q = adaptive_gk15(|x: f64| x.sin(), 0.0, PI, 1e-13, 0.0, 200).unwrap();
        assert!((q.value - 2.0).abs() < 1e-12);
        let q = adaptive_gk15(|x: f64| (-x * x).exp(), -8.0, 8.0, 1e-13, 0.0, 400).unwrap();
        assert!((q.value - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity() {
        let q = adaptive_gk15(|x: f64| x.sqrt().recip(), 0.0, 1.0, 1e-9, 0.0, 4000).unwrap();
        assert!((q.value - 2.0).abs() < 1e-8, "value {}", q.value);
    }

    #[test]
    fn oscillatory_cancellation() {
        let q = adaptive_gk15(|x: f64| x.cos(), 0.0, 10.0 * PI, 1e-11, 0.0, 2000).unwrap();
        assert!(q.value.abs() < 1e-10);
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let res = adaptive_gk15(|x: f64| x.sqrt().recip(), 0.0, 1.0, 1e-13, 0.0, 4);
        assert!(res.is_err());
    }

    #[test]
    fn legendre_special_case() {
        // alpha = beta = 0 reduces to Gauss-Legendre.
        let rule = gauss_jacobi(3, 0.0, 0.0).unwrap();
        let expect_nodes = [-(0.6f64.sqrt()), 0.0, 0.6f64.sqrt()];
        let expect_weights = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
        for j in 0..3 {
            assert!((rule.nodes()[j] - expect_nodes[j]).abs() < 1e-14);
            assert!((rule.weights()[j] - expect_weights[j]).abs() < 1e-14);
        }
    }

    #[test]
    fn chebyshev_special_case() {
        // alpha = beta = -1/2 reduces to Chebyshev-Gauss (ascending order).
        let n = 9;
        let rule = gauss_jacobi(n, -0.5, -0.5).unwrap();
        let reference = crate::cheb::chebyshev_gauss(n).unwrap();
        let mut nodes = reference.nodes().to_vec();
        nodes.reverse();
        for ((&x, &w), &r) in rule.nodes().iter().zip(rule.weights()).zip(&nodes) {
            assert!((x - r).abs() < 1e-13);
            assert!((w - PI / n as f64).abs() < 1e-13);
        }
    }

    #[test]
    fn jacobi_mass_and_moments() {
        // Exponent pair (2s-1, 1-2s) at s = 0.75: the total mass is
        // 2 Gamma(2s) Gamma(2-2s) = pi, and polynomial moments match an
        // adaptive reference computed after the substitution y = cos(phi)
        // which removes both endpoint singularities.
        let s = 0.75;
        let (alpha, beta) = (2.0 * s - 1.0, 1.0 - 2.0 * s);
        let rule = gauss_jacobi(20, alpha, beta).unwrap();
        let mass: f64 = rule.weights().iter().sum();
        assert!((mass - PI).abs() < 1e-12, "mass {mass}");
        for m in 1..6usize {
            let num: f64 = rule
                .nodes()
                .iter()
                .zip(rule.weights())
                .map(|(y, w)| w * y.powi(m as i32))
                .sum();
            let reference = adaptive_gk15(
                |phi: f64| {
                    let y = phi.cos();
                    (1.0 - y).powf(alpha + 0.5) * (1.0 + y).powf(beta + 0.5) * y.powi(m as i32)
                },
                0.0,
                PI,
                1e-12,
                0.0,
                4000,
            )
            .unwrap()
            .value;
            assert!((num - reference).abs() < 1e-10, "moment {m}: {num} vs {reference}");
        }
    }

    #[test]
    fn jacobi_rejects_bad_exponents() {
        assert!(gauss_jacobi(4, -1.0, 0.0).is_err());
        assert!(gauss_jacobi(0, 0.0, 0.0).is_err());
    }
}
