//! Mapped Chebyshev functions (MCFs) on the real line.
//!
//! The family is built from the algebraic map `x = nu * y / sqrt(1 - y^2)`
//! between the reference interval and the line. The n-th basis function is
//!
//! ```text
//! T~_n(x) = (c_n pi / 2)^(-1/2) nu^(-1/2) (1 + (x/nu)^2)^(-1/2) T_n(y(x/nu))
//! ```
//!
//! with `c_0 = 2`, `c_n = 1` otherwise. The family is orthonormal in
//! `L^2(R)`, and its stiffness matrix (pairings of first derivatives) is
//! symmetric positive definite and banded: entries vanish unless
//! `|m - n|` is 0, 2 or 4.

use std::f64::consts::PI;

use crate::cheb::{chebyshev_gauss, GaussRule};
use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Normalization constant `c_n` (2 for `n = 0`, 1 otherwise).
pub fn neumann_factor(n: usize) -> f64 {
    if n == 0 {
        2.0
    } else {
        1.0
    }
}

fn check_nu(nu: f64) -> Result<()> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::invalid(format!("map scale nu must be positive, got {nu}")));
    }
    Ok(())
}

/// Forward map `y -> nu * y / sqrt(1 - y^2)` from (-1, 1) to the line.
pub fn map_forward(y: f64, nu: f64) -> Result<f64> {
    check_nu(nu)?;
    if !(y > -1.0 && y < 1.0) {
        return Err(Error::domain(format!("map_forward argument {y} outside (-1, 1)")));
    }
    Ok(nu * y / (1.0 - y * y).sqrt())
}

/// Backward map `x -> (x/nu) / sqrt(1 + (x/nu)^2)` from the line to (-1, 1).
pub fn map_backward(x: f64, nu: f64) -> Result<f64> {
    check_nu(nu)?;
    if !x.is_finite() {
        return Err(Error::domain(format!("map_backward argument {x} is not finite")));
    }
    let u = x / nu;
    Ok(u / (1.0 + u * u).sqrt())
}

/// Decay factor `g_nu(x) = nu^(-1/2) (1 + (x/nu)^2)^(-1/2)` common to the
/// whole family: every member of the approximation space is `g_nu` times a
/// polynomial in the mapped variable.
pub fn decay_factor(x: f64, nu: f64) -> Result<f64> {
    check_nu(nu)?;
    let u = x / nu;
    Ok(1.0 / (nu * (1.0 + u * u)).sqrt())
}

/// Value of the scaled MCF of index `n` at `x`.
pub fn mcf_eval(n: usize, x: f64, nu: f64) -> Result<f64> {
    check_nu(nu)?;
    if !x.is_finite() {
        return Err(Error::domain(format!("mcf_eval argument {x} is not finite")));
    }
    let y = map_backward(x, nu)?;
    let theta = y.acos();
    let norm = (neumann_factor(n) * PI / 2.0).sqrt().recip();
    Ok(norm * decay_factor(x, nu)? * (n as f64 * theta).cos())
}

/// First derivative of the scaled MCF of index `n` at `x`.
///
/// Uses the exact reduction of the derivative to neighbouring Chebyshev
/// modes: the bracket `(1-y^2) T_n'(y) - y T_n(y)` equals
/// `((n-1)/2) T_{n-1}(y) - ((n+1)/2) T_{n+1}(y)`, where the index -1 folds
/// back onto 1 (cosine evenness).
pub fn mcf_deriv_eval(n: usize, x: f64, nu: f64) -> Result<f64> {
    check_nu(nu)?;
    if !x.is_finite() {
        return Err(Error::domain(format!("mcf_deriv_eval argument {x} is not finite")));
    }
    let u = x / nu;
    let y = u / (1.0 + u * u).sqrt();
    let theta = y.acos();
    let one_minus_y2 = 1.0 / (1.0 + u * u);
    let nf = n as f64;
    let bracket = 0.5 * (nf - 1.0) * ((nf - 1.0) * theta).cos()
        - 0.5 * (nf + 1.0) * ((nf + 1.0) * theta).cos();
    let norm = (neumann_factor(n) * PI / 2.0).sqrt().recip();
    Ok(norm * bracket * one_minus_y2 * nu.powf(-1.5))
}

/// Values of all scaled MCFs of index `0..=degree` at `x`, computed with
/// the Chebyshev three-term recurrence in the mapped variable.
pub fn mcf_eval_all(degree: usize, x: f64, nu: f64) -> Result<Vec<f64>> {
    check_nu(nu)?;
    if !x.is_finite() {
        return Err(Error::domain(format!("mcf_eval_all argument {x} is not finite")));
    }
    let y = map_backward(x, nu)?;
    let g = decay_factor(x, nu)?;
    let mut out = Vec::with_capacity(degree + 1);
    let mut t_prev = 1.0;
    let mut t_curr = y;
    for n in 0..=degree {
        let t_n = if n == 0 {
            t_prev
        } else if n == 1 {
            t_curr
        } else {
            let t_next = 2.0 * y * t_curr - t_prev;
            t_prev = t_curr;
            t_curr = t_next;
            t_next
        };
        let norm = (neumann_factor(n) * PI / 2.0).sqrt().recip();
        out.push(norm * g * t_n);
    }
    Ok(out)
}

/// First derivatives of all scaled MCFs of index `0..=degree` at `x`.
pub fn mcf_deriv_eval_all(degree: usize, x: f64, nu: f64) -> Result<Vec<f64>> {
    check_nu(nu)?;
    if !x.is_finite() {
        return Err(Error::domain(format!(
            "mcf_deriv_eval_all argument {x} is not finite"
        )));
    }
    let u = x / nu;
    let y = u / (1.0 + u * u).sqrt();
    let one_minus_y2 = 1.0 / (1.0 + u * u);
    let scale = one_minus_y2 * nu.powf(-1.5);
    // T_{n-1}(y) and T_{n+1}(y) via the recurrence; index -1 folds onto 1.
    let max_t = degree + 1;
    let mut t = Vec::with_capacity(max_t + 1);
    t.push(1.0);
    if max_t >= 1 {
        t.push(y);
    }
    for n in 2..=max_t {
        let next = 2.0 * y * t[n - 1] - t[n - 2];
        t.push(next);
    }
    let mut out = Vec::with_capacity(degree + 1);
    for n in 0..=degree {
        let nf = n as f64;
        let t_lower = if n == 0 { t[1] } else { t[n - 1] };
        let bracket = 0.5 * (nf - 1.0) * t_lower - 0.5 * (nf + 1.0) * t[n + 1];
        let norm = (neumann_factor(n) * PI / 2.0).sqrt().recip();
        out.push(norm * bracket * scale);
    }
    Ok(out)
}

/// Quadrature rule on the line induced by the Chebyshev-Gauss rule under
/// the map: nodes `x_j = map(y_j)` and weights chosen so the rule is exact
/// for products of basis functions.
#[derive(Debug, Clone)]
pub struct MappedRule {
    nu: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    gauss: GaussRule,
}

impl MappedRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Mapped nodes in descending order.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Underlying reference rule (same ordering).
    pub fn gauss(&self) -> &GaussRule {
        &self.gauss
    }

    /// Integrate the product of two grids of samples on this rule.
    pub fn dot(&self, u: &[f64], v: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(u.iter().zip(v))
            .map(|(w, (a, b))| w * a * b)
            .sum()
    }
}

/// Mapped quadrature with `num_points` nodes and scale `nu`.
///
/// The weight at node `j` is `nu * rho_j / (1 - y_j^2)`; this choice makes
/// `sum_j w_j u(x_j) v(x_j)` exact whenever `u * v` lies in the span of the
/// first `2 * num_points` basis-function products. Node and weight are
/// computed from the node angle directly so that the extreme nodes stay
/// accurate.
pub fn mapped_quadrature(num_points: usize, nu: f64) -> Result<MappedRule> {
    check_nu(nu)?;
    let gauss = chebyshev_gauss(num_points)?;
    let m = num_points as f64;
    let rho = PI / m;
    let mut nodes = Vec::with_capacity(num_points);
    let mut weights = Vec::with_capacity(num_points);
    for j in 0..num_points {
        let theta = (2 * j + 1) as f64 * PI / (2.0 * m);
        let (sin_t, cos_t) = theta.sin_cos();
        nodes.push(nu * cos_t / sin_t);
        weights.push(nu * rho / (sin_t * sin_t));
    }
    Ok(MappedRule { nu, nodes, weights, gauss })
}

/// Stiffness matrix of the scaled MCF family: `S_nm` is the pairing of the
/// n-th and m-th first derivatives over the line. Stored by bands.
#[derive(Debug, Clone)]
pub struct StiffnessMatrix {
    size: usize,
    nu: f64,
    d0: Vec<f64>,
    d2: Vec<f64>,
    d4: Vec<f64>,
}

impl StiffnessMatrix {
    /// Matrix order (`degree + 1`).
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Entry `(i, j)`; zero off the stored bands.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        match hi - lo {
            0 => self.d0[lo],
            2 => self.d2[lo],
            4 => self.d4[lo],
            _ => 0.0,
        }
    }

    /// Dense copy, mainly for tests and the dense-eigensolver cross-check.
    pub fn to_dense(&self) -> Mat {
        let n = self.size;
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                *m.at_mut(i, j) = self.entry(i, j);
            }
        }
        m
    }

    /// Matrix-vector product using the banded structure.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.size);
        let mut y = vec![0.0; self.size];
        for i in 0..self.size {
            let mut acc = self.d0[i] * x[i];
            for off in [2usize, 4] {
                let band = if off == 2 { &self.d2 } else { &self.d4 };
                if i + off < self.size {
                    acc += band[i] * x[i + off];
                }
                if i >= off {
                    acc += band[i - off] * x[i - off];
                }
            }
            y[i] = acc;
        }
        y
    }

    /// Additively perturb entry `(i, j)` (and its mirror). Testing hook for
    /// sensitivity checks; the entry must lie on a stored band.
    pub fn perturb_entry(&mut self, i: usize, j: usize, delta: f64) -> Result<()> {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let band = match hi - lo {
            0 => &mut self.d0,
            2 => &mut self.d2,
            4 => &mut self.d4,
            _ => {
                return Err(Error::invalid(format!(
                    "entry ({i}, {j}) lies outside the stored bands"
                )))
            }
        };
        band[lo] += delta;
        Ok(())
    }
}

/// Chebyshev coefficients of the derivative bracket of mode `n`:
/// `((n-1)/2) T_{n-1} - ((n+1)/2) T_{n+1}` with index -1 folded onto 1.
fn bracket_coeffs(n: usize) -> Vec<f64> {
    let mut p = vec![0.0; n + 2];
    let nf = n as f64;
    let lower = if n == 0 { 1 } else { n - 1 };
    p[lower] += 0.5 * (nf - 1.0);
    p[n + 1] -= 0.5 * (nf + 1.0);
    p
}

/// Multiply a Chebyshev series by `(1 - y^2)` exactly:
/// `(1-y^2) T_k = -T_{|k-2|}/4 + T_k/2 - T_{k+2}/4`.
fn one_minus_y2_times(p: &[f64]) -> Vec<f64> {
    let mut q = vec![0.0; p.len() + 2];
    for (k, &c) in p.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        q[k] += 0.5 * c;
        q[k + 2] -= 0.25 * c;
        q[k.abs_diff(2)] -= 0.25 * c;
    }
    q
}

/// Weighted Chebyshev dot product `sum_k c_k a_k b_k`.
fn cheb_dot(a: &[f64], b: &[f64]) -> f64 {
    let len = a.len().min(b.len());
    let mut acc = 0.0;
    for k in 0..len {
        acc += neumann_factor(k) * a[k] * b[k];
    }
    acc
}

/// Assemble the stiffness matrix of order `degree + 1` at scale `nu`.
///
/// Each entry is computed from the exact Chebyshev expansions of the
/// derivative brackets, so the assembly is exact up to rounding; scaling in
/// `nu` enters only as the factor `nu^(-2)`.
pub fn stiffness_matrix(degree: usize, nu: f64) -> Result<StiffnessMatrix> {
    check_nu(nu)?;
    let size = degree + 1;
    let inv_nu2 = nu.powi(-2);
    let mut d0 = vec![0.0; size];
    let mut d2 = vec![0.0; size.saturating_sub(2)];
    let mut d4 = vec![0.0; size.saturating_sub(4)];
    for n in 0..size {
        let p_n = bracket_coeffs(n);
        for m in [n, n + 2, n + 4] {
            if m >= size {
                break;
            }
            let q_m = one_minus_y2_times(&bracket_coeffs(m));
            let norm = (neumann_factor(n) * neumann_factor(m)).sqrt().recip();
            let value = norm * cheb_dot(&p_n, &q_m) * inv_nu2;
            match m - n {
                0 => d0[n] = value,
                2 => d2[n] = value,
                _ => d4[n] = value,
            }
        }
    }
    Ok(StiffnessMatrix { size, nu, d0, d2, d4 })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT_PI_INV: f64 = 0.5641895835477563;

    #[test]
    fn map_forward_known_values() {
        assert_eq!(map_forward(0.0, 1.0).unwrap(), 0.0);
        let s = 0.5f64.sqrt();
        assert!((map_forward(s, 1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((map_forward(s, 2.0).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn map_backward_known_values() {
        assert_eq!(map_backward(0.0, 1.0).unwrap(), 0.0);
        let s = 0.5f64.sqrt();
        assert!((map_backward(1.0, 1.0).unwrap() - s).abs() < 1e-14);
    }

    #[test]
    fn map_roundtrip() {
        for nu in [1.0, 2.5] {
            for k in -40..=40 {
                let x = k as f64 * 0.25;
                let y = map_backward(x, nu).unwrap();
                let back = map_forward(y, nu).unwrap();
                assert!((back - x).abs() < 1e-13 * (1.0 + x.abs()), "x={x} nu={nu}");
            }
        }
    }

    #[test]
    fn map_domain_errors() {
        assert!(map_forward(1.0, 1.0).is_err());
        assert!(map_forward(-1.0000001, 1.0).is_err());
        assert!(map_backward(f64::INFINITY, 1.0).is_err());
        assert!(map_forward(0.0, 0.0).is_err());
        assert!(map_forward(0.0, -2.0).is_err());
    }

    #[test]
    fn mcf_values_at_origin() {
        assert!((mcf_eval(0, 0.0, 1.0).unwrap() - SQRT_PI_INV).abs() < 1e-12);
        assert!(mcf_eval(1, 0.0, 1.0).unwrap().abs() < 1e-15);
        // Scaled family picks up nu^(-1/2) at the origin.
        let v = mcf_eval(0, 0.0, 4.0).unwrap();
        assert!((v - SQRT_PI_INV / 2.0).abs() < 1e-12);
    }

    #[test]
    fn mcf_derivative_matches_finite_difference() {
        let h = 1e-5;
        for nu in [1.0, 2.5] {
            for n in 0..8 {
                for &x in &[-3.0, -0.7, 0.0, 0.4, 1.9, 6.0] {
                    let fd = (mcf_eval(n, x + h, nu).unwrap() - mcf_eval(n, x - h, nu).unwrap())
                        / (2.0 * h);
                    let an = mcf_deriv_eval(n, x, nu).unwrap();
                    assert!(
                        (fd - an).abs() < 1e-7 * (1.0 + an.abs()),
                        "n={n} x={x} nu={nu}: {fd} vs {an}"
                    );
                }
            }
        }
    }

    #[test]
    fn batch_eval_matches_single() {
        let degree = 12;
        for nu in [1.0, 2.5] {
            for &x in &[-8.0, -1.1, 0.0, 0.3, 2.0, 40.0] {
                let vals = mcf_eval_all(degree, x, nu).unwrap();
                let ders = mcf_deriv_eval_all(degree, x, nu).unwrap();
                for n in 0..=degree {
                    assert!((vals[n] - mcf_eval(n, x, nu).unwrap()).abs() < 1e-13);
                    assert!((ders[n] - mcf_deriv_eval(n, x, nu).unwrap()).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn mapped_rule_single_node() {
        let r = mapped_quadrature(1, 1.0).unwrap();
        assert!(r.nodes()[0].abs() < 1e-15);
        assert!((r.weights()[0] - PI).abs() < 1e-14);
    }

    #[test]
    fn mapped_rule_orthonormality() {
        // 2(N+1) points integrate T~_n T~_m exactly for n, m <= N.
        let degree = 16;
        for nu in [1.0, 2.5] {
            let rule = mapped_quadrature(2 * (degree + 1), nu).unwrap();
            for n in 0..=degree {
                for m in n..=degree {
                    let mut acc = 0.0;
                    for (x, w) in rule.nodes().iter().zip(rule.weights()) {
                        acc += w * mcf_eval(n, *x, nu).unwrap() * mcf_eval(m, *x, nu).unwrap();
                    }
                    let expect = if n == m { 1.0 } else { 0.0 };
                    assert!(
                        (acc - expect).abs() < 1e-12,
                        "pairing ({n}, {m}) at nu={nu}: {acc}"
                    );
                }
            }
        }
    }

    #[test]
    fn stiffness_known_entries() {
        let s = stiffness_matrix(8, 1.0).unwrap();
        assert!((s.entry(0, 0) - 0.125).abs() < 1e-15);
        assert!((s.entry(1, 1) - 0.5).abs() < 1e-15);
        assert!((s.entry(2, 2) - 25.0 / 16.0).abs() < 1e-15);
        assert!((s.entry(0, 2) + 1.0 / (2.0 * 2.0f64.sqrt())).abs() < 1e-15);
        assert!((s.entry(2, 4) + 9.0 / 4.0).abs() < 1e-14);
        assert!((s.entry(2, 6) - 15.0 / 16.0).abs() < 1e-14);
        // Odd-distance and far entries vanish.
        assert_eq!(s.entry(0, 1), 0.0);
        assert_eq!(s.entry(1, 4), 0.0);
        assert_eq!(s.entry(0, 6), 0.0);
    }

    /// Closed-form band entries, valid for rows n >= 2.
    fn closed_form(n: usize, m: usize) -> f64 {
        let c = |k: i64| -> f64 {
            if k == 0 {
                2.0
            } else {
                1.0
            }
        };
        let nf = n as f64;
        let ni = n as i64;
        if m == n {
            ((4.0 * c(ni - 1) - c(ni - 2)) * (nf - 1.0) * (nf - 1.0) / 16.0
                + (4.0 * c(ni + 1) - c(ni + 2)) * (nf + 1.0) * (nf + 1.0) / 16.0
                - c(ni) / 4.0)
                / c(ni)
        } else if m == n + 2 {
            ((c(ni) - c(ni + 2)) * (nf + 1.0) / 8.0 - c(ni + 1) * (nf + 1.0) * (nf + 1.0) / 4.0)
                / (c(ni) * c(ni + 2)).sqrt()
        } else if m == n + 4 {
            c(ni + 2) * (nf + 1.0) * (nf + 3.0) / 16.0 / (c(ni) * c(ni + 4)).sqrt()
        } else {
            0.0
        }
    }

    #[test]
    fn stiffness_matches_closed_form_for_inner_rows() {
        let degree = 40;
        let s = stiffness_matrix(degree, 1.0).unwrap();
        for n in 2..=degree {
            for m in [n, n + 2, n + 4] {
                if m > degree {
                    break;
                }
                let expect = closed_form(n, m);
                assert!(
                    (s.entry(n, m) - expect).abs() < 1e-12 * (1.0 + expect.abs()),
                    "entry ({n}, {m}): {} vs {expect}",
                    s.entry(n, m)
                );
            }
        }
    }

    #[test]
    fn stiffness_agrees_with_quadrature() {
        let degree = 24;
        for nu in [1.0, 2.5] {
            let s = stiffness_matrix(degree, nu).unwrap();
            let rule = mapped_quadrature(2 * (degree + 1), nu).unwrap();
            for n in 0..=degree {
                for m in n..=degree {
                    let mut acc = 0.0;
                    for (x, w) in rule.nodes().iter().zip(rule.weights()) {
                        acc += w
                            * mcf_deriv_eval(n, *x, nu).unwrap()
                            * mcf_deriv_eval(m, *x, nu).unwrap();
                    }
                    assert!(
                        (acc - s.entry(n, m)).abs() < 1e-10 * (1.0 + s.entry(n, m).abs()),
                        "entry ({n}, {m}) at nu={nu}: quad {acc} vs {}",
                        s.entry(n, m)
                    );
                }
            }
        }
    }

    #[test]
    fn stiffness_scaling_law() {
        let base = stiffness_matrix(10, 1.0).unwrap();
        let scaled = stiffness_matrix(10, 2.5).unwrap();
        let inv = 2.5f64.powi(-2);
        for i in 0..=10 {
            for j in 0..=10 {
                assert_eq!(scaled.entry(i, j), base.entry(i, j) * inv);
            }
        }
    }

    #[test]
    fn stiffness_positive_definite() {
        for degree in [8usize, 64, 512] {
            let s = stiffness_matrix(degree, 1.0).unwrap();
            crate::linalg::cholesky(&s.to_dense())
                .unwrap_or_else(|e| panic!("degree {degree}: {e}"));
        }
    }

    #[test]
    fn matvec_matches_dense() {
        let s = stiffness_matrix(13, 1.7).unwrap();
        let dense = s.to_dense();
        let x: Vec<f64> = (0..14).map(|k| (k as f64 * 0.9).cos()).collect();
        let lhs = s.matvec(&x);
        let rhs = dense.matvec(&x);
        for (a, b) in lhs.iter().zip(&rhs) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
