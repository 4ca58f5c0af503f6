//! Special functions and closed-form fractional Laplacians of Gaussian and
//! rational-decay profiles.
//!
//! Everything is real-valued double precision and restricted to the
//! argument ranges the solvers need (hypergeometric argument z <= 0).
//! A brute-force Fourier-side quadrature oracle is included for
//! cross-validation; it is far too slow for production use.

// Coefficient tables quote their full published precision.
#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::{adaptive_gk15, gk15_panel};

/// Lanczos g = 7, 9-term coefficient set.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
];

fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma_unchecked(1.0 - x))
    } else {
        let z = x - 1.0;
        let mut acc = LANCZOS[0];
        for (i, c) in LANCZOS.iter().enumerate().skip(1) {
            acc += c / (z + i as f64);
        }
        let t = z + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * acc
    }
}

/// Gamma function away from the poles at 0, -1, -2, ...
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::invalid("gamma_fn argument must be finite".to_string()));
    }
    if x == x.round() && x <= 0.0 {
        return Err(Error::domain(format!("gamma_fn pole at {x}")));
    }
    Ok(gamma_unchecked(x))
}

/// 1/Gamma(x), defined as 0 at the poles.
pub(crate) fn recip_gamma(x: f64) -> f64 {
    if x == x.round() && x <= 0.0 {
        0.0
    } else {
        1.0 / gamma_unchecked(x)
    }
}

/// Detects x within 1e-9 of a non-positive integer -m.
fn near_nonpositive_integer(x: f64) -> Option<usize> {
    let r = x.round();
    if r <= 0.0 && (x - r).abs() < 1e-9 {
        Some((-r) as usize)
    } else {
        None
    }
}

/// Kummer series sum_k (a)_k z^k / ((b)_k k!) with a plain convergence test.
fn kummer_series(a: f64, b: f64, z: f64, max_terms: usize) -> Result<f64> {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut small = 0;
    for k in 0..max_terms {
        let kf = k as f64;
        term *= (a + kf) * z / ((b + kf) * (kf + 1.0));
        sum += term;
        if term.abs() <= f64::EPSILON * sum.abs() {
            small += 1;
            if small >= 2 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::numeric(format!(
        "1F1 series did not converge (a={a}, b={b}, z={z})"
    )))
}

/// Terminating Kummer polynomial with first parameter exactly -m.
fn kummer_terminating(m: usize, b: f64, z: f64) -> f64 {
    let a = -(m as f64);
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 0..m {
        let kf = k as f64;
        term *= (a + kf) * z / ((b + kf) * (kf + 1.0));
        sum += term;
    }
    sum
}

/// Large-argument expansion for z -> -inf; `None` when the divergent tail
/// sets in before the requested precision is reached.
fn hyp1f1_asymptotic(a: f64, b: f64, z: f64) -> Option<f64> {
    let w = -z;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 0..300usize {
        let kf = k as f64;
        let next = term * (a + kf) * (a - b + 1.0 + kf) / ((kf + 1.0) * w);
        if next.abs() >= term.abs() && k > 0 {
            if term.abs() <= 1e-12 * sum.abs().max(f64::MIN_POSITIVE) {
                break;
            }
            return None;
        }
        term = next;
        sum += term;
        if term.abs() <= f64::EPSILON * sum.abs() {
            break;
        }
    }
    Some(gamma_unchecked(b) * recip_gamma(b - a) * w.powf(-a) * sum)
}

/// Switch from the direct series to the Kummer transform.
const F11_DIRECT_LIMIT: f64 = 8.0;
/// Switch from the Kummer transform to the asymptotic expansion.
const F11_ASYMPTOTIC_LIMIT: f64 = 40.0;

/// Confluent hypergeometric function 1F1(a; b; z) for z <= 0.
///
/// Branches: direct series for |z| <= 8; Kummer transform
/// e^z 1F1(b-a; b; -z) for 8 < |z| < 40 (single-signed terms when
/// b - a < 0 < 1 + b - a); asymptotic expansion beyond. A non-positive
/// integer b - a short-circuits to the exact terminating polynomial.
pub fn hyp1f1(a: f64, b: f64, z: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && z.is_finite()) {
        return Err(Error::invalid("hyp1f1 arguments must be finite".to_string()));
    }
    if near_nonpositive_integer(b).is_some() {
        return Err(Error::domain(format!("hyp1f1 parameter pole at b={b}")));
    }
    if z > 0.0 {
        return Err(Error::domain("hyp1f1 implemented for z <= 0 only".to_string()));
    }
    if z == 0.0 || a == 0.0 {
        return Ok(1.0);
    }
    if let Some(m) = near_nonpositive_integer(b - a) {
        return Ok(z.exp() * kummer_terminating(m, b, -z));
    }
    let w = -z;
    if w <= F11_DIRECT_LIMIT {
        return kummer_series(a, b, z, 600);
    }
    if w < F11_ASYMPTOTIC_LIMIT {
        return Ok(z.exp() * kummer_series(b - a, b, w, 2000)?);
    }
    if let Some(v) = hyp1f1_asymptotic(a, b, z) {
        return Ok(v);
    }
    if w < 500.0 {
        return Ok(z.exp() * kummer_series(b - a, b, w, 5000)?);
    }
    Err(Error::numeric(format!(
        "hyp1f1 asymptotic expansion failed to converge (a={a}, b={b}, z={z})"
    )))
}

/// Gauss series sum_k (a)_k (b)_k z^k / ((c)_k k!), |z| < 1.
fn gauss_series(a: f64, b: f64, c: f64, z: f64, max_terms: usize) -> Result<f64> {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut small = 0;
    for k in 0..max_terms {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) * z / ((c + kf) * (kf + 1.0));
        sum += term;
        if term.abs() <= f64::EPSILON * sum.abs() {
            small += 1;
            if small >= 2 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::numeric(format!(
        "2F1 series did not converge (a={a}, b={b}, c={c}, z={z})"
    )))
}

/// Terminating Gauss polynomial with first parameter exactly -m.
fn gauss_terminating(m: usize, b: f64, c: f64, z: f64) -> f64 {
    let a = -(m as f64);
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 0..m {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) * z / ((c + kf) * (kf + 1.0));
        sum += term;
    }
    sum
}

/// Switch from the Pfaff-transformed series to the connection formula.
const F21_PFAFF_LIMIT: f64 = 2.0;

/// Gauss hypergeometric function 2F1(a, b; c; z) for z <= 0.
///
/// The Pfaff transform maps z <= 0 to w = z/(z-1) in [0, 1); the series in
/// w is used up to |z| = 2, beyond which the inversion (z -> 1/z)
/// connection formula takes over. When a - b is within 1e-3 of an integer
/// the connection coefficients blow up, so the Pfaff series is kept with a
/// large term budget instead. Terminating parameter combinations are
/// evaluated exactly first.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && c.is_finite() && z.is_finite()) {
        return Err(Error::invalid("hyp2f1 arguments must be finite".to_string()));
    }
    if near_nonpositive_integer(c).is_some() {
        return Err(Error::domain(format!("hyp2f1 parameter pole at c={c}")));
    }
    if z > 0.0 {
        return Err(Error::domain("hyp2f1 implemented for z <= 0 only".to_string()));
    }
    if z == 0.0 || a == 0.0 || b == 0.0 {
        return Ok(1.0);
    }
    if let Some(m) = near_nonpositive_integer(a) {
        return Ok(gauss_terminating(m, b, c, z));
    }
    if let Some(m) = near_nonpositive_integer(b) {
        return Ok(gauss_terminating(m, a, c, z));
    }
    let w = z / (z - 1.0);
    if let Some(m) = near_nonpositive_integer(c - b) {
        return Ok((1.0 - z).powf(-a) * gauss_terminating(m, a, c, w));
    }
    if let Some(m) = near_nonpositive_integer(c - a) {
        return Ok((1.0 - z).powf(-b) * gauss_terminating(m, b, c, w));
    }
    if -z <= F21_PFAFF_LIMIT {
        return Ok((1.0 - z).powf(-a) * gauss_series(a, c - b, c, w, 2000)?);
    }
    let ab = a - b;
    if (ab - ab.round()).abs() > 1e-3 {
        let u = 1.0 / z;
        let coef1 = gamma_unchecked(b - a) * recip_gamma(b) * recip_gamma(c - a);
        let coef2 = gamma_unchecked(a - b) * recip_gamma(a) * recip_gamma(c - b);
        let mut total = 0.0;
        if coef1 != 0.0 {
            total += coef1
                * (-z).powf(-a)
                * gauss_series(a, a - c + 1.0, a - b + 1.0, u, 2000)?;
        }
        if coef2 != 0.0 {
            total += coef2
                * (-z).powf(-b)
                * gauss_series(b, b - c + 1.0, b - a + 1.0, u, 2000)?;
        }
        Ok(gamma_fn(c)? * total)
    } else {
        // Near-integer exponent difference: the connection coefficients
        // cancel badly, fall back to the Pfaff series (rate w < 1).
        Ok((1.0 - z).powf(-a) * gauss_series(a, c - b, c, w, 400_000)?)
    }
}

fn radius_squared(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::invalid("point must have at least one coordinate".to_string()));
    }
    let r2: f64 = x.iter().map(|v| v * v).sum();
    if !r2.is_finite() {
        return Err(Error::invalid("point coordinates must be finite".to_string()));
    }
    Ok(r2)
}

/// (-Delta)^s of the Gaussian e^{-|x|^2} in d = x.len() dimensions:
/// 2^{2s} Gamma(s + d/2)/Gamma(d/2) 1F1(s + d/2; d/2; -|x|^2).
pub fn fraclap_gaussian(x: &[f64], s: f64) -> Result<f64> {
    let r2 = radius_squared(x)?;
    if !(s >= 0.0) {
        return Err(Error::domain("fractional order s must be nonnegative".to_string()));
    }
    let half_d = x.len() as f64 / 2.0;
    let coef = 2.0f64.powf(2.0 * s) * gamma_fn(s + half_d)? / gamma_fn(half_d)?;
    Ok(coef * hyp1f1(s + half_d, half_d, -r2)?)
}

/// Leading large-|x| behaviour of `fraclap_gaussian`:
/// -(2^{2s} sin(pi s)/pi) Gamma(s + d/2) Gamma(1 + s) |x|^{-d-2s}.
pub fn fraclap_gaussian_tail(radius: f64, s: f64, d: usize) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(Error::domain("tail formula needs radius > 0".to_string()));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::domain("tail formula holds for s in (0,1)".to_string()));
    }
    let half_d = d as f64 / 2.0;
    Ok(-(2.0f64.powf(2.0 * s) * (PI * s).sin() / PI)
        * gamma_fn(s + half_d)?
        * gamma_fn(1.0 + s)?
        * radius.powf(-(d as f64) - 2.0 * s))
}

/// (-Delta)^s of (1 + |x|^2)^{-r}:
/// 2^{2s} Gamma(s+r) Gamma(s+d/2)/(Gamma(r) Gamma(d/2)) 2F1(s+r, s+d/2; d/2; -|x|^2).
pub fn fraclap_rational(x: &[f64], s: f64, r: f64) -> Result<f64> {
    let r2 = radius_squared(x)?;
    if !(s >= 0.0) {
        return Err(Error::domain("fractional order s must be nonnegative".to_string()));
    }
    if !(r > 0.0) {
        return Err(Error::domain("decay exponent r must be positive".to_string()));
    }
    let half_d = x.len() as f64 / 2.0;
    let coef = 2.0f64.powf(2.0 * s) * gamma_fn(s + r)? * gamma_fn(s + half_d)?
        / (gamma_fn(r)? * gamma_fn(half_d)?);
    Ok(coef * hyp2f1(s + r, s + half_d, half_d, -r2)?)
}

/// Source term gamma e^{-|x|^2} + (-Delta)^s e^{-|x|^2}.
pub fn rhs_exponential(x: &[f64], s: f64, gamma: f64) -> Result<f64> {
    let r2 = radius_squared(x)?;
    Ok(gamma * (-r2).exp() + fraclap_gaussian(x, s)?)
}

/// Source term gamma (1+|x|^2)^{-r} + (-Delta)^s (1+|x|^2)^{-r}.
pub fn rhs_algebraic(x: &[f64], s: f64, r: f64, gamma: f64) -> Result<f64> {
    let r2 = radius_squared(x)?;
    Ok(gamma * (1.0 + r2).powf(-r) + fraclap_rational(x, s, r)?)
}

/// Singular-integral normalisation constant
/// C_{d,s} = 2^{2s} s Gamma(s + d/2) / (pi^{d/2} Gamma(1 - s)).
pub fn c_ds(s: f64, d: usize) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::domain("C_{d,s} defined for s in (0,1)".to_string()));
    }
    if d == 0 {
        return Err(Error::invalid("dimension must be positive".to_string()));
    }
    let half_d = d as f64 / 2.0;
    Ok(2.0f64.powf(2.0 * s) * s * gamma_fn(s + half_d)? / (PI.powf(half_d) * gamma_fn(1.0 - s)?))
}

/// Integral-representation constant C_s = 2 sin(pi s) / pi.
pub fn c_s(s: f64) -> f64 {
    2.0 * (PI * s).sin() / PI
}

/// Brute-force Fourier-side evaluation of (-Delta)^s u at a point, d = 1:
/// (2/pi) int_0^inf xi^{2s} cos(xi x) [int_0^inf u(y) cos(xi y) dy] dxi
/// for even, decaying u. Validation oracle only: slow by design.
pub fn fraclap_quadrature_1d<F: Fn(f64) -> f64>(u: F, x: f64, s: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::domain("oracle implemented for s in [0,1]".to_string()));
    }
    if !x.is_finite() {
        return Err(Error::invalid("evaluation point must be finite".to_string()));
    }
    let inner_tol = 1e-13;
    let uhat = |xi: f64| -> f64 {
        // Half-period panels; stop after six consecutive negligible panels.
        let h = PI / xi.abs().max(1.0);
        let mut total = 0.0;
        let mut small = 0usize;
        for k in 0..50_000usize {
            let a = k as f64 * h;
            let (v, _) = gk15_panel(&|y: f64| u(y) * (xi * y).cos(), a, a + h);
            total += v;
            if v.abs() < inner_tol {
                small += 1;
                if small >= 6 {
                    return total;
                }
            } else {
                small = 0;
            }
        }
        f64::NAN
    };
    let h = PI / x.abs().max(1.0);
    let mut total = 0.0;
    let mut small = 0usize;
    let mut converged = false;
    for k in 0..20_000usize {
        let a = k as f64 * h;
        let q = adaptive_gk15(
            |xi: f64| xi.abs().powf(2.0 * s) * (xi * x).cos() * uhat(xi),
            a,
            a + h,
            1e-12,
            0.0,
            600,
        )?;
        total += q.value;
        if q.value.abs() < 1e-12 {
            small += 1;
            if small >= 4 {
                converged = true;
                break;
            }
        } else {
            small = 0;
        }
    }
    if !converged || !total.is_finite() {
        return Err(Error::numeric(
            "Fourier-side quadrature failed to decay; integrand unsuitable".to_string(),
        ));
    }
    Ok(total * 2.0 / PI)
}
