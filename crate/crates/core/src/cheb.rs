//! Chebyshev polynomials on the reference interval: Gauss quadrature,
//! Clenshaw evaluation, and value/coefficient transforms.
//!
//! The node convention is fixed throughout the crate: `M` Chebyshev-Gauss
//! points `y_j = cos((2j+1)pi/(2M))`, `j = 0..M-1`, listed in descending
//! order, all carrying the weight `pi/M`. The transforms below are the
//! matching type-II/type-III discrete cosine transforms; a fast FFT-backed
//! path and a direct quadratic reference path are both provided and must
//! agree to near machine precision.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use crate::error::{Error, Result};

/// Chebyshev-Gauss quadrature rule on (-1, 1) with weight (1-y^2)^(-1/2).
#[derive(Debug, Clone)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(Error::invalid(
                "quadrature rule needs equally many nodes and weights, at least one each",
            ));
        }
        Ok(GaussRule { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes in descending order.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Uniform weights `pi/M`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Chebyshev-Gauss rule with `num_points` nodes (the zeros of `T_M`).
///
/// Exact for integrands `p(y)(1-y^2)^(-1/2)` with `deg p <= 2M-1`.
pub fn chebyshev_gauss(num_points: usize) -> Result<GaussRule> {
    if num_points == 0 {
        return Err(Error::invalid("chebyshev_gauss requires at least one node"));
    }
    let m = num_points as f64;
    let nodes: Vec<f64> = (0..num_points)
        .map(|j| ((2 * j + 1) as f64 * PI / (2.0 * m)).cos())
        .collect();
    let weights = vec![PI / m; num_points];
    Ok(GaussRule { nodes, weights })
}

/// Finite Chebyshev series `sum_n coeffs[n] T_n(y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebSeries {
    pub coeffs: Vec<f64>,
}

impl ChebSeries {
    pub fn new(coeffs: Vec<f64>) -> Self {
        ChebSeries { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }
}

/// Clenshaw evaluation of a Chebyshev series at `y` in [-1, 1].
pub fn cheb_eval(series: &ChebSeries, y: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&y) {
        return Err(Error::domain(format!(
            "cheb_eval argument {y} outside [-1, 1]"
        )));
    }
    let a = &series.coeffs;
    if a.is_empty() {
        return Ok(0.0);
    }
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for k in (1..a.len()).rev() {
        let b = a[k] + 2.0 * y * b1 - b2;
        b2 = b1;
        b1 = b;
    }
    Ok(a[0] + y * b1 - b2)
}

/// Direct type-II DCT: `X_n = sum_j v_j cos(pi n (2j+1) / (2M))`.
///
/// Quadratic-cost reference implementation; the angle index is reduced
/// modulo the period to keep large products accurate.
pub fn dct2_direct(values: &[f64]) -> Vec<f64> {
    let m = values.len();
    let period = 4 * m as u64;
    let mut out = vec![0.0; m];
    for (n, xn) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (j, v) in values.iter().enumerate() {
            let idx = (n as u64 * (2 * j as u64 + 1)) % period;
            acc += v * (PI * idx as f64 / (2.0 * m as f64)).cos();
        }
        *xn = acc;
    }
    out
}

/// Direct type-III DCT: `y_j = sum_n c_n cos(pi n (2j+1) / (2M))`.
pub fn dct3_direct(coeffs: &[f64]) -> Vec<f64> {
    let m = coeffs.len();
    let period = 4 * m as u64;
    let mut out = vec![0.0; m];
    for (j, yj) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (n, c) in coeffs.iter().enumerate() {
            let idx = (n as u64 * (2 * j as u64 + 1)) % period;
            acc += c * (PI * idx as f64 / (2.0 * m as f64)).cos();
        }
        *yj = acc;
    }
    out
}

/// Planned cosine transforms of a fixed size.
///
/// Wraps real-input FFT plans (any length) behind the even/odd reordering
/// that turns a length-`M` DCT into a length-`M` FFT, so repeated calls on
/// grids of the same size run in `O(M log M)`.
#[derive(Clone)]
pub struct ChebTransform {
    len: usize,
    fwd: Arc<dyn RealToComplex<f64>>,
    inv: Arc<dyn ComplexToReal<f64>>,
    // exp(-i pi n / 2M) for n <= M/2; the upper output half mirrors through
    // X_{M-n} = -Im(tw_n V_n) because the FFT input is real.
    twiddle: Vec<Complex64>,
}

impl std::fmt::Debug for ChebTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChebTransform").field("len", &self.len).finish()
    }
}

/// Reusable work buffers for [`ChebTransform`]; one per calling thread.
#[derive(Clone, Debug)]
pub struct ChebScratch {
    real: Vec<f64>,
    spec: Vec<Complex64>,
    fft: Vec<Complex64>,
}

impl ChebTransform {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::invalid("ChebTransform requires positive length"));
        }
        let mut planner = RealFftPlanner::new();
        let fwd = planner.plan_fft_forward(len);
        let inv = planner.plan_fft_inverse(len);
        let twiddle = (0..=len / 2)
            .map(|n| Complex64::from_polar(1.0, -PI * n as f64 / (2.0 * len as f64)))
            .collect();
        Ok(ChebTransform { len, fwd, inv, twiddle })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Work buffers sized for this transform, reusable across calls.
    pub fn make_scratch(&self) -> ChebScratch {
        let fft_len = self
            .fwd
            .get_scratch_len()
            .max(self.inv.get_scratch_len());
        ChebScratch {
            real: vec![0.0; self.len],
            spec: vec![Complex64::new(0.0, 0.0); self.len / 2 + 1],
            fft: vec![Complex64::new(0.0, 0.0); fft_len],
        }
    }

    fn check_args(&self, input: usize, output: usize, op: &str) -> Result<()> {
        if input != self.len || output != self.len {
            return Err(Error::invalid(format!(
                "{op} expects {} values, got {input} in / {output} out",
                self.len
            )));
        }
        Ok(())
    }

    /// Fast type-II DCT (same convention as [`dct2_direct`]).
    pub fn dct2(&self, values: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len];
        let mut scratch = self.make_scratch();
        self.dct2_with(values, &mut out, &mut scratch)?;
        Ok(out)
    }

    /// [`ChebTransform::dct2`] into caller-provided buffers.
    pub fn dct2_with(
        &self,
        values: &[f64],
        out: &mut [f64],
        scratch: &mut ChebScratch,
    ) -> Result<()> {
        let m = self.len;
        self.check_args(values.len(), out.len(), "dct2")?;
        // Even-indexed samples ascending, then odd-indexed descending.
        let buf = &mut scratch.real;
        for k in 0..m.div_ceil(2) {
            buf[k] = values[2 * k];
        }
        for k in 0..m / 2 {
            buf[m - 1 - k] = values[2 * k + 1];
        }
        self.fwd
            .process_with_scratch(buf, &mut scratch.spec, &mut scratch.fft)
            .map_err(|e| Error::numeric(format!("real FFT failed: {e}")))?;
        // The input is real, so each spectrum bin yields both output ends:
        // X_n = Re(tw_n V_n) and X_{M-n} = -Im(tw_n V_n).
        let half = m / 2;
        for n in 0..=half {
            let z = self.twiddle[n] * scratch.spec[n];
            out[n] = z.re;
            let mirror = m - n;
            if n >= 1 && mirror > half {
                out[mirror] = -z.im;
            }
        }
        Ok(())
    }

    /// Fast type-III DCT (same convention as [`dct3_direct`]).
    pub fn dct3(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len];
        let mut scratch = self.make_scratch();
        self.dct3_with(coeffs, &mut out, &mut scratch)?;
        Ok(out)
    }

    /// [`ChebTransform::dct3`] into caller-provided buffers.
    pub fn dct3_with(
        &self,
        coeffs: &[f64],
        out: &mut [f64],
        scratch: &mut ChebScratch,
    ) -> Result<()> {
        let m = self.len;
        self.check_args(coeffs.len(), out.len(), "dct3")?;
        // Rebuild the half spectrum of the reordered sequence and invert it.
        let mf = m as f64;
        let spec = &mut scratch.spec;
        spec[0] = Complex64::new(mf * coeffs[0], 0.0);
        for n in 1..=m / 2 {
            let xn = 0.5 * mf * coeffs[n];
            let xmn = 0.5 * mf * coeffs[m - n];
            spec[n] = self.twiddle[n].conj() * Complex64::new(xn, -xmn);
        }
        if m.is_multiple_of(2) {
            // Nyquist bin is real analytically; drop the rounding residue.
            spec[m / 2].im = 0.0;
        }
        self.inv
            .process_with_scratch(spec, &mut scratch.real, &mut scratch.fft)
            .map_err(|e| Error::numeric(format!("real inverse FFT failed: {e}")))?;
        let buf = &scratch.real;
        for k in 0..m.div_ceil(2) {
            out[2 * k] = buf[k] / mf;
        }
        for k in 0..m / 2 {
            out[2 * k + 1] = buf[m - 1 - k] / mf;
        }
        Ok(())
    }

    /// Chebyshev coefficients of the interpolant through values at the
    /// Gauss nodes of the same size: `a_n = (2 / (c_n M)) X_n` with
    /// `c_0 = 2`, `c_n = 1` otherwise.
    pub fn values_to_coeffs(&self, values: &[f64]) -> Result<ChebSeries> {
        let mut x = self.dct2(values)?;
        let m = self.len as f64;
        x[0] /= m;
        for xn in x.iter_mut().skip(1) {
            *xn *= 2.0 / m;
        }
        Ok(ChebSeries::new(x))
    }

    /// Values of a Chebyshev series at the Gauss nodes of the same size.
    pub fn coeffs_to_values(&self, series: &ChebSeries) -> Result<Vec<f64>> {
        if series.coeffs.len() != self.len {
            return Err(Error::invalid(format!(
                "coeffs_to_values expects {} coefficients, got {}",
                self.len,
                series.coeffs.len()
            )));
        }
        self.dct3(&series.coeffs)
    }
}

/// One-shot convenience wrapper around [`ChebTransform::values_to_coeffs`].
pub fn values_to_coeffs(values: &[f64], rule: &GaussRule) -> Result<ChebSeries> {
    if values.len() != rule.len() {
        return Err(Error::invalid(format!(
            "values length {} does not match rule size {}",
            values.len(),
            rule.len()
        )));
    }
    ChebTransform::new(values.len())?.values_to_coeffs(values)
}

/// One-shot convenience wrapper around [`ChebTransform::coeffs_to_values`].
pub fn coeffs_to_values(series: &ChebSeries, rule: &GaussRule) -> Result<Vec<f64>> {
    if series.coeffs.len() != rule.len() {
        return Err(Error::invalid(format!(
            "series length {} does not match rule size {}",
            series.coeffs.len(),
            rule.len()
        )));
    }
    ChebTransform::new(rule.len())?.coeffs_to_values(series)
}
