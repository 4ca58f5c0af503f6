//! Grid/coefficient transforms on tensor-product mapped Chebyshev grids.
//!
//! Analysis peels off the common decay factor per axis, runs the fast
//! cosine transform fiber by fiber and rescales modes into the orthonormal
//! normalization; synthesis reverses the steps. Conversion to the
//! Fourier-like eigenbasis is an orthogonal contraction per axis. Complex
//! grids are handled by transforming real and imaginary parts separately.

use num_complex::Complex64;

use crate::basis::{McfBasis1d, TensorBasis};
use crate::error::{Error, Result};
use crate::mcf::{self, neumann_factor};
use crate::tensor::{for_each_index, Tensor};

use std::f64::consts::PI;

/// Which basis the coefficients of an [`Expansion`] refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    /// Mapped Chebyshev family.
    Mcf,
    /// Stiffness eigenbasis.
    FourierLike,
}

/// Coefficient tensor together with its basis tag and map scale.
#[derive(Debug, Clone)]
pub struct Expansion<T = f64> {
    pub kind: BasisKind,
    pub nu: f64,
    pub coeffs: Tensor<T>,
}

impl<T: Copy> Expansion<T> {
    pub fn shape(&self) -> &[usize] {
        self.coeffs.shape()
    }

    pub fn rank(&self) -> usize {
        self.coeffs.rank()
    }
}

fn check_grid_shape<T: Copy>(t: &Tensor<T>, basis: &TensorBasis, what: &str) -> Result<()> {
    if t.shape() != basis.shape().as_slice() {
        return Err(Error::invalid(format!(
            "{what} shape {:?} does not match basis shape {:?}",
            t.shape(),
            basis.shape()
        )));
    }
    Ok(())
}

/// Per-mode rescaling between interpolation coefficients and the
/// orthonormal normalization: `u^_n = sqrt(c_n pi / 2) a_n`.
fn mode_scale(n: usize) -> f64 {
    (neumann_factor(n) * PI / 2.0).sqrt()
}

/// Sample a function on the tensor grid of a basis.
///
/// Fails with a data error naming the first offending node if the function
/// produces a non-finite value.
pub fn sample_on_grid<F>(f: F, basis: &TensorBasis) -> Result<Tensor<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    let shape = basis.shape();
    let mut out = Tensor::zeros(&shape);
    let mut bad: Option<(Vec<usize>, Vec<f64>)> = None;
    {
        let data = out.data_mut();
        for_each_index(&shape, |idx, lin| {
            if bad.is_some() {
                return;
            }
            let x = basis.point(idx);
            let v = f(&x);
            if !v.is_finite() {
                bad = Some((idx.to_vec(), x));
                return;
            }
            data[lin] = v;
        });
    }
    if let Some((idx, x)) = bad {
        return Err(Error::data(format!(
            "non-finite sample at node index {idx:?} (coordinates {x:?})"
        )));
    }
    Ok(out)
}

fn analyze_axis(values: &mut Tensor<f64>, axis: usize, basis: &McfBasis1d) -> Result<()> {
    let g = basis.gfactors();
    let transform = basis.transform();
    let m = transform.len() as f64;
    let mut scratch = transform.make_scratch();
    let mut staging = vec![0.0; transform.len()];
    values.map_fibers_in_place(axis, |fiber| {
        for (v, gj) in fiber.iter_mut().zip(g) {
            *v /= gj;
        }
        transform.dct2_with(fiber, &mut staging, &mut scratch)?;
        staging[0] /= m;
        for x in staging.iter_mut().skip(1) {
            *x *= 2.0 / m;
        }
        for (n, (dst, a)) in fiber.iter_mut().zip(&staging).enumerate() {
            *dst = a * mode_scale(n);
        }
        Ok(())
    })
}

fn synthesize_axis(coeffs: &mut Tensor<f64>, axis: usize, basis: &McfBasis1d) -> Result<()> {
    let g = basis.gfactors();
    let transform = basis.transform();
    let mut scratch = transform.make_scratch();
    let mut staging = vec![0.0; transform.len()];
    coeffs.map_fibers_in_place(axis, |fiber| {
        for (n, c) in fiber.iter_mut().enumerate() {
            *c /= mode_scale(n);
        }
        transform.dct3_with(fiber, &mut staging, &mut scratch)?;
        for ((dst, v), gj) in fiber.iter_mut().zip(&staging).zip(g) {
            *dst = v * gj;
        }
        Ok(())
    })
}

/// Mapped Chebyshev coefficients of the grid interpolant.
pub fn interpolate(values: &Tensor<f64>, basis: &TensorBasis) -> Result<Expansion> {
    check_grid_shape(values, basis, "grid")?;
    if let Some(pos) = values.data().iter().position(|v| !v.is_finite()) {
        let mut found = Vec::new();
        for_each_index(values.shape(), |idx, lin| {
            if lin == pos && found.is_empty() {
                found = idx.to_vec();
            }
        });
        return Err(Error::data(format!(
            "non-finite grid value at node index {found:?}"
        )));
    }
    let mut work = values.clone();
    for (axis, b) in basis.dims().iter().enumerate() {
        analyze_axis(&mut work, axis, b)?;
    }
    Ok(Expansion { kind: BasisKind::Mcf, nu: basis.axis(0).nu(), coeffs: work })
}

/// Sample a function and interpolate it in one step.
pub fn interpolate_fn<F>(f: F, basis: &TensorBasis) -> Result<Expansion>
where
    F: Fn(&[f64]) -> f64,
{
    interpolate(&sample_on_grid(f, basis)?, basis)
}

/// Values of an expansion on its native tensor grid.
pub fn synthesize_grid(expansion: &Expansion, basis: &TensorBasis) -> Result<Tensor<f64>> {
    check_grid_shape(&expansion.coeffs, basis, "coefficient")?;
    let mcf = match expansion.kind {
        BasisKind::Mcf => expansion.clone(),
        BasisKind::FourierLike => from_fourier_like(expansion, basis)?,
    };
    let mut work = mcf.coeffs;
    for (axis, b) in basis.dims().iter().enumerate() {
        synthesize_axis(&mut work, axis, b)?;
    }
    Ok(work)
}

/// Convert mapped Chebyshev coefficients to Fourier-like coefficients
/// (`f^ = E^t f~` per axis).
pub fn to_fourier_like(expansion: &Expansion, basis: &TensorBasis) -> Result<Expansion> {
    check_grid_shape(&expansion.coeffs, basis, "coefficient")?;
    if expansion.kind != BasisKind::Mcf {
        return Err(Error::invalid(
            "to_fourier_like expects mapped Chebyshev coefficients".to_string(),
        ));
    }
    let mut work = expansion.coeffs.clone();
    for (axis, b) in basis.dims().iter().enumerate() {
        let e = b.fourier().vectors();
        work.map_fibers(axis, |fiber| Ok(e.tr_matvec(fiber)))?;
    }
    Ok(Expansion { kind: BasisKind::FourierLike, nu: expansion.nu, coeffs: work })
}

/// Convert Fourier-like coefficients back to mapped Chebyshev
/// coefficients (`f~ = E f^` per axis).
pub fn from_fourier_like(expansion: &Expansion, basis: &TensorBasis) -> Result<Expansion> {
    check_grid_shape(&expansion.coeffs, basis, "coefficient")?;
    if expansion.kind != BasisKind::FourierLike {
        return Err(Error::invalid(
            "from_fourier_like expects Fourier-like coefficients".to_string(),
        ));
    }
    let mut work = expansion.coeffs.clone();
    for (axis, b) in basis.dims().iter().enumerate() {
        let e = b.fourier().vectors();
        work.map_fibers(axis, |fiber| Ok(e.matvec(fiber)))?;
    }
    Ok(Expansion { kind: BasisKind::Mcf, nu: expansion.nu, coeffs: work })
}

/// Evaluate an expansion at an arbitrary point by contracting one axis at
/// a time.
pub fn synthesize_at(expansion: &Expansion, point: &[f64], basis: &TensorBasis) -> Result<f64> {
    check_grid_shape(&expansion.coeffs, basis, "coefficient")?;
    if point.len() != basis.dim() {
        return Err(Error::invalid(format!(
            "point dimension {} does not match basis dimension {}",
            point.len(),
            basis.dim()
        )));
    }
    let mut data = expansion.coeffs.data().to_vec();
    let mut shape = expansion.coeffs.shape().to_vec();
    for axis in (0..basis.dim()).rev() {
        let b = basis.axis(axis);
        let values = mcf::mcf_eval_all(b.degree(), point[axis], b.nu())?;
        let weights = match expansion.kind {
            BasisKind::Mcf => values,
            BasisKind::FourierLike => b.fourier().vectors().tr_matvec(&values),
        };
        let n = shape[axis];
        let outer: usize = shape[..axis].iter().product();
        let mut next = vec![0.0; outer];
        for (o, slot) in next.iter_mut().enumerate() {
            let base = o * n;
            let mut acc = 0.0;
            for i in 0..n {
                acc += data[base + i] * weights[i];
            }
            *slot = acc;
        }
        data = next;
        shape.pop();
    }
    Ok(data[0])
}

fn split_complex(t: &Tensor<Complex64>) -> (Tensor<f64>, Tensor<f64>) {
    let re: Vec<f64> = t.data().iter().map(|z| z.re).collect();
    let im: Vec<f64> = t.data().iter().map(|z| z.im).collect();
    (
        Tensor::from_vec(t.shape(), re).unwrap(),
        Tensor::from_vec(t.shape(), im).unwrap(),
    )
}

fn merge_complex(re: &Tensor<f64>, im: &Tensor<f64>) -> Tensor<Complex64> {
    let data: Vec<Complex64> = re
        .data()
        .iter()
        .zip(im.data())
        .map(|(&a, &b)| Complex64::new(a, b))
        .collect();
    Tensor::from_vec(re.shape(), data).unwrap()
}

/// Complex-grid interpolation straight to Fourier-like coefficients.
pub fn interpolate_fourier_like_c(
    values: &Tensor<Complex64>,
    basis: &TensorBasis,
) -> Result<Expansion<Complex64>> {
    check_grid_shape(values, basis, "grid")?;
    let (re, im) = split_complex(values);
    let re_hat = to_fourier_like(&interpolate(&re, basis)?, basis)?;
    let im_hat = to_fourier_like(&interpolate(&im, basis)?, basis)?;
    Ok(Expansion {
        kind: BasisKind::FourierLike,
        nu: re_hat.nu,
        coeffs: merge_complex(&re_hat.coeffs, &im_hat.coeffs),
    })
}

/// Complex synthesis from Fourier-like coefficients to grid values.
pub fn synthesize_grid_c(
    expansion: &Expansion<Complex64>,
    basis: &TensorBasis,
) -> Result<Tensor<Complex64>> {
    check_grid_shape(&expansion.coeffs, basis, "coefficient")?;
    let re: Vec<f64> = expansion.coeffs.data().iter().map(|z| z.re).collect();
    let im: Vec<f64> = expansion.coeffs.data().iter().map(|z| z.im).collect();
    let make = |v: Vec<f64>| -> Result<Tensor<f64>> {
        let t = Tensor::from_vec(expansion.coeffs.shape(), v)?;
        synthesize_grid(
            &Expansion { kind: expansion.kind, nu: expansion.nu, coeffs: t },
            basis,
        )
    };
    let re_grid = make(re)?;
    let im_grid = make(im)?;
    Ok(merge_complex(&re_grid, &im_grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcf::mcf_eval;

    fn basis1(degree: usize, nu: f64) -> TensorBasis {
        TensorBasis::isotropic(1, degree, nu).unwrap()
    }

    #[test]
    fn interpolating_a_basis_function_gives_unit_vector() {
        let nu = 2.5;
        let tb = basis1(10, nu);
        let grid = sample_on_grid(|x| mcf_eval(3, x[0], nu).unwrap(), &tb).unwrap();
        let e = interpolate(&grid, &tb).unwrap();
        for (n, c) in e.coeffs.data().iter().enumerate() {
            let expect = if n == 3 { 1.0 } else { 0.0 };
            assert!((c - expect).abs() < 1e-12, "mode {n}: {c}");
        }
    }

    #[test]
    fn zero_grid_gives_zero_coefficients() {
        let tb = basis1(6, 1.0);
        let e = interpolate(&Tensor::zeros(&tb.shape()), &tb).unwrap();
        assert!(e.coeffs.data().iter().all(|c| *c == 0.0));
    }

    #[test]
    fn non_finite_sample_is_reported() {
        let tb = basis1(4, 1.0);
        let res = sample_on_grid(|x| 1.0 / (x[0] - x[0]), &tb);
        assert!(res.is_err());
        let msg = format!("{}", res.err().unwrap());
        assert!(msg.contains("node index"), "{msg}");
    }

    #[test]
    fn roundtrip_on_grid() {
        let nu = 2.5;
        let tb = basis1(24, nu);
        let grid = sample_on_grid(|x| (-x[0] * x[0] / 4.0).exp() * (1.0 + x[0]), &tb).unwrap();
        let e = interpolate(&grid, &tb).unwrap();
        let back = synthesize_grid(&e, &tb).unwrap();
        for (a, b) in grid.data().iter().zip(back.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn separable_2d_product() {
        // f(x1, x2) = T~_2(x1) T~_4(x2) interpolates to a single tensor mode.
        let nu = 1.0;
        let tb = TensorBasis::isotropic(2, 6, nu).unwrap();
        let grid = sample_on_grid(
            |x| mcf_eval(2, x[0], nu).unwrap() * mcf_eval(4, x[1], nu).unwrap(),
            &tb,
        )
        .unwrap();
        let e = interpolate(&grid, &tb).unwrap();
        for_each_index(e.coeffs.shape(), |idx, lin| {
            let expect = if idx == [2, 4] { 1.0 } else { 0.0 };
            assert!(
                (e.coeffs.data()[lin] - expect).abs() < 1e-12,
                "index {idx:?}"
            );
        });
    }

    #[test]
    fn fourier_like_roundtrip_and_parseval() {
        let tb = TensorBasis::isotropic(2, 8, 2.5).unwrap();
        let grid = sample_on_grid(|x| (-(x[0] * x[0] + x[1] * x[1])).exp(), &tb).unwrap();
        let mcf = interpolate(&grid, &tb).unwrap();
        let fl = to_fourier_like(&mcf, &tb).unwrap();
        let back = from_fourier_like(&fl, &tb).unwrap();
        for (a, b) in mcf.coeffs.data().iter().zip(back.coeffs.data()) {
            assert!((a - b).abs() < 1e-12);
        }
        // Orthogonality preserves the coefficient norm, and quadrature
        // exactness matches it to the discrete L2 norm of the grid.
        let norm_mcf: f64 = mcf.coeffs.data().iter().map(|c| c * c).sum();
        let norm_fl: f64 = fl.coeffs.data().iter().map(|c| c * c).sum();
        assert!((norm_mcf - norm_fl).abs() < 1e-12 * norm_mcf.max(1.0));
        let w = tb.weight_tensor();
        let disc: f64 = w
            .data()
            .iter()
            .zip(grid.data())
            .map(|(wi, v)| wi * v * v)
            .sum();
        assert!((disc - norm_mcf).abs() < 1e-11 * disc.max(1.0));
    }

    #[test]
    fn synthesize_at_matches_grid() {
        let nu = 2.5;
        let tb = basis1(16, nu);
        let grid = sample_on_grid(|x| 1.0 / (1.0 + x[0] * x[0]), &tb).unwrap();
        let e = interpolate(&grid, &tb).unwrap();
        // At grid nodes the interpolant reproduces the samples.
        for (j, &x) in tb.axis(0).nodes().iter().enumerate() {
            let v = synthesize_at(&e, &[x], &tb).unwrap();
            assert!((v - grid.data()[j]).abs() < 1e-11);
        }
        // Fourier-like representation evaluates identically.
        let fl = to_fourier_like(&e, &tb).unwrap();
        for &x in &[-3.2, 0.0, 0.7, 11.0] {
            let a = synthesize_at(&e, &[x], &tb).unwrap();
            let b = synthesize_at(&fl, &[x], &tb).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn axis_contractions_commute() {
        let tb = TensorBasis::isotropic(2, 5, 1.0).unwrap();
        let grid = sample_on_grid(|x| (x[0] - 0.3 * x[1]).sin() * (-x[0] * x[0] - x[1] * x[1]).exp(), &tb)
            .unwrap();
        let e = interpolate(&grid, &tb).unwrap();
        // Convert axis 1 first, then axis 0, by hand; compare to the
        // library order (axis 0 first).
        let mut manual = e.coeffs.clone();
        for axis in [1usize, 0] {
            let em = tb.axis(axis).fourier().vectors();
            manual.map_fibers(axis, |fiber| Ok(em.tr_matvec(fiber))).unwrap();
        }
        let lib = to_fourier_like(&e, &tb).unwrap();
        for (a, b) in manual.data().iter().zip(lib.coeffs.data()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn complex_roundtrip() {
        let tb = basis1(12, 1.0);
        let shape = tb.shape();
        let data: Vec<Complex64> = tb
            .axis(0)
            .nodes()
            .iter()
            .map(|&x| Complex64::new((-x * x).exp(), (x.sin()) * (-x * x / 2.0).exp()))
            .collect();
        let grid = Tensor::from_vec(&shape, data).unwrap();
        let fl = interpolate_fourier_like_c(&grid, &tb).unwrap();
        let back = synthesize_grid_c(&fl, &tb).unwrap();
        for (a, b) in grid.data().iter().zip(back.data()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn shape_mismatch_rejected() {
        let tb = basis1(4, 1.0);
        let wrong = Tensor::zeros(&[3]);
        assert!(interpolate(&wrong, &tb).is_err());
    }
}
