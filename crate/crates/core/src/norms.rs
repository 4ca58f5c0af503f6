//! Discrete error metrics, convergence-order fitting, and the predicted
//! algebraic rates for the two manufactured solution families.

use crate::basis::TensorBasis;
use crate::error::{Error, Result};
use crate::tensor::Tensor;
use crate::transforms::{interpolate, to_fourier_like, BasisKind, Expansion};

/// Maximum absolute difference between two grids.
pub fn error_max(a: &Tensor<f64>, b: &Tensor<f64>) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::invalid("error_max: shape mismatch".to_string()));
    }
    Ok(a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// Weighted discrete L2 distance sqrt(sum w_j |a_j - b_j|^2).
pub fn error_l2(a: &Tensor<f64>, b: &Tensor<f64>, weights: &Tensor<f64>) -> Result<f64> {
    if a.shape() != b.shape() || a.shape() != weights.shape() {
        return Err(Error::invalid("error_l2: shape mismatch".to_string()));
    }
    let mut acc = 0.0;
    for ((x, y), w) in a.data().iter().zip(b.data()).zip(weights.data()) {
        let d = x - y;
        acc += w * d * d;
    }
    Ok(acc.sqrt())
}

/// Discrete H^s distance between a numerical expansion and exact grid
/// samples: (sum_p (1 + |lambda_p|^s) |e^_p|^2)^{1/2} with e^ the
/// Fourier-like coefficients of the interpolated difference.
pub fn error_hs(
    u_num: &Expansion,
    u_exact: &Tensor<f64>,
    s: f64,
    basis: &TensorBasis,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::invalid(format!("error_hs: order {s} outside [0, 1]")));
    }
    if u_num.kind != BasisKind::FourierLike {
        return Err(Error::invalid(
            "error_hs expects Fourier-like numerical coefficients".to_string(),
        ));
    }
    let exact_hat = to_fourier_like(&interpolate(u_exact, basis)?, basis)?;
    if u_num.coeffs.shape() != exact_hat.coeffs.shape() {
        return Err(Error::invalid("error_hs: shape mismatch".to_string()));
    }
    let lambda = basis.eigen_sum_tensor();
    let mut acc = 0.0;
    for ((a, b), lam) in u_num
        .coeffs
        .data()
        .iter()
        .zip(exact_hat.coeffs.data())
        .zip(lambda.data())
    {
        let d = a - b;
        acc += (1.0 + lam.powf(s)) * d * d;
    }
    Ok(acc.sqrt())
}

fn check_fit_input(ns: &[usize], errors: &[f64]) -> Result<()> {
    if ns.len() != errors.len() {
        return Err(Error::invalid("fit: length mismatch".to_string()));
    }
    if ns.len() < 2 {
        return Err(Error::invalid("fit needs at least two data points".to_string()));
    }
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("fit: N values must strictly increase".to_string()));
    }
    if errors.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(Error::invalid("fit: errors must be finite and positive".to_string()));
    }
    Ok(())
}

/// Least-squares slope of log(error) against log(N); negative for a
/// decaying sequence.
pub fn fit_slope(ns: &[usize], errors: &[f64]) -> Result<f64> {
    check_fit_input(ns, errors)?;
    let xs: Vec<f64> = ns.iter().map(|n| (*n as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    Ok(num / den)
}

/// Algebraic convergence order: the negated log-log slope, positive when
/// the errors decay.
pub fn fit_order(ns: &[usize], errors: &[f64]) -> Result<f64> {
    Ok(-fit_slope(ns, errors)?)
}

/// Start index of the default asymptotic window (last half, at least two
/// points).
pub fn asymptotic_window_start(len: usize) -> usize {
    (len / 2).min(len.saturating_sub(2))
}

/// `fit_order` restricted to the default asymptotic window.
pub fn fit_order_asymptotic(ns: &[usize], errors: &[f64]) -> Result<f64> {
    check_fit_input(ns, errors)?;
    let start = asymptotic_window_start(ns.len());
    fit_order(&ns[start..], &errors[start..])
}

/// Orders between consecutive rows: ln(e_k / e_{k+1}) / ln(N_{k+1} / N_k).
pub fn successive_orders(ns: &[usize], errors: &[f64]) -> Result<Vec<f64>> {
    check_fit_input(ns, errors)?;
    Ok(ns
        .windows(2)
        .zip(errors.windows(2))
        .map(|(n, e)| (e[0] / e[1]).ln() / (n[1] as f64 / n[0] as f64).ln())
        .collect())
}

/// Manufactured solution family for rate prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolutionFamily {
    Gaussian,
    Rational { r: f64 },
}

/// Predicted algebraic H^s convergence rate.
pub fn predicted_rate(family: SolutionFamily, s: f64, d: usize) -> f64 {
    let df = d as f64;
    match family {
        SolutionFamily::Gaussian => 2.0 * s + df - 0.5,
        SolutionFamily::Rational { r } => (2.0 * r - s).min(2.0 * s + df) - 0.5,
    }
}

/// Six-significant-digit scientific notation with a signed two-digit
/// exponent, used by all CSV emitters.
pub fn format_sci(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{:.5e}", x);
    let (mantissa, exp) = s.split_once('e').expect("exponent always present");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// One row of a convergence study.
#[derive(Debug, Clone, Copy)]
pub struct ConvergenceRow {
    pub n: usize,
    pub error_max: f64,
    pub error_l2: f64,
    pub error_hs: f64,
}

/// Study metadata echoed in reports.
#[derive(Debug, Clone)]
pub struct ReportMeta {
    pub s: f64,
    pub gamma: f64,
    pub nu: f64,
    pub d: usize,
    pub family: String,
}

/// Fitted orders per metric over the asymptotic window.
#[derive(Debug, Clone, Copy)]
pub struct FittedOrders {
    pub order_max: f64,
    pub order_l2: f64,
    pub order_hs: f64,
}

/// Errors per N with metadata and order fitting.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub meta: ReportMeta,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn new(meta: ReportMeta, rows: Vec<ConvergenceRow>) -> Result<Self> {
        if rows.windows(2).any(|w| w[0].n >= w[1].n) {
            return Err(Error::invalid("report: N values must strictly increase".to_string()));
        }
        for r in &rows {
            for e in [r.error_max, r.error_l2, r.error_hs] {
                if !(e.is_finite() && e > 0.0) {
                    return Err(Error::invalid(format!(
                        "report: error {e} at N={} must be finite and positive",
                        r.n
                    )));
                }
            }
        }
        Ok(Self { meta, rows })
    }

    fn column(&self, pick: fn(&ConvergenceRow) -> f64) -> (Vec<usize>, Vec<f64>) {
        (
            self.rows.iter().map(|r| r.n).collect(),
            self.rows.iter().map(pick).collect(),
        )
    }

    /// Orders fitted over the default asymptotic window.
    pub fn fitted_orders(&self) -> Result<FittedOrders> {
        let (ns, emax) = self.column(|r| r.error_max);
        let (_, el2) = self.column(|r| r.error_l2);
        let (_, ehs) = self.column(|r| r.error_hs);
        Ok(FittedOrders {
            order_max: fit_order_asymptotic(&ns, &emax)?,
            order_l2: fit_order_asymptotic(&ns, &el2)?,
            order_hs: fit_order_asymptotic(&ns, &ehs)?,
        })
    }

    /// CSV body: header row then one line per N.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,error_max,error_l2,error_hs\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.n,
                format_sci(r.error_max),
                format_sci(r.error_l2),
                format_sci(r.error_hs)
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcf::mcf_eval;
    use crate::transforms::{interpolate_fn, sample_on_grid};

    fn basis1(degree: usize, nu: f64) -> TensorBasis {
        TensorBasis::isotropic(1, degree, nu).unwrap()
    }

    #[test]
    fn max_and_l2_basics() {
        let tb = basis1(8, 1.0);
        let w = tb.weight_tensor();
        let a = sample_on_grid(|x| (-x[0] * x[0]).exp(), &tb).unwrap();
        assert_eq!(error_max(&a, &a).unwrap(), 0.0);
        assert_eq!(error_l2(&a, &a, &w).unwrap(), 0.0);
    }

    #[test]
    fn l2_of_unit_basis_function_is_one() {
        // Two grids differing by T~_0 are exactly distance 1 apart.
        let nu = 2.5;
        let tb = basis1(10, nu);
        let w = tb.weight_tensor();
        let zero = Tensor::zeros(&tb.shape());
        let bump = sample_on_grid(|x| mcf_eval(0, x[0], nu).unwrap(), &tb).unwrap();
        let d = error_l2(&bump, &zero, &w).unwrap();
        assert!((d - 1.0).abs() < 1e-13, "distance {d}");
    }

    #[test]
    fn l2_homogeneity() {
        let tb = basis1(6, 1.0);
        let w = tb.weight_tensor();
        let a = sample_on_grid(|x| x[0].sin() * (-x[0] * x[0]).exp(), &tb).unwrap();
        let zero = Tensor::zeros(&tb.shape());
        let base = error_l2(&a, &zero, &w).unwrap();
        let mut scaled = a.clone();
        for v in scaled.data_mut() {
            *v *= -3.5;
        }
        let got = error_l2(&scaled, &zero, &w).unwrap();
        assert!((got - 3.5 * base).abs() < 1e-13 * base);
    }

    #[test]
    fn l2_matches_coefficient_norm() {
        // Parseval: grid-weighted distance equals the coefficient 2-norm of
        // the interpolated difference.
        let tb = basis1(20, 2.5);
        let w = tb.weight_tensor();
        let a = sample_on_grid(|x| (1.0 + x[0]) * (-x[0] * x[0] / 2.0).exp(), &tb).unwrap();
        let b = sample_on_grid(|x| (-x[0] * x[0]).exp(), &tb).unwrap();
        let grid_dist = error_l2(&a, &b, &w).unwrap();
        let mut diff = a.clone();
        for (d, y) in diff.data_mut().iter_mut().zip(b.data()) {
            *d -= y;
        }
        let e = interpolate(&diff, &tb).unwrap();
        let coef_norm: f64 = e.coeffs.data().iter().map(|c| c * c).sum::<f64>().sqrt();
        assert!((grid_dist - coef_norm).abs() < 1e-10 * coef_norm.max(1.0));
    }

    #[test]
    fn hs_norm_properties() {
        let tb = basis1(12, 1.0);
        let exact = sample_on_grid(|x| (-x[0] * x[0]).exp(), &tb).unwrap();
        let u = to_fourier_like(&interpolate(&exact, &tb).unwrap(), &tb).unwrap();
        assert!(error_hs(&u, &exact, 0.5, &tb).unwrap() < 1e-14);

        // s = 0 gives sqrt(2) times the coefficient 2-norm.
        let zero_grid = Tensor::zeros(&tb.shape());
        let norm0 = error_hs(&u, &zero_grid, 0.0, &tb).unwrap();
        let l2: f64 = u.coeffs.data().iter().map(|c| c * c).sum::<f64>().sqrt();
        assert!((norm0 - 2.0f64.sqrt() * l2).abs() < 1e-13 * norm0);

        // Monotone in s when the difference sits on a mode with lambda > 1.
        let eigs = tb.axis(0).eigenvalues();
        let big = eigs.iter().position(|l| *l > 1.0).unwrap();
        let mut single = Expansion {
            kind: BasisKind::FourierLike,
            nu: 1.0,
            coeffs: Tensor::zeros(&tb.shape()),
        };
        single.coeffs.data_mut()[big] = 1.0;
        let lo = error_hs(&single, &zero_grid, 0.2, &tb).unwrap();
        let hi = error_hs(&single, &zero_grid, 0.8, &tb).unwrap();
        assert!(hi > lo);
    }

    #[test]
    fn fit_examples() {
        // Two points: error drops 10x while N doubles.
        let order = fit_order(&[10, 20], &[1e-2, 1e-3]).unwrap();
        assert!((order - 10.0f64.ln() / 2.0f64.ln()).abs() < 1e-12);
        // Exact power law N^{-2}: slope -2.
        let ns = [8usize, 16, 32, 64, 128];
        let errs: Vec<f64> = ns.iter().map(|n| (*n as f64).powi(-2)).collect();
        assert!((fit_slope(&ns, &errs).unwrap() + 2.0).abs() < 1e-12);
        assert!((fit_order(&ns, &errs).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn successive_order_convention() {
        // Table-style convention between consecutive rows.
        let got = successive_orders(&[80, 100], &[6.29e-5, 4.38e-5]).unwrap();
        assert!((got[0] - 1.62).abs() < 0.01, "order {}", got[0]);
    }

    #[test]
    fn fit_scale_invariance() {
        let ns = [10usize, 20, 40, 80];
        let errs = [3.0e-2, 9.0e-3, 2.2e-3, 6.0e-4];
        let base = fit_order(&ns, &errs).unwrap();
        let scaled: Vec<f64> = errs.iter().map(|e| 17.0 * e).collect();
        assert!((fit_order(&ns, &scaled).unwrap() - base).abs() < 1e-12);
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert!(fit_order(&[10], &[1e-2]).is_err());
        assert!(fit_order(&[10, 10], &[1e-2, 1e-3]).is_err());
        assert!(fit_order(&[10, 20], &[1e-2, -1.0]).is_err());
    }

    #[test]
    fn window_selection() {
        assert_eq!(asymptotic_window_start(2), 0);
        assert_eq!(asymptotic_window_start(4), 2);
        assert_eq!(asymptotic_window_start(5), 2);
        assert_eq!(asymptotic_window_start(8), 4);
    }

    #[test]
    fn predicted_rates() {
        assert!((predicted_rate(SolutionFamily::Gaussian, 0.3, 1) - 1.1).abs() < 1e-14);
        assert!(
            (predicted_rate(SolutionFamily::Rational { r: 2.3 }, 0.7, 3) - 3.4).abs() < 1e-14
        );
        assert!(
            (predicted_rate(SolutionFamily::Rational { r: 2.3 }, 0.3, 3) - 3.1).abs() < 1e-14
        );
        // Rational rate is capped by the Gaussian rate, with equality iff
        // 2r - s >= 2s + d.
        for &(r, s, d) in &[(2.3, 0.7, 1usize), (0.9, 0.3, 2), (5.0, 0.5, 1)] {
            let rat = predicted_rate(SolutionFamily::Rational { r }, s, d);
            let gau = predicted_rate(SolutionFamily::Gaussian, s, d);
            assert!(rat <= gau + 1e-14);
            if 2.0 * r - s >= 2.0 * s + d as f64 {
                assert!((rat - gau).abs() < 1e-14);
            } else {
                assert!(rat < gau);
            }
        }
    }

    #[test]
    fn scientific_formatting() {
        assert_eq!(format_sci(6.29e-5), "6.29000e-05");
        assert_eq!(format_sci(0.0), "0.00000e+00");
        assert_eq!(format_sci(1.0), "1.00000e+00");
        assert_eq!(format_sci(-2.345678e11), "-2.34568e+11");
    }

    #[test]
    fn report_csv_layout() {
        let meta = ReportMeta {
            s: 0.5,
            gamma: 1.0,
            nu: 2.5,
            d: 1,
            family: "gaussian".to_string(),
        };
        let rows = vec![
            ConvergenceRow { n: 16, error_max: 1e-2, error_l2: 2e-2, error_hs: 3e-2 },
            ConvergenceRow { n: 32, error_max: 1e-3, error_l2: 2e-3, error_hs: 3e-3 },
        ];
        let report = ConvergenceReport::new(meta, rows).unwrap();
        let csv = report.to_csv();
        assert_eq!(
            csv,
            "N,error_max,error_l2,error_hs\n\
             16,1.00000e-02,2.00000e-02,3.00000e-02\n\
             32,1.00000e-03,2.00000e-03,3.00000e-03\n"
        );
        let orders = report.fitted_orders().unwrap();
        assert!((orders.order_l2 - 10.0f64.ln() / 2.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn report_rejects_disorder() {
        let meta = ReportMeta {
            s: 0.5,
            gamma: 1.0,
            nu: 2.5,
            d: 1,
            family: "gaussian".to_string(),
        };
        let rows = vec![
            ConvergenceRow { n: 32, error_max: 1e-2, error_l2: 2e-2, error_hs: 3e-2 },
            ConvergenceRow { n: 16, error_max: 1e-3, error_l2: 2e-3, error_hs: 3e-3 },
        ];
        assert!(ConvergenceReport::new(meta, rows).is_err());
    }

    #[test]
    fn solver_convergence_is_monotone_and_positive_order() {
        // Small end-to-end check that the metrics wire up with the solver:
        // Gaussian manufactured solution in d = 1.
        let (s, gamma, nu) = (0.5, 1.0, 2.5);
        let mut rows = Vec::new();
        for &n in &[16usize, 32, 64] {
            let tb = basis1(n, nu);
            let u = crate::solver::solve_fractional_fn(
                |x: &[f64]| crate::special::rhs_exponential(x, s, gamma).unwrap(),
                s,
                gamma,
                &tb,
            )
            .unwrap();
            let exact = sample_on_grid(|x| (-x[0] * x[0]).exp(), &tb).unwrap();
            let hs = error_hs(&u, &exact, s, &tb).unwrap();
            rows.push((n, hs));
        }
        assert!(rows[1].1 < rows[0].1 && rows[2].1 < rows[1].1, "{rows:?}");
        let ns: Vec<usize> = rows.iter().map(|r| r.0).collect();
        let errs: Vec<f64> = rows.iter().map(|r| r.1).collect();
        assert!(fit_order(&ns, &errs).unwrap() > 0.5);
    }

    #[test]
    fn interpolation_error_check() {
        let tb = basis1(40, 2.5);
        let f = |x: &[f64]| (1.0 + x[0]) * (-x[0] * x[0] / 2.0).exp();
        let e = interpolate_fn(f, &tb).unwrap();
        // Tail coefficients decay.
        let head: f64 = e.coeffs.data()[..10].iter().map(|c| c.abs()).sum();
        let tail: f64 = e.coeffs.data()[31..].iter().map(|c| c.abs()).sum();
        assert!(tail < 1e-3 * head, "head {head}, tail {tail}");
    }
}
