//! Fourth-order time-splitting integrator for the fractional nonlinear
//! Schrodinger equation i psi_t = (1/2)(-Delta)^s psi + gamma |psi|^{2p} psi.
//!
//! Both split flows are exact: the nonlinear part is a pointwise phase
//! rotation, the kinetic part a diagonal phase in the Fourier-like basis.
//! Every stage is an isometry of the discrete L2 norm, so mass is
//! conserved to transform roundoff.

// The splitting weights quote their full analytic precision.
#![allow(clippy::excessive_precision)]

use num_complex::Complex64;

use crate::basis::TensorBasis;
use crate::error::{Error, Result};
use crate::tensor::{for_each_index, Tensor};
use crate::transforms::{interpolate_fourier_like_c, synthesize_grid_c, BasisKind, Expansion};

/// Splitting weights of the 7-stage fourth-order composition, derived from
/// the classical triple-jump coefficients x1 = 1/(2 - 2^(1/3)) and
/// x0 = -2^(1/3) x1: w1 = x1/4, w2 = x1/2, w3 = (x0 + x1)/4, w4 = x0/2.
/// They satisfy 2(w1 + w3) = 2 w2 + w4 = 1/2.
pub const TS4_W1: f64 = 0.33780179798991440851;
pub const TS4_W2: f64 = 0.67560359597982881702;
pub const TS4_W3: f64 = -0.08780179798991440851;
pub const TS4_W4: f64 = -0.85120719195965763405;

/// Simulation parameters.
#[derive(Debug, Clone)]
pub struct FnlsConfig {
    pub s: f64,
    pub gamma: f64,
    /// Nonlinearity exponent: the |psi|^{2p} power (cubic is p = 1).
    pub p: u32,
    pub dt: f64,
    pub t_final: f64,
    pub dim: usize,
    pub degree: usize,
    pub nu: f64,
    /// Record a snapshot every this many steps; 0 keeps endpoints only.
    pub snapshot_stride: usize,
}

impl FnlsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.s > 0.0 && self.s <= 1.0) {
            return Err(Error::invalid(format!("s = {} outside (0, 1]", self.s)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt must be positive".to_string()));
        }
        if !(self.t_final >= self.dt) {
            return Err(Error::invalid("final time must be at least one step".to_string()));
        }
        if !self.gamma.is_finite() {
            return Err(Error::invalid("gamma must be finite".to_string()));
        }
        if self.p == 0 {
            return Err(Error::invalid("nonlinearity exponent p must be >= 1".to_string()));
        }
        if self.dim == 0 || self.degree == 0 {
            return Err(Error::invalid("dimension and degree must be positive".to_string()));
        }
        if !(self.nu > 0.0) {
            return Err(Error::invalid("map scale nu must be positive".to_string()));
        }
        Ok(())
    }
}

/// Complex grid values at the tensor nodes together with the time stamp.
#[derive(Debug, Clone)]
pub struct WaveState {
    pub time: f64,
    pub field: Tensor<Complex64>,
}

/// Discrete mass sum_j |psi_j|^2 omega_j.
pub fn discrete_mass(field: &Tensor<Complex64>, basis: &TensorBasis) -> f64 {
    let w = basis.weight_tensor();
    field
        .data()
        .iter()
        .zip(w.data())
        .map(|(z, wi)| z.norm_sqr() * wi)
        .sum()
}

/// Exact kinetic sub-flow: mode k picks up the phase
/// exp(-i weight |lambda_k|^s dt).
pub fn kinetic_propagate(
    state: &WaveState,
    weight: f64,
    dt: f64,
    s: f64,
    basis: &TensorBasis,
) -> Result<WaveState> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::invalid(format!("s = {s} outside (0, 1]")));
    }
    let mut hat = interpolate_fourier_like_c(&state.field, basis)?;
    let lambda = basis.eigen_sum_tensor();
    for (c, lam) in hat.coeffs.data_mut().iter_mut().zip(lambda.data()) {
        *c *= Complex64::cis(-weight * lam.powf(s) * dt);
    }
    Ok(WaveState { time: state.time, field: synthesize_grid_c(&hat, basis)? })
}

/// Exact nonlinear sub-flow: pointwise phase rotation
/// psi_j <- exp(-i 2 weight gamma dt |psi_j|^{2p}) psi_j.
pub fn nonlinear_phase(
    state: &WaveState,
    weight: f64,
    dt: f64,
    gamma: f64,
    p: u32,
) -> WaveState {
    let mut field = state.field.clone();
    for z in field.data_mut() {
        let amp = z.norm_sqr().powi(p as i32);
        *z *= Complex64::cis(-2.0 * weight * gamma * dt * amp);
    }
    WaveState { time: state.time, field }
}

/// One step of the 7-stage fourth-order splitting. Accepts negative `dt`
/// (the composition is symmetric, so reversing the step undoes it).
pub fn ts4_step(
    state: &WaveState,
    dt: f64,
    cfg: &FnlsConfig,
    basis: &TensorBasis,
) -> Result<WaveState> {
    let mut w = nonlinear_phase(state, TS4_W1, dt, cfg.gamma, cfg.p);
    w = kinetic_propagate(&w, TS4_W2, dt, cfg.s, basis)?;
    w = nonlinear_phase(&w, TS4_W3, dt, cfg.gamma, cfg.p);
    w = kinetic_propagate(&w, TS4_W4, dt, cfg.s, basis)?;
    w = nonlinear_phase(&w, TS4_W3, dt, cfg.gamma, cfg.p);
    w = kinetic_propagate(&w, TS4_W2, dt, cfg.s, basis)?;
    w = nonlinear_phase(&w, TS4_W1, dt, cfg.gamma, cfg.p);
    w.time = state.time + dt;
    Ok(w)
}

/// One mass-trace record.
#[derive(Debug, Clone, Copy)]
pub struct MassSample {
    pub step: usize,
    pub time: f64,
    pub mass: f64,
}

/// Stored field snapshot.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub field: Tensor<Complex64>,
}

/// Diagnostic emitted when the run terminates early.
#[derive(Debug, Clone, Copy)]
pub struct BlowUpReport {
    pub step: usize,
    pub time: f64,
    pub max_magnitude: f64,
}

/// Full simulation output.
#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub basis: TensorBasis,
    pub snapshots: Vec<Snapshot>,
    pub mass_trace: Vec<MassSample>,
    pub blow_up: Option<BlowUpReport>,
    pub final_state: WaveState,
    pub steps_taken: usize,
    pub steps_planned: usize,
    /// True when T/dt was not an integer and the step count was rounded.
    pub steps_rounded: bool,
}

fn max_magnitude(field: &Tensor<Complex64>) -> f64 {
    // Any non-finite entry must poison the result; f64::max would drop NaN.
    let mut worst = 0.0f64;
    for z in field.data() {
        let n = z.norm();
        if !n.is_finite() {
            return f64::INFINITY;
        }
        worst = worst.max(n);
    }
    worst
}

/// Sample the initial profile and march to the final time, recording the
/// mass every step. A non-finite field or a 1e6-fold amplitude growth
/// terminates the run with a blow-up report instead of an error.
pub fn run_simulation<F>(cfg: &FnlsConfig, psi0: F) -> Result<SimulationOutput>
where
    F: Fn(&[f64]) -> Complex64,
{
    cfg.validate()?;
    let basis = TensorBasis::isotropic(cfg.dim, cfg.degree, cfg.nu)?;
    let shape = basis.shape();
    let mut field = Tensor::filled(&shape, Complex64::new(0.0, 0.0));
    let mut bad: Option<Vec<usize>> = None;
    {
        let data = field.data_mut();
        for_each_index(&shape, |idx, lin| {
            if bad.is_some() {
                return;
            }
            let v = psi0(&basis.point(idx));
            if !(v.re.is_finite() && v.im.is_finite()) {
                bad = Some(idx.to_vec());
                return;
            }
            data[lin] = v;
        });
    }
    if let Some(idx) = bad {
        return Err(Error::data(format!(
            "non-finite initial value at node index {idx:?}"
        )));
    }

    let ratio = cfg.t_final / cfg.dt;
    let steps_planned = ratio.round().max(1.0) as usize;
    let steps_rounded = (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0);

    let initial_max = max_magnitude(&field);
    let growth_limit = 1e6 * initial_max;
    let mut state = WaveState { time: 0.0, field };
    let mut mass_trace = vec![MassSample {
        step: 0,
        time: 0.0,
        mass: discrete_mass(&state.field, &basis),
    }];
    let mut snapshots = vec![Snapshot { step: 0, time: 0.0, field: state.field.clone() }];
    let mut blow_up = None;
    let mut steps_taken = 0;

    for step in 1..=steps_planned {
        // A non-finite field is rejected by the transform layer inside the
        // step; surface that as a blow-up at this step, not as an error.
        state = match ts4_step(&state, cfg.dt, cfg, &basis) {
            Ok(next) => next,
            Err(Error::Data(_)) => {
                steps_taken = step;
                let time = state.time + cfg.dt;
                mass_trace.push(MassSample { step, time, mass: f64::NAN });
                blow_up = Some(BlowUpReport {
                    step,
                    time,
                    max_magnitude: f64::INFINITY,
                });
                break;
            }
            Err(e) => return Err(e),
        };
        steps_taken = step;
        let m = max_magnitude(&state.field);
        mass_trace.push(MassSample {
            step,
            time: state.time,
            mass: discrete_mass(&state.field, &basis),
        });
        if !m.is_finite() || m > growth_limit {
            blow_up = Some(BlowUpReport { step, time: state.time, max_magnitude: m });
            break;
        }
        if cfg.snapshot_stride > 0 && step % cfg.snapshot_stride == 0 && step != steps_planned {
            snapshots.push(Snapshot { step, time: state.time, field: state.field.clone() });
        }
    }
    snapshots.push(Snapshot {
        step: steps_taken,
        time: state.time,
        field: state.field.clone(),
    });

    Ok(SimulationOutput {
        basis,
        snapshots,
        mass_trace,
        blow_up,
        final_state: state,
        steps_taken,
        steps_planned,
        steps_rounded,
    })
}

/// Exact flow of the linear equation (gamma = 0) from Fourier-like
/// coefficients of the initial state; reference for tests.
pub fn linear_exact_flow(
    psi0_hat: &Expansion<Complex64>,
    t: f64,
    s: f64,
    basis: &TensorBasis,
) -> Result<Expansion<Complex64>> {
    if psi0_hat.kind != BasisKind::FourierLike {
        return Err(Error::invalid("expected Fourier-like coefficients".to_string()));
    }
    let lambda = basis.eigen_sum_tensor();
    let mut out = psi0_hat.clone();
    for (c, lam) in out.coeffs.data_mut().iter_mut().zip(lambda.data()) {
        *c *= Complex64::cis(-0.5 * lam.powf(s) * t);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sech(x: f64) -> f64 {
        1.0 / x.cosh()
    }

    fn test_config(degree: usize, dt: f64, t_final: f64, gamma: f64, s: f64) -> FnlsConfig {
        FnlsConfig {
            s,
            gamma,
            p: 1,
            dt,
            t_final,
            dim: 1,
            degree,
            nu: 2.0,
            snapshot_stride: 0,
        }
    }

    fn soliton_like(x: &[f64]) -> Complex64 {
        Complex64::cis(x[0]) * sech(x[0])
    }

    fn sample(basis: &TensorBasis) -> Tensor<Complex64> {
        let shape = basis.shape();
        let mut field = Tensor::filled(&shape, Complex64::new(0.0, 0.0));
        let data = field.data_mut();
        for_each_index(&shape, |idx, lin| {
            data[lin] = soliton_like(&basis.point(idx));
        });
        field
    }

    #[test]
    fn weight_identities() {
        assert!((2.0 * (TS4_W1 + TS4_W3) - 0.5).abs() < 1e-15);
        assert!((2.0 * TS4_W2 + TS4_W4 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_weight_kinetic_is_identity() {
        let basis = TensorBasis::isotropic(1, 24, 2.0).unwrap();
        let state = WaveState { time: 0.0, field: sample(&basis) };
        let out = kinetic_propagate(&state, 0.0, 0.1, 0.7, &basis).unwrap();
        for (a, b) in out.field.data().iter().zip(state.field.data()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn single_mode_phase_rotation() {
        let basis = TensorBasis::isotropic(1, 12, 1.0).unwrap();
        let q = 5usize;
        let mut hat = Expansion {
            kind: BasisKind::FourierLike,
            nu: 1.0,
            coeffs: Tensor::filled(&basis.shape(), Complex64::new(0.0, 0.0)),
        };
        hat.coeffs.data_mut()[q] = Complex64::new(1.0, 0.0);
        let grid = synthesize_grid_c(&hat, &basis).unwrap();
        let state = WaveState { time: 0.0, field: grid };
        let (weight, dt, s) = (0.3, 0.05, 0.6);
        let out = kinetic_propagate(&state, weight, dt, s, &basis).unwrap();
        let hat_out = interpolate_fourier_like_c(&out.field, &basis).unwrap();
        let lam = basis.axis(0).eigenvalues()[q];
        let expect = Complex64::cis(-weight * lam.powf(s) * dt);
        for (p, c) in hat_out.coeffs.data().iter().enumerate() {
            if p == q {
                assert!((c - expect).norm() < 1e-12);
                assert!((c.norm() - 1.0).abs() < 1e-12);
            } else {
                assert!(c.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn kinetic_preserves_mass() {
        let basis = TensorBasis::isotropic(1, 32, 2.0).unwrap();
        let state = WaveState { time: 0.0, field: sample(&basis) };
        let before = discrete_mass(&state.field, &basis);
        let out = kinetic_propagate(&state, 0.9, 0.2, 0.5, &basis).unwrap();
        let after = discrete_mass(&out.field, &basis);
        assert!((before - after).abs() < 1e-12 * before);
    }

    #[test]
    fn nonlinear_phase_properties() {
        let basis = TensorBasis::isotropic(1, 16, 2.0).unwrap();
        let state = WaveState { time: 0.0, field: sample(&basis) };
        // gamma = 0 is the exact identity.
        let id = nonlinear_phase(&state, TS4_W1, 0.1, 0.0, 1);
        for (a, b) in id.field.data().iter().zip(state.field.data()) {
            assert_eq!(a, b);
        }
        // Pure phase: magnitudes unchanged.
        let rotated = nonlinear_phase(&state, TS4_W1, 0.1, -1.0, 1);
        for (a, b) in rotated.field.data().iter().zip(state.field.data()) {
            assert!((a.norm() - b.norm()).abs() < 1e-15);
        }
        // Two half-weight applications compose into one full-weight one.
        let half = nonlinear_phase(
            &nonlinear_phase(&state, 0.5 * TS4_W2, 0.1, -1.0, 1),
            0.5 * TS4_W2,
            0.1,
            -1.0,
            1,
        );
        let full = nonlinear_phase(&state, TS4_W2, 0.1, -1.0, 1);
        for (a, b) in half.field.data().iter().zip(full.field.data()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn ts4_conserves_mass_over_many_steps() {
        let basis = TensorBasis::isotropic(1, 32, 2.0).unwrap();
        let cfg = test_config(32, 0.01, 3.0, -1.0, 0.7);
        let mut state = WaveState { time: 0.0, field: sample(&basis) };
        let m0 = discrete_mass(&state.field, &basis);
        for _ in 0..300 {
            state = ts4_step(&state, cfg.dt, &cfg, &basis).unwrap();
        }
        let m1 = discrete_mass(&state.field, &basis);
        assert!(((m1 - m0) / m0).abs() < 1e-11, "drift {}", (m1 - m0) / m0);
    }

    #[test]
    fn time_reversibility() {
        let basis = TensorBasis::isotropic(1, 24, 2.0).unwrap();
        let cfg = test_config(24, 0.05, 1.0, -1.0, 0.6);
        let state = WaveState { time: 0.0, field: sample(&basis) };
        let fwd = ts4_step(&state, cfg.dt, &cfg, &basis).unwrap();
        let back = ts4_step(&fwd, -cfg.dt, &cfg, &basis).unwrap();
        let mut worst = 0.0f64;
        for (a, b) in back.field.data().iter().zip(state.field.data()) {
            worst = worst.max((a - b).norm());
        }
        assert!(worst < 1e-9, "reversal error {worst}");
        assert!((back.time - state.time).abs() < 1e-14);
    }

    #[test]
    fn linear_run_matches_exact_flow_independent_of_dt() {
        let degree = 24;
        for &dt in &[0.1, 0.025] {
            let cfg = test_config(degree, dt, 1.0, 0.0, 0.7);
            let out = run_simulation(&cfg, soliton_like).unwrap();
            let basis = &out.basis;
            let psi0 = sample(basis);
            let hat0 = interpolate_fourier_like_c(&psi0, basis).unwrap();
            let exact_hat = linear_exact_flow(&hat0, 1.0, cfg.s, basis).unwrap();
            let exact = synthesize_grid_c(&exact_hat, basis).unwrap();
            let mut worst = 0.0f64;
            for (a, b) in out.final_state.field.data().iter().zip(exact.data()) {
                worst = worst.max((a - b).norm());
            }
            assert!(worst < 1e-10, "dt={dt}: error {worst}");
        }
    }

    #[test]
    fn defocusing_diffuses() {
        let cfg = FnlsConfig {
            s: 0.3,
            gamma: 1.0,
            p: 1,
            dt: 0.01,
            t_final: 1.0,
            dim: 1,
            degree: 64,
            nu: 2.0,
            snapshot_stride: 0,
        };
        let out = run_simulation(&cfg, soliton_like).unwrap();
        assert!(out.blow_up.is_none());
        let start = max_magnitude(&out.snapshots[0].field);
        let end = max_magnitude(&out.final_state.field);
        assert!(end < start, "start {start}, end {end}");
        // Mass trace stays flat.
        let m0 = out.mass_trace[0].mass;
        for s in &out.mass_trace {
            assert!(((s.mass - m0) / m0).abs() < 1e-10);
        }
    }

    #[test]
    fn temporal_order_is_fourth() {
        // Richardson-style check against a fine-dt reference at fixed N.
        let degree = 48;
        let t_final = 0.5;
        let reference = {
            let cfg = test_config(degree, t_final / 256.0, t_final, -1.0, 0.7);
            run_simulation(&cfg, soliton_like).unwrap()
        };
        let mut errors = Vec::new();
        for &steps in &[8usize, 16, 32] {
            let cfg = test_config(degree, t_final / steps as f64, t_final, -1.0, 0.7);
            let out = run_simulation(&cfg, soliton_like).unwrap();
            let mut worst = 0.0f64;
            for (a, b) in out
                .final_state
                .field
                .data()
                .iter()
                .zip(reference.final_state.field.data())
            {
                worst = worst.max((a - b).norm());
            }
            errors.push(worst);
        }
        let order1 = (errors[0] / errors[1]).log2();
        let order2 = (errors[1] / errors[2]).log2();
        assert!(order1 > 3.2 && order1 < 4.8, "orders {order1}, {order2}: {errors:?}");
        assert!(order2 > 3.2 && order2 < 4.8, "orders {order1}, {order2}: {errors:?}");
    }

    #[test]
    fn rounded_step_count_is_flagged() {
        let mut cfg = test_config(8, 0.3, 1.0, 0.0, 0.5);
        cfg.snapshot_stride = 2;
        let out = run_simulation(&cfg, soliton_like).unwrap();
        assert!(out.steps_rounded);
        assert_eq!(out.steps_planned, 3);
        let exact = test_config(8, 0.25, 1.0, 0.0, 0.5);
        let out2 = run_simulation(&exact, soliton_like).unwrap();
        assert!(!out2.steps_rounded);
        assert_eq!(out2.steps_planned, 4);
    }

    #[test]
    fn blow_up_detection_reports_step() {
        let cfg = test_config(16, 0.1, 1.0, -1.0, 0.5);
        let out = run_simulation(&cfg, |x: &[f64]| {
            Complex64::new(1e300 * sech(x[0]), 0.0)
        })
        .unwrap();
        let report = out.blow_up.expect("overflow must be detected");
        assert!(report.step >= 1);
        assert!(out.steps_taken == report.step);
    }

    #[test]
    fn config_validation() {
        let mut cfg = test_config(16, 0.1, 1.0, 1.0, 0.5);
        cfg.dt = -0.1;
        assert!(cfg.validate().is_err());
        let mut cfg = test_config(16, 0.1, 1.0, 1.0, 1.5);
        assert!(cfg.validate().is_err());
        cfg = test_config(16, 0.1, 0.05, 1.0, 0.5);
        assert!(cfg.validate().is_err());
    }
}
