//! Subcommand implementations.
//!
//! Every command returns the text destined for stdout plus a success flag;
//! binary and CSV artifacts are written under `--out` when one is given.
//! Output is a pure function of the resolved configuration: identical
//! configurations produce bit-identical bytes.

use std::fmt;
use std::fs;

use num_complex::Complex64;
use serde::Serialize;

use mcfrac::basis::TensorBasis;
use mcfrac::error::Error;
use mcfrac::fnls::{run_simulation, FnlsConfig, SimulationOutput};
use mcfrac::io::{save_complex_grid, save_expansion};
use mcfrac::mcf::mcf_eval_all;
use mcfrac::norms::{
    error_hs, error_l2, error_max, format_sci, predicted_rate, successive_orders,
    ConvergenceReport, ConvergenceRow, ReportMeta,
};
use mcfrac::solver::{solve_fractional_fn, solve_multiterm_fn};
use mcfrac::special::{fraclap_gaussian, fraclap_rational};
use mcfrac::tensor::{for_each_index, Tensor};
use mcfrac::transforms::{from_fourier_like, sample_on_grid, synthesize_at, synthesize_grid};
use mcfrac::validate::run_checks;

use crate::config::{RunConfig, UsageError};

/// Uniform audit-grid resolution per dimension on [-10, 10]^d.
const AUDIT_POINTS: [usize; 3] = [201, 41, 21];

/// Command failure, split by exit code: usage errors exit 2, runtime
/// (numeric, I/O) failures exit 1.
#[derive(Debug)]
pub enum CliError {
    Usage(UsageError),
    Failed(Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(e) => write!(f, "{e}"),
            CliError::Failed(e) => write!(f, "{e}"),
        }
    }
}

impl From<UsageError> for CliError {
    fn from(e: UsageError) -> Self {
        CliError::Usage(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Failed(e)
    }
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Failed(Error::from(e))
}

/// What a command sends to stdout and whether the run counts as a success.
pub struct Outcome {
    pub stdout: String,
    pub ok: bool,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { stdout, ok: true }
    }
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.subcommand.as_str() {
        "solve" => cmd_solve(cfg),
        "converge" => cmd_converge(cfg),
        "table1" => cmd_table1(cfg),
        "fnls" => cmd_fnls(cfg),
        "validate" => cmd_validate(cfg),
        other => Err(CliError::Usage(UsageError(format!("unknown subcommand {other}")))),
    }
}

/// Exact manufactured profile for the configured family.
fn exact_profile(cfg: &RunConfig) -> impl Fn(&[f64]) -> f64 + '_ {
    let rational = cfg.family == "rational";
    let r = cfg.r;
    move |x: &[f64]| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        if rational {
            (1.0 + r2).powf(-r)
        } else {
            (-r2).exp()
        }
    }
}

/// Closed-form source for the configured operator applied to the exact
/// profile. Orders were validated at configuration time, so the special
/// functions cannot fail on these inputs.
fn source_profile(cfg: &RunConfig) -> Result<impl Fn(&[f64]) -> f64 + '_, CliError> {
    let terms = cfg.operator_terms()?;
    let rational = cfg.family == "rational";
    let r = cfg.r;
    let gamma = cfg.gamma;
    Ok(move |x: &[f64]| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let base = if rational { (1.0 + r2).powf(-r) } else { (-r2).exp() };
        let mut acc = gamma * base;
        for t in &terms {
            let frac = if rational {
                fraclap_rational(x, t.order, r)
            } else {
                fraclap_gaussian(x, t.order)
            };
            acc += t.coefficient * frac.expect("orders validated in (0, 1]");
        }
        acc
    })
}

/// Largest term order; the H^s error norm and rate prediction use it.
fn leading_order(cfg: &RunConfig) -> Result<f64, CliError> {
    Ok(cfg
        .operator_terms()?
        .iter()
        .map(|t| t.order)
        .fold(0.0, f64::max))
}

/// Max deviation from the exact profile on a uniform grid over [-10, 10]^d,
/// probing between the mapped collocation nodes.
fn audit_max_error<F>(
    u: &mcfrac::Expansion,
    basis: &TensorBasis,
    exact: F,
    d: usize,
) -> Result<f64, CliError>
where
    F: Fn(&[f64]) -> f64,
{
    let npts = AUDIT_POINTS[d - 1];
    let shape = vec![npts; d];
    let mut worst = 0.0f64;
    let mut first_err: Option<Error> = None;
    let mut point = vec![0.0f64; d];
    for_each_index(&shape, |idx, _| {
        if first_err.is_some() {
            return;
        }
        for (p, &i) in point.iter_mut().zip(idx) {
            *p = -10.0 + 20.0 * i as f64 / (npts - 1) as f64;
        }
        match synthesize_at(u, &point, basis) {
            Ok(v) => worst = worst.max((v - exact(&point)).abs()),
            Err(e) => first_err = Some(e),
        }
    });
    match first_err {
        Some(e) => Err(e.into()),
        None => Ok(worst),
    }
}

struct SolveErrors {
    max_grid: f64,
    max_audit: f64,
    l2: f64,
    hs: f64,
}

struct Solved {
    basis: TensorBasis,
    u_mcf: mcfrac::Expansion,
    grid: Tensor<f64>,
    exact_grid: Tensor<f64>,
    errors: SolveErrors,
}

/// Solve the configured problem at degree `n` and measure errors against
/// the closed-form solution.
fn solve_once(cfg: &RunConfig, n: usize) -> Result<Solved, CliError> {
    let basis = TensorBasis::isotropic(cfg.d, n, cfg.nu)?;
    let spec = cfg.operator_spec()?;
    let source = source_profile(cfg)?;
    let u_hat = solve_multiterm_fn(&source, &spec, &basis)?;
    let u_mcf = from_fourier_like(&u_hat, &basis)?;
    let grid = synthesize_grid(&u_mcf, &basis)?;
    let exact = exact_profile(cfg);
    let exact_grid = sample_on_grid(&exact, &basis)?;
    let errors = SolveErrors {
        max_grid: error_max(&grid, &exact_grid)?,
        max_audit: audit_max_error(&u_mcf, &basis, &exact, cfg.d)?,
        l2: error_l2(&grid, &exact_grid, &basis.weight_tensor())?,
        hs: error_hs(&u_hat, &exact_grid, leading_order(cfg)?, &basis)?,
    };
    Ok(Solved { basis, u_mcf, grid, exact_grid, errors })
}

fn cmd_solve(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let solved = solve_once(cfg, cfg.n)?;

    let mut report = format!("{}\n", cfg.echo_line());
    report.push_str("metric,value\n");
    report.push_str(&format!("n_modes_per_axis,{}\n", cfg.n + 1));
    report.push_str(&format!("error_max_grid,{}\n", format_sci(solved.errors.max_grid)));
    report.push_str(&format!("error_max_audit,{}\n", format_sci(solved.errors.max_audit)));
    report.push_str(&format!("error_l2,{}\n", format_sci(solved.errors.l2)));
    report.push_str(&format!("error_hs,{}\n", format_sci(solved.errors.hs)));

    if let Some(out) = &cfg.out {
        fs::create_dir_all(out).map_err(io_err)?;
        save_expansion(&out.join("solution.tns"), &solved.u_mcf)?;
        fs::write(out.join("report.csv"), &report).map_err(io_err)?;
        fs::write(
            out.join("grid.csv"),
            grid_csv(cfg, &solved.basis, &solved.grid, &solved.exact_grid),
        )
        .map_err(io_err)?;
    }
    Ok(Outcome::ok(report))
}

/// Per-node CSV: coordinates, numerical and exact values, absolute error.
fn grid_csv(
    cfg: &RunConfig,
    basis: &TensorBasis,
    grid: &Tensor<f64>,
    exact: &Tensor<f64>,
) -> String {
    let mut text = format!("{}\n", cfg.echo_line());
    for k in 1..=cfg.d {
        text.push_str(&format!("x_{k},"));
    }
    text.push_str("u_num,u_exact,abs_err\n");
    for_each_index(&basis.shape(), |idx, flat| {
        for c in basis.point(idx) {
            text.push_str(&format_sci(c));
            text.push(',');
        }
        let (u, e) = (grid.data()[flat], exact.data()[flat]);
        text.push_str(&format!(
            "{},{},{}\n",
            format_sci(u),
            format_sci(e),
            format_sci((u - e).abs())
        ));
    });
    text
}

fn cmd_converge(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut rows = Vec::new();
    for &n in &cfg.n_list {
        let e = solve_once(cfg, n)?.errors;
        rows.push(ConvergenceRow {
            n,
            error_max: e.max_audit.max(e.max_grid),
            error_l2: e.l2,
            error_hs: e.hs,
        });
    }
    let meta = ReportMeta {
        s: leading_order(cfg)?,
        gamma: cfg.gamma,
        nu: cfg.nu,
        d: cfg.d,
        family: cfg.family.clone(),
    };
    let report = ConvergenceReport::new(meta, rows)?;
    let fitted = report.fitted_orders()?;
    let rate = predicted_rate(cfg.solution_family(), leading_order(cfg)?, cfg.d);

    let mut text = format!("{}\n{}", cfg.echo_line(), report.to_csv());
    text.push_str(&format!(
        "# fitted_order_max,{:.4}\n# fitted_order_l2,{:.4}\n# fitted_order_hs,{:.4}\n# predicted_rate_hs,{:.4}\n",
        fitted.order_max, fitted.order_l2, fitted.order_hs, rate
    ));
    if let Some(out) = &cfg.out {
        if let Some(dir) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(io_err)?;
        }
        fs::write(out, &text).map_err(io_err)?;
    }
    Ok(Outcome::ok(text))
}

/// Reference-table study: L2 errors of the coarse solutions against a fine
/// reference, measured in the coarse grid's own discrete norm, with
/// successive orders, for s in {0.6, 0.9}.
fn cmd_table1(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let s_values = [0.6, 0.9];
    let ns: Vec<usize> = (80..=240).step_by(20).collect();
    let source = |x: &[f64]| (1.0 + x[0]) * (-0.5 * x[0] * x[0]).exp();

    let reference_basis = TensorBasis::isotropic(1, cfg.n_ref, cfg.nu)?;
    let mut refs = Vec::new();
    for &s in &s_values {
        let u_hat = solve_fractional_fn(source, s, cfg.gamma, &reference_basis)?;
        refs.push(from_fourier_like(&u_hat, &reference_basis)?.coeffs.into_data());
    }

    let mut errors = [Vec::new(), Vec::new()];
    for &n in &ns {
        let basis = TensorBasis::isotropic(1, n, cfg.nu)?;
        let rule = basis.axis(0).rule();
        for (k, &s) in s_values.iter().enumerate() {
            let u_hat = solve_fractional_fn(source, s, cfg.gamma, &basis)?;
            let grid = synthesize_grid(&from_fourier_like(&u_hat, &basis)?, &basis)?;
            let mut err2 = 0.0;
            for (j, (&x, &w)) in rule.nodes().iter().zip(rule.weights()).enumerate() {
                let row = mcf_eval_all(cfg.n_ref, x, cfg.nu)?;
                let ref_at: f64 = refs[k].iter().zip(&row).map(|(c, t)| c * t).sum();
                let diff = grid.data()[j] - ref_at;
                err2 += w * diff * diff;
            }
            errors[k].push(err2.sqrt());
        }
    }

    let orders: Vec<Vec<f64>> = errors
        .iter()
        .map(|e| successive_orders(&ns, e))
        .collect::<Result<_, _>>()?;

    let mut text = format!("{}\n", cfg.echo_line());
    text.push_str("N,error_s0.6,order_s0.6,error_s0.9,order_s0.9\n");
    for (i, &n) in ns.iter().enumerate() {
        let order_cell = |k: usize| {
            if i == 0 {
                String::new()
            } else {
                format!("{:.2}", orders[k][i - 1])
            }
        };
        text.push_str(&format!(
            "{n},{},{},{},{}\n",
            format_sci(errors[0][i]),
            order_cell(0),
            format_sci(errors[1][i]),
            order_cell(1)
        ));
    }
    if let Some(out) = &cfg.out {
        if let Some(dir) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(io_err)?;
        }
        fs::write(out, &text).map_err(io_err)?;
    }
    Ok(Outcome::ok(text))
}

/// Default wave-packet initial state: a separable sech envelope carrying
/// unit momentum along the first axis.
fn packet(x: &[f64]) -> Complex64 {
    let mut env = 1.0;
    for &xi in x {
        env /= xi.cosh();
    }
    Complex64::from_polar(env, x[0])
}

#[derive(Serialize)]
struct BlowUpLine {
    step: usize,
    time: f64,
    max_magnitude: f64,
}

#[derive(Serialize)]
struct FnlsSummary {
    steps_planned: usize,
    steps_taken: usize,
    steps_rounded: bool,
    final_time: f64,
    initial_mass: f64,
    final_mass: f64,
    mass_drift: f64,
    blow_up: Option<BlowUpLine>,
}

#[derive(Serialize)]
struct MassLine {
    step: usize,
    time: f64,
    mass: f64,
}

fn fnls_config(cfg: &RunConfig, dt: f64) -> FnlsConfig {
    FnlsConfig {
        s: cfg.s,
        gamma: cfg.gamma,
        p: cfg.p,
        dt,
        t_final: cfg.t_final,
        dim: cfg.d,
        degree: cfg.n,
        nu: cfg.nu,
        snapshot_stride: cfg.snapshot_stride,
    }
}

fn summarize(output: &SimulationOutput) -> FnlsSummary {
    let initial_mass = output.mass_trace.first().map_or(0.0, |m| m.mass);
    let final_mass = output.mass_trace.last().map_or(0.0, |m| m.mass);
    FnlsSummary {
        steps_planned: output.steps_planned,
        steps_taken: output.steps_taken,
        steps_rounded: output.steps_rounded,
        final_time: output.final_state.time,
        initial_mass,
        final_mass,
        mass_drift: (final_mass - initial_mass).abs(),
        blow_up: output.blow_up.as_ref().map(|b| BlowUpLine {
            step: b.step,
            time: b.time,
            max_magnitude: b.max_magnitude,
        }),
    }
}

fn cmd_fnls(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if cfg.dt_study {
        return cmd_dt_study(cfg);
    }
    let output = run_simulation(&fnls_config(cfg, cfg.dt), packet)?;
    let summary = summarize(&output);
    let mut text = format!("{}\n", cfg.echo_line());
    text.push_str(&serde_json::to_string(&summary).expect("summary serializes"));
    text.push('\n');

    if let Some(out) = &cfg.out {
        fs::create_dir_all(out).map_err(io_err)?;
        let mut mass = String::new();
        for m in &output.mass_trace {
            let line = MassLine { step: m.step, time: m.time, mass: m.mass };
            mass.push_str(&serde_json::to_string(&line).expect("mass line serializes"));
            mass.push('\n');
        }
        fs::write(out.join("mass.jsonl"), mass).map_err(io_err)?;
        for snap in &output.snapshots {
            let name = format!("snap_{:06}.tns", snap.step);
            save_complex_grid(&out.join(name), cfg.nu, &snap.field)?;
        }
        save_complex_grid(&out.join("final.tns"), cfg.nu, &output.final_state.field)?;
        fs::write(
            out.join("summary.json"),
            serde_json::to_string(&summary).expect("summary serializes"),
        )
        .map_err(io_err)?;
    }
    Ok(Outcome::ok(text))
}

/// Temporal refinement study: errors of the final state at dt, dt/2, ...,
/// dt/16 against a reference marched at one tenth of the finest step.
fn cmd_dt_study(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let dts: Vec<f64> = (0..5).map(|k| cfg.dt / f64::powi(2.0, k)).collect();
    let ref_dt = dts[dts.len() - 1] / 10.0;

    let run_to_end = |dt: f64| -> Result<SimulationOutput, CliError> {
        let output = run_simulation(&fnls_config(cfg, dt), packet)?;
        if let Some(b) = &output.blow_up {
            return Err(CliError::Failed(Error::numeric(format!(
                "dt study aborted: blow-up at t = {} with dt = {dt}",
                b.time
            ))));
        }
        Ok(output)
    };

    let reference = run_to_end(ref_dt)?;
    let weights = reference.basis.weight_tensor();

    let mut dt_used = Vec::new();
    let mut errs_max = Vec::new();
    let mut errs_l2 = Vec::new();
    for &dt in &dts {
        let output = run_to_end(dt)?;
        dt_used.push(cfg.t_final / output.steps_planned as f64);
        let (emax, el2) =
            complex_errors(&output.final_state.field, &reference.final_state.field, &weights);
        errs_max.push(emax);
        errs_l2.push(el2);
    }

    let order = |errs: &[f64], i: usize| -> String {
        if i == 0 {
            String::new()
        } else {
            let o = (errs[i - 1] / errs[i]).ln() / (dt_used[i - 1] / dt_used[i]).ln();
            format!("{o:.2}")
        }
    };
    let mut text = format!("{}\n", cfg.echo_line());
    text.push_str("dt,error_max,error_l2,order_max,order_l2\n");
    for i in 0..dts.len() {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            format_sci(dt_used[i]),
            format_sci(errs_max[i]),
            format_sci(errs_l2[i]),
            order(&errs_max, i),
            order(&errs_l2, i)
        ));
    }
    if let Some(out) = &cfg.out {
        fs::create_dir_all(out).map_err(io_err)?;
        fs::write(out.join("dt_study.csv"), &text).map_err(io_err)?;
    }
    Ok(Outcome::ok(text))
}

/// Max and weighted-L2 distance between complex grid fields.
fn complex_errors(
    a: &Tensor<Complex64>,
    b: &Tensor<Complex64>,
    weights: &Tensor<f64>,
) -> (f64, f64) {
    let mut emax = 0.0f64;
    let mut e2 = 0.0;
    for ((x, y), w) in a.data().iter().zip(b.data()).zip(weights.data()) {
        let d = (x - y).norm();
        emax = emax.max(d);
        e2 += w * d * d;
    }
    (emax, e2.sqrt())
}

#[derive(Serialize)]
struct CheckLine<'a> {
    name: &'a str,
    passed: bool,
    detail: &'a str,
}

fn cmd_validate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let reports = run_checks(cfg.filter.as_deref());
    if reports.is_empty() {
        return Err(CliError::Usage(UsageError(format!(
            "no check matches filter {:?}",
            cfg.filter.as_deref().unwrap_or("")
        ))));
    }
    let mut text = String::new();
    let mut ok = true;
    for r in &reports {
        ok &= r.passed;
        let line = CheckLine { name: r.name, passed: r.passed, detail: &r.detail };
        text.push_str(&serde_json::to_string(&line).expect("check line serializes"));
        text.push('\n');
    }
    Ok(Outcome { stdout: text, ok })
}
