//! `mcfrac`: command-line driver for the spectral fractional-Laplacian
//! solver.
//!
//! Subcommands: `solve` (one problem, error report), `converge` (degree
//! sweep with fitted orders), `table1` (reference-table reproduction),
//! `fnls` (nonlinear Schrodinger time stepping), `validate` (self-checks).
//! Exit codes: 0 success, 1 numeric or I/O failure, 2 usage error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};

use commands::CliError;
use config::{PartialConfig, RunConfig};

#[derive(Parser)]
#[command(
    name = "mcfrac",
    version,
    about = "Spectral solver for integral fractional Laplacian problems on R^d"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one manufactured problem and report errors.
    Solve(CommonArgs),
    /// Sweep degrees from --N-list and fit convergence orders.
    Converge(CommonArgs),
    /// Reproduce the one-dimensional reference error table.
    Table1(CommonArgs),
    /// March the fractional nonlinear Schrodinger equation.
    Fnls(CommonArgs),
    /// Run library self-checks.
    Validate(CommonArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solve(_) => "solve",
            Command::Converge(_) => "converge",
            Command::Table1(_) => "table1",
            Command::Fnls(_) => "fnls",
            Command::Validate(_) => "validate",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Solve(a)
            | Command::Converge(a)
            | Command::Table1(a)
            | Command::Fnls(a)
            | Command::Validate(a) => a,
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// JSON file with the same keys as the flags; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Space dimension (1, 2, or 3).
    #[arg(long)]
    d: Option<usize>,

    /// Polynomial degree per axis.
    #[arg(long = "N")]
    n: Option<usize>,

    /// Comma-separated ascending degrees for `converge`.
    #[arg(long = "N-list", value_delimiter = ',')]
    n_list: Option<Vec<usize>>,

    /// Reference degree for `table1`.
    #[arg(long = "N-ref")]
    n_ref: Option<usize>,

    /// Fractional order in (0, 1].
    #[arg(long, allow_negative_numbers = true)]
    s: Option<f64>,

    /// Multi-term operator: "rho:s,rho:s,...".
    #[arg(long)]
    terms: Option<String>,

    /// Zeroth-order coefficient (solve) or nonlinearity strength (fnls).
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,

    /// Map scale of the basis.
    #[arg(long)]
    nu: Option<f64>,

    /// Manufactured solution family: gaussian | rational.
    #[arg(long)]
    family: Option<String>,

    /// Decay exponent of the rational family.
    #[arg(long)]
    r: Option<f64>,

    /// Final time for `fnls`.
    #[arg(long = "T")]
    t_final: Option<f64>,

    /// Time step for `fnls`.
    #[arg(long)]
    dt: Option<f64>,

    /// Nonlinearity exponent p in |psi|^{2p} psi (cubic is 1).
    #[arg(long)]
    p: Option<u32>,

    /// Output file (converge, table1) or directory (solve, fnls).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Run a temporal refinement study instead of a single march.
    #[arg(long = "dt-study", action = ArgAction::SetTrue)]
    dt_study: Option<bool>,

    /// Snapshot stride in steps for `fnls` (0 keeps endpoints only).
    #[arg(long = "snapshot-stride")]
    snapshot_stride: Option<usize>,

    /// Substring filter for `validate` check names.
    #[arg(long)]
    filter: Option<String>,
}

impl CommonArgs {
    fn to_partial(&self) -> PartialConfig {
        PartialConfig {
            d: self.d,
            n: self.n,
            n_list: self.n_list.clone(),
            n_ref: self.n_ref,
            s: self.s,
            terms: self.terms.clone(),
            gamma: self.gamma,
            nu: self.nu,
            family: self.family.clone(),
            r: self.r,
            t_final: self.t_final,
            dt: self.dt,
            p: self.p,
            out: self.out.clone(),
            dt_study: self.dt_study.filter(|&b| b),
            snapshot_stride: self.snapshot_stride,
            filter: self.filter.clone(),
        }
    }
}

fn resolve(command: &Command) -> Result<RunConfig, CliError> {
    let args = command.args();
    let file = match &args.config {
        Some(path) => PartialConfig::from_file(path)?,
        None => PartialConfig::default(),
    };
    Ok(RunConfig::resolve(command.name(), args.to_partial().over(file))?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = resolve(&cli.command).and_then(|cfg| commands::run(&cfg));
    match outcome {
        Ok(out) => {
            print!("{}", out.stdout);
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(CliError::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(CliError::Failed(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
