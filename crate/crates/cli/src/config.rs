//! Run configuration: defaults, optional JSON file, command-line overrides.
//!
//! Precedence is flags over file over defaults. The resolved configuration is
//! echoed verbatim as a `# config:` comment in every CSV so a run can be
//! reproduced from its output alone.

use std::fs;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use mcfrac::norms::SolutionFamily;
use mcfrac::solver::{FracOperatorSpec, FracTerm};

/// Largest polynomial degree accepted per dimension. Keeps every subcommand
/// runnable interactively; the cubic-in-N stiffness assembly dominates above
/// these sizes.
pub const MAX_DEGREE: [usize; 3] = [256, 64, 24];

/// A usage error: the invocation itself is malformed. Maps to exit code 2,
/// as opposed to numeric or I/O failures which map to exit code 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

/// Optional fields as they arrive from a `--config` JSON file or from flags.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub d: Option<usize>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[serde(rename = "N_list")]
    pub n_list: Option<Vec<usize>>,
    #[serde(rename = "N_ref")]
    pub n_ref: Option<usize>,
    pub s: Option<f64>,
    pub terms: Option<String>,
    pub gamma: Option<f64>,
    pub nu: Option<f64>,
    pub family: Option<String>,
    pub r: Option<f64>,
    #[serde(rename = "T")]
    pub t_final: Option<f64>,
    pub dt: Option<f64>,
    pub p: Option<u32>,
    pub out: Option<PathBuf>,
    pub dt_study: Option<bool>,
    pub snapshot_stride: Option<usize>,
    pub filter: Option<String>,
}

impl PartialConfig {
    pub fn from_file(path: &PathBuf) -> Result<Self, UsageError> {
        let text = fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| usage(format!("invalid config {}: {e}", path.display())))
    }

    /// Field-wise overlay; `self` (the flags) wins over `base` (the file).
    pub fn over(self, base: PartialConfig) -> PartialConfig {
        PartialConfig {
            d: self.d.or(base.d),
            n: self.n.or(base.n),
            n_list: self.n_list.or(base.n_list),
            n_ref: self.n_ref.or(base.n_ref),
            s: self.s.or(base.s),
            terms: self.terms.or(base.terms),
            gamma: self.gamma.or(base.gamma),
            nu: self.nu.or(base.nu),
            family: self.family.or(base.family),
            r: self.r.or(base.r),
            t_final: self.t_final.or(base.t_final),
            dt: self.dt.or(base.dt),
            p: self.p.or(base.p),
            out: self.out.or(base.out),
            dt_study: self.dt_study.or(base.dt_study),
            snapshot_stride: self.snapshot_stride.or(base.snapshot_stride),
            filter: self.filter.or(base.filter),
        }
    }
}

/// Fully resolved run configuration. Serialized field order is fixed, so the
/// `# config:` echo is bit-identical across runs with the same inputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "N_list", skip_serializing_if = "Vec::is_empty")]
    pub n_list: Vec<usize>,
    #[serde(rename = "N_ref")]
    pub n_ref: usize,
    pub s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<String>,
    pub gamma: f64,
    pub nu: f64,
    pub family: String,
    pub r: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub dt: f64,
    pub p: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub dt_study: bool,
    pub snapshot_stride: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub filter: Option<String>,
}

impl RunConfig {
    /// Apply defaults and validate everything the subcommand will rely on.
    pub fn resolve(subcommand: &str, p: PartialConfig) -> Result<Self, UsageError> {
        let cfg = RunConfig {
            subcommand: subcommand.to_string(),
            d: p.d.unwrap_or(1),
            n: p.n.unwrap_or(64),
            n_list: p.n_list.unwrap_or_default(),
            n_ref: p.n_ref.unwrap_or(600),
            s: p.s.unwrap_or(0.5),
            terms: p.terms,
            gamma: p.gamma.unwrap_or(1.0),
            nu: p.nu.unwrap_or(2.5),
            family: p.family.unwrap_or_else(|| "gaussian".to_string()),
            r: p.r.unwrap_or(2.3),
            t_final: p.t_final.unwrap_or(1.0),
            dt: p.dt.unwrap_or(0.01),
            p: p.p.unwrap_or(1),
            out: p.out,
            dt_study: p.dt_study.unwrap_or(false),
            snapshot_stride: p.snapshot_stride.unwrap_or(0),
            filter: p.filter,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), UsageError> {
        if self.subcommand == "validate" {
            return Ok(());
        }
        if !(1..=3).contains(&self.d) {
            return Err(usage(format!("--d must be 1, 2, or 3 (got {})", self.d)));
        }
        let cap = MAX_DEGREE[self.d - 1];
        if !(0.0..=1.0).contains(&self.s) || (self.s == 0.0 && self.terms.is_none()) {
            return Err(usage(format!(
                "--s must lie in (0, 1] (got {})",
                self.s
            )));
        }
        if !(self.nu.is_finite() && self.nu > 0.0) {
            return Err(usage(format!("--nu must be positive (got {})", self.nu)));
        }
        match self.family.as_str() {
            "gaussian" => {}
            "rational" => {
                if !(self.r.is_finite() && 2.0 * self.r > self.d as f64) {
                    return Err(usage(format!(
                        "--r must exceed d/2 for an integrable rational profile (got {})",
                        self.r
                    )));
                }
            }
            other => {
                return Err(usage(format!(
                    "unknown family {other:?}; expected \"gaussian\" or \"rational\""
                )));
            }
        }
        if let Some(spec) = &self.terms {
            parse_terms(spec)?;
        }
        match self.subcommand.as_str() {
            "solve" => {
                self.check_degree(self.n, cap)?;
                if self.gamma < 0.0 && self.terms.is_none() {
                    return Err(usage("solve needs --gamma >= 0".to_string()));
                }
            }
            "converge" => {
                if self.n_list.len() < 2 {
                    return Err(usage(
                        "converge needs --N-list with at least two ascending values".to_string(),
                    ));
                }
                if !self.n_list.windows(2).all(|w| w[0] < w[1]) {
                    return Err(usage("--N-list must be strictly ascending".to_string()));
                }
                for &n in &self.n_list {
                    self.check_degree(n, cap)?;
                }
            }
            "table1" => {
                if self.d != 1 {
                    return Err(usage("table1 is a one-dimensional study (--d 1)".to_string()));
                }
                if self.n_ref < 260 {
                    return Err(usage(
                        "--N-ref must exceed the largest table degree 240".to_string(),
                    ));
                }
            }
            "fnls" => {
                self.check_degree(self.n, cap)?;
                if !(self.dt.is_finite() && self.dt > 0.0) {
                    return Err(usage(format!("--dt must be positive (got {})", self.dt)));
                }
                if !(self.t_final.is_finite() && self.t_final > 0.0) {
                    return Err(usage(format!("--T must be positive (got {})", self.t_final)));
                }
                if self.p == 0 {
                    return Err(usage("--p must be at least 1".to_string()));
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn check_degree(&self, n: usize, cap: usize) -> Result<(), UsageError> {
        if n < 4 {
            return Err(usage(format!("degree N = {n} is too small (need N >= 4)")));
        }
        if n > cap {
            return Err(usage(format!(
                "degree N = {n} exceeds the d = {} limit of {cap}",
                self.d
            )));
        }
        Ok(())
    }

    pub fn solution_family(&self) -> SolutionFamily {
        match self.family.as_str() {
            "rational" => SolutionFamily::Rational { r: self.r },
            _ => SolutionFamily::Gaussian,
        }
    }

    /// Operator terms: the parsed `--terms` list, or the single `(1, s)` term.
    pub fn operator_terms(&self) -> Result<Vec<FracTerm>, UsageError> {
        match &self.terms {
            Some(spec) => parse_terms(spec),
            None => Ok(vec![FracTerm { coefficient: 1.0, order: self.s }]),
        }
    }

    pub fn operator_spec(&self) -> Result<FracOperatorSpec, UsageError> {
        FracOperatorSpec::new(self.operator_terms()?, self.gamma)
            .map_err(|e| usage(e.to_string()))
    }

    /// The `# config:` comment line carried by every CSV this run emits.
    pub fn echo_line(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        format!("# config: {json}")
    }
}

/// Parse `--terms "rho:s,rho:s,..."` into operator terms.
fn parse_terms(spec: &str) -> Result<Vec<FracTerm>, UsageError> {
    let mut terms = Vec::new();
    for piece in spec.split(',') {
        let piece = piece.trim();
        let (rho, order) = piece
            .split_once(':')
            .ok_or_else(|| usage(format!("term {piece:?} is not of the form rho:s")))?;
        let coefficient: f64 = rho
            .trim()
            .parse()
            .map_err(|_| usage(format!("term coefficient {rho:?} is not a number")))?;
        let order: f64 = order
            .trim()
            .parse()
            .map_err(|_| usage(format!("term order {order:?} is not a number")))?;
        if !(coefficient.is_finite() && coefficient > 0.0) {
            return Err(usage(format!("term coefficient {coefficient} must be positive")));
        }
        if !(0.0..=1.0).contains(&order) {
            return Err(usage(format!("term order {order} outside [0, 1]")));
        }
        terms.push(FracTerm { coefficient, order });
    }
    if terms.is_empty() {
        return Err(usage("--terms needs at least one rho:s pair".to_string()));
    }
    Ok(terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> PartialConfig {
        PartialConfig::default()
    }

    #[test]
    fn defaults_resolve() {
        let cfg = RunConfig::resolve("solve", base()).unwrap();
        assert_eq!(cfg.d, 1);
        assert_eq!(cfg.n, 64);
        assert_eq!(cfg.family, "gaussian");
    }

    #[test]
    fn flags_win_over_file() {
        let file = PartialConfig { s: Some(0.3), nu: Some(4.0), ..base() };
        let flags = PartialConfig { s: Some(0.9), ..base() };
        let merged = flags.over(file);
        assert_eq!(merged.s, Some(0.9));
        assert_eq!(merged.nu, Some(4.0));
    }

    #[test]
    fn rejects_bad_order_and_family() {
        let p = PartialConfig { s: Some(1.5), ..base() };
        assert!(RunConfig::resolve("solve", p).is_err());
        let p = PartialConfig { family: Some("cubic".to_string()), ..base() };
        assert!(RunConfig::resolve("solve", p).is_err());
    }

    #[test]
    fn enforces_degree_caps() {
        let p = PartialConfig { d: Some(2), n: Some(96), ..base() };
        assert!(RunConfig::resolve("solve", p).is_err());
        let p = PartialConfig { d: Some(3), n: Some(24), ..base() };
        assert!(RunConfig::resolve("solve", p).is_ok());
    }

    #[test]
    fn parses_term_lists() {
        let terms = parse_terms("1:0.77, 2:0.33,1.41:0.21,1:0").unwrap();
        assert_eq!(terms.len(), 4);
        assert_eq!(terms[1].coefficient, 2.0);
        assert_eq!(terms[3].order, 0.0);
        assert!(parse_terms("1:2").is_err());
        assert!(parse_terms("nope").is_err());
    }

    #[test]
    fn converge_needs_ascending_list() {
        let p = PartialConfig { n_list: Some(vec![32]), ..base() };
        assert!(RunConfig::resolve("converge", p).is_err());
        let p = PartialConfig { n_list: Some(vec![32, 16]), ..base() };
        assert!(RunConfig::resolve("converge", p).is_err());
        let p = PartialConfig { n_list: Some(vec![16, 32]), ..base() };
        assert!(RunConfig::resolve("converge", p).is_ok());
    }

    #[test]
    fn echo_is_deterministic() {
        let a = RunConfig::resolve("solve", base()).unwrap().echo_line();
        let b = RunConfig::resolve("solve", base()).unwrap().echo_line();
        assert_eq!(a, b);
        assert!(a.starts_with("# config: {\"subcommand\":\"solve\""));
    }
}
