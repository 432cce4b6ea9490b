use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use szego_lab::domain::{GridSpec, UftThresholds};
use szego_lab::quadrature::QuadratureConfig;
use szego_lab::szego::{kernel_quadrature, PairSampling};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Operation {
    VerifyUft,
    Potential,
    Metric,
    Kernel,
    Sharpness,
    BergmanCheck,
    Envelope,
}

impl Operation {
    pub fn name(self) -> &'static str {
        match self {
            Operation::VerifyUft => "verify-uft",
            Operation::Potential => "potential",
            Operation::Metric => "metric",
            Operation::Kernel => "kernel",
            Operation::Sharpness => "sharpness",
            Operation::BergmanCheck => "bergman-check",
            Operation::Envelope => "envelope",
        }
    }

    fn needs_tube(self) -> bool {
        matches!(
            self,
            Operation::Kernel | Operation::Sharpness | Operation::BergmanCheck | Operation::Envelope
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DomainSel {
    Heisenberg,
    ParabolicTube,
    SharpnessTube,
    SmoothedPolynomial,
    H3Counterexample,
    CustomWeight,
}

impl DomainSel {
    pub fn is_tube(self) -> bool {
        matches!(self, DomainSel::ParabolicTube | DomainSel::SharpnessTube)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

/// Quadrature fields a config may override; unset fields keep the operation's defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureOverrides {
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub max_depth: Option<u32>,
    pub truncation_log_cut: Option<f64>,
}

/// Experiment description as read from a JSON file; every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub operation: Option<Operation>,
    pub domain: Option<DomainSel>,
    pub custom_weight: Option<PathBuf>,
    pub epsilon: Option<f64>,
    pub kappa: Option<usize>,
    /// Scale `τ` of `σ_τ` and `ρ̃_τ` in `metric`.
    pub tau: Option<f64>,
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub n_range: Option<[i64; 2]>,
    pub a: Option<[f64; 3]>,
    pub b: Option<[f64; 3]>,
    pub sampling: Option<PairSampling>,
    pub grid: Option<GridSpec>,
    pub thresholds: Option<UftThresholds>,
    pub quadrature: Option<QuadratureOverrides>,
    pub envelope_constant: Option<f64>,
    pub fd_step: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub strict: Option<bool>,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
    }

    /// Values set in `flags` replace those in `self`.
    pub fn overlay(mut self, flags: ExperimentConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => {
                $(if flags.$f.is_some() { self.$f = flags.$f; })*
            };
        }
        take!(
            operation,
            domain,
            custom_weight,
            epsilon,
            kappa,
            tau,
            m,
            k,
            n_range,
            a,
            b,
            sampling,
            grid,
            thresholds,
            envelope_constant,
            fd_step,
            out,
            format,
            strict
        );
        if let Some(q) = flags.quadrature {
            let base = self.quadrature.unwrap_or_default();
            self.quadrature = Some(QuadratureOverrides {
                abs_tol: q.abs_tol.or(base.abs_tol),
                rel_tol: q.rel_tol.or(base.rel_tol),
                max_depth: q.max_depth.or(base.max_depth),
                truncation_log_cut: q.truncation_log_cut.or(base.truncation_log_cut),
            });
        }
        self
    }
}

/// Fully specified experiment, echoed into every output file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub operation: Operation,
    pub domain: DomainSel,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub custom_weight: Option<PathBuf>,
    pub epsilon: f64,
    pub kappa: usize,
    pub tau: f64,
    pub m: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub n_range: [i64; 2],
    pub a: [f64; 3],
    pub b: [f64; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampling: Option<PairSampling>,
    pub grid: GridSpec,
    pub thresholds: UftThresholds,
    pub quadrature: QuadratureConfig,
    pub envelope_constant: f64,
    pub fd_step: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub format: Format,
    pub strict: bool,
}

fn bad(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("invalid value for '{key}': {msg}"))
}

fn positive(key: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(bad(key, format!("must be positive and finite, got {v}")))
    }
}

impl Resolved {
    pub fn resolve(op: Operation, c: ExperimentConfig) -> Result<Self, CliError> {
        if let Some(o) = c.operation {
            if o != op {
                return Err(bad(
                    "operation",
                    format!("config names '{}' but the subcommand is '{}'", o.name(), op.name()),
                ));
            }
        }
        let domain = c.domain.unwrap_or(match op {
            Operation::VerifyUft | Operation::Potential | Operation::Metric => DomainSel::Heisenberg,
            Operation::Sharpness => DomainSel::SharpnessTube,
            _ => DomainSel::ParabolicTube,
        });
        if op.needs_tube() && !domain.is_tube() {
            return Err(bad(
                "domain",
                format!("'{}' needs parabolic-tube or sharpness-tube", op.name()),
            ));
        }
        if (domain == DomainSel::CustomWeight) != c.custom_weight.is_some() {
            return Err(bad(
                "custom_weight",
                "a weight file is required exactly when domain is custom-weight",
            ));
        }
        let epsilon = positive(
            "epsilon",
            c.epsilon.unwrap_or(match op {
                Operation::Sharpness => 0.01,
                Operation::Envelope => 0.5,
                _ => 1.0,
            }),
        )?;
        let m =
            c.m.unwrap_or(if domain == DomainSel::SmoothedPolynomial { 4 } else { 2 });
        if m < 2 {
            return Err(bad("m", format!("must be at least 2, got {m}")));
        }
        let kappa = c.kappa.unwrap_or(2);
        if kappa < 2 {
            return Err(bad("kappa", format!("must be at least 2, got {kappa}")));
        }
        let tau = positive("tau", c.tau.unwrap_or(1.0))?;
        let k = match op {
            Operation::Sharpness => Some(c.k.unwrap_or(1)),
            _ => c.k,
        };
        if op == Operation::Sharpness && k == Some(0) {
            return Err(bad("k", "the sharpness scan needs k >= 1"));
        }
        let n_range = c.n_range.unwrap_or([1, 6]);
        if n_range[0] < 1 || n_range[1] <= n_range[0] {
            return Err(bad(
                "n_range",
                format!("needs 1 <= lo < hi, got {}..{}", n_range[0], n_range[1]),
            ));
        }
        for (key, p) in [("a", c.a), ("b", c.b)] {
            if let Some(p) = p {
                if p.iter().any(|v| !v.is_finite()) {
                    return Err(bad(key, "coordinates must be finite"));
                }
            }
        }
        let a = c.a.unwrap_or([0.0; 3]);
        let b = c.b.unwrap_or(a);
        let sampling = match (op, c.sampling) {
            (Operation::Envelope, s) => Some(s.unwrap_or_default()),
            (_, s) => s,
        };
        if let Some(s) = &sampling {
            s.validate().map_err(|e| bad("sampling", e))?;
        }
        let grid = c.grid.unwrap_or_default();
        grid.validate().map_err(|e| bad("grid", e))?;
        let thresholds = c.thresholds.unwrap_or_default();
        let base = if op.needs_tube() {
            kernel_quadrature()
        } else if op == Operation::VerifyUft {
            szego_lab::domain::UftConfig::default().quadrature
        } else {
            QuadratureConfig::default()
        };
        let o = c.quadrature.unwrap_or_default();
        let quadrature = QuadratureConfig {
            abs_tol: o.abs_tol.unwrap_or(base.abs_tol),
            rel_tol: o.rel_tol.unwrap_or(base.rel_tol),
            max_depth: o.max_depth.unwrap_or(base.max_depth),
            truncation_log_cut: o.truncation_log_cut.unwrap_or(base.truncation_log_cut),
        };
        quadrature.validate().map_err(|e| bad("quadrature", e))?;
        let envelope_constant = c.envelope_constant.unwrap_or(10.0);
        if envelope_constant.is_nan() || envelope_constant <= 0.0 {
            return Err(bad(
                "envelope_constant",
                format!("must be positive, got {envelope_constant}"),
            ));
        }
        let fd_step = positive("fd_step", c.fd_step.unwrap_or(1e-3))?;
        let format = c.format.unwrap_or(if op == Operation::VerifyUft {
            Format::Json
        } else {
            Format::Csv
        });
        Ok(Self {
            operation: op,
            domain,
            custom_weight: c.custom_weight,
            epsilon,
            kappa,
            tau,
            m,
            k,
            n_range,
            a,
            b,
            sampling,
            grid,
            thresholds,
            quadrature,
            envelope_constant,
            fd_step,
            out: c.out,
            format,
            strict: c.strict.unwrap_or(false),
        })
    }
}

/// `"lo..hi"` (inclusive) or a single integer.
pub fn parse_range(s: &str) -> Result<[i64; 2], String> {
    let parse = |t: &str| t.trim().parse::<i64>().map_err(|e| format!("'{t}': {e}"));
    match s.split_once("..") {
        Some((lo, hi)) => Ok([parse(lo)?, parse(hi.trim_start_matches('='))?]),
        None => {
            let v = parse(s)?;
            Ok([v, v])
        }
    }
}

/// `"x,y,t"`.
pub fn parse_point(s: &str) -> Result<[f64; 3], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}")))
        .collect::<Result<_, _>>()?;
    <[f64; 3]>::try_from(v).map_err(|v| format!("expected three comma-separated numbers, got {}", v.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_and_points() {
        assert_eq!(parse_range("1..6").unwrap(), [1, 6]);
        assert_eq!(parse_range("2..=4").unwrap(), [2, 4]);
        assert!(parse_range("a..3").is_err());
        assert_eq!(parse_point("0.5, -1, 2").unwrap(), [0.5, -1.0, 2.0]);
        assert!(parse_point("1,2").is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = ExperimentConfig {
            epsilon: Some(0.2),
            quadrature: Some(QuadratureOverrides {
                rel_tol: Some(1e-6),
                ..Default::default()
            }),
            ..Default::default()
        };
        let flags = ExperimentConfig {
            epsilon: Some(0.4),
            quadrature: Some(QuadratureOverrides {
                abs_tol: Some(1e-9),
                ..Default::default()
            }),
            ..Default::default()
        };
        let r = Resolved::resolve(Operation::Kernel, file.overlay(flags)).unwrap();
        assert_eq!(r.epsilon, 0.4);
        assert_eq!(r.quadrature.rel_tol, 1e-6);
        assert_eq!(r.quadrature.abs_tol, 1e-9);
    }

    #[test]
    fn errors_name_the_key() {
        let c = ExperimentConfig {
            epsilon: Some(-1.0),
            ..Default::default()
        };
        let e = Resolved::resolve(Operation::Kernel, c).unwrap_err().to_string();
        assert!(e.contains("'epsilon'"), "{e}");
        let c = ExperimentConfig {
            domain: Some(DomainSel::Heisenberg),
            ..Default::default()
        };
        let e = Resolved::resolve(Operation::Sharpness, c).unwrap_err().to_string();
        assert!(e.contains("'domain'"), "{e}");
        let e: Result<ExperimentConfig, _> = serde_json::from_str(r#"{"epsilon": 1, "bogus": 2}"#);
        assert!(e.unwrap_err().to_string().contains("bogus"));
    }
}
