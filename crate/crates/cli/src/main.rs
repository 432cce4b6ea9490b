//! `szego-lab` experiment runner.

mod config;
mod error;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use szego_lab::szego::PairSampling;

use config::{parse_point, parse_range, DomainSel, ExperimentConfig, Format, Operation, QuadratureOverrides, Resolved};
use error::CliError;

#[derive(Parser)]
#[command(
    name = "szego-lab",
    version,
    about = "Numerical experiments on model weighted domains and tube kernels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the finite-type hypotheses H1-H3 on a sample grid.
    VerifyUft(Flags),
    /// Tabulate the potential, its Laplacian and gradient on the grid.
    Potential(Flags),
    /// Control distances, smooth distance and ball volumes for boundary pairs.
    Metric(Flags),
    /// Regularized tube kernel or its derivative `Z̄^k Z S`.
    Kernel(Flags),
    /// Decay scan at the antipodal points `(±n, ib(±n))`.
    Sharpness(Flags),
    /// Compare the Bergman kernel with the derivative of the Szegő kernel.
    BergmanCheck(Flags),
    /// Growth envelope `|S_ε| |B(a, d_ε)|` over a seeded pair sample.
    Envelope(Flags),
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// JSON experiment file; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    domain: Option<DomainSel>,
    /// Polynomial weight file `{"terms": [[a, b, re, im], ...]}`.
    #[arg(long)]
    custom_weight: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<f64>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    kappa: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    /// Inclusive range `lo..hi`.
    #[arg(long, value_parser = parse_range)]
    n: Option<[i64; 2]>,
    /// Boundary point `x,y,t`.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    a: Option<[f64; 3]>,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    b: Option<[f64; 3]>,
    /// Draw this many seeded pairs instead of the single pair `--a`, `--b`.
    #[arg(long)]
    pairs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    envelope_constant: Option<f64>,
    #[arg(long)]
    fd_step: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Exit with status 2 when any value failed to converge.
    #[arg(long)]
    strict: bool,
}

impl Command {
    fn split(self) -> (Operation, Flags) {
        match self {
            Command::VerifyUft(f) => (Operation::VerifyUft, f),
            Command::Potential(f) => (Operation::Potential, f),
            Command::Metric(f) => (Operation::Metric, f),
            Command::Kernel(f) => (Operation::Kernel, f),
            Command::Sharpness(f) => (Operation::Sharpness, f),
            Command::BergmanCheck(f) => (Operation::BergmanCheck, f),
            Command::Envelope(f) => (Operation::Envelope, f),
        }
    }
}

fn configure(op: Operation, f: Flags) -> Result<Resolved, CliError> {
    let file = match &f.config {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::default(),
    };
    let sampling = if f.pairs.is_some() || f.seed.is_some() {
        let base = file.sampling.unwrap_or_default();
        Some(PairSampling {
            count: f.pairs.unwrap_or(base.count),
            seed: f.seed.unwrap_or(base.seed),
            ..base
        })
    } else {
        None
    };
    let quadrature = (f.rel_tol.is_some() || f.abs_tol.is_some()).then_some(QuadratureOverrides {
        rel_tol: f.rel_tol,
        abs_tol: f.abs_tol,
        ..Default::default()
    });
    let flags = ExperimentConfig {
        domain: f.domain,
        custom_weight: f.custom_weight,
        epsilon: f.eps,
        kappa: f.kappa,
        tau: f.tau,
        m: f.m,
        k: f.k,
        n_range: f.n,
        a: f.a,
        b: f.b,
        sampling,
        quadrature,
        envelope_constant: f.envelope_constant,
        fd_step: f.fd_step,
        out: f.out,
        format: f.format,
        strict: f.strict.then_some(true),
        ..Default::default()
    };
    Resolved::resolve(op, file.overlay(flags))
}

fn threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("SZEGO_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("invalid value for 'SZEGO_LAB_THREADS': '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn execute(op: Operation, f: Flags) -> Result<(), CliError> {
    threads()?;
    let r = configure(op, f)?;
    let report = run::run(&r)?;
    output::emit(&r, &report)?;
    eprintln!("{}", report.summary);
    if r.strict && report.nonconverged > 0 {
        return Err(CliError::Numerical(format!(
            "{} values did not converge",
            report.nonconverged
        )));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (op, flags) = cli.command.split();
    match execute(op, flags) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("szego-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
