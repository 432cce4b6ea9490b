use std::fs;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::json;
use szego_lab::domain::{
    build_potential, fd_laplacian, make_h3_counterexample, make_heisenberg, make_parabolic_tube, make_sharpness_tube,
    make_smoothed_polynomial, make_tube_domain, verify_uft, PolynomialWeight, PotentialRef, ProfileRef, UftConfig,
    WeightRef,
};
use szego_lab::geometry::{
    ball_volume, cc_distance, rho_tilde, sigma_tau, smooth_distance, BoundaryPoint, MetricContext, MetricOptions, Twist,
};
use szego_lab::quadrature::QuadratureConfig;
use szego_lab::szego::{
    bergman_kernel, growth_envelope, sample_pairs, sharpness_lower_constants, sharpness_scan, tube_szego_derivative,
    tube_szego_kernel, KernelQuery,
};

use crate::config::{DomainSel, Operation, Resolved};
use crate::error::CliError;
use crate::output::{num, Report};

/// Step of the five-point Laplacian in `potential`.
const LAPLACIAN_STEP: f64 = 1e-2;
/// Relative tolerance of `bergman-check`.
const BERGMAN_TOL: f64 = 5e-3;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CustomWeightFile {
    /// `[a, b, re, im]` for the term `c z^a z̄^b`.
    terms: Vec<(usize, usize, f64, f64)>,
}

fn read_custom_weight(path: &Path) -> Result<WeightRef, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read weight file {}: {e}", path.display())))?;
    let file: CustomWeightFile =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("weight file {}: {e}", path.display())))?;
    let terms: Vec<(usize, usize, Complex64)> = file
        .terms
        .iter()
        .map(|&(a, b, re, im)| (a, b, Complex64::new(re, im)))
        .collect();
    let w = PolynomialWeight::new(&terms).map_err(|e| CliError::Config(format!("weight file: {e}")))?;
    Ok(Arc::new(w))
}

fn profile(r: &Resolved) -> Option<ProfileRef> {
    match r.domain {
        DomainSel::ParabolicTube => Some(make_parabolic_tube()),
        DomainSel::SharpnessTube => Some(make_sharpness_tube()),
        _ => None,
    }
}

fn weight(r: &Resolved) -> Result<WeightRef, CliError> {
    Ok(match r.domain {
        DomainSel::Heisenberg => make_heisenberg().0,
        DomainSel::ParabolicTube | DomainSel::SharpnessTube => make_tube_domain(profile(r).expect("tube")).0,
        DomainSel::SmoothedPolynomial => make_smoothed_polynomial(Arc::new(PolynomialWeight::radial_power(1.0, 1))),
        DomainSel::H3Counterexample => make_h3_counterexample(),
        DomainSel::CustomWeight => read_custom_weight(r.custom_weight.as_deref().expect("resolved"))?,
    })
}

fn domain(r: &Resolved) -> Result<(WeightRef, PotentialRef), CliError> {
    match r.domain {
        DomainSel::Heisenberg => Ok(make_heisenberg()),
        DomainSel::ParabolicTube | DomainSel::SharpnessTube => Ok(make_tube_domain(profile(r).expect("tube"))),
        _ => {
            let w = weight(r)?;
            let p = build_potential(w.clone(), &r.quadrature)?;
            Ok((w, Arc::new(p)))
        }
    }
}

fn metric_context(r: &Resolved, smooth_epsilon: f64, quadrature: QuadratureConfig) -> Result<MetricContext, CliError> {
    let (w, p) = domain(r)?;
    let options = MetricOptions {
        m: r.m,
        smooth_epsilon,
        quadrature,
        ..MetricOptions::default()
    };
    Ok(MetricContext::new(w, p, options)?)
}

fn point(p: [f64; 3]) -> BoundaryPoint {
    BoundaryPoint::new(p[0], p[1], p[2])
}

fn pairs(r: &Resolved) -> Result<Vec<(BoundaryPoint, BoundaryPoint)>, CliError> {
    match &r.sampling {
        Some(s) => Ok(sample_pairs(s)?),
        None => Ok(vec![(point(r.a), point(r.b))]),
    }
}

fn pair_cells(a: &BoundaryPoint, b: &BoundaryPoint) -> Vec<String> {
    [a.z.re, a.z.im, a.t, b.z.re, b.z.im, b.t]
        .iter()
        .map(|v| num(*v))
        .collect()
}

const PAIR_COLUMNS: [&str; 6] = ["xa", "ya", "ta", "xb", "yb", "tb"];

fn with_pair(extra: &[&'static str]) -> Vec<&'static str> {
    PAIR_COLUMNS.iter().chain(extra).copied().collect()
}

pub fn run(r: &Resolved) -> Result<Report, CliError> {
    match r.operation {
        Operation::VerifyUft => run_verify_uft(r),
        Operation::Potential => run_potential(r),
        Operation::Metric => run_metric(r),
        Operation::Kernel => run_kernel(r),
        Operation::Sharpness => run_sharpness(r),
        Operation::BergmanCheck => run_bergman(r),
        Operation::Envelope => run_envelope(r),
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

fn run_verify_uft(r: &Resolved) -> Result<Report, CliError> {
    let w = weight(r)?;
    let cfg = UftConfig {
        grid: r.grid.clone(),
        thresholds: r.thresholds,
        quadrature: r.quadrature,
        ..UftConfig::default()
    };
    let rep = verify_uft(w.as_ref(), r.m, &cfg)?;
    let mut out = Report {
        columns: vec!["radius", "h3_value"],
        rows: rep.h3_curve.iter().map(|s| vec![num(s.radius), num(s.value)]).collect(),
        ..Report::default()
    };
    out.meta("weight", w.name());
    out.meta("h1_infimum", num(rep.h1_infimum));
    out.meta(
        "ck_norms",
        rep.ck_norms.iter().map(|v| num(*v)).collect::<Vec<_>>().join(" "),
    );
    out.meta("h3_supremum", num(rep.h3_supremum));
    out.meta("h3_growth_slope", num(rep.h3_growth_slope));
    out.meta("h1", verdict(rep.verdicts.h1));
    out.meta("h2", verdict(rep.verdicts.h2));
    out.meta("h3", verdict(rep.verdicts.h3));
    out.summary = format!(
        "verify-uft {}: H1 {}, H2 {}, H3 {}",
        w.name(),
        verdict(rep.verdicts.h1),
        verdict(rep.verdicts.h2),
        verdict(rep.verdicts.h3)
    );
    out.result = serde_json::to_value(&rep).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(out)
}

fn run_potential(r: &Resolved) -> Result<Report, CliError> {
    let (w, p) = domain(r)?;
    let pts = r.grid.points();
    let rows: Vec<[f64; 6]> = pts
        .par_iter()
        .map(|&z| -> Result<[f64; 6], CliError> {
            let value = p.eval(z)?;
            let lap = fd_laplacian(|u| p.eval(u), z, LAPLACIAN_STEP)?;
            let h = w.eval(z);
            let grad = 2.0 * p.grad_z(z)?.norm();
            Ok([z.re, z.im, value, lap, h, grad])
        })
        .collect::<Result<_, _>>()?;
    let worst = rows.iter().map(|v| (v[3] - v[4]).abs()).fold(0.0, f64::max);
    let mut out = Report {
        columns: vec!["x", "y", "p", "laplacian_fd", "h", "grad_abs"],
        rows: rows.iter().map(|v| v.iter().map(|x| num(*x)).collect()).collect(),
        ..Report::default()
    };
    out.meta("potential", p.name());
    out.meta("max_laplacian_residual", num(worst));
    out.summary = format!(
        "potential {}: {} points, max |ΔP - h| {worst:.3e}",
        p.name(),
        rows.len()
    );
    out.result = json!({ "columns": out.columns, "rows": rows, "max_laplacian_residual": worst });
    Ok(out)
}

fn run_metric(r: &Resolved) -> Result<Report, CliError> {
    let ctx = metric_context(r, r.epsilon, r.quadrature)?;
    let ps = pairs(r)?;
    let rows: Vec<[f64; 7]> = ps
        .par_iter()
        .map(|(a, b)| -> Result<[f64; 7], CliError> {
            let d = cc_distance(&ctx, a, b, Twist::Line)?;
            let dk = cc_distance(&ctx, a, b, Twist::Taylor(r.kappa))?;
            let ds = smooth_distance(&ctx, a, b)?.value;
            let vol = if d > 0.0 { ball_volume(&ctx, a, d)? } else { 0.0 };
            let sigma = sigma_tau(&ctx, b, r.tau)?;
            let rho = rho_tilde(&ctx, a, b, r.tau)?;
            Ok([b.t, d, vol, sigma, rho, dk, ds])
        })
        .collect::<Result<_, _>>()?;
    let mut out = Report {
        columns: vec![
            "z_re",
            "z_im",
            "t",
            "w_re",
            "w_im",
            "s",
            "dist",
            "ball_volume",
            "sigma_tau",
            "rho_tilde",
            "dist_taylor",
            "smooth_distance",
        ],
        ..Report::default()
    };
    let mut json_rows = Vec::new();
    for ((a, b), v) in ps.iter().zip(&rows) {
        let mut cells: Vec<String> = [a.z.re, a.z.im, a.t, b.z.re, b.z.im].iter().map(|x| num(*x)).collect();
        cells.extend(v.iter().map(|x| num(*x)));
        out.rows.push(cells);
        json_rows.push(json!({
            "a": a, "b": b, "dist": v[1], "ball_volume": v[2], "sigma_tau": v[3], "rho_tilde": v[4],
            "dist_taylor": v[5], "smooth_distance": v[6],
        }));
    }
    out.meta("kappa", r.kappa);
    out.meta("tau", num(r.tau));
    out.summary = format!("metric {}: {} pairs", ctx.potential.name(), rows.len());
    out.result = json!({ "rows": json_rows });
    Ok(out)
}

fn run_kernel(r: &Resolved) -> Result<Report, CliError> {
    let prof = profile(r).expect("resolved to a tube");
    let ps = pairs(r)?;
    let kind = if r.k.is_some() { "derivative" } else { "szego" };
    let values = ps
        .par_iter()
        .map(|(a, b)| {
            let q = KernelQuery::new(prof.clone(), *a, *b, r.epsilon).with_quadrature(r.quadrature);
            match r.k {
                Some(k) => tube_szego_derivative(&q.with_k(k)),
                None => tube_szego_kernel(&q),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = Report {
        columns: with_pair(&["re", "im", "abs", "error_estimate", "converged"]),
        ..Report::default()
    };
    let mut json_rows = Vec::new();
    for ((a, b), v) in ps.iter().zip(&values) {
        let mut cells = pair_cells(a, b);
        cells.extend([
            num(v.value.re),
            num(v.value.im),
            num(v.value.norm()),
            num(v.error_estimate),
        ]);
        cells.push(v.converged.to_string());
        out.rows.push(cells);
        out.nonconverged += usize::from(!v.converged);
        json_rows.push(json!({ "a": a, "b": b, "kernel": v }));
    }
    out.meta("kind", kind);
    if let Some(k) = r.k {
        out.meta("k", k);
    }
    out.summary = format!(
        "kernel {kind} on {}: {} pairs, {} not converged",
        prof.name(),
        values.len(),
        out.nonconverged
    );
    out.result = json!({ "kind": kind, "rows": json_rows });
    Ok(out)
}

fn run_sharpness(r: &Resolved) -> Result<Report, CliError> {
    let prof = profile(r).expect("resolved to a tube");
    let k = r.k.expect("resolved");
    let ns: Vec<i64> = (r.n_range[0]..=r.n_range[1]).collect();
    let rep = sharpness_scan(&prof, k, &ns, r.epsilon, &r.quadrature)?;
    let ctx = metric_context(r, 1.0, QuadratureConfig::default())?;
    let lower = sharpness_lower_constants(&ctx, &rep.rows)?;
    let mut out = Report {
        columns: vec![
            "n",
            "value",
            "gap",
            "fit",
            "kernel_value",
            "error_estimate",
            "converged",
            "distance",
            "lower_constant",
        ],
        ..Report::default()
    };
    // least-squares line through (ln gap, ln value) with the reported slope
    let count = rep.rows.len() as f64;
    let intercept = rep
        .rows
        .iter()
        .map(|r| r.value.ln() - rep.slope_vs_gap * r.gap.ln())
        .sum::<f64>()
        / count;
    for (row, l) in rep.rows.iter().zip(&lower) {
        out.rows.push(vec![
            row.n.to_string(),
            num(row.value),
            num(row.gap),
            num((intercept + rep.slope_vs_gap * row.gap.ln()).exp()),
            num(row.kernel_value),
            num(row.error_estimate),
            row.converged.to_string(),
            num(l.distance),
            num(l.constant),
        ]);
        out.nonconverged += usize::from(!row.converged);
    }
    let c_min = lower.iter().map(|l| l.constant).fold(f64::INFINITY, f64::min);
    out.meta("k", k);
    out.meta("slope_vs_gap", num(rep.slope_vs_gap));
    out.meta("slope_vs_n", num(rep.slope_vs_n));
    out.meta("min_lower_constant", num(c_min));
    out.summary = format!(
        "sharpness k={k} on {}: slope vs gap {:.4}, slope vs n {:.4}, min lower constant {c_min:.4e}",
        prof.name(),
        rep.slope_vs_gap,
        rep.slope_vs_n
    );
    out.result = json!({ "scan": rep, "lower_constants": lower });
    Ok(out)
}

fn run_bergman(r: &Resolved) -> Result<Report, CliError> {
    let prof = profile(r).expect("resolved to a tube");
    let ps = pairs(r)?;
    let h = r.fd_step;
    let rows = ps
        .par_iter()
        .map(|(a, b)| -> Result<_, CliError> {
            let q = KernelQuery::new(prof.clone(), *a, *b, r.epsilon).with_quadrature(r.quadrature);
            let berg = bergman_kernel(&q)?;
            let up = tube_szego_kernel(&q.clone().with_heights(0.0, h))?;
            let down = tube_szego_kernel(&q.clone().with_heights(0.0, -h))?;
            // S is antiholomorphic in w₂, so ∂_{w̄₂} S = i ∂_{Im w₂} S
            let dwbar = Complex64::i() * (up.value - down.value) / (2.0 * h);
            let relation = 2.0 * Complex64::i() * dwbar;
            let rel = (berg.value - relation).norm() / berg.value.norm();
            let converged = berg.converged && up.converged && down.converged;
            Ok((berg.value, relation, rel, converged))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = Report {
        columns: with_pair(&[
            "bergman_re",
            "bergman_im",
            "relation_re",
            "relation_im",
            "rel_error",
            "pass",
        ]),
        ..Report::default()
    };
    let mut json_rows = Vec::new();
    let mut worst = 0.0f64;
    for ((a, b), (berg, rel_val, rel, conv)) in ps.iter().zip(&rows) {
        let pass = *rel <= BERGMAN_TOL;
        let mut cells = pair_cells(a, b);
        cells.extend([num(berg.re), num(berg.im), num(rel_val.re), num(rel_val.im), num(*rel)]);
        cells.push(pass.to_string());
        out.rows.push(cells);
        out.nonconverged += usize::from(!conv);
        worst = worst.max(*rel);
        json_rows.push(json!({
            "a": a, "b": b, "bergman": berg, "relation": rel_val, "rel_error": rel, "pass": pass,
        }));
    }
    let pass = worst <= BERGMAN_TOL;
    out.meta("fd_step", num(h));
    out.meta("tolerance", num(BERGMAN_TOL));
    out.meta("max_rel_error", num(worst));
    out.meta("pass", pass);
    out.summary = format!(
        "bergman-check on {}: max rel error {worst:.3e} (tol {BERGMAN_TOL:.0e}) {}",
        prof.name(),
        verdict(pass)
    );
    out.result = json!({ "rows": json_rows, "max_rel_error": worst, "pass": pass });
    Ok(out)
}

fn run_envelope(r: &Resolved) -> Result<Report, CliError> {
    let prof = profile(r).expect("resolved to a tube");
    let sampling = r.sampling.expect("resolved");
    let ps = sample_pairs(&sampling)?;
    let ctx = metric_context(r, 1.0, QuadratureConfig::default())?;
    let rep = growth_envelope(&ctx, &prof, &ps, r.epsilon, r.envelope_constant, &r.quadrature)?;
    let mut out = Report {
        columns: with_pair(&["kernel_abs", "distance", "ball_volume", "r", "converged"]),
        ..Report::default()
    };
    for row in &rep.rows {
        let mut cells = pair_cells(&row.a, &row.b);
        cells.extend([num(row.kernel_abs), num(row.distance), num(row.ball_volume), num(row.r)]);
        cells.push(row.converged.to_string());
        out.rows.push(cells);
        out.nonconverged += usize::from(!row.converged);
    }
    let half = rep.max_over_prefix(rep.rows.len() / 2);
    out.meta("seed", sampling.seed);
    out.meta("count", sampling.count);
    out.meta("max_r", num(rep.max_r));
    out.meta("argmax", rep.argmax);
    out.meta("max_r_first_half", num(half));
    out.meta("envelope_constant", num(rep.envelope_constant));
    out.meta("pass", rep.pass);
    out.summary = format!(
        "envelope on {}: max R {:.4e} over {} pairs (first half {half:.4e}), constant {} {}",
        prof.name(),
        rep.max_r,
        rep.rows.len(),
        rep.envelope_constant,
        verdict(rep.pass)
    );
    out.result = json!({ "report": rep, "max_r_first_half": half });
    Ok(out)
}
