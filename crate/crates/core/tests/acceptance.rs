//! Acceptance suite: one PASS/FAIL line per criterion.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use szego_lab::domain::{
    build_potential, fd_laplacian, make_h3_counterexample, make_heisenberg, make_parabolic_tube, make_sharpness_tube,
    make_smoothed_polynomial, make_tube_domain, verify_uft, ConstantWeight, PolynomialWeight, Potential, UftConfig,
    WeightRef,
};
use szego_lab::geometry::{
    default_directions, lambda_integral, mu_invert, mu_star, reconstruct_partials, rho_tilde, vandermonde_coeffs,
    BoundaryPoint, MetricContext, MetricOptions,
};
use szego_lab::quadrature::QuadratureConfig;
use szego_lab::szego::{
    bergman_kernel, growth_envelope, kernel_quadrature, loglog_slope, phase_samples, sample_pairs,
    sharpness_lower_constants, sharpness_scan_default, tube_szego_kernel, KernelQuery, PairSampling,
};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: szego_lab::Error) -> String {
    format!("error: {e}")
}

fn parabolic_diagonal() -> Outcome {
    let mut worst = 0.0f64;
    let mut slowest = 0.0f64;
    for &eps in &[0.5, 1.0, 2.0] {
        for &x in &[0.0, 3.0] {
            let a = BoundaryPoint::new(x, 0.0, 0.0);
            let start = Instant::now();
            let v = tube_szego_kernel(&KernelQuery::new(make_parabolic_tube(), a, a, eps)).map_err(err)?;
            slowest = slowest.max(start.elapsed().as_secs_f64());
            let exact = 1.0 / (4.0 * PI * PI * eps * eps);
            worst = worst.max((v.value - exact).norm() / exact);
        }
    }
    check(
        worst < 0.01 && slowest < 5.0,
        format!("max rel error {worst:.2e} (tol 1e-2), slowest point {slowest:.2} s (limit 5 s)"),
    )
}

fn bergman_relation() -> Outcome {
    let profile = make_parabolic_tube();
    let h = 1e-3;
    let pairs = [
        (
            BoundaryPoint::new(0.2, 0.1, 0.3),
            BoundaryPoint::new(-0.4, 0.3, -0.2),
            0.5,
        ),
        (
            BoundaryPoint::new(1.0, -0.5, 0.0),
            BoundaryPoint::new(0.5, 0.5, 1.0),
            1.0,
        ),
        (
            BoundaryPoint::new(0.0, 0.0, 0.0),
            BoundaryPoint::new(0.0, 0.0, 0.0),
            1.0,
        ),
    ];
    let mut worst_rel = 0.0f64;
    for (a, b, eps) in pairs {
        let q = KernelQuery::new(profile.clone(), a, b, eps);
        let berg = bergman_kernel(&q).map_err(err)?.value;
        let up = tube_szego_kernel(&q.clone().with_heights(0.0, h)).map_err(err)?.value;
        let down = tube_szego_kernel(&q.clone().with_heights(0.0, -h)).map_err(err)?.value;
        // S is antiholomorphic in w₂, so ∂_{w̄₂} S = i ∂_{Im w₂} S
        let fd_dwbar = Complex64::i() * (up - down) / (2.0 * h);
        let relation = 2.0 * Complex64::i() * fd_dwbar;
        worst_rel = worst_rel.max((berg - relation).norm() / berg.norm());
    }
    let mut worst_diag = 0.0f64;
    for &eps in &[1.0, 2.0] {
        let a = BoundaryPoint::new(0.7, -0.3, 0.4);
        let v = bergman_kernel(&KernelQuery::new(profile.clone(), a, a, eps))
            .map_err(err)?
            .value;
        let exact = 1.0 / (PI * PI * eps.powi(3));
        worst_diag = worst_diag.max((v - exact).norm() / exact);
    }
    check(
        worst_rel < 5e-3 && worst_diag < 1e-2,
        format!("relation rel error {worst_rel:.2e} (tol 5e-3), diagonal rel error {worst_diag:.2e} (tol 1e-2)"),
    )
}

fn sharpness() -> Outcome {
    let start = Instant::now();
    let profile = make_sharpness_tube();
    let ns: Vec<i64> = (1..=6).collect();
    let report = sharpness_scan_default(&profile, 1, &ns, 0.01).map_err(err)?;
    let (w, p) = make_tube_domain(profile);
    let ctx = MetricContext::new(w, p, MetricOptions::default()).map_err(err)?;
    let lower = sharpness_lower_constants(&ctx, &report.rows).map_err(err)?;
    let c_min = lower.iter().map(|l| l.constant).fold(f64::INFINITY, f64::min);
    let elapsed = start.elapsed().as_secs_f64();
    let converged = report.rows.iter().all(|r| r.converged);
    check(
        (report.slope_vs_gap + 3.0).abs() <= 0.2
            && (report.slope_vs_n + 6.0).abs() <= 0.5
            && c_min > 0.0
            && converged
            && elapsed < 120.0,
        format!(
            "slope vs gap {:.4} (-3 ± 0.2), slope vs n {:.4} (-6 ± 0.5), min lower constant {c_min:.4e}, {elapsed:.1} s (limit 120 s)",
            report.slope_vs_gap, report.slope_vs_n
        ),
    )
}

fn laplace_scalings() -> Outcome {
    let profile = make_sharpness_tube();
    let cfg = kernel_quadrature();
    let taus: Vec<f64> = (0..=30).map(|i| 0.1 * 1000f64.powf(i as f64 / 30.0)).collect();
    let mut points = Vec::new();
    for &tau in &taus {
        for &s in &[0.0, 0.5, 2.0] {
            points.push((tau, s * tau));
        }
    }
    let band = phase_samples(&profile, &points, &cfg).map_err(err)?;
    let hi = band.iter().map(|s| s.scaled_width).fold(0.0, f64::max);
    let lo = band.iter().map(|s| s.scaled_width).fold(f64::INFINITY, f64::min);
    let ratio = hi / lo;

    let tau = 1.0;
    let etas: Vec<f64> = (0..=20).map(|i| 0.5 * 100f64.powf(i as f64 / 20.0)).collect();
    let pts: Vec<(f64, f64)> = etas.iter().map(|&e| (tau, e)).collect();
    let growth = phase_samples(&profile, &pts, &cfg).map_err(err)?;
    let neg_phi0: Vec<f64> = growth.iter().map(|s| s.neg_phi0).collect();
    let exponent = loglog_slope(&etas, &neg_phi0).map_err(err)?;
    check(
        ratio <= 10.0 && (exponent - 2.0).abs() <= 0.05,
        format!("|L|·τ^(1/2) band ratio {ratio:.3} over τ ∈ [0.1, 100] (limit 10), -φ(θ₀) exponent in η {exponent:.4} (2 ± 0.05)"),
    )
}

fn geometry_invariants() -> Outcome {
    let (w, p) = make_heisenberg();
    let heis = MetricContext::new(w, p, MetricOptions::default()).map_err(err)?;
    let (tw, tp) = make_tube_domain(make_sharpness_tube());
    let tube = MetricContext::new(tw, tp, MetricOptions::default()).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);

    let mut round_trip = 0.0f64;
    for ctx in [&heis, &tube] {
        for i in 0..=12 {
            let t = 10f64.powf(-3.0 + 0.5 * i as f64);
            let z = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let delta = mu_invert(ctx, z, t).map_err(err)?;
            let back = lambda_integral(ctx, z, delta).map_err(err)?;
            round_trip = round_trip.max((back - t).abs() / t);
        }
    }

    let mut heis_lambda = 0.0f64;
    for i in 0..20 {
        let delta = 10f64.powf(-2.0 + 0.2 * i as f64);
        let z = Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let exact = 4.0 * PI * delta * delta;
        heis_lambda = heis_lambda.max((lambda_integral(&heis, z, delta).map_err(err)? - exact).abs() / exact);
    }

    let mut doubling = 0.0f64;
    let quartic = make_smoothed_polynomial(Arc::new(PolynomialWeight::radial_power(1.0, 1)));
    let (qw, qp) = (quartic.clone(), Arc::new(WeightOnly(quartic)) as Arc<dyn Potential>);
    let poly = MetricContext::new(
        qw,
        qp,
        MetricOptions {
            m: 4,
            ..MetricOptions::default()
        },
    )
    .map_err(err)?;
    for i in 0..1000 {
        let ctx = [&heis, &tube, &poly][i % 3];
        let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let t = 10f64.powf(rng.random_range(-4.0..3.0));
        let ratio = mu_star(ctx, z, 2.0 * t).map_err(err)? / mu_star(ctx, z, t).map_err(err)?;
        doubling = doubling.max(ratio);
    }

    let nu = heis.options.nu();
    let mut symmetric = true;
    let mut triangle = 0.0f64;
    let point = |rng: &mut ChaCha8Rng| {
        BoundaryPoint::new(
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-5.0..5.0),
        )
    };
    for _ in 0..1000 {
        let (a, b, c) = (point(&mut rng), point(&mut rng), point(&mut rng));
        let tau = 10f64.powf(rng.random_range(-2.0..2.0));
        let ab = rho_tilde(&heis, &a, &b, tau).map_err(err)?;
        let ba = rho_tilde(&heis, &b, &a, tau).map_err(err)?;
        let bc = rho_tilde(&heis, &b, &c, tau).map_err(err)?;
        let ac = rho_tilde(&heis, &a, &c, tau).map_err(err)?;
        symmetric &= ab == ba;
        triangle = triangle.max(ac / (ab + bc));
    }
    check(
        round_trip <= 1e-8 && heis_lambda <= 1e-6 && doubling <= 2f64.sqrt() * (1.0 + 1e-12) && symmetric && triangle <= 2f64.powf(nu),
        format!(
            "μ round trip {round_trip:.2e} (1e-8), Heisenberg Λ {heis_lambda:.2e} (1e-6), max μ*(2t)/μ*(t) {doubling:.12} (√2), ρ̃ symmetric {symmetric}, quasi-triangle {triangle:.4} (2^ν = {:.4})",
            2f64.powf(nu)
        ),
    )
}

/// Potential slot for contexts whose checks only touch the weight.
#[derive(Debug)]
struct WeightOnly(WeightRef);

impl Potential for WeightOnly {
    fn eval(&self, _z: Complex64) -> szego_lab::Result<f64> {
        Err(szego_lab::Error::Capability("no potential attached".into()))
    }
    fn grad_z(&self, _z: Complex64) -> szego_lab::Result<Complex64> {
        Err(szego_lab::Error::Capability("no potential attached".into()))
    }
    fn holo_deriv(&self, _j: usize, _z: Complex64) -> szego_lab::Result<Complex64> {
        Err(szego_lab::Error::Capability("no potential attached".into()))
    }
    fn weight(&self) -> WeightRef {
        self.0.clone()
    }
    fn name(&self) -> String {
        "weight-only".into()
    }
}

fn falling(n: usize, k: usize) -> f64 {
    (0..k).map(|i| (n - i) as f64).product()
}

fn binom(n: usize, k: usize) -> f64 {
    falling(n, k) / falling(k, k)
}

fn vandermonde() -> Outcome {
    let z = Complex64::new(0.37, -0.61);
    let mut worst = 0.0f64;
    let mut bounds = true;
    for j in 1..=4 {
        let dirs = default_directions(j);
        let table = vandermonde_coeffs(j, &dirs).map_err(err)?;
        bounds &= table.bound_holds;
        for a in 0..=j {
            let b = j - a;
            // ∇^j_ν (z^a z̄^b) = j! [s^j] (z + sν)^a (z̄ + sν̄)^b
            let directional: Vec<Complex64> = dirs
                .iter()
                .map(|nu| {
                    let mut coeff = Complex64::new(0.0, 0.0);
                    for p in 0..=a {
                        let q = j - p;
                        if q > b {
                            continue;
                        }
                        coeff += binom(a, p)
                            * z.powu((a - p) as u32)
                            * nu.powu(p as u32)
                            * binom(b, q)
                            * z.conj().powu((b - q) as u32)
                            * nu.conj().powu(q as u32);
                    }
                    coeff * falling(j, j)
                })
                .collect();
            let re: Vec<f64> = directional.iter().map(|c| c.re).collect();
            let im: Vec<f64> = directional.iter().map(|c| c.im).collect();
            let pr = reconstruct_partials(&table, &re).map_err(err)?;
            let pi = reconstruct_partials(&table, &im).map_err(err)?;
            let scale = falling(a, a) * falling(b, b);
            for k in 0..=j {
                let got = pr[k] + Complex64::i() * pi[k];
                let exact = if k == a { scale } else { 0.0 };
                worst = worst.max((got - exact).norm() / scale);
            }
        }
    }
    check(
        worst <= 1e-10 && bounds,
        format!(
            "max rel reconstruction error {worst:.2e} over z^a z̄^b, a+b ≤ 4 (1e-10), coefficient bound holds {bounds}"
        ),
    )
}

fn potential_construction() -> Outcome {
    let q = QuadratureConfig::default().with_rel_tol(1e-10).with_abs_tol(1e-12);
    let mut worst_lap = 0.0f64;
    let mut grad_band = (f64::INFINITY, 0.0f64);
    for c in [4.0, 1.0] {
        let w: WeightRef = Arc::new(ConstantWeight::new(c).map_err(err)?);
        let p = build_potential(w, &q).map_err(err)?;
        for i in 0..21 {
            for j in 0..21 {
                let z = Complex64::new(-3.0 + 0.3 * i as f64, -3.0 + 0.3 * j as f64);
                if z.norm() > 3.0 {
                    continue;
                }
                let lap = fd_laplacian(|u| p.eval(u), z, 1e-2).map_err(err)?;
                worst_lap = worst_lap.max((lap - c).abs());
            }
        }
        for i in 0..=16 {
            let r = 1.0 + 0.25 * i as f64;
            let z = Complex64::from_polar(r, 0.37 * i as f64);
            let g = 2.0 * p.grad_z(z).map_err(err)?.norm();
            let ratio = g / r / c;
            grad_band = (grad_band.0.min(ratio), grad_band.1.max(ratio));
        }
    }
    check(
        worst_lap <= 1e-3 && grad_band.1.is_finite() && grad_band.1 <= 10.0,
        format!(
            "max |ΔP̃ - h| {worst_lap:.2e} on the 21×21 grid (1e-3), |∇P̃|/(|z| h) in [{:.4}, {:.4}] over 1 ≤ |z| ≤ 5",
            grad_band.0, grad_band.1
        ),
    )
}

fn envelope() -> Outcome {
    let (w, p) = make_tube_domain(make_parabolic_tube());
    let ctx = MetricContext::new(w, p, MetricOptions::default()).map_err(err)?;
    let pairs = sample_pairs(&PairSampling {
        count: 100,
        ..PairSampling::default()
    })
    .map_err(err)?;
    let report = growth_envelope(
        &ctx,
        &make_parabolic_tube(),
        &pairs,
        0.5,
        f64::INFINITY,
        &kernel_quadrature(),
    )
    .map_err(err)?;
    let m50 = report.max_over_prefix(50);
    let m100 = report.max_over_prefix(100);
    let ratio = m100 / m50;
    check(
        m50.is_finite() && m50 > 0.0 && (ratio - 1.0).abs() <= 0.2,
        format!("max R over 50 pairs {m50:.6}, over 100 pairs {m100:.6}, ratio {ratio:.4} (1 ± 0.2)"),
    )
}

fn uft_detection() -> Outcome {
    let cfg = UftConfig::default();
    let bad = verify_uft(make_h3_counterexample().as_ref(), 2, &cfg).map_err(err)?;
    let monotone = bad.h3_curve.windows(2).all(|p| p[1].value >= p[0].value);
    let (hw, _) = make_heisenberg();
    let heis = verify_uft(hw.as_ref(), 2, &cfg).map_err(err)?;
    let (tw, _) = make_tube_domain(make_parabolic_tube());
    let tube = verify_uft(tw.as_ref(), 2, &cfg).map_err(err)?;
    let smooth = make_smoothed_polynomial(Arc::new(PolynomialWeight::radial_power(1.0, 1)));
    let poly = verify_uft(smooth.as_ref(), 4, &cfg).map_err(err)?;
    let all = |r: &szego_lab::domain::UftReport| r.verdicts.h1 && r.verdicts.h2 && r.verdicts.h3;
    check(
        !bad.verdicts.h3 && monotone && all(&heis) && all(&tube) && all(&poly),
        format!(
            "counterexample H3 {} (slope {:.3e} vs {:.1e}, monotone {monotone}), Heisenberg {}, parabolic tube {}, smoothed polynomial {}",
            if bad.verdicts.h3 { "pass" } else { "fail" },
            bad.h3_growth_slope,
            bad.thresholds.h3_slope_max,
            all(&heis),
            all(&tube),
            all(&poly)
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("parabolic-tube diagonal Szegő value", parabolic_diagonal),
        ("Bergman-Szegő relation", bergman_relation),
        ("sharpness slopes", sharpness),
        ("convex-Laplace scalings", laplace_scalings),
        ("geometry invariants", geometry_invariants),
        ("Vandermonde reconstruction", vandermonde),
        ("potential construction", potential_construction),
        ("growth envelope stability", envelope),
        ("UFT counterexample detection", uft_detection),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail} [{secs:.1} s]", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {} {name}: {detail} [{secs:.1} s]", i + 1)
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
