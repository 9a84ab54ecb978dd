//! Acceptance criteria, one line of output per criterion.

mod common;

use common::{eval_scaled, factorial, legendre, median, quad, shifted_legendre_coeffs, workers};
use deconv_multiscale::error_models::ErrorModel;
use deconv_multiscale::experiments::{
    coverage_experiment, fig2, laplace_derivative_config, unbiasedness, CoverageSetup, Fig2Row,
};
use deconv_multiscale::gaussian_sim::{quantile, simulate_statistic};
use deconv_multiscale::kernels::{
    beta_constant, derivative_norm_closed_form, fractional_derivative_grid, make_beta_kernel, GridFunction, Side,
};
use deconv_multiscale::operators::{OperatorSpec, ProblemSpec};
use deconv_multiscale::synth::DensitySpec;
use deconv_multiscale::teststat::{
    build_index_set, v_closed_form_laplace_d, v_fourier, v_fourier_with, weight, IndexKind, Mode,
};
use std::f64::consts::E;
use std::process::ExitCode;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn c1_quantile(rows: &[Fig2Row]) -> Outcome {
    let row = rows.iter().find(|r| r.n == 10_000).expect("n = 10000 row");
    let q = quantile(&row.samples, 0.1).unwrap();
    outcome(
        (-0.14..=0.06).contains(&q.value),
        format!(
            "q_0.1 = {:.4} (mc se {:.4}, {} reps, {} pairs); accepted range [-0.14, 0.06]",
            q.value, q.mc_stderr, q.reps, row.pairs
        ),
    )
}

fn c2_fig2(rows: &[Fig2Row]) -> Outcome {
    let medians: Vec<f64> = rows.iter().map(|r| r.summary.median).collect();
    let increasing = medians.windows(2).all(|w| w[0] < w[1]);
    let max = rows.iter().map(|r| r.summary.max).fold(f64::NEG_INFINITY, f64::max);
    let text: Vec<String> = rows
        .iter()
        .map(|r| format!("n={}: median {:.3}, range [{:.3}, {:.3}]", r.n, r.summary.median, r.summary.min, r.summary.max))
        .collect();
    outcome(increasing && max <= 3.0, format!("{}; medians increasing: {increasing}, overall max {max:.3}", text.join("; ")))
}

fn c3_kernels() -> Outcome {
    let mass = quad(|x| x.powi(3) * (1.0 - x).powi(3), 0.0, 1.0, 8);
    let c3 = 1.0 / mass;
    let c3_err = (c3 - 140.0).abs() / 140.0;
    let k3 = make_beta_kernel(3).unwrap();
    let d3 = k3.derivative(3).unwrap();
    let norm = quad(|x| d3.eval(x).powi(2), 0.0, 1.0, 8).sqrt();
    let target = 120.0 * 7f64.sqrt();
    let norm_err = (norm - target).abs() / target;
    let closed_err = (derivative_norm_closed_form(3).unwrap() - target).abs() / target;
    // Both sides have integer coefficients in x, so the identity is checked exactly at x = i/N.
    const N: i128 = 10_000;
    let mut exact_mismatches = 0usize;
    let mut float_err: f64 = 0.0;
    for k in 0..=5u32 {
        let dk = make_beta_kernel(k).unwrap().derivative(k).unwrap();
        let lhs: Vec<i128> = dk.coeffs().iter().map(|&c| c as i128).collect();
        let c = if k % 2 == 0 { 1.0 } else { -1.0 } * factorial(2 * k as u64 + 1) / factorial(k as u64);
        let rhs: Vec<i128> = shifted_legendre_coeffs(k as usize).iter().map(|&a| a * c as i128).collect();
        for i in 0..=N {
            if eval_scaled(&lhs, i, N, k as usize) != eval_scaled(&rhs, i, N, k as usize) {
                exact_mismatches += 1;
            }
            let x = i as f64 / N as f64;
            float_err = float_err.max((dk.eval(x) - c * legendre(k as usize, 2.0 * x - 1.0)).abs());
        }
    }
    let legendre_err = if exact_mismatches == 0 { 0.0 } else { f64::INFINITY };
    let exact_c3 = beta_constant(3).unwrap() == 140;
    outcome(
        c3_err < 1e-8 && norm_err < 1e-8 && closed_err < 1e-8 && legendre_err < 1e-8 && exact_c3,
        format!(
            "c_3 rel err {c3_err:.1e}, ||phi_3'''|| rel err {norm_err:.1e}, closed form rel err {closed_err:.1e}, Legendre sup err {legendre_err:.1e} in exact arithmetic ({exact_mismatches} mismatches, k <= 5; f64 evaluation differs by {float_err:.1e})"
        ),
    )
}

fn c4_fourier() -> Outcome {
    let theta = 0.075;
    let spec = ProblemSpec::new(OperatorSpec::derivative(1), ErrorModel::laplace(theta).unwrap()).unwrap();
    let kernel = make_beta_kernel(3).unwrap();
    let t = 0.4;
    let mut pass = true;
    let mut parts = Vec::new();
    for h in [1.0 / 16.0, 1.0 / 64.0] {
        let step = h / 64.0;
        // 2^16 samples at h/64 span 1024 h.
        let halfwidth = 512.0;
        let closed = v_closed_form_laplace_d(theta, &kernel, t, h).unwrap();
        let sup_err = |g: &GridFunction| {
            let (mut err, mut sup): (f64, f64) = (0.0, 0.0);
            for i in 0..g.len() {
                let y = g.x(i);
                if (y - t).abs() <= 1.0 {
                    let c = closed.eval(y);
                    sup = sup.max(c.abs());
                    err = err.max((g.samples()[i].re - c).abs());
                }
            }
            err / sup
        };
        match v_fourier(&spec, &kernel, t, h, step, halfwidth) {
            Ok(g) => {
                let rel = sup_err(&g);
                pass &= rel <= 1e-3;
                parts.push(format!("h=1/{:.0}: sup err / sup|v| = {rel:.2e}", 1.0 / h));
            }
            Err(e) => {
                pass = false;
                let diag = v_fourier_with(&spec, &kernel, t, h, step, halfwidth, None).unwrap();
                parts.push(format!(
                    "h=1/{:.0}: {e}; without the aliasing guard sup err / sup|v| = {:.2e}, upper-band energy {:.2}%",
                    1.0 / h,
                    sup_err(&diag.grid),
                    100.0 * diag.alias_fraction
                ));
            }
        }
    }
    outcome(pass, parts.join("; "))
}

fn c5_unbiasedness() -> Outcome {
    let pairs = [(0.2, 0.2), (0.5, 0.1), (0.7, 0.25), (0.3, 0.05), (0.1, 0.4)];
    let rows = unbiasedness(&DensitySpec::smooth_unimodal(), 0.075, &pairs, 500, 2000, 11).unwrap();
    let worst = rows.iter().map(|r| r.z_score().abs()).fold(0.0, f64::max);
    let z: Vec<String> = rows.iter().map(|r| format!("{:.2}", r.z_score())).collect();
    outcome(worst <= 3.0, format!("z-scores [{}], worst |z| = {worst:.2} (limit 3)", z.join(", ")))
}

fn c6_c7_coverage() -> (Outcome, Outcome) {
    let setup = CoverageSetup { workers: workers(), ..CoverageSetup::default() };
    let o = coverage_experiment(&DensitySpec::trimodal(), &setup).unwrap();
    let cov = o.coverage();
    let art = o.no_artefact_rate();
    (
        outcome(
            cov >= 0.85,
            format!(
                "simultaneous coverage {cov:.3} over {} replications (q_0.1 = {:.3}, general norms); need >= 0.85",
                setup.reps, o.q_alpha
            ),
        ),
        outcome(
            art >= 0.85,
            format!("mode bound <= {} true modes in {art:.3} of replications; need >= 0.85", o.true_modes),
        ),
    )
}

fn c8_circle() -> Outcome {
    let nu = E + 0.01;
    let config = laplace_derivative_config(0.075).unwrap().with_nu(nu);
    let (mut medians, mut coarse) = (Vec::new(), Vec::new());
    for k in [64usize, 512, 4096] {
        let set = build_index_set(IndexKind::Circle { k }).unwrap();
        // The left-point sum at the default h/16 inflates the variance of each ratio by about
        // ten percent, which drags the median upward. Measure at h/128 where that is below one percent.
        let fine = config.clone().with_grid_step(1.0 / (128.0 * k as f64));
        let s = simulate_statistic(&fine, &set, Mode::Principal, 4000, 8, workers()).unwrap();
        medians.push(median(&s));
        let s = simulate_statistic(&config, &set, Mode::Principal, 4000, 8, workers()).unwrap();
        coarse.push(median(&s));
    }
    let approaching = medians.windows(2).all(|w| (w[1] + 0.25).abs() < (w[0] + 0.25).abs() && w[0] < w[1]);
    let bracket = (-0.5..=0.1).contains(&medians[2]);
    outcome(
        approaching && bracket,
        format!(
            "nu = e + 0.01, step h/128, medians K=64: {:.3}, K=512: {:.3}, K=4096: {:.3}; approaching -1/4: {approaching}; \
             K=4096 in [-0.5, 0.1]: {bracket} (default step h/16 gives {:.3}, {:.3}, {:.3})",
            medians[0], medians[1], medians[2], coarse[0], coarse[1], coarse[2]
        ),
    )
}

fn c9_weights() -> Outcome {
    let mut violations = 0;
    for nu in [E + 0.01, E.powi(2).exp()] {
        let upper = nu * (-E * E).exp();
        let dec: Vec<f64> = (1..=10_000).map(|i| weight(upper * i as f64 / 10_000.0, nu)).collect();
        violations += dec.windows(2).filter(|w| !(w[1] < w[0])).count();
        let inc: Vec<f64> = (1..=10_000)
            .map(|i| {
                let h = i as f64 / 10_000.0;
                weight(h, nu) * h.sqrt()
            })
            .collect();
        violations += inc.windows(2).filter(|w| !(w[1] > w[0])).count();
    }
    outcome(violations == 0, format!("{violations} monotonicity violations on 10^4-point grids for nu in {{e + 0.01, exp(e^2)}}"))
}

fn c10_semigroup() -> Outcome {
    let n = 1 << 16;
    let step = 4.0 / n as f64;
    let bump = |x: f64| if x.abs() < 1.0 { (-1.0 / (1.0 - x * x)).exp() } else { 0.0 };
    let f = GridFunction::sample(-2.0, step, n, bump).unwrap();
    let half = fractional_derivative_grid(&f, 0.5, Side::Plus).unwrap();
    let twice = fractional_derivative_grid(&half, 0.5, Side::Plus).unwrap();
    let once = fractional_derivative_grid(&f, 1.0, Side::Plus).unwrap();
    let sup = once.sup_norm();
    let err = once.samples().iter().zip(twice.samples()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let rel = err / sup;
    outcome(rel < 1e-4, format!("sup |D^1/2 D^1/2 f - D^1 f| / sup |D^1 f| = {rel:.2e} at 2^16 points"))
}

fn main() -> ExitCode {
    let mut all = true;
    let mut report = |id: &str, name: &str, o: Outcome| {
        all &= o.pass;
        println!("[{}] {id} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    };
    let rows = fig2(&[200, 1000, 10_000], 10_000, 2024, workers()).unwrap();
    report("C1", "quantile reproduction", c1_quantile(&rows));
    report("C2", "boxplot shape", c2_fig2(&rows));
    report("C3", "kernel closed forms", c3_kernels());
    report("C4", "multiplier path equivalence", c4_fourier());
    report("C5", "unbiasedness", c5_unbiasedness());
    let (c6, c7) = c6_c7_coverage();
    report("C6", "simultaneous coverage", c6);
    report("C7", "no artefacts", c7);
    report("C8", "circle-grid lower bound", c8_circle());
    report("C9", "weight calibration", c9_weights());
    report("C10", "fractional semigroup", c10_semigroup());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
