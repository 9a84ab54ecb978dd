mod common;

use approx::assert_relative_eq;
use common::{bump, eval_scaled, factorial, legendre, quad, shifted_legendre_coeffs};
use deconv_multiscale::kernels::{
    beta_constant, derivative_norm_closed_form, fractional_derivative_grid, gauss_legendre, make_beta_kernel,
    GridFunction, Polynomial, Side,
};
use deconv_multiscale::teststat::{fractional_derivative_norm, principal_kernel_norm};
use proptest::prelude::*;

#[test]
fn uniform_kernel_is_order_zero() {
    let phi = make_beta_kernel(0).unwrap();
    assert_eq!(beta_constant(0).unwrap(), 1);
    for x in [0.0, 0.3, 0.999] {
        assert_eq!(phi.eval(x), 1.0);
    }
    assert_eq!(phi.eval(1.0), 0.0);
    assert_eq!(phi.eval(-0.1), 0.0);
    assert_eq!(phi.derivative(0).unwrap().eval(0.4), 1.0);
    assert_eq!(derivative_norm_closed_form(0).unwrap(), 1.0);
}

#[test]
fn beta_4_4_constant() {
    assert_eq!(beta_constant(3).unwrap(), 140);
    let mass = quad(|x| x.powi(3) * (1.0 - x).powi(3), 0.0, 1.0, 4);
    assert_relative_eq!(1.0 / mass, 140.0, max_relative = 1e-12);
}

#[test]
fn first_order_kernel_and_derivative() {
    let phi = make_beta_kernel(1).unwrap();
    let d = phi.derivative(1).unwrap();
    for i in 0..=100 {
        let x = i as f64 / 100.0;
        if x < 1.0 {
            assert_relative_eq!(phi.eval(x), 6.0 * x * (1.0 - x), epsilon = 1e-14);
        }
        assert_relative_eq!(d.eval(x), 6.0 - 12.0 * x, epsilon = 1e-13);
    }
    let n = quad(|x| (6.0 - 12.0 * x).powi(2), 0.0, 1.0, 1).sqrt();
    assert_relative_eq!(n, 12f64.sqrt(), max_relative = 1e-14);
    assert_relative_eq!(derivative_norm_closed_form(1).unwrap(), 2.0 * 3f64.sqrt(), max_relative = 1e-15);
}

#[test]
fn third_derivative_is_scaled_legendre() {
    let d3 = make_beta_kernel(3).unwrap().derivative(3).unwrap();
    for i in 0..=200 {
        let x = i as f64 / 200.0;
        assert_relative_eq!(d3.eval(x), -840.0 * legendre(3, 2.0 * x - 1.0), epsilon = 1e-9);
    }
}

#[test]
fn legendre_identity_exact_up_to_order_five() {
    const N: i128 = 10_000;
    for k in 0..=5usize {
        let dk = make_beta_kernel(k as u32).unwrap().derivative(k as u32).unwrap();
        let lhs: Vec<i128> = dk.coeffs().iter().map(|&c| c as i128).collect();
        assert!(dk.coeffs().iter().all(|c| c.fract() == 0.0));
        let c = (if k % 2 == 0 { 1.0 } else { -1.0 } * factorial(2 * k as u64 + 1) / factorial(k as u64)) as i128;
        let rhs: Vec<i128> = shifted_legendre_coeffs(k).iter().map(|a| a * c).collect();
        for i in 0..=N {
            assert_eq!(eval_scaled(&lhs, i, N, k), eval_scaled(&rhs, i, N, k), "k = {k}, x = {i}/{N}");
        }
    }
}

#[test]
fn mass_positivity_and_boundary_flatness() {
    for k in 0..=8u32 {
        let phi = make_beta_kernel(k).unwrap();
        assert!((quad(|x| phi.eval(x), 0.0, 1.0, 8) - 1.0).abs() < 1e-10, "k = {k}");
        let min = (0..=10_000).map(|i| phi.eval(i as f64 / 10_000.0)).fold(f64::INFINITY, f64::min);
        assert!(min >= 0.0);
        for j in 0..k {
            let d = phi.derivative(j).unwrap();
            assert_eq!(d.eval(0.0), 0.0, "k = {k}, j = {j}");
            assert!(d.eval(1.0).abs() < 1e-9 * beta_constant(k).unwrap() as f64);
        }
    }
}

#[test]
fn derivative_norms_match_quadrature() {
    for k in 0..=6u32 {
        let d = make_beta_kernel(k).unwrap().derivative(k).unwrap();
        let num = quad(|x| d.eval(x).powi(2), 0.0, 1.0, 8).sqrt();
        let closed = derivative_norm_closed_form(k).unwrap();
        assert!((closed - num).abs() / closed < 1e-8, "k = {k}: {closed} vs {num}");
    }
    assert_relative_eq!(derivative_norm_closed_form(3).unwrap(), 120.0 * 7f64.sqrt(), max_relative = 1e-15);
}

/// `‖D^{1/2} g‖₂²` for a polynomial `g` on [0,1] with `g(0) = g(1) = 0`, from the double-integral form
/// `(2π)⁻¹ ∬ (g(x) − g(y))² / (x − y)² dx dy`. Every integrand is a polynomial, so Gauss–Legendre is exact.
fn half_derivative_norm_sq(g: &Polynomial) -> f64 {
    let c = g.coeffs();
    let divided = |x: f64, y: f64| -> f64 {
        (1..c.len()).map(|j| c[j] * (0..j).map(|a| x.powi(a as i32) * y.powi((j - 1 - a) as i32)).sum::<f64>()).sum()
    };
    let (nodes, weights) = gauss_legendre(30);
    let map = |u: f64| 0.5 * (u + 1.0);
    let mut inner = 0.0;
    for (&u, &wu) in nodes.iter().zip(&weights) {
        for (&v, &wv) in nodes.iter().zip(&weights) {
            inner += 0.25 * wu * wv * divided(map(u), map(v)).powi(2);
        }
    }
    let outer: f64 =
        nodes.iter().zip(&weights).map(|(&u, &w)| 0.5 * w * g.eval(map(u)).powi(2) * (1.0 / map(u) + 1.0 / (1.0 - map(u)))).sum();
    (inner + 2.0 * outer) / (2.0 * std::f64::consts::PI)
}

#[test]
fn half_integer_norms_match_double_integral() {
    for k in 1..=4u32 {
        let phi = make_beta_kernel(k).unwrap();
        let g = phi.derivative(k - 1).unwrap();
        let oracle = half_derivative_norm_sq(&g).sqrt();
        let q = k as f64 - 0.5;
        assert_relative_eq!(fractional_derivative_norm(&phi, q).unwrap(), oracle, max_relative = 1e-6);
        assert_relative_eq!(principal_kernel_norm(&phi, q).unwrap(), oracle, max_relative = 1e-6);
    }
}

#[test]
fn fractional_norm_of_too_rough_kernel_is_refused() {
    // φ_0 jumps, so only orders below 1/2 have finite norm.
    let phi = make_beta_kernel(0).unwrap();
    assert!(fractional_derivative_norm(&phi, 0.6).is_err());
    assert_relative_eq!(fractional_derivative_norm(&phi, 0.0).unwrap(), 1.0, max_relative = 1e-6);
}

fn gaussian_grid(n: usize, step: f64) -> GridFunction {
    let origin = -(n as f64) * step / 2.0;
    GridFunction::sample(origin, step, n, |x| (-x * x / 0.02).exp()).unwrap()
}

#[test]
fn order_zero_is_identity() {
    let f = gaussian_grid(4096, 1e-3);
    let g = fractional_derivative_grid(&f, 0.0, Side::Plus).unwrap();
    let err = f.samples().iter().zip(g.samples()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err < 1e-12, "{err}");
}

#[test]
fn order_one_matches_centered_differences() {
    for step in [2e-3, 1e-3] {
        let f = gaussian_grid(4096, step);
        let g = fractional_derivative_grid(&f, 1.0, Side::Plus).unwrap();
        let v = f.real_parts();
        let mut err: f64 = 0.0;
        for i in 1..v.len() - 1 {
            let fd = (v[i + 1] - v[i - 1]) / (2.0 * step);
            err = err.max((g.samples()[i].re - fd).abs());
        }
        // Centered differences are O(step²) off; 50/0.02² bounds the third derivative of this bump.
        assert!(err < step * step * 2000.0, "step {step}: {err}");
    }
}

#[test]
fn integer_orders_match_exact_derivative() {
    let d1 = |x: f64| if x.abs() < 1.0 { -2.0 * x / (1.0 - x * x).powi(2) * bump(x) } else { 0.0 };
    for n in [1usize << 12, 1 << 13] {
        let step = 4.0 / n as f64;
        let f = GridFunction::sample(-2.0, step, n, bump).unwrap();
        let g = fractional_derivative_grid(&f, 1.0, Side::Minus).unwrap();
        // D_− of order one is −d/dx.
        let err = (0..n)
            .filter(|&i| f.x(i).abs() < 0.9)
            .map(|i| (g.samples()[i].re + d1(f.x(i))).abs())
            .fold(0.0, f64::max);
        assert!(err < 10.0 * step, "n = {n}: {err}");
    }
}

#[test]
fn half_derivative_semigroup_on_kernel() {
    // φ_3 convolved with a narrow bump so that it is smooth at the grid scale.
    let phi = make_beta_kernel(3).unwrap();
    let n = 1 << 15;
    let step = 8.0 / n as f64;
    let eps = 0.05;
    let mass = quad(|u| bump(u / eps), -eps, eps, 8);
    let smooth = |x: f64| quad(|u| phi.eval(x - u) * bump(u / eps), -eps, eps, 4) / mass;
    let f = GridFunction::sample(-4.0, step, n, smooth).unwrap();
    let half = fractional_derivative_grid(&f, 0.5, Side::Plus).unwrap();
    let twice = fractional_derivative_grid(&half, 0.5, Side::Plus).unwrap();
    let once = fractional_derivative_grid(&f, 1.0, Side::Plus).unwrap();
    let err = once.samples().iter().zip(twice.samples()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err / once.sup_norm() < 1e-4, "{}", err / once.sup_norm());
}

proptest! {
    #[test]
    fn kernels_are_symmetric_nonnegative_and_supported(k in 0u32..=10, x in -0.5f64..1.5) {
        let phi = make_beta_kernel(k).unwrap();
        let v = phi.eval(x);
        prop_assert!(v >= 0.0);
        if !(0.0..1.0).contains(&x) {
            prop_assert_eq!(v, 0.0);
        } else if x > 0.0 {
            prop_assert!((v - phi.eval(1.0 - x)).abs() <= 1e-9 * (1.0 + v));
        }
    }

    #[test]
    fn derivative_matches_difference_quotient(k in 1u32..=6, x in 0.05f64..0.95) {
        let phi = make_beta_kernel(k).unwrap();
        let d = phi.derivative(1).unwrap();
        let h = 1e-6;
        let fd = (phi.eval(x + h) - phi.eval(x - h)) / (2.0 * h);
        prop_assert!((fd - d.eval(x)).abs() <= 1e-5 * (1.0 + d.eval(x).abs()) * beta_constant(k).unwrap() as f64);
    }

    #[test]
    fn fractional_symbol_is_multiplicative(beta1 in 0.0f64..2.0, beta2 in 0.0f64..2.0, xi in -50.0f64..50.0) {
        use deconv_multiscale::kernels::fractional_symbol;
        let a = fractional_symbol(xi, beta1, Side::Plus) * fractional_symbol(xi, beta2, Side::Plus);
        let b = fractional_symbol(xi, beta1 + beta2, Side::Plus);
        prop_assert!((a - b).norm() <= 1e-9 * (1.0 + b.norm()));
    }
}
