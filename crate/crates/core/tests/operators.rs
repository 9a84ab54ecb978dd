mod common;

use approx::assert_relative_eq;
use common::{bump, quad};
use deconv_multiscale::error_models::ErrorModel;
use deconv_multiscale::kernels::{make_beta_kernel, Polynomial, ScaledPoly, Side};
use deconv_multiscale::operators::{
    adjoint_apply, lambda_multiplier, sigma_tau, Coefficient, OperatorSpec, ProblemSpec, TestFunction,
};
use deconv_multiscale::teststat::v_fourier_with;
use num_complex::Complex64;
use proptest::prelude::*;

fn laplace_d(theta: f64) -> ProblemSpec {
    ProblemSpec::new(OperatorSpec::derivative(1), ErrorModel::laplace(theta).unwrap()).unwrap()
}

#[test]
fn laplace_derivative_multiplier() {
    let theta = 0.075;
    let spec = laplace_d(theta);
    for s in [-30.0, -1.0, 0.25, 4.0, 200.0] {
        let expect = Complex64::new(0.0, -s * (1.0 + theta * theta * s * s));
        let got = lambda_multiplier(&spec, s).unwrap();
        assert!((got - expect).norm() <= 1e-12 * expect.norm(), "s = {s}: {got} vs {expect}");
    }
    assert_eq!(lambda_multiplier(&spec, 0.0).unwrap().norm(), 0.0);
}

#[test]
fn direct_identity_multiplier_is_one() {
    let spec = ProblemSpec::new(OperatorSpec::identity(), ErrorModel::none()).unwrap();
    for s in [-10.0, 0.0, 3.5] {
        assert_eq!(lambda_multiplier(&spec, s).unwrap(), Complex64::new(1.0, 0.0));
    }
}

#[test]
fn ill_posedness_splits() {
    let s = sigma_tau(&OperatorSpec::derivative(1), &ErrorModel::laplace(0.075).unwrap()).unwrap();
    assert_eq!((s.sigma, s.tau), (2.0, 1.0));
    let s = sigma_tau(&OperatorSpec::identity(), &ErrorModel::none()).unwrap();
    assert_eq!((s.sigma, s.tau), (0.0, 0.0));
    let wicksell = OperatorSpec::fractional(1.5, Side::Minus).unwrap();
    assert_eq!(wicksell.mu, -1.5);
    let s = sigma_tau(&wicksell, &ErrorModel::exponential(1.0).unwrap()).unwrap();
    assert_eq!((s.sigma, s.tau), (1.0, 1.5));
}

#[test]
fn derivative_adjoint_is_negative_derivative() {
    let phi = make_beta_kernel(3).unwrap();
    let (t, h) = (0.2, 0.3);
    let psi = TestFunction::Scaled(ScaledPoly::new(phi.polynomial().clone(), t, h));
    let adj = adjoint_apply(&OperatorSpec::derivative(1), &psi).unwrap();
    let d1 = phi.derivative(1).unwrap();
    for i in 0..50 {
        let x = t + h * (i as f64 + 0.5) / 50.0;
        assert_relative_eq!(adj.eval(x).re, -d1.eval((x - t) / h) / h, max_relative = 1e-12);
    }
    assert_eq!(adj.eval(t - 0.01).re, 0.0);
}

#[test]
fn product_rule_for_linear_coefficient() {
    let op = OperatorSpec::variable_coeff(vec![
        Coefficient::constant(0.0),
        Coefficient::Polynomial(Polynomial::new(vec![0.0, 1.0])),
    ])
    .unwrap();
    let phi = make_beta_kernel(4).unwrap();
    let (t, h) = (0.1, 0.5);
    let psi = ScaledPoly::new(phi.polynomial().clone(), t, h);
    let adj = adjoint_apply(&op, &TestFunction::Scaled(psi.clone())).unwrap();
    let dpsi = psi.derivative();
    for i in 0..40 {
        let x = t + h * (i as f64 + 0.5) / 40.0;
        let expect = -psi.eval(x) - x * dpsi.eval(x);
        assert_relative_eq!(adj.eval(x).re, expect, max_relative = 1e-10, epsilon = 1e-9);
    }
}

#[test]
fn adjoint_duality_by_quadrature() {
    // f is a smooth bump on [0.2, 0.8]; op f is computed by hand.
    let c = 0.5;
    let w = 0.3;
    let f = |x: f64| bump((x - c) / w);
    let f1 = |x: f64| {
        let u = (x - c) / w;
        if u.abs() < 1.0 { -2.0 * u / (1.0 - u * u).powi(2) * bump(u) / w } else { 0.0 }
    };
    let f2 = |x: f64| {
        let u = (x - c) / w;
        if u.abs() < 1.0 {
            let g = -2.0 * u / (1.0 - u * u).powi(2);
            let g1 = -2.0 * (1.0 + 3.0 * u * u) / (1.0 - u * u).powi(3);
            (g * g + g1) * bump(u) / (w * w)
        } else {
            0.0
        }
    };
    let phi = make_beta_kernel(4).unwrap();
    let psi = ScaledPoly::new(phi.polynomial().clone(), 0.3, 0.45);
    let a = Polynomial::new(vec![1.0, -0.5, 2.0]);
    let cases: Vec<(OperatorSpec, Box<dyn Fn(f64) -> f64>)> = vec![
        (OperatorSpec::derivative(1), Box::new(f1)),
        (OperatorSpec::derivative(2), Box::new(f2)),
        (
            OperatorSpec::variable_coeff(vec![Coefficient::constant(0.0), Coefficient::Polynomial(a.clone())]).unwrap(),
            Box::new(move |x| a.eval(x) * f1(x)),
        ),
    ];
    for (op, opf) in cases {
        let adj = adjoint_apply(&op, &TestFunction::Scaled(psi.clone())).unwrap();
        let lhs = quad(|x| adj.eval(x).re * f(x), 0.3, 0.75, 64);
        let rhs = quad(|x| psi.eval(x) * opf(x), 0.3, 0.75, 64);
        assert!((lhs - rhs).abs() < 1e-6, "{lhs} vs {rhs}");
    }
}

#[test]
fn fourier_test_function_is_real_for_laplace() {
    let spec = laplace_d(0.075);
    let phi = make_beta_kernel(3).unwrap();
    let h = 1.0 / 16.0;
    let v = v_fourier_with(&spec, &phi, 0.4, h, h / 64.0, 64.0, None).unwrap().grid;
    let max_im = v.samples().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    assert!(max_im < 1e-9 * v.sup_norm(), "{max_im}");
}

#[test]
fn out_of_range_orders_are_refused() {
    assert!(OperatorSpec::fractional(0.5, Side::Plus).is_err());
    assert!(OperatorSpec::variable_coeff(vec![]).is_err());
    let vanishing = OperatorSpec::variable_coeff(vec![
        Coefficient::constant(0.0),
        Coefficient::Polynomial(Polynomial::new(vec![-0.5, 1.0])),
    ])
    .unwrap();
    assert!(vanishing.validate_principal().is_err());
}

proptest! {
    #[test]
    fn split_orders_add_up(m in 0u32..4, r in 0u32..5, theta in 0.05f64..2.0) {
        let err = if r == 0 { ErrorModel::none() } else { ErrorModel::gamma(r as f64, theta).unwrap() };
        let s = sigma_tau(&OperatorSpec::derivative(m), &err).unwrap();
        prop_assert!(s.sigma >= 0.0 && s.tau >= 0.0);
        prop_assert!((s.sigma + s.tau - (m + r) as f64).abs() < 1e-12);
    }

    #[test]
    fn fractional_splits_add_up(beta in 1.0f64..3.0, minus in any::<bool>(), theta in 0.05f64..2.0) {
        let side = if minus { Side::Minus } else { Side::Plus };
        let op = OperatorSpec::fractional(beta, side).unwrap();
        let s = sigma_tau(&op, &ErrorModel::exponential(theta).unwrap()).unwrap();
        prop_assert!(s.sigma >= -1e-12 && s.tau >= -1e-12);
        prop_assert!((s.sigma + s.tau - (beta + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn multiplier_is_hermitian(theta in 0.01f64..1.0, m in 0u32..4, s in -500.0f64..500.0) {
        let spec = ProblemSpec::new(OperatorSpec::derivative(m), ErrorModel::laplace(theta).unwrap()).unwrap();
        let a = lambda_multiplier(&spec, s).unwrap();
        let b = lambda_multiplier(&spec, -s).unwrap();
        prop_assert!((a - b.conj()).norm() <= 1e-12 * (1.0 + a.norm()));
    }
}
