//! A fractional operator under exponential noise: the ill-posedness split and a test function
//! computed through the Fourier multiplier.

use deconv_multiscale::error_models::ErrorModel;
use deconv_multiscale::kernels::{make_beta_kernel, Side};
use deconv_multiscale::operators::{sigma_tau, OperatorSpec, ProblemSpec};
use deconv_multiscale::teststat::v_fourier;

fn main() -> deconv_multiscale::Result<()> {
    let op = OperatorSpec::fractional(1.5, Side::Minus)?;
    let err = ErrorModel::exponential(1.0)?;
    let split = sigma_tau(&op, &err)?;
    println!("sigma = {}, tau = {}", split.sigma, split.tau);

    let problem = ProblemSpec::new(op, err)?;
    for s in [0.5, 2.0, 8.0, 32.0] {
        let l = problem.lambda(s)?;
        println!("lambda({s:>4}) = {:+.4} {:+.4}i  |lambda| = {:.3}", l.re, l.im, l.norm());
    }

    // phi_6 is smooth enough that the multiplier image has no jumps to alias.
    let kernel = make_beta_kernel(6)?;
    let (t, h) = (0.3, 0.1);
    let v = v_fourier(&problem, &kernel, t, h, h / 128.0, 32.0)?;
    println!("v_(t,h) on {} points, sup |v| = {:.3}, L2 norm = {:.3}", v.len(), v.sup_norm(), v.l2_norm());
    for y in [0.1, 0.2, 0.3, 0.35, 0.4, 0.5, 0.7] {
        println!("  v({y:.2}) = {:+.4}", v.interpolate(y).re);
    }
    Ok(())
}
