//! Beta kernels, their derivatives and the norms that enter the principal standardization.

use deconv_multiscale::kernels::{beta_constant, derivative_norm_closed_form, make_beta_kernel};
use deconv_multiscale::teststat::principal_kernel_norm;

fn main() -> deconv_multiscale::Result<()> {
    println!("{:>3} {:>12} {:>16} {:>16} {:>14}", "k", "c_k", "|phi^(k)| quad", "closed form", "|D^{k-1/2}phi|");
    for k in 1..=6 {
        let phi = make_beta_kernel(k)?;
        println!(
            "{k:>3} {:>12} {:>16.6} {:>16.6} {:>14.6}",
            beta_constant(k)?,
            phi.derivative_norm(k)?,
            derivative_norm_closed_form(k)?,
            principal_kernel_norm(&phi, k as f64 - 0.5)?,
        );
    }

    // The third derivative of phi_3 is a scaled Legendre polynomial, so it jumps at 0 and 1.
    let d3 = make_beta_kernel(3)?.derivative(3)?;
    for x in [0.0, 0.25, 0.5, 0.75, 1.0] {
        println!("phi_3'''({x:.2}) = {:9.2}", d3.eval(x));
    }
    Ok(())
}
