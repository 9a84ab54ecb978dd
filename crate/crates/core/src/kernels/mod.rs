//! Test kernels on [0, 1]: the beta family `c_k x^k (1−x)^k`, user polynomials,
//! their derivatives and norms, plus spectral differentiation of sampled functions.

pub mod poly;
pub mod spectral;

pub use poly::{gauss_legendre, gauss_legendre_unit, ExactPolynomial, Polynomial, ScaledPoly};
pub use spectral::{
    angular_frequencies, apply_fourier_multiplier, fractional_derivative_grid, fractional_symbol, GridFunction, Side,
};

use crate::error::{config, range, Result};
use serde::{Deserialize, Serialize};

/// Largest supported beta order.
pub const MAX_BETA_ORDER: u32 = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelFamily {
    Beta,
    CustomPolynomial,
}

/// A compactly supported kernel on [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    family: KernelFamily,
    k: u32,
    poly: Polynomial,
    exact: Option<ExactPolynomial>,
}

/// `(2k+1)! / (k!)²`, exact.
pub fn beta_constant(k: u32) -> Result<u128> {
    if k > MAX_BETA_ORDER {
        return Err(range(format!("beta order {k} exceeds {MAX_BETA_ORDER}")));
    }
    // (2k+1) * binom(2k, k)
    let mut binom: u128 = 1;
    for i in 0..k as u128 {
        binom = binom * (2 * k as u128 - i) / (i + 1);
    }
    Ok((2 * k as u128 + 1) * binom)
}

/// `φ_k(x) = c_k x^k (1−x)^k` on (0, 1).
pub fn make_beta_kernel(k: u32) -> Result<Kernel> {
    let c = beta_constant(k)? as i128;
    let mut coeffs = vec![0i128; 2 * k as usize + 1];
    let mut binom: i128 = 1;
    for j in 0..=k as usize {
        let sign = if j % 2 == 0 { 1 } else { -1 };
        coeffs[k as usize + j] = sign * binom * c;
        binom = binom * (k as i128 - j as i128) / (j as i128 + 1);
    }
    let exact = ExactPolynomial::new(coeffs);
    Ok(Kernel { family: KernelFamily::Beta, k, poly: exact.to_f64(), exact: Some(exact) })
}

/// `φ_k^{(j)}` as a polynomial on [0, 1].
pub fn kernel_derivative(phi: &Kernel, j: u32) -> Result<Polynomial> {
    phi.derivative(j)
}

/// `‖φ_k^{(k)}‖₂ = (2k)!/k! · √(2k+1)`.
pub fn derivative_norm_closed_form(k: u32) -> Result<f64> {
    if k > MAX_BETA_ORDER {
        return Err(range(format!("beta order {k} exceeds {MAX_BETA_ORDER}")));
    }
    let ratio: f64 = ((k + 1)..=(2 * k)).map(|i| i as f64).product();
    Ok(ratio * ((2 * k + 1) as f64).sqrt())
}

impl Kernel {
    /// Kernel given by monomial coefficients on [0, 1]; must be nonnegative and integrate to one.
    pub fn custom_polynomial(coeffs: Vec<f64>) -> Result<Kernel> {
        let poly = Polynomial::new(coeffs);
        let mass = poly.integral_unit();
        if (mass - 1.0).abs() > 1e-10 {
            return Err(config(format!("kernel integrates to {mass}, expected 1")));
        }
        let min = (0..=10_000).map(|i| poly.eval(i as f64 / 10_000.0)).fold(f64::INFINITY, f64::min);
        if min < -1e-12 {
            return Err(config("kernel takes negative values on [0, 1]"));
        }
        Ok(Kernel { family: KernelFamily::CustomPolynomial, k: 0, poly, exact: None })
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    /// Smoothness index (zero for custom kernels).
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn degree(&self) -> usize {
        self.poly.degree()
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.poly
    }

    pub fn exact_coefficients(&self) -> Option<&[i128]> {
        self.exact.as_ref().map(|e| e.coeffs())
    }

    pub fn eval(&self, x: f64) -> f64 {
        if (0.0..1.0).contains(&x) {
            match self.family {
                // Factored form: nonnegative by construction and free of Horner cancellation.
                KernelFamily::Beta => beta_constant(self.k).unwrap_or(0) as f64 * (x * (1.0 - x)).powi(self.k as i32),
                KernelFamily::CustomPolynomial => self.poly.eval(x),
            }
        } else {
            0.0
        }
    }

    pub fn derivative(&self, j: u32) -> Result<Polynomial> {
        if j as usize > self.degree() {
            return Err(range(format!("derivative order {j} exceeds kernel degree {}", self.degree())));
        }
        if let Some(exact) = &self.exact {
            let mut p = exact.clone();
            let mut ok = true;
            for _ in 0..j {
                match p.derivative() {
                    Some(q) => p = q,
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                return Ok(p.to_f64());
            }
        }
        Ok(self.poly.derivative_n(j as usize))
    }

    /// `‖φ^{(j)}‖₂` over [0, 1].
    pub fn derivative_norm(&self, j: u32) -> Result<f64> {
        Ok(self.derivative(j)?.l2_norm_unit())
    }
}
