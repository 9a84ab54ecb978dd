//! Dense polynomials and the pieces built on them.

use std::ops::{Add, Mul};

/// Real polynomial in the monomial basis, coefficients in ascending order.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: vec![0.0] }
    }

    pub fn constant(c: f64) -> Self {
        Polynomial::new(vec![c])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Polynomial::zero();
        }
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    pub fn derivative_n(&self, j: usize) -> Self {
        (0..j).fold(self.clone(), |p, _| p.derivative())
    }

    pub fn scale(&self, c: f64) -> Self {
        Polynomial::new(self.coeffs.iter().map(|&a| a * c).collect())
    }

    /// `x ↦ p(a + b x)`.
    pub fn compose_affine(&self, a: f64, b: f64) -> Self {
        // Horner in polynomial arithmetic.
        let lin = Polynomial::new(vec![a, b]);
        self.coeffs
            .iter()
            .rev()
            .fold(Polynomial::zero(), |acc, &c| &(&acc * &lin) + &Polynomial::constant(c))
    }

    /// Integral over [0, 1].
    pub fn integral_unit(&self) -> f64 {
        gauss_legendre_unit(self.degree() / 2 + 1, |x| self.eval(x))
    }

    /// L² norm over [0, 1].
    pub fn l2_norm_unit(&self) -> f64 {
        gauss_legendre_unit(self.degree() + 1, |x| self.eval(x).powi(2)).sqrt()
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let c = (0..n)
            .map(|i| self.coeffs.get(i).copied().unwrap_or(0.0) + rhs.coeffs.get(i).copied().unwrap_or(0.0))
            .collect();
        Polynomial::new(c)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut c = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Polynomial::new(c)
    }
}

/// Integer polynomial with checked arithmetic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactPolynomial {
    coeffs: Vec<i128>,
}

impl ExactPolynomial {
    pub fn new(coeffs: Vec<i128>) -> Self {
        ExactPolynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[i128] {
        &self.coeffs
    }

    /// Returns `None` on overflow.
    pub fn derivative(&self) -> Option<Self> {
        if self.coeffs.len() <= 1 {
            return Some(ExactPolynomial { coeffs: vec![0] });
        }
        let mut out = Vec::with_capacity(self.coeffs.len() - 1);
        for (i, &c) in self.coeffs.iter().enumerate().skip(1) {
            out.push(c.checked_mul(i as i128)?);
        }
        Some(ExactPolynomial { coeffs: out })
    }

    pub fn to_f64(&self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|&c| c as f64).collect())
    }
}

/// A polynomial `P` placed on `[t, t+h)`: `x ↦ P((x−t)/h)`, zero elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledPoly {
    pub poly: Polynomial,
    pub t: f64,
    pub h: f64,
}

impl ScaledPoly {
    pub fn new(poly: Polynomial, t: f64, h: f64) -> Self {
        ScaledPoly { poly, t, h }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let u = (x - self.t) / self.h;
        if (0.0..1.0).contains(&u) {
            self.poly.eval(u)
        } else {
            0.0
        }
    }

    /// Derivative in `x` on the open support.
    pub fn derivative(&self) -> Self {
        ScaledPoly {
            poly: self.poly.derivative().scale(1.0 / self.h),
            t: self.t,
            h: self.h,
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        ScaledPoly { poly: self.poly.scale(c), t: self.t, h: self.h }
    }

    pub fn l2_norm(&self) -> f64 {
        self.h.sqrt() * self.poly.l2_norm_unit()
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let n = n.max(1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integral over [0, 1] with an `n`-point Gauss–Legendre rule.
pub fn gauss_legendre_unit<F: Fn(f64) -> f64>(n: usize, f: F) -> f64 {
    let (x, w) = gauss_legendre(n);
    x.iter().zip(&w).map(|(&xi, &wi)| 0.5 * wi * f(0.5 * (xi + 1.0))).sum()
}
