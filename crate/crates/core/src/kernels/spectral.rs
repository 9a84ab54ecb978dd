//! Sampled functions and FFT-based Fourier multipliers.
//!
//! Fourier convention: `F f(ξ) = ∫ e^{−ixξ} f(x) dx`, so `D` corresponds to `iξ`.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Which fractional derivative: `+` for `(iξ)^β`, `−` for `(−iξ)^β`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

/// Uniformly sampled complex function.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    origin: f64,
    step: f64,
    samples: Vec<Complex64>,
    periodic: bool,
}

impl GridFunction {
    pub fn new(origin: f64, step: f64, samples: Vec<Complex64>) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::Config(format!("grid step must be positive, got {step}")));
        }
        if samples.len() < 2 {
            return Err(Error::Config("grid function needs at least two samples".into()));
        }
        Ok(GridFunction { origin, step, samples, periodic: false })
    }

    pub fn from_real(origin: f64, step: f64, values: &[f64]) -> Result<Self> {
        GridFunction::new(origin, step, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn sample<F: Fn(f64) -> f64>(origin: f64, step: f64, count: usize, f: F) -> Result<Self> {
        let values: Vec<f64> = (0..count).map(|i| f(origin + i as f64 * step)).collect();
        GridFunction::from_real(origin, step, &values)
    }

    /// Marks the samples as one period of a periodic function; spectral operations
    /// then act on the grid as is, without padding or decay checks.
    pub fn into_periodic(mut self) -> Self {
        self.periodic = true;
        self
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn x(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.step
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.samples.iter().map(|c| c.re).collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Riemann approximation of the L² norm.
    pub fn l2_norm(&self) -> f64 {
        (self.samples.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.step).sqrt()
    }

    pub fn scale(&self, c: f64) -> Self {
        GridFunction {
            samples: self.samples.iter().map(|z| z * c).collect(),
            ..self.clone()
        }
    }

    /// Linear interpolation, zero outside the grid.
    pub fn interpolate(&self, x: f64) -> Complex64 {
        let pos = (x - self.origin) / self.step;
        if !(pos >= 0.0) || pos > (self.samples.len() - 1) as f64 {
            return Complex64::new(0.0, 0.0);
        }
        let i = pos.floor() as usize;
        if i + 1 >= self.samples.len() {
            return self.samples[self.samples.len() - 1];
        }
        let w = pos - i as f64;
        self.samples[i] * (1.0 - w) + self.samples[i + 1] * w
    }

    fn check_decay(&self) -> Result<()> {
        let max = self.sup_norm();
        let n = self.samples.len();
        let tail = self.samples[0].norm().max(self.samples[n - 1].norm());
        if max > 0.0 && tail >= 1e-6 * max {
            return Err(Error::Precondition(format!(
                "grid function does not decay at the grid ends (tail {tail:.3e}, max {max:.3e})"
            )));
        }
        Ok(())
    }

    fn support_len(&self) -> usize {
        let max = self.sup_norm();
        let nz = |c: &Complex64| c.norm() > 1e-14 * max;
        match (self.samples.iter().position(nz), self.samples.iter().rposition(nz)) {
            (Some(a), Some(b)) => b - a + 1,
            _ => 1,
        }
    }
}

/// Angular frequency of every FFT bin for `n` samples at spacing `step`.
pub fn angular_frequencies(n: usize, step: f64) -> Vec<f64> {
    let base = 2.0 * PI / (n as f64 * step);
    (0..n)
        .map(|k| {
            let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
            kk * base
        })
        .collect()
}

/// `(±iξ)^β = |ξ|^β exp(±βπi·sign(ξ)/2)`, with value 0 at ξ=0 for β>0 and 1 for β=0.
pub fn fractional_symbol(xi: f64, beta: f64, side: Side) -> Complex64 {
    if beta == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    if xi == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let phase = side.sign() * beta * PI * xi.signum() / 2.0;
    Complex64::from_polar(xi.abs().powf(beta), phase)
}

/// Applies the Fourier multiplier `m(ξ)` (angular frequency) to `f`.
///
/// Non-periodic inputs must decay at both ends; they are zero padded to at least
/// four times their support and to a power of two. The result lives on the
/// padded grid and is marked periodic.
pub fn apply_fourier_multiplier<M: Fn(f64) -> Complex64>(f: &GridFunction, m: M) -> Result<GridFunction> {
    let mut buf = f.samples.clone();
    if !f.periodic {
        f.check_decay()?;
        let target = (4 * f.support_len()).max(f.len()).next_power_of_two();
        buf.resize(target, Complex64::new(0.0, 0.0));
    }
    let n = buf.len();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let freqs = angular_frequencies(n, f.step);
    for (k, z) in buf.iter_mut().enumerate() {
        let factor = if n % 2 == 0 && k == n / 2 {
            // The Nyquist bin stands for both ±ξ.
            (m(freqs[k]) + m(-freqs[k])) * 0.5
        } else {
            m(freqs[k])
        };
        *z *= factor;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let inv = 1.0 / n as f64;
    buf.iter_mut().for_each(|z| *z *= inv);
    Ok(GridFunction { origin: f.origin, step: f.step, samples: buf, periodic: true })
}

/// Spectral `D_±^β f`.
pub fn fractional_derivative_grid(f: &GridFunction, beta: f64, side: Side) -> Result<GridFunction> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::Range(format!("fractional order must be nonnegative, got {beta}")));
    }
    apply_fourier_multiplier(f, |xi| fractional_symbol(xi, beta, side))
}
