//! The functions `v_{t,h}` that turn observations into unbiased local statistics.

use super::ScaleLocationSet;
use crate::error::{config, Error, Result};
use crate::kernels::{
    angular_frequencies, fractional_symbol, GridFunction, Kernel, Polynomial, ScaledPoly, Side,
};
use crate::operators::{symbol_adjoint_apply, OperatorForm, ProblemSpec, TestFunction};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::collections::HashMap;

/// Resolution of the Fourier path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourierOptions {
    /// Samples per unit of `h`.
    pub points_per_h: usize,
    /// Half-width of the computational domain, in units of `h`.
    pub domain_halfwidth: f64,
    /// Largest admissible share of spectral energy in the upper half band;
    /// `None` disables the check.
    pub alias_tolerance: Option<f64>,
}

impl Default for FourierOptions {
    fn default() -> Self {
        FourierOptions { points_per_h: 128, domain_halfwidth: 16.0, alias_tolerance: Some(0.01) }
    }
}

/// Output of the Fourier path.
#[derive(Clone, Debug)]
pub struct FourierV {
    pub grid: GridFunction,
    /// Share of `|λ F ψ|²` carried by frequencies above half the Nyquist frequency.
    pub alias_fraction: f64,
}

/// `v_{t,h}(y) = h^{−1}[(θ²/h²) φ'''((y−t)/h) − φ'((y−t)/h)]` for Laplace errors and `op = D`.
pub fn v_closed_form_laplace_d(theta: f64, kernel: &Kernel, t: f64, h: f64) -> Result<ScaledPoly> {
    let d3 = kernel.derivative(3)?;
    let d1 = kernel.derivative(1)?;
    let poly = &d3.scale(theta * theta / (h * h * h)) + &d1.scale(-1.0 / h);
    Ok(ScaledPoly::new(poly, t, h))
}

/// `v_{t,h}` as an exact polynomial when deconvolution is a differential operator
/// (no error, Laplace, integer Gamma) and `Op(a*)` maps polynomials to polynomials.
pub fn closed_form_v(problem: &ProblemSpec, kernel: &Kernel, t: f64, h: f64) -> Option<Result<ScaledPoly>> {
    let q = problem.err.inversion_polynomial()?;
    if !problem.op.has_polynomial_adjoint() {
        return None;
    }
    Some((|| {
        let psi = TestFunction::Scaled(ScaledPoly::new(kernel.polynomial().clone(), t, h));
        let TestFunction::Scaled(mut a) = symbol_adjoint_apply(&problem.op, &psi)? else {
            return Err(Error::Precondition("expected a polynomial adjoint".into()));
        };
        if let OperatorForm::Derivative { order, .. } = problem.op.form {
            for _ in 0..order {
                a = a.derivative().scale(-1.0);
            }
        }
        let mut total = Polynomial::zero();
        let mut d = a.clone();
        for (j, &c) in q.iter().enumerate() {
            if j > 0 {
                d = d.derivative();
            }
            if c != 0.0 {
                total = &total + &d.poly.scale(c);
            }
        }
        Ok(ScaledPoly::new(total, t, h))
    })())
}

/// `v_{t,h}` sampled on `[t + h/2 − w h, t + h/2 + w h]` at spacing `grid_step`,
/// with `w = domain_halfwidth ≥ 8`.
pub fn v_fourier(
    spec: &ProblemSpec,
    kernel: &Kernel,
    t: f64,
    h: f64,
    grid_step: f64,
    domain_halfwidth: f64,
) -> Result<GridFunction> {
    v_fourier_with(spec, kernel, t, h, grid_step, domain_halfwidth, Some(0.01)).map(|v| v.grid)
}

/// As [`v_fourier`], with an explicit aliasing tolerance and diagnostics.
pub fn v_fourier_with(
    spec: &ProblemSpec,
    kernel: &Kernel,
    t: f64,
    h: f64,
    grid_step: f64,
    domain_halfwidth: f64,
    alias_tolerance: Option<f64>,
) -> Result<FourierV> {
    if !(domain_halfwidth >= 8.0) {
        return Err(config(format!("domain half-width must be at least 8 (units of h), got {domain_halfwidth}")));
    }
    if !(grid_step > 0.0) || !(h > 0.0) {
        return Err(config("grid step and scale must be positive"));
    }
    let du = grid_step / h;
    let count = ((2.0 * domain_halfwidth / du).ceil() as usize).next_power_of_two();
    let i0 = ((domain_halfwidth - 0.5) / du).round() as usize;
    let u_at = |j: usize| (j as f64 - i0 as f64) * du;

    // ψ = Op(a*)(φ∘S_{t,h}) in u coordinates.
    let base = ScaledPoly::new(kernel.polynomial().clone(), t, h);
    let mut buf: Vec<Complex64> = if matches!(spec.op.form, OperatorForm::Multiplier { .. }) {
        // The multiplier's own adjoint is folded into the spectral factor below.
        (0..count).map(|j| Complex64::new(base.eval(t + h * u_at(j)), 0.0)).collect()
    } else {
        let psi = symbol_adjoint_apply(&spec.op, &TestFunction::Scaled(base))?;
        (0..count).map(|j| psi.eval(t + h * u_at(j))).collect()
    };

    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(count).process(&mut buf);
    let freqs = angular_frequencies(count, du);
    let nyquist = std::f64::consts::PI / du;
    let symbol_at = |xi: f64| -> Result<Complex64> {
        let s = xi / h;
        let mut m = spec.lambda(s)?;
        if let OperatorForm::Multiplier { symbol } = &spec.op.form {
            m *= symbol(s).conj();
        }
        Ok(m)
    };
    let (mut total, mut upper) = (0.0, 0.0);
    for k in 0..count {
        let xi = freqs[k];
        let m = if count % 2 == 0 && k == count / 2 {
            (symbol_at(xi)? + symbol_at(-xi)?) * 0.5
        } else {
            symbol_at(xi)?
        };
        buf[k] *= m;
        let e = buf[k].norm_sqr();
        total += e;
        if xi.abs() > 0.5 * nyquist {
            upper += e;
        }
    }
    let alias_fraction = if total > 0.0 { upper / total } else { 0.0 };
    if let Some(tol) = alias_tolerance {
        if alias_fraction > tol {
            return Err(Error::Resolution(format!(
                "{:.2}% of the spectral energy sits near the Nyquist frequency at step {grid_step:.3e}; use a finer grid",
                100.0 * alias_fraction
            )));
        }
    }
    planner.plan_fft_inverse(count).process(&mut buf);
    let inv = 1.0 / count as f64;
    buf.iter_mut().for_each(|z| *z *= inv);
    let grid = GridFunction::new(t + h * u_at(0), grid_step, buf)?.into_periodic();
    Ok(FourierV { grid, alias_fraction })
}

/// `∫₀¹ P(x) e^{−iξx} dx`: quadrature at low frequency, integration by parts above.
fn polynomial_transform(p: &Polynomial, derivs: &[(f64, f64)], gl: &(Vec<f64>, Vec<f64>), xi: f64) -> Complex64 {
    if xi.abs() <= 64.0 {
        let pieces = 8;
        let w = 1.0 / pieces as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..pieces {
            for (&u, &wt) in gl.0.iter().zip(&gl.1) {
                let x = w * (k as f64 + 0.5 * (u + 1.0));
                acc += 0.5 * w * wt * p.eval(x) * Complex64::new(0.0, -xi * x).exp();
            }
        }
        return acc;
    }
    // Σ_j [P^{(j)}(0) − P^{(j)}(1) e^{−iξ}] / (iξ)^{j+1}
    let e = Complex64::new(0.0, -xi).exp();
    let inv = 1.0 / Complex64::new(0.0, xi);
    let mut pow = inv;
    let mut acc = Complex64::new(0.0, 0.0);
    for &(d0, d1) in derivs {
        acc += (d0 - d1 * e) * pow;
        pow *= inv;
    }
    acc
}

/// `‖D^q φ‖₂ = (π⁻¹ ∫₀^∞ ξ^{2q} |Fφ(ξ)|² dξ)^{1/2}`, from the exact transform of the polynomial.
pub fn fractional_derivative_norm(kernel: &Kernel, q: f64) -> Result<f64> {
    if !(q >= 0.0) {
        return Err(config("fractional order must be nonnegative"));
    }
    let p = kernel.polynomial();
    let mut derivs = Vec::with_capacity(p.degree() + 1);
    let mut d = p.clone();
    for _ in 0..=p.degree() {
        derivs.push((d.eval(0.0), d.eval(1.0)));
        d = d.derivative();
    }
    // The first derivative that does not vanish at both ends fixes the decay of Fφ.
    let Some(j0) = derivs.iter().position(|&(a, b)| a != 0.0 || b != 0.0) else {
        return Ok(0.0);
    };
    let decay = 2.0 * j0 as f64 + 2.0;
    if 2.0 * q + 1.0 >= decay {
        return Err(Error::Range(format!("‖D^{q} φ‖₂ is infinite: the kernel has a jump in derivative {j0}")));
    }
    let gl = crate::kernels::gauss_legendre(24);
    let integrand = |xi: f64| xi.powf(2.0 * q) * polynomial_transform(p, &derivs, &gl, xi).norm_sqr();
    // Composite quadrature over half periods up to Ξ, then the averaged asymptotic tail
    // (A² + B²) ξ^{2q − 2j0 − 2}.
    let cells = 1usize << 13;
    let width = std::f64::consts::PI;
    let cutoff = cells as f64 * width;
    let mut body = 0.0;
    for c in 0..cells {
        let a = c as f64 * width;
        body += gl.0.iter().zip(&gl.1).map(|(&u, &wt)| 0.5 * width * wt * integrand(a + 0.5 * width * (u + 1.0))).sum::<f64>();
    }
    let (a, b) = derivs[j0];
    let tail = (a * a + b * b) * cutoff.powf(2.0 * q + 1.0 - decay) / (decay - 2.0 * q - 1.0);
    Ok(((body + tail) / std::f64::consts::PI).sqrt())
}

/// `‖D^{q} φ‖₂`, exact for integer `q`.
pub fn principal_kernel_norm(kernel: &Kernel, q: f64) -> Result<f64> {
    if q.fract() == 0.0 && q >= 0.0 && (q as usize) <= kernel.degree() {
        kernel.derivative_norm(q as u32)
    } else {
        fractional_derivative_norm(kernel, q)
    }
}

/// Function of `u = (x−t)/h` used to form `∫ ψ((x−t)/h) dμ(x)`.
#[derive(Clone, Debug)]
pub(crate) enum Template {
    /// Polynomial on `[0, 1)`.
    Polynomial(Polynomial),
    /// Linearly interpolated samples at `u0 + i du`.
    Sampled { u0: f64, du: f64, values: Vec<f64> },
}

impl Template {
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            Template::Polynomial(p) => {
                if (0.0..1.0).contains(&u) {
                    p.eval(u)
                } else {
                    0.0
                }
            }
            Template::Sampled { u0, du, values } => {
                let pos = (u - u0) / du;
                if !(pos >= 0.0) || pos > (values.len() - 1) as f64 {
                    return 0.0;
                }
                let i = pos.floor() as usize;
                if i + 1 >= values.len() {
                    return values[values.len() - 1];
                }
                let w = pos - i as f64;
                values[i] * (1.0 - w) + values[i + 1] * w
            }
        }
    }

    /// Range of `u` outside which the template vanishes.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Template::Polynomial(_) => (0.0, 1.0),
            Template::Sampled { u0, du, values } => (*u0, u0 + du * (values.len() - 1) as f64),
        }
    }

    pub fn l2_norm_u(&self) -> f64 {
        match self {
            Template::Polynomial(p) => p.l2_norm_unit(),
            Template::Sampled { du, values, .. } => (values.iter().map(|v| v * v).sum::<f64>() * du).sqrt(),
        }
    }
}

/// Templates for all pairs of an index set.
#[derive(Clone, Debug)]
pub(crate) struct TemplatePlan {
    pub templates: Vec<Template>,
    pub pair_template: Vec<usize>,
    /// `‖v_{t,h}‖₂` per pair.
    pub general_norms: Vec<f64>,
}

fn data_template(problem: &ProblemSpec, kernel: &Kernel, t: f64, h: f64, opts: &FourierOptions) -> Result<Template> {
    if let Some(v) = closed_form_v(problem, kernel, t, h) {
        return Ok(Template::Polynomial(v?.poly));
    }
    let step = h / opts.points_per_h as f64;
    let fv = v_fourier_with(problem, kernel, t, h, step, opts.domain_halfwidth, opts.alias_tolerance)?;
    let g = &fv.grid;
    Ok(Template::Sampled { u0: (g.origin() - t) / h, du: step / h, values: g.real_parts() })
}

/// Templates of `Re v_{t,h}` for every pair, shared across pairs with equal `h`
/// when the operator is translation invariant.
pub(crate) fn build_plan(
    problem: &ProblemSpec,
    kernel: &Kernel,
    set: &ScaleLocationSet,
    opts: &FourierOptions,
) -> Result<TemplatePlan> {
    let shared = problem.op.is_translation_invariant();
    let mut cache: HashMap<u64, usize> = HashMap::new();
    let mut templates = Vec::new();
    let mut pair_template = Vec::with_capacity(set.len());
    let mut general_norms = Vec::with_capacity(set.len());
    let mut norms_of = Vec::new();
    for &(t, h) in set.pairs() {
        let idx = match cache.get(&h.to_bits()) {
            Some(&i) if shared => i,
            _ => {
                let tpl = data_template(problem, kernel, t, h, opts)?;
                norms_of.push(tpl.l2_norm_u());
                templates.push(tpl);
                let i = templates.len() - 1;
                if shared {
                    cache.insert(h.to_bits(), i);
                }
                i
            }
        };
        pair_template.push(idx);
        general_norms.push(h.sqrt() * norms_of[idx]);
    }
    Ok(TemplatePlan { templates, pair_template, general_norms })
}

/// `D_+^σ D_−^τ φ` as a template, and `‖D^{r+m} φ‖₂`.
pub(crate) fn principal_template(problem: &ProblemSpec, kernel: &Kernel, opts: &FourierOptions) -> Result<(Template, f64)> {
    let split = problem.check_principal_conditions()?;
    let total = split.sigma + split.tau;
    let norm = principal_kernel_norm(kernel, total)?;
    if split.sigma.fract() == 0.0 && split.tau.fract() == 0.0 && (total as usize) <= kernel.degree() {
        let d = kernel.derivative(total as u32)?;
        let sign = if (split.tau as u64) % 2 == 0 { 1.0 } else { -1.0 };
        return Ok((Template::Polynomial(d.scale(sign)), norm));
    }
    let du = 1.0 / opts.points_per_h as f64;
    let hw = opts.domain_halfwidth;
    let count = ((2.0 * hw / du).ceil() as usize).next_power_of_two();
    let i0 = ((hw - 0.5) / du).round() as usize;
    let g = GridFunction::sample(-(i0 as f64) * du, du, count, |u| kernel.eval(u))?.into_periodic();
    let (s, ta) = (split.sigma, split.tau);
    let out = crate::kernels::apply_fourier_multiplier(&g, |xi| {
        fractional_symbol(xi, s, Side::Plus) * fractional_symbol(xi, ta, Side::Minus)
    })?;
    Ok((Template::Sampled { u0: out.origin(), du, values: out.real_parts() }, norm))
}
