//! Shape-constraint operators, the deconvolution multiplier `λ` and adjoints.
//!
//! An operator with symbol `p(x, ξ) = a(x, ξ)|ξ|^γ ι_ξ^μ` is paired with an error law.
//! Test functions are built as `v = F⁻¹(λ · F(Op(a*)ψ))` with
//! `λ(s) = |s|^γ ι_s^{−μ} / cf(−s)`.

use crate::error::{config, Error, Result};
use crate::error_models::{iota, ErrorModel};
use crate::kernels::{apply_fourier_multiplier, fractional_symbol, GridFunction, Polynomial, ScaledPoly, Side};
use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type SymbolFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Coefficient `a_k(x)` of a differential operator.
#[derive(Clone)]
pub enum Coefficient {
    Polynomial(Polynomial),
    /// `derivatives[j]` is the `j`-th derivative; index 0 is the function itself.
    Function { name: String, derivatives: Vec<RealFn> },
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Polynomial(p) => write!(f, "Polynomial({:?})", p.coeffs()),
            Coefficient::Function { name, derivatives } => {
                write!(f, "Function({name}, {} derivatives)", derivatives.len().saturating_sub(1))
            }
        }
    }
}

impl Coefficient {
    pub fn constant(c: f64) -> Self {
        Coefficient::Polynomial(Polynomial::constant(c))
    }

    pub fn eval(&self, j: usize, x: f64) -> Result<f64> {
        match self {
            Coefficient::Polynomial(p) => Ok(p.derivative_n(j).eval(x)),
            Coefficient::Function { name, derivatives } => derivatives
                .get(j)
                .map(|f| f(x))
                .ok_or_else(|| config(format!("coefficient {name}: derivative of order {j} not supplied"))),
        }
    }

    fn is_polynomial(&self) -> bool {
        matches!(self, Coefficient::Polynomial(_))
    }
}

/// Operator families with computable adjoints.
#[derive(Clone)]
pub enum OperatorForm {
    /// `c · D^m`.
    Derivative { order: u32, scale: f64 },
    /// `D_±^β`.
    Fractional { order: f64, side: Side },
    /// Fourier multiplier `p(ξ)`.
    Multiplier { symbol: SymbolFn },
    /// `Σ_k a_k(x) D^k`.
    VariableCoeff { coeffs: Vec<Coefficient> },
}

impl fmt::Debug for OperatorForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorForm::Derivative { order, scale } => write!(f, "Derivative({order}, scale {scale})"),
            OperatorForm::Fractional { order, side } => write!(f, "Fractional({order}, {side:?})"),
            OperatorForm::Multiplier { .. } => write!(f, "Multiplier"),
            OperatorForm::VariableCoeff { coeffs } => write!(f, "VariableCoeff({coeffs:?})"),
        }
    }
}

/// Leading part `a_P(t)|ξ|^m ι_ξ^{μ_P}` of the symbol.
#[derive(Clone)]
pub struct PrincipalSymbol {
    pub coefficient: RealFn,
    pub phase: f64,
}

impl fmt::Debug for PrincipalSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PrincipalSymbol(phase {})", self.phase)
    }
}

#[derive(Clone, Debug)]
pub struct OperatorSpec {
    /// Total order.
    pub m: f64,
    /// Order of the fractional factor.
    pub gamma: f64,
    /// Phase of the fractional factor.
    pub mu: f64,
    /// Order of the remaining symbol, `mbar + gamma = m`.
    pub mbar: f64,
    pub form: OperatorForm,
    pub principal: Option<PrincipalSymbol>,
}

fn check_order(m: f64) -> Result<()> {
    if m == 0.0 || (m >= 1.0 && m.is_finite()) {
        Ok(())
    } else {
        Err(config(format!("operator order must be 0 or at least 1, got {m}")))
    }
}

impl OperatorSpec {
    pub fn identity() -> Self {
        OperatorSpec::derivative(0)
    }

    /// `D^m`.
    pub fn derivative(order: u32) -> Self {
        OperatorSpec::scaled_derivative(order, 1.0)
    }

    /// `c · D^m`.
    pub fn scaled_derivative(order: u32, scale: f64) -> Self {
        let m = order as f64;
        OperatorSpec {
            m,
            gamma: m,
            mu: m,
            mbar: 0.0,
            form: OperatorForm::Derivative { order, scale },
            principal: Some(PrincipalSymbol { coefficient: Arc::new(move |_| scale), phase: m }),
        }
    }

    /// `D_±^β`.
    pub fn fractional(order: f64, side: Side) -> Result<Self> {
        check_order(order)?;
        let mu = side.sign() * order;
        Ok(OperatorSpec {
            m: order,
            gamma: order,
            mu,
            mbar: 0.0,
            form: OperatorForm::Fractional { order, side },
            principal: Some(PrincipalSymbol { coefficient: Arc::new(|_| 1.0), phase: mu }),
        })
    }

    /// Fourier multiplier of order `order`; `principal = (a_P, μ_P)` when
    /// `p(ξ) ≈ a_P |ξ|^order ι_ξ^{μ_P}` at high frequency.
    pub fn multiplier(symbol: SymbolFn, order: f64, principal: Option<(f64, f64)>) -> Result<Self> {
        check_order(order)?;
        Ok(OperatorSpec {
            m: order,
            gamma: 0.0,
            mu: 0.0,
            mbar: order,
            form: OperatorForm::Multiplier { symbol },
            principal: principal
                .map(|(a, phase)| PrincipalSymbol { coefficient: Arc::new(move |_| a), phase }),
        })
    }

    /// `Σ_k a_k(x) D^k` with `coeffs[k] = a_k`.
    pub fn variable_coeff(coeffs: Vec<Coefficient>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(config("variable-coefficient operator needs at least one coefficient"));
        }
        let m = (coeffs.len() - 1) as f64;
        let lead = coeffs[coeffs.len() - 1].clone();
        Ok(OperatorSpec {
            m,
            gamma: 0.0,
            mu: 0.0,
            mbar: m,
            form: OperatorForm::VariableCoeff { coeffs },
            principal: Some(PrincipalSymbol {
                coefficient: Arc::new(move |t| lead.eval(0, t).unwrap_or(f64::NAN)),
                phase: m,
            }),
        })
    }

    /// `a_P(t)`.
    pub fn principal_coefficient(&self, t: f64) -> Option<f64> {
        self.principal.as_ref().map(|p| (p.coefficient)(t))
    }

    /// Checks `a_P ≠ 0` on a grid of [0, 1].
    pub fn validate_principal(&self) -> Result<()> {
        let p = self
            .principal
            .as_ref()
            .ok_or_else(|| Error::Unsupported("operator has no declared principal symbol".into()))?;
        for i in 0..=1000 {
            let t = i as f64 / 1000.0;
            let a = (p.coefficient)(t);
            if !(a.abs() > 0.0) {
                return Err(config(format!("principal coefficient vanishes at t = {t}")));
            }
        }
        Ok(())
    }

    /// Whether `Op(a*)` commutes with translations.
    pub fn is_translation_invariant(&self) -> bool {
        match &self.form {
            OperatorForm::VariableCoeff { coeffs } => coeffs.iter().all(|c| match c {
                Coefficient::Polynomial(p) => p.degree() == 0,
                Coefficient::Function { .. } => false,
            }),
            _ => true,
        }
    }

    pub(crate) fn has_polynomial_adjoint(&self) -> bool {
        match &self.form {
            OperatorForm::Derivative { .. } => true,
            OperatorForm::VariableCoeff { coeffs } => coeffs.iter().all(Coefficient::is_polynomial),
            _ => false,
        }
    }
}

/// Orders of the simulator transform `D_+^σ D_−^τ` and the normalized principal data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrincipalSplit {
    pub sigma: f64,
    pub tau: f64,
    /// Phase after re-normalization.
    pub mu: f64,
    /// `±1`, absorbs `ι^2 = −1` shifts into the sign of `a_P`.
    pub sign: f64,
    /// Error-law constant `A`.
    pub a: f64,
    pub rho: f64,
    pub r: f64,
}

/// `σ = (r+m+ρ+μ)/2`, `τ = (r+m−ρ−μ)/2`, re-normalizing `μ` by the smallest shift
/// in `2ℤ` that makes both nonnegative.
pub fn sigma_tau(op: &OperatorSpec, err: &ErrorModel) -> Result<PrincipalSplit> {
    let (a, rho, r) = err.principal_constants()?;
    let p = op
        .principal
        .as_ref()
        .ok_or_else(|| Error::Unsupported("operator has no declared principal symbol".into()))?;
    let total = r + op.m;
    let base = rho + p.phase;
    let reach = ((base.abs() + total) / 2.0).ceil() as i64 + 1;
    let mut shifts: Vec<i64> = (-reach..=reach).collect();
    shifts.sort_by_key(|j| (j.abs(), *j));
    let tol = 1e-12;
    for j in shifts {
        let mu = p.phase + 2.0 * j as f64;
        let sigma = (total + rho + mu) / 2.0;
        let tau = (total - rho - mu) / 2.0;
        if sigma >= -tol && tau >= -tol {
            let sign = if j.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let sigma = sigma.max(0.0);
            let tau = total - sigma;
            return Ok(PrincipalSplit { sigma, tau: tau.max(0.0), mu, sign, a, rho, r });
        }
    }
    Err(Error::Unsupported(format!(
        "no phase normalization gives nonnegative orders (r+m = {total}, ρ+μ = {base})"
    )))
}

/// An operator paired with an error law.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub op: OperatorSpec,
    pub err: ErrorModel,
    split: Option<PrincipalSplit>,
}

impl ProblemSpec {
    pub fn new(op: OperatorSpec, err: ErrorModel) -> Result<Self> {
        if (op.mbar + op.gamma - op.m).abs() > 1e-12 {
            return Err(config("operator orders must satisfy mbar + gamma = m"));
        }
        let split = sigma_tau(&op, &err).ok();
        Ok(ProblemSpec { op, err, split })
    }

    /// `r + m`.
    pub fn total_order(&self) -> f64 {
        self.err.ill_posedness() + self.op.m
    }

    pub fn principal_split(&self) -> Result<PrincipalSplit> {
        self.split.ok_or_else(|| {
            Error::Unsupported(format!(
                "principal standardization unavailable for {} with this operator",
                self.err.name()
            ))
        })
    }

    pub fn sigma(&self) -> Option<f64> {
        self.split.map(|s| s.sigma)
    }

    pub fn tau(&self) -> Option<f64> {
        self.split.map(|s| s.tau)
    }

    /// Requirements of the principal approximation: a split exists, `a_P ≠ 0`,
    /// and for `m = 0` also `|μ+ρ| ≤ r` and `r > 1/2`.
    pub fn check_principal_conditions(&self) -> Result<PrincipalSplit> {
        let split = self.principal_split()?;
        self.op.validate_principal()?;
        if self.op.m == 0.0 {
            let r = self.err.ill_posedness();
            if !(r > 0.5) || (split.mu + split.rho).abs() > r + 1e-12 {
                return Err(config("order-zero operators need r > 1/2 and |μ+ρ| ≤ r"));
            }
        }
        Ok(split)
    }

    /// `λ(s) = |s|^γ ι_s^{−μ} / cf(−s)`.
    pub fn lambda(&self, s: f64) -> Result<Complex64> {
        let frac = if self.op.gamma == 0.0 {
            Complex64::new(1.0, 0.0)
        } else if s == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        } else {
            iota(s, -self.op.mu) * s.abs().powf(self.op.gamma)
        };
        Ok(frac * self.err.inversion_multiplier(s)?)
    }
}

/// `λ(s)` for a problem.
pub fn lambda_multiplier(spec: &ProblemSpec, s: f64) -> Result<Complex64> {
    spec.lambda(s)
}

/// A term `w(x) · ψ(x)` of an expanded adjoint.
#[derive(Clone)]
pub struct WeightedTerm {
    pub weight: RealFn,
    pub poly: ScaledPoly,
}

impl fmt::Debug for WeightedTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WeightedTerm({:?})", self.poly)
    }
}

/// Test functions handled by the adjoint machinery.
#[derive(Clone, Debug)]
pub enum TestFunction {
    Scaled(ScaledPoly),
    Terms(Vec<WeightedTerm>),
    Grid(GridFunction),
}

impl TestFunction {
    pub fn eval(&self, x: f64) -> Complex64 {
        match self {
            TestFunction::Scaled(p) => Complex64::new(p.eval(x), 0.0),
            TestFunction::Terms(ts) => {
                Complex64::new(ts.iter().map(|t| (t.weight)(x) * t.poly.eval(x)).sum(), 0.0)
            }
            TestFunction::Grid(g) => g.interpolate(x),
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `(−D)^k ψ`.
fn neg_derivative(p: &ScaledPoly, k: usize) -> ScaledPoly {
    let mut q = p.clone();
    for _ in 0..k {
        q = q.derivative().scale(-1.0);
    }
    q
}

fn spectral(psi: &GridFunction, m: impl Fn(f64) -> Complex64) -> Result<GridFunction> {
    apply_fourier_multiplier(psi, m)
}

fn add_grids(acc: Option<GridFunction>, g: GridFunction) -> Result<GridFunction> {
    match acc {
        None => Ok(g),
        Some(a) => {
            if a.len() != g.len() {
                return Err(Error::Precondition("grid sizes differ while summing adjoint terms".into()));
            }
            let s: Vec<Complex64> = a.samples().iter().zip(g.samples()).map(|(x, y)| x + y).collect();
            Ok(GridFunction::new(a.origin(), a.step(), s)?.into_periodic())
        }
    }
}

fn variable_adjoint(coeffs: &[Coefficient], psi: &TestFunction) -> Result<TestFunction> {
    match psi {
        TestFunction::Scaled(p) => {
            if coeffs.iter().all(Coefficient::is_polynomial) {
                let mut total = Polynomial::zero();
                for (k, c) in coeffs.iter().enumerate() {
                    let Coefficient::Polynomial(a) = c else { unreachable!() };
                    // a_k(t + h u) P(u), then (−D)^k in x.
                    let prod = &a.compose_affine(p.t, p.h) * &p.poly;
                    let term = neg_derivative(&ScaledPoly::new(prod, p.t, p.h), k);
                    total = &total + &term.poly;
                }
                Ok(TestFunction::Scaled(ScaledPoly::new(total, p.t, p.h)))
            } else {
                // Product rule: (−D)^k (a ψ) = (−1)^k Σ_j C(k,j) a^{(k−j)} ψ^{(j)}.
                let mut terms = Vec::new();
                for (k, c) in coeffs.iter().enumerate() {
                    for j in 0..=k {
                        let order = k - j;
                        c.eval(order, 0.5)?;
                        let factor = binomial(k, j) * if k % 2 == 0 { 1.0 } else { -1.0 };
                        let coeff = c.clone();
                        let weight: RealFn =
                            Arc::new(move |x| factor * coeff.eval(order, x).unwrap_or(f64::NAN));
                        let mut d = p.clone();
                        for _ in 0..j {
                            d = d.derivative();
                        }
                        terms.push(WeightedTerm { weight, poly: d });
                    }
                }
                Ok(TestFunction::Terms(terms))
            }
        }
        TestFunction::Grid(g) => {
            let mut acc = None;
            for (k, c) in coeffs.iter().enumerate() {
                let mut samples = Vec::with_capacity(g.len());
                for i in 0..g.len() {
                    samples.push(g.samples()[i] * c.eval(0, g.x(i))?);
                }
                let prod = GridFunction::new(g.origin(), g.step(), samples)?;
                let prod = if g.is_periodic() { prod.into_periodic() } else { prod };
                let term = spectral(&prod, |xi| fractional_symbol(xi, k as f64, Side::Minus))?;
                acc = Some(add_grids(acc, term)?);
            }
            Ok(TestFunction::Grid(acc.expect("at least one coefficient")))
        }
        TestFunction::Terms(_) => {
            Err(Error::Unsupported("adjoint of an expanded sum is not supported; sample it first".into()))
        }
    }
}

/// Adjoint of `op` applied to `ψ`.
///
/// Derivative, multiplier and variable-coefficient operators return the full
/// L² adjoint. Fractional operators return `ψ` unchanged: they act only through `λ`.
pub fn adjoint_apply(op: &OperatorSpec, psi: &TestFunction) -> Result<TestFunction> {
    match &op.form {
        OperatorForm::Derivative { order, scale } => match psi {
            TestFunction::Scaled(p) => Ok(TestFunction::Scaled(neg_derivative(p, *order as usize).scale(*scale))),
            TestFunction::Grid(g) => {
                let (m, c) = (*order as f64, *scale);
                Ok(TestFunction::Grid(spectral(g, |xi| fractional_symbol(xi, m, Side::Minus) * c)?))
            }
            TestFunction::Terms(_) => variable_adjoint(
                &{
                    let mut v = vec![Coefficient::constant(0.0); *order as usize];
                    v.push(Coefficient::constant(*scale));
                    v
                },
                psi,
            ),
        },
        OperatorForm::Fractional { .. } => Ok(psi.clone()),
        OperatorForm::Multiplier { symbol } => match psi {
            TestFunction::Grid(g) => {
                let s = symbol.clone();
                Ok(TestFunction::Grid(spectral(g, move |xi| s(xi).conj())?))
            }
            _ => Err(Error::Precondition("multiplier adjoints need a sampled test function".into())),
        },
        OperatorForm::VariableCoeff { coeffs } => variable_adjoint(coeffs, psi),
    }
}

/// `Op(a*)ψ`: the part of the adjoint applied before the multiplier `λ`.
pub(crate) fn symbol_adjoint_apply(op: &OperatorSpec, psi: &TestFunction) -> Result<TestFunction> {
    match &op.form {
        OperatorForm::Derivative { scale, .. } => match psi {
            TestFunction::Scaled(p) => Ok(TestFunction::Scaled(p.scale(*scale))),
            TestFunction::Grid(g) => Ok(TestFunction::Grid(g.scale(*scale))),
            TestFunction::Terms(ts) => Ok(TestFunction::Terms(
                ts.iter()
                    .map(|t| WeightedTerm { weight: t.weight.clone(), poly: t.poly.scale(*scale) })
                    .collect(),
            )),
        },
        OperatorForm::Fractional { .. } => Ok(psi.clone()),
        OperatorForm::Multiplier { .. } | OperatorForm::VariableCoeff { .. } => adjoint_apply(op, psi),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::make_beta_kernel;
    use approx::assert_relative_eq;

    #[test]
    fn laplace_monotonicity_split() {
        let spec = ProblemSpec::new(OperatorSpec::derivative(1), ErrorModel::laplace(0.1).unwrap()).unwrap();
        let s = spec.principal_split().unwrap();
        assert_eq!((s.sigma, s.tau, s.sign), (2.0, 1.0, 1.0));
        assert_eq!(spec.total_order(), 3.0);
    }

    #[test]
    fn wicksell_split() {
        let op = OperatorSpec::fractional(1.5, Side::Minus).unwrap();
        let s = sigma_tau(&op, &ErrorModel::exponential(1.0).unwrap()).unwrap();
        assert_relative_eq!(s.sigma, 1.0);
        assert_relative_eq!(s.tau, 1.5);
    }

    #[test]
    fn identity_split() {
        let s = sigma_tau(&OperatorSpec::identity(), &ErrorModel::none()).unwrap();
        assert_eq!((s.sigma, s.tau), (0.0, 0.0));
    }

    #[test]
    fn split_needs_phase_shift() {
        // Gamma(3): ρ = 3, D: μ = 1, r + m = 4 → ρ+μ = 4 gives τ = 0 without shifting.
        let s = sigma_tau(&OperatorSpec::derivative(1), &ErrorModel::gamma(3.0, 1.0).unwrap()).unwrap();
        assert_eq!((s.sigma, s.tau, s.sign), (4.0, 0.0, 1.0));
        // Gamma(2) with D²: ρ = 2, μ = 2, r+m = 4 → σ = 4, τ = 0.
        let s = sigma_tau(&OperatorSpec::derivative(2), &ErrorModel::gamma(2.0, 1.0).unwrap()).unwrap();
        assert_eq!((s.sigma, s.tau), (4.0, 0.0));
        // Exponential with a multiplier of order 1 and phase 3: ρ+μ = 4 > r+m = 2, shift by −2.
        let op = OperatorSpec::multiplier(Arc::new(|x| Complex64::new(0.0, x)), 1.0, Some((1.0, 3.0))).unwrap();
        let s = sigma_tau(&op, &ErrorModel::exponential(1.0).unwrap()).unwrap();
        assert_eq!((s.sigma, s.tau, s.mu, s.sign), (2.0, 0.0, 1.0, -1.0));
    }

    #[test]
    fn lambda_for_laplace_derivative() {
        let theta = 0.075;
        let spec = ProblemSpec::new(OperatorSpec::derivative(1), ErrorModel::laplace(theta).unwrap()).unwrap();
        for s in [-7.0, -0.5, 0.3, 12.0] {
            let expect = Complex64::new(0.0, -s) * (1.0 + theta * theta * s * s);
            assert!((spec.lambda(s).unwrap() - expect).norm() < 1e-12 * expect.norm());
        }
        assert_eq!(spec.lambda(0.0).unwrap(), Complex64::new(0.0, 0.0));
        let id = ProblemSpec::new(OperatorSpec::identity(), ErrorModel::none()).unwrap();
        assert_eq!(id.lambda(3.0).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn derivative_adjoint_of_scaled_kernel() {
        let k = make_beta_kernel(3).unwrap();
        let (t, h) = (0.3, 0.2);
        let psi = TestFunction::Scaled(ScaledPoly::new(k.polynomial().clone(), t, h));
        let out = adjoint_apply(&OperatorSpec::derivative(1), &psi).unwrap();
        let d1 = k.derivative(1).unwrap();
        for x in [0.31, 0.37, 0.45, 0.49] {
            let expect = -d1.eval((x - t) / h) / h;
            assert_relative_eq!(out.eval(x).re, expect, epsilon = 1e-9);
        }
    }

    #[test]
    fn product_rule_adjoint() {
        let k = make_beta_kernel(3).unwrap();
        let (t, h) = (0.2, 0.5);
        let sp = ScaledPoly::new(k.polynomial().clone(), t, h);
        let psi = TestFunction::Scaled(sp.clone());
        let x_coeff = Coefficient::Polynomial(Polynomial::new(vec![0.0, 1.0]));
        let poly_op = OperatorSpec::variable_coeff(vec![Coefficient::constant(0.0), x_coeff]).unwrap();
        let fn_op = OperatorSpec::variable_coeff(vec![
            Coefficient::constant(0.0),
            Coefficient::Function {
                name: "x".into(),
                derivatives: vec![Arc::new(|x| x), Arc::new(|_| 1.0)],
            },
        ])
        .unwrap();
        let a = adjoint_apply(&poly_op, &psi).unwrap();
        let b = adjoint_apply(&fn_op, &psi).unwrap();
        let dpsi = sp.derivative();
        for x in [0.25, 0.4, 0.55, 0.69] {
            let expect = -sp.eval(x) - x * dpsi.eval(x);
            assert_relative_eq!(a.eval(x).re, expect, epsilon = 1e-9, max_relative = 1e-10);
            assert_relative_eq!(b.eval(x).re, expect, epsilon = 1e-9, max_relative = 1e-10);
        }
    }

    #[test]
    fn missing_coefficient_derivative_is_a_config_error() {
        let k = make_beta_kernel(3).unwrap();
        let psi = TestFunction::Scaled(ScaledPoly::new(k.polynomial().clone(), 0.0, 1.0));
        let op = OperatorSpec::variable_coeff(vec![
            Coefficient::constant(0.0),
            Coefficient::Function { name: "q".into(), derivatives: vec![Arc::new(|x| x)] },
        ])
        .unwrap();
        assert!(matches!(adjoint_apply(&op, &psi), Err(Error::Config(_))));
    }

    #[test]
    fn identity_adjoint() {
        let psi = TestFunction::Scaled(ScaledPoly::new(Polynomial::new(vec![1.0, 2.0]), 0.0, 1.0));
        let out = adjoint_apply(&OperatorSpec::identity(), &psi).unwrap();
        assert_eq!(out.eval(0.5), psi.eval(0.5));
    }

    #[test]
    fn fractional_order_range() {
        assert!(OperatorSpec::fractional(0.5, Side::Plus).is_err());
        assert!(OperatorSpec::fractional(1.5, Side::Plus).is_ok());
    }

    #[test]
    fn vanishing_principal_coefficient_is_rejected() {
        let op = OperatorSpec::variable_coeff(vec![
            Coefficient::constant(0.0),
            Coefficient::Polynomial(Polynomial::new(vec![0.0, 1.0])),
        ])
        .unwrap();
        assert!(op.validate_principal().is_err());
    }
}
