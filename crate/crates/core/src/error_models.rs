//! Measurement-error distributions described by their characteristic functions.

use crate::error::{config, Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Built-in error laws.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ErrorKind {
    None,
    /// Density `(2θ)^{-1} e^{−|x|/θ}`.
    Laplace { theta: f64 },
    Gamma { shape: f64, theta: f64 },
    Exponential { theta: f64 },
}

/// Constants of the leading behaviour `1/cf(s) ≈ A ι_s^ρ |s|^r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrincipalConstants {
    pub a: f64,
    pub rho: f64,
    pub r: f64,
    pub beta0: f64,
}

type CfFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;
type SamplerFn = Arc<dyn Fn(&mut ChaCha8Rng) -> f64 + Send + Sync>;

/// Description of a user supplied error law.
#[derive(Clone)]
pub struct CustomErrorModel {
    pub name: String,
    pub cf: CfFn,
    pub r: f64,
    pub c_lower: f64,
    pub c_upper: f64,
    pub principal: Option<PrincipalConstants>,
    pub density_sup: Option<f64>,
    pub sampler: Option<SamplerFn>,
}

#[derive(Clone)]
enum Law {
    Builtin(ErrorKind),
    Custom(CustomErrorModel),
}

/// An error distribution `f_ε`.
#[derive(Clone)]
pub struct ErrorModel {
    law: Law,
}

impl fmt::Debug for ErrorModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.law {
            Law::Builtin(k) => write!(f, "ErrorModel({k:?})"),
            Law::Custom(c) => write!(f, "ErrorModel(custom {:?}, r={})", c.name, c.r),
        }
    }
}

/// `⟨s⟩ = (1+s²)^{1/2}`.
pub fn japanese_bracket(s: f64) -> f64 {
    (1.0 + s * s).sqrt()
}

/// `ι_s^α = exp(απi·sign(s)/2)`.
pub fn iota(s: f64, alpha: f64) -> Complex64 {
    if s == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::from_polar(1.0, alpha * PI * s.signum() / 2.0)
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(config(format!("{name} must be positive and finite, got {v}")))
    }
}

impl ErrorModel {
    pub fn none() -> Self {
        ErrorModel { law: Law::Builtin(ErrorKind::None) }
    }

    pub fn laplace(theta: f64) -> Result<Self> {
        positive("theta", theta)?;
        Ok(ErrorModel { law: Law::Builtin(ErrorKind::Laplace { theta }) })
    }

    pub fn gamma(shape: f64, theta: f64) -> Result<Self> {
        positive("shape", shape)?;
        positive("theta", theta)?;
        Ok(ErrorModel { law: Law::Builtin(ErrorKind::Gamma { shape, theta }) })
    }

    pub fn exponential(theta: f64) -> Result<Self> {
        positive("theta", theta)?;
        Ok(ErrorModel { law: Law::Builtin(ErrorKind::Exponential { theta }) })
    }

    pub fn from_kind(kind: ErrorKind) -> Result<Self> {
        match kind {
            ErrorKind::None => Ok(ErrorModel::none()),
            ErrorKind::Laplace { theta } => ErrorModel::laplace(theta),
            ErrorKind::Gamma { shape, theta } => ErrorModel::gamma(shape, theta),
            ErrorKind::Exponential { theta } => ErrorModel::exponential(theta),
        }
    }

    /// Wraps a user law. The characteristic function must equal 1 at the origin
    /// and must not vanish on a log grid up to `|s| = 10⁶`.
    pub fn custom(model: CustomErrorModel) -> Result<Self> {
        if (model.cf)(0.0).norm() == 0.0 || ((model.cf)(0.0) - 1.0).norm() > 1e-9 {
            return Err(config("characteristic function must equal 1 at the origin"));
        }
        if model.r < 0.0 || !(model.c_lower > 0.0) || model.c_upper < model.c_lower {
            return Err(config("custom model needs r ≥ 0 and 0 < C_l ≤ C_u"));
        }
        for s in log_grid(1e-3, 1e6, 400) {
            for s in [s, -s] {
                let c = (model.cf)(s);
                if !(c.norm() > 0.0) {
                    return Err(Error::SingularModel(format!(
                        "characteristic function vanishes at s = {s}"
                    )));
                }
            }
        }
        Ok(ErrorModel { law: Law::Custom(model) })
    }

    pub fn kind(&self) -> Option<ErrorKind> {
        match &self.law {
            Law::Builtin(k) => Some(*k),
            Law::Custom(_) => None,
        }
    }

    pub fn name(&self) -> String {
        match &self.law {
            Law::Builtin(ErrorKind::None) => "none".into(),
            Law::Builtin(ErrorKind::Laplace { theta }) => format!("laplace({theta})"),
            Law::Builtin(ErrorKind::Gamma { shape, theta }) => format!("gamma({shape},{theta})"),
            Law::Builtin(ErrorKind::Exponential { theta }) => format!("exponential({theta})"),
            Law::Custom(c) => c.name.clone(),
        }
    }

    /// Same law with `θ` multiplied by `c` (the law of `cε`).
    pub fn rescaled(&self, c: f64) -> Result<Self> {
        match &self.law {
            Law::Builtin(ErrorKind::None) => Ok(self.clone()),
            Law::Builtin(ErrorKind::Laplace { theta }) => ErrorModel::laplace(theta * c),
            Law::Builtin(ErrorKind::Gamma { shape, theta }) => ErrorModel::gamma(*shape, theta * c),
            Law::Builtin(ErrorKind::Exponential { theta }) => ErrorModel::exponential(theta * c),
            Law::Custom(_) => Err(Error::Unsupported("custom error laws cannot be rescaled".into())),
        }
    }

    /// `F f_ε(s) = E e^{−isε}`.
    pub fn cf(&self, s: f64) -> Complex64 {
        match &self.law {
            Law::Builtin(ErrorKind::None) => Complex64::new(1.0, 0.0),
            Law::Builtin(ErrorKind::Laplace { theta }) => {
                Complex64::new(1.0 / (1.0 + theta * theta * s * s), 0.0)
            }
            Law::Builtin(ErrorKind::Gamma { shape, theta }) => {
                Complex64::new(1.0, theta * s).powf(-shape)
            }
            Law::Builtin(ErrorKind::Exponential { theta }) => Complex64::new(1.0, theta * s).inv(),
            Law::Custom(c) => (c.cf)(s),
        }
    }

    /// `1/cf(−s)`.
    pub fn inversion_multiplier(&self, s: f64) -> Result<Complex64> {
        match &self.law {
            Law::Builtin(ErrorKind::None) => Ok(Complex64::new(1.0, 0.0)),
            Law::Builtin(ErrorKind::Laplace { theta }) => {
                Ok(Complex64::new(1.0 + theta * theta * s * s, 0.0))
            }
            Law::Builtin(ErrorKind::Gamma { shape, theta }) => {
                Ok(Complex64::new(1.0, -theta * s).powf(*shape))
            }
            Law::Builtin(ErrorKind::Exponential { theta }) => Ok(Complex64::new(1.0, -theta * s)),
            Law::Custom(c) => {
                let v = (c.cf)(-s);
                if v.norm() == 0.0 {
                    Err(Error::SingularModel(format!("cf vanishes at {}", -s)))
                } else {
                    Ok(v.inv())
                }
            }
        }
    }

    /// Coefficients `q_j` with `1/cf(−s) = Σ q_j (is)^j` when the inverse is a polynomial
    /// in `is`, i.e. deconvolution is a differential operator `Σ q_j D^j`.
    pub fn inversion_polynomial(&self) -> Option<Vec<f64>> {
        match &self.law {
            Law::Builtin(ErrorKind::None) => Some(vec![1.0]),
            Law::Builtin(ErrorKind::Laplace { theta }) => Some(vec![1.0, 0.0, -theta * theta]),
            Law::Builtin(ErrorKind::Exponential { theta }) => Some(vec![1.0, -theta]),
            Law::Builtin(ErrorKind::Gamma { shape, theta }) => {
                if shape.fract() != 0.0 || *shape > 64.0 {
                    return None;
                }
                let r = *shape as usize;
                let mut out = Vec::with_capacity(r + 1);
                let mut binom = 1.0;
                for j in 0..=r {
                    out.push(binom * (-theta).powi(j as i32));
                    binom = binom * (r - j) as f64 / (j + 1) as f64;
                }
                Some(out)
            }
            Law::Custom(_) => None,
        }
    }

    /// Degree of ill-posedness `r`.
    pub fn ill_posedness(&self) -> f64 {
        match &self.law {
            Law::Builtin(ErrorKind::None) => 0.0,
            Law::Builtin(ErrorKind::Laplace { .. }) => 2.0,
            Law::Builtin(ErrorKind::Gamma { shape, .. }) => *shape,
            Law::Builtin(ErrorKind::Exponential { .. }) => 1.0,
            Law::Custom(c) => c.r,
        }
    }

    /// `(C_l, C_u)` with `C_l ≤ |cf(s)|⟨s⟩^r ≤ C_u`.
    pub fn bounds(&self) -> (f64, f64) {
        let scaled = |theta: f64, r: f64| {
            let b = theta.powf(-r);
            (b.min(1.0), b.max(1.0))
        };
        match &self.law {
            Law::Builtin(ErrorKind::None) => (1.0, 1.0),
            Law::Builtin(ErrorKind::Laplace { theta }) => scaled(*theta, 2.0),
            Law::Builtin(ErrorKind::Gamma { shape, theta }) => scaled(*theta, *shape),
            Law::Builtin(ErrorKind::Exponential { theta }) => scaled(*theta, 1.0),
            Law::Custom(c) => (c.c_lower, c.c_upper),
        }
    }

    pub fn principal(&self) -> Option<PrincipalConstants> {
        match &self.law {
            Law::Builtin(ErrorKind::None) => Some(PrincipalConstants { a: 1.0, rho: 0.0, r: 0.0, beta0: f64::INFINITY }),
            Law::Builtin(ErrorKind::Laplace { theta }) => {
                Some(PrincipalConstants { a: theta * theta, rho: 0.0, r: 2.0, beta0: 2.0 })
            }
            Law::Builtin(ErrorKind::Gamma { shape, theta }) => Some(PrincipalConstants {
                a: theta.powf(*shape),
                rho: shape.rem_euclid(4.0),
                r: *shape,
                beta0: 1.0,
            }),
            Law::Builtin(ErrorKind::Exponential { theta }) => {
                Some(PrincipalConstants { a: *theta, rho: 1.0, r: 1.0, beta0: 1.0 })
            }
            Law::Custom(c) => c.principal,
        }
    }

    /// `(A, ρ, r)`.
    pub fn principal_constants(&self) -> Result<(f64, f64, f64)> {
        self.principal()
            .map(|p| (p.a, p.rho, p.r))
            .ok_or_else(|| Error::Unsupported(format!("{} declares no principal constants", self.name())))
    }

    /// `‖f_ε‖_∞` when finite and known.
    pub fn density_sup(&self) -> Option<f64> {
        match &self.law {
            Law::Builtin(ErrorKind::None) => None,
            Law::Builtin(ErrorKind::Laplace { theta }) => Some(0.5 / theta),
            Law::Builtin(ErrorKind::Exponential { theta }) => Some(1.0 / theta),
            Law::Builtin(ErrorKind::Gamma { shape, theta }) => {
                if *shape < 1.0 {
                    None
                } else if *shape == 1.0 {
                    Some(1.0 / theta)
                } else {
                    let x = (shape - 1.0) * theta;
                    let ln = (shape - 1.0) * x.ln() - x / theta
                        - statrs::function::gamma::ln_gamma(*shape)
                        - shape * theta.ln();
                    Some(ln.exp())
                }
            }
            Law::Custom(c) => c.density_sup,
        }
    }

    /// One draw.
    pub fn draw(&self, rng: &mut ChaCha8Rng) -> Result<f64> {
        Ok(match &self.law {
            Law::Builtin(ErrorKind::None) => 0.0,
            Law::Builtin(ErrorKind::Laplace { theta }) => {
                let e: f64 = Exp1.sample(rng);
                if rng.random::<bool>() {
                    theta * e
                } else {
                    -theta * e
                }
            }
            Law::Builtin(ErrorKind::Exponential { theta }) => {
                let e: f64 = Exp1.sample(rng);
                theta * e
            }
            Law::Builtin(ErrorKind::Gamma { shape, theta }) => {
                let g = Gamma::new(*shape, *theta).map_err(|e| config(e.to_string()))?;
                g.sample(rng)
            }
            Law::Custom(c) => match &c.sampler {
                Some(f) => f(rng),
                None => return Err(Error::Unsupported(format!("{} has no sampler", c.name))),
            },
        })
    }

    /// `n` i.i.d. draws, deterministic in `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| self.draw(&mut rng)).collect()
    }
}

/// Diagnostics for the decay assumptions on the characteristic function.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssumptionReport {
    /// `sup |cf(s)|⟨s⟩^r` over the grid.
    pub sup_ratio: f64,
    /// `inf |cf(s)|⟨s⟩^r` over the grid.
    pub inf_ratio: f64,
    /// `sup ⟨s⟩^{β₀}|A ι_s^ρ |s|^r cf(s) − 1|`, when principal constants exist.
    pub residual_sup: Option<f64>,
    pub bounds_respected: bool,
    pub residual_diverges: bool,
    pub violation: bool,
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let points = points.max(2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..points).map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp()).collect()
}

/// Checks the two-sided decay bound and the principal residual on a log-spaced grid of
/// `±s`, `s ∈ [10⁻³, s_max]`.
pub fn validate_assumptions(model: &ErrorModel, s_max: f64, points: usize) -> AssumptionReport {
    let r = model.ill_posedness();
    let (cl, cu) = model.bounds();
    let grid: Vec<f64> = log_grid(1e-3, s_max.max(1.0), points)
        .into_iter()
        .flat_map(|s| [s, -s])
        .collect();
    let mut sup_ratio: f64 = 0.0;
    let mut inf_ratio = f64::INFINITY;
    for &s in &grid {
        let ratio = model.cf(s).norm() * japanese_bracket(s).powf(r);
        sup_ratio = sup_ratio.max(ratio);
        inf_ratio = inf_ratio.min(ratio);
    }
    let tol = 1e-9;
    let bounds_respected = inf_ratio >= cl * (1.0 - tol) && sup_ratio <= cu * (1.0 + tol);

    let (residual_sup, residual_diverges) = match model.principal() {
        Some(p) => {
            let beta0 = if p.beta0.is_finite() { p.beta0 } else { 0.0 };
            let resid = |s: f64| {
                let lead = iota(s, p.rho) * (p.a * s.abs().powf(p.r));
                japanese_bracket(s).powf(beta0) * (lead * model.cf(s) - 1.0).norm()
            };
            let split = s_max.max(1.0) / 10.0;
            let mut body: f64 = 0.0;
            let mut tail: f64 = 0.0;
            for &s in &grid {
                let v = resid(s);
                if s.abs() >= split {
                    tail = tail.max(v);
                } else {
                    body = body.max(v);
                }
            }
            let sup = body.max(tail);
            (Some(sup), !sup.is_finite() || tail > 2.0 * body.max(1e-300) && tail > 1e-9)
        }
        None => (None, false),
    };
    let violation = !(inf_ratio > 0.0) || !bounds_respected || residual_diverges;
    AssumptionReport { sup_ratio, inf_ratio, residual_sup, bounds_respected, residual_diverges, violation }
}
