//! Known target densities on [0, 1] and synthetic samples from the deconvolution model.

use crate::error::{config, Result};
use crate::error_models::ErrorModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};
use statrs::function::beta::{beta_reg, ln_beta};
use statrs::function::erf::{erf, erf_inv};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaComponent {
    pub weight: f64,
    pub a: f64,
    pub b: f64,
}

/// Normal restricted to [0, 1] and renormalized.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalComponent {
    pub weight: f64,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum DensitySpec {
    BetaMixture { components: Vec<BetaComponent> },
    TruncatedNormalMixture { components: Vec<NormalComponent> },
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

impl NormalComponent {
    fn mass(&self) -> f64 {
        std_normal_cdf((1.0 - self.mean) / self.sd) - std_normal_cdf(-self.mean / self.sd)
    }

    fn pdf(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        let z = (x - self.mean) / self.sd;
        (-0.5 * z * z).exp() / (self.sd * (2.0 * std::f64::consts::PI).sqrt() * self.mass())
    }
}

impl BetaComponent {
    fn pdf(&self, x: f64) -> f64 {
        if !(x > 0.0 && x < 1.0) {
            return 0.0;
        }
        ((self.a - 1.0) * x.ln() + (self.b - 1.0) * (1.0 - x).ln() - ln_beta(self.a, self.b)).exp()
    }
}

impl DensitySpec {
    /// Three well separated beta bumps.
    pub fn trimodal() -> Self {
        DensitySpec::BetaMixture {
            components: vec![
                BetaComponent { weight: 0.35, a: 6.0, b: 30.0 },
                BetaComponent { weight: 0.30, a: 25.0, b: 25.0 },
                BetaComponent { weight: 0.35, a: 30.0, b: 6.0 },
            ],
        }
    }

    /// A two-component smooth mixture with a single mode.
    pub fn smooth_unimodal() -> Self {
        DensitySpec::BetaMixture {
            components: vec![BetaComponent { weight: 0.6, a: 4.0, b: 5.0 }, BetaComponent { weight: 0.4, a: 5.0, b: 3.0 }],
        }
    }

    fn weights(&self) -> Vec<f64> {
        match self {
            DensitySpec::BetaMixture { components } => components.iter().map(|c| c.weight).collect(),
            DensitySpec::TruncatedNormalMixture { components } => components.iter().map(|c| c.weight).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.weights();
        if w.is_empty() {
            return Err(config("density mixture has no components"));
        }
        if w.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(config("mixture weights must be positive"));
        }
        let total: f64 = w.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(config(format!("mixture weights sum to {total}, expected 1")));
        }
        match self {
            DensitySpec::BetaMixture { components } => {
                if components.iter().any(|c| !(c.a > 0.0 && c.b > 0.0)) {
                    return Err(config("beta parameters must be positive"));
                }
            }
            DensitySpec::TruncatedNormalMixture { components } => {
                if components.iter().any(|c| !(c.sd > 0.0 && c.mean.is_finite()) || c.mass() <= 0.0) {
                    return Err(config("normal components need sd > 0 and mass on [0, 1]"));
                }
            }
        }
        Ok(())
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            DensitySpec::BetaMixture { components } => components.iter().map(|c| c.weight * c.pdf(x)).sum(),
            DensitySpec::TruncatedNormalMixture { components } => components.iter().map(|c| c.weight * c.pdf(x)).sum(),
        }
    }

    /// `f'(x)`, zero outside the open unit interval.
    pub fn derivative(&self, x: f64) -> f64 {
        if !(x > 0.0 && x < 1.0) {
            return 0.0;
        }
        match self {
            DensitySpec::BetaMixture { components } => components
                .iter()
                .map(|c| c.weight * c.pdf(x) * ((c.a - 1.0) / x - (c.b - 1.0) / (1.0 - x)))
                .sum(),
            DensitySpec::TruncatedNormalMixture { components } => components
                .iter()
                .map(|c| -c.weight * c.pdf(x) * (x - c.mean) / (c.sd * c.sd))
                .sum(),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        match self {
            DensitySpec::BetaMixture { components } => components.iter().map(|c| c.weight * beta_reg(c.a, c.b, x)).sum(),
            DensitySpec::TruncatedNormalMixture { components } => components
                .iter()
                .map(|c| {
                    let lo = std_normal_cdf(-c.mean / c.sd);
                    c.weight * (std_normal_cdf((x - c.mean) / c.sd) - lo) / c.mass()
                })
                .sum(),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let w = self.weights();
        let mut u: f64 = rng.random();
        let mut idx = w.len() - 1;
        for (i, wi) in w.iter().enumerate() {
            if u < *wi {
                idx = i;
                break;
            }
            u -= wi;
        }
        match self {
            DensitySpec::BetaMixture { components } => {
                let c = components[idx];
                Beta::new(c.a, c.b).expect("validated beta parameters").sample(rng)
            }
            DensitySpec::TruncatedNormalMixture { components } => {
                let c = components[idx];
                let lo = std_normal_cdf(-c.mean / c.sd);
                let hi = std_normal_cdf((1.0 - c.mean) / c.sd);
                let p = lo + (hi - lo) * rng.random::<f64>();
                let x = c.mean + c.sd * std::f64::consts::SQRT_2 * erf_inv(2.0 * p - 1.0);
                x.clamp(0.0, 1.0)
            }
        }
    }

    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..n).map(|_| self.draw(&mut rng)).collect())
    }

    /// Interior points where `f'` changes sign, found on a grid of `points` nodes.
    pub fn derivative_sign_changes(&self, points: usize) -> Vec<(f64, bool)> {
        let xs: Vec<f64> = (1..points).map(|i| i as f64 / points as f64).collect();
        let mut out = Vec::new();
        let mut prev: Option<(f64, f64)> = None;
        for &x in &xs {
            let d = self.derivative(x);
            if d == 0.0 {
                continue;
            }
            if let Some((px, pd)) = prev {
                if pd.signum() != d.signum() {
                    out.push((0.5 * (px + x), pd > 0.0));
                }
            }
            prev = Some((x, d));
        }
        out
    }

    /// Number of local maxima in (0, 1).
    pub fn mode_count(&self) -> usize {
        self.derivative_sign_changes(20_000).iter().filter(|(_, up_to_down)| *up_to_down).count()
    }
}

/// `n` draws of `X + ε` with `X ~ density` and `ε` from `error`.
pub fn synthesize(density: &DensitySpec, error: &ErrorModel, n: usize, seed: u64) -> Result<Vec<f64>> {
    density.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let x = density.draw(&mut rng);
        out.push(x + error.draw(&mut rng)?);
    }
    Ok(out)
}
