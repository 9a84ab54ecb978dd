//! Index sets, local test statistics and the multiscale supremum.

mod eval;
pub(crate) mod lattice;
mod pilot;
mod testfn;

pub use eval::{statistics_over_set, StatRow, StatisticTable};
pub use pilot::{pilot_density, Bandwidth, PilotDensity};
pub(crate) use testfn::{build_plan, principal_template, Template, TemplatePlan};
pub use testfn::{
    closed_form_v, fractional_derivative_norm, principal_kernel_norm, v_closed_form_laplace_d, v_fourier,
    v_fourier_with, FourierOptions, FourierV,
};

use crate::error::{config, Error, Result};
use crate::kernels::Kernel;
use crate::operators::ProblemSpec;
use serde::{Deserialize, Serialize};

/// Shape of the index set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum IndexKind {
    /// `{(k/N, l/N): 1 ≤ l ≤ ⌊Nu⌋, k + l ≤ N}`.
    Triangular { n_grid: usize, u: f64 },
    /// `{(i/K, 1/K): 0 ≤ i < K}`.
    Circle { k: usize },
    /// `{(k 2^{−j}, 2^{−j}): 0 ≤ k < 2^j, j0 ≤ j ≤ j1}`.
    Dyadic { j0: u32, j1: u32 },
    Custom,
}

/// Finite set of scale-location pairs `(t, h)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleLocationSet {
    kind: IndexKind,
    pairs: Vec<(f64, f64)>,
}

/// Triangular set for sample size `n`: `N = ⌊n^{3/5}⌋`, `u = 1/log log n`.
pub fn triangular_for_sample_size(n: usize) -> Result<IndexKind> {
    if n < 16 {
        return Err(config(format!("sample size {n} too small for the default index set")));
    }
    let n_grid = (n as f64).powf(0.6).floor() as usize;
    let u = (1.0 / (n as f64).ln().ln()).min(1.0);
    Ok(IndexKind::Triangular { n_grid, u })
}

pub fn build_index_set(kind: IndexKind) -> Result<ScaleLocationSet> {
    let mut pairs = Vec::new();
    match &kind {
        IndexKind::Triangular { n_grid, u } => {
            let n = *n_grid;
            if n < 2 || !(*u > 0.0 && *u <= 1.0) {
                return Err(config(format!("triangular set needs N ≥ 2 and u ∈ (0,1], got N={n}, u={u}")));
            }
            let lmax = (n as f64 * u + 1e-9).floor() as usize;
            for l in 1..=lmax.min(n) {
                for k in 0..=(n - l) {
                    pairs.push((k as f64 / n as f64, l as f64 / n as f64));
                }
            }
        }
        IndexKind::Circle { k } => {
            if *k == 0 {
                return Err(config("circle set needs K ≥ 1"));
            }
            pairs.extend((0..*k).map(|i| (i as f64 / *k as f64, 1.0 / *k as f64)));
        }
        IndexKind::Dyadic { j0, j1 } => {
            if j0 > j1 || *j1 > 30 {
                return Err(config(format!("dyadic set needs j0 ≤ j1 ≤ 30, got {j0}, {j1}")));
            }
            for j in *j0..=*j1 {
                let h = (-(j as f64)).exp2();
                pairs.extend((0..(1usize << j)).map(|k| (k as f64 * h, h)));
            }
        }
        IndexKind::Custom => return Err(config("custom index sets are built with ScaleLocationSet::custom")),
    }
    if pairs.is_empty() {
        return Err(config("index set is empty"));
    }
    Ok(ScaleLocationSet { kind, pairs })
}

impl ScaleLocationSet {
    pub fn custom(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(config("index set is empty"));
        }
        for &(t, h) in &pairs {
            if !(0.0..=1.0).contains(&t) || !(h > 0.0 && h <= 1.0) {
                return Err(config(format!("pair ({t}, {h}) outside [0,1]×(0,1]")));
            }
        }
        Ok(ScaleLocationSet { kind: IndexKind::Custom, pairs })
    }

    pub fn kind(&self) -> &IndexKind {
        &self.kind
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn min_scale(&self) -> f64 {
        self.pairs.iter().map(|p| p.1).fold(f64::INFINITY, f64::min)
    }

    /// Subset with the given pair indices.
    pub fn subset(&self, idx: &[usize]) -> Result<Self> {
        ScaleLocationSet::custom(idx.iter().map(|&i| self.pairs[i]).collect())
    }
}

/// `w_h = √(½ log(ν/h)) / log log(ν/h)`.
pub fn weight(h: f64, nu: f64) -> f64 {
    let l = (nu / h).ln();
    (0.5 * l).sqrt() / l.ln()
}

/// `√(2 log(ν/h))`.
pub fn penalty(h: f64, nu: f64) -> f64 {
    (2.0 * (nu / h).ln()).sqrt()
}

/// Default calibration constant `exp(e²)`.
pub fn default_nu() -> f64 {
    std::f64::consts::E.powi(2).exp()
}

/// Which standardization is used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Exact norms `‖v_{t,h}‖₂`.
    General,
    /// Leading-order norms from the principal symbol.
    Principal,
}

/// Everything needed to compute statistics and calibrate them.
#[derive(Clone, Debug)]
pub struct MultiscaleConfig {
    pub nu: f64,
    pub alpha: f64,
    /// White-noise resolution; `None` means `min h / 16`.
    pub grid_step: Option<f64>,
    pub kernel: Kernel,
    pub problem: ProblemSpec,
    pub pilot_bandwidth: Bandwidth,
    pub pilot_floor: f64,
    pub mode: Mode,
    pub fourier: FourierOptions,
}

impl MultiscaleConfig {
    pub fn new(problem: ProblemSpec, kernel: Kernel) -> Self {
        MultiscaleConfig {
            nu: default_nu(),
            alpha: 0.1,
            grid_step: None,
            kernel,
            problem,
            pilot_bandwidth: Bandwidth::Silverman,
            pilot_floor: 0.05,
            mode: Mode::Principal,
            fourier: FourierOptions::default(),
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = nu;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_grid_step(mut self, step: f64) -> Self {
        self.grid_step = Some(step);
        self
    }

    /// Validates the configuration against `set` and returns the white-noise step.
    pub fn resolve(&self, set: &ScaleLocationSet) -> Result<f64> {
        if !(self.nu > std::f64::consts::E) {
            return Err(config(format!("nu must exceed e, got {}", self.nu)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(config(format!("alpha must lie in (0,1), got {}", self.alpha)));
        }
        if !(self.pilot_floor > 0.0) {
            return Err(config("pilot floor must be positive"));
        }
        let bound = set.min_scale() / 16.0;
        let step = self.grid_step.unwrap_or(bound);
        if !(step > 0.0) {
            return Err(config("grid step must be positive"));
        }
        if step > bound * (1.0 + 1e-9) {
            return Err(Error::Resolution(format!(
                "grid step {step:.3e} exceeds min h/16 = {bound:.3e}; refine the grid"
            )));
        }
        Ok(step)
    }
}

/// `sup w_h (|T − E T| / (√ĝ V) − √(2 log ν/h))` over the table.
pub fn multiscale_sup(table: &StatisticTable, expectations: Option<&[f64]>, nu: f64) -> f64 {
    table
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let centre = expectations.map(|e| e[i]).unwrap_or(0.0);
            weight(r.h, nu) * ((r.t_stat - centre).abs() / (r.ghat.sqrt() * r.v_norm) - penalty(r.h, nu))
        })
        .fold(f64::NEG_INFINITY, f64::max)
}
