//! Reproducible simulation studies built from the public pieces of the crate.

use crate::error::Result;
use crate::error_models::ErrorModel;
use crate::gaussian_sim::{quantile, simulate_statistic, QuantileEstimate};
use crate::inference::{coverage_check, extract_report, rectangles};
use crate::kernels::{gauss_legendre_unit, make_beta_kernel};
use crate::operators::{OperatorSpec, ProblemSpec};
use crate::synth::{synthesize, DensitySpec};
use crate::teststat::{
    build_index_set, statistics_over_set, triangular_for_sample_size, Mode, MultiscaleConfig, ScaleLocationSet,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Laplace(θ) errors, `op = D`, Beta(4,4) kernel.
pub fn laplace_derivative_config(theta: f64) -> Result<MultiscaleConfig> {
    let problem = ProblemSpec::new(OperatorSpec::derivative(1), ErrorModel::laplace(theta)?)?;
    Ok(MultiscaleConfig::new(problem, make_beta_kernel(3)?))
}

/// Default triangular set for a sample of size `n`.
pub fn default_set(n: usize) -> Result<ScaleLocationSet> {
    build_index_set(triangular_for_sample_size(n)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl FiveNumber {
    /// Nearest-rank quartiles.
    pub fn of(samples: &[f64]) -> Self {
        let mut v = samples.to_vec();
        v.sort_by(f64::total_cmp);
        let at = |p: f64| {
            let rank = ((p * v.len() as f64) - 1e-9).ceil().max(1.0) as usize;
            v[rank.min(v.len()) - 1]
        };
        FiveNumber { min: v[0], q1: at(0.25), median: at(0.5), q3: at(0.75), max: v[v.len() - 1] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig2Row {
    pub n: usize,
    pub pairs: usize,
    pub summary: FiveNumber,
    pub samples: Vec<f64>,
}

/// Principal-mode approximating statistic on the default set for each `n`.
pub fn fig2(ns: &[usize], reps: usize, seed: u64, workers: usize) -> Result<Vec<Fig2Row>> {
    let config = laplace_derivative_config(0.075)?;
    ns.iter()
        .map(|&n| {
            let set = default_set(n)?;
            let samples = simulate_statistic(&config, &set, Mode::Principal, reps, seed, workers)?;
            Ok(Fig2Row { n, pairs: set.len(), summary: FiveNumber::of(&samples), samples })
        })
        .collect()
}

/// `q_α` of the principal statistic for `n = 10⁴`.
pub fn quantile10k(alpha: f64, reps: usize, seed: u64, workers: usize) -> Result<QuantileEstimate> {
    let config = laplace_derivative_config(0.075)?;
    let samples = simulate_statistic(&config, &default_set(10_000)?, Mode::Principal, reps, seed, workers)?;
    quantile(&samples, alpha)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageSetup {
    pub n: usize,
    pub theta: f64,
    pub alpha: f64,
    pub reps: usize,
    pub calibration_reps: usize,
    pub seed: u64,
    pub workers: usize,
}

impl Default for CoverageSetup {
    fn default() -> Self {
        CoverageSetup { n: 2000, theta: 0.075, alpha: 0.1, reps: 300, calibration_reps: 2000, seed: 1, workers: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageOutcome {
    pub q_alpha: f64,
    pub true_modes: usize,
    /// Per replication: every rectangle meets the graph of `f'`.
    pub all_covered: Vec<bool>,
    pub mode_bounds: Vec<usize>,
    pub increases: Vec<usize>,
    pub decreases: Vec<usize>,
}

impl CoverageOutcome {
    pub fn coverage(&self) -> f64 {
        self.all_covered.iter().filter(|&&c| c).count() as f64 / self.all_covered.len() as f64
    }

    /// Share of replications whose mode bound does not exceed the true count.
    pub fn no_artefact_rate(&self) -> f64 {
        self.mode_bounds.iter().filter(|&&b| b <= self.true_modes).count() as f64 / self.mode_bounds.len() as f64
    }

    /// Share of replications with at least one increase and one decrease call.
    pub fn detection_rate(&self) -> f64 {
        self.increases.iter().zip(&self.decreases).filter(|(&i, &d)| i > 0 && d > 0).count() as f64
            / self.increases.len() as f64
    }
}

/// Simultaneous coverage of `f'` for `density` observed with Laplace noise,
/// using exact norms and a quantile calibrated in the same mode.
pub fn coverage_experiment(density: &DensitySpec, setup: &CoverageSetup) -> Result<CoverageOutcome> {
    let config = laplace_derivative_config(setup.theta)?.with_mode(Mode::General).with_alpha(setup.alpha);
    let set = default_set(setup.n)?;
    let sims = simulate_statistic(&config, &set, Mode::General, setup.calibration_reps, setup.seed, setup.workers)?;
    let q = quantile(&sims, setup.alpha)?.value;
    let err = config.problem.err.clone();
    // f' tabulated once; linear interpolation error is far below any rectangle height.
    const TAB: usize = 1 << 20;
    let table_fp: Vec<f64> = (0..=TAB).map(|i| density.derivative(i as f64 / TAB as f64)).collect();
    let truth = |x: f64| {
        let pos = (x.clamp(0.0, 1.0) * TAB as f64).min(TAB as f64 - 1e-9);
        let i = pos.floor() as usize;
        let w = pos - i as f64;
        table_fp[i] * (1.0 - w) + table_fp[i + 1] * w
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(setup.workers.max(1)).build().map_err(|e| crate::Error::Config(e.to_string()))?;
    let per_rep: Vec<Result<(bool, usize, usize, usize)>> = pool.install(|| {
        (0..setup.reps)
            .into_par_iter()
            .map(|rep| {
                let data = synthesize(density, &err, setup.n, setup.seed.wrapping_mul(1_000_003).wrapping_add(rep as u64))?;
                let table = statistics_over_set(&data, &set, &config)?;
                let rects = rectangles(&table, q, Mode::General)?;
                let covered = coverage_check(&truth, &rects).iter().all(|&c| c);
                let report = extract_report(&rects, setup.alpha);
                Ok((covered, report.mode_count_lower_bound, report.increases.len(), report.decreases.len()))
            })
            .collect()
    });
    let mut out = CoverageOutcome {
        q_alpha: q,
        true_modes: density.mode_count(),
        all_covered: Vec::new(),
        mode_bounds: Vec::new(),
        increases: Vec::new(),
        decreases: Vec::new(),
    };
    for r in per_rep {
        let (c, b, i, d) = r?;
        out.all_covered.push(c);
        out.mode_bounds.push(b);
        out.increases.push(i);
        out.decreases.push(d);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnbiasednessRow {
    pub t: f64,
    pub h: f64,
    /// `√n ⟨φ∘S_{t,h}, f'⟩` by quadrature.
    pub target: f64,
    pub mean: f64,
    pub std_error: f64,
}

impl UnbiasednessRow {
    pub fn z_score(&self) -> f64 {
        (self.mean - self.target) / self.std_error
    }
}

/// Monte Carlo mean of `T_{t,h}` against its exact expectation.
pub fn unbiasedness(
    density: &DensitySpec,
    theta: f64,
    pairs: &[(f64, f64)],
    n: usize,
    reps: usize,
    seed: u64,
) -> Result<Vec<UnbiasednessRow>> {
    let config = laplace_derivative_config(theta)?.with_mode(Mode::General);
    let set = ScaleLocationSet::custom(pairs.to_vec())?;
    let err = config.problem.err.clone();
    let draws: Vec<Result<Vec<f64>>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let data = synthesize(density, &err, n, seed.wrapping_mul(7919).wrapping_add(rep as u64))?;
            Ok(statistics_over_set(&data, &set, &config)?.rows.iter().map(|r| r.t_stat).collect())
        })
        .collect();
    let draws: Vec<Vec<f64>> = draws.into_iter().collect::<Result<_>>()?;
    let kernel = &config.kernel;
    Ok(pairs
        .iter()
        .enumerate()
        .map(|(i, &(t, h))| {
            let vals: Vec<f64> = draws.iter().map(|d| d[i]).collect();
            let mean = vals.iter().sum::<f64>() / reps as f64;
            let var = vals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps as f64 - 1.0);
            let pieces = 16;
            let inner: f64 = (0..pieces)
                .map(|k| {
                    gauss_legendre_unit(20, |u| {
                        let s = (k as f64 + u) / pieces as f64;
                        kernel.eval(s) * density.derivative(t + h * s)
                    }) / pieces as f64
                })
                .sum();
            UnbiasednessRow { t, h, target: (n as f64).sqrt() * h * inner, mean, std_error: (var / reps as f64).sqrt() }
        })
        .collect())
}
