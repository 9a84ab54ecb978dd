//! Monte Carlo for the Gaussian approximation of the multiscale statistic.
//!
//! Each replication draws one white-noise grid and evaluates every pair against it,
//! so the supremum sees the joint law across scales and locations.

use crate::error::{config, Error, Result};
use crate::kernels::GridFunction;
use crate::teststat::lattice::{local_powers, CellMoments, LatticePlan};
use crate::teststat::{
    build_plan, penalty, principal_template, weight, Mode, MultiscaleConfig, ScaleLocationSet, TemplatePlan,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::Arc;

/// Random number generator of replication `rep`: independent of scheduling.
pub fn rep_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// Brownian increments on a uniform grid with a node at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseGrid {
    pub origin: f64,
    pub step: f64,
    pub count: usize,
    pub increments: Vec<f64>,
}

impl NoiseGrid {
    /// Grid covering `[min(lo, −0.5), max(hi, 1.5)]`.
    pub fn new(step: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(step > 0.0) {
            return Err(config("noise step must be positive"));
        }
        let below = (lo.min(-0.5).abs() / step - 1e-9).ceil() as usize;
        let above = (hi.max(1.5) / step - 1e-9).ceil() as usize;
        let count = below + above + 1;
        Ok(NoiseGrid { origin: -(below as f64) * step, step, count, increments: vec![0.0; count] })
    }

    /// Index of the node at 0.
    pub fn zero_index(&self) -> usize {
        (-self.origin / self.step).round() as usize
    }

    pub fn x(&self, j: usize) -> f64 {
        self.origin + j as f64 * self.step
    }

    /// Fresh `N(0, step)` increments.
    pub fn fill(&mut self, rng: &mut ChaCha8Rng) {
        let sd = self.step.sqrt();
        for v in self.increments.iter_mut() {
            let z: f64 = StandardNormal.sample(rng);
            *v = sd * z;
        }
    }
}

/// Empirical quantile with its Monte Carlo error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantileEstimate {
    pub alpha: f64,
    pub value: f64,
    pub reps: usize,
    pub mc_stderr: f64,
}

/// Nearest-rank `(1−α)` quantile; the standard error is `√(p(1−p)/n) / f̂(q)` with a
/// Gaussian kernel density estimate `f̂`.
pub fn quantile(samples: &[f64], alpha: f64) -> Result<QuantileEstimate> {
    if samples.is_empty() {
        return Err(config("no samples"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(config(format!("alpha must lie in (0,1), got {alpha}")));
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    let p = 1.0 - alpha;
    let rank = ((p * n as f64) - 1e-9).ceil().max(1.0) as usize;
    let value = s[rank.min(n) - 1];
    let mean = s.iter().sum::<f64>() / n as f64;
    let sd = (s.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0).max(1.0)).sqrt();
    let mc_stderr = if s[0] == s[n - 1] || sd == 0.0 || n < 2 {
        0.0
    } else {
        let b = 1.06 * sd * (n as f64).powf(-0.2);
        let dens = s.iter().map(|x| (-0.5 * ((value - x) / b).powi(2)).exp()).sum::<f64>()
            / (n as f64 * b * (2.0 * std::f64::consts::PI).sqrt());
        (p * (1.0 - p) / n as f64).sqrt() / dens
    };
    Ok(QuantileEstimate { alpha, value, reps: n, mc_stderr })
}

struct DirectPair {
    start: usize,
    vals: Arc<Vec<f64>>,
}

enum Evaluator {
    Lattice { plan: LatticePlan, sub: usize, powers: Vec<Vec<f64>> },
    Direct(Vec<DirectPair>),
}

/// Everything a replication needs, computed once.
struct SimPlan {
    grid: NoiseGrid,
    evaluator: Evaluator,
    inv_norm: Vec<f64>,
    w: Vec<f64>,
    pen: Vec<f64>,
}

fn sim_templates(config: &MultiscaleConfig, set: &ScaleLocationSet, mode: Mode) -> Result<(TemplatePlan, Vec<f64>)> {
    match mode {
        Mode::General => {
            let plan = build_plan(&config.problem, &config.kernel, set, &config.fourier)?;
            let norms = plan.general_norms.clone();
            Ok((plan, norms))
        }
        Mode::Principal => {
            let (tpl, dnorm) = principal_template(&config.problem, &config.kernel, &config.fourier)?;
            let norms = set.pairs().iter().map(|&(_, h)| h.sqrt() * dnorm).collect();
            let plan = TemplatePlan {
                pair_template: vec![0; set.len()],
                general_norms: vec![],
                templates: vec![tpl],
            };
            Ok((plan, norms))
        }
    }
}

fn build_sim_plan(config: &MultiscaleConfig, set: &ScaleLocationSet, mode: Mode) -> Result<SimPlan> {
    let step = config.resolve(set)?;
    let (plan, norms) = sim_templates(config, set, mode)?;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for (i, &(t, h)) in set.pairs().iter().enumerate() {
        let (ulo, uhi) = plan.templates[plan.pair_template[i]].support();
        lo = lo.min(t + ulo * h);
        hi = hi.max(t + uhi * h);
    }
    let grid = NoiseGrid::new(step, lo, hi)?;
    let j0 = grid.zero_index();

    let lattice = LatticePlan::new(set, &plan).and_then(|lp| {
        let cell = 1.0 / lp.lattice.cells as f64;
        let sub = (cell / step).round();
        let aligned = sub >= 1.0 && (sub * step - cell).abs() <= 1e-9 * cell && j0 + lp.lattice.cells * sub as usize <= grid.count;
        aligned.then_some((lp, sub as usize))
    });
    let evaluator = match lattice {
        Some((lp, sub)) => {
            let powers = local_powers(sub, lp.degree);
            Evaluator::Lattice { plan: lp, sub, powers }
        }
        None => {
            let mut cache: HashMap<(usize, i64, u64), (i64, Arc<Vec<f64>>)> = HashMap::new();
            let mut pairs = Vec::with_capacity(set.len());
            for (i, &(t, h)) in set.pairs().iter().enumerate() {
                let ti = plan.pair_template[i];
                let tpl = &plan.templates[ti];
                let (ulo, uhi) = tpl.support();
                let pos_t = (t - grid.origin) / step;
                let base = pos_t.floor();
                let frac = pos_t - base;
                let key = (ti, (frac * 1e9).round() as i64, h.to_bits());
                let entry = cache.entry(key).or_insert_with(|| {
                    let jlo = ((t + ulo * h - grid.origin) / step - 1e-9).ceil() as i64;
                    let jhi = ((t + uhi * h - grid.origin) / step + 1e-9).floor() as i64;
                    let vals: Vec<f64> = (jlo..=jhi)
                        .map(|j| tpl.eval((grid.origin + j as f64 * step - t) / h))
                        .collect();
                    (jlo - base as i64, Arc::new(vals))
                });
                let start = (base as i64 + entry.0).max(0) as usize;
                pairs.push(DirectPair { start, vals: entry.1.clone() });
            }
            Evaluator::Direct(pairs)
        }
    };
    Ok(SimPlan {
        grid,
        evaluator,
        inv_norm: norms.iter().map(|v| 1.0 / v).collect(),
        w: set.pairs().iter().map(|&(_, h)| weight(h, config.nu)).collect(),
        pen: set.pairs().iter().map(|&(_, h)| penalty(h, config.nu)).collect(),
    })
}

struct Workspace {
    grid: NoiseGrid,
    moments: Option<CellMoments>,
    sums: Vec<f64>,
}

impl SimPlan {
    fn workspace(&self) -> Workspace {
        let moments = match &self.evaluator {
            Evaluator::Lattice { plan, .. } => Some(CellMoments::zeros(plan.lattice.cells, plan.degree)),
            Evaluator::Direct(_) => None,
        };
        Workspace { grid: self.grid.clone(), moments, sums: vec![0.0; self.w.len()] }
    }

    /// Fills `ws.sums` with `Σ_j ψ_{t,h}(s_j) ΔW_j` for replication `rep`.
    fn replicate(&self, ws: &mut Workspace, seed: u64, rep: u64) {
        let mut rng = rep_rng(seed, rep);
        ws.grid.fill(&mut rng);
        match &self.evaluator {
            Evaluator::Lattice { plan, sub, powers } => {
                let m = ws.moments.as_mut().expect("lattice workspace");
                m.fill_from_increments(&ws.grid.increments, self.grid.zero_index(), *sub, powers);
                plan.evaluate_into(m, &mut ws.sums);
            }
            Evaluator::Direct(pairs) => {
                let incr = &ws.grid.increments;
                for (out, p) in ws.sums.iter_mut().zip(pairs) {
                    let end = (p.start + p.vals.len()).min(incr.len());
                    *out = p.vals.iter().zip(&incr[p.start..end]).map(|(a, b)| a * b).sum();
                }
            }
        }
    }

    fn sup(&self, sums: &[f64]) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for i in 0..sums.len() {
            let v = self.w[i] * (sums[i].abs() * self.inv_norm[i] - self.pen[i]);
            if v > best {
                best = v;
            }
        }
        best
    }
}

fn run_reps<R: Send>(
    plan: &SimPlan,
    reps: usize,
    seed: u64,
    workers: usize,
    f: impl Fn(&SimPlan, &[f64]) -> R + Sync,
) -> Result<Vec<R>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| {
        (0..reps)
            .into_par_iter()
            .map_init(
                || plan.workspace(),
                |ws, rep| {
                    plan.replicate(ws, seed, rep as u64);
                    f(plan, &ws.sums)
                },
            )
            .collect()
    }))
}

/// `reps` draws of `sup w_h(|∫ψ_{t,h} dW| / V_{t,h} − √(2 log ν/h))`.
pub fn simulate_statistic(
    config: &MultiscaleConfig,
    set: &ScaleLocationSet,
    mode: Mode,
    reps: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<f64>> {
    let plan = build_sim_plan(config, set, mode)?;
    run_reps(&plan, reps, seed, workers, |p, sums| p.sup(sums))
}

/// Per-replication standardized values `∫ψ_{t,h} dW / V_{t,h}` for every pair.
pub fn simulate_pair_ratios(
    config: &MultiscaleConfig,
    set: &ScaleLocationSet,
    mode: Mode,
    reps: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<Vec<f64>>> {
    let plan = build_sim_plan(config, set, mode)?;
    run_reps(&plan, reps, seed, workers, |p, sums| {
        sums.iter().zip(&p.inv_norm).map(|(s, v)| s * v).collect()
    })
}

/// `|Var(Σ ψ(x_i) ΔW_i) / ‖ψ‖₂² − 1|` estimated from `reps` replications.
pub fn variance_check(psi: &GridFunction, reps: usize, seed: u64) -> Result<f64> {
    let max = psi.sup_norm();
    let n = psi.len();
    let tail = psi.samples()[0].norm().max(psi.samples()[n - 1].norm());
    if max > 0.0 && tail >= 1e-6 * max {
        return Err(Error::Precondition("test function does not decay at the grid ends".into()));
    }
    if reps < 2 {
        return Err(config("variance check needs at least two replications"));
    }
    let vals = psi.real_parts();
    let sd = psi.step().sqrt();
    let draws: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = rep_rng(seed, rep as u64);
            vals.iter()
                .map(|v| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    v * z * sd
                })
                .sum()
        })
        .collect();
    let mean = draws.iter().sum::<f64>() / reps as f64;
    let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps as f64 - 1.0);
    let target = vals.iter().map(|v| v * v).sum::<f64>() * psi.step();
    Ok((var / target - 1.0).abs())
}
