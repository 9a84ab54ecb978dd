use super::lattice::{CellMoments, LatticePlan};
use super::{build_plan, penalty, principal_kernel_norm, weight, Mode, MultiscaleConfig, PilotDensity, ScaleLocationSet, Template, TemplatePlan};
use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Statistic and standardization for one pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatRow {
    pub t: f64,
    pub h: f64,
    /// `T_{t,h} = n^{−1/2} Σ Re v_{t,h}(Y_k)`.
    pub t_stat: f64,
    /// `‖v_{t,h}‖₂` or its principal approximation.
    pub v_norm: f64,
    pub ghat: f64,
    pub w: f64,
    pub sqrt_term: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatisticTable {
    pub rows: Vec<StatRow>,
    pub mode: Mode,
    pub n: usize,
    pub nu: f64,
}

/// `Σ_k template((Y_k − t)/h)` for every pair, with `sorted` ascending.
pub(crate) fn template_sums(sorted: &[f64], set: &ScaleLocationSet, plan: &TemplatePlan) -> Vec<f64> {
    if let Some(lp) = LatticePlan::new(set, plan) {
        let moments = CellMoments::from_points(sorted, lp.lattice.cells, lp.degree);
        let mut out = vec![0.0; set.len()];
        lp.evaluate_into(&moments, &mut out);
        return out;
    }
    set.pairs()
        .par_iter()
        .enumerate()
        .map(|(i, &(t, h))| {
            let tpl = &plan.templates[plan.pair_template[i]];
            let (ulo, uhi) = tpl.support();
            let lo = sorted.partition_point(|&y| y < t + ulo * h);
            let hi = sorted.partition_point(|&y| y <= t + uhi * h);
            match tpl {
                Template::Polynomial(p) => sorted[lo..hi]
                    .iter()
                    .map(|&y| {
                        let u = (y - t) / h;
                        if (0.0..1.0).contains(&u) {
                            p.eval(u)
                        } else {
                            0.0
                        }
                    })
                    .sum(),
                Template::Sampled { .. } => sorted[lo..hi].iter().map(|&y| tpl.eval((y - t) / h)).sum(),
            }
        })
        .collect()
}

/// Local statistics, pilot density values and norms for every pair of `set`.
pub fn statistics_over_set(data: &[f64], set: &ScaleLocationSet, config: &MultiscaleConfig) -> Result<StatisticTable> {
    config.resolve(set)?;
    if data.is_empty() {
        return Err(Error::DegenerateData("no observations".into()));
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::DegenerateData("observations must be finite".into()));
    }
    let pilot = PilotDensity::new(data, config.pilot_bandwidth, config.pilot_floor)?;
    let plan = build_plan(&config.problem, &config.kernel, set, &config.fourier)?;
    let principal = match config.mode {
        Mode::Principal => {
            let split = config.problem.check_principal_conditions()?;
            let q = split.sigma + split.tau;
            Some((split, principal_kernel_norm(&config.kernel, q)?))
        }
        Mode::General => None,
    };
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let sums = template_sums(&sorted, set, &plan);
    let scale = 1.0 / (data.len() as f64).sqrt();
    let mut ghat_cache: std::collections::HashMap<u64, f64> = std::collections::HashMap::new();
    let mut rows = Vec::with_capacity(set.len());
    for (i, &(t, h)) in set.pairs().iter().enumerate() {
        let ghat = *ghat_cache.entry(t.to_bits()).or_insert_with(|| pilot.eval(t));
        let v_norm = match &principal {
            None => plan.general_norms[i],
            Some((split, dnorm)) => {
                let a_p = config.problem.op.principal_coefficient(t).unwrap_or(1.0);
                h.powf(0.5 - split.sigma - split.tau) * (split.a * a_p).abs() * dnorm
            }
        };
        rows.push(StatRow {
            t,
            h,
            t_stat: sums[i] * scale,
            v_norm,
            ghat,
            w: weight(h, config.nu),
            sqrt_term: penalty(h, config.nu),
        });
    }
    Ok(StatisticTable { rows, mode: config.mode, n: data.len(), nu: config.nu })
}
