//! Confidence rectangles, sign calls, root intervals and detection boundaries.

use crate::error::{config, Error, Result};
use crate::kernels::Kernel;
use crate::operators::ProblemSpec;
use crate::teststat::{
    build_plan, principal_kernel_norm, FourierOptions, Mode, ScaleLocationSet, StatRow, StatisticTable,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Box `[t, t+h] × [b_minus, b_plus]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceRectangle {
    pub t: f64,
    pub h: f64,
    pub b_minus: f64,
    pub b_plus: f64,
    pub d: f64,
}

impl ConfidenceRectangle {
    pub fn interval(&self) -> Interval {
        Interval { lo: self.t, hi: self.t + self.h }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    /// Closed intervals: touching endpoints overlap.
    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }
}

/// `√ĝ · V · √(2 log ν/h) · (1 + q · log log(ν/h) / log(ν/h))`.
///
/// `V` is whatever norm the row carries, so general and principal tables both work.
pub fn halfwidth(row: &StatRow, q_alpha: f64, nu: f64) -> f64 {
    let l = (nu / row.h).ln();
    row.ghat.sqrt() * row.v_norm * (2.0 * l).sqrt() * (1.0 + q_alpha * l.ln() / l)
}

/// One rectangle per row. `mode` must match the mode the table was built in.
pub fn rectangles(table: &StatisticTable, q_alpha: f64, mode: Mode) -> Result<Vec<ConfidenceRectangle>> {
    if table.mode != mode {
        return Err(Error::Calibration(format!(
            "quantile calibrated in {mode:?} mode but statistics were computed in {:?} mode",
            table.mode
        )));
    }
    if !q_alpha.is_finite() {
        return Err(Error::InvalidQuantile(format!("quantile {q_alpha} is not finite")));
    }
    let sn = (table.n as f64).sqrt();
    Ok(table
        .rows
        .iter()
        .map(|row| {
            let d = halfwidth(row, q_alpha, table.nu);
            let scale = row.h * sn;
            ConfidenceRectangle { t: row.t, h: row.h, b_minus: (row.t_stat - d) / scale, b_plus: (row.t_stat + d) / scale, d }
        })
        .collect())
}

/// Increase/decrease calls and what they imply about roots and modes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QualitativeReport {
    pub alpha: f64,
    pub increases: Vec<Interval>,
    pub decreases: Vec<Interval>,
    pub minimal_increases: Vec<Interval>,
    pub minimal_decreases: Vec<Interval>,
    /// Hulls of an increase followed by a disjoint decrease; pairwise disjoint.
    pub root_intervals: Vec<Interval>,
    pub mode_count_lower_bound: usize,
    pub metadata: BTreeMap<String, String>,
}

/// Drops every interval that strictly contains another one of the list.
pub fn minimal_intervals(intervals: &[Interval]) -> Vec<Interval> {
    let mut v = intervals.to_vec();
    v.sort_by(|a, b| b.lo.total_cmp(&a.lo).then(a.hi.total_cmp(&b.hi)));
    // Endpoints computed as t + h can differ in the last bit.
    const EPS: f64 = 1e-12;
    v.dedup_by(|a, b| (a.lo - b.lo).abs() < EPS && (a.hi - b.hi).abs() < EPS);
    let mut keep = Vec::new();
    let mut min_hi = f64::INFINITY;
    for iv in v {
        if min_hi > iv.hi + EPS {
            keep.push(iv);
        }
        min_hi = min_hi.min(iv.hi);
    }
    keep.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.hi.total_cmp(&b.hi)));
    keep
}

/// Pairs an increase with a decrease lying strictly to its right, greedily by the
/// decrease's right end. The hulls are pairwise disjoint and maximal in number.
pub fn root_intervals(increases: &[Interval], decreases: &[Interval]) -> Vec<Interval> {
    let mut dec = decreases.to_vec();
    dec.sort_by(|a, b| a.hi.total_cmp(&b.hi));
    let mut out = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for d in dec {
        if d.lo <= last {
            continue;
        }
        let best = increases
            .iter()
            .filter(|i| i.lo > last && i.hi < d.lo)
            .max_by(|a, b| a.lo.total_cmp(&b.lo));
        if let Some(i) = best {
            out.push(i.hull(&d));
            last = d.hi;
        }
    }
    out
}

pub fn extract_report(rects: &[ConfidenceRectangle], alpha: f64) -> QualitativeReport {
    let increases: Vec<Interval> = rects.iter().filter(|r| r.b_minus > 0.0).map(|r| r.interval()).collect();
    let decreases: Vec<Interval> = rects.iter().filter(|r| r.b_plus < 0.0).map(|r| r.interval()).collect();
    let minimal_increases = minimal_intervals(&increases);
    let minimal_decreases = minimal_intervals(&decreases);
    let roots = root_intervals(&minimal_increases, &minimal_decreases);
    QualitativeReport {
        alpha,
        mode_count_lower_bound: roots.len(),
        increases,
        decreases,
        minimal_increases,
        minimal_decreases,
        root_intervals: roots,
        metadata: BTreeMap::new(),
    }
}

/// `covered[i]` iff the graph of `f` over `[t, t+h]` meets rectangle `i`,
/// checked on 1000 equispaced points.
pub fn coverage_check(true_opf: &dyn Fn(f64) -> f64, rects: &[ConfidenceRectangle]) -> Vec<bool> {
    const POINTS: usize = 1000;
    rects
        .iter()
        .map(|r| {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for i in 0..POINTS {
                let y = true_opf(r.t + r.h * i as f64 / (POINTS - 1) as f64);
                lo = lo.min(y);
                hi = hi.max(y);
            }
            lo <= r.b_plus && hi >= r.b_minus
        })
        .collect()
}

/// Detection limits as functions of the sample size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionBoundary {
    pub c_alpha: f64,
    /// Exponent of `log n / n` in the smallest detectable scale.
    pub scale_exponent: f64,
    /// Exponent of `log n / n` in the smallest detectable signal.
    pub signal_exponent: f64,
}

impl DetectionBoundary {
    pub fn h_min(&self, n: f64) -> f64 {
        self.c_alpha * (n.ln() / n).powf(self.scale_exponent)
    }

    pub fn signal_threshold(&self, n: f64) -> f64 {
        (n.ln() / n).powf(self.signal_exponent)
    }
}

/// `C_α = (√(8‖f_ε‖∞) · h^{m+r−1/2}‖v_{t,h}‖₂ · (1+q_α))^{2/(2m+2r+1)}`.
///
/// The scale-free norm is the principal one when available, otherwise the exact
/// norm at `t = 1/2, h = 1/64`. `f_eps_sup` defaults to the error model's own bound.
pub fn detection_boundary(
    spec: &ProblemSpec,
    kernel: &Kernel,
    f_eps_sup: Option<f64>,
    q_alpha: f64,
    beta: f64,
) -> Result<DetectionBoundary> {
    if !(1.0 + q_alpha > 0.0) {
        return Err(Error::InvalidQuantile(format!("1 + q_α = {} must be positive", 1.0 + q_alpha)));
    }
    if !(beta >= 0.0) {
        return Err(config(format!("smoothness β = {beta} must be nonnegative")));
    }
    let sup = match f_eps_sup.or_else(|| spec.err.density_sup()) {
        Some(s) if s > 0.0 && s.is_finite() => s,
        _ => return Err(config("a finite sup-norm of the error density is required")),
    };
    let mr = spec.total_order();
    let norm = match spec.check_principal_conditions() {
        Ok(split) => split.a.abs() * principal_kernel_norm(kernel, split.sigma + split.tau)?,
        Err(_) => {
            let h = 1.0 / 64.0;
            let set = ScaleLocationSet::custom(vec![(0.5, h)])?;
            let plan = build_plan(spec, kernel, &set, &FourierOptions::default())?;
            plan.general_norms[0] * h.powf(mr - 0.5)
        }
    };
    let denom = 2.0 * mr + 1.0;
    Ok(DetectionBoundary {
        c_alpha: ((8.0 * sup).sqrt() * norm * (1.0 + q_alpha)).powf(2.0 / denom),
        scale_exponent: 1.0 / (2.0 * beta + denom),
        signal_exponent: beta / (2.0 * beta + denom),
    })
}
