use crate::error::{config, Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Bandwidth of the pilot estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "lowercase")]
pub enum Bandwidth {
    /// `1.06 σ̂ n^{−1/5}`.
    Silverman,
    Fixed { value: f64 },
}

/// Gaussian kernel density estimate of the observed density, clipped from below.
#[derive(Clone, Debug)]
pub struct PilotDensity {
    sorted: Vec<f64>,
    bandwidth: f64,
    floor: f64,
}

pub fn pilot_density(data: &[f64], rule: Bandwidth, floor: f64) -> Result<PilotDensity> {
    PilotDensity::new(data, rule, floor)
}

impl PilotDensity {
    pub fn new(data: &[f64], rule: Bandwidth, floor: f64) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::DegenerateData("no observations".into()));
        }
        if !(floor > 0.0) {
            return Err(config("pilot floor must be positive"));
        }
        let bandwidth = match rule {
            Bandwidth::Fixed { value } => {
                if !(value > 0.0) {
                    return Err(config("pilot bandwidth must be positive"));
                }
                value
            }
            Bandwidth::Silverman => {
                let n = data.len() as f64;
                let mean = data.iter().sum::<f64>() / n;
                let var = data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
                if !var.is_finite() {
                    return Err(Error::DegenerateData("observations have non-finite variance".into()));
                }
                // No spread to estimate from: fall back to the width of the unit analysis window.
                let spread = if var > 0.0 { var.sqrt() } else { 1.0 };
                1.06 * spread * n.powf(-0.2)
            }
        };
        let mut sorted = data.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(PilotDensity { sorted, bandwidth, floor })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    /// Unclipped estimate.
    pub fn raw(&self, t: f64) -> f64 {
        let b = self.bandwidth;
        let lo = self.sorted.partition_point(|&y| y < t - 9.0 * b);
        let hi = self.sorted.partition_point(|&y| y <= t + 9.0 * b);
        let s: f64 = self.sorted[lo..hi].iter().map(|&y| (-0.5 * ((t - y) / b).powi(2)).exp()).sum();
        s / (self.sorted.len() as f64 * b * (2.0 * PI).sqrt())
    }

    /// `max(ĝ(t), floor)`.
    pub fn eval(&self, t: f64) -> f64 {
        self.raw(t).max(self.floor)
    }
}
