//! File-based batch commands behind the `deconv-ms` binary.
//!
//! Scenarios are single JSON documents. Quantile tables are keyed by a hash of the
//! fields that affect calibration, so an analysis can refuse a table computed for
//! a different problem.

use crate::error::{config, Error, Result};
use crate::error_models::{ErrorKind, ErrorModel};
use crate::experiments::{coverage_experiment, fig2, quantile10k, CoverageSetup};
use crate::gaussian_sim::{quantile, simulate_statistic};
use crate::inference::{extract_report, rectangles, ConfidenceRectangle, Interval};
use crate::kernels::{make_beta_kernel, Polynomial, Side};
use crate::operators::{Coefficient, OperatorSpec, ProblemSpec};
use crate::synth::{synthesize, DensitySpec};
use crate::teststat::{
    build_index_set, default_nu, statistics_over_set, triangular_for_sample_size, IndexKind, Mode, MultiscaleConfig,
    ScaleLocationSet,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};

/// Levels every quantile table reports.
pub const ALPHA_GRID: [f64; 8] = [0.01, 0.025, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5];

/// Fewest replications accepted for a reported quantile.
pub const MIN_REPS: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OperatorParams {
    Identity,
    Derivative {
        order: u32,
        #[serde(default = "one")]
        scale: f64,
    },
    Fractional {
        order: f64,
        side: Side,
    },
    /// `Σ_k a_k(x) D^k` with polynomial coefficients given in monomial form.
    VariableCoeff {
        coeffs: Vec<Vec<f64>>,
    },
}

fn one() -> f64 {
    1.0
}

impl OperatorParams {
    pub fn to_spec(&self) -> Result<OperatorSpec> {
        match self {
            OperatorParams::Identity => Ok(OperatorSpec::identity()),
            OperatorParams::Derivative { order, scale } => Ok(OperatorSpec::scaled_derivative(*order, *scale)),
            OperatorParams::Fractional { order, side } => OperatorSpec::fractional(*order, *side),
            OperatorParams::VariableCoeff { coeffs } => OperatorSpec::variable_coeff(
                coeffs.iter().map(|c| Coefficient::Polynomial(Polynomial::new(c.clone()))).collect(),
            ),
        }
    }
}

/// Affine map of raw data into [0, 1].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Window {
    Fixed { lo: f64, hi: f64 },
    /// Sample minimum and maximum.
    Auto,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub n: usize,
    pub error: ErrorKind,
    pub operator: OperatorParams,
    pub kernel_k: u32,
    #[serde(default = "default_nu")]
    pub nu: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Defaults to the triangular set for `n`.
    #[serde(default)]
    pub index_set: Option<IndexKind>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default)]
    pub window: Option<Window>,
    /// Scales for the kernel-estimator CSV; nearest scales of the set are used.
    #[serde(default)]
    pub reconstruction_h: Vec<f64>,
}

fn default_alpha() -> f64 {
    0.1
}

fn default_reps() -> usize {
    10_000
}

fn default_mode() -> Mode {
    Mode::Principal
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Scenario::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn index_kind(&self) -> Result<IndexKind> {
        match &self.index_set {
            None => triangular_for_sample_size(self.n),
            Some(IndexKind::Custom) => Err(config("custom index sets cannot be described in a scenario")),
            Some(k) => Ok(k.clone()),
        }
    }

    pub fn index_set(&self) -> Result<ScaleLocationSet> {
        build_index_set(self.index_kind()?)
    }

    /// Hex SHA-256 of the fields that determine calibrated quantiles.
    ///
    /// Level, replication count and seed are excluded; they are stored next to the hash.
    pub fn hash(&self) -> Result<String> {
        let canonical = serde_json::json!({
            "n": self.n,
            "error": self.error,
            "operator": self.operator,
            "kernel_k": self.kernel_k,
            "nu": self.nu,
            "index_set": self.index_kind()?,
            "mode": self.mode,
            "window": self.window,
        });
        let bytes = serde_json::to_vec(&canonical)?;
        Ok(hex::encode(Sha256::digest(&bytes)))
    }

    /// Problem in window coordinates; a fixed window of width `w` turns `ε` into `ε/w`.
    pub fn problem(&self, window_width: Option<f64>) -> Result<ProblemSpec> {
        let mut err = ErrorModel::from_kind(self.error)?;
        if let Some(w) = window_width {
            err = err.rescaled(1.0 / w)?;
        }
        ProblemSpec::new(self.operator.to_spec()?, err)
    }

    /// Configuration used for calibration.
    pub fn calibration_config(&self) -> Result<MultiscaleConfig> {
        let width = match self.window {
            None => None,
            Some(Window::Fixed { lo, hi }) => Some(window_width(lo, hi)?),
            Some(Window::Auto) => {
                if self.mode == Mode::General {
                    return Err(config(
                        "general-mode calibration depends on the error scale, which an automatic window leaves unknown; use a fixed window",
                    ));
                }
                None
            }
        };
        self.config_with(width)
    }

    fn config_with(&self, width: Option<f64>) -> Result<MultiscaleConfig> {
        Ok(MultiscaleConfig::new(self.problem(width)?, make_beta_kernel(self.kernel_k)?)
            .with_mode(self.mode)
            .with_nu(self.nu)
            .with_alpha(self.alpha))
    }
}

fn window_width(lo: f64, hi: f64) -> Result<f64> {
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(config(format!("window [{lo}, {hi}] is empty")));
    }
    Ok(hi - lo)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantileTable {
    pub scenario_hash: String,
    pub mode: Mode,
    pub nu: f64,
    pub alpha_grid: Vec<f64>,
    pub quantiles: Vec<f64>,
    pub mc_stderr: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
}

impl QuantileTable {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })
    }

    pub fn lookup(&self, alpha: f64) -> Result<f64> {
        self.alpha_grid
            .iter()
            .position(|a| (a - alpha).abs() < 1e-12)
            .map(|i| self.quantiles[i])
            .ok_or_else(|| Error::Calibration(format!("quantile table has no entry for alpha = {alpha}")))
    }
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// One decimal per line; blank lines are skipped.
pub fn parse_data(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let s = line.trim();
        if s.is_empty() {
            continue;
        }
        let x: f64 = s.parse().map_err(|_| Error::Parse { line: i + 1, msg: format!("not a decimal number: {s:?}") })?;
        if !x.is_finite() {
            return Err(Error::Parse { line: i + 1, msg: format!("non-finite value {s:?}") });
        }
        out.push(x);
    }
    Ok(out)
}

pub fn format_data(xs: &[f64]) -> String {
    let mut s = String::with_capacity(xs.len() * 20);
    for x in xs {
        s.push_str(&format!("{x}\n"));
    }
    s
}

/// Simulates the quantile table for `scenario` and writes `quantiles.json` into `out_dir`.
pub fn cmd_quantiles(scenario: &Scenario, out_dir: &Path, workers: usize, seed: Option<u64>) -> Result<PathBuf> {
    if scenario.reps < MIN_REPS {
        return Err(config(format!("{} replications requested; at least {MIN_REPS} are required", scenario.reps)));
    }
    let cfg = scenario.calibration_config()?;
    if scenario.mode == Mode::Principal {
        cfg.problem.check_principal_conditions()?;
    }
    let set = scenario.index_set()?;
    let seed = seed.unwrap_or(scenario.seed);
    let samples = simulate_statistic(&cfg, &set, scenario.mode, scenario.reps, seed, workers)?;
    let mut grid = ALPHA_GRID.to_vec();
    if !grid.iter().any(|a| (a - scenario.alpha).abs() < 1e-12) {
        grid.push(scenario.alpha);
        grid.sort_by(f64::total_cmp);
    }
    let estimates = grid.iter().map(|&a| quantile(&samples, a)).collect::<Result<Vec<_>>>()?;
    let table = QuantileTable {
        scenario_hash: scenario.hash()?,
        mode: scenario.mode,
        nu: scenario.nu,
        quantiles: estimates.iter().map(|e| e.value).collect(),
        mc_stderr: estimates.iter().map(|e| e.mc_stderr).collect(),
        alpha_grid: grid,
        reps: scenario.reps,
        seed,
    };
    let path = out_dir.join("quantiles.json");
    write_atomic(&path, serde_json::to_string_pretty(&table)?.as_bytes())?;
    Ok(path)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub scenario_hash: String,
    pub alpha: f64,
    pub nu: f64,
    pub mode: Mode,
    pub q_alpha: f64,
    pub n: usize,
    /// Raw `x` maps to `(x − lo) / (hi − lo)`.
    pub window: Option<(f64, f64)>,
    pub rectangles: Vec<ConfidenceRectangle>,
    pub increases: Vec<Interval>,
    pub decreases: Vec<Interval>,
    pub minimal_increases: Vec<Interval>,
    pub minimal_decreases: Vec<Interval>,
    pub root_intervals: Vec<Interval>,
    pub mode_count_lower_bound: usize,
}

/// Rectangles and sign calls for `data`, calibrated by `table`.
pub fn analyze(data: &[f64], scenario: &Scenario, table: &QuantileTable) -> Result<(AnalysisReport, Vec<(f64, f64, f64)>)> {
    let hash = scenario.hash()?;
    if table.scenario_hash != hash {
        return Err(Error::Calibration(format!(
            "quantile table belongs to scenario {} but this scenario hashes to {hash}",
            table.scenario_hash
        )));
    }
    if data.is_empty() {
        return Err(Error::DegenerateData("data file contains no observations".into()));
    }
    if data.len() != scenario.n {
        return Err(Error::Calibration(format!(
            "data has {} observations but the scenario was calibrated for n = {}",
            data.len(),
            scenario.n
        )));
    }
    let window = match scenario.window {
        None => None,
        Some(Window::Fixed { lo, hi }) => Some((lo, hi)),
        Some(Window::Auto) => {
            let lo = data.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Some((lo, hi))
        }
    };
    let (xs, cfg) = match window {
        None => (data.to_vec(), scenario.config_with(None)?),
        Some((lo, hi)) => {
            let w = window_width(lo, hi)?;
            (data.iter().map(|x| (x - lo) / w).collect(), scenario.config_with(Some(w))?)
        }
    };
    let set = scenario.index_set()?;
    let stats = statistics_over_set(&xs, &set, &cfg)?;
    let q = table.lookup(scenario.alpha)?;
    let rects = rectangles(&stats, q, table.mode)?;
    let qr = extract_report(&rects, scenario.alpha);

    let mut scales: Vec<f64> = set.pairs().iter().map(|p| p.1).collect();
    scales.sort_by(f64::total_cmp);
    scales.dedup();
    let wanted: Vec<f64> = if scenario.reconstruction_h.is_empty() {
        vec![scales[0], scales[scales.len() - 1]]
    } else {
        scenario
            .reconstruction_h
            .iter()
            .map(|&h| *scales.iter().min_by(|a, b| (*a - h).abs().total_cmp(&(*b - h).abs())).unwrap())
            .collect()
    };
    let sn = (xs.len() as f64).sqrt();
    let mut recon = Vec::new();
    for &h in &wanted {
        for row in stats.rows.iter().filter(|r| r.h == h) {
            recon.push((h, row.t, row.t_stat / (h * sn)));
        }
    }

    let report = AnalysisReport {
        scenario_hash: hash,
        alpha: scenario.alpha,
        nu: scenario.nu,
        mode: table.mode,
        q_alpha: q,
        n: xs.len(),
        window,
        rectangles: rects,
        increases: qr.increases,
        decreases: qr.decreases,
        minimal_increases: qr.minimal_increases,
        minimal_decreases: qr.minimal_decreases,
        root_intervals: qr.root_intervals,
        mode_count_lower_bound: qr.mode_count_lower_bound,
    };
    Ok((report, recon))
}

fn csv_bytes<F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>>(f: F) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    f(&mut w).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

/// Writes `report.json`, `rectangles.csv` and `reconstruction.csv`; nothing is
/// written unless the whole analysis succeeds.
pub fn cmd_analyze(data_path: &Path, scenario: &Scenario, quantile_path: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let data = parse_data(&std::fs::read_to_string(data_path)?)?;
    let table = QuantileTable::load(quantile_path)?;
    let (report, recon) = analyze(&data, scenario, &table)?;
    let json = serde_json::to_string_pretty(&report)?;
    let rect_csv = csv_bytes(|w| {
        w.write_record(["t", "h", "b_minus", "b_plus", "d"])?;
        for r in &report.rectangles {
            w.serialize((r.t, r.h, r.b_minus, r.b_plus, r.d))?;
        }
        Ok(())
    })?;
    let recon_csv = csv_bytes(|w| {
        w.write_record(["h", "t", "estimate"])?;
        for r in &recon {
            w.serialize(r)?;
        }
        Ok(())
    })?;
    let paths = [out_dir.join("report.json"), out_dir.join("rectangles.csv"), out_dir.join("reconstruction.csv")];
    write_atomic(&paths[0], json.as_bytes())?;
    write_atomic(&paths[1], &rect_csv)?;
    write_atomic(&paths[2], &recon_csv)?;
    Ok(paths.to_vec())
}

/// Everything needed to regenerate a synthetic dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSidecar {
    pub density: DensitySpec,
    pub error: ErrorKind,
    pub n: usize,
    pub seed: u64,
}

/// Draws `n` observations `X + ε` and writes `data.txt` plus `data.json`.
pub fn cmd_synthesize(density: &DensitySpec, error: ErrorKind, n: usize, seed: u64, out_dir: &Path) -> Result<Vec<PathBuf>> {
    density.validate()?;
    let data = synthesize(density, &ErrorModel::from_kind(error)?, n, seed)?;
    let sidecar = SynthSidecar { density: density.clone(), error, n, seed };
    let paths = [out_dir.join("data.txt"), out_dir.join("data.json")];
    write_atomic(&paths[0], format_data(&data).as_bytes())?;
    write_atomic(&paths[1], serde_json::to_string_pretty(&sidecar)?.as_bytes())?;
    Ok(paths.to_vec())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    Fig2,
    Quantile10k,
    Coverage,
}

impl std::str::FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig2" => Ok(Figure::Fig2),
            "quantile10k" => Ok(Figure::Quantile10k),
            "coverage" => Ok(Figure::Coverage),
            other => Err(config(format!("unknown figure {other:?}; expected fig2, quantile10k or coverage"))),
        }
    }
}

/// Regenerates one of the simulation tables as CSV in `out_dir`.
pub fn cmd_reproduce(figure: Figure, out_dir: &Path, reps: Option<usize>, seed: u64, workers: usize) -> Result<Vec<PathBuf>> {
    match figure {
        Figure::Fig2 => {
            let rows = fig2(&[200, 1000, 10_000], reps.unwrap_or(10_000), seed, workers)?;
            let summary = csv_bytes(|w| {
                w.write_record(["n", "pairs", "min", "q1", "median", "q3", "max"])?;
                for r in &rows {
                    let s = r.summary;
                    w.serialize((r.n, r.pairs, s.min, s.q1, s.median, s.q3, s.max))?;
                }
                Ok(())
            })?;
            let samples = csv_bytes(|w| {
                w.write_record(["n", "rep", "value"])?;
                for r in &rows {
                    for (i, v) in r.samples.iter().enumerate() {
                        w.serialize((r.n, i, v))?;
                    }
                }
                Ok(())
            })?;
            let paths = [out_dir.join("fig2.csv"), out_dir.join("fig2_samples.csv")];
            write_atomic(&paths[0], &summary)?;
            write_atomic(&paths[1], &samples)?;
            Ok(paths.to_vec())
        }
        Figure::Quantile10k => {
            let reps = reps.unwrap_or(10_000);
            let q = quantile10k(0.1, reps, seed, workers)?;
            let bytes = csv_bytes(|w| {
                w.write_record(["alpha", "quantile", "mc_stderr", "reps", "seed"])?;
                w.serialize((q.alpha, q.value, q.mc_stderr, q.reps, seed))
            })?;
            let path = out_dir.join("quantile10k.csv");
            write_atomic(&path, &bytes)?;
            Ok(vec![path])
        }
        Figure::Coverage => {
            let setup = CoverageSetup { reps: reps.unwrap_or(300), seed, workers, ..CoverageSetup::default() };
            let o = coverage_experiment(&DensitySpec::trimodal(), &setup)?;
            let bytes = csv_bytes(|w| {
                w.write_record([
                    "n", "theta", "alpha", "reps", "q_alpha", "coverage", "no_artefact_rate", "detection_rate", "true_modes",
                ])?;
                w.serialize((
                    setup.n,
                    setup.theta,
                    setup.alpha,
                    setup.reps,
                    o.q_alpha,
                    o.coverage(),
                    o.no_artefact_rate(),
                    o.detection_rate(),
                    o.true_modes,
                ))
            })?;
            let path = out_dir.join("coverage.csv");
            write_atomic(&path, &bytes)?;
            Ok(vec![path])
        }
    }
}
