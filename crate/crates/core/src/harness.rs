//! Experiment runner behind the command line tool.
//!
//! An experiment is one JSON document naming a correlation, weights, a ladder
//! of lengths `n` (weighted sums) or horizons `T` (stationary grid) and the
//! estimators to run. Results are CSV rows with a fixed column order plus a
//! JSON sidecar holding the config hash, so every file can be traced back to
//! the exact input that produced it.

use std::env;
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::covariance::gram_s;
use crate::error::{Error, Result};
use crate::estimate::{
    exponent_fit_linear, exponent_fit_loglog, fekete_sequence, grid_persistence, ladder_from_exits,
    lag_correlation, orthant_qmc_with, Method, persistence_ladder_mc, ExponentFit, OrthantOptions, ProbabilityEstimate,
    Regressor, ORTHANT_MAX_DIM,
};
use crate::kernels::{param, split_id, CorrelationKernel, WeightSequence};
use crate::simulate::Sampler;
use crate::special::{c_ph, c_ph_bounds, f11_by_quadrature, selberg_f11, CphCorrelation, PHParams};
use crate::stationary::{Correlation, IntegerLag, OrnsteinUhlenbeck, PowerLaw};

/// Environment variable that overrides the default output directory.
pub const OUT_DIR_ENV: &str = "PERSISTENCE_LAB_OUT";

pub const DEFAULT_OUT_DIR: &str = "results";

/// Column order of every result file.
pub const CSV_HEADER: &str = "experiment_id,abscissa,value,stderr,method,seed,wall_time_ms";

/// Smallest replication count accepted for Monte Carlo.
pub const MIN_MC_REPLICATIONS: usize = 1000;

pub fn default_out_dir() -> PathBuf {
    env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

/// Stationary correlation from an id string.
///
/// `ou:alpha=a`, `power:beta=b` and `cph:p=p,H=h` are processes in continuous
/// time; any kernel id (`fgn:H=0.75`, `exp:lambda=1`, ...) is read at integer lags.
pub fn parse_correlation(id: &str) -> Result<Arc<dyn Correlation>> {
    let (family, params) = split_id(id);
    match family {
        "ou" => {
            let rate = param(id, &params, &["alpha", "rate"])?;
            if !(rate > 0.0) || !rate.is_finite() {
                return Err(Error::InvalidParameter(format!("`{id}`: alpha must be positive")));
            }
            Ok(Arc::new(OrnsteinUhlenbeck { rate }))
        }
        "power" => {
            let exponent = param(id, &params, &["beta"])?;
            if !(exponent > 0.0) || !exponent.is_finite() {
                return Err(Error::InvalidParameter(format!("`{id}`: beta must be positive")));
            }
            Ok(Arc::new(PowerLaw { exponent }))
        }
        "cph" => {
            let p = param(id, &params, &["p"])?;
            let h = param(id, &params, &["H", "hurst"])?;
            Ok(Arc::new(CphCorrelation::new(PHParams::new(p, h)?)?))
        }
        _ => Ok(Arc::new(IntegerLag(id.parse::<CorrelationKernel>()?))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MethodChoice {
    #[default]
    Mc,
    OrthantQmc,
    Both,
}

impl MethodChoice {
    fn mc(self) -> bool {
        matches!(self, MethodChoice::Mc | MethodChoice::Both)
    }

    fn orthant(self) -> bool {
        matches!(self, MethodChoice::OrthantQmc | MethodChoice::Both)
    }
}

impl FromStr for MethodChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mc" => Ok(MethodChoice::Mc),
            "orthant-qmc" => Ok(MethodChoice::OrthantQmc),
            "both" => Ok(MethodChoice::Both),
            _ => Err(Error::InvalidParameter(format!("unknown method `{s}` (mc, orthant-qmc, both)"))),
        }
    }
}

fn default_weights() -> String {
    "ones".into()
}

fn default_replications() -> usize {
    100_000
}

fn default_budget() -> u64 {
    200_000
}

fn default_rel_tol() -> f64 {
    1e-2
}

/// One experiment, as read from a JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    pub kernel: String,
    #[serde(default = "default_weights")]
    pub weights: String,
    #[serde(default)]
    pub level: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_ladder: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_ladder: Option<Vec<f64>>,
    /// Grid spacing `δ` for a `T` ladder.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub method: MethodChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default = "default_budget")]
    pub orthant_budget: u64,
    #[serde(default = "default_rel_tol")]
    pub orthant_rel_tol: f64,
    /// Off by default: timings would break byte-identical reruns.
    #[serde(default)]
    pub record_wall_time: bool,
}

/// Line of `"key":` in `src`, or 1 when the key is absent (a defaulted field).
fn key_line(src: &str, key: &str) -> usize {
    let needle = format!("\"{key}\"");
    let mut from = 0;
    while let Some(pos) = src[from..].find(&needle) {
        let at = from + pos;
        let rest = src[at + needle.len()..].trim_start();
        if rest.starts_with(':') {
            return src[..at].matches('\n').count() + 1;
        }
        from = at + needle.len();
    }
    1
}

fn strictly_increasing<T: PartialOrd>(v: &[T]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

/// Parsed form of the kernel and ladder.
enum Plan {
    Sums { kernel: CorrelationKernel, weights: WeightSequence, ladder: Vec<usize> },
    Grid { corr: Arc<dyn Correlation>, spacing: f64, horizons: Vec<f64>, points: Vec<usize> },
}

impl ExperimentConfig {
    /// Parses and validates a JSON document; errors carry the offending line.
    pub fn from_json(src: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(src)
            .map_err(|e| Error::Config { line: e.line(), message: e.to_string() })?;
        config
            .plan()
            .map_err(|(key, message)| Error::Config { line: key_line(src, key), message })?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.plan().map(|_| ()).map_err(|(key, message)| Error::Config { line: 0, message: format!("{key}: {message}") })
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    fn plan(&self) -> std::result::Result<Plan, (&'static str, String)> {
        let id = &self.experiment_id;
        if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
            return Err(("experiment_id", format!("`{id}` must be nonempty and use only [A-Za-z0-9._-]")));
        }
        if !self.level.is_finite() {
            return Err(("level", "level must be finite".into()));
        }
        if self.method.mc() && self.replications < MIN_MC_REPLICATIONS {
            return Err((
                "replications",
                format!("Monte Carlo needs at least {MIN_MC_REPLICATIONS} replications, got {}", self.replications),
            ));
        }
        if self.method.orthant() {
            if self.orthant_budget == 0 {
                return Err(("orthant_budget", "budget must be positive".into()));
            }
            if !(self.orthant_rel_tol > 0.0) {
                return Err(("orthant_rel_tol", "tolerance must be positive".into()));
            }
        }
        if let Some(d) = self.spacing {
            if !(d > 0.0) || !d.is_finite() {
                return Err(("spacing", format!("grid spacing must be positive, got {d}")));
            }
        }
        let orthant_cap = |dim: usize, key| {
            if self.method.orthant() && dim > ORTHANT_MAX_DIM {
                Err((key, format!("orthant integration is limited to {ORTHANT_MAX_DIM} coordinates, ladder needs {dim}")))
            } else {
                Ok(())
            }
        };
        match (&self.n_ladder, &self.t_ladder) {
            (Some(_), Some(_)) => Err(("t_ladder", "give either n_ladder or t_ladder, not both".into())),
            (None, None) => Err(("experiment_id", "one of n_ladder or t_ladder is required".into())),
            (Some(ladder), None) => {
                if ladder.is_empty() || ladder[0] == 0 || !strictly_increasing(ladder) {
                    return Err(("n_ladder", "ladder must be nonempty, positive and strictly increasing".into()));
                }
                let kernel = self.kernel.parse::<CorrelationKernel>().map_err(|e| ("kernel", e.to_string()))?;
                let weights = self.weights.parse::<WeightSequence>().map_err(|e| ("weights", e.to_string()))?;
                orthant_cap(*ladder.last().unwrap(), "n_ladder")?;
                Ok(Plan::Sums { kernel, weights, ladder: ladder.clone() })
            }
            (None, Some(horizons)) => {
                if horizons.is_empty() || !(horizons[0] > 0.0) || !strictly_increasing(horizons) {
                    return Err(("t_ladder", "ladder must be nonempty, positive and strictly increasing".into()));
                }
                let spacing = self.spacing.ok_or(("t_ladder", "a T ladder needs a grid spacing".to_string()))?;
                let corr = parse_correlation(&self.kernel).map_err(|e| ("kernel", e.to_string()))?;
                if self.weights != default_weights() {
                    return Err(("weights", "weights apply to n ladders only".into()));
                }
                let points: Vec<usize> = horizons.iter().map(|t| (t / spacing).round() as usize + 1).collect();
                if !strictly_increasing(&points) {
                    return Err(("spacing", "horizons collapse onto the same grid size".into()));
                }
                orthant_cap(*points.last().unwrap(), "t_ladder")?;
                Ok(Plan::Grid { corr, spacing, horizons: horizons.clone(), points })
            }
        }
    }

    fn orthant_options(&self) -> OrthantOptions {
        OrthantOptions { budget: self.orthant_budget, rel_tol: self.orthant_rel_tol, seed: self.seed, ..OrthantOptions::default() }
    }
}

/// One output line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub experiment_id: String,
    /// `n`, `T` or a swept parameter value.
    pub abscissa: f64,
    /// `log p̂` or a fitted exponent.
    pub value: f64,
    pub stderr: f64,
    pub method: String,
    pub seed: u64,
    pub wall_time_ms: Option<u64>,
}

impl ResultRow {
    fn from_estimate(config: &ExperimentConfig, abscissa: f64, est: &ProbabilityEstimate, ms: Option<u64>) -> Self {
        ResultRow {
            experiment_id: config.experiment_id.clone(),
            abscissa,
            value: est.log_p,
            stderr: est.stderr_log,
            method: est.method.as_str().to_string(),
            seed: config.seed,
            wall_time_ms: ms,
        }
    }

    pub fn csv_line(&self) -> String {
        let ms = self.wall_time_ms.map(|m| m.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{}",
            self.experiment_id, self.abscissa, self.value, self.stderr, self.method, self.seed, ms
        )
    }
}

fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| a.abscissa.total_cmp(&b.abscissa).then_with(|| a.method.cmp(&b.method)));
}

pub fn write_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", row.csv_line())?;
    }
    out.flush()?;
    Ok(())
}

/// Exponent fitted from the rows of one method.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitSummary {
    pub method: String,
    pub fit: ExponentFit,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    experiment_id: &'a str,
    config_sha256: String,
    crate_version: &'static str,
    config: &'a ExperimentConfig,
    csv: String,
    rows: usize,
    fits: &'a [FitSummary],
}

/// Rows, fits and the files they were written to.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub fits: Vec<FitSummary>,
    pub csv_path: PathBuf,
    pub sidecar_path: PathBuf,
}

fn timed<T>(record: bool, f: impl FnOnce() -> T) -> (T, Option<u64>) {
    let start = Instant::now();
    let value = f();
    (value, record.then(|| start.elapsed().as_millis() as u64))
}

/// Runs the experiment and writes the CSV into `config.output`, or `<out_dir>/<id>.csv`.
pub fn run_experiment_in(config: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentOutput> {
    let plan = config
        .plan()
        .map_err(|(key, message)| Error::Config { line: 0, message: format!("{key}: {message}") })?;
    let mut rows = Vec::new();
    match &plan {
        Plan::Sums { kernel, weights, ladder } => {
            let n_max = *ladder.last().unwrap();
            if config.method.mc() {
                let (est, ms) = timed(config.record_wall_time, || -> Result<_> {
                    let sampler = Sampler::for_kernel(kernel, n_max, config.seed)?;
                    persistence_ladder_mc(&sampler, weights, ladder, config.replications, config.level)
                });
                let est = est.map_err(|e| Error::AtLadderPoint { point: n_max as f64, source: Box::new(e) })?;
                rows.extend(ladder.iter().zip(&est).map(|(&n, e)| ResultRow::from_estimate(config, n as f64, e, ms)));
            }
            if config.method.orthant() {
                let gram = gram_s(kernel, weights, n_max)
                    .map_err(|e| Error::AtLadderPoint { point: n_max as f64, source: Box::new(e) })?;
                let opts = config.orthant_options();
                let found: Vec<Result<ResultRow>> = ladder
                    .par_iter()
                    .map(|&n| {
                        let (est, ms) = timed(config.record_wall_time, || {
                            orthant_qmc_with(&gram.principal(0, n), config.level, &opts)
                        });
                        est.map(|e| ResultRow::from_estimate(config, n as f64, &e, ms))
                            .map_err(|e| Error::AtLadderPoint { point: n as f64, source: Box::new(e) })
                    })
                    .collect();
                rows.extend(found.into_iter().collect::<Result<Vec<_>>>()?);
            }
        }
        Plan::Grid { corr, spacing, horizons, points } => {
            let n_max = *points.last().unwrap();
            if config.method.mc() {
                let (est, ms) = timed(config.record_wall_time, || -> Result<_> {
                    let sampler = Sampler::for_grid(corr.as_ref(), *spacing, n_max, config.seed)?;
                    Ok(ladder_from_exits(&sampler.level_exits(config.replications, config.level), points))
                });
                let est = est.map_err(|e| Error::AtLadderPoint { point: *horizons.last().unwrap(), source: Box::new(e) })?;
                rows.extend(horizons.iter().zip(&est).map(|(&t, e)| ResultRow::from_estimate(config, t, e, ms)));
            }
            if config.method.orthant() {
                let opts = config.orthant_options();
                let found: Vec<Result<ResultRow>> = horizons
                    .par_iter()
                    .map(|&t| {
                        let (est, ms) = timed(config.record_wall_time, || {
                            grid_persistence(corr.as_ref(), *spacing, &[t], config.level, &opts)
                        });
                        est.map(|v| ResultRow::from_estimate(config, t, &v[0].1, ms))
                    })
                    .collect();
                rows.extend(found.into_iter().collect::<Result<Vec<_>>>()?);
            }
        }
    }
    sort_rows(&mut rows);
    let fits = fit_rows(&plan, &rows);

    let csv_path = config.output.clone().unwrap_or_else(|| out_dir.join(format!("{}.csv", config.experiment_id)));
    write_csv(&csv_path, &rows)?;
    let sidecar_path = csv_path.with_extension("json");
    let sidecar = Sidecar {
        experiment_id: &config.experiment_id,
        config_sha256: config.hash(),
        crate_version: env!("CARGO_PKG_VERSION"),
        config,
        csv: csv_path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
        rows: rows.len(),
        fits: &fits,
    };
    fs::write(&sidecar_path, serde_json::to_string_pretty(&sidecar)? + "\n")?;
    Ok(ExperimentOutput { rows, fits, csv_path, sidecar_path })
}

/// [`run_experiment_in`] with the default output directory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    Ok(run_experiment_in(config, &default_out_dir())?.rows)
}

/// Estimator family of a row: lattice and particle orthant rows are fitted together.
fn family(method: &str) -> &str {
    if method.starts_with("orthant") {
        "orthant"
    } else {
        method
    }
}

/// Exponent per estimator family, when at least three usable points exist.
fn fit_rows(plan: &Plan, rows: &[ResultRow]) -> Vec<FitSummary> {
    let mut families: Vec<&str> = rows.iter().map(|r| family(&r.method)).collect();
    families.sort();
    families.dedup();
    let as_estimate = |r: &ResultRow| ProbabilityEstimate {
        log_p: r.value,
        stderr_log: r.stderr,
        method: Method::Mc,
        n_effective: 0,
        hits: None,
        upper_bound_only: !r.stderr.is_finite(),
        converged: true,
    };
    let mut fits = Vec::new();
    for m in families {
        let mine: Vec<&ResultRow> = rows.iter().filter(|r| family(&r.method) == m).collect();
        let fit = match plan {
            Plan::Sums { weights, .. } => {
                let pts: Vec<(usize, ProbabilityEstimate)> =
                    mine.iter().map(|r| (r.abscissa as usize, as_estimate(r))).collect();
                exponent_fit_loglog(&pts, weights, Regressor::LogN)
            }
            Plan::Grid { .. } => {
                let pts: Vec<(f64, ProbabilityEstimate)> = mine.iter().map(|r| (r.abscissa, as_estimate(r))).collect();
                exponent_fit_linear(&pts)
            }
        };
        if let Ok(fit) = fit {
            fits.push(FitSummary { method: m.to_string(), fit });
        }
    }
    fits
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    P,
    H,
    Alpha,
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "p" => Ok(SweepParameter::P),
            "H" | "h" => Ok(SweepParameter::H),
            "alpha" => Ok(SweepParameter::Alpha),
            _ => Err(Error::InvalidParameter(format!("unknown sweep parameter `{s}` (p, H, alpha)"))),
        }
    }
}

/// A curve of fitted exponents over one parameter of the stationary limit process.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub experiment_id: String,
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    /// Fixed `p` when sweeping `H`.
    pub p: f64,
    /// Fixed `H` when sweeping `p`.
    pub h: f64,
    pub spacing: f64,
    pub horizons: Vec<f64>,
    pub level: f64,
    pub orthant: OrthantOptions,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            experiment_id: "sweep".into(),
            parameter: SweepParameter::H,
            values: vec![0.55, 0.65, 0.75],
            p: 0.0,
            h: 0.75,
            spacing: 0.05,
            horizons: vec![5.0, 10.0, 15.0, 20.0, 25.0],
            level: 0.0,
            orthant: OrthantOptions { budget: 200_000, rel_tol: 1e-2, ..OrthantOptions::default() },
        }
    }
}

impl SweepConfig {
    fn correlation(&self, value: f64) -> Result<Arc<dyn Correlation>> {
        Ok(match self.parameter {
            SweepParameter::P => Arc::new(CphCorrelation::new(PHParams::new(value, self.h)?)?),
            SweepParameter::H => Arc::new(CphCorrelation::new(PHParams::new(self.p, value)?)?),
            SweepParameter::Alpha => {
                if !(value > 0.0) || !value.is_finite() {
                    return Err(Error::Domain(format!("alpha must be positive, got {value}")));
                }
                Arc::new(OrnsteinUhlenbeck { rate: value })
            }
        })
    }
}

/// Fits `θ̂` at every parameter value and writes the curve to `out`.
///
/// `p` and `H` move the limit process `C_{p,H}`, `alpha` the Ornstein–Uhlenbeck rate.
/// The whole range is checked against the domain before any work starts.
pub fn sweep(config: &SweepConfig, out: &Path) -> Result<Vec<ResultRow>> {
    if config.values.is_empty() {
        return Err(Error::Domain("sweep needs at least one parameter value".into()));
    }
    if config.horizons.len() < 3 {
        return Err(Error::TooFewPoints { required: 3, got: config.horizons.len() });
    }
    let correlations = config.values.iter().map(|&v| config.correlation(v)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(config.values.len());
    for (&value, corr) in config.values.iter().zip(&correlations) {
        let at = |e: Error| Error::AtLadderPoint { point: value, source: Box::new(e) };
        let points = grid_persistence(corr.as_ref(), config.spacing, &config.horizons, config.level, &config.orthant)
            .map_err(at)?;
        let fit = exponent_fit_linear(&points).map_err(at)?;
        rows.push(ResultRow {
            experiment_id: config.experiment_id.clone(),
            abscissa: value,
            value: fit.exponent,
            stderr: fit.stderr,
            method: points.last().unwrap().1.method.as_str().to_string(),
            seed: config.orthant.seed,
            wall_time_ms: None,
        });
    }
    write_csv(out, &rows)?;
    Ok(rows)
}

/// Reproduction suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum SuiteId {
    A1,
    A2,
    A3,
    A4,
    A5,
    A6,
    A7,
    A8,
    A9,
    A10,
}

impl SuiteId {
    pub const ALL: [SuiteId; 10] = [
        SuiteId::A1,
        SuiteId::A2,
        SuiteId::A3,
        SuiteId::A4,
        SuiteId::A5,
        SuiteId::A6,
        SuiteId::A7,
        SuiteId::A8,
        SuiteId::A9,
        SuiteId::A10,
    ];

    pub fn title(&self) -> &'static str {
        match self {
            SuiteId::A1 => "i.i.d. calibrator: q_n ~ n^(-1/2)",
            SuiteId::A2 => "summable universality: q_n ~ 1/s(n)",
            SuiteId::A3 => "fgn(0.75) partial sums: theta = 1 - H",
            SuiteId::A4 => "f_pH(1,1) quadrature vs Gamma closed form",
            SuiteId::A5 => "C_pH bracket and lower bound e^(-(p+H)tau)",
            SuiteId::A6 => "C_pH exponent approaches p + 1/2 as H decreases",
            SuiteId::A7 => "bivariate closed form q_2 = 3/8",
            SuiteId::A8 => "exact sampling reproduces the correlation",
            SuiteId::A9 => "Ornstein-Uhlenbeck exponent equals the rate",
            SuiteId::A10 => "zero/positive exponent dichotomy",
        }
    }
}

impl fmt::Display for SuiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for SuiteId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SuiteId::ALL
            .into_iter()
            .find(|id| id.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownSuite(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReproduceOptions {
    pub seed: u64,
    /// Overrides the Monte Carlo replication count of every suite.
    pub replications: Option<usize>,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        ReproduceOptions { seed: 20_240_601, replications: None }
    }
}

impl ReproduceOptions {
    fn reps(&self, default: usize) -> usize {
        self.replications.unwrap_or(default)
    }
}

/// One checked statement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub name: String,
    pub measured: f64,
    pub target: String,
    pub passed: bool,
    pub detail: String,
}

impl Criterion {
    fn new(name: impl Into<String>, measured: f64, target: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Criterion { name: name.into(), measured, target: target.into(), passed, detail: detail.into() }
    }

    /// `|measured - expected| ≤ tol`.
    fn within(name: &str, measured: f64, expected: f64, tol: f64, detail: impl Into<String>) -> Self {
        let passed = (measured - expected).abs() <= tol;
        Criterion::new(name, measured, format!("{expected} ± {tol}"), passed, detail)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: SuiteId,
    pub title: &'static str,
    pub criteria: Vec<Criterion>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.suite, self.title)?;
        for c in &self.criteria {
            writeln!(
                f,
                "  {} {}: measured {} (target {}){}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                show_measured(c.measured),
                c.target,
                if c.detail.is_empty() { String::new() } else { format!("  [{}]", c.detail) }
            )?;
        }
        Ok(())
    }
}

fn show_measured(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-3 {
        format!("{x:.3e}")
    } else {
        format!("{x:.6}")
    }
}

/// Runs one suite and compares against its expected value and tolerance.
pub fn reproduce(suite: SuiteId, opts: &ReproduceOptions) -> Result<SuiteReport> {
    let criteria = match suite {
        SuiteId::A1 => suite_a1(opts)?,
        SuiteId::A2 => suite_a2(opts)?,
        SuiteId::A3 => suite_a3(opts)?,
        SuiteId::A4 => suite_a4()?,
        SuiteId::A5 => suite_a5()?,
        SuiteId::A6 => suite_a6(opts)?,
        SuiteId::A7 => suite_a7(opts)?,
        SuiteId::A8 => suite_a8(opts)?,
        SuiteId::A9 => suite_a9(opts)?,
        SuiteId::A10 => suite_a10(opts)?,
    };
    Ok(SuiteReport { suite, title: suite.title(), criteria })
}

/// [`reproduce`] by name, failing with [`Error::UnknownSuite`] for anything outside `A1..A10`.
pub fn reproduce_id(id: &str, opts: &ReproduceOptions) -> Result<SuiteReport> {
    reproduce(id.parse()?, opts)
}

/// `n = 2^4, ..., 2^12`.
fn doubling_ladder() -> Vec<usize> {
    (4..=12).map(|k| 1usize << k).collect()
}

fn mc_ladder(kernel: &str, weights: &str, reps: usize, seed: u64) -> Result<(WeightSequence, Vec<(usize, ProbabilityEstimate)>)> {
    let kernel: CorrelationKernel = kernel.parse()?;
    let weights: WeightSequence = weights.parse()?;
    let ladder = doubling_ladder();
    let sampler = Sampler::for_kernel(&kernel, *ladder.last().unwrap(), seed)?;
    let est = persistence_ladder_mc(&sampler, &weights, &ladder, reps, 0.0)?;
    Ok((weights, ladder.into_iter().zip(est).collect()))
}

fn fit_detail(fit: &ExponentFit) -> String {
    format!(
        "ci95 [{:.4}, {:.4}], r2 {:.5}, {} points",
        fit.ci95.0, fit.ci95.1, fit.r_squared, fit.points_used
    )
}

fn suite_a1(opts: &ReproduceOptions) -> Result<Vec<Criterion>> {
    let (weights, pts) = mc_ladder("delta", "ones", opts.reps(1_000_000), opts.seed)?;
    let fit = exponent_fit_loglog(&pts, &weights, Regressor::LogN)?;
    Ok(vec![Criterion::within("slope vs log n", fit.exponent, -0.5, 0.05, fit_detail(&fit))])
}

fn suite_a2(opts: &ReproduceOptions) -> Result<Vec<Criterion>> {
    let (weights, pts) = mc_ladder("poly-summable:beta=2", "poly:p=1", opts.reps(1_000_000), opts.seed)?;
    let by_s = exponent_fit_loglog(&pts, &weights, Regressor::LogS)?;
    let by_n = exponent_fit_loglog(&pts, &weights, Regressor::LogN)?;
    // local slope over the top of the ladder, reported alongside the full fit
    let top = &pts[pts.len() - 4..];
    let tail_s = exponent_fit_loglog(top, &weights, Regressor::LogS)?;
    let tail_n = exponent_fit_loglog(top, &weights, Regressor::LogN)?;
    let with_tail = |fit: &ExponentFit, tail: &ExponentFit| {
        format!("{}; n >= {} only: {:.4} ± {:.4}", fit_detail(fit), top[0].0, tail.exponent, tail.stderr)
    };
    Ok(vec![
        Criterion::within("slope vs log s(n)", by_s.exponent, -1.0, 0.15, with_tail(&by_s, &tail_s)),
        Criterion::within("slope vs log n", by_n.exponent, -1.5, 0.2, with_tail(&by_n, &tail_n)),
    ])
}

fn suite_a3(opts: &ReproduceOptions) -> Result<Vec<Criterion>> {
    let (weights, pts) = mc_ladder("fgn:H=0.75", "ones", opts.reps(1_000_000), opts.seed)?;
    let fit = exponent_fit_loglog(&pts, &weights, Regressor::LogN)?;
    Ok(vec![Criterion::within("slope vs log n", fit.exponent, -0.25, 0.05, fit_detail(&fit))])
}

/// `p ∈ {-0.6, -0.25, 0, 0.5, 1, 2, 5}` × `H ∈ {0.55, ..., 0.95}`, keeping `p + H > 0`.
pub fn selberg_grid() -> Vec<PHParams> {
    let ps = [-0.6, -0.25, 0.0, 0.5, 1.0, 2.0, 5.0];
    let hs = [0.55, 0.6, 0.65, 0.75, 0.85, 0.9, 0.95];
    ps.iter()
        .flat_map(|&p| hs.iter().map(move |&h| (p, h)))
        .filter(|(p, h)| p + h > 0.0)
        .map(|(p, h)| PHParams { p, h })
        .collect()
}

fn suite_a4() -> Result<Vec<Criterion>> {
    let grid = selberg_grid();
    let errors = grid
        .par_iter()
        .map(|&params| {
            let exact = selberg_f11(params)?;
            Ok((f11_by_quadrature(params)?.value - exact).abs() / exact)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (worst, at) = errors
        .iter()
        .zip(&grid)
        .fold((0.0f64, grid[0]), |acc, (&e, &g)| if e > acc.0 { (e, g) } else { acc });
    Ok(vec![Criterion::new(
        "max relative error of f(1,1)",
        worst,
        "<= 1e-6",
        worst <= 1e-6,
        format!("{} grid points, worst at p={}, H={}", grid.len(), at.p, at.h),
    )])
}

/// Pairs and `τ` grid of the bracket check.
pub fn bracket_pairs() -> [PHParams; 3] {
    [PHParams { p: 0.0, h: 0.75 }, PHParams { p: 0.5, h: 0.55 }, PHParams { p: 2.0, h: 0.9 }]
}

fn suite_a5() -> Result<Vec<Criterion>> {
    const SLACK: f64 = 1e-8;
    let taus: Vec<f64> = (1..=50).map(|k| 0.1 * k as f64).collect();
    let mut bracket_gap = f64::NEG_INFINITY;
    let mut lower_gap = f64::NEG_INFINITY;
    for params in bracket_pairs() {
        for &tau in &taus {
            let c = c_ph(params, tau)?;
            let split = 0.5 * (1.0 + tau.exp());
            let (lo, hi) = c_ph_bounds(params, tau, split)?;
            bracket_gap = bracket_gap.max(lo - c).max(c - hi);
            lower_gap = lower_gap.max((-(params.p + params.h) * tau).exp() - c);
        }
    }
    let detail = format!("3 (p,H) pairs x {} values of tau", taus.len());
    Ok(vec![
        Criterion::new("worst bracket violation", bracket_gap, "<= 1e-8", bracket_gap <= SLACK, detail.clone()),
        Criterion::new("worst lower-bound violation", lower_gap, "<= 1e-8", lower_gap <= SLACK, detail),
    ])
}

fn grid_fit(corr: &dyn Correlation, spacing: f64, horizons: &[f64], seed: u64) -> Result<(Vec<(f64, ProbabilityEstimate)>, ExponentFit)> {
    let opts = OrthantOptions { budget: 200_000, rel_tol: 1e-2, seed, ..OrthantOptions::default() };
    let points = grid_persistence(corr, spacing, horizons, 0.0, &opts)?;
    let fit = exponent_fit_linear(&points)?;
    Ok((points, fit))
}

fn suite_a6(opts: &ReproduceOptions) -> Result<Vec<Criterion>> {
    let horizons = [5.0, 10.0, 15.0, 20.0, 25.0];
    let target = 1.0;
    let mut fits = Vec::new();
    let mut out = Vec::new();
    for h in [0.55, 0.6] {
        let corr = CphCorrelation::new(PHParams::new(0.5, h)?)?;
        let (_, fit) = grid_fit(&corr, 0.05, &horizons, opts.seed)?;
        out.push(Criterion::new(
            format!("theta(0.5, {h}) within 20% of 1"),
            fit.exponent,
            "[0.8, 1.2]",
            (fit.exponent - target).abs() <= 0.2 * target,
            fit_detail(&fit),
        ));
        fits.push(fit.exponent);
    }
    let closer = (fits[0] - target).abs() < (fits[1] - target).abs();
    out.push(Criterion::new(
        "moves toward 1 as H decreases",
        fits[0] - fits[1],
        "theta(0.55) closer to 1 than theta(0.6)",
        closer,
        format!("theta(0.55) = {:.4}, theta(0.6) = {:.4}", fits[0], fits[1]),
    ));
    Ok(out)
}

fn suite_a7(opts: &ReproduceOptions) -> Result<Vec<Criterion>> {
    let kernel = CorrelationKernel::KroneckerDelta;
    let sampler = Sampler::for_kernel(&kernel, 2, opts.seed)?;
    let mc = persistence_ladder_mc(&sampler, &WeightSequence::ONES, &[2], opts.reps(1_000_000), 0.0)?[0];
    let gram = gram_s(&kernel, &WeightSequence::ONES, 2)?;
    let qmc = orthant_qmc_with(&gram, 0.0, &OrthantOptions { seed: opts.seed, ..OrthantOptions::default() })?;
    let z = (mc.p() - 0.375).abs() / mc.stderr_p();
    Ok(vec![
        Criterion::new("Monte Carlo |q2 - 3/8| / stderr", z, "<= 4", z <= 4.0, format!("q2 = {:.6}", mc.p())),
        Criterion::new(
            "orthant |q2 - 3/8|",
            (qmc.p() - 0.375).abs(),
            "<= 1e-4",
            (qmc.p() - 0.375).abs() <= 1e-4,
            format!("q2 = {:.8}", qmc.p()),
        ),
    ])
}

fn suite_a8(opts: &ReproduceOptions) -> Result<Vec<Criterion>> {
    let mut out = Vec::new();
    for id in ["fgn:H=0.75", "exp:lambda=1"] {
        let kernel: CorrelationKernel = id.parse()?;
        let paths = Sampler::for_kernel(&kernel, 64, opts.seed)?.sample(opts.reps(200_000));
        let (worst, lag) = (0..=10)
            .map(|k| {
                let (mean, se) = lag_correlation(&paths, k);
                ((mean - kernel.at(k)).abs() / se, k)
            })
            .fold((0.0f64, 0), |acc, v| if v.0 > acc.0 { v } else { acc });
        out.push(Criterion::new(
            format!("{id}: max |rho_hat - rho| / stderr over lags 0..10"),
            worst,
            "<= 5",
            worst <= 5.0,
            format!("worst lag {lag}"),
        ));
    }
    Ok(out)
}

fn suite_a9(opts: &ReproduceOptions) -> Result<Vec<Criterion>> {
    let (_, fit) = grid_fit(&OrnsteinUhlenbeck { rate: 1.0 }, 0.01, &[5.0, 10.0, 20.0, 30.0], opts.seed)?;
    Ok(vec![Criterion::within("theta of A(t) = exp(-t)", fit.exponent, 1.0, 0.1, fit_detail(&fit))])
}

fn suite_a10(opts: &ReproduceOptions) -> Result<Vec<Criterion>> {
    let horizons = [5.0, 10.0, 20.0, 40.0];
    let rates = |corr: &dyn Correlation| -> Result<Vec<f64>> {
        let opts = OrthantOptions { budget: 200_000, rel_tol: 1e-2, seed: opts.seed, ..OrthantOptions::default() };
        Ok(fekete_sequence(&grid_persistence(corr, 0.1, &horizons, 0.0, &opts)?).iter().map(|f| f.rate).collect())
    };
    let power = rates(&PowerLaw { exponent: 0.5 })?;
    let ou = rates(&OrnsteinUhlenbeck { rate: 1.0 })?;
    let drop = 1.0 - power[3] / power[0];
    let drift = (ou[3] - ou[2]).abs() / ou[2];
    let show = |v: &[f64]| v.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>().join(", ");
    Ok(vec![
        Criterion::new(
            "(1+t)^(-1/2): relative decrease of a(T)/T from T=5 to T=40",
            drop,
            ">= 0.30",
            drop >= 0.30,
            format!("a(T)/T = {}", show(&power)),
        ),
        Criterion::new(
            "exp(-t): relative change of a(T)/T from T=20 to T=40",
            drift,
            "<= 0.10",
            drift <= 0.10,
            format!("a(T)/T = {}", show(&ou)),
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> String {
        r#"{
  "experiment_id": "mini",
  "kernel": "kronecker-delta",
  "weights": "ones",
  "n_ladder": [2, 4],
  "replications": 10000,
  "seed": 7
}"#
        .to_string()
    }

    #[test]
    fn minimal_config_runs_twice_identically() {
        let dir = tempfile::tempdir().unwrap();
        let config = ExperimentConfig::from_json(&minimal()).unwrap();
        let first = run_experiment_in(&config, dir.path()).unwrap();
        assert_eq!(first.rows.len(), 2);
        assert!(first.rows.iter().all(|r| r.value < 0.0));
        let bytes = fs::read(&first.csv_path).unwrap();
        let second = run_experiment_in(&config, dir.path()).unwrap();
        assert_eq!(bytes, fs::read(&second.csv_path).unwrap());
        let sidecar: serde_json::Value = serde_json::from_slice(&fs::read(&first.sidecar_path).unwrap()).unwrap();
        assert_eq!(sidecar["config_sha256"], config.hash());
    }

    #[test]
    fn zero_spacing_is_rejected_with_its_line() {
        let src = r#"{
  "experiment_id": "grid",
  "kernel": "ou:alpha=1",
  "t_ladder": [1, 2],
  "spacing": 0,
  "method": "orthant-qmc"
}"#;
        match ExperimentConfig::from_json(src) {
            Err(Error::Config { line, message }) => {
                assert_eq!(line, 5, "{message}");
                assert!(message.contains("spacing"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_and_schema_errors_carry_lines() {
        let bad = "{\n  \"experiment_id\": \"x\",\n  \"kernel\": \"delta\",\n  \"n_ladder\": [2, 4],\n  \"colour\": 1\n}";
        assert!(matches!(ExperimentConfig::from_json(bad), Err(Error::Config { line: 5, .. })));
        let bad = minimal().replace("[2, 4]", "[4, 2]");
        assert!(matches!(ExperimentConfig::from_json(&bad), Err(Error::Config { line: 5, .. })));
        let bad = minimal().replace("10000", "999");
        assert!(matches!(ExperimentConfig::from_json(&bad), Err(Error::Config { line: 6, .. })));
        let bad = minimal().replace("kronecker-delta", "brownian");
        assert!(matches!(ExperimentConfig::from_json(&bad), Err(Error::Config { line: 3, .. })));
    }

    #[test]
    fn correlation_ids() {
        assert!((parse_correlation("ou:alpha=2").unwrap().at(1.0) - (-2.0f64).exp()).abs() < 1e-15);
        assert!((parse_correlation("power:beta=0.5").unwrap().at(3.0) - 0.5).abs() < 1e-15);
        assert!((parse_correlation("fgn:H=0.75").unwrap().at(1.0) - (2f64.sqrt() - 1.0)).abs() < 1e-12);
        assert!(parse_correlation("cph:p=0,H=0.4").is_err());
    }

    #[test]
    fn suite_ids() {
        assert_eq!("a10".parse::<SuiteId>().unwrap(), SuiteId::A10);
        assert!(matches!(reproduce_id("A11", &ReproduceOptions::default()), Err(Error::UnknownSuite(_))));
    }

    #[test]
    fn sweep_rejects_out_of_domain_values() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SweepConfig { values: vec![0.55, 1.2], ..SweepConfig::default() };
        assert!(sweep(&cfg, &dir.path().join("s.csv")).is_err());
        let cfg = SweepConfig { parameter: SweepParameter::P, values: vec![-0.8], h: 0.6, ..SweepConfig::default() };
        assert!(sweep(&cfg, &dir.path().join("s.csv")).is_err());
    }

    #[test]
    fn grid_experiment_runs_both_methods() {
        let dir = tempfile::tempdir().unwrap();
        let src = r#"{"experiment_id": "ou", "kernel": "ou:alpha=1", "t_ladder": [0.5, 1, 1.5],
                      "spacing": 0.1, "method": "both", "replications": 200000, "seed": 3}"#;
        let config = ExperimentConfig::from_json(src).unwrap();
        let out = run_experiment_in(&config, dir.path()).unwrap();
        assert_eq!(out.rows.len(), 6);
        for pair in out.rows.chunks(2) {
            let (a, b) = (&pair[0], &pair[1]);
            assert_eq!(a.abscissa, b.abscissa);
            let se = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
            assert!((a.value - b.value).abs() < 4.0 * se + 1e-3, "{a:?} {b:?}");
        }
        assert_eq!(out.fits.len(), 2);
        assert_eq!(out.fits[1].method, "orthant");
    }
}
