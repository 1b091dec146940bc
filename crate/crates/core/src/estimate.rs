//! Persistence probabilities and exponents.
//!
//! Probabilities are estimated by Monte Carlo over sampled paths or by
//! randomized quasi-Monte Carlo integration of the orthant probability in
//! sequential-conditioning form. Exponents come from weighted least squares
//! on log-log (polynomial decay) or linear (exponential decay) axes.

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::erf::erfc;

use crate::covariance::{gram_stationary, GramMatrix};
use crate::error::{Error, Result};
use crate::kernels::WeightSequence;
use crate::linalg;
use crate::simulate::{normal_quantile, NormalStream, PathBatch, Sampler};
use crate::stationary::{Correlation, Integrability};

/// Largest dimension accepted by [`orthant_qmc`].
pub const ORTHANT_MAX_DIM: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Mc,
    OrthantQmc,
    OrthantSmc,
    ClosedForm,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Mc => "mc",
            Method::OrthantQmc => "orthant-qmc",
            Method::OrthantSmc => "orthant-smc",
            Method::ClosedForm => "closed-form",
        }
    }
}

/// A probability on the log scale with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbabilityEstimate {
    pub log_p: f64,
    /// Standard error of `log_p` (delta method).
    pub stderr_log: f64,
    pub method: Method,
    /// Replications, or integrand evaluations for quasi-Monte Carlo.
    pub n_effective: u64,
    /// Rows that stayed below the level (Monte Carlo only).
    pub hits: Option<u64>,
    /// Set when no row persisted: `log_p` is then the one-sided 95% bound `ln(3/R)`.
    pub upper_bound_only: bool,
    /// Whether the quasi-Monte Carlo error target was met.
    pub converged: bool,
}

impl ProbabilityEstimate {
    /// Binomial estimate from `hits` successes out of `replications`.
    pub fn from_counts(hits: u64, replications: u64) -> Self {
        assert!(replications > 0 && hits <= replications);
        let r = replications as f64;
        if hits == 0 {
            return ProbabilityEstimate {
                log_p: (3.0 / r).min(1.0).ln(),
                stderr_log: f64::INFINITY,
                method: Method::Mc,
                n_effective: replications,
                hits: Some(0),
                upper_bound_only: true,
                converged: true,
            };
        }
        let p = hits as f64 / r;
        let se = (p * (1.0 - p) / r).sqrt();
        ProbabilityEstimate {
            log_p: p.ln(),
            stderr_log: se / p,
            method: Method::Mc,
            n_effective: replications,
            hits: Some(hits),
            upper_bound_only: false,
            converged: true,
        }
    }

    pub fn closed_form(p: f64) -> Self {
        ProbabilityEstimate {
            log_p: p.ln(),
            stderr_log: 0.0,
            method: Method::ClosedForm,
            n_effective: 0,
            hits: None,
            upper_bound_only: false,
            converged: true,
        }
    }

    pub fn p(&self) -> f64 {
        self.log_p.exp()
    }

    /// Standard error on the probability scale.
    pub fn stderr_p(&self) -> f64 {
        self.p() * self.stderr_log
    }

    /// Whether the estimate may enter a regression.
    pub fn usable(&self) -> bool {
        !self.upper_bound_only && self.stderr_log.is_finite() && self.log_p.is_finite()
    }
}

/// Fraction of rows whose maximum stays strictly below `level`.
pub fn persistence_mc(paths: &PathBatch, level: f64) -> ProbabilityEstimate {
    let hits = paths.rows().filter(|row| row.iter().all(|&v| v < level)).count();
    ProbabilityEstimate::from_counts(hits as u64, paths.replications() as u64)
}

/// `q̂_n` for every `n` in `ladder` from first-exit indices (see [`Sampler::first_exits`]).
pub fn ladder_from_exits(exits: &[u32], ladder: &[usize]) -> Vec<ProbabilityEstimate> {
    let max = ladder.iter().copied().max().unwrap_or(0);
    // survivors[k] = #{exit > k}
    let mut counts = vec![0u64; max + 2];
    for &e in exits {
        counts[(e as usize).min(max + 1)] += 1;
    }
    let mut survivors = vec![0u64; max + 2];
    let mut acc = 0;
    for k in (0..=max + 1).rev() {
        survivors[k] = acc;
        acc += counts[k];
    }
    ladder.iter().map(|&n| ProbabilityEstimate::from_counts(survivors[n], exits.len() as u64)).collect()
}

/// Monte Carlo persistence probabilities `P(max_{ℓ ≤ n} S_ℓ < level)` along a ladder of `n`,
/// all read off the same `R` paths of length `max(ladder)`.
pub fn persistence_ladder_mc(
    sampler: &Sampler,
    weights: &WeightSequence,
    ladder: &[usize],
    replications: usize,
    level: f64,
) -> Result<Vec<ProbabilityEstimate>> {
    if ladder.iter().any(|&n| n == 0 || n > sampler.len()) {
        return Err(Error::Domain(format!("ladder {ladder:?} does not fit paths of length {}", sampler.len())));
    }
    if replications == 0 {
        return Err(Error::Domain("need at least one replication".into()));
    }
    let exits = sampler.first_exits(weights, replications, level);
    Ok(ladder_from_exits(&exits, ladder))
}

/// Lag-`k` correlation averaged over positions within each row, with the
/// standard error from the spread of the (independent) row averages.
pub fn lag_correlation(paths: &PathBatch, lag: usize) -> (f64, f64) {
    let n = paths.len();
    assert!(lag < n, "lag {lag} needs paths longer than {n}");
    let terms = (n - lag) as f64;
    let means: Vec<f64> = paths
        .rows()
        .map(|row| row[..n - lag].iter().zip(&row[lag..]).map(|(a, b)| a * b).sum::<f64>() / terms)
        .collect();
    let r = means.len() as f64;
    let mean = means.iter().sum::<f64>() / r;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (r - 1.0);
    (mean, (var / r).sqrt())
}

/// Settings for [`orthant_qmc_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrthantOptions {
    /// Maximum number of integrand evaluations over all rounds.
    pub budget: u64,
    /// Independent random shifts of the lattice.
    pub shifts: usize,
    /// Target for three standard errors, relative to the estimate.
    pub rel_tol: f64,
    /// Absolute floor on the target.
    pub abs_tol: f64,
    pub seed: u64,
}

impl Default for OrthantOptions {
    fn default() -> Self {
        OrthantOptions { budget: 2_000_000, shifts: 12, rel_tol: 1e-3, abs_tol: 0.0, seed: 0 }
    }
}

#[inline]
fn phi(z: f64) -> f64 {
    0.5 * erfc(-z * std::f64::consts::FRAC_1_SQRT_2)
}

/// Cholesky factor with symmetric pivoting, smallest conditional variance first.
///
/// Returns the permutation and the lower factor of the permuted matrix (row-major).
/// Pivots below `tol · max diagonal` are set to zero with a zero column.
fn pivoted_cholesky(a: &[f64], n: usize) -> (Vec<usize>, Vec<f64>) {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut l = vec![0.0; n * n];
    let mut d: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    let tol = 1e-12 * d.iter().fold(0.0f64, |m, &v| m.max(v));
    for k in 0..n {
        let mut p = k;
        for i in k + 1..n {
            if d[i] < d[p] {
                p = i;
            }
        }
        if p != k {
            perm.swap(k, p);
            d.swap(k, p);
            for j in 0..k {
                l.swap(k * n + j, p * n + j);
            }
        }
        if d[k] <= tol {
            // degenerate: the variable is a linear function of the earlier ones
            for i in k + 1..n {
                l[i * n + k] = 0.0;
            }
            continue;
        }
        let lkk = d[k].sqrt();
        l[k * n + k] = lkk;
        let (head, tail) = l.split_at_mut((k + 1) * n);
        let row_k = &head[k * n..k * n + k];
        let pk = perm[k];
        for (off, row_i) in tail.chunks_exact_mut(n).enumerate() {
            let i = k + 1 + off;
            let v = (a[perm[i] * n + pk] - linalg::dot(&row_i[..k], row_k)) / lkk;
            row_i[k] = v;
            d[i] -= v * v;
        }
    }
    (perm, l)
}

fn first_primes(count: usize) -> Vec<u64> {
    let mut limit = 64usize;
    loop {
        let mut sieve = vec![true; limit + 1];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i <= limit {
            if sieve[i] {
                for j in (i * i..=limit).step_by(i) {
                    sieve[j] = false;
                }
            }
            i += 1;
        }
        let primes: Vec<u64> = (0..=limit).filter(|&k| sieve[k]).map(|k| k as u64).take(count).collect();
        if primes.len() == count {
            return primes;
        }
        limit *= 2;
    }
}

struct GenzIntegrand {
    n: usize,
    l: Vec<f64>,
    level: f64,
}

impl GenzIntegrand {
    /// Product of sequential conditional probabilities at the point `w ∈ [0,1)^{n-1}`.
    fn eval(&self, w: &[f64], y: &mut [f64]) -> f64 {
        let n = self.n;
        let l = &self.l;
        let cond = |i: usize, s: f64| {
            let lii = l[i * n + i];
            if lii > 0.0 {
                phi((self.level - s) / lii)
            } else if s < self.level {
                1.0
            } else {
                0.0
            }
        };
        let mut e = cond(0, 0.0);
        let mut f = e;
        for i in 1..n {
            if f == 0.0 {
                return 0.0;
            }
            let prev = i - 1;
            y[prev] = if l[prev * n + prev] > 0.0 {
                normal_quantile((w[prev] * e).max(f64::MIN_POSITIVE))
            } else {
                0.0
            };
            let s = linalg::dot(&l[i * n..i * n + i], &y[..i]);
            e = cond(i, s);
            f *= e;
        }
        f
    }
}

/// Orthant probability `P(X_i < r for all i)` for `X ~ N(0, gram)` with default options.
pub fn orthant_qmc(gram: &GramMatrix, level: f64, budget: u64, seed: u64) -> Result<ProbabilityEstimate> {
    orthant_qmc_with(gram, level, &OrthantOptions { budget, seed, ..OrthantOptions::default() })
}

/// Orthant probability by sequential conditioning in the order of smallest
/// conditional variance.
///
/// Up to [`LATTICE_MAX_DIM`] coordinates (or when the matrix is singular) the
/// conditional factorization is integrated on randomly shifted rank-1 lattices
/// (square-root-of-primes generator, tent periodization, antithetic pairs).
/// Above that the same factorization drives a particle approximation with
/// resampling, whose relative error grows only slowly with the dimension;
/// the estimate is then tagged [`Method::OrthantSmc`].
///
/// The sample size doubles until three standard errors across independent
/// randomizations fall below `max(rel_tol · p̂, abs_tol)` or the budget runs
/// out; in the latter case the last estimate is returned with `converged = false`.
pub fn orthant_qmc_with(gram: &GramMatrix, level: f64, opts: &OrthantOptions) -> Result<ProbabilityEstimate> {
    let n = gram.dim();
    if n > ORTHANT_MAX_DIM {
        return Err(Error::Domain(format!("orthant dimension {n} exceeds {ORTHANT_MAX_DIM}")));
    }
    if opts.shifts < 2 {
        return Err(Error::InvalidParameter("need at least two randomizations".into()));
    }
    let (_, l) = pivoted_cholesky(gram.entries(), n);
    let integrand = GenzIntegrand { n, l, level };
    if n == 1 {
        return Ok(ProbabilityEstimate {
            log_p: integrand.eval(&[], &mut [0.0]).ln(),
            stderr_log: 0.0,
            method: Method::OrthantQmc,
            n_effective: 1,
            hits: None,
            upper_bound_only: false,
            converged: true,
        });
    }
    let regular = (0..n).all(|i| integrand.l[i * n + i] > 0.0);
    if n > LATTICE_MAX_DIM && regular {
        let predictor = Predictor::new(&integrand.l, n);
        return Ok(adaptive(opts, 256, Method::OrthantSmc, |particles, m| {
            predictor.replicate(level, particles, NormalStream::new(opts.seed, m as u64))
        }));
    }
    let dim = n - 1;
    let generator: Vec<f64> = first_primes(dim).iter().map(|&p| (p as f64).sqrt().fract()).collect();
    let shifts: Vec<Vec<f64>> = (0..opts.shifts)
        .map(|m| {
            let mut s = NormalStream::new(opts.seed, m as u64);
            (0..dim).map(|_| s.uniform()).collect()
        })
        .collect();
    Ok(adaptive(opts, 64, Method::OrthantQmc, |points, m| {
        let shift = &shifts[m];
        let mut x = vec![0.0; dim];
        let mut xa = vec![0.0; dim];
        let mut y = vec![0.0; n];
        let mut acc = 0.0;
        for j in 0..points {
            let jf = j as f64;
            for k in 0..dim {
                let u = (jf * generator[k] + shift[k]).fract();
                let t = 1.0 - (2.0 * u - 1.0).abs();
                x[k] = t;
                xa[k] = 1.0 - t;
            }
            acc += 0.5 * (integrand.eval(&x, &mut y) + integrand.eval(&xa, &mut y));
        }
        acc / points as f64
    }))
}

/// Lattice integration is used up to this dimension.
pub const LATTICE_MAX_DIM: usize = 64;

/// Runs `replicate(size, index)` for every randomization, doubling `size` until converged.
fn adaptive<F>(opts: &OrthantOptions, start: usize, method: Method, replicate: F) -> ProbabilityEstimate
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    let mut size = start;
    let mut spent = 0u64;
    loop {
        let cost = 2 * size as u64 * opts.shifts as u64;
        let means: Vec<f64> = (0..opts.shifts).into_par_iter().map(|m| replicate(size, m)).collect();
        spent += cost;
        let count = means.len() as f64;
        let p = means.iter().sum::<f64>() / count;
        let var = means.iter().map(|v| (v - p).powi(2)).sum::<f64>() / (count - 1.0);
        let se = (var / count).sqrt();
        let converged = 3.0 * se <= (opts.rel_tol * p).max(opts.abs_tol);
        if converged || spent + 2 * cost > opts.budget {
            return ProbabilityEstimate {
                log_p: p.ln(),
                stderr_log: if p > 0.0 { se / p } else { f64::INFINITY },
                method,
                n_effective: spent,
                hits: None,
                upper_bound_only: false,
                converged,
            };
        }
        size *= 2;
    }
}

/// Conditional law of each coordinate given the earlier ones, in the pivot order:
/// `X_i | X_{<i} ~ N(-s_i Σ_j b_ij X_j, s_i²)` with `b` the rows of `L^{-1}`.
struct Predictor {
    n: usize,
    /// First index of the stored coefficients of each row.
    start: Vec<usize>,
    /// `b_ij` for `j` in `start[i]..i`.
    coeffs: Vec<Vec<f64>>,
    scale: Vec<f64>,
    /// History slots kept per particle.
    window: usize,
}

/// Coefficients below this (in units of the conditional standard deviation) are dropped.
const PREDICTOR_DROP: f64 = 1e-10;

impl Predictor {
    fn new(l: &[f64], n: usize) -> Predictor {
        // transpose so that column j of L is contiguous
        let mut lt = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                lt[j * n + i] = l[i * n + j];
            }
        }
        let mut start = Vec::with_capacity(n);
        let mut coeffs = Vec::with_capacity(n);
        let mut scale = Vec::with_capacity(n);
        let mut row = vec![0.0; n];
        let mut lookback = 0;
        for i in 0..n {
            // row i of B = L^{-1} from B L = I, solved right to left
            row[i] = 1.0 / l[i * n + i];
            for j in (0..i).rev() {
                let dot = linalg::dot(&row[j + 1..=i], &lt[j * n + j + 1..j * n + i + 1]);
                row[j] = -dot / l[j * n + j];
            }
            let first = (0..i).find(|&j| row[j].abs() > PREDICTOR_DROP).unwrap_or(i);
            lookback = lookback.max(i - first);
            start.push(first);
            coeffs.push(row[first..i].to_vec());
            scale.push(l[i * n + i]);
        }
        let window = if lookback > n / 4 { n } else { lookback.max(1) };
        Predictor { n, start, coeffs, scale, window }
    }

    /// One particle estimate of `P(X_i < level for all i)` with `particles` paths,
    /// resampling systematically whenever the effective sample size drops below half.
    fn replicate(&self, level: f64, particles: usize, mut stream: NormalStream) -> f64 {
        let (n, w) = (self.n, self.window);
        let mut hist = vec![0.0; particles * w];
        let mut spare = vec![0.0; particles * w];
        let mut weight = vec![1.0; particles];
        let mut log_z = 0.0;
        let mut ancestors = vec![0usize; particles];
        for i in 0..n {
            let (first, b, s) = (self.start[i], &self.coeffs[i], self.scale[i]);
            for k in 0..particles {
                if weight[k] == 0.0 {
                    continue;
                }
                let h = &mut hist[k * w..(k + 1) * w];
                let acc = if w == n {
                    linalg::dot(b, &h[first..i])
                } else {
                    b.iter().enumerate().map(|(off, c)| c * h[(first + off) % w]).sum()
                };
                let mean = -s * acc;
                let e = phi((level - mean) / s);
                weight[k] *= e;
                let u = stream.uniform();
                if e > 0.0 {
                    h[i % w] = mean + s * normal_quantile((u * e).max(f64::MIN_POSITIVE));
                }
            }
            let total: f64 = weight.iter().sum();
            if total == 0.0 {
                return 0.0;
            }
            let mean_w = total / particles as f64;
            log_z += mean_w.ln();
            let mut sq = 0.0;
            for v in weight.iter_mut() {
                *v /= mean_w;
                sq += *v * *v;
            }
            // effective sample size N² / Σ w² with weights normalized to mean 1
            let ess = (particles * particles) as f64 / sq;
            if i + 1 < n && ess < 0.5 * particles as f64 {
                let mut u = stream.uniform();
                let mut cum = weight[0];
                let mut src = 0;
                for a in ancestors.iter_mut() {
                    while u > cum && src + 1 < particles {
                        src += 1;
                        cum += weight[src];
                    }
                    *a = src;
                    u += 1.0;
                }
                for (k, &a) in ancestors.iter().enumerate() {
                    spare[k * w..(k + 1) * w].copy_from_slice(&hist[a * w..(a + 1) * w]);
                }
                std::mem::swap(&mut hist, &mut spare);
                weight.fill(1.0);
            }
        }
        log_z.exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regressor {
    LogS,
    LogN,
    LinearT,
}

/// `a(T)/T = -log q̂(T) / T` with its propagated standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeketePoint {
    pub horizon: f64,
    pub rate: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentFit {
    /// Fitted slope: of `log q` for log-log fits, of `-log q` for linear fits.
    pub exponent: f64,
    pub ci95: (f64, f64),
    pub stderr: f64,
    pub intercept: f64,
    pub regressor: Regressor,
    pub points_used: usize,
    pub r_squared: f64,
    /// Linear fits only.
    pub fekete: Vec<FeketePoint>,
}

/// Weighted affine least squares; weights `1/se²` (unit weights when every `se` is zero).
///
/// The slope error is inflated by `sqrt(χ²/(k-2))` when the residuals exceed their stated errors.
fn weighted_line(xs: &[f64], ys: &[f64], ses: &[f64]) -> (f64, f64, f64, f64) {
    let unit = ses.iter().all(|&s| s == 0.0);
    let w: Vec<f64> = ses
        .iter()
        .map(|&s| if unit { 1.0 } else { 1.0 / s.max(1e-300).powi(2) })
        .collect();
    let sw: f64 = w.iter().sum();
    let mx = w.iter().zip(xs).map(|(w, x)| w * x).sum::<f64>() / sw;
    let my = w.iter().zip(ys).map(|(w, y)| w * y).sum::<f64>() / sw;
    let sxx: f64 = w.iter().zip(xs).map(|(w, x)| w * (x - mx).powi(2)).sum();
    let sxy: f64 = w.iter().zip(xs).zip(ys).map(|((w, x), y)| w * (x - mx) * (y - my)).sum();
    let syy: f64 = w.iter().zip(ys).map(|(w, y)| w * (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let chi2: f64 = w
        .iter()
        .zip(xs)
        .zip(ys)
        .map(|((w, x), y)| w * (y - intercept - slope * x).powi(2))
        .sum();
    let k = xs.len() as f64;
    let scale = if unit { chi2 / (k - 2.0) } else { (chi2 / (k - 2.0)).max(1.0) };
    let se = (scale / sxx).sqrt();
    let r2 = if syy > 0.0 { 1.0 - chi2 / syy } else { 1.0 };
    (slope, intercept, se, r2)
}

fn usable_points<T: Copy>(points: &[(T, ProbabilityEstimate)]) -> Result<Vec<(T, ProbabilityEstimate)>> {
    let used: Vec<_> = points.iter().copied().filter(|(_, e)| e.usable()).collect();
    if used.len() < 3 {
        return Err(Error::TooFewPoints { required: 3, got: used.len() });
    }
    Ok(used)
}

/// Slope of `log q̂_n` against `log s(n)` or `log n`.
pub fn exponent_fit_loglog(
    points: &[(usize, ProbabilityEstimate)],
    weights: &WeightSequence,
    regressor: Regressor,
) -> Result<ExponentFit> {
    let used = usable_points(points)?;
    let xs: Vec<f64> = match regressor {
        Regressor::LogN => used.iter().map(|(n, _)| (*n as f64).ln()).collect(),
        Regressor::LogS => used
            .iter()
            .map(|(n, _)| weights.s_of(*n as f64).map(f64::ln))
            .collect::<Result<_>>()?,
        Regressor::LinearT => {
            return Err(Error::InvalidParameter("log-log fit needs a log-s or log-n regressor".into()))
        }
    };
    let ys: Vec<f64> = used.iter().map(|(_, e)| e.log_p).collect();
    let ses: Vec<f64> = used.iter().map(|(_, e)| e.stderr_log).collect();
    let (slope, intercept, se, r2) = weighted_line(&xs, &ys, &ses);
    Ok(ExponentFit {
        exponent: slope,
        ci95: (slope - 1.96 * se, slope + 1.96 * se),
        stderr: se,
        intercept,
        regressor,
        points_used: used.len(),
        r_squared: r2,
        fekete: Vec::new(),
    })
}

pub fn fekete_sequence(points: &[(f64, ProbabilityEstimate)]) -> Vec<FeketePoint> {
    points
        .iter()
        .filter(|(_, e)| e.usable())
        .map(|&(t, e)| FeketePoint { horizon: t, rate: -e.log_p / t, stderr: e.stderr_log / t })
        .collect()
}

/// Slope of `-log q̂(T)` against `T` with a free intercept.
pub fn exponent_fit_linear(points: &[(f64, ProbabilityEstimate)]) -> Result<ExponentFit> {
    let used = usable_points(points)?;
    let xs: Vec<f64> = used.iter().map(|(t, _)| *t).collect();
    let ys: Vec<f64> = used.iter().map(|(_, e)| -e.log_p).collect();
    let ses: Vec<f64> = used.iter().map(|(_, e)| e.stderr_log).collect();
    let (slope, intercept, se, r2) = weighted_line(&xs, &ys, &ses);
    Ok(ExponentFit {
        exponent: slope,
        ci95: (slope - 1.96 * se, slope + 1.96 * se),
        stderr: se,
        intercept,
        regressor: Regressor::LinearT,
        points_used: used.len(),
        r_squared: r2,
        fekete: fekete_sequence(points),
    })
}

/// Persistence probabilities of a stationary process on the grid `{0, δ, ..., T}` by orthant integration.
pub fn grid_persistence(
    corr: &dyn Correlation,
    spacing: f64,
    horizons: &[f64],
    level: f64,
    opts: &OrthantOptions,
) -> Result<Vec<(f64, ProbabilityEstimate)>> {
    horizons
        .iter()
        .map(|&t| {
            let points = (t / spacing).round() as usize + 1;
            let at_point = |e: Error| Error::AtLadderPoint { point: t, source: Box::new(e) };
            let gram = gram_stationary(corr, spacing, points).map_err(at_point)?;
            let est = orthant_qmc_with(&gram, level, opts).map_err(at_point)?;
            Ok((t, est))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dichotomy {
    Positive,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DichotomyReport {
    pub verdict: Dichotomy,
    /// Whether the tail class was declared or fitted.
    pub declared: bool,
    /// Fitted log-log tail slope when the tail was not declared.
    pub tail_slope: Option<f64>,
    pub fekete: Vec<FeketePoint>,
}

/// Settings of the empirical corroboration in [`theta_dichotomy`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DichotomyOptions {
    pub spacing: f64,
    pub horizons: Vec<f64>,
    pub level: f64,
    pub orthant: OrthantOptions,
}

impl Default for DichotomyOptions {
    fn default() -> Self {
        DichotomyOptions {
            spacing: 0.1,
            horizons: vec![5.0, 10.0, 20.0, 40.0],
            level: 0.0,
            orthant: OrthantOptions { rel_tol: 1e-2, ..OrthantOptions::default() },
        }
    }
}

/// Log-log slope of `A` over `τ = 2^6 .. 2^12`; `-∞` when `A` vanishes there.
fn tail_slope(corr: &dyn Correlation) -> f64 {
    let taus: Vec<f64> = (6..=12).map(|k| 2f64.powi(k)).collect();
    let vals: Vec<f64> = taus.iter().map(|&t| corr.at(t)).collect();
    if vals.iter().any(|&v| !(v > 0.0)) {
        return f64::NEG_INFINITY;
    }
    let xs: Vec<f64> = taus.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = vals.iter().map(|v| v.ln()).collect();
    weighted_line(&xs, &ys, &vec![0.0; xs.len()]).0
}

/// Positive or zero persistence exponent from integrability of the correlation tail,
/// with the Fekete sequence at the configured horizons as corroboration.
pub fn theta_dichotomy(corr: &dyn Correlation, tail: Option<Integrability>, opts: &DichotomyOptions) -> Result<DichotomyReport> {
    let declared = tail.or_else(|| corr.integrability());
    let (class, slope) = match declared {
        Some(c) => (c, None),
        None => {
            let slope = tail_slope(corr);
            let class = if slope < -1.05 {
                Integrability::Integrable
            } else if slope > -0.95 {
                Integrability::NonIntegrable
            } else {
                return Err(Error::UndecidedTail { slope });
            };
            (class, Some(slope))
        }
    };
    let verdict = match class {
        Integrability::Integrable => Dichotomy::Positive,
        Integrability::NonIntegrable => Dichotomy::Zero,
    };
    let points = grid_persistence(corr, opts.spacing, &opts.horizons, opts.level, &opts.orthant)?;
    Ok(DichotomyReport { verdict, declared: declared.is_some(), tail_slope: slope, fekete: fekete_sequence(&points) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlepianReport {
    pub full: f64,
    pub left: f64,
    pub right: f64,
    /// `full - left · right`.
    pub margin: f64,
    /// Three combined standard errors of the margin.
    pub tolerance: f64,
    pub holds: bool,
}

/// Checks `P(max_{1..n} < r) ≥ P(max_{1..split} < r) · P(max_{split+1..n} < r)`.
pub fn slepian_block_check(gram: &GramMatrix, level: f64, split: usize, opts: &OrthantOptions) -> Result<SlepianReport> {
    let n = gram.dim();
    if split == 0 || split >= n {
        return Err(Error::Domain(format!("split {split} must lie in 1..{n}")));
    }
    if let Some((i, j, v)) = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| (i, j, gram.get(i, j))).find(|t| t.2 < 0.0) {
        return Err(Error::NegativeEntry { row: i, col: j, value: v });
    }
    let full = orthant_qmc_with(gram, level, opts)?;
    let left = orthant_qmc_with(&gram.principal(0, split), level, opts)?;
    let right = orthant_qmc_with(&gram.principal(split, n), level, opts)?;
    let (pf, pl, pr) = (full.p(), left.p(), right.p());
    let margin = pf - pl * pr;
    let se = (full.stderr_p().powi(2) + (pr * left.stderr_p()).powi(2) + (pl * right.stderr_p()).powi(2)).sqrt();
    let tolerance = 3.0 * se + 1e-12;
    Ok(SlepianReport { full: pf, left: pl, right: pr, margin, tolerance, holds: margin >= -tolerance })
}
