//! Exact finite-dimensional covariance structures: the interpolated
//! covariance `F_{ρ,σ}` of the partial sums, Gram matrices of `(S_1, ..., S_n)`
//! and of stationary processes on a uniform grid, and the scaling-limit ratios.

use std::io::Write;
use std::sync::Arc;

use log::warn;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{CorrelationKernel, TailClass, WeightSequence};
use crate::linalg;
use crate::special::{f_ph, PHParams};
use crate::stationary::Correlation;

/// Eigenvalues down to `-PSD_TOLERANCE · max diagonal` are accepted (and clipped).
pub const PSD_TOLERANCE: f64 = 1e-8;

/// Matrices up to this size are checked with a full eigendecomposition;
/// larger ones by a Cholesky factorization shifted by the tolerance.
pub const EIGEN_CHECK_LIMIT: usize = 600;

/// Products `l1 · l2` above this are evaluated by FFT convolution.
const DIRECT_SUM_LIMIT: usize = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GramKind {
    WeightedSum,
    StationaryToeplitz,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramMetadata {
    /// Kernel and weights, or the correlation identifier.
    pub label: String,
    /// Grid spacing for stationary matrices.
    pub spacing: Option<f64>,
}

/// Symmetric positive semidefinite covariance matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    n: usize,
    entries: Vec<f64>,
    pub kind: GramKind,
    pub metadata: GramMetadata,
    /// Smallest eigenvalue when it was computed, else `None`.
    pub min_eigenvalue: Option<f64>,
}

impl GramMatrix {
    /// Builds and validates a Gram matrix from row-major entries.
    pub fn new(n: usize, entries: Vec<f64>, kind: GramKind, metadata: GramMetadata) -> Result<Self> {
        if entries.len() != n * n || n == 0 {
            return Err(Error::InvalidParameter(format!("expected {} entries for n = {n}, got {}", n * n, entries.len())));
        }
        let mut g = GramMatrix { n, entries, kind, metadata, min_eigenvalue: None };
        g.validate()?;
        Ok(g)
    }

    /// Correlation matrix from row-major entries, without a kind-specific label.
    pub fn from_rows(n: usize, entries: Vec<f64>) -> Result<Self> {
        GramMatrix::new(
            n,
            entries,
            GramKind::WeightedSum,
            GramMetadata { label: "user".into(), spacing: None },
        )
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn max_diagonal(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).fold(0.0, f64::max)
    }

    fn validate(&mut self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            let d = self.get(i, i);
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::InvalidParameter(format!("diagonal entry {i} is {d}")));
            }
            for j in 0..i {
                let (a, b) = (self.get(i, j), self.get(j, i));
                if (a - b).abs() > 1e-12 * (a.abs() + b.abs()).max(f64::MIN_POSITIVE) {
                    return Err(Error::InvalidParameter(format!("matrix not symmetric at ({i}, {j})")));
                }
                if a < 0.0 {
                    return Err(Error::NegativeEntry { row: i, col: j, value: a });
                }
            }
        }
        let tol = PSD_TOLERANCE * self.max_diagonal();
        if n <= EIGEN_CHECK_LIMIT {
            let min = linalg::eigenvalues(&self.entries, n).into_iter().fold(f64::INFINITY, f64::min);
            self.min_eigenvalue = Some(min);
            if min < -tol {
                return Err(Error::NotPsd { min_eigenvalue: min, tolerance: tol });
            }
            if min < 0.0 {
                warn!("Gram matrix ({}) has eigenvalue {min:e}; clipped to zero for sampling", self.metadata.label);
            }
        } else if let Err(index) = linalg::cholesky(&self.entries, n, tol) {
            return Err(Error::NotPsd { min_eigenvalue: f64::NAN, tolerance: tol }).map_err(|e| {
                warn!("shifted Cholesky failed at pivot {index}");
                e
            });
        }
        Ok(())
    }

    /// Correlation matrix `G_ij / sqrt(G_ii G_jj)`.
    pub fn correlation(&self) -> GramMatrix {
        let n = self.n;
        let scale: Vec<f64> = (0..n).map(|i| self.get(i, i).sqrt().recip()).collect();
        let entries = (0..n * n).map(|k| self.entries[k] * scale[k / n] * scale[k % n]).collect();
        GramMatrix { n, entries, kind: self.kind, metadata: self.metadata.clone(), min_eigenvalue: None }
    }

    /// Principal submatrix on the index range `start..end`.
    pub fn principal(&self, start: usize, end: usize) -> GramMatrix {
        assert!(start < end && end <= self.n);
        let m = end - start;
        let mut entries = Vec::with_capacity(m * m);
        for i in start..end {
            entries.extend_from_slice(&self.entries[i * self.n + start..i * self.n + end]);
        }
        GramMatrix { n: m, entries, kind: self.kind, metadata: self.metadata.clone(), min_eigenvalue: None }
    }

    /// Writes the matrix as CSV: `#`-prefixed metadata lines, then one row per line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let kind = match self.kind {
            GramKind::WeightedSum => "weighted-sum",
            GramKind::StationaryToeplitz => "stationary-toeplitz",
        };
        writeln!(out, "# kind={kind}")?;
        writeln!(out, "# label={}", self.metadata.label)?;
        if let Some(d) = self.metadata.spacing {
            writeln!(out, "# spacing={d}")?;
        }
        writeln!(out, "# n={}", self.n)?;
        for i in 0..self.n {
            let row = &self.entries[i * self.n..(i + 1) * self.n];
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// Cell weights `σ(i) · |(i-1, i] ∩ (0, l]|` for `i = 1, ..., ⌈l⌉`.
fn cell_weights(weights: &WeightSequence, l: f64) -> Vec<f64> {
    let cells = l.ceil() as usize;
    (1..=cells)
        .map(|i| {
            let width = (l - (i - 1) as f64).min(1.0);
            weights.at(i) * width
        })
        .collect()
}

/// `Σ_i Σ_j a_i b_j ρ(|i - j|)`.
fn bilinear(kernel: &CorrelationKernel, a: &[f64], b: &[f64]) -> f64 {
    let (n1, n2) = (a.len(), b.len());
    // below f64 resolution exp underflows to zero, so the band is exact
    if let Some(k) = kernel.effective_support(1e-320) {
        if k.saturating_mul(2).saturating_add(1) < n2 {
            let rho = kernel.table(k + 1);
            let mut total = 0.0;
            for (i, &ai) in a.iter().enumerate() {
                let lo = i.saturating_sub(k);
                let hi = (i + k + 1).min(n2);
                let mut inner = 0.0;
                for j in lo..hi {
                    inner += b[j] * rho[i.abs_diff(j)];
                }
                total += ai * inner;
            }
            return total;
        }
    }
    if n1.saturating_mul(n2) <= DIRECT_SUM_LIMIT {
        let rho = kernel.table(n1.max(n2));
        let mut total = 0.0;
        for (i, &ai) in a.iter().enumerate() {
            let mut inner = 0.0;
            for (j, &bj) in b.iter().enumerate() {
                inner += bj * rho[i.abs_diff(j)];
            }
            total += ai * inner;
        }
        return total;
    }
    bilinear_fft(kernel, a, b)
}

fn bilinear_fft(kernel: &CorrelationKernel, a: &[f64], b: &[f64]) -> f64 {
    let (n1, n2) = (a.len(), b.len());
    let len = (n1 + n2).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    // c_i = Σ_j b_j ρ(|i - j|) as the circular convolution of b with ρ(|d|), d in (-n2, n1)
    let mut kern = vec![Complex::new(0.0, 0.0); len];
    for d in 0..n1 {
        kern[d].re = kernel.at(d);
    }
    for d in 1..n2 {
        kern[len - d].re = kernel.at(d);
    }
    let mut sig = vec![Complex::new(0.0, 0.0); len];
    for (j, &bj) in b.iter().enumerate() {
        sig[j].re = bj;
    }
    fwd.process(&mut kern);
    fwd.process(&mut sig);
    for (s, k) in sig.iter_mut().zip(&kern) {
        *s *= *k;
    }
    inv.process(&mut sig);
    let scale = 1.0 / len as f64;
    a.iter().zip(&sig).map(|(ai, c)| ai * c.re * scale).sum()
}

/// `F_{ρ,σ}(l1, l2) = ∫_0^{l1} ∫_0^{l2} σ(⌈x⌉) σ(⌈y⌉) ρ(⌈x⌉ - ⌈y⌉) dx dy`.
///
/// The integrand is constant on unit cells, so the integral is an exact
/// weighted double sum with fractional edge cells.
pub fn f_rho_sigma(kernel: &CorrelationKernel, weights: &WeightSequence, l1: f64, l2: f64) -> Result<f64> {
    if !(l1 > 0.0 && l2 > 0.0) || !l1.is_finite() || !l2.is_finite() {
        return Err(Error::Domain(format!("F needs positive arguments, got ({l1}, {l2})")));
    }
    let (a, b) = (cell_weights(weights, l1), cell_weights(weights, l2));
    // iterate the shorter side in the outer loop
    Ok(if a.len() <= b.len() { bilinear(kernel, &a, &b) } else { bilinear(kernel, &b, &a) })
}

/// Covariance matrix of `(S_1, ..., S_n)`, entry `(k, l) = F_{ρ,σ}(k, l)`.
///
/// Assembled row by row with `F(k, l) = F(k-1, l) + σ(k) Σ_{j ≤ l} σ(j) ρ(k - j)`.
pub fn gram_s(kernel: &CorrelationKernel, weights: &WeightSequence, n: usize) -> Result<GramMatrix> {
    if n == 0 {
        return Err(Error::Domain("gram_S needs n >= 1".into()));
    }
    let sigma = weights.values(n);
    let rho = kernel.table(n);
    let mut g = vec![0.0; n * n];
    let mut prev = vec![0.0; n];
    let mut row = vec![0.0; n];
    for k in 0..n {
        let mut inner = 0.0;
        for l in 0..n {
            inner += sigma[l] * rho[k.abs_diff(l)];
            row[l] = prev[l] + sigma[k] * inner;
        }
        g[k * n..(k + 1) * n].copy_from_slice(&row);
        std::mem::swap(&mut prev, &mut row);
    }
    // the recursion is exact but only symmetric up to rounding
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (g[i * n + j] + g[j * n + i]);
            g[i * n + j] = v;
            g[j * n + i] = v;
        }
    }
    GramMatrix::new(
        n,
        g,
        GramKind::WeightedSum,
        GramMetadata { label: format!("{kernel} | {weights}"), spacing: None },
    )
}

/// Toeplitz matrix `T[i, j] = A(|i - j| δ)` of a stationary process sampled at spacing `δ`.
pub fn gram_stationary(corr: &dyn Correlation, spacing: f64, m: usize) -> Result<GramMatrix> {
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::Domain(format!("grid spacing must be positive, got {spacing}")));
    }
    if m == 0 {
        return Err(Error::Domain("grid needs at least one point".into()));
    }
    let a0 = corr.at(0.0);
    if (a0 - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("correlation at lag 0 is {a0}, expected 1")));
    }
    let lags: Vec<f64> = (0..m).map(|k| corr.at(k as f64 * spacing)).collect();
    if let Some(bad) = lags.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("correlation produced {bad}")));
    }
    let mut entries = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            entries[i * m + j] = lags[i.abs_diff(j)];
        }
    }
    GramMatrix::new(
        m,
        entries,
        GramKind::StationaryToeplitz,
        GramMetadata { label: corr.label(), spacing: Some(spacing) },
    )
}

/// `F_{ρ,σ}(u, bu) / (u^{2p+2H} f_{p,H}(1, b))`, which tends to `κ` for
/// `ρ(i) ~ κ i^{2H-2}` and `σ(i) ~ i^p`.
pub fn limit_ratio_nonsummable(kernel: &CorrelationKernel, weights: &WeightSequence, u: f64, b: f64) -> Result<f64> {
    let hurst = match kernel.classify_summability()?.class {
        TailClass::Nonsummable { hurst, .. } => hurst,
        TailClass::Summable => return Err(Error::WrongTailClass { expected: "non-summable" }),
    };
    let p = match *weights {
        WeightSequence::Polynomial { p } => p,
        _ => return Err(Error::InvalidParameter("non-summable limit needs polynomial weights".into())),
    };
    if !(u > 0.0) || !(b >= 1.0) {
        return Err(Error::Domain(format!("need u > 0 and b >= 1, got u = {u}, b = {b}")));
    }
    let params = PHParams::new(p, hurst)?;
    let f = f_ph(params, 1.0, b)?.value;
    Ok(f_rho_sigma(kernel, weights, u, b * u)? / (u.powf(params.scaling_exponent()) * f))
}

/// `F_{ρ,σ}(w(u), w(bu)) / u^2`, which tends to `1 + 2 Σ_{ℓ≥1} ρ(ℓ)` for summable `ρ`.
pub fn limit_ratio_summable(kernel: &CorrelationKernel, weights: &WeightSequence, u: f64, b: f64) -> Result<f64> {
    if !kernel.classify_summability()?.class.is_summable() {
        return Err(Error::WrongTailClass { expected: "summable" });
    }
    if !(u > 0.0) || !(b >= 1.0) {
        return Err(Error::Domain(format!("need u > 0 and b >= 1, got u = {u}, b = {b}")));
    }
    let (w1, w2) = (weights.w_of(u)?, weights.w_of(b * u)?);
    Ok(f_rho_sigma(kernel, weights, w1, w2)? / (u * u))
}

/// Shared handle used by samplers and estimators.
pub type SharedGram = Arc<GramMatrix>;
