//! Correlation kernels `ρ` of the stationary sequence and weight sequences `σ`
//! of the partial sums, together with the cumulative scale `s` and its inverse `w`.
//!
//! Both families are addressable by short identifier strings, e.g.
//! `fgn:H=0.75`, `exp:lambda=1`, `poly:p=1.0` or `exp-weight:alpha=0.2`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest index scanned when inverting the scale function.
const MAX_SCALE_INDEX: u64 = 1 << 32;

/// Minimum number of lags a user table needs before its tail can be fitted.
pub const MIN_TABLE_LAGS: usize = 16;

/// Fitted slopes within this distance of -1 are flagged as borderline.
pub const BOUNDARY_BAND: f64 = 0.05;

/// Nonnegative correlation function of a unit-variance stationary sequence.
#[derive(Debug, Clone, PartialEq)]
pub enum CorrelationKernel {
    /// `ρ(0) = 1`, zero elsewhere: i.i.d. increments.
    KroneckerDelta,
    /// `ρ(i) = exp(-λ i)`.
    Exponential { rate: f64 },
    /// `ρ(i) = (1 + i)^{-β}` with `β > 1`.
    PolySummable { beta: f64 },
    /// Fractional Gaussian noise increments with Hurst index `H ∈ (1/2, 1)`.
    Fgn { hurst: f64 },
    /// Explicit values `ρ(0), ρ(1), ...`; lags past the end are zero.
    Table(Vec<f64>),
}

/// Tail behaviour of a correlation kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailClass {
    Summable,
    /// `ρ(i) / i^{2H-2} → κ`.
    Nonsummable { hurst: f64, kappa: f64 },
}

impl TailClass {
    pub fn is_summable(&self) -> bool {
        matches!(self, TailClass::Summable)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub class: TailClass,
    /// Slope of `log ρ(i)` against `log i` when the class was fitted from a table.
    pub fitted_slope: Option<f64>,
    /// Set when the fitted slope lies within [`BOUNDARY_BAND`] of -1.
    pub near_boundary: bool,
}

impl CorrelationKernel {
    pub fn fgn(hurst: f64) -> Result<Self> {
        let k = CorrelationKernel::Fgn { hurst };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            CorrelationKernel::KroneckerDelta => Ok(()),
            CorrelationKernel::Exponential { rate } => {
                if rate > 0.0 && rate.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("exponential rate must be positive, got {rate}")))
                }
            }
            CorrelationKernel::PolySummable { beta } => {
                if beta > 1.0 && beta.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("polynomial decay exponent must exceed 1, got {beta}")))
                }
            }
            CorrelationKernel::Fgn { hurst } => {
                if hurst > 0.5 && hurst < 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("Hurst index must lie in (1/2, 1), got {hurst}")))
                }
            }
            CorrelationKernel::Table(ref values) => {
                match values.first() {
                    Some(&v) if (v - 1.0).abs() <= 1e-12 => {}
                    _ => return Err(Error::InvalidParameter("table must start with rho(0) = 1".into())),
                }
                if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
                    return Err(Error::InvalidParameter(format!("table entry rho({i}) = {v} outside [0, 1]")));
                }
                Ok(())
            }
        }
    }

    /// Checked evaluation of `ρ(lag)`.
    pub fn rho(&self, lag: i64) -> Result<f64> {
        if lag < 0 {
            return Err(Error::Domain(format!("negative lag {lag}")));
        }
        Ok(self.at(lag as usize))
    }

    /// `ρ(lag)` for a nonnegative lag.
    pub fn at(&self, lag: usize) -> f64 {
        if lag == 0 {
            return 1.0;
        }
        match *self {
            CorrelationKernel::KroneckerDelta => 0.0,
            CorrelationKernel::Exponential { rate } => (-rate * lag as f64).exp(),
            CorrelationKernel::PolySummable { beta } => (1.0 + lag as f64).powf(-beta),
            CorrelationKernel::Fgn { hurst } => fgn_correlation(hurst, lag),
            CorrelationKernel::Table(ref values) => values.get(lag).copied().unwrap_or(0.0),
        }
    }

    /// `ρ(|lag|)`.
    #[inline]
    pub fn at_signed(&self, lag: i64) -> f64 {
        self.at(lag.unsigned_abs() as usize)
    }

    /// Values `ρ(0), ..., ρ(len - 1)`.
    pub fn table(&self, len: usize) -> Vec<f64> {
        (0..len).map(|i| self.at(i)).collect()
    }

    /// Lag beyond which every correlation is below `tol`, when such a lag is known in closed form.
    pub fn effective_support(&self, tol: f64) -> Option<usize> {
        match *self {
            CorrelationKernel::KroneckerDelta => Some(0),
            CorrelationKernel::Exponential { rate } => Some((-tol.ln() / rate).ceil().max(0.0) as usize),
            CorrelationKernel::Table(ref values) => Some(values.len().saturating_sub(1)),
            _ => None,
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            CorrelationKernel::KroneckerDelta => true,
            CorrelationKernel::Table(values) => values.iter().skip(1).all(|&v| v == 0.0),
            _ => false,
        }
    }

    /// Declared tail class; user tables are classified by a log-log fit over
    /// their largest decade of lags.
    pub fn classify_summability(&self) -> Result<Classification> {
        let declared = |class| Classification { class, fitted_slope: None, near_boundary: false };
        match *self {
            CorrelationKernel::KroneckerDelta
            | CorrelationKernel::Exponential { .. }
            | CorrelationKernel::PolySummable { .. } => Ok(declared(TailClass::Summable)),
            CorrelationKernel::Fgn { hurst } => Ok(declared(TailClass::Nonsummable {
                hurst,
                kappa: hurst * (2.0 * hurst - 1.0),
            })),
            CorrelationKernel::Table(ref values) => classify_table(values),
        }
    }
}

fn classify_table(values: &[f64]) -> Result<Classification> {
    let len = values.len();
    if len < MIN_TABLE_LAGS {
        return Err(Error::TableTooShort { len, min: MIN_TABLE_LAGS });
    }
    let start = (len / 10).max(1);
    let (xs, ys): (Vec<f64>, Vec<f64>) = (start..len)
        .filter(|&i| values[i] > 0.0)
        .map(|i| ((i as f64).ln(), values[i].ln()))
        .unzip();
    if xs.len() < 2 {
        // finite support
        return Ok(Classification { class: TailClass::Summable, fitted_slope: None, near_boundary: false });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::UndecidedTail { slope: f64::NAN });
    }
    let slope = sxy / sxx;
    let level = my - slope * mx;
    let near_boundary = (slope + 1.0).abs() <= BOUNDARY_BAND;
    let class = if slope < -1.0 {
        TailClass::Summable
    } else if slope < 0.0 {
        TailClass::Nonsummable { hurst: 1.0 + slope / 2.0, kappa: level.exp() }
    } else {
        return Err(Error::UndecidedTail { slope });
    };
    Ok(Classification { class, fitted_slope: Some(slope), near_boundary })
}

/// Correlation of fractional Gaussian noise at a positive lag.
///
/// For large lags the second difference of `i^{2H}` is evaluated through its
/// binomial series to avoid cancellation.
pub fn fgn_correlation(hurst: f64, lag: usize) -> f64 {
    if lag == 0 {
        return 1.0;
    }
    let two_h = 2.0 * hurst;
    let i = lag as f64;
    if lag < 8 {
        return 0.5 * ((i + 1.0).powf(two_h) + (i - 1.0).abs().powf(two_h) - 2.0 * i.powf(two_h));
    }
    // (1+x)^a + (1-x)^a - 2 = 2 sum_k C(a, 2k) x^{2k}
    let x2 = (1.0 / i).powi(2);
    let mut coeff = 1.0;
    let mut power = 1.0;
    let mut sum = 0.0;
    for k in 1..40 {
        let j = 2 * k;
        coeff *= (two_h - (j - 2) as f64) * (two_h - (j - 1) as f64) / ((j - 1) as f64 * j as f64);
        power *= x2;
        let term = coeff * power;
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    i.powf(two_h) * sum
}

impl fmt::Display for CorrelationKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorrelationKernel::KroneckerDelta => write!(f, "delta"),
            CorrelationKernel::Exponential { rate } => write!(f, "exp:lambda={rate}"),
            CorrelationKernel::PolySummable { beta } => write!(f, "poly-summable:beta={beta}"),
            CorrelationKernel::Fgn { hurst } => write!(f, "fgn:H={hurst}"),
            CorrelationKernel::Table(values) => write_table(f, values),
        }
    }
}

fn write_table(f: &mut fmt::Formatter<'_>, values: &[f64]) -> fmt::Result {
    write!(f, "table:")?;
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            write!(f, ";")?;
        }
        write!(f, "{v}")?;
    }
    Ok(())
}

/// Splits `family:key=value,key=value` into the family and its parameters.
pub(crate) fn split_id(id: &str) -> (&str, Vec<(&str, &str)>) {
    let (family, rest) = match id.split_once(':') {
        Some((f, r)) => (f.trim(), r),
        None => (id.trim(), ""),
    };
    let params = rest
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .filter_map(|kv| kv.split_once('=').map(|(k, v)| (k.trim(), v.trim())))
        .collect();
    (family, params)
}

pub(crate) fn param(id: &str, params: &[(&str, &str)], keys: &[&str]) -> Result<f64> {
    let raw = params
        .iter()
        .find(|(k, _)| keys.contains(k))
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::InvalidParameter(format!("`{id}` is missing parameter `{}`", keys[0])))?;
    raw.parse::<f64>()
        .map_err(|_| Error::InvalidParameter(format!("`{id}`: cannot parse `{raw}` as a number")))
}

fn parse_table(id: &str, body: &str) -> Result<Vec<f64>> {
    body.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("`{id}`: bad table entry `{s}`")))
        })
        .collect()
}

impl FromStr for CorrelationKernel {
    type Err = Error;

    fn from_str(id: &str) -> Result<Self> {
        if let Some(body) = id.strip_prefix("table:") {
            let k = CorrelationKernel::Table(parse_table(id, body)?);
            k.validate()?;
            return Ok(k);
        }
        let (family, params) = split_id(id);
        let kernel = match family {
            "delta" | "kronecker-delta" | "iid" => CorrelationKernel::KroneckerDelta,
            "exp" | "exponential" => CorrelationKernel::Exponential { rate: param(id, &params, &["lambda", "rate"])? },
            "poly-summable" => CorrelationKernel::PolySummable { beta: param(id, &params, &["beta"])? },
            "fgn" => CorrelationKernel::Fgn { hurst: param(id, &params, &["H", "hurst"])? },
            _ => return Err(Error::UnknownFamily(id.to_string())),
        };
        kernel.validate()?;
        Ok(kernel)
    }
}

/// Positive weights `σ(i)`, `i ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightSequence {
    /// `σ(i) = i^p`.
    Polynomial { p: f64 },
    /// `σ(i) = i^{-1/2}`.
    LogScale,
    /// `σ(i) = exp(γ i^p)`.
    StretchedExp { gamma: f64, p: f64 },
    /// `σ(i) = exp(α i)`.
    Exponential { alpha: f64 },
    /// Explicit `σ(1), σ(2), ...`; the last value repeats past the end.
    Table(Vec<f64>),
}

impl WeightSequence {
    pub const ONES: WeightSequence = WeightSequence::Polynomial { p: 0.0 };

    pub fn validate(&self) -> Result<()> {
        match *self {
            WeightSequence::Polynomial { p } if !p.is_finite() => {
                Err(Error::InvalidParameter(format!("polynomial order must be finite, got {p}")))
            }
            WeightSequence::StretchedExp { gamma, p } if !(gamma > 0.0 && p > 0.0) => Err(Error::InvalidParameter(
                format!("stretched exponential needs gamma > 0 and p > 0, got ({gamma}, {p})"),
            )),
            WeightSequence::Exponential { alpha } if !(alpha > 0.0 && alpha.is_finite()) => {
                Err(Error::InvalidParameter(format!("exponential weight rate must be positive, got {alpha}")))
            }
            WeightSequence::Table(ref values) => {
                if values.is_empty() {
                    return Err(Error::InvalidParameter("weight table is empty".into()));
                }
                if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
                    return Err(Error::InvalidParameter(format!("weights must be positive, got {v}")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Checked evaluation of `σ(i)`.
    pub fn sigma(&self, i: i64) -> Result<f64> {
        if i < 1 {
            return Err(Error::Domain(format!("weight index must be at least 1, got {i}")));
        }
        Ok(self.at(i as usize))
    }

    /// `σ(i)` for `i ≥ 1`.
    pub fn at(&self, i: usize) -> f64 {
        debug_assert!(i >= 1);
        let x = i as f64;
        match *self {
            WeightSequence::Polynomial { p } => {
                if p == 0.0 {
                    1.0
                } else {
                    x.powf(p)
                }
            }
            WeightSequence::LogScale => x.sqrt().recip(),
            WeightSequence::StretchedExp { gamma, p } => (gamma * x.powf(p)).exp(),
            WeightSequence::Exponential { alpha } => (alpha * x).exp(),
            WeightSequence::Table(ref values) => values[(i - 1).min(values.len() - 1)],
        }
    }

    /// `σ(1), ..., σ(n)`.
    pub fn values(&self, n: usize) -> Vec<f64> {
        (1..=n).map(|i| self.at(i)).collect()
    }

    /// `sup_t s(t)` when `Σ σ(i)^2` converges.
    pub fn sup_scale(&self) -> Option<f64> {
        match *self {
            WeightSequence::Polynomial { p } if p < -0.5 => {
                let q = 2.0 * p;
                const K: usize = 10_000;
                let head: f64 = (1..=K).rev().map(|i| (i as f64).powf(q)).sum();
                // midpoint estimate of the tail sum
                let tail = (K as f64 + 0.5).powf(q + 1.0) / (-q - 1.0);
                Some((head + tail).sqrt())
            }
            _ => None,
        }
    }

    /// Cumulative scale `s(t)` with `s(t)^2 = ∫_0^t σ(⌈x⌉)^2 dx`.
    pub fn s_of(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("scale argument must be nonnegative, got {t}")));
        }
        let s2 = self.s_squared(t);
        if !s2.is_finite() {
            return Err(Error::Domain(format!("s({t}) overflows f64")));
        }
        Ok(s2.sqrt())
    }

    fn s_squared(&self, t: f64) -> f64 {
        let whole = t.floor();
        let frac = t - whole;
        let k = whole as usize;
        let mut acc = 0.0;
        for i in 1..=k {
            let s = self.at(i);
            acc += s * s;
        }
        if frac > 0.0 {
            let s = self.at(k + 1);
            acc += frac * s * s;
        }
        acc
    }

    /// `s(n)^2 = Σ_{i ≤ n} σ(i)^2` for every `n ≤ len`, index 0 holding `s(0)^2 = 0`.
    pub fn s_squared_prefix(&self, len: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(len + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for i in 1..=len {
            let s = self.at(i);
            acc += s * s;
            out.push(acc);
        }
        out
    }

    /// Inverse of the scale: the unique `t` with `s(t) = u`.
    ///
    /// The bracketing unit cell is located by a monotone scan of `s^2`, which
    /// is linear inside each cell, so the root there is solved exactly.
    pub fn w_of(&self, u: f64) -> Result<f64> {
        if !(u >= 0.0) {
            return Err(Error::Domain(format!("inverse scale argument must be nonnegative, got {u}")));
        }
        if u == 0.0 {
            return Ok(0.0);
        }
        if let Some(sup) = self.sup_scale() {
            if u >= sup {
                return Err(Error::ScaleBounded { requested: u, supremum: sup });
            }
        }
        let target = u * u;
        let mut acc = 0.0;
        let mut k: u64 = 0;
        while k < MAX_SCALE_INDEX {
            let s = self.at(k as usize + 1);
            let s2 = s * s;
            let next = acc + s2;
            if next >= target {
                let frac = ((target - acc) / s2).clamp(0.0, 1.0);
                return Ok(k as f64 + frac);
            }
            acc = next;
            k += 1;
        }
        Err(Error::Domain(format!("scale does not reach {u} within {MAX_SCALE_INDEX} steps")))
    }

    /// Smallest `C` with `σ(m)/s(m) ≤ C σ(n)/s(n)` for all `1 ≤ n ≤ m ≤ n_max`.
    pub fn log_concavity_constant(&self, n_max: usize) -> f64 {
        let s2 = self.s_squared_prefix(n_max);
        let ratios: Vec<f64> = (1..=n_max).map(|i| self.at(i) / s2[i].sqrt()).collect();
        let mut suffix_max = f64::NEG_INFINITY;
        let mut worst: f64 = 1.0;
        for r in ratios.iter().rev() {
            suffix_max = suffix_max.max(*r);
            worst = worst.max(suffix_max / r);
        }
        worst
    }
}

impl fmt::Display for WeightSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSequence::Polynomial { p } => write!(f, "poly:p={p}"),
            WeightSequence::LogScale => write!(f, "log-scale"),
            WeightSequence::StretchedExp { gamma, p } => write!(f, "stretched-exp:gamma={gamma},p={p}"),
            WeightSequence::Exponential { alpha } => write!(f, "exp-weight:alpha={alpha}"),
            WeightSequence::Table(values) => write_table(f, values),
        }
    }
}

impl FromStr for WeightSequence {
    type Err = Error;

    fn from_str(id: &str) -> Result<Self> {
        if let Some(body) = id.strip_prefix("table:") {
            let w = WeightSequence::Table(parse_table(id, body)?);
            w.validate()?;
            return Ok(w);
        }
        let (family, params) = split_id(id);
        let weights = match family {
            "poly" | "polynomial" => WeightSequence::Polynomial { p: param(id, &params, &["p"])? },
            "ones" | "constant" => WeightSequence::ONES,
            "log-scale" => WeightSequence::LogScale,
            "stretched-exp" => WeightSequence::StretchedExp {
                gamma: param(id, &params, &["gamma"])?,
                p: param(id, &params, &["p"])?,
            },
            "exp-weight" => WeightSequence::Exponential { alpha: param(id, &params, &["alpha"])? },
            _ => return Err(Error::UnknownFamily(id.to_string())),
        };
        weights.validate()?;
        Ok(weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn rho_examples() {
        let k = CorrelationKernel::Exponential { rate: 1.0 };
        assert!(close(k.rho(1).unwrap(), (-1.0f64).exp(), 1e-15));
        for k in [
            CorrelationKernel::KroneckerDelta,
            CorrelationKernel::Fgn { hurst: 0.6 },
            CorrelationKernel::PolySummable { beta: 2.0 },
        ] {
            assert_eq!(k.rho(0).unwrap(), 1.0);
        }
        let fgn = CorrelationKernel::Fgn { hurst: 0.75 };
        assert!(close(fgn.rho(1).unwrap(), 2f64.sqrt() - 1.0, 1e-14));
        assert!(matches!(fgn.rho(-1), Err(Error::Domain(_))));
    }

    #[test]
    fn fgn_series_matches_direct_formula() {
        for &h in &[0.55, 0.75, 0.95] {
            for lag in 8..40usize {
                let i = lag as f64;
                let direct = 0.5 * ((i + 1.0).powf(2.0 * h) + (i - 1.0).powf(2.0 * h) - 2.0 * i.powf(2.0 * h));
                let series = fgn_correlation(h, lag);
                assert!(close(series, direct, 1e-10), "H={h} lag={lag}: {series} vs {direct}");
            }
        }
    }

    #[test]
    fn fgn_tail_constant() {
        for &h in &[0.55, 0.65, 0.75, 0.85, 0.95] {
            let i = (1usize << 14) as f64;
            let scaled = fgn_correlation(h, 1 << 14) * i.powf(2.0 - 2.0 * h);
            let kappa = h * (2.0 * h - 1.0);
            assert!((scaled / kappa - 1.0).abs() < 0.01, "H={h}: {scaled} vs {kappa}");
        }
    }

    #[test]
    fn builtin_kernels_are_correlations_on_grid() {
        let kernels = [
            CorrelationKernel::KroneckerDelta,
            CorrelationKernel::Exponential { rate: 0.3 },
            CorrelationKernel::PolySummable { beta: 1.5 },
            CorrelationKernel::Fgn { hurst: 0.55 },
            CorrelationKernel::Fgn { hurst: 0.95 },
        ];
        for k in &kernels {
            for lag in 0..=(1usize << 14) {
                let v = k.at(lag);
                assert!((0.0..=1.0).contains(&v), "{k} at {lag}: {v}");
            }
        }
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(WeightSequence::Polynomial { p: 1.0 }.sigma(3).unwrap(), 3.0);
        let se = WeightSequence::StretchedExp { gamma: 0.5, p: 0.5 };
        assert!(close(se.sigma(4).unwrap(), std::f64::consts::E, 1e-15));
        assert_eq!(WeightSequence::LogScale.sigma(4).unwrap(), 0.5);
        assert!(WeightSequence::LogScale.sigma(0).is_err());
    }

    #[test]
    fn scale_examples() {
        let lin = WeightSequence::Polynomial { p: 1.0 };
        assert!(close(lin.s_of(2.0).unwrap(), 5f64.sqrt(), 1e-15));
        assert_eq!(lin.s_of(0.0).unwrap(), 0.0);
        assert!(close(WeightSequence::ONES.s_of(2.5).unwrap(), 2.5f64.sqrt(), 1e-15));
        assert!(lin.s_of(-1.0).is_err());

        assert!(close(lin.w_of(5f64.sqrt()).unwrap(), 2.0, 1e-12));
        assert_eq!(lin.w_of(0.0).unwrap(), 0.0);
        assert!(close(WeightSequence::ONES.w_of(10.0).unwrap(), 100.0, 1e-12));
    }

    #[test]
    fn bounded_scale_is_rejected() {
        let w = WeightSequence::Polynomial { p: -1.0 };
        let sup = w.sup_scale().unwrap();
        // sum 1/i^2 = pi^2 / 6
        assert!(close(sup * sup, std::f64::consts::PI.powi(2) / 6.0, 1e-9));
        assert!(matches!(w.w_of(sup * 1.01), Err(Error::ScaleBounded { .. })));
        let t = w.w_of(1.2).unwrap();
        assert!(close(w.s_of(t).unwrap(), 1.2, 1e-12));
    }

    #[test]
    fn inverse_scale_round_trip_on_log_grid() {
        let families = [
            WeightSequence::ONES,
            WeightSequence::Polynomial { p: 1.0 },
            WeightSequence::Polynomial { p: -0.3 },
            WeightSequence::Polynomial { p: 2.5 },
            WeightSequence::LogScale,
            WeightSequence::StretchedExp { gamma: 0.5, p: 0.5 },
            WeightSequence::Exponential { alpha: 0.2 },
        ];
        for w in &families {
            for k in 0..50 {
                let t = 10f64.powf(-1.0 + 5.0 * k as f64 / 49.0);
                let Ok(u) = w.s_of(t) else {
                    // geometric growth leaves f64 range near t = 1775
                    assert!(matches!(w, WeightSequence::Exponential { .. }) && t > 1700.0);
                    continue;
                };
                let back = w.w_of(u).unwrap();
                assert!((back - t).abs() <= 1e-8 * t, "{w}: t={t} back={back}");
                assert!((w.s_of(back).unwrap() - u).abs() <= 1e-10 * (1.0 + u));
            }
        }
    }

    #[test]
    fn polynomial_scale_asymptotics() {
        let n = 1_000_000.0;
        for &p in &[-0.25, 0.0, 0.5, 1.0, 2.0] {
            let s2 = WeightSequence::Polynomial { p }.s_of(n).unwrap().powi(2);
            let ratio = s2 * (2.0 * p + 1.0) / n.powf(2.0 * p + 1.0);
            assert!((ratio - 1.0).abs() < 0.01, "p={p}: {ratio}");
        }
        // s(n)^2 is the harmonic number, ln n + 0.5772... + O(1/n)
        let s2 = WeightSequence::LogScale.s_of(n).unwrap().powi(2);
        assert!((s2 - n.ln() - 0.577_215_664_901_532_9).abs() < 1e-5);
        assert!((s2 / n.ln() - 1.0).abs() < 0.05);
    }

    #[test]
    fn classification() {
        let c = CorrelationKernel::PolySummable { beta: 2.0 }.classify_summability().unwrap();
        assert_eq!(c.class, TailClass::Summable);
        let c = CorrelationKernel::KroneckerDelta.classify_summability().unwrap();
        assert_eq!(c.class, TailClass::Summable);
        let c = CorrelationKernel::Fgn { hurst: 0.75 }.classify_summability().unwrap();
        assert_eq!(c.class, TailClass::Nonsummable { hurst: 0.75, kappa: 0.375 });

        let fgn_table = CorrelationKernel::Table(CorrelationKernel::Fgn { hurst: 0.75 }.table(4096));
        let c = fgn_table.classify_summability().unwrap();
        match c.class {
            TailClass::Nonsummable { hurst, kappa } => {
                assert!((hurst - 0.75).abs() < 0.01);
                assert!((kappa - 0.375).abs() < 0.02);
            }
            other => panic!("unexpected {other:?}"),
        }
        let poly_table = CorrelationKernel::Table(CorrelationKernel::PolySummable { beta: 2.0 }.table(1024));
        assert_eq!(poly_table.classify_summability().unwrap().class, TailClass::Summable);
        let border = CorrelationKernel::Table(CorrelationKernel::PolySummable { beta: 1.02 }.table(1024));
        assert!(border.classify_summability().unwrap().near_boundary);
        let short = CorrelationKernel::Table(vec![1.0, 0.5, 0.25]);
        assert!(matches!(short.classify_summability(), Err(Error::TableTooShort { .. })));
    }

    #[test]
    fn identifiers_round_trip() {
        for id in ["fgn:H=0.75", "poly-summable:beta=2", "exp:lambda=1", "delta", "table:1;0.5;0.25"] {
            let k: CorrelationKernel = id.parse().unwrap();
            assert_eq!(k.to_string().parse::<CorrelationKernel>().unwrap(), k);
        }
        for id in ["poly:p=1.0", "log-scale", "exp-weight:alpha=0.2", "stretched-exp:gamma=0.5,p=0.5"] {
            let w: WeightSequence = id.parse().unwrap();
            assert_eq!(w.to_string().parse::<WeightSequence>().unwrap(), w);
        }
        assert!(matches!("gauss:H=0.7".parse::<CorrelationKernel>(), Err(Error::UnknownFamily(_))));
        assert!("fgn:H=1.2".parse::<CorrelationKernel>().is_err());
    }

    #[test]
    fn log_concavity_holds_for_builtin_weights() {
        for w in [
            WeightSequence::ONES,
            WeightSequence::Polynomial { p: 1.0 },
            WeightSequence::LogScale,
            WeightSequence::StretchedExp { gamma: 0.5, p: 0.5 },
        ] {
            let c = w.log_concavity_constant(100_000);
            assert!(c.is_finite() && c < 3.0, "{w}: {c}");
        }
    }
}
