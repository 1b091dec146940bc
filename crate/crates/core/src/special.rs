//! Special functions of the non-summable regime: the power integral `ψ_α`,
//! the double integral `f_{p,H}(a, b) = ∫_0^a ∫_0^b x^p y^p |x-y|^{2H-2} dx dy`,
//! its closed form on the unit square, the stationary correlation `C_{p,H}`
//! obtained after the exponential time change, and the discrete correlation
//! `D_{α,ρ}` that arises for exponentially growing weights.

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::kernels::CorrelationKernel;
use crate::quadrature::{integrate, QuadratureResult};
use crate::stationary::{Correlation, Integrability};

/// Ratios `b / a` above this value use the convergent series tail instead of 2-D quadrature.
pub const SERIES_SWITCH: f64 = 4.0;

const INNER_REL_TOL: f64 = 1e-12;
const OUTER_REL_TOL: f64 = 1e-10;
const MAX_SUBDIVISIONS: usize = 4000;

/// Largest lag accepted by [`c_ph`]; `exp(τ)` overflows shortly after.
pub const MAX_TAU: f64 = 600.0;

/// Polynomial order `p` of the weights and Hurst index `H` of the correlations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PHParams {
    pub p: f64,
    pub h: f64,
}

impl PHParams {
    pub fn new(p: f64, h: f64) -> Result<Self> {
        let params = PHParams { p, h };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.5 && self.h < 1.0) {
            return Err(Error::Domain(format!("H must lie in (1/2, 1), got {}", self.h)));
        }
        if !(self.p + self.h > 0.0) || !self.p.is_finite() {
            return Err(Error::Domain(format!("need p + H > 0, got p = {}, H = {}", self.p, self.h)));
        }
        Ok(())
    }

    /// `2p + 2H`, the self-similarity exponent of `f_{p,H}`.
    pub fn scaling_exponent(&self) -> f64 {
        2.0 * (self.p + self.h)
    }

    fn beta(&self) -> f64 {
        2.0 * self.h - 1.0
    }
}

/// `ψ_α(x) = ∫_1^x y^α dy`.
pub fn psi(alpha: f64, x: f64) -> Result<f64> {
    if !(x >= 1.0) {
        return Err(Error::Domain(format!("psi needs x >= 1, got {x}")));
    }
    Ok(psi_unchecked(alpha, x))
}

fn psi_unchecked(alpha: f64, x: f64) -> f64 {
    let eps = alpha + 1.0;
    let log_x = x.ln();
    if eps.abs() < 1e-8 {
        let z = eps * log_x;
        return log_x * (1.0 + z / 2.0 + z * z / 6.0);
    }
    (eps * log_x).exp_m1() / eps
}

/// Closed form `f_{p,H}(1, 1) = Γ(p+1) Γ(2H-1) / ((p+H) Γ(p+2H))`.
pub fn selberg_f11(params: PHParams) -> Result<f64> {
    params.validate()?;
    let PHParams { p, h } = params;
    let log_beta = ln_gamma(p + 1.0) + ln_gamma(2.0 * h - 1.0) - ln_gamma(p + 2.0 * h);
    Ok(log_beta.exp() / (p + h))
}

/// `∫_0^1 x^p ∫_1^c y^p (y - x)^{2H-2} dy dx` for `1 ≤ c`, by nested adaptive quadrature.
///
/// The inner variable is `u = (y - x)^{2H-1}`, which removes the diagonal
/// singularity. The outer range is split at 1/2: near 0 the substitution
/// `v = x^{p+1}` absorbs `x^p`, near 1 the substitution `t = (1 - x)^{2H-1}`
/// smooths the corner where the inner range touches the diagonal.
fn off_square_quadrature(params: PHParams, c: f64) -> Result<QuadratureResult> {
    if c <= 1.0 {
        return Ok(QuadratureResult::zero());
    }
    let PHParams { p, .. } = params;
    let beta = params.beta();
    let inv_beta = 1.0 / beta;

    // g(x) = ∫_1^c y^p (y-x)^{2H-2} dy, x in [0, 1)
    let inner = |x: f64| -> f64 {
        let lo = (1.0 - x).max(0.0).powf(beta);
        let hi = (c - x).powf(beta);
        integrate(|u: f64| (x + u.powf(inv_beta)).powf(p), lo, hi, 0.0, INNER_REL_TOL, MAX_SUBDIVISIONS)
            .map(|r| r.value * inv_beta)
            .unwrap_or(f64::NAN)
    };

    let v_max = 0.5f64.powf(p + 1.0);
    let left = integrate(
        |v: f64| {
            let x = v.powf(1.0 / (p + 1.0));
            inner(x) / (p + 1.0)
        },
        0.0,
        v_max,
        0.0,
        OUTER_REL_TOL,
        MAX_SUBDIVISIONS,
    )?;
    let t_max = 0.5f64.powf(beta);
    let right = integrate(
        |t: f64| {
            let one_minus_x = t.powf(inv_beta);
            let x = 1.0 - one_minus_x;
            // dx = (1/β) t^{1/β - 1} dt
            let jac = if t > 0.0 { inv_beta * one_minus_x / t } else { 0.0 };
            x.powf(p) * inner(x) * jac
        },
        0.0,
        t_max,
        0.0,
        OUTER_REL_TOL,
        MAX_SUBDIVISIONS,
    )?;
    let total = left.combine(right);
    if !total.value.is_finite() {
        return Err(Error::QuadratureDiverged { subdivisions: total.subdivisions, error: f64::INFINITY });
    }
    Ok(total)
}

/// `∫_0^1 ∫_N^c x^p y^p (y - x)^{2H-2} dy dx` for `N > 1`, by expanding
/// `(1 - x/y)^{2H-2}` in powers of `x/y`; every term integrates in closed form.
fn far_series(params: PHParams, n: f64, c: f64) -> QuadratureResult {
    let PHParams { p, h } = params;
    let a = 2.0 - 2.0 * h;
    let mut coeff = 1.0;
    let mut sum = 0.0;
    let mut last = 0.0;
    let mut terms = 0;
    for k in 0..500usize {
        if k > 0 {
            coeff *= (a + k as f64 - 1.0) / k as f64;
        }
        let e = p + 2.0 * h - 2.0 - k as f64;
        // ∫_N^c y^e dy = N^{e+1} ψ_e(c / N)
        let tail = n.powf(e + 1.0) * psi_unchecked(e, c / n);
        let term = coeff / (p + k as f64 + 1.0) * tail;
        sum += term;
        last = term.abs();
        terms = k + 1;
        if k > 4 && last <= 1e-17 * sum.abs() {
            break;
        }
    }
    QuadratureResult { value: sum, abs_error_estimate: last * n / (n - 1.0), subdivisions: terms }
}

/// Numerical `f_{p,H}(1, c)` for `c ≥ 1`, using the closed form on the unit square.
fn f_one(params: PHParams, f11: f64, c: f64, near: Option<&QuadratureResult>) -> Result<QuadratureResult> {
    let square = QuadratureResult { value: f11, abs_error_estimate: 0.0, subdivisions: 0 };
    if c <= SERIES_SWITCH {
        return Ok(square.combine(off_square_quadrature(params, c)?));
    }
    let near = match near {
        Some(r) => *r,
        None => off_square_quadrature(params, SERIES_SWITCH)?,
    };
    Ok(square.combine(near).combine(far_series(params, SERIES_SWITCH, c)))
}

/// `f_{p,H}(a, b)`, reduced to `a^{2p+2H} f_{p,H}(1, b/a)` with `b ≥ a`.
pub fn f_ph(params: PHParams, a: f64, b: f64) -> Result<QuadratureResult> {
    params.validate()?;
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!("f_ph needs positive finite arguments, got ({a}, {b})")));
    }
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let f11 = selberg_f11(params)?;
    let unit = f_one(params, f11, hi / lo, None)?;
    Ok(unit.scale(lo.powf(params.scaling_exponent())))
}

/// `f_{p,H}(1, 1)` by 2-D quadrature alone, independent of the Gamma-function closed form.
///
/// Uses `f(1,1) = 2 ∫_0^1 x^p ∫_0^x y^p (x - y)^{2H-2} dy dx`.
pub fn f11_by_quadrature(params: PHParams) -> Result<QuadratureResult> {
    params.validate()?;
    let PHParams { p, .. } = params;
    let beta = params.beta();
    let inv_beta = 1.0 / beta;
    let kappa = params.scaling_exponent();

    // h(x) = ∫_0^x y^p (x-y)^{2H-2} dy
    let inner = |x: f64| -> f64 {
        let half = 0.5 * x;
        let near_zero = integrate(
            |v: f64| (x - v.powf(1.0 / (p + 1.0))).powf(2.0 * params.h - 2.0) / (p + 1.0),
            0.0,
            half.powf(p + 1.0),
            0.0,
            INNER_REL_TOL,
            MAX_SUBDIVISIONS,
        );
        let near_diag = integrate(
            |u: f64| (x - u.powf(inv_beta)).powf(p) * inv_beta,
            0.0,
            half.powf(beta),
            0.0,
            INNER_REL_TOL,
            MAX_SUBDIVISIONS,
        );
        match (near_zero, near_diag) {
            (Ok(a), Ok(b)) => a.value + b.value,
            _ => f64::NAN,
        }
    };
    // x = z^{1/κ} absorbs the x^{2p+2H-1} growth of x^p h(x)
    let outer = integrate(
        |z: f64| {
            if z <= 0.0 {
                return 0.0;
            }
            let x = z.powf(1.0 / kappa);
            x.powf(p + 1.0 - kappa) * inner(x) / kappa
        },
        0.0,
        1.0,
        0.0,
        OUTER_REL_TOL,
        MAX_SUBDIVISIONS,
    )?;
    if !outer.value.is_finite() {
        return Err(Error::QuadratureDiverged { subdivisions: outer.subdivisions, error: f64::INFINITY });
    }
    Ok(outer.scale(2.0))
}

/// Stationary correlation `C_{p,H}(τ) = e^{-τ(p+H)} f_{p,H}(1, e^τ) / f_{p,H}(1, 1)`.
///
/// Holds the unit-square value and the quadrature up to [`SERIES_SWITCH`], so
/// repeated evaluation only pays for the inner range below the switch.
#[derive(Debug, Clone)]
pub struct CphCorrelation {
    params: PHParams,
    f11: f64,
    near: QuadratureResult,
}

impl CphCorrelation {
    pub fn new(params: PHParams) -> Result<Self> {
        params.validate()?;
        let f11 = selberg_f11(params)?;
        let near = off_square_quadrature(params, SERIES_SWITCH)?;
        Ok(CphCorrelation { params, f11, near })
    }

    pub fn params(&self) -> PHParams {
        self.params
    }

    /// `f_{p,H}(1, c)`.
    pub fn f_one(&self, c: f64) -> Result<QuadratureResult> {
        f_one(self.params, self.f11, c, Some(&self.near))
    }

    pub fn try_at(&self, tau: f64) -> Result<f64> {
        if !(tau >= 0.0) {
            return Err(Error::Domain(format!("C_pH needs tau >= 0, got {tau}")));
        }
        if tau > MAX_TAU {
            return Err(Error::Domain(format!("C_pH evaluated beyond tau = {MAX_TAU}")));
        }
        if tau == 0.0 {
            return Ok(1.0);
        }
        let f = self.f_one(tau.exp())?;
        Ok((-tau * (self.params.p + self.params.h)).exp() * f.value / self.f11)
    }
}

impl Correlation for CphCorrelation {
    fn at(&self, tau: f64) -> f64 {
        self.try_at(tau.abs()).unwrap_or(f64::NAN)
    }

    fn label(&self) -> String {
        format!("cph:p={},H={}", self.params.p, self.params.h)
    }

    fn integrability(&self) -> Option<Integrability> {
        Some(Integrability::Integrable)
    }
}

/// `C_{p,H}(τ)`.
pub fn c_ph(params: PHParams, tau: f64) -> Result<f64> {
    if tau == 0.0 {
        params.validate()?;
        return Ok(1.0);
    }
    CphCorrelation::new(params)?.try_at(tau)
}

/// Bracket for `C_{p,H}(τ)` from the elementary bounds on `f_{p,H}(1, b)`:
///
/// `f(1,1) + ψ_{p+2H-2}(b)/(p+1) ≤ f(1,b) ≤ f(1,N) + (1-1/N)^{2H-2} ψ_{p+2H-2}(b)/(p+1)`
/// for `b = e^τ ≥ N ≥ 1`, each divided through as in the definition of `C_{p,H}`.
pub fn c_ph_bounds(params: PHParams, tau: f64, n: f64) -> Result<(f64, f64)> {
    params.validate()?;
    if !(tau >= 0.0) || tau > MAX_TAU {
        return Err(Error::Domain(format!("tau out of range: {tau}")));
    }
    let b = tau.exp();
    if !(n >= 1.0) || n > b * (1.0 + 1e-12) {
        return Err(Error::Domain(format!("need 1 <= N <= e^tau = {b}, got N = {n}")));
    }
    let PHParams { p, h } = params;
    let f11 = selberg_f11(params)?;
    let psi_b = psi_unchecked(p + 2.0 * h - 2.0, b);
    let damp = (-tau * (p + h)).exp();
    let lower = damp * (f11 + psi_b / (p + 1.0)) / f11;
    let far = if psi_b == 0.0 {
        0.0
    } else if n <= 1.0 {
        f64::INFINITY
    } else {
        (1.0 - 1.0 / n).powf(2.0 * h - 2.0) * psi_b / (p + 1.0)
    };
    let f_n = if n <= 1.0 { f11 } else { f_one(params, f11, n, None)?.value };
    let upper = damp * (f_n + far) / f11;
    Ok((lower, upper))
}

/// `max(τ e^{-τ(p+H)}, e^{-τ(1-H)})`, the decay profile of `C_{p,H}`.
pub fn tail_profile(params: PHParams, tau: f64) -> f64 {
    let PHParams { p, h } = params;
    (tau * (-tau * (p + h)).exp()).max((-tau * (1.0 - h)).exp())
}

/// A constant `M` with `C_{p,H}(τ) ≤ M · max(τ e^{-τ(p+H)}, e^{-τ(1-H)})` for all `τ ≥ 0`,
/// assembled from the upper bound on `f_{p,H}(1, b)` with `N = 2`.
pub fn c_ph_envelope_constant(params: PHParams) -> Result<f64> {
    params.validate()?;
    let PHParams { p, h } = params;
    let f11 = selberg_f11(params)?;
    let f12 = f_one(params, f11, 2.0, None)?.value;
    // τ < ln 2: C ≤ 1 and the profile is at least 2^{-(1-H)}
    let short = 2f64.powf(1.0 - h);
    // e^{-τ(p+H)} ≤ e^{1-H} · profile
    let k1 = (1.0 - h).exp();
    // e^{-τ(p+H)} ψ_{p+2H-2}(e^τ) ≤ k2 · profile
    let growth = p + 2.0 * h - 1.0;
    let k2 = if growth > 0.0 { 1.0 / growth } else { 1.0 };
    let long = k1 * f12 / f11 + 2f64.powf(2.0 - 2.0 * h) * k2 / ((p + 1.0) * f11);
    Ok(short.max(long))
}

/// Discrete correlation `D_{α,ρ}(τ) = Σ_{i,j≥0} e^{-(i+j)α} ρ(i-j-τ) / Σ_{i,j≥0} e^{-(i+j)α} ρ(i-j)`.
///
/// Grouping the double series by `d = i - j` leaves single sums
/// `Σ_d e^{-|d|α} ρ(|d - τ|)` (the common factor `1/(1 - e^{-2α})` cancels),
/// truncated at `|d| ≤ M` with a geometric tail certificate.
#[derive(Debug, Clone)]
pub struct DAlphaCorrelation {
    alpha: f64,
    kernel: CorrelationKernel,
    denominator: f64,
}

/// Relative accuracy certified for each truncated series.
pub const D_ALPHA_TAIL_TOL: f64 = 1e-10;

impl DAlphaCorrelation {
    pub fn new(alpha: f64, kernel: CorrelationKernel) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
        }
        if !kernel.classify_summability()?.class.is_summable() {
            return Err(Error::WrongTailClass { expected: "summable" });
        }
        let mut d = DAlphaCorrelation { alpha, kernel, denominator: 1.0 };
        d.denominator = d.series(0);
        Ok(d)
    }

    /// Truncation index for lag `tau` and the bound on the neglected tail.
    pub fn truncation(&self, tau: usize) -> (usize, f64) {
        let a = self.alpha;
        let m = (tau as f64 + (2.0 / (D_ALPHA_TAIL_TOL * (1.0 - (-a).exp()))).ln() / a).ceil() as usize;
        let bound = 2.0 * (-(m as f64 + 1.0) * a).exp() / (1.0 - (-a).exp());
        (m, bound)
    }

    fn series(&self, tau: usize) -> f64 {
        let (m, _) = self.truncation(tau);
        let t = tau as i64;
        let mut sum = 0.0;
        for d in (-(m as i64)..=(m as i64)).rev() {
            sum += (-(d.unsigned_abs() as f64) * self.alpha).exp() * self.kernel.at_signed(d - t);
        }
        sum
    }

    pub fn value(&self, tau: usize) -> f64 {
        if tau == 0 {
            return 1.0;
        }
        self.series(tau) / self.denominator
    }
}

impl Correlation for DAlphaCorrelation {
    fn at(&self, tau: f64) -> f64 {
        self.value(tau.abs().round() as usize)
    }

    fn label(&self) -> String {
        format!("d-alpha:alpha={},rho={}", self.alpha, self.kernel)
    }

    fn integrability(&self) -> Option<Integrability> {
        Some(Integrability::Integrable)
    }
}

/// `D_{α,ρ}(τ)`.
pub fn d_alpha_rho(alpha: f64, kernel: &CorrelationKernel, tau: usize) -> Result<f64> {
    Ok(DAlphaCorrelation::new(alpha, kernel.clone())?.value(tau))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    /// `f_{0,H}(1, c)` integrated by hand: `(1 + c^{2H} - (c-1)^{2H}) / (2H(2H-1))`.
    fn f0_closed(h: f64, c: f64) -> f64 {
        (1.0 + c.powf(2.0 * h) - (c - 1.0).powf(2.0 * h)) / (2.0 * h * (2.0 * h - 1.0))
    }

    /// Midpoint oracle for `f_{p,H}(1, c)`: weights frozen at cell centres,
    /// `|x-y|^{2H-2}` integrated exactly over each cell.
    fn cell_oracle(p: f64, h: f64, c: f64, cells_per_unit: usize) -> f64 {
        let step = 1.0 / cells_per_unit as f64;
        let nx = cells_per_unit;
        let ny = (c * cells_per_unit as f64).round() as usize;
        let g = |z: f64| z.abs().powf(2.0 * h) / (2.0 * h * (2.0 * h - 1.0));
        let mut total = 0.0;
        for i in 0..nx {
            let (x0, x1) = (i as f64 * step, (i + 1) as f64 * step);
            let wx = (0.5 * (x0 + x1)).powf(p);
            for j in 0..ny {
                let (y0, y1) = (j as f64 * step, (j + 1) as f64 * step);
                let wy = (0.5 * (y0 + y1)).powf(p);
                let cell = g(x1 - y0) - g(x0 - y0) - g(x1 - y1) + g(x0 - y1);
                total += wx * wy * cell;
            }
        }
        total
    }

    #[test]
    fn psi_examples() {
        assert!((psi(0.0, E).unwrap() - (E - 1.0)).abs() < 1e-14);
        assert!((psi(-1.0, E).unwrap() - 1.0).abs() < 1e-14);
        assert!((psi(1.0, 2.0).unwrap() - 1.5).abs() < 1e-14);
        assert!(psi(0.5, 0.5).is_err());
        // both branches agree with the expansion ln x (1 + d ln x / 2) near α = -1
        for &x in &[1.5, 3.0, 50.0] {
            let l = f64::ln(x);
            for &d in &[1e-9, -1e-9, 5e-9, 2e-8, -3e-8] {
                let expect = l * (1.0 + d * l / 2.0);
                assert!((psi(-1.0 + d, x).unwrap() - expect).abs() < 1e-12 * l, "x={x} d={d}");
            }
        }
    }

    #[test]
    fn selberg_examples() {
        let v = selberg_f11(PHParams::new(0.0, 0.75).unwrap()).unwrap();
        assert!(rel(v, 8.0 / 3.0) < 1e-12);
        let v = selberg_f11(PHParams::new(1.0, 0.75).unwrap()).unwrap();
        assert!(rel(v, 16.0 / 21.0) < 1e-12);
        for k in 0..10 {
            let h = 0.52 + 0.045 * k as f64;
            let v = selberg_f11(PHParams { p: 0.0, h }).unwrap();
            assert!(rel(v, 1.0 / (h * (2.0 * h - 1.0))) < 1e-12);
        }
        assert!(PHParams::new(-0.8, 0.7).is_err());
        assert!(PHParams::new(0.0, 1.0).is_err());
    }

    #[test]
    fn f_matches_closed_form_for_p_zero() {
        for &h in &[0.55, 0.7, 0.9] {
            let params = PHParams::new(0.0, h).unwrap();
            for &c in &[1.0, 1.3, 2.0, 3.99, 4.0, 7.5, 100.0, 1e7] {
                let v = f_ph(params, 1.0, c).unwrap();
                assert!(rel(v.value, f0_closed(h, c)) < 1e-8, "H={h} c={c}: {} vs {}", v.value, f0_closed(h, c));
            }
        }
    }

    #[test]
    fn f_matches_cell_oracle() {
        for &(p, h, c) in &[(0.5, 0.7, 2.0), (1.0, 0.75, 3.0), (-0.25, 0.8, 1.5), (2.0, 0.6, 6.0)] {
            let params = PHParams::new(p, h).unwrap();
            let v = f_ph(params, 1.0, c).unwrap().value;
            let oracle = cell_oracle(p, h, c, 400);
            assert!(rel(v, oracle) < 5e-3, "p={p} H={h} c={c}: {v} vs {oracle}");
        }
    }

    #[test]
    fn f_symmetry_and_scaling() {
        let params = PHParams::new(0.5, 0.7).unwrap();
        let ab = f_ph(params, 1.0, 3.0).unwrap().value;
        let ba = f_ph(params, 3.0, 1.0).unwrap().value;
        assert!(rel(ab, ba) < 1e-12);
        let f22 = f_ph(params, 2.0, 2.0).unwrap().value;
        let f11 = f_ph(params, 1.0, 1.0).unwrap().value;
        assert!(rel(f22, 2f64.powf(2.4) * f11) < 1e-12);
        assert!(f_ph(params, 0.0, 1.0).is_err());
    }

    #[test]
    fn square_quadrature_matches_selberg() {
        let params = PHParams::new(0.0, 0.75).unwrap();
        let q = f11_by_quadrature(params).unwrap();
        assert!(rel(q.value, 8.0 / 3.0) < 1e-6, "{q:?}");
    }

    #[test]
    fn c_ph_examples() {
        let params = PHParams::new(0.0, 0.75).unwrap();
        assert_eq!(c_ph(params, 0.0).unwrap(), 1.0);
        let v = c_ph(params, 1.0).unwrap();
        assert!(v >= (-0.75f64).exp() && v <= 1.0);
        // brute-force cell sums of the defining integral
        let oracle = (-0.75f64).exp() * cell_oracle(0.0, 0.75, E, 2000) / (8.0 / 3.0);
        assert!(rel(v, oracle) < 1e-3, "{v} vs {oracle}");
        // exponentially time-changed fractional Brownian motion
        let lamperti = 0.5 * ((0.75f64).exp() + (-0.75f64).exp() - (-0.75f64).exp() * (E - 1.0).powf(1.5));
        assert!(rel(v, lamperti) < 1e-9);
    }

    #[test]
    fn c_ph_bound_examples() {
        let params = PHParams::new(0.0, 0.75).unwrap();
        let (lo, hi) = c_ph_bounds(params, 0.0, 1.0).unwrap();
        assert!((lo - 1.0).abs() < 1e-14 && (hi - 1.0).abs() < 1e-14);
        let (lo, hi) = c_ph_bounds(params, 2.0, 2.0).unwrap();
        let c = c_ph(params, 2.0).unwrap();
        assert!(lo <= c && c <= hi, "{lo} {c} {hi}");
        let oracle = (-1.5f64).exp() * cell_oracle(0.0, 0.75, 2f64.exp(), 500) / (8.0 / 3.0);
        assert!(lo <= oracle * (1.0 + 2e-3) && oracle <= hi * (1.0 + 2e-3));
        assert!(c_ph_bounds(params, 0.5, 2.0).is_err());
    }

    #[test]
    fn envelope_dominates() {
        for &(p, h) in &[(0.0, 0.75), (0.5, 0.55), (-0.4, 0.9), (3.0, 0.6)] {
            let params = PHParams::new(p, h).unwrap();
            let m = c_ph_envelope_constant(params).unwrap();
            let corr = CphCorrelation::new(params).unwrap();
            for k in 0..=200 {
                let tau = 0.1 * k as f64;
                let c = corr.try_at(tau).unwrap();
                assert!(c <= m * tail_profile(params, tau) + 1e-12, "p={p} H={h} tau={tau}");
                assert!(c >= (-(p + h) * tau).exp() - 1e-10);
            }
        }
    }

    #[test]
    fn d_alpha_examples() {
        let delta = CorrelationKernel::KroneckerDelta;
        assert_eq!(d_alpha_rho(0.7, &delta, 0).unwrap(), 1.0);
        for tau in 0..10 {
            let v = d_alpha_rho(0.5, &delta, tau).unwrap();
            assert!((v - (-0.5 * tau as f64).exp()).abs() < 1e-12);
        }
        let exp1 = CorrelationKernel::Exponential { rate: 1.0 };
        // brute-force truncated double sum
        let brute = |tau: i64| -> f64 {
            let (mut num, mut den) = (0.0, 0.0);
            for i in 0..200i64 {
                for j in 0..200i64 {
                    let w = (-(i + j) as f64 * 0.5).exp();
                    num += w * exp1.at_signed(i - j - tau);
                    den += w * exp1.at_signed(i - j);
                }
            }
            num / den
        };
        let v = d_alpha_rho(0.5, &exp1, 1).unwrap();
        assert!(v > 0.0 && v < 1.0);
        assert!((v - brute(1)).abs() < 1e-12, "{v} vs {}", brute(1));
        assert!((d_alpha_rho(0.5, &exp1, 4).unwrap() - brute(4)).abs() < 1e-12);
        assert!(matches!(
            d_alpha_rho(0.5, &CorrelationKernel::Fgn { hurst: 0.7 }, 1),
            Err(Error::WrongTailClass { .. })
        ));
    }
}
