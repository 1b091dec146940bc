//! Correlation functions of stationary processes indexed by a real lag.

use std::fmt;
use std::sync::Arc;

use crate::kernels::CorrelationKernel;

/// Whether `∫_0^∞ A(t) dt` (or `Σ A(i)` on integer time) is finite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrability {
    Integrable,
    NonIntegrable,
}

/// Nonnegative correlation `A(τ)` of a unit-variance stationary process, `A(0) = 1`.
pub trait Correlation: Send + Sync {
    fn at(&self, tau: f64) -> f64;

    /// Short identifier used in reports.
    fn label(&self) -> String;

    /// Declared tail behaviour, if known.
    fn integrability(&self) -> Option<Integrability> {
        None
    }
}

/// `A(τ) = exp(-α τ)`, the Ornstein–Uhlenbeck correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrnsteinUhlenbeck {
    pub rate: f64,
}

impl Correlation for OrnsteinUhlenbeck {
    fn at(&self, tau: f64) -> f64 {
        (-self.rate * tau.abs()).exp()
    }

    fn label(&self) -> String {
        format!("ou:alpha={}", self.rate)
    }

    fn integrability(&self) -> Option<Integrability> {
        Some(Integrability::Integrable)
    }
}

/// `A(τ) = (1 + τ)^{-β}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    pub exponent: f64,
}

impl Correlation for PowerLaw {
    fn at(&self, tau: f64) -> f64 {
        (1.0 + tau.abs()).powf(-self.exponent)
    }

    fn label(&self) -> String {
        format!("power:beta={}", self.exponent)
    }

    fn integrability(&self) -> Option<Integrability> {
        Some(if self.exponent > 1.0 { Integrability::Integrable } else { Integrability::NonIntegrable })
    }
}

/// A discrete correlation kernel read at integer lags (`τ` is rounded).
#[derive(Debug, Clone, PartialEq)]
pub struct IntegerLag(pub CorrelationKernel);

impl Correlation for IntegerLag {
    fn at(&self, tau: f64) -> f64 {
        self.0.at(tau.abs().round() as usize)
    }

    fn label(&self) -> String {
        self.0.to_string()
    }

    fn integrability(&self) -> Option<Integrability> {
        self.0.classify_summability().ok().map(|c| {
            if c.class.is_summable() {
                Integrability::Integrable
            } else {
                Integrability::NonIntegrable
            }
        })
    }
}

/// An arbitrary closure, optionally with a declared tail.
#[derive(Clone)]
pub struct FnCorrelation {
    pub name: String,
    pub tail: Option<Integrability>,
    func: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl FnCorrelation {
    pub fn new(name: impl Into<String>, tail: Option<Integrability>, func: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        FnCorrelation { name: name.into(), tail, func: Arc::new(func) }
    }
}

impl fmt::Debug for FnCorrelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnCorrelation").field("name", &self.name).field("tail", &self.tail).finish()
    }
}

impl Correlation for FnCorrelation {
    fn at(&self, tau: f64) -> f64 {
        (self.func)(tau)
    }

    fn label(&self) -> String {
        self.name.clone()
    }

    fn integrability(&self) -> Option<Integrability> {
        self.tail
    }
}

impl<C: Correlation + ?Sized> Correlation for &C {
    fn at(&self, tau: f64) -> f64 {
        (**self).at(tau)
    }
    fn label(&self) -> String {
        (**self).label()
    }
    fn integrability(&self) -> Option<Integrability> {
        (**self).integrability()
    }
}

impl<C: Correlation + ?Sized> Correlation for Arc<C> {
    fn at(&self, tau: f64) -> f64 {
        (**self).at(tau)
    }
    fn label(&self) -> String {
        (**self).label()
    }
    fn integrability(&self) -> Option<Integrability> {
        (**self).integrability()
    }
}
