//! Symbolic and tabulated Hankel kernels `h(t)`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// One quasi-Carleman term `coeff * (t + r)^k * exp(-alpha t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuasiCarlemanTerm {
    pub coeff: f64,
    pub alpha: f64,
    pub r: f64,
    pub k: f64,
}

impl QuasiCarlemanTerm {
    pub fn new(coeff: f64, alpha: f64, r: f64, k: f64) -> Self {
        Self { coeff, alpha, r, k }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeff * (t + self.r).powf(self.k) * (-self.alpha * t).exp()
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeff * (z + self.r).powf(self.k) * (-self.alpha * z).exp()
    }
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type ComplexFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// Kernel given by a callable, with the asymptotic data the numerical
/// routines need.
#[derive(Clone)]
pub struct TabulatedKernel {
    name: String,
    eval: RealFn,
    eval_complex: Option<ComplexFn>,
    /// `h(t) ~ t^{singular_exponent}` as `t -> 0`.
    pub singular_exponent: f64,
    /// `h(t) ~ t^{tail_exponent} exp(-decay_rate t)` as `t -> inf`.
    pub decay_rate: f64,
    pub tail_exponent: f64,
    /// Kernels growing faster than any exponential have sigma-functions
    /// supported on the whole line.
    pub growing: bool,
}

impl TabulatedKernel {
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        singular_exponent: f64,
        decay_rate: f64,
        tail_exponent: f64,
    ) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
            eval_complex: None,
            singular_exponent,
            decay_rate,
            tail_exponent,
            growing: false,
        }
    }

    /// Attaches an analytic continuation, required for growing kernels.
    pub fn with_complex(mut self, f: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static) -> Self {
        self.eval_complex = Some(Arc::new(f));
        self
    }

    pub fn growing(mut self) -> Self {
        self.growing = true;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for TabulatedKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TabulatedKernel")
            .field("name", &self.name)
            .field("singular_exponent", &self.singular_exponent)
            .field("decay_rate", &self.decay_rate)
            .field("tail_exponent", &self.tail_exponent)
            .field("growing", &self.growing)
            .finish()
    }
}

/// A Hankel kernel: a finite sum of quasi-Carleman terms or a tabulated callable.
#[derive(Debug, Clone)]
pub enum KernelSpec {
    QuasiCarleman(Vec<QuasiCarlemanTerm>),
    Tabulated(TabulatedKernel),
}

impl KernelSpec {
    pub fn quasi_carleman(alpha: f64, r: f64, k: f64) -> Self {
        Self::QuasiCarleman(vec![QuasiCarlemanTerm::new(1.0, alpha, r, k)])
    }

    /// `h(t) = 1/t`.
    pub fn carleman() -> Self {
        Self::quasi_carleman(0.0, 0.0, -1.0)
    }

    /// `h(t) = exp(t^2)`, whose sigma-function is a Gaussian on the whole line.
    pub fn exp_square() -> Self {
        Self::Tabulated(
            TabulatedKernel::new("exp_square", |t| (t * t).exp(), 0.0, 0.0, 0.0)
                .with_complex(|z| (z * z).exp())
                .growing(),
        )
    }

    /// `h(t) = (exp(-a t) - exp(-b t)) / t`, the kernel of the indicator of `[a, b]`.
    pub fn interval_indicator(a: f64, b: f64) -> Self {
        Self::QuasiCarleman(vec![
            QuasiCarlemanTerm::new(1.0, a, 0.0, -1.0),
            QuasiCarlemanTerm::new(-1.0, b, 0.0, -1.0),
        ])
    }

    pub fn zero() -> Self {
        Self::QuasiCarleman(Vec::new())
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::QuasiCarleman(terms) => terms.iter().map(|term| term.eval(t)).sum(),
            Self::Tabulated(tab) => (tab.eval)(t),
        }
    }

    /// Analytic continuation, if known.
    pub fn eval_complex(&self, z: Complex64) -> Option<Complex64> {
        match self {
            Self::QuasiCarleman(terms) => Some(terms.iter().map(|term| term.eval_complex(z)).sum()),
            Self::Tabulated(tab) => tab.eval_complex.as_ref().map(|f| f(z)),
        }
    }

    pub fn is_growing(&self) -> bool {
        match self {
            Self::QuasiCarleman(_) => false,
            Self::Tabulated(tab) => tab.growing,
        }
    }

    /// Exponent `s` with `h(t) ~ t^s` as `t -> 0` (0 for kernels bounded at 0).
    pub fn singular_exponent(&self) -> f64 {
        match self {
            Self::QuasiCarleman(terms) => terms
                .iter()
                .filter(|t| t.r == 0.0 && t.coeff != 0.0)
                .map(|t| t.k)
                .fold(0.0, f64::min),
            Self::Tabulated(tab) => tab.singular_exponent,
        }
    }

    /// Slowest exponential decay rate among the terms.
    pub fn decay_rate(&self) -> f64 {
        match self {
            Self::QuasiCarleman(terms) => terms
                .iter()
                .filter(|t| t.coeff != 0.0)
                .map(|t| t.alpha)
                .fold(f64::INFINITY, f64::min),
            Self::Tabulated(tab) => tab.decay_rate,
        }
    }

    /// Power-law exponent at infinity among the slowest-decaying terms.
    pub fn tail_exponent(&self) -> f64 {
        match self {
            Self::QuasiCarleman(terms) => {
                let rate = self.decay_rate();
                terms
                    .iter()
                    .filter(|t| t.coeff != 0.0 && t.alpha == rate)
                    .map(|t| t.k)
                    .fold(f64::NEG_INFINITY, f64::max)
            }
            Self::Tabulated(tab) => tab.tail_exponent,
        }
    }

    pub fn terms(&self) -> Option<&[QuasiCarlemanTerm]> {
        match self {
            Self::QuasiCarleman(terms) => Some(terms),
            Self::Tabulated(_) => None,
        }
    }
}
