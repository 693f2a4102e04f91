//! Sigma-functions of Hankel kernels.
//!
//! A kernel `h` and its sigma-function are linked by `h = L* sigma`; the
//! quasi-Carleman kernel `(t + r)^k e^{-alpha t}` has the sigma-function
//! `Gamma(-k)^{-1} (lambda - alpha)_+^{-k-1} e^{-r(lambda - alpha)}`,
//! read as a finite-part distribution for `k > 0` and as a derivative of
//! the delta function for `k` in `Z+`.

mod counts;
mod diagnostics;
mod distribution;
mod kernel;

pub use counts::{predicted_counts, Count, PredictionOutcome, SpectralPrediction, DOMINANCE_SAMPLES};
pub use diagnostics::{positivity_check, symbol_from_sigma, widom_bounded, WidomReport};
pub use distribution::{
    pair, pair_atom, quasi_carleman_sigma, shift_damp, sigma_of_kernel, LambdaTest, SigmaAtom, SigmaDistribution,
    StieltjesDifference,
};
pub use kernel::{KernelSpec, QuasiCarlemanTerm, TabulatedKernel};
pub(crate) use distribution::is_nonneg_integer;

use thiserror::Error;

use crate::transforms::TransformError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SigmaError {
    #[error("test function supports derivatives up to order {budget}, pairing needs {requested}")]
    DerivativeBudget { requested: usize, budget: usize },
    #[error("invalid atom: {0}")]
    InvalidAtom(String),
    #[error("operation needs a positive measure (regular >= 0, k < 0 powers, point masses)")]
    NotMeasure,
    #[error("sigma must be supported in [0, inf)")]
    NegativeSupport,
    #[error("sigma JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Transform(TransformError),
}
