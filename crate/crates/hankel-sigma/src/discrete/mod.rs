//! Discrete representation of Hankel operators in `l^2(Z+)`.
//!
//! With the Laguerre basis `u_n^0`, the kernel `h` corresponds to the Hankel
//! matrix `q_{n+m}` where
//! `q_n = (n+1)^{-1} int h(t) t L_n^1(t) e^{-t/2} dt = int_{-1}^1 eta(mu) mu^n dmu`
//! and `eta(mu) = sigma(lambda)` with `mu = (lambda - 1/2)/(lambda + 1/2)`.

mod asymptotics;
mod identities;
mod moments;
mod sequence;
mod solver;

pub use asymptotics::{asymptotic_q, AsymptoticPrediction, AsymptoticRegime};
pub use identities::{laguerre_convolution_identity, laguerre_derivative_identity, laguerre_shift_identity};
pub use moments::{
    eta_from_sigma, generalized_hilbert_q, hilbert_schmidt_discrete, hilbert_schmidt_kernel, kernel_from_q,
    lambda_of_mu, mu_of_lambda, q_from_eta, q_from_kernel, q_from_sigma, q_hypergeometric, Summation,
};
pub use sequence::{EtaAtom, EtaFunction, EtaStep, MomentSequence};
pub use solver::{moment_solve, MomentSolution, MomentSolveOptions, Route, RouteEstimate};

use thiserror::Error;

use crate::sigma::SigmaError;
use crate::specfun::SpecfunError;
use crate::transforms::TransformError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscreteError {
    /// The moments integral diverges at `t = 0`; for `t^k` this means `k <= -2`.
    #[error("kernel not integrable against t e^{{-t/2}}: {0}")]
    NotIntegrable(String),
    #[error("kernel grows too fast at infinity: {0}")]
    Growing(String),
    #[error("moment sequence is empty")]
    Empty,
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("invalid eta-function: {0}")]
    InvalidEta(String),
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
    #[error(transparent)]
    Sigma(#[from] SigmaError),
    #[error(transparent)]
    Transform(TransformError),
}

impl From<TransformError> for DiscreteError {
    fn from(e: TransformError) -> Self {
        Self::Transform(e)
    }
}
