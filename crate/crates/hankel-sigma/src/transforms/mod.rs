//! Laplace and Mellin transforms on logarithmic grids.
//!
//! With `(U f)(x) = e^{x/2} f(e^x)` and the unitary Fourier transform `Phi`,
//! the Mellin transform is `M = Phi U`, and the Laplace transform factors as
//! `L = M^{-1} J Gamma_{1/2} M`, where `J` reflects `xi -> -xi` and
//! `Gamma_gamma` multiplies by `Gamma(gamma + i xi)`.

mod grid;
mod io;
mod laplace;
mod mellin;
mod test_function;

pub use grid::{Grid, GridFunction, LinearGrid, LogGrid};
pub use io::{grid_function_from_csv, grid_function_to_csv};
pub use laplace::{laplace_convolution, laplace_direct, laplace_direct_derivatives, LaplaceTable};
pub use mellin::{
    inverse_laplace, inverse_mellin, laplace_via_mellin, laplace_via_mellin_gamma, mellin, sigma_from_kernel,
    InverseLaplace, MellinTransform, Regularization, SigmaRecovery, SigmaRecoveryOptions, Transformed,
    TruncationWarning, TAIL_WARNING_THRESHOLD,
};
pub use test_function::{TestFunction, DEFAULT_DERIVATIVE_BUDGET};
pub(crate) use mellin::{fourier_forward, fourier_inverse, reflect};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("grid functions live on different grids")]
    GridMismatch,
    #[error("operation needs samples on a logarithmic grid")]
    NotLogGrid,
    #[error("non-finite sample")]
    NonFinite,
    #[error("invalid test function: {0}")]
    InvalidTestFunction(String),
    #[error("derivative of order {requested} requested, budget is {budget}")]
    DerivativeBudget { requested: usize, budget: usize },
    #[error(
        "cutoff {cutoff} amplifies noise by {amplification:.3e}, above 1/eps = {limit:.3e}; lower the cutoff"
    )]
    AmplificationTooLarge { cutoff: f64, amplification: f64, limit: f64 },
    #[error("invalid regularization: {0}")]
    InvalidRegularization(String),
    #[error("kernel outside the method's scope: {0}")]
    UnsupportedKernel(String),
    #[error("malformed CSV: {0}")]
    Csv(String),
}
