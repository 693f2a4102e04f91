//! Finite Hankel sections, a Jacobi eigensolver, Gram forms of the main
//! identity `<h, f1* conv f2> = <sigma, (L f1)* L f2>`, and the symbol
//! (pseudo-differential) representation of `H`.

mod gram;
mod pdo;
mod section;

pub use gram::{gram_form_kernel, gram_form_sigma, verify_main_identity, IdentityReport, TestBasis};
pub use pdo::{apply_via_pdo, pdo_form, PDO_BAND};
pub use section::{count_signs, default_tau, eig_sym, HankelSection, Matrix};

use thiserror::Error;

use crate::sigma::SigmaError;
use crate::transforms::TransformError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("matrix is not symmetric (largest asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("non-finite matrix entry")]
    NonFinite,
    #[error("invalid basis: {0}")]
    Basis(String),
    #[error("pairing for entry ({i}, {j}) diverges")]
    Divergent { i: usize, j: usize },
    #[error("unsupported sigma-function: {0}")]
    UnsupportedSigma(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Sigma(#[from] SigmaError),
    #[error(transparent)]
    Transform(TransformError),
}
