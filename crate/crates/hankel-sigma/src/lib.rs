//! Sigma-function calculus for Hankel operators.
//!
//! A Hankel kernel `h(t)` is represented through its sigma-function
//! `sigma(lambda)`, related by `h = L* sigma` where `L` is the Laplace
//! transform. The crate converts between the two sides, predicts eigenvalue
//! sign counts from the singular structure of `sigma`, and checks those
//! predictions on finite sections of the Laguerre-basis matrix `q_{n+m}`.

pub mod quad;
pub mod specfun;
pub mod sigma;
pub mod transforms;
pub mod spectral;
pub mod discrete;
