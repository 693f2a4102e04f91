//! Residuals of Laguerre-function identities behind the discrete representation.

use crate::quad::{adaptive, GaussLegendre};
use crate::specfun::{self, SpecfunError};

/// `u_{n+1}^0(t) - u_n^0(t) + e^{-t/2} int_0^t e^{s/2} u_n^0(s) ds`.
pub fn laguerre_shift_identity(n: usize, t: f64) -> Result<f64, SpecfunError> {
    let lhs = specfun::laguerre_basis_fn(n + 1, 0.0, t)?;
    let un = specfun::laguerre_basis_fn(n, 0.0, t)?;
    // e^{s/2} u_n^0(s) = L_n^0(s)
    let integral = adaptive(|s| specfun::laguerre(n, 0.0, s).unwrap_or(f64::NAN), 0.0, t, 1e-15, 1e-14).value;
    Ok(lhs - (un - (-0.5 * t).exp() * integral))
}

/// `d(L_n^0 - L_{n+1}^0)/dt - L_n^0` at `t`, with `d L_m^0 / dt = -L_{m-1}^1`.
pub fn laguerre_derivative_identity(n: usize, t: f64) -> Result<f64, SpecfunError> {
    let d_n = if n == 0 { 0.0 } else { -specfun::laguerre(n - 1, 1.0, t)? };
    let d_n1 = -specfun::laguerre(n, 1.0, t)?;
    Ok(d_n - d_n1 - specfun::laguerre(n, 0.0, t)?)
}

/// `int_0^t L_m^0(s) L_n^0(t - s) ds - t L_{n+m}^1(t) / (n + m + 1)`.
pub fn laguerre_convolution_identity(n: usize, m: usize, t: f64) -> Result<f64, SpecfunError> {
    specfun::laguerre(n + m, 1.0, t)?;
    // the integrand is a polynomial of degree n + m
    let rule = GaussLegendre::new((n + m) / 2 + 2);
    let lhs = rule.integrate(
        |s| specfun::laguerre(m, 0.0, s).unwrap_or(f64::NAN) * specfun::laguerre(n, 0.0, (t - s).max(0.0)).unwrap_or(f64::NAN),
        0.0,
        t,
    );
    Ok(lhs - t * specfun::laguerre(n + m, 1.0, t)? / (n + m + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_identity_at_zero() {
        assert_eq!(laguerre_shift_identity(0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn identities_hold_on_a_small_table() {
        for n in 0..=20 {
            for t in [0.5, 1.0, 5.0] {
                assert!(laguerre_shift_identity(n, t).unwrap().abs() < 1e-9);
                assert!(laguerre_derivative_identity(n, t).unwrap().abs() < 1e-9);
                assert!(laguerre_convolution_identity(n, 20 - n, t).unwrap().abs() < 1e-9);
            }
        }
    }
}
