//! Special functions: complex gamma, Laguerre polynomials and the
//! orthonormal Laguerre functions, Meixner-Pollaczek polynomials and
//! terminating hypergeometric sums.

use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

use crate::quad::CompensatedSum;

/// Complex scalar used across the crate.
pub type ComplexScalar = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecfunError {
    #[error("gamma function pole at z = {re} + {im}i")]
    Pole { re: f64, im: f64 },
    #[error("Pochhammer denominator vanishes at term {term} (c = {c})")]
    PochhammerPole { c: f64, term: usize },
    #[error("degree {n} exceeds the supported limit {limit}")]
    DegreeTooLarge { n: usize, limit: usize },
    #[error("Laguerre parameter kappa = {0} must exceed -1")]
    BadKappa(f64),
    #[error("argument {0} must be nonnegative")]
    NegativeArgument(f64),
    #[error("non-finite argument")]
    NonFinite,
}

pub type Result<T> = std::result::Result<T, SpecfunError>;

const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS_COEFFS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_746,
    -0.491_913_816_097_620_2,
    3.399_464_998_481_189e-5,
    4.652_362_892_704_858e-5,
    -9.837_447_530_487_956e-5,
    1.580_887_032_249_125e-4,
    -2.102_644_417_241_049e-4,
    2.174_396_181_152_126e-4,
    -1.643_181_065_367_639e-4,
    8.441_822_398_385_275e-5,
    -2.619_083_840_158_141e-5,
    3.689_918_265_953_162e-6,
];
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

fn is_pole(re: f64, im: f64) -> bool {
    im == 0.0 && re <= 0.0 && re == re.round()
}

fn lanczos_ln_gamma(z: Complex64) -> Complex64 {
    let zm1 = z - 1.0;
    let mut x = Complex64::new(LANCZOS_COEFFS[0], 0.0);
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        x += *c / (zm1 + i as f64);
    }
    let t = zm1 + LANCZOS_G + 0.5;
    HALF_LN_2PI + (zm1 + 0.5) * t.ln() - t + x.ln()
}

/// `ln sin(pi z)` without overflow for large imaginary parts.
fn ln_sin_pi(z: Complex64) -> Complex64 {
    if z.im < 0.0 {
        return ln_sin_pi(z.conj()).conj();
    }
    // sin(pi z) = (i/2) e^{-i pi z} (1 - e^{2 i pi z}), |e^{2 i pi z}| <= 1
    let i = Complex64::i();
    let reduced = Complex64::new(z.re - 2.0 * (z.re / 2.0).floor(), z.im);
    let e2 = (2.0 * i * PI * reduced).exp();
    Complex64::new(0.5f64.ln(), PI / 2.0) - i * PI * reduced + (1.0 - e2).ln()
}

/// Natural logarithm of the gamma function (some branch; `exp` of the
/// result is the gamma function).
pub fn ln_gamma(z: ComplexScalar) -> Result<ComplexScalar> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(SpecfunError::NonFinite);
    }
    if is_pole(z.re, z.im) {
        return Err(SpecfunError::Pole { re: z.re, im: z.im });
    }
    if z.re < 0.5 {
        let one_minus = Complex64::new(1.0, 0.0) - z;
        Ok(Complex64::new(PI.ln(), 0.0) - ln_sin_pi(z) - lanczos_ln_gamma(one_minus))
    } else {
        Ok(lanczos_ln_gamma(z))
    }
}

/// Euler gamma function on the complex plane.
pub fn gamma(z: ComplexScalar) -> Result<ComplexScalar> {
    if z.im == 0.0 {
        return gamma_real(z.re).map(|v| Complex64::new(v, 0.0));
    }
    Ok(ln_gamma(z)?.exp())
}

/// `ln |Gamma(x)|` and the sign of `Gamma(x)` for real `x`.
pub fn ln_gamma_real(x: f64) -> Result<(f64, f64)> {
    if !x.is_finite() {
        return Err(SpecfunError::NonFinite);
    }
    if is_pole(x, 0.0) {
        return Err(SpecfunError::Pole { re: x, im: 0.0 });
    }
    Ok(ln_gamma_real_signed(x))
}

fn ln_gamma_real_signed(x: f64) -> (f64, f64) {
    if x >= 0.5 {
        (lanczos_ln_gamma_real(x), 1.0)
    } else {
        // reduce the argument of sin to [0, 2) for accuracy
        let r = x - 2.0 * (x / 2.0).floor();
        let s = (PI * r).sin();
        let lg = PI.ln() - s.abs().ln() - lanczos_ln_gamma_real(1.0 - x);
        (lg, s.signum())
    }
}

fn lanczos_ln_gamma_real(x: f64) -> f64 {
    let xm1 = x - 1.0;
    let mut s = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        s += c / (xm1 + i as f64);
    }
    let t = xm1 + LANCZOS_G + 0.5;
    HALF_LN_2PI + (xm1 + 0.5) * t.ln() - t + s.ln()
}

/// `ln |Gamma(x)|` for arguments known to lie off the pole set.
pub(crate) fn ln_gamma_real_unchecked(x: f64) -> f64 {
    ln_gamma_real_signed(x).0
}

/// Real gamma function.
pub fn gamma_real(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(SpecfunError::NonFinite);
    }
    if is_pole(x, 0.0) {
        return Err(SpecfunError::Pole { re: x, im: 0.0 });
    }
    if x == x.round() && x > 0.0 && x <= 171.0 {
        let mut p = 1.0;
        let mut k = 2.0;
        while k < x {
            p *= k;
            k += 1.0;
        }
        return Ok(p);
    }
    let (lg, sign) = ln_gamma_real_signed(x);
    Ok(sign * lg.exp())
}

/// Reciprocal gamma function, zero on the pole set.
pub fn rgamma_real(x: f64) -> f64 {
    if is_pole(x, 0.0) {
        return 0.0;
    }
    let (lg, sign) = ln_gamma_real_signed(x);
    sign * (-lg).exp()
}

/// Modulus of `Gamma(1/2 + i xi)`, equal to `sqrt(pi / cosh(pi xi))`.
pub fn abs_gamma_half(xi: f64) -> f64 {
    // sqrt(pi/cosh(pi xi)) = sqrt(2 pi) e^{-pi|xi|/2} / sqrt(1 + e^{-2 pi |xi|})
    let a = PI * xi.abs();
    (2.0 * PI).sqrt() * (-0.5 * a).exp() / (1.0 + (-2.0 * a).exp()).sqrt()
}

pub const LAGUERRE_MAX_DEGREE: usize = 4096;

/// Generalized Laguerre polynomial `L_n^kappa(t)` by forward recurrence.
pub fn laguerre(n: usize, kappa: f64, t: f64) -> Result<f64> {
    check_laguerre_args(n, kappa, t)?;
    let (m, ls) = laguerre_scaled(n, kappa, t);
    Ok(m * ls.exp())
}

fn check_laguerre_args(n: usize, kappa: f64, t: f64) -> Result<()> {
    if n > LAGUERRE_MAX_DEGREE {
        return Err(SpecfunError::DegreeTooLarge { n, limit: LAGUERRE_MAX_DEGREE });
    }
    if !(kappa > -1.0) {
        return Err(SpecfunError::BadKappa(kappa));
    }
    if !t.is_finite() || !kappa.is_finite() {
        return Err(SpecfunError::NonFinite);
    }
    if t < 0.0 {
        return Err(SpecfunError::NegativeArgument(t));
    }
    Ok(())
}

/// `L_n^kappa(t)` as `(mantissa, log_scale)`; the value is `mantissa * exp(log_scale)`.
pub(crate) fn laguerre_scaled(n: usize, kappa: f64, t: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (p, _, s) = crate::quad::laguerre_pair_scaled(n, kappa, t);
    (p, s)
}

/// Orthonormal Laguerre function
/// `u_n^kappa(t) = sqrt(n!/Gamma(n+1+kappa)) t^{kappa/2} e^{-t/2} L_n^kappa(t)`.
pub fn laguerre_basis_fn(n: usize, kappa: f64, t: f64) -> Result<f64> {
    check_laguerre_args(n, kappa, t)?;
    Ok(laguerre_basis_unchecked(n, kappa, t))
}

pub(crate) fn laguerre_basis_unchecked(n: usize, kappa: f64, t: f64) -> f64 {
    if t == 0.0 {
        if kappa > 0.0 {
            return 0.0;
        }
        if kappa < 0.0 {
            return f64::INFINITY;
        }
    }
    let (m, ls) = laguerre_scaled(n, kappa, t);
    if m == 0.0 {
        return 0.0;
    }
    let ln_norm =
        0.5 * (ln_gamma_real_unchecked(n as f64 + 1.0) - ln_gamma_real_unchecked(n as f64 + 1.0 + kappa));
    let ln_pow = if kappa == 0.0 { 0.0 } else { 0.5 * kappa * t.ln() };
    m.signum() * (ln_norm + ln_pow - 0.5 * t + ls + m.abs().ln()).exp()
}

pub const MEIXNER_POLLACZEK_MAX_DEGREE: usize = 512;

/// Meixner-Pollaczek polynomial
/// `P_n(xi) = i^n sum_m (-1)^m 2^m/m! C(n+1, m+1) (1+i xi)...(m+i xi)`.
///
/// The defining sum is accumulated with compensated summation; when the
/// terms cancel by more than eight digits the value is taken from the
/// three-term recurrence `(n+1) P_{n+1} = 2 xi P_n - (n+1) P_{n-1}` instead.
pub fn meixner_pollaczek(n: usize, xi: f64) -> Result<ComplexScalar> {
    if n > MEIXNER_POLLACZEK_MAX_DEGREE {
        return Err(SpecfunError::DegreeTooLarge { n, limit: MEIXNER_POLLACZEK_MAX_DEGREE });
    }
    if !xi.is_finite() {
        return Err(SpecfunError::NonFinite);
    }
    let (value, largest) = meixner_pollaczek_sum(n, xi);
    if largest > 1e8 * value.norm().max(f64::MIN_POSITIVE) {
        return Ok(Complex64::new(meixner_pollaczek_recurrence(n, xi), 0.0));
    }
    Ok(value)
}

/// Defining sum of the Meixner-Pollaczek polynomial and the largest term
/// magnitude encountered.
pub fn meixner_pollaczek_sum(n: usize, xi: f64) -> (ComplexScalar, f64) {
    let mut re = CompensatedSum::default();
    let mut im = CompensatedSum::default();
    let mut poch = Complex64::new(1.0, 0.0);
    // coefficient (-1)^m 2^m / m! * C(n+1, m+1), built incrementally
    let mut coef = (n + 1) as f64;
    let mut largest: f64 = 0.0;
    for m in 0..=n {
        if m > 0 {
            poch *= Complex64::new(m as f64, xi);
            let mf = m as f64;
            coef *= -2.0 / mf * ((n + 1 - m) as f64) / (mf + 1.0);
        }
        let term = poch * coef;
        largest = largest.max(term.norm());
        re.add(term.re);
        im.add(term.im);
    }
    let sum = Complex64::new(re.value(), im.value());
    (sum * Complex64::i().powu(n as u32), largest)
}

/// Meixner-Pollaczek polynomial by the three-term recurrence (real for real `xi`).
pub fn meixner_pollaczek_recurrence(n: usize, xi: f64) -> f64 {
    let mut p0 = 1.0;
    if n == 0 {
        return p0;
    }
    let mut p1 = 2.0 * xi;
    for j in 1..n {
        let jf = j as f64;
        let p2 = (2.0 * xi * p1 - (jf + 1.0) * p0) / (jf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Terminating Gauss hypergeometric sum `F(-n, b, c; z)` with exactly
/// `n + 1` terms.
pub fn hyp_terminating(n: usize, b: f64, c: f64, z: f64) -> Result<f64> {
    if !b.is_finite() || !c.is_finite() || !z.is_finite() {
        return Err(SpecfunError::NonFinite);
    }
    let mut term = 1.0;
    let mut sum = CompensatedSum::default();
    sum.add(term);
    for m in 0..n {
        let mf = m as f64;
        let denom = (c + mf) * (mf + 1.0);
        if denom == 0.0 {
            return Err(SpecfunError::PochhammerPole { c, term: m + 1 });
        }
        term *= (mf - n as f64) * (b + mf) / denom * z;
        sum.add(term);
    }
    Ok(sum.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_classical_values() {
        assert_eq!(gamma(Complex64::new(1.0, 0.0)).unwrap(), Complex64::new(1.0, 0.0));
        let g = gamma(Complex64::new(0.5, 0.0)).unwrap();
        assert!((g.re - 1.772_453_850_905_516).abs() < 1e-15);
        assert!((gamma_real(5.0).unwrap() - 24.0).abs() == 0.0);
        assert!((gamma_real(-0.5).unwrap() + 2.0 * PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn gamma_modulus_on_critical_line_matches_oracle() {
        // arbitrary-precision value of |Gamma(1/2 + i)|
        let oracle = 0.520_590_963_616_752;
        let g = gamma(Complex64::new(0.5, 1.0)).unwrap();
        assert!((g.norm() - oracle).abs() < 1e-14 * oracle);
        assert!((abs_gamma_half(1.0) - oracle).abs() < 1e-15);
    }

    #[test]
    fn poles_are_errors() {
        assert!(matches!(gamma(Complex64::new(0.0, 0.0)), Err(SpecfunError::Pole { .. })));
        assert!(matches!(gamma(Complex64::new(-3.0, 0.0)), Err(SpecfunError::Pole { .. })));
        assert!(gamma_real(-2.0).is_err());
        assert_eq!(rgamma_real(-2.0), 0.0);
        assert!(gamma(Complex64::new(-3.0, 1e-3)).is_ok());
    }

    #[test]
    fn large_imaginary_part_stays_finite() {
        let g = gamma(Complex64::new(0.5, 50.0)).unwrap();
        assert!((g.norm() - abs_gamma_half(50.0)).abs() < 1e-12 * abs_gamma_half(50.0));
        let g = gamma(Complex64::new(-2.3, 40.0)).unwrap();
        assert!(g.re.is_finite() && g.im.is_finite());
    }

    #[test]
    fn laguerre_low_degrees() {
        for &t in &[0.0, 0.3, 2.0, 7.5] {
            assert_eq!(laguerre(0, 1.0, t).unwrap(), 1.0);
            assert!((laguerre(1, 1.0, t).unwrap() - (2.0 - t)).abs() < 1e-15);
        }
    }

    #[test]
    fn laguerre_basis_oracle() {
        // arbitrary-precision value of u_10^1(5)
        let oracle = 0.200_736_030_353_812_8;
        let v = laguerre_basis_fn(10, 1.0, 5.0).unwrap();
        assert!((v - oracle).abs() < 1e-14, "{v}");
        for &t in &[0.0, 0.7, 3.0] {
            assert!((laguerre_basis_fn(0, 0.0, t).unwrap() - (-t / 2.0).exp()).abs() < 1e-16);
        }
    }

    #[test]
    fn laguerre_basis_large_degree_is_finite() {
        let v = laguerre_basis_fn(2000, 1.0, 3000.0).unwrap();
        assert!(v.is_finite() && v.abs() < 1.0);
    }

    #[test]
    fn meixner_pollaczek_low_degrees() {
        for &xi in &[-2.0, 0.0, 0.7, 3.0] {
            let p0 = meixner_pollaczek(0, xi).unwrap();
            assert!((p0 - Complex64::new(1.0, 0.0)).norm() < 1e-15);
            let p1 = meixner_pollaczek(1, xi).unwrap();
            assert!((p1 - Complex64::new(2.0 * xi, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn meixner_pollaczek_sum_agrees_with_recurrence() {
        for n in 0..=20 {
            for &xi in &[-1.5, -0.2, 0.4, 2.5] {
                let (s, largest) = meixner_pollaczek_sum(n, xi);
                let r = meixner_pollaczek_recurrence(n, xi);
                assert!(s.im.abs() <= 1e-12 * largest.max(1.0), "n={n} xi={xi} im={}", s.im);
                assert!((s.re - r).abs() <= 1e-12 * largest.max(1.0), "n={n} xi={xi}");
            }
        }
    }

    #[test]
    fn hypergeometric_terminating_cases() {
        assert_eq!(hyp_terminating(7, 1.3, 2.0, 0.0).unwrap(), 1.0);
        assert_eq!(hyp_terminating(0, 1.3, 2.0, 0.7).unwrap(), 1.0);
        // Gamma(2+k) beta^{2+k} F(-n, 2+k, 2; beta) at k=-1, beta=1, n=3 is the Hilbert entry 1/4
        let q3 = gamma_real(1.0).unwrap() * hyp_terminating(3, 1.0, 2.0, 1.0).unwrap();
        assert!((q3 - 0.25).abs() < 1e-15);
        assert!(matches!(hyp_terminating(4, 1.0, -2.0, 0.5), Err(SpecfunError::PochhammerPole { .. })));
        assert!(hyp_terminating(2, 1.0, -2.0, 0.5).is_ok());
    }
}
