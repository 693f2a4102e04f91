use std::f64::consts::PI;

use hankel_sigma::discrete::laguerre_convolution_identity;
use hankel_sigma::specfun::{abs_gamma_half, gamma, laguerre};
use num_complex::Complex64;
use proptest::prelude::*;

/// Real parts at least this far from the poles of `Gamma(z) Gamma(1 - z)`.
const POLE_GAP: f64 = 0.05;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn reflection_formula(x in -3.0f64..3.0, y in -5.0f64..5.0) {
        prop_assume!((x - x.round()).abs() > POLE_GAP || y.abs() > POLE_GAP);
        let z = Complex64::new(x, y);
        let lhs = gamma(z).unwrap() * gamma(Complex64::new(1.0, 0.0) - z).unwrap() * (z * PI).sin() / PI;
        prop_assert!((lhs - 1.0).norm() <= 1e-12, "z = {z}: {lhs}");
    }

    #[test]
    fn modulus_on_the_critical_line(xi in -20.0f64..20.0) {
        let want = PI / (PI * xi).cosh();
        let via_gamma = gamma(Complex64::new(0.5, xi)).unwrap().norm_sqr();
        prop_assert!((via_gamma / want - 1.0).abs() <= 1e-12);
        prop_assert!((abs_gamma_half(xi).powi(2) / want - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn laguerre_three_term_recurrence(kappa in 0.0f64..3.0, t in 0.01f64..30.0) {
        for n in 1..100usize {
            let (lm, l, lp) = (laguerre(n - 1, kappa, t).unwrap(), laguerre(n, kappa, t).unwrap(), laguerre(n + 1, kappa, t).unwrap());
            let nf = n as f64;
            let a = (nf + 1.0) * lp;
            let b = (2.0 * nf + kappa + 1.0 - t) * l;
            let c = (nf + kappa) * lm;
            let scale = a.abs().max(b.abs()).max(c.abs()).max(f64::MIN_POSITIVE);
            prop_assert!((a - b + c).abs() <= 1e-10 * scale, "n = {n}");
        }
    }
}

#[test]
fn laguerre_convolution_identity_table() {
    for t in [0.5, 1.0, 5.0] {
        for n in 0..=10 {
            for m in 0..=10 {
                let r = laguerre_convolution_identity(n, m, t).unwrap();
                assert!(r.abs() <= 1e-8, "n = {n}, m = {m}, t = {t}: {r}");
            }
        }
    }
}
