use serde::{Deserialize, Serialize};

use crate::specfun;

/// Which end of `(-1, 1)` drives the decay of `q_n` for `t^k`-type kernels
/// `(t + r)^k e^{-alpha t}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AsymptoticRegime {
    /// `alpha > 0`, `r > 0`: faster than any power of `1/n`.
    SuperPolynomial,
    /// `alpha = 0`, `r > 0`: `(-1)^n 4^{k+1} n^k`.
    MinusEnd,
    /// `r = 0`, `alpha > 0`: `Gamma(k+2) / Gamma(-k) n^{-k-2}`.
    PlusEnd,
    /// `alpha = r = 0`: the sum of both.
    BothEnds,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticPrediction {
    pub regime: AsymptoticRegime,
    /// Leading term; `0` in the super-polynomial regime.
    pub value: f64,
}

/// Leading-order behaviour of `q_n` for the kernel `(t + r)^k e^{-alpha t}`.
pub fn asymptotic_q(alpha: f64, r: f64, k: f64, n: usize) -> AsymptoticPrediction {
    let nf = n as f64;
    let minus = || {
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * 4f64.powf(k + 1.0) * nf.powf(k)
    };
    let plus = || specfun::rgamma_real(-k) * specfun::gamma_real(k + 2.0).unwrap_or(f64::NAN) * nf.powf(-k - 2.0);
    let (regime, value) = match (alpha > 0.0, r > 0.0) {
        (true, true) => (AsymptoticRegime::SuperPolynomial, 0.0),
        (false, true) => (AsymptoticRegime::MinusEnd, minus()),
        (true, false) => (AsymptoticRegime::PlusEnd, plus()),
        (false, false) => (AsymptoticRegime::BothEnds, minus() + plus()),
    };
    AsymptoticPrediction { regime, value }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regimes() {
        assert_eq!(asymptotic_q(1.0, 1.0, -0.5, 10).regime, AsymptoticRegime::SuperPolynomial);
        let p = asymptotic_q(1.0, 0.0, -0.5, 100);
        // Gamma(1.5)/Gamma(0.5) = 1/2
        assert!((p.value - 0.5 * 100f64.powf(-1.5)).abs() < 1e-16);
        // k = -1, both ends: 2/n for even n, 0 for odd n
        assert!((asymptotic_q(0.0, 0.0, -1.0, 10).value - 0.2).abs() < 1e-15);
        assert!(asymptotic_q(0.0, 0.0, -1.0, 11).value.abs() < 1e-15);
    }
}
