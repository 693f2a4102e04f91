use serde::{Deserialize, Serialize};

use super::distribution::{pair, SigmaAtom, SigmaDistribution, StieltjesDifference};
use super::SigmaError;
use crate::quad::adaptive;

/// True if every atom is a nonnegative measure: regular densities
/// `>= -tol`, `(lambda-alpha)_+^{-k-1}` with `k < 0` and positive
/// coefficient, and point masses with positive weight.
pub fn positivity_check(sigma: &SigmaDistribution) -> bool {
    sigma.atoms.iter().all(|atom| match atom {
        SigmaAtom::Regular { values, .. } => {
            let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            values.iter().all(|v| *v >= -1e-12 * scale)
        }
        SigmaAtom::FinitePart { k, coeff, .. } => *coeff == 0.0 || (*k < 0.0 && *coeff > 0.0),
        SigmaAtom::DeltaDerivative { order, coeff, .. } => *coeff == 0.0 || (*order == 0 && *coeff > 0.0),
    })
}

/// Result of the boundedness test `M([0, lambda)) = O(lambda)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WidomReport {
    pub bounded: bool,
    /// `max M([0, lambda)) / lambda` over the sampled range.
    pub constant: f64,
    /// Log-log slope of the ratio over the first and last sampled decade.
    pub slope_low: f64,
    pub slope_high: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

const SAMPLES_PER_DECADE: usize = 100;
/// A ratio growing faster than `lambda^{0.05}` at either end counts as unbounded.
const SLOPE_LIMIT: f64 = 0.05;

/// `int_0^u s^a e^{-r s} ds` for `a > -1`.
fn power_exp_integral(a: f64, r: f64, u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    let b = a + 1.0;
    if r == 0.0 {
        return u.powf(b) / b;
    }
    adaptive(|v| (-r * v.powf(1.0 / b)).exp(), 0.0, u.powf(b), 1e-300, 1e-13).value / b
}

/// Cumulative measure `M([0, lambda))` of one measure atom.
fn cumulative(atom: &SigmaAtom, lambdas: &[f64]) -> Vec<f64> {
    match atom {
        SigmaAtom::Regular { grid, values, alpha, r } => {
            let pts = grid.points();
            let wts = grid.weights();
            // trapezoid partial sums at the grid points
            let mut acc = Vec::with_capacity(pts.len());
            let mut s = 0.0;
            for ((p, w), v) in pts.iter().zip(&wts).zip(values) {
                s += w * v * (-r * p).exp();
                acc.push(s);
            }
            lambdas
                .iter()
                .map(|l| {
                    let x = l - alpha;
                    let idx = pts.partition_point(|p| *p < x);
                    if idx == 0 {
                        0.0
                    } else {
                        acc[idx - 1]
                    }
                })
                .collect()
        }
        SigmaAtom::FinitePart { alpha, k, r, coeff } => {
            lambdas.iter().map(|l| coeff * power_exp_integral(-k - 1.0, *r, l - alpha)).collect()
        }
        SigmaAtom::DeltaDerivative { alpha, coeff, .. } => {
            lambdas.iter().map(|l| if *l > *alpha { *coeff } else { 0.0 }).collect()
        }
    }
}

/// Numerical check of `sup M([0, lambda)) / lambda < inf` for a positive
/// measure on `[0, inf)`.
pub fn widom_bounded(sigma: &SigmaDistribution) -> Result<WidomReport, SigmaError> {
    for atom in &sigma.atoms {
        let measure = match atom {
            SigmaAtom::Regular { .. } => true,
            SigmaAtom::FinitePart { k, coeff, .. } => *k < 0.0 && *coeff >= 0.0,
            SigmaAtom::DeltaDerivative { order, coeff, .. } => *order == 0 && *coeff >= 0.0,
        };
        if !measure || atom.support_start() < 0.0 {
            return Err(SigmaError::NotMeasure);
        }
    }
    if !positivity_check(sigma) {
        return Err(SigmaError::NotMeasure);
    }
    // sampled range: where regular atoms are known
    let (mut lo, mut hi) = (1e-6f64, 1e6f64);
    for atom in &sigma.atoms {
        if let SigmaAtom::Regular { grid, alpha, .. } = atom {
            let pts = grid.points();
            lo = lo.max(alpha + pts[0]);
            hi = hi.min(alpha + pts[pts.len() - 1]);
        }
    }
    if !(lo > 0.0 && hi > 10.0 * lo) {
        return Err(SigmaError::InvalidAtom("regular atoms cover less than a decade of lambda".into()));
    }
    let decades = (hi / lo).log10();
    let n = (decades * SAMPLES_PER_DECADE as f64).ceil() as usize + 1;
    let lambdas: Vec<f64> = (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect();
    let mut mass = vec![0.0; n];
    for atom in &sigma.atoms {
        for (m, c) in mass.iter_mut().zip(cumulative(atom, &lambdas)) {
            *m += c;
        }
    }
    let ratio: Vec<f64> = mass.iter().zip(&lambdas).map(|(m, l)| m / l).collect();
    let constant = ratio.iter().copied().fold(0.0, f64::max);
    let slope = |a: usize, b: usize| {
        let (ra, rb) = (ratio[a], ratio[b]);
        if ra <= 0.0 || rb <= 0.0 {
            return 0.0;
        }
        (rb / ra).ln() / (lambdas[b] / lambdas[a]).ln()
    };
    let decade = SAMPLES_PER_DECADE.min(n - 1);
    let slope_low = slope(0, decade);
    let slope_high = slope(n - 1 - decade, n - 1);
    // growth toward lambda -> 0 shows up as a negative slope at the low end
    let bounded = constant.is_finite() && slope_low > -SLOPE_LIMIT && slope_high < SLOPE_LIMIT;
    Ok(WidomReport { bounded, constant, slope_low, slope_high, lambda_min: lo, lambda_max: hi })
}

/// `omega(mu1) - omega(mu2) = <sigma, 1/(lambda+mu1) - 1/(lambda+mu2)>`.
pub fn symbol_from_sigma(sigma: &SigmaDistribution, mu1: f64, mu2: f64) -> Result<f64, SigmaError> {
    if !(mu1 > 0.0 && mu2 > 0.0) {
        return Err(SigmaError::InvalidAtom(format!("symbol needs mu > 0, got {mu1}, {mu2}")));
    }
    if sigma.atoms.iter().any(|a| a.support_start() < 0.0) {
        return Err(SigmaError::NegativeSupport);
    }
    pair(sigma, &StieltjesDifference { mu1, mu2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigma::quasi_carleman_sigma;
    use crate::transforms::{GridFunction, LogGrid};

    #[test]
    fn carleman_symbol_difference() {
        let s = SigmaDistribution::indicator(0.0, f64::INFINITY);
        let v = symbol_from_sigma(&s, 0.5, 3.0).unwrap();
        assert!((v - (3.0f64 / 0.5).ln()).abs() < 1e-10, "{v}");
    }

    #[test]
    fn interval_and_delta_symbols() {
        let (a, b, m1, m2) = (0.5, 2.0, 1.0, 4.0);
        let v = symbol_from_sigma(&SigmaDistribution::indicator(a, b), m1, m2).unwrap();
        let exact = ((b + m1) / (a + m1)).ln() - ((b + m2) / (a + m2)).ln();
        assert!((v - exact).abs() < 1e-10);
        let v = symbol_from_sigma(&SigmaDistribution::delta(a, 1.0), m1, m2).unwrap();
        assert!((v - (1.0 / (a + m1) - 1.0 / (a + m2))).abs() < 1e-15);
    }

    #[test]
    fn widom_cases() {
        let r = widom_bounded(&SigmaDistribution::indicator(0.0, f64::INFINITY)).unwrap();
        assert!(r.bounded);
        assert!((r.constant - 1.0).abs() < 1e-12);
        let grid = LogGrid::default();
        let root = SigmaDistribution::from_regular(&GridFunction::sample_log(grid, f64::sqrt).unwrap());
        assert!(!widom_bounded(&root).unwrap().bounded);
        assert!(widom_bounded(&SigmaDistribution::delta(1.0, 1.0)).unwrap().bounded);
        assert!(matches!(widom_bounded(&quasi_carleman_sigma(1.0, 0.0, 0.5)), Err(SigmaError::NotMeasure)));
    }

    #[test]
    fn positivity() {
        assert!(positivity_check(&quasi_carleman_sigma(1.0, 1.0, -0.5)));
        assert!(!positivity_check(&quasi_carleman_sigma(1.0, 0.0, 0.5)));
        assert!(positivity_check(&SigmaDistribution::delta(1.0, 2.0)));
        assert!(!positivity_check(&quasi_carleman_sigma(1.0, 0.0, 1.0)));
    }
}
