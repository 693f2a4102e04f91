use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::distribution::is_nonneg_integer;
use super::{KernelSpec, QuasiCarlemanTerm};
use crate::specfun;

/// Number of eigenvalues of one sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Count {
    Finite(usize),
    Infinite,
}

impl Count {
    pub fn is_infinite(self) -> bool {
        matches!(self, Count::Infinite)
    }
}

impl fmt::Display for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Count::Finite(n) => write!(f, "{n}"),
            Count::Infinite => f.write_str("infinite"),
        }
    }
}

impl Serialize for Count {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Count::Finite(n) => s.serialize_u64(*n as u64),
            Count::Infinite => s.serialize_str("infinite"),
        }
    }
}

impl<'de> Deserialize<'de> for Count {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(n) => Ok(Count::Finite(n as usize)),
            Raw::S(s) if s == "infinite" => Ok(Count::Infinite),
            Raw::S(s) => Err(serde::de::Error::custom(format!("expected a count or \"infinite\", got {s:?}"))),
        }
    }
}

/// Predicted `(N+, N-)` of a Hankel operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectralPrediction {
    pub n_plus: Count,
    pub n_minus: Count,
}

impl SpectralPrediction {
    fn new(n_plus: Count, n_minus: Count) -> Self {
        Self { n_plus, n_minus }
    }

    fn swapped(self) -> Self {
        Self { n_plus: self.n_minus, n_minus: self.n_plus }
    }
}

/// Outcome of [`predicted_counts`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PredictionOutcome {
    Predicted { prediction: SpectralPrediction, rule: String },
    /// The kernel lies outside every rule's hypotheses.
    NoPrediction { reason: String },
}

impl PredictionOutcome {
    pub fn prediction(&self) -> Option<SpectralPrediction> {
        match self {
            Self::Predicted { prediction, .. } => Some(*prediction),
            Self::NoPrediction { .. } => None,
        }
    }

    fn found(prediction: SpectralPrediction, rule: &str) -> Self {
        Self::Predicted { prediction, rule: rule.to_string() }
    }

    fn none(reason: impl Into<String>) -> Self {
        Self::NoPrediction { reason: reason.into() }
    }
}

/// Samples of the dominance inequality for perturbed single-point kernels.
pub const DOMINANCE_SAMPLES: usize = 4096;

/// Counts for a single term `b (t+r)^k e^{-alpha t}`.
fn single_term(term: &QuasiCarlemanTerm) -> PredictionOutcome {
    let k = term.k;
    let base = if is_nonneg_integer(k) {
        // finite rank k+1
        let kk = k as usize;
        if kk.is_multiple_of(2) {
            SpectralPrediction::new(Count::Finite(kk / 2 + 1), Count::Finite(kk / 2))
        } else {
            SpectralPrediction::new(Count::Finite(kk.div_ceil(2)), Count::Finite(kk.div_ceil(2)))
        }
    } else if k < 0.0 {
        SpectralPrediction::new(Count::Infinite, Count::Finite(0))
    } else {
        let n = k.floor() as usize;
        if n.is_multiple_of(2) {
            SpectralPrediction::new(Count::Finite(n / 2 + 1), Count::Infinite)
        } else {
            SpectralPrediction::new(Count::Infinite, Count::Finite(n.div_ceil(2)))
        }
    };
    let rule = if is_nonneg_integer(k) {
        "finite-rank quasi-Carleman kernel"
    } else if k < 0.0 {
        "quasi-Carleman kernel with k < 0 (positive sigma)"
    } else {
        "quasi-Carleman kernel with non-integer k > 0"
    };
    let p = if term.coeff > 0.0 { base } else { base.swapped() };
    PredictionOutcome::found(p, rule)
}

fn same_point(a: &QuasiCarlemanTerm, b: &QuasiCarlemanTerm) -> bool {
    a.alpha == b.alpha && a.r == b.r
}

/// Sign counts predicted from the singular structure of a quasi-Carleman sum.
///
/// Rules: single terms; sums whose terms all have `k < 0` and a common
/// coefficient sign; a dominant term perturbed by weaker powers at the same
/// point (checked through the dominance inequality on
/// `mu in logspace(1e-6, 1e6)`); terms with pairwise distinct `alpha`, each
/// with `k > 0`.
pub fn predicted_counts(h: &KernelSpec) -> PredictionOutcome {
    let Some(all_terms) = h.terms() else {
        return PredictionOutcome::none("tabulated kernel: no symbolic sigma-function");
    };
    let terms: Vec<QuasiCarlemanTerm> = all_terms.iter().copied().filter(|t| t.coeff != 0.0).collect();
    match terms.len() {
        0 => return PredictionOutcome::found(SpectralPrediction::new(Count::Finite(0), Count::Finite(0)), "zero kernel"),
        1 => return single_term(&terms[0]),
        _ => {}
    }
    if terms.iter().all(|t| t.k < 0.0) {
        if terms.iter().all(|t| t.coeff > 0.0) {
            return PredictionOutcome::found(
                SpectralPrediction::new(Count::Infinite, Count::Finite(0)),
                "sum of k < 0 terms with positive coefficients",
            );
        }
        if terms.iter().all(|t| t.coeff < 0.0) {
            return PredictionOutcome::found(
                SpectralPrediction::new(Count::Finite(0), Count::Infinite),
                "sum of k < 0 terms with negative coefficients",
            );
        }
    }
    if terms.iter().all(|t| same_point(t, &terms[0])) {
        return perturbed_single_point(&terms);
    }
    distinct_points(&terms)
}

/// One dominant power at a point, perturbed by weaker powers `k_j in [0, k)`.
fn perturbed_single_point(terms: &[QuasiCarlemanTerm]) -> PredictionOutcome {
    let lead = terms
        .iter()
        .copied()
        .fold(None::<QuasiCarlemanTerm>, |best, t| match best {
            Some(b) if b.k >= t.k => Some(b),
            _ => Some(t),
        })
        .expect("at least two terms");
    let k = lead.k;
    if terms.iter().filter(|t| t.k == k).count() > 1 {
        return PredictionOutcome::none("repeated leading power at one point; merge the terms");
    }
    if !(k > 0.0) || is_nonneg_integer(k) {
        return PredictionOutcome::none("leading power at a shared point must be a non-integer k > 0");
    }
    let others: Vec<&QuasiCarlemanTerm> = terms.iter().filter(|t| t.k != k).collect();
    if others.iter().any(|t| t.k < 0.0) {
        return PredictionOutcome::none("perturbing powers must lie in [0, k)");
    }
    // terms with integer k_j have sigma supported at alpha only and drop out
    let weights: Vec<(f64, f64)> = others
        .iter()
        .filter(|t| !is_nonneg_integer(t.k))
        .map(|t| {
            let a = t.coeff / lead.coeff;
            let ratio = specfun::gamma_real(-k).unwrap_or(f64::NAN) * specfun::rgamma_real(-t.k);
            (a * ratio, k - t.k)
        })
        .collect();
    if !dominance_holds(&weights) {
        return PredictionOutcome::none("dominance inequality 1 + sum a_j Gamma(-k)/Gamma(-k_j) mu^(k-k_j) >= 0 fails");
    }
    let mut base = single_term(&QuasiCarlemanTerm { coeff: 1.0, ..lead });
    if let PredictionOutcome::Predicted { prediction, rule } = &mut base {
        if lead.coeff < 0.0 {
            *prediction = prediction.swapped();
        }
        *rule = "dominant non-integer power perturbed by weaker powers at the same point".into();
    }
    base
}

/// `1 + sum c_j mu^{e_j} >= 0` on a log-spaced grid, plus the sign of the
/// fastest-growing term, which decides the behaviour beyond the grid.
fn dominance_holds(weights: &[(f64, f64)]) -> bool {
    if weights.iter().any(|(c, _)| !c.is_finite()) {
        return false;
    }
    let n = DOMINANCE_SAMPLES;
    let ok_grid = (0..n).all(|i| {
        let mu = 10f64.powf(-6.0 + 12.0 * i as f64 / (n - 1) as f64);
        1.0 + weights.iter().map(|(c, e)| c * mu.powf(*e)).sum::<f64>() >= 0.0
    });
    let top = weights.iter().map(|(_, e)| *e).fold(f64::NEG_INFINITY, f64::max);
    let lead_sum: f64 = weights.iter().filter(|(_, e)| *e == top).map(|(c, _)| *c).sum();
    ok_grid && (weights.is_empty() || lead_sum >= 0.0)
}

/// Terms at pairwise distinct points, each with `k > 0`.
fn distinct_points(terms: &[QuasiCarlemanTerm]) -> PredictionOutcome {
    for (i, a) in terms.iter().enumerate() {
        if terms[i + 1..].iter().any(|b| b.alpha == a.alpha) {
            return PredictionOutcome::none("several singular points share alpha with different damping or powers");
        }
    }
    if terms.iter().any(|t| !(t.k > 0.0)) {
        return PredictionOutcome::none("multi-point rule needs k > 0 for every term");
    }
    // h = sum (-1)^{n_m+1} b_m (t+r_m)^{k_m} e^{-alpha_m t}
    let signed: Vec<(f64, bool)> = terms
        .iter()
        .map(|t| {
            let n = t.k.floor() as i64;
            let b = if n % 2 == 0 { -t.coeff } else { t.coeff };
            (b, is_nonneg_integer(t.k))
        })
        .collect();
    let big_n: usize = terms.iter().map(|t| (t.k.floor() as usize) / 2).sum::<usize>() + terms.len();
    let any_pos_frac = signed.iter().any(|(b, int)| *b > 0.0 && !int);
    let any_neg_frac = signed.iter().any(|(b, int)| *b < 0.0 && !int);
    if signed.iter().all(|(b, _)| *b > 0.0) {
        if !any_pos_frac {
            return PredictionOutcome::none("all singular points are delta-type; use the finite-rank rule per term");
        }
        return PredictionOutcome::found(
            SpectralPrediction::new(Count::Infinite, Count::Finite(big_n)),
            "independent singular points, all b_m > 0",
        );
    }
    if signed.iter().all(|(b, _)| *b < 0.0) {
        if !any_neg_frac {
            return PredictionOutcome::none("all singular points are delta-type; use the finite-rank rule per term");
        }
        return PredictionOutcome::found(
            SpectralPrediction::new(Count::Finite(big_n), Count::Infinite),
            "independent singular points, all b_m < 0",
        );
    }
    if any_pos_frac && any_neg_frac {
        return PredictionOutcome::found(
            SpectralPrediction::new(Count::Infinite, Count::Infinite),
            "singular points of both signs",
        );
    }
    PredictionOutcome::none("mixed signs with one side carried only by delta-type points")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(h: &KernelSpec) -> SpectralPrediction {
        predicted_counts(h).prediction().expect("prediction")
    }

    #[test]
    fn single_term_rules() {
        let p = counts(&KernelSpec::quasi_carleman(1.0, 0.0, 0.0));
        assert_eq!(p, SpectralPrediction::new(Count::Finite(1), Count::Finite(0)));
        let p = counts(&KernelSpec::quasi_carleman(1.0, 0.0, 0.5));
        assert_eq!(p, SpectralPrediction::new(Count::Finite(1), Count::Infinite));
        let p = counts(&KernelSpec::quasi_carleman(1.0, 0.0, 1.5));
        assert_eq!(p, SpectralPrediction::new(Count::Infinite, Count::Finite(1)));
        let p = counts(&KernelSpec::quasi_carleman(1.0, 0.0, 3.0));
        assert_eq!(p, SpectralPrediction::new(Count::Finite(2), Count::Finite(2)));
        let p = counts(&KernelSpec::quasi_carleman(1.0, 2.0, -0.5));
        assert_eq!(p, SpectralPrediction::new(Count::Infinite, Count::Finite(0)));
    }

    #[test]
    fn two_point_kernel() {
        let h = KernelSpec::QuasiCarleman(vec![
            QuasiCarlemanTerm::new(-1.0, 1.0, 0.0, 2.5),
            QuasiCarlemanTerm::new(1.0, 2.0, 0.0, 3.5),
        ]);
        assert_eq!(counts(&h), SpectralPrediction::new(Count::Infinite, Count::Finite(4)));
    }

    #[test]
    fn dominance_violation_gives_no_prediction() {
        // Gamma(-1.5) > 0, Gamma(-0.5) < 0: a_1 > 0 makes the bracket negative for large mu
        let h = KernelSpec::QuasiCarleman(vec![
            QuasiCarlemanTerm::new(1.0, 1.0, 0.0, 1.5),
            QuasiCarlemanTerm::new(5.0, 1.0, 0.0, 0.5),
        ]);
        assert!(predicted_counts(&h).prediction().is_none());
        let h = KernelSpec::QuasiCarleman(vec![
            QuasiCarlemanTerm::new(1.0, 1.0, 0.0, 1.5),
            QuasiCarlemanTerm::new(-5.0, 1.0, 0.0, 0.5),
        ]);
        assert_eq!(counts(&h), SpectralPrediction::new(Count::Infinite, Count::Finite(1)));
    }

    #[test]
    fn count_json() {
        let p = SpectralPrediction::new(Count::Infinite, Count::Finite(3));
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"n_plus":"infinite","n_minus":3}"#);
        assert_eq!(serde_json::from_str::<SpectralPrediction>(&s).unwrap(), p);
    }
}
