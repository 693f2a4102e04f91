use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::DiscreteError;
use crate::sigma::SigmaAtom;
use crate::spectral::{HankelSection, SpectralError};

/// Matrix elements `q_0, ..., q_{N-1}` of a Hankel matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MomentSequence {
    values: Vec<f64>,
}

impl TryFrom<Vec<f64>> for MomentSequence {
    type Error = DiscreteError;

    fn try_from(values: Vec<f64>) -> Result<Self, DiscreteError> {
        Self::new(values)
    }
}

impl From<MomentSequence> for Vec<f64> {
    fn from(q: MomentSequence) -> Self {
        q.values
    }
}

impl MomentSequence {
    pub fn new(values: Vec<f64>) -> Result<Self, DiscreteError> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(DiscreteError::NonFinite(i));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn truncated(&self, n: usize) -> Self {
        Self { values: self.values[..n.min(self.len())].to_vec() }
    }

    /// Largest `|q_n - p_n|` over the common length.
    pub fn max_diff(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// `n x n` section `q_{i+j}`.
    pub fn section(&self, n: usize) -> Result<HankelSection, SpectralError> {
        HankelSection::new(&self.values, n)
    }

    /// CSV with header `n,q_n`, shortest round-trip number formatting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,q_n\n");
        for (n, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{n},{v}");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, DiscreteError> {
        let mut values = Vec::new();
        for (line_no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || (line_no == 0 && line.starts_with('n')) {
                continue;
            }
            let mut cols = line.split(',');
            let (Some(n), Some(v), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(DiscreteError::Csv(format!("line {}: expected two columns", line_no + 1)));
            };
            let n: usize =
                n.trim().parse().map_err(|_| DiscreteError::Csv(format!("line {}: bad index", line_no + 1)))?;
            if n != values.len() {
                return Err(DiscreteError::Csv(format!("line {}: expected index {}, got {n}", line_no + 1, values.len())));
            }
            let v: f64 =
                v.trim().parse().map_err(|_| DiscreteError::Csv(format!("line {}: bad value", line_no + 1)))?;
            values.push(v);
        }
        if values.is_empty() {
            return Err(DiscreteError::Empty);
        }
        Self::new(values)
    }
}

/// Singular part of an eta-function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EtaAtom {
    /// `weight * delta(mu - mu0)`.
    Point { mu: f64, weight: f64 },
    /// Image of a singular sigma atom; moments are taken on the `lambda` side.
    Sigma { atom: SigmaAtom },
}

/// Jump `height * H(mu - at)` of an eta-function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtaStep {
    pub at: f64,
    pub height: f64,
}

/// `eta(mu)` on `(-1, 1)`: piecewise-linear samples, a Legendre series,
/// steps and singular atoms, all added together.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtaFunction {
    /// Strictly increasing sample points inside `(-1, 1)`; the interpolant
    /// is extended by constants to the endpoints.
    #[serde(default)]
    pub nodes: Vec<f64>,
    #[serde(default)]
    pub values: Vec<f64>,
    /// Coefficients of `P_0, P_1, ...` (Legendre polynomials).
    #[serde(default)]
    pub legendre: Vec<f64>,
    #[serde(default)]
    pub steps: Vec<EtaStep>,
    #[serde(default)]
    pub atoms: Vec<EtaAtom>,
}

/// `n` Chebyshev points of the first kind, ascending, strictly inside `(-1, 1)`.
pub(crate) fn chebyshev_nodes(n: usize) -> Vec<f64> {
    (0..n).map(|j| -((j as f64 + 0.5) * std::f64::consts::PI / n as f64).cos()).collect()
}

/// `P_0(mu), ..., P_deg(mu)`.
pub(crate) fn legendre_values(deg: usize, mu: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(deg + 1);
    p.push(1.0);
    if deg >= 1 {
        p.push(mu);
    }
    for l in 1..deg {
        let lf = l as f64;
        let next = ((2.0 * lf + 1.0) * mu * p[l] - lf * p[l - 1]) / (lf + 1.0);
        p.push(next);
    }
    p
}

impl EtaFunction {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>, atoms: Vec<EtaAtom>) -> Result<Self, DiscreteError> {
        let eta = Self { nodes, values, atoms, ..Self::default() };
        eta.validate()?;
        Ok(eta)
    }

    pub fn validate(&self) -> Result<(), DiscreteError> {
        if self.nodes.len() != self.values.len() {
            return Err(DiscreteError::InvalidEta(format!(
                "{} nodes but {} values",
                self.nodes.len(),
                self.values.len()
            )));
        }
        if self.nodes.iter().any(|m| !(*m > -1.0 && *m < 1.0)) {
            return Err(DiscreteError::InvalidEta("nodes must lie strictly inside (-1, 1)".into()));
        }
        if self.nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(DiscreteError::InvalidEta("nodes must be strictly increasing".into()));
        }
        if self.values.iter().chain(&self.legendre).any(|v| !v.is_finite()) {
            return Err(DiscreteError::InvalidEta("non-finite value".into()));
        }
        if self.steps.iter().any(|s| !(s.at > -1.0 && s.at < 1.0) || !s.height.is_finite()) {
            return Err(DiscreteError::InvalidEta("steps need a finite height and a location inside (-1, 1)".into()));
        }
        for atom in &self.atoms {
            if let EtaAtom::Point { mu, weight } = atom {
                if !(*mu >= -1.0 && *mu <= 1.0) || !weight.is_finite() {
                    return Err(DiscreteError::InvalidEta(format!("point atom at {mu} outside [-1, 1]")));
                }
            }
        }
        Ok(())
    }

    /// Samples `f` at `n` Chebyshev points.
    pub fn sample(n: usize, f: impl Fn(f64) -> f64) -> Result<Self, DiscreteError> {
        let nodes = chebyshev_nodes(n);
        let values = nodes.iter().map(|m| f(*m)).collect();
        Self::new(nodes, values, Vec::new())
    }

    pub fn from_legendre(coeffs: Vec<f64>) -> Result<Self, DiscreteError> {
        let eta = Self { legendre: coeffs, ..Self::default() };
        eta.validate()?;
        Ok(eta)
    }

    /// Value of the function part (samples, Legendre series, steps and
    /// integrable sigma atoms) at `mu`.
    pub fn eval(&self, mu: f64) -> f64 {
        let mut v = self.interpolate(mu);
        if !self.legendre.is_empty() {
            let p = legendre_values(self.legendre.len() - 1, mu);
            v += p.iter().zip(&self.legendre).map(|(a, b)| a * b).sum::<f64>();
        }
        v += self.steps.iter().filter(|s| mu >= s.at).map(|s| s.height).sum::<f64>();
        if mu > -1.0 && mu < 1.0 {
            let lambda = super::lambda_of_mu(mu);
            for atom in &self.atoms {
                if let EtaAtom::Sigma { atom } = atom {
                    v += atom.density(lambda).unwrap_or(0.0);
                }
            }
        }
        v
    }

    fn interpolate(&self, mu: f64) -> f64 {
        let n = self.nodes.len();
        if n == 0 {
            return 0.0;
        }
        if mu <= self.nodes[0] {
            return self.values[0];
        }
        if mu >= self.nodes[n - 1] {
            return self.values[n - 1];
        }
        let j = self.nodes.partition_point(|x| *x <= mu) - 1;
        let frac = (mu - self.nodes[j]) / (self.nodes[j + 1] - self.nodes[j]);
        (1.0 - frac) * self.values[j] + frac * self.values[j + 1]
    }

    /// Piecewise-linear pieces `(a, b, value_a, value_b)` covering `[-1, 1]`.
    pub(crate) fn linear_pieces(&self) -> Vec<(f64, f64, f64, f64)> {
        let n = self.nodes.len();
        if n == 0 {
            return Vec::new();
        }
        let mut pieces = vec![(-1.0, self.nodes[0], self.values[0], self.values[0])];
        for j in 0..n - 1 {
            pieces.push((self.nodes[j], self.nodes[j + 1], self.values[j], self.values[j + 1]));
        }
        pieces.push((self.nodes[n - 1], 1.0, self.values[n - 1], self.values[n - 1]));
        pieces
    }

    /// Tabulation `(mu, eta)` of the function part; uses the sample nodes
    /// when present and `n` Chebyshev points otherwise.
    pub fn tabulate(&self, n: usize) -> Vec<(f64, f64)> {
        let nodes = if self.nodes.is_empty() { chebyshev_nodes(n) } else { self.nodes.clone() };
        nodes.into_iter().map(|m| (m, self.eval(m))).collect()
    }

    /// CSV `mu,eta` of [`Self::tabulate`].
    pub fn to_csv(&self, n: usize) -> String {
        let mut out = String::from("mu,eta\n");
        for (m, v) in self.tabulate(n) {
            let _ = writeln!(out, "{m},{v}");
        }
        out
    }

    /// `(int_a^b |eta - f|^2 dmu)^{1/2}` by composite Gauss-Legendre.
    pub fn l2_distance(&self, f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let rule = crate::quad::GaussLegendre::new(16);
        rule.composite(|m| (self.eval(m) - f(m)).powi(2), a, b, 512).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip_is_exact() {
        let q = MomentSequence::new(vec![1.0, 0.1, 1.0 / 3.0, -2.5e-300]).unwrap();
        assert_eq!(MomentSequence::from_csv(&q.to_csv()).unwrap(), q);
        assert!(MomentSequence::from_csv("n,q_n\n0,1\n2,3\n").is_err());
        assert!(MomentSequence::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn eta_validation_and_eval() {
        assert!(EtaFunction::new(vec![0.5, 0.2], vec![1.0, 1.0], vec![]).is_err());
        assert!(EtaFunction::new(vec![-1.0], vec![1.0], vec![]).is_err());
        let e = EtaFunction::new(vec![-0.5, 0.5], vec![0.0, 1.0], vec![]).unwrap();
        assert_eq!(e.eval(0.0), 0.5);
        assert_eq!(e.eval(-0.9), 0.0);
        assert_eq!(e.eval(0.9), 1.0);
        let s = EtaFunction { steps: vec![EtaStep { at: 0.25, height: 2.0 }], ..EtaFunction::default() };
        assert_eq!((s.eval(0.2), s.eval(0.25)), (0.0, 2.0));
        let l = EtaFunction::from_legendre(vec![0.0, 0.0, 1.0]).unwrap();
        assert!((l.eval(0.5) - (-0.125)).abs() < 1e-15);
    }

    #[test]
    fn chebyshev_nodes_are_interior_and_sorted() {
        let n = chebyshev_nodes(64);
        assert!(n.windows(2).all(|w| w[0] < w[1]));
        assert!(n[0] > -1.0 && n[63] < 1.0);
    }
}
