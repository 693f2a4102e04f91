use serde::{Deserialize, Serialize};

use super::{KernelSpec, SigmaError};
use crate::quad::{adaptive, adaptive_semi_infinite, GaussLegendre};
use crate::specfun;
use crate::transforms::{Grid, GridFunction, TestFunction, TransformError};

/// One component of a sigma-function.
///
/// Every atom carries a translation `alpha` and a damping `r`: the atom
/// stands for `e^{-r (lambda - alpha)} s(lambda - alpha)` with `s` its
/// undamped profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SigmaAtom {
    /// Locally integrable density sampled on a grid.
    Regular {
        grid: Grid,
        values: Vec<f64>,
        #[serde(default)]
        alpha: f64,
        #[serde(default)]
        r: f64,
    },
    /// `coeff * (lambda - alpha)_+^{-k-1}`, regularized by Taylor subtraction
    /// of order `[k]` when `k > 0`.
    FinitePart { alpha: f64, k: f64, r: f64, coeff: f64 },
    /// `coeff * delta^{(order)}(lambda - alpha)`.
    DeltaDerivative { alpha: f64, order: usize, r: f64, coeff: f64 },
}

impl SigmaAtom {
    /// Regular atom from the real parts of a grid function.
    pub fn regular(f: &GridFunction) -> Self {
        Self::Regular { grid: f.grid, values: f.real_parts(), alpha: 0.0, r: 0.0 }
    }

    fn validate(&self) -> Result<(), SigmaError> {
        match self {
            Self::Regular { grid, values, alpha, r } => {
                if values.len() != grid.n_points() {
                    return Err(SigmaError::InvalidAtom(format!(
                        "regular atom has {} values for {} grid points",
                        values.len(),
                        grid.n_points()
                    )));
                }
                if values.iter().any(|v| !v.is_finite()) || !alpha.is_finite() || !(*r >= 0.0) {
                    return Err(SigmaError::InvalidAtom("regular atom has non-finite data or r < 0".into()));
                }
            }
            Self::FinitePart { alpha, k, r, coeff } => {
                if !alpha.is_finite() || !k.is_finite() || !coeff.is_finite() || !(*r >= 0.0) {
                    return Err(SigmaError::InvalidAtom("finite-part atom needs finite data and r >= 0".into()));
                }
                if is_nonneg_integer(*k) {
                    return Err(SigmaError::InvalidAtom(format!(
                        "finite-part atom with k = {k} in Z+; use a delta-derivative atom"
                    )));
                }
            }
            Self::DeltaDerivative { alpha, r, coeff, .. } => {
                if !alpha.is_finite() || !coeff.is_finite() || !(*r >= 0.0) {
                    return Err(SigmaError::InvalidAtom("delta atom needs finite data and r >= 0".into()));
                }
            }
        }
        Ok(())
    }

    /// Pointwise density at `lambda`: the interpolated samples for regular
    /// atoms, `coeff (lambda - alpha)^{-k-1} e^{-r (lambda - alpha)}` for
    /// integrable powers (`k < 0`), and `None` for distributions that are
    /// not functions.
    pub fn density(&self, lambda: f64) -> Option<f64> {
        match self {
            Self::Regular { grid, values, alpha, r } => {
                let p = lambda - alpha;
                let coord = match grid {
                    Grid::Log(_) if p <= 0.0 => return Some(0.0),
                    Grid::Log(_) => p.ln(),
                    Grid::Linear(_) => p,
                };
                let (start, step) = match grid {
                    Grid::Log(g) => (g.x_min(), g.dx()),
                    Grid::Linear(g) => (g.start, g.step),
                };
                let s = (coord - start) / step;
                let n = values.len();
                if n < 2 || s < 0.0 || s > (n - 1) as f64 {
                    return Some(0.0);
                }
                let j = (s.floor() as usize).min(n - 2);
                let frac = s - j as f64;
                Some(((1.0 - frac) * values[j] + frac * values[j + 1]) * (-r * p).exp())
            }
            Self::FinitePart { alpha, k, r, coeff } if *k < 0.0 => {
                let p = lambda - alpha;
                if p <= 0.0 {
                    return Some(0.0);
                }
                Some(coeff * p.powf(-k - 1.0) * (-r * p).exp())
            }
            _ => None,
        }
    }

    /// Leftmost point of the atom's support.
    pub fn support_start(&self) -> f64 {
        match self {
            Self::Regular { grid, values, alpha, .. } => {
                let pts = grid.points();
                pts.iter()
                    .zip(values)
                    .find(|(_, v)| **v != 0.0)
                    .map(|(p, _)| alpha + p)
                    .unwrap_or(f64::INFINITY)
            }
            Self::FinitePart { alpha, .. } | Self::DeltaDerivative { alpha, .. } => *alpha,
        }
    }
}

/// A sigma-function as a finite list of atoms.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaDistribution {
    pub atoms: Vec<SigmaAtom>,
}

impl SigmaDistribution {
    pub fn new(atoms: Vec<SigmaAtom>) -> Result<Self, SigmaError> {
        atoms.iter().try_for_each(SigmaAtom::validate)?;
        Ok(Self { atoms })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// Indicator of `[a, b]` (`b = inf` allowed) as a difference of steps.
    pub fn indicator(a: f64, b: f64) -> Self {
        let mut atoms = vec![SigmaAtom::FinitePart { alpha: a, k: -1.0, r: 0.0, coeff: 1.0 }];
        if b.is_finite() {
            atoms.push(SigmaAtom::FinitePart { alpha: b, k: -1.0, r: 0.0, coeff: -1.0 });
        }
        Self { atoms }
    }

    /// `coeff * delta(lambda - alpha)`.
    pub fn delta(alpha: f64, coeff: f64) -> Self {
        Self { atoms: vec![SigmaAtom::DeltaDerivative { alpha, order: 0, r: 0.0, coeff }] }
    }

    pub fn from_regular(f: &GridFunction) -> Self {
        Self { atoms: vec![SigmaAtom::regular(f)] }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sigma distributions always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, SigmaError> {
        let raw: Self = serde_json::from_str(text).map_err(|e| SigmaError::Json(e.to_string()))?;
        Self::new(raw.atoms)
    }

    /// Sum of two distributions.
    pub fn plus(mut self, other: Self) -> Self {
        self.atoms.extend(other.atoms);
        self
    }

    pub fn scaled(mut self, c: f64) -> Self {
        for atom in &mut self.atoms {
            match atom {
                SigmaAtom::Regular { values, .. } => values.iter_mut().for_each(|v| *v *= c),
                SigmaAtom::FinitePart { coeff, .. } | SigmaAtom::DeltaDerivative { coeff, .. } => *coeff *= c,
            }
        }
        self
    }

    /// Largest derivative order any atom needs from a test function.
    pub fn derivative_demand(&self) -> usize {
        self.atoms
            .iter()
            .map(|a| match a {
                SigmaAtom::Regular { .. } => 0,
                SigmaAtom::FinitePart { k, .. } if *k > 0.0 => k.floor() as usize + 1,
                SigmaAtom::FinitePart { .. } => 0,
                SigmaAtom::DeltaDerivative { order, .. } => *order,
            })
            .max()
            .unwrap_or(0)
    }
}

pub(crate) fn is_nonneg_integer(k: f64) -> bool {
    k >= 0.0 && k.fract() == 0.0
}

/// Sigma-function `Gamma(-k)^{-1} (lambda-alpha)_+^{-k-1} e^{-r(lambda-alpha)}`
/// of the kernel `(t + r)^k e^{-alpha t}`; for `k` in `Z+` the atom is
/// `delta^{(k)}(lambda - alpha) e^{-r(lambda-alpha)}`.
pub fn quasi_carleman_sigma(alpha: f64, r: f64, k: f64) -> SigmaDistribution {
    SigmaDistribution { atoms: vec![quasi_carleman_atom(1.0, alpha, r, k)] }
}

fn quasi_carleman_atom(coeff: f64, alpha: f64, r: f64, k: f64) -> SigmaAtom {
    if is_nonneg_integer(k) {
        SigmaAtom::DeltaDerivative { alpha, order: k as usize, r, coeff }
    } else {
        SigmaAtom::FinitePart { alpha, k, r, coeff: coeff * specfun::rgamma_real(-k) }
    }
}

/// Symbolic sigma-function of a sum of quasi-Carleman terms.
pub fn sigma_of_kernel(h: &KernelSpec) -> Option<SigmaDistribution> {
    let terms = h.terms()?;
    Some(SigmaDistribution {
        atoms: terms
            .iter()
            .filter(|t| t.coeff != 0.0)
            .map(|t| quasi_carleman_atom(t.coeff, t.alpha, t.r, t.k))
            .collect(),
    })
}

/// `sigma_{r,alpha}(lambda) = e^{-r(lambda-alpha)} sigma(lambda - alpha)`.
pub fn shift_damp(sigma: &SigmaDistribution, shift: f64, damping: f64) -> SigmaDistribution {
    let atoms = sigma
        .atoms
        .iter()
        .map(|atom| match atom.clone() {
            SigmaAtom::Regular { grid, values, alpha, r } => {
                // e^{-r'(lambda - shift)} = e^{-r'(lambda - alpha_new)} e^{-r' alpha}
                let scale = (-damping * alpha).exp();
                SigmaAtom::Regular {
                    grid,
                    values: values.into_iter().map(|v| v * scale).collect(),
                    alpha: alpha + shift,
                    r: r + damping,
                }
            }
            SigmaAtom::FinitePart { alpha, k, r, coeff } => SigmaAtom::FinitePart {
                alpha: alpha + shift,
                k,
                r: r + damping,
                coeff: coeff * (-damping * alpha).exp(),
            },
            SigmaAtom::DeltaDerivative { alpha, order, r, coeff } => SigmaAtom::DeltaDerivative {
                alpha: alpha + shift,
                order,
                r: r + damping,
                coeff: coeff * (-damping * alpha).exp(),
            },
        })
        .collect();
    SigmaDistribution { atoms }
}

/// Test function in the spectral variable `lambda`.
pub trait LambdaTest {
    /// `w(lambda), w'(lambda), ..., w^{(order)}(lambda)`.
    fn derivatives(&self, lambda: f64, order: usize) -> Result<Vec<f64>, SigmaError>;

    fn value(&self, lambda: f64) -> f64 {
        self.derivatives(lambda, 0).map(|d| d[0]).unwrap_or(0.0)
    }

    /// Interval outside which `w` vanishes; ends may be infinite.
    fn support(&self) -> (f64, f64);

    /// Length over which `w` changes appreciably.
    fn scale(&self) -> f64 {
        1.0
    }
}

impl LambdaTest for TestFunction {
    fn derivatives(&self, lambda: f64, order: usize) -> Result<Vec<f64>, SigmaError> {
        TestFunction::derivatives(self, lambda, order).map_err(SigmaError::from)
    }
    fn value(&self, lambda: f64) -> f64 {
        TestFunction::value(self, lambda)
    }
    fn support(&self) -> (f64, f64) {
        TestFunction::support(self)
    }
    fn scale(&self) -> f64 {
        self.width()
    }
}

/// `1/(lambda + mu1) - 1/(lambda + mu2)` on `[0, inf)`.
#[derive(Debug, Clone, Copy)]
pub struct StieltjesDifference {
    pub mu1: f64,
    pub mu2: f64,
}

impl LambdaTest for StieltjesDifference {
    fn derivatives(&self, lambda: f64, order: usize) -> Result<Vec<f64>, SigmaError> {
        let mut out = Vec::with_capacity(order + 1);
        let (a, b) = (1.0 / (lambda + self.mu1), 1.0 / (lambda + self.mu2));
        let (mut pa, mut pb, mut c) = (a, b, 1.0);
        for p in 0..=order {
            out.push(c * (pa - pb));
            pa *= a;
            pb *= b;
            c *= -((p + 1) as f64);
        }
        Ok(out)
    }
    fn support(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
    fn scale(&self) -> f64 {
        self.mu1.min(self.mu2).max(1e-3)
    }
}

const ABS_TOL: f64 = 1e-15;
const REL_TOL: f64 = 1e-12;

/// `<sigma, w>`; real test functions, so the antilinear slot reduces to `w`.
pub fn pair(sigma: &SigmaDistribution, w: &dyn LambdaTest) -> Result<f64, SigmaError> {
    sigma.atoms.iter().map(|atom| pair_atom(atom, w)).sum()
}

pub fn pair_atom(atom: &SigmaAtom, w: &dyn LambdaTest) -> Result<f64, SigmaError> {
    match atom {
        SigmaAtom::Regular { grid, values, alpha, r } => {
            let (lo, hi) = w.support();
            let mut sum = 0.0;
            for ((p, wt), v) in grid.points().iter().zip(grid.weights()).zip(values) {
                let lambda = alpha + p;
                if *v == 0.0 || lambda < lo || lambda > hi {
                    continue;
                }
                sum += wt * v * (-r * p).exp() * w.value(lambda);
            }
            Ok(sum)
        }
        SigmaAtom::DeltaDerivative { alpha, order, r, coeff } => {
            let phi = damped_derivatives(w, *alpha, *r, *order)?;
            let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
            Ok(coeff * sign * phi[*order])
        }
        SigmaAtom::FinitePart { alpha, k, r, coeff } => {
            if *coeff == 0.0 {
                return Ok(0.0);
            }
            Ok(coeff * finite_part(w, *alpha, *k, *r)?)
        }
    }
}

/// Derivatives at `alpha` of `phi(lambda) = e^{-r(lambda-alpha)} w(lambda)`,
/// evaluated at `lambda`.
fn damped_derivatives_at(w: &dyn LambdaTest, alpha: f64, r: f64, lambda: f64, order: usize) -> Result<Vec<f64>, SigmaError> {
    let wd = w.derivatives(lambda, order)?;
    let e = (-r * (lambda - alpha)).exp();
    let mut out = vec![0.0; order + 1];
    for (p, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        let mut binom = 1.0;
        for (i, d) in wd.iter().enumerate().take(p + 1) {
            acc += binom * (-r).powi((p - i) as i32) * d;
            binom = binom * (p - i) as f64 / (i + 1) as f64;
        }
        *slot = e * acc;
    }
    Ok(out)
}

fn damped_derivatives(w: &dyn LambdaTest, alpha: f64, r: f64, order: usize) -> Result<Vec<f64>, SigmaError> {
    damped_derivatives_at(w, alpha, r, alpha, order)
}

/// `int_0^u s^a g(s) ds` for `a > -1`, via `s = v^{1/(a+1)}`.
fn weighted_integral(a: f64, u: f64, mut g: impl FnMut(f64) -> f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    let b = a + 1.0;
    if a.abs() < 1e-15 {
        return adaptive(g, 0.0, u, ABS_TOL, REL_TOL).value;
    }
    let top = u.powf(b);
    adaptive(|v| g(v.powf(1.0 / b)), 0.0, top, ABS_TOL, REL_TOL).value / b
}

/// Raw finite-part integral `int_alpha^inf (lambda-alpha)^{-k-1} [phi - T_n]`
/// with `phi = e^{-r(lambda-alpha)} w`, `n = [k]`.
fn finite_part(w: &dyn LambdaTest, alpha: f64, k: f64, r: f64) -> Result<f64, SigmaError> {
    let (lo, hi) = w.support();
    if hi <= alpha {
        return Ok(0.0);
    }
    let phi = |u: f64| (-r * u).exp() * w.value(alpha + u);
    let a = -k - 1.0;
    if k < 0.0 {
        // integrable weight, no subtraction
        let start = (lo - alpha).max(0.0);
        if start > 0.0 || a >= 0.0 {
            let v = if hi.is_finite() {
                adaptive(phi_weighted(&phi, a), start, hi - alpha, ABS_TOL, REL_TOL).value
            } else {
                adaptive_semi_infinite(phi_weighted(&phi, a), start, ABS_TOL, REL_TOL).value
            };
            return Ok(v);
        }
        let cut = if hi.is_finite() { hi - alpha } else { 4.0 * w.scale() };
        let mut v = weighted_integral(a, cut, phi);
        if !hi.is_finite() {
            v += adaptive_semi_infinite(phi_weighted(&phi, a), cut, ABS_TOL, REL_TOL).value;
        }
        return Ok(v);
    }
    let n = k.floor() as usize;
    let taylor = damped_derivatives(w, alpha, r, n)?;
    // make sure the remainder order is available before integrating
    w.derivatives(alpha, n + 1)?;
    let mut fact = vec![1.0; n + 2];
    for p in 1..n + 2 {
        fact[p] = fact[p - 1] * p as f64;
    }
    let poly = |u: f64| taylor.iter().enumerate().rev().fold(0.0, |acc, (p, d)| acc * u + d / fact[p]);
    let big_u = if hi.is_finite() { hi - alpha } else { 4.0 * w.scale() };
    let u0 = (0.25 * w.scale()).min(big_u);
    let rule = GaussLegendre::new(20);
    // g(u) = (phi(u) - T_n(u)) / u^{n+1}
    let g = |u: f64| -> f64 {
        if u < u0 {
            // integral form of the Taylor remainder
            rule.integrate(
                |s| {
                    let d = damped_derivatives_at(w, alpha, r, alpha + s * u, n + 1).map(|d| d[n + 1]).unwrap_or(0.0);
                    (1.0 - s).powi(n as i32) * d
                },
                0.0,
                1.0,
            ) / fact[n]
        } else {
            (phi(u) - poly(u)) / u.powi(n as i32 + 1)
        }
    };
    let exponent = n as f64 - k;
    let mut value = weighted_integral(exponent, big_u, g);
    if !hi.is_finite() {
        value += adaptive_semi_infinite(phi_weighted(&phi, a), big_u, ABS_TOL, REL_TOL).value;
    }
    // Taylor polynomial beyond big_u, integrated exactly
    for (p, d) in taylor.iter().enumerate() {
        value -= d / fact[p] * big_u.powf(p as f64 - k) / (k - p as f64);
    }
    Ok(value)
}

fn phi_weighted<'a>(phi: &'a impl Fn(f64) -> f64, a: f64) -> impl Fn(f64) -> f64 + 'a {
    move |u| if u <= 0.0 { 0.0 } else { u.powf(a) * phi(u) }
}

impl From<TransformError> for SigmaError {
    fn from(e: TransformError) -> Self {
        match e {
            TransformError::DerivativeBudget { requested, budget } => SigmaError::DerivativeBudget { requested, budget },
            other => SigmaError::Transform(other),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oracle_bump() -> TestFunction {
        TestFunction::on_line(1.5, 1.0, vec![1.0]).unwrap()
    }

    #[test]
    fn finite_part_matches_oracle() {
        let raw = finite_part(&oracle_bump(), 1.0, 0.5, 0.0).unwrap();
        assert!((raw - 0.111_859_105_793_422_72).abs() < 1e-10, "{raw}");
        let paired = pair(&quasi_carleman_sigma(1.0, 0.0, 0.5), &oracle_bump()).unwrap();
        assert!((paired + 0.031_554_871_156_807_79).abs() < 1e-10, "{paired}");
    }

    #[test]
    fn delta_pairing_evaluates() {
        let w = TestFunction::on_line(0.0, 2.0, vec![3.5 * 1f64.exp()]).unwrap();
        let v = pair(&SigmaDistribution::delta(0.0, 1.0), &w).unwrap();
        assert!((v - 3.5).abs() < 1e-14);
    }

    #[test]
    fn step_pairing_is_plain_integral() {
        let w = TestFunction::on_line(1.0, 0.5, vec![1.0]).unwrap();
        let v = pair(&quasi_carleman_sigma(0.0, 0.0, -1.0), &w).unwrap();
        assert!((v - w.integral()).abs() < 1e-13);
    }

    #[test]
    fn json_roundtrip() {
        let s = quasi_carleman_sigma(1.0, 0.0, 0.5).plus(SigmaDistribution::delta(2.0, -1.0));
        let back = SigmaDistribution::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        assert!(SigmaDistribution::from_json(r#"{"atoms":[{"kind":"delta_derivative","alpha":1,"order":0,"r":0,"coeff":1,"extra":2}]}"#).is_err());
    }

    #[test]
    fn budget_is_reported() {
        let w = TestFunction::on_line(1.0, 0.5, vec![1.0]).unwrap().with_derivative_budget(2);
        let err = pair(&quasi_carleman_sigma(1.0, 0.0, 3.0), &w).unwrap_err();
        assert!(matches!(err, SigmaError::DerivativeBudget { requested: 3, budget: 2 }));
    }
}
