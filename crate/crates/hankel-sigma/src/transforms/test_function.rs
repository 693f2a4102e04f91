use serde::{Deserialize, Serialize};

use super::TransformError;
use crate::quad::GaussLegendre;

/// Smooth bump `P(t) * exp(-w^2 / (w^2 - (t - c)^2))` on `|t - c| < w`, zero
/// elsewhere. `P` is a polynomial in `t - c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFunction {
    center: f64,
    width: f64,
    /// Coefficients of `P` in powers of `t - center`.
    poly: Vec<f64>,
    /// Highest derivative order callers may request.
    max_order: usize,
}

pub const DEFAULT_DERIVATIVE_BUDGET: usize = 12;

impl TestFunction {
    /// Plain bump (`P = 1`) supported in `[center - width, center + width]`.
    pub fn bump(center: f64, width: f64) -> Result<Self, TransformError> {
        Self::with_polynomial(center, width, vec![1.0])
    }

    pub fn with_polynomial(center: f64, width: f64, poly: Vec<f64>) -> Result<Self, TransformError> {
        Self::on_line(center, width, poly)?.require_positive_support()
    }

    /// Bump used as a test function in the spectral variable, where the
    /// support may include negative points.
    pub fn on_line(center: f64, width: f64, poly: Vec<f64>) -> Result<Self, TransformError> {
        if !(width > 0.0) || !center.is_finite() || !width.is_finite() {
            return Err(TransformError::InvalidTestFunction(format!("center {center}, width {width}")));
        }
        if poly.is_empty() || poly.iter().any(|c| !c.is_finite()) {
            return Err(TransformError::InvalidTestFunction("polynomial must be nonempty and finite".into()));
        }
        Ok(Self { center, width, poly, max_order: DEFAULT_DERIVATIVE_BUDGET })
    }

    fn require_positive_support(self) -> Result<Self, TransformError> {
        if self.center - self.width <= 0.0 {
            return Err(TransformError::InvalidTestFunction(format!(
                "support [{}, {}] must lie in (0, inf)",
                self.center - self.width,
                self.center + self.width
            )));
        }
        Ok(self)
    }

    pub fn with_derivative_budget(mut self, max_order: usize) -> Self {
        self.max_order = max_order;
        self
    }

    pub fn center(&self) -> f64 {
        self.center
    }
    pub fn width(&self) -> f64 {
        self.width
    }
    pub fn derivative_budget(&self) -> usize {
        self.max_order
    }
    pub fn support(&self) -> (f64, f64) {
        (self.center - self.width, self.center + self.width)
    }

    pub fn value(&self, t: f64) -> f64 {
        let s = t - self.center;
        let w = self.width;
        if s.abs() >= w {
            return 0.0;
        }
        let g = -w * w / ((w - s) * (w + s));
        if g < -745.0 {
            return 0.0;
        }
        poly_eval(&self.poly, s) * g.exp()
    }

    /// Values `f(t), f'(t), ..., f^(order)(t)`.
    pub fn derivatives(&self, t: f64, order: usize) -> Result<Vec<f64>, TransformError> {
        if order > self.max_order {
            return Err(TransformError::DerivativeBudget { requested: order, budget: self.max_order });
        }
        Ok(self.derivatives_unchecked(t, order))
    }

    pub(crate) fn derivatives_unchecked(&self, t: f64, order: usize) -> Vec<f64> {
        let mut out = vec![0.0; order + 1];
        let s = t - self.center;
        let w = self.width;
        if s.abs() >= w {
            return out;
        }
        let a = w - s;
        let b = w + s;
        let g0 = -w * w / (a * b);
        if g0 < -745.0 {
            return out;
        }
        let phi = g0.exp();
        // g^{(j)}(s) = -(w/2) j! [ (w-s)^{-j-1} + (-1)^j (w+s)^{-j-1} ]
        let mut gd = vec![0.0; order + 2];
        let mut fact = 1.0;
        for (j, slot) in gd.iter_mut().enumerate() {
            if j > 0 {
                fact *= j as f64;
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            *slot = -0.5 * w * fact * (a.powi(-(j as i32) - 1) + sign * b.powi(-(j as i32) - 1));
        }
        // Bell-type recursion for phi^{(m)} / phi
        let mut bell = vec![0.0; order + 1];
        bell[0] = 1.0;
        for m in 0..order {
            let mut acc = 0.0;
            let mut binom = 1.0;
            for j in 0..=m {
                acc += binom * gd[j + 1] * bell[m - j];
                binom = binom * (m - j) as f64 / (j + 1) as f64;
            }
            bell[m + 1] = acc;
        }
        // polynomial derivatives at s
        let pd = poly_derivatives(&self.poly, s, order);
        for (m, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            let mut binom = 1.0;
            for i in 0..=m {
                acc += binom * pd[i] * bell[m - i];
                binom = binom * (m - i) as f64 / (i + 1) as f64;
            }
            *slot = acc * phi;
        }
        out
    }

    /// Composite Gauss-Legendre nodes on the support together with
    /// `weight * f(node)`, accurate to roughly machine precision for
    /// integrals of `f` against smooth functions.
    pub fn weighted_nodes(&self) -> (Vec<f64>, Vec<f64>) {
        let (a, b) = self.support();
        let rule = GaussLegendre::new(24);
        let (xs, ws) = rule.mapped(a, b, 16);
        let fw = xs.iter().zip(&ws).map(|(x, w)| w * self.value(*x)).collect();
        (xs, fw)
    }

    /// `int f(t) dt`.
    pub fn integral(&self) -> f64 {
        self.weighted_nodes().1.iter().sum()
    }

    /// Squared `L^2` norm.
    pub fn norm_sqr(&self) -> f64 {
        let (a, b) = self.support();
        let rule = GaussLegendre::new(24);
        rule.composite(|t| self.value(t).powi(2), a, b, 16)
    }
}

fn poly_eval(c: &[f64], s: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &x| acc * s + x)
}

fn poly_derivatives(c: &[f64], s: f64, order: usize) -> Vec<f64> {
    let mut out = vec![0.0; order + 1];
    let mut coeffs = c.to_vec();
    for slot in out.iter_mut() {
        if coeffs.is_empty() {
            break;
        }
        *slot = poly_eval(&coeffs, s);
        coeffs = coeffs.iter().enumerate().skip(1).map(|(i, x)| i as f64 * x).collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive;

    #[test]
    fn support_must_be_positive() {
        assert!(TestFunction::bump(0.5, 0.5).is_err());
        assert!(TestFunction::bump(0.5, 0.4).is_ok());
        assert!(TestFunction::bump(1.0, 0.0).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let f = TestFunction::with_polynomial(1.5, 0.8, vec![1.0, -0.3, 0.7]).unwrap();
        for &t in &[1.0, 1.3, 1.9, 2.2] {
            let d = f.derivatives(t, 4).unwrap();
            assert!((d[0] - f.value(t)).abs() < 1e-15);
            let h = 2e-5;
            for (m, &exact) in d.iter().enumerate().take(4).skip(1) {
                let dp = f.derivatives(t + h, m - 1).unwrap()[m - 1];
                let dm = f.derivatives(t - h, m - 1).unwrap()[m - 1];
                let fd = (dp - dm) / (2.0 * h);
                assert!((fd - exact).abs() < 1e-6 * (1.0 + exact.abs()), "t={t} m={m}: {fd} vs {exact}");
            }
        }
    }

    #[test]
    fn derivative_budget_is_enforced() {
        let f = TestFunction::bump(1.0, 0.5).unwrap().with_derivative_budget(2);
        assert!(f.derivatives(1.0, 2).is_ok());
        assert!(matches!(f.derivatives(1.0, 3), Err(TransformError::DerivativeBudget { .. })));
    }

    #[test]
    fn composite_rule_matches_adaptive() {
        for &(c, w) in &[(1.0, 0.5), (0.3, 0.25), (4.0, 3.5)] {
            let f = TestFunction::bump(c, w).unwrap();
            let exact = adaptive(|t| f.value(t), c - w, c + w, 1e-16, 1e-15).value;
            assert!((f.integral() - exact).abs() < 1e-14 * exact, "c={c} w={w}");
        }
    }
}
