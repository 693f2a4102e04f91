use super::TestFunction;
use crate::quad::adaptive;

/// Absolute floor of the reference quadratures; the relative tolerance governs
/// so that `L f` keeps full relative accuracy where it is exponentially small.
const ABS_FLOOR: f64 = 1e-300;

/// `(L f)(lambda) = int_0^inf e^{-t lambda} f(t) dt` by adaptive quadrature on the support.
pub fn laplace_direct(f: &TestFunction, lambda: f64) -> f64 {
    let (a, b) = f.support();
    adaptive(|t| (-t * lambda).exp() * f.value(t), a, b, ABS_FLOOR, 1e-14).value
}

/// `d^p/d lambda^p (L f)(lambda) = L[(-t)^p f](lambda)` for `p = 0..=order`.
pub fn laplace_direct_derivatives(f: &TestFunction, lambda: f64, order: usize) -> Vec<f64> {
    let (a, b) = f.support();
    (0..=order)
        .map(|p| {
            adaptive(|t| (-t).powi(p as i32) * (-t * lambda).exp() * f.value(t), a, b, ABS_FLOOR, 1e-14).value
        })
        .collect()
}

/// Laplace transform of a fixed test function at many points, with the
/// quadrature nodes computed once.
#[derive(Debug, Clone)]
pub struct LaplaceTable {
    nodes: Vec<f64>,
    weighted: Vec<f64>,
}

impl LaplaceTable {
    pub fn new(f: &TestFunction) -> Self {
        let (nodes, weighted) = f.weighted_nodes();
        Self { nodes, weighted }
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        self.nodes.iter().zip(&self.weighted).map(|(t, w)| w * (-t * lambda).exp()).sum()
    }

    /// Derivatives `0..=order` at `lambda`.
    pub fn derivatives(&self, lambda: f64, order: usize) -> Vec<f64> {
        let mut out = vec![0.0; order + 1];
        for (t, w) in self.nodes.iter().zip(&self.weighted) {
            let mut term = w * (-t * lambda).exp();
            for slot in out.iter_mut() {
                *slot += term;
                term *= -t;
            }
        }
        out
    }
}

/// `(f1* conv f2)(t) = int_0^t conj(f1(s)) f2(t - s) ds` for real test functions.
pub fn laplace_convolution(f1: &TestFunction, f2: &TestFunction, t: f64) -> f64 {
    let (a1, b1) = f1.support();
    let (a2, b2) = f2.support();
    let lo = a1.max(t - b2).max(0.0);
    let hi = b1.min(t - a2).min(t);
    if !(lo < hi) {
        return 0.0;
    }
    adaptive(|s| f1.value(s) * f2.value(t - s), lo, hi, 1e-14, 1e-13).value
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_at_zero_is_integral() {
        let f = TestFunction::bump(1.0, 0.5).unwrap();
        assert!((laplace_direct(&f, 0.0) - f.integral()).abs() < 1e-13);
    }

    #[test]
    fn table_matches_direct() {
        let f = TestFunction::with_polynomial(2.0, 1.2, vec![1.0, 0.5]).unwrap();
        let table = LaplaceTable::new(&f);
        for &l in &[0.0, 0.3, 1.0, 4.0] {
            let d = laplace_direct_derivatives(&f, l, 3);
            let t = table.derivatives(l, 3);
            for (x, y) in d.iter().zip(&t) {
                assert!((x - y).abs() < 1e-12 * (1.0 + x.abs()));
            }
            assert!((table.eval(l) - d[0]).abs() < 1e-13);
        }
    }

    #[test]
    fn convolution_vanishes_off_support_sum() {
        let f1 = TestFunction::bump(1.0, 0.2).unwrap();
        let f2 = TestFunction::bump(2.0, 0.3).unwrap();
        assert_eq!(laplace_convolution(&f1, &f2, 2.4), 0.0);
        assert_eq!(laplace_convolution(&f1, &f2, 3.6), 0.0);
        assert!(laplace_convolution(&f1, &f2, 3.0) > 0.0);
    }
}
