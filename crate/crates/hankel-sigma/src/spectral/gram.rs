use serde::{Deserialize, Serialize};

use super::{Matrix, SpectralError};
use crate::sigma::{pair, KernelSpec, LambdaTest, SigmaDistribution, SigmaError};
use crate::transforms::{LaplaceTable, TestFunction};

/// Test functions spanning the trial space of a Gram form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestBasis {
    functions: Vec<TestFunction>,
}

impl TestBasis {
    pub fn new(functions: Vec<TestFunction>) -> Result<Self, SpectralError> {
        if functions.is_empty() {
            return Err(SpectralError::Basis("basis must be nonempty".into()));
        }
        for (i, f) in functions.iter().enumerate() {
            if f.support().0 <= 0.0 {
                return Err(SpectralError::Basis(format!("member {i} is not supported in (0, inf)")));
            }
            if functions[..i].iter().any(|g| g.center() == f.center() && g.width() == f.width()) {
                return Err(SpectralError::Basis(format!("member {i} repeats an earlier support")));
            }
        }
        Ok(Self { functions })
    }

    /// `count` bumps with centres spread over `[lo, hi]`, each of half-width
    /// `width`, with a linear factor varying from member to member.
    pub fn spread(lo: f64, hi: f64, width: f64, count: usize) -> Result<Self, SpectralError> {
        let functions = (0..count)
            .map(|i| {
                let c = if count == 1 { lo } else { lo + (hi - lo) * i as f64 / (count - 1) as f64 };
                let slope = 0.3 * (i as f64 - 0.5 * count as f64) / width;
                TestFunction::with_polynomial(c, width, vec![1.0, slope])
                    .map_err(|e| SpectralError::Basis(e.to_string()))
            })
            .collect::<Result<_, _>>()?;
        Self::new(functions)
    }

    pub fn functions(&self) -> &[TestFunction] {
        &self.functions
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }
}

/// `G_ij = <h, f_i* conv f_j> = int int h(s + u) f_i(s) f_j(u) ds du`.
///
/// Basis functions vanish near `t = 0`, so `s + u` stays away from the
/// kernel's singular point and tensor Gauss-Legendre on the supports is
/// accurate to near machine precision.
pub fn gram_form_kernel(h: &KernelSpec, basis: &TestBasis) -> Result<Matrix, SpectralError> {
    let nodes: Vec<(Vec<f64>, Vec<f64>)> = basis.functions.iter().map(TestFunction::weighted_nodes).collect();
    let n = basis.len();
    let mut g = Matrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let (si, wi) = &nodes[i];
            let (sj, wj) = &nodes[j];
            let mut total = 0.0;
            for (s, a) in si.iter().zip(wi) {
                if *a == 0.0 {
                    continue;
                }
                let mut inner = 0.0;
                for (u, b) in sj.iter().zip(wj) {
                    inner += b * h.eval(s + u);
                }
                total += a * inner;
            }
            if !total.is_finite() {
                return Err(SpectralError::Divergent { i, j });
            }
            g.set(i, j, total);
            g.set(j, i, total);
        }
    }
    Ok(g)
}

/// `(L f_i)(lambda) (L f_j)(lambda)` with exact derivatives.
struct LaplaceProduct<'a> {
    a: &'a LaplaceTable,
    b: &'a LaplaceTable,
    scale: f64,
}

impl LambdaTest for LaplaceProduct<'_> {
    fn derivatives(&self, lambda: f64, order: usize) -> Result<Vec<f64>, SigmaError> {
        let da = self.a.derivatives(lambda, order);
        let db = self.b.derivatives(lambda, order);
        Ok((0..=order)
            .map(|p| {
                let mut acc = 0.0;
                let mut binom = 1.0;
                for i in 0..=p {
                    acc += binom * da[i] * db[p - i];
                    binom = binom * (p - i) as f64 / (i + 1) as f64;
                }
                acc
            })
            .collect())
    }

    fn value(&self, lambda: f64) -> f64 {
        self.a.eval(lambda) * self.b.eval(lambda)
    }

    fn support(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    fn scale(&self) -> f64 {
        self.scale
    }
}

/// `S_ij = <sigma, (L f_i)* L f_j>`.
pub fn gram_form_sigma(sigma: &SigmaDistribution, basis: &TestBasis) -> Result<Matrix, SpectralError> {
    let tables: Vec<LaplaceTable> = basis.functions.iter().map(LaplaceTable::new).collect();
    let n = basis.len();
    let mut s = Matrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let reach = basis.functions[i].support().1 + basis.functions[j].support().1;
            let w = LaplaceProduct { a: &tables[i], b: &tables[j], scale: 1.0 / reach };
            let v = pair(sigma, &w)?;
            if !v.is_finite() {
                return Err(SpectralError::Divergent { i, j });
            }
            s.set(i, j, v);
            s.set(j, i, v);
        }
    }
    Ok(s)
}

/// Entrywise comparison of the two sides of the main identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub max_error: f64,
    pub per_entry: Vec<Vec<f64>>,
}

pub fn verify_main_identity(
    h: &KernelSpec,
    sigma: &SigmaDistribution,
    basis: &TestBasis,
) -> Result<IdentityReport, SpectralError> {
    let g = gram_form_kernel(h, basis)?;
    let s = gram_form_sigma(sigma, basis)?;
    let diff = g.minus(&s)?;
    Ok(IdentityReport { max_error: diff.max_abs(), per_entry: diff.rows().into_iter().map(|r| r.into_iter().map(f64::abs).collect()).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_kernel_and_sigma() {
        let basis = TestBasis::spread(1.0, 2.0, 0.4, 3).unwrap();
        assert_eq!(gram_form_kernel(&KernelSpec::zero(), &basis).unwrap().max_abs(), 0.0);
        assert_eq!(gram_form_sigma(&SigmaDistribution::zero(), &basis).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn rank_one_pair() {
        let basis = TestBasis::spread(0.6, 2.0, 0.4, 4).unwrap();
        let r = verify_main_identity(&KernelSpec::quasi_carleman(1.0, 0.0, 0.0), &SigmaDistribution::delta(1.0, 1.0), &basis)
            .unwrap();
        assert!(r.max_error < 1e-12, "{}", r.max_error);
    }

    #[test]
    fn basis_validation() {
        let f = TestFunction::bump(1.0, 0.5).unwrap();
        assert!(TestBasis::new(vec![]).is_err());
        assert!(TestBasis::new(vec![f.clone(), f]).is_err());
    }
}
