use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::SpectralError;

/// Dense square matrix in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, SpectralError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(SpectralError::Shape("rows must all have length n".into()));
        }
        Ok(Self { n, data: rows.concat() })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).map(<[f64]>::to_vec).collect()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Entrywise difference `self - other`.
    pub fn minus(&self, other: &Self) -> Result<Self, SpectralError> {
        if self.n != other.n {
            return Err(SpectralError::Shape(format!("{}x{} vs {}x{}", self.n, self.n, other.n, other.n)));
        }
        Ok(Self { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() })
    }

    /// Row-major CSV, shortest round-trip formatting.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.data.chunks(self.n.max(1)) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }
}

/// `n x n` finite section of the Hankel matrix `q_{i+j}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HankelSection {
    n: usize,
    q: Vec<f64>,
}

impl HankelSection {
    /// Needs `q_0 .. q_{2n-2}`.
    pub fn new(q: &[f64], n: usize) -> Result<Self, SpectralError> {
        if n == 0 {
            return Err(SpectralError::Shape("section size must be positive".into()));
        }
        if q.len() < 2 * n - 1 {
            return Err(SpectralError::Shape(format!("section of size {n} needs {} moments, got {}", 2 * n - 1, q.len())));
        }
        if q[..2 * n - 1].iter().any(|v| !v.is_finite()) {
            return Err(SpectralError::NonFinite);
        }
        Ok(Self { n, q: q[..2 * n - 1].to_vec() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.q[i + j]
    }

    pub fn matrix(&self) -> Matrix {
        Matrix::from_fn(self.n, |i, j| self.q[i + j])
    }

    /// `eps * n * max |q|`, the default zero threshold for sign counts.
    pub fn default_tau(&self) -> f64 {
        default_tau(self.n, &self.q)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eig_sym(&self.matrix()).expect("Hankel sections are symmetric")
    }
}

pub fn default_tau(n: usize, q: &[f64]) -> f64 {
    f64::EPSILON * n as f64 * q.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
///
/// Sweeps stop once the off-diagonal Frobenius norm is below
/// `eps * ||m||_F`.
pub fn eig_sym(m: &Matrix) -> Result<Vec<f64>, SpectralError> {
    let n = m.n();
    let norm = m.frobenius();
    if !norm.is_finite() {
        return Err(SpectralError::NonFinite);
    }
    if m.asymmetry() > 1e-12 * m.max_abs() {
        return Err(SpectralError::NotSymmetric(m.asymmetry()));
    }
    let mut a = m.data.clone();
    let target = f64::EPSILON * norm;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |j| *j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                if apq.abs() < 1e-300 || apq.abs() <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let g = a[k * n + p];
                    let h = a[k * n + q];
                    let gp = g - s * (h + g * tau);
                    let hq = h + s * (g - h * tau);
                    a[k * n + p] = gp;
                    a[p * n + k] = gp;
                    a[k * n + q] = hq;
                    a[q * n + k] = hq;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eigs.sort_by(f64::total_cmp);
    Ok(eigs)
}

/// `(#{lambda > tau}, #{lambda < -tau})`.
pub fn count_signs(eigs: &[f64], tau: f64) -> (usize, usize) {
    let pos = eigs.iter().filter(|e| **e > tau).count();
    let neg = eigs.iter().filter(|e| **e < -tau).count();
    (pos, neg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        let d = Matrix::from_rows(&[vec![3.0, 0.0, 0.0], vec![0.0, -1.0, 0.0], vec![0.0, 0.0, 0.0]]).unwrap();
        assert_eq!(eig_sym(&d).unwrap(), vec![-1.0, 0.0, 3.0]);
        let x = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let e = eig_sym(&x).unwrap();
        assert!((e[0] + 1.0).abs() < 1e-15 && (e[1] - 1.0).abs() < 1e-15);
        assert_eq!(count_signs(&[-1.0, 0.0, 3.0], 1e-10), (1, 1));
        assert_eq!(count_signs(&[0.0; 4], 0.0), (0, 0));
    }

    #[test]
    fn hilbert_3x3_matches_oracle() {
        let q: Vec<f64> = (0..5).map(|n| 1.0 / (n as f64 + 1.0)).collect();
        let e = HankelSection::new(&q, 3).unwrap().eigenvalues();
        let oracle = [0.002_687_340_355_773_529_4, 0.122_327_065_853_905_85, 1.408_318_927_123_654];
        for (a, b) in e.iter().zip(oracle) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn rejects_asymmetric() {
        let m = Matrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.0]]).unwrap();
        assert!(matches!(eig_sym(&m), Err(SpectralError::NotSymmetric(_))));
    }
}
