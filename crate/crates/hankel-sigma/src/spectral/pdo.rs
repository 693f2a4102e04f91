use num_complex::Complex64;

use super::SpectralError;
use crate::sigma::{SigmaAtom, SigmaDistribution};
use crate::specfun;
use crate::transforms::{fourier_forward, fourier_inverse, Grid, GridFunction, TransformError};

/// Frequencies kept on the `xi` side; `Gamma(1/2 + i xi)` is below `1e-16`
/// of its peak beyond this band.
pub const PDO_BAND: f64 = 24.0;

/// Largest `lambda` kept for half-line steps, in units of `1 / inf supp f`:
/// `(L f)(lambda) <= ||f||_1 e^{-40}` beyond it.
const LAMBDA_REACH: f64 = 40.0;

/// `s(x) = sigma(e^{-x})` for one atom type.
enum Symbol {
    /// `coeff` on `x1 <= x <= x2`.
    Interval { x1: f64, x2: f64, coeff: f64 },
    /// Bounded density sampled on a grid.
    Pointwise(SigmaAtom),
}

fn symbols(sigma: &SigmaDistribution, x_lo: f64, x_hi: f64) -> Result<Vec<Symbol>, SpectralError> {
    sigma
        .atoms
        .iter()
        .map(|atom| match atom {
            SigmaAtom::FinitePart { alpha, k, r, coeff } if *k == -1.0 && *r == 0.0 && *alpha >= 0.0 => {
                // lambda >= alpha  <=>  x <= -ln alpha
                let x2 = if *alpha == 0.0 { x_hi } else { (-alpha.ln()).min(x_hi) };
                Ok(Symbol::Interval { x1: x_lo, x2, coeff: *coeff })
            }
            SigmaAtom::Regular { alpha, .. } if *alpha >= 0.0 => Ok(Symbol::Pointwise(atom.clone())),
            _ => Err(SpectralError::UnsupportedSigma(
                "the symbol path handles bounded densities and steps (lambda - alpha)_+^0 only".into(),
            )),
        })
        .collect()
}

/// `(1/2pi) int_{x1}^{x2} e^{i kappa x} dx`.
fn interval_kernel(kappa: f64, x1: f64, x2: f64) -> Complex64 {
    let scale = 1.0 / (2.0 * std::f64::consts::PI);
    if kappa.abs() * (x2 - x1) < 1e-8 {
        return Complex64::new(scale * (x2 - x1), 0.0);
    }
    let e2 = Complex64::from_polar(1.0, kappa * x2);
    let e1 = Complex64::from_polar(1.0, kappa * x1);
    (e2 - e1) / Complex64::new(0.0, kappa) * scale
}

/// `H f` through the symbol representation `H = M* V Phi S Phi* V M`,
/// where `M` is the Mellin transform with phase `arg Gamma(1/2 + i xi)`,
/// `V` multiplication by `|Gamma(1/2 + i xi)|` and `S` multiplication by
/// `s(x) = sigma(e^{-x})`.
///
/// Steps are applied exactly in frequency space; bounded densities are
/// multiplied on the grid of `f`.
pub fn apply_via_pdo(sigma: &SigmaDistribution, f: &GridFunction) -> Result<GridFunction, SpectralError> {
    let grid = f.log_grid().ok_or(SpectralError::Transform(TransformError::NotLogGrid))?;
    let n = grid.n_points();
    let dual = grid.dual();
    let pts = grid.points();
    let first = pts
        .iter()
        .zip(&f.values)
        .find(|(_, v)| v.norm() > 0.0)
        .map(|(p, _)| *p)
        .unwrap_or(1.0);
    let x_lo = (-(LAMBDA_REACH / first).ln()).max(grid.x_min());
    let syms = symbols(sigma, x_lo, grid.x_max())?;

    // K(xi) = Gamma(1/2 + i xi) (M f)(xi), restricted to the band
    let u: Vec<Complex64> = f.values.iter().enumerate().map(|(j, v)| v * (0.5 * grid.x(j)).exp()).collect();
    let spectrum = fourier_forward(&grid, &u);
    let band: Vec<usize> = (0..n).filter(|k| grid.frequency(*k).abs() <= PDO_BAND).collect();
    let gamma_plus: Vec<Complex64> = band
        .iter()
        .map(|k| specfun::gamma(Complex64::new(0.5, grid.frequency(*k))).map_err(|e| SpectralError::Numerical(e.to_string())))
        .collect::<Result<_, _>>()?;
    let mut kvec = vec![Complex64::default(); n];
    for (idx, k) in band.iter().enumerate() {
        kvec[*k] = gamma_plus[idx] * spectrum[*k];
    }

    // Y = Phi S Phi* K
    let mut y = vec![Complex64::default(); n];
    let mut pointwise = Vec::new();
    for sym in &syms {
        match sym {
            Symbol::Interval { x1, x2, coeff } => {
                if x2 <= x1 {
                    continue;
                }
                for &k in &band {
                    let xi = grid.frequency(k);
                    let mut acc = Complex64::default();
                    for &kp in &band {
                        acc += kvec[kp] * interval_kernel(grid.frequency(kp) - xi, *x1, *x2);
                    }
                    y[k] += acc * dual.step * coeff;
                }
            }
            Symbol::Pointwise(atom) => pointwise.push(atom),
        }
    }
    if !pointwise.is_empty() {
        let psi = fourier_inverse(&grid, &kvec);
        let weighted: Vec<Complex64> = psi
            .iter()
            .enumerate()
            .map(|(j, v)| {
                let lambda = (-grid.x(j)).exp();
                v * pointwise.iter().filter_map(|a| a.density(lambda)).sum::<f64>()
            })
            .collect();
        let back = fourier_forward(&grid, &weighted);
        for &k in &band {
            y[k] += back[k];
        }
    }

    // M(H f)(xi) = Gamma(1/2 - i xi) Y(xi)
    let mut z = vec![Complex64::default(); n];
    for (idx, k) in band.iter().enumerate() {
        z[*k] = gamma_plus[idx].conj() * y[*k];
    }
    let w = fourier_inverse(&grid, &z);
    let values = w.iter().enumerate().map(|(j, v)| v * (-0.5 * grid.x(j)).exp()).collect();
    GridFunction::new(Grid::Log(grid), values).map_err(SpectralError::Transform)
}

/// `(H f, g)` by the trapezoid rule on the common grid.
pub fn pdo_form(sigma: &SigmaDistribution, f: &GridFunction, g: &GridFunction) -> Result<f64, SpectralError> {
    let hf = apply_via_pdo(sigma, f)?;
    Ok(hf.inner(g).map_err(SpectralError::Transform)?.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::LogGrid;

    #[test]
    fn zero_sigma_gives_zero() {
        let grid = LogGrid::new(-20.0, 20.0, 4096).unwrap();
        let f = GridFunction::sample_log(grid, |t| (-(t - 1.0).powi(2) * 8.0).exp()).unwrap();
        let hf = apply_via_pdo(&SigmaDistribution::zero(), &f).unwrap();
        assert!(hf.values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn singular_sigma_is_rejected() {
        let grid = LogGrid::new(-20.0, 20.0, 4096).unwrap();
        let f = GridFunction::sample_log(grid, |t| (-(t - 1.0).powi(2) * 8.0).exp()).unwrap();
        let s = crate::sigma::quasi_carleman_sigma(1.0, 0.0, 0.5);
        assert!(matches!(apply_via_pdo(&s, &f), Err(SpectralError::UnsupportedSigma(_))));
    }
}
