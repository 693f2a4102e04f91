use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{Grid, GridFunction, LinearGrid, LogGrid, TransformError};
use crate::sigma::KernelSpec;
use crate::specfun;

/// Relative tail mass above which a truncation warning is attached.
pub const TAIL_WARNING_THRESHOLD: f64 = 1e-8;

/// The transformed function does not decay within the grid; the periodic
/// FFT wraps the missing tail around.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationWarning {
    /// `L^2` mass in the outer 1/32 of the grid on each side, relative to the total.
    pub tail_mass: f64,
}

/// Mellin transform on the dual frequency grid.
#[derive(Debug, Clone)]
pub struct MellinTransform {
    pub transform: GridFunction,
    pub source_grid: LogGrid,
    pub warning: Option<TruncationWarning>,
}

/// Output of a transform on a log grid together with any truncation warning.
#[derive(Debug, Clone)]
pub struct Transformed {
    pub function: GridFunction,
    pub warning: Option<TruncationWarning>,
}

/// Spectral cutoff used whenever `Gamma(gamma + i xi)` is divided out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Regularization {
    /// `Xi`: the multiplier is inverted exactly for `|xi| <= Xi`.
    pub cutoff: f64,
    /// Width of the Gaussian taper applied beyond `Xi`.
    pub taper_width: f64,
}

impl Default for Regularization {
    fn default() -> Self {
        Self { cutoff: 12.0, taper_width: 1.0 }
    }
}

impl Regularization {
    pub fn validate(&self) -> Result<(), TransformError> {
        if !(self.cutoff >= 0.0) || !self.cutoff.is_finite() {
            return Err(TransformError::InvalidRegularization(format!("cutoff {}", self.cutoff)));
        }
        if !(self.taper_width > 0.0) || !self.taper_width.is_finite() {
            return Err(TransformError::InvalidRegularization(format!("taper width {}", self.taper_width)));
        }
        Ok(())
    }

    pub(crate) fn taper(&self, xi: f64) -> f64 {
        let excess = xi.abs() - self.cutoff;
        if excess <= 0.0 {
            1.0
        } else {
            (-0.5 * (excess / self.taper_width).powi(2)).exp()
        }
    }
}

/// Result of the regularized Laplace inversion.
#[derive(Debug, Clone)]
pub struct InverseLaplace {
    pub function: GridFunction,
    /// Largest factor by which a frequency component was multiplied,
    /// relative to the zero frequency (about `e^{pi Xi / 2}`).
    pub amplification: f64,
    pub warning: Option<TruncationWarning>,
}

fn fft_forward(data: &mut [Complex64]) {
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(data.len()).process(data);
}

fn fft_inverse(data: &mut [Complex64]) {
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(data.len()).process(data);
}

/// Unitary Fourier transform of samples `u(x_j)` onto the dual grid.
pub(crate) fn fourier_forward(grid: &LogGrid, u: &[Complex64]) -> Vec<Complex64> {
    let n = grid.n_points();
    let mut data: Vec<Complex64> =
        u.iter().enumerate().map(|(j, v)| if j % 2 == 0 { *v } else { -*v }).collect();
    fft_forward(&mut data);
    let scale = grid.dx() / (2.0 * PI).sqrt();
    (0..n)
        .map(|k| {
            let xi = grid.frequency(k);
            data[k] * Complex64::from_polar(scale, -grid.x_min() * xi)
        })
        .collect()
}

/// Inverse of [`fourier_forward`].
pub(crate) fn fourier_inverse(grid: &LogGrid, spectrum: &[Complex64]) -> Vec<Complex64> {
    let dual = grid.dual();
    let mut data: Vec<Complex64> = spectrum
        .iter()
        .enumerate()
        .map(|(k, v)| v * Complex64::from_polar(1.0, grid.x_min() * grid.frequency(k)))
        .collect();
    fft_inverse(&mut data);
    let scale = dual.step / (2.0 * PI).sqrt();
    data.iter().enumerate().map(|(j, v)| if j % 2 == 0 { v * scale } else { -v * scale }).collect()
}

/// `v(-xi)` on the dual grid (periodic identification of the Nyquist bin).
pub(crate) fn reflect(v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len();
    (0..n).map(|k| v[(n - k) % n]).collect()
}

fn tail_warning(u: &[Complex64]) -> Option<TruncationWarning> {
    let n = u.len();
    let edge = (n / 32).max(1);
    let total: f64 = u.iter().map(|v| v.norm_sqr()).sum();
    if total == 0.0 {
        return None;
    }
    let tail: f64 = u[..edge].iter().chain(&u[n - edge..]).map(|v| v.norm_sqr()).sum();
    let tail_mass = (tail / total).sqrt();
    (tail_mass > TAIL_WARNING_THRESHOLD).then_some(TruncationWarning { tail_mass })
}

fn require_log(f: &GridFunction) -> Result<LogGrid, TransformError> {
    f.log_grid().ok_or(TransformError::NotLogGrid)
}

/// Samples of `e^{(1/2 + shift) x} f(e^x)`.
fn weighted_u(grid: &LogGrid, f: &[Complex64], shift: f64) -> Vec<Complex64> {
    f.iter().enumerate().map(|(j, v)| v * ((0.5 + shift) * grid.x(j)).exp()).collect()
}

/// Mellin transform `(M f)(xi) = (2 pi)^{-1/2} int f(t) t^{-1/2 - i xi} dt`.
pub fn mellin(f: &GridFunction) -> Result<MellinTransform, TransformError> {
    let grid = require_log(f)?;
    let u = weighted_u(&grid, &f.values, 0.0);
    let warning = tail_warning(&u);
    let spectrum = fourier_forward(&grid, &u);
    Ok(MellinTransform {
        transform: GridFunction::new(Grid::Linear(grid.dual()), spectrum)?,
        source_grid: grid,
        warning,
    })
}

/// Inverse Mellin transform back onto `grid`.
pub fn inverse_mellin(transform: &GridFunction, grid: LogGrid) -> Result<GridFunction, TransformError> {
    match transform.grid {
        Grid::Linear(g) if g == grid.dual() => {}
        _ => return Err(TransformError::GridMismatch),
    }
    let u = fourier_inverse(&grid, &transform.values);
    let values = u.iter().enumerate().map(|(j, v)| v * (-0.5 * grid.x(j)).exp()).collect();
    GridFunction::new(Grid::Log(grid), values)
}

/// `L f = M^{-1} J Gamma_{1/2} M f`; the result lives on the same log grid,
/// read as `x = ln lambda`.
pub fn laplace_via_mellin(f: &GridFunction) -> Result<Transformed, TransformError> {
    laplace_via_mellin_gamma(f, 0.5)
}

/// `L = Omega^{1/2-gamma} M^{-1} J Gamma_gamma M Omega^{1/2-gamma}` for
/// `gamma > 0`, with `Omega` multiplication by the independent variable.
pub fn laplace_via_mellin_gamma(f: &GridFunction, gamma: f64) -> Result<Transformed, TransformError> {
    if !(gamma > 0.0) {
        return Err(TransformError::InvalidRegularization(format!("gamma must be positive, got {gamma}")));
    }
    let grid = require_log(f)?;
    // U Omega^{1/2-gamma} f = e^{(1-gamma) x} f(e^x)
    let u = weighted_u(&grid, &f.values, 0.5 - gamma);
    let mut warning = tail_warning(&u);
    let spectrum = fourier_forward(&grid, &u);
    let reflected = reflect(&spectrum);
    let multiplied: Vec<Complex64> = reflected
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let z = Complex64::new(gamma, -grid.frequency(k));
            // Gamma(gamma - i xi) never vanishes; the pole set is not reachable for gamma > 0.
            v * specfun::ln_gamma(z).map(|l| l.exp()).unwrap_or_default()
        })
        .collect();
    let w = fourier_inverse(&grid, &multiplied);
    if warning.is_none() {
        warning = tail_warning(&w);
    }
    // w = e^{gamma x} (L f)(e^x)
    let values = w.iter().enumerate().map(|(j, v)| v * (-gamma * grid.x(j)).exp()).collect();
    Ok(Transformed { function: GridFunction::new(Grid::Log(grid), values)?, warning })
}

fn amplification(reg: &Regularization, gamma: f64, dual: &LinearGrid) -> f64 {
    let base = specfun::ln_gamma_real_unchecked(gamma);
    (0..dual.n_points)
        .map(|k| {
            let xi = dual.x(k);
            let lg = specfun::ln_gamma(Complex64::new(gamma, xi)).map(|l| l.re).unwrap_or(base);
            reg.taper(xi) * (base - lg).exp()
        })
        .fold(0.0, f64::max)
}

fn check_amplification(reg: &Regularization, gamma: f64, dual: &LinearGrid) -> Result<f64, TransformError> {
    let amp = amplification(reg, gamma, dual);
    let limit = 1.0 / f64::EPSILON;
    if amp > limit {
        return Err(TransformError::AmplificationTooLarge { cutoff: reg.cutoff, amplification: amp, limit });
    }
    Ok(amp)
}

/// Regularized inverse Laplace transform `L^{-1} = M^{-1} Gamma_{1/2}^{-1} J M`.
///
/// `Gamma(1/2 + i xi)^{-1}` grows like `e^{pi |xi| / 2}`, so it is applied
/// only for `|xi| <= Xi` and damped by a Gaussian taper beyond. A cutoff
/// whose amplification exceeds `1/eps` is refused.
pub fn inverse_laplace(g: &GridFunction, reg: Regularization) -> Result<InverseLaplace, TransformError> {
    reg.validate()?;
    let grid = require_log(g)?;
    let dual = grid.dual();
    let amp = check_amplification(&reg, 0.5, &dual)?;
    let u = weighted_u(&grid, &g.values, 0.0);
    let warning = tail_warning(&u);
    let spectrum = reflect(&fourier_forward(&grid, &u));
    let divided: Vec<Complex64> = spectrum
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let xi = grid.frequency(k);
            let taper = reg.taper(xi);
            if taper < 1e-300 {
                return Complex64::default();
            }
            let lg = specfun::ln_gamma(Complex64::new(0.5, xi)).unwrap_or_default();
            v * taper * (-lg).exp()
        })
        .collect();
    let u = fourier_inverse(&grid, &divided);
    let values = u.iter().enumerate().map(|(j, v)| v * (-0.5 * grid.x(j)).exp()).collect();
    Ok(InverseLaplace { function: GridFunction::new(Grid::Log(grid), values)?, amplification: amp, warning })
}

/// Options for [`sigma_from_kernel`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[derive(Default)]
pub struct SigmaRecoveryOptions {
    pub regularization: Regularization,
    /// Weight exponent of the Mellin relation; chosen from the kernel's
    /// power behaviour when absent.
    pub gamma: Option<f64>,
}


/// Regular part of a sigma-function recovered from its kernel.
#[derive(Debug, Clone)]
pub struct SigmaRecovery {
    /// `sigma` on a log grid in `lambda` (or a linear two-sided grid for
    /// growing kernels); values are real.
    pub sigma: GridFunction,
    /// Weight exponent used (`None` on the two-sided route).
    pub gamma: Option<f64>,
    pub amplification: f64,
    /// Largest imaginary part discarded from the reconstruction.
    pub max_imaginary: f64,
    pub warning: Option<TruncationWarning>,
}

/// Weight exponent making `e^{gamma x} h(e^x)` decay (or stay flat for pure powers).
fn default_gamma(h: &KernelSpec) -> Result<f64, TransformError> {
    let s0 = h.singular_exponent();
    let lo = (-s0).max(0.0);
    let decay = h.decay_rate();
    if decay > 0.0 {
        return Ok(lo + 1.0);
    }
    let hi = -h.tail_exponent();
    if hi < lo {
        return Err(TransformError::UnsupportedKernel(format!(
            "no weight t^gamma balances t^{s0} at 0 against t^{} at infinity",
            h.tail_exponent()
        )));
    }
    let gamma = if hi == lo { lo } else { 0.5 * (lo + hi) };
    if !(gamma > 0.0) {
        return Err(TransformError::UnsupportedKernel("weight exponent must be positive".into()));
    }
    Ok(gamma)
}

/// Recovers the locally integrable part of `sigma` from `h = L* sigma`.
///
/// For kernels with `supp sigma` in `[0, inf)` this uses the Mellin relation
/// `(M Omega^{gamma-1/2} h)(xi) = Gamma(gamma - i xi) (M Omega^{1/2-gamma} sigma)(-xi)`
/// with the same cutoff regularization as [`inverse_laplace`]. Growing
/// kernels are continued to the imaginary axis, where `h(i tau)` is the
/// Fourier transform of `sigma` on the whole line.
pub fn sigma_from_kernel(
    h: &KernelSpec,
    grid: LogGrid,
    opts: SigmaRecoveryOptions,
) -> Result<SigmaRecovery, TransformError> {
    opts.regularization.validate()?;
    if h.is_growing() {
        return sigma_two_sided(h, grid.n_points(), opts.regularization);
    }
    let gamma = match opts.gamma {
        Some(g) if g > 0.0 => g,
        Some(g) => return Err(TransformError::InvalidRegularization(format!("gamma must be positive, got {g}"))),
        None => default_gamma(h)?,
    };
    let dual = grid.dual();
    let amp = check_amplification(&opts.regularization, gamma, &dual)?;
    // U Omega^{gamma - 1/2} h = e^{gamma x} h(e^x)
    let u: Vec<Complex64> = (0..grid.n_points())
        .map(|j| {
            let x = grid.x(j);
            Complex64::new((gamma * x).exp() * h.eval(x.exp()), 0.0)
        })
        .collect();
    if u.iter().any(|v| !v.re.is_finite()) {
        return Err(TransformError::NonFinite);
    }
    let warning = tail_warning(&u);
    let spectrum = reflect(&fourier_forward(&grid, &u));
    let divided: Vec<Complex64> = spectrum
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let xi = grid.frequency(k);
            let taper = opts.regularization.taper(xi);
            if taper < 1e-300 {
                return Complex64::default();
            }
            let lg = specfun::ln_gamma(Complex64::new(gamma, xi)).unwrap_or_default();
            v * taper * (-lg).exp()
        })
        .collect();
    // inverse gives U Omega^{1/2-gamma} sigma = e^{(1-gamma) x} sigma(e^x)
    let w = fourier_inverse(&grid, &divided);
    let mut max_imaginary: f64 = 0.0;
    let values = w
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let s = v * (-(1.0 - gamma) * grid.x(j)).exp();
            max_imaginary = max_imaginary.max(s.im.abs());
            Complex64::new(s.re, 0.0)
        })
        .collect();
    Ok(SigmaRecovery {
        sigma: GridFunction::new(Grid::Log(grid), values)?,
        gamma: Some(gamma),
        amplification: amp,
        max_imaginary,
        warning,
    })
}

/// `sigma(lambda) = (2 pi)^{-1} int h(i tau) e^{i tau lambda} d tau` on a
/// symmetric linear grid.
fn sigma_two_sided(h: &KernelSpec, n: usize, reg: Regularization) -> Result<SigmaRecovery, TransformError> {
    if h.eval_complex(Complex64::new(0.0, 1.0)).is_none() {
        return Err(TransformError::UnsupportedKernel(
            "growing kernel needs an analytic continuation to the imaginary axis".into(),
        ));
    }
    let half = reg.cutoff + 8.0 * reg.taper_width;
    let tau_grid = LogGrid::new(-half, half, n)?;
    let dual = tau_grid.dual();
    let samples: Vec<Complex64> = tau_grid
        .xs()
        .into_iter()
        .map(|tau| {
            let v = h.eval_complex(Complex64::new(0.0, tau)).unwrap_or_default();
            v * reg.taper(tau)
        })
        .collect();
    if samples.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(TransformError::NonFinite);
    }
    // Phi gives (2 pi)^{-1/2} int g(tau) e^{-i tau xi}; sigma(lambda) = (2 pi)^{-1/2} (Phi g)(-lambda)
    let spectrum = reflect(&fourier_forward(&tau_grid, &samples));
    let scale = (2.0 * PI).sqrt().recip();
    let mut max_imaginary: f64 = 0.0;
    let values = spectrum
        .iter()
        .map(|v| {
            let s = v * scale;
            max_imaginary = max_imaginary.max(s.im.abs());
            Complex64::new(s.re, 0.0)
        })
        .collect();
    Ok(SigmaRecovery {
        sigma: GridFunction::new(Grid::Linear(dual), values)?,
        gamma: None,
        amplification: 1.0,
        max_imaginary,
        warning: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wide() -> LogGrid {
        LogGrid::new(-45.0, 45.0, 8192).unwrap()
    }

    #[test]
    fn mellin_of_exponential_is_gamma() {
        let grid = wide();
        let f = GridFunction::sample_log(grid, |t| (-t).exp()).unwrap();
        let m = mellin(&f).unwrap();
        let reflected = reflect(&m.transform.values);
        for k in (0..grid.n_points()).step_by(7) {
            let xi = grid.frequency(k);
            if xi.abs() > 20.0 || k == 0 {
                continue;
            }
            let expected = specfun::gamma(Complex64::new(0.5, xi)).unwrap();
            let got = reflected[k] * (2.0 * PI).sqrt();
            assert!((got - expected).norm() < 1e-8, "xi={xi}: {got} vs {expected}");
        }
    }

    #[test]
    fn inverse_mellin_roundtrip() {
        let grid = LogGrid::new(-10.0, 10.0, 1024).unwrap();
        let f = GridFunction::sample_log(grid, |t| t * (-t).exp()).unwrap();
        let back = inverse_mellin(&mellin(&f).unwrap().transform, grid).unwrap();
        for (a, b) in f.values.iter().zip(&back.values) {
            assert!((a - b).norm() < 1e-12 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn carleman_sigma_is_one() {
        let rec = sigma_from_kernel(&KernelSpec::carleman(), LogGrid::default(), Default::default()).unwrap();
        assert_eq!(rec.gamma, Some(1.0));
        for v in &rec.sigma.values {
            assert!((v.re - 1.0).abs() < 1e-8, "{v}");
        }
    }

    #[test]
    fn large_cutoff_is_refused() {
        let g = GridFunction::sample_log(LogGrid::default(), |l| 1.0 / (1.0 + l)).unwrap();
        let reg = Regularization { cutoff: 30.0, taper_width: 1.0 };
        assert!(matches!(inverse_laplace(&g, reg), Err(TransformError::AmplificationTooLarge { .. })));
        let ok = inverse_laplace(&g, Regularization::default()).unwrap();
        let expected = (6.0 * PI).exp();
        assert!(ok.amplification > 0.5 * expected && ok.amplification < 3.0 * expected);
    }
}
