use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::moments::{kernel_from_q, lambda_of_mu, q_from_eta, Summation};
use super::sequence::{chebyshev_nodes, legendre_values};
use super::{DiscreteError, EtaFunction, EtaStep, MomentSequence};
use crate::quad::GaussLegendre;
use crate::sigma::{KernelSpec, SigmaAtom, TabulatedKernel};
use crate::transforms::{
    fourier_inverse, reflect, sigma_from_kernel, Grid, LogGrid, Regularization, SigmaRecoveryOptions,
};

/// Options shared by the three reconstruction routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MomentSolveOptions {
    /// Frequency cutoff `Xi` of the pipeline and direct routes.
    pub cutoff: f64,
    pub taper_width: f64,
    /// Half-width in `ln lambda` and size of the grid used by the transform routes.
    pub half_width: f64,
    pub grid_size: usize,
    /// Chebyshev points at which the transform routes tabulate `eta`.
    pub n_nodes: usize,
    /// Residual `max |q_n - q_n(eta)|` above which the result is flagged.
    pub residual_bound: f64,
    /// Relative singular-value threshold of the least-squares route.
    pub svd_rtol: f64,
    /// Let the least-squares route add one located jump to its polynomial model.
    pub detect_jump: bool,
}

impl Default for MomentSolveOptions {
    fn default() -> Self {
        Self {
            cutoff: 10.0,
            taper_width: 1.0,
            half_width: 12.0,
            grid_size: 2048,
            n_nodes: 512,
            residual_bound: 1e-4,
            svd_rtol: 1e-10,
            detect_jump: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Truncated-SVD fit of a Legendre series, enriched with located jumps.
    LeastSquares,
    /// Kernel from the Laguerre series, Laplace inversion, change of variables.
    Pipeline,
    /// Mellin data from Meixner-Pollaczek sums, inverse Mellin transform.
    Direct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteEstimate {
    pub route: Route,
    pub eta: EtaFunction,
    /// `max_n |q_n - int eta mu^n dmu|`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteFailure {
    pub route: Route,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSolution {
    pub estimates: Vec<RouteEstimate>,
    pub failures: Vec<RouteFailure>,
    /// Route with the smallest residual.
    pub best: Route,
    /// Whether the best residual is within the bound.
    pub converged: bool,
    /// `max |eta_pipeline - eta_direct|` on `[-0.9, 0.9]`, when both exist.
    pub disagreement: Option<f64>,
}

impl MomentSolution {
    pub fn estimate(&self, route: Route) -> Option<&RouteEstimate> {
        self.estimates.iter().find(|e| e.route == route)
    }

    pub fn best_estimate(&self) -> &RouteEstimate {
        self.estimate(self.best).expect("best route has an estimate")
    }
}

type RouteFn = fn(&MomentSequence, &MomentSolveOptions) -> Result<EtaFunction, DiscreteError>;

/// Reconstructs `eta` with `q_n = int eta(mu) mu^n dmu` by three routes and
/// reports each residual. The problem is ill-posed; residuals above the
/// bound flag the result as non-convergent rather than failing.
pub fn moment_solve(q: &MomentSequence, opts: &MomentSolveOptions) -> Result<MomentSolution, DiscreteError> {
    if q.is_empty() {
        return Err(DiscreteError::Empty);
    }
    Regularization { cutoff: opts.cutoff, taper_width: opts.taper_width }.validate()?;
    if opts.n_nodes < 2 || opts.grid_size < 16 || !(opts.half_width > 0.0) {
        return Err(DiscreteError::InvalidArgument("grid sizes must be at least 2 / 16 with a positive half-width".into()));
    }
    let mut estimates = Vec::new();
    let mut failures = Vec::new();
    let routes: [(Route, RouteFn); 3] = [
        (Route::LeastSquares, least_squares_route),
        (Route::Pipeline, pipeline_route),
        (Route::Direct, direct_route),
    ];
    for (route, run) in routes {
        match run(q, opts).and_then(|eta| {
            let residual = q_from_eta(&eta, q.len())?.max_diff(q);
            Ok(RouteEstimate { route, eta, residual })
        }) {
            Ok(est) if est.residual.is_finite() => estimates.push(est),
            Ok(_) => failures.push(RouteFailure { route, error: "non-finite residual".into() }),
            Err(e) => failures.push(RouteFailure { route, error: e.to_string() }),
        }
    }
    let best = estimates
        .iter()
        .min_by(|a, b| a.residual.total_cmp(&b.residual))
        .ok_or_else(|| DiscreteError::InvalidArgument("no reconstruction route succeeded".into()))?;
    let (best_route, converged) = (best.route, best.residual <= opts.residual_bound);
    let find = |r: Route| estimates.iter().find(|e| e.route == r);
    let disagreement = match (find(Route::Pipeline), find(Route::Direct)) {
        (Some(a), Some(b)) => Some(
            chebyshev_nodes(opts.n_nodes)
                .into_iter()
                .filter(|m| m.abs() <= 0.9)
                .fold(0.0, |acc: f64, m| acc.max((a.eta.eval(m) - b.eta.eval(m)).abs())),
        ),
        _ => None,
    };
    Ok(MomentSolution { estimates, failures, best: best_route, converged, disagreement })
}

/// Minimum-norm solution of `a x = b` with singular values below
/// `rtol * s_max` discarded.
fn tsvd_solve(a: &[Vec<f64>], b: &[f64], rtol: f64) -> Result<Vec<f64>, DiscreteError> {
    let cols = a.first().map_or(0, Vec::len);
    let m = DMatrix::from_fn(a.len(), cols, |i, j| a[i][j]);
    let svd = m.svd(true, true);
    let s_max = svd.singular_values.max();
    svd.solve(&DVector::from_column_slice(b), rtol * s_max)
        .map(|x| x.as_slice().to_vec())
        .map_err(|e| DiscreteError::InvalidArgument(e.to_string()))
}

/// Rows `int P_l(mu) mu^n dmu` for `n < n_moments`, `l <= deg`.
fn legendre_design(n_moments: usize, deg: usize) -> Vec<Vec<f64>> {
    let rule = GaussLegendre::new((deg + n_moments) / 2 + 2);
    let mut a = vec![vec![0.0; deg + 1]; n_moments];
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let p = legendre_values(deg, *x);
        let mut pow = *w;
        for row in a.iter_mut() {
            for (slot, pl) in row.iter_mut().zip(&p) {
                *slot += pow * pl;
            }
            pow *= x;
        }
    }
    a
}

/// Number of Legendre coefficients the moments determine above `rtol`.
fn resolvable_rank(n_moments: usize, rtol: f64) -> usize {
    let a = legendre_design(n_moments, n_moments - 1);
    let s = DMatrix::from_fn(n_moments, n_moments, |i, j| a[i][j]).svd(false, false).singular_values;
    let s_max = s.max();
    s.iter().filter(|v| **v > rtol * s_max).count()
}

/// Coefficients and max-norm residual of a least-squares fit.
struct Fit {
    coeffs: Vec<f64>,
    residual: f64,
}

/// Fits the Legendre design plus one column `int_c^1 mu^n dmu` per step location.
fn fit_with_steps(design: &[Vec<f64>], steps: &[f64], q: &[f64], rtol: f64) -> Result<Fit, DiscreteError> {
    let rows: Vec<Vec<f64>> = design
        .iter()
        .enumerate()
        .map(|(n, row)| {
            let np1 = n as f64 + 1.0;
            row.iter().copied().chain(steps.iter().map(|c| (1.0 - c.powi(n as i32 + 1)) / np1)).collect()
        })
        .collect();
    let coeffs = tsvd_solve(&rows, q, rtol)?;
    let residual = rows
        .iter()
        .zip(q)
        .map(|(row, qn)| (row.iter().zip(&coeffs).map(|(a, x)| a * x).sum::<f64>() - qn).abs())
        .fold(0.0, f64::max);
    Ok(Fit { coeffs, residual })
}

/// A jump is kept only if it lowers the residual by this factor.
const JUMP_GAIN: f64 = 1e-3;
const JUMP_SCAN_POINTS: usize = 256;

/// Location in `(-1, 1)` minimizing the residual with one step.
fn locate_jump(design: &[Vec<f64>], q: &[f64], rtol: f64) -> Result<Option<(f64, Fit)>, DiscreteError> {
    let residual_at = |c: f64| -> Result<f64, DiscreteError> { Ok(fit_with_steps(design, &[c], q, rtol)?.residual) };
    let scan = chebyshev_nodes(JUMP_SCAN_POINTS);
    let mut values = Vec::with_capacity(scan.len());
    for c in &scan {
        values.push(residual_at(*c)?);
    }
    // the minimum at a true jump is a narrow V, so every local minimum of the scan is refined
    let mut best: Option<(f64, f64)> = None;
    for i in 0..scan.len() {
        let left = if i == 0 { f64::INFINITY } else { values[i - 1] };
        let right = values.get(i + 1).copied().unwrap_or(f64::INFINITY);
        if values[i] > left || values[i] > right {
            continue;
        }
        let lo = if i == 0 { -1.0 + 1e-12 } else { scan[i - 1] };
        let hi = if i + 1 == scan.len() { 1.0 - 1e-12 } else { scan[i + 1] };
        let (at, r) = golden_min(&residual_at, lo, hi)?;
        if best.is_none_or(|(_, b)| r < b) {
            best = Some((at, r));
        }
    }
    let Some((at, _)) = best else {
        return Ok(None);
    };
    Ok(Some((at, fit_with_steps(design, &[at], q, rtol)?)))
}

fn golden_min(
    f: &impl Fn(f64) -> Result<f64, DiscreteError>,
    mut lo: f64,
    mut hi: f64,
) -> Result<(f64, f64), DiscreteError> {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (hi - ratio * (hi - lo), lo + ratio * (hi - lo));
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while hi - lo > 1e-13 {
        if f1 <= f2 {
            hi = x2;
            (x2, f2) = (x1, f1);
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            (x1, f1) = (x2, f2);
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}

/// Polynomial fit of full degree, or a polynomial of half the resolvable
/// degree plus one step when a located jump explains the moments far
/// better. Polynomials alone cannot resolve a discontinuity beyond the
/// Gibbs limit.
fn least_squares_route(q: &MomentSequence, opts: &MomentSolveOptions) -> Result<EtaFunction, DiscreteError> {
    let n = q.len();
    let full = fit_with_steps(&legendre_design(n, n - 1), &[], q.values(), opts.svd_rtol)?;
    let smooth = EtaFunction::from_legendre(full.coeffs)?;
    if !opts.detect_jump || n < 8 {
        return Ok(smooth);
    }
    let scale = q.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let design = legendre_design(n, resolvable_rank(n, opts.svd_rtol) / 2);
    let base = fit_with_steps(&design, &[], q.values(), opts.svd_rtol)?;
    if base.residual <= 1e3 * f64::EPSILON * scale {
        return Ok(smooth);
    }
    let Some((at, fit)) = locate_jump(&design, q.values(), opts.svd_rtol)? else {
        return Ok(smooth);
    };
    if fit.residual > JUMP_GAIN * base.residual {
        return Ok(smooth);
    }
    let deg = design[0].len();
    let eta = EtaFunction {
        legendre: fit.coeffs[..deg].to_vec(),
        steps: vec![EtaStep { at, height: fit.coeffs[deg] }],
        ..EtaFunction::default()
    };
    eta.validate()?;
    Ok(eta)
}

/// Frequency band in which `N` moments determine the Mellin data: the
/// truncated Meixner-Pollaczek tail grows like `e^{pi |xi|} / N`.
fn resolvable_band(n_moments: usize, opts: &MomentSolveOptions) -> Regularization {
    let band = (n_moments.max(2) as f64).ln() / std::f64::consts::PI;
    Regularization { cutoff: opts.cutoff.min(band), taper_width: opts.taper_width.min(0.5) }
}

fn transform_grid(opts: &MomentSolveOptions) -> Result<LogGrid, DiscreteError> {
    Ok(LogGrid::symmetric(opts.half_width, opts.grid_size)?)
}

/// Tabulates `sigma` (given on a log grid in `lambda`) as `eta` at Chebyshev points.
fn eta_from_samples(grid: LogGrid, values: Vec<f64>, n_nodes: usize) -> Result<EtaFunction, DiscreteError> {
    let atom = SigmaAtom::Regular { grid: Grid::Log(grid), values, alpha: 0.0, r: 0.0 };
    let nodes = chebyshev_nodes(n_nodes);
    let values = nodes.iter().map(|m| atom.density(lambda_of_mu(*m)).unwrap_or(0.0)).collect();
    EtaFunction::new(nodes, values, Vec::new())
}

fn pipeline_route(q: &MomentSequence, opts: &MomentSolveOptions) -> Result<EtaFunction, DiscreteError> {
    let series = q.clone();
    let n = q.len();
    let h = KernelSpec::Tabulated(TabulatedKernel::new(
        "laguerre_series",
        move |t| kernel_from_q(&series, t, n, Summation::Cesaro).unwrap_or(f64::NAN),
        0.0,
        0.5,
        0.0,
    ));
    let grid = transform_grid(opts)?;
    let recovery = sigma_from_kernel(
        &h,
        grid,
        SigmaRecoveryOptions {
            regularization: resolvable_band(n, opts),
            gamma: None,
        },
    )?;
    eta_from_samples(grid, recovery.sigma.real_parts(), opts.n_nodes)
}

/// `int lambda^{-1+i xi} sigma dlambda = 2^{1-i xi} sum_n i^{-n} q_n P_n(-xi)`.
fn mellin_data(q: &MomentSequence, xi: f64) -> Complex64 {
    let i_pow = [Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, 1.0)];
    let x = -xi;
    let (mut p0, mut p1) = (0.0, 1.0);
    let mut acc = Complex64::default();
    for (n, qn) in q.values().iter().enumerate() {
        if n > 0 {
            let nf = (n - 1) as f64;
            let p2 = (2.0 * x * p1 - (nf + 1.0) * p0) / (nf + 1.0);
            p0 = p1;
            p1 = p2;
        }
        acc += i_pow[n % 4] * qn * p1;
    }
    let two = Complex64::new(2.0, 0.0).powc(Complex64::new(1.0, -xi));
    two * acc
}

fn direct_route(q: &MomentSequence, opts: &MomentSolveOptions) -> Result<EtaFunction, DiscreteError> {
    let grid = transform_grid(opts)?;
    let reg = resolvable_band(q.len(), opts);
    let data: Vec<Complex64> = (0..grid.n_points())
        .map(|k| {
            let xi = grid.frequency(k);
            let taper = reg.taper(xi);
            if taper < 1e-300 {
                Complex64::default()
            } else {
                mellin_data(q, xi) * taper
            }
        })
        .collect();
    // sigma(e^x) = (2 pi)^{-1} int S(xi) e^{-i xi x} dxi
    let s = fourier_inverse(&grid, &reflect(&data));
    let scale = (2.0 * std::f64::consts::PI).sqrt().recip();
    eta_from_samples(grid, s.iter().map(|v| v.re * scale).collect(), opts.n_nodes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tsvd_solves_a_well_posed_system() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0], vec![0.0, 1.0]];
        let x_true = [1.0, -2.0];
        let b: Vec<f64> = a.iter().map(|r| r[0] * x_true[0] + r[1] * x_true[1]).collect();
        let x = tsvd_solve(&a, &b, 1e-12).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] + 2.0).abs() < 1e-14);
    }

    #[test]
    fn mellin_data_of_constant_eta_at_zero() {
        // eta = 1 - mu^2 gives int lambda^{-1+i xi} sigma = 4 * 2^{-i xi} pi xi / sinh(pi xi); truncation
        // at 64 moments leaves about 1.5% at xi = 0
        let q: Vec<f64> = (0..64).map(|n| if n % 2 == 0 { 4.0 / ((n as f64 + 1.0) * (n as f64 + 3.0)) } else { 0.0 }).collect();
        let s = mellin_data(&MomentSequence::new(q).unwrap(), 0.0);
        assert!((s.re - 3.938_461_5).abs() < 1e-6 && s.im.abs() < 1e-12, "{s}");
    }

    #[test]
    fn smooth_eta_is_recovered_by_least_squares() {
        let q: Vec<f64> = (0..64).map(|n| if n % 2 == 0 { 4.0 / ((n as f64 + 1.0) * (n as f64 + 3.0)) } else { 0.0 }).collect();
        let sol = moment_solve(&MomentSequence::new(q).unwrap(), &MomentSolveOptions::default()).unwrap();
        assert_eq!(sol.best, Route::LeastSquares);
        assert!(sol.converged);
        let err = sol.best_estimate().eta.l2_distance(|m| 1.0 - m * m, -0.9, 0.9);
        assert!(err < 1e-6, "{err}");
        for route in [Route::Pipeline, Route::Direct] {
            let err = sol.estimate(route).unwrap().eta.l2_distance(|m| 1.0 - m * m, -0.9, 0.9);
            assert!(err < 0.05, "{route:?}: {err}");
        }
        assert!(sol.disagreement.unwrap() < 0.1);
    }

    #[test]
    fn located_jump_resolves_a_step() {
        let q = crate::discrete::generalized_hilbert_q(0.0, 64).unwrap();
        let eta = least_squares_route(&q, &MomentSolveOptions::default()).unwrap();
        assert_eq!(eta.steps.len(), 1);
        assert!(eta.steps[0].at.abs() < 1e-8 && (eta.steps[0].height - 1.0).abs() < 1e-7, "{:?}", eta.steps);
        let plain = least_squares_route(&q, &MomentSolveOptions { detect_jump: false, ..Default::default() }).unwrap();
        assert!(plain.steps.is_empty());
        assert!(plain.l2_distance(|m| if m >= 0.0 { 1.0 } else { 0.0 }, -0.9, 0.9) > 0.05);
    }

    #[test]
    fn jump_on_a_smooth_background() {
        let f = |m: f64| 1.0 - m * m - if m >= 0.37 { 0.5 } else { 0.0 };
        let exact = EtaFunction {
            legendre: vec![2.0 / 3.0, 0.0, -2.0 / 3.0],
            steps: vec![EtaStep { at: 0.37, height: -0.5 }],
            ..EtaFunction::default()
        };
        let q = q_from_eta(&exact, 64).unwrap();
        let eta = least_squares_route(&q, &MomentSolveOptions::default()).unwrap();
        assert!(eta.l2_distance(f, -0.9, 0.9) < 1e-6);
    }
}
