//! The analyses behind each subcommand.

use std::f64::consts::PI;

use hankel_sigma::discrete::{
    asymptotic_q, generalized_hilbert_q, moment_solve, q_from_kernel, q_from_sigma, AsymptoticRegime, MomentSequence,
    MomentSolution,
};
use hankel_sigma::sigma::{
    predicted_counts, quasi_carleman_sigma, sigma_of_kernel, Count, KernelSpec, PredictionOutcome, SigmaDistribution,
};
use hankel_sigma::spectral::{count_signs, verify_main_identity, TestBasis};
use hankel_sigma::transforms::{
    grid_function_to_csv, sigma_from_kernel, Grid, GridFunction, LinearGrid, LogGrid, Regularization,
    SigmaRecoveryOptions, TruncationWarning,
};
use serde::Serialize;

use crate::config::{AnalysisConfig, AsymptoticsConfig, KernelConfig};
use crate::error::CliError;
use crate::output::to_json;

/// Rendered report, optional CSV extract, and the failure to signal after
/// both are written.
pub struct Outcome {
    pub report: String,
    pub csv: Option<String>,
    pub failure: Option<CliError>,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    config: &'a AnalysisConfig,
    result: T,
}

fn outcome<T: Serialize>(
    command: &str,
    config: &AnalysisConfig,
    result: T,
    csv: Option<String>,
    failure: Option<CliError>,
) -> Result<Outcome, CliError> {
    Ok(Outcome { report: to_json(&Envelope { command, config, result })?, csv, failure })
}

fn require_kernel(config: &AnalysisConfig) -> Result<&KernelConfig, CliError> {
    config.kernel.as_ref().ok_or_else(|| CliError::Config("this command needs a kernel".into()))
}

/// `sigma(lambda) = (4 pi)^{-1/2} e^{-lambda^2 / 4}`, the sigma-function of `e^{t^2}`.
fn gaussian_sigma(lambda: f64) -> f64 {
    0.5 / PI.sqrt() * (-0.25 * lambda * lambda).exp()
}

/// Closed-form sigma used to judge a numeric recovery.
enum Reference {
    Atoms(SigmaDistribution),
    Gaussian,
}

impl Reference {
    fn of(kernel: &KernelConfig) -> Option<Self> {
        match kernel {
            KernelConfig::ExpSquare {} => Some(Self::Gaussian),
            other => Some(Self::Atoms(sigma_of_kernel(&KernelSpec::QuasiCarleman(other.terms()?))?)),
        }
    }

    fn density(&self, lambda: f64) -> Option<f64> {
        match self {
            Self::Gaussian => Some(gaussian_sigma(lambda)),
            Self::Atoms(s) => s.atoms.iter().map(|a| a.density(lambda)).sum(),
        }
    }

    /// Sigma as atoms; the Gaussian is sampled on a wide linear grid.
    fn distribution(&self) -> Result<SigmaDistribution, CliError> {
        match self {
            Self::Atoms(s) => Ok(s.clone()),
            Self::Gaussian => {
                let grid = LinearGrid { start: -30.0, step: 0.01, n_points: 6001 };
                let sampled = GridFunction::sample_linear(grid, gaussian_sigma).map_err(CliError::numerical)?;
                Ok(SigmaDistribution::from_regular(&sampled))
            }
        }
    }
}

#[derive(Serialize)]
struct NumericSigma {
    grid: Grid,
    lambda: Vec<f64>,
    sigma: Vec<f64>,
    gamma: Option<f64>,
    amplification: f64,
    max_imaginary: f64,
    warning: Option<TruncationWarning>,
}

#[derive(Serialize)]
struct Comparison {
    /// `symbolic` for catalog kernels, `closed_form` for tabulated ones.
    against: &'static str,
    interior: f64,
    points: usize,
    max_deviation: f64,
}

#[derive(Serialize)]
struct SigmaReport {
    symbolic: Option<SigmaDistribution>,
    numeric: Option<NumericSigma>,
    /// Why `numeric` is absent.
    numeric_note: Option<String>,
    comparison: Option<Comparison>,
}

pub fn sigma(config: &AnalysisConfig) -> Result<Outcome, CliError> {
    let kernel = require_kernel(config)?;
    let symbolic = if kernel.is_tabulated() { None } else { sigma_of_kernel(&kernel.spec()) };
    let grid = LogGrid::symmetric(config.grid.half_width, config.grid.n_points).map_err(|e| CliError::Config(e.to_string()))?;
    let opts = SigmaRecoveryOptions {
        regularization: Regularization { cutoff: config.cutoff, taper_width: config.taper_width },
        gamma: config.gamma,
    };
    // singular atoms (finite parts with k > 0, deltas) have no grid representation
    let regular = symbolic.as_ref().is_none_or(|s| s.atoms.iter().all(|a| a.density(1.0).is_some()));
    if !regular {
        let note = Some("sigma-function has singular atoms; no grid representation".to_string());
        let report = SigmaReport { symbolic, numeric: None, numeric_note: note, comparison: None };
        return outcome("sigma", config, report, None, None);
    }
    let (numeric, numeric_note, csv) = match sigma_from_kernel(&kernel.spec(), grid, opts) {
        Ok(rec) => {
            let csv = grid_function_to_csv(&rec.sigma);
            let numeric = NumericSigma {
                grid: rec.sigma.grid,
                lambda: rec.sigma.points(),
                sigma: rec.sigma.real_parts(),
                gamma: rec.gamma,
                amplification: rec.amplification,
                max_imaginary: rec.max_imaginary,
                warning: rec.warning,
            };
            (Some(numeric), None, Some(csv))
        }
        Err(e) if symbolic.is_some() => (None, Some(e.to_string()), None),
        Err(e) => return Err(CliError::numerical(e)),
    };
    let interior = config.tolerance.interior.unwrap_or(0.5 * config.grid.half_width);
    let comparison = match (&numeric, Reference::of(kernel)) {
        (Some(n), Some(reference)) => compare(n, &reference, interior).map(|(points, max_deviation)| Comparison {
            against: if kernel.is_tabulated() { "closed_form" } else { "symbolic" },
            interior,
            points,
            max_deviation,
        }),
        _ => None,
    };
    outcome("sigma", config, SigmaReport { symbolic, numeric, numeric_note, comparison }, csv, None)
}

/// Max deviation on `|coordinate| <= interior`; `None` if the reference has
/// no pointwise density there.
fn compare(n: &NumericSigma, reference: &Reference, interior: f64) -> Option<(usize, f64)> {
    let mut worst: f64 = 0.0;
    let mut points = 0;
    for ((x, lambda), v) in n.grid.coordinates().iter().zip(&n.lambda).zip(&n.sigma) {
        if x.abs() > interior {
            continue;
        }
        worst = worst.max((v - reference.density(*lambda)?).abs());
        points += 1;
    }
    (points > 0).then_some((points, worst))
}

#[derive(Serialize)]
struct SectionCounts {
    n: usize,
    tau: f64,
    n_plus: usize,
    n_minus: usize,
    lowest: f64,
    highest: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
enum Verdict {
    Consistent,
    Inconsistent,
    Inconclusive,
}

#[derive(Serialize)]
struct Verdicts {
    n_plus: Verdict,
    n_minus: Verdict,
    overall: Verdict,
}

#[derive(Serialize)]
struct CountsReport {
    prediction: PredictionOutcome,
    moments_source: &'static str,
    sections: Vec<SectionCounts>,
    verdict: Verdicts,
}

/// Moments `q_0 .. q_{count-1}` of a kernel: exact from the symbolic
/// sigma-function when there is one, by quadrature otherwise.
fn kernel_moments(kernel: &KernelConfig, count: usize) -> Result<(MomentSequence, &'static str), CliError> {
    let spec = kernel.spec();
    match sigma_of_kernel(&spec) {
        Some(sigma) => Ok((q_from_sigma(&sigma, count).map_err(CliError::numerical)?, "sigma")),
        None => Ok((q_from_kernel(&spec, count).map_err(CliError::numerical)?, "kernel")),
    }
}

fn sections(q: &MomentSequence, sizes: &[usize], tau: Option<f64>, threads: usize) -> Result<Vec<(SectionCounts, Vec<f64>)>, CliError> {
    let build = |n: usize| -> Result<(SectionCounts, Vec<f64>), CliError> {
        let s = q.section(n).map_err(CliError::numerical)?;
        let e = s.eigenvalues();
        let tau = tau.unwrap_or_else(|| s.default_tau());
        let (n_plus, n_minus) = count_signs(&e, tau);
        let counts = SectionCounts { n, tau, n_plus, n_minus, lowest: e[0], highest: e[n - 1] };
        Ok((counts, e))
    };
    parallel_map(sizes, threads, build).into_iter().collect()
}

/// Applies `f` to every item on at most `threads` scoped threads, keeping order.
fn parallel_map<T: Copy + Sync, R: Send>(items: &[T], threads: usize, f: impl Fn(T) -> R + Sync) -> Vec<R> {
    if threads <= 1 || items.len() <= 1 {
        return items.iter().map(|x| f(*x)).collect();
    }
    let chunk = items.len().div_ceil(threads);
    std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| scope.spawn(|| c.iter().map(|x| f(*x)).collect::<Vec<R>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

fn judge(predicted: Option<Count>, observed: &[usize]) -> Verdict {
    match predicted {
        None => Verdict::Inconclusive,
        Some(Count::Finite(k)) => {
            if observed.last() == Some(&k) {
                Verdict::Consistent
            } else {
                Verdict::Inconsistent
            }
        }
        // finite sections cannot refute an infinite count
        Some(Count::Infinite) if observed.len() >= 2 && observed.windows(2).all(|w| w[0] < w[1]) => Verdict::Consistent,
        Some(Count::Infinite) => Verdict::Inconclusive,
    }
}

pub fn counts(config: &AnalysisConfig, threads: usize) -> Result<Outcome, CliError> {
    let kernel = require_kernel(config)?;
    let prediction = predicted_counts(&kernel.spec());
    let largest = *config.section_sizes.last().expect("validated nonempty");
    let (q, moments_source) = kernel_moments(kernel, 2 * largest - 1)?;
    let rows: Vec<SectionCounts> = sections(&q, &config.section_sizes, config.tau, threads)?.into_iter().map(|r| r.0).collect();
    let p = prediction.prediction();
    let plus: Vec<usize> = rows.iter().map(|r| r.n_plus).collect();
    let minus: Vec<usize> = rows.iter().map(|r| r.n_minus).collect();
    let (vp, vm) = (judge(p.map(|x| x.n_plus), &plus), judge(p.map(|x| x.n_minus), &minus));
    let overall = match (vp, vm) {
        (Verdict::Inconsistent, _) | (_, Verdict::Inconsistent) => Verdict::Inconsistent,
        (Verdict::Consistent, Verdict::Consistent) => Verdict::Consistent,
        _ => Verdict::Inconclusive,
    };
    let csv = section_csv(&rows);
    let report = CountsReport { prediction, moments_source, sections: rows, verdict: Verdicts { n_plus: vp, n_minus: vm, overall } };
    outcome("counts", config, report, Some(csv), None)
}

fn section_csv(rows: &[SectionCounts]) -> String {
    let mut out = String::from("n,tau,n_plus,n_minus,lowest,highest\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{},{},{}\n", r.n, r.tau, r.n_plus, r.n_minus, r.lowest, r.highest));
    }
    out
}

#[derive(Serialize)]
struct SectionReport {
    moments_source: &'static str,
    sections: Vec<SectionEigen>,
}

#[derive(Serialize)]
struct SectionEigen {
    #[serde(flatten)]
    counts: SectionCounts,
    eigenvalues: Vec<f64>,
}

/// Moments from the `moments` block when present, else from the kernel.
fn input_moments(config: &AnalysisConfig, count: usize) -> Result<(MomentSequence, &'static str), CliError> {
    let Some(m) = &config.moments else {
        let kernel = config
            .kernel
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs a kernel or a moments block".into()))?;
        return kernel_moments(kernel, count);
    };
    if let Some(path) = &m.file {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
        let q = MomentSequence::from_csv(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        return Ok((q, "file"));
    }
    if let Some(values) = &m.values {
        return Ok((MomentSequence::new(values.clone()).map_err(|e| CliError::Config(e.to_string()))?, "values"));
    }
    if let Some(gamma) = m.generalized_hilbert {
        return Ok((generalized_hilbert_q(gamma, count).map_err(CliError::numerical)?, "generalized_hilbert"));
    }
    let kernel = require_kernel(config)?;
    kernel_moments(kernel, count)
}

pub fn section(config: &AnalysisConfig, threads: usize) -> Result<Outcome, CliError> {
    let largest = *config.section_sizes.last().expect("validated nonempty");
    let (q, moments_source) = input_moments(config, 2 * largest - 1)?;
    if q.len() < 2 * largest - 1 {
        return Err(CliError::Config(format!("section of size {largest} needs {} moments, input has {}", 2 * largest - 1, q.len())));
    }
    let rows = sections(&q, &config.section_sizes, config.tau, threads)?;
    let csv = q.section(largest).map_err(CliError::numerical)?.matrix().to_csv();
    let sections = rows.into_iter().map(|(counts, eigenvalues)| SectionEigen { counts, eigenvalues }).collect();
    outcome("section", config, SectionReport { moments_source, sections }, Some(csv), None)
}

#[derive(Serialize)]
struct VerifyReport {
    sigma: SigmaDistribution,
    max_error: f64,
    tolerance: f64,
    pass: bool,
    per_entry: Vec<Vec<f64>>,
}

pub fn verify(config: &AnalysisConfig) -> Result<Outcome, CliError> {
    let kernel = require_kernel(config)?;
    let sigma = match &config.sigma {
        Some(s) => s.clone(),
        None => Reference::of(kernel)
            .ok_or_else(|| CliError::Config("no sigma-function given and none known for this kernel".into()))?
            .distribution()?,
    };
    let b = config.basis;
    let basis = TestBasis::spread(b.lo, b.hi, b.width, b.count).map_err(|e| CliError::Config(e.to_string()))?;
    let r = verify_main_identity(&kernel.spec(), &sigma, &basis).map_err(CliError::numerical)?;
    let tolerance = config.tolerance.identity;
    let pass = r.max_error <= tolerance;
    let failure = (!pass).then(|| CliError::Numerical(format!("Gram max-error {:e} exceeds {tolerance:e}", r.max_error)));
    let report = VerifyReport { sigma, max_error: r.max_error, tolerance, pass, per_entry: r.per_entry };
    outcome("verify", config, report, None, failure)
}

#[derive(Serialize)]
struct AsymptoticRow {
    n: usize,
    q: f64,
    prediction: f64,
    /// `q_n / prediction`; absent in the super-polynomial regime.
    ratio: Option<f64>,
    /// `n |ratio - 1|`, or `n^6 |q_n|` in the super-polynomial regime.
    scaled_deviation: f64,
}

#[derive(Serialize)]
struct AsymptoticTable {
    alpha: f64,
    r: f64,
    k: f64,
    regime: AsymptoticRegime,
    max_scaled_deviation: f64,
    rows: Vec<AsymptoticRow>,
}

fn asymptotic_table(q: &MomentSequence, a: &AsymptoticsConfig) -> AsymptoticTable {
    let top = a.n_max.min(q.len().saturating_sub(1));
    let regime = asymptotic_q(a.alpha, a.r, a.k, a.n_min.max(1)).regime;
    let rows: Vec<AsymptoticRow> = (a.n_min.max(1)..=top)
        .step_by(a.stride)
        .map(|n| {
            let p = asymptotic_q(a.alpha, a.r, a.k, n);
            let qn = q.values()[n];
            let nf = n as f64;
            let (ratio, scaled_deviation) = if p.value != 0.0 {
                let ratio = qn / p.value;
                (Some(ratio), nf * (ratio - 1.0).abs())
            } else {
                (None, nf.powi(6) * qn.abs())
            };
            AsymptoticRow { n, q: qn, prediction: p.value, ratio, scaled_deviation }
        })
        .collect();
    let max_scaled_deviation = rows.iter().map(|r| r.scaled_deviation).fold(0.0, f64::max);
    AsymptoticTable { alpha: a.alpha, r: a.r, k: a.k, regime, max_scaled_deviation, rows }
}

fn asymptotic_csv(t: &AsymptoticTable) -> String {
    let mut out = String::from("n,q_n,prediction,scaled_deviation\n");
    for r in &t.rows {
        out.push_str(&format!("{},{},{},{}\n", r.n, r.q, r.prediction, r.scaled_deviation));
    }
    out
}

#[derive(Serialize)]
struct MomentsReport {
    source: &'static str,
    n_moments: usize,
    solution: MomentSolution,
    asymptotics: Option<AsymptoticTable>,
}

/// Nodes in the CSV extract of the best eta estimate.
const ETA_CSV_POINTS: usize = 201;

pub fn moments(config: &AnalysisConfig) -> Result<Outcome, CliError> {
    let count = config.moments.as_ref().map_or(64, |m| m.count);
    let opts = config.moments.as_ref().map(|m| m.solver).unwrap_or_default();
    let (q, source) = input_moments(config, count)?;
    let solution = moment_solve(&q, &opts).map_err(CliError::numerical)?;
    let csv = solution.best_estimate().eta.to_csv(ETA_CSV_POINTS);
    let failure = (!solution.converged).then(|| {
        CliError::Numerical(format!(
            "best moment residual {:e} exceeds the bound {:e}",
            solution.best_estimate().residual,
            opts.residual_bound
        ))
    });
    let asymptotics = config.asymptotics.as_ref().map(|a| asymptotic_table(&q, a));
    let report = MomentsReport { source, n_moments: q.len(), solution, asymptotics };
    outcome("moments", config, report, Some(csv), failure)
}

pub fn asymptotics(config: &AnalysisConfig) -> Result<Outcome, CliError> {
    let a = config.asymptotics.as_ref().ok_or_else(|| CliError::Config("asymptotics block is required".into()))?;
    let q = q_from_sigma(&quasi_carleman_sigma(a.alpha, a.r, a.k), a.n_max + 1).map_err(CliError::numerical)?;
    let table = asymptotic_table(&q, a);
    let csv = asymptotic_csv(&table);
    outcome("asymptotics", config, table, Some(csv), None)
}
