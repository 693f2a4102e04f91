//! Analysis configuration: one JSON file plus command-line overrides.

use std::path::PathBuf;

use hankel_sigma::discrete::MomentSolveOptions;
use hankel_sigma::sigma::{KernelSpec, QuasiCarlemanTerm, SigmaDistribution, TabulatedKernel};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const MAX_GRID_POINTS: usize = 1 << 22;
pub const MAX_SECTION: usize = 1024;
pub const MAX_MOMENTS: usize = 4096;
pub const MAX_ASYMPTOTIC_INDEX: usize = 100_000;
/// Beyond this cutoff `1/|Gamma(1/2 + i Xi)|` exceeds `1/eps`.
pub const MAX_CUTOFF: f64 = 40.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelConfig {
    /// Sum of `coeff (t + r)^k e^{-alpha t}`; with `tabulated` the kernel is
    /// handed to the library as a plain callable and only numeric routes apply.
    QuasiCarleman {
        terms: Vec<QuasiCarlemanTerm>,
        #[serde(default)]
        tabulated: bool,
    },
    /// `1/t`.
    Carleman {},
    /// `e^{t^2}`.
    ExpSquare {},
    /// `(e^{-a t} - e^{-b t}) / t`.
    IntervalIndicator { a: f64, b: f64 },
}

impl KernelConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        match self {
            Self::QuasiCarleman { terms, .. } => {
                if terms.is_empty() {
                    return Err(CliError::Config("kernel needs at least one term".into()));
                }
                for (i, t) in terms.iter().enumerate() {
                    let finite = [t.coeff, t.alpha, t.r, t.k].iter().all(|v| v.is_finite());
                    if !finite || t.alpha < 0.0 || t.r < 0.0 {
                        return Err(CliError::Config(format!("term {i}: need finite values with alpha, r >= 0")));
                    }
                }
            }
            Self::IntervalIndicator { a, b } => {
                if !(a.is_finite() && b.is_finite() && *a >= 0.0 && a < b) {
                    return Err(CliError::Config(format!("interval [{a}, {b}] needs 0 <= a < b")));
                }
            }
            Self::Carleman {} | Self::ExpSquare {} => {}
        }
        Ok(())
    }

    /// Quasi-Carleman terms, when the kernel has them.
    pub fn terms(&self) -> Option<Vec<QuasiCarlemanTerm>> {
        match self {
            Self::QuasiCarleman { terms, .. } => Some(terms.clone()),
            Self::Carleman {} => Some(KernelSpec::carleman().terms()?.to_vec()),
            Self::IntervalIndicator { a, b } => Some(KernelSpec::interval_indicator(*a, *b).terms()?.to_vec()),
            Self::ExpSquare {} => None,
        }
    }

    pub fn is_tabulated(&self) -> bool {
        matches!(self, Self::QuasiCarleman { tabulated: true, .. } | Self::ExpSquare {})
    }

    pub fn spec(&self) -> KernelSpec {
        match self {
            Self::QuasiCarleman { terms, tabulated: false } => KernelSpec::QuasiCarleman(terms.clone()),
            Self::QuasiCarleman { terms, tabulated: true } => {
                let symbolic = KernelSpec::QuasiCarleman(terms.clone());
                let (singular, decay, tail) =
                    (symbolic.singular_exponent(), symbolic.decay_rate(), symbolic.tail_exponent());
                let (real, complex) = (terms.clone(), terms.clone());
                KernelSpec::Tabulated(
                    TabulatedKernel::new("quasi_carleman", move |t| real.iter().map(|term| term.eval(t)).sum(), singular, decay, tail)
                        .with_complex(move |z| complex.iter().map(|term| term.eval_complex(z)).sum()),
                )
            }
            Self::Carleman {} => KernelSpec::carleman(),
            Self::ExpSquare {} => KernelSpec::exp_square(),
            Self::IntervalIndicator { a, b } => KernelSpec::interval_indicator(*a, *b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// The log grid is `x = ln lambda in [-half_width, half_width]`.
    pub half_width: f64,
    pub n_points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { half_width: 12.0, n_points: 2048 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BasisConfig {
    pub lo: f64,
    pub hi: f64,
    pub width: f64,
    pub count: usize,
}

impl Default for BasisConfig {
    fn default() -> Self {
        Self { lo: 0.4, hi: 1.4, width: 0.2, count: 6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceConfig {
    /// Gram max-error accepted by `verify`.
    pub identity: f64,
    /// Grid coordinate range `|x| <= interior` used to compare a recovered
    /// sigma with its closed form (`x = ln lambda`, or `lambda` on two-sided grids).
    pub interior: Option<f64>,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self { identity: 1e-6, interior: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MomentsConfig {
    /// CSV with columns `n,q_n`.
    pub file: Option<PathBuf>,
    pub values: Option<Vec<f64>>,
    /// `q_n = (1 - gamma^{n+1}) / (n + 1)`.
    pub generalized_hilbert: Option<f64>,
    /// Number of moments generated from a kernel or a closed form.
    pub count: usize,
    pub solver: MomentSolveOptions,
}

impl Default for MomentsConfig {
    fn default() -> Self {
        Self { file: None, values: None, generalized_hilbert: None, count: 64, solver: MomentSolveOptions::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptoticsConfig {
    pub alpha: f64,
    pub r: f64,
    pub k: f64,
    #[serde(default = "default_n_min")]
    pub n_min: usize,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_stride")]
    pub stride: usize,
}

fn default_n_min() -> usize {
    100
}
fn default_n_max() -> usize {
    1000
}
fn default_stride() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    pub kernel: Option<KernelConfig>,
    /// Sigma-function paired with the kernel by `verify`; derived from the
    /// kernel when absent.
    pub sigma: Option<SigmaDistribution>,
    pub moments: Option<MomentsConfig>,
    pub asymptotics: Option<AsymptoticsConfig>,
    pub grid: GridConfig,
    /// `Xi`: spectral cutoff of the regularized inversion.
    pub cutoff: f64,
    pub taper_width: f64,
    /// Weight exponent of the Mellin relation; chosen from the kernel when absent.
    pub gamma: Option<f64>,
    pub section_sizes: Vec<usize>,
    /// Zero threshold for sign counts; `eps * N * max |q|` when absent.
    pub tau: Option<f64>,
    pub basis: BasisConfig,
    pub tolerance: ToleranceConfig,
    /// Report path; stdout when absent.
    pub out: Option<PathBuf>,
    /// Optional CSV extract of the main numeric table.
    pub csv: Option<PathBuf>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            kernel: None,
            sigma: None,
            moments: None,
            asymptotics: None,
            grid: GridConfig::default(),
            cutoff: 12.0,
            taper_width: 1.0,
            gamma: None,
            section_sizes: vec![32, 64, 128],
            tau: None,
            basis: BasisConfig::default(),
            tolerance: ToleranceConfig::default(),
            out: None,
            csv: None,
        }
    }
}

/// Command-line values that replace config fields.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub cutoff: Option<f64>,
    pub grid_size: Option<usize>,
    pub section_n: Option<usize>,
    pub tau: Option<f64>,
}

impl AnalysisConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(p) = &o.out {
            self.out = Some(p.clone());
        }
        if let Some(x) = o.cutoff {
            self.cutoff = x;
        }
        if let Some(n) = o.grid_size {
            self.grid.n_points = n;
        }
        if let Some(n) = o.section_n {
            self.section_sizes = vec![n];
        }
        if let Some(t) = o.tau {
            self.tau = Some(t);
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if let Some(k) = &self.kernel {
            k.validate()?;
        }
        let g = self.grid;
        if !(g.half_width > 0.0 && g.half_width.is_finite()) {
            return bad(format!("grid.half_width = {} must be positive", g.half_width));
        }
        if !g.n_points.is_power_of_two() || !(64..=MAX_GRID_POINTS).contains(&g.n_points) {
            return bad(format!("grid.n_points = {} must be a power of two in [64, {MAX_GRID_POINTS}]", g.n_points));
        }
        if !(self.cutoff > 0.0 && self.cutoff <= MAX_CUTOFF) {
            return bad(format!("cutoff = {} must lie in (0, {MAX_CUTOFF}]", self.cutoff));
        }
        if !(self.taper_width > 0.0 && self.taper_width.is_finite()) {
            return bad(format!("taper_width = {} must be positive", self.taper_width));
        }
        if let Some(gamma) = self.gamma {
            if !(gamma > 0.0 && gamma.is_finite()) {
                return bad(format!("gamma = {gamma} must be positive"));
            }
        }
        if self.section_sizes.is_empty() || self.section_sizes.iter().any(|n| !(1..=MAX_SECTION).contains(n)) {
            return bad(format!("section sizes {:?} must lie in [1, {MAX_SECTION}]", self.section_sizes));
        }
        if self.section_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("section sizes {:?} must be strictly increasing", self.section_sizes));
        }
        if let Some(t) = self.tau {
            if !(t >= 0.0 && t.is_finite()) {
                return bad(format!("tau = {t} must be finite and >= 0"));
            }
        }
        let b = self.basis;
        if !(1..=32).contains(&b.count) || !(b.width > 0.0) || !(b.lo - b.width > 0.0) || !(b.hi >= b.lo) || !b.hi.is_finite() {
            return bad("basis needs 1 <= count <= 32, width > 0, lo - width > 0, hi >= lo".into());
        }
        if !(self.tolerance.identity > 0.0) {
            return bad("tolerance.identity must be positive".into());
        }
        if let Some(i) = self.tolerance.interior {
            if !(i > 0.0 && i.is_finite()) {
                return bad("tolerance.interior must be positive".into());
            }
        }
        if let Some(m) = &self.moments {
            let sources = [m.file.is_some(), m.values.is_some(), m.generalized_hilbert.is_some()];
            if sources.iter().filter(|s| **s).count() > 1 {
                return bad("moments: give at most one of file, values, generalized_hilbert".into());
            }
            if !(1..=MAX_MOMENTS).contains(&m.count) {
                return bad(format!("moments.count = {} must lie in [1, {MAX_MOMENTS}]", m.count));
            }
            if let Some(gamma) = m.generalized_hilbert {
                if !(-1.0..1.0).contains(&gamma) {
                    return bad(format!("moments.generalized_hilbert = {gamma} must lie in [-1, 1)"));
                }
            }
        }
        if let Some(a) = &self.asymptotics {
            let finite = [a.alpha, a.r, a.k].iter().all(|v| v.is_finite());
            if !finite || a.alpha < 0.0 || a.r < 0.0 || a.k <= -2.0 {
                return bad("asymptotics needs finite alpha, r >= 0 and k > -2".into());
            }
            if a.n_min > a.n_max || a.n_max > MAX_ASYMPTOTIC_INDEX || a.stride == 0 {
                return bad(format!("asymptotics needs n_min <= n_max <= {MAX_ASYMPTOTIC_INDEX} and stride >= 1"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(AnalysisConfig::from_json(r#"{"cutof": 3}"#).is_err());
        assert!(AnalysisConfig::from_json(r#"{"kernel": {"type": "carleman", "extra": 1}}"#).is_err());
        assert!(AnalysisConfig::from_json(r#"{"grid": {"half_width": 3, "points": 64}}"#).is_err());
    }

    #[test]
    fn defaults_validate() {
        let c = AnalysisConfig::from_json("{}").unwrap();
        assert_eq!(c, AnalysisConfig::default());
        c.validate().unwrap();
    }

    #[test]
    fn overrides_replace_fields() {
        let mut c = AnalysisConfig::default();
        c.apply(&Overrides { section_n: Some(48), cutoff: Some(8.0), ..Overrides::default() });
        assert_eq!(c.section_sizes, vec![48]);
        assert_eq!(c.cutoff, 8.0);
    }

    #[test]
    fn ranges_are_checked() {
        let c = AnalysisConfig { grid: GridConfig { n_points: 1000, ..GridConfig::default() }, ..AnalysisConfig::default() };
        assert!(c.validate().is_err());
        let c = AnalysisConfig { cutoff: 50.0, ..AnalysisConfig::default() };
        assert!(c.validate().is_err());
        let c = AnalysisConfig { section_sizes: vec![64, 32], ..AnalysisConfig::default() };
        assert!(c.validate().is_err());
    }
}
