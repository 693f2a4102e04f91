use serde::{Deserialize, Serialize};

use super::sequence::legendre_values;
use super::{DiscreteError, EtaAtom, EtaFunction, MomentSequence};
use crate::quad::{adaptive, adaptive_semi_infinite, tanh_sinh, CompensatedSum, GaussLaguerre, GaussLegendre};
use crate::sigma::{is_nonneg_integer, KernelSpec, SigmaAtom, SigmaDistribution, SigmaError};
use crate::specfun;

/// `mu = (lambda - 1/2) / (lambda + 1/2)`.
pub fn mu_of_lambda(lambda: f64) -> f64 {
    (lambda - 0.5) / (lambda + 0.5)
}

/// Inverse of [`mu_of_lambda`]: `lambda = (1 + mu) / (2 (1 - mu))`.
pub fn lambda_of_mu(mu: f64) -> f64 {
    (1.0 + mu) / (2.0 * (1.0 - mu))
}

/// Generalized Hilbert matrix elements `(1 - gamma^{n+1}) / (n + 1)`.
pub fn generalized_hilbert_q(gamma: f64, n_max: usize) -> Result<MomentSequence, DiscreteError> {
    if !(-1.0..1.0).contains(&gamma) {
        return Err(DiscreteError::InvalidArgument(format!("gamma = {gamma} must lie in [-1, 1)")));
    }
    let mut pow = gamma;
    let values = (0..n_max)
        .map(|n| {
            let v = (1.0 - pow) / (n as f64 + 1.0);
            pow *= gamma;
            v
        })
        .collect();
    MomentSequence::new(values)
}

/// Sum of `(sign, ln|term|)` pairs without overflow.
fn log_sum(terms: &[(f64, f64)]) -> (f64, f64) {
    let top = terms.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return (0.0, f64::NEG_INFINITY);
    }
    let mut acc = CompensatedSum::default();
    for (s, l) in terms {
        acc.add(s * (l - top).exp());
    }
    let v = acc.value();
    (v.signum(), v.abs().ln() + top)
}

/// `q_n(beta, k) = Gamma(2+k) beta^{2+k} F(-n, 2+k; 2; beta)`, the matrix
/// elements of `t^k e^{-alpha t}` with `beta = 1/(alpha + 1/2)`.
///
/// The hypergeometric sum is evaluated in a cancellation-free form: Pfaff's
/// transformation for `beta < 1`, Chu-Vandermonde at `beta = 1`, and the
/// `z -> 1 - z` connection formula for `beta > 1`.
pub fn q_hypergeometric(beta: f64, k: f64, n_max: usize) -> Result<MomentSequence, DiscreteError> {
    if !(beta > 0.0 && beta <= 2.0) {
        return Err(DiscreteError::InvalidArgument(format!("beta = {beta} must lie in (0, 2]")));
    }
    if !(k > -2.0) {
        return Err(DiscreteError::NotIntegrable(format!("t^{k} e^{{-alpha t}} needs k > -2")));
    }
    let ln_pref = specfun::ln_gamma_real_unchecked(k + 2.0) + (k + 2.0) * beta.ln();
    let mut values = Vec::with_capacity(n_max);
    if beta == 1.0 {
        // Gamma(k+2) (-k)_n / (n+1)!
        let mut v = ln_pref.exp();
        for n in 0..n_max {
            if n > 0 {
                v *= (n as f64 - 1.0 - k) / (n as f64 + 1.0);
            }
            values.push(v);
        }
        return MomentSequence::new(values);
    }
    if is_nonneg_integer(k) || beta < 1.0 {
        // (1 - beta)^n F(-n, -k; 2; w), w = beta / (beta - 1); terminates after k + 1 terms for k in Z+
        let w = beta / (beta - 1.0);
        let ln_base = (1.0 - beta).abs().ln();
        let base_sign = (1.0 - beta).signum();
        for n in 0..n_max {
            let nf = n as f64;
            let mut terms = vec![(1.0, 0.0)];
            let (mut s, mut l) = (1.0, 0.0);
            for m in 0..n {
                let mf = m as f64;
                let ratio = (mf - nf) * (mf - k) * w / ((2.0 + mf) * (mf + 1.0));
                if ratio == 0.0 {
                    break;
                }
                s *= ratio.signum();
                l += ratio.abs().ln();
                terms.push((s, l));
            }
            let (fs, fl) = log_sum(&terms);
            let sign = fs * if n % 2 == 1 { base_sign } else { 1.0 };
            values.push(sign * (fl + nf * ln_base + ln_pref).exp());
        }
        return MomentSequence::new(values);
    }
    // beta > 1, k not in Z+: F(-n, b; 2; beta) = ((2-b)_n/(2)_n) F(-n, b; b-n-1; 1-beta), b = k + 2
    let z = 1.0 - beta;
    let mut pref = 1.0; // (-k)_n / (n+1)!
    for n in 0..n_max {
        let nf = n as f64;
        if n > 0 {
            pref *= (nf - 1.0 - k) / (nf + 1.0);
        }
        let mut acc = CompensatedSum::default();
        let mut term = 1.0;
        acc.add(term);
        for m in 0..n {
            let mf = m as f64;
            term *= (mf - nf) * (k + 2.0 + mf) * z / ((k - nf + 1.0 + mf) * (mf + 1.0));
            acc.add(term);
        }
        values.push(ln_pref.exp() * pref * acc.value());
    }
    MomentSequence::new(values)
}

/// Generalized Gauss-Laguerre nodes per requested moment.
const NODES_PER_MOMENT: usize = 4;

/// `q_n = (n+1)^{-1} int_0^inf h(t) t L_n^1(t) e^{-t/2} dt`, `n < n_max`.
///
/// Each piece `t^s e^{-a t} g(t)` of the kernel is integrated with the
/// generalized Gauss-Laguerre rule for the weight `x^{s+1} e^{-x}` after
/// `t = x / (a + 1/2)`, so the power singularity at `t = 0` sits in the
/// weight. `4 n_max` nodes are used.
pub fn q_from_kernel(h: &KernelSpec, n_max: usize) -> Result<MomentSequence, DiscreteError> {
    type Piece<'a> = (f64, f64, Box<dyn Fn(f64) -> f64 + 'a>);
    let mut pieces: Vec<Piece> = Vec::new();
    match h {
        KernelSpec::QuasiCarleman(terms) => {
            for term in terms.iter().filter(|t| t.coeff != 0.0) {
                let (c, r, k) = (term.coeff, term.r, term.k);
                if r == 0.0 {
                    pieces.push((k, term.alpha, Box::new(move |_| c)));
                } else {
                    pieces.push((0.0, term.alpha, Box::new(move |t| c * (t + r).powf(k))));
                }
            }
        }
        KernelSpec::Tabulated(tab) => {
            if tab.growing {
                return Err(DiscreteError::Growing(format!("kernel '{}' grows faster than any exponential", tab.name())));
            }
            let (s, a) = (tab.singular_exponent, tab.decay_rate);
            pieces.push((s, a, Box::new(move |t| h.eval(t) * t.powf(-s) * (a * t).exp())));
        }
    }
    let mut acc: Vec<CompensatedSum> = (0..n_max).map(|_| CompensatedSum::default()).collect();
    for (s, a, g) in &pieces {
        if !(*s > -2.0) {
            return Err(DiscreteError::NotIntegrable(format!(
                "h(t) ~ t^{s} at 0; the moments exist for exponents > -2 only"
            )));
        }
        let c = a + 0.5;
        if !(c > 0.0) {
            return Err(DiscreteError::Growing(format!("h(t) ~ e^{{{}t}} needs decay rate > -1/2", -a)));
        }
        let rule = GaussLaguerre::new((NODES_PER_MOMENT * n_max).max(32), s + 1.0);
        let ln_c = (-s - 2.0) * c.ln();
        for (x, lw) in rule.nodes.iter().zip(&rule.log_weights) {
            let t = x / c;
            let gv = g(t);
            if gv == 0.0 {
                continue;
            }
            if !gv.is_finite() {
                return Err(DiscreteError::NotIntegrable(format!("kernel is not finite at t = {t}")));
            }
            let base = lw + ln_c;
            // L_n^1(t) by (n+1) L_{n+1} = (2n + 2 - t) L_n - (n+1) L_{n-1}, with rescaling
            let (mut p0, mut p1, mut scale) = (0.0, 1.0, 0.0);
            for (n, slot) in acc.iter_mut().enumerate() {
                if n > 0 {
                    let nf = (n - 1) as f64;
                    let p2 = ((2.0 * nf + 2.0 - t) * p1 - (nf + 1.0) * p0) / (nf + 1.0);
                    p0 = p1;
                    p1 = p2;
                    if p1.abs() > 1e150 {
                        p0 *= 1e-150;
                        p1 *= 1e-150;
                        scale += 150.0 * std::f64::consts::LN_10;
                    }
                }
                if p1 != 0.0 {
                    slot.add(gv * p1.signum() * (base + scale + p1.abs().ln()).exp() / (n as f64 + 1.0));
                }
            }
        }
    }
    MomentSequence::new(acc.iter().map(CompensatedSum::value).collect())
}

/// `phi_n(lambda) = (lambda + 1/2)^{-2} mu^n`; returns the `order`-th
/// derivative of `e^{-r (lambda - alpha)} phi_n` at `alpha`.
fn moment_test_derivative(n: usize, alpha: f64, r: f64, order: usize) -> f64 {
    let c = alpha + 0.5;
    let mu = mu_of_lambda(alpha);
    let nf = n as f64;
    let phi = |i: usize| -> f64 {
        // Leibniz on (lambda - 1/2)^n (lambda + 1/2)^{-n-2}
        let mut total = 0.0;
        let mut binom = 1.0;
        for p in 0..=i {
            if p <= n {
                let q = i - p;
                let falling: f64 = (0..p).map(|j| nf - j as f64).product();
                let rising: f64 = (0..q).map(|j| nf + 2.0 + j as f64).product();
                let sign = if q.is_multiple_of(2) { 1.0 } else { -1.0 };
                total += binom * falling * sign * rising * mu.powi((n - p) as i32) * c.powi(-2 - p as i32 - q as i32);
            }
            binom = binom * (i - p) as f64 / (p + 1) as f64;
        }
        total
    };
    let mut total = 0.0;
    let mut binom = 1.0;
    for i in 0..=order {
        total += binom * (-r).powi((order - i) as i32) * phi(i);
        binom = binom * (order - i) as f64 / (i + 1) as f64;
    }
    total
}

/// `int eta(mu) mu^n dmu` for `eta` the image of `coeff (lambda-alpha)_+^{-k-1} e^{-r(lambda-alpha)}`, `k < 0`.
fn power_atom_eta_moments(alpha: f64, k: f64, r: f64, coeff: f64, n_max: usize) -> Vec<f64> {
    let c = alpha + 0.5;
    let gamma = mu_of_lambda(alpha);
    let pref = coeff * c.powf(-k - 1.0);
    // eta in terms of d_gamma = mu - gamma and d_one = 1 - mu
    let eta = move |d_gamma: f64, d_one: f64| -> f64 {
        pref * d_one.powf(k + 1.0) * d_gamma.powf(-k - 1.0) * (-r * c * d_gamma / d_one).exp()
    };
    let pow = |mu: f64, n: usize| -> f64 { mu.powi(n as i32) };
    (0..n_max)
        .map(|n| {
            if gamma < 0.0 {
                let left = tanh_sinh(|mu, da, _db| eta(da, 1.0 - mu) * pow(mu, n), gamma, 0.0, 1e-13);
                let right = tanh_sinh(|mu, _da, db| eta(mu - gamma, db) * pow(mu, n), 0.0, 1.0, 1e-13);
                left.value + right.value
            } else {
                tanh_sinh(|mu, da, db| eta(da, db) * pow(mu, n), gamma, 1.0, 1e-13).value
            }
        })
        .collect()
}

/// Moments of one sigma atom, `q_n = <sigma, (lambda + 1/2)^{-2} mu(lambda)^n>`.
fn q_from_sigma_atom(atom: &SigmaAtom, n_max: usize) -> Result<Vec<f64>, DiscreteError> {
    if atom.support_start() < 0.0 {
        return Err(SigmaError::NegativeSupport.into());
    }
    match atom {
        SigmaAtom::Regular { grid, values, alpha, r } => {
            let mut acc = vec![0.0; n_max];
            for ((p, wt), v) in grid.points().iter().zip(grid.weights()).zip(values) {
                let lambda = alpha + p;
                if *v == 0.0 || lambda < 0.0 {
                    continue;
                }
                let mu = mu_of_lambda(lambda);
                let mut term = wt * v * (-r * p).exp() / (lambda + 0.5).powi(2);
                for slot in acc.iter_mut() {
                    *slot += term;
                    term *= mu;
                }
            }
            Ok(acc)
        }
        SigmaAtom::DeltaDerivative { alpha, order, r, coeff } => {
            let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
            Ok((0..n_max).map(|n| coeff * sign * moment_test_derivative(n, *alpha, *r, *order)).collect())
        }
        SigmaAtom::FinitePart { alpha, k, r, coeff } => {
            let (alpha, k, r, coeff) = (*alpha, *k, *r, *coeff);
            if r == 0.0 && !(k > -2.0) {
                return Err(DiscreteError::NotIntegrable(format!(
                    "sigma ~ (lambda - alpha)^{} with r = 0: the moments exist for k > -2 only",
                    -k - 1.0
                )));
            }
            if r == 0.0 && k == -1.0 {
                let q = generalized_hilbert_q(mu_of_lambda(alpha), n_max)?;
                return Ok(q.values().iter().map(|v| coeff * v).collect());
            }
            // kernel-side coefficient: coeff = c_h / Gamma(-k)
            let c_h = coeff * specfun::gamma_real(-k)?;
            if r == 0.0 && (alpha >= 0.5 || k > 0.0) {
                let q = q_hypergeometric(1.0 / (alpha + 0.5), k, n_max)?;
                return Ok(q.values().iter().map(|v| c_h * v).collect());
            }
            if k < 0.0 {
                return Ok(power_atom_eta_moments(alpha, k, r, coeff, n_max));
            }
            let h = KernelSpec::QuasiCarleman(vec![crate::sigma::QuasiCarlemanTerm::new(c_h, alpha, r, k)]);
            Ok(q_from_kernel(&h, n_max)?.values().to_vec())
        }
    }
}

/// `q_n = int_0^inf sigma(lambda) (lambda + 1/2)^{-2} mu(lambda)^n dlambda`.
///
/// Closed forms are used for steps and for `r = 0` powers; integrable
/// powers are integrated in `mu` with endpoint-adapted quadrature, and
/// the remaining singular atoms through their kernels.
pub fn q_from_sigma(sigma: &SigmaDistribution, n_max: usize) -> Result<MomentSequence, DiscreteError> {
    let mut total = vec![0.0; n_max];
    for atom in &sigma.atoms {
        for (t, v) in total.iter_mut().zip(q_from_sigma_atom(atom, n_max)?) {
            *t += v;
        }
    }
    MomentSequence::new(total)
}

/// `q_n = int_{-1}^1 eta(mu) mu^n dmu`.
pub fn q_from_eta(eta: &EtaFunction, n_max: usize) -> Result<MomentSequence, DiscreteError> {
    eta.validate()?;
    let mut acc: Vec<CompensatedSum> = (0..n_max).map(|_| CompensatedSum::default()).collect();
    // piecewise-linear part, exact on each piece
    for (a, b, va, vb) in eta.linear_pieces() {
        let slope = (vb - va) / (b - a);
        let (mut pa, mut pb) = (a, b); // a^{n+1}, b^{n+1}
        for (n, slot) in acc.iter_mut().enumerate() {
            let nf = n as f64;
            let i_n = (pb - pa) / (nf + 1.0);
            let i_n1 = (pb * b - pa * a) / (nf + 2.0);
            slot.add(va * i_n + slope * (i_n1 - a * i_n));
            pa *= a;
            pb *= b;
        }
    }
    if !eta.legendre.is_empty() {
        let deg = eta.legendre.len() - 1;
        let rule = GaussLegendre::new((deg + n_max) / 2 + 2);
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let p = legendre_values(deg, *x);
            let v: f64 = p.iter().zip(&eta.legendre).map(|(a, b)| a * b).sum();
            let mut term = w * v;
            for slot in acc.iter_mut() {
                slot.add(term);
                term *= x;
            }
        }
    }
    for step in &eta.steps {
        let mut pa = step.at;
        for (n, slot) in acc.iter_mut().enumerate() {
            slot.add(step.height * (1.0 - pa) / (n as f64 + 1.0));
            pa *= step.at;
        }
    }
    for atom in &eta.atoms {
        match atom {
            EtaAtom::Point { mu, weight } => {
                let mut term = *weight;
                for slot in acc.iter_mut() {
                    slot.add(term);
                    term *= mu;
                }
            }
            EtaAtom::Sigma { atom } => {
                for (slot, v) in acc.iter_mut().zip(q_from_sigma_atom(atom, n_max)?) {
                    slot.add(v);
                }
            }
        }
    }
    MomentSequence::new(acc.iter().map(CompensatedSum::value).collect())
}

/// Transports `sigma` to `(-1, 1)`: regular atoms are sampled at `n_nodes`
/// Chebyshev points, point masses become point masses at `mu(alpha)` with
/// weight `coeff / (alpha + 1/2)^2`, and other singular atoms are kept.
pub fn eta_from_sigma(sigma: &SigmaDistribution, n_nodes: usize) -> Result<EtaFunction, DiscreteError> {
    if sigma.atoms.iter().any(|a| a.support_start() < 0.0) {
        return Err(SigmaError::NegativeSupport.into());
    }
    let regular: Vec<&SigmaAtom> = sigma.atoms.iter().filter(|a| matches!(a, SigmaAtom::Regular { .. })).collect();
    let (nodes, values) = if regular.is_empty() {
        (Vec::new(), Vec::new())
    } else {
        let nodes = super::sequence::chebyshev_nodes(n_nodes);
        let values = nodes
            .iter()
            .map(|m| regular.iter().filter_map(|a| a.density(lambda_of_mu(*m))).sum())
            .collect();
        (nodes, values)
    };
    let atoms = sigma
        .atoms
        .iter()
        .filter_map(|a| match a {
            SigmaAtom::Regular { .. } => None,
            SigmaAtom::DeltaDerivative { alpha, order: 0, coeff, .. } => {
                Some(EtaAtom::Point { mu: mu_of_lambda(*alpha), weight: coeff / (alpha + 0.5).powi(2) })
            }
            other => Some(EtaAtom::Sigma { atom: other.clone() }),
        })
        .collect();
    EtaFunction::new(nodes, values, atoms)
}

/// Summation method for the Laguerre series of the kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Summation {
    Partial,
    /// Arithmetic mean of the partial sums `S_0, ..., S_{N-1}`.
    Cesaro,
}

/// `h(t) = sum_{n < n_trunc} q_n L_n^1(t) e^{-t/2}`.
pub fn kernel_from_q(q: &MomentSequence, t: f64, n_trunc: usize, summation: Summation) -> Result<f64, DiscreteError> {
    if n_trunc > q.len() || n_trunc == 0 {
        return Err(DiscreteError::InvalidArgument(format!(
            "n_trunc = {n_trunc} must lie in 1..={}",
            q.len()
        )));
    }
    if !(t >= 0.0) {
        return Err(DiscreteError::InvalidArgument(format!("t = {t} must be nonnegative")));
    }
    let (mut p0, mut p1, mut scale) = (0.0, 1.0, 0.0);
    let mut acc = CompensatedSum::default();
    for (n, qn) in q.values()[..n_trunc].iter().enumerate() {
        if n > 0 {
            let nf = (n - 1) as f64;
            let p2 = ((2.0 * nf + 2.0 - t) * p1 - (nf + 1.0) * p0) / (nf + 1.0);
            p0 = p1;
            p1 = p2;
            if p1.abs() > 1e150 {
                p0 *= 1e-150;
                p1 *= 1e-150;
                scale += 150.0 * std::f64::consts::LN_10;
            }
        }
        let weight = match summation {
            Summation::Partial => 1.0,
            Summation::Cesaro => (n_trunc - n) as f64 / n_trunc as f64,
        };
        if p1 != 0.0 && *qn != 0.0 {
            acc.add(weight * qn * p1.signum() * (scale + p1.abs().ln() - 0.5 * t).exp());
        }
    }
    Ok(acc.value())
}

/// `sum (n+1) q_n^2`, the squared Hilbert-Schmidt norm of the matrix.
pub fn hilbert_schmidt_discrete(q: &MomentSequence) -> f64 {
    let mut acc = CompensatedSum::default();
    for (n, v) in q.values().iter().enumerate() {
        acc.add((n as f64 + 1.0) * v * v);
    }
    acc.value()
}

/// `int_0^inf |h(t)|^2 t dt`, the squared Hilbert-Schmidt norm of `H`.
pub fn hilbert_schmidt_kernel(h: &KernelSpec) -> f64 {
    let f = |t: f64| {
        let v = h.eval(t);
        v * v * t
    };
    adaptive(f, 0.0, 1.0, 1e-15, 1e-13).value + adaptive_semi_infinite(f, 1.0, 1e-15, 1e-13).value
}
