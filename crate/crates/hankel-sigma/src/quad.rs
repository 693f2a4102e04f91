//! Quadrature rules shared by the transform, pairing and moment code.
//!
//! Everything here works on real integrands. Complex integrals are split
//! into real and imaginary parts by the callers.

use std::collections::BinaryHeap;
use std::cmp::Ordering;

/// Gauss-Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds an `n`-point rule by Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() <= 1e-16 * z.abs().max(1.0) {
                    let (_, d) = legendre_with_derivative(n, z);
                    dp = d;
                    break;
                }
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Integrates `f` over [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(mid + half * x);
        }
        s * half
    }

    /// Integrates `f` over [a, b] split into `panels` equal pieces.
    pub fn composite<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|p| {
                let lo = a + p as f64 * h;
                self.integrate(&mut f, lo, lo + h)
            })
            .sum()
    }

    /// Nodes and weights mapped to [a, b] split into `panels` pieces.
    pub fn mapped(&self, a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
        let h = (b - a) / panels as f64;
        let mut xs = Vec::with_capacity(panels * self.nodes.len());
        let mut ws = Vec::with_capacity(panels * self.nodes.len());
        for p in 0..panels {
            let lo = a + p as f64 * h;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                xs.push(lo + 0.5 * h * (1.0 + x));
                ws.push(0.5 * h * w);
            }
        }
        (xs, ws)
    }
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        resk += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    (resk * h, ((resk - resg) * h).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss-Kronrod (7/15) integration over [a, b].
///
/// Stops once the summed error estimate is below `max(abs_tol, rel_tol*|I|)`
/// or after `max_segments` bisections.
pub fn adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> QuadResult {
    adaptive_limited(&mut f, a, b, abs_tol, rel_tol, 4000)
}

pub fn adaptive_limited<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_segments: usize,
) -> QuadResult {
    if a == b {
        return QuadResult { value: 0.0, error: 0.0, converged: true };
    }
    let mut heap = BinaryHeap::new();
    // Start from a few panels so narrow features are less likely to be missed.
    let start = 4;
    let h = (b - a) / start as f64;
    let mut total = 0.0;
    let mut total_err = 0.0;
    for i in 0..start {
        let lo = a + i as f64 * h;
        let hi = if i + 1 == start { b } else { lo + h };
        let (v, e) = gk15(f, lo, hi);
        total += v;
        total_err += e;
        heap.push(Segment { a: lo, b: hi, value: v, error: e });
    }
    let mut count = start;
    while total_err > abs_tol.max(rel_tol * total.abs()) && count < max_segments {
        let Some(seg) = heap.pop() else { break };
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            heap.push(seg);
            break;
        }
        let (v1, e1) = gk15(f, seg.a, mid);
        let (v2, e2) = gk15(f, mid, seg.b);
        total += v1 + v2 - seg.value;
        total_err += e1 + e2 - seg.error;
        heap.push(Segment { a: seg.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: seg.b, value: v2, error: e2 });
        count += 1;
    }
    // Re-sum to shed drift from the incremental updates.
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let error: f64 = heap.iter().map(|s| s.error).sum();
    QuadResult { value, error, converged: error <= abs_tol.max(rel_tol * value.abs()) }
}

/// Integral over [a, inf) via the map t = a + s/(1-s).
pub fn adaptive_semi_infinite<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> QuadResult {
    let mut g = |s: f64| {
        if s >= 1.0 {
            return 0.0;
        }
        let one_minus = 1.0 - s;
        let t = a + s / one_minus;
        let v = f(t);
        if v == 0.0 {
            0.0
        } else {
            v / (one_minus * one_minus)
        }
    };
    adaptive_limited(&mut g, 0.0, 1.0, abs_tol, rel_tol, 4000)
}

/// Tanh-sinh quadrature over [a, b].
///
/// The integrand receives `(t, t - a, b - t)` with both offsets computed
/// without cancellation, so algebraic endpoint singularities can be
/// evaluated accurately.
pub fn tanh_sinh<F: FnMut(f64, f64, f64) -> f64>(mut f: F, a: f64, b: f64, rel_tol: f64) -> QuadResult {
    use std::f64::consts::FRAC_PI_2;
    let half = 0.5 * (b - a);
    if half == 0.0 {
        return QuadResult { value: 0.0, error: 0.0, converged: true };
    }
    let tmax = 6.5;
    let mut eval = |tk: f64| -> f64 {
        let sh = FRAC_PI_2 * tk.sinh();
        let ch = FRAC_PI_2 * tk.cosh();
        // distance from the nearer endpoint in units of `half`: 1 - tanh(|sh|)
        let e = (-2.0 * sh.abs()).exp();
        let comp = 2.0 * e / (1.0 + e);
        // sech^2 written in the same variables
        let w = ch * 4.0 * e / ((1.0 + e) * (1.0 + e));
        if w == 0.0 || comp == 0.0 {
            return 0.0;
        }
        let (da, db) = if sh < 0.0 {
            (half * comp, half * (2.0 - comp))
        } else {
            (half * (2.0 - comp), half * comp)
        };
        if da <= 0.0 || db <= 0.0 {
            return 0.0;
        }
        let t = if sh < 0.0 { a + da } else { b - db };
        let v = f(t, da, db);
        if v == 0.0 {
            0.0
        } else {
            v * w
        }
    };
    let mut h = 1.0;
    let mut sum = eval(0.0);
    let mut k = 1;
    loop {
        let t = k as f64 * h;
        if t > tmax {
            break;
        }
        sum += eval(t) + eval(-t);
        k += 1;
    }
    let mut prev = sum * h * half;
    let mut err = f64::INFINITY;
    for _level in 0..9 {
        h *= 0.5;
        let mut add = 0.0;
        let mut k = 1;
        loop {
            let t = k as f64 * h;
            if t > tmax {
                break;
            }
            add += eval(t) + eval(-t);
            k += 2;
        }
        sum += add;
        let cur = sum * h * half;
        err = (cur - prev).abs();
        prev = cur;
        if err <= rel_tol * cur.abs() || (cur == 0.0 && err == 0.0) {
            return QuadResult { value: cur, error: err, converged: true };
        }
    }
    QuadResult { value: prev, error: err, converged: false }
}

/// Generalized Gauss-Laguerre rule for the weight `t^a e^{-t}` on (0, inf).
///
/// Weights are returned as natural logarithms so that large rules do not
/// underflow.
#[derive(Debug, Clone)]
pub struct GaussLaguerre {
    pub alpha: f64,
    pub nodes: Vec<f64>,
    pub log_weights: Vec<f64>,
}

impl GaussLaguerre {
    pub fn new(n: usize, alpha: f64) -> Self {
        assert!(n >= 1 && alpha > -1.0);
        // Golub-Welsch: eigenvalues of the Jacobi matrix give the nodes.
        let mut diag: Vec<f64> = (0..n).map(|i| 2.0 * i as f64 + 1.0 + alpha).collect();
        let mut off: Vec<f64> = (0..n)
            .map(|i| if i == 0 { 0.0 } else { (i as f64 * (i as f64 + alpha)).sqrt() })
            .collect();
        tridiagonal_eigenvalues(&mut diag, &mut off);
        diag.sort_by(f64::total_cmp);
        let lg_ratio = crate::specfun::ln_gamma_real_unchecked(n as f64 + alpha)
            - crate::specfun::ln_gamma_real_unchecked(n as f64 + 1.0);
        let mut nodes = Vec::with_capacity(n);
        let mut log_weights = Vec::with_capacity(n);
        for &x0 in &diag {
            let mut x = x0.max(f64::MIN_POSITIVE);
            // Newton polish on L_n^a using scaled values.
            for _ in 0..3 {
                let (pn, pn1, _) = laguerre_pair_scaled(n, alpha, x);
                // x L_n' = n L_n - (n+a) L_{n-1}
                let dp = (n as f64 * pn - (n as f64 + alpha) * pn1) / x;
                if dp == 0.0 {
                    break;
                }
                let step = pn / dp;
                let nx = x - step;
                if !(nx > 0.0) || (step.abs() > 0.1 * (x0.abs() + 1.0)) {
                    break;
                }
                x = nx;
                if step.abs() <= 4e-16 * x {
                    break;
                }
            }
            let (_, pn1, ls) = laguerre_pair_scaled(n, alpha, x);
            // w = Gamma(n+a) x / (n! (n+a) L_{n-1}(x)^2)
            let lw = lg_ratio + x.ln() - (n as f64 + alpha).ln() - 2.0 * (pn1.abs().ln() + ls);
            nodes.push(x);
            log_weights.push(lw);
        }
        Self { alpha, nodes, log_weights }
    }
}

/// Returns `(L_n, L_{n-1}, log_scale)` with the true values equal to the
/// first two entries times `exp(log_scale)`.
pub(crate) fn laguerre_pair_scaled(n: usize, alpha: f64, x: f64) -> (f64, f64, f64) {
    let mut p0 = 0.0;
    let mut p1 = 1.0;
    let mut scale = 0.0;
    for j in 1..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0 + alpha - x) * p1 - (jf - 1.0 + alpha) * p0) / jf;
        p0 = p1;
        p1 = p2;
        if p1.abs() > 1e150 {
            p0 *= 1e-150;
            p1 *= 1e-150;
            scale += 150.0 * std::f64::consts::LN_10;
        }
    }
    (p1, p0, scale)
}

/// Eigenvalues of a symmetric tridiagonal matrix by the implicit QL method.
///
/// `diag` holds the diagonal; `off[i]` couples rows `i-1` and `i` (`off[0]`
/// is ignored). On return `diag` holds the eigenvalues in no particular order.
pub(crate) fn tridiagonal_eigenvalues(diag: &mut [f64], off: &mut [f64]) {
    let n = diag.len();
    if n < 2 {
        return;
    }
    for i in 1..n {
        off[i - 1] = off[i];
    }
    off[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                break;
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut i = m;
            let mut early = false;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
            }
            if early {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
}

/// Neumaier-compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials_exactly() {
        let gl = GaussLegendre::new(10);
        let v = gl.integrate(|x| x.powi(18) + 3.0 * x.powi(5), -1.0, 1.0);
        assert!((v - 2.0 / 19.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let r = adaptive(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-12, 1e-12);
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((r.value - exact).abs() < 1e-9 * exact, "{} vs {}", r.value, exact);
    }

    #[test]
    fn semi_infinite_exponential() {
        let r = adaptive_semi_infinite(|t| (-t).exp(), 1.0, 1e-14, 1e-13);
        assert!((r.value - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn tanh_sinh_endpoint_singularity() {
        // int_0^1 x^{-1/2} dx = 2, int_0^1 ln(x) dx = -1
        let r = tanh_sinh(|_, da, _| da.powf(-0.5), 0.0, 1.0, 1e-14);
        assert!((r.value - 2.0).abs() < 1e-12, "{}", r.value);
        let r = tanh_sinh(|_, da, _| da.ln(), 0.0, 1.0, 1e-14);
        assert!((r.value + 1.0).abs() < 1e-12, "{}", r.value);
        let r = tanh_sinh(|_, _, db| db.powf(-0.75), 2.0, 3.0, 1e-13);
        assert!((r.value - 4.0).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn laguerre_rule_moments() {
        for &(n, a) in &[(8usize, 0.0), (20, 0.5), (64, -0.5), (300, 1.0)] {
            let gl = GaussLaguerre::new(n, a);
            for p in 0..6 {
                let s: f64 = gl
                    .nodes
                    .iter()
                    .zip(&gl.log_weights)
                    .map(|(x, lw)| lw.exp() * x.powi(p))
                    .sum();
                let exact = crate::specfun::gamma_real(a + 1.0 + p as f64).unwrap();
                assert!((s - exact).abs() < 1e-11 * exact, "n={n} a={a} p={p}: {s} vs {exact}");
            }
        }
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1e16);
        s.add(1.0);
        s.add(-1e16);
        assert_eq!(s.value(), 1.0);
    }
}
