use std::f64::consts::PI;

use hankel_sigma::discrete::{
    generalized_hilbert_q, hilbert_schmidt_discrete, hilbert_schmidt_kernel, moment_solve, q_from_eta, q_from_kernel,
    q_hypergeometric, EtaFunction, EtaStep, MomentSequence, MomentSolveOptions,
};
use hankel_sigma::sigma::KernelSpec;
use proptest::prelude::*;

fn sorted_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn moment_csv_roundtrip_is_bit_exact(values in prop::collection::vec(-1e6f64..1e6, 1..50)) {
        let q = MomentSequence::new(values).unwrap();
        prop_assert_eq!(MomentSequence::from_csv(&q.to_csv()).unwrap(), q);
    }

    #[test]
    fn moments_are_linear_in_eta(
        a in -2.0f64..2.0, b in -2.0f64..2.0,
        c1 in prop::collection::vec(-1.0f64..1.0, 1..6), c2 in prop::collection::vec(-1.0f64..1.0, 1..6),
        at in -0.9f64..0.9, height in -1.0f64..1.0,
    ) {
        let mut e1 = EtaFunction::from_legendre(c1.clone()).unwrap();
        e1.steps.push(EtaStep { at, height });
        let e2 = EtaFunction::from_legendre(c2.clone()).unwrap();
        let len = c1.len().max(c2.len());
        let pad = |c: &[f64]| { let mut v = c.to_vec(); v.resize(len, 0.0); v };
        let combined: Vec<f64> = pad(&c1).iter().zip(pad(&c2)).map(|(x, y)| a * x + b * y).collect();
        let mut e = EtaFunction::from_legendre(combined).unwrap();
        e.steps.push(EtaStep { at, height: a * height });
        let n = 30;
        let (q1, q2, q) = (q_from_eta(&e1, n).unwrap(), q_from_eta(&e2, n).unwrap(), q_from_eta(&e, n).unwrap());
        for i in 0..q.len() {
            let want = a * q1.values()[i] + b * q2.values()[i];
            prop_assert!((q.values()[i] - want).abs() <= 1e-12, "n = {i}");
        }
    }

    #[test]
    fn generalized_hilbert_spectrum_lies_in_zero_pi(gamma in -0.95f64..0.95, n in 4usize..48) {
        let q = generalized_hilbert_q(gamma, 2 * n - 1).unwrap();
        let s = q.section(n).unwrap();
        let e = s.eigenvalues();
        prop_assert!(e[0] >= -s.default_tau());
        prop_assert!(e[n - 1] <= PI + 1e-8);
    }
}

#[test]
fn generalized_hilbert_spectrum_at_catalog_gammas() {
    for gamma in [-0.9, 0.0, 0.9] {
        let q = generalized_hilbert_q(gamma, 2 * 128 - 1).unwrap();
        let s = q.section(128).unwrap();
        let e = s.eigenvalues();
        assert!(e[0] >= -s.default_tau() && e[127] <= PI + 1e-8, "gamma = {gamma}");
    }
}

#[test]
fn kernel_moments_match_the_hypergeometric_form() {
    for beta in [2.0 / 3.0, 1.0, 2.0] {
        for k in [-1.5, -0.5, 0.5, 1.5] {
            let alpha = 1.0 / beta - 0.5;
            let numeric = q_from_kernel(&KernelSpec::quasi_carleman(alpha, 0.0, k), 33).unwrap();
            let closed = q_hypergeometric(beta, k, 33).unwrap();
            for n in 0..=32 {
                let (a, b) = (numeric.values()[n], closed.values()[n]);
                assert!((a - b).abs() <= 1e-8, "beta = {beta}, k = {k}, n = {n}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn hilbert_schmidt_transfer() {
    let h = KernelSpec::quasi_carleman(1.0, 0.0, 0.0);
    let d = hilbert_schmidt_discrete(&q_from_kernel(&h, 256).unwrap());
    assert!((d - hilbert_schmidt_kernel(&h)).abs() <= 1e-4);
}

/// Sections of `Q(beta, -1)` for different `beta` are truncations of
/// unitarily equivalent operators: their sorted spectra approach each other.
#[test]
fn equivalent_family_spectra_converge() {
    let gaps: Vec<f64> = [32usize, 64, 128]
        .iter()
        .map(|&n| {
            let spectra: Vec<Vec<f64>> = [0.5, 1.0, 1.5]
                .iter()
                .map(|&beta| q_hypergeometric(beta, -1.0, 2 * n - 1).unwrap().section(n).unwrap().eigenvalues())
                .collect();
            sorted_gap(&spectra[0], &spectra[1]).max(sorted_gap(&spectra[1], &spectra[2]))
        })
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
}

#[test]
fn solver_report_is_serializable() {
    let q = generalized_hilbert_q(0.0, 32).unwrap();
    let sol = moment_solve(&q, &MomentSolveOptions::default()).unwrap();
    let json = serde_json::to_string(&sol).unwrap();
    assert!(json.contains("least_squares"));
    assert!(sol.converged);
}
