use hankel_sigma::sigma::{
    pair, predicted_counts, quasi_carleman_sigma, KernelSpec, LambdaTest, QuasiCarlemanTerm, SigmaDistribution,
    SigmaError,
};
use hankel_sigma::transforms::TestFunction;
use proptest::prelude::*;

/// `w^2` with derivatives by the Leibniz rule.
struct Squared(TestFunction);

impl LambdaTest for Squared {
    fn derivatives(&self, lambda: f64, order: usize) -> Result<Vec<f64>, SigmaError> {
        let d = LambdaTest::derivatives(&self.0, lambda, order)?;
        Ok((0..=order)
            .map(|p| {
                let mut binom = 1.0;
                let mut acc = 0.0;
                for i in 0..=p {
                    acc += binom * d[i] * d[p - i];
                    binom *= (p - i) as f64 / (i + 1) as f64;
                }
                acc
            })
            .collect())
    }
    fn support(&self) -> (f64, f64) {
        self.0.support()
    }
    fn scale(&self) -> f64 {
        self.0.width()
    }
}

fn non_integer_k(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo..hi).prop_filter("k must not be an integer", |k: &f64| (k - k.round()).abs() > 0.05)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn pairing_is_linear_in_the_atom_list(
        alpha in 0.5f64..2.0, k1 in non_integer_k(-1.9, 2.9), k2 in non_integer_k(-1.9, 2.9),
        c in 1.0f64..4.0, a in -2.0f64..2.0, b in -2.0f64..2.0,
    ) {
        let w = TestFunction::on_line(c, 0.8, vec![1.0, 0.3]).unwrap();
        let s1 = quasi_carleman_sigma(alpha, 0.0, k1);
        let s2 = SigmaDistribution::delta(alpha + 0.3, 1.0)
            .plus(SigmaDistribution::indicator(0.5, 3.0))
            .plus(quasi_carleman_sigma(alpha + 0.2, 0.0, k2));
        let combined = s1.clone().scaled(a).plus(s2.clone().scaled(b));
        let lhs = pair(&combined, &w).unwrap();
        let rhs = a * pair(&s1, &w).unwrap() + b * pair(&s2, &w).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn finite_part_ignores_test_functions_left_of_its_point(alpha in 1.0f64..3.0, k in non_integer_k(0.1, 3.9), width in 0.1f64..0.5) {
        // support [alpha - 2 width, alpha]: w and all its derivatives vanish at alpha
        let w = TestFunction::on_line(alpha - width, width, vec![1.0]).unwrap();
        prop_assert_eq!(pair(&quasi_carleman_sigma(alpha, 0.0, k), &w).unwrap(), 0.0);
    }

    #[test]
    fn sign_lemma(alpha in 1.5f64..3.0, k in non_integer_k(0.05, 3.95), width in 0.3f64..1.0, tail in prop::collection::vec(-1.0f64..1.0, 1..3)) {
        let n = k.floor() as usize;
        let ell = if n.is_multiple_of(2) { n / 2 + 1 } else { n.div_ceil(2) };
        // w = (lambda - alpha)^ell (c_0 + c_1 (lambda - alpha) + ...) times a bump centred at alpha
        let mut poly = vec![0.0; ell];
        poly.push(1.0);
        poly.extend(tail);
        let w = Squared(TestFunction::on_line(alpha, width, poly).unwrap());
        let v = pair(&quasi_carleman_sigma(alpha, 0.0, k), &w).unwrap();
        let sign = if n.is_multiple_of(2) { -1.0 } else { 1.0 };
        prop_assert!(sign * v >= -1e-12, "k = {k}: {v}");
    }

    #[test]
    fn counts_are_invariant_under_a_common_alpha_shift(
        terms in prop::collection::vec((prop_oneof![Just(-1.0), Just(1.0)], 0.0f64..2.0, 0.0f64..1.0, -1.9f64..3.9), 1..3),
        shift in 0.0f64..3.0,
    ) {
        let build = |s: f64| KernelSpec::QuasiCarleman(
            terms.iter().map(|(c, a, r, k)| QuasiCarlemanTerm::new(*c, a + s, *r, *k)).collect(),
        );
        prop_assert_eq!(predicted_counts(&build(0.0)), predicted_counts(&build(shift)));
    }
}

#[test]
fn sigma_json_roundtrip() {
    let s = quasi_carleman_sigma(1.0, 0.5, 1.5).plus(SigmaDistribution::delta(2.0, -0.25));
    assert_eq!(SigmaDistribution::from_json(&s.to_json()).unwrap(), s);
}
