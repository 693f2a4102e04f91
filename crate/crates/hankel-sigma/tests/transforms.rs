use hankel_sigma::transforms::{
    grid_function_from_csv, grid_function_to_csv, inverse_mellin, laplace_convolution, laplace_via_mellin_gamma,
    mellin, GridFunction, LaplaceTable, LogGrid, TestFunction,
};
use proptest::prelude::*;

fn bump() -> impl Strategy<Value = TestFunction> {
    (0.2f64..5.0, 0.1f64..0.9, prop::collection::vec(-2.0f64..2.0, 0..3)).prop_map(|(c, frac, tail)| {
        let mut poly = vec![1.0];
        poly.extend(tail.into_iter().map(|v| v * 0.1));
        TestFunction::with_polynomial(c, frac * c, poly).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn mellin_is_unitary(f in bump()) {
        let grid = LogGrid::new(-16.0, 8.0, 1 << 14).unwrap();
        let sampled = GridFunction::sample_log(grid, |t| f.value(t)).unwrap();
        let m = mellin(&sampled).unwrap();
        prop_assert!((m.transform.l2_norm() - sampled.l2_norm()).abs() <= 1e-10);
        let back = inverse_mellin(&m.transform, grid).unwrap();
        let diff = back.axpby(1.0, &sampled, -1.0).unwrap().l2_norm();
        prop_assert!(diff <= 1e-12 * sampled.l2_norm().max(1.0));
    }

    #[test]
    fn factorization_matches_quadrature(f in bump(), gamma in 0.5f64..1.5) {
        let grid = LogGrid::new(-72.0, 12.0, 1 << 16).unwrap();
        let sampled = GridFunction::sample_log(grid, |t| f.value(t)).unwrap();
        let lf = laplace_via_mellin_gamma(&sampled, gamma).unwrap().function;
        let table = LaplaceTable::new(&f);
        let weighted: Vec<f64> = grid.xs().iter().zip(&lf.values).map(|(x, v)| (gamma * x).exp() * v.re).collect();
        let peak = weighted.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for j in (0..grid.n_points()).step_by(997) {
            let x = grid.x(j);
            let exact = (gamma * x).exp() * table.eval(x.exp());
            prop_assert!((weighted[j] - exact).abs() <= 1e-10 * peak, "x = {x}");
        }
    }

    #[test]
    fn convolution_vanishes_outside_the_support_sum(f1 in bump(), f2 in bump(), s in 0.0f64..1.0) {
        let (a1, b1) = f1.support();
        let (a2, b2) = f2.support();
        prop_assert_eq!(laplace_convolution(&f1, &f2, (a1 + a2) * s), 0.0);
        prop_assert_eq!(laplace_convolution(&f1, &f2, b1 + b2 + s), 0.0);
    }

    #[test]
    fn csv_roundtrip_is_bit_exact(f in bump(), lo in -20.0f64..-1.0, hi in 1.0f64..20.0) {
        let grid = LogGrid::new(lo, hi, 64).unwrap();
        let sampled = GridFunction::sample_log(grid, |t| f.value(t)).unwrap();
        let back = grid_function_from_csv(&grid_function_to_csv(&sampled)).unwrap();
        prop_assert_eq!(back, sampled);
    }
}
