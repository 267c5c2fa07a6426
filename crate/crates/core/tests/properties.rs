//! Property tests for the numeric invariants.

use codedcomp::interp::BarycentricNodes;
use codedcomp::linalg::{lu_determinant, mat_pow, operator_norm, sym_eigenvalues, Matrix};
use proptest::prelude::*;

fn matrix_strategy(n: usize, lo: f64, hi: f64) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(lo..hi, n * n)
        .prop_map(move |data| Matrix::from_col_major(n, n, data).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn operator_norm_never_exceeds_frobenius(x in matrix_strategy(4, -10.0, 10.0)) {
        let op = operator_norm(&x).unwrap();
        prop_assert!(op <= x.frobenius_norm() + 1e-9);
    }

    #[test]
    fn vec_of_first_power_is_vec(x in matrix_strategy(3, -5.0, 5.0)) {
        let p1 = mat_pow(&x, 1).unwrap().vec();
        let direct = x.vec();
        prop_assert_eq!(p1.as_ref() as &[f64], direct.as_ref() as &[f64]);
    }

    #[test]
    fn determinant_is_multiplicative(
        a in matrix_strategy(5, -1.0, 1.0),
        b in matrix_strategy(5, -1.0, 1.0),
    ) {
        let da = lu_determinant(&a).unwrap();
        let db = lu_determinant(&b).unwrap();
        // skip near-singular draws: the relative comparison is meaningless there
        prop_assume!(da.abs() > 1e-3 && db.abs() > 1e-3);
        let dab = lu_determinant(&a.matmul(&b).unwrap()).unwrap();
        let rel = (dab - da * db).abs() / (da * db).abs();
        prop_assert!(rel < 1e-8, "relative error {}", rel);
    }

    #[test]
    fn eigenvalue_sum_matches_trace(x in matrix_strategy(4, -1.0, 1.0)) {
        let sym = Matrix::from_fn(4, 4, |i, j| 0.5 * (x.get(i, j) + x.get(j, i)));
        let vals = sym_eigenvalues(&sym).unwrap();
        let sum: f64 = vals.iter().sum();
        prop_assert!((sum - sym.trace()).abs() < 1e-8);
    }

    #[test]
    fn interpolation_reproduces_polynomials_exactly(
        coeffs in prop::collection::vec(-3.0..3.0f64, 1..=5),
        probes in prop::collection::vec(0.0..1.0f64, 8),
    ) {
        // A degree-(d) polynomial fitted at d+1 distinct nodes is exact
        // everywhere.
        let eval = |x: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c);
        let n_nodes = coeffs.len();
        let nodes: Vec<f64> = (1..=n_nodes).map(|i| i as f64 / (n_nodes + 1) as f64).collect();
        let values: Vec<f64> = nodes.iter().map(|&x| eval(x)).collect();
        let b = BarycentricNodes::new(&nodes).unwrap();
        for &x in &probes {
            let got = b.eval(&values, x);
            let want = eval(x);
            prop_assert!((got - want).abs() < 1e-8 * want.abs().max(1.0),
                "x={} got={} want={}", x, got, want);
        }
    }

    #[test]
    fn composite_is_low_degree_polynomial(
        seed in 0u64..1000,
    ) {
        // α ↦ h(e(α)) has degree ≤ G·P whatever the coefficients: fitting
        // it at R = G·P+1 nodes reproduces it at fresh probe points.
        use codedcomp::rng::{stream, substream};
        use codedcomp::scheme::{
            encode, interpolate_results, worker_compute, ComputationCoefficients,
            EncoderCoefficients, WorkerResult, default_alphas,
        };
        use rand::Rng;
        let (m, v, g, p) = (3usize, 2usize, 2usize, 2usize);
        let mut rng = substream(seed, &[stream::EVAL, 0xcc]);
        let us = (0..=g).map(|_| Matrix::from_fn(m, m, |_, _| rng.random_range(-1.0..1.0))).collect();
        let vs: Vec<Matrix> = (0..=p).map(|_| Matrix::from_fn(v, m * m, |_, _| rng.random_range(-1.0..1.0))).collect();
        let enc = EncoderCoefficients { us };
        let comp = ComputationCoefficients { from_network: (0..=p).map(|i| i == 0).collect(), vs };
        let r = g * p + 1;
        let results: Vec<WorkerResult> = default_alphas(r).iter().map(|&alpha| WorkerResult {
            alpha,
            y: worker_compute(&comp, &encode(&enc, alpha)).unwrap(),
        }).collect();
        let poly = interpolate_results(&results, r).unwrap();
        for i in 0..5 {
            let x = 0.05 + 0.19 * i as f64;
            let direct = worker_compute(&comp, &encode(&enc, x)).unwrap();
            let got = poly.eval(x);
            let num = got.sub(&direct).unwrap().norm();
            let den = direct.norm().max(1e-12);
            prop_assert!(num / den < 1e-8, "rel err {}", num / den);
        }
    }
}
