use madbcd::problems::{gen_gaussian_dense, gen_sparse_gaussian, make_consistent_problem};
use madbcd::rng::derive_seed;
use madbcd::sketch::cs_prepare;
use madbcd::solver::{run_solver_with, MethodParams, RunOptions, StoppingRule};
use madbcd::CountSketch;

#[test]
fn sketch_gram_is_unbiased() {
    let (m, d, trials) = (20, 5, 2000);
    let mut mean = vec![0.0; m * m];
    for t in 0..trials {
        let s = CountSketch::build(d, m, derive_seed(77, t)).unwrap();
        let dense = s.to_dense();
        let g = dense.gram();
        for (acc, v) in mean.iter_mut().zip(g.values()) {
            *acc += v / trials as f64;
        }
    }
    for i in 0..m {
        for k in 0..m {
            let want = if i == k { 1.0 } else { 0.0 };
            let got = mean[k * m + i];
            assert!((got - want).abs() <= 0.05, "({i},{k}): {got}");
        }
    }
}

#[test]
fn sparse_application_matches_columnwise_oracle() {
    for seed in 0..10u64 {
        let a = gen_sparse_gaussian(400, 25, 0.03, seed).unwrap();
        let s = CountSketch::build(60, 400, derive_seed(seed, 1)).unwrap();
        let sa = s.apply_matrix(&a).unwrap();
        assert!(sa.is_sparse());
        assert!(sa.nnz() <= a.nnz());
        let dense_a = a.to_dense();
        let dense_sa = sa.to_dense();
        for j in 0..25 {
            let want = s.apply_vector(dense_a.column(j)).unwrap();
            for (u, v) in dense_sa.column(j).iter().zip(&want) {
                assert!((u - v).abs() <= 1e-12 * (1.0 + v.abs()));
            }
        }
    }
}

#[test]
fn sketched_system_keeps_the_solution() {
    let n = 100;
    let p = make_consistent_problem(gen_gaussian_dense(4000, n, 12).unwrap(), 12).unwrap();
    let (sk, prep) = cs_prepare(&p, 8 * n, 99).unwrap();
    assert!(prep >= 0.0);
    assert_eq!((sk.rows(), sk.cols()), (8 * n, n));
    assert_eq!(sk.x_star, p.x_star);
    let rep = run_solver_with(
        &sk,
        &MethodParams::madbcd(0.2),
        &StoppingRule::rse(1e-10, 10_000),
        &RunOptions::default(),
    )
    .unwrap();
    assert!(rep.converged(), "{}", rep.stop_reason);
    // x* solves the original system, so the sketched residual there is zero
    let ax = p.a.matvec(&rep.x).unwrap();
    let res: f64 =
        p.b.iter()
            .zip(&ax)
            .map(|(b, y)| (b - y).powi(2))
            .sum::<f64>()
            .sqrt();
    assert!(res <= 1e-3 * madbcd::matrix::norm2(&p.b));
}

#[test]
fn no_compression_is_rejected() {
    let p = make_consistent_problem(gen_gaussian_dense(50, 5, 1).unwrap(), 1).unwrap();
    assert!(cs_prepare(&p, 50, 0).is_err());
    assert!(cs_prepare(&p, 49, 0).is_ok());
}
