use madbcd::problems::{
    read_bundle, read_matrix_market, read_matrix_market_str, write_bundle, write_matrix_market,
    ProblemError,
};
use madbcd::{Matrix, SparseMatrixCsc};
use proptest::prelude::*;

fn triplets() -> impl Strategy<Value = (usize, usize, Vec<(usize, usize, f64)>)> {
    (1usize..30, 1usize..30).prop_flat_map(|(m, n)| {
        let entry = (0..m, 0..n, prop_oneof![-1e6f64..1e6, -1e-6f64..1e-6]);
        (Just(m), Just(n), prop::collection::vec(entry, 0..80))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn write_read_round_trip((m, n, t) in triplets()) {
        let a: Matrix = SparseMatrixCsc::from_triplets(m, n, &t).unwrap().into();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.mtx");
        write_matrix_market(&path, &a).unwrap();
        let back = read_matrix_market(&path, false).unwrap();
        prop_assert_eq!(&back, &a);
        let tr = read_matrix_market(&path, true).unwrap();
        prop_assert_eq!(tr, a.transpose());
    }
}

#[test]
fn symmetric_storage_is_expanded() {
    let text = "%%MatrixMarket matrix coordinate real symmetric\n% comment\n3 3 3\n1 1 2.0\n3 1 -1.5\n2 2 4\n";
    let a = read_matrix_market_str(text, false).unwrap().to_dense();
    assert_eq!(a.get(0, 2), -1.5);
    assert_eq!(a.get(2, 0), -1.5);
    assert_eq!(a.get(1, 1), 4.0);
    let skew = "%%MatrixMarket matrix coordinate real skew-symmetric\n2 2 1\n2 1 3\n";
    let s = read_matrix_market_str(skew, false).unwrap().to_dense();
    assert_eq!((s.get(1, 0), s.get(0, 1)), (3.0, -3.0));
}

#[test]
fn malformed_input_reports_the_line() {
    let text = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n3 1 2.0\n";
    let err = read_matrix_market_str(text, false).unwrap_err().to_string();
    assert!(err.contains("line 4"), "{err}");
    assert!(
        read_matrix_market_str("%%MatrixMarket matrix array real general\n1 1\n1\n", false)
            .is_err()
    );
    assert!(read_matrix_market_str(
        "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n",
        false
    )
    .is_err());
}

#[test]
fn bundle_round_trip() {
    let a = madbcd::problems::gen_gaussian_dense(30, 4, 2).unwrap();
    let p = madbcd::problems::make_consistent_problem(a, 2).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_bundle(dir.path(), &p).unwrap();
    let q = read_bundle(dir.path(), false).unwrap();
    assert!(q.consistent);
    assert_eq!(q.b, p.b);
    assert_eq!(q.x_star, p.x_star);
    std::fs::remove_file(dir.path().join("A.mtx")).unwrap();
    assert!(matches!(
        read_bundle(dir.path(), false),
        Err(ProblemError::Market(_))
    ));
}
