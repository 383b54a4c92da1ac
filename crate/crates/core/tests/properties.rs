use proptest::prelude::*;

use curkit::cur::{decompose, relative_error, CoreMode};
use curkit::kernels::{eps_partition, orthonormal_basis, thin_qr, thin_svd};
use curkit::norms::Norm;
use curkit::oversampling::{block_sigma_min, os_iterated, OversampleMode};
use curkit::selection::rand_pivot;
use curkit::testbed::{read_matrix_market, read_raw, write_matrix_market, write_raw};
use curkit::DenseMatrix;

fn matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = DenseMatrix> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
        prop::collection::vec(-1e3..1e3f64, r * c)
            .prop_map(move |d| DenseMatrix::new(r, c, d).unwrap())
    })
}

fn defect(q: &DenseMatrix) -> f64 {
    q.transpose()
        .matmul(q)
        .unwrap()
        .sub(&DenseMatrix::identity(q.cols()))
        .unwrap()
        .frobenius_norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn svd_invariants(m in matrix(9, 9)) {
        let svd = thin_svd(&m).unwrap();
        prop_assert!(svd.sigma.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(svd.sigma.iter().all(|&s| s >= 0.0));
        prop_assert!(defect(&svd.w) <= 1e-12 && defect(&svd.v) <= 1e-12);
        let mut ws = svd.w.clone();
        for j in 0..ws.cols() {
            for i in 0..ws.rows() {
                ws.set(i, j, ws.get(i, j) * svd.sigma[j]);
            }
        }
        let back = ws.matmul(&svd.v.transpose()).unwrap();
        prop_assert!(back.sub(&m).unwrap().frobenius_norm() <= 1e-12 * svd.sigma[0].max(f64::MIN_POSITIVE) * 10.0);
    }

    #[test]
    fn qr_is_orthonormal(m in matrix(10, 6).prop_filter("tall", |m| m.rows() >= m.cols())) {
        let qr = thin_qr(&m).unwrap();
        prop_assert!(defect(&qr.q) <= 1e-12 * (m.cols() as f64).sqrt());
    }

    #[test]
    fn truncation_is_monotone(m in matrix(8, 8), e1 in 0.0..500.0f64, e2 in 0.0..500.0f64) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let a = eps_partition(&m, lo).unwrap();
        let b = eps_partition(&m, hi).unwrap();
        prop_assert!(b.rank_kept <= a.rank_kept);
        prop_assert_eq!(a.rank_kept + a.k_eps, m.rows().min(m.cols()));
    }

    #[test]
    fn selection_is_valid_and_deterministic(seed in any::<u64>(), k in 1usize..6) {
        let a = curkit::rng::standard_normal_matrix(12, 10, &mut curkit::rng::seeded(seed));
        let s1 = rand_pivot(&a, k, seed).unwrap();
        let s2 = rand_pivot(&a, k, seed).unwrap();
        prop_assert_eq!(s1.row_indices.len(), k);
        prop_assert_eq!(s1.col_indices.len(), k);
        prop_assert_eq!(&s1.row_indices, &s2.row_indices);
        prop_assert_eq!(&s1.col_indices, &s2.col_indices);
    }

    #[test]
    fn oversampling_is_monotone_and_disjoint(seed in any::<u64>(), p in 0usize..8, mode in 0usize..3) {
        let b = curkit::rng::standard_normal_matrix(20, 4, &mut curkit::rng::seeded(seed));
        let q = orthonormal_basis(&b).unwrap();
        let i = curkit::kernels::cpqr(&q.transpose(), 4).unwrap().pivots;
        let out = os_iterated(&q, &i, p, OversampleMode::ALL[mode]).unwrap();
        prop_assert_eq!(out.extra.len(), p);
        prop_assert!(out.extra.is_disjoint(&i));
        let before = block_sigma_min(&q, i.as_slice()).unwrap();
        let after = block_sigma_min(&q, out.merged(&i).unwrap().as_slice()).unwrap();
        prop_assert!(after >= before);
    }

    #[test]
    fn every_mode_recovers_exact_rank(seed in any::<u64>(), r in 1usize..5) {
        let mut rng = curkit::rng::seeded(seed);
        let a = curkit::rng::standard_normal_matrix(15, r, &mut rng)
            .matmul(&curkit::rng::standard_normal_matrix(r, 11, &mut rng))
            .unwrap();
        let sel = rand_pivot(&a, r, seed).unwrap();
        for mode in CoreMode::ALL {
            let f = decompose(&a, &sel.row_indices, &sel.col_indices, mode, 1e-15).unwrap();
            let e = relative_error(&a, &f, Norm::Frobenius).unwrap();
            prop_assert!(e <= 1e-8, "{:?} {}", mode, e);
        }
    }

    #[test]
    fn matrix_market_round_trip_is_bit_exact(m in matrix(7, 7)) {
        let mut buf = Vec::new();
        write_matrix_market(&m, &mut buf).unwrap();
        let back = read_matrix_market(buf.as_slice()).unwrap();
        prop_assert_eq!(back.shape(), m.shape());
        prop_assert!(back.data().iter().zip(m.data()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn raw_round_trip_is_bit_exact(m in matrix(7, 7)) {
        let mut buf = Vec::new();
        write_raw(&m, &mut buf).unwrap();
        let back = read_raw(buf.as_slice()).unwrap();
        prop_assert!(back.data().iter().zip(m.data()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}
