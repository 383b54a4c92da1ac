use curkit::bounds::{condition_number_curca, curba_bound, curca_bound, row_space_residual};
use curkit::cur::{
    absolute_error, curba_stable, curca_explicit_pinv, curca_naive_solve, curca_stable,
    reconstruct, relative_error, scurca_factored, scurca_rowwise, tsvd_error, CoreMode, CurFactors,
    CurStatus,
};
use curkit::kernels::{gaussian_sketch, thin_svd};
use curkit::norms::Norm;
use curkit::rng::{seeded, standard_normal_matrix};
use curkit::selection::{dependent_cpqr_pair, independent_cpqr_pair, rand_pivot, uniform_indices};
use curkit::testbed::{
    gen_block_adversarial, gen_geometric_spectrum, gen_lowrank_gaussian, gen_snn,
};
use curkit::{DenseMatrix, IndexSet};

const FRO: Norm = Norm::Frobenius;

fn gaussian(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    standard_normal_matrix(rows, cols, &mut seeded(seed))
}

fn dense_rel_error(a: &DenseMatrix, f: &CurFactors) -> f64 {
    let mut diff = a.clone();
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let mut s = 0.0;
            for l in 0..f.left.cols() {
                s += f.left.get(i, l) * f.right.get(l, j);
            }
            diff.set(i, j, a.get(i, j) - s);
        }
    }
    diff.frobenius_norm() / a.frobenius_norm()
}

#[test]
fn reconstruct_matches_triple_loop() {
    let left = gaussian(5, 2, 1);
    let right = gaussian(2, 7, 2);
    let f = CurFactors {
        left: left.clone(),
        right: right.clone(),
        row_indices: IndexSet::range(2, 5).unwrap(),
        col_indices: IndexSet::range(2, 7).unwrap(),
        mode: CoreMode::CurcaStable,
        eps_used: 0.0,
        k_eps: 0,
        status: CurStatus::Ok,
    };
    let got = reconstruct(&f);
    for i in 0..5 {
        for j in 0..7 {
            let want: f64 = (0..2).map(|l| left.get(i, l) * right.get(l, j)).sum();
            assert!((got.get(i, j) - want).abs() <= 1e-15 * want.abs().max(1.0));
        }
    }
}

#[test]
fn relative_error_matches_dense_path() {
    let a = gaussian(40, 30, 3);
    let sel = rand_pivot(&a, 8, 3).unwrap();
    let f = curca_stable(&a, &sel.row_indices, &sel.col_indices).unwrap();
    let blocked = relative_error(&a, &f, FRO).unwrap();
    assert!((blocked - dense_rel_error(&a, &f)).abs() <= 1e-12);
}

#[test]
fn modes_agree_on_benign_instances() {
    for seed in 0..10u64 {
        let a = gen_lowrank_gaussian(60, 50, 8, seed).unwrap();
        let noisy = a.sub(&gaussian(60, 50, 100 + seed).scaled(-1e-3)).unwrap();
        let sel = rand_pivot(&noisy, 8, seed).unwrap();
        let (i, j) = (&sel.row_indices, &sel.col_indices);
        let stable = relative_error(&noisy, &curca_stable(&noisy, i, j).unwrap(), FRO).unwrap();
        let pinv =
            relative_error(&noisy, &curca_explicit_pinv(&noisy, i, j).unwrap(), FRO).unwrap();
        let naive = relative_error(&noisy, &curca_naive_solve(&noisy, i, j).unwrap(), FRO).unwrap();
        let fact =
            relative_error(&noisy, &scurca_factored(&noisy, i, j, 1e-15).unwrap(), FRO).unwrap();
        let row =
            relative_error(&noisy, &scurca_rowwise(&noisy, i, j, 1e-15).unwrap(), FRO).unwrap();
        for (name, e) in [("pinv", pinv), ("naive", naive)] {
            assert!((e - stable).abs() <= 1e-10 * stable, "seed {seed} {name}");
        }
        assert!((row - fact).abs() <= 1e-10 * fact, "seed {seed} rowwise");
    }
}

#[test]
fn interpolation_on_selected_rows_and_columns() {
    let a = gaussian(30, 25, 5);
    let sel = rand_pivot(&a, 6, 5).unwrap();
    let (i, j) = (&sel.row_indices, &sel.col_indices);
    let r = reconstruct(&curca_stable(&a, i, j).unwrap());
    let tol = 1e-12 * thin_svd(&a).unwrap().sigma_max();
    for &jj in j.as_slice() {
        for ii in 0..30 {
            assert!((r.get(ii, jj) - a.get(ii, jj)).abs() <= tol);
        }
    }
    for &ii in i.as_slice() {
        for jj in 0..25 {
            assert!((r.get(ii, jj) - a.get(ii, jj)).abs() <= tol);
        }
    }
}

#[test]
fn curba_never_beats_tsvd() {
    for seed in 0..10u64 {
        let a = gen_geometric_spectrum(50, 40, 0.8, seed).unwrap();
        let sel = rand_pivot(&a, 7, seed).unwrap();
        let err = relative_error(
            &a,
            &curba_stable(&a, &sel.row_indices, &sel.col_indices).unwrap(),
            FRO,
        )
        .unwrap();
        assert!(err >= tsvd_error(&a, 7, FRO).unwrap() * (1.0 - 1e-12));
    }
}

#[test]
fn rank_k_sketch_captures_row_space() {
    let a = gen_lowrank_gaussian(50, 40, 6, 9).unwrap();
    let x = gaussian_sketch(&a, 6, 9).unwrap();
    assert!(row_space_residual(&a, &x, FRO).unwrap() <= 1e-10 * a.frobenius_norm());
}

#[test]
fn curca_bound_with_dominant_vectors_holds() {
    for seed in 0..100u64 {
        let a = gen_geometric_spectrum(40, 30, 0.8, seed).unwrap();
        let k = 5 + (seed % 4) as usize;
        let sel = rand_pivot(&a, k, seed).unwrap();
        let x = thin_svd(&a).unwrap().v.leading_cols(k).transpose();
        let (i, j) = (&sel.row_indices, &sel.col_indices);
        let b = curca_bound(&a, i, j, &x, 0.0, FRO).unwrap();
        let tsvd = tsvd_error(&a, k, FRO).unwrap() * a.frobenius_norm();
        assert!(
            (b.residual - tsvd).abs() <= 1e-10 * a.frobenius_norm(),
            "seed {seed}"
        );
        let err = absolute_error(&a, &curca_stable(&a, i, j).unwrap(), FRO).unwrap();
        assert!(
            b.bound_value >= err,
            "seed {seed}: {} < {err}",
            b.bound_value
        );
    }
}

#[test]
fn curba_bound_holds_on_algorithm_one_indices() {
    for seed in 0..100u64 {
        let a = gaussian(200, 150, seed);
        let sel = rand_pivot(&a, 10, seed).unwrap();
        let (i, j) = (&sel.row_indices, &sel.col_indices);
        let x = sel.row_space_approx.clone().unwrap();
        let b = curba_bound(&a, i, j, &x, None, FRO).unwrap();
        let err = absolute_error(&a, &curba_stable(&a, i, j).unwrap(), FRO).unwrap();
        assert!(b.bound_value >= err, "seed {seed}");
    }
}

#[test]
fn kappa_separates_independent_from_dependent() {
    let a = gen_block_adversarial(200, 200, 20, 1e-10, 0).unwrap();
    let ind = independent_cpqr_pair(&a, 20).unwrap();
    let dep = dependent_cpqr_pair(&a, 20).unwrap();
    assert!(ind.row_indices.iter().all(|i| i < 20) && ind.col_indices.iter().all(|j| j < 20));
    // X = A(I,:), the selected rows themselves
    let kappa = |i: &IndexSet, j: &IndexSet| {
        condition_number_curca(&a, i, j, &a.select_rows(i.as_slice())).unwrap()
    };
    let k_ind = kappa(&ind.row_indices, &ind.col_indices);
    let k_dep = kappa(&dep.row_indices, &dep.col_indices);
    assert!(k_ind >= 1e6 && k_dep <= 1e3, "{k_ind:e} {k_dep:e}");
}

#[test]
fn kappa_is_scale_invariant() {
    let a = gaussian(30, 20, 12);
    let sel = rand_pivot(&a, 5, 12).unwrap();
    let x = sel.row_space_approx.clone().unwrap();
    let (i, j) = (&sel.row_indices, &sel.col_indices);
    let k1 = condition_number_curca(&a, i, j, &x).unwrap();
    let k2 = condition_number_curca(&a.scaled(-37.5), i, j, &x).unwrap();
    assert!((k1 - k2).abs() <= 1e-10 * k1 && k1 >= 1.0);
}

#[test]
fn dependent_selection_tracks_tsvd_on_block_matrix() {
    let a = gen_block_adversarial(200, 200, 20, 1e-10, 0).unwrap();
    let dep = dependent_cpqr_pair(&a, 20).unwrap();
    let err = relative_error(
        &a,
        &curca_stable(&a, &dep.row_indices, &dep.col_indices).unwrap(),
        FRO,
    )
    .unwrap();
    assert!(err <= 10.0 * tsvd_error(&a, 20, FRO).unwrap());
}

#[test]
fn rand_pivot_cores_are_nonsingular() {
    for seed in 0..50u64 {
        let a = gaussian(40, 30, 200 + seed);
        let sel = rand_pivot(&a, 10, seed).unwrap();
        let u = a.select(sel.row_indices.as_slice(), sel.col_indices.as_slice());
        assert!(thin_svd(&u).unwrap().sigma_min() > 0.0);
        let again = rand_pivot(&a, 10, seed).unwrap();
        assert_eq!(sel.row_indices, again.row_indices);
        assert_eq!(sel.col_indices, again.col_indices);
    }
}

#[test]
fn uniform_inclusion_frequency() {
    let mut hits = vec![0u32; 1000];
    for t in 0..1000u64 {
        for i in uniform_indices(1000, 30, t).unwrap().iter() {
            hits[i] += 1;
        }
    }
    let p: f64 = 0.03;
    let mean = 1000.0 * p;
    let sd = (1000.0 * p * (1.0 - p)).sqrt();
    assert!(hits.iter().all(|&h| (h as f64 - mean).abs() <= 5.0 * sd));
}

#[test]
fn snn_factor_density() {
    // rank one: x yᵀ, so the nonzero rows are the support of x
    let (m, d) = (2000, 0.1);
    let (mut nonzero, mut rows) = (0usize, 0usize);
    for seed in 0..20u64 {
        let a = gen_snn(m, 50, 1, d, &[1.0], seed).unwrap();
        if a.frobenius_norm() == 0.0 {
            continue;
        }
        rows += m;
        nonzero += (0..m)
            .filter(|&i| a.row(i).iter().any(|&v| v != 0.0))
            .count();
    }
    let n = rows as f64;
    let sd = (n * d * (1.0 - d)).sqrt();
    assert!(
        (nonzero as f64 - n * d).abs() <= 5.0 * sd,
        "{nonzero} of {rows}"
    );
}
