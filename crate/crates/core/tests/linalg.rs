use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use veob::linalg::dense::{dense_svd, singular_values};
use veob::linalg::{
    incremental_svd_update, project, truncated_svd, ColumnMatrix, IncrementalSvd, SparseColumns, SvdParams,
    TruncatedSvd,
};

/// Enough subspace iterations for 1e-4 agreement on flat spectra.
const ACCURATE: SvdParams = SvdParams {
    oversample: 10,
    power_iters: 20,
    seed: 42,
};

fn gaussian(m: usize, n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// `A = Q1 diag(s) Q2ᵀ` with geometric decay `s_i = decay^i`.
fn decaying(m: usize, n: usize, decay: f64, seed: u64) -> DMatrix<f64> {
    let r = m.min(n);
    let q1 = gaussian(m, r, seed).qr().q();
    let q2 = gaussian(n, r, seed ^ 0xABCD).qr().q();
    let s = DMatrix::from_diagonal(&DVector::from_fn(r, |i, _| decay.powi(i as i32)));
    q1 * s * q2.transpose()
}

fn check_invariants(s: &TruncatedSvd) {
    assert!(s.orthonormality_error() < 1e-5);
    assert!(s.sigma.windows(2).all(|w| w[0] >= w[1]));
    assert!(s.sigma.iter().all(|v| *v >= 0.0));
    if let Some(e) = s.vt_orthonormality_error() {
        assert!(e < 1e-5);
    }
    for col in s.u.column_iter() {
        let mut p = 0;
        for i in 0..col.len() {
            if col[i].abs() > col[p].abs() {
                p = i;
            }
        }
        assert!(col[p] >= 0.0);
    }
}

#[test]
fn oracle_hand_checkable_cases() {
    // [[2,0],[0,3]] -> [3,2]; [[1,1],[0,1]] -> golden ratio pair
    let s = singular_values(&DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0])).unwrap();
    assert!((s[0] - 3.0).abs() < 1e-14 && (s[1] - 2.0).abs() < 1e-14);
    let s = singular_values(&DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0])).unwrap();
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    assert!((s[0] - phi).abs() < 1e-13 && (s[1] - 1.0 / phi).abs() < 1e-13);
    // 3×3 with singular values 3, 2, 1 after an orthogonal change of basis
    let x = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 1.0, 0.0, -2.0, 0.0, 3.0, 0.0, 0.0]);
    let s = singular_values(&x).unwrap();
    for (a, b) in s.iter().zip([3.0, 2.0, 1.0]) {
        assert!((a - b).abs() < 1e-14);
    }
    let d = dense_svd(&x).unwrap();
    let mut us = d.u.clone();
    for (j, v) in d.sigma.iter().enumerate() {
        us.column_mut(j).scale_mut(*v);
    }
    assert!((us * &d.vt - x).amax() < 1e-13);
}

#[test]
fn random_50x200_matches_oracle() {
    let x = gaussian(50, 200, 7);
    let s = truncated_svd(&ColumnMatrix::Dense(x.clone()), 10, &ACCURATE).unwrap();
    let oracle = singular_values(&x).unwrap();
    for (a, b) in s.sigma.iter().zip(&oracle) {
        assert!((a - b).abs() <= 1e-4 * b, "{a} vs {b}");
    }
    check_invariants(&s);
}

#[test]
fn eckart_young_bound() {
    let mut seed = 0;
    for (m, n) in [(8, 8), (20, 60), (64, 256), (64, 64), (40, 17)] {
        let x = gaussian(m, n, seed);
        seed += 1;
        let oracle = singular_values(&x).unwrap();
        let xm = ColumnMatrix::Dense(x.clone());
        for k in 1..=m.min(n) {
            let s = truncated_svd(&xm, k, &SvdParams { seed, ..ACCURATE }).unwrap();
            let err = (s.reconstruct().unwrap() - &x).norm();
            let best = oracle[k..].iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(err <= 1.01 * best + 1e-10, "{m}x{n} k={k}: {err} vs {best}");
        }
    }
}

#[test]
fn diagonal_rank_two() {
    let x = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 2.0, 1.0]));
    let s = truncated_svd(&ColumnMatrix::Dense(x.clone()), 2, &SvdParams::default()).unwrap();
    assert!((s.sigma[0] - 3.0).abs() < 1e-12 && (s.sigma[1] - 2.0).abs() < 1e-12);
    assert!(((s.reconstruct().unwrap() - x).norm() - 1.0).abs() < 1e-12);
}

#[test]
fn determinism_is_bitwise() {
    let x = ColumnMatrix::Dense(gaussian(30, 90, 3));
    let p = SvdParams {
        oversample: 5,
        power_iters: 1,
        seed: 99,
    };
    let a = truncated_svd(&x, 6, &p).unwrap();
    let b = truncated_svd(&x, 6, &p).unwrap();
    let bits = |s: &TruncatedSvd| -> Vec<u64> {
        s.u.iter()
            .chain(s.sigma.iter())
            .chain(s.vt.as_ref().unwrap().iter())
            .map(|v| v.to_bits())
            .collect()
    };
    assert_eq!(bits(&a), bits(&b));
}

#[test]
fn projection_properties() {
    let x = gaussian(20, 60, 11);
    let xm = ColumnMatrix::Dense(x.clone());
    let s = truncated_svd(&xm, 5, &SvdParams::default()).unwrap();
    // the basis projects to the identity
    let p = project(&s.u, &ColumnMatrix::Dense(s.u.clone())).unwrap();
    assert!((p - DMatrix::identity(5, 5)).amax() < 1e-12);
    // zero column
    let z = project(&s.u, &ColumnMatrix::Dense(DMatrix::zeros(20, 1))).unwrap();
    assert!(z.iter().all(|v| *v == 0.0));
    // columns in span(u) are reproduced
    let inside = &s.u * gaussian(5, 30, 12);
    let back = &s.u * project(&s.u, &ColumnMatrix::Dense(inside.clone())).unwrap();
    assert!((back - inside).amax() < 1e-8);
    // non-expansive over 1000 columns
    let q = gaussian(20, 1000, 13);
    let pq = project(&s.u, &ColumnMatrix::Dense(q.clone())).unwrap();
    for j in 0..1000 {
        assert!(pq.column(j).norm() <= q.column(j).norm() * (1.0 + 1e-12));
    }
}

#[test]
fn incremental_from_empty_equals_batch() {
    let x = gaussian(15, 40, 21);
    let xm = ColumnMatrix::Dense(x.clone());
    let whole = incremental_svd_update(&TruncatedSvd::empty(15), &xm, 6).unwrap();
    let batch = truncated_svd(&xm, 6, &ACCURATE).unwrap();
    for (a, b) in whole.sigma.iter().zip(&batch.sigma) {
        assert!((a - b).abs() < 1e-10 * b.max(1.0));
    }
    assert!((whole.u.clone() - batch.u.clone()).amax() < 1e-8);
    check_invariants(&whole);
}

#[test]
fn incremental_five_batches_with_working_rank() {
    for trial in 0..5u64 {
        let x = gaussian(20, 100, 100 + trial);
        let mut acc = IncrementalSvd::new(20, 20).unwrap();
        for b in 0..5 {
            acc.push(&ColumnMatrix::Dense(x.columns(b * 20, 20).into_owned())).unwrap();
        }
        let inc = acc.finish(8);
        let batch = truncated_svd(&ColumnMatrix::Dense(x.clone()), 8, &ACCURATE).unwrap();
        let oracle = singular_values(&x).unwrap();
        for ((a, b), o) in inc.sigma.iter().zip(&batch.sigma).zip(&oracle) {
            assert!((a - o).abs() <= 1e-10 * o);
            assert!((a - b).abs() <= 1e-4 * b);
        }
        check_invariants(&inc);
        assert_eq!(inc.data_cols(), Some(100));
    }
}

#[test]
fn sparse_columns_reject_duplicates_and_out_of_range() {
    assert!(SparseColumns::new(3, vec![0, 2], vec![1, 1], vec![1.0, 2.0]).is_err());
    assert!(SparseColumns::new(3, vec![0, 1], vec![3], vec![1.0]).is_err());
    assert!(SparseColumns::new(3, vec![0, 2], vec![2, 0], vec![1.0, 2.0]).is_err());
}

fn sparse_strategy() -> impl Strategy<Value = (usize, Vec<Vec<(usize, f64)>>)> {
    (1usize..12, 1usize..10).prop_flat_map(|(m, n)| {
        let col = proptest::collection::btree_map(0..m, -10.0f64..10.0, 0..=m)
            .prop_map(|b| b.into_iter().collect::<Vec<_>>());
        (Just(m), proptest::collection::vec(col, n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dense_and_sparse_products_agree((m, cols) in sparse_strategy(), seed in any::<u64>()) {
        let sparse = SparseColumns::from_columns(m, cols.clone()).unwrap();
        let mut dense = DMatrix::zeros(m, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for &(i, v) in c {
                dense[(i, j)] = v;
            }
        }
        let s = ColumnMatrix::Sparse(sparse);
        let d = ColumnMatrix::Dense(dense);
        let b = gaussian(cols.len(), 3, seed);
        let q = gaussian(m, 2, seed ^ 1);
        let scale = d.frobenius_norm().max(1.0);
        prop_assert!((s.mul_dense(&b) - d.mul_dense(&b)).amax() <= 1e-12 * scale * b.amax().max(1.0));
        prop_assert!((s.tr_mul_dense(&q) - d.tr_mul_dense(&q)).amax() <= 1e-12 * scale * q.amax().max(1.0));
    }

    #[test]
    fn truncated_svd_invariants(m in 2usize..24, n in 2usize..40, seed in any::<u64>(), kf in 0.0f64..1.0) {
        let x = gaussian(m, n, seed);
        let k = 1 + ((m.min(n) - 1) as f64 * kf) as usize;
        let s = truncated_svd(&ColumnMatrix::Dense(x.clone()), k, &SvdParams::with_seed(seed)).unwrap();
        prop_assert!(s.k() <= k);
        check_invariants(&s);
        let p = project(&s.u, &ColumnMatrix::Dense(x)).unwrap();
        let mut svt = s.vt.clone().unwrap();
        for (i, v) in s.sigma.iter().enumerate() {
            svt.row_mut(i).scale_mut(*v);
        }
        prop_assert!((p - svt).amax() < 1e-8);
    }

    #[test]
    fn incremental_update_invariants(seed in any::<u64>(), split in 1usize..11) {
        let x = decaying(10, 24, 0.6, seed);
        let first = ColumnMatrix::Dense(x.columns(0, split).into_owned());
        let rest = ColumnMatrix::Dense(x.columns(split, 24 - split).into_owned());
        let s0 = truncated_svd(&first, split.min(10), &SvdParams::with_seed(seed)).unwrap();
        let s1 = incremental_svd_update(&s0, &rest, 6).unwrap();
        check_invariants(&s1);
        prop_assert_eq!(s1.data_cols(), Some(24));
    }
}
