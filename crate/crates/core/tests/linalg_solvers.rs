mod common;

use common::random_connected;
use lasso_paths::graph::weighted_incidence;
use lasso_paths::linalg::{
    gram_nn, min_norm_least_squares, minimum_degree_order, pcg, CholeskyFactor, DenseMatrix,
    SparseMatrix,
};
use lasso_paths::proximal::{beta_update_direct, beta_update_identity, AdmmFactor};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_vec(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn inf_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn na(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cholesky_solves_shifted_laplacian(n in 2usize..60, extra in 0usize..80, seed in any::<u64>(), rho in 1e-3f64..10.0) {
        let g = random_connected(n, extra, seed);
        let q = weighted_incidence(&g);
        let a = gram_nn(&q, rho);
        prop_assert!(a.is_symmetric());
        let f = CholeskyFactor::factor(&a).unwrap();
        let mut perm = f.permutation().to_vec();
        perm.sort_unstable();
        prop_assert_eq!(perm, (0..n).collect::<Vec<_>>());
        let b = random_vec(n, seed);
        let x = f.solve(&b);
        let r = a.mul_vec(&x);
        prop_assert!(inf_dist(&r, &b) < 1e-9 * (1.0 + 1.0 / rho));
        // L Lᵀ reproduces A.
        let back = f.reconstruct_apply(&b);
        prop_assert!(inf_dist(&back, &a.mul_vec(&b)) < 1e-9 * a.values().iter().fold(1.0f64, |m, v| m.max(v.abs())));
        let order = minimum_degree_order(&a);
        prop_assert_eq!(order.len(), n);
    }

    #[test]
    fn pcg_agrees_with_cholesky(n in 2usize..60, extra in 0usize..80, seed in any::<u64>(), rho in 1e-2f64..10.0) {
        let g = random_connected(n, extra, seed);
        let a = gram_nn(&weighted_incidence(&g), rho);
        let b = random_vec(n, seed ^ 1);
        let mut x = vec![0.0; n];
        let rep = pcg(|v, out| a.mul_vec_into(v, out), &b, &mut x, &a.diagonal(), 1e-12, 10 * n).unwrap();
        prop_assert!(rep.converged);
        prop_assert!(rep.relative_residual <= 1e-12);
        let exact = CholeskyFactor::factor(&a).unwrap().solve(&b);
        let scale = exact.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        prop_assert!(inf_dist(&x, &exact) < 1e-8 * scale);
    }

    #[test]
    fn identity_and_direct_beta_updates_agree(n in 2usize..30, extra in 0usize..40, seed in any::<u64>(), rho in 1e-2f64..10.0) {
        let g = random_connected(n, extra, seed);
        let q = weighted_incidence(&g);
        let h = random_vec(g.m(), seed ^ 2);
        let via_n = beta_update_identity(&q, &AdmmFactor::new(&q, rho, None).unwrap(), &h);
        let via_m = beta_update_direct(&q, rho, &h).unwrap();
        let scale = via_m.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        prop_assert!(inf_dist(&via_n, &via_m) < 1e-9 * scale);
        // Independent dense check of (QᵀQ + ρI) β = h.
        let qd = na(&q.to_dense());
        let lhs = (qd.transpose() * &qd + DMatrix::identity(g.m(), g.m()) * rho) * DVector::from_column_slice(&via_n);
        prop_assert!(inf_dist(lhs.as_slice(), &h) < 1e-8 * scale.max(1.0 / rho));
    }

    #[test]
    fn min_norm_matches_svd_pseudoinverse(rows in 1usize..9, cols in 1usize..9, rank_cap in 1usize..9, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rank_cap.min(rows).min(cols);
        // A = U V with inner dimension k gives rank ≤ k.
        let u = DMatrix::from_fn(rows, k, |_, _| rng.gen_range(-1.0..1.0));
        let v = DMatrix::from_fn(k, cols, |_, _| rng.gen_range(-1.0..1.0));
        let a = &u * &v;
        let b: Vec<f64> = (0..rows).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let ours = min_norm_least_squares(&DenseMatrix::from_fn(rows, cols, |i, j| a[(i, j)]), &b);
        let oracle = a.clone().pseudo_inverse(1e-10).unwrap() * DVector::from_column_slice(&b);
        let scale = oracle.amax().max(1.0);
        prop_assert!(inf_dist(&ours, oracle.as_slice()) < 1e-7 * scale, "ours {:?} oracle {:?}", ours, oracle);
    }

    #[test]
    fn sparse_products_match_dense(rows in 1usize..12, cols in 1usize..12, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let trips: Vec<(usize, usize, f64)> = (0..rows * cols / 2 + 1)
            .map(|_| (rng.gen_range(0..rows), rng.gen_range(0..cols), rng.gen_range(-2.0..2.0)))
            .collect();
        let s = SparseMatrix::from_triplets(rows, cols, &trips).unwrap();
        let mut d = DMatrix::<f64>::zeros(rows, cols);
        for &(r, c, v) in &trips {
            d[(r, c)] += v;
        }
        let x = random_vec(cols, seed ^ 3);
        let want = &d * DVector::from_column_slice(&x);
        prop_assert!(inf_dist(&s.mul_vec(&x), want.as_slice()) < 1e-12);
        let xt = random_vec(rows, seed ^ 4);
        let want_t = d.transpose() * DVector::from_column_slice(&xt);
        prop_assert!(inf_dist(&s.transpose().mul_vec(&xt), want_t.as_slice()) < 1e-12);
    }
}

#[test]
fn cholesky_rejects_indefinite() {
    let m =
        SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)])
            .unwrap();
    assert!(CholeskyFactor::factor(&m).is_err());
}

#[test]
fn dense_rank_matches_nalgebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in 0..6 {
        let u = DMatrix::from_fn(7, k.max(1), |_, _| rng.gen_range(-1.0..1.0));
        let v = DMatrix::from_fn(k.max(1), 5, |_, _| rng.gen_range(-1.0..1.0));
        let a = if k == 0 {
            DMatrix::zeros(7, 5)
        } else {
            &u * &v
        };
        let ours = DenseMatrix::from_fn(7, 5, |i, j| a[(i, j)]).rank();
        assert_eq!(ours, a.rank(1e-9), "k = {k}");
    }
}
