mod common;

use common::{random_connected, random_pair, rel_close};
use lasso_paths::graph::{indicator, weighted_incidence};
use lasso_paths::lars::{
    crossing_ratio_tree, crossing_times_generic, extract_path, final_breakpoint, joining_time_tree,
    joining_times_generic, kkt_residual, lars_solve, lars_solve_graph, verify_dijkstra_equivalence,
    LarsOptions, TwinTrees,
};
use lasso_paths::linalg::SparseMatrix;
use lasso_paths::oracle::dijkstra;
use lasso_paths::proximal::lambda_max;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Cyclic coordinate descent on ½‖y − Qβ‖² + λ‖β‖₁ for a dense column-major design.
fn coordinate_descent(cols: &[Vec<f64>], y: &[f64], lambda: f64) -> Vec<f64> {
    let m = cols.len();
    let norms: Vec<f64> = cols.iter().map(|c| c.iter().map(|v| v * v).sum()).collect();
    let mut beta = vec![0.0; m];
    let mut resid = y.to_vec();
    for _ in 0..200_000 {
        let mut change = 0.0f64;
        for j in 0..m {
            let rho: f64 =
                cols[j].iter().zip(&resid).map(|(c, r)| c * r).sum::<f64>() + norms[j] * beta[j];
            let new = if rho > lambda {
                (rho - lambda) / norms[j]
            } else if rho < -lambda {
                (rho + lambda) / norms[j]
            } else {
                0.0
            };
            let d = new - beta[j];
            if d != 0.0 {
                for (r, c) in resid.iter_mut().zip(&cols[j]) {
                    *r -= c * d;
                }
                beta[j] = new;
                change = change.max(d.abs());
            }
        }
        if change < 1e-15 {
            break;
        }
    }
    beta
}

fn random_design(n: usize, m: usize, seed: u64) -> (Vec<Vec<f64>>, SparseMatrix, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cols: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let mut trips = Vec::new();
    for (j, c) in cols.iter().enumerate() {
        for (i, &v) in c.iter().enumerate() {
            trips.push((i, j, v));
        }
    }
    let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    (cols, SparseMatrix::from_triplets(n, m, &trips).unwrap(), y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn generic_path_matches_coordinate_descent(m in 1usize..7, extra_rows in 1usize..6, seed in any::<u64>()) {
        let n = m + extra_rows;
        let (cols, q, y) = random_design(n, m, seed);
        let path = lars_solve(&q, &y, &LarsOptions::default()).unwrap();
        let lmax = lambda_max(&q, &y);
        prop_assert!(rel_close(path.breakpoints[0], lmax, 1e-12));
        for frac in [0.9, 0.5, 0.2, 0.05, 0.01] {
            let lam = frac * lmax;
            let ours = path.beta_at(lam);
            let oracle = coordinate_descent(&cols, &y, lam);
            for (a, b) in ours.iter().zip(&oracle) {
                prop_assert!((a - b).abs() < 1e-7, "λ = {lam}: {ours:?} vs {oracle:?}");
            }
        }
    }

    #[test]
    fn kkt_holds_inside_every_segment(m in 1usize..8, extra_rows in 0usize..6, seed in any::<u64>()) {
        let n = m + extra_rows;
        let (_, q, y) = random_design(n.max(1), m, seed);
        let path = lars_solve(&q, &y, &LarsOptions { check_rank: false, ..Default::default() }).unwrap();
        for seg in &path.segments {
            let Some(hi) = seg.lambda_hi else { continue };
            // Interior points only: at a breakpoint a crossing coefficient is
            // zero up to rounding and its sign is arbitrary.
            for t in [0.1, 0.5, 0.9] {
                let lam = seg.lambda_lo + t * (hi - seg.lambda_lo);
                if lam <= 0.0 {
                    continue;
                }
                let rep = kkt_residual(&q, &y, &path.beta_at(lam), lam, 1e-8);
                prop_assert!(rep.ok(), "λ = {lam}: {:?}", rep.violations);
            }
        }
        for pair in path.breakpoints.windows(2) {
            prop_assert!(pair[0] > pair[1]);
        }
        // Adjacent pieces agree at the shared breakpoint.
        for pair in path.segments.windows(2) {
            let lam = pair[0].lambda_lo;
            let mut upper = vec![0.0; m];
            let mut lower = vec![0.0; m];
            for (&j, v) in pair[0].state.indices.iter().zip(pair[0].active_beta(lam)) {
                upper[j] = v;
            }
            for (&j, v) in pair[1].state.indices.iter().zip(pair[1].active_beta(lam)) {
                lower[j] = v;
            }
            for (u, l) in upper.iter().zip(&lower) {
                prop_assert!((u - l).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn graph_path_recovers_dijkstra(n in 2usize..25, extra in 0usize..40, seed in any::<u64>()) {
        let g = random_connected(n, extra, seed);
        let (s, t) = random_pair(n, seed);
        let path = lars_solve_graph(&g, s, t, &LarsOptions::default()).unwrap();
        let report = verify_dijkstra_equivalence(&path, &g, s, t).unwrap();
        prop_assert!(report.passed());
        let tree = dijkstra(&g, s, Some(t)).unwrap();
        prop_assert!(rel_close(path.distance, tree.dist[t], 1e-9));
        let found = extract_path(&path.x0(&g), &g, s, t, 0.5).unwrap();
        prop_assert_eq!(found.support(), tree.path_to(&g, t).unwrap().support());
        // Graph paths never shed an edge.
        prop_assert_eq!(path.cross_count(), 0);
        let y = indicator(&g, s, t).unwrap().to_dense();
        let q = weighted_incidence(&g);
        let tiny = path.breakpoints.last().copied().unwrap() * 0.5;
        prop_assert!(kkt_residual(&q, &y, &path.beta_at(tiny), tiny, 1e-8).ok());
    }

    #[test]
    fn final_breakpoint_matches_homotopy(n in 2usize..30, extra in 0usize..50, seed in any::<u64>()) {
        let g = random_connected(n, extra, seed);
        let (s, t) = random_pair(n, seed);
        let path = lars_solve_graph(&g, s, t, &LarsOptions::default()).unwrap();
        let last = *path.breakpoints.last().unwrap();
        prop_assert!(rel_close(final_breakpoint(&g, s, t).unwrap(), last, 1e-10));
    }

    #[test]
    fn closed_forms_agree_with_generic_times(n in 2usize..25, extra in 0usize..40, seed in any::<u64>()) {
        let g = random_connected(n, extra, seed);
        let (s, t) = random_pair(n, seed);
        let y = indicator(&g, s, t).unwrap().to_dense();
        let q = weighted_incidence(&g);
        let path = lars_solve_graph(&g, s, t, &LarsOptions::default()).unwrap();
        let mut compared = 0;
        for seg in &path.segments {
            let Ok(twin) = TwinTrees::from_active(&g, s, t, &seg.state.indices) else { continue };
            let joins = joining_times_generic(&q, &y, &seg.state, &seg.a, &seg.b, seg.lambda_hi);
            for j in 0..g.m() {
                if seg.state.contains(j) || joins.time[j] <= 0.0 {
                    continue;
                }
                let closed = joining_time_tree(&twin, &g, j).unwrap();
                prop_assert!(rel_close(closed, joins.time[j], 1e-8), "edge {j}: {closed} vs {}", joins.time[j]);
                compared += 1;
            }
            let crosses = crossing_times_generic(&seg.a, &seg.b, seg.lambda_hi);
            for (&j, &c) in seg.state.indices.iter().zip(&crosses) {
                if c > 0.0 {
                    let closed = crossing_ratio_tree(&twin, &g, j).unwrap();
                    prop_assert!(rel_close(closed, c, 1e-8));
                }
            }
        }
        prop_assert!(compared > 0);
    }
}

#[test]
fn rank_check_flags_duplicate_columns() {
    let q =
        SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)])
            .unwrap();
    let y = [1.0, 0.5];
    let strict = lars_solve(
        &q,
        &y,
        &LarsOptions {
            allow_ties: true,
            ..Default::default()
        },
    );
    assert!(strict.is_err());
    let loose = lars_solve(
        &q,
        &y,
        &LarsOptions {
            check_rank: false,
            ..Default::default()
        },
    )
    .unwrap();
    // Minimum-norm fallback splits the weight evenly.
    let b = loose.beta_at(loose.breakpoints[0] * 0.5);
    assert!((b[0] - b[1]).abs() < 1e-12);
}
