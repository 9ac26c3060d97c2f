mod common;

use common::{jacobi_pseudo_inverse, random_connected, random_pair, random_tree};
use lasso_paths::graph::{
    build_graph, incidence, indicator, parse_edge_list, path_from_support, perturb_weights,
    tree_incidence_dense, tree_pseudoinverse, weighted_incidence, Graph, PathIncidence, TreeView,
};
use lasso_paths::linalg::DenseMatrix;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn to_na(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

fn simple_paths(g: &Graph, s: usize, t: usize) -> Vec<Vec<usize>> {
    fn go(
        g: &Graph,
        v: usize,
        t: usize,
        seen: &mut Vec<bool>,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if v == t {
            out.push(cur.clone());
            return;
        }
        for &(u, _) in g.neighbors(v) {
            if !seen[u] {
                seen[u] = true;
                cur.push(u);
                go(g, u, t, seen, cur, out);
                cur.pop();
                seen[u] = false;
            }
        }
    }
    let mut seen = vec![false; g.n()];
    seen[s] = true;
    let mut out = Vec::new();
    go(g, s, t, &mut seen, &mut vec![s], &mut out);
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scaling_incidence_by_weights_recovers_it(n in 2usize..30, extra in 0usize..20, seed in any::<u64>()) {
        let g = random_connected(n, extra, seed);
        let d = incidence(&g);
        let back = weighted_incidence(&g).scale_columns(&g.weights());
        for r in 0..g.n() {
            for c in 0..g.m() {
                prop_assert!((back.get(r, c) - d.matrix().get(r, c)).abs() < 1e-12);
            }
        }
        // Every column has one +1 and one −1.
        let dt = d.matrix().transpose();
        for j in 0..g.m() {
            let col: Vec<f64> = dt.row(j).map(|(_, v)| v).collect();
            prop_assert_eq!(col.len(), 2);
            prop_assert_eq!(col.iter().sum::<f64>(), 0.0);
        }
    }

    #[test]
    fn every_simple_path_satisfies_flow_constraint(n in 2usize..8, extra in 0usize..6, seed in any::<u64>()) {
        let g = random_connected(n, extra, seed);
        let (s, t) = random_pair(n, seed);
        let y = indicator(&g, s, t).unwrap().to_dense();
        let d = incidence(&g);
        for verts in simple_paths(&g, s, t) {
            let p = PathIncidence::from_vertices(&g, &verts).unwrap();
            let flow = d.matrix().mul_vec(&p.to_dense(g.m()));
            prop_assert_eq!(&flow, &y);
            let signed: Vec<(usize, i8)> = p.steps.clone();
            let again = path_from_support(&g, &signed, s, t).unwrap();
            prop_assert_eq!(again.support(), p.support());
        }
    }

    #[test]
    fn perturbation_keeps_topology_and_bounds(n in 2usize..30, extra in 0usize..20, seed in any::<u64>(), delta in 1e-9f64..0.5) {
        let g = random_connected(n, extra, seed);
        let p = perturb_weights(&g, delta, seed).unwrap();
        prop_assert_eq!(p.m(), g.m());
        for (a, b) in g.edges().iter().zip(p.edges()) {
            prop_assert_eq!((a.tail, a.head), (b.tail, b.head));
            prop_assert!(b.weight > a.weight && b.weight < a.weight * (1.0 + delta));
        }
        prop_assert_eq!(perturb_weights(&g, delta, seed).unwrap(), p);
    }

    #[test]
    fn edge_list_roundtrip(n in 2usize..30, extra in 0usize..20, seed in any::<u64>()) {
        let g = random_connected(n, extra, seed);
        let back = build_graph(&parse_edge_list(&g.to_edge_list_tsv()).unwrap()).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn tree_pseudoinverse_is_moore_penrose(n in 2usize..25, seed in any::<u64>(), root_pick in any::<usize>()) {
        let g = random_tree(n, seed);
        let all: Vec<usize> = (0..g.m()).collect();
        let tree = TreeView::from_edges(&g, root_pick % n, &all).unwrap();
        let m = to_na(&tree_pseudoinverse(&g, &tree).unwrap());
        let d = to_na(&tree_incidence_dense(&g, &tree));
        let tol = 1e-10;
        prop_assert!((&d * &m * &d - &d).amax() < tol);
        prop_assert!((&m * &d * &m - &m).amax() < tol);
        let dm = &d * &m;
        let md = &m * &d;
        prop_assert!((&dm - dm.transpose()).amax() < tol);
        prop_assert!((&md - md.transpose()).amax() < tol);
    }
}

#[test]
fn tree_pseudoinverse_matches_svd_oracle() {
    for seed in 0..40u64 {
        let n = 2 + (seed as usize * 7) % 49;
        let g = random_tree(n, seed);
        let all: Vec<usize> = (0..g.m()).collect();
        let tree = TreeView::from_edges(&g, (seed as usize) % n, &all).unwrap();
        let ours = to_na(&tree_pseudoinverse(&g, &tree).unwrap());
        let oracle = jacobi_pseudo_inverse(&to_na(&tree_incidence_dense(&g, &tree)), 1e-12);
        let gap = (&ours - &oracle).amax();
        assert!(gap < 1e-10, "n = {n}: gap {gap:e}");
    }
}

#[test]
fn jacobi_oracle_agrees_with_library_svd() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let (r, c) = (rng.gen_range(2..12), rng.gen_range(2..12));
        let a = DMatrix::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0));
        let ours = jacobi_pseudo_inverse(&a, 1e-12);
        let lib = a.clone().pseudo_inverse(1e-12).unwrap();
        assert!((&ours - &lib).amax() < 1e-9);
        assert!((&a * &ours * &a - &a).amax() < 1e-12);
    }
}

#[test]
fn labels_survive_sparse_ids() {
    let g = build_graph(&[(100, 7, 1.5), (7, 42, 2.0)]).unwrap();
    assert_eq!(g.labels(), &[7, 42, 100]);
    let back = build_graph(&g.edge_list()).unwrap();
    assert_eq!(back, g);
}
