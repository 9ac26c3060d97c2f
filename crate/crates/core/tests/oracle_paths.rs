mod common;

use common::{floyd, random_connected, random_pair, rel_close};
use lasso_paths::oracle::{bidirectional_dijkstra, dijkstra, terminal_uniqueness_check};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn full_dijkstra_matches_floyd(n in 2usize..40, extra in 0usize..60, seed in any::<u64>()) {
        let g = random_connected(n, extra, seed);
        let all = floyd(&g);
        let (s, _) = random_pair(n, seed);
        let tree = dijkstra(&g, s, None).unwrap();
        for v in 0..n {
            prop_assert!(rel_close(tree.dist[v], all[s][v], 1e-12));
            prop_assert!(tree.is_settled(v));
            // The recorded parent chain realises the distance.
            if v != s {
                let p = tree.path_to(&g, v).unwrap();
                prop_assert!(rel_close(p.length, all[s][v], 1e-12));
            }
        }
        prop_assert_eq!(tree.order.len(), n);
        for pair in tree.order.windows(2) {
            prop_assert!(tree.dist[pair[0]] <= tree.dist[pair[1]]);
        }
    }

    #[test]
    fn truncated_search_settles_target(n in 2usize..40, extra in 0usize..60, seed in any::<u64>()) {
        let g = random_connected(n, extra, seed);
        let (s, t) = random_pair(n, seed);
        let all = floyd(&g);
        let tree = dijkstra(&g, s, Some(t)).unwrap();
        prop_assert!(tree.is_settled(t));
        prop_assert_eq!(*tree.order.last().unwrap(), t);
        prop_assert!(rel_close(tree.dist[t], all[s][t], 1e-12));
        for &v in &tree.order {
            prop_assert!(all[s][v] <= all[s][t] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn bidirectional_certificate(n in 2usize..40, extra in 0usize..60, seed in any::<u64>()) {
        let g = random_connected(n, extra, seed);
        let (s, t) = random_pair(n, seed);
        let all = floyd(&g);
        let cert = bidirectional_dijkstra(&g, s, t).unwrap();
        prop_assert!(rel_close(cert.distance, all[s][t], 1e-12));
        prop_assert!(cert.identity_gap(&g).abs() <= 1e-9 * all[s][t].max(1.0));
        let path = cert.path(&g);
        prop_assert_eq!((path.s, path.t), (s, t));
        prop_assert!(rel_close(path.length, all[s][t], 1e-12));
        prop_assert!(path.support().contains(&cert.bridge_edge));
    }

    #[test]
    fn perturbed_integer_weights_have_unique_geodesics(n in 2usize..30, extra in 0usize..40, seed in any::<u64>()) {
        let g = random_connected(n, extra, seed);
        let (s, t) = random_pair(n, seed);
        let rep = terminal_uniqueness_check(&g, s, t).unwrap();
        prop_assert!(rep.holds(), "ambiguous: {:?} {:?}", rep.ambiguous_from_s, rep.ambiguous_from_t);
    }
}

#[test]
fn uniqueness_check_flags_ties() {
    let g =
        lasso_paths::graph::Graph::new(4, &[(0, 1, 1.0), (1, 3, 1.0), (0, 2, 1.0), (2, 3, 1.0)])
            .unwrap();
    let rep = terminal_uniqueness_check(&g, 0, 1).unwrap();
    assert!(!rep.holds());
    assert_eq!(rep.ambiguous_from_s, vec![3]);
}
