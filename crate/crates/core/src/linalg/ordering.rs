use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::SparseMatrix;

/// Result of simulating elimination on the graph of a symmetric matrix.
#[derive(Debug, Clone)]
pub(crate) struct Elimination {
    /// `order[k]` is the original index eliminated at step `k`.
    pub order: Vec<usize>,
    /// Below-diagonal pattern of each column of L, in new (permuted) indices,
    /// sorted ascending.
    pub columns: Vec<Vec<usize>>,
}

/// Minimum degree ordering of the pattern of a symmetric matrix.
///
/// Ties are broken by the smaller original index. Returns the permutation
/// `order` with `order[k]` = original index placed at position `k`.
pub fn minimum_degree_order(m: &SparseMatrix) -> Vec<usize> {
    eliminate(m).order
}

/// Runs exact minimum degree on the elimination graph and records the fill
/// pattern, which is the symbolic factor.
pub(crate) fn eliminate(m: &SparseMatrix) -> Elimination {
    let n = m.rows();
    let mut adj: Vec<Vec<usize>> = (0..n)
        .map(|i| m.row(i).map(|(c, _)| c).filter(|&c| c != i).collect())
        .collect();
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }
    let mut eliminated = vec![false; n];
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
        (0..n).map(|i| Reverse((adj[i].len(), i))).collect();
    let mut order = Vec::with_capacity(n);
    let mut pattern_old: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut merged = Vec::new();

    while let Some(Reverse((deg, v))) = heap.pop() {
        if eliminated[v] || deg != adj[v].len() {
            continue;
        }
        eliminated[v] = true;
        order.push(v);
        let nbrs = std::mem::take(&mut adj[v]);
        for &a in &nbrs {
            // adj[a] <- (adj[a] ∪ nbrs) \ {a, v}
            merged.clear();
            let (x, y) = (&adj[a], &nbrs);
            let (mut i, mut j) = (0, 0);
            while i < x.len() || j < y.len() {
                let next = match (x.get(i), y.get(j)) {
                    (Some(&p), Some(&q)) if p == q => {
                        i += 1;
                        j += 1;
                        p
                    }
                    (Some(&p), Some(&q)) if p < q => {
                        i += 1;
                        p
                    }
                    (Some(_), Some(&q)) => {
                        j += 1;
                        q
                    }
                    (Some(&p), None) => {
                        i += 1;
                        p
                    }
                    (None, Some(&q)) => {
                        j += 1;
                        q
                    }
                    (None, None) => unreachable!(),
                };
                if next != a && next != v {
                    merged.push(next);
                }
            }
            std::mem::swap(&mut adj[a], &mut merged);
            heap.push(Reverse((adj[a].len(), a)));
        }
        pattern_old.push(nbrs);
    }

    let mut position = vec![0usize; n];
    for (k, &v) in order.iter().enumerate() {
        position[v] = k;
    }
    let columns = pattern_old
        .into_iter()
        .map(|col| {
            let mut c: Vec<usize> = col.into_iter().map(|v| position[v]).collect();
            c.sort_unstable();
            c
        })
        .collect();
    Elimination { order, columns }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_laplacian(n: usize) -> SparseMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        SparseMatrix::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn order_is_a_permutation() {
        let m = path_laplacian(10);
        let mut o = minimum_degree_order(&m);
        o.sort_unstable();
        assert_eq!(o, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn path_graph_has_no_fill() {
        let e = eliminate(&path_laplacian(12));
        let fill: usize = e.columns.iter().map(Vec::len).sum();
        assert_eq!(fill, 11);
    }

    #[test]
    fn star_eliminates_leaves_first() {
        // Hub 0 connected to 1..=5.
        let mut t: Vec<(usize, usize, f64)> = (0..6).map(|i| (i, i, 6.0)).collect();
        for i in 1..6 {
            t.push((0, i, -1.0));
            t.push((i, 0, -1.0));
        }
        let m = SparseMatrix::from_triplets(6, 6, &t).unwrap();
        let e = eliminate(&m);
        assert_eq!(e.order[0], 1);
        let fill: usize = e.columns.iter().map(Vec::len).sum();
        assert_eq!(fill, 5);
    }
}
