//! Dijkstra and bidirectional Dijkstra, used as the reference for every
//! lasso-based solver and as the runtime baseline.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, PathIncidence};

/// Shortest-path tree grown from `root`, possibly truncated at a target.
#[derive(Debug, Clone, PartialEq)]
pub struct ShortestPathTree {
    pub root: usize,
    /// `+∞` for vertices that were never reached.
    pub dist: Vec<f64>,
    pub parent_edge: Vec<Option<usize>>,
    /// Settled vertices in settling order.
    pub order: Vec<usize>,
    settled: Vec<bool>,
}

impl ShortestPathTree {
    pub fn is_settled(&self, v: usize) -> bool {
        self.settled[v]
    }

    /// Vertex sequence from the root to `v`, or `None` if `v` was not reached.
    pub fn vertices_to(&self, graph: &Graph, v: usize) -> Option<Vec<usize>> {
        if !self.dist[v].is_finite() {
            return None;
        }
        let mut out = vec![v];
        let mut u = v;
        while let Some(j) = self.parent_edge[u] {
            u = graph.edge(j).other(u);
            out.push(u);
        }
        out.reverse();
        Some(out)
    }

    /// Path incidence from the root to `v`; `None` when unreached or `v` is
    /// the root.
    pub fn path_to(&self, graph: &Graph, v: usize) -> Option<PathIncidence> {
        let vs = self.vertices_to(graph, v)?;
        if vs.len() < 2 {
            return None;
        }
        PathIncidence::from_vertices(graph, &vs).ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapItem {
    dist: f64,
    vertex: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    // Reverse order so the max-heap pops the smallest distance, then the
    // smallest vertex id.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Incremental Dijkstra search; one settle per `step`.
struct Search<'g> {
    graph: &'g Graph,
    tree: ShortestPathTree,
    heap: BinaryHeap<HeapItem>,
}

impl<'g> Search<'g> {
    fn new(graph: &'g Graph, root: usize) -> Self {
        let n = graph.n();
        let mut dist = vec![f64::INFINITY; n];
        dist[root] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(HeapItem {
            dist: 0.0,
            vertex: root,
        });
        Self {
            graph,
            tree: ShortestPathTree {
                root,
                dist,
                parent_edge: vec![None; n],
                order: Vec::new(),
                settled: vec![false; n],
            },
            heap,
        }
    }

    /// Smallest tentative distance still queued.
    fn peek(&mut self) -> Option<f64> {
        while let Some(top) = self.heap.peek() {
            if self.tree.settled[top.vertex] || top.dist > self.tree.dist[top.vertex] {
                self.heap.pop();
            } else {
                return Some(top.dist);
            }
        }
        None
    }

    fn step(&mut self) -> Option<usize> {
        self.peek()?;
        let HeapItem { vertex: u, .. } = self.heap.pop()?;
        let t = &mut self.tree;
        t.settled[u] = true;
        t.order.push(u);
        for &(v, j) in self.graph.neighbors(u) {
            if t.settled[v] {
                continue;
            }
            let nd = t.dist[u] + self.graph.edge(j).weight;
            if nd < t.dist[v] {
                t.dist[v] = nd;
                t.parent_edge[v] = Some(j);
                self.heap.push(HeapItem {
                    dist: nd,
                    vertex: v,
                });
            }
        }
        Some(u)
    }
}

/// Single-source Dijkstra. With a target, stops once it is settled; all
/// settled distances are final either way.
pub fn dijkstra(graph: &Graph, source: usize, target: Option<usize>) -> Result<ShortestPathTree> {
    graph.check_vertex(source)?;
    if let Some(t) = target {
        graph.check_vertex(t)?;
    }
    let mut search = Search::new(graph, source);
    while let Some(u) = search.step() {
        if Some(u) == target {
            break;
        }
    }
    Ok(search.tree)
}

/// Result of a bidirectional search: two settled trees and the best bridge.
#[derive(Debug, Clone, PartialEq)]
pub struct MeetingCertificate {
    pub forward: ShortestPathTree,
    pub backward: ShortestPathTree,
    pub bridge_edge: usize,
    pub distance: f64,
}

impl MeetingCertificate {
    /// The s-t path through the bridge.
    pub fn path(&self, graph: &Graph) -> PathIncidence {
        let e = graph.edge(self.bridge_edge);
        let (u, v) = if self.forward.dist[e.tail] + self.backward.dist[e.head]
            <= self.forward.dist[e.head] + self.backward.dist[e.tail]
        {
            (e.tail, e.head)
        } else {
            (e.head, e.tail)
        };
        let mut vs = self
            .forward
            .vertices_to(graph, u)
            .expect("bridge tail reached");
        let mut back = self
            .backward
            .vertices_to(graph, v)
            .expect("bridge head reached");
        back.reverse();
        vs.extend(back);
        PathIncidence::from_vertices(graph, &vs).expect("certificate path is simple")
    }

    /// `dist_fwd(u) + w + dist_bwd(v) − distance` for the bridge (u, v).
    pub fn identity_gap(&self, graph: &Graph) -> f64 {
        let e = graph.edge(self.bridge_edge);
        let a = self.forward.dist[e.tail] + e.weight + self.backward.dist[e.head];
        let b = self.forward.dist[e.head] + e.weight + self.backward.dist[e.tail];
        a.min(b) - self.distance
    }
}

/// Bidirectional Dijkstra alternating between the two frontiers.
///
/// Stops when the two queue minima sum to at least the best bridged distance
/// seen so far. Bridges are scanned against the other side's tentative labels,
/// so unsettled vertices in either tree may carry non-final distances.
pub fn bidirectional_dijkstra(graph: &Graph, s: usize, t: usize) -> Result<MeetingCertificate> {
    graph.check_vertex(s)?;
    graph.check_vertex(t)?;
    if s == t {
        return Err(Error::SameEndpoints(s));
    }
    let mut fwd = Search::new(graph, s);
    let mut bwd = Search::new(graph, t);
    let mut best = f64::INFINITY;
    let mut bridge = None;
    let mut forward_turn = true;
    loop {
        let (tf, tb) = match (fwd.peek(), bwd.peek()) {
            (Some(a), Some(b)) => (a, b),
            _ => break,
        };
        if tf + tb >= best {
            break;
        }
        let (this, other) = if forward_turn {
            (&mut fwd, &bwd)
        } else {
            (&mut bwd, &fwd)
        };
        let u = this.step().expect("peek returned a live entry");
        for &(v, j) in graph.neighbors(u) {
            if other.tree.dist[v].is_finite() {
                let cand = this.tree.dist[u] + graph.edge(j).weight + other.tree.dist[v];
                if cand < best {
                    best = cand;
                    bridge = Some(j);
                }
            }
        }
        forward_turn = !forward_turn;
    }
    let bridge_edge = bridge.expect("connected graph always yields a bridge");
    Ok(MeetingCertificate {
        forward: fwd.tree,
        backward: bwd.tree,
        bridge_edge,
        distance: best,
    })
}

/// Whether every vertex has a unique shortest path from each terminal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessReport {
    pub unique_from_s: bool,
    pub unique_from_t: bool,
    /// Vertices with more than one optimal predecessor, from s then from t.
    pub ambiguous_from_s: Vec<usize>,
    pub ambiguous_from_t: Vec<usize>,
}

impl UniquenessReport {
    pub fn holds(&self) -> bool {
        self.unique_from_s && self.unique_from_t
    }
}

const TIE_RTOL: f64 = 1e-12;

fn ambiguous_vertices(graph: &Graph, root: usize) -> Result<Vec<usize>> {
    let tree = dijkstra(graph, root, None)?;
    let mut out = Vec::new();
    for v in 0..graph.n() {
        if v == root {
            continue;
        }
        let dv = tree.dist[v];
        let tol = TIE_RTOL * dv.max(f64::MIN_POSITIVE);
        let optimal = graph
            .neighbors(v)
            .iter()
            .filter(|&&(u, j)| (tree.dist[u] + graph.edge(j).weight - dv).abs() <= tol)
            .count();
        if optimal > 1 {
            out.push(v);
        }
    }
    Ok(out)
}

/// Counts optimal predecessors under both terminals' shortest-path trees.
pub fn terminal_uniqueness_check(graph: &Graph, s: usize, t: usize) -> Result<UniquenessReport> {
    let ambiguous_from_s = ambiguous_vertices(graph, s)?;
    let ambiguous_from_t = ambiguous_vertices(graph, t)?;
    Ok(UniquenessReport {
        unique_from_s: ambiguous_from_s.is_empty(),
        unique_from_t: ambiguous_from_t.is_empty(),
        ambiguous_from_s,
        ambiguous_from_t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;

    fn nicholson() -> Graph {
        build_graph(&[
            (1, 2, 3.0),
            (1, 3, 6.0),
            (1, 4, 7.0),
            (2, 5, 4.0),
            (2, 3, 1.0),
            (3, 6, 2.0),
            (4, 6, 3.0),
            (4, 7, 4.0),
            (5, 8, 1.0),
            (6, 8, 1.0),
            (6, 9, 2.0),
            (7, 9, 5.0),
            (8, 9, 2.0),
        ])
        .unwrap()
    }

    #[test]
    fn nicholson_distance_and_path() {
        let g = nicholson();
        let tree = dijkstra(&g, 0, None).unwrap();
        assert_eq!(tree.dist[8], 8.0);
        let labels: Vec<u64> = tree
            .vertices_to(&g, 8)
            .unwrap()
            .iter()
            .map(|&v| g.label(v))
            .collect();
        assert_eq!(labels, vec![1, 2, 3, 6, 9]);
    }

    #[test]
    fn source_equals_target() {
        let g = nicholson();
        let tree = dijkstra(&g, 3, Some(3)).unwrap();
        assert_eq!(tree.dist[3], 0.0);
        assert!(tree.path_to(&g, 3).is_none());
        assert_eq!(tree.order, vec![3]);
    }

    #[test]
    fn unit_line_graph() {
        let g = Graph::new(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        assert_eq!(dijkstra(&g, 0, Some(3)).unwrap().dist[3], 3.0);
    }

    #[test]
    fn bidirectional_matches_on_nicholson_and_single_edge() {
        let g = nicholson();
        let cert = bidirectional_dijkstra(&g, 0, 8).unwrap();
        assert_eq!(cert.distance, 8.0);
        assert_eq!(cert.identity_gap(&g), 0.0);
        assert_eq!(cert.path(&g).length, 8.0);

        let g = build_graph(&[(1, 2, 5.0)]).unwrap();
        let cert = bidirectional_dijkstra(&g, 0, 1).unwrap();
        assert_eq!(cert.distance, 5.0);
        assert_eq!(cert.bridge_edge, 0);
        assert_eq!(cert.forward.order, vec![0]);
        assert_eq!(cert.backward.dist[1], 0.0);
        assert!(cert.backward.order.len() <= 1);
        assert_eq!(
            bidirectional_dijkstra(&g, 1, 1),
            Err(Error::SameEndpoints(1))
        );
    }

    #[test]
    fn uniqueness_on_square_and_nicholson() {
        let sq = Graph::new(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap();
        let rep = terminal_uniqueness_check(&sq, 0, 2).unwrap();
        assert!(!rep.holds());
        assert_eq!(rep.ambiguous_from_s, vec![2]);

        let rep = terminal_uniqueness_check(&nicholson(), 0, 8).unwrap();
        assert!(rep.holds(), "{rep:?}");
    }
}
