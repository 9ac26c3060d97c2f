//! Closed-form event times when the active set is a pair of trees rooted at
//! the two terminals.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use crate::error::{Error, Result};
use crate::graph::{Graph, TreeView};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Source,
    Target,
    Unclaimed,
}

/// Active set viewed as a source tree, a target tree and the unclaimed rest.
#[derive(Debug, Clone, PartialEq)]
pub struct TwinTrees {
    pub source: TreeView,
    pub target: TreeView,
    side: Vec<Side>,
}

/// Edges of the active component containing `root`, or an error if it has a
/// cycle.
fn component_edges(graph: &Graph, root: usize, in_active: &[bool]) -> Result<Vec<usize>> {
    let mut seen = vec![false; graph.n()];
    let mut used = vec![false; graph.m()];
    let mut edges = Vec::new();
    seen[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &(v, j) in graph.neighbors(u) {
            if !in_active[j] || used[j] {
                continue;
            }
            if seen[v] {
                return Err(Error::InconsistentTrees(format!(
                    "edge {j} closes a cycle in the tree of vertex {root}"
                )));
            }
            used[j] = true;
            seen[v] = true;
            edges.push(j);
            queue.push_back(v);
        }
    }
    Ok(edges)
}

impl TwinTrees {
    /// Splits `active` into trees at `s` and `t`. Fails if the active edges
    /// contain a cycle, connect the terminals, or leave a component touching
    /// neither.
    pub fn from_active(graph: &Graph, s: usize, t: usize, active: &[usize]) -> Result<Self> {
        let mut in_active = vec![false; graph.m()];
        for &j in active {
            in_active[j] = true;
        }
        let es = component_edges(graph, s, &in_active)?;
        let source = TreeView::from_edges(graph, s, &es)
            .map_err(|e| Error::InconsistentTrees(e.to_string()))?;
        if source.contains(t) {
            return Err(Error::InconsistentTrees(
                "terminal trees are connected".into(),
            ));
        }
        let et = component_edges(graph, t, &in_active)?;
        let target = TreeView::from_edges(graph, t, &et)
            .map_err(|e| Error::InconsistentTrees(e.to_string()))?;
        if es.len() + et.len() != active.len() {
            return Err(Error::InconsistentTrees(format!(
                "{} active edges touch neither terminal",
                active.len() - es.len() - et.len()
            )));
        }
        let side = (0..graph.n())
            .map(|v| {
                if source.contains(v) {
                    Side::Source
                } else if target.contains(v) {
                    Side::Target
                } else {
                    Side::Unclaimed
                }
            })
            .collect();
        Ok(Self {
            source,
            target,
            side,
        })
    }

    pub fn side(&self, v: usize) -> Side {
        self.side[v]
    }

    pub fn tree(&self, side: Side) -> Option<&TreeView> {
        match side {
            Side::Source => Some(&self.source),
            Side::Target => Some(&self.target),
            Side::Unclaimed => None,
        }
    }

    pub fn unclaimed(&self) -> impl Iterator<Item = usize> + '_ {
        self.side
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == Side::Unclaimed)
            .map(|(v, _)| v)
    }

    /// Whether `edge` joins the two trees.
    pub fn is_bridge(&self, graph: &Graph, edge: usize) -> bool {
        let e = graph.edge(edge);
        matches!(
            (self.side[e.tail], self.side[e.head]),
            (Side::Source, Side::Target) | (Side::Target, Side::Source)
        )
    }
}

/// Joining time of an inactive edge from tree sizes and root distances alone.
pub fn joining_time_tree(twin: &TwinTrees, graph: &Graph, edge: usize) -> Result<f64> {
    let e = graph.edge(edge);
    let w = e.weight;
    let (su, sv) = (twin.side(e.tail), twin.side(e.head));
    if su == sv {
        return Ok(0.0);
    }
    let tree_to_unclaimed = |tree: &TreeView, inside: usize| {
        let size = tree.size() as f64;
        let reach = tree.dist[inside] + w;
        1.0 / (size * reach - tree.distance_sum())
    };
    Ok(match (su, sv) {
        (Side::Unclaimed, other) => tree_to_unclaimed(twin.tree(other).unwrap(), e.head),
        (other, Side::Unclaimed) => tree_to_unclaimed(twin.tree(other).unwrap(), e.tail),
        _ => {
            let (a, b) = if su == Side::Source {
                (e.tail, e.head)
            } else {
                (e.head, e.tail)
            };
            let (ts, tt) = (&twin.source, &twin.target);
            let (ns, nt) = (ts.size() as f64, tt.size() as f64);
            let through = ts.dist[a] + w + tt.dist[b];
            let delta = ns * nt * through - nt * ts.distance_sum() - ns * tt.distance_sum();
            (ns + nt) / delta
        }
    })
}

/// The ratio `a_j / b_j` for an active tree edge, from the subtree below it.
pub fn crossing_ratio_tree(twin: &TwinTrees, graph: &Graph, edge: usize) -> Result<f64> {
    let tree = [&twin.source, &twin.target]
        .into_iter()
        .find(|t| t.child_of(graph, edge).is_some())
        .ok_or(Error::EdgeNotActive(edge))?;
    let below = tree.subtree_below(graph, edge);
    let below_sum: f64 = below.iter().map(|&v| tree.dist[v]).sum();
    let scale = tree.size() as f64 / below.len() as f64;
    Ok(1.0 / (scale * below_sum - tree.distance_sum()))
}

/// Heap key ordered by `f64::total_cmp`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Last breakpoint of the graph path, the λ at which a bridge edge joins the
/// two terminal trees, without running the homotopy.
///
/// While both active components are trees, each tree's next vertex is its
/// nearest unclaimed neighbour, with joining time `1 / (|T|·d − Σ_T d)`. So
/// both trees grow in Dijkstra order and the events are replayed in order of
/// decreasing λ until the best bridge fires first. Costs O(m log n). Assumes
/// the unique-geodesic regime, where the homotopy only ever adds edges.
pub fn final_breakpoint(graph: &Graph, s: usize, t: usize) -> Result<f64> {
    graph.check_vertex(s)?;
    graph.check_vertex(t)?;
    if s == t {
        return Err(Error::SameEndpoints(s));
    }
    let n = graph.n();
    let roots = [s, t];
    let mut owner = vec![None::<usize>; n];
    let mut dist = [vec![f64::INFINITY; n], vec![f64::INFINITY; n]];
    let mut heaps = [BinaryHeap::new(), BinaryHeap::new()];
    let mut size = [0.0f64; 2];
    let mut dist_sum = [0.0f64; 2];
    // Shortest root-to-root length through an edge joining the trees.
    let mut through = f64::INFINITY;
    for k in 0..2 {
        dist[k][roots[k]] = 0.0;
        heaps[k].push(Reverse((Key(0.0), roots[k])));
    }
    loop {
        let mut next: [Option<(f64, usize)>; 2] = [None, None];
        for k in 0..2 {
            while let Some(&Reverse((Key(d), v))) = heaps[k].peek() {
                if owner[v].is_some() || d > dist[k][v] {
                    heaps[k].pop();
                    continue;
                }
                let time = if size[k] == 0.0 {
                    f64::INFINITY
                } else {
                    1.0 / (size[k] * d - dist_sum[k])
                };
                next[k] = Some((time, v));
                break;
            }
        }
        let bridge = if through.is_finite() {
            let denom = size[0] * size[1] * through - size[1] * dist_sum[0] - size[0] * dist_sum[1];
            (size[0] + size[1]) / denom
        } else {
            f64::NEG_INFINITY
        };
        let k = match next {
            [Some(a), Some(b)] => usize::from(b.0 > a.0),
            [Some(_), None] => 0,
            [None, Some(_)] => 1,
            [None, None] => return Ok(bridge),
        };
        let (time, v) = next[k].unwrap();
        if bridge >= time {
            return Ok(bridge);
        }
        heaps[k].pop();
        owner[v] = Some(k);
        let d = dist[k][v];
        size[k] += 1.0;
        dist_sum[k] += d;
        for &(u, j) in graph.neighbors(v) {
            let w = graph.edge(j).weight;
            match owner[u] {
                None if d + w < dist[k][u] => {
                    dist[k][u] = d + w;
                    heaps[k].push(Reverse((Key(d + w), u)));
                }
                Some(other) if other != k => through = through.min(d + w + dist[other][u]),
                _ => {}
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;
    use crate::lars::tests::nicholson;

    #[test]
    fn singleton_tree_edge() {
        let g = build_graph(&[(1, 2, 4.0), (2, 3, 1.0)]).unwrap();
        let twin = TwinTrees::from_active(&g, 0, 2, &[]).unwrap();
        assert_eq!(joining_time_tree(&twin, &g, 0).unwrap(), 0.25);
    }

    #[test]
    fn nicholson_bridge_is_seven_over_47() {
        let g = nicholson();
        // Source tree {1,2,3}: (1,2),(2,3); target tree {9,6,8,5}: (6,9),(8,9),(5,8).
        let twin = TwinTrees::from_active(&g, 0, 8, &[10, 12, 0, 4, 8]).unwrap();
        assert_eq!(twin.source.distance_sum(), 7.0);
        assert_eq!(twin.target.distance_sum(), 7.0);
        let t = joining_time_tree(&twin, &g, 5).unwrap();
        assert!((t - 7.0 / 47.0).abs() < 1e-15);
        assert!(twin.is_bridge(&g, 5));
        // Inside one tree.
        assert_eq!(joining_time_tree(&twin, &g, 9).unwrap(), 0.0);
    }

    #[test]
    fn crossing_ratio_single_edge_tree() {
        let g = build_graph(&[(1, 2, 2.0), (2, 3, 1.0)]).unwrap();
        let twin = TwinTrees::from_active(&g, 0, 2, &[0]).unwrap();
        // |T| = 2, R = {leaf} with l = 2, Σ_T l = 2: (2·2 − 2)⁻¹.
        assert_eq!(crossing_ratio_tree(&twin, &g, 0).unwrap(), 0.5);
        assert_eq!(
            crossing_ratio_tree(&twin, &g, 1),
            Err(Error::EdgeNotActive(1))
        );
    }

    #[test]
    fn final_breakpoint_of_nicholson_is_the_bridge_time() {
        let g = nicholson();
        assert!((final_breakpoint(&g, 0, 8).unwrap() - 7.0 / 47.0).abs() < 1e-15);
        // Single edge: the bridge is the first and only event.
        let single = build_graph(&[(1, 2, 4.0)]).unwrap();
        let path = crate::lars::lars_solve_graph(&single, 0, 1, &Default::default()).unwrap();
        assert_eq!(path.breakpoints, vec![0.5]);
        assert_eq!(final_breakpoint(&single, 0, 1).unwrap(), 0.5);
        assert_eq!(
            final_breakpoint(&single, 1, 1),
            Err(Error::SameEndpoints(1))
        );
    }

    #[test]
    fn inconsistent_active_sets() {
        let g = nicholson();
        // Bridged trees.
        assert!(matches!(
            TwinTrees::from_active(&g, 0, 8, &[0, 4, 5, 10]),
            Err(Error::InconsistentTrees(_))
        ));
        // Floating edge (4,7).
        assert!(matches!(
            TwinTrees::from_active(&g, 0, 8, &[7]),
            Err(Error::InconsistentTrees(_))
        ));
        // Cycle 1-2-3.
        assert!(matches!(
            TwinTrees::from_active(&g, 0, 8, &[0, 1, 4]),
            Err(Error::InconsistentTrees(_))
        ));
    }
}
