//! Runtime checks that a graph-lasso path grows two shortest-path trees and
//! stops when they meet.

use serde::Serialize;

use super::trees::{Side, TwinTrees};
use super::{extract_path, LassoPath, DEFAULT_PATH_THRESHOLD};
use crate::error::{Error, Result};
use crate::graph::{component_count, Graph};
use crate::oracle::{dijkstra, terminal_uniqueness_check, ShortestPathTree, UniquenessReport};

const DIST_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", content = "reason", rename_all = "lowercase")]
pub enum EquivalenceStatus {
    Passed,
    /// The uniqueness precondition does not hold; nothing was asserted.
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub status: EquivalenceStatus,
    pub uniqueness: UniquenessReport,
    pub breakpoints_checked: usize,
    pub checks_run: usize,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.status == EquivalenceStatus::Passed
    }
}

fn violation(check: &str, breakpoint: usize, detail: String) -> Error {
    Error::PropertyViolation {
        check: check.into(),
        breakpoint,
        detail,
    }
}

fn same_distance(a: f64, b: f64) -> bool {
    (a - b).abs() <= DIST_RTOL * a.abs().max(b.abs()).max(1.0)
}

fn check_tree_distances(
    graph: &Graph,
    twin: &TwinTrees,
    oracles: [&ShortestPathTree; 2],
    k: usize,
) -> Result<()> {
    for (tree, oracle) in [&twin.source, &twin.target].into_iter().zip(oracles) {
        for &v in &tree.vertices {
            if !same_distance(tree.dist[v], oracle.dist[v]) {
                return Err(violation(
                    "tree-distances",
                    k,
                    format!(
                        "vertex {} at tree distance {} from root {}, shortest is {}",
                        graph.label(v),
                        tree.dist[v],
                        graph.label(tree.root),
                        oracle.dist[v]
                    ),
                ));
            }
        }
    }
    Ok(())
}

/// Checks every breakpoint of a graph-lasso path against Dijkstra.
///
/// Returns a skipped report when some vertex has two shortest paths from a
/// terminal, and a `PropertyViolation` naming the first failed check
/// otherwise.
pub fn verify_dijkstra_equivalence(
    path: &LassoPath,
    graph: &Graph,
    s: usize,
    t: usize,
) -> Result<EquivalenceReport> {
    let uniqueness = terminal_uniqueness_check(graph, s, t)?;
    if !uniqueness.holds() {
        return Ok(EquivalenceReport {
            status: EquivalenceStatus::Skipped(
                "shortest paths from the terminals are not unique; checks skipped".into(),
            ),
            uniqueness,
            breakpoints_checked: 0,
            checks_run: 0,
        });
    }
    let from_s = dijkstra(graph, s, None)?;
    let from_t = dijkstra(graph, t, None)?;
    let mut checks = 0;
    let mut bridged_at = None;

    for (idx, seg) in path.segments.iter().enumerate() {
        let k = idx + 1;
        let active = &seg.state.indices;
        let touched_components = component_count(
            graph.n(),
            active
                .iter()
                .map(|&j| (graph.edge(j).tail, graph.edge(j).head)),
        );
        checks += 1;
        if active.len() + touched_components != graph.n() {
            return Err(violation(
                "no-cycle",
                k,
                format!("active set {active:?} has a cycle"),
            ));
        }

        if let Some(b) = bridged_at {
            checks += 1;
            if !seg.event.is_terminal() || idx + 1 != path.segments.len() {
                return Err(violation(
                    "terminates-on-connection",
                    k,
                    format!("path continues after the trees connected at breakpoint {b}"),
                ));
            }
            continue;
        }

        checks += 1;
        let twin = TwinTrees::from_active(graph, s, t, active)
            .map_err(|e| violation("disjoint-trees", k, e.to_string()))?;
        checks += 1;
        check_tree_distances(graph, &twin, [&from_s, &from_t], k)?;

        let ev = &seg.event;
        checks += 1;
        if !ev.crosses.is_empty() {
            return Err(violation(
                "no-crossing",
                k,
                format!("edges {:?} left the active set", ev.crosses),
            ));
        }
        if ev.is_terminal() {
            return Err(violation(
                "terminates-on-connection",
                k,
                "path terminated before the trees connected".into(),
            ));
        }
        for &(j, _) in &ev.joins {
            checks += 1;
            if twin.is_bridge(graph, j) {
                bridged_at = Some(k);
                continue;
            }
            let e = graph.edge(j);
            let (inside, outside) = match (twin.side(e.tail), twin.side(e.head)) {
                (Side::Unclaimed, Side::Unclaimed) => {
                    return Err(violation(
                        "min-distance-join",
                        k,
                        format!("edge {j} joined away from both trees"),
                    ))
                }
                (a, Side::Unclaimed) => (a, e.head),
                (Side::Unclaimed, b) => (b, e.tail),
                _ => {
                    return Err(violation(
                        "no-cycle",
                        k,
                        format!("edge {j} joined inside one tree"),
                    ))
                }
            };
            let oracle = if inside == Side::Source {
                &from_s
            } else {
                &from_t
            };
            let best = twin
                .unclaimed()
                .map(|v| oracle.dist[v])
                .fold(f64::INFINITY, f64::min);
            if !same_distance(oracle.dist[outside], best) {
                return Err(violation(
                    "min-distance-join",
                    k,
                    format!(
                        "vertex {} joined at distance {}, nearest unclaimed vertex is at {best}",
                        graph.label(outside),
                        oracle.dist[outside]
                    ),
                ));
            }
        }
    }

    checks += 1;
    if bridged_at.is_none() {
        return Err(violation(
            "terminates-on-connection",
            path.segments.len(),
            "trees never connected".into(),
        ));
    }
    let last = path.segments.len();
    checks += 1;
    if !same_distance(path.distance, from_s.dist[t]) {
        return Err(violation(
            "terminal-distance",
            last,
            format!(
                "terminal distance {} vs shortest {}",
                path.distance, from_s.dist[t]
            ),
        ));
    }
    checks += 1;
    let recovered = extract_path(&path.x0(graph), graph, s, t, DEFAULT_PATH_THRESHOLD)
        .map_err(|e| violation("terminal-path", last, e.to_string()))?;
    let oracle_path = from_s
        .path_to(graph, t)
        .expect("t reached in a connected graph");
    if recovered.support() != oracle_path.support() {
        return Err(violation(
            "terminal-path",
            last,
            format!(
                "recovered {:?}, shortest {:?}",
                recovered.support(),
                oracle_path.support()
            ),
        ));
    }
    Ok(EquivalenceReport {
        status: EquivalenceStatus::Passed,
        uniqueness,
        breakpoints_checked: path.breakpoints.len(),
        checks_run: checks,
    })
}
