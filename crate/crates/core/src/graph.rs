//! Undirected weighted graphs, incidence matrices, path incidence vectors and
//! rooted tree views.
//!
//! Vertices are dense `0..n` indices; external integer labels are kept in a
//! side table. Each edge carries a fixed orientation (tail = first-listed
//! endpoint) used by the incidence matrix.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, SparseMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub weight: f64,
}

impl Edge {
    /// The endpoint opposite to `v`.
    pub fn other(&self, v: usize) -> usize {
        if v == self.tail {
            self.head
        } else {
            self.tail
        }
    }
}

/// Connected undirected graph with positive weights and no parallel edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, usize)>>,
    labels: Vec<u64>,
}

/// Builds a graph from labelled `(u, v, w)` triples.
///
/// Vertex indices follow ascending label order; edge order and orientation
/// follow the input.
pub fn build_graph(edge_list: &[(u64, u64, f64)]) -> Result<Graph> {
    let mut labels: Vec<u64> = edge_list.iter().flat_map(|&(u, v, _)| [u, v]).collect();
    labels.sort_unstable();
    labels.dedup();
    let index: BTreeMap<u64, usize> = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let edges: Vec<(usize, usize, f64)> = edge_list
        .iter()
        .map(|&(u, v, w)| (index[&u], index[&v], w))
        .collect();
    Graph::with_labels(labels, &edges)
}

impl Graph {
    /// Builds a graph over vertices `0..n` whose labels equal their indices.
    pub fn new(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        Self::with_labels((0..n as u64).collect(), edges)
    }

    fn with_labels(labels: Vec<u64>, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let n = labels.len();
        if edges.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut seen = HashSet::with_capacity(edges.len());
        let mut out = Vec::with_capacity(edges.len());
        let mut adjacency = vec![Vec::new(); n];
        for (j, &(u, v, w)) in edges.iter().enumerate() {
            for x in [u, v] {
                if x >= n {
                    return Err(Error::VertexOutOfRange { vertex: x, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(labels[u]));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::NonPositiveWeight {
                    u: labels[u],
                    v: labels[v],
                    weight: w,
                });
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::DuplicateEdge {
                    u: labels[u],
                    v: labels[v],
                });
            }
            out.push(Edge {
                tail: u,
                head: v,
                weight: w,
            });
            adjacency[u].push((v, j));
            adjacency[v].push((u, j));
        }
        let comps = component_count(n, out.iter().map(|e| (e.tail, e.head)));
        if comps != 1 {
            return Err(Error::DisconnectedGraph { components: comps });
        }
        Ok(Self {
            edges: out,
            adjacency,
            labels,
        })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, j: usize) -> &Edge {
        &self.edges[j]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn weights(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.weight).collect()
    }

    /// `(neighbor, edge id)` pairs incident to `v`, in edge order.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn label(&self, v: usize) -> u64 {
        self.labels[v]
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    pub fn vertex_of_label(&self, label: u64) -> Result<usize> {
        self.labels
            .binary_search(&label)
            .map_err(|_| Error::UnknownLabel(label))
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.n() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange {
                vertex: v,
                n: self.n(),
            })
        }
    }

    /// Edge id joining `u` and `v`, if any.
    pub fn find_edge(&self, u: usize, v: usize) -> Option<usize> {
        self.adjacency[u]
            .iter()
            .find(|&&(w, _)| w == v)
            .map(|&(_, j)| j)
    }

    /// Same topology and orientation with new weights.
    pub fn with_weights(&self, weights: &[f64]) -> Result<Self> {
        assert_eq!(
            weights.len(),
            self.m(),
            "with_weights: wrong number of weights"
        );
        let edges: Vec<(usize, usize, f64)> = self
            .edges
            .iter()
            .zip(weights)
            .map(|(e, &w)| (e.tail, e.head, w))
            .collect();
        Self::with_labels(self.labels.clone(), &edges)
    }

    /// Labelled `(u, v, w)` triples in edge order.
    pub fn edge_list(&self) -> Vec<(u64, u64, f64)> {
        self.edges
            .iter()
            .map(|e| (self.labels[e.tail], self.labels[e.head], e.weight))
            .collect()
    }

    /// Canonical edge-list text: `u<TAB>v<TAB>w` per line.
    pub fn to_edge_list_tsv(&self) -> String {
        let mut s = String::new();
        for (u, v, w) in self.edge_list() {
            writeln!(s, "{u}\t{v}\t{w}").unwrap();
        }
        s
    }
}

/// Number of connected components of the graph on `0..n` with the given edges.
pub fn component_count(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> usize {
    let labels = component_labels(n, edges);
    labels.iter().copied().max().map_or(0, |c| c + 1)
}

/// Component id per vertex, numbered in order of smallest member.
pub fn component_labels(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (u, v) in edges {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut ids = vec![usize::MAX; n];
    let mut next = 0;
    let mut out = vec![0; n];
    for v in 0..n {
        let r = find(&mut parent, v);
        if ids[r] == usize::MAX {
            ids[r] = next;
            next += 1;
        }
        out[v] = ids[r];
    }
    out
}

/// Parses edge-list text: `u<TAB>v<TAB>w` per line, `#` starts a comment.
pub fn parse_edge_list(text: &str) -> Result<Vec<(u64, u64, f64)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        let parse_u = |s: &str| {
            s.parse::<u64>().map_err(|e| Error::Parse {
                line: i + 1,
                msg: format!("bad vertex id {s:?}: {e}"),
            })
        };
        let w = fields[2].parse::<f64>().map_err(|e| Error::Parse {
            line: i + 1,
            msg: format!("bad weight {:?}: {e}", fields[2]),
        })?;
        out.push((parse_u(fields[0])?, parse_u(fields[1])?, w));
    }
    Ok(out)
}

/// Parses a coordinates file: `v<TAB>x<TAB>y` per line.
pub fn parse_coordinates(text: &str) -> Result<Vec<(u64, f64, f64)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let bad = |msg: String| Error::Parse { line: i + 1, msg };
        if f.len() != 3 {
            return Err(bad(format!("expected 3 fields, found {}", f.len())));
        }
        let v = f[0].parse::<u64>().map_err(|e| bad(e.to_string()))?;
        let x = f[1].parse::<f64>().map_err(|e| bad(e.to_string()))?;
        let y = f[2].parse::<f64>().map_err(|e| bad(e.to_string()))?;
        out.push((v, x, y));
    }
    Ok(out)
}

/// Signed vertex-edge incidence matrix `D` (n×m): `+1` at the tail, `−1` at
/// the head of each edge.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceMatrix(SparseMatrix);

impl IncidenceMatrix {
    pub fn matrix(&self) -> &SparseMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> SparseMatrix {
        self.0
    }
}

pub fn incidence(graph: &Graph) -> IncidenceMatrix {
    let trips: Vec<(usize, usize, f64)> = graph
        .edges()
        .iter()
        .enumerate()
        .flat_map(|(j, e)| [(e.tail, j, 1.0), (e.head, j, -1.0)])
        .collect();
    IncidenceMatrix(
        SparseMatrix::from_triplets(graph.n(), graph.m(), &trips)
            .expect("edge endpoints are valid vertices"),
    )
}

/// Weighted incidence `Q = D W⁻¹`.
pub fn weighted_incidence(graph: &Graph) -> SparseMatrix {
    let inv: Vec<f64> = graph.edges().iter().map(|e| 1.0 / e.weight).collect();
    incidence(graph).0.scale_columns(&inv)
}

/// `+1` at the source, `−1` at the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndicatorVector {
    pub n: usize,
    pub s: usize,
    pub t: usize,
}

impl IndicatorVector {
    pub fn to_dense(&self) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        y[self.s] = 1.0;
        y[self.t] = -1.0;
        y
    }
}

pub fn indicator(graph: &Graph, s: usize, t: usize) -> Result<IndicatorVector> {
    graph.check_vertex(s)?;
    graph.check_vertex(t)?;
    if s == t {
        return Err(Error::SameEndpoints(s));
    }
    Ok(IndicatorVector { n: graph.n(), s, t })
}

/// Signed incidence vector of a simple s-t path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathIncidence {
    pub s: usize,
    pub t: usize,
    /// `(edge id, ±1)` in traversal order from `s` to `t`.
    pub steps: Vec<(usize, i8)>,
    /// Visited vertices `s, …, t`.
    pub vertices: Vec<usize>,
    pub length: f64,
}

impl PathIncidence {
    /// Builds the incidence vector of a vertex sequence `s = v0, v1, …, vk = t`.
    pub fn from_vertices(graph: &Graph, vertices: &[usize]) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::NotAPath("fewer than two vertices".into()));
        }
        let mut steps = Vec::with_capacity(vertices.len() - 1);
        let mut length = 0.0;
        let mut seen = HashSet::new();
        for w in vertices.windows(2) {
            let j = graph
                .find_edge(w[0], w[1])
                .ok_or_else(|| Error::NotAPath(format!("no edge between {} and {}", w[0], w[1])))?;
            let e = graph.edge(j);
            steps.push((j, if e.tail == w[0] { 1 } else { -1 }));
            length += e.weight;
        }
        for &v in vertices {
            if !seen.insert(v) {
                return Err(Error::NotAPath(format!("vertex {v} repeated")));
            }
        }
        Ok(Self {
            s: vertices[0],
            t: *vertices.last().unwrap(),
            steps,
            vertices: vertices.to_vec(),
            length,
        })
    }

    pub fn to_dense(&self, m: usize) -> Vec<f64> {
        let mut x = vec![0.0; m];
        for &(j, sign) in &self.steps {
            x[j] = sign as f64;
        }
        x
    }

    /// Sorted edge ids of the path.
    pub fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.steps.iter().map(|&(j, _)| j).collect();
        s.sort_unstable();
        s
    }

    /// `‖W x‖₁`, recomputed from the graph.
    pub fn weighted_l1(&self, graph: &Graph) -> f64 {
        self.steps.iter().map(|&(j, _)| graph.edge(j).weight).sum()
    }

    /// Canonical text form: one `u<TAB>v<TAB>w` line per edge, sorted by edge id.
    pub fn to_tsv(&self, graph: &Graph) -> String {
        let mut out = String::new();
        for j in self.support() {
            let e = graph.edge(j);
            writeln!(
                out,
                "{}\t{}\t{}",
                graph.label(e.tail),
                graph.label(e.head),
                e.weight
            )
            .unwrap();
        }
        out
    }
}

/// Validates that a signed edge set is exactly one simple s-t path.
///
/// A sign of `0` skips the orientation check for that edge; otherwise the sign
/// must agree with traversal from `s` to `t`.
pub fn path_from_support(
    graph: &Graph,
    support: &[(usize, i8)],
    s: usize,
    t: usize,
) -> Result<PathIncidence> {
    graph.check_vertex(s)?;
    graph.check_vertex(t)?;
    if s == t {
        return Err(Error::SameEndpoints(s));
    }
    if support.is_empty() {
        return Err(Error::NotAPath("empty support".into()));
    }
    let mut incident: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut signs = BTreeMap::new();
    for &(j, sign) in support {
        if j >= graph.m() {
            return Err(Error::NotAPath(format!("edge {j} does not exist")));
        }
        if signs.insert(j, sign).is_some() {
            return Err(Error::NotAPath(format!("edge {j} listed twice")));
        }
        let e = graph.edge(j);
        incident.entry(e.tail).or_default().push(j);
        incident.entry(e.head).or_default().push(j);
    }
    for (&v, es) in &incident {
        let want = if v == s || v == t { 1 } else { 2 };
        if es.len() != want {
            return Err(Error::NotAPath(format!(
                "vertex {v} has support degree {} (expected {want})",
                es.len()
            )));
        }
    }
    if !incident.contains_key(&s) || !incident.contains_key(&t) {
        return Err(Error::NotAPath(
            "support does not touch both endpoints".into(),
        ));
    }
    // Walk from s; degree constraints make the walk deterministic.
    let mut vertices = vec![s];
    let mut prev_edge = usize::MAX;
    let mut v = s;
    while v != t {
        let next_edge = *incident[&v]
            .iter()
            .find(|&&j| j != prev_edge)
            .ok_or_else(|| Error::NotAPath("walk stalled".into()))?;
        v = graph.edge(next_edge).other(v);
        vertices.push(v);
        prev_edge = next_edge;
        if vertices.len() > support.len() + 1 {
            return Err(Error::NotAPath("walk does not terminate".into()));
        }
    }
    if vertices.len() != support.len() + 1 {
        return Err(Error::NotAPath(format!(
            "{} edges are disconnected from the s-t walk",
            support.len() + 1 - vertices.len()
        )));
    }
    let path = PathIncidence::from_vertices(graph, &vertices)?;
    for &(j, sign) in &path.steps {
        let given = signs[&j];
        if given != 0 && given != sign {
            return Err(Error::NotAPath(format!("edge {j} has inconsistent sign")));
        }
    }
    Ok(path)
}

/// Multiplies each weight by `1 + u_j`, `u_j ~ U(0, δ)` from a seeded RNG.
pub fn perturb_weights(graph: &Graph, magnitude: f64, seed: u64) -> Result<Graph> {
    if !(magnitude > 0.0) || !magnitude.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "perturbation magnitude must be positive, got {magnitude}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = graph
        .edges()
        .iter()
        .map(|e| {
            // Open interval: resample the measure-zero endpoint.
            let mut u = 0.0;
            while u == 0.0 {
                u = rng.gen::<f64>() * magnitude;
            }
            e.weight * (1.0 + u)
        })
        .collect();
    graph.with_weights(&weights)
}

/// A rooted tree embedded in a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeView {
    pub root: usize,
    /// Members in breadth-first order, root first.
    pub vertices: Vec<usize>,
    /// Member edges, in the order they were discovered.
    pub edges: Vec<usize>,
    /// Edge to the parent, indexed by graph vertex (`None` for the root and
    /// for non-members).
    pub parent_edge: Vec<Option<usize>>,
    /// Root distance along tree edges, `+∞` for non-members.
    pub dist: Vec<f64>,
    member: Vec<bool>,
}

impl TreeView {
    /// Builds the tree spanned by `edges` that contains `root`. Every listed
    /// edge must be reachable from the root and no cycle may form.
    pub fn from_edges(graph: &Graph, root: usize, edges: &[usize]) -> Result<Self> {
        graph.check_vertex(root)?;
        let n = graph.n();
        let mut edge_set = vec![false; graph.m()];
        for &j in edges {
            if j >= graph.m() {
                return Err(Error::NotATree(format!("edge {j} does not exist")));
            }
            if std::mem::replace(&mut edge_set[j], true) {
                return Err(Error::NotATree(format!("edge {j} listed twice")));
            }
        }
        let mut member = vec![false; n];
        let mut parent_edge = vec![None; n];
        let mut dist = vec![f64::INFINITY; n];
        let mut order = vec![root];
        let mut tree_edges = Vec::with_capacity(edges.len());
        member[root] = true;
        dist[root] = 0.0;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &(v, j) in graph.neighbors(u) {
                if !edge_set[j] || parent_edge[u] == Some(j) {
                    continue;
                }
                if member[v] {
                    return Err(Error::NotATree(format!("edge {j} closes a cycle")));
                }
                member[v] = true;
                parent_edge[v] = Some(j);
                dist[v] = dist[u] + graph.edge(j).weight;
                tree_edges.push(j);
                order.push(v);
                queue.push_back(v);
            }
        }
        if tree_edges.len() != edges.len() {
            return Err(Error::NotATree(format!(
                "{} edges not connected to root {root}",
                edges.len() - tree_edges.len()
            )));
        }
        Ok(Self {
            root,
            vertices: order,
            edges: tree_edges,
            parent_edge,
            dist,
            member,
        })
    }

    pub fn contains(&self, v: usize) -> bool {
        self.member[v]
    }

    pub fn size(&self) -> usize {
        self.vertices.len()
    }

    /// Sum of root distances over members.
    pub fn distance_sum(&self) -> f64 {
        self.vertices.iter().map(|&v| self.dist[v]).sum()
    }

    /// The endpoint of a member edge farther from the root.
    pub fn child_of(&self, graph: &Graph, edge: usize) -> Option<usize> {
        let e = graph.edge(edge);
        [e.tail, e.head]
            .into_iter()
            .find(|&v| self.member[v] && self.parent_edge[v] == Some(edge))
    }

    /// Members whose root path uses `edge` (the subtree below it).
    pub fn subtree_below(&self, graph: &Graph, edge: usize) -> Vec<usize> {
        let Some(child) = self.child_of(graph, edge) else {
            return Vec::new();
        };
        let mut below = vec![false; self.member.len()];
        below[child] = true;
        let mut out = vec![child];
        // BFS order lists parents before children.
        for &v in &self.vertices {
            if let Some(pe) = self.parent_edge[v] {
                let p = graph.edge(pe).other(v);
                if below[p] && !below[v] {
                    below[v] = true;
                    out.push(v);
                }
            }
        }
        out
    }

    /// Vertex sequence from `v` up to the root.
    pub fn path_to_root(&self, graph: &Graph, mut v: usize) -> Vec<usize> {
        let mut out = vec![v];
        while let Some(j) = self.parent_edge[v] {
            v = graph.edge(j).other(v);
            out.push(v);
        }
        out
    }
}

/// Pseudoinverse of a tree's incidence matrix via its path matrix.
///
/// Vertices are relabelled so the root comes first, the closed form
/// `[−(1/n) P 1, P J]` with `J = I − (1/n) 1 1ᵀ` is evaluated, and the result
/// is mapped back. Rows follow ascending edge id and columns ascending vertex
/// id of the tree's members, matching the submatrix of `D` on the tree.
pub fn tree_pseudoinverse(graph: &Graph, tree: &TreeView) -> Result<DenseMatrix> {
    let n = tree.size();
    if tree.edges.len() + 1 != n {
        return Err(Error::NotATree(format!(
            "{} vertices but {} edges",
            n,
            tree.edges.len()
        )));
    }
    let mut edges_sorted = tree.edges.clone();
    edges_sorted.sort_unstable();
    let mut verts_sorted = tree.vertices.clone();
    verts_sorted.sort_unstable();
    let row_of = |j: usize| edges_sorted.binary_search(&j).unwrap();
    let col_of = |v: usize| verts_sorted.binary_search(&v).unwrap();

    // Relabelled vertex order: root first, then the others ascending.
    let relabel: Vec<usize> = std::iter::once(tree.root)
        .chain(verts_sorted.iter().copied().filter(|&v| v != tree.root))
        .collect();

    // P[e, k]: incidence of the path from relabel[k + 1] to the root.
    let nn = n as f64;
    let mut p = DenseMatrix::zeros(n - 1, n - 1);
    for (k, &v) in relabel.iter().enumerate().skip(1) {
        let mut u = v;
        while let Some(j) = tree.parent_edge[u] {
            let e = graph.edge(j);
            p[(row_of(j), k - 1)] = if e.tail == u { 1.0 } else { -1.0 };
            u = e.other(u);
        }
    }
    let mut out = DenseMatrix::zeros(n - 1, n);
    for r in 0..n - 1 {
        let row_sum: f64 = (0..n - 1).map(|c| p[(r, c)]).sum();
        out[(r, col_of(relabel[0]))] = -row_sum / nn;
        for (k, &v) in relabel.iter().enumerate().skip(1) {
            // (P J)[r, k-1] = P[r, k-1] − row_sum / n
            out[(r, col_of(v))] = p[(r, k - 1)] - row_sum / nn;
        }
    }
    Ok(out)
}

/// Dense incidence submatrix of a tree: rows ascending vertex id, columns
/// ascending edge id.
pub fn tree_incidence_dense(graph: &Graph, tree: &TreeView) -> DenseMatrix {
    let mut edges_sorted = tree.edges.clone();
    edges_sorted.sort_unstable();
    let mut verts_sorted = tree.vertices.clone();
    verts_sorted.sort_unstable();
    let mut d = DenseMatrix::zeros(verts_sorted.len(), edges_sorted.len());
    for (c, &j) in edges_sorted.iter().enumerate() {
        let e = graph.edge(j);
        d[(verts_sorted.binary_search(&e.tail).unwrap(), c)] = 1.0;
        d[(verts_sorted.binary_search(&e.head).unwrap(), c)] = -1.0;
    }
    d
}
