use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{farthest_pair, Instance, Provenance};
use crate::error::{Error, Result};
use crate::graph::{build_graph, component_labels};

/// Extra cost at busy junctions, split evenly between the two incident edges
/// a route uses to pass through.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurnSurcharge {
    /// Junctions with at least this many incident segments are busy.
    pub min_degree: usize,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RoadOptions {
    /// Speed per segment class, used when the edge file names a class
    /// instead of a numeric speed.
    pub speed_table: BTreeMap<String, f64>,
    pub turn: Option<TurnSurcharge>,
}

fn fields(raw: &str) -> Option<Vec<&str>> {
    let line = raw.split('#').next().unwrap_or("").trim();
    if line.is_empty() {
        None
    } else {
        Some(line.split_whitespace().collect())
    }
}

/// Builds a road instance from a nodes file (`id x y`) and an edges file
/// (`u v length speed_or_class`). Weight is travel time `length / speed`;
/// parallel segments keep the fastest; only the largest connected component
/// is kept.
pub fn load_road_network(
    nodes_text: &str,
    edges_text: &str,
    opts: &RoadOptions,
) -> Result<Instance> {
    let mut node_index: HashMap<u64, usize> = HashMap::new();
    let mut node_ids = Vec::new();
    let mut node_xy = Vec::new();
    for (i, raw) in nodes_text.lines().enumerate() {
        let Some(f) = fields(raw) else { continue };
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        if f.len() != 3 {
            return Err(err(format!("node line needs 3 fields, found {}", f.len())));
        }
        let id = f[0]
            .parse::<u64>()
            .map_err(|e| err(format!("node id: {e}")))?;
        let x = f[1].parse::<f64>().map_err(|e| err(format!("x: {e}")))?;
        let y = f[2].parse::<f64>().map_err(|e| err(format!("y: {e}")))?;
        if node_index.insert(id, node_ids.len()).is_some() {
            return Err(err(format!("node {id} defined twice")));
        }
        node_ids.push(id);
        node_xy.push((x, y));
    }

    // Canonical pair -> (tail, head, weight), first orientation wins.
    let mut segments: BTreeMap<(usize, usize), (usize, usize, f64)> = BTreeMap::new();
    let mut order = Vec::new();
    let mut self_loops = 0usize;
    let mut duplicates = 0usize;
    for (i, raw) in edges_text.lines().enumerate() {
        let Some(f) = fields(raw) else { continue };
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        if f.len() != 4 {
            return Err(err(format!("edge line needs 4 fields, found {}", f.len())));
        }
        let u = f[0]
            .parse::<u64>()
            .map_err(|e| err(format!("tail id: {e}")))?;
        let v = f[1]
            .parse::<u64>()
            .map_err(|e| err(format!("head id: {e}")))?;
        let length = f[2]
            .parse::<f64>()
            .map_err(|e| err(format!("length: {e}")))?;
        let speed = match f[3].parse::<f64>() {
            Ok(s) => s,
            Err(_) => *opts
                .speed_table
                .get(f[3])
                .ok_or_else(|| err(format!("unknown road class {:?}", f[3])))?,
        };
        if !(length > 0.0 && length.is_finite()) || !(speed > 0.0 && speed.is_finite()) {
            return Err(err(format!(
                "length {length} and speed {speed} must be positive"
            )));
        }
        let a = *node_index.get(&u).ok_or(Error::DanglingEdge(u))?;
        let b = *node_index.get(&v).ok_or(Error::DanglingEdge(v))?;
        if a == b {
            self_loops += 1;
            continue;
        }
        let w = length / speed;
        let key = (a.min(b), a.max(b));
        match segments.get_mut(&key) {
            Some(seg) => {
                duplicates += 1;
                seg.2 = seg.2.min(w);
            }
            None => {
                segments.insert(key, (a, b, w));
                order.push(key);
            }
        }
    }
    if segments.is_empty() {
        return Err(Error::EmptyGraph);
    }

    let comp = component_labels(node_ids.len(), order.iter().copied());
    let mut sizes = vec![0usize; comp.iter().max().map_or(0, |c| c + 1)];
    for &c in &comp {
        sizes[c] += 1;
    }
    let giant = (0..sizes.len())
        .max_by_key(|&c| (sizes[c], std::cmp::Reverse(c)))
        .unwrap();
    let kept: Vec<(usize, usize, f64)> = order
        .iter()
        .map(|k| segments[k])
        .filter(|&(a, _, _)| comp[a] == giant)
        .collect();

    let mut weights: Vec<f64> = kept.iter().map(|e| e.2).collect();
    let mut busy = 0;
    if let Some(turn) = opts.turn {
        let mut degree = vec![0usize; node_ids.len()];
        for &(a, b, _) in &kept {
            degree[a] += 1;
            degree[b] += 1;
        }
        busy = degree.iter().filter(|&&d| d >= turn.min_degree).count();
        for (w, &(a, b, _)) in weights.iter_mut().zip(&kept) {
            for end in [a, b] {
                if degree[end] >= turn.min_degree {
                    *w += turn.cost / 2.0;
                }
            }
        }
    }
    let labelled: Vec<(u64, u64, f64)> = kept
        .iter()
        .zip(&weights)
        .map(|(&(a, b, _), &w)| (node_ids[a], node_ids[b], w))
        .collect();
    let graph = build_graph(&labelled)?;
    let coords = graph
        .labels()
        .iter()
        .map(|l| node_xy[node_index[l]])
        .collect();

    let mut provenance = Provenance::new(
        "road",
        json!({
            "nodes_in_file": node_ids.len(),
            "segments_in_file": order.len() + duplicates + self_loops,
            "kept_vertices": graph.n(),
            "kept_edges": graph.m(),
            "duplicates_merged": duplicates,
            "self_loops_dropped": self_loops,
            "turn_surcharge": opts.turn.map(|t| json!({"min_degree": t.min_degree, "cost": t.cost})),
        }),
        None,
    );
    if opts.turn.is_some() {
        provenance.notes.push(format!(
            "turn surcharge is a stand-in: half the junction cost added to each incident edge at {busy} busy junctions"
        ));
    }
    let pairs = vec![farthest_pair(&graph, 0)?];
    Ok(Instance {
        graph,
        pairs,
        provenance,
        coords: Some(coords),
    })
}

pub fn load_road_network_files(nodes: &Path, edges: &Path, opts: &RoadOptions) -> Result<Instance> {
    load_road_network(
        &fs::read_to_string(nodes)?,
        &fs::read_to_string(edges)?,
        opts,
    )
}

/// Synthetic street lattice with slow streets and periodic fast arterials.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    pub cols: usize,
    pub rows: usize,
    pub block_length: f64,
    /// Every k-th row and column is an arterial (0 disables them).
    pub arterial_every: usize,
    pub street_speed: f64,
    pub arterial_speed: f64,
    /// Fraction of blocks that get one diagonal street.
    pub diagonal_fraction: f64,
    /// Segment lengths are scaled by `1 + U(0, jitter)`.
    pub length_jitter: f64,
    pub seed: u64,
}

impl Default for LatticeSpec {
    fn default() -> Self {
        Self {
            cols: 32,
            rows: 32,
            block_length: 100.0,
            arterial_every: 4,
            street_speed: 30.0,
            arterial_speed: 60.0,
            diagonal_fraction: 0.0,
            length_jitter: 0.1,
            seed: 0,
        }
    }
}

impl LatticeSpec {
    pub fn speed_table(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("street".to_string(), self.street_speed),
            ("arterial".to_string(), self.arterial_speed),
        ])
    }
}

/// Node and edge file contents for a lattice; node ids are 1-based
/// row-major. Load with [`load_road_network`] and [`LatticeSpec::speed_table`].
pub fn lattice_network(spec: &LatticeSpec) -> Result<(String, String)> {
    if spec.cols < 2 || spec.rows < 2 {
        return Err(Error::InvalidParameter(
            "lattice needs at least 2x2 nodes".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let id = |c: usize, r: usize| (r * spec.cols + c + 1) as u64;
    let mut nodes = String::new();
    for r in 0..spec.rows {
        for c in 0..spec.cols {
            writeln!(
                nodes,
                "{}\t{}\t{}",
                id(c, r),
                c as f64 * spec.block_length,
                r as f64 * spec.block_length
            )
            .unwrap();
        }
    }
    let arterial = |k: usize| spec.arterial_every > 0 && k.is_multiple_of(spec.arterial_every);
    let mut edges = String::new();
    let jitter =
        |rng: &mut ChaCha8Rng, base: f64| base * (1.0 + rng.gen::<f64>() * spec.length_jitter);
    for r in 0..spec.rows {
        for c in 0..spec.cols {
            if c + 1 < spec.cols {
                let class = if arterial(r) { "arterial" } else { "street" };
                let len = jitter(&mut rng, spec.block_length);
                writeln!(edges, "{}\t{}\t{len}\t{class}", id(c, r), id(c + 1, r)).unwrap();
            }
            if r + 1 < spec.rows {
                let class = if arterial(c) { "arterial" } else { "street" };
                let len = jitter(&mut rng, spec.block_length);
                writeln!(edges, "{}\t{}\t{len}\t{class}", id(c, r), id(c, r + 1)).unwrap();
            }
            if c + 1 < spec.cols && r + 1 < spec.rows && rng.gen::<f64>() < spec.diagonal_fraction {
                let len = jitter(&mut rng, spec.block_length * std::f64::consts::SQRT_2);
                if rng.gen::<bool>() {
                    writeln!(edges, "{}\t{}\t{len}\tstreet", id(c, r), id(c + 1, r + 1)).unwrap();
                } else {
                    writeln!(edges, "{}\t{}\t{len}\tstreet", id(c + 1, r), id(c, r + 1)).unwrap();
                }
            }
        }
    }
    Ok((nodes, edges))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::dijkstra;

    #[test]
    fn single_segment_travel_time() {
        let inst = load_road_network(
            "1 0 0\n2 100 0\n",
            "1\t2\t100\t50\n",
            &RoadOptions::default(),
        )
        .unwrap();
        assert_eq!(inst.graph.m(), 1);
        assert_eq!(inst.graph.edge(0).weight, 2.0);
    }

    #[test]
    fn errors_and_cleanup() {
        let opts = RoadOptions::default();
        assert_eq!(
            load_road_network("1 0 0\n", "1\t7\t10\t5\n", &opts),
            Err(Error::DanglingEdge(7))
        );
        assert!(matches!(
            load_road_network("1 0 0\n2 1 1\n", "1\t2\t10\n", &opts),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            load_road_network("1 0 0\n2 1 1\n", "1\t2\t10\tfreeway\n", &opts),
            Err(Error::Parse { .. })
        ));
        // Parallel segments keep the fastest; the stray component is dropped.
        let inst = load_road_network(
            "1 0 0\n2 1 0\n3 2 0\n8 5 5\n9 6 5\n",
            "1 2 10 1\n2 1 10 2\n2 3 4 1\n3 3 1 1\n8 9 1 1\n",
            &opts,
        )
        .unwrap();
        assert_eq!((inst.graph.n(), inst.graph.m()), (3, 2));
        assert_eq!(inst.graph.edge(0).weight, 5.0);
    }

    #[test]
    fn turn_surcharge_is_split() {
        // Star with a busy hub 1.
        let opts = RoadOptions {
            turn: Some(TurnSurcharge {
                min_degree: 3,
                cost: 2.0,
            }),
            ..RoadOptions::default()
        };
        let inst = load_road_network(
            "1 0 0\n2 1 0\n3 0 1\n4 -1 0\n",
            "1 2 1 1\n1 3 1 1\n1 4 1 1\n",
            &opts,
        )
        .unwrap();
        assert!(inst.graph.edges().iter().all(|e| e.weight == 2.0));
        assert_eq!(inst.provenance.notes.len(), 1);
    }

    #[test]
    fn arterial_beats_shorter_street() {
        // Nodes 1..=6 in a 3x2 block; the top row is an arterial.
        let nodes = "1 0 0\n2 100 0\n3 200 0\n4 0 100\n5 100 100\n6 200 100\n";
        let edges = "4 5 100 arterial\n5 6 100 arterial\n1 2 90 street\n2 3 90 street\n1 4 10 street\n3 6 10 street\n2 5 100 street\n";
        let opts = RoadOptions {
            speed_table: LatticeSpec::default().speed_table(),
            turn: None,
        };
        let inst = load_road_network(nodes, edges, &opts).unwrap();
        let g = &inst.graph;
        let (s, t) = (g.vertex_of_label(1).unwrap(), g.vertex_of_label(3).unwrap());
        let tree = dijkstra(g, s, Some(t)).unwrap();
        // Arterial detour: 10/30 + 200/60 + 10/30 = 4.0 < street 180/30 = 6.0.
        assert!((tree.dist[t] - 4.0).abs() < 1e-12);
        let route: Vec<u64> = tree
            .vertices_to(g, t)
            .unwrap()
            .iter()
            .map(|&v| g.label(v))
            .collect();
        assert_eq!(route, vec![1, 4, 5, 6, 3]);
    }

    #[test]
    fn lattice_is_deterministic_and_loads() {
        let spec = LatticeSpec {
            diagonal_fraction: 0.37,
            seed: 5,
            ..LatticeSpec::default()
        };
        let a = lattice_network(&spec).unwrap();
        assert_eq!(a, lattice_network(&spec).unwrap());
        let opts = RoadOptions {
            speed_table: spec.speed_table(),
            turn: None,
        };
        let inst = load_road_network(&a.0, &a.1, &opts).unwrap();
        assert_eq!(inst.graph.n(), 1024);
        let m = inst.graph.m() as f64;
        assert!((m - 2340.0).abs() / 2340.0 < 0.1, "m = {m}");
    }
}
