//! Problem generators and loaders: image grids, road networks, random
//! geometric graphs and the Nicholson fixture.

mod grid;
mod pgm;
mod rgg;
mod road;

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph::{self, build_graph, Graph};
use crate::oracle::dijkstra;

pub use grid::{blob_image, grid_from_image, ridge_image, GridSpec};
pub use pgm::{parse_pgm, GrayImage};
pub use rgg::{random_geometric, RggSpec};
pub use road::{
    lattice_network, load_road_network, load_road_network_files, LatticeSpec, RoadOptions,
    TurnSurcharge,
};

/// Where an instance came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub generator: String,
    pub params: Value,
    pub seed: Option<u64>,
    /// Free-form remarks, for example stand-in cost models.
    pub notes: Vec<String>,
}

impl Provenance {
    pub fn new(generator: &str, params: Value, seed: Option<u64>) -> Self {
        Self {
            generator: generator.into(),
            params,
            seed,
            notes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub graph: Graph,
    /// Query pairs as dense vertex indices.
    pub pairs: Vec<(usize, usize)>,
    pub provenance: Provenance,
    /// Per-vertex `(x, y)`, indexed like the graph's vertices.
    pub coords: Option<Vec<(f64, f64)>>,
}

/// Paths written by [`write_instance`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WrittenFiles {
    pub edges: PathBuf,
    pub sidecar: PathBuf,
    pub coords: Option<PathBuf>,
}

impl Instance {
    /// Applies a one-time multiplicative weight perturbation and records it.
    pub fn perturbed(&self, magnitude: f64, seed: u64) -> Result<Self> {
        let mut out = self.clone();
        out.graph = graph::perturb_weights(&self.graph, magnitude, seed)?;
        out.provenance.notes.push(format!(
            "weights perturbed by factor (1 + U(0, {magnitude})) with seed {seed}"
        ));
        Ok(out)
    }

    /// Pairs as external labels.
    pub fn labelled_pairs(&self) -> Vec<(u64, u64)> {
        self.pairs
            .iter()
            .map(|&(s, t)| (self.graph.label(s), self.graph.label(t)))
            .collect()
    }

    pub fn sidecar_json(&self) -> Value {
        json!({
            "provenance": self.provenance,
            "n": self.graph.n(),
            "m": self.graph.m(),
            "pairs": self.labelled_pairs(),
        })
    }

    pub fn coords_tsv(&self) -> Option<String> {
        self.coords.as_ref().map(|c| {
            c.iter()
                .enumerate()
                .map(|(v, (x, y))| format!("{}\t{x}\t{y}\n", self.graph.label(v)))
                .collect()
        })
    }

    /// Loads an edge-list instance plus an optional JSON sidecar and
    /// coordinates file.
    pub fn from_files(edges: &Path, sidecar: Option<&Path>, coords: Option<&Path>) -> Result<Self> {
        let text = fs::read_to_string(edges)?;
        let graph = build_graph(&graph::parse_edge_list(&text)?)?;
        let mut provenance = Provenance::new(
            "edge-list",
            json!({ "path": edges.display().to_string() }),
            None,
        );
        let mut pairs = Vec::new();
        if let Some(p) = sidecar {
            let v: Value =
                serde_json::from_str(&fs::read_to_string(p)?).map_err(|e| Error::Parse {
                    line: e.line(),
                    msg: e.to_string(),
                })?;
            if let Some(prov) = v.get("provenance") {
                provenance.generator = prov
                    .get("generator")
                    .and_then(Value::as_str)
                    .unwrap_or("edge-list")
                    .to_string();
                provenance.params = prov.get("params").cloned().unwrap_or(Value::Null);
                provenance.seed = prov.get("seed").and_then(Value::as_u64);
                if let Some(notes) = prov.get("notes").and_then(Value::as_array) {
                    provenance.notes = notes
                        .iter()
                        .filter_map(|n| n.as_str().map(String::from))
                        .collect();
                }
            }
            if let Some(list) = v.get("pairs").and_then(Value::as_array) {
                for pair in list {
                    let (s, t) = pair
                        .as_array()
                        .and_then(|a| Some((a.first()?.as_u64()?, a.get(1)?.as_u64()?)))
                        .ok_or_else(|| Error::Parse {
                            line: 0,
                            msg: format!("bad pair {pair}"),
                        })?;
                    pairs.push((graph.vertex_of_label(s)?, graph.vertex_of_label(t)?));
                }
            }
        }
        let coords = match coords {
            Some(p) => {
                let rows = graph::parse_coordinates(&fs::read_to_string(p)?)?;
                let mut c = vec![(f64::NAN, f64::NAN); graph.n()];
                for (label, x, y) in rows {
                    if let Ok(v) = graph.vertex_of_label(label) {
                        c[v] = (x, y);
                    }
                }
                Some(c)
            }
            None => None,
        };
        Ok(Self {
            graph,
            pairs,
            provenance,
            coords,
        })
    }
}

/// Writes `<stem>.edges.tsv`, `<stem>.json` and, when coordinates exist,
/// `<stem>.coords.tsv` into `dir`.
pub fn write_instance(instance: &Instance, dir: &Path, stem: &str) -> Result<WrittenFiles> {
    fs::create_dir_all(dir)?;
    let edges = dir.join(format!("{stem}.edges.tsv"));
    fs::write(&edges, instance.graph.to_edge_list_tsv())?;
    let sidecar = dir.join(format!("{stem}.json"));
    let body =
        serde_json::to_string_pretty(&instance.sidecar_json()).expect("json values serialize");
    fs::write(&sidecar, body + "\n")?;
    let coords = match instance.coords_tsv() {
        Some(text) => {
            let p = dir.join(format!("{stem}.coords.tsv"));
            fs::write(&p, text)?;
            Some(p)
        }
        None => None,
    };
    Ok(WrittenFiles {
        edges,
        sidecar,
        coords,
    })
}

/// `(s, t)` with `t` the vertex farthest from `s` in weighted distance, ties
/// broken by smallest index.
pub fn farthest_pair(graph: &Graph, s: usize) -> Result<(usize, usize)> {
    let tree = dijkstra(graph, s, None)?;
    let mut best = (s, 0.0);
    for (v, &d) in tree.dist.iter().enumerate() {
        if d.is_finite() && d > best.1 {
            best = (v, d);
        }
    }
    Ok((s, best.0))
}

pub const NICHOLSON_EDGES: [(u64, u64, f64); 13] = [
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
];

/// The 9-vertex, 13-edge fixture with query pair (v1, v9).
pub fn nicholson() -> Instance {
    let graph = build_graph(&NICHOLSON_EDGES).expect("fixture is valid");
    let pair = (
        graph.vertex_of_label(1).unwrap(),
        graph.vertex_of_label(9).unwrap(),
    );
    Instance {
        graph,
        pairs: vec![pair],
        provenance: Provenance::new("nicholson", json!({}), None),
        coords: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nicholson_fixture() {
        let inst = nicholson();
        assert_eq!((inst.graph.n(), inst.graph.m()), (9, 13));
        let (s, t) = inst.pairs[0];
        assert_eq!(dijkstra(&inst.graph, s, None).unwrap().dist[t], 8.0);
        assert_eq!(inst.labelled_pairs(), vec![(1, 9)]);
    }

    #[test]
    fn write_and_reload_roundtrip() {
        let inst = nicholson().perturbed(1e-6, 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = write_instance(&inst, dir.path(), "fixture").unwrap();
        let back = Instance::from_files(&files.edges, Some(&files.sidecar), None).unwrap();
        assert_eq!(back.graph, inst.graph);
        assert_eq!(back.pairs, inst.pairs);
        assert_eq!(back.provenance.generator, "nicholson");
        assert_eq!(back.provenance.notes.len(), 1);
    }
}
