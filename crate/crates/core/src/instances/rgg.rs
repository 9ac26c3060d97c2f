use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{farthest_pair, Instance, Provenance};
use crate::error::{Error, Result};
use crate::graph::{build_graph, component_labels, perturb_weights};

#[derive(Debug, Clone, PartialEq)]
pub struct RggSpec {
    pub n: usize,
    pub seed: u64,
    /// Minimum share of nodes in the giant component.
    pub target_fraction: f64,
    /// Edge weight is `distance^weight_exponent`.
    pub weight_exponent: f64,
    /// Multiplicative perturbation magnitude; 0 disables it.
    pub perturbation: f64,
    /// Cap on radius growth steps.
    pub max_steps: usize,
    /// Starting radius; `None` uses `0.5·√(ln n / (π n))`.
    pub radius_start: Option<f64>,
}

impl RggSpec {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            seed,
            target_fraction: 0.98,
            weight_exponent: 2.0,
            perturbation: 1e-6,
            max_steps: 200,
            radius_start: None,
        }
    }
}

const GROWTH: f64 = 1.05;

/// All pairs `i < j` within `r`, found through a uniform cell grid, in
/// row-major order of `i`.
fn pairs_within(points: &[(f64, f64)], r: f64) -> Vec<(usize, usize, f64)> {
    let cells = ((1.0 / r).floor() as usize).clamp(1, 4096);
    let cell_of = |p: f64| ((p * cells as f64) as usize).min(cells - 1);
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); cells * cells];
    for (i, &(x, y)) in points.iter().enumerate() {
        buckets[cell_of(y) * cells + cell_of(x)].push(i);
    }
    let r2 = r * r;
    let mut out = Vec::new();
    for (i, &(x, y)) in points.iter().enumerate() {
        let (cx, cy) = (cell_of(x), cell_of(y));
        let mut near = Vec::new();
        for gy in cy.saturating_sub(1)..=(cy + 1).min(cells - 1) {
            for gx in cx.saturating_sub(1)..=(cx + 1).min(cells - 1) {
                for &j in &buckets[gy * cells + gx] {
                    if j > i {
                        let (dx, dy) = (points[j].0 - x, points[j].1 - y);
                        let d2 = dx * dx + dy * dy;
                        if d2 <= r2 {
                            near.push((i, j, d2.sqrt()));
                        }
                    }
                }
            }
        }
        near.sort_by_key(|e| e.1);
        out.extend(near);
    }
    out
}

/// Random geometric graph on the unit square, restricted to its giant
/// component. The radius grows by ×1.05 until the giant component holds the
/// target fraction of nodes. Vertex labels are the original point indices.
pub fn random_geometric(spec: &RggSpec) -> Result<Instance> {
    if spec.n < 10 {
        return Err(Error::InvalidParameter(format!(
            "need at least 10 nodes, got {}",
            spec.n
        )));
    }
    if !(spec.target_fraction > 0.0 && spec.target_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "target fraction must lie in (0, 1], got {}",
            spec.target_fraction
        )));
    }
    if !(spec.weight_exponent > 0.0) || spec.perturbation < 0.0 {
        return Err(Error::InvalidParameter(
            "weight exponent must be positive, perturbation non-negative".into(),
        ));
    }
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let points: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.gen::<f64>(), rng.gen::<f64>()))
        .collect();

    let nf = n as f64;
    let mut radius = spec
        .radius_start
        .unwrap_or_else(|| 0.5 * (nf.ln() / (std::f64::consts::PI * nf)).sqrt());
    let mut steps = 0;
    let (edges, comp, giant) = loop {
        let edges = pairs_within(&points, radius);
        let comp = component_labels(n, edges.iter().map(|e| (e.0, e.1)));
        let mut sizes = vec![0usize; comp.iter().max().map_or(0, |c| c + 1)];
        for &c in &comp {
            sizes[c] += 1;
        }
        let giant = (0..sizes.len())
            .max_by_key(|&c| (sizes[c], std::cmp::Reverse(c)))
            .unwrap();
        if sizes[giant] as f64 >= spec.target_fraction * nf {
            break (edges, comp, giant);
        }
        if steps == spec.max_steps {
            return Err(Error::TargetUnreachable {
                target: spec.target_fraction,
                steps,
            });
        }
        radius *= GROWTH;
        steps += 1;
    };

    let labelled: Vec<(u64, u64, f64)> = edges
        .iter()
        .filter(|e| comp[e.0] == giant)
        .map(|&(i, j, d)| (i as u64, j as u64, d.powf(spec.weight_exponent)))
        .collect();
    let mut graph = build_graph(&labelled)?;
    if spec.perturbation > 0.0 {
        graph = perturb_weights(&graph, spec.perturbation, spec.seed.wrapping_add(1))?;
    }
    let coords: Vec<(f64, f64)> = graph.labels().iter().map(|&l| points[l as usize]).collect();
    let s = (0..graph.n())
        .min_by(|&a, &b| coords[a].0.total_cmp(&coords[b].0))
        .unwrap();
    let pair = farthest_pair(&graph, s)?;
    let mut provenance = Provenance::new(
        "rgg",
        json!({
            "n": n,
            "target_fraction": spec.target_fraction,
            "weight_exponent": spec.weight_exponent,
            "perturbation": spec.perturbation,
            "radius": radius,
            "radius_steps": steps,
            "giant_size": graph.n(),
        }),
        Some(spec.seed),
    );
    if spec.perturbation > 0.0 {
        provenance.notes.push(format!(
            "weights perturbed by factor (1 + U(0, {})) with seed {}",
            spec.perturbation,
            spec.seed.wrapping_add(1)
        ));
    }
    Ok(Instance {
        graph,
        pairs: vec![pair],
        provenance,
        coords: Some(coords),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::terminal_uniqueness_check;

    #[test]
    fn small_instance_is_deterministic() {
        let a = random_geometric(&RggSpec::new(10, 4)).unwrap();
        let b = random_geometric(&RggSpec::new(10, 4)).unwrap();
        assert_eq!(a.graph.to_edge_list_tsv(), b.graph.to_edge_list_tsv());
        let coords = a.coords.as_ref().unwrap();
        let (s, _) = a.pairs[0];
        assert!(coords.iter().all(|c| c.0 >= coords[s].0));
        assert!(coords
            .iter()
            .all(|c| (0.0..=1.0).contains(&c.0) && (0.0..=1.0).contains(&c.1)));
        assert!(a.graph.n() as f64 >= 0.98 * 10.0);
    }

    #[test]
    fn rejects_tiny_and_unreachable() {
        assert!(random_geometric(&RggSpec::new(9, 0)).is_err());
        let capped = RggSpec {
            max_steps: 0,
            radius_start: Some(1e-4),
            ..RggSpec::new(200, 1)
        };
        assert!(matches!(
            random_geometric(&capped),
            Err(Error::TargetUnreachable { .. })
        ));
    }

    #[test]
    fn matches_brute_force_neighbours() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pts: Vec<(f64, f64)> = (0..300).map(|_| (rng.gen(), rng.gen())).collect();
        let fast: Vec<(usize, usize)> = pairs_within(&pts, 0.07)
            .iter()
            .map(|e| (e.0, e.1))
            .collect();
        let mut slow = Vec::new();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                if (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1) <= 0.07 {
                    slow.push((i, j));
                }
            }
        }
        assert_eq!(fast, slow);
    }

    #[test]
    fn density_near_reference_scale() {
        let inst = random_geometric(&RggSpec::new(3000, 7)).unwrap();
        let reference = 14149.0 * 3000.0 / 2997.0;
        let m = inst.graph.m() as f64;
        assert!(m >= reference / 2.0 && m <= reference * 2.0, "m = {m}");
        assert!(inst.graph.n() >= 2940);
        let (s, t) = inst.pairs[0];
        assert!(terminal_uniqueness_check(&inst.graph, s, t)
            .unwrap()
            .holds());
    }
}
