#![allow(dead_code)]

use lasso_paths::graph::{perturb_weights, Graph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random connected graph: a random spanning tree plus `extra` chords, with
/// integer weights in `1..=9` and a small perturbation so geodesics are
/// unique with probability one.
pub fn random_connected(n: usize, extra: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        seen.insert((u, v));
        edges.push((u, v, rng.gen_range(1..=9) as f64));
    }
    let mut tries = 0;
    while edges.len() < n - 1 + extra && tries < 50 * (extra + 1) {
        tries += 1;
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a == b {
            continue;
        }
        let key = (a.min(b), a.max(b));
        if seen.insert(key) {
            edges.push((a, b, rng.gen_range(1..=9) as f64));
        }
    }
    let g = Graph::new(n, &edges).expect("generator emits valid graphs");
    perturb_weights(&g, 1e-3, seed ^ 0x5eed).unwrap()
}

/// Random tree on `n` vertices with weights in `[0.5, 5)`.
pub fn random_tree(n: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<(usize, usize, f64)> = (1..n)
        .map(|v| (rng.gen_range(0..v), v, rng.gen_range(0.5..5.0)))
        .collect();
    Graph::new(n, &edges).unwrap()
}

/// A pair `(s, t)` of distinct vertices.
pub fn random_pair(n: usize, seed: u64) -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(31).wrapping_add(7));
    let s = rng.gen_range(0..n);
    let mut t = rng.gen_range(0..n - 1);
    if t >= s {
        t += 1;
    }
    (s, t)
}

/// All-pairs distances by Floyd–Warshall, used as an oracle.
pub fn floyd(graph: &Graph) -> Vec<Vec<f64>> {
    let n = graph.n();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (v, row) in d.iter_mut().enumerate() {
        row[v] = 0.0;
    }
    for e in graph.edges() {
        d[e.tail][e.head] = d[e.tail][e.head].min(e.weight);
        d[e.head][e.tail] = d[e.head][e.tail].min(e.weight);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

pub fn rel_close(a: f64, b: f64, rtol: f64) -> bool {
    (a - b).abs() <= rtol * a.abs().max(b.abs()).max(1.0)
}

/// Penalty `c / median(w)²`. The ADMM iteration count depends on ρ relative
/// to the squared edge weights, so a fixed ρ only suits unit-scale graphs.
pub fn scaled_rho(graph: &Graph, c: f64) -> f64 {
    let mut w = graph.weights();
    w.sort_by(f64::total_cmp);
    let med = w[w.len() / 2];
    c / (med * med)
}

/// A random simple s-t path from a randomised depth-first search.
pub fn random_simple_path(graph: &Graph, s: usize, t: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = vec![false; graph.n()];
    let mut stack = vec![s];
    seen[s] = true;
    while let Some(&v) = stack.last() {
        if v == t {
            return stack;
        }
        let mut open: Vec<usize> = graph
            .neighbors(v)
            .iter()
            .map(|&(u, _)| u)
            .filter(|&u| !seen[u])
            .collect();
        if open.is_empty() {
            stack.pop();
            continue;
        }
        let u = open.swap_remove(rng.gen_range(0..open.len()));
        seen[u] = true;
        stack.push(u);
    }
    unreachable!("graph is connected")
}

/// Pseudoinverse through a one-sided Jacobi SVD, with singular values below
/// `rtol · σ_max` dropped. Jacobi rotations keep the factorization accurate to
/// a few ulps, which the bidiagonal QR SVD does not on some tree incidence
/// matrices (Moore–Penrose residuals near 1e-9 there).
pub fn jacobi_pseudo_inverse(a: &nalgebra::DMatrix<f64>, rtol: f64) -> nalgebra::DMatrix<f64> {
    let (rows, cols) = a.shape();
    let mut u = a.clone();
    let mut v = nalgebra::DMatrix::<f64>::identity(cols, cols);
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = u.column(p).norm_squared();
                let beta = u.column(q).norm_squared();
                let gamma = u.column(p).dot(&u.column(q));
                if gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for m in [&mut u, &mut v] {
                    for r in 0..m.nrows() {
                        let (x, y) = (m[(r, p)], m[(r, q)]);
                        m[(r, p)] = c * x - s * y;
                        m[(r, q)] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma: Vec<f64> = (0..cols).map(|j| u.column(j).norm()).collect();
    let cutoff = rtol * sigma.iter().cloned().fold(0.0, f64::max);
    let mut out = nalgebra::DMatrix::<f64>::zeros(cols, rows);
    for j in 0..cols {
        if sigma[j] > cutoff {
            let uj = u.column(j) / sigma[j];
            out += v.column(j) * uj.transpose() / sigma[j];
        }
    }
    out
}
