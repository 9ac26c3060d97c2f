//! Homotopy (LARS) solver for `min ½‖y − Qβ‖² + λ‖β‖₁`, tracing the whole
//! piecewise-linear solution path as λ decreases.
//!
//! On a graph lasso (`Q = D W⁻¹`, `y` the s-t indicator) the active set grows
//! as two shortest-path trees; see [`trees`] for the closed-form event times
//! and [`verify`] for the runtime property checks.

mod factor;
pub mod trees;
pub mod verify;

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{self, Graph, PathIncidence};
use crate::linalg::{min_norm_least_squares, DenseMatrix, SparseMatrix};
use factor::GramFactor;

pub use trees::{crossing_ratio_tree, final_breakpoint, joining_time_tree, TwinTrees};
pub use verify::{verify_dijkstra_equivalence, EquivalenceReport, EquivalenceStatus};

/// Candidate times this close (relative) to the current breakpoint are
/// dropped so no zero-length segment is produced.
const SAME_LAMBDA_RTOL: f64 = 1e-12;

/// Once `‖y − Q_A a‖ ≤ EXACT_FIT_RTOL · ‖y‖` the active set reproduces `y`, the
/// correlations are `λ q` and no index can join; the residual left over is
/// rounding noise and would otherwise produce spurious tiny join times.
const EXACT_FIT_RTOL: f64 = 1e-9;

/// Coefficients and correlations below `NOISE_RTOL` times the largest of their
/// kind are rounding residue and trigger no event.
const NOISE_RTOL: f64 = 1e-12;

/// Active indices with their signs, in order of arrival.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ActiveState {
    pub indices: Vec<usize>,
    pub signs: Vec<f64>,
}

impl ActiveState {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.indices.contains(&j)
    }

    fn insert(&mut self, j: usize, sign: f64) {
        debug_assert!(!self.contains(j));
        self.indices.push(j);
        self.signs.push(sign);
    }

    fn remove(&mut self, j: usize) {
        if let Some(pos) = self.indices.iter().position(|&i| i == j) {
            self.indices.remove(pos);
            self.signs.remove(pos);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Join,
    Cross,
    Terminate,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Join => "join",
            EventKind::Cross => "cross",
            EventKind::Terminate => "terminate",
        }
    }
}

/// What happens at the lower end of a segment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Event {
    pub lambda: f64,
    /// Joining indices with the sign they enter with, ascending by index.
    pub joins: Vec<(usize, f64)>,
    /// Indices leaving the active set, ascending.
    pub crosses: Vec<usize>,
}

impl Event {
    pub fn is_terminal(&self) -> bool {
        self.joins.is_empty() && self.crosses.is_empty()
    }
}

/// One linear piece `β_A(λ) = a − λ b` on `[lambda_lo, lambda_hi]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Segment {
    /// `None` stands for +∞ (the initial all-zero piece).
    pub lambda_hi: Option<f64>,
    pub lambda_lo: f64,
    pub state: ActiveState,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// Event at `lambda_lo` that ends this piece.
    pub event: Event,
}

impl Segment {
    /// Active coefficients at `lambda`.
    pub fn active_beta(&self, lambda: f64) -> Vec<f64> {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(a, b)| a - lambda * b)
            .collect()
    }

    pub fn contains(&self, lambda: f64) -> bool {
        lambda >= self.lambda_lo && self.lambda_hi.is_none_or(|hi| lambda <= hi)
    }
}

/// Full solution path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LassoPath {
    pub m: usize,
    /// Finite breakpoints `λ₁ > λ₂ > … > 0` (the terminal `0` excluded).
    pub breakpoints: Vec<f64>,
    pub segments: Vec<Segment>,
    /// Solution at λ = 0⁺.
    pub beta0: Vec<f64>,
    /// `‖β₀‖₁`.
    pub distance: f64,
}

impl LassoPath {
    /// Dense β(λ).
    pub fn beta_at(&self, lambda: f64) -> Vec<f64> {
        let mut beta = vec![0.0; self.m];
        if let Some(seg) = self.segments.iter().find(|s| s.contains(lambda)) {
            for (&j, v) in seg.state.indices.iter().zip(seg.active_beta(lambda)) {
                beta[j] = v;
            }
        }
        beta
    }

    /// `x₀ = W⁻¹ β₀` for a graph lasso.
    pub fn x0(&self, graph: &Graph) -> Vec<f64> {
        self.beta0
            .iter()
            .zip(graph.edges())
            .map(|(b, e)| b / e.weight)
            .collect()
    }

    pub fn events(&self) -> impl Iterator<Item = &Event> {
        self.segments.iter().map(|s| &s.event)
    }

    pub fn cross_count(&self) -> usize {
        self.events().map(|e| e.crosses.len()).sum()
    }

    pub fn join_count(&self) -> usize {
        self.events().map(|e| e.joins.len()).sum()
    }

    /// Event table with columns `k,lambda,event_type,edge_id`.
    pub fn events_csv(&self) -> String {
        let mut out = String::from("k,lambda,event_type,edge_id\n");
        for (k, ev) in self.events().enumerate() {
            let k = k + 1;
            if ev.is_terminal() {
                writeln!(out, "{k},{},terminate,", ev.lambda).unwrap();
            }
            for &(j, _) in &ev.joins {
                writeln!(out, "{k},{},join,{j}", ev.lambda).unwrap();
            }
            for &j in &ev.crosses {
                writeln!(out, "{k},{},cross,{j}", ev.lambda).unwrap();
            }
        }
        out
    }

    /// Long-format coefficients `lambda,edge_id,beta` at both ends of every
    /// finite segment.
    pub fn coefficients_csv(&self) -> String {
        let mut out = String::from("lambda,edge_id,beta\n");
        for seg in &self.segments {
            let Some(hi) = seg.lambda_hi else { continue };
            for lam in [hi, seg.lambda_lo] {
                for (&j, v) in seg.state.indices.iter().zip(seg.active_beta(lam)) {
                    writeln!(out, "{lam},{j},{v}").unwrap();
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LarsOptions {
    /// Admit all indices whose event times tie within `tie_rtol`; when false a
    /// tie is an error.
    pub allow_ties: bool,
    pub tie_rtol: f64,
    /// Stop once every candidate time is below `terminate_rtol · λ₁`.
    pub terminate_rtol: f64,
    /// Check `rank(Q_A) = |A|` on every active set.
    pub check_rank: bool,
    pub max_events: usize,
}

impl Default for LarsOptions {
    fn default() -> Self {
        Self {
            allow_ties: true,
            tie_rtol: 1e-10,
            terminate_rtol: 1e-12,
            check_rank: true,
            max_events: 100_000,
        }
    }
}

/// Per-index joining times for the inactive set; `0` where no root lands in
/// `[0, λ_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JoinTimes {
    pub time: Vec<f64>,
    /// Sign the index would enter with (`0` if it cannot join).
    pub sign: Vec<f64>,
}

/// Column access for `Q` through its transpose.
struct Design<'a> {
    q: &'a SparseMatrix,
    qt: SparseMatrix,
}

impl<'a> Design<'a> {
    fn new(q: &'a SparseMatrix) -> Self {
        Self {
            q,
            qt: q.transpose(),
        }
    }

    fn column(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.qt.row(j)
    }

    /// `Q_A c` as a dense n-vector.
    fn combine(&self, active: &[usize], coef: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.q.rows()];
        for (&j, &c) in active.iter().zip(coef) {
            for (r, v) in self.column(j) {
                out[r] += v * c;
            }
        }
        out
    }

    fn gram(&self, active: &[usize]) -> DenseMatrix {
        let k = active.len();
        let mut g = DenseMatrix::zeros(k, k);
        let mut scatter = vec![0.0; self.q.rows()];
        for (i, &ji) in active.iter().enumerate() {
            for (r, v) in self.column(ji) {
                scatter[r] = v;
            }
            for (l, &jl) in active.iter().enumerate().skip(i) {
                let d: f64 = self.column(jl).map(|(r, v)| scatter[r] * v).sum();
                g[(i, l)] = d;
                g[(l, i)] = d;
            }
            for (r, _) in self.column(ji) {
                scatter[r] = 0.0;
            }
        }
        g
    }

    /// Gram entries of column `j` against `active`, and against itself.
    fn gram_row(&self, j: usize, active: &[usize]) -> (Vec<f64>, f64) {
        let mut scatter = vec![0.0; self.q.rows()];
        let mut diag = 0.0;
        for (r, v) in self.column(j) {
            scatter[r] = v;
            diag += v * v;
        }
        let cross = active
            .iter()
            .map(|&i| self.column(i).map(|(r, v)| scatter[r] * v).sum())
            .collect();
        (cross, diag)
    }

    fn column_dot(&self, j: usize, x: &[f64]) -> f64 {
        self.column(j).map(|(r, v)| v * x[r]).sum()
    }
}

/// Minimum-norm coefficients `a = (Q_AᵀQ_A)⁺ Q_Aᵀ y`, `b = (Q_AᵀQ_A)⁺ s`.
///
/// Uses the running Cholesky factor when it is in sync with the active set,
/// and otherwise tries to rebuild it; a rank-deficient Gram matrix falls back
/// to a complete orthogonal decomposition.
fn segment_coefficients(
    design: &Design<'_>,
    y: &[f64],
    state: &ActiveState,
    check_rank: bool,
    factor: &mut Option<GramFactor>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if state.is_empty() {
        *factor = Some(GramFactor::default());
        return Ok((Vec::new(), Vec::new()));
    }
    let qty: Vec<f64> = state
        .indices
        .iter()
        .map(|&j| design.column_dot(j, y))
        .collect();
    if factor.as_ref().is_none_or(|f| f.len() != state.len()) {
        let g = design.gram(&state.indices);
        let mut f = GramFactor::default();
        let ok = (0..state.len()).all(|i| {
            let cross: Vec<f64> = (0..i).map(|j| g[(i, j)]).collect();
            f.push(&cross, g[(i, i)])
        });
        if !ok {
            *factor = None;
            if check_rank {
                let rank = g.rank();
                if rank != state.len() {
                    return Err(Error::RankDeficient {
                        rank,
                        active: state.len(),
                    });
                }
            }
            return Ok((
                min_norm_least_squares(&g, &qty),
                min_norm_least_squares(&g, &state.signs),
            ));
        }
        *factor = Some(f);
    }
    let f = factor.as_ref().expect("factor is in sync");
    Ok((f.solve(&qty), f.solve(&state.signs)))
}

fn below(t: f64, lambda_k: Option<f64>) -> bool {
    match lambda_k {
        None => t.is_finite(),
        Some(lk) => t < lk * (1.0 - SAME_LAMBDA_RTOL),
    }
}

fn join_times_impl(
    design: &Design<'_>,
    y: &[f64],
    state: &ActiveState,
    a: &[f64],
    b: &[f64],
    lambda_k: Option<f64>,
) -> JoinTimes {
    let qa: Vec<f64> = design.combine(&state.indices, a);
    let resid: Vec<f64> = y.iter().zip(&qa).map(|(y, q)| y - q).collect();
    let m = design.q.cols();
    let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if resid.iter().map(|v| v * v).sum::<f64>().sqrt() <= EXACT_FIT_RTOL * y_norm {
        return JoinTimes {
            time: vec![0.0; m],
            sign: vec![0.0; m],
        };
    }
    let qb = design.combine(&state.indices, b);
    let p = design.qt.mul_vec(&resid);
    let q = design.qt.mul_vec(&qb);
    let mut active = vec![false; m];
    for &j in &state.indices {
        active[j] = true;
    }
    let noise = NOISE_RTOL
        * (0..m)
            .filter(|&j| !active[j])
            .fold(0.0_f64, |mx, j| mx.max(p[j].abs()));
    let mut time = vec![0.0; m];
    let mut sign = vec![0.0; m];
    for j in 0..m {
        if active[j] || p[j].abs() <= noise {
            continue;
        }
        // Correlation p + λq meets +λ or −λ.
        for (t, sg) in [(p[j] / (1.0 - q[j]), 1.0), (-p[j] / (1.0 + q[j]), -1.0)] {
            if t >= 0.0 && below(t, lambda_k) && t > time[j] {
                time[j] = t;
                sign[j] = sg;
            }
        }
    }
    JoinTimes { time, sign }
}

/// Joining times of the inactive indices for the segment ending at `λ_k`
/// (`None` for +∞).
///
/// An index whose residual correlation is below `1e-12` times the largest
/// one is treated as uncorrelated and gets time `0`.
pub fn joining_times_generic(
    q: &SparseMatrix,
    y: &[f64],
    state: &ActiveState,
    a: &[f64],
    b: &[f64],
    lambda_k: Option<f64>,
) -> JoinTimes {
    join_times_impl(&Design::new(q), y, state, a, b, lambda_k)
}

/// Crossing times `a_j / b_j` of the active indices, `0` unless the ratio
/// lies strictly inside `(0, λ_k)`. Returned in active-set order.
///
/// Entries with `|a_j| ≤ 1e-12 · ‖a‖_∞` are zero up to rounding and never
/// cross.
pub fn crossing_times_generic(a: &[f64], b: &[f64], lambda_k: Option<f64>) -> Vec<f64> {
    let noise = NOISE_RTOL * a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    a.iter()
        .zip(b)
        .map(|(&aj, &bj)| {
            let r = aj / bj;
            if bj != 0.0 && aj.abs() > noise && r > 0.0 && below(r, lambda_k) {
                r
            } else {
                0.0
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KktViolation {
    pub index: usize,
    pub on_support: bool,
    /// Amount by which the condition is missed.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KktReport {
    pub violations: Vec<KktViolation>,
    /// Largest gap over all indices, violations or not.
    pub max_gap: f64,
}

impl KktReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the lasso optimality conditions at `(β, λ)` with absolute `slack`.
pub fn kkt_residual(
    q: &SparseMatrix,
    y: &[f64],
    beta: &[f64],
    lambda: f64,
    slack: f64,
) -> KktReport {
    let qb = q.mul_vec(beta);
    let resid: Vec<f64> = y.iter().zip(&qb).map(|(y, v)| y - v).collect();
    let corr = q.transpose().mul_vec(&resid);
    let mut violations = Vec::new();
    let mut max_gap = 0.0_f64;
    for (j, (&c, &b)) in corr.iter().zip(beta).enumerate() {
        let (gap, on_support) = if b != 0.0 {
            ((c - b.signum() * lambda).abs(), true)
        } else {
            ((c.abs() - lambda).max(0.0), false)
        };
        max_gap = max_gap.max(gap);
        if gap > slack {
            violations.push(KktViolation {
                index: j,
                on_support,
                gap,
            });
        }
    }
    KktReport {
        violations,
        max_gap,
    }
}

/// Traces the lasso path for a general design `Q` (n×m) and response `y`.
pub fn lars_solve(q: &SparseMatrix, y: &[f64], opts: &LarsOptions) -> Result<LassoPath> {
    if y.len() != q.rows() {
        return Err(Error::InvalidParameter(format!(
            "response has {} entries, design has {} rows",
            y.len(),
            q.rows()
        )));
    }
    let design = Design::new(q);
    let m = q.cols();
    let mut state = ActiveState::default();
    let mut lambda_k: Option<f64> = None;
    let mut segments = Vec::new();
    let mut breakpoints = Vec::new();
    let mut lambda1 = None;
    let mut factor: Option<GramFactor> = None;

    loop {
        if segments.len() >= opts.max_events {
            return Err(Error::InvalidParameter(format!(
                "path did not terminate within {} events",
                opts.max_events
            )));
        }
        let (a, b) = segment_coefficients(&design, y, &state, opts.check_rank, &mut factor)?;
        let joins = join_times_impl(&design, y, &state, &a, &b, lambda_k);
        let crosses = crossing_times_generic(&a, &b, lambda_k);

        let next = joins
            .time
            .iter()
            .chain(&crosses)
            .copied()
            .fold(0.0_f64, f64::max);
        let floor = lambda1.map_or(0.0, |l1: f64| opts.terminate_rtol * l1);
        if next <= floor || next == 0.0 {
            segments.push(Segment {
                lambda_hi: lambda_k,
                lambda_lo: 0.0,
                state: state.clone(),
                a: a.clone(),
                b,
                event: Event {
                    lambda: 0.0,
                    joins: Vec::new(),
                    crosses: Vec::new(),
                },
            });
            let mut beta0 = vec![0.0; m];
            for (&j, &v) in state.indices.iter().zip(&a) {
                beta0[j] = v;
            }
            let distance = beta0.iter().map(|v| v.abs()).sum();
            return Ok(LassoPath {
                m,
                breakpoints,
                segments,
                beta0,
                distance,
            });
        }
        lambda1.get_or_insert(next);

        let tie = opts.tie_rtol * next;
        let joined: Vec<(usize, f64)> = (0..m)
            .filter(|&j| joins.time[j] > 0.0 && next - joins.time[j] <= tie)
            .map(|j| (j, joins.sign[j]))
            .collect();
        let mut crossed: Vec<usize> = state
            .indices
            .iter()
            .zip(&crosses)
            .filter(|&(_, &t)| t > 0.0 && next - t <= tie)
            .map(|(&j, _)| j)
            .collect();
        crossed.sort_unstable();
        if !opts.allow_ties && joined.len() + crossed.len() > 1 {
            let mut indices: Vec<usize> = joined
                .iter()
                .map(|&(j, _)| j)
                .chain(crossed.iter().copied())
                .collect();
            indices.sort_unstable();
            return Err(Error::SimultaneousTieUnresolved {
                lambda: next,
                indices,
            });
        }

        segments.push(Segment {
            lambda_hi: lambda_k,
            lambda_lo: next,
            state: state.clone(),
            a,
            b,
            event: Event {
                lambda: next,
                joins: joined.clone(),
                crosses: crossed.clone(),
            },
        });
        breakpoints.push(next);
        for &j in &crossed {
            if let (Some(f), Some(pos)) =
                (factor.as_mut(), state.indices.iter().position(|&i| i == j))
            {
                f.remove(pos);
            }
            state.remove(j);
        }
        for &(j, sg) in &joined {
            if let Some(f) = factor.as_mut() {
                let (cross, diag) = design.gram_row(j, &state.indices);
                if !f.push(&cross, diag) {
                    factor = None;
                }
            }
            state.insert(j, sg);
        }
        lambda_k = Some(next);
    }
}

/// LARS on the graph lasso for the pair `(s, t)`.
pub fn lars_solve_graph(
    graph: &Graph,
    s: usize,
    t: usize,
    opts: &LarsOptions,
) -> Result<LassoPath> {
    let y = graph::indicator(graph, s, t)?.to_dense();
    let q = graph::weighted_incidence(graph);
    lars_solve(&q, &y, opts)
}

pub const DEFAULT_PATH_THRESHOLD: f64 = 0.5;

/// Rounds `|x_j| ≥ threshold` to `sign(x_j)` and validates the result as a
/// simple s-t path.
pub fn extract_path(
    x: &[f64],
    graph: &Graph,
    s: usize,
    t: usize,
    threshold: f64,
) -> Result<PathIncidence> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold must lie in (0, 1), got {threshold}"
        )));
    }
    if x.len() != graph.m() {
        return Err(Error::InvalidParameter(format!(
            "vector has {} entries, graph has {} edges",
            x.len(),
            graph.m()
        )));
    }
    let support: Vec<(usize, i8)> = x
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() >= threshold)
        .map(|(j, v)| (j, if *v > 0.0 { 1 } else { -1 }))
        .collect();
    graph::path_from_support(graph, &support, s, t)
}

/// [`extract_path`] on `x = W⁻¹ β`.
pub fn extract_path_from_beta(
    beta: &[f64],
    graph: &Graph,
    s: usize,
    t: usize,
    threshold: f64,
) -> Result<PathIncidence> {
    let x: Vec<f64> = beta
        .iter()
        .zip(graph.edges())
        .map(|(b, e)| b / e.weight)
        .collect();
    extract_path(&x, graph, s, t, threshold)
}
