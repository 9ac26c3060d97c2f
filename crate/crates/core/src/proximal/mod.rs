//! ADMM solvers for the lasso `min ½‖y − Qβ‖² + λ‖β‖₁`.
//!
//! The β-update `(QᵀQ + ρI)⁻¹ h` is evaluated through the n×n system
//! `QQᵀ + ρI`, either with a sparse Cholesky factor ([`admm_solve`]) or with
//! preconditioned CG ([`inadmm_solve`]).

mod admm;
mod multi;

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::error::Error;
use crate::graph::{Graph, PathIncidence};
use crate::linalg::{norm_inf, CgReport, LinalgError, SparseMatrix};

pub use admm::{admm_solve, beta_update_direct, beta_update_identity, inadmm_solve, AdmmFactor};
pub use multi::{parallel_lasso_solve, MultiPairOutcome, MultiPairProblem};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum LambdaSpec {
    Absolute(f64),
    /// Multiple of `λ_max = ‖Qᵀy‖_∞`.
    FactorOfMax(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// Stop once both the primal and the dual residual pass.
    Both,
    /// Stop once either residual passes.
    Either,
}

/// Relative tolerance handed to CG at each outer iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InnerTolerance {
    Fixed {
        tol: f64,
    },
    /// `max(floor, start · ratio^k)` at outer iteration `k` (from 0).
    Geometric {
        start: f64,
        ratio: f64,
        floor: f64,
    },
}

impl InnerTolerance {
    pub fn at(&self, k: usize) -> f64 {
        match *self {
            InnerTolerance::Fixed { tol } => tol,
            InnerTolerance::Geometric {
                start,
                ratio,
                floor,
            } => (start * ratio.powi(k.min(i32::MAX as usize) as i32)).max(floor),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProximalConfig {
    pub lambda: LambdaSpec,
    pub rho: f64,
    pub over_relaxation: f64,
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub max_iter: usize,
    pub stop_rule: StopRule,
    pub inner_tol: InnerTolerance,
    pub cg_max_iter: usize,
}

impl Default for ProximalConfig {
    fn default() -> Self {
        Self {
            lambda: LambdaSpec::FactorOfMax(1e-4),
            rho: 1.0,
            over_relaxation: 1.8,
            eps_abs: 1e-8,
            eps_rel: 1e-6,
            max_iter: 100_000,
            stop_rule: StopRule::Both,
            inner_tol: InnerTolerance::Fixed { tol: 1e-8 },
            cg_max_iter: 2000,
        }
    }
}

impl ProximalConfig {
    pub fn validate(&self) -> Result<(), ProximalError> {
        let bad = |msg: String| Err(ProximalError::Invalid(Error::InvalidParameter(msg)));
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return bad(format!("rho must be positive, got {}", self.rho));
        }
        if !(self.over_relaxation > 0.0 && self.over_relaxation < 2.0) {
            return bad(format!(
                "over-relaxation must lie in (0, 2), got {}",
                self.over_relaxation
            ));
        }
        let lam = match self.lambda {
            LambdaSpec::Absolute(l) | LambdaSpec::FactorOfMax(l) => l,
        };
        if !(lam > 0.0 && lam.is_finite()) {
            return bad(format!("lambda must be positive, got {lam}"));
        }
        if self.eps_abs < 0.0 || self.eps_rel < 0.0 {
            return bad("stopping tolerances must be non-negative".into());
        }
        Ok(())
    }

    pub fn resolve_lambda(&self, lambda_max: f64) -> f64 {
        match self.lambda {
            LambdaSpec::Absolute(l) => l,
            LambdaSpec::FactorOfMax(f) => f * lambda_max,
        }
    }
}

/// `‖Qᵀy‖_∞`: the smallest λ at which β = 0 is optimal.
pub fn lambda_max(q: &SparseMatrix, y: &[f64]) -> f64 {
    norm_inf(&q.transpose().mul_vec(y))
}

/// Entrywise `sign(x)·max(|x| − κ, 0)`.
pub fn soft_threshold(x: &[f64], kappa: f64) -> Vec<f64> {
    x.iter().map(|&v| shrink(v, kappa)).collect()
}

#[inline]
pub(crate) fn shrink(v: f64, kappa: f64) -> f64 {
    if v > kappa {
        v - kappa
    } else if v < -kappa {
        v + kappa
    } else {
        0.0
    }
}

/// Initial `(α, v)` for a warm start; β follows from the first update.
#[derive(Debug, Clone, PartialEq)]
pub struct WarmStart {
    pub alpha: Vec<f64>,
    pub v: Vec<f64>,
}

/// `α⁰ = W x`, `v⁰ = 0` from a known s-t path.
pub fn warm_start_from_path(
    graph: &Graph,
    path: &PathIncidence,
    s: usize,
    t: usize,
) -> Result<WarmStart, Error> {
    if path.s != s || path.t != t {
        return Err(Error::EndpointMismatch {
            s,
            t,
            found_s: path.s,
            found_t: path.t,
        });
    }
    let mut alpha = vec![0.0; graph.m()];
    for &(j, sign) in &path.steps {
        alpha[j] = sign as f64 * graph.edge(j).weight;
    }
    Ok(WarmStart {
        alpha,
        v: vec![0.0; graph.m()],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProximalState {
    pub beta: Vec<f64>,
    pub alpha: Vec<f64>,
    /// Scaled dual variable `u / ρ`.
    pub v: Vec<f64>,
    /// Last n-dimensional solve, reused as the CG initial guess.
    pub eta: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub primal_threshold: f64,
    pub dual_threshold: f64,
    pub cg_iters: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct CgStats {
    pub total_iterations: usize,
    pub max_iterations: usize,
    pub outer_iterations: usize,
    pub operator_applies: u64,
    pub max_nnz_per_apply: u64,
}

impl CgStats {
    /// Mean CG iterations per outer iteration.
    pub fn mean_iterations(&self) -> f64 {
        if self.outer_iterations == 0 {
            0.0
        } else {
            self.total_iterations as f64 / self.outer_iterations as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProximalOutcome {
    pub state: ProximalState,
    pub history: Vec<IterationRecord>,
    pub lambda: f64,
    pub lambda_max: f64,
    pub converged: bool,
    /// Present for the CG-based solver.
    pub cg: Option<CgStats>,
}

impl ProximalOutcome {
    /// The sparse iterate α, which carries exact zeros.
    pub fn solution(&self) -> &[f64] {
        &self.state.alpha
    }

    pub fn iterations(&self) -> usize {
        self.state.iterations
    }

    /// Residual history with columns `iter,primal_residual,dual_residual,cg_iters`.
    pub fn history_csv(&self) -> String {
        let mut out = String::from("iter,primal_residual,dual_residual,cg_iters\n");
        for r in &self.history {
            writeln!(
                out,
                "{},{},{},{}",
                r.iter, r.primal_residual, r.dual_residual, r.cg_iters
            )
            .unwrap();
        }
        out
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProximalError {
    #[error(transparent)]
    Invalid(#[from] Error),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("no convergence within {} iterations", .0.state.iterations)]
    MaxIterationsExceeded(Box<ProximalOutcome>),
    #[error("inner CG solve failed at outer iteration {outer}: {report:?}")]
    InnerSolveNotConverged {
        outer: usize,
        report: CgReport,
        outcome: Box<ProximalOutcome>,
    },
}

impl ProximalError {
    /// Partial outcome carried by non-convergence errors.
    pub fn outcome(&self) -> Option<&ProximalOutcome> {
        match self {
            ProximalError::MaxIterationsExceeded(o) => Some(o),
            ProximalError::InnerSolveNotConverged { outcome, .. } => Some(outcome),
            _ => None,
        }
    }
}
