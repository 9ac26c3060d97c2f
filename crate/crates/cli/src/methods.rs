use std::time::Instant;

use clap::{Args, ValueEnum};
use lasso_paths::graph::{indicator, weighted_incidence, Graph, PathIncidence};
use lasso_paths::lars::{extract_path, extract_path_from_beta, lars_solve_graph, LarsOptions};
use lasso_paths::linalg::OpCounter;
use lasso_paths::oracle::{bidirectional_dijkstra, dijkstra};
use lasso_paths::proximal::{
    admm_solve, inadmm_solve, warm_start_from_path, InnerTolerance, LambdaSpec, ProximalConfig,
    ProximalError, ProximalOutcome,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Dijkstra,
    Bidijkstra,
    Lars,
    Admm,
    Inadmm,
    /// InADMM started from the Dijkstra path (compare only).
    InadmmWarm,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Dijkstra => "dijkstra",
            Method::Bidijkstra => "bidijkstra",
            Method::Lars => "lars",
            Method::Admm => "admm",
            Method::Inadmm => "inadmm",
            Method::InadmmWarm => "inadmm-warm",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolverArgs {
    /// λ as a multiple of λ_max.
    #[arg(long, default_value_t = 1e-4, conflicts_with = "lambda")]
    pub lambda_factor: f64,
    /// Absolute λ.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Absolute ADMM penalty; overrides --rho-scale.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Penalty as `c / median(w)²`.
    #[arg(long, default_value_t = 0.01)]
    pub rho_scale: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub eps_abs: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub eps_rel: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    /// Relative residual for each inner CG solve.
    #[arg(long, default_value_t = 1e-8)]
    pub cg_tol: f64,
    #[arg(long, default_value_t = 2000)]
    pub cg_max_iter: usize,
    /// Rounding threshold on |x_j| for path extraction.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Start ADMM/InADMM from the Dijkstra path.
    #[arg(long)]
    pub warm_start: bool,
}

fn median_weight(g: &Graph) -> f64 {
    let mut w = g.weights();
    w.sort_by(f64::total_cmp);
    let mid = w.len() / 2;
    if w.len().is_multiple_of(2) {
        0.5 * (w[mid - 1] + w[mid])
    } else {
        w[mid]
    }
}

impl SolverArgs {
    pub fn proximal_config(&self, g: &Graph) -> ProximalConfig {
        let rho = self
            .rho
            .unwrap_or_else(|| self.rho_scale / median_weight(g).powi(2));
        ProximalConfig {
            lambda: match self.lambda {
                Some(l) => LambdaSpec::Absolute(l),
                None => LambdaSpec::FactorOfMax(self.lambda_factor),
            },
            rho,
            eps_abs: self.eps_abs,
            eps_rel: self.eps_rel,
            max_iter: self.max_iter,
            inner_tol: InnerTolerance::Fixed { tol: self.cg_tol },
            cg_max_iter: self.cg_max_iter,
            ..Default::default()
        }
    }
}

/// Everything one method produced for one pair.
#[derive(Debug)]
pub struct MethodRun {
    pub method: Method,
    pub path: Result<PathIncidence, CliError>,
    pub iterations: Option<usize>,
    pub cg_total: Option<usize>,
    pub wall_seconds: f64,
    /// Extra files as `(name, contents)`.
    pub artifacts: Vec<(String, String)>,
    pub counters: Value,
}

/// Fills iteration counts, residual history and counters from a proximal
/// outcome and extracts the path.
fn record_proximal(
    run: &mut MethodRun,
    outcome: Result<ProximalOutcome, ProximalError>,
    g: &Graph,
    s: usize,
    t: usize,
    threshold: f64,
) -> Result<PathIncidence, CliError> {
    let partial = match &outcome {
        Ok(o) => Some(o),
        Err(e) => e.outcome(),
    };
    if let Some(o) = partial {
        run.artifacts
            .push(("residuals.csv".into(), o.history_csv()));
        run.iterations = Some(o.iterations());
        run.cg_total = o.cg.map(|c| c.total_iterations);
        run.counters = json!({
            "lambda": o.lambda,
            "lambda_max": o.lambda_max,
            "converged": o.converged,
            "cg": o.cg,
        });
    }
    match outcome {
        Ok(o) => Ok(extract_path_from_beta(o.solution(), g, s, t, threshold)?),
        Err(e) => Err(e.into()),
    }
}

fn oracle_path(g: &Graph, s: usize, t: usize) -> Result<PathIncidence, CliError> {
    dijkstra(g, s, Some(t))?
        .path_to(g, t)
        .ok_or_else(|| CliError::NotAPath("target unreachable".into()))
}

pub fn run_method(method: Method, g: &Graph, s: usize, t: usize, args: &SolverArgs) -> MethodRun {
    let start = Instant::now();
    let mut run = MethodRun {
        method,
        path: Err(CliError::Failed("not run".into())),
        iterations: None,
        cg_total: None,
        wall_seconds: 0.0,
        artifacts: Vec::new(),
        counters: Value::Null,
    };
    run.path = match method {
        Method::Dijkstra => oracle_path(g, s, t),
        Method::Bidijkstra => bidirectional_dijkstra(g, s, t)
            .map(|cert| cert.path(g))
            .map_err(CliError::from),
        Method::Lars => match lars_solve_graph(g, s, t, &LarsOptions::default()) {
            Ok(lp) => {
                run.iterations = Some(lp.segments.len());
                run.artifacts
                    .push(("breakpoints.csv".into(), lp.events_csv()));
                run.artifacts
                    .push(("coefficients.csv".into(), lp.coefficients_csv()));
                run.counters = json!({
                    "breakpoints": lp.breakpoints.len(),
                    "joins": lp.join_count(),
                    "crosses": lp.cross_count(),
                    "distance": lp.distance,
                });
                extract_path(&lp.x0(g), g, s, t, args.threshold).map_err(CliError::from)
            }
            Err(e) => Err(e.into()),
        },
        Method::Admm | Method::Inadmm | Method::InadmmWarm => {
            let cfg = args.proximal_config(g);
            let prepared = indicator(g, s, t).map_err(CliError::from).and_then(|y| {
                let warm = if args.warm_start || method == Method::InadmmWarm {
                    Some(warm_start_from_path(g, &oracle_path(g, s, t)?, s, t)?)
                } else {
                    None
                };
                Ok((y.to_dense(), warm))
            });
            match prepared {
                Ok((y, warm)) => {
                    let q = weighted_incidence(g);
                    let outcome = if method == Method::Admm {
                        admm_solve(&q, &y, &cfg, warm.as_ref())
                    } else {
                        inadmm_solve(&q, &y, &cfg, warm.as_ref(), Some(&OpCounter::new()))
                    };
                    let path = record_proximal(&mut run, outcome, g, s, t, args.threshold);
                    run.counters = json!({ "rho": cfg.rho, "solver": run.counters });
                    path
                }
                Err(e) => Err(e),
            }
        }
    };
    run.wall_seconds = start.elapsed().as_secs_f64();
    run
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_handles_even_and_odd_counts() {
        let odd = Graph::new(4, &[(0, 1, 3.0), (1, 2, 1.0), (2, 3, 2.0)]).unwrap();
        assert_eq!(median_weight(&odd), 2.0);
        let even = Graph::new(5, &[(0, 1, 4.0), (1, 2, 1.0), (2, 3, 2.0), (3, 4, 8.0)]).unwrap();
        assert_eq!(median_weight(&even), 3.0);
    }
}
