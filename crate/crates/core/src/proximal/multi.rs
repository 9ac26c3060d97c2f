use rayon::prelude::*;

use super::admm::{admm_with_factor, AdmmFactor};
use super::{ProximalConfig, ProximalError, ProximalOutcome};
use crate::error::Result;
use crate::graph::{indicator, weighted_incidence, Graph};
use crate::linalg::{OpCounter, SparseMatrix};

/// Several s-t pairs sharing one design matrix.
#[derive(Debug, Clone)]
pub struct MultiPairProblem {
    q: SparseMatrix,
    qt: SparseMatrix,
    pairs: Vec<(usize, usize)>,
    responses: Vec<Vec<f64>>,
}

impl MultiPairProblem {
    pub fn new(graph: &Graph, pairs: &[(usize, usize)]) -> Result<Self> {
        let responses = pairs
            .iter()
            .map(|&(s, t)| indicator(graph, s, t).map(|y| y.to_dense()))
            .collect::<Result<Vec<_>>>()?;
        let q = weighted_incidence(graph);
        Ok(Self {
            qt: q.transpose(),
            q,
            pairs: pairs.to_vec(),
            responses,
        })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn design(&self) -> &SparseMatrix {
        &self.q
    }

    pub fn response(&self, i: usize) -> &[f64] {
        &self.responses[i]
    }
}

#[derive(Debug)]
pub struct MultiPairOutcome {
    pub results: Vec<Result<ProximalOutcome, ProximalError>>,
    pub factorizations: u64,
}

impl MultiPairOutcome {
    pub fn all_converged(&self) -> bool {
        self.results.iter().all(|r| r.is_ok())
    }
}

/// Solves every pair against one shared Cholesky factor, in parallel.
pub fn parallel_lasso_solve(
    problem: &MultiPairProblem,
    config: &ProximalConfig,
) -> Result<MultiPairOutcome, ProximalError> {
    config.validate()?;
    let counter = OpCounter::new();
    let factor = AdmmFactor::new(&problem.q, config.rho, Some(&counter))?;
    let results = problem
        .responses
        .par_iter()
        .map(|y| admm_with_factor(&problem.q, &problem.qt, y, &factor, config, None))
        .collect();
    Ok(MultiPairOutcome {
        results,
        factorizations: counter.factorizations(),
    })
}
