use super::{
    shrink, CgStats, IterationRecord, ProximalConfig, ProximalError, ProximalOutcome,
    ProximalState, StopRule, WarmStart,
};
use crate::error::Error;
use crate::linalg::{
    gram_nn, norm_inf, pcg, CgReport, CholeskyFactor, LinalgError, OpCounter, SparseMatrix,
};

/// Cholesky factor of `QQᵀ + ρI`, shareable across solves with the same `Q`
/// and `ρ`.
#[derive(Debug, Clone)]
pub struct AdmmFactor {
    factor: CholeskyFactor,
    rho: f64,
}

impl AdmmFactor {
    pub fn new(
        q: &SparseMatrix,
        rho: f64,
        counter: Option<&OpCounter>,
    ) -> Result<Self, LinalgError> {
        let factor = CholeskyFactor::factor(&gram_nn(q, rho))?;
        if let Some(c) = counter {
            c.record_factorization();
        }
        Ok(Self { factor, rho })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn cholesky(&self) -> &CholeskyFactor {
        &self.factor
    }
}

/// `(QᵀQ + ρI)⁻¹ h` through the n×n factor.
pub fn beta_update_identity(q: &SparseMatrix, factor: &AdmmFactor, h: &[f64]) -> Vec<f64> {
    let eta = factor.factor.solve(&q.mul_vec(h));
    let qte = q.transpose().mul_vec(&eta);
    h.iter()
        .zip(&qte)
        .map(|(h, e)| (h - e) / factor.rho)
        .collect()
}

/// `(QᵀQ + ρI)⁻¹ h` by factoring the m×m matrix directly.
pub fn beta_update_direct(q: &SparseMatrix, rho: f64, h: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let f = CholeskyFactor::factor(&gram_nn(&q.transpose(), rho))?;
    Ok(f.solve(h))
}

fn check_inputs(
    q: &SparseMatrix,
    y: &[f64],
    warm: Option<&WarmStart>,
) -> Result<(), ProximalError> {
    if y.len() != q.rows() {
        return Err(Error::InvalidParameter(format!(
            "response has {} entries, design has {} rows",
            y.len(),
            q.rows()
        ))
        .into());
    }
    if let Some(w) = warm {
        if w.alpha.len() != q.cols() || w.v.len() != q.cols() {
            return Err(Error::InvalidParameter("warm start has wrong length".into()).into());
        }
    }
    Ok(())
}

/// Shared outer loop. `solve(k, rhs, eta)` overwrites `eta` with
/// `(QQᵀ + ρI)⁻¹ rhs` and returns the inner iteration count.
pub(crate) fn run<S>(
    q: &SparseMatrix,
    qt: &SparseMatrix,
    y: &[f64],
    config: &ProximalConfig,
    warm: Option<&WarmStart>,
    mut solve: S,
    mut cg: Option<CgStats>,
) -> Result<ProximalOutcome, ProximalError>
where
    S: FnMut(usize, &[f64], &mut [f64]) -> Result<usize, CgReport>,
{
    config.validate()?;
    check_inputs(q, y, warm)?;
    let (n, m) = (q.rows(), q.cols());
    let rho = config.rho;
    let ar = config.over_relaxation;
    let qty = qt.mul_vec(y);
    let lambda_max = norm_inf(&qty);
    let lambda = config.resolve_lambda(lambda_max);
    let kappa = lambda / rho;
    let sqrt_m = (m as f64).sqrt();

    let (mut alpha, mut v) = match warm {
        Some(w) => (w.alpha.clone(), w.v.clone()),
        None => (vec![0.0; m], vec![0.0; m]),
    };
    let mut beta = vec![0.0; m];
    let mut eta = vec![0.0; n];
    let mut h = vec![0.0; m];
    let mut rhs = vec![0.0; n];
    let mut qte = vec![0.0; m];
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    macro_rules! outcome {
        () => {
            ProximalOutcome {
                state: ProximalState {
                    beta: beta.clone(),
                    alpha: alpha.clone(),
                    v: v.clone(),
                    eta: eta.clone(),
                    iterations,
                },
                history: history.clone(),
                lambda,
                lambda_max,
                converged,
                cg,
            }
        };
    }

    for k in 0..config.max_iter {
        for j in 0..m {
            h[j] = qty[j] + rho * (alpha[j] - v[j]);
        }
        q.mul_vec_into(&h, &mut rhs);
        let inner = match solve(k, &rhs, &mut eta) {
            Ok(it) => it,
            Err(report) => {
                return Err(ProximalError::InnerSolveNotConverged {
                    outer: k + 1,
                    report,
                    outcome: Box::new(outcome!()),
                })
            }
        };
        if let Some(stats) = cg.as_mut() {
            stats.total_iterations += inner;
            stats.max_iterations = stats.max_iterations.max(inner);
            stats.outer_iterations += 1;
        }
        qt.mul_vec_into(&eta, &mut qte);

        let mut r2 = 0.0;
        let mut s2 = 0.0;
        let mut beta2 = 0.0;
        let mut alpha2 = 0.0;
        let mut v2 = 0.0;
        for j in 0..m {
            let b = (h[j] - qte[j]) / rho;
            beta[j] = b;
            let relaxed = ar * b + (1.0 - ar) * alpha[j];
            let a_new = shrink(relaxed + v[j], kappa);
            v[j] += relaxed - a_new;
            let da = a_new - alpha[j];
            alpha[j] = a_new;
            r2 += (b - a_new) * (b - a_new);
            s2 += da * da;
            beta2 += b * b;
            alpha2 += a_new * a_new;
            v2 += v[j] * v[j];
        }
        iterations = k + 1;
        let primal = r2.sqrt();
        let dual = rho * s2.sqrt();
        let primal_threshold =
            config.eps_abs * sqrt_m + config.eps_rel * beta2.sqrt().max(alpha2.sqrt());
        let dual_threshold = config.eps_abs * sqrt_m + config.eps_rel * rho * v2.sqrt();
        history.push(IterationRecord {
            iter: iterations,
            primal_residual: primal,
            dual_residual: dual,
            primal_threshold,
            dual_threshold,
            cg_iters: inner,
        });
        let (p_ok, d_ok) = (primal <= primal_threshold, dual <= dual_threshold);
        let stop = match config.stop_rule {
            StopRule::Both => p_ok && d_ok,
            StopRule::Either => p_ok || d_ok,
        };
        if stop {
            converged = true;
            break;
        }
    }
    if converged {
        Ok(outcome!())
    } else {
        Err(ProximalError::MaxIterationsExceeded(Box::new(outcome!())))
    }
}

pub(crate) fn admm_with_factor(
    q: &SparseMatrix,
    qt: &SparseMatrix,
    y: &[f64],
    factor: &AdmmFactor,
    config: &ProximalConfig,
    warm: Option<&WarmStart>,
) -> Result<ProximalOutcome, ProximalError> {
    if factor.rho != config.rho {
        return Err(Error::InvalidParameter(format!(
            "factor built for rho = {}, config has {}",
            factor.rho, config.rho
        ))
        .into());
    }
    run(
        q,
        qt,
        y,
        config,
        warm,
        |_, rhs, eta| {
            factor.factor.solve_into(rhs, eta);
            Ok(0)
        },
        None,
    )
}

/// ADMM with the n×n system factored once by sparse Cholesky.
pub fn admm_solve(
    q: &SparseMatrix,
    y: &[f64],
    config: &ProximalConfig,
    warm: Option<&WarmStart>,
) -> Result<ProximalOutcome, ProximalError> {
    config.validate()?;
    let factor = AdmmFactor::new(q, config.rho, None)?;
    admm_with_factor(q, &q.transpose(), y, &factor, config, warm)
}

/// Inexact ADMM: the n×n system is solved by Jacobi-preconditioned CG,
/// warm-started from the previous outer iteration. `counter` receives one
/// record per operator application.
pub fn inadmm_solve(
    q: &SparseMatrix,
    y: &[f64],
    config: &ProximalConfig,
    warm: Option<&WarmStart>,
    counter: Option<&OpCounter>,
) -> Result<ProximalOutcome, ProximalError> {
    config.validate()?;
    let qt = q.transpose();
    let (n, m) = (q.rows(), q.cols());
    let rho = config.rho;
    let mut diag = vec![rho; n];
    for (i, d) in diag.iter_mut().enumerate() {
        *d += q.row(i).map(|(_, v)| v * v).sum::<f64>();
    }
    let apply_nnz = (q.nnz() + qt.nnz() + n) as u64;
    let local = OpCounter::new();
    let counter_ref = counter.unwrap_or(&local);
    let before_applies = counter_ref.operator_applies();
    let mut tmp = vec![0.0; m];
    let result = run(
        q,
        &qt,
        y,
        config,
        warm,
        |k, rhs, eta| {
            let apply = |x: &[f64], out: &mut [f64]| {
                qt.mul_vec_into(x, &mut tmp);
                q.mul_vec_into(&tmp, out);
                for (o, xi) in out.iter_mut().zip(x) {
                    *o += rho * xi;
                }
                counter_ref.record_apply(apply_nnz);
            };
            match pcg(
                apply,
                rhs,
                eta,
                &diag,
                config.inner_tol.at(k),
                config.cg_max_iter,
            ) {
                Ok(rep) => Ok(rep.iterations),
                Err(LinalgError::NotConverged(rep)) => Err(rep),
                Err(other) => panic!("pcg called with consistent dimensions: {other}"),
            }
        },
        Some(CgStats::default()),
    );
    let fill = |o: &mut ProximalOutcome| {
        if let Some(stats) = o.cg.as_mut() {
            stats.operator_applies = counter_ref.operator_applies() - before_applies;
            stats.max_nnz_per_apply = counter_ref.max_nnz_per_apply();
        }
    };
    match result {
        Ok(mut o) => {
            fill(&mut o);
            Ok(o)
        }
        Err(ProximalError::MaxIterationsExceeded(mut o)) => {
            fill(&mut o);
            Err(ProximalError::MaxIterationsExceeded(o))
        }
        Err(ProximalError::InnerSolveNotConverged {
            outer,
            report,
            mut outcome,
        }) => {
            fill(&mut outcome);
            Err(ProximalError::InnerSolveNotConverged {
                outer,
                report,
                outcome,
            })
        }
        Err(e) => Err(e),
    }
}

/// Norm of the difference of two vectors, for agreement checks.
#[cfg(test)]
pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    crate::linalg::norm2(&d)
}
