use serde::Serialize;

use super::{dot, norm2, LinalgError};

/// Outcome of one conjugate-gradient solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CgReport {
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

/// Jacobi-preconditioned conjugate gradients for an SPD operator.
///
/// `apply(x, out)` must write `M x` into `out`; the matrix is never touched
/// otherwise. `x` is used as the initial guess and overwritten with the
/// solution. Convergence means `‖b − M x‖₂ ≤ rel_tol · ‖b‖₂`.
pub fn pcg<F>(
    mut apply: F,
    b: &[f64],
    x: &mut [f64],
    diag: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<CgReport, LinalgError>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let n = b.len();
    if x.len() != n || diag.len() != n {
        return Err(LinalgError::DimensionMismatch(format!(
            "pcg: b has {n} entries, x {} and preconditioner {}",
            x.len(),
            diag.len()
        )));
    }
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgReport {
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        });
    }
    let inv_diag: Vec<f64> = diag
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();

    let mut r = vec![0.0; n];
    apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut rel = norm2(&r) / b_norm;
    if rel <= rel_tol {
        return Ok(CgReport {
            iterations: 0,
            relative_residual: rel,
            converged: true,
        });
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, d)| a * d).collect();
    let mut p = z.clone();
    let mut mp = vec![0.0; n];
    let mut rz = dot(&r, &z);

    for it in 1..=max_iter {
        apply(&p, &mut mp);
        let pmp = dot(&p, &mp);
        if !(pmp > 0.0) {
            return Err(LinalgError::NotConverged(CgReport {
                iterations: it,
                relative_residual: rel,
                converged: false,
            }));
        }
        let step = rz / pmp;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * mp[i];
        }
        rel = norm2(&r) / b_norm;
        if rel <= rel_tol {
            return Ok(CgReport {
                iterations: it,
                relative_residual: rel,
                converged: true,
            });
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(LinalgError::NotConverged(CgReport {
        iterations: max_iter,
        relative_residual: rel,
        converged: false,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{CholeskyFactor, SparseMatrix};

    #[test]
    fn identity_converges_in_one_step() {
        let b = [1.0, -2.0, 3.0];
        let mut x = [0.0; 3];
        let rep = pcg(
            |v, o| o.copy_from_slice(v),
            &b,
            &mut x,
            &[2.0; 3],
            1e-12,
            10,
        )
        .unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(rep.converged);
        assert_eq!(x, b);
    }

    #[test]
    fn matches_direct_solve_on_2x2() {
        let m = SparseMatrix::from_triplets(
            2,
            2,
            &[(0, 0, 2.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 2.0)],
        )
        .unwrap();
        let b = [1.0, 0.0];
        let direct = CholeskyFactor::factor(&m).unwrap().solve(&b);
        let mut x = [0.0; 2];
        pcg(
            |v, o| m.mul_vec_into(v, o),
            &b,
            &mut x,
            &m.diagonal(),
            1e-12,
            10,
        )
        .unwrap();
        assert!((x[0] - direct[0]).abs() < 1e-8 && (x[1] - direct[1]).abs() < 1e-8);
    }

    #[test]
    fn zero_rhs_short_circuits() {
        let mut x = [5.0, 5.0];
        let rep = pcg(
            |v, o| o.copy_from_slice(v),
            &[0.0, 0.0],
            &mut x,
            &[1.0; 2],
            1e-8,
            10,
        )
        .unwrap();
        assert_eq!(rep.iterations, 0);
        assert_eq!(x, [0.0, 0.0]);
    }

    #[test]
    fn iteration_cap_reports_not_converged() {
        let d: Vec<f64> = (1..=50).map(|i| i as f64).collect();
        let b = vec![1.0; 50];
        let mut x = vec![0.0; 50];
        // Unpreconditioned on a diagonal with 50 distinct eigenvalues needs > 2 steps.
        let err = pcg(
            |v, o| {
                for i in 0..50 {
                    o[i] = d[i] * v[i];
                }
            },
            &b,
            &mut x,
            &vec![1.0; 50],
            1e-12,
            2,
        )
        .unwrap_err();
        match err {
            LinalgError::NotConverged(rep) => {
                assert!(!rep.converged);
                assert_eq!(rep.iterations, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
