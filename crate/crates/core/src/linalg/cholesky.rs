use super::ordering::eliminate;
use super::{LinalgError, SparseMatrix};

/// Sparse Cholesky factor `P M Pᵀ = L Lᵀ` with a minimum-degree permutation.
///
/// Immutable after construction; `solve` takes `&self` so one factor can serve
/// many right-hand sides concurrently.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    n: usize,
    /// `perm[k]` = original index at permuted position `k`.
    perm: Vec<usize>,
    /// L in compressed-column form; the first entry of each column is the diagonal.
    colptr: Vec<usize>,
    rowidx: Vec<usize>,
    values: Vec<f64>,
}

impl CholeskyFactor {
    /// Factors a symmetric positive definite matrix given in full (both
    /// triangles) storage.
    pub fn factor(m: &SparseMatrix) -> Result<Self, LinalgError> {
        if m.rows() != m.cols() {
            return Err(LinalgError::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        let n = m.rows();
        let elim = eliminate(m);
        let perm = elim.order;
        let mut pinv = vec![0usize; n];
        for (k, &p) in perm.iter().enumerate() {
            pinv[p] = k;
        }

        let mut colptr = Vec::with_capacity(n + 1);
        colptr.push(0);
        let mut rowidx = Vec::new();
        for (j, col) in elim.columns.iter().enumerate() {
            rowidx.push(j);
            rowidx.extend_from_slice(col);
            colptr.push(rowidx.len());
        }
        let mut values = vec![0.0; rowidx.len()];

        // Row lists: for each row j, the columns k < j with L[j, k] != 0.
        let mut row_counts = vec![0usize; n + 1];
        for j in 0..n {
            for &i in &rowidx[colptr[j] + 1..colptr[j + 1]] {
                row_counts[i + 1] += 1;
            }
        }
        for i in 0..n {
            row_counts[i + 1] += row_counts[i];
        }
        let mut row_cols = vec![0usize; row_counts[n]];
        let mut fill = row_counts.clone();
        for j in 0..n {
            for &i in &rowidx[colptr[j] + 1..colptr[j + 1]] {
                row_cols[fill[i]] = j;
                fill[i] += 1;
            }
        }

        // Left-looking numeric factorization. `next[k]` tracks the position in
        // column k of the first row not yet consumed.
        let mut next: Vec<usize> = (0..n).map(|k| colptr[k] + 1).collect();
        let mut work = vec![0.0; n];
        for j in 0..n {
            let orig = perm[j];
            for (c, v) in m.row(orig) {
                let i = pinv[c];
                if i >= j {
                    work[i] = v;
                }
            }
            for &k in &row_cols[row_counts[j]..row_counts[j + 1]] {
                let pos = next[k];
                debug_assert_eq!(rowidx[pos], j);
                let ljk = values[pos];
                for p in pos..colptr[k + 1] {
                    work[rowidx[p]] -= values[p] * ljk;
                }
                next[k] = pos + 1;
            }
            let d = work[j];
            if !(d > 0.0) || !d.is_finite() {
                return Err(LinalgError::NotPositiveDefinite { pivot: j, value: d });
            }
            let ljj = d.sqrt();
            values[colptr[j]] = ljj;
            work[j] = 0.0;
            for p in colptr[j] + 1..colptr[j + 1] {
                let i = rowidx[p];
                values[p] = work[i] / ljj;
                work[i] = 0.0;
            }
        }
        Ok(Self {
            n,
            perm,
            colptr,
            rowidx,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of L, diagonal included.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Solves `M x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        self.solve_into(b, &mut x);
        x
    }

    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) {
        assert_eq!(b.len(), self.n, "cholesky solve: rhs has wrong length");
        assert_eq!(x.len(), self.n);
        let mut z: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        // L z = P b
        for j in 0..self.n {
            let zj = z[j] / self.values[self.colptr[j]];
            z[j] = zj;
            for p in self.colptr[j] + 1..self.colptr[j + 1] {
                z[self.rowidx[p]] -= self.values[p] * zj;
            }
        }
        // Lᵀ w = z
        for j in (0..self.n).rev() {
            let mut s = z[j];
            for p in self.colptr[j] + 1..self.colptr[j + 1] {
                s -= self.values[p] * z[self.rowidx[p]];
            }
            z[j] = s / self.values[self.colptr[j]];
        }
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = z[k];
        }
    }

    /// Computes `y = Pᵀ L Lᵀ P x` from the factor alone, for reconstruction
    /// checks.
    pub fn reconstruct_apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let px: Vec<f64> = self.perm.iter().map(|&p| x[p]).collect();
        // u = Lᵀ px
        let mut u = vec![0.0; n];
        for j in 0..n {
            let mut s = 0.0;
            for p in self.colptr[j]..self.colptr[j + 1] {
                s += self.values[p] * px[self.rowidx[p]];
            }
            u[j] = s;
        }
        // v = L u
        let mut v = vec![0.0; n];
        for j in 0..n {
            for p in self.colptr[j]..self.colptr[j + 1] {
                v[self.rowidx[p]] += self.values[p] * u[j];
            }
        }
        let mut y = vec![0.0; n];
        for (k, &p) in self.perm.iter().enumerate() {
            y[p] = v[k];
        }
        y
    }
}
