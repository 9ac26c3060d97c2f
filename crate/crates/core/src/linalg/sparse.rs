use super::{LinalgError, OpCounter};

/// Compressed sparse row matrix.
///
/// Column indices are sorted within each row and explicit zeros are never
/// stored. `symmetric` is only set by constructors that guarantee it.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
    symmetric: bool,
}

impl SparseMatrix {
    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are summed
    /// in input order; entries that sum to exactly zero are dropped.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, LinalgError> {
        let mut counts = vec![0usize; rows + 1];
        for &(r, c, _) in triplets {
            if r >= rows || c >= cols {
                return Err(LinalgError::DimensionMismatch(format!(
                    "entry ({r}, {c}) outside {rows}x{cols}"
                )));
            }
            counts[r + 1] += 1;
        }
        for i in 0..rows {
            counts[i + 1] += counts[i];
        }
        // Bucket by row, stable in input order.
        let mut next = counts.clone();
        let mut cols_buf = vec![0usize; triplets.len()];
        let mut vals_buf = vec![0.0; triplets.len()];
        for &(r, c, v) in triplets {
            let k = next[r];
            cols_buf[k] = c;
            vals_buf[k] = v;
            next[r] += 1;
        }

        let mut indptr = Vec::with_capacity(rows + 1);
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        indptr.push(0);
        let mut order: Vec<usize> = Vec::new();
        for r in 0..rows {
            order.clear();
            order.extend(counts[r]..counts[r + 1]);
            order.sort_by_key(|&k| cols_buf[k]);
            let mut i = 0;
            while i < order.len() {
                let c = cols_buf[order[i]];
                let mut sum = 0.0;
                while i < order.len() && cols_buf[order[i]] == c {
                    sum += vals_buf[order[i]];
                    i += 1;
                }
                if sum != 0.0 {
                    indices.push(c);
                    values.push(sum);
                }
            }
            indptr.push(indices.len());
        }
        Ok(Self {
            rows,
            cols,
            indptr,
            indices,
            values,
            symmetric: false,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
            symmetric: true,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterates `(col, value)` over the stored entries of row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.indptr[r]..self.indptr[r + 1];
        match self.indices[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    /// `out = self * x`.
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.cols, "mul_vec: x has wrong length");
        assert_eq!(out.len(), self.rows, "mul_vec: out has wrong length");
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            *o = acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.mul_vec_into(x, &mut out);
        out
    }

    /// As [`mul_vec_into`](Self::mul_vec_into), recording the entries read.
    pub fn mul_vec_counted(&self, x: &[f64], out: &mut [f64], counter: &OpCounter) {
        self.mul_vec_into(x, out);
        counter.record_apply(self.nnz() as u64);
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.cols + 1];
        for &c in &self.indices {
            counts[c + 1] += 1;
        }
        for i in 0..self.cols {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut indices = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for r in 0..self.rows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                let c = self.indices[k];
                let slot = next[c];
                indices[slot] = r;
                values[slot] = self.values[k];
                next[c] += 1;
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            indptr: counts,
            indices,
            values,
            symmetric: self.symmetric,
        }
    }

    /// Multiplies column `j` by `scale[j]`.
    pub fn scale_columns(&self, scale: &[f64]) -> Self {
        assert_eq!(scale.len(), self.cols);
        let mut out = self.clone();
        for (k, v) in out.values.iter_mut().enumerate() {
            *v *= scale[self.indices[k]];
        }
        out.symmetric = false;
        out
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols))
            .map(|i| self.get(i, i))
            .collect()
    }

    pub fn to_dense(&self) -> super::DenseMatrix {
        let mut d = super::DenseMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                d[(r, c)] = v;
            }
        }
        d
    }

    /// Checks the stored pattern and values for exact symmetry.
    pub fn check_symmetric(&self) -> bool {
        self.rows == self.cols && *self == self.transpose_with_flag(self.symmetric)
    }

    fn transpose_with_flag(&self, flag: bool) -> Self {
        let mut t = self.transpose();
        t.symmetric = flag;
        t
    }
}

/// Forms `A Aᵀ + ρI` for an `r×c` sparse `A`.
///
/// Each entry accumulates its column contributions in increasing column order,
/// so `(i, k)` and `(k, i)` are computed from the same products in the same
/// order and the result is bitwise symmetric.
pub fn gram_nn(a: &SparseMatrix, rho: f64) -> SparseMatrix {
    let at = a.transpose();
    let n = a.rows();
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..n {
        triplets.push((i, i, rho));
    }
    for j in 0..at.rows() {
        let col: Vec<(usize, f64)> = at.row(j).collect();
        for &(i, vi) in &col {
            for &(k, vk) in &col {
                triplets.push((i, k, vi * vk));
            }
        }
    }
    let mut m = SparseMatrix::from_triplets(n, n, &triplets)
        .expect("gram entries are within bounds by construction");
    m.symmetric = true;
    m
}
