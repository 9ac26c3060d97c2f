use std::ops::{Index, IndexMut};

/// Small row-major dense matrix for active-set systems and test fixtures.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data has wrong length");
        Self { rows, cols, data }
    }

    /// Builds a matrix from a column-generating closure.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul: inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == 0.0 {
                    continue;
                }
                for c in 0..other.cols {
                    out[(r, c)] += a * other[(k, c)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self[(r, c)] * x[c]).sum())
            .collect()
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Numerical rank from a column-pivoted QR.
    pub fn rank(&self) -> usize {
        ColPivQr::new(self.clone()).rank
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

const RANK_TOL: f64 = 1e-10;

/// Householder QR with column pivoting: `A P = Q R`.
///
/// `qr` holds R in its upper triangle and the Householder vectors below it.
struct ColPivQr {
    qr: DenseMatrix,
    tau: Vec<f64>,
    perm: Vec<usize>,
    rank: usize,
}

impl ColPivQr {
    fn new(mut a: DenseMatrix) -> Self {
        let (rows, cols) = (a.rows, a.cols);
        let steps = rows.min(cols);
        let mut perm: Vec<usize> = (0..cols).collect();
        let mut tau = vec![0.0; steps];
        let mut norms: Vec<f64> = (0..cols)
            .map(|c| (0..rows).map(|r| a[(r, c)] * a[(r, c)]).sum::<f64>())
            .collect();
        let mut first_diag = 0.0;
        let mut rank = 0;
        for k in 0..steps {
            // Recompute trailing norms exactly; the systems here are small.
            for c in k..cols {
                norms[c] = (k..rows).map(|r| a[(r, c)] * a[(r, c)]).sum();
            }
            let (p, &best) = norms[k..]
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.partial_cmp(y.1).unwrap())
                .map(|(i, v)| (i + k, v))
                .unwrap();
            if p != k {
                for r in 0..rows {
                    let tmp = a[(r, k)];
                    a[(r, k)] = a[(r, p)];
                    a[(r, p)] = tmp;
                }
                perm.swap(k, p);
                norms.swap(k, p);
            }
            let col_norm = best.sqrt();
            if k == 0 {
                first_diag = col_norm;
            }
            if col_norm <= RANK_TOL * first_diag.max(f64::MIN_POSITIVE) || col_norm == 0.0 {
                break;
            }
            rank += 1;
            tau[k] = householder_in_place(&mut a, k, k);
            apply_householder_left(&mut a, k, k, tau[k], k + 1);
        }
        Self {
            qr: a,
            tau,
            perm,
            rank,
        }
    }
}

/// Turns column `col` (rows `start..`) into a Householder reflector.
/// Stores `beta` on the diagonal, the essential part of `v` below it, and
/// returns `tau` such that `H = I - tau v vᵀ`, `v[start] = 1`.
fn householder_in_place(a: &mut DenseMatrix, start: usize, col: usize) -> f64 {
    let rows = a.rows;
    let alpha = a[(start, col)];
    let tail: f64 = ((start + 1)..rows).map(|r| a[(r, col)] * a[(r, col)]).sum();
    if tail == 0.0 {
        return 0.0;
    }
    let norm = (alpha * alpha + tail).sqrt();
    let beta = if alpha >= 0.0 { -norm } else { norm };
    let scale = 1.0 / (alpha - beta);
    for r in (start + 1)..rows {
        a[(r, col)] *= scale;
    }
    a[(start, col)] = beta;
    (beta - alpha) / beta
}

/// Applies the reflector stored in column `col` to columns `from..` of `a`.
fn apply_householder_left(a: &mut DenseMatrix, start: usize, col: usize, tau: f64, from: usize) {
    if tau == 0.0 {
        return;
    }
    let rows = a.rows;
    for c in from..a.cols {
        let mut s = a[(start, c)];
        for r in (start + 1)..rows {
            s += a[(r, col)] * a[(r, c)];
        }
        s *= tau;
        a[(start, c)] -= s;
        for r in (start + 1)..rows {
            let v = a[(r, col)];
            a[(r, c)] -= s * v;
        }
    }
}

/// Applies the reflector stored in column `col` of `h` to the vector `x`.
fn apply_householder_vec(h: &DenseMatrix, start: usize, col: usize, tau: f64, x: &mut [f64]) {
    if tau == 0.0 {
        return;
    }
    let mut s = x[start];
    for r in (start + 1)..h.rows {
        s += h[(r, col)] * x[r];
    }
    s *= tau;
    x[start] -= s;
    for r in (start + 1)..h.rows {
        x[r] -= s * h[(r, col)];
    }
}

/// Minimum-norm least-squares solution `x = A⁺ b`.
///
/// Uses a complete orthogonal decomposition: a column-pivoted QR reveals the
/// rank `k`, and a second QR of the leading `k` rows of `R` (transposed)
/// removes the component of `x` in the null space of `A`.
pub fn min_norm_least_squares(a: &DenseMatrix, b: &[f64]) -> Vec<f64> {
    assert_eq!(
        a.rows(),
        b.len(),
        "min_norm_least_squares: b has wrong length"
    );
    let cols = a.cols();
    let qr = ColPivQr::new(a.clone());
    let k = qr.rank;
    if k == 0 {
        return vec![0.0; cols];
    }
    // c = Qᵀ b, first k entries.
    let mut c = b.to_vec();
    for step in 0..k {
        apply_householder_vec(&qr.qr, step, step, qr.tau[step], &mut c);
    }

    // R1 is k×cols upper trapezoidal; factor R1ᵀ = Z T with T k×k upper.
    let mut r1t = DenseMatrix::zeros(cols, k);
    for i in 0..k {
        for j in i..cols {
            r1t[(j, i)] = qr.qr[(i, j)];
        }
    }
    let mut tau2 = vec![0.0; k];
    for step in 0..k {
        tau2[step] = householder_in_place(&mut r1t, step, step);
        apply_householder_left(&mut r1t, step, step, tau2[step], step + 1);
    }

    // Solve Tᵀ w = c[..k] by forward substitution.
    let mut w = vec![0.0; cols];
    for i in 0..k {
        let mut s = c[i];
        for j in 0..i {
            s -= r1t[(j, i)] * w[j];
        }
        w[i] = s / r1t[(i, i)];
    }
    // z = Z w, with Z = H_0 H_1 ... H_{k-1} applied to [w; 0].
    for step in (0..k).rev() {
        apply_householder_vec(&r1t, step, step, tau2[step], &mut w);
    }
    let mut x = vec![0.0; cols];
    for (i, &p) in qr.perm.iter().enumerate() {
        x[p] = w[i];
    }
    x
}
