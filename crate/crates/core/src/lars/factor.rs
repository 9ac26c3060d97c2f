/// Cholesky factor `G = L Lᵀ` of the active Gram matrix, updated in place as
/// indices join (append) and cross (delete), so each event costs O(k²).
#[derive(Debug, Clone, Default)]
pub(crate) struct GramFactor {
    k: usize,
    /// Row-major k×k lower triangle.
    l: Vec<f64>,
}

/// Smallest accepted pivot, relative to the new diagonal entry.
const PIVOT_RTOL: f64 = 1e-10;

impl GramFactor {
    pub(crate) fn len(&self) -> usize {
        self.k
    }

    /// Appends an index whose Gram entries against the current ones are
    /// `cross` and whose own entry is `diag`. Returns false (leaving the
    /// factor unchanged) when the new column is numerically dependent.
    pub(crate) fn push(&mut self, cross: &[f64], diag: f64) -> bool {
        let k = self.k;
        debug_assert_eq!(cross.len(), k);
        let mut row = cross.to_vec();
        for i in 0..k {
            let li = &self.l[i * k..i * k + i];
            let s: f64 = li.iter().zip(&row[..i]).map(|(a, b)| a * b).sum();
            row[i] = (row[i] - s) / self.l[i * k + i];
        }
        let d2 = diag - row.iter().map(|v| v * v).sum::<f64>();
        if !(d2 > PIVOT_RTOL * diag) {
            return false;
        }
        let n = k + 1;
        let mut l = vec![0.0; n * n];
        for i in 0..k {
            l[i * n..i * n + i + 1].copy_from_slice(&self.l[i * k..i * k + i + 1]);
        }
        l[k * n..k * n + k].copy_from_slice(&row);
        l[k * n + k] = d2.sqrt();
        self.l = l;
        self.k = n;
        true
    }

    /// Deletes position `pos`, restoring triangularity with Givens rotations.
    pub(crate) fn remove(&mut self, pos: usize) {
        let k = self.k;
        let n = k - 1;
        // Drop row `pos`; the result is n×k with one superdiagonal per row
        // from `pos` on.
        let mut m: Vec<f64> = Vec::with_capacity(n * k);
        for i in (0..k).filter(|&i| i != pos) {
            m.extend_from_slice(&self.l[i * k..(i + 1) * k]);
        }
        for j in pos..n {
            let (a, b) = (m[j * k + j], m[j * k + j + 1]);
            let r = a.hypot(b);
            let (c, s) = if r == 0.0 { (1.0, 0.0) } else { (a / r, b / r) };
            for i in j..n {
                let (x, y) = (m[i * k + j], m[i * k + j + 1]);
                m[i * k + j] = c * x + s * y;
                m[i * k + j + 1] = -s * x + c * y;
            }
        }
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            l[i * n..i * n + i + 1].copy_from_slice(&m[i * k..i * k + i + 1]);
            // Keep a positive diagonal.
            if l[i * n + i] < 0.0 {
                for v in &mut l[i * n..i * n + i + 1] {
                    *v = -*v;
                }
            }
        }
        // Negating a row of L flips the matching column of Lᵀ only, so G is
        // unchanged.
        self.l = l;
        self.k = n;
    }

    pub(crate) fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let k = self.k;
        let mut x = rhs.to_vec();
        for i in 0..k {
            let s: f64 = (0..i).map(|j| self.l[i * k + j] * x[j]).sum();
            x[i] = (x[i] - s) / self.l[i * k + i];
        }
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|j| self.l[j * k + i] * x[j]).sum();
            x[i] = (x[i] - s) / self.l[i * k + i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gram(cols: &[Vec<f64>]) -> DenseMatrix {
        DenseMatrix::from_fn(cols.len(), cols.len(), |i, j| {
            cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum()
        })
    }

    fn build(cols: &[Vec<f64>]) -> GramFactor {
        let g = gram(cols);
        let mut f = GramFactor::default();
        for i in 0..cols.len() {
            let cross: Vec<f64> = (0..i).map(|j| g[(i, j)]).collect();
            assert!(f.push(&cross, g[(i, i)]));
        }
        f
    }

    #[test]
    fn updates_match_direct_solves() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut cols: Vec<Vec<f64>> = (0..8)
            .map(|_| (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let mut f = build(&cols);
        for pos in [3, 0, 5] {
            f.remove(pos);
            cols.remove(pos);
            let rhs: Vec<f64> = (0..cols.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x = f.solve(&rhs);
            let back = gram(&cols).mul_vec(&x);
            for (a, b) in back.iter().zip(&rhs) {
                assert!((a - b).abs() < 1e-10);
            }
        }
        assert_eq!(f.len(), 5);
    }

    #[test]
    fn dependent_column_rejected() {
        let cols = vec![vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0]];
        let mut f = build(&cols);
        // Sum of the two existing columns.
        let new = [1.0, 1.0, 2.0];
        let cross: Vec<f64> = cols
            .iter()
            .map(|c| c.iter().zip(&new).map(|(a, b)| a * b).sum())
            .collect();
        assert!(!f.push(&cross, 6.0));
        assert_eq!(f.len(), 2);
    }
}
