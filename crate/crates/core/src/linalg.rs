//! Small dense-matrix kernel for the labeling systems of the solver.
//!
//! The matrices here are (N+1)×(N+1) labeling matrices and their inverses;
//! N is the operator dimension, so plain row-major storage with partial
//! pivoting is all that is needed.

/// Row-major dense square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "row {i} has wrong length");
            m.row_mut(i).copy_from_slice(row);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.n..(i + 1) * self.n]
    }

    /// y = M v.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn mul_mat(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self[(i, j)].abs()).sum())
            .fold(0.0, f64::max)
    }

    /// Maximum absolute entry of (self - I).
    pub fn max_deviation_from_identity(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            for j in 0..self.n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self[(i, j)] - target).abs());
            }
        }
        worst
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    ///
    /// Returns `None` when a pivot column is exactly zero or a non-finite
    /// value appears, i.e. the matrix is singular to working precision.
    pub fn invert(&self) -> Option<DenseMatrix> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&r, &s| a[(r, col)].abs().total_cmp(&a[(s, col)].abs()))?;
            let pivot = a[(pivot_row, col)];
            if pivot == 0.0 || !pivot.is_finite() {
                return None;
            }
            if pivot_row != col {
                a.swap_rows(pivot_row, col);
                inv.swap_rows(pivot_row, col);
            }
            let inv_pivot = 1.0 / pivot;
            for j in 0..n {
                a[(col, j)] *= inv_pivot;
                inv[(col, j)] *= inv_pivot;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a[(r, col)];
                if factor == 0.0 {
                    continue;
                }
                for j in 0..n {
                    a[(r, j)] -= factor * a[(col, j)];
                    inv[(r, j)] -= factor * inv[(col, j)];
                }
            }
        }
        if inv.data.iter().all(|x| x.is_finite()) {
            Some(inv)
        } else {
            None
        }
    }

    fn swap_rows(&mut self, r: usize, s: usize) {
        if r == s {
            return;
        }
        for j in 0..self.n {
            self.data.swap(r * self.n + j, s * self.n + j);
        }
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}
