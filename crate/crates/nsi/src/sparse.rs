//! Compressed sparse-column matrix with exactly the kernels the solver
//! needs: `XXᵀ`, `XY`, `XᵀW`, `X L Xᵀ`, column selection and column
//! normalization. All products accumulate in a fixed order, so results are
//! bitwise reproducible.

use ndarray::Array2;

/// Column-major sparse matrix. Row indices are strictly increasing within
/// each column and explicit zeros are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    col_ptr: Vec<usize>,
    rows: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from coordinate triplets `(row, col, value)`. Duplicate
    /// positions are summed; entries that end up exactly zero are dropped.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Self {
        triplets.retain(|&(_, _, v)| v != 0.0);
        triplets.sort_unstable_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));
        let mut col_ptr = vec![0usize; ncols + 1];
        let mut rows: Vec<usize> = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut cur_col = 0usize;
        for (r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            while cur_col < c {
                cur_col += 1;
                col_ptr[cur_col] = rows.len();
            }
            if rows.len() > col_ptr[cur_col] && *rows.last().unwrap() == r {
                *vals.last_mut().unwrap() += v;
            } else {
                rows.push(r);
                vals.push(v);
            }
        }
        while cur_col < ncols {
            cur_col += 1;
            col_ptr[cur_col] = rows.len();
        }
        let mut m = SparseMatrix {
            nrows,
            ncols,
            col_ptr,
            rows,
            vals,
        };
        m.drop_zeros();
        m
    }

    /// Dense to sparse, keeping every nonzero entry.
    pub fn from_dense(a: &Array2<f64>) -> Self {
        let mut triplets = Vec::new();
        for ((i, j), &v) in a.indexed_iter() {
            if v != 0.0 {
                triplets.push((i, j, v));
            }
        }
        Self::from_triplets(a.nrows(), a.ncols(), triplets)
    }

    fn drop_zeros(&mut self) {
        if self.vals.iter().all(|&v| v != 0.0) {
            return;
        }
        let mut col_ptr = vec![0usize; self.ncols + 1];
        let mut rows = Vec::new();
        let mut vals = Vec::new();
        for j in 0..self.ncols {
            for k in self.col_ptr[j]..self.col_ptr[j + 1] {
                if self.vals[k] != 0.0 {
                    rows.push(self.rows[k]);
                    vals.push(self.vals[k]);
                }
            }
            col_ptr[j + 1] = rows.len();
        }
        self.col_ptr = col_ptr;
        self.rows = rows;
        self.vals = vals;
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.rows.len()
    }

    /// Row indices and values of column `j`.
    pub fn col(&self, j: usize) -> (&[usize], &[f64]) {
        let lo = self.col_ptr[j];
        let hi = self.col_ptr[j + 1];
        (&self.rows[lo..hi], &self.vals[lo..hi])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.ncols).flat_map(move |j| {
            let (rows, vals) = self.col(j);
            rows.iter().zip(vals).map(move |(&r, &v)| (r, j, v))
        })
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut a = Array2::zeros((self.nrows, self.ncols));
        for (r, c, v) in self.iter() {
            a[[r, c]] = v;
        }
        a
    }

    /// `X Xᵀ` as a dense symmetric matrix.
    pub fn xxt(&self) -> Array2<f64> {
        let m = self.nrows;
        let mut g = Array2::<f64>::zeros((m, m));
        for j in 0..self.ncols {
            let (rows, vals) = self.col(j);
            for (&ra, &va) in rows.iter().zip(vals) {
                for (&rb, &vb) in rows.iter().zip(vals) {
                    g[[ra, rb]] += va * vb;
                }
            }
        }
        g
    }

    /// `X Y` where `Y` is dense `(ncols, c)`.
    pub fn xy(&self, y: &Array2<f64>) -> Array2<f64> {
        assert_eq!(y.nrows(), self.ncols);
        let mut out = Array2::<f64>::zeros((self.nrows, y.ncols()));
        for j in 0..self.ncols {
            let (rows, vals) = self.col(j);
            for (&r, &v) in rows.iter().zip(vals) {
                for k in 0..y.ncols() {
                    out[[r, k]] += v * y[[j, k]];
                }
            }
        }
        out
    }

    /// `Xᵀ W` where `W` is dense `(nrows, c)`.
    pub fn xt_dot(&self, w: &Array2<f64>) -> Array2<f64> {
        assert_eq!(w.nrows(), self.nrows);
        let mut out = Array2::<f64>::zeros((self.ncols, w.ncols()));
        for j in 0..self.ncols {
            let (rows, vals) = self.col(j);
            for k in 0..w.ncols() {
                let mut s = 0.0;
                for (&r, &v) in rows.iter().zip(vals) {
                    s += v * w[[r, k]];
                }
                out[[j, k]] = s;
            }
        }
        out
    }

    /// `X L Xᵀ` for dense symmetric `L` of size `(ncols, ncols)`,
    /// symmetrized to kill floating-point drift.
    pub fn x_l_xt(&self, l: &Array2<f64>) -> Array2<f64> {
        assert_eq!(l.nrows(), self.ncols);
        assert_eq!(l.ncols(), self.ncols);
        let (m, n) = (self.nrows, self.ncols);
        // T = X L, row-wise accumulation over the sparse columns of X.
        let mut t = Array2::<f64>::zeros((m, n));
        for j in 0..n {
            let (rows, vals) = self.col(j);
            for (&r, &v) in rows.iter().zip(vals) {
                for k in 0..n {
                    t[[r, k]] += v * l[[j, k]];
                }
            }
        }
        // S = T Xᵀ
        let mut s = Array2::<f64>::zeros((m, m));
        for j in 0..n {
            let (rows, vals) = self.col(j);
            for (&r, &v) in rows.iter().zip(vals) {
                for i in 0..m {
                    s[[i, r]] += t[[i, j]] * v;
                }
            }
        }
        let st = s.t().to_owned();
        (&s + &st) * 0.5
    }

    /// Scales every nonzero column to unit Euclidean norm.
    pub fn l2_normalize_columns(&mut self) {
        for j in 0..self.ncols {
            let lo = self.col_ptr[j];
            let hi = self.col_ptr[j + 1];
            let norm = self.vals[lo..hi]
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt();
            if norm > 0.0 {
                for v in &mut self.vals[lo..hi] {
                    *v /= norm;
                }
            }
        }
    }

    /// New matrix keeping the given columns, in the given order.
    pub fn select_cols(&self, cols: &[usize]) -> SparseMatrix {
        let mut col_ptr = vec![0usize; cols.len() + 1];
        let mut rows = Vec::new();
        let mut vals = Vec::new();
        for (new_j, &j) in cols.iter().enumerate() {
            let (r, v) = self.col(j);
            rows.extend_from_slice(r);
            vals.extend_from_slice(v);
            col_ptr[new_j + 1] = rows.len();
        }
        SparseMatrix {
            nrows: self.nrows,
            ncols: cols.len(),
            col_ptr,
            rows,
            vals,
        }
    }

    /// `xᵀ w_k` for one column of the matrix against each column of `w`.
    pub fn col_scores(&self, j: usize, w: &Array2<f64>) -> Vec<f64> {
        let (rows, vals) = self.col(j);
        (0..w.ncols())
            .map(|k| rows.iter().zip(vals).map(|(&r, &v)| v * w[[r, k]]).sum())
            .collect()
    }
}
