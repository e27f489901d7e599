use super::DenseMatrix;
use crate::{Error, Result};

/// Compressed-row sparse matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Assembles from (row, col, value) triplets; duplicates are summed,
    /// exact zeros after summation are kept (harmless).
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        for &(i, j, v) in triplets {
            if i >= rows || j >= cols {
                return Err(Error::Dimension(format!(
                    "triplet ({i},{j}) outside {rows}x{cols}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidArgument("non-finite sparse entry".into()));
            }
        }
        let mut per_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rows];
        for &(i, j, v) in triplets {
            per_row[i].push((j, v));
        }
        let mut indptr = Vec::with_capacity(rows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in &mut per_row {
            row.sort_by_key(|&(j, _)| j);
            let mut k = 0;
            while k < row.len() {
                let j = row[k].0;
                let mut v = 0.0;
                while k < row.len() && row[k].0 == j {
                    v += row[k].1;
                    k += 1;
                }
                indices.push(j);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Ok(Self {
            rows,
            cols,
            indptr,
            indices,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        let triplets: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::from_triplets(n, n, &triplets).unwrap()
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

    pub fn row_entries(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.indptr[i];
        let hi = self.indptr[i + 1];
        self.indices[lo..hi]
            .iter()
            .copied()
            .zip(self.values[lo..hi].iter().copied())
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "sparse matvec dimension mismatch");
        (0..self.rows)
            .map(|i| self.row_entries(i).map(|(j, a)| a * v[j]).sum())
            .collect()
    }

    pub fn tr_matvec(&self, w: &[f64]) -> Vec<f64> {
        assert_eq!(w.len(), self.rows, "sparse tr_matvec dimension mismatch");
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let wi = w[i];
            if wi != 0.0 {
                for (j, a) in self.row_entries(i) {
                    out[j] += a * wi;
                }
            }
        }
        out
    }

    /// Returns `self + c·I` (square matrices only).
    pub fn shifted(&self, c: f64) -> Result<SparseMatrix> {
        if self.rows != self.cols {
            return Err(Error::Dimension("shift requires a square matrix".into()));
        }
        let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(self.nnz() + self.rows);
        for i in 0..self.rows {
            for (j, v) in self.row_entries(i) {
                triplets.push((i, j, v));
            }
            triplets.push((i, i, c));
        }
        Self::from_triplets(self.rows, self.cols, &triplets)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for (j, v) in self.row_entries(i) {
                m.set(i, j, m.get(i, j) + v);
            }
        }
        m
    }
}
