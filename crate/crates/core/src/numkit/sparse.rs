use std::collections::BTreeMap;

use super::{NumError, Vector};

/// Compressed-row sparse matrix built from unique coordinate triples.
///
/// Explicit zeros are kept. Transposed products scatter over the rows, so
/// `Aᵀ` is never materialized.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn from_triplets<I>(rows: usize, cols: usize, triplets: I) -> Result<Self, NumError>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut by_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rows];
        for (r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(NumError::IndexOutOfRange {
                    row: r,
                    col: c,
                    rows,
                    cols,
                });
            }
            if !v.is_finite() {
                return Err(NumError::NonFinite);
            }
            by_row[r].push((c, v));
        }

        let mut row_ptr = Vec::with_capacity(rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for (r, entries) in by_row.iter_mut().enumerate() {
            entries.sort_by_key(|&(c, _)| c);
            if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(NumError::DuplicateEntry { row: r, col: w[0].0 });
            }
            for &(c, v) in entries.iter() {
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }

        Ok(SparseMatrix {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        SparseMatrix {
            rows: n,
            cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            cols,
            row_ptr: vec![0; rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    /// `A x`, or `Aᵀ x` when `transpose` is set.
    pub fn apply(&self, x: &[f64], transpose: bool) -> Result<Vector, NumError> {
        let (inner, outer) = if transpose {
            (self.rows, self.cols)
        } else {
            (self.cols, self.rows)
        };
        if x.len() != inner {
            return Err(NumError::Dimension {
                expected: inner,
                found: x.len(),
            });
        }
        let mut out = Vector::zeros(outer);
        if transpose {
            self.mul_transpose_into(x, &mut out);
        } else {
            self.mul_into(x, &mut out);
        }
        Ok(out)
    }

    /// `out = A x`. Panics on a length mismatch.
    pub fn mul_into(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(out.len(), self.rows);
        for (r, o) in out.iter_mut().enumerate() {
            let span = self.row_ptr[r]..self.row_ptr[r + 1];
            *o = self.col_idx[span.clone()]
                .iter()
                .zip(&self.values[span])
                .map(|(&c, v)| v * x[c])
                .sum();
        }
    }

    /// `out = Aᵀ x`. Panics on a length mismatch.
    pub fn mul_transpose_into(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.rows);
        assert_eq!(out.len(), self.cols);
        out.iter_mut().for_each(|o| *o = 0.0);
        self.mul_transpose_add(x, out);
    }

    /// `out += Aᵀ x`.
    pub fn mul_transpose_add(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.rows);
        assert_eq!(out.len(), self.cols);
        for (r, &xr) in x.iter().enumerate() {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                out[self.col_idx[k]] += self.values[k] * xr;
            }
        }
    }

    /// `c·A`
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    /// `AᵀA`, assembled as a sum of row outer products.
    pub fn gram(&self) -> Self {
        let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for r in 0..self.rows {
            let entries: Vec<(usize, f64)> = self.row(r).collect();
            for &(i, vi) in &entries {
                for &(j, vj) in &entries {
                    *acc.entry((i, j)).or_insert(0.0) += vi * vj;
                }
            }
        }
        Self::from_triplets(self.cols, self.cols, acc.into_iter().map(|((i, j), v)| (i, j, v)))
            .expect("gram entries are unique and in range")
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.cols]; self.rows];
        for (r, c, v) in self.triplets() {
            dense[r][c] = v;
        }
        dense
    }
}
