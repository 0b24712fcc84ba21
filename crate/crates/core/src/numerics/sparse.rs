use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Compressed sparse row operator of shape `rows × cols`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseOperator {
    rows: usize,
    cols: usize,
    offsets: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseOperator {
    /// Assembles from per-row `(column, value)` lists. Entries are sorted by
    /// column and duplicates summed.
    pub fn from_rows(cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::with_capacity(rows.iter().map(Vec::len).sum());
        let mut values = Vec::with_capacity(indices.capacity());
        offsets.push(0);
        for mut row in rows.iter().cloned() {
            row.sort_by_key(|&(j, _)| j);
            let start = indices.len();
            for (j, v) in row {
                if j >= cols {
                    return Err(Error::DimensionMismatch { expected: cols, got: j + 1 });
                }
                if indices.len() > start && *indices.last().unwrap() == j {
                    *values.last_mut().unwrap() += v;
                } else {
                    indices.push(j);
                    values.push(v);
                }
            }
            offsets.push(indices.len());
        }
        Ok(SparseOperator { rows: rows.len(), cols, offsets, indices, values })
    }

    /// Validates raw CSR arrays.
    pub fn from_csr(rows: usize, cols: usize, offsets: Vec<usize>, indices: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let invalid = |m: &str| Error::Parse(format!("invalid CSR arrays: {m}"));
        if offsets.len() != rows + 1 || offsets[0] != 0 || *offsets.last().unwrap() != indices.len() {
            return Err(invalid("offsets"));
        }
        if indices.len() != values.len() {
            return Err(invalid("index/value length"));
        }
        for i in 0..rows {
            if offsets[i] > offsets[i + 1] {
                return Err(invalid("offsets decrease"));
            }
            let r = &indices[offsets[i]..offsets[i + 1]];
            if r.iter().any(|&j| j >= cols) || r.windows(2).any(|w| w[0] >= w[1]) {
                return Err(invalid("column indices"));
            }
        }
        Ok(SparseOperator { rows, cols, offsets, indices, values })
    }

    pub fn identity(n: usize) -> Self {
        SparseOperator {
            rows: n,
            cols: n,
            offsets: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
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

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.offsets[i]..self.offsets[i + 1];
        (&self.indices[r.clone()], &self.values[r])
    }

    pub fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        let (idx, val) = self.row(i);
        idx.iter().zip(val).map(|(&j, &v)| v * x[j]).sum()
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).1.iter().sum()
    }

    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, got: x.len() });
        }
        Ok((0..self.rows).map(|i| self.row_dot(i, x)).collect())
    }
}
