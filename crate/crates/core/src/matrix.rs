use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Real symmetric operator acting on dense vectors.
pub trait SymmetricOperator {
    fn dim(&self) -> usize;

    /// Writes `H x` into `y`. Both slices have length `dim()`.
    fn apply_into(&self, x: &[f64], y: &mut [f64]);
}

/// Real symmetric sparse matrix stored as its diagonal plus the strict upper
/// triangle in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetric {
    diagonal: Vec<f64>,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    values: Vec<f64>,
}

/// Strict-upper-triangle rows `first .. first + row_ptr.len() - 1` of a
/// matrix under assembly.
#[derive(Debug, Clone, Default)]
pub struct RowBlock {
    pub first: usize,
    pub diagonal: Vec<f64>,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<u32>,
    pub values: Vec<f64>,
}

impl RowBlock {
    pub fn new(first: usize) -> Self {
        Self {
            first,
            row_ptr: vec![0],
            ..Self::default()
        }
    }

    /// Appends one row. `entries` must have columns strictly greater than the
    /// row index, sorted ascending.
    pub fn push_row(&mut self, diagonal: f64, entries: &[(u32, f64)]) {
        self.diagonal.push(diagonal);
        for &(c, v) in entries {
            self.cols.push(c);
            self.values.push(v);
        }
        self.row_ptr.push(self.cols.len());
    }

    pub fn rows(&self) -> usize {
        self.diagonal.len()
    }
}

impl SparseSymmetric {
    pub fn from_diagonal(diagonal: Vec<f64>) -> Self {
        let n = diagonal.len();
        Self {
            diagonal,
            row_ptr: vec![0; n + 1],
            cols: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Concatenates consecutive row blocks covering `0..dim`.
    pub fn from_row_blocks(dim: usize, blocks: Vec<RowBlock>) -> Result<Self> {
        let mut diagonal = Vec::with_capacity(dim);
        let mut row_ptr = Vec::with_capacity(dim + 1);
        row_ptr.push(0);
        let nnz = blocks.iter().map(|b| b.cols.len()).sum();
        let mut cols = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        for block in blocks {
            if block.first != diagonal.len() {
                return Err(Error::DimensionMismatch {
                    expected: diagonal.len(),
                    found: block.first,
                });
            }
            let offset = cols.len();
            diagonal.extend_from_slice(&block.diagonal);
            row_ptr.extend(block.row_ptr[1..].iter().map(|p| p + offset));
            cols.extend_from_slice(&block.cols);
            values.extend_from_slice(&block.values);
        }
        if diagonal.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: diagonal.len(),
            });
        }
        Self::from_parts(diagonal, row_ptr, cols, values)
    }

    /// Builds from raw compressed-row arrays, checking the structure.
    pub fn from_parts(
        diagonal: Vec<f64>,
        row_ptr: Vec<usize>,
        cols: Vec<u32>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let n = diagonal.len();
        if u32::try_from(n).is_err() {
            return Err(Error::MatrixTooLarge { dim: n as u64 });
        }
        if row_ptr.len() != n + 1 || row_ptr[0] != 0 || row_ptr[n] != cols.len() {
            return Err(Error::InvalidParameter("malformed row pointer".into()));
        }
        if cols.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: cols.len(),
                found: values.len(),
            });
        }
        for row in 0..n {
            let (lo, hi) = (row_ptr[row], row_ptr[row + 1]);
            if lo > hi {
                return Err(Error::InvalidParameter("row pointer decreases".into()));
            }
            let mut prev = row as u32;
            for &c in &cols[lo..hi] {
                if c <= prev || c as usize >= n {
                    return Err(Error::InvalidParameter(alloc::format!(
                        "row {row} has out-of-order or non-upper column {c}"
                    )));
                }
                prev = c;
            }
        }
        Ok(Self {
            diagonal,
            row_ptr,
            cols,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// Number of stored strict-upper entries.
    pub fn off_diagonal_len(&self) -> usize {
        self.cols.len()
    }

    /// `(row, col, value)` with `row < col`, in row-major order.
    pub fn off_diagonal(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim()).flat_map(move |row| {
            let (lo, hi) = (self.row_ptr[row], self.row_ptr[row + 1]);
            self.cols[lo..hi]
                .iter()
                .zip(&self.values[lo..hi])
                .map(move |(&c, &v)| (row, c as usize, v))
        })
    }

    pub fn row(&self, row: usize) -> (&[u32], &[f64]) {
        let (lo, hi) = (self.row_ptr[row], self.row_ptr[row + 1]);
        (&self.cols[lo..hi], &self.values[lo..hi])
    }

    pub fn trace(&self) -> f64 {
        self.diagonal.iter().sum()
    }

    /// Maximum absolute column sum, exact.
    pub fn one_norm(&self) -> f64 {
        let mut sums: Vec<f64> = self.diagonal.iter().map(|d| d.abs()).collect();
        for (r, c, v) in self.off_diagonal() {
            sums[r] += v.abs();
            sums[c] += v.abs();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// `H x`, expanding both symmetric halves row by row in a fixed order.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.dim()];
        self.try_apply_into(x, &mut y)?;
        Ok(y)
    }

    pub fn try_apply_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        for len in [x.len(), y.len()] {
            if len != self.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.dim(),
                    found: len,
                });
            }
        }
        for (yi, (d, xi)) in y.iter_mut().zip(self.diagonal.iter().zip(x)) {
            *yi = d * xi;
        }
        for row in 0..self.dim() {
            let (lo, hi) = (self.row_ptr[row], self.row_ptr[row + 1]);
            let xr = x[row];
            let mut acc = 0.0;
            for (&c, &v) in self.cols[lo..hi].iter().zip(&self.values[lo..hi]) {
                let c = c as usize;
                acc += v * x[c];
                y[c] += v * xr;
            }
            y[row] += acc;
        }
        Ok(())
    }

    /// Full row-major copy.
    pub fn to_dense(&self) -> DenseSymmetric {
        let n = self.dim();
        let mut data = vec![0.0; n * n];
        for (i, d) in self.diagonal.iter().enumerate() {
            data[i * n + i] = *d;
        }
        for (r, c, v) in self.off_diagonal() {
            data[r * n + c] = v;
            data[c * n + r] = v;
        }
        DenseSymmetric { dim: n, data }
    }
}

impl SymmetricOperator for SparseSymmetric {
    fn dim(&self) -> usize {
        self.diagonal.len()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.try_apply_into(x, y)
            .expect("operator applied to a vector of the wrong length");
    }
}

/// Dense real symmetric matrix, row-major, both halves stored.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSymmetric {
    dim: usize,
    data: Vec<f64>,
}

impl DenseSymmetric {
    /// Builds from the lower triangle, mirroring it into the upper half.
    pub fn from_lower(dim: usize, mut lower: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..=i {
                let v = lower(i, j);
                data[i * dim + j] = v;
                data[j * dim + i] = v;
            }
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.dim + col]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

impl SymmetricOperator for DenseSymmetric {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        for (row, yi) in self.data.chunks_exact(self.dim).zip(y.iter_mut()) {
            *yi = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SparseSymmetric {
        // [[1, 2, 0], [2, 3, -1], [0, -1, 5]]
        SparseSymmetric::from_parts(
            vec![1.0, 3.0, 5.0],
            vec![0, 1, 2, 2],
            vec![1, 2],
            vec![2.0, -1.0],
        )
        .unwrap()
    }

    #[test]
    fn apply_expands_both_halves() {
        let m = sample();
        assert_eq!(m.apply(&[1.0, 0.0, 0.0]).unwrap(), vec![1.0, 2.0, 0.0]);
        assert_eq!(m.apply(&[0.0, 1.0, 0.0]).unwrap(), vec![2.0, 3.0, -1.0]);
        assert_eq!(m.apply(&[1.0, 1.0, 1.0]).unwrap(), vec![3.0, 4.0, 4.0]);
        assert!(m.apply(&[1.0]).is_err());
    }

    #[test]
    fn dense_copy_and_norms() {
        let m = sample();
        let d = m.to_dense();
        assert!(d.is_symmetric());
        assert_eq!(d.get(0, 1), 2.0);
        assert_eq!(d.get(2, 1), -1.0);
        assert_eq!(m.trace(), 9.0);
        assert_eq!(m.one_norm(), 6.0);
        let mut y = [0.0; 3];
        d.apply_into(&[1.0, 1.0, 1.0], &mut y);
        assert_eq!(y, [3.0, 4.0, 4.0]);
    }

    #[test]
    fn rejects_lower_triangle_entries() {
        assert!(SparseSymmetric::from_parts(vec![0.0; 2], vec![0, 0, 1], vec![0], vec![1.0]).is_err());
    }

    #[test]
    fn blocks_concatenate() {
        let mut a = RowBlock::new(0);
        a.push_row(1.0, &[(1, 2.0)]);
        let mut b = RowBlock::new(1);
        b.push_row(3.0, &[(2, -1.0)]);
        b.push_row(5.0, &[]);
        let m = SparseSymmetric::from_row_blocks(3, vec![a, b]).unwrap();
        assert_eq!(m, sample());
        assert!(SparseSymmetric::from_row_blocks(4, vec![RowBlock::new(0)]).is_err());
    }
}
