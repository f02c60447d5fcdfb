//! Sparse symmetric-indefinite factorization of `H - sigma I`.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::perm::PermRef;
use faer::sparse::linalg::cholesky::{
    factorize_symbolic_cholesky, CholeskySymbolicParams, IntranodeLbltRef, SymbolicCholesky,
    SymmetricOrdering,
};
use faer::sparse::linalg::SupernodalThreshold;
use faer::sparse::{SparseColMat, SymbolicSparseColMat};
use faer::{Conj, MatMut, Par, Side};
use tbh_core::SparseSymmetric;

use super::lanczos::norm;
use super::SolverError;

/// `(H - sigma I)^{-1}` with iterative refinement against the exact matrix.
pub struct ShiftInvert<'h> {
    matrix: &'h SparseSymmetric,
    sigma: f64,
    symbolic: SymbolicCholesky<usize>,
    values: Vec<f64>,
    subdiag: Vec<f64>,
    fwd: Vec<usize>,
    inv: Vec<usize>,
    scratch: MemBuffer,
    norm: f64,
}

/// Lower triangle of `H - sigma I` in compressed-column form. Column `c` of
/// the lower triangle is row `c` of the stored upper triangle.
fn shifted_lower(matrix: &SparseSymmetric, sigma: f64) -> SparseColMat<usize, f64> {
    let n = matrix.dim();
    let nnz = n + matrix.off_diagonal_len();
    let mut col_ptr = Vec::with_capacity(n + 1);
    let mut row_idx = Vec::with_capacity(nnz);
    let mut values = Vec::with_capacity(nnz);
    col_ptr.push(0);
    for c in 0..n {
        row_idx.push(c);
        values.push(matrix.diagonal()[c] - sigma);
        let (cols, vals) = matrix.row(c);
        row_idx.extend(cols.iter().map(|&r| r as usize));
        values.extend_from_slice(vals);
        col_ptr.push(row_idx.len());
    }
    let symbolic = SymbolicSparseColMat::new_checked(n, n, col_ptr, None, row_idx);
    SparseColMat::new(symbolic, values)
}

impl<'h> ShiftInvert<'h> {
    pub fn new(matrix: &'h SparseSymmetric, sigma: f64) -> Result<Self, SolverError> {
        let n = matrix.dim();
        let a = shifted_lower(matrix, sigma);
        let symbolic = factorize_symbolic_cholesky(
            a.symbolic(),
            Side::Lower,
            SymmetricOrdering::Amd,
            CholeskySymbolicParams {
                // the simplicial path has no pivoting
                supernodal_flop_ratio_threshold: SupernodalThreshold::FORCE_SUPERNODAL,
                ..Default::default()
            },
        )
        .map_err(|e| SolverError::Factorization {
            shift: sigma,
            reason: format!("{e:?}"),
        })?;
        let par = Par::Seq;
        let mut values = vec![0.0; symbolic.len_val()];
        let mut subdiag = vec![0.0; n];
        let mut fwd = vec![0; n];
        let mut inv = vec![0; n];
        {
            let mut buf = MemBuffer::try_new(
                symbolic.factorize_numeric_intranode_lblt_scratch::<f64>(par, Default::default()),
            )
            .map_err(|_| SolverError::OutOfMemory { dim: n })?;
            symbolic.factorize_numeric_intranode_lblt(
                &mut values,
                &mut subdiag,
                &mut fwd,
                &mut inv,
                a.as_ref(),
                Side::Lower,
                par,
                MemStack::new(&mut buf),
                Default::default(),
            );
        }
        if values.iter().chain(&subdiag).any(|v| !v.is_finite()) {
            return Err(SolverError::Factorization {
                shift: sigma,
                reason: "non-finite factor entries".into(),
            });
        }
        let scratch = MemBuffer::try_new(symbolic.solve_in_place_scratch::<f64>(1, par))
            .map_err(|_| SolverError::OutOfMemory { dim: n })?;
        log::debug!(
            "shift-invert at {sigma}: dim {n}, factor entries {}",
            symbolic.len_val()
        );
        Ok(Self {
            matrix,
            sigma,
            symbolic,
            values,
            subdiag,
            fwd,
            inv,
            scratch,
            norm: matrix.one_norm() + sigma.abs(),
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Number of stored factor entries.
    pub fn factor_len(&self) -> usize {
        self.values.len()
    }

    fn raw_solve(&mut self, x: &mut [f64]) {
        let n = x.len();
        let perm = PermRef::new_checked(&self.fwd, &self.inv, n);
        let lblt = IntranodeLbltRef::new(&self.symbolic, &self.values, &self.subdiag, perm);
        lblt.solve_in_place_with_conj(
            Conj::No,
            MatMut::from_column_major_slice_mut(x, n, 1),
            Par::Seq,
            MemStack::new(&mut self.scratch),
        );
    }

    /// `r = b - (H - sigma) x`.
    fn residual(&self, b: &[f64], x: &[f64], r: &mut [f64]) {
        self.matrix
            .try_apply_into(x, r)
            .expect("vector length matches the factorized matrix");
        for ((ri, bi), xi) in r.iter_mut().zip(b).zip(x) {
            *ri = bi - (*ri - self.sigma * xi);
        }
    }

    /// Solves `(H - sigma) x = b`, refining up to two times. Returns the
    /// normwise backward error.
    pub fn solve(&mut self, b: &[f64], x: &mut [f64]) -> Result<f64, SolverError> {
        x.copy_from_slice(b);
        self.raw_solve(x);
        let mut r = vec![0.0; b.len()];
        let mut eta = f64::INFINITY;
        for step in 0..3 {
            self.residual(b, x, &mut r);
            eta = norm(&r) / (self.norm * norm(x) + norm(b));
            if !eta.is_finite() {
                return Err(SolverError::Factorization {
                    shift: self.sigma,
                    reason: "solve produced non-finite values".into(),
                });
            }
            if eta <= 1e-15 || step == 2 {
                break;
            }
            self.raw_solve(&mut r);
            x.iter_mut().zip(&r).for_each(|(xi, di)| *xi += di);
        }
        Ok(eta)
    }
}
