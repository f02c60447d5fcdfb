use faer::{Mat, Side};
use tbh_core::{DenseSymmetric, SparseSymmetric};

use super::SolverError;

fn to_faer(matrix: &SparseSymmetric) -> Mat<f64> {
    let n = matrix.dim();
    let mut a = Mat::<f64>::zeros(n, n);
    for (i, &d) in matrix.diagonal().iter().enumerate() {
        a[(i, i)] = d;
    }
    // lower triangle only; the solver reads one side
    for (r, c, v) in matrix.off_diagonal() {
        a[(c, r)] = v;
    }
    a
}

fn eigen(a: Mat<f64>, want_vectors: bool) -> Result<(Vec<f64>, Option<Vec<f64>>), SolverError> {
    let n = a.nrows();
    let fail = |e| SolverError::Breakdown(format!("dense eigensolver: {e:?}"));
    if !want_vectors {
        let mut values = a.self_adjoint_eigenvalues(Side::Lower).map_err(fail)?;
        values.sort_by(f64::total_cmp);
        return Ok((values, None));
    }
    let eig = a.self_adjoint_eigen(Side::Lower).map_err(fail)?;
    let values: Vec<f64> = (0..n).map(|i| eig.S()[i]).collect();
    let u = eig.U();
    let mut vectors = Vec::with_capacity(n * n);
    for j in 0..n {
        vectors.extend(u.col(j).iter().copied());
    }
    Ok((values, Some(vectors)))
}

/// All eigenvalues ascending and, if asked, the eigenvectors one after
/// another.
pub fn diagonalize(matrix: &SparseSymmetric, want_vectors: bool) -> Result<(Vec<f64>, Option<Vec<f64>>), SolverError> {
    eigen(to_faer(matrix), want_vectors)
}

/// Eigenvalues of a dense symmetric matrix, ascending.
pub fn dense_eigenvalues(matrix: &DenseSymmetric) -> Result<Vec<f64>, SolverError> {
    let n = matrix.dim();
    let a = Mat::from_fn(n, n, |i, j| matrix.get(i, j));
    Ok(eigen(a, false)?.0)
}

/// Eigenpairs of a dense symmetric matrix, vectors one after another.
pub fn dense_eigen(matrix: &DenseSymmetric) -> Result<(Vec<f64>, Vec<f64>), SolverError> {
    let n = matrix.dim();
    let a = Mat::from_fn(n, n, |i, j| matrix.get(i, j));
    let (values, vectors) = eigen(a, true)?;
    Ok((values, vectors.unwrap_or_default()))
}
