//! Full, interior and extremal eigensolvers for [`SparseSymmetric`] matrices.
//!
//! Full spectra come from a dense copy. Interior pairs use thick-restart
//! Lanczos on `(H - sigma)^{-1}` with a sparse symmetric-indefinite
//! factorization. Extremal energies use Lanczos on `H` itself. Every
//! returned eigenvector passes an independent residual check against `H`.

mod dense;
mod lanczos;
mod shift_invert;

use tbh_core::{EigenVectors, SparseSymmetric, Spectrum, SpectrumKind, SpectrumNote};

pub use dense::{dense_eigen, dense_eigenvalues};
pub use lanczos::{Lanczos, RitzPairs, Tolerance, Which};
pub use shift_invert::ShiftInvert;

/// Below this dimension every solver works on a dense copy.
const SMALL_DIM: usize = 1000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("dimension {dim} exceeds the dense cap {cap}; use an interior solve")]
    DenseCapExceeded { dim: usize, cap: usize },
    #[error("{converged} of {wanted} pairs converged after {operations} operator applications")]
    NotConverged {
        converged: usize,
        wanted: usize,
        operations: usize,
    },
    #[error("factorization at shift {shift} failed ({reason}); try a slightly different target")]
    Factorization { shift: f64, reason: String },
    #[error("pair {index} has residual {residual:e} above the bound {bound:e}")]
    Residual { index: usize, residual: f64, bound: f64 },
    #[error("out of memory for dimension {dim}")]
    OutOfMemory { dim: usize },
    #[error("numerical breakdown: {0}")]
    Breakdown(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Largest dimension diagonalized densely.
    pub dense_cap: usize,
    /// Residual bound relative to `max(1, ||H||_1)`.
    pub residual_tol: f64,
    /// Interior operator applications allowed per requested pair.
    pub budget_per_pair: usize,
    /// Matrix-vector products allowed for extremal energies.
    pub extremal_budget: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dense_cap: 50_000,
            residual_tol: 1e-10,
            budget_per_pair: 50,
            extremal_budget: 10_000,
            seed: 0,
        }
    }
}

/// Largest `||H v - e v||_2` over the given pairs, with its index.
pub fn max_residual(matrix: &SparseSymmetric, energies: &[f64], vectors: &EigenVectors) -> (usize, f64) {
    let mut hv = vec![0.0; matrix.dim()];
    let mut worst = (0, 0.0);
    for (i, (v, e)) in vectors.iter().zip(energies).enumerate() {
        matrix
            .try_apply_into(v, &mut hv)
            .expect("eigenvector length matches the matrix");
        let r = hv.iter().zip(v).map(|(a, b)| (a - e * b).powi(2)).sum::<f64>().sqrt();
        if r > worst.1 || r.is_nan() {
            worst = (i, r);
        }
    }
    worst
}

fn residual_scale(matrix: &SparseSymmetric) -> f64 {
    matrix.one_norm().max(1.0)
}

fn check_residuals(
    matrix: &SparseSymmetric,
    energies: &[f64],
    vectors: &EigenVectors,
    tol: f64,
) -> Result<(), SolverError> {
    let bound = tol * residual_scale(matrix);
    let (index, residual) = max_residual(matrix, energies, vectors);
    if residual.is_nan() || residual > bound {
        return Err(SolverError::Residual { index, residual, bound });
    }
    Ok(())
}

/// Every eigenvalue, ascending, from a dense copy of `matrix`.
pub fn full_spectrum(matrix: &SparseSymmetric, want_vectors: bool, config: &SolverConfig) -> Result<Spectrum, SolverError> {
    let n = matrix.dim();
    if n > config.dense_cap {
        return Err(SolverError::DenseCapExceeded { dim: n, cap: config.dense_cap });
    }
    let (energies, vectors) = if matrix.off_diagonal_len() == 0 {
        diagonal_pairs(matrix.diagonal(), want_vectors)
    } else {
        dense::diagonalize(matrix, want_vectors)?
    };
    let vectors = vectors
        .map(|v| EigenVectors::new(n, v))
        .transpose()
        .map_err(|e| SolverError::Breakdown(e.to_string()))?;
    if let Some(v) = &vectors {
        check_residuals(matrix, &energies, v, config.residual_tol)?;
    }
    Spectrum::new(energies, vectors, SpectrumKind::Full, config.residual_tol)
        .map_err(|e| SolverError::Breakdown(e.to_string()))
}

/// Sorted diagonal and, if asked, the matching basis vectors. Exact even
/// where levels are degenerate.
fn diagonal_pairs(d: &[f64], want_vectors: bool) -> (Vec<f64>, Option<Vec<f64>>) {
    let n = d.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
    let vectors = want_vectors.then(|| {
        let mut v = vec![0.0; n * n];
        for (slot, &i) in order.iter().enumerate() {
            v[slot * n + i] = 1.0;
        }
        v
    });
    (order.iter().map(|&i| d[i]).collect(), vectors)
}

/// `(E_min, E_max)`.
pub fn extremal_energies(matrix: &SparseSymmetric, config: &SolverConfig) -> Result<(f64, f64), SolverError> {
    let n = matrix.dim();
    if n == 0 {
        return Err(SolverError::InvalidRequest("empty matrix".into()));
    }
    if matrix.off_diagonal_len() == 0 {
        let d = matrix.diagonal();
        return Ok((
            d.iter().copied().fold(f64::INFINITY, f64::min),
            d.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        ));
    }
    if n <= SMALL_DIM {
        let (e, _) = dense::diagonalize(matrix, false)?;
        return Ok((e[0], e[n - 1]));
    }
    let scale = residual_scale(matrix);
    let mut lanczos = Lanczos::new(n, 60.min(n - 1), config.seed);
    let mut op = |x: &[f64], y: &mut [f64]| {
        matrix.try_apply_into(x, y).expect("length checked");
        Ok(())
    };
    let mut tol = config.residual_tol;
    let mut attempt = 0;
    loop {
        let ritz = lanczos.solve(
            &mut op,
            2,
            Which::BothEnds,
            Tolerance { tol, floor: scale },
            config.extremal_budget,
        )?;
        let (energies, vectors) = rayleigh(matrix, &ritz)?;
        match check_residuals(matrix, &energies, &vectors, config.residual_tol) {
            Ok(()) => return Ok((energies[0].min(energies[1]), energies[0].max(energies[1]))),
            Err(e) if attempt == 4 => return Err(e),
            Err(_) => {
                tol *= 1e-2;
                attempt += 1;
            }
        }
    }
}

/// Rayleigh quotients of the Ritz vectors.
fn rayleigh(matrix: &SparseSymmetric, ritz: &RitzPairs) -> Result<(Vec<f64>, EigenVectors), SolverError> {
    let n = matrix.dim();
    let vectors = EigenVectors::new(n, ritz.vectors.clone()).map_err(|e| SolverError::Breakdown(e.to_string()))?;
    let mut hv = vec![0.0; n];
    let energies = vectors
        .iter()
        .map(|v| {
            matrix.try_apply_into(v, &mut hv).expect("length checked");
            v.iter().zip(&hv).map(|(a, b)| a * b).sum()
        })
        .collect();
    Ok((energies, vectors))
}

/// The `k` eigenpairs nearest `target`, ascending in energy.
pub fn interior_pairs(
    matrix: &SparseSymmetric,
    target: f64,
    k: usize,
    config: &SolverConfig,
) -> Result<Spectrum, SolverError> {
    let n = matrix.dim();
    if k == 0 || k > n || !target.is_finite() {
        return Err(SolverError::InvalidRequest(format!(
            "need 1 <= k <= {n} and a finite target, got k={k}, target={target}"
        )));
    }
    let (energies, vectors) = if matrix.off_diagonal_len() == 0 {
        let d = matrix.diagonal();
        let mut vectors = vec![0.0; n * n.min(k + 1)];
        let order = nearest(d, target, (k + 1).min(n));
        for (slot, &i) in order.iter().enumerate() {
            vectors[slot * n + i] = 1.0;
        }
        let energies: Vec<f64> = order.iter().map(|&i| d[i]).collect();
        (energies, vectors)
    } else if n <= SMALL_DIM.max(4 * (k + 1)) {
        if n > config.dense_cap {
            return Err(SolverError::DenseCapExceeded { dim: n, cap: config.dense_cap });
        }
        let (all, vectors) = dense::diagonalize(matrix, true)?;
        let vectors = vectors.expect("vectors requested");
        let order = nearest(&all, target, (k + 1).min(n));
        let mut picked = Vec::with_capacity(order.len() * n);
        for &i in &order {
            picked.extend_from_slice(&vectors[i * n..(i + 1) * n]);
        }
        (order.iter().map(|&i| all[i]).collect(), picked)
    } else {
        shift_invert_pairs(matrix, target, k, config)?
    };
    finish_interior(matrix, target, k, energies, vectors, config)
}

/// Indices of the `count` values nearest `target`, nearest first; ties go to
/// the lower index.
fn nearest(values: &[f64], target: f64, count: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        (values[a] - target)
            .abs()
            .total_cmp(&(values[b] - target).abs())
            .then(a.cmp(&b))
    });
    idx.truncate(count);
    idx
}

fn shift_invert_pairs(
    matrix: &SparseSymmetric,
    target: f64,
    k: usize,
    config: &SolverConfig,
) -> Result<(Vec<f64>, Vec<f64>), SolverError> {
    let n = matrix.dim();
    let scale = residual_scale(matrix);
    let mut last_err = None;
    for attempt in 0..4 {
        // nudge the shift off an eigenvalue that made the factor unusable
        let sigma = target + if attempt == 0 { 0.0 } else { 1e-7 * scale * f64::from(attempt) };
        let extra = if attempt == 0 { 1 } else { 11 };
        let nev = (k + extra).min(n - 2);
        let mut factor = match ShiftInvert::new(matrix, sigma) {
            Ok(f) => f,
            Err(e) => {
                log::warn!("{e}");
                last_err = Some(e);
                continue;
            }
        };
        let probe: Vec<f64> = (0..n).map(|i| ((i % 7) as f64 - 3.0) / 3.0).collect();
        let mut x = vec![0.0; n];
        match factor.solve(&probe, &mut x) {
            Ok(eta) if eta <= 1e-10 => {}
            Ok(eta) => {
                let e = SolverError::Factorization {
                    shift: sigma,
                    reason: format!("backward error {eta:e} after refinement"),
                };
                log::warn!("{e}");
                last_err = Some(e);
                continue;
            }
            Err(e) => {
                log::warn!("{e}");
                last_err = Some(e);
                continue;
            }
        }
        let ncv = (2 * nev + 20).max(nev + 40).min(n - 1);
        let mut lanczos = Lanczos::new(n, ncv, config.seed);
        let mut op = |b: &[f64], y: &mut [f64]| factor.solve(b, y).map(|_| ());
        let budget = config.budget_per_pair * k.max(1);
        let mut tol = config.residual_tol * 1e-2;
        for _ in 0..4 {
            let ritz = lanczos.solve(&mut op, nev, Which::LargestMagnitude, Tolerance { tol, floor: 0.0 }, budget)?;
            let (energies, vectors) = rayleigh(matrix, &ritz)?;
            if check_residuals(matrix, &energies, &vectors, config.residual_tol).is_ok() {
                log::debug!("shift-invert converged after {} solves", lanczos.ops());
                let order = nearest(&energies, target, (k + 1).min(nev));
                let mut picked = Vec::with_capacity(order.len() * n);
                for &i in &order {
                    picked.extend_from_slice(vectors.vector(i));
                }
                return Ok((order.iter().map(|&i| energies[i]).collect(), picked));
            }
            tol *= 1e-2;
        }
        let ritz = lanczos.solve(&mut op, nev, Which::LargestMagnitude, Tolerance { tol, floor: 0.0 }, budget)?;
        let (energies, vectors) = rayleigh(matrix, &ritz)?;
        check_residuals(matrix, &energies, &vectors, config.residual_tol)?;
    }
    Err(last_err.unwrap_or_else(|| SolverError::Breakdown("shift-invert failed".into())))
}

/// Keeps the `k` nearest of `candidates` (nearest first, possibly one
/// extra), sorts them by energy and records a degenerate cutoff.
fn finish_interior(
    matrix: &SparseSymmetric,
    target: f64,
    k: usize,
    energies: Vec<f64>,
    vectors: Vec<f64>,
    config: &SolverConfig,
) -> Result<Spectrum, SolverError> {
    let n = matrix.dim();
    let mut notes = Vec::new();
    if energies.len() > k {
        let (kept, dropped) = (energies[k - 1], energies[k]);
        if ((kept - target).abs() - (dropped - target).abs()).abs() <= 1e-12 {
            notes.push(SpectrumNote::DegenerateCutoff { kept, dropped });
        }
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]).then(a.cmp(&b)));
    let mut data = Vec::with_capacity(k * n);
    for &i in &order {
        data.extend_from_slice(&vectors[i * n..(i + 1) * n]);
    }
    let vectors = EigenVectors::new(n, data).map_err(|e| SolverError::Breakdown(e.to_string()))?;
    let energies: Vec<f64> = order.iter().map(|&i| energies[i]).collect();
    check_residuals(matrix, &energies, &vectors, config.residual_tol)?;
    let mut spectrum = Spectrum::new(energies, Some(vectors), SpectrumKind::Interior { target, count: k }, config.residual_tol)
        .map_err(|e| SolverError::Breakdown(e.to_string()))?;
    spectrum.notes = notes;
    Ok(spectrum)
}
