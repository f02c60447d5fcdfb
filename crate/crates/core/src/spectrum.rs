use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectrumKind {
    Full,
    /// The `count` eigenpairs nearest `target`.
    Interior { target: f64, count: usize },
}

/// Eigenvectors stored contiguously, one after another.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenVectors {
    dim: usize,
    data: Vec<f64>,
}

impl EigenVectors {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Keeps the vectors at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            data.extend_from_slice(self.vector(i));
        }
        Self {
            dim: self.dim,
            data,
        }
    }
}

/// Something a solver wants recorded alongside its result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectrumNote {
    /// The last kept and first dropped levels are equally far from the
    /// target; which of them was kept is arbitrary.
    DegenerateCutoff { kept: f64, dropped: f64 },
}

/// Sorted eigenvalues, optionally with their eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    pub vectors: Option<EigenVectors>,
    pub kind: SpectrumKind,
    /// Residual bound met by every returned pair, relative to
    /// `max(1, ||H||_1)`.
    pub residual_tol: f64,
    pub notes: Vec<SpectrumNote>,
}

impl Spectrum {
    pub fn new(
        energies: Vec<f64>,
        vectors: Option<EigenVectors>,
        kind: SpectrumKind,
        residual_tol: f64,
    ) -> Result<Self> {
        if energies.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::InvalidParameter("energies must be sorted ascending".into()));
        }
        if let Some(v) = &vectors {
            if v.count() != energies.len() {
                return Err(Error::DimensionMismatch {
                    expected: energies.len(),
                    found: v.count(),
                });
            }
        }
        Ok(Self {
            energies,
            vectors,
            kind,
            residual_tol,
            notes: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Keeps levels `range` (indices into the sorted energies).
    pub fn slice(&self, range: core::ops::Range<usize>) -> Self {
        let idx: Vec<usize> = range.clone().collect();
        Self {
            energies: self.energies[range].to_vec(),
            vectors: self.vectors.as_ref().map(|v| v.select(&idx)),
            kind: self.kind,
            residual_tol: self.residual_tol,
            notes: self.notes.clone(),
        }
    }
}
