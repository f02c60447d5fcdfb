//! The tilted Bose-Hubbard Hamiltonian on an open chain,
//!
//! ```text
//! H = -J sum_{j<L} (b+_j b_{j+1} + h.c.) + U/2 sum_j n_j (n_j - 1)
//!     + F sum_j (j - (L + 1) / 2) n_j
//! ```
//!
//! with sites counted from 1. The tilt is antisymmetric about the chain
//! center, so `|1,1,...,1>` has energy exactly zero for every coupling.

use alloc::vec::Vec;
use core::ops::Range;

use crate::basis::{BasisTable, FockState};
use crate::error::{Error, Result};
use crate::matrix::{RowBlock, SparseSymmetric};

/// One Hamiltonian instance. Energies are in whatever unit the caller picks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub sites: usize,
    pub particles: usize,
    /// Nearest-neighbour tunneling `J`.
    pub hopping: f64,
    /// Onsite pair interaction `U`.
    pub interaction: f64,
    /// Tilt per site `F`.
    pub tilt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelWarning {
    /// `F = 0` restores reflection symmetry; pooled level statistics then mix
    /// two parity sectors.
    ParitySymmetric,
}

impl ModelParams {
    pub fn new(sites: usize, particles: usize, hopping: f64, interaction: f64, tilt: f64) -> Self {
        Self {
            sites,
            particles,
            hopping,
            interaction,
            tilt,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 {
            return Err(Error::InvalidParameter(alloc::format!(
                "need at least two sites for tunneling, got {}",
                self.sites
            )));
        }
        for (name, v) in [
            ("J", self.hopping),
            ("U", self.interaction),
            ("F", self.tilt),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(alloc::format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn warnings(&self) -> Vec<ModelWarning> {
        let mut out = Vec::new();
        if self.tilt == 0.0 {
            out.push(ModelWarning::ParitySymmetric);
        }
        out
    }

    pub fn basis(&self) -> Result<BasisTable> {
        BasisTable::new(self.sites, self.particles)
    }

    /// `sigma^2 = <H^2> - <H>^2` in `|1,...,1>`, i.e. `4 J^2 (N - 1)`.
    pub fn homogeneous_variance(&self) -> f64 {
        4.0 * self.hopping * self.hopping * (self.particles as f64 - 1.0)
    }
}

/// Interaction plus tilt energy of a Fock state.
pub fn diagonal_energy(occupations: &[u32], params: &ModelParams) -> f64 {
    let center = (occupations.len() as f64 + 1.0) / 2.0;
    let mut pairs = 0.0;
    let mut dipole = 0.0;
    for (j, &n) in occupations.iter().enumerate() {
        let n = f64::from(n);
        pairs += n * (n - 1.0);
        dipole += (j as f64 + 1.0 - center) * n;
    }
    0.5 * params.interaction * pairs + params.tilt * dipole
}

pub fn state_energy(state: &FockState, params: &ModelParams) -> f64 {
    diagonal_energy(state.occupations(), params)
}

/// Assembles the strict upper triangle for basis rows in `rows`.
///
/// Moving a boson from site `j` to `j + 1` lowers the state in the
/// descending-lexicographic order, so every forward hop lands in a column to
/// the right of its row and the whole matrix is covered by forward hops alone.
pub fn assemble_rows(params: &ModelParams, table: &BasisTable, rows: Range<u64>) -> Result<RowBlock> {
    check_table(params, table)?;
    let mut block = RowBlock::new(rows.start as usize);
    let mut hopped = alloc::vec![0u32; params.sites];
    let mut entries: Vec<(u32, f64)> = Vec::with_capacity(params.sites);
    table.for_each_in(rows, |_, occ| {
        entries.clear();
        if params.hopping != 0.0 {
            for j in 0..occ.len() - 1 {
                if occ[j] == 0 {
                    continue;
                }
                hopped.copy_from_slice(occ);
                hopped[j] -= 1;
                hopped[j + 1] += 1;
                let col = table.rank_occupations(&hopped) as u32;
                let amp = libm::sqrt(f64::from(occ[j]) * f64::from(occ[j + 1] + 1));
                entries.push((col, -params.hopping * amp));
            }
            entries.sort_unstable_by_key(|e| e.0);
        }
        block.push_row(diagonal_energy(occ, params), &entries);
    })?;
    Ok(block)
}

/// Full Hamiltonian in the Fock basis.
pub fn assemble(params: &ModelParams, table: &BasisTable) -> Result<SparseSymmetric> {
    check_table(params, table)?;
    for w in params.warnings() {
        log::warn!("{w:?}: L={} N={} F={}", params.sites, params.particles, params.tilt);
    }
    let block = assemble_rows(params, table, 0..table.dim())?;
    SparseSymmetric::from_row_blocks(table.dim() as usize, alloc::vec![block])
}

fn check_table(params: &ModelParams, table: &BasisTable) -> Result<()> {
    params.validate()?;
    if table.sites() != params.sites || table.particles() != params.particles {
        return Err(Error::InvalidParameter(alloc::format!(
            "basis is for L={} N={}, parameters ask for L={} N={}",
            table.sites(),
            table.particles(),
            params.sites,
            params.particles
        )));
    }
    if u32::try_from(table.dim()).is_err() {
        return Err(Error::MatrixTooLarge { dim: table.dim() });
    }
    Ok(())
}

/// `(<v|H|v>, <v|H^2|v> - <v|H|v>^2)` for a normalized `v`, via one product.
pub fn energy_moments(matrix: &SparseSymmetric, v: &[f64]) -> Result<(f64, f64)> {
    let hv = matrix.apply(v)?;
    let mean: f64 = v.iter().zip(&hv).map(|(a, b)| a * b).sum();
    let second: f64 = hv.iter().map(|x| x * x).sum();
    Ok((mean, second - mean * mean))
}

/// Basis vector of `|1,...,1>`; requires unit filling.
pub fn homogeneous_vector(table: &BasisTable) -> Result<Vec<f64>> {
    if table.sites() != table.particles() {
        return Err(Error::InvalidParameter(alloc::format!(
            "|1,...,1> needs N = L, got L={} N={}",
            table.sites(),
            table.particles()
        )));
    }
    let index = table.rank(&FockState::homogeneous(table.sites()))?;
    let mut v = alloc::vec![0.0; table.dim() as usize];
    v[index as usize] = 1.0;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn params(l: usize, n: usize, j: f64, u: f64, f: f64) -> ModelParams {
        ModelParams::new(l, n, j, u, f)
    }

    #[test]
    fn diagonal_energies() {
        let p = params(3, 3, 0.7, 2.0, 1.0);
        assert_eq!(diagonal_energy(&[3, 0, 0], &p), 3.0);
        assert_eq!(diagonal_energy(&[1, 1, 1], &p), 0.0);
        let p = params(2, 2, 1.0, 0.0, 2.0);
        assert_eq!(diagonal_energy(&[0, 2], &p), 2.0);
        for l in 2..12 {
            let p = params(l, l, 1.3, 0.37, 0.91);
            assert_eq!(diagonal_energy(&vec![1; l], &p), 0.0);
        }
    }

    #[test]
    fn two_site_matrix() {
        let p = params(2, 2, 1.0, 0.0, 0.0);
        let t = p.basis().unwrap();
        let h = assemble(&p, &t).unwrap();
        let entries: Vec<_> = h.off_diagonal().collect();
        let s2 = libm::sqrt(2.0);
        assert_eq!(entries, vec![(0, 1, -s2), (1, 2, -s2)]);
        assert_eq!(h.diagonal(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn zero_hopping_is_diagonal() {
        let p = params(5, 4, 0.0, 1.3, 0.4);
        let h = assemble(&p, &p.basis().unwrap()).unwrap();
        assert_eq!(h.off_diagonal_len(), 0);
    }

    #[test]
    fn structure_bounds_and_conservation() {
        let p = params(6, 6, 1.0, 0.5, 0.3);
        let t = p.basis().unwrap();
        let h = assemble(&p, &t).unwrap();
        assert!(h.off_diagonal_len() <= t.dim() as usize * (p.sites - 1));
        for (r, c, v) in h.off_diagonal() {
            assert!(r < c);
            assert!(v.is_finite() && v != 0.0);
            let a = t.unrank(r as u64).unwrap();
            let b = t.unrank(c as u64).unwrap();
            assert_eq!(a.particles(), b.particles());
            let moved: u32 = a
                .occupations()
                .iter()
                .zip(b.occupations())
                .map(|(x, y)| x.abs_diff(*y))
                .sum();
            assert_eq!(moved, 2);
        }
    }

    #[test]
    fn row_blocks_reassemble() {
        let p = params(5, 5, 1.0, 0.5, 0.3);
        let t = p.basis().unwrap();
        let whole = assemble(&p, &t).unwrap();
        let blocks = vec![
            assemble_rows(&p, &t, 0..40).unwrap(),
            assemble_rows(&p, &t, 40..41).unwrap(),
            assemble_rows(&p, &t, 41..t.dim()).unwrap(),
        ];
        let joined = SparseSymmetric::from_row_blocks(t.dim() as usize, blocks).unwrap();
        assert_eq!(joined, whole);
    }

    #[test]
    fn homogeneous_moments() {
        for (j, u, f) in [(1.0, 1.0, 0.5), (0.3, 2.0, 0.0), (2.5, 0.1, 3.0)] {
            let p = params(6, 6, j, u, f);
            let t = p.basis().unwrap();
            let h = assemble(&p, &t).unwrap();
            let v = homogeneous_vector(&t).unwrap();
            let (mean, var) = energy_moments(&h, &v).unwrap();
            assert_eq!(mean, 0.0);
            let expected = 4.0 * j * j * 5.0;
            assert!((var - expected).abs() <= 1e-12 * expected);
            assert_eq!(p.homogeneous_variance(), expected);
        }
        assert!(homogeneous_vector(&BasisTable::new(3, 4).unwrap()).is_err());
    }

    #[test]
    fn parameter_validation() {
        assert!(params(1, 1, 1.0, 1.0, 1.0).validate().is_err());
        assert!(params(3, 3, -1.0, 1.0, 1.0).validate().is_err());
        assert!(params(3, 3, 1.0, f64::NAN, 1.0).validate().is_err());
        assert_eq!(params(3, 3, 1.0, 1.0, 0.0).warnings(), vec![ModelWarning::ParitySymmetric]);
        assert!(params(3, 3, 1.0, 1.0, 0.01).warnings().is_empty());
        let p = params(3, 3, 1.0, 1.0, 1.0);
        assert!(assemble(&p, &BasisTable::new(3, 2).unwrap()).is_err());
    }
}
