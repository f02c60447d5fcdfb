use alloc::vec::Vec;

use super::energy::rescaled_energy;
use super::gfd::{Exponent, GfdStats};
use super::ratios::{spacing_ratios_with, GoeMasses, RatioStats, DEFAULT_DEGENERACY_FLOOR};
use crate::error::{Error, Result};
use crate::spectrum::Spectrum;

#[derive(Debug, Clone, PartialEq)]
pub struct BinningConfig {
    pub n_bins: usize,
    /// GFD orders to aggregate per bin; empty skips eigenvectors entirely.
    pub q_values: Vec<Exponent>,
    pub degeneracy_floor: f64,
    pub masses: GoeMasses,
}

impl Default for BinningConfig {
    fn default() -> Self {
        Self {
            n_bins: 100,
            q_values: alloc::vec![Exponent::ONE],
            degeneracy_floor: DEFAULT_DEGENERACY_FLOOR,
            masses: GoeMasses::Quadrature,
        }
    }
}

/// Levels and states of one rescaled-energy bin. `ratios` and `gfd` are
/// `None` when the bin holds fewer than three levels.
#[derive(Debug, Clone, PartialEq)]
pub struct BinStats {
    pub center: f64,
    pub count: usize,
    pub ratios: Option<RatioStats>,
    pub gfd: Option<GfdStats>,
}

impl BinStats {
    pub fn is_empty(&self) -> bool {
        self.ratios.is_none() && self.gfd.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyBinning {
    pub n_bins: usize,
    /// `n_bins + 1` uniform edges from 0 to 1.
    pub edges: Vec<f64>,
    pub e_min: f64,
    pub e_max: f64,
    pub bins: Vec<BinStats>,
}

/// Bins a full spectrum on its own `[E_min, E_max]`.
pub fn bin_by_energy(spectrum: &Spectrum, config: &BinningConfig) -> Result<EnergyBinning> {
    let (Some(&lo), Some(&hi)) = (spectrum.energies.first(), spectrum.energies.last()) else {
        return Err(Error::EmptySelection);
    };
    bin_by_energy_in(spectrum, lo, hi, config)
}

/// Bins `spectrum` by `eps = (E - e_min) / (e_max - e_min)`. Ratios use only
/// spacings between levels of the same bin.
pub fn bin_by_energy_in(spectrum: &Spectrum, e_min: f64, e_max: f64, config: &BinningConfig) -> Result<EnergyBinning> {
    let n_bins = config.n_bins;
    if n_bins == 0 {
        return Err(Error::InvalidParameter("need at least one bin".into()));
    }
    let vectors = match (&spectrum.vectors, config.q_values.is_empty()) {
        (_, true) => None,
        (Some(v), false) => Some(v),
        (None, false) => {
            return Err(Error::InvalidParameter(
                "fractal dimensions requested but the spectrum has no eigenvectors".into(),
            ))
        }
    };
    let mut members: Vec<Vec<usize>> = alloc::vec![Vec::new(); n_bins];
    for (i, &e) in spectrum.energies.iter().enumerate() {
        let eps = rescaled_energy(e, e_min, e_max)?;
        let bin = (libm::floor(eps * n_bins as f64) as usize).min(n_bins - 1);
        members[bin].push(i);
    }
    let edges = (0..=n_bins).map(|i| i as f64 / n_bins as f64).collect();
    let mut bins = Vec::with_capacity(n_bins);
    for (b, idx) in members.iter().enumerate() {
        let center = (b as f64 + 0.5) / n_bins as f64;
        let mut stats = BinStats {
            center,
            count: idx.len(),
            ratios: None,
            gfd: None,
        };
        if idx.len() >= 3 {
            // indices are ascending, so the member energies are sorted
            let energies: Vec<f64> = idx.iter().map(|&i| spectrum.energies[i]).collect();
            stats.ratios = match spacing_ratios_with(&energies, config.degeneracy_floor, config.masses) {
                Ok(r) => Some(r),
                Err(Error::EmptySelection) => None,
                Err(e) => return Err(e),
            };
            if let Some(v) = vectors {
                stats.gfd = Some(GfdStats::from_amplitudes(
                    idx.iter().map(|&i| v.vector(i)),
                    &config.q_values,
                    v.dim(),
                )?);
            }
        }
        bins.push(stats);
    }
    Ok(EnergyBinning {
        n_bins,
        edges,
        e_min,
        e_max,
        bins,
    })
}
