use alloc::vec::Vec;

use super::quadrature::GaussLegendre;
use crate::error::{Error, Result};

pub const RATIO_BINS: usize = 25;
pub const RATIO_BIN_WIDTH: f64 = 1.0 / RATIO_BINS as f64;
/// Spacings below this multiple of the mean spacing count as degenerate.
pub const DEFAULT_DEGENERACY_FLOOR: f64 = 1e-12;

/// How the reference GOE probability of each ratio bin is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GoeMasses {
    /// Integral of the density over the bin.
    #[default]
    Quadrature,
    /// Density at the bin center times the bin width.
    Midpoint,
}

/// `P_GOE(r) = 27/4 (r + r^2) / (1 + r + r^2)^{5/2}` on `[0, 1]`.
pub fn goe_r_density(r: f64) -> f64 {
    let u = 1.0 + r + r * r;
    6.75 * (r + r * r) / (u * u * libm::sqrt(u))
}

/// Reference probability of each of the 25 ratio bins.
pub fn goe_bin_masses(mode: GoeMasses) -> [f64; RATIO_BINS] {
    let rule = GaussLegendre::new(16);
    core::array::from_fn(|i| {
        let a = i as f64 * RATIO_BIN_WIDTH;
        let b = (i + 1) as f64 * RATIO_BIN_WIDTH;
        match mode {
            GoeMasses::Quadrature => rule.integrate(a, b, goe_r_density),
            GoeMasses::Midpoint => goe_r_density(0.5 * (a + b)) * RATIO_BIN_WIDTH,
        }
    })
}

/// Probability mass of `ratios` in 25 bins of width 0.04 over `[0, 1]`.
/// `r = 1` falls in the last bin.
pub fn ratio_histogram(ratios: &[f64]) -> [f64; RATIO_BINS] {
    let mut counts = [0usize; RATIO_BINS];
    for &r in ratios {
        let bin = libm::floor(r * RATIO_BINS as f64) as usize;
        counts[bin.min(RATIO_BINS - 1)] += 1;
    }
    let total = ratios.len().max(1) as f64;
    counts.map(|c| c as f64 / total)
}

/// `sum_i p_i ln(p_i / q_i)` against the GOE bin masses; empty bins add
/// nothing.
pub fn kl_divergence(histogram: &[f64; RATIO_BINS], mode: GoeMasses) -> f64 {
    let q = goe_bin_masses(mode);
    histogram
        .iter()
        .zip(q)
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, q)| p * libm::log(p / q))
        .sum()
}

/// Level-spacing-ratio statistics of one level sequence, or of several pooled.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioStats {
    pub ratios: Vec<f64>,
    pub mean_r: f64,
    pub histogram: [f64; RATIO_BINS],
    pub kl_to_goe: f64,
    pub degenerate_dropped: usize,
}

impl RatioStats {
    pub fn from_ratios(ratios: Vec<f64>, degenerate_dropped: usize, mode: GoeMasses) -> Result<Self> {
        if ratios.is_empty() {
            return Err(Error::EmptySelection);
        }
        if let Some(bad) = ratios.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(Error::InvalidParameter(alloc::format!("ratio {bad} outside [0, 1]")));
        }
        let mean_r = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let histogram = ratio_histogram(&ratios);
        let kl_to_goe = kl_divergence(&histogram, mode);
        Ok(Self {
            ratios,
            mean_r,
            histogram,
            kl_to_goe,
            degenerate_dropped,
        })
    }

    /// Concatenates the ratios of several sequences and recomputes.
    pub fn pool<'a>(parts: impl IntoIterator<Item = &'a RatioStats>, mode: GoeMasses) -> Result<Self> {
        let mut ratios = Vec::new();
        let mut dropped = 0;
        for p in parts {
            ratios.extend_from_slice(&p.ratios);
            dropped += p.degenerate_dropped;
        }
        Self::from_ratios(ratios, dropped, mode)
    }

    pub fn len(&self) -> usize {
        self.ratios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratios.is_empty()
    }
}

/// Ratios with quadrature GOE masses.
pub fn spacing_ratios(energies: &[f64], degeneracy_floor: f64) -> Result<RatioStats> {
    spacing_ratios_with(energies, degeneracy_floor, GoeMasses::Quadrature)
}

/// `r_n = min(s_{n+1}, s_n) / max(s_{n+1}, s_n)` over consecutive spacings of
/// an ascending level sequence.
///
/// A pair is dropped, and counted, when its smaller spacing does not exceed
/// `degeneracy_floor` times the mean spacing; exact degeneracies are always
/// dropped.
pub fn spacing_ratios_with(energies: &[f64], degeneracy_floor: f64, mode: GoeMasses) -> Result<RatioStats> {
    if energies.len() < 3 {
        return Err(Error::TooFewLevels {
            needed: 3,
            found: energies.len(),
        });
    }
    if energies.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidParameter("energies must be sorted ascending".into()));
    }
    let n = energies.len();
    let mean_spacing = (energies[n - 1] - energies[0]) / (n - 1) as f64;
    let threshold = degeneracy_floor * mean_spacing;
    let mut ratios = Vec::with_capacity(n - 2);
    let mut dropped = 0;
    for w in energies.windows(3) {
        let a = w[1] - w[0];
        let b = w[2] - w[1];
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        if !(lo > threshold) {
            dropped += 1;
            continue;
        }
        ratios.push(lo / hi);
    }
    RatioStats::from_ratios(ratios, dropped, mode)
}
