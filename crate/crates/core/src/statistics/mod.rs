//! Figures of merit for spectral and eigenvector chaos.
//!
//! Level statistics use the ratio of consecutive spacings, which is
//! independent of the local density of states; nothing in this module
//! unfolds a spectrum.

mod binning;
mod energy;
mod gfd;
mod goe;
mod quadrature;
mod ratios;

pub use binning::{bin_by_energy, bin_by_energy_in, BinStats, BinningConfig, EnergyBinning};
pub use energy::{inner_fraction, rescaled_energy, DEFAULT_INNER_FRACTION};
pub use gfd::{gfd, Exponent, GfdStats};
pub use goe::{
    goe_d1_prediction, sample_goe_matrix, sample_goe_vector, GoeReference, EULER_GAMMA,
    MEAN_R_GOE, MEAN_R_POISSON,
};
pub use quadrature::GaussLegendre;
pub use ratios::{
    goe_bin_masses, goe_r_density, kl_divergence, ratio_histogram, spacing_ratios,
    spacing_ratios_with, GoeMasses, RatioStats, DEFAULT_DEGENERACY_FLOOR, RATIO_BINS,
    RATIO_BIN_WIDTH,
};
