use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::matrix::DenseSymmetric;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
/// Large-matrix numerical value of `<r>` for the GOE.
pub const MEAN_R_GOE: f64 = 0.5307;
/// `<r>` for uncorrelated (Poisson) levels, `2 ln 2 - 1`.
pub const MEAN_R_POISSON: f64 = 2.0 * core::f64::consts::LN_2 - 1.0;

/// Reference values for GOE spectra and eigenvectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoeReference {
    pub mean_r_analytic: f64,
    pub mean_r_numeric: f64,
    pub euler_gamma: f64,
}

impl Default for GoeReference {
    fn default() -> Self {
        Self {
            mean_r_analytic: 4.0 - 2.0 * libm::sqrt(3.0),
            mean_r_numeric: MEAN_R_GOE,
            euler_gamma: EULER_GAMMA,
        }
    }
}

impl GoeReference {
    pub fn d1_mean(&self, dim: usize) -> f64 {
        1.0 - (2.0 - self.euler_gamma - core::f64::consts::LN_2) / libm::log(dim as f64)
    }

    pub fn d1_variance(&self, dim: usize) -> f64 {
        let pi2 = core::f64::consts::PI * core::f64::consts::PI;
        let ln = libm::log(dim as f64);
        (3.0 * pi2 - 28.0) / (2.0 * dim as f64 * ln * ln)
    }
}

/// Leading-order `(mean, variance)` of `D_1` over GOE eigenvectors of size
/// `dim`.
pub fn goe_d1_prediction(dim: usize) -> Result<(f64, f64)> {
    if dim < 8 {
        return Err(Error::InvalidParameter(alloc::format!(
            "GOE prediction needs dimension >= 8, got {dim}"
        )));
    }
    let r = GoeReference::default();
    Ok((r.d1_mean(dim), r.d1_variance(dim)))
}

/// Intensities of a random GOE eigenvector: i.i.d. standard normal amplitudes,
/// normalized, squared. GOE eigenvectors are uniform on the sphere, which is
/// exactly this distribution.
pub fn sample_goe_vector(dim: usize, seed: u64) -> Result<Vec<f64>> {
    if dim < 2 {
        return Err(Error::InvalidParameter(alloc::format!("dimension {dim} < 2")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p: Vec<f64> = (0..dim)
        .map(|_| {
            let x: f64 = StandardNormal.sample(&mut rng);
            x * x
        })
        .collect();
    let norm: f64 = p.iter().sum();
    for x in &mut p {
        *x /= norm;
    }
    Ok(p)
}

/// GOE matrix with unit off-diagonal variance and diagonal variance 2.
pub fn sample_goe_matrix(dim: usize, seed: u64) -> Result<DenseSymmetric> {
    if dim < 3 {
        return Err(Error::InvalidParameter(alloc::format!("dimension {dim} < 3")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sqrt2 = core::f64::consts::SQRT_2;
    Ok(DenseSymmetric::from_lower(dim, |i, j| {
        let x: f64 = StandardNormal.sample(&mut rng);
        if i == j {
            sqrt2 * x
        } else {
            x
        }
    }))
}
