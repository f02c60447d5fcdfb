use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// Order `q` of a generalized fractal dimension. `q = inf` is its own case,
/// never a large float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub const ONE: Self = Self::Finite(1.0);
    pub const TWO: Self = Self::Finite(2.0);

    /// `{1, 2, inf}`.
    pub fn defaults() -> Vec<Self> {
        alloc::vec![Self::ONE, Self::TWO, Self::Infinity]
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(q) => write!(f, "{q}"),
            Self::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") {
            return Ok(Self::Infinity);
        }
        match s.parse::<f64>() {
            Ok(q) if q.is_finite() && q > 0.0 => Ok(Self::Finite(q)),
            _ => Err(Error::InvalidParameter(alloc::format!(
                "exponent must be a positive number or \"inf\", got {s:?}"
            ))),
        }
    }
}

const NORMALIZATION_TOL: f64 = 1e-10;

/// Finite-size generalized fractal dimension of one state's intensities
/// `p_a = |psi_a|^2` in a basis of size `dim`:
/// `-ln(sum p^q) / ((q - 1) ln dim)`, the Shannon limit at `q = 1` and
/// `-ln(max p) / ln dim` at `q = inf`.
pub fn gfd(intensities: &[f64], q: Exponent, dim: usize) -> Result<f64> {
    if dim < 2 {
        return Err(Error::InvalidParameter(alloc::format!("basis dimension {dim} < 2")));
    }
    if intensities.iter().any(|p| !(*p >= 0.0)) {
        return Err(Error::InvalidParameter("intensities must be non-negative".into()));
    }
    let sum: f64 = intensities.iter().sum();
    if !((sum - 1.0).abs() <= NORMALIZATION_TOL) {
        return Err(Error::NotNormalized { sum });
    }
    Ok(gfd_unchecked(intensities, q, libm::log(dim as f64)))
}

fn gfd_unchecked(p: &[f64], q: Exponent, ln_dim: f64) -> f64 {
    let value = match q {
        Exponent::Infinity => -libm::log(p.iter().copied().fold(0.0, f64::max)),
        Exponent::Finite(1.0) => -p
            .iter()
            .filter(|x| **x > 0.0)
            .map(|x| x * libm::log(*x))
            .sum::<f64>(),
        Exponent::Finite(2.0) => -libm::log(p.iter().map(|x| x * x).sum::<f64>()),
        Exponent::Finite(q) => -libm::log(p.iter().map(|x| libm::pow(*x, q)).sum::<f64>()) / (q - 1.0),
    };
    value / ln_dim
}

/// Generalized fractal dimensions of a set of states.
#[derive(Debug, Clone, PartialEq)]
pub struct GfdStats {
    pub q_values: Vec<Exponent>,
    /// `per_state[k][s]` is the dimension of order `q_values[k]` of state `s`.
    pub per_state: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    /// Sample variance (denominator `n - 1`); zero for a single state.
    pub variance: Vec<f64>,
    pub basis_dim: usize,
}

impl GfdStats {
    /// From normalized amplitude vectors, each of length `basis_dim`.
    pub fn from_amplitudes<'a>(
        states: impl IntoIterator<Item = &'a [f64]>,
        q_values: &[Exponent],
        basis_dim: usize,
    ) -> Result<Self> {
        let mut per_state = alloc::vec![Vec::new(); q_values.len()];
        let mut intensities = Vec::with_capacity(basis_dim);
        for amplitudes in states {
            if amplitudes.len() != basis_dim {
                return Err(Error::DimensionMismatch {
                    expected: basis_dim,
                    found: amplitudes.len(),
                });
            }
            intensities.clear();
            intensities.extend(amplitudes.iter().map(|a| a * a));
            for (k, q) in q_values.iter().enumerate() {
                per_state[k].push(gfd(&intensities, *q, basis_dim)?);
            }
        }
        Self::from_values(q_values.to_vec(), per_state, basis_dim)
    }

    /// From intensity vectors `|psi_a|^2`.
    pub fn from_intensities<'a>(
        states: impl IntoIterator<Item = &'a [f64]>,
        q_values: &[Exponent],
        basis_dim: usize,
    ) -> Result<Self> {
        let mut per_state = alloc::vec![Vec::new(); q_values.len()];
        for p in states {
            if p.len() != basis_dim {
                return Err(Error::DimensionMismatch {
                    expected: basis_dim,
                    found: p.len(),
                });
            }
            for (k, q) in q_values.iter().enumerate() {
                per_state[k].push(gfd(p, *q, basis_dim)?);
            }
        }
        Self::from_values(q_values.to_vec(), per_state, basis_dim)
    }

    pub fn from_values(q_values: Vec<Exponent>, per_state: Vec<Vec<f64>>, basis_dim: usize) -> Result<Self> {
        if per_state.first().is_none_or(|v| v.is_empty()) {
            return Err(Error::EmptySelection);
        }
        let (mean, variance) = per_state.iter().map(|v| mean_variance(v)).unzip();
        Ok(Self {
            q_values,
            per_state,
            mean,
            variance,
            basis_dim,
        })
    }

    pub fn states(&self) -> usize {
        self.per_state.first().map_or(0, Vec::len)
    }

    /// Index of `q` in `q_values`.
    pub fn position(&self, q: Exponent) -> Option<usize> {
        self.q_values.iter().position(|x| *x == q)
    }
}

pub(crate) fn mean_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, ss / (n - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const QS: [Exponent; 4] = [Exponent::ONE, Exponent::TWO, Exponent::Finite(3.5), Exponent::Infinity];

    #[test]
    fn ergodic_and_localized_limits() {
        let d = 64;
        let uniform = vec![1.0 / d as f64; d];
        let mut basis = vec![0.0; d];
        basis[5] = 1.0;
        for q in QS {
            assert!((gfd(&uniform, q, d).unwrap() - 1.0).abs() < 1e-12, "{q}");
            assert_eq!(gfd(&basis, q, d).unwrap(), 0.0);
        }
    }

    #[test]
    fn two_equal_intensities() {
        let d = 1000;
        let mut p = vec![0.0; d];
        p[0] = 0.5;
        p[1] = 0.5;
        let expected = core::f64::consts::LN_2 / libm::log(d as f64);
        for q in QS {
            assert!((gfd(&p, q, d).unwrap() - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn input_checks() {
        assert!(matches!(gfd(&[0.5, 0.4], Exponent::ONE, 2), Err(Error::NotNormalized { .. })));
        assert!(gfd(&[1.0], Exponent::ONE, 1).is_err());
        assert!(gfd(&[1.5, -0.5], Exponent::ONE, 2).is_err());
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::Infinity);
        assert_eq!("2".parse::<Exponent>().unwrap(), Exponent::TWO);
        assert!("-1".parse::<Exponent>().is_err());
        assert_eq!(alloc::format!("{}", Exponent::Infinity), "inf");
    }

    #[test]
    fn stats_over_states() {
        let a = [0.6, 0.8];
        let b = [1.0, 0.0];
        let s = GfdStats::from_amplitudes([&a[..], &b[..]], &[Exponent::ONE], 2).unwrap();
        let d1 = -(0.36 * libm::log(0.36) + 0.64 * libm::log(0.64)) / libm::log(2.0);
        assert!((s.per_state[0][0] - d1).abs() < 1e-14);
        assert!((s.mean[0] - d1 / 2.0).abs() < 1e-14);
        assert!((s.variance[0] - d1 * d1 / 2.0).abs() < 1e-14);
        assert_eq!(s.states(), 2);
        assert!(GfdStats::from_amplitudes(core::iter::empty(), &[Exponent::ONE], 2).is_err());
    }
}
