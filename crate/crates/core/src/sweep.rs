//! Parameter grids, chaotic-window extraction and the homogeneous-state probe.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::hamiltonian::ModelParams;
use crate::statistics::{rescaled_energy, MEAN_R_GOE};

/// The coupling ratio that varies along a grid. The denominator coupling is
/// the unit of energy and is set to exactly 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    /// `J/U` varies, `F/U` fixed, `U = 1`.
    HoppingOverInteraction,
    /// `F/U` varies, `J/U` fixed, `U = 1`.
    TiltOverInteraction,
    /// `F/J` varies, `U/J` fixed, `J = 1`.
    TiltOverHopping,
    /// `U/J` varies, `F/J` fixed, `J = 1`.
    InteractionOverHopping,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    Hopping,
    Interaction,
    Tilt,
}

impl Axis {
    pub fn unit(self) -> Coupling {
        match self {
            Self::HoppingOverInteraction | Self::TiltOverInteraction => Coupling::Interaction,
            Self::TiltOverHopping | Self::InteractionOverHopping => Coupling::Hopping,
        }
    }

    /// `(J, U, F)` for grid value `value` and fixed ratio `fixed`.
    pub fn couplings(self, value: f64, fixed: f64) -> (f64, f64, f64) {
        match self {
            Self::HoppingOverInteraction => (value, 1.0, fixed),
            Self::TiltOverInteraction => (fixed, 1.0, value),
            Self::TiltOverHopping => (1.0, fixed, value),
            Self::InteractionOverHopping => (1.0, value, fixed),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::HoppingOverInteraction => "J/U",
            Self::TiltOverInteraction => "F/U",
            Self::TiltOverHopping => "F/J",
            Self::InteractionOverHopping => "U/J",
        }
    }

    /// Label of the ratio held fixed.
    pub fn fixed_label(self) -> &'static str {
        match self {
            Self::HoppingOverInteraction => "F/U",
            Self::TiltOverInteraction => "J/U",
            Self::TiltOverHopping => "U/J",
            Self::InteractionOverHopping => "F/J",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().replace('_', "/").as_str() {
            "J/U" => Ok(Self::HoppingOverInteraction),
            "F/U" => Ok(Self::TiltOverInteraction),
            "F/J" => Ok(Self::TiltOverHopping),
            "U/J" => Ok(Self::InteractionOverHopping),
            _ => Err(Error::InvalidParameter(alloc::format!("unknown axis {s:?}"))),
        }
    }
}

/// `count` points equally spaced in `log10` from `lo` to `hi`, both included.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && lo.is_finite() && hi.is_finite()) || count == 0 {
        return Err(Error::InvalidParameter(alloc::format!(
            "log grid needs 0 < lo < hi and count > 0, got [{lo}, {hi}] x {count}"
        )));
    }
    if count == 1 {
        return Ok(alloc::vec![lo]);
    }
    let (a, b) = (libm::log10(lo), libm::log10(hi));
    let step = (b - a) / (count - 1) as f64;
    Ok((0..count)
        .map(|i| match i {
            0 => lo,
            i if i == count - 1 => hi,
            i => libm::pow(10.0, a + step * i as f64),
        })
        .collect())
}

/// One-dimensional parameter grid at fixed size.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub sites: usize,
    pub particles: usize,
    pub axis: Axis,
    pub values: Vec<f64>,
    pub fixed: f64,
}

impl SweepGrid {
    pub fn new(sites: usize, particles: usize, axis: Axis, values: Vec<f64>, fixed: f64) -> Result<Self> {
        if values.is_empty() || values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter("grid values must be strictly increasing".into()));
        }
        let grid = Self {
            sites,
            particles,
            axis,
            values,
            fixed,
        };
        for i in 0..grid.len() {
            grid.params(i).validate()?;
        }
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn params(&self, index: usize) -> ModelParams {
        let (j, u, f) = self.axis.couplings(self.values[index], self.fixed);
        ModelParams::new(self.sites, self.particles, j, u, f)
    }
}

/// Maximal contiguous run of grid points whose `<r>` matches the GOE value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowRun {
    pub first: usize,
    pub last: usize,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChaoticWindow {
    pub tolerance: f64,
    pub run: Option<WindowRun>,
}

impl ChaoticWindow {
    pub fn is_empty(&self) -> bool {
        self.run.is_none()
    }

    pub fn lower(&self) -> Option<f64> {
        self.run.map(|r| r.lower)
    }

    pub fn upper(&self) -> Option<f64> {
        self.run.map(|r| r.upper)
    }

    /// `log10(upper / lower)`, zero when empty.
    pub fn width_log(&self) -> f64 {
        self.run.map_or(0.0, |r| libm::log10(r.upper / r.lower))
    }

    /// `upper - lower`, zero when empty.
    pub fn width_linear(&self) -> f64 {
        self.run.map_or(0.0, |r| r.upper - r.lower)
    }
}

/// Certifies point `i` when `|<r>_i - 0.5307| / 0.5307 <= tolerance` and
/// returns the longest run of consecutive certified points (the first one on
/// ties). Failed points (`None`) are never certified.
pub fn chaotic_window(values: &[f64], mean_r: &[Option<f64>], tolerance: f64) -> Result<ChaoticWindow> {
    if values.len() != mean_r.len() {
        return Err(Error::DimensionMismatch {
            expected: values.len(),
            found: mean_r.len(),
        });
    }
    let certified = |r: &Option<f64>| r.is_some_and(|r| ((r - MEAN_R_GOE) / MEAN_R_GOE).abs() <= tolerance);
    let mut best: Option<(usize, usize)> = None;
    let mut start = None;
    for (i, r) in mean_r.iter().enumerate() {
        match (certified(r), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                keep_longer(&mut best, s, i - 1);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        keep_longer(&mut best, s, mean_r.len() - 1);
    }
    Ok(ChaoticWindow {
        tolerance,
        run: best.map(|(first, last)| WindowRun {
            first,
            last,
            lower: values[first],
            upper: values[last],
        }),
    })
}

fn keep_longer(best: &mut Option<(usize, usize)>, first: usize, last: usize) {
    if best.is_none_or(|(a, b)| last - first > b - a) {
        *best = Some((first, last));
    }
}

/// Where `|1,...,1>` sits in the spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousProbe {
    /// Always 0 for the center-antisymmetric tilt.
    pub energy: f64,
    /// LDOS width `2 J sqrt(N - 1)`.
    pub sigma: f64,
    pub epsilon_of_zero: f64,
    /// `eps(-sigma)` and `eps(+sigma)`, clipped to `[0, 1]`.
    pub epsilon_band: (f64, f64),
    pub k_states: usize,
}

impl HomogeneousProbe {
    pub fn new(params: &ModelParams, e_min: f64, e_max: f64, k_states: usize) -> Result<Self> {
        if params.sites != params.particles {
            return Err(Error::InvalidParameter(alloc::format!(
                "homogeneous probe needs unit filling, got L={} N={}",
                params.sites,
                params.particles
            )));
        }
        let sigma = libm::sqrt(params.homogeneous_variance());
        let eps = |e: f64| ((e - e_min) / (e_max - e_min)).clamp(0.0, 1.0);
        Ok(Self {
            energy: 0.0,
            sigma,
            epsilon_of_zero: rescaled_energy(0.0, e_min, e_max)?,
            epsilon_band: (eps(-sigma), eps(sigma)),
            k_states,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn log_grid() {
        let g = log_spaced(0.05, 100.0, 50).unwrap();
        assert_eq!(g.len(), 50);
        assert_eq!(g[0], 0.05);
        assert_eq!(g[49], 100.0);
        let ratio = g[1] / g[0];
        for w in g.windows(2) {
            assert!((w[1] / w[0] - ratio).abs() < 1e-12);
        }
        assert!(log_spaced(0.0, 1.0, 3).is_err());
        assert!(log_spaced(1.0, 1.0, 3).is_err());
    }

    #[test]
    fn grid_units() {
        let g = SweepGrid::new(4, 4, Axis::HoppingOverInteraction, vec![0.1, 1.0], 0.5).unwrap();
        let p = g.params(1);
        assert_eq!((p.hopping, p.interaction, p.tilt), (1.0, 1.0, 0.5));
        let g = SweepGrid::new(4, 4, Axis::TiltOverHopping, vec![0.1, 1.0], 0.354).unwrap();
        let p = g.params(0);
        assert_eq!((p.hopping, p.interaction, p.tilt), (1.0, 0.354, 0.1));
        assert_eq!(Axis::TiltOverHopping.unit(), Coupling::Hopping);
        assert!(SweepGrid::new(4, 4, Axis::TiltOverHopping, vec![1.0, 1.0], 0.3).is_err());
        assert_eq!("u/j".parse::<Axis>().unwrap(), Axis::InteractionOverHopping);
    }

    #[test]
    fn window_extraction() {
        let x = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0];
        let good = Some(0.5307);
        let bad = Some(0.40);
        let w = chaotic_window(&x, &[bad, good, good, bad, good, None], 0.01).unwrap();
        let run = w.run.unwrap();
        assert_eq!((run.first, run.last), (1, 2));
        assert_eq!((w.lower(), w.upper()), (Some(2.0), Some(4.0)));
        assert!((w.width_log() - libm::log10(2.0)).abs() < 1e-15);
        assert_eq!(w.width_linear(), 2.0);

        let w = chaotic_window(&x, &[bad; 6], 0.01).unwrap();
        assert!(w.is_empty());
        assert_eq!(w.width_log(), 0.0);

        // tolerance boundary: 0.5307 * 1.009 passes at 1%, fails at 0.5%
        let near = Some(0.5307 * 1.009);
        assert!(!chaotic_window(&x[..1], &[near], 0.01).unwrap().is_empty());
        assert!(chaotic_window(&x[..1], &[near], 0.005).unwrap().is_empty());

        let w = chaotic_window(&x, &[good, good, good, good, good, good], 0.01).unwrap();
        assert_eq!(w.run.unwrap().last, 5);
    }

    #[test]
    fn probe() {
        let p = ModelParams::new(10, 10, 1.0, 1.0, 0.5);
        let probe = HomogeneousProbe::new(&p, -20.0, 30.0, 200).unwrap();
        assert_eq!(probe.sigma, 6.0);
        assert_eq!(probe.epsilon_of_zero, 0.4);
        assert_eq!(probe.epsilon_band, (14.0 / 50.0, 26.0 / 50.0));
        assert!(HomogeneousProbe::new(&ModelParams::new(3, 4, 1.0, 1.0, 1.0), -1.0, 1.0, 1).is_err());
    }
}
