//! JSON campaign configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tbh_core::statistics::{Exponent, GoeMasses, DEFAULT_DEGENERACY_FLOOR, DEFAULT_INNER_FRACTION};
use tbh_core::sweep::{log_spaced, Axis};

use crate::eigensolve::SolverConfig;
use crate::error::{Error, Result};

/// Default worker budget when the config does not set one.
pub const WORKERS_ENV: &str = "TBH_WORKERS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverOptions,
    pub campaign: Campaign,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Campaign {
    EnergyResolved(EnergyResolvedConfig),
    E0Grid(E0GridConfig),
    Scaling(ScalingConfig),
}

impl Campaign {
    pub fn name(&self) -> &'static str {
        match self {
            Self::EnergyResolved(_) => "energy_resolved",
            Self::E0Grid(_) => "e0_grid",
            Self::Scaling(_) => "scaling",
        }
    }
}

/// Explicit values or `count` log-spaced points in `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Log { lo: f64, hi: f64, count: usize },
    Values { values: Vec<f64> },
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        let v = match self {
            Self::Log { lo, hi, count } => log_spaced(*lo, *hi, *count)?,
            Self::Values { values } => values.clone(),
        };
        if v.is_empty() || v.iter().any(|x| !x.is_finite()) || v.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("grid values must be finite and strictly increasing".into()));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOptions {
    #[serde(default = "defaults::dense_cap")]
    pub dense_cap: usize,
    #[serde(default = "defaults::residual_tol")]
    pub residual_tol: f64,
    #[serde(default = "defaults::budget_per_pair")]
    pub budget_per_pair: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            dense_cap: defaults::dense_cap(),
            residual_tol: defaults::residual_tol(),
            budget_per_pair: defaults::budget_per_pair(),
        }
    }
}

impl SolverOptions {
    pub fn to_config(&self, seed: u64) -> SolverConfig {
        SolverConfig {
            dense_cap: self.dense_cap,
            residual_tol: self.residual_tol,
            budget_per_pair: self.budget_per_pair,
            seed,
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyResolvedConfig {
    #[serde(rename = "L")]
    pub sites: usize,
    #[serde(rename = "N")]
    pub particles: usize,
    /// Varying ratio, e.g. `"J/U"`.
    pub axis: String,
    pub grid: GridSpec,
    /// One curve per fixed ratio.
    pub fixed: Vec<f64>,
    #[serde(default = "defaults::n_bins")]
    pub n_bins: usize,
    #[serde(default = "defaults::inner_fraction")]
    pub inner_fraction: f64,
    /// Eigenvectors for the `D_1` maps.
    #[serde(default = "defaults::yes")]
    pub vectors: bool,
    /// Relative `<r>` tolerances for chaotic windows.
    #[serde(default = "defaults::tolerances")]
    pub tolerances: Vec<f64>,
    #[serde(default = "defaults::degeneracy_floor")]
    pub degeneracy_floor: f64,
    /// `"quadrature"` or `"midpoint"` GOE bin masses for the KL divergence.
    #[serde(default = "defaults::kl_masses")]
    pub kl_masses: String,
}

impl EnergyResolvedConfig {
    pub fn axis(&self) -> Result<Axis> {
        Ok(self.axis.parse()?)
    }

    pub fn masses(&self) -> Result<GoeMasses> {
        parse_masses(&self.kl_masses)
    }
}

pub(crate) fn parse_masses(s: &str) -> Result<GoeMasses> {
    match s {
        "quadrature" => Ok(GoeMasses::Quadrature),
        "midpoint" => Ok(GoeMasses::Midpoint),
        _ => Err(Error::Config(format!("kl_masses must be \"quadrature\" or \"midpoint\", got {s:?}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct E0GridConfig {
    #[serde(rename = "L")]
    pub sites: usize,
    #[serde(rename = "N")]
    pub particles: usize,
    pub u_over_j: GridSpec,
    pub f_over_j: GridSpec,
    #[serde(default = "defaults::k")]
    pub k: usize,
    #[serde(default)]
    pub target: f64,
}

/// A line through the `(U/J, F/J)` plane: one ratio fixed, the other on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryConfig {
    /// `"F/J"` (at fixed `U/J`) or `"U/J"` (at fixed `F/J`).
    pub axis: String,
    pub fixed: f64,
    pub grid: GridSpec,
}

/// Closed interval of the trajectory's grid variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    /// Unit-filling sizes, ascending.
    pub sizes: Vec<usize>,
    pub trajectory: TrajectoryConfig,
    /// Trajectory points averaged over.
    pub region: Region,
    #[serde(default = "defaults::k")]
    pub k: usize,
    #[serde(default = "defaults::q_values")]
    pub q_values: Vec<String>,
    /// Sampled GOE vectors per size for the `q != 1` references.
    #[serde(default = "defaults::goe_samples")]
    pub goe_samples: usize,
}

impl ScalingConfig {
    pub fn axis(&self) -> Result<Axis> {
        let axis: Axis = self.trajectory.axis.parse()?;
        match axis {
            Axis::TiltOverHopping | Axis::InteractionOverHopping => Ok(axis),
            _ => Err(Error::Config(format!(
                "scaling trajectories run along F/J or U/J, got {}",
                self.trajectory.axis
            ))),
        }
    }

    pub fn exponents(&self) -> Result<Vec<Exponent>> {
        self.q_values.iter().map(|q| Ok(q.parse()?)).collect()
    }
}

impl SweepConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let config: Self = serde_json::from_slice(&bytes).map_err(|e| Error::Json {
            path: path.into(),
            source: e,
        })?;
        config.validate()?;
        Ok(config)
    }

    /// Worker budget: the config, then the environment, then 1.
    pub fn worker_budget(&self) -> Result<usize> {
        if let Some(w) = self.workers {
            return Ok(w);
        }
        match std::env::var(WORKERS_ENV) {
            Ok(s) => s
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{WORKERS_ENV}={s:?} is not a worker count"))),
            Err(_) => Ok(1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        match &self.campaign {
            Campaign::EnergyResolved(c) => {
                c.axis()?;
                c.masses()?;
                c.grid.values()?;
                if c.fixed.is_empty() {
                    return Err(Error::Config("energy_resolved needs at least one fixed ratio".into()));
                }
                if c.n_bins == 0 || !(c.inner_fraction > 0.0 && c.inner_fraction <= 1.0) {
                    return Err(Error::Config("n_bins must be positive and inner_fraction in (0, 1]".into()));
                }
                if c.tolerances.iter().any(|t| !(*t > 0.0)) {
                    return Err(Error::Config("window tolerances must be positive".into()));
                }
            }
            Campaign::E0Grid(c) => {
                c.u_over_j.values()?;
                c.f_over_j.values()?;
                if c.k < 1 {
                    return Err(Error::Config("k must be at least 1".into()));
                }
            }
            Campaign::Scaling(c) => {
                c.axis()?;
                if c.exponents()?.iter().any(|q| *q != Exponent::ONE) && c.goe_samples < 2 {
                    return Err(Error::Config("goe_samples must be at least 2 for q != 1".into()));
                }
                c.trajectory.grid.values()?;
                if c.sizes.is_empty() || c.sizes.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Config("sizes must be non-empty and ascending".into()));
                }
                if !(c.region.lo <= c.region.hi) {
                    return Err(Error::Config("region needs lo <= hi".into()));
                }
                if c.k < 1 {
                    return Err(Error::Config("k must be at least 1".into()));
                }
            }
        }
        Ok(())
    }
}

mod defaults {
    use super::*;

    pub fn dense_cap() -> usize {
        SolverConfig::default().dense_cap
    }
    pub fn residual_tol() -> f64 {
        SolverConfig::default().residual_tol
    }
    pub fn budget_per_pair() -> usize {
        SolverConfig::default().budget_per_pair
    }
    pub fn n_bins() -> usize {
        100
    }
    pub fn inner_fraction() -> f64 {
        DEFAULT_INNER_FRACTION
    }
    pub fn yes() -> bool {
        true
    }
    pub fn tolerances() -> Vec<f64> {
        vec![0.01, 0.005]
    }
    pub fn degeneracy_floor() -> f64 {
        DEFAULT_DEGENERACY_FLOOR
    }
    pub fn kl_masses() -> String {
        "quadrature".into()
    }
    pub fn k() -> usize {
        200
    }
    pub fn q_values() -> Vec<String> {
        vec!["1".into(), "2".into(), "inf".into()]
    }
    pub fn goe_samples() -> usize {
        200
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_campaign() {
        let er: SweepConfig = serde_json::from_str(
            r#"{"output_dir": "o", "campaign": {"type": "energy_resolved", "L": 6, "N": 6, "axis": "J/U",
                "grid": {"lo": 0.05, "hi": 100, "count": 5}, "fixed": [0.5]}}"#,
        )
        .unwrap();
        er.validate().unwrap();
        let Campaign::EnergyResolved(c) = &er.campaign else { panic!() };
        assert_eq!(c.n_bins, 100);
        assert_eq!(c.grid.values().unwrap().len(), 5);

        let e0: SweepConfig = serde_json::from_str(
            r#"{"output_dir": "o", "workers": 2, "campaign": {"type": "e0_grid", "L": 7, "N": 7,
                "u_over_j": {"values": [0.354]}, "f_over_j": {"lo": 0.01, "hi": 1, "count": 3}, "k": 50}}"#,
        )
        .unwrap();
        e0.validate().unwrap();
        assert_eq!(e0.worker_budget().unwrap(), 2);

        let sc: SweepConfig = serde_json::from_str(
            r#"{"output_dir": "o", "campaign": {"type": "scaling", "sizes": [6, 7],
                "trajectory": {"axis": "F/J", "fixed": 0.354, "grid": {"values": [0.0935]}},
                "region": {"lo": 0.05, "hi": 0.2}}}"#,
        )
        .unwrap();
        sc.validate().unwrap();
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            r#"{"output_dir": "o", "campaign": {"type": "nope"}}"#,
            r#"{"output_dir": "o", "typo": 1, "campaign": {"type": "e0_grid", "L": 7, "N": 7,
                "u_over_j": {"values": [1]}, "f_over_j": {"values": [1]}}}"#,
        ];
        for b in bad {
            assert!(serde_json::from_str::<SweepConfig>(b).is_err(), "{b}");
        }
        let decreasing: SweepConfig = serde_json::from_str(
            r#"{"output_dir": "o", "campaign": {"type": "e0_grid", "L": 7, "N": 7,
                "u_over_j": {"values": [2, 1]}, "f_over_j": {"values": [1]}}}"#,
        )
        .unwrap();
        assert_eq!(decreasing.validate().unwrap_err().exit_code(), crate::exit::CONFIG);
        let wrong_axis: SweepConfig = serde_json::from_str(
            r#"{"output_dir": "o", "campaign": {"type": "scaling", "sizes": [6],
                "trajectory": {"axis": "J/U", "fixed": 1, "grid": {"values": [1]}},
                "region": {"lo": 0, "hi": 2}}}"#,
        )
        .unwrap();
        assert!(wrong_axis.validate().is_err());
    }
}
