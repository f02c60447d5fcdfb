//! Parameter-grid campaigns: energy-resolved maps, chaotic windows, the
//! homogeneous-state probe, `E = 0` grids and the dimension scaling study.
//!
//! Cells run on a worker pool and land in slots keyed by their grid index,
//! so completion order never shows in the results. A failed cell is
//! recorded and leaves its neighbours untouched.

mod campaign;
mod config;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tbh_core::hamiltonian::{assemble, energy_moments, homogeneous_vector};
use tbh_core::statistics::{
    bin_by_energy, goe_d1_prediction, inner_fraction, sample_goe_vector, spacing_ratios_with, BinningConfig,
    Exponent, GfdStats, GoeMasses, RatioStats, MEAN_R_GOE,
};
use tbh_core::sweep::{chaotic_window, Axis, ChaoticWindow, HomogeneousProbe, SweepGrid};
use tbh_core::{ModelParams, Spectrum};

pub use campaign::{run_config, CampaignReport};
pub use config::{
    Campaign, E0GridConfig, EnergyResolvedConfig, GridSpec, Region, ScalingConfig, SolverOptions, SweepConfig,
    TrajectoryConfig, WORKERS_ENV,
};

use crate::eigensolve::{extremal_energies, full_spectrum, interior_pairs, SolverConfig};
use crate::error::{Error, Result};
use crate::io::{sha256_hex, write_atomic};

/// Cell outcome: the value, or the error text of a failed cell.
pub type CellResult<T> = std::result::Result<T, String>;

/// Fixed-size worker pool. Each worker runs its solver sequentially, so the
/// thread count never exceeds the budget.
pub struct Pool {
    pool: rayon::ThreadPool,
}

impl Pool {
    pub fn new(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::Config("worker budget must be at least 1".into()));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
        Ok(Self { pool })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }

    /// `f(0..n)` in index order.
    pub fn map<T: Send>(&self, n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
        self.pool.install(|| (0..n).into_par_iter().map(&f).collect())
    }
}

/// Per-cell results of an interrupted run, keyed by a configuration
/// fingerprint so stale files are ignored.
#[derive(Debug, Clone)]
pub struct Checkpoints {
    dir: PathBuf,
    fingerprint: String,
}

#[derive(Serialize, Deserialize)]
struct CheckpointFile<T> {
    fingerprint: String,
    value: T,
}

impl Checkpoints {
    pub fn new(dir: &Path, config: &impl Serialize) -> Self {
        let json = serde_json::to_vec(config).expect("config serializes");
        Self {
            dir: dir.to_path_buf(),
            fingerprint: sha256_hex(&json),
        }
    }

    fn path(&self, stage: &str, index: usize) -> PathBuf {
        self.dir.join(stage).join(format!("{index:06}.json"))
    }

    pub fn load<T: DeserializeOwned>(&self, stage: &str, index: usize) -> Option<T> {
        let bytes = fs::read(self.path(stage, index)).ok()?;
        let file: CheckpointFile<T> = serde_json::from_slice(&bytes).ok()?;
        (file.fingerprint == self.fingerprint).then_some(file.value)
    }

    pub fn store<T: Serialize>(&self, stage: &str, index: usize, value: &T) -> Result<()> {
        let file = CheckpointFile {
            fingerprint: self.fingerprint.clone(),
            value,
        };
        let json = serde_json::to_vec(&file).expect("cell serializes");
        write_atomic(&self.path(stage, index), &json)
    }
}

/// Runs `n` cells, reusing checkpoints where present. Returns the results
/// and how many came from checkpoints.
pub fn run_cells<T>(
    pool: &Pool,
    n: usize,
    stage: &str,
    checkpoints: Option<&Checkpoints>,
    cell: impl Fn(usize) -> CellResult<T> + Sync + Send,
) -> (Vec<CellResult<T>>, usize)
where
    T: Serialize + DeserializeOwned + Send,
{
    let results = pool.map(n, |i| {
        if let Some(v) = checkpoints.and_then(|c| c.load::<T>(stage, i)) {
            return (Ok(v), true);
        }
        let out = cell(i);
        if let (Some(c), Ok(v)) = (checkpoints, &out) {
            if let Err(e) = c.store(stage, i, v) {
                log::warn!("checkpoint for {stage}/{i}: {e}");
            }
        }
        if let Err(e) = &out {
            log::warn!("{stage} cell {i} failed: {e}");
        }
        (out, false)
    });
    let resumed = results.iter().filter(|r| r.1).count();
    (results.into_iter().map(|r| r.0).collect(), resumed)
}

/// Statistics of one rescaled-energy bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinRecord {
    pub center: f64,
    pub count: usize,
    pub mean_r: Option<f64>,
    pub mean_d1: Option<f64>,
    pub var_d1: Option<f64>,
}

/// Level statistics of a selected set of levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub n_levels: usize,
    pub mean_r: f64,
    pub kl: f64,
    pub dropped: usize,
}

impl LevelStats {
    pub fn from_ratios(n_levels: usize, r: &RatioStats) -> Self {
        Self {
            n_levels,
            mean_r: r.mean_r,
            kl: r.kl_to_goe,
            dropped: r.degenerate_dropped,
        }
    }
}

/// The homogeneous state's place in the spectrum and its energy moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousRecord {
    pub sigma: f64,
    pub eps_zero: f64,
    pub eps_minus_sigma: f64,
    pub eps_plus_sigma: f64,
    /// `<1|H|1>` from a matrix-vector product.
    pub energy: f64,
    /// `<1|H^2|1> - <1|H|1>^2` from the same product.
    pub variance: f64,
}

impl HomogeneousRecord {
    fn new(params: &ModelParams, matrix: &tbh_core::SparseSymmetric, e_min: f64, e_max: f64) -> Result<Self> {
        let v = homogeneous_vector(&params.basis()?)?;
        let (energy, variance) = energy_moments(matrix, &v)?;
        let probe = HomogeneousProbe::new(params, e_min, e_max, 0)?;
        Ok(Self {
            sigma: probe.sigma,
            eps_zero: probe.epsilon_of_zero,
            eps_minus_sigma: probe.epsilon_band.0,
            eps_plus_sigma: probe.epsilon_band.1,
            energy,
            variance,
        })
    }
}

/// Everything computed at one grid point of an energy-resolved sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyResolvedPoint {
    pub grid_value: f64,
    pub hopping: f64,
    pub interaction: f64,
    pub tilt: f64,
    pub dim: usize,
    pub e_min: f64,
    pub e_max: f64,
    pub bins: Vec<BinRecord>,
    /// Inner-fraction, energy-integrated statistics.
    pub inner: LevelStats,
    /// Present at unit filling.
    pub homogeneous: Option<HomogeneousRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyResolvedOptions {
    pub n_bins: usize,
    pub inner_fraction: f64,
    /// Compute eigenvectors and per-bin `D_1`.
    pub vectors: bool,
    pub degeneracy_floor: f64,
    pub masses: GoeMasses,
}

impl Default for EnergyResolvedOptions {
    fn default() -> Self {
        Self {
            n_bins: 100,
            inner_fraction: tbh_core::statistics::DEFAULT_INNER_FRACTION,
            vectors: true,
            degeneracy_floor: tbh_core::statistics::DEFAULT_DEGENERACY_FLOOR,
            masses: GoeMasses::Quadrature,
        }
    }
}

/// Full diagonalization and statistics at one parameter point.
pub fn energy_resolved_point(
    params: &ModelParams,
    grid_value: f64,
    options: &EnergyResolvedOptions,
    solver: &SolverConfig,
) -> Result<EnergyResolvedPoint> {
    let table = params.basis()?;
    let matrix = assemble(params, &table)?;
    let spectrum = full_spectrum(&matrix, options.vectors, solver)?;
    let (e_min, e_max) = (spectrum.energies[0], spectrum.energies[spectrum.len() - 1]);
    let binning = bin_by_energy(
        &spectrum,
        &BinningConfig {
            n_bins: options.n_bins,
            q_values: if options.vectors { vec![Exponent::ONE] } else { vec![] },
            degeneracy_floor: options.degeneracy_floor,
            masses: options.masses,
        },
    )?;
    let bins = binning
        .bins
        .iter()
        .map(|b| BinRecord {
            center: b.center,
            count: b.count,
            mean_r: b.ratios.as_ref().map(|r| r.mean_r),
            mean_d1: b.gfd.as_ref().map(|g| g.mean[0]),
            var_d1: b.gfd.as_ref().map(|g| g.variance[0]),
        })
        .collect();
    let inner = inner_fraction(&spectrum.energies, options.inner_fraction)?;
    let ratios = spacing_ratios_with(inner, options.degeneracy_floor, options.masses)?;
    let homogeneous = (params.sites == params.particles)
        .then(|| HomogeneousRecord::new(params, &matrix, e_min, e_max))
        .transpose()?;
    Ok(EnergyResolvedPoint {
        grid_value,
        hopping: params.hopping,
        interaction: params.interaction,
        tilt: params.tilt,
        dim: matrix.dim(),
        e_min,
        e_max,
        bins,
        inner: LevelStats::from_ratios(inner.len(), &ratios),
        homogeneous,
    })
}

/// One energy-resolved point per grid value.
pub fn run_energy_resolved(
    grid: &SweepGrid,
    options: &EnergyResolvedOptions,
    solver: &SolverConfig,
    pool: &Pool,
    checkpoints: Option<(&Checkpoints, &str)>,
) -> (Vec<CellResult<EnergyResolvedPoint>>, usize) {
    let (ck, stage) = checkpoints.map_or((None, ""), |(c, s)| (Some(c), s));
    run_cells(pool, grid.len(), stage, ck, |i| {
        energy_resolved_point(&grid.params(i), grid.values[i], options, solver).map_err(|e| e.to_string())
    })
}

/// Chaotic window from the inner-fraction `<r>` of each grid point.
pub fn window_of(values: &[f64], points: &[CellResult<EnergyResolvedPoint>], tolerance: f64) -> Result<ChaoticWindow> {
    let mean_r: Vec<Option<f64>> = points.iter().map(|p| p.as_ref().ok().map(|p| p.inner.mean_r)).collect();
    Ok(chaotic_window(values, &mean_r, tolerance)?)
}

/// `|<r> - <r>_GOE|`.
pub fn deviation_from_goe(mean_r: f64) -> f64 {
    (mean_r - MEAN_R_GOE).abs()
}

/// Energy, LDOS width and rescaled position of `|1,...,1>`, with extremal
/// energies from an iterative solve.
pub fn homogeneous_probe(params: &ModelParams, k_states: usize, solver: &SolverConfig) -> Result<HomogeneousProbe> {
    let matrix = assemble(params, &params.basis()?)?;
    let (e_min, e_max) = extremal_energies(&matrix, solver)?;
    Ok(HomogeneousProbe::new(params, e_min, e_max, k_states)?)
}

/// Level and eigenvector statistics of the `k` states nearest `target`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteriorStats {
    pub dim: usize,
    pub k: usize,
    pub mean_r: Option<f64>,
    pub kl: Option<f64>,
    pub q_values: Vec<String>,
    pub mean_dq: Vec<f64>,
    pub var_dq: Vec<f64>,
    pub degenerate_cutoff: bool,
}

pub fn interior_stats_of(spectrum: &Spectrum, q_values: &[Exponent], dim: usize) -> Result<InteriorStats> {
    let ratios = match spacing_ratios_with(
        &spectrum.energies,
        tbh_core::statistics::DEFAULT_DEGENERACY_FLOOR,
        GoeMasses::Quadrature,
    ) {
        Ok(r) => Some(r),
        Err(tbh_core::Error::EmptySelection | tbh_core::Error::TooFewLevels { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let vectors = spectrum
        .vectors
        .as_ref()
        .ok_or_else(|| Error::Config("interior statistics need eigenvectors".into()))?;
    let gfd = GfdStats::from_amplitudes(vectors.iter(), q_values, dim)?;
    Ok(InteriorStats {
        dim,
        k: spectrum.len(),
        mean_r: ratios.as_ref().map(|r| r.mean_r),
        kl: ratios.as_ref().map(|r| r.kl_to_goe),
        q_values: q_values.iter().map(ToString::to_string).collect(),
        mean_dq: gfd.mean,
        var_dq: gfd.variance,
        degenerate_cutoff: !spectrum.notes.is_empty(),
    })
}

/// Interior solve at `target` and statistics over the `k` states found.
pub fn interior_stats(
    params: &ModelParams,
    target: f64,
    k: usize,
    q_values: &[Exponent],
    solver: &SolverConfig,
) -> Result<InteriorStats> {
    let matrix = assemble(params, &params.basis()?)?;
    let spectrum = interior_pairs(&matrix, target, k, solver)?;
    interior_stats_of(&spectrum, q_values, matrix.dim())
}

/// One cell of an `E = 0` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct E0Cell {
    pub u_over_j: f64,
    pub f_over_j: f64,
    pub stats: InteriorStats,
}

/// `J = 1`, `U = u_over_j`, `F = f_over_j`.
pub fn e0_cell(
    sites: usize,
    particles: usize,
    u_over_j: f64,
    f_over_j: f64,
    k: usize,
    target: f64,
    solver: &SolverConfig,
) -> Result<E0Cell> {
    let (j, u, f) = Axis::InteractionOverHopping.couplings(u_over_j, f_over_j);
    let params = ModelParams::new(sites, particles, j, u, f);
    Ok(E0Cell {
        u_over_j,
        f_over_j,
        stats: interior_stats(&params, target, k, &[Exponent::ONE], solver)?,
    })
}

/// Cells in row-major order: `u_over_j` outer, `f_over_j` inner.
#[allow(clippy::too_many_arguments)]
pub fn run_e0_grid(
    sites: usize,
    particles: usize,
    u_over_j: &[f64],
    f_over_j: &[f64],
    k: usize,
    target: f64,
    solver: &SolverConfig,
    pool: &Pool,
    checkpoints: Option<&Checkpoints>,
) -> (Vec<CellResult<E0Cell>>, usize) {
    let nf = f_over_j.len();
    run_cells(pool, u_over_j.len() * nf, "e0_grid", checkpoints, |i| {
        e0_cell(sites, particles, u_over_j[i / nf], f_over_j[i % nf], k, target, solver).map_err(|e| e.to_string())
    })
}

/// Per-size row of a scaling table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub sites: usize,
    pub dim: usize,
    pub q: String,
    /// Mean over trajectory points of the per-point `<D_q>`.
    pub mean_dq: f64,
    /// Mean over trajectory points of the per-point `var(D_q)`.
    pub var_dq: f64,
    pub goe_mean: f64,
    pub goe_var: f64,
    pub points: usize,
}

/// GOE reference `(mean, variance)` of `D_q`: closed form for `q = 1`,
/// sampled eigenvectors otherwise.
pub fn goe_dq_reference(dim: usize, q: Exponent, samples: usize, seed: u64) -> Result<(f64, f64)> {
    if q == Exponent::ONE {
        return Ok(goe_d1_prediction(dim)?);
    }
    let per_state: Vec<f64> = (0..samples as u64)
        .map(|s| {
            let p = sample_goe_vector(dim, seed.wrapping_add(s))?;
            tbh_core::statistics::gfd(&p, q, dim)
        })
        .collect::<std::result::Result<_, _>>()?;
    let g = GfdStats::from_values(vec![q], vec![per_state], dim)?;
    Ok((g.mean[0], g.variance[0]))
}

/// Averages interior statistics over the trajectory points inside the
/// chaotic region, per size and `q`.
pub fn scaling_rows(
    sizes: &[usize],
    per_size: &[Vec<(f64, CellResult<InteriorStats>)>],
    q_values: &[Exponent],
    goe_samples: usize,
    seed: u64,
) -> Result<Vec<ScalingRow>> {
    let mut rows = Vec::new();
    for (&sites, cells) in sizes.iter().zip(per_size) {
        let dim = tbh_core::dimension(sites, sites)? as usize;
        let ok: Vec<&InteriorStats> = cells.iter().filter_map(|(_, c)| c.as_ref().ok()).collect();
        let n = ok.len() as f64;
        for (qi, q) in q_values.iter().enumerate() {
            // NaN when every point failed; written as empty fields
            let mean_dq = ok.iter().map(|s| s.mean_dq[qi]).sum::<f64>() / n;
            let var_dq = ok.iter().map(|s| s.var_dq[qi]).sum::<f64>() / n;
            let (goe_mean, goe_var) = goe_dq_reference(dim, *q, goe_samples, seed)?;
            rows.push(ScalingRow {
                sites,
                dim,
                q: q.to_string(),
                mean_dq,
                var_dq,
                goe_mean,
                goe_var,
                points: ok.len(),
            });
        }
    }
    Ok(rows)
}

/// Trajectory points inside `[lo, hi]`.
pub fn region_points(values: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    values.iter().copied().filter(|v| (lo..=hi).contains(v)).collect()
}

/// One size's trajectory points and their cell outcomes.
pub type SizeCells = Vec<(f64, CellResult<InteriorStats>)>;

/// Interior statistics along a trajectory at each unit-filling size.
#[allow(clippy::too_many_arguments)]
pub fn run_scaling(
    sizes: &[usize],
    axis: Axis,
    fixed: f64,
    points: &[f64],
    k: usize,
    q_values: &[Exponent],
    solver: &SolverConfig,
    pool: &Pool,
    checkpoints: Option<&Checkpoints>,
) -> (Vec<SizeCells>, usize) {
    let np = points.len();
    let (cells, resumed) = run_cells(pool, sizes.len() * np, "scaling", checkpoints, |i| {
        let (l, v) = (sizes[i / np], points[i % np]);
        let (j, u, f) = axis.couplings(v, fixed);
        interior_stats(&ModelParams::new(l, l, j, u, f), 0.0, k, q_values, solver).map_err(|e| e.to_string())
    });
    let mut per_size = vec![Vec::with_capacity(np); sizes.len()];
    for (i, c) in cells.into_iter().enumerate() {
        per_size[i / np].push((points[i % np], c));
    }
    (per_size, resumed)
}
