//! Runs a [`SweepConfig`] and writes its tables and manifest.

use std::path::Path;

use tbh_core::sweep::{Axis, SweepGrid};

use super::config::{Campaign, E0GridConfig, EnergyResolvedConfig, ScalingConfig, SweepConfig};
use super::{
    deviation_from_goe, region_points, run_cells, run_e0_grid, run_scaling, scaling_rows, window_of, CellResult,
    Checkpoints, EnergyResolvedOptions, EnergyResolvedPoint, Pool,
};
use crate::eigensolve::SolverConfig;
use crate::error::{Error, Result};
use crate::io::csv::{float, opt_float, Table};
use crate::io::manifest::{FailedCell, RunManifest};

/// Summary of a finished campaign.
#[derive(Debug, Clone)]
pub struct CampaignReport {
    pub manifest: RunManifest,
}

impl CampaignReport {
    pub fn failed(&self) -> &[FailedCell] {
        &self.manifest.failed_cells
    }
}

/// Runs the campaign with `workers` cells in flight, each solved on one
/// thread. Cells finished by an earlier run of the same config are reused.
pub fn run_config(config: &SweepConfig, workers: usize) -> Result<CampaignReport> {
    config.validate()?;
    let out = &config.output_dir;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let pool = Pool::new(workers)?;
    faer::set_global_parallelism(faer::Par::Seq);
    // the worker count and output location never change a cell's value
    let checkpoints = Checkpoints::new(&out.join("cells"), &(config.seed, &config.solver, &config.campaign));
    let snapshot = serde_json::to_value(config).expect("config serializes");
    let mut manifest = RunManifest::new(snapshot, vec![config.seed], workers);
    let solver = config.solver.to_config(config.seed);
    match &config.campaign {
        Campaign::EnergyResolved(c) => energy_resolved(c, &solver, &pool, &checkpoints, out, &mut manifest)?,
        Campaign::E0Grid(c) => e0_grid(c, &solver, &pool, &checkpoints, out, &mut manifest)?,
        Campaign::Scaling(c) => scaling(c, config.seed, &solver, &pool, &checkpoints, out, &mut manifest)?,
    }
    manifest.finish(out)?;
    Ok(CampaignReport { manifest })
}

fn record_failures<T>(manifest: &mut RunManifest, stage: &str, cells: &[CellResult<T>], label: impl Fn(usize) -> String) {
    for (index, c) in cells.iter().enumerate() {
        if let Err(error) = c {
            manifest.failed_cells.push(FailedCell {
                stage: stage.into(),
                index,
                label: label(index),
                error: error.clone(),
            });
        }
    }
}

fn file_tag(axis: Axis, value: f64) -> String {
    format!("{}{value}", axis.fixed_label().replace('/', ""))
}

fn energy_resolved(
    c: &EnergyResolvedConfig,
    solver: &SolverConfig,
    pool: &Pool,
    checkpoints: &Checkpoints,
    out: &Path,
    manifest: &mut RunManifest,
) -> Result<()> {
    let axis = c.axis()?;
    let values = c.grid.values()?;
    let grids = c
        .fixed
        .iter()
        .map(|&f| SweepGrid::new(c.sites, c.particles, axis, values.clone(), f))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let options = EnergyResolvedOptions {
        n_bins: c.n_bins,
        inner_fraction: c.inner_fraction,
        vectors: c.vectors,
        degeneracy_floor: c.degeneracy_floor,
        masses: c.masses()?,
    };
    let nv = values.len();
    let (cells, resumed) = manifest.stage("diagonalize", |_| {
        run_cells(pool, grids.len() * nv, "energy_resolved", Some(checkpoints), |i| {
            let grid = &grids[i / nv];
            super::energy_resolved_point(&grid.params(i % nv), values[i % nv], &options, solver)
                .map_err(|e| e.to_string())
        })
    });
    manifest.resumed_cells += resumed;
    record_failures(manifest, "energy_resolved", &cells, |i| {
        format!("{}={} {}={}", axis.fixed_label(), c.fixed[i / nv], axis.label(), values[i % nv])
    });
    let per_fixed: Vec<&[CellResult<EnergyResolvedPoint>]> = cells.chunks(nv).collect();

    manifest.stage("tables", |m| {
        for (&fixed, points) in c.fixed.iter().zip(&per_fixed) {
            let tag = file_tag(axis, fixed);
            m.write_output(out, &format!("map_{tag}.csv"), &map_table(&values, points).into_bytes())?;
            m.write_output(out, &format!("curve_{tag}.csv"), &curve_table(&values, points).into_bytes())?;
            if c.sites == c.particles {
                m.write_output(out, &format!("homogeneous_{tag}.csv"), &homogeneous_table(&values, points).into_bytes())?;
            }
        }
        let mut windows = Table::new(&["fixed_ratio", "lower", "upper", "width_log", "width_linear", "tolerance"]);
        let mut ratios = Table::new(&["fixed_ratio", "tolerance", "w_over_w0_log", "w_over_w0_linear"]);
        for &tol in &c.tolerances {
            let found = per_fixed
                .iter()
                .map(|p| window_of(&values, p, tol))
                .collect::<Result<Vec<_>>>()?;
            for (&fixed, w) in c.fixed.iter().zip(&found) {
                windows.row(&[
                    float(fixed),
                    opt_float(w.lower()),
                    opt_float(w.upper()),
                    float(w.width_log()),
                    float(w.width_linear()),
                    float(tol),
                ]);
                let w0 = &found[0];
                ratios.row(&[
                    float(fixed),
                    float(tol),
                    float(w.width_log() / w0.width_log()),
                    float(w.width_linear() / w0.width_linear()),
                ]);
            }
        }
        m.write_output(out, "windows.csv", &windows.into_bytes())?;
        m.write_output(out, "window_ratios.csv", &ratios.into_bytes())
    })
}

fn map_table(values: &[f64], points: &[CellResult<EnergyResolvedPoint>]) -> Table {
    let mut t = Table::new(&["grid_value", "eps_bin_center", "dev_r", "mean_d1", "var_d1"]);
    for (&v, p) in values.iter().zip(points) {
        match p {
            Ok(p) => {
                for b in &p.bins {
                    t.row(&[
                        float(p.grid_value),
                        float(b.center),
                        opt_float(b.mean_r.map(deviation_from_goe)),
                        opt_float(b.mean_d1),
                        opt_float(b.var_d1),
                    ]);
                }
            }
            Err(_) => t.row(&[float(v), String::new(), String::new(), String::new(), String::new()]),
        }
    }
    t
}

fn curve_table(values: &[f64], points: &[CellResult<EnergyResolvedPoint>]) -> Table {
    let mut t = Table::new(&["grid_value", "mean_r", "kl"]);
    for (&v, p) in values.iter().zip(points) {
        let p = p.as_ref().ok();
        t.row(&[
            float(v),
            opt_float(p.map(|p| p.inner.mean_r)),
            opt_float(p.map(|p| p.inner.kl)),
        ]);
    }
    t
}

fn homogeneous_table(values: &[f64], points: &[CellResult<EnergyResolvedPoint>]) -> Table {
    let mut t = Table::new(&[
        "grid_value",
        "eps_zero",
        "eps_minus_sigma",
        "eps_plus_sigma",
        "sigma",
        "energy",
        "variance",
    ]);
    for (&v, p) in values.iter().zip(points) {
        let h = p.as_ref().ok().and_then(|p| p.homogeneous.as_ref());
        t.row(&[
            float(v),
            opt_float(h.map(|h| h.eps_zero)),
            opt_float(h.map(|h| h.eps_minus_sigma)),
            opt_float(h.map(|h| h.eps_plus_sigma)),
            opt_float(h.map(|h| h.sigma)),
            opt_float(h.map(|h| h.energy)),
            opt_float(h.map(|h| h.variance)),
        ]);
    }
    t
}

fn e0_grid(
    c: &E0GridConfig,
    solver: &SolverConfig,
    pool: &Pool,
    checkpoints: &Checkpoints,
    out: &Path,
    manifest: &mut RunManifest,
) -> Result<()> {
    let (us, fs) = (c.u_over_j.values()?, c.f_over_j.values()?);
    let (cells, resumed) = manifest.stage("interior", |_| {
        run_e0_grid(c.sites, c.particles, &us, &fs, c.k, c.target, solver, pool, Some(checkpoints))
    });
    manifest.resumed_cells += resumed;
    let nf = fs.len();
    record_failures(manifest, "e0_grid", &cells, |i| format!("U/J={} F/J={}", us[i / nf], fs[i % nf]));
    let mut t = Table::new(&["u_over_j", "f_over_j", "mean_r", "mean_d1", "var_d1"]);
    for (i, cell) in cells.iter().enumerate() {
        let s = cell.as_ref().ok().map(|c| &c.stats);
        t.row(&[
            float(us[i / nf]),
            float(fs[i % nf]),
            opt_float(s.and_then(|s| s.mean_r)),
            opt_float(s.map(|s| s.mean_dq[0])),
            opt_float(s.map(|s| s.var_dq[0])),
        ]);
    }
    manifest.stage("tables", |m| m.write_output(out, "e0_grid.csv", &t.into_bytes()))
}

fn scaling(
    c: &ScalingConfig,
    seed: u64,
    solver: &SolverConfig,
    pool: &Pool,
    checkpoints: &Checkpoints,
    out: &Path,
    manifest: &mut RunManifest,
) -> Result<()> {
    let axis = c.axis()?;
    let q_values = c.exponents()?;
    let points = region_points(&c.trajectory.grid.values()?, c.region.lo, c.region.hi);
    if points.is_empty() {
        return Err(Error::Config("no trajectory point lies inside the region".into()));
    }
    let (per_size, resumed) = manifest.stage("interior", |_| {
        run_scaling(&c.sizes, axis, c.trajectory.fixed, &points, c.k, &q_values, solver, pool, Some(checkpoints))
    });
    manifest.resumed_cells += resumed;
    for (&l, cells) in c.sizes.iter().zip(&per_size) {
        let results: Vec<_> = cells.iter().map(|(_, r)| r.clone()).collect();
        record_failures(manifest, "scaling", &results, |i| format!("L={l} {}={}", axis.label(), cells[i].0));
    }
    let rows = manifest.stage("goe_reference", |_| scaling_rows(&c.sizes, &per_size, &q_values, c.goe_samples, seed))?;

    let mut points_table = Table::new(&["L", "grid_value", "q", "mean_r", "mean_dq", "var_dq"]);
    for (&l, cells) in c.sizes.iter().zip(&per_size) {
        for (v, cell) in cells {
            let s = cell.as_ref().ok();
            for (qi, q) in q_values.iter().enumerate() {
                points_table.row(&[
                    l.to_string(),
                    float(*v),
                    q.to_string(),
                    opt_float(s.and_then(|s| s.mean_r)),
                    opt_float(s.map(|s| s.mean_dq[qi])),
                    opt_float(s.map(|s| s.var_dq[qi])),
                ]);
            }
        }
    }
    let mut table = Table::new(&["L", "dim", "q", "mean_dq", "var_dq", "goe_mean", "goe_var"]);
    for r in &rows {
        table.row(&[
            r.sites.to_string(),
            r.dim.to_string(),
            r.q.clone(),
            float(r.mean_dq),
            float(r.var_dq),
            float(r.goe_mean),
            float(r.goe_var),
        ]);
    }
    manifest.stage("tables", |m| {
        m.write_output(out, "scaling.csv", &table.into_bytes())?;
        m.write_output(out, "scaling_points.csv", &points_table.into_bytes())
    })
}
