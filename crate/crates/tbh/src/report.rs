//! Statistics of cached spectra and the GOE benchmark, as CSV tables.

use tbh_core::statistics::{
    bin_by_energy, goe_bin_masses, goe_d1_prediction, inner_fraction, sample_goe_matrix, sample_goe_vector,
    spacing_ratios_with, BinningConfig, EnergyBinning, Exponent, GfdStats, GoeMasses, RatioStats,
    DEFAULT_DEGENERACY_FLOOR, MEAN_R_GOE, RATIO_BIN_WIDTH,
};
use tbh_core::{ModelParams, Spectrum};

use crate::eigensolve::dense_eigenvalues;
use crate::error::{Error, Result};
use crate::io::csv::{float, opt_float, Table};

/// Which levels of a cached spectrum to analyse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Selection {
    /// Central fraction of the levels.
    Inner(f64),
    /// The `k` levels nearest `target`.
    Window { target: f64, k: usize },
    /// All levels, in equal rescaled-energy bins.
    Bins(usize),
}

/// The `k` levels nearest `target`, a contiguous run of the sorted spectrum.
pub fn window_around(spectrum: &Spectrum, target: f64, k: usize) -> Result<Spectrum> {
    let e = &spectrum.energies;
    if k == 0 || k > e.len() {
        return Err(Error::Config(format!("cannot select {k} of {} levels", e.len())));
    }
    let mut hi = e.partition_point(|&x| x < target);
    let mut lo = hi;
    while hi - lo < k {
        let take_left = match (lo.checked_sub(1), e.get(hi)) {
            (Some(l), Some(&h)) => target - e[l] <= h - target,
            (Some(_), None) => true,
            _ => false,
        };
        if take_left {
            lo -= 1;
        } else {
            hi += 1;
        }
    }
    Ok(spectrum.slice(lo..hi))
}

/// The levels picked by an inner-fraction or window selection.
pub fn select(spectrum: &Spectrum, selection: Selection) -> Result<Spectrum> {
    match selection {
        Selection::Inner(fraction) => {
            let inner = inner_fraction(&spectrum.energies, fraction)?;
            let start = (spectrum.len() - inner.len()) / 2;
            Ok(spectrum.slice(start..start + inner.len()))
        }
        Selection::Window { target, k } => window_around(spectrum, target, k),
        Selection::Bins(_) => Ok(spectrum.clone()),
    }
}

pub fn ratio_stats(energies: &[f64], masses: GoeMasses) -> Result<RatioStats> {
    Ok(spacing_ratios_with(energies, DEFAULT_DEGENERACY_FLOOR, masses)?)
}

pub fn stats_table(params: &ModelParams, n_levels: usize, r: &RatioStats) -> Table {
    let mut t = Table::new(&["L", "N", "J", "U", "F", "n_levels", "mean_r", "kl", "dropped"]);
    t.row(&[
        params.sites.to_string(),
        params.particles.to_string(),
        float(params.hopping),
        float(params.interaction),
        float(params.tilt),
        n_levels.to_string(),
        float(r.mean_r),
        float(r.kl_to_goe),
        r.degenerate_dropped.to_string(),
    ]);
    t
}

/// Normalized ratio histogram beside the GOE bin masses.
pub fn histogram_table(r: &RatioStats, masses: GoeMasses) -> Table {
    let goe = goe_bin_masses(masses);
    let mut t = Table::new(&["bin_left", "bin_right", "p", "q_goe"]);
    for (i, (p, q)) in r.histogram.iter().zip(goe).enumerate() {
        t.row(&[
            float(i as f64 * RATIO_BIN_WIDTH),
            float((i + 1) as f64 * RATIO_BIN_WIDTH),
            float(*p),
            float(q),
        ]);
    }
    t
}

/// Per-`q` mean and variance, with the GOE prediction where one exists.
pub fn gfd_table(g: &GfdStats) -> Result<Table> {
    let (goe_mean, goe_var) = goe_d1_prediction(g.basis_dim)?;
    let mut t = Table::new(&["q", "states", "mean_dq", "var_dq", "goe_mean", "goe_var"]);
    for (k, q) in g.q_values.iter().enumerate() {
        let goe = (*q == Exponent::ONE).then_some((goe_mean, goe_var));
        t.row(&[
            q.to_string(),
            g.states().to_string(),
            float(g.mean[k]),
            float(g.variance[k]),
            opt_float(goe.map(|g| g.0)),
            opt_float(goe.map(|g| g.1)),
        ]);
    }
    Ok(t)
}

pub fn binned(spectrum: &Spectrum, n_bins: usize, q_values: &[Exponent], masses: GoeMasses) -> Result<EnergyBinning> {
    Ok(bin_by_energy(
        spectrum,
        &BinningConfig {
            n_bins,
            q_values: q_values.to_vec(),
            degeneracy_floor: DEFAULT_DEGENERACY_FLOOR,
            masses,
        },
    )?)
}

/// One row per bin; `q` columns follow the binning's exponents.
pub fn bins_table(b: &EnergyBinning, q_values: &[Exponent]) -> Table {
    let mut header = vec!["eps_bin_center".to_string(), "count".into(), "mean_r".into(), "dev_r".into(), "kl".into()];
    for q in q_values {
        header.push(format!("mean_d{q}"));
        header.push(format!("var_d{q}"));
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut t = Table::new(&header);
    for bin in &b.bins {
        let r = bin.ratios.as_ref();
        let mut row = vec![
            float(bin.center),
            bin.count.to_string(),
            opt_float(r.map(|r| r.mean_r)),
            opt_float(r.map(|r| (r.mean_r - MEAN_R_GOE).abs())),
            opt_float(r.map(|r| r.kl_to_goe)),
        ];
        for k in 0..q_values.len() {
            let g = bin.gfd.as_ref();
            row.push(opt_float(g.map(|g| g.mean[k])));
            row.push(opt_float(g.map(|g| g.variance[k])));
        }
        t.row(&row);
    }
    t
}

/// Monte-Carlo GOE statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct GoeBenchmark {
    pub dim: usize,
    pub realizations: usize,
    /// Ratios pooled over all sampled matrices.
    pub ratios: RatioStats,
    pub gfd: GfdStats,
}

/// Offset separating vector seeds from matrix seeds.
const VECTOR_SEED_OFFSET: u64 = 1 << 32;

/// `realizations` GOE matrices (seeds `seed + i`) for level statistics and
/// `vectors` random GOE eigenvectors for fractal dimensions.
pub fn goe_benchmark(
    dim: usize,
    realizations: usize,
    vectors: usize,
    q_values: &[Exponent],
    seed: u64,
    masses: GoeMasses,
) -> Result<GoeBenchmark> {
    if dim < 100 {
        return Err(Error::Config(format!("GOE benchmark needs dim >= 100, got {dim}")));
    }
    if realizations == 0 || vectors < 2 {
        return Err(Error::Config("need at least one matrix and two vectors".into()));
    }
    let mut parts = Vec::with_capacity(realizations);
    for i in 0..realizations as u64 {
        let m = sample_goe_matrix(dim, seed.wrapping_add(i))?;
        parts.push(ratio_stats(&dense_eigenvalues(&m)?, masses)?);
    }
    let ratios = RatioStats::pool(&parts, masses)?;
    let samples = (0..vectors as u64)
        .map(|i| sample_goe_vector(dim, seed.wrapping_add(VECTOR_SEED_OFFSET).wrapping_add(i)))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let gfd = GfdStats::from_intensities(samples.iter().map(Vec::as_slice), q_values, dim)?;
    Ok(GoeBenchmark {
        dim,
        realizations,
        ratios,
        gfd,
    })
}

/// `quantity, value, prediction` rows.
pub fn goe_table(b: &GoeBenchmark) -> Result<Table> {
    let (d1_mean, d1_var) = goe_d1_prediction(b.dim)?;
    let mut t = Table::new(&["quantity", "value", "prediction"]);
    t.row(&["dim".into(), b.dim.to_string(), String::new()]);
    t.row(&["matrices".into(), b.realizations.to_string(), String::new()]);
    t.row(&["vectors".into(), b.gfd.states().to_string(), String::new()]);
    t.row(&["mean_r".into(), float(b.ratios.mean_r), float(MEAN_R_GOE)]);
    t.row(&["kl".into(), float(b.ratios.kl_to_goe), float(0.0)]);
    for (k, q) in b.gfd.q_values.iter().enumerate() {
        let one = *q == Exponent::ONE;
        t.row(&[format!("mean_d{q}"), float(b.gfd.mean[k]), opt_float(one.then_some(d1_mean))]);
        t.row(&[format!("var_d{q}"), float(b.gfd.variance[k]), opt_float(one.then_some(d1_var))]);
    }
    Ok(t)
}
