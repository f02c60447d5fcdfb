use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use tbh::core::hamiltonian::assemble;
use tbh::core::statistics::{Exponent, GfdStats, GoeMasses};
use tbh::core::ModelParams;
use tbh::eigensolve::{extremal_energies, full_spectrum, interior_pairs, SolverConfig};
use tbh::io::{cache, dump, manifest::RunManifest};
use tbh::report::{self, Selection};
use tbh::sweep::{run_config, SweepConfig};
use tbh::{exit, Error, Result};

/// Chaos diagnostics for the tilted Bose-Hubbard chain.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Diagonalize one Hamiltonian and cache the spectrum.
    Diag(DiagArgs),
    /// Level and eigenvector statistics of a cached spectrum.
    Stats(StatsArgs),
    /// Run a campaign described by a JSON config.
    Sweep(SweepArgs),
    /// Sample GOE matrices and vectors as a reference.
    Goe(GoeArgs),
}

#[derive(Args)]
struct DiagArgs {
    #[arg(long = "L")]
    sites: usize,
    #[arg(long = "N")]
    particles: usize,
    #[arg(long = "J")]
    hopping: f64,
    #[arg(long = "U")]
    interaction: f64,
    #[arg(long = "F")]
    tilt: f64,
    /// Whole spectrum by dense diagonalization (the default).
    #[arg(long, conflicts_with = "interior")]
    full: bool,
    /// Keep eigenvectors (always kept for --interior).
    #[arg(long)]
    vectors: bool,
    /// The k eigenpairs nearest this energy.
    #[arg(long, allow_hyphen_values = true)]
    interior: Option<f64>,
    #[arg(long, default_value_t = 200)]
    k: usize,
    #[arg(long, default_value = "spectrum.bhspec")]
    out: PathBuf,
    /// Also write the matrix as "row col value" lines.
    #[arg(long)]
    dump: Option<PathBuf>,
    #[arg(long, default_value_t = SolverConfig::default().dense_cap)]
    dense_cap: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct StatsArgs {
    cache: PathBuf,
    /// Central fraction of levels kept.
    #[arg(long, default_value_t = 0.8)]
    inner: f64,
    /// Energy-resolved mode with this many rescaled-energy bins.
    #[arg(long, conflicts_with = "window_around")]
    bins: Option<usize>,
    /// The --k levels nearest this energy.
    #[arg(long, allow_hyphen_values = true)]
    window_around: Option<f64>,
    #[arg(long, default_value_t = 200)]
    k: usize,
    /// Fractal-dimension orders, when eigenvectors are cached.
    #[arg(long, value_delimiter = ',', default_value = "1,2,inf")]
    q: Vec<Exponent>,
    /// GOE bin masses for the KL divergence.
    #[arg(long, value_parser = ["quadrature", "midpoint"], default_value = "quadrature")]
    kl_masses: String,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    config: PathBuf,
    /// Worker budget; overrides the config and TBH_WORKERS.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct GoeArgs {
    dim: usize,
    realizations: usize,
    seed: u64,
    /// Sampled eigenvectors for the fractal dimensions.
    #[arg(long, default_value_t = 1000)]
    vectors: usize,
    #[arg(long, default_value = "goe_reference.csv")]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Diag(a) => diag(a),
        Command::Stats(a) => stats(a),
        Command::Sweep(a) => sweep(a),
        Command::Goe(a) => goe(a),
    };
    match outcome {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn masses(name: &str) -> GoeMasses {
    match name {
        "midpoint" => GoeMasses::Midpoint,
        _ => GoeMasses::Quadrature,
    }
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let path = dir.join(name);
    tbh::io::write_atomic(&path, bytes)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn diag(a: DiagArgs) -> Result<()> {
    let params = ModelParams::new(a.sites, a.particles, a.hopping, a.interaction, a.tilt);
    params.validate()?;
    let solver = SolverConfig {
        dense_cap: a.dense_cap,
        seed: a.seed,
        ..SolverConfig::default()
    };
    let start = Instant::now();
    let matrix = assemble(&params, &params.basis()?)?;
    if let Some(path) = &a.dump {
        dump::write_coordinates(&matrix, path)?;
    }
    let (spectrum, e_min, e_max) = match a.interior {
        Some(target) => {
            let s = interior_pairs(&matrix, target, a.k, &solver)?;
            let (lo, hi) = extremal_energies(&matrix, &solver)?;
            (s, lo, hi)
        }
        None => {
            let s = full_spectrum(&matrix, a.vectors, &solver)?;
            let (lo, hi) = (s.energies[0], s.energies[s.len() - 1]);
            (s, lo, hi)
        }
    };
    let seconds = start.elapsed().as_secs_f64();
    cache::write(&a.out, &params, matrix.dim(), &spectrum, &solver)?;
    println!("dim {}", matrix.dim());
    println!("E_min {e_min}");
    println!("E_max {e_max}");
    println!("levels {}", spectrum.len());
    println!("seconds {seconds:.3}");
    eprintln!("wrote {}", a.out.display());
    Ok(())
}

fn stats(a: StatsArgs) -> Result<()> {
    let (cached, _) = cache::read(&a.cache)?;
    let masses = masses(&a.kl_masses);
    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let selection = match (a.bins, a.window_around) {
        (Some(n), _) => Selection::Bins(n),
        (None, Some(target)) => Selection::Window { target, k: a.k },
        (None, None) => Selection::Inner(a.inner),
    };
    let q_values = if cached.spectrum.vectors.is_some() { a.q.clone() } else { Vec::new() };
    if let Selection::Bins(n) = selection {
        let b = report::binned(&cached.spectrum, n, &q_values, masses)?;
        return write(&a.out, "bins.csv", &report::bins_table(&b, &q_values).into_bytes());
    }
    let selected = report::select(&cached.spectrum, selection)?;
    let r = report::ratio_stats(&selected.energies, masses)?;
    println!("levels {}", selected.len());
    println!("mean_r {}", r.mean_r);
    println!("kl {}", r.kl_to_goe);
    write(&a.out, "stats.csv", &report::stats_table(&cached.params, selected.len(), &r).into_bytes())?;
    write(&a.out, "histogram.csv", &report::histogram_table(&r, masses).into_bytes())?;
    if let Some(v) = &selected.vectors {
        let g = GfdStats::from_amplitudes(v.iter(), &q_values, cached.dim)?;
        write(&a.out, "gfd.csv", &report::gfd_table(&g)?.into_bytes())?;
    }
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<()> {
    let config = SweepConfig::load(&a.config)?;
    let workers = match a.workers {
        Some(w) => w,
        None => config.worker_budget()?,
    };
    let report = run_config(&config, workers)?;
    print_summary(&report.manifest, &config.output_dir);
    Ok(())
}

fn print_summary(m: &RunManifest, dir: &Path) {
    for s in &m.stages {
        eprintln!("{:>14}  {:.1} s", s.stage, s.seconds);
    }
    if m.resumed_cells > 0 {
        eprintln!("{} cells reused from an earlier run", m.resumed_cells);
    }
    for f in &m.failed_cells {
        eprintln!("failed {} #{} ({}): {}", f.stage, f.index, f.label, f.error);
    }
    println!("{} outputs, {} failed cells in {}", m.outputs.len(), m.failed_cells.len(), dir.display());
}

fn goe(a: GoeArgs) -> Result<()> {
    let b = report::goe_benchmark(a.dim, a.realizations, a.vectors, &Exponent::defaults(), a.seed, GoeMasses::Quadrature)?;
    let table = report::goe_table(&b)?;
    let bytes = table.into_bytes();
    print!("{}", String::from_utf8_lossy(&bytes));
    tbh::io::write_atomic(&a.out, &bytes)?;
    eprintln!("wrote {}", a.out.display());
    Ok(())
}
