//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails. The width and scaling checks take hours on a
//! single core.

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use tbh::core::hamiltonian::{assemble, energy_moments, homogeneous_vector};
use tbh::core::statistics::{
    gfd, goe_d1_prediction, sample_goe_matrix, sample_goe_vector, spacing_ratios, Exponent, GfdStats, GoeMasses,
    RatioStats, DEFAULT_DEGENERACY_FLOOR, MEAN_R_GOE,
};
use tbh::core::{dimension, ModelParams};
use tbh::eigensolve::{dense_eigenvalues, full_spectrum, interior_pairs, SolverConfig};
use tbh::sweep::{run_config, SweepConfig};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'a str, Box<dyn Fn() -> Outcome + 'a>);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn dimensions() -> Outcome {
    let cases = [(10, 92378), (11, 352716), (7, 1716), (13, 5200300)];
    let got: Vec<u64> = cases.iter().map(|&(l, _)| dimension(l, l).unwrap()).collect();
    let want: Vec<u64> = cases.iter().map(|c| c.1).collect();
    check(got == want, format!("dims {got:?}"))
}

fn goe_spectra() -> Outcome {
    let mut parts = Vec::new();
    for seed in 0..20 {
        let m = sample_goe_matrix(2000, seed).map_err(err)?;
        let e = dense_eigenvalues(&m).map_err(err)?;
        parts.push(spacing_ratios(&e, DEFAULT_DEGENERACY_FLOOR).map_err(err)?);
    }
    let goe = RatioStats::pool(&parts, GoeMasses::Quadrature).map_err(err)?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut level = 0.0;
    let poisson_levels: Vec<f64> = (0..100_000)
        .map(|_| {
            level += <Exp1 as Distribution<f64>>::sample(&Exp1, &mut rng);
            level
        })
        .collect();
    let poisson = spacing_ratios(&poisson_levels, 0.0).map_err(err)?;
    let poisson_want = 2.0 * std::f64::consts::LN_2 - 1.0;
    check(
        (goe.mean_r - MEAN_R_GOE).abs() <= 0.003 && goe.kl_to_goe < 0.002 && (poisson.mean_r - poisson_want).abs() <= 0.005,
        format!(
            "GOE <r> = {:.5}, KL = {:.2e}; Poisson <r> = {:.5}",
            goe.mean_r, goe.kl_to_goe, poisson.mean_r
        ),
    )
}

fn goe_vectors() -> Outcome {
    let dim = 10_000;
    let d1 = (0..10_000)
        .map(|seed| gfd(&sample_goe_vector(dim, seed)?, Exponent::ONE, dim))
        .collect::<Result<Vec<f64>, _>>()
        .map_err(err)?;
    let g = GfdStats::from_values(vec![Exponent::ONE], vec![d1], dim).map_err(err)?;
    let (mean, var) = goe_d1_prediction(dim).map_err(err)?;
    check(
        (g.mean[0] - mean).abs() <= 1e-3 && (g.variance[0] / var - 1.0).abs() <= 0.2,
        format!(
            "<D1> = {:.6} vs {mean:.6}; var = {:.4e} vs {var:.4e}",
            g.mean[0], g.variance[0]
        ),
    )
}

/// Interaction and centred tilt of a Fock state, from the occupations alone.
fn fock_energy(n: &[u32], u: f64, f: f64) -> f64 {
    let centre = (n.len() as f64 + 1.0) / 2.0;
    n.iter()
        .enumerate()
        .map(|(j, &nj)| {
            let nj = f64::from(nj);
            0.5 * u * nj * (nj - 1.0) + f * ((j + 1) as f64 - centre) * nj
        })
        .sum()
}

fn integrable_limits() -> Outcome {
    let solver = SolverConfig::default();
    let mut worst = 0.0f64;
    let mut worst_d = 0.0f64;
    for (l, n, u, f) in [(6, 6, 1.0, 0.5), (5, 7, 0.3, 1.7), (7, 4, 2.0, 0.0), (6, 6, 0.0, 0.25)] {
        let params = ModelParams::new(l, n, 0.0, u, f);
        let table = params.basis().map_err(err)?;
        let mut want: Vec<f64> = table.states().map(|s| fock_energy(s.occupations(), u, f)).collect();
        want.sort_by(f64::total_cmp);
        let spectrum = full_spectrum(&assemble(&params, &table).map_err(err)?, true, &solver).map_err(err)?;
        for (a, b) in spectrum.energies.iter().zip(&want) {
            worst = worst.max((a - b).abs());
        }
        let dim = table.dim() as usize;
        let g = GfdStats::from_amplitudes(spectrum.vectors.as_ref().unwrap().iter(), &Exponent::defaults(), dim)
            .map_err(err)?;
        for per_q in &g.per_state {
            worst_d = per_q.iter().fold(worst_d, |m, d| m.max(d.abs()));
        }
    }
    let two = ModelParams::new(2, 2, 1.0, 0.0, 0.0);
    let e = full_spectrum(&assemble(&two, &two.basis().map_err(err)?).map_err(err)?, false, &solver).map_err(err)?;
    let two_err = e
        .energies
        .iter()
        .zip([-2.0, 0.0, 2.0])
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    check(
        worst <= 1e-12 && worst_d == 0.0 && two_err <= 1e-12,
        format!("J=0 max error {worst:.1e}, max |D_q| {worst_d:.1e}; L=N=2 error {two_err:.1e}"),
    )
}

fn homogeneous_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let table = ModelParams::new(8, 8, 1.0, 1.0, 1.0).basis().map_err(err)?;
    let v = homogeneous_vector(&table).map_err(err)?;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (j, u, f) = (rng.random_range(0.05..5.0), rng.random_range(0.0..5.0), rng.random_range(0.0..5.0));
        let h = assemble(&ModelParams::new(8, 8, j, u, f), &table).map_err(err)?;
        let (mean, var) = energy_moments(&h, &v).map_err(err)?;
        let want = 4.0 * j * j * 7.0;
        worst = worst.max(mean.abs() / want).max((var - want).abs() / want);
    }
    check(worst <= 1e-10, format!("max relative error {worst:.1e} over 20 draws"))
}

fn solver_equivalence() -> Outcome {
    let params = ModelParams::new(8, 8, 1.0, 0.354, 0.0935);
    let h = assemble(&params, &params.basis().map_err(err)?).map_err(err)?;
    let solver = SolverConfig::default();
    let interior = interior_pairs(&h, 0.0, 200, &solver).map_err(err)?;
    let dense = full_spectrum(&h, true, &solver).map_err(err)?;
    let e = &dense.energies;
    let start = {
        // the 200 levels nearest zero form a contiguous run
        let mut lo = e.partition_point(|&x| x < 0.0);
        let mut hi = lo;
        while hi - lo < 200 {
            if hi == e.len() || (lo > 0 && -e[lo - 1] <= e[hi]) {
                lo -= 1;
            } else {
                hi += 1;
            }
        }
        lo
    };
    let max_value_err = (0..200)
        .map(|i| (interior.energies[i] - e[start + i]).abs())
        .fold(0.0, f64::max);
    let (iv, dv) = (interior.vectors.as_ref().unwrap(), dense.vectors.as_ref().unwrap());
    let (mut worst_overlap, mut skipped) = (1.0f64, 0);
    for i in 0..200 {
        let k = start + i;
        let gap = [k.checked_sub(1), Some(k + 1)]
            .into_iter()
            .flatten()
            .filter_map(|m| e.get(m))
            .map(|x| (x - e[k]).abs())
            .fold(f64::INFINITY, f64::min);
        if gap < 1e-4 {
            skipped += 1;
            continue;
        }
        let overlap: f64 = iv.vector(i).iter().zip(dv.vector(k)).map(|(a, b)| a * b).sum();
        worst_overlap = worst_overlap.min(overlap.abs());
    }
    check(
        max_value_err <= 1e-8 && worst_overlap >= 1.0 - 1e-8,
        format!(
            "max |dE| = {max_value_err:.1e}, min overlap = 1 - {:.1e} ({skipped} near-degenerate skipped)",
            1.0 - worst_overlap
        ),
    )
}

fn energy_config(dir: &Path, fixed: f64, grid: serde_json::Value, vectors: bool, tol: f64) -> SweepConfig {
    serde_json::from_value(serde_json::json!({
        "output_dir": dir,
        "seed": 0,
        "campaign": {
            "type": "energy_resolved", "L": 8, "N": 8, "axis": "J/U", "grid": grid,
            "fixed": [fixed], "vectors": vectors, "tolerances": [tol]
        }
    }))
    .unwrap()
}

fn curve(dir: &Path, fixed: f64) -> Result<Vec<(f64, f64, f64)>, String> {
    let text = fs::read_to_string(dir.join(format!("curve_FU{fixed}.csv"))).map_err(err)?;
    text.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<f64> = l.split(',').map(|x| x.parse().map_err(err)).collect::<Result<_, _>>()?;
            Ok((f[0], f[1], f[2]))
        })
        .collect()
}

/// Runs the two criterion-7 campaigns under `root`.
fn certification_runs(root: &Path) -> Result<(), String> {
    for (name, fixed, j) in [("chaotic", 0.5, 2.07), ("regular", 0.01, 0.05)] {
        let cfg = energy_config(&root.join(name), fixed, serde_json::json!({"values": [j]}), true, 0.01);
        let report = run_config(&cfg, 1).map_err(err)?;
        if let Some(f) = report.failed().first() {
            return Err(format!("{name} cell failed: {}", f.error));
        }
    }
    Ok(())
}

fn chaos_certification(root: &Path) -> Outcome {
    certification_runs(root)?;
    let (_, r_chaotic, kl) = curve(&root.join("chaotic"), 0.5)?[0];
    let (_, r_regular, _) = curve(&root.join("regular"), 0.01)?[0];
    check(
        (r_chaotic - MEAN_R_GOE).abs() <= 0.015 && kl < 0.05 && r_regular < 0.45,
        format!("J/U=2.07 F/U=0.5: <r> = {r_chaotic:.4}, KL = {kl:.4}; J/U=0.05 F/U=0.01: <r> = {r_regular:.4}"),
    )
}

fn determinism(first: &Path, second: &Path) -> Outcome {
    if !first.join("chaotic").exists() {
        certification_runs(first)?;
    }
    certification_runs(second)?;
    let mut compared = 0;
    for name in ["chaotic", "regular"] {
        let mut files: Vec<_> = fs::read_dir(first.join(name))
            .map_err(err)?
            .filter_map(|e| e.ok().map(|e| e.file_name()))
            .filter(|f| f.to_string_lossy().ends_with(".csv"))
            .collect();
        files.sort();
        for f in files {
            let a = fs::read(first.join(name).join(&f)).map_err(err)?;
            let b = fs::read(second.join(name).join(&f)).map_err(err)?;
            if a != b {
                return Err(format!("{name}/{} differs", f.to_string_lossy()));
            }
            compared += 1;
        }
    }
    check(compared > 0, format!("{compared} CSV files byte-identical"))
}

fn width_trend(root: &Path) -> Outcome {
    let grid = serde_json::json!({"lo": 0.05, "hi": 100, "count": 50});
    let mut widths = Vec::new();
    for fixed in [0.01, 0.9, 4.0] {
        let dir = root.join(format!("fu{fixed}"));
        let report = run_config(&energy_config(&dir, fixed, grid.clone(), false, 0.01), 1).map_err(err)?;
        if !report.failed().is_empty() {
            return Err(format!("{} failed cells at F/U={fixed}", report.failed().len()));
        }
        let text = fs::read_to_string(dir.join("windows.csv")).map_err(err)?;
        let row: Vec<String> = text.lines().nth(1).unwrap().split(',').map(String::from).collect();
        let width_log: f64 = row[3].parse().map_err(err)?;
        let width_linear: f64 = row[4].parse().map_err(err)?;
        widths.push((fixed, row[1].clone(), row[2].clone(), width_log, width_linear));
    }
    let ratio = widths[1].3 / widths[0].3;
    let detail = widths
        .iter()
        .map(|(f, lo, hi, wl, wn)| {
            let short = |s: &str| s.parse::<f64>().map_or("-".to_string(), |x| format!("{x:.3}"));
            format!("F/U={f}: [{}, {}] W_log={wl:.3} W_lin={wn:.3}", short(lo), short(hi))
        })
        .collect::<Vec<_>>()
        .join("; ");
    check(
        ratio > 1.5 && widths[2].3 < widths[1].3,
        format!("W(0.9)/W(0.01) = {ratio:.3}; {detail}"),
    )
}

fn scaling_to_goe(root: &Path) -> Outcome {
    let cfg: SweepConfig = serde_json::from_value(serde_json::json!({
        "output_dir": root,
        "seed": 0,
        "campaign": {
            "type": "scaling", "sizes": [7, 8, 9],
            "trajectory": {"axis": "F/J", "fixed": 0.354, "grid": {"values": [0.0935]}},
            "region": {"lo": 0.0935, "hi": 0.0935}, "k": 200, "q_values": ["1"]
        }
    }))
    .unwrap();
    let report = run_config(&cfg, 1).map_err(err)?;
    if let Some(f) = report.failed().first() {
        return Err(format!("{}: {}", f.label, f.error));
    }
    let text = fs::read_to_string(root.join("scaling.csv")).map_err(err)?;
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap_or(f64::NAN)).collect())
        .collect();
    let (mean, var, goe): (Vec<f64>, Vec<f64>, Vec<f64>) = rows
        .iter()
        .map(|r| (r[3], r[4], r[5]))
        .fold((vec![], vec![], vec![]), |(mut a, mut b, mut c), (x, y, z)| {
            a.push(x);
            b.push(y);
            c.push(z);
            (a, b, c)
        });
    let increasing = mean.windows(2).all(|w| w[1] > w[0]);
    let decreasing = var.windows(2).all(|w| w[1] < w[0]);
    let close = mean.iter().zip(&goe).all(|(m, g)| (m - g).abs() <= 0.02);
    let detail = rows
        .iter()
        .map(|r| format!("L={} <D1>={:.4} (GOE {:.4}) var={:.2e}", r[0], r[3], r[5], r[4]))
        .collect::<Vec<_>>()
        .join("; ");
    check(increasing && decreasing && close, detail)
}

fn main() -> ExitCode {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let tmp = tempfile::tempdir().expect("temporary directory");
    let root = tmp.path();
    let criteria: Vec<Criterion> = vec![
        ("1 dimensions", Box::new(dimensions)),
        ("2 GOE spectral benchmark", Box::new(goe_spectra)),
        ("3 GOE eigenvector benchmark", Box::new(goe_vectors)),
        ("4 integrable limits", Box::new(integrable_limits)),
        ("5 homogeneous-state identities", Box::new(homogeneous_identities)),
        ("6 interior solver vs dense", Box::new(solver_equivalence)),
        ("7 chaos certification", Box::new(move || chaos_certification(&root.join("c7a")))),
        ("8 width enhancement", Box::new(move || width_trend(&root.join("c8")))),
        ("9 scaling toward GOE", Box::new(move || scaling_to_goe(&root.join("c9")))),
        ("10 determinism", Box::new(move || determinism(&root.join("c7a"), &root.join("c7b")))),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        let number = name.split(' ').next().unwrap();
        if !filter.is_empty() && !filter.iter().any(|f| f == number) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let seconds = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{seconds:.0} s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail} [{seconds:.0} s]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
