use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn tbh(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tbh"))
        .args(args)
        .current_dir(dir)
        .env_remove("TBH_WORKERS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value(out: &str, key: &str) -> f64 {
    out.lines()
        .find_map(|l| l.strip_prefix(key).map(|v| v.trim().parse().unwrap()))
        .unwrap()
}

#[test]
fn two_site_spectrum() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tbh(tmp.path(), &["diag", "--L", "2", "--N", "2", "--J", "1", "--U", "0", "--F", "0", "--full"]);
    assert!(o.status.success(), "{o:?}");
    let out = stdout(&o);
    assert_eq!(value(&out, "dim "), 3.0);
    assert!((value(&out, "E_min ") + 2.0).abs() < 1e-12);
    assert!((value(&out, "E_max ") - 2.0).abs() < 1e-12);
    assert!(tmp.path().join("spectrum.bhspec.json").exists());
}

#[test]
fn diag_then_stats() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let o = tbh(d, &[
        "diag", "--L", "5", "--N", "5", "--J", "1", "--U", "1", "--F", "0.5", "--vectors", "--out", "s.bhspec",
        "--dump", "h.txt",
    ]);
    assert!(o.status.success(), "{o:?}");
    assert!(fs::read_to_string(d.join("h.txt")).unwrap().starts_with('%'));

    let o = tbh(d, &["stats", "s.bhspec", "--out", "inner"]);
    assert!(o.status.success(), "{o:?}");
    // 126 states, 12 dropped at each end
    assert_eq!(value(&stdout(&o), "levels "), 102.0);
    for f in ["stats.csv", "histogram.csv", "gfd.csv"] {
        assert!(d.join("inner").join(f).exists(), "{f}");
    }
    assert_eq!(fs::read_to_string(d.join("inner/histogram.csv")).unwrap().lines().count(), 26);

    let o = tbh(d, &["stats", "s.bhspec", "--window-around", "0", "--k", "30", "--out", "window"]);
    assert!(o.status.success(), "{o:?}");
    assert_eq!(value(&stdout(&o), "levels "), 30.0);

    let o = tbh(d, &["stats", "s.bhspec", "--bins", "10", "--out", "bins"]);
    assert!(o.status.success(), "{o:?}");
    assert_eq!(fs::read_to_string(d.join("bins/bins.csv")).unwrap().lines().count(), 11);
}

#[test]
fn interior_cache_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let o = tbh(d, &[
        "diag", "--L", "6", "--N", "6", "--J", "1", "--U", "0.354", "--F", "0.0935", "--interior", "0", "--k", "20",
        "--out", "i.bhspec",
    ]);
    assert!(o.status.success(), "{o:?}");
    let o = tbh(d, &["stats", "i.bhspec", "--window-around", "0", "--k", "20", "--out", "s"]);
    assert!(o.status.success(), "{o:?}");
    let gfd = fs::read_to_string(d.join("s/gfd.csv")).unwrap();
    assert!(gfd.lines().nth(1).unwrap().starts_with("1,20,"));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let o = tbh(d, &["diag", "--L", "1", "--N", "2", "--J", "1", "--U", "0", "--F", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());

    let o = tbh(d, &["diag", "--L", "5", "--N", "5", "--J", "1", "--U", "1", "--F", "1", "--dense-cap", "10"]);
    assert_eq!(o.status.code(), Some(3));

    assert!(tbh(d, &["diag", "--L", "4", "--N", "4", "--J", "1", "--U", "1", "--F", "1"]).status.success());
    let path = d.join("spectrum.bhspec");
    let mut bytes = fs::read(&path).unwrap();
    bytes[100] ^= 0xff;
    fs::write(&path, bytes).unwrap();
    assert_eq!(tbh(d, &["stats", "spectrum.bhspec"]).status.code(), Some(4));

    fs::write(d.join("bad.json"), "{").unwrap();
    assert_eq!(tbh(d, &["sweep", "bad.json"]).status.code(), Some(2));
}

#[test]
fn sweep_reports_failures_and_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    fs::write(
        d.join("c.json"),
        r#"{"output_dir": "out", "solver": {"dense_cap": 100},
            "campaign": {"type": "e0_grid", "L": 6, "N": 6,
                         "u_over_j": {"values": [1]}, "f_over_j": {"values": [1]}, "k": 5}}"#,
    )
    .unwrap();
    let o = tbh(d, &["sweep", "c.json", "--workers", "1"]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    assert!(String::from_utf8_lossy(&o.stderr).contains("failed e0_grid #0"));
    assert!(d.join("out/manifest.json").exists());
}

#[test]
fn goe_reference_is_seeded() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let args = |out: &'static str| ["goe", "200", "2", "9", "--vectors", "50", "--out", out];
    assert!(tbh(d, &args("a.csv")).status.success());
    assert!(tbh(d, &args("b.csv")).status.success());
    let a = fs::read_to_string(d.join("a.csv")).unwrap();
    assert_eq!(a, fs::read_to_string(d.join("b.csv")).unwrap());
    assert!(a.contains("mean_r,"));
    assert_eq!(tbh(d, &["goe", "50", "2", "9"]).status.code(), Some(2));
}
