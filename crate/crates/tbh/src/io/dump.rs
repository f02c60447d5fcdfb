//! Diagnostic coordinate-format dump of a Hamiltonian: `row col value` per
//! line, both triangles, 17 significant digits. Not read back by anything.

use std::fmt::Write;
use std::path::Path;

use tbh_core::SparseSymmetric;

use super::csv::float;
use crate::error::Result;

pub fn coordinates(matrix: &SparseSymmetric) -> String {
    let mut out = format!("% {} x {} symmetric\n", matrix.dim(), matrix.dim());
    for (i, &d) in matrix.diagonal().iter().enumerate() {
        let _ = writeln!(out, "{i} {i} {}", float(d));
    }
    for (r, c, v) in matrix.off_diagonal() {
        let v = float(v);
        let _ = writeln!(out, "{r} {c} {v}");
        let _ = writeln!(out, "{c} {r} {v}");
    }
    out
}

pub fn write_coordinates(matrix: &SparseSymmetric, path: &Path) -> Result<()> {
    super::write_atomic(path, coordinates(matrix).as_bytes())
}
