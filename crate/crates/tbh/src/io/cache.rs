//! `BHSPEC1` spectrum cache with a JSON sidecar.
//!
//! Little-endian layout:
//!
//! ```text
//! magic      8 bytes  "BHSPEC1\0"
//! sites      u64
//! particles  u64
//! J, U, F    f64 x 3
//! kind       u64      0 full, 1 interior
//! target     f64      NaN for a full spectrum
//! count      u64      number of energies
//! dim        u64      basis dimension
//! vectors    u64      0 or 1
//! energies   f64 x count
//! vectors    f64 x count x dim, one eigenvector per row
//! ```
//!
//! The sidecar `<file>.json` repeats the header, adds solver settings and
//! notes, and holds the SHA-256 of the binary file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tbh_core::{EigenVectors, ModelParams, Spectrum, SpectrumKind, SpectrumNote};

use super::{sha256_hex, write_atomic};
use crate::eigensolve::SolverConfig;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"BHSPEC1\0";
const HEADER_LEN: usize = 8 + 10 * 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub format: String,
    #[serde(rename = "L")]
    pub sites: usize,
    #[serde(rename = "N")]
    pub particles: usize,
    #[serde(rename = "J")]
    pub hopping: f64,
    #[serde(rename = "U")]
    pub interaction: f64,
    #[serde(rename = "F")]
    pub tilt: f64,
    pub kind: String,
    pub target: Option<f64>,
    pub count: usize,
    pub dim: usize,
    pub has_vectors: bool,
    pub residual_tol: f64,
    pub solver: SolverSettings,
    pub notes: Vec<String>,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub dense_cap: usize,
    pub residual_tol: f64,
    pub budget_per_pair: usize,
    pub seed: u64,
}

impl From<&SolverConfig> for SolverSettings {
    fn from(c: &SolverConfig) -> Self {
        Self {
            dense_cap: c.dense_cap,
            residual_tol: c.residual_tol,
            budget_per_pair: c.budget_per_pair,
            seed: c.seed,
        }
    }
}

/// A spectrum together with the model it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct CachedSpectrum {
    pub params: ModelParams,
    pub dim: usize,
    pub spectrum: Spectrum,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn encode(params: &ModelParams, dim: usize, spectrum: &Spectrum) -> Vec<u8> {
    let count = spectrum.len();
    let vectors = spectrum.vectors.as_ref();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * count * (1 + vectors.map_or(0, |_| dim)));
    out.extend_from_slice(MAGIC);
    let (kind, target) = match spectrum.kind {
        SpectrumKind::Full => (0u64, f64::NAN),
        SpectrumKind::Interior { target, .. } => (1, target),
    };
    for v in [params.sites as u64, params.particles as u64] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in [params.hopping, params.interaction, params.tilt] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&kind.to_le_bytes());
    out.extend_from_slice(&target.to_le_bytes());
    for v in [count as u64, dim as u64, u64::from(vectors.is_some())] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for e in &spectrum.energies {
        out.extend_from_slice(&e.to_le_bytes());
    }
    if let Some(v) = vectors {
        for x in v.as_slice() {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Option<&[u8]> {
        let s = self.bytes.get(self.at..self.at.checked_add(n)?)?;
        self.at += n;
        Some(s)
    }

    fn u64(&mut self) -> Option<u64> {
        Some(u64::from_le_bytes(self.take(8)?.try_into().ok()?))
    }

    fn f64(&mut self) -> Option<f64> {
        Some(f64::from_le_bytes(self.take(8)?.try_into().ok()?))
    }

    fn f64s(&mut self, n: usize) -> Option<Vec<f64>> {
        let raw = self.take(n.checked_mul(8)?)?;
        Some(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

pub fn decode(bytes: &[u8], residual_tol: f64) -> std::result::Result<CachedSpectrum, String> {
    let mut r = Reader { bytes, at: 0 };
    if r.take(8) != Some(MAGIC.as_slice()) {
        return Err("not a BHSPEC1 file".into());
    }
    let short = || "truncated header".to_string();
    let sites = r.u64().ok_or_else(short)? as usize;
    let particles = r.u64().ok_or_else(short)? as usize;
    let (j, u, f) = (r.f64().ok_or_else(short)?, r.f64().ok_or_else(short)?, r.f64().ok_or_else(short)?);
    let kind = r.u64().ok_or_else(short)?;
    let target = r.f64().ok_or_else(short)?;
    let count = r.u64().ok_or_else(short)? as usize;
    let dim = r.u64().ok_or_else(short)? as usize;
    let has_vectors = r.u64().ok_or_else(short)?;
    let energies = r.f64s(count).ok_or("truncated energies")?;
    let vectors = match has_vectors {
        0 => None,
        1 => {
            let data = r.f64s(count.checked_mul(dim).ok_or("vector block overflows")?).ok_or("truncated vectors")?;
            Some(EigenVectors::new(dim, data).map_err(|e| e.to_string())?)
        }
        v => return Err(format!("bad vector flag {v}")),
    };
    if r.at != bytes.len() {
        return Err(format!("{} trailing bytes", bytes.len() - r.at));
    }
    let kind = match kind {
        0 => SpectrumKind::Full,
        1 => SpectrumKind::Interior { target, count },
        k => return Err(format!("unknown spectrum kind {k}")),
    };
    let spectrum = Spectrum::new(energies, vectors, kind, residual_tol).map_err(|e| e.to_string())?;
    Ok(CachedSpectrum {
        params: ModelParams::new(sites, particles, j, u, f),
        dim,
        spectrum,
    })
}

/// Writes `path` and its sidecar; returns the checksum.
pub fn write(path: &Path, params: &ModelParams, dim: usize, spectrum: &Spectrum, solver: &SolverConfig) -> Result<String> {
    let bytes = encode(params, dim, spectrum);
    let sha256 = sha256_hex(&bytes);
    write_atomic(path, &bytes)?;
    let (kind, target) = match spectrum.kind {
        SpectrumKind::Full => ("full", None),
        SpectrumKind::Interior { target, .. } => ("interior", Some(target)),
    };
    let sidecar = Sidecar {
        format: "BHSPEC1".into(),
        sites: params.sites,
        particles: params.particles,
        hopping: params.hopping,
        interaction: params.interaction,
        tilt: params.tilt,
        kind: kind.into(),
        target,
        count: spectrum.len(),
        dim,
        has_vectors: spectrum.vectors.is_some(),
        residual_tol: spectrum.residual_tol,
        solver: solver.into(),
        notes: spectrum.notes.iter().map(describe_note).collect(),
        sha256: sha256.clone(),
    };
    let json = serde_json::to_vec_pretty(&sidecar).expect("sidecar serializes");
    write_atomic(&sidecar_path(path), &json)?;
    Ok(sha256)
}

fn describe_note(note: &SpectrumNote) -> String {
    match note {
        SpectrumNote::DegenerateCutoff { kept, dropped } => {
            format!("degenerate cutoff: kept {kept:e}, dropped {dropped:e}")
        }
    }
}

/// Reads `path`, verifying it against the sidecar checksum.
pub fn read(path: &Path) -> Result<(CachedSpectrum, Sidecar)> {
    let side_path = sidecar_path(path);
    let side_bytes = fs::read(&side_path).map_err(|e| Error::io(&side_path, e))?;
    let sidecar: Sidecar = serde_json::from_slice(&side_bytes).map_err(|e| Error::Format {
        path: side_path.clone(),
        reason: e.to_string(),
    })?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let found = sha256_hex(&bytes);
    if found != sidecar.sha256 {
        return Err(Error::Checksum {
            path: path.into(),
            expected: sidecar.sha256,
            found,
        });
    }
    let cached = decode(&bytes, sidecar.residual_tol).map_err(|reason| Error::Format { path: path.into(), reason })?;
    Ok((cached, sidecar))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (ModelParams, Spectrum) {
        let v = EigenVectors::new(3, vec![1.0, 0.0, 0.0, 0.0, 0.6, 0.8]).unwrap();
        let mut s = Spectrum::new(vec![-0.25, 1.5], Some(v), SpectrumKind::Interior { target: 0.0, count: 2 }, 1e-10).unwrap();
        s.notes.push(SpectrumNote::DegenerateCutoff { kept: 1.5, dropped: -1.5 });
        (ModelParams::new(2, 2, 1.0, 0.5, 0.1), s)
    }

    #[test]
    fn round_trip_and_header() {
        let (p, s) = sample();
        let bytes = encode(&p, 3, &s);
        assert_eq!(&bytes[..8], MAGIC);
        assert_eq!(bytes.len(), HEADER_LEN + 8 * (2 + 6));
        let back = decode(&bytes, 1e-10).unwrap();
        assert_eq!(back.params, p);
        assert_eq!(back.spectrum.energies, s.energies);
        assert_eq!(back.spectrum.vectors, s.vectors);
        assert_eq!(back.spectrum.kind, s.kind);
    }

    #[test]
    fn rejects_damage() {
        let (p, s) = sample();
        let bytes = encode(&p, 3, &s);
        assert!(decode(&bytes[..bytes.len() - 1], 0.0).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode(&extra, 0.0).is_err());
        let mut bad = bytes;
        bad[0] = b'X';
        assert!(decode(&bad, 0.0).is_err());
    }

    #[test]
    fn checksum_mismatch_is_an_integrity_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.bhspec");
        let (p, s) = sample();
        write(&path, &p, 3, &s, &SolverConfig::default()).unwrap();
        let (back, side) = read(&path).unwrap();
        assert_eq!(back.spectrum.energies, s.energies);
        assert_eq!(side.notes.len(), 1);
        let mut bytes = fs::read(&path).unwrap();
        let last = bytes.len() - 1;
        bytes[last] ^= 1;
        fs::write(&path, bytes).unwrap();
        let err = read(&path).unwrap_err();
        assert_eq!(err.exit_code(), crate::exit::INTEGRITY);
    }
}
