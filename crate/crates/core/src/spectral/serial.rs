//! Binary field records with a JSON sidecar.
//!
//! Layout (little endian): `u64` modes per axis, `f64` period, then for every wavevector
//! `k ∈ [-N/2, N/2)^3` in lexicographic order the three complex components as
//! `(re, im)` pairs of `f64`.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::domain::{DomainSpec, Grid};
use super::field::{leray_project, NormKind, SpectralField, Vec3c};
use crate::error::{NsvError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSidecar {
    pub modes_per_axis: usize,
    pub period: f64,
    pub l2: f64,
    pub h1: f64,
    pub vstar: f64,
    pub sha256: String,
}

fn lexicographic(n: usize) -> impl Iterator<Item = [i32; 3]> {
    let half = (n / 2) as i32;
    (-half..half)
        .flat_map(move |a| (-half..half).flat_map(move |b| (-half..half).map(move |c| [a, b, c])))
}

pub fn encode_field(u: &SpectralField) -> Vec<u8> {
    let grid = u.grid();
    let n = grid.n();
    let mut out = Vec::with_capacity(16 + grid.len() * 48);
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&grid.spec().period.to_le_bytes());
    for k in lexicographic(n) {
        let v = u.coeffs()[grid.index_of(k).expect("lexicographic k on grid")];
        for z in v {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

/// Decodes a record and checks it against the expected domain.
pub fn decode_field(bytes: &[u8], spec: &DomainSpec) -> Result<SpectralField> {
    let bad = |m: String| NsvError::InvalidInput(m);
    if bytes.len() < 16 {
        return Err(bad("field record shorter than its header".into()));
    }
    let n = u64::from_le_bytes(bytes[0..8].try_into().unwrap()) as usize;
    let period = f64::from_le_bytes(bytes[8..16].try_into().unwrap());
    if n != spec.modes_per_axis {
        return Err(bad(format!(
            "field truncation {n} does not match domain truncation {}",
            spec.modes_per_axis
        )));
    }
    if period.to_bits() != spec.period.to_bits() {
        return Err(bad(format!(
            "field period {period} does not match domain period {}",
            spec.period
        )));
    }
    let grid = Grid::new(*spec)?;
    let expected = 16 + grid.len() * 48;
    if bytes.len() != expected {
        return Err(bad(format!(
            "field record has {} bytes, expected {expected}",
            bytes.len()
        )));
    }
    let mut raw: Vec<Vec3c> = vec![[Complex64::default(); 3]; grid.len()];
    let mut words = bytes[16..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    for k in lexicographic(n) {
        let idx = grid.index_of(k).unwrap();
        for z in raw[idx].iter_mut() {
            let re = words.next().unwrap();
            let im = words.next().unwrap();
            *z = Complex64::new(re, im);
        }
    }
    let projected = leray_project(&grid, &raw)?;
    let drift: f64 = raw
        .iter()
        .zip(projected.coeffs())
        .map(|(a, b)| (0..3).map(|c| (a[c] - b[c]).norm_sqr()).sum::<f64>())
        .sum::<f64>()
        .sqrt();
    if drift > 1e-10 * projected.norm(NormKind::L2).max(1e-300) {
        return Err(bad(format!(
            "stored coefficients are not a valid divergence-free field (defect {drift:.3e})"
        )));
    }
    // keep the stored bits; only modes outside the retained set are cleared
    for (i, v) in raw.iter_mut().enumerate() {
        if !grid.is_retained(i) {
            *v = [Complex64::default(); 3];
        }
    }
    Ok(SpectralField::from_raw_unchecked(&grid, raw))
}

pub fn sidecar_for(u: &SpectralField, bytes: &[u8]) -> FieldSidecar {
    FieldSidecar {
        modes_per_axis: u.grid().n(),
        period: u.grid().spec().period,
        l2: u.norm(NormKind::L2),
        h1: u.norm(NormKind::H1),
        vstar: u.norm(NormKind::Vstar),
        sha256: hex::encode(Sha256::digest(bytes)),
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".json");
    PathBuf::from(p)
}

/// Writes `path` and `path.json`.
pub fn write_field(path: &Path, u: &SpectralField) -> Result<()> {
    let bytes = encode_field(u);
    let sidecar = sidecar_for(u, &bytes);
    fs::write(path, &bytes).map_err(|e| NsvError::io(path, e))?;
    let side = sidecar_path(path);
    let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    fs::write(&side, json).map_err(|e| NsvError::io(&side, e))?;
    Ok(())
}

/// Reads a field record; when a sidecar exists its checksum and norms must agree.
pub fn read_field(path: &Path, spec: &DomainSpec) -> Result<SpectralField> {
    let bytes = fs::read(path).map_err(|e| NsvError::io(path, e))?;
    let u = decode_field(&bytes, spec)?;
    let side = sidecar_path(path);
    if side.exists() {
        let text = fs::read_to_string(&side).map_err(|e| NsvError::io(&side, e))?;
        let stored: FieldSidecar = serde_json::from_str(&text)
            .map_err(|e| NsvError::InvalidInput(format!("bad sidecar {}: {e}", side.display())))?;
        let fresh = sidecar_for(&u, &bytes);
        if stored.sha256 != fresh.sha256 {
            return Err(NsvError::InvalidInput(format!(
                "checksum mismatch for {}",
                path.display()
            )));
        }
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300);
        if !(close(stored.l2, fresh.l2) && close(stored.h1, fresh.h1)) {
            return Err(NsvError::InvalidInput(format!(
                "sidecar norms disagree with {}",
                path.display()
            )));
        }
    }
    Ok(u)
}
