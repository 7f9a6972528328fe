//! Snapshot files: raw spectral coefficients plus a JSON manifest.
//!
//! `<stem>.json` holds the grid, fluid parameters and snapshot times.
//! `<stem>.bin` holds, for each time in order, the fields `ρ̃, m₁, m₂`, each
//! as `n²` complex coefficients in row-major order, every number a
//! little-endian `f64` (real part first). Round trips are bit-exact.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiles::FluidParams;
use crate::spectral::{Grid, SpectralField, State};

pub const SNAPSHOT_FORMAT: &str = "cnslab-snapshot";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotManifest {
    pub format: String,
    pub version: u32,
    pub grid: Grid,
    pub params: FluidParams,
    pub times: Vec<f64>,
    pub fields: Vec<String>,
    /// Data file name, relative to the manifest.
    pub data: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSet {
    pub grid: Grid,
    pub params: FluidParams,
    pub times: Vec<f64>,
    pub states: Vec<State>,
}

/// Writes `<dir>/<stem>.json` and `<dir>/<stem>.bin`; returns the manifest path.
pub fn write_snapshots(dir: &Path, stem: &str, set: &SnapshotSet) -> Result<PathBuf> {
    if set.times.len() != set.states.len() {
        return Err(Error::Shape {
            expected: set.times.len(),
            got: set.states.len(),
        });
    }
    let data_name = format!("{stem}.bin");
    let mut out = BufWriter::new(fs::File::create(dir.join(&data_name))?);
    for state in &set.states {
        if state.grid() != &set.grid {
            return Err(Error::GridMismatch);
        }
        for field in state.fields() {
            for c in &field.coeffs {
                out.write_all(&c.re.to_le_bytes())?;
                out.write_all(&c.im.to_le_bytes())?;
            }
        }
    }
    out.flush()?;
    let manifest = SnapshotManifest {
        format: SNAPSHOT_FORMAT.into(),
        version: SNAPSHOT_VERSION,
        grid: set.grid,
        params: set.params,
        times: set.times.clone(),
        fields: vec!["rho".into(), "m1".into(), "m2".into()],
        data: data_name,
    };
    let path = dir.join(format!("{stem}.json"));
    fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(path)
}

pub fn read_snapshots(manifest_path: &Path) -> Result<SnapshotSet> {
    let manifest: SnapshotManifest = serde_json::from_str(&fs::read_to_string(manifest_path)?)?;
    if manifest.format != SNAPSHOT_FORMAT || manifest.version != SNAPSHOT_VERSION {
        return Err(Error::Snapshot(format!(
            "unsupported format {} v{}",
            manifest.format, manifest.version
        )));
    }
    if manifest.fields.len() != 3 {
        return Err(Error::Snapshot("expected fields rho, m1, m2".into()));
    }
    let grid = Grid::new(manifest.grid.n(), manifest.grid.length())?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let bytes = fs::read(dir.join(&manifest.data))?;
    let per_field = grid.len() * 16;
    let expected = manifest.times.len() * 3 * per_field;
    if bytes.len() != expected {
        return Err(Error::Snapshot(format!(
            "data file has {} bytes, expected {expected}",
            bytes.len()
        )));
    }
    let read_f64 =
        |off: usize| f64::from_le_bytes(bytes[off..off + 8].try_into().expect("8 bytes"));
    let field = |start: usize| -> Result<SpectralField> {
        let coeffs = (0..grid.len())
            .map(|k| Complex64::new(read_f64(start + 16 * k), read_f64(start + 16 * k + 8)))
            .collect();
        SpectralField::from_coeffs(grid, coeffs)
    };
    let states = (0..manifest.times.len())
        .map(|s| {
            let base = s * 3 * per_field;
            State::new(
                field(base)?,
                [field(base + per_field)?, field(base + 2 * per_field)?],
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SnapshotSet {
        grid,
        params: manifest.params,
        times: manifest.times,
        states,
    })
}
