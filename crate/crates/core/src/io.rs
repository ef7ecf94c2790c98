//! Run-directory persistence: snapshots, series tables and atomic writes.
//!
//! Snapshot layout, little-endian: `"XNLS"`, `n: u32`, `l: f64`, `t: f64`, `count: u64`
//! (32 bytes), then `count = n²` row-major `(re, im)` pairs of `f64`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::error::{Result, XnlsError};
use crate::evolution::series::{virial_to_csv, DiagnosticsSeries};
use crate::evolution::{Observer, RunOutcome};
use crate::field::Field2D;
use crate::grid::GridSpec;

pub const MAGIC: &[u8; 4] = b"XNLS";
pub const HEADER_LEN: usize = 32;
pub const SNAPSHOT_DIR: &str = "snapshots";
pub const SERIES_FILE: &str = "series.csv";
pub const VIRIAL_FILE: &str = "virial.csv";

/// Write to a sibling temporary file, then rename over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| XnlsError::Format(format!("`{}` has no file name", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn encode_snapshot(t: f64, u: &Field2D) -> Vec<u8> {
    let grid = u.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * grid.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(grid.n as u32).to_le_bytes());
    out.extend_from_slice(&grid.l.to_le_bytes());
    out.extend_from_slice(&t.to_le_bytes());
    out.extend_from_slice(&(grid.len() as u64).to_le_bytes());
    for z in u.values() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

fn f64_at(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"))
}

/// `(t, u)` from snapshot bytes.
pub fn decode_snapshot(bytes: &[u8]) -> Result<(f64, Field2D)> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(XnlsError::Format("not a snapshot: bad magic or short header".into()));
    }
    let n = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
    let l = f64_at(bytes, 8);
    let t = f64_at(bytes, 16);
    let count = u64::from_le_bytes(bytes[24..32].try_into().expect("8 bytes")) as usize;
    let grid = GridSpec::new(n, l)?;
    if count != grid.len() || bytes.len() != HEADER_LEN + 16 * count {
        return Err(XnlsError::Format(format!(
            "snapshot declares {count} values for n = {n} in {} payload bytes",
            bytes.len() - HEADER_LEN
        )));
    }
    let values = bytes[HEADER_LEN..]
        .chunks_exact(16)
        .map(|c| Complex64::new(f64_at(c, 0), f64_at(c, 8)))
        .collect();
    Ok((t, Field2D::new(grid, values)?))
}

pub fn write_snapshot(path: &Path, t: f64, u: &Field2D) -> Result<()> {
    write_atomic(path, &encode_snapshot(t, u))
}

pub fn read_snapshot(path: &Path) -> Result<(f64, Field2D)> {
    decode_snapshot(&fs::read(path)?)
}

/// Time stamp from the header alone.
pub fn read_snapshot_time(path: &Path) -> Result<f64> {
    let mut head = [0u8; HEADER_LEN];
    let mut f = fs::File::open(path)?;
    std::io::Read::read_exact(&mut f, &mut head)
        .map_err(|e| XnlsError::Format(format!("`{}`: short header: {e}", path.display())))?;
    if &head[..4] != MAGIC {
        return Err(XnlsError::Format(format!("`{}` is not a snapshot", path.display())));
    }
    Ok(f64_at(&head, 16))
}

pub fn snapshot_path(run_dir: &Path, index: usize) -> PathBuf {
    run_dir.join(SNAPSHOT_DIR).join(format!("t_{index}.bin"))
}

/// Snapshot files of a run directory, ordered by output index.
pub fn list_snapshots(run_dir: &Path) -> Result<Vec<(usize, PathBuf)>> {
    let dir = run_dir.join(SNAPSHOT_DIR);
    let mut found = Vec::new();
    for entry in fs::read_dir(&dir)? {
        let path = entry?.path();
        let index = path
            .file_name()
            .and_then(|s| s.to_str())
            .and_then(|s| s.strip_prefix("t_"))
            .and_then(|s| s.strip_suffix(".bin"))
            .and_then(|s| s.parse::<usize>().ok());
        if let Some(i) = index {
            found.push((i, path));
        }
    }
    found.sort_by_key(|p| p.0);
    Ok(found)
}

/// Observer writing every `every`-th series sample to `snapshots/`.
pub struct SnapshotWriter {
    run_dir: PathBuf,
    every: usize,
    pub written: Vec<usize>,
}

impl SnapshotWriter {
    pub fn new(run_dir: &Path, every: usize) -> Result<Self> {
        fs::create_dir_all(run_dir.join(SNAPSHOT_DIR))?;
        Ok(SnapshotWriter { run_dir: run_dir.to_path_buf(), every: every.max(1), written: Vec::new() })
    }

    /// Write the final state if the cadence skipped it.
    pub fn finish(&mut self, index: usize, t: f64, u: &Field2D) -> Result<()> {
        if self.written.last() != Some(&index) {
            write_snapshot(&snapshot_path(&self.run_dir, index), t, u)?;
            self.written.push(index);
        }
        Ok(())
    }
}

impl Observer for SnapshotWriter {
    fn observe(&mut self, index: usize, t: f64, u: &Field2D) -> Result<()> {
        if index % self.every == 0 {
            write_snapshot(&snapshot_path(&self.run_dir, index), t, u)?;
            self.written.push(index);
        }
        Ok(())
    }
}

/// `series.csv` and `virial.csv` of a finished or aborted run.
pub fn write_tables(run_dir: &Path, outcome: &RunOutcome) -> Result<()> {
    fs::create_dir_all(run_dir)?;
    write_atomic(&run_dir.join(SERIES_FILE), outcome.series.to_csv().as_bytes())?;
    write_atomic(&run_dir.join(VIRIAL_FILE), virial_to_csv(&outcome.virial).as_bytes())?;
    Ok(())
}

pub fn read_series(run_dir: &Path) -> Result<DiagnosticsSeries> {
    DiagnosticsSeries::from_csv(&fs::read_to_string(run_dir.join(SERIES_FILE))?)
}
