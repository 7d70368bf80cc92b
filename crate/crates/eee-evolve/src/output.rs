//! Deterministic file output: diagnostics CSV, flat binary snapshots, and
//! a JSON run manifest.
//!
//! All files are written atomically (temporary file in the same directory,
//! then rename), and all floating-point formatting uses a fixed 17
//! significant-digit scientific format, so identical runs produce
//! byte-identical files.

use crate::grid::{FieldSet, Grid};
use crate::state::{field_names, NFIELDS};
use crate::{Error, Result};
use std::io::Write;
use std::path::{Path, PathBuf};

/// Version tag of the diagnostics CSV schema, echoed in the manifest.
pub const CSV_SCHEMA: &str = "1";

/// Column names of the diagnostics CSV, in order.
pub const CSV_COLUMNS: &[&str] = &[
    "t",
    "rho",
    "hubble_trace",
    "torsion_linf",
    "torsion_h1ul",
    "riemann_decomp_linf",
    "riemann_decomp_h1ul",
    "friedrich_linf",
    "friedrich_h1ul",
    "euler_linf",
    "euler_h1ul",
    "euler_time_linf",
    "euler_time_h1ul",
    "entropy_grad_linf",
    "entropy_grad_h1ul",
    "weyl_e_trace",
    "weyl_b_trace",
    "eos_drift",
    "speed_min",
    "speed_max",
    "m0_min_eig",
    "gt_max_eig",
];

/// Fixed float format used everywhere in text output.
pub fn fmt(v: f64) -> String {
    format!("{v:.17e}")
}

/// Write `bytes` to `path` atomically (same-directory temp file + rename).
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Accumulates diagnostics rows and writes the whole CSV atomically on
/// [`CsvWriter::finish`].
pub struct CsvWriter {
    path: PathBuf,
    buf: String,
}

impl CsvWriter {
    pub fn new(path: PathBuf) -> Self {
        let mut buf = String::new();
        buf.push_str(&CSV_COLUMNS.join(","));
        buf.push('\n');
        CsvWriter { path, buf }
    }

    pub fn row(&mut self, values: &[f64]) {
        assert_eq!(values.len(), CSV_COLUMNS.len(), "CSV row arity");
        let mut first = true;
        for &v in values {
            if !first {
                self.buf.push(',');
            }
            first = false;
            self.buf.push_str(&fmt(v));
        }
        self.buf.push('\n');
    }

    pub fn finish(self) -> Result<PathBuf> {
        write_atomic(&self.path, self.buf.as_bytes())?;
        Ok(self.path)
    }
}

const SNAPSHOT_MAGIC: &[u8; 8] = b"EEESNAP1";

/// Write a snapshot: magic, `n`, `h`, `t`, the field-name table, then the
/// raw point-major little-endian doubles.
pub fn write_snapshot(path: &Path, t: f64, fs: &FieldSet) -> Result<()> {
    let mut buf: Vec<u8> = Vec::with_capacity(64 + fs.data.len() * NFIELDS * 8);
    buf.extend_from_slice(SNAPSHOT_MAGIC);
    buf.extend_from_slice(&(fs.grid.n as u64).to_le_bytes());
    buf.extend_from_slice(&fs.grid.h.to_le_bytes());
    buf.extend_from_slice(&t.to_le_bytes());
    let names = field_names();
    buf.extend_from_slice(&(names.len() as u32).to_le_bytes());
    for name in &names {
        let b = name.as_bytes();
        buf.extend_from_slice(&(b.len() as u32).to_le_bytes());
        buf.extend_from_slice(b);
    }
    for z in &fs.data {
        for &v in z.iter() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    write_atomic(path, &buf)
}

fn take<'a>(bytes: &mut &'a [u8], n: usize, what: &str) -> Result<&'a [u8]> {
    if bytes.len() < n {
        return Err(Error::Other(format!("snapshot truncated reading {what}")));
    }
    let (head, rest) = bytes.split_at(n);
    *bytes = rest;
    Ok(head)
}

/// Read a snapshot written by [`write_snapshot`]. Validates the magic and
/// the field-name table against the current state layout.
pub fn read_snapshot(path: &Path) -> Result<(f64, FieldSet)> {
    let raw = std::fs::read(path)?;
    let mut b: &[u8] = &raw;
    if take(&mut b, 8, "magic")? != SNAPSHOT_MAGIC {
        return Err(Error::Other(format!("{}: not a snapshot file", path.display())));
    }
    let n = u64::from_le_bytes(take(&mut b, 8, "n")?.try_into().unwrap()) as usize;
    let h = f64::from_le_bytes(take(&mut b, 8, "h")?.try_into().unwrap());
    let t = f64::from_le_bytes(take(&mut b, 8, "t")?.try_into().unwrap());
    let nf = u32::from_le_bytes(take(&mut b, 4, "field count")?.try_into().unwrap()) as usize;
    let names = field_names();
    if nf != names.len() {
        return Err(Error::Other(format!(
            "snapshot has {nf} fields, expected {}",
            names.len()
        )));
    }
    for name in &names {
        let len = u32::from_le_bytes(take(&mut b, 4, "name length")?.try_into().unwrap()) as usize;
        let got = take(&mut b, len, "field name")?;
        if got != name.as_bytes() {
            return Err(Error::Other(format!(
                "snapshot field {:?} does not match expected {name:?}",
                String::from_utf8_lossy(got)
            )));
        }
    }
    let grid = Grid::new(n, h);
    let mut fs = FieldSet::zeros(grid);
    for z in fs.data.iter_mut() {
        for v in z.iter_mut() {
            *v = f64::from_le_bytes(take(&mut b, 8, "data")?.try_into().unwrap());
        }
    }
    if !b.is_empty() {
        return Err(Error::Other("snapshot has trailing bytes".into()));
    }
    Ok((t, fs))
}

/// Write the run manifest as pretty JSON, atomically.
pub fn write_manifest(path: &Path, manifest: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(manifest)
        .map_err(|e| Error::Other(format!("manifest serialization: {e}")))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::{EntropicPolytrope, EquationOfState};
    use crate::state::State;

    #[test]
    fn csv_output_is_deterministic_and_well_formed() {
        let dir = tempfile::tempdir().unwrap();
        let make = |name: &str| {
            let mut w = CsvWriter::new(dir.path().join(name));
            w.row(&vec![0.125; CSV_COLUMNS.len()]);
            w.row(&vec![1.0 / 3.0; CSV_COLUMNS.len()]);
            w.finish().unwrap()
        };
        let a = std::fs::read(make("a.csv")).unwrap();
        let b = std::fs::read(make("b.csv")).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        for line in lines {
            assert_eq!(line.split(',').count(), CSV_COLUMNS.len());
        }
    }

    #[test]
    fn snapshots_round_trip_bit_exactly() {
        let eos = EntropicPolytrope::new(2.0);
        let th = eos.at(1.3, 0.2);
        let grid = Grid::unit_box(6);
        let mut fs = FieldSet::uniform(grid, State::minkowski_rest(th.rho, 1.3, 0.2).0);
        // make the content non-uniform so ordering errors would show
        for (i, z) in fs.data.iter_mut().enumerate() {
            z[crate::state::SLOT_RMASS] += 1e-3 * (i as f64).sin();
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.bin");
        write_snapshot(&path, 0.75, &fs).unwrap();
        let (t, back) = read_snapshot(&path).unwrap();
        assert_eq!(t, 0.75);
        assert_eq!(back.grid, fs.grid);
        for (a, b) in back.data.iter().zip(&fs.data) {
            for k in 0..NFIELDS {
                assert!(a[k].to_bits() == b[k].to_bits());
            }
        }
        // corrupted magic is rejected
        let mut raw = std::fs::read(&path).unwrap();
        raw[0] ^= 0xff;
        std::fs::write(dir.path().join("bad.bin"), &raw).unwrap();
        assert!(read_snapshot(&dir.path().join("bad.bin")).is_err());
    }
}
