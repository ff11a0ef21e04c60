//! File formats: Field CSV (`z,theta,value` triples) and a compact binary
//! dump with an explicit header, relaxation history CSV, and JSON for
//! reports and norm sets.

use crate::error::{Error, Result};
use crate::grid::{make_grids, Field, GridConfig, Grids};
use crate::relaxation::HistoryEntry;
use crate::report::Report;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

/// Magic bytes of the binary field dump.
pub const FIELD_MAGIC: &[u8; 4] = b"SSBF";
/// Binary format version.
pub const FIELD_VERSION: u32 = 1;

/// Write a field as CSV with a `z,theta,value` header.
pub fn write_field_csv(f: &Field, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "z,theta,value")?;
    for (i, &z) in f.grids.radial.nodes.iter().enumerate() {
        for (j, &t) in f.grids.angular.nodes.iter().enumerate() {
            writeln!(w, "{:.17e},{:.17e},{:.17e}", z, t, f.values[[i, j]])?;
        }
    }
    Ok(())
}

/// Binary dump: magic, version, n_z, n_theta, grid parameters
/// (z_min, z_max, refinement levels), then row-major little-endian doubles.
pub fn write_field_binary(f: &Field, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    w.write_all(FIELD_MAGIC)?;
    w.write_all(&FIELD_VERSION.to_le_bytes())?;
    let cfg = &f.grids.config;
    w.write_all(&(f.n_z() as u32).to_le_bytes())?;
    w.write_all(&(f.n_theta() as u32).to_le_bytes())?;
    w.write_all(&cfg.z_min.to_le_bytes())?;
    w.write_all(&cfg.z_max.to_le_bytes())?;
    w.write_all(&(cfg.endpoint_refinement as u32).to_le_bytes())?;
    for v in f.values.iter() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Read a binary field dump, rebuilding the grids from the header.
pub fn read_field_binary(path: &Path) -> Result<Field> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != FIELD_MAGIC {
        return Err(Error::Io(format!("bad magic {magic:?} in {path:?}")));
    }
    let mut u32buf = [0u8; 4];
    let mut f64buf = [0u8; 8];
    r.read_exact(&mut u32buf)?;
    let version = u32::from_le_bytes(u32buf);
    if version != FIELD_VERSION {
        return Err(Error::Io(format!("unsupported field version {version}")));
    }
    r.read_exact(&mut u32buf)?;
    let n_z = u32::from_le_bytes(u32buf) as usize;
    r.read_exact(&mut u32buf)?;
    let n_theta = u32::from_le_bytes(u32buf) as usize;
    r.read_exact(&mut f64buf)?;
    let z_min = f64::from_le_bytes(f64buf);
    r.read_exact(&mut f64buf)?;
    let z_max = f64::from_le_bytes(f64buf);
    r.read_exact(&mut u32buf)?;
    let levels = u32::from_le_bytes(u32buf) as usize;
    let grids = make_grids(GridConfig {
        n_z,
        n_theta,
        z_min,
        z_max,
        endpoint_refinement: levels,
    })?;
    if grids.angular.len() != n_theta {
        return Err(Error::Io(format!(
            "angular grid rebuilt with {} nodes, dump has {n_theta}",
            grids.angular.len()
        )));
    }
    let mut f = Field::zeros(&grids);
    for i in 0..n_z {
        for j in 0..n_theta {
            r.read_exact(&mut f64buf)?;
            f.values[[i, j]] = f64::from_le_bytes(f64buf);
        }
    }
    Ok(f)
}

/// Read the CSV form back onto freshly built grids (the triples must match
/// the grid layout they were written from).
pub fn read_field_csv(path: &Path, grids: &Arc<Grids>) -> Result<Field> {
    let r = BufReader::new(std::fs::File::open(path)?);
    let mut f = Field::zeros(grids);
    let n_t = grids.angular.len();
    for (row, line) in r.lines().enumerate() {
        let line = line?;
        if row == 0 {
            continue;
        }
        let idx = row - 1;
        let (i, j) = (idx / n_t, idx % n_t);
        let v = line
            .rsplit(',')
            .next()
            .ok_or_else(|| Error::Io(format!("short CSV row {row}")))?
            .trim()
            .parse::<f64>()
            .map_err(|e| Error::Io(format!("row {row}: {e}")))?;
        if i >= grids.radial.len() {
            return Err(Error::Io(format!("CSV has more rows than the grid ({row})")));
        }
        f.values[[i, j]] = v;
    }
    Ok(f)
}

/// Relaxation history CSV with a documented column header.
pub fn write_history_csv(history: &[HistoryEntry], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "tau,h_minus1,h2_eta,e2_eta,mu_abs,dtau_norm,wz_l2")?;
    for e in history {
        writeln!(
            w,
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            e.tau, e.h_minus1, e.h2_eta, e.e2_eta, e.mu_abs, e.dtau_norm, e.wz_l2
        )?;
    }
    Ok(())
}

/// Reports as a JSON array.
pub fn write_reports_json(reports: &[Report], path: &Path) -> Result<()> {
    let w = BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(w, reports).map_err(|e| Error::Io(e.to_string()))
}

/// Any serializable value as pretty JSON.
pub fn write_json<T: serde::Serialize>(value: &T, path: &Path) -> Result<()> {
    let w = BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(w, value).map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_roundtrip_is_exact() {
        let grids = make_grids(GridConfig {
            n_z: 32,
            n_theta: 16,
            ..Default::default()
        })
        .unwrap();
        let f = Field::from_fn(&grids, |z, t| (z.ln() * 0.1).sin() * (2.0 * t).sin());
        let dir = std::env::temp_dir().join("ssblow_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("field.bin");
        write_field_binary(&f, &path).unwrap();
        let g = read_field_binary(&path).unwrap();
        assert_eq!(f.values, g.values);
        assert_eq!(f.grids.radial.nodes, g.grids.radial.nodes);
    }

    #[test]
    fn csv_roundtrip_preserves_values() {
        let grids = make_grids(GridConfig {
            n_z: 16,
            n_theta: 16,
            ..Default::default()
        })
        .unwrap();
        let f = Field::from_fn(&grids, |z, t| z / (1.0 + z) * t.cos());
        let dir = std::env::temp_dir().join("ssblow_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("field.csv");
        write_field_csv(&f, &path).unwrap();
        let g = read_field_csv(&path, &grids).unwrap();
        let diff = f.sub(&g).max_abs();
        assert!(diff == 0.0, "CSV roundtrip diff {diff}");
    }
}
