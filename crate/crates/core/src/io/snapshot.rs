//! Field snapshots.
//!
//! Text format: header lines starting with `#` (`key value`), then one
//! `re im` pair per line in field order (x1 fastest).
//!
//! Binary format, all little-endian: the 16-byte magic `SWAPGATE-SNAP-01`,
//! `u64` dim, `u64` n, `f64` extent, `f64` time, `f64` norm, `u64` label
//! length, the UTF-8 label, then `n^dim` pairs of `f64` (re, im).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{ComplexField, Grid};

pub const BINARY_MAGIC: &[u8; 16] = b"SWAPGATE-SNAP-01";

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub field: ComplexField,
    pub time: f64,
    /// Protocol that produced the field.
    pub label: String,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Config(format!("snapshot: {}", msg.into()))
}

pub fn write_text(path: &Path, snap: &Snapshot) -> Result<()> {
    let grid = snap.field.grid();
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# swapgate snapshot")?;
    writeln!(w, "# dim {}", grid.dim())?;
    writeln!(w, "# n {}", grid.n())?;
    writeln!(w, "# extent_m {:e}", grid.extent())?;
    writeln!(w, "# time_s {:e}", snap.time)?;
    writeln!(w, "# protocol {}", snap.label)?;
    writeln!(w, "# norm {:e}", snap.field.norm_sq())?;
    for v in snap.field.values() {
        writeln!(w, "{:e} {:e}", v.re, v.im)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_text(path: &Path) -> Result<Snapshot> {
    let reader = BufReader::new(File::open(path)?);
    let (mut dim, mut n, mut extent, mut time, mut label) = (None, None, None, 0.0, String::new());
    let mut values = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(h) = line.strip_prefix('#') {
            let mut parts = h.trim().splitn(2, ' ');
            let key = parts.next().unwrap_or("");
            let val = parts.next().unwrap_or("").trim();
            let num = || val.parse::<f64>().map_err(|_| bad(format!("bad value for {key}")));
            match key {
                "dim" => dim = Some(num()? as usize),
                "n" => n = Some(num()? as usize),
                "extent_m" => extent = Some(num()?),
                "time_s" => time = num()?,
                "protocol" => label = val.to_string(),
                _ => {}
            }
            continue;
        }
        let mut it = line.split_whitespace().map(str::parse::<f64>);
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(re)), Some(Ok(im)), None) => values.push(Complex64::new(re, im)),
            _ => return Err(bad(format!("bad record `{line}`"))),
        }
    }
    let grid = Grid::new(
        extent.ok_or_else(|| bad("missing extent"))?,
        n.ok_or_else(|| bad("missing n"))?,
        dim.ok_or_else(|| bad("missing dim"))?,
    )?;
    if values.len() != grid.len() {
        return Err(bad(format!("expected {} records, found {}", grid.len(), values.len())));
    }
    Ok(Snapshot { field: ComplexField::new(grid, values)?, time, label })
}

pub fn write_binary(path: &Path, snap: &Snapshot) -> Result<()> {
    let grid = snap.field.grid();
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(BINARY_MAGIC)?;
    w.write_all(&(grid.dim() as u64).to_le_bytes())?;
    w.write_all(&(grid.n() as u64).to_le_bytes())?;
    w.write_all(&grid.extent().to_le_bytes())?;
    w.write_all(&snap.time.to_le_bytes())?;
    w.write_all(&snap.field.norm_sq().to_le_bytes())?;
    w.write_all(&(snap.label.len() as u64).to_le_bytes())?;
    w.write_all(snap.label.as_bytes())?;
    for v in snap.field.values() {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_binary(path: &Path) -> Result<Snapshot> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 16];
    r.read_exact(&mut magic)?;
    if &magic != BINARY_MAGIC {
        return Err(bad("not a binary snapshot"));
    }
    let mut b = [0u8; 8];
    let mut u64_ = |r: &mut BufReader<File>| -> Result<u64> {
        r.read_exact(&mut b)?;
        Ok(u64::from_le_bytes(b))
    };
    let dim = u64_(&mut r)? as usize;
    let n = u64_(&mut r)? as usize;
    let extent = f64::from_bits(u64_(&mut r)?);
    let time = f64::from_bits(u64_(&mut r)?);
    let _norm = f64::from_bits(u64_(&mut r)?);
    let len = u64_(&mut r)? as usize;
    if len > 1 << 16 {
        return Err(bad("label too long"));
    }
    let mut label = vec![0u8; len];
    r.read_exact(&mut label)?;
    let label = String::from_utf8(label).map_err(|_| bad("label is not UTF-8"))?;
    let grid = Grid::new(extent, n, dim)?;
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        let re = f64::from_bits(u64_(&mut r)?);
        let im = f64::from_bits(u64_(&mut r)?);
        values.push(Complex64::new(re, im));
    }
    Ok(Snapshot { field: ComplexField::new(grid, values)?, time, label })
}

/// Reads either format, by magic.
pub fn read_any(path: &Path) -> Result<Snapshot> {
    let mut head = [0u8; 16];
    let is_binary = File::open(path)?.read_exact(&mut head).is_ok() && &head == BINARY_MAGIC;
    if is_binary {
        read_binary(path)
    } else {
        read_text(path)
    }
}

/// `arg(psi)/pi` in field order, for phase maps.
pub fn write_phase(path: &Path, field: &ComplexField, time: f64) -> Result<()> {
    let grid = field.grid();
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# swapgate phase map, arg(psi)/pi")?;
    writeln!(w, "# dim {}", grid.dim())?;
    writeln!(w, "# n {}", grid.n())?;
    writeln!(w, "# extent_m {:e}", grid.extent())?;
    writeln!(w, "# time_s {:e}", time)?;
    for v in field.values() {
        writeln!(w, "{:e}", v.arg() / std::f64::consts::PI)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Snapshot {
        let grid = Grid::new(3.0e-6, 16, 2).unwrap();
        let field = ComplexField::from_fn_2d(grid, |a, b| Complex64::new((a * 1e6).sin() + 0.1, (b * 3e5).cos() / 3.0)).unwrap();
        Snapshot { field, time: 1.234_567_890_123e-5, label: "fast-gate".into() }
    }

    #[test]
    fn text_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.txt");
        let s = sample();
        write_text(&p, &s).unwrap();
        let back = read_any(&p).unwrap();
        assert_eq!(back.label, s.label);
        assert_eq!(back.time, s.time);
        assert_eq!(back.field.grid(), s.field.grid());
        for (a, b) in back.field.values().iter().zip(s.field.values()) {
            assert!((a - b).norm() <= 1e-12 * b.norm());
        }
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.bin");
        let s = sample();
        write_binary(&p, &s).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        assert_eq!(&bytes[..16], BINARY_MAGIC);
        assert_eq!(bytes.len(), 16 + 6 * 8 + s.label.len() + 16 * s.field.values().len());
        assert_eq!(read_any(&p).unwrap(), s);
    }

    #[test]
    fn rejects_truncated_text() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.txt");
        std::fs::write(&p, "# dim 1\n# n 8\n# extent_m 1e-6\n1 2\n").unwrap();
        assert!(read_text(&p).is_err());
        std::fs::write(&p, "# dim 1\n# n 8\n1 2 3\n").unwrap();
        assert!(read_text(&p).is_err());
    }
}
