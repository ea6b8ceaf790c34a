//! Point cloud file formats.
//!
//! * CSV: one point per row, D numeric columns, optional header row.
//! * RKPC binary: magic `RKPC`, `u32` D, `u64` n, then n·D little-endian
//!   `f64` coordinates row-major.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::PointCloud;
use crate::error::{ReachError, Result};

pub const MAGIC: &[u8; 4] = b"RKPC";

pub fn read_csv<R: Read>(reader: R) -> Result<PointCloud> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut dim = None;
    let mut coords = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if row == 0 => continue, // header
            Err(e) => return Err(ReachError::Format(format!("row {}: {e}", row + 1))),
        };
        match dim {
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(ReachError::DimensionMismatch { expected: d, found: values.len() })
            }
            _ => {}
        }
        coords.extend(values);
    }
    let dim = dim.ok_or(ReachError::Empty)?;
    PointCloud::from_flat(dim, coords)
}

pub fn write_csv<W: Write>(cloud: &PointCloud, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let header: Vec<String> = (0..cloud.ambient_dim()).map(|d| format!("x{d}")).collect();
    wtr.write_record(&header)?;
    for p in cloud.points() {
        wtr.write_record(p.iter().map(|c| format!("{c:?}")))?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_binary<R: Read>(mut reader: R) -> Result<PointCloud> {
    let mut magic = [0u8; 4];
    reader.read_exact(&mut magic).map_err(|_| ReachError::Format("truncated header".into()))?;
    if &magic != MAGIC {
        return Err(ReachError::Format("bad magic, expected RKPC".into()));
    }
    let mut d = [0u8; 4];
    let mut n = [0u8; 8];
    reader.read_exact(&mut d).map_err(|_| ReachError::Format("truncated header".into()))?;
    reader.read_exact(&mut n).map_err(|_| ReachError::Format("truncated header".into()))?;
    let dim = u32::from_le_bytes(d) as usize;
    let n = u64::from_le_bytes(n) as usize;
    let total = dim
        .checked_mul(n)
        .ok_or_else(|| ReachError::Format("point count overflows".into()))?;
    let mut coords = Vec::with_capacity(total.min(1 << 24));
    let mut buf = [0u8; 8];
    for _ in 0..total {
        reader
            .read_exact(&mut buf)
            .map_err(|_| ReachError::Format(format!("expected {total} coordinates")))?;
        coords.push(f64::from_le_bytes(buf));
    }
    PointCloud::from_flat(dim, coords)
}

pub fn write_binary<W: Write>(cloud: &PointCloud, mut writer: W) -> std::io::Result<()> {
    writer.write_all(MAGIC)?;
    writer.write_all(&(cloud.ambient_dim() as u32).to_le_bytes())?;
    writer.write_all(&(cloud.len() as u64).to_le_bytes())?;
    for c in cloud.as_flat() {
        writer.write_all(&c.to_le_bytes())?;
    }
    writer.flush()
}

/// Load a cloud, detecting RKPC by its magic bytes and falling back to CSV.
pub fn load(path: &Path) -> Result<PointCloud> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|f| BufReader::new(f).read_to_end(&mut bytes))
        .map_err(|e| ReachError::io(path, e))?;
    if bytes.starts_with(MAGIC) {
        read_binary(&bytes[..])
    } else {
        read_csv(&bytes[..])
    }
}

/// Save as RKPC when the extension is `.rkpc`, CSV otherwise.
pub fn save(cloud: &PointCloud, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| ReachError::io(path, e))?;
    let writer = BufWriter::new(file);
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("rkpc")) {
        write_binary(cloud, writer).map_err(|e| ReachError::io(path, e))
    } else {
        write_csv(cloud, writer)
    }
}
