//! Dense matrix persistence.
//!
//! Binary format "MRD1": the 4 magic bytes, two little-endian u64 (rows,
//! cols), then rows×cols little-endian f64 values in row-major order.
//! Text format: comma-separated decimal rows, newline-terminated.

use super::DenseMatrix;
use crate::{Error, Result};
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"MRD1";

pub fn write_mrd1_to(w: &mut dyn Write, m: &DenseMatrix) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(m.rows() as u64).to_le_bytes())?;
    w.write_all(&(m.cols() as u64).to_le_bytes())?;
    for &v in m.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_mrd1_from(r: &mut dyn Read) -> Result<DenseMatrix> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("missing MRD1 magic bytes".into()));
    }
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    let rows = u64::from_le_bytes(buf) as usize;
    r.read_exact(&mut buf)?;
    let cols = u64::from_le_bytes(buf) as usize;
    let count = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::Format("matrix dimensions overflow".into()))?;
    let mut data = Vec::with_capacity(count);
    for _ in 0..count {
        r.read_exact(&mut buf)?;
        data.push(f64::from_le_bytes(buf));
    }
    DenseMatrix::from_vec(rows, cols, data)
}

/// Writes `bytes` atomically: a temp file in the same directory, then rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut tmp = path.file_name().map(|n| n.to_os_string()).ok_or_else(|| {
        Error::InvalidArgument(format!("path {} has no file name", path.display()))
    })?;
    tmp.push(".tmp");
    let tmp_path = dir.join(tmp);
    std::fs::write(&tmp_path, bytes)?;
    std::fs::rename(&tmp_path, path)?;
    Ok(())
}

pub fn write_mrd1(path: &Path, m: &DenseMatrix) -> Result<()> {
    let mut bytes = Vec::with_capacity(20 + 8 * m.data().len());
    write_mrd1_to(&mut bytes, m)?;
    atomic_write(path, &bytes)
}

pub fn read_mrd1(path: &Path) -> Result<DenseMatrix> {
    let bytes = std::fs::read(path)?;
    read_mrd1_from(&mut bytes.as_slice())
}

pub fn write_text_matrix(path: &Path, m: &DenseMatrix) -> Result<()> {
    let mut out = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:.17e}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

pub fn read_text_matrix(path: &Path) -> Result<DenseMatrix> {
    let text = std::fs::read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|t| t.trim().parse::<f64>()).collect();
        let row = row.map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        rows.push(row);
    }
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Parse("ragged rows in text matrix".into()));
    }
    DenseMatrix::from_vec(nrows, ncols, rows.into_iter().flatten().collect())
}
