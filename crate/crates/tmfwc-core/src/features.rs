//! Time-step x channel feature matrices and their on-disk formats.
//!
//! Every extractor produces a [`FeatureMatrix`]: one row per time step,
//! one column per channel/coefficient. Two formats are supported:
//!
//! * CSV — header row naming the columns, one data row per time step.
//! * Binary — 16-byte header (`TMFWFM01` magic, rows as u32 LE, cols as
//!   u32 LE) followed by `rows * cols` little-endian f64 values in
//!   row-major order.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

/// 8-byte magic prefix of the binary feature-matrix dump.
pub const BINARY_MAGIC: &[u8; 8] = b"TMFWFM01";

#[derive(Debug, Error)]
pub enum FeatureIoError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic: not a feature-matrix binary dump")]
    BadMagic,
    #[error("truncated binary dump: expected {expected} values, got {got}")]
    Truncated { expected: usize, got: usize },
    #[error("malformed csv: {0}")]
    MalformedCsv(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Dense row-major matrix of f64 features: rows are time steps, columns
/// are channels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    /// Matrix of zeros.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Build from row-major data. Panics if `data.len() != rows * cols`.
    pub fn from_rows_data(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data length mismatch");
        Self { rows, cols, data }
    }

    /// Build from a list of equal-length rows.
    pub fn from_row_vecs(rows: &[Vec<f64>]) -> Result<Self, FeatureIoError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(FeatureIoError::DimensionMismatch(format!(
                    "row length {} != {}",
                    r.len(),
                    cols
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Self { rows: rows.len(), cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] = value;
    }

    /// One row as a slice.
    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    /// One column, copied out.
    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    /// Row-major backing slice.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Largest value in the matrix, or 0.0 when empty.
    pub fn max_value(&self) -> f64 {
        self.data.iter().copied().fold(0.0_f64, f64::max)
    }

    /// Concatenate columns of `other` to the right of `self`.
    pub fn hstack(&self, other: &FeatureMatrix) -> Result<FeatureMatrix, FeatureIoError> {
        if self.rows != other.rows {
            return Err(FeatureIoError::DimensionMismatch(format!(
                "hstack rows {} != {}",
                self.rows, other.rows
            )));
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(other.row(r));
        }
        Ok(FeatureMatrix { rows: self.rows, cols, data })
    }

    /// Render as CSV with the given column names.
    pub fn to_csv_string(&self, column_names: &[String]) -> Result<String, FeatureIoError> {
        if column_names.len() != self.cols {
            return Err(FeatureIoError::DimensionMismatch(format!(
                "{} column names for {} columns",
                column_names.len(),
                self.cols
            )));
        }
        let mut out = String::new();
        out.push_str(&column_names.join(","));
        out.push('\n');
        for r in 0..self.rows {
            for (c, v) in self.row(r).iter().enumerate() {
                if c > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        Ok(out)
    }

    /// Write CSV to `path`.
    pub fn write_csv(&self, path: &Path, column_names: &[String]) -> Result<(), FeatureIoError> {
        let text = self.to_csv_string(column_names)?;
        std::fs::write(path, text)?;
        Ok(())
    }

    /// Parse a CSV produced by [`FeatureMatrix::write_csv`]. The header
    /// row is required; column names are returned alongside the matrix.
    pub fn read_csv(path: &Path) -> Result<(Self, Vec<String>), FeatureIoError> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        let header =
            lines.next().ok_or_else(|| FeatureIoError::MalformedCsv("empty file".into()))?;
        let names: Vec<String> = header.split(',').map(str::to_string).collect();
        let cols = names.len();
        let mut data = Vec::new();
        let mut rows = 0;
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != cols {
                return Err(FeatureIoError::MalformedCsv(format!(
                    "row {}: {} fields, expected {}",
                    i + 2,
                    fields.len(),
                    cols
                )));
            }
            for f in fields {
                let v: f64 = f
                    .parse()
                    .map_err(|e| FeatureIoError::MalformedCsv(format!("row {}: {e}", i + 2)))?;
                data.push(v);
            }
            rows += 1;
        }
        Ok((Self { rows, cols, data }, names))
    }

    /// Serialize to the compact binary format.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<(), FeatureIoError> {
        w.write_all(BINARY_MAGIC)?;
        w.write_all(&(self.rows as u32).to_le_bytes())?;
        w.write_all(&(self.cols as u32).to_le_bytes())?;
        for v in &self.data {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    /// Write the binary format to `path`.
    pub fn write_binary_file(&self, path: &Path) -> Result<(), FeatureIoError> {
        let mut buf = Vec::with_capacity(16 + self.data.len() * 8);
        self.write_binary(&mut buf)?;
        std::fs::write(path, buf)?;
        Ok(())
    }

    /// Parse the binary format.
    pub fn read_binary<R: Read>(mut r: R) -> Result<Self, FeatureIoError> {
        let mut header = [0u8; 16];
        r.read_exact(&mut header)?;
        if &header[0..8] != BINARY_MAGIC {
            return Err(FeatureIoError::BadMagic);
        }
        let rows = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
        let cols = u32::from_le_bytes(header[12..16].try_into().unwrap()) as usize;
        let expected = rows * cols;
        let mut payload = Vec::new();
        r.read_to_end(&mut payload)?;
        if payload.len() != expected * 8 {
            return Err(FeatureIoError::Truncated { expected, got: payload.len() / 8 });
        }
        let data =
            payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Ok(Self { rows, cols, data })
    }

    /// Read the binary format from `path`.
    pub fn read_binary_file(path: &Path) -> Result<Self, FeatureIoError> {
        let bytes = std::fs::read(path)?;
        Self::read_binary(bytes.as_slice())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let rows = rng.random_range(0..12);
            let cols = rng.random_range(1..9);
            let data: Vec<f64> = (0..rows * cols).map(|_| rng.random_range(-1e6..1e6)).collect();
            let m = FeatureMatrix::from_rows_data(rows, cols, data);
            let mut buf = Vec::new();
            m.write_binary(&mut buf).unwrap();
            assert_eq!(buf.len(), 16 + rows * cols * 8);
            let back = FeatureMatrix::read_binary(buf.as_slice()).unwrap();
            assert_eq!(m, back);
        }
    }

    #[test]
    fn csv_round_trip_preserves_values_and_names() {
        let m = FeatureMatrix::from_rows_data(2, 3, vec![0.5, -1.25, 3.0, 1e-12, 0.0, 9.75]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let names = vec!["c1".to_string(), "c2".to_string(), "c3".to_string()];
        m.write_csv(&path, &names).unwrap();
        let (back, got_names) = FeatureMatrix::read_csv(&path).unwrap();
        assert_eq!(names, got_names);
        assert_eq!(m, back);
    }

    #[test]
    fn bad_magic_is_rejected() {
        let mut buf = Vec::new();
        FeatureMatrix::zeros(1, 1).write_binary(&mut buf).unwrap();
        buf[0] = b'X';
        assert!(matches!(
            FeatureMatrix::read_binary(buf.as_slice()),
            Err(FeatureIoError::BadMagic)
        ));
    }

    #[test]
    fn hstack_concatenates_columns() {
        let a = FeatureMatrix::from_rows_data(2, 1, vec![1.0, 2.0]);
        let b = FeatureMatrix::from_rows_data(2, 2, vec![3.0, 4.0, 5.0, 6.0]);
        let c = a.hstack(&b).unwrap();
        assert_eq!(c.row(0), &[1.0, 3.0, 4.0]);
        assert_eq!(c.row(1), &[2.0, 5.0, 6.0]);
        assert!(FeatureMatrix::zeros(3, 1).hstack(&a).is_err());
    }
}
