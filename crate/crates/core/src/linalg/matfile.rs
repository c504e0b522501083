//! The `RFMX` binary matrix format.
//!
//! Layout: magic `RFMX`, one dtype byte (0 = real f64, 1 = complex f64
//! stored as interleaved re/im), rows and cols as little-endian u64, then
//! the row-major payload in little-endian f64.

use num_complex::Complex64;
use std::path::Path;

use super::{CMat, Mat};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"RFMX";
const HEADER: usize = 4 + 1 + 8 + 8;

#[derive(Clone, Debug, PartialEq)]
pub enum MatFile {
    Real(Mat),
    Complex(CMat),
}

fn header(dtype: u8, rows: usize, cols: usize, cap: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER + cap);
    out.extend_from_slice(MAGIC);
    out.push(dtype);
    out.extend_from_slice(&(rows as u64).to_le_bytes());
    out.extend_from_slice(&(cols as u64).to_le_bytes());
    out
}

pub fn encode_mat(m: &Mat) -> Vec<u8> {
    let mut out = header(0, m.rows(), m.cols(), 8 * m.data().len());
    for v in m.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn encode_cmat(m: &CMat) -> Vec<u8> {
    let mut out = header(1, m.rows(), m.cols(), 16 * m.data().len());
    for z in m.data() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

fn parse_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        offset,
        message: message.into(),
    }
}

fn read_u64(bytes: &[u8], at: usize) -> u64 {
    u64::from_le_bytes(bytes[at..at + 8].try_into().expect("8-byte slice"))
}

fn read_f64(bytes: &[u8], at: usize) -> Result<f64> {
    let v = f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8-byte slice"));
    if v.is_finite() {
        Ok(v)
    } else {
        Err(parse_err(at, "non-finite matrix entry"))
    }
}

pub fn decode(bytes: &[u8]) -> Result<MatFile> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(parse_err(0, "missing RFMX magic"));
    }
    if bytes.len() < HEADER {
        return Err(parse_err(bytes.len(), "truncated header"));
    }
    let dtype = bytes[4];
    let rows = read_u64(bytes, 5);
    let cols = read_u64(bytes, 13);
    let width = match dtype {
        0 => 8u64,
        1 => 16,
        other => return Err(parse_err(4, format!("unknown dtype tag {other}"))),
    };
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(width))
        .ok_or_else(|| parse_err(5, "dimensions overflow"))?;
    let payload = (bytes.len() - HEADER) as u64;
    if payload != expected {
        return Err(parse_err(
            HEADER + payload.min(expected) as usize,
            format!("payload holds {payload} bytes, expected {expected}"),
        ));
    }
    let (rows, cols) = (rows as usize, cols as usize);
    let n = rows * cols;
    if dtype == 0 {
        let data = (0..n)
            .map(|i| read_f64(bytes, HEADER + 8 * i))
            .collect::<Result<Vec<_>>>()?;
        Ok(MatFile::Real(Mat::new(rows, cols, data)?))
    } else {
        let data = (0..n)
            .map(|i| {
                let at = HEADER + 16 * i;
                Ok(Complex64::new(read_f64(bytes, at)?, read_f64(bytes, at + 8)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MatFile::Complex(CMat::new(rows, cols, data)?))
    }
}

pub fn write_mat(path: impl AsRef<Path>, m: &Mat) -> Result<()> {
    std::fs::write(path, encode_mat(m))?;
    Ok(())
}

pub fn write_cmat(path: impl AsRef<Path>, m: &CMat) -> Result<()> {
    std::fs::write(path, encode_cmat(m))?;
    Ok(())
}

pub fn read(path: impl AsRef<Path>) -> Result<MatFile> {
    decode(&std::fs::read(path)?)
}

/// Reads a real matrix; complex files are rejected.
pub fn read_mat(path: impl AsRef<Path>) -> Result<Mat> {
    match read(path)? {
        MatFile::Real(m) => Ok(m),
        MatFile::Complex(_) => Err(Error::Input("expected a real matrix file".into())),
    }
}

/// Reads a complex matrix; real files are promoted.
pub fn read_cmat(path: impl AsRef<Path>) -> Result<CMat> {
    match read(path)? {
        MatFile::Real(m) => Ok(CMat::from_real(&m)),
        MatFile::Complex(m) => Ok(m),
    }
}
