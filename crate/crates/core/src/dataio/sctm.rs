//! SCTM container.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "SCTM"
//! 4       1     version (1)
//! 5       1     dtype: 0 complex f64 pairs, 1 real f64, 2 binary byte
//! 6       4     rows, u32 little-endian
//! 10      4     cols, u32 little-endian
//! 14      ...   row-major payload, little-endian
//! ```

use std::path::Path;

use num_complex::{Complex, Complex64};

use crate::error::{Error, Result};
use crate::model::{MeasurementSet, PatternSet, TransmissionMatrix};
use crate::scalar::Real;

pub const SCTM_MAGIC: &[u8; 4] = b"SCTM";
pub const SCTM_VERSION: u8 = 1;
pub const SCTM_HEADER_LEN: usize = 14;

const DTYPE_COMPLEX: u8 = 0;
const DTYPE_REAL: u8 = 1;
const DTYPE_BINARY: u8 = 2;

#[derive(Debug, Clone, PartialEq)]
pub enum SctmData {
    Complex {
        rows: usize,
        cols: usize,
        data: Vec<Complex64>,
    },
    Real {
        rows: usize,
        cols: usize,
        data: Vec<f64>,
    },
    Binary {
        rows: usize,
        cols: usize,
        data: Vec<u8>,
    },
}

impl SctmData {
    fn shape(&self) -> (usize, usize, usize) {
        match self {
            SctmData::Complex { rows, cols, data } => (*rows, *cols, data.len()),
            SctmData::Real { rows, cols, data } => (*rows, *cols, data.len()),
            SctmData::Binary { rows, cols, data } => (*rows, *cols, data.len()),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            SctmData::Complex { .. } => "complex",
            SctmData::Real { .. } => "real",
            SctmData::Binary { .. } => "binary",
        }
    }
}

pub fn encode_sctm(data: &SctmData) -> Result<Vec<u8>> {
    let (rows, cols, len) = data.shape();
    if len != rows * cols {
        return Err(Error::dim(format!("{rows}x{cols} matrix with {len} entries")));
    }
    let to_u32 = |v: usize, what: &str| u32::try_from(v).map_err(|_| Error::arg(format!("{what} {v} exceeds u32")));
    let (dtype, width) = match data {
        SctmData::Complex { .. } => (DTYPE_COMPLEX, 16),
        SctmData::Real { .. } => (DTYPE_REAL, 8),
        SctmData::Binary { .. } => (DTYPE_BINARY, 1),
    };
    let mut out = Vec::with_capacity(SCTM_HEADER_LEN + len * width);
    out.extend_from_slice(SCTM_MAGIC);
    out.push(SCTM_VERSION);
    out.push(dtype);
    out.extend_from_slice(&to_u32(rows, "rows")?.to_le_bytes());
    out.extend_from_slice(&to_u32(cols, "cols")?.to_le_bytes());
    match data {
        SctmData::Complex { data, .. } => {
            for z in data {
                out.extend_from_slice(&z.re.to_le_bytes());
                out.extend_from_slice(&z.im.to_le_bytes());
            }
        }
        SctmData::Real { data, .. } => {
            for v in data {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        SctmData::Binary { data, .. } => {
            if let Some(k) = data.iter().position(|&b| b > 1) {
                return Err(Error::arg(format!("binary entry {k} is {}", data[k])));
            }
            out.extend_from_slice(data);
        }
    }
    Ok(out)
}

pub fn decode_sctm(bytes: &[u8]) -> Result<SctmData> {
    if bytes.len() < SCTM_HEADER_LEN {
        return Err(Error::format(
            bytes.len() as u64,
            format!("header truncated: {} of {SCTM_HEADER_LEN} bytes", bytes.len()),
        ));
    }
    if &bytes[0..4] != SCTM_MAGIC {
        return Err(Error::format(0, format!("bad magic {:?}", &bytes[0..4])));
    }
    if bytes[4] != SCTM_VERSION {
        return Err(Error::format(4, format!("unsupported version {}", bytes[4])));
    }
    let dtype = bytes[5];
    let width = match dtype {
        DTYPE_COMPLEX => 16,
        DTYPE_REAL => 8,
        DTYPE_BINARY => 1,
        other => return Err(Error::format(5, format!("unknown dtype {other}"))),
    };
    let le_u32 = |o: usize| u32::from_le_bytes([bytes[o], bytes[o + 1], bytes[o + 2], bytes[o + 3]]) as usize;
    let (rows, cols) = (le_u32(6), le_u32(10));
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(width))
        .ok_or_else(|| Error::format(6, "declared size overflows"))?;
    let payload = &bytes[SCTM_HEADER_LEN..];
    if payload.len() != expected {
        return Err(Error::format(
            SCTM_HEADER_LEN as u64,
            format!("payload has {} bytes, {rows}x{cols} needs {expected}", payload.len()),
        ));
    }
    let f64_at = |o: usize| {
        let mut b = [0u8; 8];
        b.copy_from_slice(&payload[o..o + 8]);
        f64::from_le_bytes(b)
    };
    Ok(match dtype {
        DTYPE_COMPLEX => SctmData::Complex {
            rows,
            cols,
            data: (0..rows * cols)
                .map(|k| Complex64::new(f64_at(16 * k), f64_at(16 * k + 8)))
                .collect(),
        },
        DTYPE_REAL => SctmData::Real {
            rows,
            cols,
            data: (0..rows * cols).map(|k| f64_at(8 * k)).collect(),
        },
        _ => {
            if let Some(k) = payload.iter().position(|&b| b > 1) {
                return Err(Error::format(
                    (SCTM_HEADER_LEN + k) as u64,
                    format!("binary payload byte is {}, expected 0 or 1", payload[k]),
                ));
            }
            SctmData::Binary {
                rows,
                cols,
                data: payload.to_vec(),
            }
        }
    })
}

pub fn save_sctm(path: impl AsRef<Path>, data: &SctmData) -> Result<()> {
    std::fs::write(path, encode_sctm(data)?)?;
    Ok(())
}

pub fn load_sctm(path: impl AsRef<Path>) -> Result<SctmData> {
    decode_sctm(&std::fs::read(path)?)
}

fn wrong_kind(found: &SctmData, wanted: &str) -> Error {
    Error::format(5, format!("file holds a {} matrix, expected {wanted}", found.kind()))
}

pub fn save_matrix<T: Real>(path: impl AsRef<Path>, h: &TransmissionMatrix<T>) -> Result<()> {
    save_sctm(
        path,
        &SctmData::Complex {
            rows: h.rows(),
            cols: h.cols(),
            data: h
                .as_slice()
                .iter()
                .map(|z| Complex64::new(z.re.as_f64(), z.im.as_f64()))
                .collect(),
        },
    )
}

pub fn load_matrix<T: Real>(path: impl AsRef<Path>) -> Result<TransmissionMatrix<T>> {
    match load_sctm(path)? {
        SctmData::Complex { rows: 0, cols, .. } => Ok(TransmissionMatrix::empty(cols)),
        SctmData::Complex { rows, cols, data } => TransmissionMatrix::new(
            rows,
            cols,
            data.into_iter()
                .map(|z| Complex::new(T::lit(z.re), T::lit(z.im)))
                .collect(),
        ),
        other => Err(wrong_kind(&other, "complex")),
    }
}

pub fn save_real<T: Real>(path: impl AsRef<Path>, rows: usize, cols: usize, values: &[T]) -> Result<()> {
    save_sctm(
        path,
        &SctmData::Real {
            rows,
            cols,
            data: values.iter().map(|v| v.as_f64()).collect(),
        },
    )
}

/// Returns `(rows, cols, values)`.
pub fn load_real<T: Real>(path: impl AsRef<Path>) -> Result<(usize, usize, Vec<T>)> {
    match load_sctm(path)? {
        SctmData::Real { rows, cols, data } => Ok((rows, cols, data.into_iter().map(T::lit).collect())),
        other => Err(wrong_kind(&other, "real")),
    }
}

pub fn save_patterns(path: impl AsRef<Path>, x: &PatternSet) -> Result<()> {
    save_sctm(
        path,
        &SctmData::Binary {
            rows: x.count(),
            cols: x.dim(),
            data: x.as_bytes().to_vec(),
        },
    )
}

pub fn load_patterns(path: impl AsRef<Path>) -> Result<PatternSet> {
    match load_sctm(path)? {
        SctmData::Binary { rows, cols, data } => PatternSet::new(rows, cols, data),
        other => Err(wrong_kind(&other, "binary")),
    }
}

pub fn save_measurements<T: Real>(path: impl AsRef<Path>, y: &MeasurementSet<T>) -> Result<()> {
    save_real(path, y.rows(), y.cols(), y.as_slice())
}

pub fn load_measurements<T: Real>(path: impl AsRef<Path>) -> Result<MeasurementSet<T>> {
    let (rows, cols, values) = load_real(path)?;
    MeasurementSet::new(rows, cols, values)
}
