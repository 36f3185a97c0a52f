//! File formats: QWF1 waveforms and calibration JSON.
//!
//! QWF1 layout (little-endian, 32-byte header):
//!
//! ```text
//! offset  size  field
//! 0       4     magic "QWF1"
//! 4       4     u32 version = 1
//! 8       4     u32 dtype: 0 = f32, 1 = f64
//! 12      4     reserved, written as zero
//! 16      8     f64 sample_rate_hz
//! 24      8     u64 count
//! 32      ...   count samples, little-endian, dtype-sized
//! ```

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::homodyne::{LoCalibration, QuadratureRecord};

pub const QWF_MAGIC: [u8; 4] = *b"QWF1";
pub const QWF_VERSION: u32 = 1;
pub const QWF_HEADER_LEN: usize = 32;

/// On-disk sample width for QWF1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QwfDtype {
    F32,
    F64,
}

impl QwfDtype {
    fn code(self) -> u32 {
        match self {
            QwfDtype::F32 => 0,
            QwfDtype::F64 => 1,
        }
    }

    fn from_code(code: u32) -> Result<Self, QwfError> {
        match code {
            0 => Ok(QwfDtype::F32),
            1 => Ok(QwfDtype::F64),
            other => Err(QwfError::BadDtype(other)),
        }
    }

    fn width(self) -> usize {
        match self {
            QwfDtype::F32 => 4,
            QwfDtype::F64 => 8,
        }
    }
}

#[derive(Debug, Error)]
pub enum QwfError {
    #[error("bad magic (not a QWF1 file)")]
    BadMagic,
    #[error("unsupported QWF version {0}")]
    UnsupportedVersion(u32),
    #[error("unknown dtype code {0}")]
    BadDtype(u32),
    #[error("file truncated: expected {expected} bytes of samples, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("sample rate must be positive and finite, got {0}")]
    InvalidSampleRate(f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Serializes a record to QWF1 bytes.
pub fn qwf_to_bytes(record: &QuadratureRecord, dtype: QwfDtype) -> Result<Vec<u8>, QwfError> {
    if !(record.sample_rate_hz > 0.0 && record.sample_rate_hz.is_finite()) {
        return Err(QwfError::InvalidSampleRate(record.sample_rate_hz));
    }
    let n = record.samples.len();
    let mut out = Vec::with_capacity(QWF_HEADER_LEN + n * dtype.width());
    out.extend_from_slice(&QWF_MAGIC);
    out.extend_from_slice(&QWF_VERSION.to_le_bytes());
    out.extend_from_slice(&dtype.code().to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    out.extend_from_slice(&record.sample_rate_hz.to_le_bytes());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    match dtype {
        QwfDtype::F32 => {
            for &s in &record.samples {
                out.extend_from_slice(&(s as f32).to_le_bytes());
            }
        }
        QwfDtype::F64 => {
            for &s in &record.samples {
                out.extend_from_slice(&s.to_le_bytes());
            }
        }
    }
    Ok(out)
}

/// Parses QWF1 bytes. The label field is not part of the format and comes
/// back as `None`.
pub fn qwf_from_bytes(bytes: &[u8]) -> Result<QuadratureRecord, QwfError> {
    if bytes.len() < 4 || bytes[..4] != QWF_MAGIC {
        return Err(QwfError::BadMagic);
    }
    if bytes.len() < QWF_HEADER_LEN {
        return Err(QwfError::Truncated {
            expected: QWF_HEADER_LEN,
            found: bytes.len(),
        });
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != QWF_VERSION {
        return Err(QwfError::UnsupportedVersion(version));
    }
    let dtype = QwfDtype::from_code(u32::from_le_bytes(bytes[8..12].try_into().unwrap()))?;
    let sample_rate_hz = f64::from_le_bytes(bytes[16..24].try_into().unwrap());
    if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
        return Err(QwfError::InvalidSampleRate(sample_rate_hz));
    }
    let count = u64::from_le_bytes(bytes[24..32].try_into().unwrap()) as usize;
    let body = &bytes[QWF_HEADER_LEN..];
    let expected = count * dtype.width();
    if body.len() < expected {
        return Err(QwfError::Truncated {
            expected,
            found: body.len(),
        });
    }
    let samples = match dtype {
        QwfDtype::F32 => body[..expected]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect(),
        QwfDtype::F64 => body[..expected]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect(),
    };
    Ok(QuadratureRecord::new(samples, sample_rate_hz))
}

pub fn write_qwf(
    path: impl AsRef<Path>,
    record: &QuadratureRecord,
    dtype: QwfDtype,
) -> Result<(), QwfError> {
    let bytes = qwf_to_bytes(record, dtype)?;
    let mut f = fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(())
}

pub fn read_qwf(path: impl AsRef<Path>) -> Result<QuadratureRecord, QwfError> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    qwf_from_bytes(&bytes)
}

/// Persists a calibration as the JSON document
/// `{n_lo, mean_offset, n_samples_used}`.
pub fn write_calibration(
    path: impl AsRef<Path>,
    cal: &LoCalibration,
) -> Result<(), std::io::Error> {
    let json = serde_json::to_string_pretty(cal).expect("calibration serializes");
    fs::write(path, json)
}

pub fn read_calibration(path: impl AsRef<Path>) -> Result<LoCalibration, std::io::Error> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
}
