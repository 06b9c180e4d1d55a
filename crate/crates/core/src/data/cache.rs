//! Flat binary feature cache.
//!
//! Little-endian header of four `u32`: magic `0x51434E4E`, row count, column
//! count, reserved (0). Then `rows * cols` `f64` values row-major, then one
//! label byte per row.

use std::io::Write;
use std::path::Path;

use super::{DataError, Matrix};

pub const CACHE_MAGIC: u32 = 0x5143_4E4E;
const HEADER_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureCache {
    pub features: Matrix,
    pub labels: Vec<u8>,
}

impl FeatureCache {
    pub fn new(features: Matrix, labels: Vec<u8>) -> Result<Self, DataError> {
        if features.rows() != labels.len() {
            return Err(DataError::Invalid(format!(
                "{} feature rows but {} labels",
                features.rows(),
                labels.len()
            )));
        }
        Ok(Self { features, labels })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let values = self.features.as_slice();
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * values.len() + self.labels.len());
        for word in [CACHE_MAGIC, self.features.rows() as u32, self.features.cols() as u32, 0] {
            out.extend_from_slice(&word.to_le_bytes());
        }
        for v in values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&self.labels);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DataError> {
        if bytes.len() < HEADER_LEN {
            return Err(DataError::Truncated { expected: HEADER_LEN, got: bytes.len() });
        }
        let word = |i: usize| u32::from_le_bytes(bytes[4 * i..4 * i + 4].try_into().expect("4 bytes"));
        if word(0) != CACHE_MAGIC {
            return Err(DataError::BadMagic { expected: CACHE_MAGIC, found: word(0) });
        }
        let (rows, cols) = (word(1) as usize, word(2) as usize);
        let values = rows.checked_mul(cols).ok_or(DataError::DimensionOverflow)?;
        let expected = values
            .checked_mul(8)
            .and_then(|v| v.checked_add(HEADER_LEN + rows))
            .ok_or(DataError::DimensionOverflow)?;
        if bytes.len() < expected {
            return Err(DataError::Truncated { expected, got: bytes.len() });
        }
        if bytes.len() > expected {
            return Err(DataError::TrailingBytes(bytes.len() - expected));
        }
        let body = &bytes[HEADER_LEN..HEADER_LEN + 8 * values];
        let data = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        let labels = bytes[HEADER_LEN + 8 * values..].to_vec();
        Self::new(Matrix::new(rows, cols, data)?, labels)
    }

    /// Writes through a temporary file and a rename.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), DataError> {
        write_atomic(path.as_ref(), &self.to_bytes())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, DataError> {
        let path = path.as_ref();
        Self::from_bytes(&std::fs::read(path).map_err(|e| DataError::io(path, e))?)
    }
}

/// Writes `bytes` to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), DataError> {
    let file_name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{file_name}.tmp"));
    let mut file = std::fs::File::create(&tmp).map_err(|e| DataError::io(&tmp, e))?;
    file.write_all(bytes).and_then(|_| file.sync_all()).map_err(|e| DataError::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| DataError::io(path, e))
}
