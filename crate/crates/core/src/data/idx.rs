//! IDX containers (the MNIST distribution format).
//!
//! Layout: big-endian `u32` magic (`0x00000803` for rank-3 unsigned-byte
//! image arrays, `0x00000801` for rank-1 label arrays), one big-endian `u32`
//! per dimension, then the raw bytes.

use std::path::Path;

use super::{DataError, GrayImage};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

/// A stack of equally sized images.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

impl IdxImages {
    pub fn image(&self, i: usize) -> GrayImage {
        let size = self.rows * self.cols;
        GrayImage::new(self.cols, self.rows, self.pixels[i * size..(i + 1) * size].to_vec())
            .expect("dimensions validated at parse time")
    }

    pub fn images(&self) -> Vec<GrayImage> {
        (0..self.count).map(|i| self.image(i)).collect()
    }
}

fn read_u32(bytes: &[u8], at: usize) -> Result<u32, DataError> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(DataError::Truncated { expected: at + 4, got: bytes.len() })
}

fn parse(bytes: &[u8], magic: u32, rank: usize) -> Result<(Vec<usize>, &[u8]), DataError> {
    let found = read_u32(bytes, 0)?;
    if found != magic {
        return Err(DataError::BadMagic { expected: magic, found });
    }
    let dims = (0..rank).map(|i| read_u32(bytes, 4 + 4 * i).map(|d| d as usize)).collect::<Result<Vec<_>, _>>()?;
    let payload = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).ok_or(DataError::DimensionOverflow)?;
    let header = 4 + 4 * rank;
    let body = &bytes[header..];
    match body.len().cmp(&payload) {
        std::cmp::Ordering::Less => Err(DataError::Truncated { expected: header + payload, got: bytes.len() }),
        std::cmp::Ordering::Greater => Err(DataError::TrailingBytes(body.len() - payload)),
        std::cmp::Ordering::Equal => Ok((dims, body)),
    }
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<IdxImages, DataError> {
    let (dims, body) = parse(bytes, IMAGES_MAGIC, 3)?;
    if dims[1] == 0 || dims[2] == 0 {
        return Err(DataError::Invalid(format!("image size {}x{}", dims[1], dims[2])));
    }
    Ok(IdxImages { count: dims[0], rows: dims[1], cols: dims[2], pixels: body.to_vec() })
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>, DataError> {
    let (_, body) = parse(bytes, LABELS_MAGIC, 1)?;
    Ok(body.to_vec())
}

pub fn load_idx_images(path: impl AsRef<Path>) -> Result<IdxImages, DataError> {
    let path = path.as_ref();
    parse_idx_images(&std::fs::read(path).map_err(|e| DataError::io(path, e))?)
}

pub fn load_idx_labels(path: impl AsRef<Path>) -> Result<Vec<u8>, DataError> {
    let path = path.as_ref();
    parse_idx_labels(&std::fs::read(path).map_err(|e| DataError::io(path, e))?)
}

pub fn encode_idx_images(images: &IdxImages) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.pixels.len());
    out.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    for d in [images.count, images.rows, images.cols] {
        out.extend_from_slice(&(d as u32).to_be_bytes());
    }
    out.extend_from_slice(&images.pixels);
    out
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}
