use std::path::Path;

use crate::error::{Error, Result};

const MAGIC_IMAGES: u32 = 0x0000_0803;
const MAGIC_LABELS: u32 = 0x0000_0801;

/// `count` grayscale images of `rows x cols` bytes, stored contiguously.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

impl GrayImages {
    pub fn image(&self, k: usize) -> &[u8] {
        let n = self.rows * self.cols;
        &self.pixels[k * n..(k + 1) * n]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u8]> {
        self.pixels.chunks_exact((self.rows * self.cols).max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IdxData {
    Images(GrayImages),
    Labels(Vec<u8>),
}

pub fn load_idx(path: impl AsRef<Path>) -> Result<IdxData> {
    parse_idx(&std::fs::read(path)?)
}

fn be_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| {
            Error::format(
                offset as u64,
                format!(
                    "header truncated: need 4 bytes, {} remain",
                    bytes.len().saturating_sub(offset)
                ),
            )
        })
}

/// Parse a big-endian IDX image (`0x00000803`) or label (`0x00000801`) file.
pub fn parse_idx(bytes: &[u8]) -> Result<IdxData> {
    let magic = be_u32(bytes, 0)?;
    let (header, dims) = match magic {
        MAGIC_IMAGES => (16, vec![be_u32(bytes, 4)?, be_u32(bytes, 8)?, be_u32(bytes, 12)?]),
        MAGIC_LABELS => (8, vec![be_u32(bytes, 4)?]),
        other => {
            return Err(Error::format(
                0,
                format!("bad magic {other:#010x}, expected 0x00000803 (images) or 0x00000801 (labels)"),
            ))
        }
    };
    let expected = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d as usize))
        .ok_or_else(|| Error::format(4, "declared sizes overflow"))?;
    let actual = bytes.len() - header;
    if actual != expected {
        return Err(Error::format(
            header as u64,
            format!("payload has {actual} bytes, header declares {expected}"),
        ));
    }
    let payload = bytes[header..].to_vec();
    Ok(match magic {
        MAGIC_IMAGES => IdxData::Images(GrayImages {
            count: dims[0] as usize,
            rows: dims[1] as usize,
            cols: dims[2] as usize,
            pixels: payload,
        }),
        _ => IdxData::Labels(payload),
    })
}
