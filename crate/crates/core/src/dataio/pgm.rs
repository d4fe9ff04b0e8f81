use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// 8-bit grayscale raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graymap {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

/// Binary P5 graymap with maxval 255.
pub fn encode_pgm(map: &Graymap) -> Result<Vec<u8>> {
    if map.pixels.len() != map.width * map.height {
        return Err(Error::dim(format!(
            "{}x{} graymap with {} pixels",
            map.width,
            map.height,
            map.pixels.len()
        )));
    }
    let mut out = format!("P5\n{} {}\n255\n", map.width, map.height).into_bytes();
    out.extend_from_slice(&map.pixels);
    Ok(out)
}

/// Write values in `[0, 1]` (binary images included) scaled by 255.
pub fn save_image_pgm<T: Real>(path: impl AsRef<Path>, width: usize, height: usize, values: &[T]) -> Result<()> {
    let map = Graymap {
        width,
        height,
        pixels: to_gray(values),
    };
    std::fs::write(path, encode_pgm(&map)?)?;
    Ok(())
}

fn to_gray<T: Real>(values: &[T]) -> Vec<u8> {
    values
        .iter()
        .map(|v| (v.as_f64().clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect()
}

/// Tile equally sized images into a grid separated by `gap` mid-gray pixels.
pub fn montage<T: Real>(
    tiles: &[Vec<T>],
    tile_width: usize,
    tile_height: usize,
    columns: usize,
    gap: usize,
) -> Result<Graymap> {
    if columns == 0 {
        return Err(Error::arg("montage needs at least one column"));
    }
    if let Some(k) = tiles.iter().position(|t| t.len() != tile_width * tile_height) {
        return Err(Error::dim(format!("tile {k} is not {tile_width}x{tile_height}")));
    }
    let grid_rows = tiles.len().div_ceil(columns);
    let width = columns * tile_width + (columns + 1) * gap;
    let height = grid_rows * tile_height + (grid_rows + 1) * gap;
    let mut pixels = vec![128u8; width * height];
    for (k, tile) in tiles.iter().enumerate() {
        let (gr, gc) = (k / columns, k % columns);
        let top = gap + gr * (tile_height + gap);
        let left = gap + gc * (tile_width + gap);
        let gray = to_gray(tile);
        for r in 0..tile_height {
            let dst = (top + r) * width + left;
            pixels[dst..dst + tile_width].copy_from_slice(&gray[r * tile_width..(r + 1) * tile_width]);
        }
    }
    Ok(Graymap { width, height, pixels })
}

/// Read a binary P5 graymap with maxval 255 (header comments allowed).
pub fn decode_pgm(bytes: &[u8]) -> Result<Graymap> {
    let mut pos = 0usize;
    let token = |pos: &mut usize| -> Result<(usize, String)> {
        loop {
            match bytes.get(*pos) {
                Some(b'#') => {
                    while bytes.get(*pos).is_some_and(|&b| b != b'\n') {
                        *pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => *pos += 1,
                Some(_) => break,
                None => return Err(Error::format(*pos as u64, "header truncated")),
            }
        }
        let start = *pos;
        while bytes.get(*pos).is_some_and(|b| !b.is_ascii_whitespace()) {
            *pos += 1;
        }
        Ok((start, String::from_utf8_lossy(&bytes[start..*pos]).into_owned()))
    };
    let (at, magic) = token(&mut pos)?;
    if magic != "P5" {
        return Err(Error::format(at as u64, format!("expected P5, found {magic:?}")));
    }
    let number = |pos: &mut usize, what: &str| -> Result<usize> {
        let (at, t) = token(pos)?;
        t.parse()
            .map_err(|_| Error::format(at as u64, format!("bad {what} {t:?}")))
    };
    let width = number(&mut pos, "width")?;
    let height = number(&mut pos, "height")?;
    let maxval_at = pos;
    let maxval = number(&mut pos, "maxval")?;
    if maxval != 255 {
        return Err(Error::format(maxval_at as u64, format!("maxval {maxval} unsupported")));
    }
    // exactly one whitespace byte separates header and raster
    pos += 1;
    let raster = bytes.get(pos..).unwrap_or(&[]);
    if raster.len() != width * height {
        return Err(Error::format(
            pos as u64,
            format!(
                "raster has {} bytes, {width}x{height} needs {}",
                raster.len(),
                width * height
            ),
        ));
    }
    Ok(Graymap {
        width,
        height,
        pixels: raster.to_vec(),
    })
}

pub fn load_pgm(path: impl AsRef<Path>) -> Result<Graymap> {
    decode_pgm(&std::fs::read(path)?)
}
