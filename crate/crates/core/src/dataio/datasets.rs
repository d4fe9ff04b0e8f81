use rand::seq::index::sample;
use rand::Rng;

use crate::dataio::idx::GrayImages;
use crate::error::{Error, Result};
use crate::model::{seeded_rng, PatternSet};

pub const MNIST_SIDE: usize = 28;
pub const D1_SIDE: usize = 20;
pub const D2_SIDE: usize = 32;

/// A stack of `height x width` binary images, flattened row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImages {
    height: usize,
    width: usize,
    patterns: PatternSet,
}

impl BinaryImages {
    pub fn new(height: usize, width: usize, patterns: PatternSet) -> Result<Self> {
        if height * width != patterns.dim() {
            return Err(Error::dim(format!(
                "{height}x{width} images but patterns have {} pixels",
                patterns.dim()
            )));
        }
        Ok(Self {
            height,
            width,
            patterns,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn count(&self) -> usize {
        self.patterns.count()
    }

    pub fn image(&self, k: usize) -> &[u8] {
        self.patterns.pattern(k)
    }

    pub fn patterns(&self) -> &PatternSet {
        &self.patterns
    }

    pub fn into_patterns(self) -> PatternSet {
        self.patterns
    }

    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        Self::new(self.height, self.width, self.patterns.select(indices)?)
    }

    /// Mean fraction of active pixels.
    pub fn mean_sparsity(&self) -> f64 {
        if self.patterns.as_bytes().is_empty() {
            return 0.0;
        }
        self.patterns.ones() as f64 / self.patterns.as_bytes().len() as f64
    }
}

/// 1 where `pixel / 255 >= 0.5`.
pub fn binarize_gray(pixels: &[u8]) -> Vec<u8> {
    pixels.iter().map(|&p| (p as f64 / 255.0 >= 0.5) as u8).collect()
}

/// Central `out_h x out_w` window (offsets rounded down).
pub fn crop_center<P: Copy>(image: &[P], h: usize, w: usize, out_h: usize, out_w: usize) -> Result<Vec<P>> {
    if image.len() != h * w {
        return Err(Error::dim(format!("{h}x{w} image with {} pixels", image.len())));
    }
    if out_h > h || out_w > w {
        return Err(Error::arg(format!("cannot crop {h}x{w} to {out_h}x{out_w}")));
    }
    let (top, left) = ((h - out_h) / 2, (w - out_w) / 2);
    Ok((0..out_h)
        .flat_map(|r| {
            image[(top + r) * w + left..(top + r) * w + left + out_w]
                .iter()
                .copied()
        })
        .collect())
}

/// Nearest-neighbour resampling using pixel centres.
pub fn rescale_nearest<P: Copy>(image: &[P], h: usize, w: usize, out_h: usize, out_w: usize) -> Result<Vec<P>> {
    if image.len() != h * w {
        return Err(Error::dim(format!("{h}x{w} image with {} pixels", image.len())));
    }
    if (h == 0 || w == 0) && out_h * out_w > 0 {
        return Err(Error::arg("cannot rescale an empty image"));
    }
    let src = |d: usize, n_in: usize, n_out: usize| ((2 * d + 1) * n_in) / (2 * n_out);
    Ok((0..out_h)
        .flat_map(|r| (0..out_w).map(move |c| (r, c)))
        .map(|(r, c)| image[src(r, h, out_h) * w + src(c, w, out_w)])
        .collect())
}

fn convert(gray: &GrayImages, side: usize, f: impl Fn(&[u8]) -> Result<Vec<u8>>) -> Result<BinaryImages> {
    let mut bits = Vec::with_capacity(gray.count * side * side);
    for img in gray.iter().take(gray.count) {
        bits.extend(binarize_gray(&f(img)?));
    }
    BinaryImages::new(side, side, PatternSet::new(gray.count, side * side, bits)?)
}

/// 20x20 central crop, binarized.
pub fn make_d1(gray: &GrayImages) -> Result<BinaryImages> {
    convert(gray, D1_SIDE, |img| {
        crop_center(img, gray.rows, gray.cols, D1_SIDE, D1_SIDE)
    })
}

/// 32x32 nearest-neighbour upscale, binarized.
pub fn make_d2(gray: &GrayImages) -> Result<BinaryImages> {
    convert(gray, D2_SIDE, |img| {
        rescale_nearest(img, gray.rows, gray.cols, D2_SIDE, D2_SIDE)
    })
}

/// Per-pixel activation probabilities shaped like a handwritten stroke:
/// an elliptical ring with a diagonal bar, floored and capped so every pixel
/// stays uncertain. Mean activation is roughly 0.15.
pub fn digit_like_rho(height: usize, width: usize) -> Vec<f64> {
    let (cy, cx) = ((height as f64 - 1.0) / 2.0, (width as f64 - 1.0) / 2.0);
    let (ry, rx) = (0.36 * height as f64, 0.26 * width as f64);
    let thickness = 0.09;
    (0..height)
        .flat_map(|r| (0..width).map(move |c| (r, c)))
        .map(|(r, c)| {
            let (dy, dx) = ((r as f64 - cy) / ry, (c as f64 - cx) / rx);
            let ring = ((dy * dy + dx * dx).sqrt() - 1.0).abs();
            let bar = (dy + 0.6 * dx).abs() / 1.2;
            let near = ring.min(if dy.abs() < 0.9 { bar } else { f64::INFINITY });
            let p = 0.85 * (-(near * near) / (2.0 * thickness * thickness)).exp();
            p.clamp(0.02, 0.85)
        })
        .collect()
}

/// Draw `count` images with independent Bernoulli(`rho[i]`) pixels.
pub fn sample_local_model(rho: &[f64], height: usize, width: usize, count: usize, seed: u64) -> Result<BinaryImages> {
    if rho.len() != height * width {
        return Err(Error::dim(format!(
            "rho has {} entries for {height}x{width}",
            rho.len()
        )));
    }
    if let Some(i) = rho.iter().position(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::arg(format!("rho[{i}] = {} outside [0, 1]", rho[i])));
    }
    let mut rng = seeded_rng(seed, 0);
    let bits = (0..count)
        .flat_map(|_| rho.iter().map(|&p| rng.random_bool(p) as u8).collect::<Vec<_>>())
        .collect();
    BinaryImages::new(height, width, PatternSet::new(count, height * width, bits)?)
}

/// `count` images of `n` pixels with exactly `ones` active pixels each.
pub fn fixed_weight_images(count: usize, n: usize, ones: usize, seed: u64) -> Result<PatternSet> {
    if ones > n {
        return Err(Error::arg(format!("{ones} active pixels out of {n}")));
    }
    let mut rng = seeded_rng(seed, 0);
    let mut bits = vec![0u8; count * n];
    for k in 0..count {
        for i in sample(&mut rng, n, ones) {
            bits[k * n + i] = 1;
        }
    }
    PatternSet::new(count, n, bits)
}
