//! Dataset ingestion and on-disk formats.
//!
//! * IDX (MNIST distribution format), read only.
//! * SCTM, a little-endian container for complex, real and binary matrices.
//! * P5 portable graymaps for reconstructed images.

mod datasets;
mod idx;
mod pgm;
mod sctm;

pub use datasets::{
    binarize_gray, crop_center, digit_like_rho, fixed_weight_images, make_d1, make_d2, rescale_nearest,
    sample_local_model, BinaryImages, D1_SIDE, D2_SIDE, MNIST_SIDE,
};
pub use idx::{load_idx, parse_idx, GrayImages, IdxData};
pub use pgm::{decode_pgm, encode_pgm, load_pgm, montage, save_image_pgm, Graymap};
pub use sctm::{
    decode_sctm, encode_sctm, load_matrix, load_measurements, load_patterns, load_real, load_sctm, save_matrix,
    save_measurements, save_patterns, save_real, save_sctm, SctmData, SCTM_HEADER_LEN, SCTM_MAGIC, SCTM_VERSION,
};
