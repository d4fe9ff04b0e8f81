//! Swept approximate message passing for phase retrieval (prSAMP), and the
//! double phase retrieval pipeline built on it: calibrate the transmission
//! matrix of a scattering medium from amplitude-only measurements of binary
//! patterns, then image sparse binary objects through that medium.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`.
//!
//! ```
//! use prsamp::{generate_tm, measure, reconstruct, NoiseModel, PriorMode, SolverOptions};
//!
//! let h = generate_tm::<f64>(64, 64, 7).unwrap();
//! let x: Vec<f64> = (0..64).map(|i| (i % 8 == 3) as u8 as f64).collect();
//! let y = measure(&h, &x, NoiseModel::None, 0).unwrap();
//! let rec = reconstruct(&h, &y, &PriorMode::Global(0.125), &SolverOptions::default()).unwrap();
//! assert!(rec.x_bin.iter().zip(&x).all(|(&b, &t)| b as f64 == t));
//! ```

// `!(x > 0)` rejects NaN along with nonpositive values; index loops walk
// several parallel arrays at once
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod calibration;
pub mod dataio;
pub mod error;
pub mod experiment;
pub mod imaging;
pub mod medium;
pub mod metrics;
pub mod model;
pub mod priors;
pub mod scalar;
pub mod solver;

pub use calibration::{
    build_calibration_set, calibrate, gen_bernoulli_patterns, gen_structured_patterns, CalibrationReport, RowReport,
};
pub use dataio::BinaryImages;
pub use error::{Error, PartialEstimate, Result};
pub use imaging::{binarize, reconstruct, sparsity_of, Imager, PriorMode, Reconstruction};
pub use medium::{generate_tm, measure, measure_batch, measure_field, NoiseModel};
pub use metrics::{dependence, held_out_dependence, pearson_correlation, phase_aligned_correlation, row_recovery};
pub use model::{
    seeded_rng, MeasurementSet, PatternSet, PriorSpec, Rho, SolverOptions, SolverState, TransmissionMatrix,
};
pub use priors::{binary_denoiser, complex_gaussian_denoiser, local_prior_estimate};
pub use scalar::Real;
pub use solver::{bessel_ratio, pr_output, solve, Channel, Operator, Problem, Solution};

pub type C64 = num_complex::Complex64;
pub type Tm = TransmissionMatrix<f64>;
pub type Measurements = MeasurementSet<f64>;
pub type Options = SolverOptions<f64>;
pub type Prior = PriorSpec<f64>;
pub type Mode = PriorMode<f64>;
pub type Image = Reconstruction<f64>;
pub type Noise = NoiseModel<f64>;
