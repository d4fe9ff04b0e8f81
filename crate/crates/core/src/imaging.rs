//! Compressive reconstruction of sparse binary images from amplitude-only
//! measurements through a calibrated medium.

use rayon::prelude::*;

use crate::calibration::CalibrationReport;
use crate::error::{Error, Result};
use crate::model::{PriorSpec, Rho, SolverOptions, TransmissionMatrix};
use crate::scalar::Real;
use crate::solver::{solve, Channel, Operator, Problem};

/// Threshold applied to the posterior mean.
pub const BINARIZE_THRESHOLD: f64 = 0.5;

/// How pixel activation probabilities are set.
#[derive(Debug, Clone, PartialEq)]
pub enum PriorMode<T: Real> {
    /// One sparsity level for every pixel.
    Global(T),
    /// Per-pixel probabilities, e.g. from [`crate::priors::local_prior_estimate`].
    Local(Vec<T>),
}

impl<T: Real> PriorMode<T> {
    fn to_prior(&self) -> PriorSpec<T> {
        match self {
            PriorMode::Global(r) => PriorSpec::Binary(Rho::Global(*r)),
            PriorMode::Local(v) => PriorSpec::Binary(Rho::Local(v.clone())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction<T: Real> {
    /// Posterior mean, clamped to `[0, 1]`.
    pub x_soft: Vec<T>,
    pub x_bin: Vec<u8>,
    /// `||y - |H x_soft||| / ||y||`.
    pub residual: T,
    pub sweeps_used: usize,
    pub converged: bool,
}

/// Reusable reconstruction operator for one medium.
#[derive(Debug, Clone)]
pub struct Imager<T: Real> {
    operator: Operator<T>,
}

impl<T: Real> Imager<T> {
    pub fn new(h_est: &TransmissionMatrix<T>) -> Self {
        Self {
            operator: Operator::from_matrix(h_est),
        }
    }

    /// Drop the rows a calibration report flags as failed.
    pub fn excluding_flagged(h_est: &TransmissionMatrix<T>, report: &CalibrationReport) -> Result<(Self, Vec<usize>)> {
        if report.rows.len() != h_est.rows() {
            return Err(Error::dim(format!(
                "report covers {} rows, estimate has {}",
                report.rows.len(),
                h_est.rows()
            )));
        }
        let keep: Vec<usize> = (0..h_est.rows()).filter(|m| !report.rows[*m].diverged).collect();
        Ok((Self::new(&h_est.select_rows(&keep)?), keep))
    }

    pub fn rows(&self) -> usize {
        self.operator.rows()
    }

    pub fn cols(&self) -> usize {
        self.operator.cols()
    }

    pub fn reconstruct(&self, y: &[T], mode: &PriorMode<T>, options: &SolverOptions<T>) -> Result<Reconstruction<T>> {
        let prior = mode.to_prior();
        let problem = Problem::new(&self.operator, y, Channel::PhaseRetrieval, &prior)?;
        let sol = solve(&problem, options)?;
        let x_soft: Vec<T> = sol.x_a.iter().map(|z| z.re.max(T::zero()).min(T::one())).collect();
        let x_bin = binarize(&x_soft);
        let complex: Vec<_> = x_soft
            .iter()
            .map(|&v| num_complex::Complex::new(v, T::zero()))
            .collect();
        let residual = problem.residual(&complex);
        Ok(Reconstruction {
            x_soft,
            x_bin,
            residual,
            sweeps_used: sol.sweeps_used,
            converged: sol.converged,
        })
    }

    /// Reconstruct several measurement vectors; image `k` uses solver seed
    /// `options.seed + k`. Output order matches input order for any
    /// `threads` (0 selects the rayon default).
    pub fn reconstruct_batch(
        &self,
        ys: &[Vec<T>],
        mode: &PriorMode<T>,
        options: &SolverOptions<T>,
        threads: usize,
    ) -> Result<Vec<Reconstruction<T>>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::arg(format!("cannot start {threads} worker threads: {e}")))?;
        pool.install(|| {
            ys.par_iter()
                .enumerate()
                .map(|(k, y)| self.reconstruct(y, mode, &options.with_seed(options.seed.wrapping_add(k as u64))))
                .collect()
        })
    }
}

/// Binary-prior phase retrieval of `x` from `y = |H x|`.
pub fn reconstruct<T: Real>(
    h_est: &TransmissionMatrix<T>,
    y: &[T],
    mode: &PriorMode<T>,
    options: &SolverOptions<T>,
) -> Result<Reconstruction<T>> {
    Imager::new(h_est).reconstruct(y, mode, options)
}

pub fn binarize<T: Real>(x_soft: &[T]) -> Vec<u8> {
    let t = T::lit(BINARIZE_THRESHOLD);
    x_soft.iter().map(|&v| (v >= t) as u8).collect()
}

/// Fraction of nonzero pixels.
pub fn sparsity_of(image: &[u8]) -> Result<f64> {
    if image.is_empty() {
        return Err(Error::arg("sparsity of an empty image"));
    }
    Ok(image.iter().filter(|&&b| b != 0).count() as f64 / image.len() as f64)
}
