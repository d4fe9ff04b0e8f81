//! Core domain containers, solver options and deterministic seeding.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Random stream used throughout the crate.
pub type SeededRng = ChaCha8Rng;

/// Deterministic generator for a `(seed, stream)` pair.
///
/// Distinct streams of the same seed are independent ChaCha streams, so
/// work split by row or pattern index does not depend on execution order.
pub fn seeded_rng(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Dense complex `rows x cols` matrix stored row-major.
///
/// Holds both the ground-truth transmission matrix of a medium and its
/// calibrated estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionMatrix<T: Real> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> TransmissionMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::dim(format!(
                "transmission matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::dim(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::arg(format!(
                "non-finite entry at row {}, col {}",
                k / cols,
                k % cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Matrix with zero rows; the result of calibrating no output pixels.
    pub fn empty(cols: usize) -> Self {
        Self {
            rows: 0,
            cols,
            data: Vec::new(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for m in 0..rows {
            for i in 0..cols {
                data.push(f(m, i));
            }
        }
        Self::new(rows, cols, data)
    }

    /// Stack row vectors; every row must have the same length.
    pub fn from_rows(rows: Vec<Vec<Complex<T>>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
            return Err(Error::dim(format!("row {bad} has a different length than row 0")));
        }
        let m = rows.len();
        Self::new(m, cols, rows.into_iter().flatten().collect())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, m: usize, i: usize) -> Complex<T> {
        self.data[m * self.cols + i]
    }

    #[inline]
    pub fn row(&self, m: usize) -> &[Complex<T>] {
        &self.data[m * self.cols..(m + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex<T>> {
        self.data
    }

    /// Keep only the listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if let Some(&bad) = rows.iter().find(|&&m| m >= self.rows) {
            return Err(Error::dim(format!("row {bad} out of range for {} rows", self.rows)));
        }
        if rows.is_empty() {
            return Ok(Self::empty(self.cols));
        }
        let data = rows.iter().flat_map(|&m| self.row(m).iter().copied()).collect();
        Ok(Self {
            rows: rows.len(),
            cols: self.cols,
            data,
        })
    }

    /// `H x` for a complex input field.
    pub fn apply(&self, x: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        self.check_input(x.len())?;
        Ok((0..self.rows)
            .map(|m| {
                self.row(m)
                    .iter()
                    .zip(x)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (h, xi)| acc + *h * *xi)
            })
            .collect())
    }

    /// `H x` for a real (intensity-modulated) input.
    pub fn apply_real(&self, x: &[T]) -> Result<Vec<Complex<T>>> {
        self.check_input(x.len())?;
        Ok((0..self.rows)
            .map(|m| {
                self.row(m)
                    .iter()
                    .zip(x)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (h, &xi)| acc + h.scale(xi))
            })
            .collect())
    }

    fn check_input(&self, n: usize) -> Result<()> {
        if n != self.cols {
            return Err(Error::dim(format!(
                "input has length {n}, matrix has {} columns",
                self.cols
            )));
        }
        Ok(())
    }
}

/// `count x dim` set of binary input patterns, row-major, one byte per bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternSet {
    count: usize,
    dim: usize,
    bits: Vec<u8>,
}

impl PatternSet {
    pub fn new(count: usize, dim: usize, bits: Vec<u8>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::dim("patterns must have at least one pixel"));
        }
        if bits.len() != count * dim {
            return Err(Error::dim(format!(
                "{count} patterns of {dim} pixels need {} values, got {}",
                count * dim,
                bits.len()
            )));
        }
        if let Some(k) = bits.iter().position(|&b| b > 1) {
            return Err(Error::arg(format!(
                "pattern {} pixel {} has value {}, expected 0 or 1",
                k / dim,
                k % dim,
                bits[k]
            )));
        }
        Ok(Self { count, dim, bits })
    }

    pub fn from_patterns(dim: usize, patterns: &[Vec<u8>]) -> Result<Self> {
        if let Some(bad) = patterns.iter().position(|p| p.len() != dim) {
            return Err(Error::dim(format!("pattern {bad} does not have {dim} pixels")));
        }
        Self::new(patterns.len(), dim, patterns.concat())
    }

    #[inline]
    pub fn count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn pattern(&self, p: usize) -> &[u8] {
        &self.bits[p * self.dim..(p + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u8]> {
        self.bits.chunks_exact(self.dim)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bits
    }

    pub fn pattern_as_real<T: Real>(&self, p: usize) -> Vec<T> {
        self.pattern(p)
            .iter()
            .map(|&b| if b == 1 { T::one() } else { T::zero() })
            .collect()
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    /// Concatenate two sets of equal dimension.
    pub fn concat(&self, other: &PatternSet) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::dim(format!(
                "cannot concatenate {}-pixel and {}-pixel patterns",
                self.dim, other.dim
            )));
        }
        let mut bits = self.bits.clone();
        bits.extend_from_slice(&other.bits);
        Self::new(self.count + other.count, self.dim, bits)
    }

    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&p| p >= self.count) {
            return Err(Error::dim(format!("pattern {bad} out of range for {}", self.count)));
        }
        let bits = indices.iter().flat_map(|&p| self.pattern(p).iter().copied()).collect();
        Self::new(indices.len(), self.dim, bits)
    }

    /// Calibration sets may not contain an all-zero pattern.
    pub fn check_calibration(&self) -> Result<()> {
        match self.iter().position(|p| p.iter().all(|&b| b == 0)) {
            Some(p) => Err(Error::arg(format!("calibration pattern {p} is all zeros"))),
            None => Ok(()),
        }
    }
}

/// Nonnegative amplitudes, `rows x cols` row-major: output pixel by pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet<T: Real> {
    rows: usize,
    cols: usize,
    values: Vec<T>,
}

impl<T: Real> MeasurementSet<T> {
    pub fn new(rows: usize, cols: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::dim(format!(
                "{rows}x{cols} measurements need {} values, got {}",
                rows * cols,
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !(v.is_finite() && *v >= T::zero())) {
            return Err(Error::arg(format!(
                "measurement ({}, {}) is {}, expected a finite nonnegative amplitude",
                k / cols.max(1),
                k % cols.max(1),
                values[k]
            )));
        }
        Ok(Self { rows, cols, values })
    }

    /// Build from per-pattern columns, each of length `rows`.
    pub fn from_columns(rows: usize, columns: &[Vec<T>]) -> Result<Self> {
        if let Some(bad) = columns.iter().position(|c| c.len() != rows) {
            return Err(Error::dim(format!("column {bad} does not have {rows} entries")));
        }
        let cols = columns.len();
        let mut values = vec![T::zero(); rows * cols];
        for (p, col) in columns.iter().enumerate() {
            for (m, &v) in col.iter().enumerate() {
                values[m * cols + p] = v;
            }
        }
        Self::new(rows, cols, values)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, m: usize) -> &[T] {
        &self.values[m * self.cols..(m + 1) * self.cols]
    }

    pub fn column(&self, p: usize) -> Vec<T> {
        (0..self.rows).map(|m| self.values[m * self.cols + p]).collect()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if let Some(&bad) = rows.iter().find(|&&m| m >= self.rows) {
            return Err(Error::dim(format!("row {bad} out of range for {} rows", self.rows)));
        }
        let values = rows.iter().flat_map(|&m| self.row(m).iter().copied()).collect();
        Self::new(rows.len(), self.cols, values)
    }
}

/// Per-problem AMP messages plus the cached output channel values.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState<T: Real> {
    /// Posterior mean of each coefficient.
    pub x_a: Vec<Complex<T>>,
    /// Posterior variance of each coefficient.
    pub x_v: Vec<T>,
    /// Onsager-corrected mean of each linear output.
    pub omega: Vec<Complex<T>>,
    /// Variance of each linear output.
    pub v: Vec<T>,
    /// Pseudo-measurement variance per coefficient.
    pub s: Vec<T>,
    /// Pseudo-measurement mean per coefficient.
    pub r: Vec<Complex<T>>,
    /// `p_out` per measurement.
    pub g: Vec<Complex<T>>,
    /// `p'_out` per measurement.
    pub g_prime: Vec<T>,
}

impl<T: Real> SolverState<T> {
    pub fn is_finite(&self) -> bool {
        let c = |z: &Complex<T>| z.re.is_finite() && z.im.is_finite();
        self.x_a.iter().all(c)
            && self.omega.iter().all(c)
            && self.r.iter().all(c)
            && self.g.iter().all(c)
            && self.x_v.iter().all(|v| v.is_finite())
            && self.v.iter().all(|v| v.is_finite())
            && self.s.iter().all(|v| v.is_finite())
            && self.g_prime.iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<T: Real> {
    /// Output channel noise variance.
    pub sigma2: T,
    pub max_sweeps: usize,
    /// Stop once the largest change of `x_a` in a sweep falls below this.
    pub tol: T,
    /// Weight of the fresh denoiser mean; 1 disables damping.
    pub damping: T,
    pub restarts: usize,
    pub seed: u64,
    /// Floor applied to `|omega|` in the phase retrieval channel.
    pub omega_guard: T,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            sigma2: T::lit(1e-3),
            max_sweeps: 200,
            tol: T::lit(1e-7),
            damping: T::one(),
            restarts: 3,
            seed: 0,
            omega_guard: T::lit(1e-12),
        }
    }
}

impl<T: Real> SolverOptions<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma2 > T::zero() && self.sigma2.is_finite()) {
            return Err(Error::arg(format!("sigma2 must be positive, got {}", self.sigma2)));
        }
        if !(self.tol > T::zero()) {
            return Err(Error::arg(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_sweeps == 0 {
            return Err(Error::arg("max_sweeps must be at least 1"));
        }
        if self.restarts == 0 {
            return Err(Error::arg("restarts must be at least 1"));
        }
        if !(self.damping > T::zero() && self.damping <= T::one()) {
            return Err(Error::arg(format!("damping must lie in (0, 1], got {}", self.damping)));
        }
        if !(self.omega_guard > T::zero()) {
            return Err(Error::arg("omega_guard must be positive"));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Per-pixel activation probability of the binary prior.
#[derive(Debug, Clone, PartialEq)]
pub enum Rho<T: Real> {
    Global(T),
    Local(Vec<T>),
}

impl<T: Real> Rho<T> {
    #[inline]
    pub fn at(&self, i: usize) -> T {
        match self {
            Rho::Global(r) => *r,
            Rho::Local(v) => v[i],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PriorSpec<T: Real> {
    /// Zero-mean circular complex Gaussian with the given variance.
    ComplexGaussian { variance: T },
    /// Independent {0, 1} pixels.
    Binary(Rho<T>),
}

impl<T: Real> PriorSpec<T> {
    pub fn validate(&self, n: usize) -> Result<()> {
        let in_unit = |r: T| r >= T::zero() && r <= T::one();
        match self {
            PriorSpec::ComplexGaussian { variance } => {
                if !(*variance > T::zero() && variance.is_finite()) {
                    return Err(Error::arg(format!("prior variance must be positive, got {variance}")));
                }
            }
            PriorSpec::Binary(Rho::Global(r)) => {
                if !in_unit(*r) {
                    return Err(Error::arg(format!("rho must lie in [0, 1], got {r}")));
                }
            }
            PriorSpec::Binary(Rho::Local(v)) => {
                if v.len() != n {
                    return Err(Error::dim(format!("local rho has {} entries, signal has {n}", v.len())));
                }
                if let Some(i) = v.iter().position(|&r| !in_unit(r)) {
                    return Err(Error::arg(format!("rho[{i}] = {} outside [0, 1]", v[i])));
                }
            }
        }
        Ok(())
    }
}
