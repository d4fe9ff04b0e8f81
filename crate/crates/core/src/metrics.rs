//! Evaluation metrics for calibration and reconstruction quality.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::{MeasurementSet, PatternSet, TransmissionMatrix};
use crate::scalar::Real;

fn norm<T: Real>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |s, &x| s + x * x).sqrt()
}

fn cnorm<T: Real>(a: &[Complex<T>]) -> T {
    a.iter().fold(T::zero(), |s, z| s + z.norm_sqr()).sqrt()
}

/// Normalised cross-correlation without mean removal, `<a/|a|, b/|b|>`.
pub fn dependence<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::dim(format!("vectors of length {} and {}", a.len(), b.len())));
    }
    let (na, nb) = (norm(a), norm(b));
    if !(na > T::zero() && nb > T::zero()) {
        return Err(Error::arg("dependence is undefined for a zero vector"));
    }
    let dot = a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y);
    Ok(dot / (na * nb))
}

/// `|<h_est, h_true>| / (|h_est| |h_true|)`: agreement up to a global phase.
pub fn phase_aligned_correlation<T: Real>(h_est: &[Complex<T>], h_true: &[Complex<T>]) -> Result<T> {
    let (ne, nt) = complex_norms(h_est, h_true)?;
    let dot = h_est
        .iter()
        .zip(h_true)
        .fold(Complex::new(T::zero(), T::zero()), |s, (a, b)| s + a.conj() * b);
    Ok(dot.norm() / (ne * nt))
}

/// Row agreement up to the ambiguities of amplitude-only calibration.
///
/// With a real input matrix `|X h| = |X conj(h)|`, so besides the global
/// phase the conjugate row is equally consistent with the data. This is
/// the larger of the phase-aligned correlations of `h_est` and
/// `conj(h_est)` with `h_true`.
pub fn row_recovery<T: Real>(h_est: &[Complex<T>], h_true: &[Complex<T>]) -> Result<T> {
    let (ne, nt) = complex_norms(h_est, h_true)?;
    let zero = Complex::new(T::zero(), T::zero());
    let (direct, mirrored) = h_est
        .iter()
        .zip(h_true)
        .fold((zero, zero), |(d, c), (a, b)| (d + a.conj() * b, c + *a * b));
    Ok(direct.norm().max(mirrored.norm()) / (ne * nt))
}

fn complex_norms<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Result<(T, T)> {
    if a.len() != b.len() {
        return Err(Error::dim(format!("vectors of length {} and {}", a.len(), b.len())));
    }
    let (na, nb) = (cnorm(a), cnorm(b));
    if !(na > T::zero() && nb > T::zero()) {
        return Err(Error::arg("row recovery is undefined for a zero vector"));
    }
    Ok((na, nb))
}

/// Mean-removed Pearson correlation; 0 when either input is constant.
pub fn pearson_correlation<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::dim(format!("vectors of length {} and {}", a.len(), b.len())));
    }
    let n = T::from_count(a.len());
    let ma = a.iter().fold(T::zero(), |s, &x| s + x) / n;
    let mb = b.iter().fold(T::zero(), |s, &x| s + x) / n;
    let (mut sab, mut saa, mut sbb) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab = sab + dx * dy;
        saa = saa + dx * dx;
        sbb = sbb + dy * dy;
    }
    if saa <= T::zero() || sbb <= T::zero() {
        return Ok(T::zero());
    }
    Ok(sab / (saa * sbb).sqrt())
}

/// Dependence where an all-zero estimate scores 0 instead of failing.
pub fn dependence_or_zero<T: Real>(truth: &[T], estimate: &[T]) -> Result<T> {
    if norm(estimate) == T::zero() {
        if truth.len() != estimate.len() {
            return Err(Error::dim(format!(
                "vectors of length {} and {}",
                truth.len(),
                estimate.len()
            )));
        }
        return Ok(T::zero());
    }
    dependence(truth, estimate)
}

/// Mean over patterns of `dependence(y_p, |H_est x_p|)`.
///
/// An estimate that predicts an all-zero output scores 0 for that pattern.
pub fn held_out_dependence<T: Real>(
    h_est: &TransmissionMatrix<T>,
    patterns: &PatternSet,
    measurements: &MeasurementSet<T>,
) -> Result<T> {
    if patterns.dim() != h_est.cols() {
        return Err(Error::dim(format!(
            "patterns have {} pixels, estimate has {} columns",
            patterns.dim(),
            h_est.cols()
        )));
    }
    if measurements.rows() != h_est.rows() || measurements.cols() != patterns.count() {
        return Err(Error::dim(format!(
            "measurements are {}x{}, expected {}x{}",
            measurements.rows(),
            measurements.cols(),
            h_est.rows(),
            patterns.count()
        )));
    }
    if patterns.count() == 0 {
        return Err(Error::arg("held-out set is empty"));
    }
    let mut total = T::zero();
    for p in 0..patterns.count() {
        let predicted: Vec<T> = h_est
            .apply_real(&patterns.pattern_as_real::<T>(p))?
            .iter()
            .map(|z| z.norm())
            .collect();
        total = total + dependence_or_zero(&measurements.column(p), &predicted)?;
    }
    Ok(total / T::from_count(patterns.count()))
}
