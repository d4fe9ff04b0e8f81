//! Output channels: `p_out` and its derivative for the linear Gaussian
//! channel and for amplitude-only (phase retrieval) measurements.

use num_complex::Complex;

use super::bessel::ratio_parts;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Measurement likelihood attached to each linear output `z = A x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    /// `y = z + w` with real Gaussian `w`.
    Gaussian,
    /// `y = |z + w|` with circular complex Gaussian `w`.
    PhaseRetrieval,
}

/// `(g, g')` for one output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelOutput<T: Real> {
    pub g: Complex<T>,
    pub g_prime: T,
}

impl Channel {
    /// Evaluate without argument checks; `v` is clamped at zero.
    #[inline]
    pub(crate) fn eval<T: Real>(self, y: T, omega: Complex<T>, v: T, sigma2: T, guard: T) -> ChannelOutput<T> {
        let v = v.max(T::zero());
        match self {
            Channel::Gaussian => gaussian_unchecked(y, omega, v, sigma2),
            Channel::PhaseRetrieval => phase_retrieval_unchecked(y, omega, v, sigma2, guard),
        }
    }
}

/// Linear Gaussian channel: `g = (y - omega) / (v + sigma2)`, `g' = -1 / (v + sigma2)`.
pub fn gaussian_output<T: Real>(y: T, omega: Complex<T>, v: T, sigma2: T) -> Result<ChannelOutput<T>> {
    check(y, omega, v, sigma2)?;
    Ok(gaussian_unchecked(y, omega, v, sigma2))
}

/// Phase retrieval channel.
///
/// With `w = v + sigma2`, `phi = 2 y |omega| / w` and `r0 = I1(phi) / I0(phi)`:
///
/// ```text
/// g  = omega / w * (r0 y / |omega| - 1)
/// g' = ((1 - r0^2) y^2 / w + sigma2 / v) / w - 1 / v
/// ```
///
/// `g'` is evaluated in the equivalent form `(1 - r0^2) y^2 / w^2 - 1 / w`,
/// which stays finite as `v -> 0`. `|omega|` is floored at `omega_guard`.
pub fn pr_output<T: Real>(y: T, omega: Complex<T>, v: T, sigma2: T, omega_guard: T) -> Result<ChannelOutput<T>> {
    check(y, omega, v, sigma2)?;
    if y < T::zero() {
        return Err(Error::arg(format!("amplitude must be nonnegative, got {y}")));
    }
    if !(omega_guard > T::zero()) {
        return Err(Error::arg("omega guard must be positive"));
    }
    Ok(phase_retrieval_unchecked(y, omega, v, sigma2, omega_guard))
}

fn check<T: Real>(y: T, omega: Complex<T>, v: T, sigma2: T) -> Result<()> {
    if !(y.is_finite() && omega.re.is_finite() && omega.im.is_finite() && v.is_finite() && sigma2.is_finite()) {
        return Err(Error::arg("channel inputs must be finite"));
    }
    if v < T::zero() {
        return Err(Error::arg(format!("output variance must be nonnegative, got {v}")));
    }
    if !(sigma2 > T::zero()) {
        return Err(Error::arg(format!("sigma2 must be positive, got {sigma2}")));
    }
    Ok(())
}

#[inline]
fn gaussian_unchecked<T: Real>(y: T, omega: Complex<T>, v: T, sigma2: T) -> ChannelOutput<T> {
    let inv = (v + sigma2).recip();
    ChannelOutput {
        g: (Complex::new(y, T::zero()) - omega).scale(inv),
        g_prime: -inv,
    }
}

#[inline]
fn phase_retrieval_unchecked<T: Real>(y: T, omega: Complex<T>, v: T, sigma2: T, guard: T) -> ChannelOutput<T> {
    let w = v + sigma2;
    let inv = w.recip();
    let mag = omega.norm_sqr().sqrt().max(guard);
    let phi = (y + y) * mag * inv;
    let (r0, one_minus_r0) = ratio_parts(phi);
    // r0 y / |omega| - 1 == ((y - |omega|) - (1 - r0) y) / |omega|
    let factor = ((y - mag) - one_minus_r0 * y) / mag;
    let one_minus_r0_sq = one_minus_r0 * (T::one() + r0);
    ChannelOutput {
        g: omega.scale(inv * factor),
        g_prime: one_minus_r0_sq * y * y * inv * inv - inv,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn gaussian_examples() {
        let o = gaussian_output(1.0, c(1.0, 0.0), 1.0, 1.0).unwrap();
        assert_eq!((o.g, o.g_prime), (c(0.0, 0.0), -0.5));
        let o = gaussian_output(2.0, c(0.0, 0.0), 0.5, 0.5).unwrap();
        assert_eq!((o.g, o.g_prime), (c(2.0, 0.0), -1.0));
    }

    #[test]
    fn gaussian_derivative_matches_finite_difference() {
        let h = 1e-6;
        for &(y, re, im, v, s2) in &[(0.3, -0.2, 0.7, 0.4, 0.1), (2.0, 1.5, -0.5, 0.05, 0.9)] {
            let o = gaussian_output(y, c(re, im), v, s2).unwrap();
            let up = gaussian_output(y, c(re + h, im), v, s2).unwrap().g.re;
            let dn = gaussian_output(y, c(re - h, im), v, s2).unwrap().g.re;
            assert!(((up - dn) / (2.0 * h) - o.g_prime).abs() < 1e-6);
        }
    }

    #[test]
    fn pr_zero_amplitude() {
        let o = pr_output(0.0, c(1.0, 0.0), 0.5, 0.5, 1e-12).unwrap();
        assert!((o.g - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn pr_matched_amplitude_at_vanishing_variance() {
        // 1 - r0 ~ 1/(2 phi) leaves g -> -omega / (4 y |omega|), a bounded
        // value, while omega / w itself is of order 1e8.
        let omega = c(0.6, 0.8);
        let o = pr_output(1.0, omega, 1e-9, 1e-9, 1e-12).unwrap();
        assert!((o.g + omega / 4.0).norm() < 1e-6, "{:?}", o.g);
        assert!(o.g_prime.is_finite());
    }

    #[test]
    fn pr_reference_point() {
        let o = pr_output(1.0, c(1.0, 0.0), 0.1, 0.01, 1e-12).unwrap();
        assert_eq!(o.g.im, 0.0);
        assert!(o.g.re < 0.0);
        assert!((o.g.re.abs() - 0.25).abs() < 0.01, "{}", o.g.re);
    }

    #[test]
    fn pr_handles_vanishing_omega_and_huge_phi() {
        let o = pr_output(1.0, c(0.0, 0.0), 0.1, 0.1, 1e-12).unwrap();
        assert!(o.g.norm() == 0.0 && o.g_prime.is_finite());
        let o = pr_output(3.0, c(1e-300, 0.0), 0.1, 0.1, 1e-12).unwrap();
        assert!(o.g.re.is_finite() && o.g_prime.is_finite());
        let o = pr_output(1e3, c(1e3, 0.0), 1e-12, 1e-12, 1e-12).unwrap();
        assert!(o.g.re.is_finite() && o.g_prime.is_finite());
    }

    #[test]
    fn pr_variance_form_matches_textbook_form() {
        // ((1 - r0^2) y^2 / w + sigma2 / v) / w - 1 / v
        for &(y, m, v, s2) in &[(0.7, 1.2, 0.3, 0.2), (2.5, 0.4, 0.9, 0.05), (1.0, 1.0, 0.01, 0.5)] {
            let o = pr_output(y, c(m, 0.0), v, s2, 1e-12).unwrap();
            let w: f64 = v + s2;
            let r0 = crate::solver::bessel_ratio(2.0 * y * m / w).unwrap();
            let textbook = ((1.0 - r0 * r0) * y * y / w + s2 / v) / w - 1.0 / v;
            assert!((o.g_prime - textbook).abs() < 1e-9 * textbook.abs().max(1.0));
        }
    }

    #[test]
    fn pr_rejects_bad_inputs() {
        assert!(pr_output(f64::NAN, c(1.0, 0.0), 0.1, 0.1, 1e-12).is_err());
        assert!(pr_output(1.0, c(f64::INFINITY, 0.0), 0.1, 0.1, 1e-12).is_err());
        assert!(pr_output(1.0, c(1.0, 0.0), 0.1, 0.0, 1e-12).is_err());
        assert!(pr_output(-1.0, c(1.0, 0.0), 0.1, 0.1, 1e-12).is_err());
        assert!(gaussian_output(1.0, c(1.0, 0.0), -0.1, 0.1).is_err());
    }
}
