//! Input denoisers: posterior mean and variance of one coefficient given a
//! Gaussian pseudo-measurement `r` with variance `s`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::{PatternSet, PriorSpec};
use crate::scalar::Real;

/// Default clamp applied to empirical pixel probabilities.
pub const DEFAULT_RHO_FLOOR: f64 = 1e-3;

/// Posterior of `x in {0, 1}` with `P(x = 1) = rho`.
///
/// The weights `(1 - rho) e^{-|r|^2 / 2s}` and `rho e^{-|1 - r|^2 / 2s}`
/// are compared in the log domain, which reduces the posterior mean to a
/// logistic function of `log(rho / (1 - rho)) + (2 Re r - 1) / 2s`.
pub fn binary_denoiser<T: Real>(r: Complex<T>, s: T, rho: T) -> Result<(T, T)> {
    if !(r.re.is_finite() && r.im.is_finite() && s.is_finite()) {
        return Err(Error::arg("binary denoiser inputs must be finite"));
    }
    if !(s > T::zero()) {
        return Err(Error::arg(format!(
            "pseudo-measurement variance must be positive, got {s}"
        )));
    }
    if !(rho >= T::zero() && rho <= T::one()) {
        return Err(Error::arg(format!("rho must lie in [0, 1], got {rho}")));
    }
    Ok(binary_unchecked(r, s, rho))
}

#[inline]
pub(crate) fn binary_unchecked<T: Real>(r: Complex<T>, s: T, rho: T) -> (T, T) {
    if rho <= T::zero() {
        return (T::zero(), T::zero());
    }
    if rho >= T::one() {
        return (T::one(), T::zero());
    }
    let two = T::lit(2.0);
    let logit = (rho / (T::one() - rho)).ln() + (two * r.re - T::one()) / (two * s);
    let mean = if logit >= T::zero() {
        (T::one() + (-logit).exp()).recip()
    } else {
        let e = logit.exp();
        e / (T::one() + e)
    };
    (mean, mean * (T::one() - mean))
}

/// Posterior of `x ~ CN(0, v0)`: `x_a = r v0 / (v0 + s)`, `x_v = v0 s / (v0 + s)`.
pub fn complex_gaussian_denoiser<T: Real>(r: Complex<T>, s: T, v0: T) -> Result<(Complex<T>, T)> {
    if !(r.re.is_finite() && r.im.is_finite() && s.is_finite() && v0.is_finite()) {
        return Err(Error::arg("gaussian denoiser inputs must be finite"));
    }
    if !(s > T::zero() && v0 > T::zero()) {
        return Err(Error::arg("variances must be positive"));
    }
    Ok(gaussian_unchecked(r, s, v0))
}

#[inline]
pub(crate) fn gaussian_unchecked<T: Real>(r: Complex<T>, s: T, v0: T) -> (Complex<T>, T) {
    let k = v0 / (v0 + s);
    (r.scale(k), s * k)
}

impl<T: Real> PriorSpec<T> {
    /// Denoise coefficient `i`; inputs are trusted.
    #[inline]
    pub(crate) fn denoise(&self, i: usize, r: Complex<T>, s: T) -> (Complex<T>, T) {
        match self {
            PriorSpec::ComplexGaussian { variance } => gaussian_unchecked(r, s, *variance),
            PriorSpec::Binary(rho) => {
                let (m, v) = binary_unchecked(r, s, rho.at(i));
                (Complex::new(m, T::zero()), v)
            }
        }
    }
}

/// Per-pixel activation frequency of a training set, clamped to
/// `[floor, 1 - floor]`.
pub fn local_prior_estimate<T: Real>(training: &PatternSet, floor: T) -> Result<Vec<T>> {
    if training.count() == 0 {
        return Err(Error::arg("local prior needs at least one training image"));
    }
    if !(floor >= T::zero() && floor <= T::lit(0.5)) {
        return Err(Error::arg(format!("rho floor must lie in [0, 0.5], got {floor}")));
    }
    let mut counts = vec![0usize; training.dim()];
    for p in training.iter() {
        for (c, &b) in counts.iter_mut().zip(p) {
            *c += b as usize;
        }
    }
    let total = T::from_count(training.count());
    Ok(counts
        .into_iter()
        .map(|c| (T::from_count(c) / total).max(floor).min(T::one() - floor))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    /// Two-point enumeration over x in {0, 1}, straight from the weights.
    fn enumerate(r: Complex<f64>, s: f64, rho: f64) -> (f64, f64) {
        let w0 = (1.0 - rho) * (-r.norm_sqr() / (2.0 * s)).exp();
        let w1 = rho * (-(c(1.0, 0.0) - r).norm_sqr() / (2.0 * s)).exp();
        let mean = w1 / (w0 + w1);
        (mean, mean - mean * mean)
    }

    #[test]
    fn binary_examples() {
        assert_eq!(binary_denoiser(c(0.3, 0.2), 0.7, 0.0).unwrap(), (0.0, 0.0));
        for &s in &[1e-3, 0.1, 10.0] {
            let (m, v) = binary_denoiser(c(0.5, 0.0), s, 0.5).unwrap();
            assert!((m - 0.5).abs() < 1e-15 && (v - 0.25).abs() < 1e-15);
        }
        let (m, v) = binary_denoiser(c(0.8, 0.0), 0.1, 0.5).unwrap();
        let (em, ev) = enumerate(c(0.8, 0.0), 0.1, 0.5);
        assert!((em - 0.95257).abs() < 1e-5 && (ev - 0.04518).abs() < 1e-5);
        assert!((m - em).abs() < 1e-12 && (v - ev).abs() < 1e-12);
    }

    #[test]
    fn binary_is_stable_for_tiny_variance() {
        // direct weights underflow to 0/0 here
        let (m, v) = binary_denoiser(c(40.0, 3.0), 1e-6, 0.2).unwrap();
        assert_eq!((m, v), (1.0, 0.0));
        let (m, _) = binary_denoiser(c(0.4, 0.0), 1e-6, 0.9).unwrap();
        assert!((0.0..1e-100).contains(&m));
    }

    #[test]
    fn binary_rejects_bad_inputs() {
        assert!(binary_denoiser(c(f64::NAN, 0.0), 1.0, 0.5).is_err());
        assert!(binary_denoiser(c(0.0, 0.0), f64::INFINITY, 0.5).is_err());
        assert!(binary_denoiser(c(0.0, 0.0), 0.0, 0.5).is_err());
        assert!(binary_denoiser(c(0.0, 0.0), 1.0, 1.5).is_err());
    }

    #[test]
    fn gaussian_examples() {
        let (m, v) = complex_gaussian_denoiser(c(0.0, 0.0), 2.0, 1.0).unwrap();
        assert_eq!(m, c(0.0, 0.0));
        assert!((v - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(
            complex_gaussian_denoiser(c(2.0, 0.0), 1.0, 1.0).unwrap(),
            (c(1.0, 0.0), 0.5)
        );
        let (m, v) = complex_gaussian_denoiser(c(5.0, 0.0), 1e12, 1.0).unwrap();
        assert!((m.re - 5e-12).abs() < 1e-20 && (v - 1.0).abs() < 1e-11);
        assert!(complex_gaussian_denoiser(c(1.0, 0.0), 1.0, 0.0).is_err());
    }

    #[test]
    fn local_prior_examples() {
        let ones = PatternSet::new(3, 4, vec![1; 12]).unwrap();
        let rho: Vec<f64> = local_prior_estimate(&ones, 1e-3).unwrap();
        assert!(rho.iter().all(|&r| (r - 0.999).abs() < 1e-15));

        let two = PatternSet::new(2, 3, vec![1, 0, 0, 0, 0, 0]).unwrap();
        let rho: Vec<f64> = local_prior_estimate(&two, 1e-3).unwrap();
        assert_eq!(rho, vec![0.5, 1e-3, 1e-3]);

        let empty = PatternSet::new(0, 3, vec![]).unwrap();
        assert!(local_prior_estimate::<f64>(&empty, 1e-3).is_err());
    }

    proptest! {
        #[test]
        fn binary_variance_identity(re in -5.0f64..5.0, im in -5.0f64..5.0, s in 1e-4f64..10.0, rho in 0.0f64..=1.0) {
            let (m, v) = binary_denoiser(c(re, im), s, rho).unwrap();
            prop_assert!((0.0..=1.0).contains(&m));
            prop_assert_eq!(v, m * (1.0 - m));
        }

        #[test]
        fn binary_matches_enumeration(re in -1.0f64..2.0, s in 0.05f64..5.0, rho in 0.01f64..0.99) {
            let (m, _) = binary_denoiser(c(re, 0.3), s, rho).unwrap();
            let (em, _) = enumerate(c(re, 0.3), s, rho);
            prop_assert!((m - em).abs() < 1e-12);
        }

        #[test]
        fn binary_degenerate_rho_is_constant(re in -50.0f64..50.0, im in -5.0f64..5.0, s in 1e-8f64..1e3) {
            prop_assert_eq!(binary_denoiser(c(re, im), s, 0.0).unwrap(), (0.0, 0.0));
            prop_assert_eq!(binary_denoiser(c(re, im), s, 1.0).unwrap(), (1.0, 0.0));
        }

        #[test]
        fn binary_symmetry(d in -3.0f64..3.0, s in 1e-3f64..10.0, rho in 0.01f64..0.99) {
            // reflecting r about 1/2 and swapping rho <-> 1 - rho mirrors the mean
            let (a, _) = binary_denoiser(c(0.5 + d, 0.0), s, rho).unwrap();
            let (b, _) = binary_denoiser(c(0.5 - d, 0.0), s, 1.0 - rho).unwrap();
            prop_assert!((a - (1.0 - b)).abs() < 1e-12);
        }

        #[test]
        fn gaussian_conjugate_identity(re in -10.0f64..10.0, im in -10.0f64..10.0, s in 1e-6f64..1e3, v0 in 1e-6f64..1e3) {
            let r = c(re, im);
            let (m, v) = complex_gaussian_denoiser(r, s, v0).unwrap();
            let lhs = m * (v0 + s);
            let rhs = r * v0;
            prop_assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1e-300) + 1e-300);
            prop_assert!(v > 0.0 && v <= v0.min(s));
            // collinear with r
            prop_assert!((m.re * r.im - m.im * r.re).abs() <= 1e-12 * r.norm_sqr());
        }

        #[test]
        fn denoisers_are_lipschitz_in_r(re in -2.0f64..3.0, s in 0.05f64..2.0, rho in 0.05f64..0.95) {
            // posterior mean derivative in Re r is x_v / s for this family
            let h = 1e-4;
            let (a, _) = binary_denoiser(c(re, 0.0), s, rho).unwrap();
            let (b, _) = binary_denoiser(c(re + h, 0.0), s, rho).unwrap();
            prop_assert!((b - a).abs() <= h * 0.25 / s * 1.01);
            let (ga, _) = complex_gaussian_denoiser(c(re, 0.0), s, 1.0).unwrap();
            let (gb, _) = complex_gaussian_denoiser(c(re + h, 0.0), s, 1.0).unwrap();
            prop_assert!((gb - ga).norm() <= h * 1.0 / (1.0 + s) * 1.01);
        }
    }
}
