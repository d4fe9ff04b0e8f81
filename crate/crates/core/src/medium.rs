//! Simulated multiply scattering medium: i.i.d. complex Gaussian
//! transmission matrices and intensity-only cameras.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{seeded_rng, MeasurementSet, PatternSet, TransmissionMatrix};
use crate::scalar::Real;

const STREAM_MEDIUM: u64 = 0x6d65_6469;
const STREAM_NOISE: u64 = 0x6e6f_6973;

/// Camera noise applied before the square-root preprocessing.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum NoiseModel<T: Real> {
    #[default]
    None,
    /// `y = max(|Hx| + w, 0)`, `w ~ N(0, sigma^2)`.
    AmplitudeGaussian(T),
    /// `y = sqrt(max(|Hx|^2 + w, 0))`, `w ~ N(0, sigma^2)`.
    IntensityGaussian(T),
}

impl<T: Real> NoiseModel<T> {
    fn validate(&self) -> Result<()> {
        match *self {
            NoiseModel::None => Ok(()),
            NoiseModel::AmplitudeGaussian(s) | NoiseModel::IntensityGaussian(s) => {
                if s >= T::zero() && s.is_finite() {
                    Ok(())
                } else {
                    Err(Error::arg(format!(
                        "noise sigma must be finite and nonnegative, got {s}"
                    )))
                }
            }
        }
    }
}

/// `rows x cols` matrix with i.i.d. `CN(0, 1/cols)` entries.
pub fn generate_tm<T: Real>(rows: usize, cols: usize, seed: u64) -> Result<TransmissionMatrix<T>> {
    if rows == 0 || cols == 0 {
        return Err(Error::arg(format!("medium size must be positive, got {rows}x{cols}")));
    }
    let mut rng = seeded_rng(seed, STREAM_MEDIUM);
    let sd = (0.5 / cols as f64).sqrt();
    TransmissionMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex::new(T::lit(re * sd), T::lit(im * sd))
    })
}

/// Amplitudes `|H x|` of a real input, with camera noise drawn from `seed`.
pub fn measure<T: Real>(h: &TransmissionMatrix<T>, x: &[T], noise: NoiseModel<T>, seed: u64) -> Result<Vec<T>> {
    let field = h.apply_real(x)?;
    add_noise(&field, noise, seed)
}

/// Amplitudes `|H x|` of a complex input field.
pub fn measure_field<T: Real>(
    h: &TransmissionMatrix<T>,
    x: &[Complex<T>],
    noise: NoiseModel<T>,
    seed: u64,
) -> Result<Vec<T>> {
    let field = h.apply(x)?;
    add_noise(&field, noise, seed)
}

fn add_noise<T: Real>(field: &[Complex<T>], noise: NoiseModel<T>, seed: u64) -> Result<Vec<T>> {
    noise.validate()?;
    let mut rng = seeded_rng(seed, STREAM_NOISE);
    let mut draw = || T::lit(rng.sample::<f64, _>(StandardNormal));
    Ok(match noise {
        NoiseModel::None => field.iter().map(|z| z.norm()).collect(),
        NoiseModel::AmplitudeGaussian(s) => field.iter().map(|z| (z.norm() + s * draw()).max(T::zero())).collect(),
        NoiseModel::IntensityGaussian(s) => field
            .iter()
            .map(|z| (z.norm_sqr() + s * draw()).max(T::zero()).sqrt())
            .collect(),
    })
}

/// Measure every pattern; column `p` uses noise seed `seed ^ p`.
pub fn measure_batch<T: Real>(
    h: &TransmissionMatrix<T>,
    x: &PatternSet,
    noise: NoiseModel<T>,
    seed: u64,
) -> Result<MeasurementSet<T>> {
    if x.dim() != h.cols() {
        return Err(Error::dim(format!(
            "patterns have {} pixels, medium has {} inputs",
            x.dim(),
            h.cols()
        )));
    }
    let columns = (0..x.count())
        .map(|p| measure(h, &x.pattern_as_real::<T>(p), noise, seed ^ p as u64))
        .collect::<Result<Vec<_>>>()?;
    MeasurementSet::from_columns(h.rows(), &columns)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_moments() {
        let h = generate_tm::<f64>(1000, 100, 9).unwrap();
        let n = (h.rows() * h.cols()) as f64;
        let mean: Complex<f64> = h.as_slice().iter().sum::<Complex<f64>>() / n;
        let var = h.as_slice().iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / (n - 1.0);
        assert!(mean.norm() < 0.005, "mean {mean}");
        assert!((0.0095..=0.0105).contains(&var), "var {var}");
    }

    #[test]
    fn generation_is_seeded() {
        assert_eq!(
            generate_tm::<f64>(5, 4, 1).unwrap(),
            generate_tm::<f64>(5, 4, 1).unwrap()
        );
        assert_ne!(
            generate_tm::<f64>(5, 4, 1).unwrap(),
            generate_tm::<f64>(5, 4, 2).unwrap()
        );
        let one = generate_tm::<f64>(1, 1, 3).unwrap();
        assert!(one.get(0, 0).re.is_finite());
        assert!(generate_tm::<f64>(0, 4, 1).is_err());
    }

    #[test]
    fn identity_medium() {
        let n = 4;
        let h = TransmissionMatrix::from_fn(n, n, |m, i| Complex::new((m == i) as u8 as f64, 0.0)).unwrap();
        let y = measure(&h, &[1.0, 0.0, 0.0, 0.0], NoiseModel::None, 0).unwrap();
        assert_eq!(y, vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn global_phase_does_not_change_amplitudes() {
        let h = generate_tm::<f64>(20, 8, 4).unwrap();
        let x = [1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 0.0];
        let y = measure(&h, &x, NoiseModel::None, 0).unwrap();
        let rot = Complex::from_polar(1.0, 1.234);
        let xc: Vec<_> = x.iter().map(|&v| rot * v).collect();
        let yc = measure_field(&h, &xc, NoiseModel::None, 0).unwrap();
        for (a, b) in y.iter().zip(&yc) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_noise_paths_agree() {
        let h = generate_tm::<f64>(64, 64, 5).unwrap();
        let x: Vec<f64> = (0..64).map(|i| ((i * 37) % 5 < 2) as u8 as f64).collect();
        let a = measure(&h, &x, NoiseModel::None, 1).unwrap();
        let b = measure(&h, &x, NoiseModel::IntensityGaussian(0.0), 1).unwrap();
        let c = measure(&h, &x, NoiseModel::AmplitudeGaussian(0.0), 1).unwrap();
        for ((a, b), c) in a.iter().zip(&b).zip(&c) {
            assert!((a - b).abs() < 1e-14);
            assert_eq!(a, c);
        }
    }

    #[test]
    fn noise_is_clamped_and_seeded() {
        let h = generate_tm::<f64>(200, 10, 6).unwrap();
        let x = vec![1.0; 10];
        let a = measure(&h, &x, NoiseModel::AmplitudeGaussian(5.0), 3).unwrap();
        assert!(a.iter().all(|&v| v >= 0.0));
        assert!(a.contains(&0.0));
        assert_eq!(a, measure(&h, &x, NoiseModel::AmplitudeGaussian(5.0), 3).unwrap());
        let b = measure(&h, &x, NoiseModel::IntensityGaussian(5.0), 3).unwrap();
        assert!(b.iter().all(|&v| v >= 0.0));
        assert!(measure(&h, &x, NoiseModel::AmplitudeGaussian(-1.0), 3).is_err());
        assert!(measure(&h, &x[..9], NoiseModel::None, 3).is_err());
    }

    #[test]
    fn batch_matches_loop() {
        let h = generate_tm::<f64>(12, 6, 7).unwrap();
        let x = PatternSet::new(3, 6, vec![1, 0, 1, 0, 1, 0, 0, 0, 1, 1, 1, 1, 1, 1, 0, 0, 0, 1]).unwrap();
        let noise = NoiseModel::IntensityGaussian(0.05);
        let y = measure_batch(&h, &x, noise, 11).unwrap();
        for p in 0..3 {
            let col = measure(&h, &x.pattern_as_real::<f64>(p), noise, 11 ^ p as u64).unwrap();
            assert_eq!(y.column(p), col);
        }
        let single = x.select(&[1]).unwrap();
        let y1 = measure_batch(&h, &single, NoiseModel::None, 0).unwrap();
        assert_eq!(
            y1.column(0),
            measure(&h, &x.pattern_as_real::<f64>(1), NoiseModel::None, 0).unwrap()
        );
        // permuting noiseless patterns permutes columns
        let perm = x.select(&[2, 0, 1]).unwrap();
        let yn = measure_batch(&h, &x, NoiseModel::None, 0).unwrap();
        let yp = measure_batch(&h, &perm, NoiseModel::None, 0).unwrap();
        assert_eq!(yp.column(0), yn.column(2));
        assert_eq!(yp.column(1), yn.column(0));
    }

    #[test]
    fn row_phase_invariance() {
        let h = generate_tm::<f64>(16, 8, 8).unwrap();
        let mut rng = seeded_rng(1, 1);
        let phases: Vec<f64> = (0..16).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        let rotated =
            TransmissionMatrix::from_fn(16, 8, |m, i| h.get(m, i) * Complex::from_polar(1.0, phases[m])).unwrap();
        let x = PatternSet::new(2, 8, vec![1, 1, 0, 1, 0, 0, 1, 0, 0, 1, 1, 1, 1, 0, 0, 1]).unwrap();
        let a = measure_batch(&h, &x, NoiseModel::None, 0).unwrap();
        let b = measure_batch(&rotated, &x, NoiseModel::None, 0).unwrap();
        for (u, v) in a.as_slice().iter().zip(b.as_slice()) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    /// Extreme eigenvalues of the Hermitian Gram matrix by power iteration.
    fn gram_extremes(h: &TransmissionMatrix<f64>) -> (f64, f64) {
        let n = h.cols();
        let gram: Vec<Complex<f64>> = (0..n * n)
            .map(|k| {
                let (a, b) = (k / n, k % n);
                (0..h.rows()).map(|m| h.get(m, a).conj() * h.get(m, b)).sum()
            })
            .collect();
        let mul = |x: &[Complex<f64>], shift: f64| -> Vec<Complex<f64>> {
            (0..n)
                .map(|a| (0..n).map(|b| gram[a * n + b] * x[b]).sum::<Complex<f64>>() - x[a] * shift)
                .collect()
        };
        let power = |shift: f64| -> f64 {
            let mut x: Vec<Complex<f64>> = (0..n).map(|i| Complex::new(1.0 + i as f64 * 0.01, 0.3)).collect();
            let mut lambda = 0.0;
            for _ in 0..3000 {
                let y = mul(&x, shift);
                let norm = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                lambda = x.iter().zip(&y).map(|(a, b)| (a.conj() * b).re).sum::<f64>()
                    / x.iter().map(|z| z.norm_sqr()).sum::<f64>();
                x = y.into_iter().map(|z| z / norm).collect();
            }
            lambda
        };
        let top = power(0.0);
        let bottom = power(top) + top;
        (bottom, top)
    }

    #[test]
    fn singular_values_follow_marchenko_pastur_edges() {
        let (m, n) = (400, 50);
        let h = generate_tm::<f64>(m, n, 21).unwrap();
        let (lo, hi) = gram_extremes(&h);
        let ratio = m as f64 / n as f64;
        let lo_edge = ratio * (1.0 - (1.0 / ratio).sqrt()).powi(2);
        let hi_edge = ratio * (1.0 + (1.0 / ratio).sqrt()).powi(2);
        assert!((lo.sqrt() / lo_edge.sqrt() - 1.0).abs() < 0.1, "{lo} vs {lo_edge}");
        assert!((hi.sqrt() / hi_edge.sqrt() - 1.0).abs() < 0.1, "{hi} vs {hi_edge}");
    }
}
