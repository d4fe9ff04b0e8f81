//! Ratio `I1(phi) / I0(phi)` of modified Bessel functions of the first kind.
//!
//! `I0` overflows `f64` near `phi = 713`, so the ratio is never formed from
//! the functions themselves. Below [`SERIES_LIMIT`] both power series are
//! summed directly (all terms positive, largest term about `1e7`); above
//! it the exponentially scaled large-argument expansions are summed and
//! divided, which cancels the common `e^phi / sqrt(2 pi phi)` factor.
//!
//! Those sums take up to ~50 terms near the switchover, and the solver
//! evaluates the ratio once per nonzero per sweep. Below [`TABLE_LIMIT`]
//! the ratio is therefore read from a piecewise Chebyshev interpolant on
//! unit intervals, built once from the sums. The nearest singularities of
//! `I1 / I0` are the zeros of `I0` at `+-2.405i`, so degree 16 on a unit
//! interval is accurate to a few ulps.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Switchover between the power series and the asymptotic expansion.
pub const SERIES_LIMIT: f64 = 20.0;

/// Upper end of the interpolated range.
pub const TABLE_LIMIT: f64 = 64.0;

const SHORT_SERIES: f64 = 2.0;
const DEGREE: usize = 16;
const PIECES: usize = TABLE_LIMIT as usize;

type Piece = [f64; DEGREE + 1];

fn pieces() -> &'static [Piece] {
    static TABLE: OnceLock<Vec<Piece>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = DEGREE + 1;
        (0..PIECES)
            .map(|j| {
                let centre = j as f64 + 0.5;
                let values: Vec<f64> = (0..n)
                    .map(|k| {
                        let t = (PI * (k as f64 + 0.5) / n as f64).cos();
                        exact_parts(centre + 0.5 * t).0
                    })
                    .collect();
                let mut coef = [0.0; DEGREE + 1];
                for (i, c) in coef.iter_mut().enumerate() {
                    let sum: f64 = values
                        .iter()
                        .enumerate()
                        .map(|(k, v)| v * (PI * i as f64 * (k as f64 + 0.5) / n as f64).cos())
                        .sum();
                    *c = 2.0 * sum / n as f64;
                }
                coef[0] *= 0.5;
                coef
            })
            .collect()
    })
}

fn interpolated(phi: f64) -> f64 {
    let j = (phi as usize).min(PIECES - 1);
    let t = 2.0 * (phi - j as f64) - 1.0;
    let c = &pieces()[j];
    // Clenshaw recurrence
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c[1..].iter().rev() {
        let b0 = 2.0 * t * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    t * b1 - b2 + c[0]
}

/// `I1(phi) / I0(phi)` for finite `phi >= 0`.
pub fn bessel_ratio<T: Real>(phi: T) -> Result<T> {
    if !phi.is_finite() || phi < T::zero() {
        return Err(Error::arg(format!(
            "bessel ratio needs a finite nonnegative argument, got {phi}"
        )));
    }
    Ok(ratio_parts(phi).0)
}

/// Returns `(r0, 1 - r0)`; the complement is summed directly in the
/// asymptotic regime where `1 - r0` would otherwise cancel.
pub(crate) fn ratio_parts<T: Real>(phi: T) -> (T, T) {
    // the series is short near zero and keeps full relative accuracy there
    if phi < T::lit(SHORT_SERIES) {
        let r = series_ratio(phi);
        (r, T::one() - r)
    } else if phi < T::lit(TABLE_LIMIT) {
        let r = T::lit(interpolated(phi.as_f64()));
        (r, T::one() - r)
    } else {
        truncated_asymptotic(phi)
    }
}

/// The asymptotic sums cut where the dropped terms fall below an ulp:
/// at `x = 64` the 13th term is about `1e-17`, and fewer are needed as
/// `x` grows.
fn truncated_asymptotic<T: Real>(phi: T) -> (T, T) {
    let terms = if phi < T::lit(256.0) {
        HORNER_LEN
    } else if phi < T::lit(4096.0) {
        9
    } else {
        6
    };
    let u = phi.recip();
    let (mut s0, mut s1, mut d) = (T::zero(), T::zero(), T::zero());
    for k in (0..terms).rev() {
        s0 = s0 * u + T::lit(HORNER.0[k]);
        s1 = s1 * u + T::lit(HORNER.1[k]);
        d = d * u + T::lit(HORNER.2[k]);
    }
    (s1 / s0, d / s0)
}

/// [`ratio_parts`] without the interpolant.
pub(crate) fn exact_parts<T: Real>(phi: T) -> (T, T) {
    if phi < T::lit(SERIES_LIMIT) {
        let r = series_ratio(phi);
        (r, T::one() - r)
    } else {
        asymptotic_ratio(phi)
    }
}

/// Entries of the reciprocal tables below.
const TABLE_LEN: usize = 64;

/// `1 / k^2` and `1 / (k (k + 1))` for the power series, `k >= 1`.
const fn series_tables() -> ([f64; TABLE_LEN], [f64; TABLE_LEN]) {
    let mut sq = [0.0; TABLE_LEN];
    let mut adj = [0.0; TABLE_LEN];
    let mut k = 1;
    while k < TABLE_LEN {
        let kf = k as f64;
        sq[k] = 1.0 / (kf * kf);
        adj[k] = 1.0 / (kf * (kf + 1.0));
        k += 1;
    }
    (sq, adj)
}

/// `(2k-1)^2 / (8k)` and `((2k-1)^2 - 4) / (8k)` for the asymptotic series.
const fn asymptotic_tables() -> ([f64; TABLE_LEN], [f64; TABLE_LEN]) {
    let mut a0 = [0.0; TABLE_LEN];
    let mut a1 = [0.0; TABLE_LEN];
    let mut k = 1;
    while k < TABLE_LEN {
        let odd = (2 * k - 1) as f64;
        a0[k] = odd * odd / (8.0 * k as f64);
        a1[k] = (odd * odd - 4.0) / (8.0 * k as f64);
        k += 1;
    }
    (a0, a1)
}

/// Cumulative products of [`asymptotic_tables`]: coefficients of
/// `x^-k` in the scaled expansions of `I0`, `I1`, and their difference.
const fn horner_tables() -> ([f64; HORNER_LEN], [f64; HORNER_LEN], [f64; HORNER_LEN]) {
    let (a0, a1) = asymptotic_tables();
    let mut c0 = [1.0; HORNER_LEN];
    let mut c1 = [1.0; HORNER_LEN];
    let mut d = [0.0; HORNER_LEN];
    let mut k = 1;
    while k < HORNER_LEN {
        c0[k] = c0[k - 1] * a0[k];
        c1[k] = c1[k - 1] * a1[k];
        d[k] = c0[k] - c1[k];
        k += 1;
    }
    (c0, c1, d)
}

const HORNER_LEN: usize = 13;

static SERIES: ([f64; TABLE_LEN], [f64; TABLE_LEN]) = series_tables();
static HORNER: ([f64; HORNER_LEN], [f64; HORNER_LEN], [f64; HORNER_LEN]) = horner_tables();
static ASYMPTOTIC: ([f64; TABLE_LEN], [f64; TABLE_LEN]) = asymptotic_tables();

fn series_ratio<T: Real>(phi: T) -> T {
    if phi == T::zero() {
        return T::zero();
    }
    let half = phi * T::lit(0.5);
    let q = half * half;
    let eps = T::epsilon() * T::lit(0.25);
    // I0 = sum q^k / (k!)^2, I1 = half * sum q^k / (k! (k+1)!)
    let (mut t0, mut t1) = (T::one(), T::one());
    let (mut s0, mut s1) = (T::one(), T::one());
    for k in 1.. {
        let (r0, r1) = if k < TABLE_LEN {
            (T::lit(SERIES.0[k]), T::lit(SERIES.1[k]))
        } else {
            let kf = T::from_count(k);
            ((kf * kf).recip(), (kf * (kf + T::one())).recip())
        };
        t0 = t0 * q * r0;
        t1 = t1 * q * r1;
        s0 = s0 + t0;
        s1 = s1 + t1;
        if t0 <= eps * s0 && t1 <= eps * s1 {
            break;
        }
    }
    half * s1 / s0
}

fn asymptotic_ratio<T: Real>(phi: T) -> (T, T) {
    // e^{-x} sqrt(2 pi x) I_nu(x) ~ sum_k c_k(nu) / x^k with
    // c_k = c_{k-1} ((2k-1)^2 - 4 nu^2) / (8 k x).
    let eps = T::epsilon() * T::lit(0.25);
    let inv = phi.recip();
    let (mut c0, mut c1) = (T::one(), T::one());
    let (mut s0, mut s1) = (T::one(), T::one());
    let mut diff = T::zero();
    let mut prev = T::infinity();
    for k in 1..TABLE_LEN {
        let n0 = c0 * T::lit(ASYMPTOTIC.0[k]) * inv;
        let n1 = c1 * T::lit(ASYMPTOTIC.1[k]) * inv;
        let size = n0.abs().max(n1.abs());
        // terms of an asymptotic series eventually grow; stop at the smallest
        if size >= prev {
            break;
        }
        c0 = n0;
        c1 = n1;
        s0 = s0 + c0;
        s1 = s1 + c1;
        diff = diff + (c0 - c1);
        prev = size;
        if size <= eps * s1.abs() {
            break;
        }
    }
    (s1 / s0, diff / s0)
}
