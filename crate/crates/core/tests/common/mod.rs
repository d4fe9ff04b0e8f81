//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;

/// `I1(x) / I0(x)` from the continued fraction
/// `1 / (2/x + 1 / (4/x + 1 / (6/x + ...)))`, evaluated backwards.
pub fn ratio_continued_fraction(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let depth = 200 + 4 * x.ceil() as usize;
    let mut t = 0.0;
    for k in (1..=depth).rev() {
        t = 1.0 / (2.0 * k as f64 / x + t);
    }
    t
}

/// Leading terms of the large-argument expansion of `I1 / I0`.
pub fn ratio_asymptotic(x: f64) -> f64 {
    1.0 - 1.0 / (2.0 * x) - 1.0 / (8.0 * x * x) - 1.0 / (8.0 * x * x * x) - 25.0 / (128.0 * x.powi(4))
}

/// `ln I0(x)` from `(1/pi) int_0^pi exp(x cos t) dt` by the trapezoid
/// rule, which converges geometrically for this periodic integrand.
pub fn ln_i0(x: f64) -> f64 {
    let n = ((24.0 * x.sqrt()) as usize).clamp(64, 4096);
    let h = PI / n as f64;
    let mut sum = 0.5 * (1.0 + (-2.0 * x).exp());
    for k in 1..n {
        sum += (x * ((k as f64 * h).cos() - 1.0)).exp();
    }
    x + (sum / n as f64).ln()
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1],
/// by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|k| {
            let mut x = (PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
            loop {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=n {
                    let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-15 {
                    return (x, 2.0 / ((1.0 - x * x) * dp * dp));
                }
            }
        })
        .collect()
}

/// Posterior mean and total variance of `z ~ CN(omega, v)` observed
/// through `y = |z + w|`, `w ~ CN(0, sigma2)`, by quadrature over the
/// `z` plane in polar coordinates.
///
/// Both factors of the integrand are bounded by Gaussians in `r`
/// (`exp(-(r - y)^2 / sigma2)` and `exp(-(r - |omega|)^2 / v)`), so the
/// mass sits within 14 widths of their product's centre. That window is
/// covered by composite Gauss-Legendre panels, which have no trouble with
/// the `r = 0` end; the angle uses the periodic trapezoid rule.
pub fn rician_posterior(y: f64, omega: Complex64, v: f64, sigma2: f64) -> (Complex64, f64) {
    let precision = 1.0 / sigma2 + 1.0 / v;
    let centre = (y / sigma2 + omega.norm() / v) / precision;
    let width = 14.0 / precision.sqrt();
    let (lo, hi) = ((centre - width).max(0.0), centre + width);
    let panels = 48;
    let rule = gauss_legendre(16);
    let n_t = 1024;
    let dt = 2.0 * PI / n_t as f64;
    let trig: Vec<(f64, f64)> = (0..n_t).map(|k| (k as f64 * dt).sin_cos()).collect();

    // (r, quadrature weight including the Jacobian r, log radial factor)
    let mut radial = Vec::with_capacity(panels * rule.len());
    let h = (hi - lo) / panels as f64;
    for p in 0..panels {
        let mid = lo + (p as f64 + 0.5) * h;
        for &(x, w) in &rule {
            let r = mid + 0.5 * h * x;
            radial.push((r, 0.5 * h * w * r, -r * r / sigma2 + ln_i0(2.0 * y * r / sigma2)));
        }
    }
    let mut logs = Vec::with_capacity(radial.len() * n_t);
    let mut peak = f64::NEG_INFINITY;
    for &(r, _, lik) in &radial {
        for &(s, c) in &trig {
            let (dx, dy) = (r * c - omega.re, r * s - omega.im);
            let l = lik - (dx * dx + dy * dy) / v;
            peak = peak.max(l);
            logs.push(l);
        }
    }
    let (mut mass, mut first, mut second) = (0.0, Complex64::new(0.0, 0.0), 0.0);
    for (i, &(r, weight, _)) in radial.iter().enumerate() {
        for (k, &(s, c)) in trig.iter().enumerate() {
            let w = weight * (logs[i * n_t + k] - peak).exp();
            let z = Complex64::new(r * c, r * s);
            mass += w;
            first += z * w;
            second += z.norm_sqr() * w;
        }
    }
    let mean = first / mass;
    (mean, second / mass - mean.norm_sqr())
}

/// Channel outputs implied by the posterior: `g = (E[z|y] - omega) / v`,
/// `g' = (Var[z|y] / v - 1) / v`.
pub fn rician_channel(y: f64, omega: Complex64, v: f64, sigma2: f64) -> (Complex64, f64) {
    let (mean, var) = rician_posterior(y, omega, v, sigma2);
    ((mean - omega) / v, (var / v - 1.0) / v)
}

/// Dependence computed directly from its definition.
pub fn dependence(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Pass/fail line in the acceptance layout.
pub fn report(id: u32, name: &str, pass: bool, detail: &str) -> bool {
    println!(
        "criterion {id} [{}] {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}
