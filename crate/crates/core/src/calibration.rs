//! Calibration pattern generation and row-by-row transmission matrix
//! estimation from amplitude-only measurements.

use std::fmt::Write as _;
use std::time::Instant;

use num_complex::Complex;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::dataio::BinaryImages;
use crate::error::{Error, Result};
use crate::model::{seeded_rng, MeasurementSet, PatternSet, PriorSpec, SolverOptions, TransmissionMatrix};
use crate::scalar::Real;
use crate::solver::{solve, Channel, Operator, Problem};

const STREAM_BERNOULLI: u64 = 0x6265_726e;
const STREAM_BLOCKS: u64 = 0x626c_6b73;

/// `count` patterns of `dim` i.i.d. Bernoulli(`p`) pixels; all-zero draws
/// are redrawn.
pub fn gen_bernoulli_patterns(count: usize, dim: usize, p: f64, seed: u64) -> Result<PatternSet> {
    if count == 0 || dim == 0 {
        return Err(Error::arg("need at least one pattern of at least one pixel"));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::arg(format!("bernoulli probability must lie in (0, 1], got {p}")));
    }
    let mut rng = seeded_rng(seed, STREAM_BERNOULLI);
    let mut bits = Vec::with_capacity(count * dim);
    let mut pattern = vec![0u8; dim];
    for _ in 0..count {
        loop {
            for b in pattern.iter_mut() {
                *b = rng.random_bool(p) as u8;
            }
            if pattern.contains(&1) {
                break;
            }
        }
        bits.extend_from_slice(&pattern);
    }
    PatternSet::new(count, dim, bits)
}

/// Shuffle `block x block` tiles between images.
///
/// Each tile position gets its own random permutation of the image set, so
/// the tiles present at a given position are preserved while digit-level
/// structure is broken up.
pub fn gen_structured_patterns(images: &BinaryImages, block: usize, seed: u64) -> Result<PatternSet> {
    let (h, w) = (images.height(), images.width());
    if block == 0 || h % block != 0 || w % block != 0 {
        return Err(Error::arg(format!("block size {block} does not divide {h}x{w} images")));
    }
    let count = images.count();
    let src = images.patterns();
    let mut rng = seeded_rng(seed, STREAM_BLOCKS);
    let mut bits = vec![0u8; count * h * w];
    let mut perm: Vec<usize> = (0..count).collect();
    for by in (0..h).step_by(block) {
        for bx in (0..w).step_by(block) {
            perm.shuffle(&mut rng);
            for (dst, &from) in perm.iter().enumerate() {
                let from_img = src.pattern(from);
                for r in by..by + block {
                    let row = r * w;
                    bits[dst * h * w + row + bx..dst * h * w + row + bx + block]
                        .copy_from_slice(&from_img[row + bx..row + bx + block]);
                }
            }
        }
    }
    PatternSet::new(count, h * w, bits)
}

/// `ceil(alpha N)` calibration patterns: `N` Bernoulli(1/2) patterns
/// followed by block-shuffled training images (all-zero ones skipped).
pub fn build_calibration_set(train: &BinaryImages, alpha: f64, block: usize, seed: u64) -> Result<PatternSet> {
    let n = train.height() * train.width();
    if !(alpha >= 1.0 && alpha.is_finite()) {
        return Err(Error::arg(format!(
            "oversampling ratio must be at least 1, got {alpha}"
        )));
    }
    let total = (alpha * n as f64 - 1e-9).ceil() as usize;
    let bernoulli = gen_bernoulli_patterns(n, n, 0.5, seed)?;
    let wanted = total - n;
    if wanted == 0 {
        return Ok(bernoulli);
    }
    let shuffled = gen_structured_patterns(train, block, seed)?;
    let keep: Vec<usize> = (0..shuffled.count())
        .filter(|&p| shuffled.pattern(p).contains(&1))
        .take(wanted)
        .collect();
    if keep.len() < wanted {
        return Err(Error::arg(format!(
            "need {wanted} structured patterns, training set yields only {}",
            keep.len()
        )));
    }
    bernoulli.concat(&shuffled.select(&keep)?)
}

/// Outcome of one calibrated output pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct RowReport {
    pub sweeps: usize,
    pub converged: bool,
    /// Every restart hit a non-finite message; the row holds the best partial estimate.
    pub diverged: bool,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    pub rows: Vec<RowReport>,
    pub wall_time_s: f64,
}

impl CalibrationReport {
    pub fn mean_residual(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows.iter().map(|r| r.residual).sum::<f64>() / self.rows.len() as f64
    }

    /// Rows flagged as failed (diverged on every restart).
    pub fn flagged_rows(&self) -> Vec<usize> {
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.diverged)
            .map(|(m, _)| m)
            .collect()
    }

    pub fn failure_count(&self) -> usize {
        self.rows.iter().filter(|r| r.diverged).count()
    }

    pub fn converged_count(&self) -> usize {
        self.rows.iter().filter(|r| r.converged).count()
    }

    /// `key=value` lines.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "rows={}", self.rows.len());
        let _ = writeln!(s, "converged={}", self.converged_count());
        let _ = writeln!(s, "failures={}", self.failure_count());
        let _ = writeln!(s, "mean_residual={:.6e}", self.mean_residual());
        let _ = writeln!(s, "wall_time_s={:.3}", self.wall_time_s);
        s
    }

    /// Per-row CSV with header `row,sweeps,converged,diverged,residual`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("row,sweeps,converged,diverged,residual\n");
        for (m, r) in self.rows.iter().enumerate() {
            let _ = writeln!(
                s,
                "{m},{},{},{},{:e}",
                r.sweeps, r.converged as u8, r.diverged as u8, r.residual
            );
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (line_no, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let bad = || Error::format(line_no as u64, format!("malformed report line {:?}", line));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 || f[0].parse::<usize>().ok() != Some(rows.len()) {
                return Err(bad());
            }
            let flag = |v: &str| match v {
                "0" => Ok(false),
                "1" => Ok(true),
                _ => Err(bad()),
            };
            rows.push(RowReport {
                sweeps: f[1].parse().map_err(|_| bad())?,
                converged: flag(f[2])?,
                diverged: flag(f[3])?,
                residual: f[4].parse().map_err(|_| bad())?,
            });
        }
        Ok(Self { rows, wall_time_s: 0.0 })
    }
}

/// Estimate one row of the transmission matrix per output pixel.
///
/// Row `m` solves `y_m = |X h_m|` with a `CN(0, 1/N)` prior and solver
/// seed `options.seed + m`, so the estimate does not depend on `threads`
/// (0 selects the rayon default).
pub fn calibrate<T: Real>(
    patterns: &PatternSet,
    measurements: &MeasurementSet<T>,
    options: &SolverOptions<T>,
    threads: usize,
) -> Result<(TransmissionMatrix<T>, CalibrationReport)> {
    options.validate()?;
    if measurements.cols() != patterns.count() {
        return Err(Error::dim(format!(
            "{} patterns but measurements have {} columns",
            patterns.count(),
            measurements.cols()
        )));
    }
    patterns.check_calibration()?;
    let start = Instant::now();
    let n = patterns.dim();
    if measurements.rows() == 0 {
        return Ok((
            TransmissionMatrix::empty(n),
            CalibrationReport {
                rows: Vec::new(),
                wall_time_s: start.elapsed().as_secs_f64(),
            },
        ));
    }
    let op = Operator::<T>::from_patterns(patterns);
    let prior = PriorSpec::ComplexGaussian {
        variance: T::from_count(n).recip(),
    };

    let solve_row = |m: usize| -> Result<(Vec<Complex<T>>, RowReport)> {
        let y = measurements.row(m);
        let problem = Problem::new(&op, y, Channel::PhaseRetrieval, &prior)?;
        let opts = options.with_seed(options.seed.wrapping_add(m as u64));
        match solve(&problem, &opts) {
            Ok(sol) => Ok((
                sol.x_a,
                RowReport {
                    sweeps: sol.sweeps_used,
                    converged: sol.converged,
                    diverged: false,
                    residual: sol.residual.as_f64(),
                },
            )),
            Err(Error::Divergence { partial, .. }) => {
                let partial = partial.expect("solve attaches the partial estimate");
                let row = partial
                    .x_a
                    .iter()
                    .map(|z| Complex::new(T::lit(z.re), T::lit(z.im)))
                    .collect();
                Ok((
                    row,
                    RowReport {
                        sweeps: partial.sweeps_used,
                        converged: false,
                        diverged: true,
                        residual: partial.residual,
                    },
                ))
            }
            Err(e) => Err(e),
        }
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::arg(format!("cannot start {threads} worker threads: {e}")))?;
    let results: Vec<_> = pool.install(|| {
        (0..measurements.rows())
            .into_par_iter()
            .map(solve_row)
            .collect::<Result<Vec<_>>>()
    })?;

    let (rows, reports): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let estimate = TransmissionMatrix::from_rows(rows)?;
    Ok((
        estimate,
        CalibrationReport {
            rows: reports,
            wall_time_s: start.elapsed().as_secs_f64(),
        },
    ))
}
