//! End-to-end experiments on simulated media: calibration quality versus
//! the number of calibration patterns, reconstruction quality versus the
//! number of camera pixels, and side-by-side reconstructions.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::calibration::{build_calibration_set, calibrate, gen_bernoulli_patterns, CalibrationReport};
use crate::dataio::{
    digit_like_rho, load_idx, make_d1, make_d2, montage, sample_local_model, save_image_pgm, save_matrix,
    save_measurements, save_patterns, save_real, BinaryImages, Graymap, IdxData,
};
use crate::error::{Error, Result};
use crate::imaging::{Imager, PriorMode};
use crate::medium::{generate_tm, measure_batch, NoiseModel};
use crate::metrics::{dependence_or_zero, held_out_dependence, pearson_correlation, row_recovery};
use crate::model::{MeasurementSet, PatternSet, SolverOptions, TransmissionMatrix};
use crate::priors::{local_prior_estimate, DEFAULT_RHO_FLOOR};

// keep the draws of different stages apart for a given seed
const SALT_TRAIN: u64 = 0x7472_6169_6e00;
const SALT_TEST: u64 = 0x7465_7374_0000;
const SALT_HELD_OUT: u64 = 0x686f_6c64_0000;
const SALT_NOISE: u64 = 0x6e6f_6973_6500;
const SALT_CAMERA: u64 = 0x6361_6d00_0000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dataset {
    /// Images drawn from [`digit_like_rho`].
    Synthetic,
    /// MNIST, 20x20 central crop.
    D1,
    /// MNIST, 32x32 upscale.
    D2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Independent repetitions (media, patterns, noise).
    pub seeds: usize,
    pub dataset: Dataset,
    pub mnist_dir: Option<PathBuf>,
    /// Side of synthetic images.
    pub side: usize,
    /// Tile size of the structured calibration patterns.
    pub block: usize,
    pub train_images: usize,
    pub test_images: usize,
    /// Camera pixels calibrated in the alpha sweep.
    pub outputs: usize,
    pub alphas: Vec<f64>,
    /// Oversampling ratio for the m-sweep and visual grid.
    pub alpha: f64,
    pub m_ratios: Vec<f64>,
    /// Amplitude noise standard deviation as a fraction of the mean amplitude.
    pub noise: f64,
    /// Bernoulli(1/2) patterns used to score a calibration.
    pub held_out: usize,
    pub grid_images: usize,
    pub threads: usize,
    pub solver: SolverOptions<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            seeds: 5,
            dataset: Dataset::Synthetic,
            mnist_dir: None,
            side: 10,
            block: 5,
            train_images: 500,
            test_images: 20,
            outputs: 128,
            alphas: vec![1.0, 2.0, 3.0, 5.0],
            alpha: 5.0,
            m_ratios: vec![0.3, 0.5, 0.7],
            noise: 0.0,
            held_out: 100,
            grid_images: 6,
            threads: 0,
            solver: SolverOptions::default(),
        }
    }
}

fn parse<V: std::str::FromStr>(key: &str, value: &str) -> Result<V> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::arg(format!("bad value {value:?} for {key}")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value.split(',').map(|v| parse(key, v)).collect()
}

impl ExperimentConfig {
    /// Apply one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        match key {
            "seed" => self.seed = parse(key, value)?,
            "seeds" => self.seeds = parse(key, value)?,
            "dataset" => {
                self.dataset = match value.trim() {
                    "synthetic" => Dataset::Synthetic,
                    "d1" => Dataset::D1,
                    "d2" => Dataset::D2,
                    other => return Err(Error::arg(format!("unknown dataset {other:?} (synthetic, d1, d2)"))),
                }
            }
            "mnist_dir" => self.mnist_dir = Some(PathBuf::from(value.trim())),
            "side" => self.side = parse(key, value)?,
            "block" => self.block = parse(key, value)?,
            "train_images" => self.train_images = parse(key, value)?,
            "test_images" => self.test_images = parse(key, value)?,
            "outputs" => self.outputs = parse(key, value)?,
            "alphas" => self.alphas = parse_list(key, value)?,
            "alpha" => self.alpha = parse(key, value)?,
            "m_ratios" => self.m_ratios = parse_list(key, value)?,
            "noise" => self.noise = parse(key, value)?,
            "held_out" => self.held_out = parse(key, value)?,
            "grid_images" => self.grid_images = parse(key, value)?,
            "threads" => self.threads = parse(key, value)?,
            "sigma2" => self.solver.sigma2 = parse(key, value)?,
            "max_sweeps" => self.solver.max_sweeps = parse(key, value)?,
            "tol" => self.solver.tol = parse(key, value)?,
            "damping" => self.solver.damping = parse(key, value)?,
            "restarts" => self.solver.restarts = parse(key, value)?,
            "omega_guard" => self.solver.omega_guard = parse(key, value)?,
            other => return Err(Error::arg(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Apply a `key=value` file body; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::arg(format!("line {}: expected key=value, got {line:?}", lineno + 1)))?;
            self.set(k, v)
                .map_err(|e| Error::arg(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        if self.seeds == 0 || self.test_images == 0 || self.train_images == 0 || self.held_out == 0 {
            return Err(Error::arg(
                "seeds, train_images, test_images and held_out must be positive",
            ));
        }
        if self.dataset != Dataset::Synthetic && self.mnist_dir.is_none() {
            return Err(Error::arg("MNIST datasets need mnist_dir"));
        }
        if self.m_ratios.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::arg("m_ratios must be positive"));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::arg("noise must be a nonnegative fraction"));
        }
        Ok(())
    }

    fn seed_of(&self, repetition: usize) -> u64 {
        self.seed.wrapping_add(repetition as u64)
    }
}

/// Training and test images for a configuration. Test images with no
/// active pixel are skipped, since no correlation is defined for them.
pub fn load_images(cfg: &ExperimentConfig) -> Result<(BinaryImages, BinaryImages)> {
    match cfg.dataset {
        Dataset::Synthetic => {
            let (s, rho) = (cfg.side, digit_like_rho(cfg.side, cfg.side));
            let train = sample_local_model(&rho, s, s, cfg.train_images, cfg.seed ^ SALT_TRAIN)?;
            // oversample so that dropping empty draws still leaves enough
            let pool = sample_local_model(&rho, s, s, cfg.test_images * 2 + 8, cfg.seed ^ SALT_TEST)?;
            Ok((train, nonempty(&pool, cfg.test_images)?))
        }
        Dataset::D1 | Dataset::D2 => {
            let dir = cfg
                .mnist_dir
                .as_deref()
                .ok_or_else(|| Error::arg("mnist_dir not set"))?;
            let convert = |name: &str| -> Result<BinaryImages> {
                match load_idx(dir.join(name))? {
                    IdxData::Images(gray) if cfg.dataset == Dataset::D1 => make_d1(&gray),
                    IdxData::Images(gray) => make_d2(&gray),
                    IdxData::Labels(_) => Err(Error::format(0, format!("{name} holds labels, not images"))),
                }
            };
            let train = convert("train-images-idx3-ubyte")?;
            let test = convert("t10k-images-idx3-ubyte")?;
            let keep: Vec<usize> = (0..cfg.train_images.min(train.count())).collect();
            Ok((train.select(&keep)?, nonempty(&test, cfg.test_images)?))
        }
    }
}

fn nonempty(images: &BinaryImages, count: usize) -> Result<BinaryImages> {
    let keep: Vec<usize> = (0..images.count())
        .filter(|&k| images.image(k).contains(&1))
        .take(count)
        .collect();
    if keep.len() < count {
        return Err(Error::arg(format!(
            "only {} non-empty test images available",
            keep.len()
        )));
    }
    images.select(&keep)
}

/// One curve: an x value per row, one value per repetition.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub x_name: String,
    pub rows: Vec<(f64, Vec<f64>)>,
}

impl SweepTable {
    fn new(x_name: &str, xs: &[f64], repetitions: usize) -> Self {
        Self {
            x_name: x_name.to_string(),
            rows: xs.iter().map(|&x| (x, Vec::with_capacity(repetitions))).collect(),
        }
    }

    pub fn means(&self) -> Vec<f64> {
        self.rows.iter().map(|(_, v)| mean(v)).collect()
    }

    /// Columns `x, mean, std, value_0 .. value_{k-1}`; std is the
    /// population standard deviation over repetitions.
    pub fn to_csv(&self) -> String {
        let width = self.rows.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
        let mut out = format!("{},mean,std", self.x_name);
        for k in 0..width {
            let _ = write!(out, ",value_{k}");
        }
        out.push('\n');
        for (x, values) in &self.rows {
            let m = mean(values);
            let sd = (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len().max(1) as f64).sqrt();
            let _ = write!(out, "{x},{m:.10},{sd:.10}");
            for v in values {
                let _ = write!(out, ",{v:.10}");
            }
            out.push('\n');
        }
        out
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        f64::NAN
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Simulated camera: noiseless amplitudes, then optional amplitude noise
/// scaled to their mean.
fn camera(h: &TransmissionMatrix<f64>, x: &PatternSet, noise: f64, seed: u64) -> Result<MeasurementSet<f64>> {
    let clean = measure_batch(h, x, NoiseModel::None, seed)?;
    if noise == 0.0 {
        return Ok(clean);
    }
    let scale = mean(clean.as_slice());
    measure_batch(h, x, NoiseModel::AmplitudeGaussian(noise * scale), seed ^ SALT_NOISE)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSweep {
    /// Mean held-out dependence per repetition.
    pub dependence: SweepTable,
    /// Median conjugation-aware row recovery per repetition.
    pub row_recovery: SweepTable,
    /// Calibration wall time per repetition, in seconds.
    pub seconds: SweepTable,
}

/// Calibrate `outputs x N` media with `ceil(alpha N)` patterns for every
/// alpha and score each estimate on fresh Bernoulli patterns.
pub fn alpha_sweep(cfg: &ExperimentConfig) -> Result<AlphaSweep> {
    cfg.validate()?;
    let (train, _) = load_images(cfg)?;
    let n = train.height() * train.width();
    let mut out = AlphaSweep {
        dependence: SweepTable::new("alpha", &cfg.alphas, cfg.seeds),
        row_recovery: SweepTable::new("alpha", &cfg.alphas, cfg.seeds),
        seconds: SweepTable::new("alpha", &cfg.alphas, cfg.seeds),
    };
    for rep in 0..cfg.seeds {
        let seed = cfg.seed_of(rep);
        let h = generate_tm::<f64>(cfg.outputs, n, seed)?;
        let test = gen_bernoulli_patterns(cfg.held_out, n, 0.5, seed ^ SALT_HELD_OUT)?;
        let y_test = camera(&h, &test, cfg.noise, seed ^ SALT_HELD_OUT)?;
        for (j, &alpha) in cfg.alphas.iter().enumerate() {
            let x = build_calibration_set(&train, alpha, cfg.block, seed)?;
            let y = camera(&h, &x, cfg.noise, seed ^ SALT_CAMERA)?;
            let (h_est, report) = calibrate(&x, &y, &cfg.solver.with_seed(seed), cfg.threads)?;
            out.dependence.rows[j]
                .1
                .push(held_out_dependence(&h_est, &test, &y_test)?);
            let rr = (0..h.rows())
                .map(|m| row_recovery(h_est.row(m), h.row(m)))
                .collect::<Result<Vec<f64>>>()?;
            out.row_recovery.rows[j].1.push(median(rr));
            out.seconds.rows[j].1.push(report.wall_time_s);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MSweep {
    /// Mean dependence between truth and binarized reconstruction.
    pub local: SweepTable,
    pub global: SweepTable,
    /// Same, with mean-removed Pearson correlation.
    pub local_pearson: SweepTable,
    pub global_pearson: SweepTable,
}

/// Scores of one image set reconstructed through one medium.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageScores {
    pub dependence: Vec<f64>,
    pub pearson: Vec<f64>,
    pub images: Vec<Vec<f64>>,
}

/// Calibrate a medium once, then reconstruct `test` through its first
/// `m` rows (flagged rows dropped) for every `m` in `ms`.
struct Bench {
    h: TransmissionMatrix<f64>,
    h_est: TransmissionMatrix<f64>,
    report: CalibrationReport,
    local_rho: Vec<f64>,
}

impl Bench {
    fn calibrated(cfg: &ExperimentConfig, train: &BinaryImages, m_max: usize, seed: u64) -> Result<Self> {
        let n = train.height() * train.width();
        let h = generate_tm::<f64>(m_max, n, seed)?;
        let x = build_calibration_set(train, cfg.alpha, cfg.block, seed)?;
        let y = camera(&h, &x, cfg.noise, seed ^ SALT_CAMERA)?;
        let (h_est, report) = calibrate(&x, &y, &cfg.solver.with_seed(seed), cfg.threads)?;
        Ok(Self {
            h,
            h_est,
            report,
            local_rho: local_prior_estimate(train.patterns(), DEFAULT_RHO_FLOOR)?,
        })
    }

    fn reconstruct(
        &self,
        cfg: &ExperimentConfig,
        test: &BinaryImages,
        m: usize,
        local: bool,
        seed: u64,
    ) -> Result<ImageScores> {
        let keep: Vec<usize> = (0..m).filter(|&r| !self.report.rows[r].diverged).collect();
        let imager = Imager::new(&self.h_est.select_rows(&keep)?);
        let y = camera(
            &self.h.select_rows(&keep)?,
            test.patterns(),
            cfg.noise,
            seed ^ SALT_TEST,
        )?;
        let mut scores = ImageScores {
            dependence: Vec::new(),
            pearson: Vec::new(),
            images: Vec::new(),
        };
        // one prior per image in global mode, so reconstruct one at a time
        // there; local mode batches
        let opts = cfg.solver.with_seed(seed);
        let recs = if local {
            let ys: Vec<Vec<f64>> = (0..test.count()).map(|k| y.column(k)).collect();
            imager.reconstruct_batch(&ys, &PriorMode::Local(self.local_rho.clone()), &opts, cfg.threads)?
        } else {
            (0..test.count())
                .map(|k| {
                    let rho = crate::imaging::sparsity_of(test.image(k))?;
                    imager.reconstruct(
                        &y.column(k),
                        &PriorMode::Global(rho),
                        &opts.with_seed(seed.wrapping_add(k as u64)),
                    )
                })
                .collect::<Result<Vec<_>>>()?
        };
        for (k, rec) in recs.into_iter().enumerate() {
            let truth: Vec<f64> = test.image(k).iter().map(|&b| b as f64).collect();
            let est: Vec<f64> = rec.x_bin.iter().map(|&b| b as f64).collect();
            scores.dependence.push(dependence_or_zero(&truth, &est)?);
            scores.pearson.push(pearson_correlation(&truth, &est)?);
            scores.images.push(est);
        }
        Ok(scores)
    }
}

fn m_of(ratio: f64, n: usize) -> usize {
    ((ratio * n as f64).round() as usize).max(1)
}

/// Reconstruction quality versus camera pixels `M = ratio N`, local and
/// global priors, through a medium calibrated at `cfg.alpha`.
pub fn m_sweep(cfg: &ExperimentConfig) -> Result<MSweep> {
    cfg.validate()?;
    let (train, test) = load_images(cfg)?;
    let n = train.height() * train.width();
    let ms: Vec<usize> = cfg.m_ratios.iter().map(|&r| m_of(r, n)).collect();
    let m_max = *ms.iter().max().ok_or_else(|| Error::arg("m_ratios is empty"))?;
    let mut out = MSweep {
        local: SweepTable::new("m_over_n", &cfg.m_ratios, cfg.seeds),
        global: SweepTable::new("m_over_n", &cfg.m_ratios, cfg.seeds),
        local_pearson: SweepTable::new("m_over_n", &cfg.m_ratios, cfg.seeds),
        global_pearson: SweepTable::new("m_over_n", &cfg.m_ratios, cfg.seeds),
    };
    for rep in 0..cfg.seeds {
        let seed = cfg.seed_of(rep);
        let bench = Bench::calibrated(cfg, &train, m_max, seed)?;
        for (j, &m) in ms.iter().enumerate() {
            let local = bench.reconstruct(cfg, &test, m, true, seed)?;
            let global = bench.reconstruct(cfg, &test, m, false, seed)?;
            out.local.rows[j].1.push(mean(&local.dependence));
            out.global.rows[j].1.push(mean(&global.dependence));
            out.local_pearson.rows[j].1.push(mean(&local.pearson));
            out.global_pearson.rows[j].1.push(mean(&global.pearson));
        }
    }
    Ok(out)
}

/// Three-row montage (originals, local prior, global prior) at the
/// largest `m_ratios` entry.
pub fn visual_grid(cfg: &ExperimentConfig) -> Result<Graymap> {
    cfg.validate()?;
    let (train, test) = load_images(cfg)?;
    let count = cfg.grid_images.min(test.count()).max(1);
    let test = test.select(&(0..count).collect::<Vec<_>>())?;
    let n = train.height() * train.width();
    let ratio = cfg.m_ratios.iter().copied().fold(f64::NAN, f64::max);
    let m = m_of(ratio, n);
    let bench = Bench::calibrated(cfg, &train, m, cfg.seed)?;
    let local = bench.reconstruct(cfg, &test, m, true, cfg.seed)?;
    let global = bench.reconstruct(cfg, &test, m, false, cfg.seed)?;
    let mut tiles: Vec<Vec<f64>> = (0..count)
        .map(|k| test.image(k).iter().map(|&b| b as f64).collect())
        .collect();
    tiles.extend(local.images);
    tiles.extend(global.images);
    montage(&tiles, train.width(), train.height(), count, 1)
}

/// Whole pipeline on one synthetic medium, writing every artifact to
/// `dir`: medium, calibration patterns and measurements, estimate,
/// report, and reconstructions of the test images as PGM and soft SCTM.
pub fn run_pipeline(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    std::fs::create_dir_all(dir)?;
    let (train, test) = load_images(cfg)?;
    let n = train.height() * train.width();
    let m = m_of(cfg.m_ratios.iter().copied().fold(f64::NAN, f64::max), n);
    let h = generate_tm::<f64>(m, n, cfg.seed)?;
    let x = build_calibration_set(&train, cfg.alpha, cfg.block, cfg.seed)?;
    let y = camera(&h, &x, cfg.noise, cfg.seed ^ SALT_CAMERA)?;
    let (h_est, report) = calibrate(&x, &y, &cfg.solver.with_seed(cfg.seed), cfg.threads)?;

    let mut written = Vec::new();
    let mut path = |name: &str| {
        let p = dir.join(name);
        written.push(p.clone());
        p
    };
    save_matrix(path("medium.sctm"), &h)?;
    save_patterns(path("patterns.sctm"), &x)?;
    save_measurements(path("measurements.sctm"), &y)?;
    save_matrix(path("estimate.sctm"), &h_est)?;
    std::fs::write(path("report.csv"), report.to_csv())?;

    let (imager, kept) = Imager::excluding_flagged(&h_est, &report)?;
    let y_img = camera(&h.select_rows(&kept)?, test.patterns(), cfg.noise, cfg.seed ^ SALT_TEST)?;
    let ys: Vec<Vec<f64>> = (0..test.count()).map(|k| y_img.column(k)).collect();
    let rho = local_prior_estimate(train.patterns(), DEFAULT_RHO_FLOOR)?;
    let recs = imager.reconstruct_batch(
        &ys,
        &PriorMode::Local(rho),
        &cfg.solver.with_seed(cfg.seed),
        cfg.threads,
    )?;
    for (k, rec) in recs.iter().enumerate() {
        let bits: Vec<f64> = rec.x_bin.iter().map(|&b| b as f64).collect();
        save_image_pgm(path(&format!("recon_{k:03}.pgm")), train.width(), train.height(), &bits)?;
        save_real(path(&format!("soft_{k:03}.sctm")), 1, n, &rec.x_soft)?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ExperimentConfig {
        ExperimentConfig {
            seeds: 1,
            side: 4,
            block: 2,
            train_images: 60,
            test_images: 2,
            outputs: 6,
            alphas: vec![1.0, 2.0],
            alpha: 2.0,
            m_ratios: vec![0.5, 1.0],
            held_out: 10,
            grid_images: 2,
            threads: 1,
            solver: SolverOptions {
                max_sweeps: 30,
                restarts: 1,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn config_text_overrides_defaults() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text("# comment\nseed = 9\nalphas=1,2.5 # trailing\n\nrestarts=1\n")
            .unwrap();
        assert_eq!(
            (cfg.seed, cfg.alphas.clone(), cfg.solver.restarts),
            (9, vec![1.0, 2.5], 1)
        );
        assert!(cfg.apply_text("nonsense").unwrap_err().to_string().contains("line 1"));
        assert!(cfg.set("bogus", "1").is_err());
        assert!(cfg.set("seed", "x").is_err());
        cfg.set("dataset", "d2").unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn csv_layout() {
        let mut t = SweepTable::new("alpha", &[1.0, 2.0], 2);
        t.rows[0].1.extend([0.5, 0.7]);
        t.rows[1].1.extend([1.0, 1.0]);
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "alpha,mean,std,value_0,value_1");
        assert!(lines[1].starts_with("1,0.6000000000,0.1000000000,0.5"));
        assert_eq!(t.means(), vec![0.6, 1.0]);
    }

    #[test]
    fn small_runs_are_deterministic() {
        let cfg = tiny();
        let a = alpha_sweep(&cfg).unwrap();
        let b = alpha_sweep(&cfg).unwrap();
        assert_eq!((&a.dependence, &a.row_recovery), (&b.dependence, &b.row_recovery));
        assert_eq!(a.dependence.rows.len(), 2);
        let m = m_sweep(&cfg).unwrap();
        assert_eq!(m, m_sweep(&cfg).unwrap());
        assert!(m.local.means().iter().all(|v| (0.0..=1.0).contains(v)));
        let g = visual_grid(&cfg).unwrap();
        assert_eq!((g.width, g.height), (2 * 4 + 3, 3 * 4 + 4));
    }

    #[test]
    fn pipeline_writes_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let files = run_pipeline(&tiny(), dir.path()).unwrap();
        assert!(files.iter().all(|f| f.exists()));
        assert!(files.iter().any(|f| f.extension().is_some_and(|e| e == "pgm")));
    }
}
