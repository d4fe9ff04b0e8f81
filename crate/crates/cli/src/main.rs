//! `prsamp`: generate media, simulate cameras, calibrate, reconstruct and
//! run the experiment sweeps from the command line.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use prsamp::calibration::{calibrate, gen_bernoulli_patterns};
use prsamp::dataio::{
    encode_pgm, load_matrix, load_measurements, load_patterns, load_real, load_sctm, save_image_pgm, save_matrix,
    save_measurements, save_patterns, save_real, SctmData,
};
use prsamp::experiment::{alpha_sweep, m_sweep, visual_grid, ExperimentConfig};
use prsamp::{dependence, measure_batch, pearson_correlation, reconstruct, Error, Mode, Noise, Options, Tm};

/// Exit status 2: the command line or an input value is unusable.
/// Exit status 1: everything else (I/O, malformed files, mismatched data).
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Argument(_) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn usage(msg: impl Display) -> Failure {
    Failure::Usage(msg.to_string())
}

type Outcome = Result<(), Failure>;

#[derive(Parser)]
#[command(
    name = "prsamp",
    version,
    about = "Transmission-matrix calibration and imaging by swept AMP phase retrieval"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw an i.i.d. complex Gaussian transmission matrix.
    MediumGen(MediumGen),
    /// Draw Bernoulli calibration patterns.
    Patterns(Patterns),
    /// Simulate the camera: amplitudes |H x| for every pattern.
    Measure(Measure),
    /// Estimate the transmission matrix from patterns and amplitudes.
    Calibrate(Calibrate),
    /// Recover a binary image from one amplitude vector.
    Reconstruct(Reconstruct),
    /// Run one of the experiment sweeps.
    Experiment(Experiment),
}

#[derive(Args)]
struct MediumGen {
    /// Output pixels M.
    #[arg(long)]
    rows: usize,
    /// Input pixels N.
    #[arg(long)]
    cols: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Patterns {
    #[arg(long)]
    count: usize,
    /// Pixels per pattern.
    #[arg(long)]
    dim: usize,
    /// Probability of a lit pixel.
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseKind {
    None,
    Amplitude,
    Intensity,
}

#[derive(Args)]
struct Measure {
    /// Transmission matrix (SCTM complex).
    #[arg(long)]
    tm: PathBuf,
    /// Patterns (SCTM binary, one pattern per row).
    #[arg(long)]
    patterns: PathBuf,
    #[arg(long, value_enum, default_value_t = NoiseKind::None)]
    noise: NoiseKind,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Amplitudes (SCTM real, one row per output pixel).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolverFlags {
    /// Output channel noise variance.
    #[arg(long, default_value_t = Options::default().sigma2)]
    sigma2: f64,
    /// Maximum sweeps per restart.
    #[arg(long, default_value_t = Options::default().max_sweeps)]
    sweeps: usize,
    /// Stop when no coefficient moves by more than this in a sweep.
    #[arg(long, default_value_t = Options::default().tol)]
    tol: f64,
    #[arg(long, default_value_t = Options::default().restarts)]
    restarts: usize,
    /// Weight of the fresh estimate in each update; 1 disables damping.
    #[arg(long, default_value_t = Options::default().damping)]
    damping: f64,
    #[arg(long, default_value_t = Options::default().seed)]
    seed: u64,
}

impl SolverFlags {
    fn options(&self) -> Options {
        Options {
            sigma2: self.sigma2,
            max_sweeps: self.sweeps,
            tol: self.tol,
            restarts: self.restarts,
            damping: self.damping,
            seed: self.seed,
            ..Options::default()
        }
    }
}

#[derive(Args)]
struct Calibrate {
    #[arg(long)]
    patterns: PathBuf,
    #[arg(long)]
    measurements: PathBuf,
    #[command(flatten)]
    solver: SolverFlags,
    /// Worker threads; 0 picks one per core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Estimated transmission matrix (SCTM complex).
    #[arg(long)]
    out: PathBuf,
    /// Per-row CSV report.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct Reconstruct {
    /// Calibrated transmission matrix (SCTM complex).
    #[arg(long)]
    tm: PathBuf,
    /// Amplitudes (SCTM real with M entries).
    #[arg(long)]
    y: PathBuf,
    /// `global:RHO` or `local:PATH` (SCTM real with N entries).
    #[arg(long)]
    prior: String,
    #[command(flatten)]
    solver: SolverFlags,
    /// Image width for the PGM; defaults to the square side.
    #[arg(long)]
    width: Option<usize>,
    /// Ground truth (SCTM binary or real with N entries) to score against.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    out_pgm: Option<PathBuf>,
    #[arg(long)]
    out_soft: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentName {
    AlphaSweep,
    MSweep,
    VisualGrid,
}

#[derive(Args)]
struct Experiment {
    #[arg(long, value_enum)]
    name: ExperimentName,
    /// key=value settings file; `#` starts a comment.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra key=value setting applied after the file; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Directory with the MNIST IDX files.
    #[arg(long)]
    mnist_dir: Option<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Outcome {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, bytes).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn medium_gen(a: &MediumGen) -> Outcome {
    if a.rows == 0 {
        return Err(usage("--rows must be positive"));
    }
    if a.cols == 0 {
        return Err(usage("--cols must be positive"));
    }
    let h: Tm = prsamp::generate_tm(a.rows, a.cols, a.seed)?;
    save_matrix(&a.out, &h)?;
    let variance = h.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>() / h.as_slice().len() as f64;
    println!("rows={} cols={} entry_variance={variance:.6e}", a.rows, a.cols);
    Ok(())
}

fn patterns(a: &Patterns) -> Outcome {
    if a.dim == 0 {
        return Err(usage("--dim must be positive"));
    }
    if !(0.0..=1.0).contains(&a.p) {
        return Err(usage("--p must lie in [0, 1]"));
    }
    let x = gen_bernoulli_patterns(a.count, a.dim, a.p, a.seed)?;
    save_patterns(&a.out, &x)?;
    println!("count={} dim={} ones={}", x.count(), x.dim(), x.ones());
    Ok(())
}

fn measure(a: &Measure) -> Outcome {
    let noise = match a.noise {
        NoiseKind::None => Noise::None,
        NoiseKind::Amplitude => Noise::AmplitudeGaussian(a.sigma),
        NoiseKind::Intensity => Noise::IntensityGaussian(a.sigma),
    };
    let h: Tm = load_matrix(&a.tm)?;
    let x = load_patterns(&a.patterns)?;
    let y = measure_batch(&h, &x, noise, a.seed)?;
    save_measurements(&a.out, &y)?;
    println!("rows={} patterns={}", y.rows(), y.cols());
    Ok(())
}

fn calibrate_cmd(a: &Calibrate) -> Outcome {
    let x = load_patterns(&a.patterns)?;
    let y = load_measurements(&a.measurements)?;
    let (h, report) = calibrate(&x, &y, &a.solver.options(), a.threads)?;
    save_matrix(&a.out, &h)?;
    if let Some(path) = &a.report {
        write_file(path, report.to_csv())?;
    }
    print!("{}", report.summary());
    Ok(())
}

fn parse_prior(arg: &str, n: usize) -> Result<Mode, Failure> {
    let (kind, value) = arg
        .split_once(':')
        .ok_or_else(|| usage(format!("--prior must be global:RHO or local:PATH, got {arg:?}")))?;
    match kind {
        "global" => {
            let rho: f64 = value
                .parse()
                .map_err(|_| usage(format!("--prior: bad rho {value:?}")))?;
            if !(0.0..=1.0).contains(&rho) {
                return Err(usage(format!("--prior: rho must lie in [0, 1], got {rho}")));
            }
            Ok(Mode::Global(rho))
        }
        "local" => {
            let (_, _, rho) = load_real(value)?;
            if rho.len() != n {
                return Err(usage(format!(
                    "--prior: local map has {} entries, medium has {n} inputs",
                    rho.len()
                )));
            }
            if rho.iter().any(|r| !(0.0..=1.0).contains(r)) {
                return Err(usage("--prior: local probabilities must lie in [0, 1]"));
            }
            Ok(Mode::Local(rho))
        }
        other => Err(usage(format!("--prior: unknown kind {other:?} (global, local)"))),
    }
}

fn load_vector(path: &Path) -> Result<Vec<f64>, Failure> {
    Ok(match load_sctm(path)? {
        SctmData::Real { data, .. } => data,
        SctmData::Binary { data, .. } => data.into_iter().map(f64::from).collect(),
        SctmData::Complex { .. } => {
            return Err(Failure::Runtime(format!(
                "{}: expected a real or binary vector",
                path.display()
            )))
        }
    })
}

fn reconstruct_cmd(a: &Reconstruct) -> Outcome {
    let h: Tm = load_matrix(&a.tm)?;
    let n = h.cols();
    let mode = parse_prior(&a.prior, n)?;
    let (width, height) = match a.width {
        Some(0) => return Err(usage("--width must be positive")),
        Some(w) if n.is_multiple_of(w) => (w, n / w),
        Some(w) => return Err(usage(format!("--width {w} does not divide {n} pixels"))),
        None => {
            let side = (n as f64).sqrt().round() as usize;
            if side * side == n {
                (side, side)
            } else {
                (n, 1)
            }
        }
    };
    let (_, _, y) = load_real(&a.y)?;
    let rec = reconstruct(&h, &y, &mode, &a.solver.options())?;
    if let Some(path) = &a.out_pgm {
        let bits: Vec<f64> = rec.x_bin.iter().map(|&b| f64::from(b)).collect();
        save_image_pgm(path, width, height, &bits)?;
    }
    if let Some(path) = &a.out_soft {
        save_real(path, 1, n, &rec.x_soft)?;
    }
    println!("residual={:.6e}", rec.residual);
    println!("sweeps={} converged={}", rec.sweeps_used, rec.converged);
    println!("ones={}", rec.x_bin.iter().filter(|&&b| b == 1).count());
    if let Some(path) = &a.truth {
        let truth = load_vector(path)?;
        if truth.len() != n {
            return Err(Failure::Runtime(format!(
                "truth has {} pixels, medium has {n} inputs",
                truth.len()
            )));
        }
        let est: Vec<f64> = rec.x_bin.iter().map(|&b| f64::from(b)).collect();
        let dep = if est.iter().all(|&v| v == 0.0) || truth.iter().all(|&v| v == 0.0) {
            0.0
        } else {
            dependence(&truth, &est)?
        };
        println!("dependence={dep:.6}");
        println!("correlation={:.6}", pearson_correlation(&truth, &est)?);
    }
    Ok(())
}

fn experiment(a: &Experiment) -> Outcome {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &a.config {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
        cfg.apply_text(&text)
            .map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    for kv in &a.sets {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| usage(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k, v)?;
    }
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(threads) = a.threads {
        cfg.threads = threads;
    }
    if let Some(dir) = &a.mnist_dir {
        cfg.mnist_dir = Some(dir.clone());
    }
    cfg.validate()?;
    std::fs::create_dir_all(&a.out_dir)?;
    let out = |name: &str| a.out_dir.join(name);
    match a.name {
        ExperimentName::AlphaSweep => {
            let s = alpha_sweep(&cfg)?;
            write_file(&out("alpha_dependence.csv"), s.dependence.to_csv())?;
            write_file(&out("alpha_row_recovery.csv"), s.row_recovery.to_csv())?;
            write_file(&out("alpha_seconds.csv"), s.seconds.to_csv())?;
            print!("{}", s.dependence.to_csv());
        }
        ExperimentName::MSweep => {
            let s = m_sweep(&cfg)?;
            write_file(&out("m_local.csv"), s.local.to_csv())?;
            write_file(&out("m_global.csv"), s.global.to_csv())?;
            write_file(&out("m_local_pearson.csv"), s.local_pearson.to_csv())?;
            write_file(&out("m_global_pearson.csv"), s.global_pearson.to_csv())?;
            print!("local\n{}global\n{}", s.local.to_csv(), s.global.to_csv());
        }
        ExperimentName::VisualGrid => {
            let grid = visual_grid(&cfg)?;
            write_file(&out("visual_grid.pgm"), encode_pgm(&grid)?)?;
            println!("visual_grid.pgm {}x{}", grid.width, grid.height);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::MediumGen(a) => medium_gen(a),
        Command::Patterns(a) => patterns(a),
        Command::Measure(a) => measure(a),
        Command::Calibrate(a) => calibrate_cmd(a),
        Command::Reconstruct(a) => reconstruct_cmd(a),
        Command::Experiment(a) => experiment(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
