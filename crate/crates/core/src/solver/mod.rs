//! Swept approximate message passing with pluggable output channels and
//! input priors.
//!
//! One sweep visits every coefficient once in a fresh random order. For
//! coefficient `i` it forms the pseudo-measurement `(r_i, s_i)` from the
//! current channel outputs, denoises it under the prior, and pushes the
//! change of `(x_a_i, x_v_i)` into every output it touches as a rank-1
//! update of `(omega, v)` with the Onsager correction
//! `-|A_mi|^2 dx_v_i g_m`. The channel of each touched output is refreshed
//! immediately, so the next coefficient always sees consistent `g`, `g'`.
//! Each sweep starts by rebuilding `(omega, v)` from scratch with the `g`
//! left by the previous sweep, which removes the drift the incremental
//! updates accumulate. A sweep costs two passes over the nonzeros of the
//! operator.

mod bessel;
mod channel;

pub use bessel::{bessel_ratio, SERIES_LIMIT};
pub use channel::{gaussian_output, pr_output, Channel, ChannelOutput};

use num_complex::Complex;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, PartialEstimate, Result};
use crate::model::{seeded_rng, PatternSet, PriorSpec, SeededRng, SolverOptions, SolverState, TransmissionMatrix};
use crate::scalar::Real;

/// Half-width of the uniform jitter added to the binary prior mean at start.
const BINARY_INIT_JITTER: f64 = 0.01;
/// Floor added to the binary prior variance at start.
const BINARY_INIT_VARIANCE: f64 = 0.01;

/// Measurement operator stored by columns, exact zeros dropped.
///
/// Calibration operators are 0/1 pattern matrices, so skipping zeros
/// roughly halves the work of every sweep.
#[derive(Debug, Clone)]
pub struct Operator<T: Real> {
    rows: usize,
    cols: usize,
    col_start: Vec<usize>,
    row_index: Vec<usize>,
    value: Vec<Complex<T>>,
    abs2: Vec<T>,
}

impl<T: Real> Operator<T> {
    fn from_columns(rows: usize, cols: usize, mut entry: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut col_start = Vec::with_capacity(cols + 1);
        let mut row_index = Vec::new();
        let mut value = Vec::new();
        let mut abs2 = Vec::new();
        col_start.push(0);
        for i in 0..cols {
            for m in 0..rows {
                let a = entry(m, i);
                if a.re != T::zero() || a.im != T::zero() {
                    row_index.push(m);
                    value.push(a);
                    abs2.push(a.norm_sqr());
                }
            }
            col_start.push(row_index.len());
        }
        Self {
            rows,
            cols,
            col_start,
            row_index,
            value,
            abs2,
        }
    }

    pub fn from_matrix(h: &TransmissionMatrix<T>) -> Self {
        Self::from_columns(h.rows(), h.cols(), |m, i| h.get(m, i))
    }

    /// Patterns as a real `count x dim` matrix.
    pub fn from_patterns(x: &PatternSet) -> Self {
        Self::from_columns(x.count(), x.dim(), |p, i| {
            let b = if x.pattern(p)[i] == 1 { T::one() } else { T::zero() };
            Complex::new(b, T::zero())
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.row_index.len()
    }

    #[inline]
    fn column(&self, i: usize) -> (&[usize], &[Complex<T>], &[T]) {
        let span = self.col_start[i]..self.col_start[i + 1];
        (
            &self.row_index[span.clone()],
            &self.value[span.clone()],
            &self.abs2[span],
        )
    }

    /// `A x`.
    pub fn apply(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(x.len(), self.cols, "operator input length");
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.rows];
        for (i, &xi) in x.iter().enumerate() {
            let (rows, vals, _) = self.column(i);
            for (&m, &a) in rows.iter().zip(vals) {
                out[m] = out[m] + a * xi;
            }
        }
        out
    }

    /// `|A|^2 x`.
    pub fn apply_abs2(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols, "operator input length");
        let mut out = vec![T::zero(); self.rows];
        for (i, &xi) in x.iter().enumerate() {
            let (rows, _, a2) = self.column(i);
            for (&m, &w) in rows.iter().zip(a2) {
                out[m] = out[m] + w * xi;
            }
        }
        out
    }
}

/// One inference problem: operator, observations, likelihood and prior.
#[derive(Debug, Clone, Copy)]
pub struct Problem<'a, T: Real> {
    pub operator: &'a Operator<T>,
    pub y: &'a [T],
    pub channel: Channel,
    pub prior: &'a PriorSpec<T>,
}

impl<'a, T: Real> Problem<'a, T> {
    pub fn new(operator: &'a Operator<T>, y: &'a [T], channel: Channel, prior: &'a PriorSpec<T>) -> Result<Self> {
        if y.len() != operator.rows() {
            return Err(Error::dim(format!(
                "{} observations for an operator with {} rows",
                y.len(),
                operator.rows()
            )));
        }
        if let Some(m) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::arg(format!("observation {m} is not finite")));
        }
        if channel == Channel::PhaseRetrieval {
            if let Some(m) = y.iter().position(|&v| v < T::zero()) {
                return Err(Error::arg(format!("amplitude {m} is negative")));
            }
        }
        prior.validate(operator.cols())?;
        Ok(Self {
            operator,
            y,
            channel,
            prior,
        })
    }

    /// Relative misfit `||y - |A x|||/||y||` (phase retrieval) or
    /// `||y - A x||/||y||` (Gaussian); absolute when `y = 0`.
    pub fn residual(&self, x_a: &[Complex<T>]) -> T {
        let z = self.operator.apply(x_a);
        let mut num = T::zero();
        let mut den = T::zero();
        for (&y, zm) in self.y.iter().zip(&z) {
            let d = match self.channel {
                Channel::PhaseRetrieval => y - zm.norm(),
                Channel::Gaussian => (Complex::new(y, T::zero()) - *zm).norm(),
            };
            num = num + d * d;
            den = den + y * y;
        }
        if den > T::zero() {
            (num / den).sqrt()
        } else {
            num.sqrt()
        }
    }
}

/// Result of [`solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct Solution<T: Real> {
    pub x_a: Vec<Complex<T>>,
    pub x_v: Vec<T>,
    pub sweeps_used: usize,
    pub converged: bool,
    pub residual: T,
    /// Restart that produced this solution.
    pub restart: usize,
    /// Restarts abandoned on a non-finite message.
    pub diverged_restarts: usize,
}

/// Draw the starting messages and compute the matching channel state.
///
/// `omega` starts at `A x_a` without an Onsager term.
pub fn init_state<T: Real>(
    problem: &Problem<'_, T>,
    options: &SolverOptions<T>,
    rng: &mut SeededRng,
) -> SolverState<T> {
    let n = problem.operator.cols();
    let mut x_a = Vec::with_capacity(n);
    let mut x_v = Vec::with_capacity(n);
    match problem.prior {
        PriorSpec::ComplexGaussian { variance } => {
            let sd = (variance.as_f64() * 0.5).sqrt();
            for _ in 0..n {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                x_a.push(Complex::new(T::lit(re * sd), T::lit(im * sd)));
                x_v.push(*variance);
            }
        }
        PriorSpec::Binary(rho) => {
            for i in 0..n {
                let p = rho.at(i);
                let jitter: f64 = rng.random_range(-BINARY_INIT_JITTER..BINARY_INIT_JITTER);
                x_a.push(Complex::new(p + T::lit(jitter), T::zero()));
                x_v.push(p * (T::one() - p) + T::lit(BINARY_INIT_VARIANCE));
            }
        }
    }
    let omega = problem.operator.apply(&x_a);
    let v = problem.operator.apply_abs2(&x_v);
    let mut g = Vec::with_capacity(omega.len());
    let mut g_prime = Vec::with_capacity(omega.len());
    for ((&y, &w), &vm) in problem.y.iter().zip(&omega).zip(&v) {
        let out = problem.channel.eval(y, w, vm, options.sigma2, options.omega_guard);
        g.push(out.g);
        g_prime.push(out.g_prime);
    }
    let mut state = SolverState {
        x_a,
        x_v,
        omega,
        v,
        s: vec![T::zero(); n],
        r: vec![Complex::new(T::zero(), T::zero()); n],
        g,
        g_prime,
    };
    for i in 0..n {
        let (s, r) = pseudo_measurement(&state, problem.operator, i);
        state.s[i] = s;
        state.r[i] = r;
    }
    state
}

#[inline]
fn pseudo_measurement<T: Real>(state: &SolverState<T>, op: &Operator<T>, i: usize) -> (T, Complex<T>) {
    let (rows, vals, a2) = op.column(i);
    let mut precision = T::zero();
    let mut scale = T::zero();
    let mut field = Complex::new(T::zero(), T::zero());
    for ((&m, a), &w) in rows.iter().zip(vals).zip(a2) {
        // outputs whose posterior is wider than their prior carry no
        // usable precision; letting them subtract can flip the sign of s
        let gp = state.g_prime[m];
        precision = precision - w * gp.min(T::zero());
        scale = scale + w * gp.abs();
        field = field + a.conj() * state.g[m];
    }
    // a column with no informative output yields a nearly flat message
    let floor = (T::epsilon() * scale).max(T::min_positive_value());
    let s = precision.max(floor).recip();
    (s, state.x_a[i] + field.scale(s))
}

/// One sweep over a random permutation drawn from `rng`: recompute the
/// channel messages, then visit every coefficient.
///
/// Returns the largest `|dx_a|` of the sweep.
pub fn sweep<T: Real>(
    state: &mut SolverState<T>,
    problem: &Problem<'_, T>,
    options: &SolverOptions<T>,
    rng: &mut SeededRng,
    sweep_index: usize,
) -> Result<T> {
    refresh_channel(state, problem, options, sweep_index)?;
    let mut order: Vec<usize> = (0..problem.operator.cols()).collect();
    order.shuffle(rng);
    sweep_in_order(state, problem, options, &order, sweep_index)
}

/// `v = |A|^2 x_v`, `omega = A x_a - v g` with the current `g`, then
/// re-evaluate the channel everywhere.
pub fn refresh_channel<T: Real>(
    state: &mut SolverState<T>,
    problem: &Problem<'_, T>,
    options: &SolverOptions<T>,
    sweep_index: usize,
) -> Result<()> {
    let z = problem.operator.apply(&state.x_a);
    state.v = problem.operator.apply_abs2(&state.x_v);
    for m in 0..z.len() {
        state.omega[m] = z[m] - state.g[m].scale(state.v[m]);
        let out = problem.channel.eval(
            problem.y[m],
            state.omega[m],
            state.v[m],
            options.sigma2,
            options.omega_guard,
        );
        if !(finite_c(out.g) && out.g_prime.is_finite()) {
            return Err(Error::Divergence {
                sweep: sweep_index,
                index: m,
                partial: None,
            });
        }
        state.g[m] = out.g;
        state.g_prime[m] = out.g_prime;
    }
    Ok(())
}

/// One sweep visiting coefficients in the given order.
pub fn sweep_in_order<T: Real>(
    state: &mut SolverState<T>,
    problem: &Problem<'_, T>,
    options: &SolverOptions<T>,
    order: &[usize],
    sweep_index: usize,
) -> Result<T> {
    let op = problem.operator;
    let beta = options.damping;
    let keep = T::one() - beta;
    let mut max_change = T::zero();
    let diverged = |index| Error::Divergence {
        sweep: sweep_index,
        index,
        partial: None,
    };
    for &i in order {
        let (s, r) = pseudo_measurement(state, op, i);
        let (fresh_a, new_v) = problem.prior.denoise(i, r, s);
        let old_a = state.x_a[i];
        let new_a = if beta == T::one() {
            fresh_a
        } else {
            fresh_a.scale(beta) + old_a.scale(keep)
        };
        if !(finite_c(new_a) && new_v.is_finite() && finite_c(r) && s.is_finite()) {
            return Err(diverged(i));
        }
        let da = new_a - old_a;
        let dv = new_v - state.x_v[i];
        state.x_a[i] = new_a;
        state.x_v[i] = new_v;
        state.s[i] = s;
        state.r[i] = r;
        max_change = max_change.max(da.norm());

        let (rows, vals, a2) = op.column(i);
        for ((&m, &a), &w) in rows.iter().zip(vals).zip(a2) {
            let dvm = w * dv;
            state.v[m] = state.v[m] + dvm;
            state.omega[m] = state.omega[m] + a * da - state.g[m].scale(dvm);
            let out = problem.channel.eval(
                problem.y[m],
                state.omega[m],
                state.v[m],
                options.sigma2,
                options.omega_guard,
            );
            if !(finite_c(out.g) && out.g_prime.is_finite()) {
                return Err(diverged(i));
            }
            state.g[m] = out.g;
            state.g_prime[m] = out.g_prime;
        }
    }
    Ok(max_change)
}

#[inline]
fn finite_c<T: Real>(z: Complex<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

struct RunOutcome<T: Real> {
    x_a: Vec<Complex<T>>,
    x_v: Vec<T>,
    sweeps_used: usize,
    converged: bool,
    residual: T,
    divergence: Option<(usize, usize)>,
}

fn run_once<T: Real>(problem: &Problem<'_, T>, options: &SolverOptions<T>, restart: usize) -> RunOutcome<T> {
    let mut rng = seeded_rng(options.seed, restart as u64);
    let mut state = init_state(problem, options, &mut rng);
    let mut last_good = (state.x_a.clone(), state.x_v.clone());
    let mut sweeps_used = 0;
    let mut converged = false;
    let mut divergence = None;
    for t in 1..=options.max_sweeps {
        match sweep(&mut state, problem, options, &mut rng, t) {
            Ok(change) => {
                sweeps_used = t;
                if change < options.tol {
                    converged = true;
                    break;
                }
                last_good.0.clone_from(&state.x_a);
                last_good.1.clone_from(&state.x_v);
            }
            Err(Error::Divergence { sweep, index, .. }) => {
                divergence = Some((sweep, index));
                break;
            }
            Err(e) => unreachable!("sweep only reports divergence: {e}"),
        }
    }
    let (x_a, x_v) = if divergence.is_some() {
        last_good
    } else {
        (state.x_a, state.x_v)
    };
    let residual = problem.residual(&x_a);
    RunOutcome {
        x_a,
        x_v,
        sweeps_used,
        converged,
        residual,
        divergence,
    }
}

/// Run `options.restarts` independent initialisations to convergence (or
/// `max_sweeps`) and keep the one with the smallest residual.
///
/// Restart `k` draws from stream `k` of `options.seed`.
pub fn solve<T: Real>(problem: &Problem<'_, T>, options: &SolverOptions<T>) -> Result<Solution<T>> {
    options.validate()?;
    let mut best: Option<Solution<T>> = None;
    let mut best_partial: Option<(RunOutcome<T>, usize)> = None;
    let mut diverged_restarts = 0;
    for k in 0..options.restarts {
        let run = run_once(problem, options, k);
        if run.divergence.is_some() {
            diverged_restarts += 1;
            let better = best_partial.as_ref().is_none_or(|(b, _)| run.residual < b.residual);
            if better {
                best_partial = Some((run, k));
            }
            continue;
        }
        if best.as_ref().is_none_or(|b| run.residual < b.residual) {
            best = Some(Solution {
                x_a: run.x_a,
                x_v: run.x_v,
                sweeps_used: run.sweeps_used,
                converged: run.converged,
                residual: run.residual,
                restart: k,
                diverged_restarts: 0,
            });
        }
    }
    match best {
        Some(mut sol) => {
            sol.diverged_restarts = diverged_restarts;
            Ok(sol)
        }
        None => {
            let (run, _) = best_partial.expect("at least one restart ran");
            let (sweep, index) = run.divergence.expect("diverged run");
            Err(Error::Divergence {
                sweep,
                index,
                partial: Some(Box::new(PartialEstimate {
                    x_a: run
                        .x_a
                        .iter()
                        .map(|z| num_complex::Complex64::new(z.re.as_f64(), z.im.as_f64()))
                        .collect(),
                    x_v: run.x_v.iter().map(|v| v.as_f64()).collect(),
                    sweeps_used: run.sweeps_used,
                    residual: run.residual.as_f64(),
                })),
            })
        }
    }
}
