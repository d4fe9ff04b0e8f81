//! The swept solver against a plain dense re-implementation, the parallel
//! AMP iteration on diagonal operators, and its own convergence claims.

#![allow(clippy::needless_range_loop)]

use num_complex::Complex64;
use prsamp::priors::{binary_denoiser, complex_gaussian_denoiser};
use prsamp::solver::{
    gaussian_output, init_state, pr_output, refresh_channel, solve, sweep, sweep_in_order, Channel, Operator, Problem,
};
use prsamp::{generate_tm, measure, seeded_rng, NoiseModel, PriorSpec, Rho, SolverOptions, SolverState, Tm};

type Dense = Vec<Vec<Complex64>>;

fn dense(h: &Tm) -> Dense {
    (0..h.rows()).map(|m| h.row(m).to_vec()).collect()
}

fn channel(kind: Channel, y: f64, w: Complex64, v: f64, o: &SolverOptions<f64>) -> (Complex64, f64) {
    let out = match kind {
        Channel::Gaussian => gaussian_output(y, w, v.max(0.0), o.sigma2).unwrap(),
        Channel::PhaseRetrieval => pr_output(y, w, v.max(0.0), o.sigma2, o.omega_guard).unwrap(),
    };
    (out.g, out.g_prime)
}

fn denoise(prior: &PriorSpec<f64>, i: usize, r: Complex64, s: f64) -> (Complex64, f64) {
    match prior {
        PriorSpec::ComplexGaussian { variance } => complex_gaussian_denoiser(r, s, *variance).unwrap(),
        PriorSpec::Binary(rho) => {
            let (a, v) = binary_denoiser(r, s, rho.at(i)).unwrap();
            (Complex64::new(a, 0.0), v)
        }
    }
}

/// Straight-line sweep: recompute every output message, then update the
/// coefficients one at a time in `order`.
#[allow(clippy::too_many_arguments)]
fn reference_sweep(
    st: &mut SolverState<f64>,
    a: &Dense,
    y: &[f64],
    kind: Channel,
    prior: &PriorSpec<f64>,
    o: &SolverOptions<f64>,
    order: &[usize],
) -> f64 {
    let (m_rows, n) = (a.len(), a[0].len());
    for m in 0..m_rows {
        let mut z = Complex64::new(0.0, 0.0);
        let mut v = 0.0;
        for i in 0..n {
            z += a[m][i] * st.x_a[i];
            v += a[m][i].norm_sqr() * st.x_v[i];
        }
        st.v[m] = v;
        st.omega[m] = z - st.g[m] * v;
        (st.g[m], st.g_prime[m]) = channel(kind, y[m], st.omega[m], v, o);
    }
    let mut biggest = 0.0f64;
    for &i in order {
        let mut precision = 0.0;
        let mut scale = 0.0;
        let mut field = Complex64::new(0.0, 0.0);
        for m in 0..m_rows {
            let w = a[m][i].norm_sqr();
            if w == 0.0 {
                continue;
            }
            precision -= w * st.g_prime[m].min(0.0);
            scale += w * st.g_prime[m].abs();
            field += a[m][i].conj() * st.g[m];
        }
        let s = 1.0 / precision.max((f64::EPSILON * scale).max(f64::MIN_POSITIVE));
        let r = st.x_a[i] + field * s;
        let (fresh, new_v) = denoise(prior, i, r, s);
        let new_a = fresh * o.damping + st.x_a[i] * (1.0 - o.damping);
        let (da, dv) = (new_a - st.x_a[i], new_v - st.x_v[i]);
        st.x_a[i] = new_a;
        st.x_v[i] = new_v;
        st.s[i] = s;
        st.r[i] = r;
        biggest = biggest.max(da.norm());
        for m in 0..m_rows {
            let w = a[m][i].norm_sqr();
            if w == 0.0 {
                continue;
            }
            st.v[m] += w * dv;
            st.omega[m] = st.omega[m] + a[m][i] * da - st.g[m] * (w * dv);
            (st.g[m], st.g_prime[m]) = channel(kind, y[m], st.omega[m], st.v[m], o);
        }
    }
    biggest
}

fn max_gap(a: &SolverState<f64>, b: &SolverState<f64>) -> f64 {
    let c = |x: &[Complex64], y: &[Complex64]| x.iter().zip(y).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
    let r = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    [
        c(&a.x_a, &b.x_a),
        r(&a.x_v, &b.x_v),
        c(&a.omega, &b.omega),
        r(&a.v, &b.v),
        c(&a.g, &b.g),
        r(&a.g_prime, &b.g_prime),
        c(&a.r, &b.r),
        r(&a.s, &b.s),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

fn check_against_reference(prior: PriorSpec<f64>, damping: f64) {
    let h = generate_tm::<f64>(8, 16, 11).unwrap();
    let truth: Vec<f64> = (0..16).map(|i| ((i * 5) % 7 < 2) as u8 as f64).collect();
    let y = measure(&h, &truth, NoiseModel::None, 0).unwrap();
    let op = Operator::from_matrix(&h);
    let p = Problem::new(&op, &y, Channel::PhaseRetrieval, &prior).unwrap();
    let o = SolverOptions {
        damping,
        ..Default::default()
    };
    let a = dense(&h);
    let mut rng = seeded_rng(5, 0);
    let mut fast = init_state(&p, &o, &mut rng);
    let mut slow = fast.clone();
    for t in 1..=6 {
        let order: Vec<usize> = (0..16).map(|k| (k * 7 + t) % 16).collect();
        refresh_channel(&mut fast, &p, &o, t).unwrap();
        let d_fast = sweep_in_order(&mut fast, &p, &o, &order, t).unwrap();
        let d_slow = reference_sweep(&mut slow, &a, &y, Channel::PhaseRetrieval, &prior, &o, &order);
        let gap = max_gap(&fast, &slow);
        assert!(gap < 1e-12, "sweep {t}: states differ by {gap:e}");
        assert!((d_fast - d_slow).abs() < 1e-12);
    }
}

#[test]
fn matches_reference_with_gaussian_prior() {
    check_against_reference(PriorSpec::ComplexGaussian { variance: 1.0 / 16.0 }, 1.0);
}

#[test]
fn matches_reference_with_binary_prior_and_damping() {
    check_against_reference(PriorSpec::Binary(Rho::Global(0.25)), 0.7);
}

#[test]
fn diagonal_sweep_equals_parallel_amp_step() {
    // one output per coefficient, so sequential and parallel schedules coincide
    let n = 6;
    let d: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(0.5 + i as f64 * 0.3, 0.2 - 0.1 * i as f64))
        .collect();
    let h = Tm::from_fn(n, n, |m, i| if m == i { d[i] } else { Complex64::new(0.0, 0.0) }).unwrap();
    let op = Operator::from_matrix(&h);
    let y = [0.4, -1.0, 2.5, 0.0, 0.8, -0.3];
    let prior = PriorSpec::ComplexGaussian { variance: 1.5 };
    let p = Problem::new(&op, &y, Channel::Gaussian, &prior).unwrap();
    let o = SolverOptions {
        sigma2: 0.2,
        ..Default::default()
    };
    let mut rng = seeded_rng(2, 0);
    let mut st = init_state(&p, &o, &mut rng);
    for t in 1..=5 {
        // canonical AMP step from the same messages
        let v: Vec<f64> = (0..n).map(|m| d[m].norm_sqr() * st.x_v[m]).collect();
        let omega: Vec<Complex64> = (0..n).map(|m| d[m] * st.x_a[m] - st.g[m] * v[m]).collect();
        let g: Vec<Complex64> = (0..n).map(|m| (y[m] - omega[m]) / (v[m] + o.sigma2)).collect();
        let gp: Vec<f64> = (0..n).map(|m| -1.0 / (v[m] + o.sigma2)).collect();
        let expect: Vec<Complex64> = (0..n)
            .map(|i| {
                let s = 1.0 / (d[i].norm_sqr() * -gp[i]);
                let r = st.x_a[i] + d[i].conj() * g[i] * s;
                r * (1.5 / (1.5 + s))
            })
            .collect();
        sweep(&mut st, &p, &o, &mut rng, t).unwrap();
        for (got, want) in st.x_a.iter().zip(&expect) {
            assert!((got - want).norm() < 1e-13, "step {t}: {got} vs {want}");
        }
    }
}

#[test]
fn converged_state_is_stable_for_one_more_sweep() {
    let h = generate_tm::<f64>(96, 48, 4).unwrap();
    let truth: Vec<f64> = (0..48).map(|i| (i % 6 == 1) as u8 as f64).collect();
    let y = measure(&h, &truth, NoiseModel::None, 0).unwrap();
    let op = Operator::from_matrix(&h);
    let prior = PriorSpec::Binary(Rho::Global(8.0 / 48.0));
    let p = Problem::new(&op, &y, Channel::PhaseRetrieval, &prior).unwrap();
    let o = SolverOptions::<f64>::default();
    let sol = solve(&p, &o).unwrap();
    assert!(sol.converged);

    // replay the winning restart and take one extra sweep
    let mut rng = seeded_rng(o.seed, sol.restart as u64);
    let mut st = init_state(&p, &o, &mut rng);
    for t in 1..=sol.sweeps_used {
        sweep(&mut st, &p, &o, &mut rng, t).unwrap();
    }
    assert_eq!(st.x_a, sol.x_a);
    let extra = sweep(&mut st, &p, &o, &mut rng, sol.sweeps_used + 1).unwrap();
    assert!(extra < 10.0 * o.tol, "extra sweep moved x_a by {extra:e}");
}

#[test]
fn solve_is_deterministic_and_seed_sensitive() {
    let h = generate_tm::<f64>(40, 20, 8).unwrap();
    let y = measure(&h, &[1.0; 20], NoiseModel::None, 0).unwrap();
    let op = Operator::from_matrix(&h);
    let prior = PriorSpec::ComplexGaussian { variance: 1.0 };
    let p = Problem::new(&op, &y, Channel::PhaseRetrieval, &prior).unwrap();
    let o = SolverOptions {
        max_sweeps: 20,
        ..Default::default()
    };
    let a = solve(&p, &o).unwrap();
    assert_eq!(a, solve(&p, &o).unwrap());
    assert_ne!(a.x_a, solve(&p, &o.with_seed(1)).unwrap().x_a);
}

#[test]
fn every_restart_diverging_is_reported_with_partial_state() {
    // a NaN-free but absurd scale makes the binary denoiser saturate and
    // the Gaussian channel overflow
    let h = Tm::from_fn(2, 2, |_, _| Complex64::new(1e300, 0.0)).unwrap();
    let op = Operator::from_matrix(&h);
    let y = [1e300, 1e300];
    let prior = PriorSpec::ComplexGaussian { variance: 1e300 };
    let p = Problem::new(&op, &y, Channel::Gaussian, &prior).unwrap();
    match solve(&p, &SolverOptions::default()) {
        Err(prsamp::Error::Divergence {
            partial: Some(partial), ..
        }) => assert_eq!(partial.x_a.len(), 2),
        other => panic!("expected divergence, got {other:?}"),
    }
}
