mod common;

use common::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use stratwave::dynamics::*;
use stratwave::integrate::*;
use stratwave::spectral_core::{FieldSet, ReducedState, Resolution, SpectralField, State, WaveIndex};
use stratwave::wave_modes::*;
use stratwave::Error;

type C = Complex64;

fn model(eps: f64) -> Model {
    Model::new(ModelParams::with_epsilon(eps, 0.25)).unwrap()
}

fn flat_model(eps: f64) -> Model {
    let mut p = ModelParams::with_epsilon(eps, 0.25);
    for prof in [&mut p.profiles.g, &mut p.profiles.hbar0, &mut p.profiles.gtilde] {
        *prof = ProfileSpec::Named("zero".into());
    }
    Model::new(p).unwrap()
}

fn diff<S: FieldSet>(a: &S, b: &S) -> f64 {
    S::lin_comb(&[(1.0, a), (-1.0, b)]).norm()
}

fn eta(eps: f64) -> Eta {
    Eta::from_eps_nu(eps, 0.25).unwrap()
}

fn divfree(res: Resolution, seed: u64, amp: f64, kmax: i64) -> ReducedState {
    let s = leray_project_reduced(&smooth_state(res, &mut rng(seed), 1.0, kmax).reduce());
    let n = s.norm();
    ReducedState::lin_comb(&[(amp / n, &s)])
}

fn weighted_free(res: Resolution, seed: u64, amp: f64, kmax: i64, m: &Model) -> ReducedState {
    let s = divfree(res, seed, amp, kmax);
    let (v1, v2, w) = pseudo_incompressible_project(&s.v1, &s.v2, &s.w, &m.phi).unwrap();
    ReducedState { h: s.h, v1, v2, w }
}

/// Per-index 5x5 blocks of `L_a + eta L_g`, assembled by applying the
/// operator to unit data in each component at every index at once.
fn assembled_blocks(res: Resolution, e: Eta) -> Vec<DMatrix<C>> {
    let n = res.n_coeffs();
    let mut blocks = vec![DMatrix::<C>::zeros(5, 5); n];
    for j in 0..5 {
        let mut u = State::zeros(res);
        {
            let mut fs = u.fields_mut();
            let sym = fs[j].symmetry();
            *fs[j] = SpectralField::from_fn(res, sym, |_| C::new(1.0, 0.0));
        }
        let out = apply_perturbed(&u, e);
        for (i, f) in out.fields().iter().enumerate() {
            for flat in 0..n {
                blocks[flat][(i, j)] = f.coeffs()[flat];
            }
        }
    }
    blocks
}

#[test]
fn propagator_matches_dense_exponential() {
    let res = res(8);
    let e = eta(0.1);
    let blocks = assembled_blocks(res, e);
    let u = random_state(res, &mut rng(1), false);
    let t = 0.37;
    let got = linear_propagate(&u, t, e);
    let mut worst: f64 = 0.0;
    for flat in 0..res.n_coeffs() {
        let k: WaveIndex = res.wave_index(flat);
        if res.is_nyquist(k) {
            continue;
        }
        // Sine rows are absent at kz = 0.
        let rows: Vec<usize> = if k.kz == 0 { vec![0, 2, 3] } else { (0..5).collect() };
        let m = DMatrix::<C>::from_fn(rows.len(), rows.len(), |a, b| blocks[flat][(rows[a], rows[b])] * C::new(-t, 0.0));
        let ex = m.exp();
        let fields = u.fields();
        let gfields = got.fields();
        for (a, &ra) in rows.iter().enumerate() {
            let mut acc = C::new(0.0, 0.0);
            for (b, &rb) in rows.iter().enumerate() {
                acc += ex[(a, b)] * fields[rb].coeffs()[flat];
            }
            worst = worst.max((acc - gfields[ra].coeffs()[flat]).norm());
        }
    }
    assert!(worst <= 1e-9, "{worst}");
}

#[test]
fn propagator_is_an_isometric_group() {
    let res = res(8);
    let e = eta(0.1);
    let mut r = rng(2);
    let u = random_state(res, &mut r, false);
    let n0 = u.norm();
    for t in [0.3, 1.0, 7.5] {
        assert!((linear_propagate(&u, t, e).norm() - n0).abs() <= 1e-12 * n0);
    }
    let (t, s) = (0.41, -1.3);
    let a = linear_propagate(&linear_propagate(&u, s, e), t, e);
    let b = linear_propagate(&u, t + s, e);
    assert!(diff(&a, &b) <= 1e-12 * n0);
    assert!(diff(&linear_propagate(&u, 0.0, e), &u) <= 1e-14 * n0);
}

#[test]
fn propagator_examples() {
    let res = res(8);
    let e = eta(0.1);
    let u = random_state(res, &mut rng(3), false);
    let mf = project(&u, e, &[Branch::Mf]);
    assert!(diff(&linear_propagate(&mf, 12.3, e), &mf) <= 1e-13 * mf.norm());

    let k = WaveIndex::new(1, 2, 1);
    let p = eigenvector(ModeKind::AcousticWave(Sign::Plus), Flavor::Perturbed, k, e).unwrap();
    let mut dec = ModalDecomposition::zeros(res, e);
    dec.set(k, ModeKind::AcousticWave(Sign::Plus), C::new(1.0, 0.0));
    dec.set(k.partner(), ModeKind::AcousticWave(Sign::Minus), C::new(1.0, 0.0));
    let aw = reconstruct(&dec);
    let period = 2.0 * std::f64::consts::PI / p.omega;
    assert!(diff(&linear_propagate(&aw, period, e), &aw) <= 1e-12 * aw.norm());
}

#[test]
fn soundproof_propagator_examples() {
    let res = res(8);
    let params = ModelParams::with_epsilon(0.1, 0.25);
    let e = params.eta().unwrap();
    let basis = SoundproofBasis::new(res, e);
    let s = divfree(res, 4, 1.0, 3);
    let mf = basis.project(&s, &[Branch::Mf]);
    assert!(diff(&soundproof_linear_propagate(&mf, 3.3, &params).unwrap(), &mf) <= 1e-13);

    let k = WaveIndex::new(1, 0, 2);
    let p = eigenvector(ModeKind::InternalWave(Sign::Minus), Flavor::Soundproof, k, e).unwrap();
    let mut amps = vec![[C::new(0.0, 0.0); 8]; res.n_coeffs()];
    amps[res.flat_index(k).unwrap()][5] = C::new(1.0, 0.0);
    amps[res.flat_index(k.partner()).unwrap()][4] = C::new(1.0, 0.0);
    let gw = basis.reconstruct(&amps);
    assert!(gw.divergence().norm() <= 1e-13 * gw.norm());
    let period = 2.0 * std::f64::consts::PI / p.omega.abs() * params.epsilon;
    assert!(diff(&soundproof_linear_propagate(&gw, period, &params).unwrap(), &gw) <= 1e-12 * gw.norm());

    // Energy by grid quadrature.
    let quad = |x: &ReducedState| -> f64 {
        x.fields().iter().map(|f| f.to_physical().iter().map(|v| v * v).sum::<f64>()).sum::<f64>() / res.n_points() as f64
    };
    let out = soundproof_linear_propagate(&s, 0.77, &params).unwrap();
    assert!((quad(&out) - quad(&s)).abs() <= 1e-12 * quad(&s));
    let bad = random_reduced(res, &mut rng(5), false);
    assert!(matches!(soundproof_linear_propagate(&bad, 1.0, &params), Err(Error::DivergenceViolation { .. })));
}

#[test]
fn filter_examples() {
    let res = res(8);
    let e = eta(0.1);
    let u = random_state(res, &mut rng(6), false);
    assert!(diff(&filter_state(&u, 0.0, e, 0.25), &u) <= 1e-14 * u.norm());
    let v = filter_state(&u, 0.3, e, 0.25);
    assert!(diff(&unfilter_state(&v, 0.3, e, 0.25), &u) <= 1e-12 * u.norm());
}

#[test]
fn linear_regime_is_exact_and_filtered_constant() {
    // Without profiles and at amplitude 1e-8 the system is the fast operator
    // up to relative 1e-8 quadratic terms.
    let res = res(8);
    let m = flat_model(0.1);
    let u0 = smooth_state(res, &mut rng(7), 1e-8, 2);
    let mut cfg = IntegratorConfig::new(Scheme::ExponentialRK4, 0.05, 1.0);
    cfg.sample_stride = 2;
    cfg.keep_states = true;
    let traj = integrate(ModelKind::Full, &m, &SystemState::Full(u0.clone()), &cfg, &mut []).unwrap();
    // The residual drift is the cubic energy exchange of the quadratic terms,
    // so it scales with the amplitude; time-stepping error is far below it.
    assert!(traj.energy_drift() <= 2e-10, "{}", traj.energy_drift());
    let tiny = smooth_state(res, &mut rng(7), 1e-10, 2);
    let t2 = integrate(ModelKind::Full, &m, &SystemState::Full(tiny), &cfg, &mut []).unwrap();
    assert!(t2.energy_drift() <= 2e-12, "{}", t2.energy_drift());
    let mut worst: f64 = 0.0;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let exact = linear_propagate(&u0, t / 0.1, m.eta);
        worst = worst.max(diff(s.as_full().unwrap(), &exact) / u0.norm());
        // The exact linear trajectory filters to a constant.
        assert!(diff(&filter_state(&exact, *t, m.eta, 0.25), &u0) <= 1e-10 * u0.norm());
    }
    eprintln!("tiny-amplitude deviation from linear flow: {worst:.3e}");
    assert!(worst <= 1e-6, "{worst}");
    assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
    assert_eq!(traj.times.len(), traj.energy.len());
    assert_eq!(*traj.times.last().unwrap(), 1.0);
}

#[test]
fn lawson_step_with_zero_remainder_is_exact_propagation() {
    let res = res(8);
    let e = eta(0.1);
    let basis = PerturbedBasis::new(res, e);
    let u = random_state(res, &mut rng(17), true);
    let h = 0.03;
    let half = basis.propagator(0.5 * h / 0.1);
    let out = lawson_rk4(&u, h, |x| apply_to_state(&half, x), |x| Ok(x.zeros_like())).unwrap();
    assert!(diff(&out, &linear_propagate(&u, h / 0.1, e)) <= 1e-13 * u.norm());
}

#[test]
fn zero_data_stays_zero() {
    let res = res(8);
    let m = model(0.1);
    let cfg = IntegratorConfig::new(Scheme::ExponentialRK4, 0.05, 0.2);
    for kind in [ModelKind::Full, ModelKind::Soundproof, ModelKind::Intermediate] {
        let u0 = match kind {
            ModelKind::Full => SystemState::Full(State::zeros(res)),
            _ => SystemState::Reduced(ReducedState::zeros(res)),
        };
        let traj = integrate(kind, &m, &u0, &cfg, &mut []).unwrap();
        assert_eq!(traj.final_state.unwrap().norm(), 0.0);
        assert!(traj.energy.iter().all(|&e| e == 0.0));
    }
}

#[test]
fn classical_rk4_guard_and_agreement() {
    let res = res(8);
    let m = model(0.1);
    let basis = PerturbedBasis::new(res, m.eta);
    let limit = 0.5 * 0.1 / basis.max_frequency_in_band();
    let u0 = SystemState::Full(smooth_state(res, &mut rng(8), 0.1, 2));
    let too_big = IntegratorConfig::new(Scheme::ClassicalRK4, 1.01 * limit, 0.05);
    assert!(matches!(step(ModelKind::Full, &m, &u0, &too_big), Err(Error::StabilityGuard { .. })));

    let t_end = 0.02;
    let a = integrate(ModelKind::Full, &m, &u0, &IntegratorConfig::new(Scheme::ClassicalRK4, limit / 8.0, t_end), &mut []).unwrap();
    let b = integrate(ModelKind::Full, &m, &u0, &IntegratorConfig::new(Scheme::ExponentialRK4, 5e-4, t_end), &mut []).unwrap();
    let (a, b) = (a.final_state.unwrap(), b.final_state.unwrap());
    assert!(diff(a.as_full().unwrap(), b.as_full().unwrap()) <= 1e-7 * a.norm());
}

fn richardson_order(kind: ModelKind, m: &Model, u0: &SystemState, t_end: f64, steps: usize) -> f64 {
    let run = |n: usize| {
        let cfg = IntegratorConfig::new(Scheme::ExponentialRK4, t_end / n as f64, t_end);
        integrate(kind, m, u0, &cfg, &mut []).unwrap().final_state.unwrap()
    };
    let (a, b, c) = (run(steps), run(2 * steps), run(4 * steps));
    let d = |x: &SystemState, y: &SystemState| match (x, y) {
        (SystemState::Full(x), SystemState::Full(y)) => diff(x, y),
        (SystemState::Reduced(x), SystemState::Reduced(y)) => diff(x, y),
        _ => unreachable!(),
    };
    (d(&a, &b) / d(&b, &c)).log2()
}

#[test]
fn exponential_rk4_order_on_all_models() {
    let res = res(16);
    let m = model(0.1);
    let full = SystemState::Full(smooth_state(res, &mut rng(9), 0.1, 4));
    let sp = SystemState::Reduced(divfree(res, 10, 0.1, 4));
    let int = SystemState::Reduced(weighted_free(res, 11, 0.1, 4, &m));
    for (kind, u0) in [(ModelKind::Full, full), (ModelKind::Soundproof, sp), (ModelKind::Intermediate, int)] {
        let p = richardson_order(kind, &m, &u0, 0.1, 8);
        eprintln!("order {}: {p:.3}", kind.name());
        assert!(p >= 3.5, "{}: {p}", kind.name());
    }
}

#[test]
fn constrained_steps_keep_constraints() {
    let res = res(16);
    let m = model(0.1);
    let cfg = IntegratorConfig { sample_stride: 1, ..IntegratorConfig::new(Scheme::ExponentialRK4, 0.01, 0.1) };
    let sp = integrate(ModelKind::Soundproof, &m, &SystemState::Reduced(divfree(res, 12, 0.1, 4)), &cfg, &mut []).unwrap();
    assert!(sp.max_constraint_residual() <= 1e-10, "{}", sp.max_constraint_residual());
    let int = integrate(ModelKind::Intermediate, &m, &SystemState::Reduced(weighted_free(res, 13, 0.1, 4, &m)), &cfg, &mut []).unwrap();
    assert!(int.max_constraint_residual() <= 1e-10, "{}", int.max_constraint_residual());
    let bad = SystemState::Reduced(random_reduced(res, &mut rng(14), true));
    assert!(matches!(step(ModelKind::Soundproof, &m, &bad, &cfg), Err(Error::DivergenceViolation { .. })));
    assert!(matches!(step(ModelKind::Full, &m, &bad, &cfg), Err(Error::InvalidParams(_))));
}

#[test]
fn observers_see_every_sample() {
    let res = res(8);
    let m = model(0.1);
    let u0 = SystemState::Reduced(divfree(res, 15, 0.1, 2));
    let cfg = IntegratorConfig { sample_stride: 3, ..IntegratorConfig::new(Scheme::ExponentialRK4, 0.01, 0.1) };
    let mut seen = Vec::new();
    let mut obs = |t: f64, _: &SystemState| seen.push(t);
    let traj = integrate(ModelKind::Soundproof, &m, &u0, &cfg, &mut [&mut obs]).unwrap();
    assert_eq!(seen, traj.times);
    assert_eq!(traj.times.len(), 1 + 3 + 1);
    let mut csv = Vec::new();
    traj.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().count(), traj.len() + 1);
    assert!(text.starts_with("t,energy,constraint_residual,mf_norm,gw_norm,aw_norm\n"));
}

#[test]
fn filtered_variable_rate_is_bounded_in_eps() {
    // Finite-difference rate of the filtered variable for equal data at two eps.
    let res = res(8);
    let rate = |eps: f64| {
        let m = model(eps);
        let u0 = smooth_state(res, &mut rng(16), 0.1, 2);
        let u0 = project(&u0, m.eta, &[Branch::Mf, Branch::Gw]);
        let cfg = IntegratorConfig { sample_stride: 5, keep_states: true, ..IntegratorConfig::new(Scheme::ExponentialRK4, 0.002, 0.02) };
        let traj = integrate(ModelKind::Full, &m, &SystemState::Full(u0), &cfg, &mut []).unwrap();
        let v: Vec<State> = traj.times.iter().zip(&traj.states).map(|(t, s)| filter_state(s.as_full().unwrap(), *t, m.eta, 0.25)).collect();
        v.windows(2).zip(traj.times.windows(2)).map(|(w, t)| diff(&w[1], &w[0]) / (t[1] - t[0])).fold(0.0, f64::max)
    };
    let (a, b) = (rate(0.1), rate(0.05));
    eprintln!("filtered rates: {a:.3e} {b:.3e}");
    assert!(b <= 3.0 * a, "{a} {b}");
}
