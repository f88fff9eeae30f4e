mod common;

use std::collections::HashMap;
use std::f64::consts::PI;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use stratwave::spectral_core::io::{read_state, write_state, StoredState};
use stratwave::spectral_core::{Axis, FieldSet, SpectralField, State, SymmetryClass, WaveIndex, ZProfile};
use stratwave::wave_modes::{apply_acoustic, apply_gravity};
use stratwave::Error;

use SymmetryClass::{EvenInZ, OddInZ};

fn single(n: usize, sym: SymmetryClass, k: WaveIndex, c: f64) -> SpectralField {
    SpectralField::from_fn(res(n), sym, |j| if j == k { Complex64::new(c, 0.0) } else { Complex64::new(0.0, 0.0) })
}

fn grid_of(n: usize, f: impl Fn(f64, f64, f64) -> f64) -> Vec<f64> {
    let r = res(n);
    let mut g = Vec::with_capacity(r.n_points());
    for ix in 0..n {
        for iy in 0..n {
            for iz in 0..n {
                g.push(f(r.coord(Axis::X, ix), r.coord(Axis::Y, iy), r.coord(Axis::Z, iz)));
            }
        }
    }
    g
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn coeff_diff(a: &SpectralField, b: &SpectralField) -> f64 {
    a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn single_cosine_mode_evaluates_to_cosine() {
    let f = single(8, EvenInZ, WaveIndex::new(0, 0, 1), 1.0);
    let g = f.to_physical();
    let expect = grid_of(8, |_, _, z| (2.0 * PI * z).cos());
    assert!(max_diff(&g, &expect) < 1e-14);
}

#[test]
fn zero_field_gives_zero_grid() {
    let g = SpectralField::zeros(res(8), OddInZ).to_physical();
    assert!(g.iter().all(|&x| x == 0.0));
}

#[test]
fn physical_values_match_direct_series_evaluation() {
    let mut r = rng(3);
    for sym in [EvenInZ, OddInZ] {
        let f = random_field(res(8), sym, &mut r, false);
        let g = f.to_physical();
        let rs = f.resolution();
        for &(ix, iy, iz) in &[(0, 0, 0), (1, 2, 3), (7, 5, 1), (4, 4, 6)] {
            let x = rs.coord(Axis::X, ix);
            let y = rs.coord(Axis::Y, iy);
            let z = rs.coord(Axis::Z, iz);
            let direct = eval_direct(&f, x, y, z);
            let fft = g[(ix * 8 + iy) * 8 + iz];
            assert!((direct - fft).abs() < 1e-12, "{sym:?} {direct} vs {fft}");
        }
    }
}

#[test]
fn round_trip_is_identity_at_16() {
    let mut r = rng(11);
    for sym in [EvenInZ, OddInZ] {
        let f = random_field(res(16), sym, &mut r, false);
        let back = SpectralField::to_spectral(&f.to_physical(), res(16), sym).unwrap();
        assert!(coeff_diff(&f, &back) <= 1e-12 * f.max_abs());
    }
}

#[test]
fn round_trip_non_cubic() {
    let rs = stratwave::spectral_core::Resolution::new(8, 12, 6).unwrap();
    let mut r = rng(5);
    for sym in [EvenInZ, OddInZ] {
        let f = SpectralField::from_fn(rs, sym, |_| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).symmetrized();
        let back = SpectralField::to_spectral(&f.to_physical(), rs, sym).unwrap();
        assert!(coeff_diff(&f, &back) <= 1e-12);
    }
}

#[test]
fn sine_grid_maps_to_single_coefficient() {
    let g = grid_of(8, |_, _, z| (2.0 * PI * z).sin());
    let f = SpectralField::to_spectral(&g, res(8), OddInZ).unwrap();
    let expect = single(8, OddInZ, WaveIndex::new(0, 0, 1), 1.0);
    assert!(coeff_diff(&f, &expect) < 1e-14);
}

#[test]
fn cosine_product_grid_splits_hermitian() {
    let g = grid_of(8, |x, _, z| (2.0 * PI * x).cos() * (2.0 * PI * z).cos());
    let f = SpectralField::to_spectral(&g, res(8), EvenInZ).unwrap();
    assert!((f.coeff(WaveIndex::new(1, 0, 1)) - Complex64::new(0.5, 0.0)).norm() < 1e-14);
    assert!((f.coeff(WaveIndex::new(-1, 0, 1)) - Complex64::new(0.5, 0.0)).norm() < 1e-14);
    let total: f64 = f.coeffs().iter().map(|c| c.norm()).sum();
    assert!((total - 1.0).abs() < 1e-13);
}

#[test]
fn parity_mismatch_is_rejected() {
    let g = grid_of(8, |_, _, z| (2.0 * PI * z).sin());
    match SpectralField::to_spectral(&g, res(8), EvenInZ) {
        Err(Error::ParityViolation { .. }) => {}
        other => panic!("expected ParityViolation, got {other:?}"),
    }
    let g = grid_of(8, |_, _, z| (2.0 * PI * z).cos());
    assert!(matches!(SpectralField::to_spectral(&g, res(8), OddInZ), Err(Error::ParityViolation { .. })));
}

#[test]
fn derivative_examples() {
    let c = single(8, EvenInZ, WaveIndex::new(0, 0, 1), 1.0);
    let dz = c.derivative(Axis::Z);
    assert_eq!(dz.symmetry(), OddInZ);
    let expect = single(8, OddInZ, WaveIndex::new(0, 0, 1), -2.0 * PI);
    assert!(coeff_diff(&dz, &expect) < 1e-14);

    let g = grid_of(8, |x, _, z| (2.0 * PI * x).cos() * (2.0 * PI * z).cos());
    let f = SpectralField::to_spectral(&g, res(8), EvenInZ).unwrap();
    let dx = f.derivative(Axis::X);
    assert_eq!(dx.symmetry(), EvenInZ);
    let expect = grid_of(8, |x, _, z| -2.0 * PI * (2.0 * PI * x).sin() * (2.0 * PI * z).cos());
    assert!(max_diff(&dx.to_physical(), &expect) < 1e-12);
}

#[test]
fn second_z_derivative_is_diagonal() {
    let mut r = rng(2);
    for sym in [EvenInZ, OddInZ] {
        let f = random_field(res(8), sym, &mut r, false);
        let d2 = f.derivative(Axis::Z).derivative(Axis::Z);
        assert_eq!(d2.symmetry(), sym);
        let expect = f.map_symbol(|k| -k.kz_phys().powi(2));
        assert!(coeff_diff(&d2, &expect) < 1e-10);
    }
}

#[test]
fn odd_field_derivative_matches_grid() {
    let g = grid_of(8, |_, y, z| (2.0 * PI * y).sin() * (4.0 * PI * z).sin());
    let f = SpectralField::to_spectral(&g, res(8), OddInZ).unwrap();
    let dz = f.derivative(Axis::Z);
    assert_eq!(dz.symmetry(), EvenInZ);
    let expect = grid_of(8, |_, y, z| 4.0 * PI * (2.0 * PI * y).sin() * (4.0 * PI * z).cos());
    assert!(max_diff(&dz.to_physical(), &expect) < 1e-11);
}

#[test]
fn trig_product_identities() {
    let c = single(8, EvenInZ, WaveIndex::new(0, 0, 1), 1.0);
    let p = SpectralField::dealiased_product(&c, &c).unwrap();
    assert_eq!(p.symmetry(), EvenInZ);
    assert!((p.coeff(WaveIndex::new(0, 0, 0)).re - 0.5).abs() < 1e-14);
    assert!((p.coeff(WaveIndex::new(0, 0, 2)).re - 0.5).abs() < 1e-14);

    let s = single(8, OddInZ, WaveIndex::new(0, 0, 1), 1.0);
    let p = SpectralField::dealiased_product(&s, &s).unwrap();
    assert_eq!(p.symmetry(), EvenInZ);
    assert!((p.coeff(WaveIndex::new(0, 0, 0)).re - 0.5).abs() < 1e-14);
    assert!((p.coeff(WaveIndex::new(0, 0, 2)).re + 0.5).abs() < 1e-14);
}

type Expo = HashMap<(i64, i64, i64), Complex64>;

/// Full complex-exponential coefficients of a cosine/sine series.
fn to_exponential(f: &SpectralField) -> Expo {
    let rs = f.resolution();
    let mut m = Expo::new();
    let half = Complex64::new(0.5, 0.0);
    for flat in 0..rs.n_coeffs() {
        let k = rs.wave_index(flat);
        let c = f.coeffs()[flat];
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        match (f.symmetry(), k.kz) {
            (EvenInZ, 0) => {
                m.insert((k.kx, k.ky, 0), c);
            }
            (EvenInZ, kz) => {
                m.insert((k.kx, k.ky, kz), c * half);
                m.insert((k.kx, k.ky, -kz), c * half);
            }
            (OddInZ, kz) => {
                let a = c / Complex64::new(0.0, 2.0);
                m.insert((k.kx, k.ky, kz), a);
                m.insert((k.kx, k.ky, -kz), -a);
            }
        }
    }
    m
}

fn convolve(a: &Expo, b: &Expo) -> Expo {
    let mut out = Expo::new();
    for (&(ax, ay, az), &ca) in a {
        for (&(bx, by, bz), &cb) in b {
            *out.entry((ax + bx, ay + by, az + bz)).or_default() += ca * cb;
        }
    }
    out
}

#[test]
fn dealiased_product_matches_direct_convolution() {
    let rs = res(16);
    let mut r = rng(21);
    for (sa, sb) in [(EvenInZ, EvenInZ), (EvenInZ, OddInZ), (OddInZ, OddInZ)] {
        let a = random_field(rs, sa, &mut r, true);
        let b = random_field(rs, sb, &mut r, true);
        let p = SpectralField::dealiased_product(&a, &b).unwrap();
        assert_eq!(p.symmetry(), sa.product(sb));
        let conv = convolve(&to_exponential(&a), &to_exponential(&b));
        let scale = p.max_abs().max(1.0);
        for flat in 0..rs.n_coeffs() {
            let k = rs.wave_index(flat);
            let got = p.coeffs()[flat];
            if !rs.in_band(k) {
                assert_eq!(got, Complex64::new(0.0, 0.0));
                continue;
            }
            let pos = conv.get(&(k.kx, k.ky, k.kz)).copied().unwrap_or_default();
            let expect = match (p.symmetry(), k.kz) {
                (EvenInZ, 0) => pos,
                (EvenInZ, _) => pos * 2.0,
                (OddInZ, _) => pos * Complex64::new(0.0, 2.0),
            };
            assert!((got - expect).norm() <= 1e-12 * scale, "{k:?}: {got} vs {expect}");
        }
    }
}

#[test]
fn product_parity_table() {
    let rs = res(8);
    let mut r = rng(1);
    for sa in [EvenInZ, OddInZ] {
        for sb in [EvenInZ, OddInZ] {
            let a = random_field(rs, sa, &mut r, true);
            let b = random_field(rs, sb, &mut r, true);
            let p = SpectralField::dealiased_product(&a, &b).unwrap();
            let expect = if sa == sb { EvenInZ } else { OddInZ };
            assert_eq!(p.symmetry(), expect);
        }
    }
}

#[test]
fn product_rejects_mismatched_resolutions() {
    let a = SpectralField::zeros(res(8), EvenInZ);
    let b = SpectralField::zeros(res(16), EvenInZ);
    assert!(matches!(SpectralField::dealiased_product(&a, &b), Err(Error::ResolutionMismatch(_))));
}

#[test]
fn inner_product_examples() {
    let rs = res(8);
    let mut a = State::zeros(rs);
    a.q = single(8, EvenInZ, WaveIndex::new(0, 0, 1), 1.0);
    assert!((State::inner_product(&a, &a).unwrap() - 0.5).abs() < 1e-15);

    let mut b = State::zeros(rs);
    b.q = single(8, EvenInZ, WaveIndex::new(1, 0, 1), 1.0);
    assert_eq!(State::inner_product(&a, &b).unwrap(), 0.0);

    let other = State::zeros(res(16));
    assert!(matches!(State::inner_product(&a, &other), Err(Error::ResolutionMismatch(_))));
}

#[test]
fn parseval_matches_quadrature() {
    let mut r = rng(8);
    let u = random_state(res(16), &mut r, false);
    let quad: f64 = u
        .fields()
        .iter()
        .map(|f| f.to_physical().iter().map(|x| x * x).sum::<f64>() / res(16).n_points() as f64)
        .sum();
    let ip = State::inner_product(&u, &u).unwrap();
    assert!((ip - quad).abs() <= 1e-10 * quad.max(1.0), "{ip} vs {quad}");
}

#[test]
fn derivative_parity_tags() {
    for sym in [EvenInZ, OddInZ] {
        let f = SpectralField::zeros(res(8), sym);
        assert_eq!(f.derivative(Axis::X).symmetry(), sym);
        assert_eq!(f.derivative(Axis::Y).symmetry(), sym);
        assert_eq!(f.derivative(Axis::Z).symmetry(), sym.flip());
    }
}

#[test]
fn operations_preserve_hermitian_symmetry() {
    let mut r = rng(4);
    let rs = res(16);
    let a = random_field(rs, EvenInZ, &mut r, false);
    let b = random_field(rs, OddInZ, &mut r, false);
    let outputs = [
        a.derivative(Axis::X),
        a.derivative(Axis::Z),
        b.derivative(Axis::Y),
        b.derivative(Axis::Z),
        SpectralField::dealiased_product(&a, &b).unwrap(),
        SpectralField::dealiased_product(&b, &b).unwrap(),
        SpectralField::to_spectral(&a.to_physical(), rs, EvenInZ).unwrap(),
        ZProfile::sine_series(&[0.3, -0.1]).mul_field(&a, true),
        a.add(&b.derivative(Axis::Z)),
    ];
    for f in &outputs {
        assert!(f.hermitian_residual() <= 1e-13, "{}", f.hermitian_residual());
    }
}

#[test]
fn profile_multiplication_matches_grid_product() {
    let rs = res(16);
    let mut r = rng(9);
    let f = random_field(rs, OddInZ, &mut r, true);
    let p = ZProfile::sine_series(&[0.5, 0.2]);
    let exact = p.mul_field(&f, false);
    assert_eq!(exact.symmetry(), EvenInZ);
    let pg = p.grid(16);
    let fg = f.to_physical();
    let prod: Vec<f64> = fg.iter().enumerate().map(|(j, v)| v * pg[j % 16]).collect();
    let g = exact.to_physical();
    assert!(max_diff(&g, &prod) < 1e-12);
}

#[test]
fn acoustic_and_gravity_operators_are_antisymmetric() {
    let mut r = rng(17);
    for n in [8, 16] {
        let u = random_state(res(n), &mut r, false);
        for lu in [apply_acoustic(&u), apply_gravity(&u)] {
            let ip = State::inner_product(&lu, &u).unwrap();
            assert!(ip.abs() <= 1e-12 * lu.norm() * u.norm(), "{ip}");
        }
    }
}

#[test]
fn stw_round_trip() {
    let mut r = rng(6);
    let u = random_state(res(8), &mut r, false);
    let mut buf = Vec::new();
    write_state(&mut buf, &u, serde_json::json!({"epsilon": 0.1})).unwrap();
    let (h, back) = read_state(&mut buf.as_slice()).unwrap();
    assert_eq!(h.params["epsilon"], 0.1);
    match back {
        StoredState::Full(v) => {
            for (a, b) in u.fields().iter().zip(v.fields()) {
                assert_eq!(*a, b);
            }
        }
        _ => panic!("expected full state"),
    }
}

use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn round_trip_property(seed in 0u64..1000, odd in any::<bool>()) {
        let sym = if odd { OddInZ } else { EvenInZ };
        let mut r = rng(seed);
        let f = random_field(res(8), sym, &mut r, false);
        let back = SpectralField::to_spectral(&f.to_physical(), res(8), sym).unwrap();
        prop_assert!(coeff_diff(&f, &back) <= 1e-12 * f.max_abs().max(1.0));
    }
}
