#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stratwave::spectral_core::{ReducedState, Resolution, SpectralField, State, SymmetryClass, WaveIndex};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random real field; `band` restricts to the 2/3-rule band.
pub fn random_field(res: Resolution, sym: SymmetryClass, rng: &mut ChaCha8Rng, band: bool) -> SpectralField {
    SpectralField::from_fn(res, sym, |k| {
        let (a, b): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if band && !res.in_band(k) {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(a, b)
        }
    })
    .symmetrized()
}

pub fn random_state(res: Resolution, rng: &mut ChaCha8Rng, band: bool) -> State {
    use SymmetryClass::*;
    State {
        q: random_field(res, EvenInZ, rng, band),
        h: random_field(res, OddInZ, rng, band),
        v1: random_field(res, EvenInZ, rng, band),
        v2: random_field(res, EvenInZ, rng, band),
        w: random_field(res, OddInZ, rng, band),
    }
}

pub fn random_reduced(res: Resolution, rng: &mut ChaCha8Rng, band: bool) -> ReducedState {
    random_state(res, rng, band).reduce()
}

/// Direct evaluation of the cosine/sine series at one point.
pub fn eval_direct(f: &SpectralField, x: f64, y: f64, z: f64) -> f64 {
    let res = f.resolution();
    let mut acc = 0.0;
    for flat in 0..res.n_coeffs() {
        let k: WaveIndex = res.wave_index(flat);
        let c = f.coeffs()[flat];
        let ph = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (k.kx as f64 * x + k.ky as f64 * y));
        let zpart = match f.symmetry() {
            SymmetryClass::EvenInZ => (k.kz_phys() * z).cos(),
            SymmetryClass::OddInZ => (k.kz_phys() * z).sin(),
        };
        acc += (c * ph).re * zpart;
    }
    acc
}

pub fn res(n: usize) -> Resolution {
    Resolution::cube(n).unwrap()
}

/// Random real state with coefficients decaying like `(1 + |k|^2)^-1`,
/// restricted to `max(|kx|, |ky|, kz) <= kmax` and scaled to norm `amp`.
pub fn smooth_state(res: Resolution, rng: &mut ChaCha8Rng, amp: f64, kmax: i64) -> State {
    use stratwave::spectral_core::FieldSet;
    let mut s = State::zeros(res);
    for f in s.fields_mut() {
        let sym = f.symmetry();
        *f = SpectralField::from_fn(res, sym, |k| {
            let (a, b): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if k.max_norm() > kmax || !res.in_band(k) {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(a, b) / (1.0 + k.kx.pow(2) as f64 + k.ky.pow(2) as f64 + k.kz.pow(2) as f64)
            }
        })
        .symmetrized();
    }
    let n = s.norm();
    s.scale(amp / n);
    s
}
