use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{Resolution, SpectralField, SymmetryClass};

/// Real z-only function stored as a cosine or sine series in `2 pi m z`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZProfile {
    pub sym: SymmetryClass,
    /// `coeffs[m]` multiplies `cos(2 pi m z)` or `sin(2 pi m z)`; `coeffs[0]` is unused for sines.
    pub coeffs: Vec<f64>,
}

impl ZProfile {
    pub fn zero(sym: SymmetryClass) -> Self {
        ZProfile { sym, coeffs: vec![0.0] }
    }

    pub fn constant(c: f64) -> Self {
        ZProfile { sym: SymmetryClass::EvenInZ, coeffs: vec![c] }
    }

    /// Sine series from `[b1, b2, ...]`, i.e. `sum b_m sin(2 pi m z)`.
    pub fn sine_series(b: &[f64]) -> Self {
        let mut coeffs = vec![0.0];
        coeffs.extend_from_slice(b);
        ZProfile { sym: SymmetryClass::OddInZ, coeffs }
    }

    /// Samples an even periodic function and keeps its cosine coefficients up to `modes`.
    pub fn from_even_fn(f: impl Fn(f64) -> f64, modes: usize) -> Self {
        let n = (4 * modes + 4).next_power_of_two().max(64);
        let mut buf: Vec<Complex64> = (0..n).map(|j| Complex64::new(f(j as f64 / n as f64), 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let mut coeffs = Vec::with_capacity(modes + 1);
        for m in 0..=modes.min(n / 2 - 1) {
            let c = buf[m].re / n as f64;
            coeffs.push(if m == 0 { c } else { 2.0 * c });
        }
        ZProfile { sym: SymmetryClass::EvenInZ, coeffs }
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(m, c)| {
                let a = 2.0 * PI * m as f64 * z;
                match self.sym {
                    SymmetryClass::EvenInZ => c * a.cos(),
                    SymmetryClass::OddInZ => c * a.sin(),
                }
            })
            .sum()
    }

    /// Values at the `nz` lattice points.
    pub fn grid(&self, nz: usize) -> Vec<f64> {
        (0..nz).map(|j| self.eval(j as f64 / nz as f64)).collect()
    }

    pub fn derivative(&self) -> ZProfile {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(m, c)| {
                let k = 2.0 * PI * m as f64;
                match self.sym {
                    SymmetryClass::EvenInZ => -k * c,
                    SymmetryClass::OddInZ => k * c,
                }
            })
            .collect();
        ZProfile { sym: self.sym.flip(), coeffs }
    }

    /// Primitive `int_0^z` of a sine series, which is an even periodic profile.
    pub fn primitive_from_zero(&self) -> ZProfile {
        assert_eq!(self.sym, SymmetryClass::OddInZ, "primitive only defined for sine series");
        let mut coeffs = vec![0.0; self.coeffs.len()];
        for (m, &b) in self.coeffs.iter().enumerate().skip(1) {
            let k = 2.0 * PI * m as f64;
            coeffs[0] += b / k;
            coeffs[m] = -b / k;
        }
        ZProfile { sym: SymmetryClass::EvenInZ, coeffs }
    }

    pub fn scaled(&self, s: f64) -> ZProfile {
        ZProfile { sym: self.sym, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    /// Sum of two profiles of equal parity.
    pub fn plus(&self, other: &ZProfile) -> ZProfile {
        assert_eq!(self.sym, other.sym);
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |v: &Vec<f64>, i: usize| v.get(i).copied().unwrap_or(0.0);
        ZProfile { sym: self.sym, coeffs: (0..n).map(|i| get(&self.coeffs, i) + get(&other.coeffs, i)).collect() }
    }

    /// Exact product of two profiles.
    pub fn times(&self, other: &ZProfile) -> ZProfile {
        let sym = self.sym.product(other.sym);
        let n = self.coeffs.len() + other.coeffs.len();
        let mut out = vec![0.0; n];
        for (k, &a) in self.coeffs.iter().enumerate() {
            for (m, &b) in other.coeffs.iter().enumerate() {
                for (idx, w) in product_terms(self.sym, other.sym, k as i64, m as i64) {
                    out[idx] += 0.5 * w * a * b;
                }
            }
        }
        let mut p = ZProfile { sym, coeffs: out };
        p.fix_zero_row();
        p
    }

    fn fix_zero_row(&mut self) {
        if self.sym == SymmetryClass::OddInZ {
            self.coeffs[0] = 0.0;
        }
    }

    /// `1 - self` for an even profile.
    pub fn one_minus(&self) -> ZProfile {
        let mut p = self.scaled(-1.0);
        p.coeffs[0] += 1.0;
        p
    }

    /// Exact product with a 3-D field, restricted to the 2/3 band when `dealias` is set.
    pub fn mul_field(&self, f: &SpectralField, dealias: bool) -> SpectralField {
        let res: Resolution = f.resolution();
        let nzc = res.nzc();
        let sym = self.sym.product(f.symmetry());
        let mut out = SpectralField::zeros(res, sym);
        let (_, _, bz) = res.dealias_bounds();
        let kz_max = if dealias { bz as usize } else { nzc - 2 };
        let src = f.coeffs();
        let mask = if dealias { Some(res.band_mask()) } else { None };
        {
            let dst = out.coeffs_mut();
            for ixy in 0..res.nx * res.ny {
                let row = &src[ixy * nzc..(ixy + 1) * nzc];
                if row.iter().all(|c| c.re == 0.0 && c.im == 0.0) {
                    continue;
                }
                for (k, c) in row.iter().enumerate() {
                    if c.re == 0.0 && c.im == 0.0 {
                        continue;
                    }
                    if let Some(m) = &mask {
                        if !m[ixy * nzc + k] {
                            continue;
                        }
                    }
                    for (m, &p) in self.coeffs.iter().enumerate() {
                        if p == 0.0 {
                            continue;
                        }
                        for (idx, w) in product_terms(f.symmetry(), self.sym, k as i64, m as i64) {
                            if idx <= kz_max {
                                dst[ixy * nzc + idx] += c * (0.5 * w * p);
                            }
                        }
                    }
                }
            }
            if sym == SymmetryClass::OddInZ {
                for ixy in 0..res.nx * res.ny {
                    dst[ixy * nzc] = Complex64::new(0.0, 0.0);
                }
            }
        }
        if let Some(m) = &mask {
            out.apply_mask(m);
        }
        out
    }
}

/// Output indices and signs of `basis_a(k) * basis_b(m) = 0.5 * sum w * basis_out(idx)`.
fn product_terms(a: SymmetryClass, b: SymmetryClass, k: i64, m: i64) -> [(usize, f64); 2] {
    use SymmetryClass::*;
    let d = k - m;
    let s = (k + m) as usize;
    let ad = d.unsigned_abs() as usize;
    let sgn = if d >= 0 { 1.0 } else { -1.0 };
    match (a, b) {
        // cos k cos m = (cos(k-m) + cos(k+m)) / 2
        (EvenInZ, EvenInZ) => [(ad, 1.0), (s, 1.0)],
        // sin k sin m = (cos(k-m) - cos(k+m)) / 2
        (OddInZ, OddInZ) => [(ad, 1.0), (s, -1.0)],
        // sin k cos m = (sin(k+m) + sin(k-m)) / 2
        (OddInZ, EvenInZ) => [(s, 1.0), (ad, sgn)],
        // cos k sin m = (sin(k+m) - sin(k-m)) / 2
        (EvenInZ, OddInZ) => [(s, 1.0), (ad, -sgn)],
    }
}
