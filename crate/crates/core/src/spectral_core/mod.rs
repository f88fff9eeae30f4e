//! Fourier representation on the unit periodic box.
//!
//! Horizontal directions use complex exponentials, the vertical direction a
//! cosine series (`EvenInZ`) or a sine series (`OddInZ`). A field stores
//! `nx * ny * (nz/2 + 1)` coefficients `c(kx, ky, kz)` with
//! `f(x) = sum c e^{2 pi i (kx x + ky y)} cos(2 pi kz z)` (or `sin`).
//! Coefficients obey `c(-kx, -ky, kz) = conj c(kx, ky, kz)` so grids are real.
//! Nyquist planes are kept at zero.

mod fft;
mod field;
pub mod io;
mod profile;
mod state;

pub use field::{Axis, SpectralField};
pub use profile::ZProfile;
pub use state::{FieldSet, ReducedState, State};

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Vertical parity of a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum SymmetryClass {
    EvenInZ,
    OddInZ,
}

impl SymmetryClass {
    /// Parity of a pointwise product.
    pub fn product(self, other: SymmetryClass) -> SymmetryClass {
        if self == other {
            SymmetryClass::EvenInZ
        } else {
            SymmetryClass::OddInZ
        }
    }

    /// Parity after one z derivative.
    pub fn flip(self) -> SymmetryClass {
        match self {
            SymmetryClass::EvenInZ => SymmetryClass::OddInZ,
            SymmetryClass::OddInZ => SymmetryClass::EvenInZ,
        }
    }
}

/// Integer wave index; physical wavenumbers are `2 pi` times these.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct WaveIndex {
    pub kx: i64,
    pub ky: i64,
    pub kz: i64,
}

impl WaveIndex {
    pub fn new(kx: i64, ky: i64, kz: i64) -> Self {
        WaveIndex { kx, ky, kz }
    }

    /// Physical horizontal wavevector.
    pub fn kh(&self) -> [f64; 2] {
        [2.0 * PI * self.kx as f64, 2.0 * PI * self.ky as f64]
    }

    /// Physical horizontal wavenumber squared.
    pub fn kh2(&self) -> f64 {
        let [a, b] = self.kh();
        a * a + b * b
    }

    /// Physical vertical wavenumber.
    pub fn kz_phys(&self) -> f64 {
        2.0 * PI * self.kz as f64
    }

    /// Physical |k|^2.
    pub fn k2(&self) -> f64 {
        self.kh2() + self.kz_phys().powi(2)
    }

    pub fn is_zero(&self) -> bool {
        self.kx == 0 && self.ky == 0 && self.kz == 0
    }

    pub fn horizontal_zero(&self) -> bool {
        self.kx == 0 && self.ky == 0
    }

    /// Largest absolute integer component.
    pub fn max_norm(&self) -> i64 {
        self.kx.abs().max(self.ky.abs()).max(self.kz)
    }

    /// Index of the Hermitian partner `(-kx, -ky, kz)`.
    pub fn partner(&self) -> WaveIndex {
        WaveIndex::new(-self.kx, -self.ky, self.kz)
    }
}

/// Grid sizes. All three must be even; `nz` points span one full period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Resolution {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
}

impl Resolution {
    pub fn new(nx: usize, ny: usize, nz: usize) -> Result<Self> {
        for (name, n) in [("nx", nx), ("ny", ny), ("nz", nz)] {
            if n < 4 || n % 2 != 0 {
                return Err(Error::InvalidResolution(format!("{name} = {n} must be even and >= 4")));
            }
        }
        Ok(Resolution { nx, ny, nz })
    }

    pub fn cube(n: usize) -> Result<Self> {
        Self::new(n, n, n)
    }

    /// Number of stored vertical coefficients.
    pub fn nzc(&self) -> usize {
        self.nz / 2 + 1
    }

    pub fn n_coeffs(&self) -> usize {
        self.nx * self.ny * self.nzc()
    }

    pub fn n_points(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    fn signed(i: usize, n: usize) -> i64 {
        if 2 * i <= n {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// Wave index stored at flat position `flat`.
    pub fn wave_index(&self, flat: usize) -> WaveIndex {
        let nzc = self.nzc();
        let kz = flat % nzc;
        let iy = (flat / nzc) % self.ny;
        let ix = flat / (nzc * self.ny);
        WaveIndex::new(Self::signed(ix, self.nx), Self::signed(iy, self.ny), kz as i64)
    }

    /// Flat position of `k`, or `None` outside the stored range.
    pub fn flat_index(&self, k: WaveIndex) -> Option<usize> {
        let hx = self.nx as i64 / 2;
        let hy = self.ny as i64 / 2;
        if k.kx.abs() > hx || k.ky.abs() > hy || k.kz < 0 || k.kz as usize >= self.nzc() {
            return None;
        }
        let ix = k.kx.rem_euclid(self.nx as i64) as usize;
        let iy = k.ky.rem_euclid(self.ny as i64) as usize;
        Some((ix * self.ny + iy) * self.nzc() + k.kz as usize)
    }

    /// Whether `k` lies on a Nyquist plane (always zero in stored fields).
    pub fn is_nyquist(&self, k: WaveIndex) -> bool {
        2 * k.kx.unsigned_abs() as usize == self.nx
            || 2 * k.ky.unsigned_abs() as usize == self.ny
            || 2 * k.kz as usize == self.nz
    }

    /// Largest retained integer index per axis under the 2/3 rule.
    pub fn dealias_bounds(&self) -> (i64, i64, i64) {
        (((self.nx - 1) / 3) as i64, ((self.ny - 1) / 3) as i64, ((self.nz - 1) / 3) as i64)
    }

    /// Whether `k` survives 2/3-rule dealiasing.
    pub fn in_band(&self, k: WaveIndex) -> bool {
        let (bx, by, bz) = self.dealias_bounds();
        k.kx.abs() <= bx && k.ky.abs() <= by && k.kz <= bz
    }

    /// Flat mask of the 2/3-rule band.
    pub fn band_mask(&self) -> Vec<bool> {
        (0..self.n_coeffs()).map(|f| self.in_band(self.wave_index(f))).collect()
    }

    /// Grid coordinate along one axis.
    pub fn coord(&self, axis: Axis, j: usize) -> f64 {
        let n = match axis {
            Axis::X => self.nx,
            Axis::Y => self.ny,
            Axis::Z => self.nz,
        };
        j as f64 / n as f64
    }
}

pub(crate) fn check_same(a: Resolution, b: Resolution) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::ResolutionMismatch(format!("{a:?} vs {b:?}")))
    }
}
