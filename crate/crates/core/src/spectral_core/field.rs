use std::f64::consts::PI;

use num_complex::Complex64;

use super::fft;
use super::{check_same, Resolution, SymmetryClass, WaveIndex};
use crate::error::{Error, Result};

/// Differentiation axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Cosine/sine coefficient array on the periodic box.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    res: Resolution,
    sym: SymmetryClass,
    coeffs: Vec<Complex64>,
}

const PARITY_TOL: f64 = 1e-10;

impl SpectralField {
    pub fn zeros(res: Resolution, sym: SymmetryClass) -> Self {
        SpectralField { res, sym, coeffs: vec![Complex64::new(0.0, 0.0); res.n_coeffs()] }
    }

    /// Builds a field from a per-index rule. Nyquist planes and the `kz = 0`
    /// row of odd fields are forced to zero.
    ///
    /// The rule is responsible for Hermitian symmetry; see [`SpectralField::symmetrized`].
    pub fn from_fn(res: Resolution, sym: SymmetryClass, mut f: impl FnMut(WaveIndex) -> Complex64) -> Self {
        let mut out = Self::zeros(res, sym);
        for flat in 0..res.n_coeffs() {
            let k = res.wave_index(flat);
            if res.is_nyquist(k) || (sym == SymmetryClass::OddInZ && k.kz == 0) {
                continue;
            }
            out.coeffs[flat] = f(k);
        }
        out
    }

    /// Wraps raw coefficients in storage order.
    pub fn from_coeffs(res: Resolution, sym: SymmetryClass, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != res.n_coeffs() {
            return Err(Error::ResolutionMismatch(format!("{} coefficients for {:?}", coeffs.len(), res)));
        }
        Ok(Self::from_fn(res, sym, |k| coeffs[res.flat_index(k).unwrap()]))
    }

    pub fn resolution(&self) -> Resolution {
        self.res
    }

    pub fn symmetry(&self) -> SymmetryClass {
        self.sym
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient at `k` (zero outside the stored range).
    pub fn coeff(&self, k: WaveIndex) -> Complex64 {
        self.res.flat_index(k).map(|f| self.coeffs[f]).unwrap_or_default()
    }

    /// Pointwise values on the `nx * ny * nz` lattice, `z` fastest.
    pub fn to_physical(&self) -> Vec<f64> {
        fft::to_grid(self.res, (self.sym, &self.coeffs), None, None).0
    }

    /// Physical values of two fields with a single complex transform.
    pub fn to_physical_pair(a: &SpectralField, b: &SpectralField) -> Result<(Vec<f64>, Vec<f64>)> {
        check_same(a.res, b.res)?;
        let (ga, gb) = fft::to_grid(a.res, (a.sym, &a.coeffs), Some((b.sym, &b.coeffs)), None);
        Ok((ga, gb.unwrap()))
    }

    /// Physical values after 2/3-rule masking, for use in products.
    pub(crate) fn dealiased_grids(fields: &[&SpectralField]) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(fields.len());
        if fields.is_empty() {
            return out;
        }
        let res = fields[0].res;
        let mask = res.band_mask();
        for pair in fields.chunks(2) {
            let b = pair.get(1).map(|f| (f.sym, f.coeffs.as_slice()));
            let (ga, gb) = fft::to_grid(res, (pair[0].sym, &pair[0].coeffs), b, Some(&mask));
            out.push(ga);
            if let Some(g) = gb {
                out.push(g);
            }
        }
        out
    }

    /// Coefficients of a real grid.
    pub fn to_spectral(grid: &[f64], res: Resolution, sym: SymmetryClass) -> Result<Self> {
        if grid.len() != res.n_points() {
            return Err(Error::ResolutionMismatch(format!("grid of {} points for {:?}", grid.len(), res)));
        }
        let scale = grid.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let (e, _) = fft::from_grid(res, (sym, grid), None);
        if e.parity_residual > PARITY_TOL * scale {
            return Err(Error::ParityViolation { residual: e.parity_residual });
        }
        Ok(SpectralField { res, sym, coeffs: e.coeffs })
    }

    /// Forward transforms of grids whose parity is known by construction, with
    /// the output restricted to the 2/3 band.
    pub(crate) fn from_grids_dealiased(res: Resolution, grids: &[(SymmetryClass, &[f64])]) -> Vec<SpectralField> {
        let mask = res.band_mask();
        let mut out = Vec::with_capacity(grids.len());
        for pair in grids.chunks(2) {
            let (ea, eb) = fft::from_grid(res, pair[0], pair.get(1).copied());
            let mut fa = SpectralField { res, sym: pair[0].0, coeffs: ea.coeffs };
            fa.apply_mask(&mask);
            out.push(fa);
            if let Some(eb) = eb {
                let mut fb = SpectralField { res, sym: pair[1].0, coeffs: eb.coeffs };
                fb.apply_mask(&mask);
                out.push(fb);
            }
        }
        out
    }

    pub(crate) fn apply_mask(&mut self, mask: &[bool]) {
        for (c, &keep) in self.coeffs.iter_mut().zip(mask) {
            if !keep {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Copy with everything outside the 2/3 band removed.
    pub fn dealiased(&self) -> Self {
        let mut out = self.clone();
        out.apply_mask(&self.res.band_mask());
        out
    }

    /// Spectral derivative along one axis.
    pub fn derivative(&self, axis: Axis) -> SpectralField {
        let res = self.res;
        let sym = match axis {
            Axis::Z => self.sym.flip(),
            _ => self.sym,
        };
        let mut out = SpectralField::zeros(res, sym);
        for flat in 0..res.n_coeffs() {
            let c = self.coeffs[flat];
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            let k = res.wave_index(flat);
            out.coeffs[flat] = match axis {
                Axis::X => c * Complex64::new(0.0, 2.0 * PI * k.kx as f64),
                Axis::Y => c * Complex64::new(0.0, 2.0 * PI * k.ky as f64),
                Axis::Z => match self.sym {
                    SymmetryClass::EvenInZ => c * (-2.0 * PI * k.kz as f64),
                    SymmetryClass::OddInZ => c * (2.0 * PI * k.kz as f64),
                },
            };
        }
        out
    }

    /// Multiplies each coefficient by a real function of its index (parity kept).
    pub fn map_symbol(&self, mut f: impl FnMut(WaveIndex) -> f64) -> SpectralField {
        let mut out = self.clone();
        for flat in 0..self.res.n_coeffs() {
            if out.coeffs[flat] != Complex64::new(0.0, 0.0) {
                out.coeffs[flat] *= f(self.res.wave_index(flat));
            }
        }
        out
    }

    /// Pointwise product with 2/3-rule dealiasing of inputs and output.
    pub fn dealiased_product(a: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
        check_same(a.res, b.res)?;
        let g = Self::dealiased_grids(&[a, b]);
        let prod: Vec<f64> = g[0].iter().zip(&g[1]).map(|(x, y)| x * y).collect();
        let sym = a.sym.product(b.sym);
        Ok(Self::from_grids_dealiased(a.res, &[(sym, &prod)]).remove(0))
    }

    /// L2 inner product over the unit box.
    pub fn inner(&self, other: &SpectralField) -> Result<f64> {
        check_same(self.res, other.res)?;
        let nzc = self.res.nzc();
        let mut acc = 0.0;
        for (flat, (a, b)) in self.coeffs.iter().zip(&other.coeffs).enumerate() {
            let w = if flat % nzc == 0 { 1.0 } else { 0.5 };
            acc += w * (a.re * b.re + a.im * b.im);
        }
        Ok(acc)
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).unwrap().max(0.0).sqrt()
    }

    /// Mean over the box (the `(0,0,0)` cosine coefficient).
    pub fn mean(&self) -> f64 {
        match self.sym {
            SymmetryClass::EvenInZ => self.coeffs[0].re,
            SymmetryClass::OddInZ => 0.0,
        }
    }

    /// Largest violation of `c(-k) = conj c(k)`.
    pub fn hermitian_residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        for flat in 0..self.res.n_coeffs() {
            let k = self.res.wave_index(flat);
            if let Some(p) = self.res.flat_index(k.partner()) {
                r = r.max((self.coeffs[flat] - self.coeffs[p].conj()).norm());
            }
        }
        r
    }

    /// Hermitian part `(f + conj f(-k)) / 2`.
    pub fn symmetrized(&self) -> SpectralField {
        let mut out = self.clone();
        for flat in 0..self.res.n_coeffs() {
            let k = self.res.wave_index(flat);
            if let Some(p) = self.res.flat_index(k.partner()) {
                out.coeffs[flat] = (self.coeffs[flat] + self.coeffs[p].conj()) * 0.5;
            }
        }
        out
    }

    /// Zeroes modes with `max(|kx|,|ky|) > k` or `kz > k`.
    pub fn truncated(&self, k: i64) -> SpectralField {
        let mut out = self.clone();
        for flat in 0..self.res.n_coeffs() {
            let w = self.res.wave_index(flat);
            if w.kx.abs() > k || w.ky.abs() > k || w.kz > k {
                out.coeffs[flat] = Complex64::new(0.0, 0.0);
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> SpectralField {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    pub fn scale(&mut self, s: f64) {
        for c in self.coeffs.iter_mut() {
            *c *= s;
        }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &SpectralField) {
        debug_assert_eq!(self.sym, other.sym);
        debug_assert_eq!(self.res, other.res);
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *c += o * a;
        }
    }

    pub fn add(&self, other: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }
}
