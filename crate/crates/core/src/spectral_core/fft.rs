//! Cached 3-D complex FFT plans and the cosine/sine <-> periodic spectrum maps.
//!
//! A field stores `nz/2 + 1` cosine or sine coefficients per horizontal mode.
//! Transforms extend them to the full periodic `nz`-point spectrum and run one
//! complex 3-D FFT. Two real fields are packed into one complex transform.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{Resolution, SymmetryClass};

pub(crate) struct Plans {
    res: Resolution,
    x: [Arc<dyn Fft<f64>>; 2],
    y: [Arc<dyn Fft<f64>>; 2],
    z: [Arc<dyn Fft<f64>>; 2],
}

fn cache() -> &'static Mutex<HashMap<Resolution, Arc<Plans>>> {
    static CACHE: OnceLock<Mutex<HashMap<Resolution, Arc<Plans>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

pub(crate) fn plans(res: Resolution) -> Arc<Plans> {
    let mut map = cache().lock().expect("fft plan cache poisoned");
    map.entry(res)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            let pair = |p: &mut FftPlanner<f64>, n: usize| [p.plan_fft_forward(n), p.plan_fft_inverse(n)];
            Arc::new(Plans {
                res,
                x: pair(&mut planner, res.nx),
                y: pair(&mut planner, res.ny),
                z: pair(&mut planner, res.nz),
            })
        })
        .clone()
}

impl Plans {
    /// In-place unnormalized 3-D transform of a `[ix][iy][iz]` array.
    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let d = inverse as usize;
        let (nx, ny, nz) = (self.res.nx, self.res.ny, self.res.nz);
        self.z[d].process(data);

        let mut slab = vec![Complex64::new(0.0, 0.0); ny * nz];
        for ix in 0..nx {
            let base = ix * ny * nz;
            for iy in 0..ny {
                for iz in 0..nz {
                    slab[iz * ny + iy] = data[base + iy * nz + iz];
                }
            }
            self.y[d].process(&mut slab);
            for iy in 0..ny {
                for iz in 0..nz {
                    data[base + iy * nz + iz] = slab[iz * ny + iy];
                }
            }
        }

        let plane = ny * nz;
        let mut cols = vec![Complex64::new(0.0, 0.0); nx * plane];
        for ix in 0..nx {
            for j in 0..plane {
                cols[j * nx + ix] = data[ix * plane + j];
            }
        }
        self.x[d].process(&mut cols);
        for ix in 0..nx {
            for j in 0..plane {
                data[ix * plane + j] = cols[j * nx + ix];
            }
        }
    }
}

/// Writes the periodic spectrum of one cosine/sine field into `buf`, scaled by `factor`.
fn scatter(res: Resolution, sym: SymmetryClass, coeffs: &[Complex64], factor: Complex64, buf: &mut [Complex64], mask: Option<&[bool]>) {
    let nz = res.nz;
    let nzc = res.nzc();
    let half = Complex64::new(0.5, 0.0);
    for ixy in 0..res.nx * res.ny {
        let src = &coeffs[ixy * nzc..(ixy + 1) * nzc];
        let dst = &mut buf[ixy * nz..(ixy + 1) * nz];
        for kz in 0..nzc {
            if let Some(m) = mask {
                if !m[ixy * nzc + kz] {
                    continue;
                }
            }
            let c = src[kz] * factor;
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            match sym {
                SymmetryClass::EvenInZ => {
                    if kz == 0 || 2 * kz == nz {
                        dst[kz] += c;
                    } else {
                        dst[kz] += c * half;
                        dst[nz - kz] += c * half;
                    }
                }
                SymmetryClass::OddInZ => {
                    if kz == 0 || 2 * kz == nz {
                        continue;
                    }
                    // sin(kz z) = (e^{i kz z} - e^{-i kz z}) / (2i)
                    let a = Complex64::new(0.0, -0.5) * c;
                    dst[kz] += a;
                    dst[nz - kz] -= a;
                }
            }
        }
    }
}

/// Inverse transform of one or two fields to real grid values.
pub(crate) fn to_grid(
    res: Resolution,
    a: (SymmetryClass, &[Complex64]),
    b: Option<(SymmetryClass, &[Complex64])>,
    mask: Option<&[bool]>,
) -> (Vec<f64>, Option<Vec<f64>>) {
    let p = plans(res);
    let mut buf = vec![Complex64::new(0.0, 0.0); res.n_points()];
    scatter(res, a.0, a.1, Complex64::new(1.0, 0.0), &mut buf, mask);
    if let Some((sb, cb)) = b {
        scatter(res, sb, cb, Complex64::new(0.0, 1.0), &mut buf, mask);
    }
    p.transform(&mut buf, true);
    let ga = buf.iter().map(|z| z.re).collect();
    let gb = b.map(|_| buf.iter().map(|z| z.im).collect());
    (ga, gb)
}

/// Result of a forward transform: coefficients plus the z-parity residual.
pub(crate) struct Extracted {
    pub coeffs: Vec<Complex64>,
    pub parity_residual: f64,
}

/// Forward transform of one or two real grids.
///
/// The real part of each packed spectrum is recovered as `(Z_k + conj Z_{-k}) / 2`,
/// which makes the Hermitian symmetry of the result exact in floating point.
/// Nyquist planes are dropped.
pub(crate) fn from_grid(
    res: Resolution,
    a: (SymmetryClass, &[f64]),
    b: Option<(SymmetryClass, &[f64])>,
) -> (Extracted, Option<Extracted>) {
    let p = plans(res);
    let n = res.n_points();
    let mut buf: Vec<Complex64> = match b {
        Some((_, gb)) => a.1.iter().zip(gb).map(|(&x, &y)| Complex64::new(x, y)).collect(),
        None => a.1.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
    };
    p.transform(&mut buf, false);
    let scale = 1.0 / n as f64;
    for z in buf.iter_mut() {
        *z *= scale;
    }
    let ea = gather(res, a.0, &buf, false);
    let eb = b.map(|(sb, _)| gather(res, sb, &buf, true));
    (ea, eb)
}

fn gather(res: Resolution, sym: SymmetryClass, z: &[Complex64], imag_part: bool) -> Extracted {
    let (nx, ny, nz) = (res.nx, res.ny, res.nz);
    let nzc = res.nzc();
    let full = |ix: usize, iy: usize, iz: usize| -> Complex64 {
        let zk = z[(ix * ny + iy) * nz + iz];
        let zm = z[(((nx - ix) % nx) * ny + (ny - iy) % ny) * nz + (nz - iz) % nz].conj();
        if imag_part {
            (zk - zm) * Complex64::new(0.0, -0.5)
        } else {
            (zk + zm) * 0.5
        }
    };
    let mut coeffs = vec![Complex64::new(0.0, 0.0); nx * ny * nzc];
    let mut residual: f64 = 0.0;
    for ix in 0..nx {
        for iy in 0..ny {
            let nyq_h = 2 * ix == nx || 2 * iy == ny;
            let out = &mut coeffs[(ix * ny + iy) * nzc..(ix * ny + iy + 1) * nzc];
            for kz in 0..nzc {
                let fp = full(ix, iy, kz);
                let fm = full(ix, iy, (nz - kz) % nz);
                let edge = kz == 0 || 2 * kz == nz;
                let c = match sym {
                    SymmetryClass::EvenInZ => {
                        if !edge {
                            residual = residual.max((fp - fm).norm());
                        }
                        if kz == 0 {
                            fp
                        } else {
                            fp + fm
                        }
                    }
                    SymmetryClass::OddInZ => {
                        if edge {
                            residual = residual.max(fp.norm());
                            Complex64::new(0.0, 0.0)
                        } else {
                            residual = residual.max((fp + fm).norm());
                            (fp - fm) * Complex64::new(0.0, 1.0)
                        }
                    }
                };
                out[kz] = if nyq_h || 2 * kz == nz { Complex64::new(0.0, 0.0) } else { c };
            }
        }
    }
    Extracted { coeffs, parity_residual: residual }
}
