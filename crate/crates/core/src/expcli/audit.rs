use std::io::Write;

use serde::Serialize;

use super::table::{fit_slope, SlopeFit};
use crate::error::Result;
use crate::spectral_core::WaveIndex;
use crate::wave_modes::{acoustic_branch_frequency, fast_frequencies, mode_gap_report, Eta};

/// Relative slack on the pinching bounds, for roots that sit on a bound
/// exactly (for example `omega_aw^2 = |k|^2 + eta^2` at `kh = 0`).
const PINCH_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuditRow {
    pub index: WaveIndex,
    pub eta: f64,
    pub omega_aw: f64,
    /// NaN where the internal branch is absent.
    pub omega_gw: f64,
    /// `omega_aw^2 - |k|^2`, to be in `[0, eta^2]`.
    pub aw_square_gap: f64,
    pub aw_pinched: bool,
    pub gw_pinched: bool,
    /// Relative residuals of the sum and product of the squared roots.
    pub vieta_sum: f64,
    pub vieta_product: f64,
}

impl AuditRow {
    pub fn passes(&self) -> bool {
        self.aw_pinched && self.gw_pinched
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapAudit {
    pub rows: Vec<AuditRow>,
    /// Slopes at index (1,0,1): acoustic and internal frequency gaps, then
    /// acoustic and internal eigenvector gaps.
    pub slopes: [SlopeFit; 4],
    pub expected_slopes: [f64; 4],
    pub slope_tolerance: f64,
}

impl GapAudit {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.passes()).count()
    }

    pub fn slopes_pass(&self) -> bool {
        self.slopes.iter().zip(&self.expected_slopes).all(|(f, e)| (f.slope - e).abs() <= self.slope_tolerance)
    }

    pub fn passes(&self) -> bool {
        self.failures() == 0 && self.slopes_pass()
    }

    /// Per-index table followed by `#` lines with the slope fits.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "kx,ky,kz,eta,omega_aw,omega_gw,aw_square_gap,aw_pinched,gw_pinched,vieta_sum,vieta_product")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{:.6e},{:.15e},{:.15e},{:.6e},{},{},{:.3e},{:.3e}",
                r.index.kx,
                r.index.ky,
                r.index.kz,
                r.eta,
                r.omega_aw,
                r.omega_gw,
                r.aw_square_gap,
                r.aw_pinched as u8,
                r.gw_pinched as u8,
                r.vieta_sum,
                r.vieta_product
            )?;
        }
        let names = ["aw_freq_gap", "gw_freq_gap", "aw_vec_gap", "gw_vec_gap"];
        for ((n, f), e) in names.iter().zip(&self.slopes).zip(&self.expected_slopes) {
            writeln!(out, "# slope {n} at (1,0,1): {:.6} (expected {e} +- {})", f.slope, self.slope_tolerance)?;
        }
        writeln!(out, "# failures={} slopes_pass={}", self.failures(), self.slopes_pass())?;
        Ok(())
    }
}

fn audit_row(k: WaveIndex, eta: Eta) -> Result<AuditRow> {
    let e = eta.value();
    let k2 = k.k2();
    let omega_aw = acoustic_branch_frequency(k, eta)?;
    let aw_square_gap = omega_aw * omega_aw - k2;
    let slack = PINCH_SLACK * k2;
    // At kz = 0 the block is purely acoustic and the gap vanishes.
    let aw_pinched = aw_square_gap >= -slack && aw_square_gap <= e * e + slack;
    let (omega_gw, gw_pinched, vieta_sum, vieta_product) = match fast_frequencies(k, eta) {
        Ok((gw, aw)) => {
            let sum = ((aw * aw + gw * gw) - (k2 + e * e)).abs() / (k2 + e * e);
            let prod_ref = e * e * k.kh2();
            let prod = if prod_ref > 0.0 { ((aw * gw).powi(2) - prod_ref).abs() / prod_ref } else { 0.0 };
            (gw, gw >= 0.0 && gw <= e * (1.0 + PINCH_SLACK), sum, prod)
        }
        Err(_) => (f64::NAN, true, 0.0, 0.0),
    };
    Ok(AuditRow { index: k, eta: e, omega_aw, omega_gw, aw_square_gap, aw_pinched, gw_pinched, vieta_sum, vieta_product })
}

/// Pinching bounds and Vieta residuals for every nonzero index with
/// `max(|kx|, |ky|, kz) <= range` and every `eta`, plus log-log gap slopes
/// at (1,0,1) over `eta = 10^-1, 10^-1.5, ..., 10^-3`.
pub fn experiment_eigen_audit(range: i64, etas: &[f64]) -> Result<GapAudit> {
    let mut rows = Vec::new();
    for &e in etas {
        let eta = Eta::new(e)?;
        for kz in 0..=range {
            for kx in -range..=range {
                for ky in -range..=range {
                    let k = WaveIndex::new(kx, ky, kz);
                    if !k.is_zero() {
                        rows.push(audit_row(k, eta)?);
                    }
                }
            }
        }
    }
    let grid: Vec<f64> = (0..5).map(|i| 10f64.powf(-1.0 - 0.5 * i as f64)).collect();
    let mut cols = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    for &e in &grid {
        let g = mode_gap_report(WaveIndex::new(1, 0, 1), Eta::new(e)?)?;
        for (c, v) in cols.iter_mut().zip([g.aw_freq_gap, g.gw_freq_gap.abs(), g.aw_vec_gap, g.gw_vec_gap]) {
            c.push(v);
        }
    }
    let slopes = [
        fit_slope(&grid, &cols[0])?,
        fit_slope(&grid, &cols[1])?,
        fit_slope(&grid, &cols[2])?,
        fit_slope(&grid, &cols[3])?,
    ];
    Ok(GapAudit { rows, slopes, expected_slopes: [2.0, 3.0, 1.0, 1.0], slope_tolerance: 0.05 })
}
