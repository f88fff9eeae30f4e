use super::{Eta, Quartic};
use crate::error::{Error, Result};
use crate::spectral_core::WaveIndex;

/// Frequency and eigenvector gaps between the perturbed modes and their
/// pure-acoustic and soundproof counterparts at one index.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GapReport {
    pub index: WaveIndex,
    pub eta: f64,
    /// `omega_aw - |k|`.
    pub aw_freq_gap: f64,
    /// `omega_sp - omega_gw`.
    pub gw_freq_gap: f64,
    /// `|U_aw - U_a|` with both `Q = 1`.
    pub aw_vec_gap: f64,
    /// `|U_gw - (eps p, U_sp)|` with `Q = eps p = 1`.
    pub gw_vec_gap: f64,
}

/// All differences are formed from cancellation-free expressions for the
/// squared-frequency gaps, so they stay accurate down to `eta ~ 1e-4`.
pub fn mode_gap_report(k: WaveIndex, eta: Eta) -> Result<GapReport> {
    if k.horizontal_zero() || k.kz == 0 {
        return Err(Error::InadmissibleMode(format!("gap report needs kh != 0 and kz != 0, got {k:?}")));
    }
    let q = Quartic::new(k, eta);
    let e = eta.value();
    let kz = k.kz_phys();
    let kmod = q.k2.sqrt();
    let khn = q.kh2.sqrt();

    let w_aw = q.omega_aw2().sqrt();
    let d_aw2 = q.aw_square_gap();
    let aw_freq_gap = d_aw2 / (w_aw + kmod);

    let w_gw = q.omega_gw2().sqrt();
    let w_sp2 = e * e * q.kh2 / q.k2;
    let w_sp = w_sp2.sqrt();
    let d_gw2 = q.gw_square_gap();
    let gw_freq_gap = d_gw2 / (w_sp + w_gw);

    // Acoustic: H = (eta/kz) X with X = -(kz^2 + d_aw2)/omega^2; the V and W
    // differences follow from 1/omega_aw - 1/|k| = -gap / (omega_aw |k|).
    let inv_diff = -aw_freq_gap / (w_aw * kmod);
    let h_aw = e / kz * (-(q.kz2 + d_aw2) / (w_aw * w_aw));
    let v_aw = khn * inv_diff;
    let w_aw_diff = kz * inv_diff + d_aw2 / (kz * w_aw);
    let aw_vec_gap = (h_aw * h_aw + v_aw * v_aw + w_aw_diff * w_aw_diff).sqrt();

    // Internal: H difference (eta/kz)(|kh|^2 (w_sp^2 - w_gw^2)/(w_gw^2 w_sp^2) - 1),
    // V difference |kh| (w_sp - w_gw)/(w_gw w_sp), W difference
    // (1/kz)(w_gw - |kh|^2 (w_sp - w_gw)/(w_gw w_sp)).
    let r = gw_freq_gap / (w_gw * w_sp);
    let h_gw = e / kz * (q.kh2 * d_gw2 / (w_gw * w_gw * w_sp2) - 1.0);
    let v_gw = khn * r;
    let w_gw_diff = (w_gw - q.kh2 * r) / kz;
    let gw_vec_gap = (h_gw * h_gw + v_gw * v_gw + w_gw_diff * w_gw_diff).sqrt();

    Ok(GapReport { index: k, eta: e, aw_freq_gap, gw_freq_gap, aw_vec_gap, gw_vec_gap })
}
