//! Eigenmode algebra of the fast linear operators.
//!
//! Per wave index the perturbed operator `L_a + eta L_g` acts on the five
//! coefficients `(Q, H, V1, V2, W)`. Its eigenvectors split into mean flows
//! (frequency 0), internal waves (`|omega| <= eta`) and acoustic waves
//! (`|omega| >= |k|`). Eigen-relations are written `L U = i omega U`, so the
//! propagator phase is `exp(-i omega t)`.

mod basis;
mod gaps;
mod operators;

pub use basis::{
    apply_to_reduced, apply_to_state, decompose, project, reconstruct, Branch, ModalDecomposition, PerturbedBasis, PropagatorTable,
    SoundproofBasis, SLOTS,
};
pub use gaps::{mode_gap_report, GapReport};
pub use operators::{apply_acoustic, apply_gravity, apply_perturbed, apply_soundproof, leray_project, leray_project_reduced, reduce_dimension, truncate};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral_core::WaveIndex;

/// Coupling ratio `eta = eps^(1 - nu)` between the gravity and acoustic operators.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Eta(f64);

impl Eta {
    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&value) {
            return Err(Error::DomainError(format!("eta = {value} outside [0, 1)")));
        }
        Ok(Eta(value))
    }

    pub fn from_eps_nu(epsilon: f64, nu: f64) -> Result<Self> {
        Self::new(epsilon.powf(1.0 - nu))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeKind {
    MeanFlow(u8),
    InternalWave(Sign),
    AcousticWave(Sign),
}

impl ModeKind {
    pub fn branch(&self) -> Branch {
        match self {
            ModeKind::MeanFlow(_) => Branch::Mf,
            ModeKind::InternalWave(_) => Branch::Gw,
            ModeKind::AcousticWave(_) => Branch::Aw,
        }
    }

    pub fn label(&self) -> String {
        match self {
            ModeKind::MeanFlow(j) => format!("mf{j}"),
            ModeKind::InternalWave(s) => format!("gw{}", if *s == Sign::Plus { "+" } else { "-" }),
            ModeKind::AcousticWave(s) => format!("aw{}", if *s == Sign::Plus { "+" } else { "-" }),
        }
    }
}

/// Which operator the eigenvector belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Flavor {
    /// `L_a + eta L_g` on `(Q, H, V, W)`.
    Perturbed,
    /// `eta (-W, P_sigma(0, 0, H))` on divergence-free `(H, V, W)`.
    Soundproof,
    /// `L_a` alone.
    PureAcoustic,
}

/// One eigenmode at a single wave index.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub kind: ModeKind,
    pub flavor: Flavor,
    pub index: WaveIndex,
    pub eta: Eta,
    /// Signed frequency: the mode evolves as `exp(-i omega t)`.
    pub omega: f64,
    /// Coefficients `(Q, H, V1, V2, W)`; `Q = 0` for the soundproof flavor.
    pub vector: [Complex64; 5],
    /// `eps * p` coefficient carried by soundproof waves and the vertical mean flow.
    pub pressure_aux: Option<Complex64>,
}

impl EigenPair {
    pub fn norm2(&self) -> f64 {
        self.vector.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// `2 pi |k|`.
pub fn acoustic_frequency(k: WaveIndex) -> Result<f64> {
    if k.is_zero() {
        return Err(Error::ZeroMode);
    }
    Ok(k.k2().sqrt())
}

/// Intermediate quantities of the dispersion quartic at one index.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Quartic {
    pub kh2: f64,
    pub kz2: f64,
    pub k2: f64,
    pub eta2: f64,
    /// `(|k|^2 + eta^2) + sqrt_disc` with `sqrt_disc = sqrt((|k|^2 + eta^2)^2 - 4 eta^2 |kh|^2)`.
    pub big: f64,
    /// `eta^2 + sqrt_disc - |k|^2`, evaluated without cancellation.
    pub gap: f64,
}

impl Quartic {
    pub fn new(k: WaveIndex, eta: Eta) -> Self {
        let kh2 = k.kh2();
        let kz2 = k.kz_phys().powi(2);
        let k2 = kh2 + kz2;
        let eta2 = eta.0 * eta.0;
        // (k2 + eta2)^2 - 4 eta2 kh2 = (k2 - eta2)^2 + 4 eta2 kz2
        let disc = (k2 - eta2).powi(2) + 4.0 * eta2 * kz2;
        let sqrt_disc = disc.sqrt();
        let big = k2 + eta2 + sqrt_disc;
        let gap = eta2 * (sqrt_disc + 3.0 * kz2 - kh2 + eta2) / (sqrt_disc + k2);
        Quartic { kh2, kz2, k2, eta2, big, gap }
    }

    pub fn omega_aw2(&self) -> f64 {
        0.5 * self.big
    }

    pub fn omega_gw2(&self) -> f64 {
        2.0 * self.eta2 * self.kh2 / self.big
    }

    /// `omega_aw^2 - |k|^2`.
    pub fn aw_square_gap(&self) -> f64 {
        0.5 * self.gap
    }

    /// `omega_sp^2 - omega_gw^2`.
    pub fn gw_square_gap(&self) -> f64 {
        self.eta2 * self.kh2 * self.gap / (self.k2 * self.big)
    }
}

/// Roots `(omega_gw, omega_aw)` of `w^4 - (|k|^2 + eta^2) w^2 + eta^2 |kh|^2 = 0`.
pub fn fast_frequencies(k: WaveIndex, eta: Eta) -> Result<(f64, f64)> {
    if k.is_zero() {
        return Err(Error::ZeroMode);
    }
    if k.horizontal_zero() || k.kz == 0 {
        return Err(Error::DomainError(format!("internal-wave branch undefined at {k:?}")));
    }
    let q = Quartic::new(k, eta);
    Ok((q.omega_gw2().sqrt(), q.omega_aw2().sqrt()))
}

/// Perturbed acoustic frequency alone; defined for every nonzero index.
pub fn acoustic_branch_frequency(k: WaveIndex, eta: Eta) -> Result<f64> {
    if k.is_zero() {
        return Err(Error::ZeroMode);
    }
    if k.kz == 0 {
        // H and W vanish at kz = 0 and the block reduces to pure acoustics.
        return Ok(k.kh2().sqrt());
    }
    Ok(Quartic::new(k, eta).omega_aw2().sqrt())
}

/// `eta |kh| / |k|`.
pub fn soundproof_gw_frequency(k: WaveIndex, eta: Eta) -> Result<f64> {
    if k.horizontal_zero() || k.kz == 0 {
        return Err(Error::DomainError(format!("soundproof internal wave undefined at {k:?}")));
    }
    Ok(eta.0 * (k.kh2() / k.k2()).sqrt())
}

/// Value of the dispersion quartic.
pub fn quartic(k: WaveIndex, eta: Eta, omega: f64) -> f64 {
    let w2 = omega * omega;
    w2 * w2 - (k.k2() + eta.0 * eta.0) * w2 + eta.0 * eta.0 * k.kh2()
}

fn inadmissible(kind: ModeKind, flavor: Flavor, k: WaveIndex) -> Error {
    Error::InadmissibleMode(format!("{} ({flavor:?}) at {k:?}", kind.label()))
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Exact eigenvector of the chosen operator with the displayed normalization.
pub fn eigenvector(kind: ModeKind, flavor: Flavor, k: WaveIndex, eta: Eta) -> Result<EigenPair> {
    let kh2 = k.kh2();
    let kz = k.kz_phys();
    let [k1, k2] = k.kh();
    let khn = kh2.sqrt();
    let e = eta.0;
    let zero = c(0.0, 0.0);
    let bad = || inadmissible(kind, flavor, k);
    let hz = k.horizontal_zero();
    let mut aux = None;
    let (omega, vector) = match (flavor, kind) {
        (Flavor::Perturbed | Flavor::Soundproof, ModeKind::MeanFlow(1)) => {
            if hz {
                return Err(bad());
            }
            (0.0, [zero, zero, c(-k2 / khn, 0.0), c(k1 / khn, 0.0), zero])
        }
        (Flavor::Perturbed, ModeKind::MeanFlow(2)) => {
            if !hz || (k.kz != 0 && e == 0.0) {
                return Err(bad());
            }
            let h = if k.kz == 0 { 0.0 } else { kz / e };
            (0.0, [c(1.0, 0.0), c(h, 0.0), zero, zero, zero])
        }
        (Flavor::Soundproof, ModeKind::MeanFlow(2)) => {
            if !hz || k.kz == 0 || e == 0.0 {
                return Err(bad());
            }
            aux = Some(c(1.0, 0.0));
            (0.0, [zero, c(kz / e, 0.0), zero, zero, zero])
        }
        (Flavor::Perturbed | Flavor::Soundproof, ModeKind::MeanFlow(j @ (3 | 4))) => {
            if !hz {
                return Err(bad());
            }
            let mut v = [zero; 5];
            v[if j == 3 { 2 } else { 3 }] = c(1.0, 0.0);
            (0.0, v)
        }
        (Flavor::Perturbed, ModeKind::InternalWave(s)) => {
            if hz || k.kz == 0 || e == 0.0 {
                return Err(bad());
            }
            let w = Quartic::new(k, eta).omega_gw2().sqrt();
            (s.factor() * w, perturbed_wave(s, w, k1, k2, kh2, kz, e))
        }
        (Flavor::Perturbed, ModeKind::AcousticWave(s)) => {
            if k.is_zero() {
                return Err(bad());
            }
            let w = acoustic_branch_frequency(k, eta)?;
            let v = if k.kz == 0 {
                let sf = s.factor();
                [c(1.0, 0.0), zero, c(sf * k1 / w, 0.0), c(sf * k2 / w, 0.0), zero]
            } else {
                perturbed_wave(s, w, k1, k2, kh2, kz, e)
            };
            (s.factor() * w, v)
        }
        (Flavor::Soundproof, ModeKind::InternalWave(s)) => {
            if hz || k.kz == 0 || e == 0.0 {
                return Err(bad());
            }
            let w = soundproof_gw_frequency(k, eta)?;
            let sf = s.factor();
            aux = Some(c(1.0, 0.0));
            let h = e * kh2 / (kz * w * w);
            (
                sf * w,
                [zero, c(h, 0.0), c(sf * k1 / w, 0.0), c(sf * k2 / w, 0.0), c(0.0, -sf * kh2 / (kz * w))],
            )
        }
        (Flavor::PureAcoustic, ModeKind::AcousticWave(s)) => {
            let w = acoustic_frequency(k).map_err(|_| bad())?;
            let sf = s.factor();
            (sf * w, [c(1.0, 0.0), zero, c(sf * k1 / w, 0.0), c(sf * k2 / w, 0.0), c(0.0, sf * kz / w)])
        }
        _ => return Err(bad()),
    };
    Ok(EigenPair { kind, flavor, index: k, eta, omega, vector, pressure_aux: aux })
}

/// `(1, (eta/kz) X, +-kh/w, -+i (w/kz) X)` with `X = |kh|^2/w^2 - 1`.
fn perturbed_wave(s: Sign, w: f64, k1: f64, k2: f64, kh2: f64, kz: f64, e: f64) -> [Complex64; 5] {
    let x = kh2 / (w * w) - 1.0;
    let sf = s.factor();
    [c(1.0, 0.0), c(e / kz * x, 0.0), c(sf * k1 / w, 0.0), c(sf * k2 / w, 0.0), c(0.0, -sf * w / kz * x)]
}

/// All admissible kinds for a flavor at an index, in a fixed order.
pub fn admissible_kinds(flavor: Flavor, k: WaveIndex, eta: Eta) -> Vec<ModeKind> {
    use ModeKind::*;
    let all = [
        MeanFlow(1),
        MeanFlow(2),
        MeanFlow(3),
        MeanFlow(4),
        InternalWave(Sign::Plus),
        InternalWave(Sign::Minus),
        AcousticWave(Sign::Plus),
        AcousticWave(Sign::Minus),
    ];
    all.into_iter().filter(|&m| eigenvector(m, flavor, k, eta).is_ok()).collect()
}
