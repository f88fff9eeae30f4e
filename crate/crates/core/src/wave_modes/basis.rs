use num_complex::Complex64;

use super::{eigenvector, Eta, Flavor, ModeKind, Sign};
use crate::spectral_core::{FieldSet, ReducedState, Resolution, State, WaveIndex};

/// Branch tags used by projections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Branch {
    Mf,
    Gw,
    Aw,
}

/// Fixed amplitude slot layout per index.
pub const SLOTS: [ModeKind; 8] = [
    ModeKind::MeanFlow(1),
    ModeKind::MeanFlow(2),
    ModeKind::MeanFlow(3),
    ModeKind::MeanFlow(4),
    ModeKind::InternalWave(Sign::Plus),
    ModeKind::InternalWave(Sign::Minus),
    ModeKind::AcousticWave(Sign::Plus),
    ModeKind::AcousticWave(Sign::Minus),
];

pub(crate) fn slot_of(kind: ModeKind) -> usize {
    SLOTS.iter().position(|&s| s == kind).expect("every kind has a slot")
}

#[derive(Debug, Clone)]
pub(crate) struct Mode {
    pub slot: usize,
    pub omega: f64,
    pub vec: [Complex64; 5],
    /// Reciprocal of the per-index squared norm.
    pub inv_norm2: f64,
}

/// Vertical weight of a cosine row: `int cos^2 = 1` at `kz = 0`, `1/2` otherwise.
fn varsigma(kz: i64) -> f64 {
    if kz == 0 {
        1.0
    } else {
        0.5
    }
}

/// Component weights `(cos, sin, cos, cos, sin)`; sine rows get `1 - varsigma`.
fn weights(kz: i64) -> [f64; 5] {
    let s = varsigma(kz);
    [s, 1.0 - s, s, s, 1.0 - s]
}

fn build_modes(flavor: Flavor, k: WaveIndex, eta: Eta) -> Vec<Mode> {
    let w = weights(k.kz);
    SLOTS
        .iter()
        .enumerate()
        .filter_map(|(slot, &kind)| {
            let p = eigenvector(kind, flavor, k, eta).ok()?;
            let n2: f64 = p.vector.iter().zip(w).map(|(c, wi)| wi * c.norm_sqr()).sum();
            Some(Mode { slot, omega: p.omega, vec: p.vector, inv_norm2: 1.0 / n2 })
        })
        .collect()
}

fn quotient(m: &Mode, u: &[Complex64; 5], w: &[f64; 5]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..5 {
        acc += u[i] * m.vec[i].conj() * w[i];
    }
    acc * m.inv_norm2
}

/// Gathers `(Q, H, V1, V2, W)` at every flat index.
pub(crate) fn gather_state(u: &State) -> Vec<[Complex64; 5]> {
    let f = [u.q.coeffs(), u.h.coeffs(), u.v1.coeffs(), u.v2.coeffs(), u.w.coeffs()];
    (0..f[0].len()).map(|i| [f[0][i], f[1][i], f[2][i], f[3][i], f[4][i]]).collect()
}

pub(crate) fn scatter_state(res: Resolution, data: &[[Complex64; 5]]) -> State {
    let mut s = State::zeros(res);
    {
        let mut fs = s.fields_mut();
        for (c, f) in fs.iter_mut().enumerate() {
            let dst = f.coeffs_mut();
            for (i, v) in data.iter().enumerate() {
                dst[i] = v[c];
            }
        }
    }
    s
}

pub(crate) fn gather_reduced(u: &ReducedState) -> Vec<[Complex64; 5]> {
    let z = Complex64::new(0.0, 0.0);
    let f = [u.h.coeffs(), u.v1.coeffs(), u.v2.coeffs(), u.w.coeffs()];
    (0..f[0].len()).map(|i| [z, f[0][i], f[1][i], f[2][i], f[3][i]]).collect()
}

pub(crate) fn scatter_reduced(res: Resolution, data: &[[Complex64; 5]]) -> ReducedState {
    scatter_state(res, data).reduce()
}

/// Per-index perturbed eigenbasis for one resolution and one `eta`.
#[derive(Debug, Clone)]
pub struct PerturbedBasis {
    pub(crate) res: Resolution,
    pub(crate) eta: Eta,
    pub(crate) modes: Vec<Vec<Mode>>,
}

/// Per-index soundproof eigenbasis of the divergence-free subspace.
#[derive(Debug, Clone)]
pub struct SoundproofBasis {
    pub(crate) res: Resolution,
    pub(crate) modes: Vec<Vec<Mode>>,
}

fn basis_table(res: Resolution, flavor: Flavor, eta: Eta) -> Vec<Vec<Mode>> {
    (0..res.n_coeffs())
        .map(|flat| {
            let k = res.wave_index(flat);
            if res.is_nyquist(k) {
                Vec::new()
            } else {
                build_modes(flavor, k, eta)
            }
        })
        .collect()
}

/// `sum_j phase_j e_j e_j^H W / |e_j|_W^2` for each index, with `W` the component weights.
fn propagator_table(res: Resolution, modes: &[Vec<Mode>], phase: impl Fn(f64) -> Complex64) -> PropagatorTable {
    modes
        .iter()
        .enumerate()
        .map(|(flat, ms)| {
            let w = weights(res.wave_index(flat).kz);
            let mut m = [[Complex64::new(0.0, 0.0); 5]; 5];
            for md in ms {
                let p = phase(md.omega) * md.inv_norm2;
                for i in 0..5 {
                    if md.vec[i] == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let a = md.vec[i] * p;
                    for j in 0..5 {
                        m[i][j] += a * md.vec[j].conj() * w[j];
                    }
                }
            }
            m
        })
        .collect()
}

pub(crate) fn apply_table(table: &[[[Complex64; 5]; 5]], data: &[[Complex64; 5]]) -> Vec<[Complex64; 5]> {
    table
        .iter()
        .zip(data)
        .map(|(m, u)| {
            let mut out = [Complex64::new(0.0, 0.0); 5];
            for i in 0..5 {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..5 {
                    acc += m[i][j] * u[j];
                }
                out[i] = acc;
            }
            out
        })
        .collect()
}

impl PerturbedBasis {
    pub fn new(res: Resolution, eta: Eta) -> Self {
        PerturbedBasis { res, eta, modes: basis_table(res, Flavor::Perturbed, eta) }
    }

    pub fn eta(&self) -> Eta {
        self.eta
    }

    pub fn resolution(&self) -> Resolution {
        self.res
    }

    /// Propagation matrices of `exp(-t L)` with `L = L_a + eta L_g`.
    pub fn propagator(&self, t: f64) -> PropagatorTable {
        propagator_table(self.res, &self.modes, |w| Complex64::from_polar(1.0, -w * t))
    }

    /// Largest `|omega|` among retained acoustic modes inside the 2/3 band.
    pub fn max_frequency_in_band(&self) -> f64 {
        let mut m: f64 = 0.0;
        for (flat, ms) in self.modes.iter().enumerate() {
            if self.res.in_band(self.res.wave_index(flat)) {
                for md in ms {
                    m = m.max(md.omega.abs());
                }
            }
        }
        m
    }

    pub fn decompose(&self, u: &State) -> ModalDecomposition {
        let data = gather_state(u);
        let amps = data
            .iter()
            .enumerate()
            .map(|(flat, v)| {
                let w = weights(self.res.wave_index(flat).kz);
                let mut a = [Complex64::new(0.0, 0.0); 8];
                for m in &self.modes[flat] {
                    a[m.slot] = quotient(m, v, &w);
                }
                a
            })
            .collect();
        ModalDecomposition { res: self.res, eta: self.eta, amps }
    }

    pub fn reconstruct(&self, dec: &ModalDecomposition) -> State {
        let data: Vec<[Complex64; 5]> = dec
            .amps
            .iter()
            .enumerate()
            .map(|(flat, a)| {
                let mut v = [Complex64::new(0.0, 0.0); 5];
                for m in &self.modes[flat] {
                    let amp = a[m.slot];
                    if amp != Complex64::new(0.0, 0.0) {
                        for i in 0..5 {
                            v[i] += m.vec[i] * amp;
                        }
                    }
                }
                v
            })
            .collect();
        scatter_state(self.res, &data)
    }

    /// Orthogonal projection onto the union of the selected branches.
    pub fn project(&self, u: &State, branches: &[Branch]) -> State {
        let mut dec = self.decompose(u);
        dec.retain(branches);
        self.reconstruct(&dec)
    }
}

impl SoundproofBasis {
    pub fn new(res: Resolution, eta: Eta) -> Self {
        SoundproofBasis { res, modes: basis_table(res, Flavor::Soundproof, eta) }
    }

    /// Propagation matrices of the soundproof operator over rescaled time `t`.
    pub fn propagator(&self, t: f64) -> PropagatorTable {
        propagator_table(self.res, &self.modes, |w| Complex64::from_polar(1.0, -w * t))
    }

    /// Branch amplitudes of a divergence-free reduced state in slot layout.
    pub fn decompose(&self, s: &ReducedState) -> Vec<[Complex64; 8]> {
        gather_reduced(s)
            .iter()
            .enumerate()
            .map(|(flat, v)| {
                let w = weights(self.res.wave_index(flat).kz);
                let mut a = [Complex64::new(0.0, 0.0); 8];
                for m in &self.modes[flat] {
                    a[m.slot] = quotient(m, v, &w);
                }
                a
            })
            .collect()
    }

    /// Inverse of [`SoundproofBasis::decompose`] on the retained slots.
    pub fn reconstruct(&self, amps: &[[Complex64; 8]]) -> ReducedState {
        let data: Vec<[Complex64; 5]> = amps
            .iter()
            .enumerate()
            .map(|(flat, a)| {
                let mut v = [Complex64::new(0.0, 0.0); 5];
                for m in &self.modes[flat] {
                    for i in 0..5 {
                        v[i] += m.vec[i] * a[m.slot];
                    }
                }
                v
            })
            .collect();
        scatter_reduced(self.res, &data)
    }

    /// Projection onto the selected soundproof branches.
    pub fn project(&self, s: &ReducedState, branches: &[Branch]) -> ReducedState {
        let mut amps = self.decompose(s);
        for a in amps.iter_mut() {
            for (slot, kind) in SLOTS.iter().enumerate() {
                if !branches.contains(&kind.branch()) {
                    a[slot] = Complex64::new(0.0, 0.0);
                }
            }
        }
        self.reconstruct(&amps)
    }
}

/// Per-index 5x5 matrices acting on `(Q, H, V1, V2, W)`.
pub type PropagatorTable = Vec<[[Complex64; 5]; 5]>;

/// Applies a per-index table to a full state.
pub fn apply_to_state(table: &PropagatorTable, u: &State) -> State {
    scatter_state(u.resolution(), &apply_table(table, &gather_state(u)))
}

/// Applies a per-index table to a reduced state, with `Q = 0`.
pub fn apply_to_reduced(table: &PropagatorTable, s: &ReducedState) -> ReducedState {
    scatter_reduced(s.resolution(), &apply_table(table, &gather_reduced(s)))
}

/// Per-index amplitudes in the perturbed eigenbasis.
///
/// Slots follow [`SLOTS`]; inadmissible slots hold zero and report `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalDecomposition {
    pub res: Resolution,
    pub eta: Eta,
    pub amps: Vec<[Complex64; 8]>,
}

impl ModalDecomposition {
    pub fn zeros(res: Resolution, eta: Eta) -> Self {
        ModalDecomposition { res, eta, amps: vec![[Complex64::new(0.0, 0.0); 8]; res.n_coeffs()] }
    }

    fn admissible(&self, k: WaveIndex, kind: ModeKind) -> bool {
        !self.res.is_nyquist(k) && eigenvector(kind, Flavor::Perturbed, k, self.eta).is_ok()
    }

    pub fn amplitude(&self, k: WaveIndex, kind: ModeKind) -> Option<Complex64> {
        let flat = self.res.flat_index(k)?;
        self.admissible(k, kind).then(|| self.amps[flat][slot_of(kind)])
    }

    /// Sets one amplitude; returns `false` if the mode is absent at `k`.
    pub fn set(&mut self, k: WaveIndex, kind: ModeKind, value: Complex64) -> bool {
        match self.res.flat_index(k) {
            Some(flat) if self.admissible(k, kind) => {
                self.amps[flat][slot_of(kind)] = value;
                true
            }
            _ => false,
        }
    }

    /// Whether a slot carries the `eps^(1-nu)` renormalization: the internal
    /// waves and the vertical mean flow at `kz != 0` have O(1/eta) entries.
    pub fn is_renormalized(k: WaveIndex, kind: ModeKind) -> bool {
        match kind {
            ModeKind::InternalWave(_) => true,
            ModeKind::MeanFlow(2) => k.kz != 0,
            _ => false,
        }
    }

    /// Amplitude with respect to `eta * e` for renormalized slots.
    pub fn renormalized_amplitude(&self, k: WaveIndex, kind: ModeKind) -> Option<Complex64> {
        let a = self.amplitude(k, kind)?;
        Some(if Self::is_renormalized(k, kind) { a / self.eta.value() } else { a })
    }

    /// Zeroes every slot outside the given branches.
    pub fn retain(&mut self, branches: &[Branch]) {
        for a in self.amps.iter_mut() {
            for (slot, kind) in SLOTS.iter().enumerate() {
                if !branches.contains(&kind.branch()) {
                    a[slot] = Complex64::new(0.0, 0.0);
                }
            }
        }
    }
}

/// Amplitudes of `u` in the perturbed eigenbasis.
pub fn decompose(u: &State, eta: Eta) -> ModalDecomposition {
    PerturbedBasis::new(u.resolution(), eta).decompose(u)
}

/// Inverse of [`decompose`].
pub fn reconstruct(dec: &ModalDecomposition) -> State {
    PerturbedBasis::new(dec.res, dec.eta).reconstruct(dec)
}

/// Orthogonal projection onto the selected branches.
pub fn project(u: &State, eta: Eta, branches: &[Branch]) -> State {
    PerturbedBasis::new(u.resolution(), eta).project(u, branches)
}
