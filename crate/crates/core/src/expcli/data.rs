use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{pseudo_incompressible_project, Model};
use crate::error::{Error, Result};
use crate::spectral_core::{FieldSet, ReducedState, Resolution, State};
use crate::wave_modes::{leray_project_reduced, Branch, ModalDecomposition, PerturbedBasis, SLOTS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchWeights {
    pub mf: f64,
    pub gw: f64,
    pub aw: f64,
}

/// Random superposition of eigenmodes with a power-law spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialDataSpec {
    #[serde(default)]
    pub seed: u64,
    /// L2 norm of the full-model state.
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    /// Amplitudes decay like `(1 + |n|^2)^(-decay/2)` in the integer index `n`.
    #[serde(default = "default_decay")]
    pub decay: f64,
    #[serde(default = "default_weights")]
    pub weights: BranchWeights,
    /// Highest excited index in the max-norm.
    #[serde(default = "default_k_init")]
    pub k_init: i64,
}

fn default_amplitude() -> f64 {
    0.1
}

fn default_decay() -> f64 {
    2.0
}

fn default_weights() -> BranchWeights {
    BranchWeights { mf: 1.0, gw: 1.0, aw: 0.0 }
}

fn default_k_init() -> i64 {
    4
}

impl Default for InitialDataSpec {
    fn default() -> Self {
        InitialDataSpec {
            seed: 0,
            amplitude: default_amplitude(),
            decay: default_decay(),
            weights: default_weights(),
            k_init: default_k_init(),
        }
    }
}

impl InitialDataSpec {
    pub fn is_well_prepared(&self) -> bool {
        self.weights.aw == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::InvalidParams(format!("amplitude = {} must be non-negative", self.amplitude)));
        }
        let w = self.weights;
        if [w.mf, w.gw, w.aw].iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
            return Err(Error::InvalidParams("branch weights must be non-negative".into()));
        }
        if self.k_init < 0 || !self.decay.is_finite() {
            return Err(Error::InvalidParams("k_init must be non-negative and decay finite".into()));
        }
        Ok(())
    }
}

/// Matched initial data for the three models.
#[derive(Debug, Clone)]
pub struct InitialData {
    pub full: State,
    pub soundproof: ReducedState,
    pub intermediate: ReducedState,
}

/// Zero-mean and deterministic in `spec.seed`. Two uniform draws are consumed per slot at
/// every excited index whether or not the slot is admissible, so the draws
/// for one index do not depend on `eta`.
pub fn build_initial_data(spec: &InitialDataSpec, model: &Model, res: Resolution) -> Result<InitialData> {
    spec.validate()?;
    let eta = model.eta;
    let basis = PerturbedBasis::new(res, eta);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut dec = ModalDecomposition::zeros(res, eta);
    for flat in 0..res.n_coeffs() {
        let k = res.wave_index(flat);
        // The mean is left at rest: a constant q has no soundproof counterpart.
        if k.is_zero() || res.is_nyquist(k) || !res.in_band(k) || k.max_norm() > spec.k_init {
            continue;
        }
        let n2 = (k.kx * k.kx + k.ky * k.ky + k.kz * k.kz) as f64;
        let envelope = (1.0 + n2).powf(-0.5 * spec.decay);
        for kind in SLOTS {
            let (re, im): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let w = match kind.branch() {
                Branch::Mf => spec.weights.mf,
                Branch::Gw => spec.weights.gw,
                Branch::Aw => spec.weights.aw,
            };
            if w == 0.0 {
                continue;
            }
            // Renormalized slots have O(1/eta) entries; scale them back to O(1).
            let r = if ModalDecomposition::is_renormalized(k, kind) { eta.value() } else { 1.0 };
            dec.set(k, kind, num_complex::Complex64::new(re, im) * (w * envelope * r));
        }
    }
    let mut full = basis.reconstruct(&dec).map(|f| f.symmetrized());
    let n = full.norm();
    if n > 0.0 {
        full.scale(spec.amplitude / n);
    }
    if spec.is_well_prepared() {
        // Symmetrization keeps branches; this removes round-off only.
        full = basis.project(&full, &[Branch::Mf, Branch::Gw]);
    }
    let soundproof = leray_project_reduced(&basis.project(&full, &[Branch::Mf, Branch::Gw]).reduce());
    let (v1, v2, w) = pseudo_incompressible_project(&soundproof.v1, &soundproof.v2, &soundproof.w, &model.phi)?;
    let intermediate = ReducedState { h: soundproof.h.clone(), v1, v2, w };
    Ok(InitialData { full, soundproof, intermediate })
}
