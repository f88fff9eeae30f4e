//! Exact mode-diagonal propagators, filtered variables, and time steppers
//! for the full, intermediate and soundproof models.
//!
//! The full model is stepped with a Lawson-type exponential RK4: the fast
//! operator is integrated exactly through its eigenbasis and classical RK4 is
//! applied to the filtered remainder, so the step is limited by advection
//! rather than by `1/eps`. The soundproof model uses the same construction
//! with its own eigenbasis. The intermediate model has no exact propagator;
//! its fast frequencies are bounded by `eps^-nu`, so plain RK4 is used.

mod trajectory;

pub use trajectory::{BranchNorms, Trajectory};

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    energy, energy_soundproof, full_remainder, pseudo_incompressible_project, rhs_full, rhs_intermediate, rhs_soundproof,
    weighted_divergence, Model, ModelParams,
};
use crate::error::{Error, Result};
use crate::spectral_core::{FieldSet, ReducedState, Resolution, State};
use crate::wave_modes::{
    apply_soundproof, apply_to_reduced, apply_to_state, leray_project_reduced, Branch, Eta, PerturbedBasis, PropagatorTable,
    SoundproofBasis,
};

/// Constraint residual accepted on entry to a soundproof or intermediate step.
const STEP_CONSTRAINT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    ExponentialRK4,
    ClassicalRK4,
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exponential-rk4" | "exp-rk4" | "lawson" => Ok(Scheme::ExponentialRK4),
            "classical-rk4" | "rk4" => Ok(Scheme::ClassicalRK4),
            _ => Err(Error::InvalidParams(format!("unknown scheme {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Full,
    Intermediate,
    Soundproof,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Full => "full",
            ModelKind::Intermediate => "intermediate",
            ModelKind::Soundproof => "soundproof",
        }
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(ModelKind::Full),
            "intermediate" | "pseudo-incompressible" => Ok(ModelKind::Intermediate),
            "soundproof" => Ok(ModelKind::Soundproof),
            _ => Err(Error::InvalidParams(format!("unknown model {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_stride")]
    pub sample_stride: usize,
    /// Keep full snapshots at every sample, not only the diagnostics.
    #[serde(default)]
    pub keep_states: bool,
}

fn default_scheme() -> Scheme {
    Scheme::ExponentialRK4
}

fn default_dt() -> f64 {
    2e-3
}

fn default_t_end() -> f64 {
    0.5
}

fn default_stride() -> usize {
    10
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig::new(default_scheme(), default_dt(), default_t_end())
    }
}

impl IntegratorConfig {
    pub fn new(scheme: Scheme, dt: f64, t_end: f64) -> Self {
        IntegratorConfig { scheme, dt, t_end, sample_stride: default_stride(), keep_states: false }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParams(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParams(format!("t_end = {} must be non-negative", self.t_end)));
        }
        if self.sample_stride == 0 {
            return Err(Error::InvalidParams("sample_stride must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of steps; the step is shrunk so that they land on `t_end` exactly.
    pub fn n_steps(&self) -> usize {
        if self.t_end == 0.0 {
            0
        } else {
            ((self.t_end / self.dt) - 1e-9).ceil().max(1.0) as usize
        }
    }

    pub fn effective_dt(&self) -> f64 {
        match self.n_steps() {
            0 => self.dt,
            n => self.t_end / n as f64,
        }
    }
}

/// State of any of the three models.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemState {
    Full(State),
    Reduced(ReducedState),
}

impl SystemState {
    pub fn resolution(&self) -> Resolution {
        match self {
            SystemState::Full(u) => u.resolution(),
            SystemState::Reduced(s) => s.resolution(),
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            SystemState::Full(u) => u.norm(),
            SystemState::Reduced(s) => s.norm(),
        }
    }

    pub fn as_full(&self) -> Option<&State> {
        match self {
            SystemState::Full(u) => Some(u),
            SystemState::Reduced(_) => None,
        }
    }

    pub fn as_reduced(&self) -> Option<&ReducedState> {
        match self {
            SystemState::Reduced(s) => Some(s),
            SystemState::Full(_) => None,
        }
    }
}

/// `exp(-t (L_a + eta L_g)) U` through the per-index eigenbasis.
pub fn linear_propagate(u: &State, t: f64, eta: Eta) -> State {
    let basis = PerturbedBasis::new(u.resolution(), eta);
    apply_to_state(&basis.propagator(t), u)
}

/// Exact soundproof linear flow over physical time `t`: phases
/// `exp(-i omega_sp t / eps)` on the divergence-free eigenbasis.
pub fn soundproof_linear_propagate(s: &ReducedState, t: f64, params: &ModelParams) -> Result<ReducedState> {
    check_reduced_constraint(s.divergence().norm(), s)?;
    let basis = SoundproofBasis::new(s.resolution(), params.eta()?);
    Ok(apply_to_reduced(&basis.propagator(t / params.epsilon), s))
}

fn epsilon_from(eta: Eta, nu: f64) -> f64 {
    eta.value().powf(1.0 / (1.0 - nu))
}

/// Filtered variable `S(-t/eps) U`, with `eps = eta^(1/(1-nu))`.
pub fn filter_state(u: &State, t: f64, eta: Eta, nu: f64) -> State {
    linear_propagate(u, -t / epsilon_from(eta, nu), eta)
}

/// Inverse of [`filter_state`].
pub fn unfilter_state(v: &State, t: f64, eta: Eta, nu: f64) -> State {
    linear_propagate(v, t / epsilon_from(eta, nu), eta)
}

fn check_reduced_constraint(residual: f64, s: &ReducedState) -> Result<()> {
    if residual > STEP_CONSTRAINT_TOL * s.norm().max(1.0) {
        return Err(Error::DivergenceViolation { residual });
    }
    Ok(())
}

/// Lawson RK4 for `u' = -A u + R(u)` given the half-step propagator `exp(-A h/2)`.
pub fn lawson_rk4<S: FieldSet>(u: &S, h: f64, half: impl Fn(&S) -> S, rem: impl Fn(&S) -> Result<S>) -> Result<S> {
    let k1 = rem(u)?;
    let uh = half(u);
    let pk1 = half(&k1);
    let k2 = rem(&S::lin_comb(&[(1.0, &uh), (0.5 * h, &pk1)]))?;
    let k3 = rem(&S::lin_comb(&[(1.0, &uh), (0.5 * h, &k2)]))?;
    let ufull = half(&uh);
    let k4 = rem(&S::lin_comb(&[(1.0, &ufull), (h, &half(&k3))]))?;
    let mid = half(&S::lin_comb(&[(1.0, &k2), (1.0, &k3)]));
    Ok(S::lin_comb(&[(1.0, &ufull), (h / 6.0, &half(&pk1)), (h / 3.0, &mid), (h / 6.0, &k4)]))
}

pub fn classical_rk4<S: FieldSet>(u: &S, h: f64, f: impl Fn(&S) -> Result<S>) -> Result<S> {
    let k1 = f(u)?;
    let k2 = f(&S::lin_comb(&[(1.0, u), (0.5 * h, &k1)]))?;
    let k3 = f(&S::lin_comb(&[(1.0, u), (0.5 * h, &k2)]))?;
    let k4 = f(&S::lin_comb(&[(1.0, u), (h, &k3)]))?;
    Ok(S::lin_comb(&[(1.0, u), (h / 6.0, &k1), (h / 3.0, &k2), (h / 3.0, &k3), (h / 6.0, &k4)]))
}

enum Basis {
    Full(PerturbedBasis),
    Reduced(SoundproofBasis),
}

/// Precomputed eigenbasis and half-step propagator for one model, resolution and `dt`.
pub struct Stepper {
    pub kind: ModelKind,
    pub model: Model,
    pub scheme: Scheme,
    pub dt: f64,
    basis: Basis,
    half: PropagatorTable,
}

impl Stepper {
    pub fn new(kind: ModelKind, model: &Model, res: Resolution, scheme: Scheme, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParams(format!("dt = {dt} must be positive")));
        }
        let eps = model.epsilon();
        let (basis, half) = match kind {
            ModelKind::Full => {
                let b = PerturbedBasis::new(res, model.eta);
                if scheme == Scheme::ClassicalRK4 {
                    let limit = 0.5 * eps / b.max_frequency_in_band();
                    if dt > limit {
                        return Err(Error::StabilityGuard { dt, limit });
                    }
                }
                let half = b.propagator(0.5 * dt / eps);
                (Basis::Full(b), half)
            }
            _ => {
                let b = SoundproofBasis::new(res, model.eta);
                let half = b.propagator(0.5 * dt / eps);
                (Basis::Reduced(b), half)
            }
        };
        Ok(Stepper { kind, model: model.clone(), scheme, dt, basis, half })
    }

    pub fn resolution(&self) -> Resolution {
        match &self.basis {
            Basis::Full(b) => b.resolution(),
            Basis::Reduced(b) => b.res,
        }
    }

    /// Residual of the model constraint: `|div u|` (informational for the
    /// full model), or `|div(phi u)|` for the intermediate model.
    pub fn constraint_residual(&self, u: &SystemState) -> f64 {
        match (self.kind, u) {
            (ModelKind::Intermediate, SystemState::Reduced(s)) => weighted_divergence(&s.v1, &s.v2, &s.w, &self.model.phi).norm(),
            (_, SystemState::Reduced(s)) => s.divergence().norm(),
            (_, SystemState::Full(u)) => u.reduce().divergence().norm(),
        }
    }

    fn expect_kind(&self, u: &SystemState) -> Result<()> {
        match (self.kind, u) {
            (ModelKind::Full, SystemState::Full(_)) | (ModelKind::Soundproof | ModelKind::Intermediate, SystemState::Reduced(_)) => Ok(()),
            _ => Err(Error::InvalidParams(format!("state kind does not match the {} model", self.kind.name()))),
        }
    }

    pub fn step(&self, u: &SystemState) -> Result<SystemState> {
        self.expect_kind(u)?;
        let h = self.dt;
        let m = &self.model;
        let eps = m.epsilon();
        match u {
            SystemState::Full(u) => {
                let next = match self.scheme {
                    Scheme::ExponentialRK4 => lawson_rk4(u, h, |x| apply_to_state(&self.half, x), |x| full_remainder(x, m))?,
                    Scheme::ClassicalRK4 => classical_rk4(u, h, |x| rhs_full(x, m))?,
                };
                Ok(SystemState::Full(next))
            }
            SystemState::Reduced(s) => {
                check_reduced_constraint(self.constraint_residual(&SystemState::Reduced(s.clone())), s)?;
                let next = match self.kind {
                    ModelKind::Soundproof => {
                        let out = match self.scheme {
                            Scheme::ExponentialRK4 => lawson_rk4(
                                s,
                                h,
                                |x| apply_to_reduced(&self.half, x),
                                |x| {
                                    let mut r = rhs_soundproof(x, m)?;
                                    r.axpy(1.0 / eps, &apply_soundproof(x, m.eta));
                                    Ok(r)
                                },
                            )?,
                            Scheme::ClassicalRK4 => classical_rk4(s, h, |x| rhs_soundproof(x, m))?,
                        };
                        leray_project_reduced(&out)
                    }
                    _ => {
                        let out = classical_rk4(s, h, |x| rhs_intermediate(x, m))?;
                        let (v1, v2, w) = pseudo_incompressible_project(&out.v1, &out.v2, &out.w, &m.phi)?;
                        ReducedState { h: out.h, v1, v2, w }
                    }
                };
                Ok(SystemState::Reduced(next))
            }
        }
    }

    /// Energy, constraint residual and per-branch norms at one state.
    pub fn diagnostics(&self, u: &SystemState) -> Result<(f64, f64, BranchNorms)> {
        let r = self.constraint_residual(u);
        match (u, &self.basis) {
            (SystemState::Full(x), Basis::Full(b)) => {
                let n = |br: Branch| b.project(x, &[br]).norm();
                Ok((energy(x, &self.model)?, r, BranchNorms { mf: n(Branch::Mf), gw: n(Branch::Gw), aw: n(Branch::Aw) }))
            }
            (SystemState::Reduced(s), Basis::Reduced(b)) => {
                let n = |br: Branch| b.project(s, &[br]).norm();
                Ok((energy_soundproof(s, &self.model), r, BranchNorms { mf: n(Branch::Mf), gw: n(Branch::Gw), aw: 0.0 }))
            }
            _ => Err(Error::InvalidParams(format!("state kind does not match the {} model", self.kind.name()))),
        }
    }
}

/// One step of the chosen scheme.
pub fn step(kind: ModelKind, model: &Model, u: &SystemState, cfg: &IntegratorConfig) -> Result<SystemState> {
    cfg.validate()?;
    Stepper::new(kind, model, u.resolution(), cfg.scheme, cfg.dt)?.step(u)
}

/// Observer called at every sample with the sample time and state.
pub type Observer<'a> = dyn FnMut(f64, &SystemState) + 'a;

/// Repeated stepping with diagnostics at `t = 0`, every `sample_stride`
/// steps, and at `t_end`.
pub fn integrate(
    kind: ModelKind,
    model: &Model,
    u0: &SystemState,
    cfg: &IntegratorConfig,
    observers: &mut [&mut Observer<'_>],
) -> Result<Trajectory> {
    cfg.validate()?;
    let n = cfg.n_steps();
    let dt = cfg.effective_dt();
    let stepper = Stepper::new(kind, model, u0.resolution(), cfg.scheme, dt)?;
    let mut traj = Trajectory::new(kind);
    let mut u = u0.clone();
    let mut record = |i: usize, u: &SystemState, traj: &mut Trajectory| -> Result<()> {
        let t = if i == n { cfg.t_end } else { i as f64 * dt };
        let (e, r, b) = stepper.diagnostics(u)?;
        traj.push(t, e, r, b, cfg.keep_states.then(|| u.clone()));
        for obs in observers.iter_mut() {
            obs(t, u);
        }
        Ok(())
    };
    record(0, &u, &mut traj)?;
    for i in 1..=n {
        u = stepper.step(&u)?;
        if i % cfg.sample_stride == 0 || i == n {
            record(i, &u, &mut traj)?;
        }
    }
    traj.final_state = Some(u);
    Ok(traj)
}
