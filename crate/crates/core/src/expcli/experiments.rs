use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::{build_initial_data, InitialDataSpec};
use super::table::{ConvergenceRow, ConvergenceTable};
use crate::dynamics::{soundproof_pressure, Model, ModelParams};
use crate::error::{Error, Result};
use crate::integrate::{IntegratorConfig, ModelKind, Stepper, SystemState};
use crate::spectral_core::{FieldSet, ReducedState, Resolution, State};
use crate::wave_modes::{truncate, Branch, PerturbedBasis};

/// Shared settings of the two comparison experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Base parameters; `epsilon` is replaced by each sweep value.
    #[serde(default)]
    pub params: ModelParams,
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub initial: InitialDataSpec,
    /// Truncation index of the ill-prepared metric.
    #[serde(rename = "K", default = "default_k")]
    pub k_trunc: i64,
    /// Caps the step at `max_dt_over_eps * eps`. With a varying `theta` the
    /// exponential remainder keeps an `O(eps^(mu-1))` pressure-gradient term
    /// that a fixed step stops resolving at small `eps`.
    #[serde(default = "default_dt_ratio")]
    pub max_dt_over_eps: f64,
}

fn default_dt_ratio() -> f64 {
    0.02
}

fn default_epsilons() -> Vec<f64> {
    vec![0.2, 0.1, 0.05, 0.025]
}

fn default_resolution() -> usize {
    32
}

fn default_k() -> i64 {
    4
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            params: ModelParams::default(),
            epsilons: default_epsilons(),
            resolution: default_resolution(),
            integrator: IntegratorConfig::default(),
            initial: InitialDataSpec::default(),
            k_trunc: default_k(),
            max_dt_over_eps: default_dt_ratio(),
        }
    }
}

impl ExperimentConfig {
    fn model_for(&self, eps: f64, sigma: f64) -> Result<Model> {
        let mut p = self.params.clone();
        p.epsilon = eps;
        p.sigma = Some(sigma);
        Model::new(p)
    }

    /// Integrator settings for one sweep value.
    pub fn integrator_for(&self, eps: f64) -> IntegratorConfig {
        let mut c = self.integrator.clone();
        c.dt = c.dt.min(self.max_dt_over_eps * eps);
        c
    }

    fn validate(&self) -> Result<Resolution> {
        if !(self.max_dt_over_eps > 0.0) {
            return Err(Error::InvalidParams(format!("max_dt_over_eps = {} must be positive", self.max_dt_over_eps)));
        }
        if self.epsilons.is_empty() {
            return Err(Error::InvalidParams("no epsilon values".into()));
        }
        self.integrator.validate()?;
        self.initial.validate()?;
        Resolution::cube(self.resolution)
    }
}

/// `|(q - eps p_sp, H - H_sp, v - v_sp, w - w_sp)|` with `p_sp` the
/// soundproof pressure of `s`.
pub fn wellprepared_error(u: &State, s: &ReducedState, model: &Model) -> Result<f64> {
    let p = soundproof_pressure(s, model)?;
    let dq = u.q.sub(&p.scaled(model.epsilon()));
    let rest = ReducedState::lin_comb(&[(1.0, &u.reduce()), (-1.0, s)]);
    Ok((dq.norm().powi(2) + rest.norm().powi(2)).sqrt())
}

/// `|T_K P_rd (P_mf + P_gw) U - T_K U_sp|^2`.
pub fn illprepared_metric(basis: &PerturbedBasis, u: &State, s: &ReducedState, k: i64) -> f64 {
    let captured = truncate(&basis.project(u, &[Branch::Mf, Branch::Gw]).reduce(), k);
    ReducedState::lin_comb(&[(1.0, &captured), (-1.0, &truncate(s, k))]).norm().powi(2)
}

/// Steps the full and soundproof models together and evaluates `metric`
/// at `t = 0`, every `sample_stride` steps and at `t_end`. Returns
/// `(initial, sup, final)`.
fn lockstep(
    model: &Model,
    cfg: &IntegratorConfig,
    full0: &State,
    sp0: &ReducedState,
    mut metric: impl FnMut(&State, &ReducedState) -> Result<f64>,
) -> Result<(f64, f64, f64)> {
    let res = full0.resolution();
    let n = cfg.n_steps();
    let dt = cfg.effective_dt();
    let full = Stepper::new(ModelKind::Full, model, res, cfg.scheme, dt)?;
    let sp = Stepper::new(ModelKind::Soundproof, model, res, cfg.scheme, dt)?;
    let mut u = SystemState::Full(full0.clone());
    let mut s = SystemState::Reduced(sp0.clone());
    let first = metric(full0, sp0)?;
    let (mut sup, mut last) = (first, first);
    for i in 1..=n {
        u = full.step(&u)?;
        s = sp.step(&s)?;
        if i % cfg.sample_stride == 0 || i == n {
            last = metric(u.as_full().unwrap(), s.as_reduced().unwrap())?;
            sup = sup.max(last);
        }
    }
    Ok((first, sup, last))
}

fn row(eps: f64, metrics: &[(&str, f64)]) -> ConvergenceRow {
    ConvergenceRow { epsilon: eps, metrics: metrics.iter().map(|(k, v)| (k.to_string(), *v)).collect::<BTreeMap<_, _>>() }
}

/// Full model from acoustic-free data against the soundproof model from
/// its reduced, Leray-projected counterpart.
pub fn experiment_wellprepared(cfg: &ExperimentConfig) -> Result<ConvergenceTable> {
    let res = cfg.validate()?;
    if !cfg.initial.is_well_prepared() {
        return Err(Error::InvalidParams("well-prepared data needs acoustic weight 0".into()));
    }
    let mu = cfg.params.mu();
    let nu = cfg.params.nu;
    let sigma = cfg.params.sigma.unwrap_or(mu);
    let rows = cfg
        .epsilons
        .par_iter()
        .map(|&eps| {
            let model = cfg.model_for(eps, sigma)?;
            let data = build_initial_data(&cfg.initial, &model, res)?;
            let (a, b, c) =
                lockstep(&model, &cfg.integrator_for(eps), &data.full, &data.soundproof, |u, s| wellprepared_error(u, s, &model))?;
            Ok(row(eps, &[("initial_error", a), ("sup_error", b), ("final_error", c)]))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = ConvergenceTable::new("wellprepared", rows, (mu - nu).max(mu - sigma))?;
    t.notes.push(format!("nu={nu} mu={mu} sigma={sigma} resolution={} T={}", cfg.resolution, cfg.integrator.t_end));
    Ok(t)
}

/// Full model with acoustic content against the soundproof model started
/// from the mean-flow and internal-wave part, compared through the branch
/// projections of `U(t)` truncated at `K`.
pub fn experiment_illprepared(cfg: &ExperimentConfig) -> Result<ConvergenceTable> {
    let res = cfg.validate()?;
    let k = cfg.k_trunc;
    let nyq = (cfg.resolution / 2) as i64;
    if !(k >= 0 && k < nyq) {
        return Err(Error::InvalidParams(format!("K = {k} outside [0, {nyq})")));
    }
    let mu = cfg.params.mu();
    let nu = cfg.params.nu;
    let sigma = cfg.params.sigma.unwrap_or(0.5 * mu);
    let rows = cfg
        .epsilons
        .par_iter()
        .map(|&eps| {
            let model = cfg.model_for(eps, sigma)?;
            let data = build_initial_data(&cfg.initial, &model, res)?;
            let basis = PerturbedBasis::new(res, model.eta);
            let tail = ReducedState::lin_comb(&[(1.0, &data.full.reduce()), (-1.0, &truncate(&data.full.reduce(), k))]).norm().powi(2);
            let (a, b, c) =
                lockstep(&model, &cfg.integrator_for(eps), &data.full, &data.soundproof, |u, s| Ok(illprepared_metric(&basis, u, s, k)))?;
            Ok(row(eps, &[("initial_sq_error", a), ("sup_sq_error", b), ("final_sq_error", c), ("tail_sq_norm", tail)]))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = ConvergenceTable::new("illprepared", rows, (2.0 * mu - 2.0 * sigma).min(1.0))?;
    t.notes.push(format!("nu={nu} mu={mu} sigma={sigma} K={k} resolution={} T={}", cfg.resolution, cfg.integrator.t_end));
    t.notes.push(format!(
        "initial_sq_error is the basis-swap residual of the Leray-projected data, expected O(eps^{:.3})",
        2.0 - 3.0 * nu
    ));
    Ok(t)
}
