//! Right-hand sides of the full compressible, intermediate and soundproof
//! models, their pressure solvers, and energy diagnostics.
//!
//! Field-by-field products are evaluated on the collocation grid with the
//! 2/3 rule applied to inputs and outputs. Products of a field with a fixed
//! z-profile are formed exactly in coefficient space and then truncated to
//! the same band, so discrete constraints built from them hold to round-off.

mod pressure;
mod rhs;

pub use pressure::{
    intermediate_pressure, intermediate_pressure_source_display, pseudo_incompressible_project, rhs_intermediate,
    rhs_soundproof, solve_pressure_poisson, solve_pressure_weighted, soundproof_pressure, soundproof_pressure_source_display,
    weighted_divergence, PressureSolveReport, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
pub use rhs::{bilinear_b, bilinear_sp, energy, energy_soundproof, full_remainder, linear_source, rhs_full, theta_field, ThetaField};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral_core::ZProfile;
use crate::wave_modes::Eta;

/// A z-profile given by name or as a list of sine coefficients `[b1, b2, ...]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfileSpec {
    Named(String),
    Coeffs(Vec<f64>),
}

impl ProfileSpec {
    pub fn sin() -> Self {
        ProfileSpec::Named("sin".into())
    }

    pub fn to_profile(&self) -> Result<ZProfile> {
        match self {
            ProfileSpec::Named(n) => match n.as_str() {
                "sin" | "sin(2*pi*z)" => Ok(ZProfile::sine_series(&[1.0])),
                "zero" | "0" => Ok(ZProfile::sine_series(&[])),
                other => Err(Error::InvalidParams(format!("unknown profile name {other:?}"))),
            },
            ProfileSpec::Coeffs(c) => {
                if c.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidParams("non-finite profile coefficient".into()));
                }
                Ok(ZProfile::sine_series(c))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profiles {
    #[serde(rename = "G", default = "ProfileSpec::sin")]
    pub g: ProfileSpec,
    #[serde(rename = "Hbar0", default = "ProfileSpec::sin")]
    pub hbar0: ProfileSpec,
    #[serde(rename = "Gtilde", default = "ProfileSpec::sin")]
    pub gtilde: ProfileSpec,
}

impl Default for Profiles {
    fn default() -> Self {
        Profiles { g: ProfileSpec::sin(), hbar0: ProfileSpec::sin(), gtilde: ProfileSpec::sin() }
    }
}

/// Physical and scaling constants. `mu = 1 - 2 nu` and `eta = eps^(1-nu)` are derived.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(rename = "A", default = "one")]
    pub a: f64,
    #[serde(rename = "B", default = "one")]
    pub b: f64,
    #[serde(rename = "C", default = "one")]
    pub c: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_nu")]
    pub nu: f64,
    /// Defaults to `mu` when absent.
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub profiles: Profiles,
}

fn default_gamma() -> f64 {
    1.4
}

fn one() -> f64 {
    1.0
}

fn default_epsilon() -> f64 {
    0.1
}

fn default_nu() -> f64 {
    0.25
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams::with_epsilon(default_epsilon(), default_nu())
    }
}

impl ModelParams {
    /// Unit constants, `gamma = 1.4` and sine profiles.
    pub fn with_epsilon(epsilon: f64, nu: f64) -> Self {
        ModelParams { gamma: 1.4, a: 1.0, b: 1.0, c: 1.0, epsilon, nu, sigma: None, profiles: Profiles::default() }
    }

    pub fn mu(&self) -> f64 {
        1.0 - 2.0 * self.nu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma.unwrap_or_else(|| self.mu())
    }

    /// Base Exner pressure from `A = 1 / ((gamma - 1) varpi0)`.
    pub fn varpi0(&self) -> f64 {
        1.0 / ((self.gamma - 1.0) * self.a)
    }

    pub fn eta(&self) -> Result<Eta> {
        Eta::from_eps_nu(self.epsilon, self.nu)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon = {} outside (0, 1)", self.epsilon));
        }
        if !(self.nu > 0.0 && self.nu < 0.5) {
            return bad(format!("nu = {} outside (0, 1/2)", self.nu));
        }
        let s = self.sigma();
        if !(s > 0.0 && s <= self.mu() + 1e-15) {
            return bad(format!("sigma = {s} outside (0, mu = {}]", self.mu()));
        }
        for (name, v) in [("A", self.a), ("B", self.b), ("C", self.c)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} = {v} must be positive"));
            }
        }
        if !(self.gamma > 1.0 && self.gamma.is_finite()) {
            return bad(format!("gamma = {} must exceed 1", self.gamma));
        }
        Ok(())
    }
}

/// Cosine modes kept for the weight profile; its coefficients decay factorially.
const PHI_MODES: usize = 24;

/// Validated parameters with every derived profile precomputed.
#[derive(Debug, Clone)]
pub struct Model {
    pub params: ModelParams,
    pub eta: Eta,
    pub mu: f64,
    pub g: ZProfile,
    pub hbar0: ZProfile,
    pub gtilde: ZProfile,
    /// `int_0^z G`.
    pub ig: ZProfile,
    /// `int_0^z Hbar0`.
    pub ih: ZProfile,
    /// `C G + eps^mu Hbar0`, the coefficient of `w` in the `q` equation.
    pub(crate) w_source: ZProfile,
    /// `C IG + eps^mu IH`.
    pub(crate) primitive_source: ZProfile,
    /// `C + eps^mu Gtilde Hbar0`.
    pub(crate) theta_base: ZProfile,
    /// `eps^(mu + nu) Gtilde`.
    pub(crate) theta_h: ZProfile,
    pub phi: ZProfile,
}

impl Model {
    pub fn new(params: ModelParams) -> Result<Self> {
        params.validate()?;
        let eta = params.eta()?;
        let mu = params.mu();
        let eps = params.epsilon;
        let g = params.profiles.g.to_profile()?;
        let hbar0 = params.profiles.hbar0.to_profile()?;
        let gtilde = params.profiles.gtilde.to_profile()?;
        let ig = g.primitive_from_zero();
        let ih = hbar0.primitive_from_zero();
        let em = eps.powf(mu);
        let w_source = g.scaled(params.c).plus(&hbar0.scaled(em));
        let primitive_source = ig.scaled(params.c).plus(&ih.scaled(em));
        let theta_base = ZProfile::constant(params.c).plus(&gtilde.times(&hbar0).scaled(em));
        let theta_h = gtilde.scaled(eps.powf(mu + params.nu));
        let expo = primitive_source.scaled(-eps * params.a);
        let phi = trimmed(ZProfile::from_even_fn(|z| expo.eval(z).exp(), PHI_MODES));
        Ok(Model { params, eta, mu, g, hbar0, gtilde, ig, ih, w_source, primitive_source, theta_base, theta_h, phi })
    }

    pub fn epsilon(&self) -> f64 {
        self.params.epsilon
    }

    pub fn nu(&self) -> f64 {
        self.params.nu
    }

    /// `1 / (A varpi0) = gamma - 1`.
    pub(crate) fn q_div_coeff(&self) -> f64 {
        1.0 / (self.params.a * self.params.varpi0())
    }
}

/// Drops trailing coefficients below round-off.
fn trimmed(mut p: ZProfile) -> ZProfile {
    let scale = p.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    while p.coeffs.len() > 1 && p.coeffs.last().map_or(false, |c| c.abs() <= 1e-18 * scale) {
        p.coeffs.pop();
    }
    p
}

/// `phi = exp(-eps A int_0^z (C G + eps^mu Hbar0))`.
pub fn weight_phi(model: &Model) -> ZProfile {
    model.phi.clone()
}
