use std::io::Write;

use super::{ModelKind, SystemState};
use crate::error::Result;

/// L2 norms of the mean-flow, internal-wave and acoustic parts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BranchNorms {
    pub mf: f64,
    pub gw: f64,
    pub aw: f64,
}

/// Sampled diagnostics of one run. All series are aligned with `times`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub kind: ModelKind,
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub constraint_residual: Vec<f64>,
    pub branches: Vec<BranchNorms>,
    /// Snapshots, only when requested.
    pub states: Vec<SystemState>,
    pub final_state: Option<SystemState>,
}

impl Trajectory {
    pub(crate) fn new(kind: ModelKind) -> Self {
        Trajectory {
            kind,
            times: Vec::new(),
            energy: Vec::new(),
            constraint_residual: Vec::new(),
            branches: Vec::new(),
            states: Vec::new(),
            final_state: None,
        }
    }

    pub(crate) fn push(&mut self, t: f64, energy: f64, residual: f64, b: BranchNorms, state: Option<SystemState>) {
        self.times.push(t);
        self.energy.push(energy);
        self.constraint_residual.push(residual);
        self.branches.push(b);
        if let Some(s) = state {
            self.states.push(s);
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest relative deviation of the energy from its initial value.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energy.first().copied().unwrap_or(0.0);
        let scale = if e0 == 0.0 { 1.0 } else { e0.abs() };
        self.energy.iter().map(|e| (e - e0).abs() / scale).fold(0.0, f64::max)
    }

    pub fn max_constraint_residual(&self) -> f64 {
        self.constraint_residual.iter().copied().fold(0.0, f64::max)
    }

    /// Diagnostics table; see `docs/formats.md`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "t,energy,constraint_residual,mf_norm,gw_norm,aw_norm")?;
        for i in 0..self.len() {
            let b = self.branches[i];
            writeln!(
                out,
                "{:.9e},{:.12e},{:.6e},{:.12e},{:.12e},{:.12e}",
                self.times[i], self.energy[i], self.constraint_residual[i], b.mf, b.gw, b.aw
            )?;
        }
        Ok(())
    }
}
