use super::{check_same, Resolution, SpectralField, SymmetryClass};
use crate::error::{Error, Result};

use SymmetryClass::{EvenInZ, OddInZ};

/// Linear-space operations shared by full and reduced states.
pub trait FieldSet: Clone + Send + Sync {
    fn fields(&self) -> Vec<&SpectralField>;
    fn fields_mut(&mut self) -> Vec<&mut SpectralField>;
    fn resolution(&self) -> Resolution;
    fn zeros_like(&self) -> Self;

    /// `self += a * other`.
    fn axpy(&mut self, a: f64, other: &Self) {
        for (x, y) in self.fields_mut().into_iter().zip(other.fields()) {
            x.axpy(a, y);
        }
    }

    fn scale(&mut self, s: f64) {
        for x in self.fields_mut() {
            x.scale(s);
        }
    }

    /// Sum of the component L2 inner products.
    fn dot(&self, other: &Self) -> f64 {
        self.fields().iter().zip(other.fields()).map(|(a, b)| a.inner(b).unwrap()).sum()
    }

    fn norm(&self) -> f64 {
        self.dot(self).max(0.0).sqrt()
    }

    fn lin_comb(terms: &[(f64, &Self)]) -> Self {
        let mut out = terms[0].1.zeros_like();
        for (a, s) in terms {
            out.axpy(*a, s);
        }
        out
    }
}

/// Unknown `(q, H, v1, v2, w)` of the compressible system.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub q: SpectralField,
    pub h: SpectralField,
    pub v1: SpectralField,
    pub v2: SpectralField,
    pub w: SpectralField,
}

/// Parity of each component in `(q, H, v1, v2, w)` order.
pub const STATE_PARITY: [SymmetryClass; 5] = [EvenInZ, OddInZ, EvenInZ, EvenInZ, OddInZ];

impl State {
    pub fn zeros(res: Resolution) -> Self {
        State {
            q: SpectralField::zeros(res, EvenInZ),
            h: SpectralField::zeros(res, OddInZ),
            v1: SpectralField::zeros(res, EvenInZ),
            v2: SpectralField::zeros(res, EvenInZ),
            w: SpectralField::zeros(res, OddInZ),
        }
    }

    /// Builds a state after checking resolutions and the parity pattern.
    pub fn new(q: SpectralField, h: SpectralField, v1: SpectralField, v2: SpectralField, w: SpectralField) -> Result<Self> {
        let s = State { q, h, v1, v2, w };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let res = self.q.resolution();
        for (f, p) in self.fields().into_iter().zip(STATE_PARITY) {
            check_same(res, f.resolution())?;
            if f.symmetry() != p {
                return Err(Error::ParityViolation { residual: f64::INFINITY });
            }
        }
        Ok(())
    }

    /// L2 inner product of all five components.
    pub fn inner_product(a: &State, b: &State) -> Result<f64> {
        check_same(a.resolution(), b.resolution())?;
        Ok(a.dot(b))
    }

    /// Drops the `q` component.
    pub fn reduce(&self) -> ReducedState {
        ReducedState { h: self.h.clone(), v1: self.v1.clone(), v2: self.v2.clone(), w: self.w.clone() }
    }

    /// Applies a per-field map.
    pub fn map(&self, f: impl Fn(&SpectralField) -> SpectralField) -> State {
        State { q: f(&self.q), h: f(&self.h), v1: f(&self.v1), v2: f(&self.v2), w: f(&self.w) }
    }

    pub fn hermitian_residual(&self) -> f64 {
        self.fields().iter().map(|f| f.hermitian_residual()).fold(0.0, f64::max)
    }
}

impl FieldSet for State {
    fn fields(&self) -> Vec<&SpectralField> {
        vec![&self.q, &self.h, &self.v1, &self.v2, &self.w]
    }
    fn fields_mut(&mut self) -> Vec<&mut SpectralField> {
        vec![&mut self.q, &mut self.h, &mut self.v1, &mut self.v2, &mut self.w]
    }
    fn resolution(&self) -> Resolution {
        self.q.resolution()
    }
    fn zeros_like(&self) -> Self {
        State::zeros(self.resolution())
    }
}

/// Reduced unknown `(H, v1, v2, w)` of the soundproof and intermediate models.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState {
    pub h: SpectralField,
    pub v1: SpectralField,
    pub v2: SpectralField,
    pub w: SpectralField,
}

impl ReducedState {
    pub fn zeros(res: Resolution) -> Self {
        State::zeros(res).reduce()
    }

    /// Embeds into a full state with the given `q`.
    pub fn with_q(&self, q: SpectralField) -> State {
        State { q, h: self.h.clone(), v1: self.v1.clone(), v2: self.v2.clone(), w: self.w.clone() }
    }

    pub fn map(&self, f: impl Fn(&SpectralField) -> SpectralField) -> ReducedState {
        ReducedState { h: f(&self.h), v1: f(&self.v1), v2: f(&self.v2), w: f(&self.w) }
    }

    /// Velocity divergence `div_h v + dz w`.
    pub fn divergence(&self) -> SpectralField {
        use super::Axis;
        let mut d = self.v1.derivative(Axis::X);
        d.axpy(1.0, &self.v2.derivative(Axis::Y));
        d.axpy(1.0, &self.w.derivative(Axis::Z));
        d
    }
}

impl FieldSet for ReducedState {
    fn fields(&self) -> Vec<&SpectralField> {
        vec![&self.h, &self.v1, &self.v2, &self.w]
    }
    fn fields_mut(&mut self) -> Vec<&mut SpectralField> {
        vec![&mut self.h, &mut self.v1, &mut self.v2, &mut self.w]
    }
    fn resolution(&self) -> Resolution {
        self.h.resolution()
    }
    fn zeros_like(&self) -> Self {
        ReducedState::zeros(self.resolution())
    }
}
