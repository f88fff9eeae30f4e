use super::Eta;
use crate::spectral_core::{Axis, FieldSet, ReducedState, SpectralField, State, SymmetryClass};

/// `L_a U = (div_h v + dz w, 0, grad_h q, dz q)`.
pub fn apply_acoustic(u: &State) -> State {
    let mut div = u.v1.derivative(Axis::X);
    div.axpy(1.0, &u.v2.derivative(Axis::Y));
    div.axpy(1.0, &u.w.derivative(Axis::Z));
    State {
        q: div,
        h: SpectralField::zeros(u.resolution(), SymmetryClass::OddInZ),
        v1: u.q.derivative(Axis::X),
        v2: u.q.derivative(Axis::Y),
        w: u.q.derivative(Axis::Z),
    }
}

/// `L_g U = (0, -w, 0, H)`.
pub fn apply_gravity(u: &State) -> State {
    let res = u.resolution();
    State {
        q: SpectralField::zeros(res, SymmetryClass::EvenInZ),
        h: u.w.scaled(-1.0),
        v1: SpectralField::zeros(res, SymmetryClass::EvenInZ),
        v2: SpectralField::zeros(res, SymmetryClass::EvenInZ),
        w: u.h.clone(),
    }
}

/// `(L_a + eta L_g) U`.
pub fn apply_perturbed(u: &State, eta: Eta) -> State {
    let mut out = apply_acoustic(u);
    out.axpy(eta.value(), &apply_gravity(u));
    out
}

/// Soundproof fast operator `eta (-w, P_sigma(0, 0, H))`.
pub fn apply_soundproof(s: &ReducedState, eta: Eta) -> ReducedState {
    let res = s.resolution();
    let zero = SpectralField::zeros(res, SymmetryClass::EvenInZ);
    let (v1, v2, w) = leray_project(&zero, &zero, &s.h);
    let mut out = ReducedState { h: s.w.scaled(-1.0), v1, v2, w };
    out.scale(eta.value());
    out
}

/// Removes the gradient part of `(v1, v2, w)` coefficientwise.
pub fn leray_project(v1: &SpectralField, v2: &SpectralField, w: &SpectralField) -> (SpectralField, SpectralField, SpectralField) {
    let mut div = v1.derivative(Axis::X);
    div.axpy(1.0, &v2.derivative(Axis::Y));
    div.axpy(1.0, &w.derivative(Axis::Z));
    // Laplacian psi = div, with psi = 0 on the mean mode.
    let psi = div.map_symbol(|k| if k.is_zero() { 0.0 } else { -1.0 / k.k2() });
    (v1.sub(&psi.derivative(Axis::X)), v2.sub(&psi.derivative(Axis::Y)), w.sub(&psi.derivative(Axis::Z)))
}

/// Leray projection of the velocity part of a reduced state.
pub fn leray_project_reduced(s: &ReducedState) -> ReducedState {
    let (v1, v2, w) = leray_project(&s.v1, &s.v2, &s.w);
    ReducedState { h: s.h.clone(), v1, v2, w }
}

/// Drops the `q` component.
pub fn reduce_dimension(u: &State) -> ReducedState {
    u.reduce()
}

/// Keeps modes with `max(|kx|, |ky|) <= k` and `kz <= k`.
pub fn truncate<S: FieldSet>(u: &S, k: i64) -> S {
    let mut out = u.clone();
    for f in out.fields_mut() {
        *f = f.truncated(k);
    }
    out
}
