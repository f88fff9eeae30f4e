use super::rhs::{advect, masked_with_gradients, pointwise};
use super::Model;
use crate::error::{Error, Result};
use crate::spectral_core::{Axis, FieldSet, ReducedState, SpectralField, SymmetryClass, ZProfile};
use crate::wave_modes::leray_project;

use SymmetryClass::{EvenInZ, OddInZ};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 50;

/// Relative stopping level used when a pressure feeds a right-hand side.
const INNER_REL_TOL: f64 = 1e-14;
const INNER_MAX_ITER: usize = 200;
/// Constraint residual accepted on input states, relative to `|grad u|`.
const CONSTRAINT_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct PressureSolveReport {
    /// Zero-mean solution.
    pub solution: SpectralField,
    pub iterations: usize,
    /// Norm of the last fixed-point increment (zero for the direct solve).
    pub residual: f64,
    /// `| -div(phi grad p) - F |`.
    pub equation_residual: f64,
}

fn check_compatible(f: &SpectralField) -> Result<()> {
    let mean = f.mean();
    if mean.abs() > 1e-12 * f.norm().max(1.0) {
        return Err(Error::IncompatibleRhs { mean });
    }
    Ok(())
}

/// Inverse of `-Laplacian` on zero-mean fields.
fn inverse_neg_laplacian(f: &SpectralField) -> SpectralField {
    f.map_symbol(|k| if k.is_zero() { 0.0 } else { 1.0 / k.k2() })
}

fn gradient(p: &SpectralField) -> [SpectralField; 3] {
    [p.derivative(Axis::X), p.derivative(Axis::Y), p.derivative(Axis::Z)]
}

fn divergence(v1: &SpectralField, v2: &SpectralField, w: &SpectralField) -> SpectralField {
    let mut d = v1.derivative(Axis::X);
    d.axpy(1.0, &v2.derivative(Axis::Y));
    d.axpy(1.0, &w.derivative(Axis::Z));
    d
}

/// `div T[phi u]` with the z-profile product formed exactly before truncation.
pub fn weighted_divergence(v1: &SpectralField, v2: &SpectralField, w: &SpectralField, phi: &ZProfile) -> SpectralField {
    divergence(&phi.mul_field(v1, true), &phi.mul_field(v2, true), &phi.mul_field(w, true))
}

/// Solves `-Laplacian p = F` coefficientwise.
pub fn solve_pressure_poisson(f: &SpectralField) -> Result<PressureSolveReport> {
    check_compatible(f)?;
    let p = inverse_neg_laplacian(f);
    let lap = p.map_symbol(|k| k.k2());
    let mut centred = f.clone();
    centred.axpy(-1.0, &constant_like(f, f.mean()));
    let equation_residual = lap.sub(&centred).norm();
    Ok(PressureSolveReport { solution: p, iterations: 1, residual: 0.0, equation_residual })
}

fn constant_like(f: &SpectralField, c: f64) -> SpectralField {
    let res = f.resolution();
    SpectralField::from_fn(res, f.symmetry(), |k| {
        if k.is_zero() && f.symmetry() == EvenInZ {
            num_complex::Complex64::new(c, 0.0)
        } else {
            num_complex::Complex64::new(0.0, 0.0)
        }
    })
}

fn weighted_laplacian(p: &SpectralField, phi: &ZProfile) -> SpectralField {
    let [px, py, pz] = gradient(p);
    weighted_divergence(&px, &py, &pz, phi)
}

fn is_unit(phi: &ZProfile) -> bool {
    phi.coeffs.first().copied() == Some(1.0) && phi.coeffs.iter().skip(1).all(|&c| c == 0.0)
}

fn weighted_iterate(f: &SpectralField, phi: &ZProfile, tol: impl Fn(f64) -> f64, max_iter: usize) -> Result<PressureSolveReport> {
    check_compatible(f)?;
    if is_unit(phi) {
        return solve_pressure_poisson(f);
    }
    let dev = phi.plus(&ZProfile::constant(-1.0));
    let mut p = SpectralField::zeros(f.resolution(), f.symmetry());
    let mut update = f64::INFINITY;
    for it in 1..=max_iter {
        let mut rhs = f.clone();
        if it > 1 {
            rhs.axpy(1.0, &weighted_laplacian(&p, &dev));
        }
        let next = inverse_neg_laplacian(&rhs);
        update = next.sub(&p).norm();
        p = next;
        if update <= tol(p.norm()) {
            let mut eq = weighted_laplacian(&p, phi);
            eq.axpy(1.0, f);
            return Ok(PressureSolveReport { solution: p, iterations: it, residual: update, equation_residual: eq.norm() });
        }
    }
    Err(Error::NoConvergence { iterations: max_iter, update })
}

/// Solves `-div(phi grad p) = F` by the fixed point
/// `-Laplacian p_next = F + div((phi - 1) grad p)` from `p = 0`, stopping once
/// the increment drops below `tol`.
pub fn solve_pressure_weighted(f: &SpectralField, phi: &ZProfile, tol: f64, max_iter: usize) -> Result<PressureSolveReport> {
    weighted_iterate(f, phi, |_| tol, max_iter)
}

fn solve_weighted_tight(f: &SpectralField, phi: &ZProfile) -> Result<PressureSolveReport> {
    weighted_iterate(f, phi, |n| INNER_REL_TOL * n.max(f64::MIN_POSITIVE), INNER_MAX_ITER)
}

fn velocity_scale(s: &ReducedState) -> f64 {
    let res = s.resolution();
    let kmax = 2.0 * std::f64::consts::PI * (res.nx.max(res.ny).max(res.nz) / 2) as f64;
    let u2 = s.v1.inner(&s.v1).unwrap() + s.v2.inner(&s.v2).unwrap() + s.w.inner(&s.w).unwrap();
    (u2.sqrt() * kmax).max(1.0)
}

fn check_constraint(residual: f64, s: &ReducedState) -> Result<()> {
    if residual > CONSTRAINT_TOL * velocity_scale(s) {
        return Err(Error::DivergenceViolation { residual });
    }
    Ok(())
}

/// Dealiased advection of every reduced component plus `T[H w]`.
struct Advection {
    h: SpectralField,
    v1: SpectralField,
    v2: SpectralField,
    w: SpectralField,
    hw: SpectralField,
}

fn advection(s: &ReducedState) -> Advection {
    let g = masked_with_gradients(&[&s.h, &s.v1, &s.v2, &s.w]);
    let vel = [g[1].val.as_slice(), g[2].val.as_slice(), g[3].val.as_slice()];
    let ah = advect(vel, &g[0]);
    let a1 = advect(vel, &g[1]);
    let a2 = advect(vel, &g[2]);
    let aw = advect(vel, &g[3]);
    let hw = pointwise(&g[0].val, &g[3].val, 1.0);
    let mut out = SpectralField::from_grids_dealiased(
        s.resolution(),
        &[(OddInZ, &ah), (EvenInZ, &a1), (EvenInZ, &a2), (OddInZ, &aw), (EvenInZ, &hw)],
    )
    .into_iter();
    Advection {
        h: out.next().unwrap(),
        v1: out.next().unwrap(),
        v2: out.next().unwrap(),
        w: out.next().unwrap(),
        hw: out.next().unwrap(),
    }
}

/// Assembles the time derivative given the advection terms and a pressure.
fn assemble(s: &ReducedState, adv: &Advection, p: &SpectralField, model: &Model) -> ReducedState {
    let pr = &model.params;
    let enu = model.epsilon().powf(model.nu());
    let inv_c = 1.0 / pr.c;
    let [px, py, pz] = gradient(p);
    let mut h = adv.h.scaled(-1.0);
    h.axpy(1.0 / (pr.b * enu), &s.w);
    h.axpy(1.0, &model.gtilde.mul_field(&adv.hw, true));
    let mut v1 = adv.v1.scaled(-1.0);
    v1.axpy(-inv_c, &px);
    let mut v2 = adv.v2.scaled(-1.0);
    v2.axpy(-inv_c, &py);
    let mut w = adv.w.scaled(-1.0);
    w.axpy(-inv_c, &pz);
    w.axpy(-inv_c / enu, &s.h);
    ReducedState { h, v1, v2, w }
}

fn soundproof_source(s: &ReducedState, adv: &Advection, model: &Model) -> SpectralField {
    let enu = model.epsilon().powf(model.nu());
    let mut f = divergence(&adv.v1, &adv.v2, &adv.w).scaled(model.params.c);
    f.axpy(1.0 / enu, &s.h.derivative(Axis::Z));
    f
}

/// Soundproof pressure from `-Laplacian p = C div T[u . grad u] + eps^-nu dz H`.
pub fn soundproof_pressure(s: &ReducedState, model: &Model) -> Result<SpectralField> {
    let adv = advection(s);
    Ok(solve_pressure_poisson(&soundproof_source(s, &adv, model))?.solution)
}

/// Time derivative of the soundproof model on divergence-free states.
pub fn rhs_soundproof(s: &ReducedState, model: &Model) -> Result<ReducedState> {
    check_constraint(s.divergence().norm(), s)?;
    let adv = advection(s);
    let p = solve_pressure_poisson(&soundproof_source(s, &adv, model))?.solution;
    Ok(assemble(s, &adv, &p, model))
}

fn intermediate_source(s: &ReducedState, adv: &Advection, model: &Model) -> SpectralField {
    let enu = model.epsilon().powf(model.nu());
    let phi = &model.phi;
    let mut f = weighted_divergence(&adv.v1, &adv.v2, &adv.w, phi).scaled(model.params.c);
    f.axpy(1.0 / enu, &phi.mul_field(&s.h, true).derivative(Axis::Z));
    f
}

/// Pressure of the intermediate model from
/// `-div(phi grad p) = C div T[phi u . grad u] + eps^-nu dz T[phi H]`.
pub fn intermediate_pressure(s: &ReducedState, model: &Model) -> Result<PressureSolveReport> {
    let adv = advection(s);
    solve_weighted_tight(&intermediate_source(s, &adv, model), &model.phi)
}

/// Time derivative of the intermediate model on weighted-divergence-free states.
pub fn rhs_intermediate(s: &ReducedState, model: &Model) -> Result<ReducedState> {
    check_constraint(weighted_divergence(&s.v1, &s.v2, &s.w, &model.phi).norm(), s)?;
    let adv = advection(s);
    let p = solve_weighted_tight(&intermediate_source(s, &adv, model), &model.phi)?.solution;
    Ok(assemble(s, &adv, &p, model))
}

/// Velocity-gradient form of the soundproof pressure source, valid for
/// divergence-free velocities.
pub fn soundproof_pressure_source_display(s: &ReducedState, model: &Model) -> SpectralField {
    let enu = model.epsilon().powf(model.nu());
    let g = masked_with_gradients(&[&s.v1, &s.v2, &s.w]);
    let quad = velocity_quadratic(&g);
    let c = model.params.c;
    let grid: Vec<f64> = quad.iter().map(|x| c * x).collect();
    let mut f = SpectralField::from_grids_dealiased(s.resolution(), &[(EvenInZ, &grid)]).remove(0);
    f.axpy(1.0 / enu, &s.h.derivative(Axis::Z));
    f
}

/// `(grad_h v)^T : grad_h v + 2 dz v . grad_h w + (dz w)^2`.
fn velocity_quadratic(g: &[super::rhs::Gradients]) -> Vec<f64> {
    let (v1, v2, w) = (&g[0], &g[1], &g[2]);
    (0..v1.val.len())
        .map(|j| {
            let hh = v1.d[0][j] * v1.d[0][j] + 2.0 * v1.d[1][j] * v2.d[0][j] + v2.d[1][j] * v2.d[1][j];
            let mixed = 2.0 * (v1.d[2][j] * w.d[0][j] + v2.d[2][j] * w.d[1][j]);
            hh + mixed + w.d[2][j] * w.d[2][j]
        })
        .collect()
}

/// Pressure source of the intermediate model in its expanded form with the
/// `w dz phi` cross terms, evaluated on the grid.
pub fn intermediate_pressure_source_display(s: &ReducedState, model: &Model) -> SpectralField {
    let res = s.resolution();
    let enu = model.epsilon().powf(model.nu());
    let phi = &model.phi;
    let (p0, p1, p2) = (phi.grid(res.nz), phi.derivative().grid(res.nz), phi.derivative().derivative().grid(res.nz));
    let g = masked_with_gradients(&[&s.v1, &s.v2, &s.w]);
    let quad = velocity_quadratic(&g);
    let c = model.params.c;
    let grid: Vec<f64> = (0..res.n_points())
        .map(|j| {
            let iz = j % res.nz;
            let w = g[2].val[j];
            let divh = g[0].d[0][j] + g[1].d[1][j];
            let wz = g[2].d[2][j];
            c * (p0[iz] * quad[j] - w * p1[iz] * divh - w * w * p2[iz] - w * p1[iz] * wz)
        })
        .collect();
    let mut f = SpectralField::from_grids_dealiased(res, &[(EvenInZ, &grid)]).remove(0);
    f.axpy(1.0 / enu, &phi.mul_field(&s.h, true).derivative(Axis::Z));
    f
}

/// Velocity satisfying `div T[phi u] = 0`: the band-limited part has a
/// gradient `grad psi` removed with `div(phi grad psi) = div(phi u)`, and the
/// part outside the band, which the weighted constraint does not see, is
/// Leray-projected.
pub fn pseudo_incompressible_project(
    v1: &SpectralField,
    v2: &SpectralField,
    w: &SpectralField,
    phi: &ZProfile,
) -> Result<(SpectralField, SpectralField, SpectralField)> {
    let (b1, b2, b3) = (v1.dealiased(), v2.dealiased(), w.dealiased());
    let f = weighted_divergence(&b1, &b2, &b3, phi).scaled(-1.0);
    let psi = if f.max_abs() == 0.0 { SpectralField::zeros(f.resolution(), EvenInZ) } else { solve_weighted_tight(&f, phi)?.solution };
    let [gx, gy, gz] = gradient(&psi);
    let (r1, r2, r3) = leray_project(&v1.sub(&b1), &v2.sub(&b2), &w.sub(&b3));
    Ok((b1.sub(&gx).add(&r1), b2.sub(&gy).add(&r2), b3.sub(&gz).add(&r3)))
}
