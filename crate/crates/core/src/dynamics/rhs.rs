use super::Model;
use crate::error::{Error, Result};
use crate::spectral_core::{check_same, Axis, FieldSet, ReducedState, Resolution, SpectralField, State, SymmetryClass};
use crate::wave_modes::apply_perturbed;

use SymmetryClass::{EvenInZ, OddInZ};

const THETA_FLOOR: f64 = 1e-8;

/// Masked grid values of a field and of its three derivatives.
pub(crate) struct Gradients {
    pub val: Vec<f64>,
    pub d: [Vec<f64>; 3],
}

pub(crate) fn masked_with_gradients(fields: &[&SpectralField]) -> Vec<Gradients> {
    let mut owned = Vec::with_capacity(3 * fields.len());
    for f in fields {
        owned.push(f.derivative(Axis::X));
        owned.push(f.derivative(Axis::Y));
        owned.push(f.derivative(Axis::Z));
    }
    let mut all: Vec<&SpectralField> = Vec::with_capacity(4 * fields.len());
    for (i, f) in fields.iter().enumerate() {
        all.push(f);
        all.extend(owned[3 * i..3 * i + 3].iter());
    }
    let mut grids = SpectralField::dealiased_grids(&all).into_iter();
    (0..fields.len())
        .map(|_| {
            let val = grids.next().unwrap();
            let d = [grids.next().unwrap(), grids.next().unwrap(), grids.next().unwrap()];
            Gradients { val, d }
        })
        .collect()
}

/// `v1 fx + v2 fy + w fz` pointwise.
pub(crate) fn advect(vel: [&[f64]; 3], f: &Gradients) -> Vec<f64> {
    (0..f.val.len()).map(|j| vel[0][j] * f.d[0][j] + vel[1][j] * f.d[1][j] + vel[2][j] * f.d[2][j]).collect()
}

pub(crate) fn pointwise(a: &[f64], b: &[f64], s: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| s * x * y).collect()
}

fn divergence_grid(v1: &Gradients, v2: &Gradients, w: &Gradients) -> Vec<f64> {
    (0..v1.val.len()).map(|j| v1.d[0][j] + v2.d[1][j] + w.d[2][j]).collect()
}

/// Buoyancy-weighted density `theta = C + eps^mu Gt Hbar0 + eps^(mu+nu) Gt H` on the grid.
#[derive(Debug, Clone)]
pub struct ThetaField {
    pub res: Resolution,
    pub values: Vec<f64>,
    pub min: f64,
}

impl ThetaField {
    pub fn to_spectral(&self) -> Result<SpectralField> {
        SpectralField::to_spectral(&self.values, self.res, EvenInZ)
    }
}

fn theta_values(h_grid: &[f64], res: Resolution, model: &Model) -> Result<(Vec<f64>, f64)> {
    let base = model.theta_base.grid(res.nz);
    let coef = model.theta_h.grid(res.nz);
    let mut min = f64::INFINITY;
    let vals: Vec<f64> = h_grid
        .iter()
        .enumerate()
        .map(|(j, h)| {
            let iz = j % res.nz;
            let t = base[iz] + coef[iz] * h;
            min = min.min(t);
            t
        })
        .collect();
    if !(min > THETA_FLOOR) {
        return Err(Error::NonpositiveTheta { min });
    }
    Ok((vals, min))
}

pub fn theta_field(h: &SpectralField, model: &Model) -> Result<ThetaField> {
    let res = h.resolution();
    let (values, min) = theta_values(&h.to_physical(), res, model)?;
    Ok(ThetaField { res, values, min })
}

fn divergence(v1: &SpectralField, v2: &SpectralField, w: &SpectralField) -> SpectralField {
    let mut d = v1.derivative(Axis::X);
    d.axpy(1.0, &v2.derivative(Axis::Y));
    d.axpy(1.0, &w.derivative(Axis::Z));
    d
}

/// `rhs_full(U) + L_eps U / eps`: everything except the unit-coefficient fast
/// operator, which the exponential integrator treats exactly.
pub fn full_remainder(u: &State, model: &Model) -> Result<State> {
    u.validate()?;
    let res = u.resolution();
    let p = &model.params;
    let eps = p.epsilon;
    let enu = eps.powf(p.nu);
    let kq = model.q_div_coeff();

    let g = masked_with_gradients(&[&u.q, &u.h, &u.v1, &u.v2, &u.w]);
    let (gq, gh, gv1, gv2, gw) = (&g[0], &g[1], &g[2], &g[3], &g[4]);
    let vel = [gv1.val.as_slice(), gv2.val.as_slice(), gw.val.as_slice()];
    let div = divergence_grid(gv1, gv2, gw);
    let (theta, _) = theta_values(&gh.val, res, model)?;
    let inv_c = 1.0 / p.c;

    let n = res.n_points();
    let mut nq = advect(vel, gq);
    for j in 0..n {
        nq[j] = -nq[j] - kq * gq.val[j] * div[j];
    }
    let nh: Vec<f64> = advect(vel, gh).into_iter().map(|x| -x).collect();
    let hw = pointwise(&gh.val, &gw.val, 1.0);
    let mut nv1 = advect(vel, gv1);
    let mut nv2 = advect(vel, gv2);
    let mut nw = advect(vel, gw);
    for j in 0..n {
        let corr = inv_c - 1.0 / theta[j];
        nv1[j] = -nv1[j] + corr * gq.d[0][j] / eps;
        nv2[j] = -nv2[j] + corr * gq.d[1][j] / eps;
        nw[j] = -nw[j] + corr * (gq.d[2][j] / eps + gh.val[j] / enu);
    }
    let mut s = SpectralField::from_grids_dealiased(
        res,
        &[(EvenInZ, &nq), (OddInZ, &nh), (EvenInZ, &nv1), (EvenInZ, &nv2), (OddInZ, &nw), (EvenInZ, &hw)],
    )
    .into_iter();
    let (mut q, mut h, mut v1, mut v2, mut w, hw) =
        (s.next().unwrap(), s.next().unwrap(), s.next().unwrap(), s.next().unwrap(), s.next().unwrap(), s.next().unwrap());

    // Profile-weighted sources, exact in z before truncation.
    let d = divergence(&u.v1, &u.v2, &u.w);
    q.axpy(1.0, &model.w_source.mul_field(&u.w, true));
    q.axpy(kq, &model.primitive_source.mul_field(&d, true));
    h.axpy(1.0, &model.gtilde.mul_field(&hw, true));

    // Linear terms whose constants differ from one.
    q.axpy((1.0 - 1.0 / p.a) / eps, &d);
    h.axpy((1.0 / p.b - 1.0) / enu, &u.w);
    let cl = (1.0 - inv_c) / eps;
    v1.axpy(cl, &u.q.derivative(Axis::X));
    v2.axpy(cl, &u.q.derivative(Axis::Y));
    w.axpy(cl, &u.q.derivative(Axis::Z));
    w.axpy((1.0 - inv_c) / enu, &u.h);
    Ok(State { q, h, v1, v2, w })
}

/// Time derivative of the full compressible system.
pub fn rhs_full(u: &State, model: &Model) -> Result<State> {
    let mut out = full_remainder(u, model)?;
    out.axpy(-1.0 / model.epsilon(), &apply_perturbed(u, model.eta));
    Ok(out)
}

/// `v1 . grad U2 + w1 dz U2 + ((gamma - 1) q1 div u2, -Gt H1 w2, 0, 0)`.
pub fn bilinear_b(u1: &State, u2: &State, model: &Model) -> Result<State> {
    check_same(u1.resolution(), u2.resolution())?;
    let res = u1.resolution();
    let kq = model.q_div_coeff();
    let first = SpectralField::dealiased_grids(&[&u1.v1, &u1.v2, &u1.w, &u1.q, &u1.h]);
    let g = masked_with_gradients(&[&u2.q, &u2.h, &u2.v1, &u2.v2, &u2.w]);
    let vel = [first[0].as_slice(), first[1].as_slice(), first[2].as_slice()];
    let div = divergence_grid(&g[2], &g[3], &g[4]);
    let mut bq = advect(vel, &g[0]);
    for (j, b) in bq.iter_mut().enumerate() {
        *b += kq * first[3][j] * div[j];
    }
    let bh = advect(vel, &g[1]);
    let hw = pointwise(&first[4], &g[4].val, 1.0);
    let b1 = advect(vel, &g[2]);
    let b2 = advect(vel, &g[3]);
    let bw = advect(vel, &g[4]);
    let mut s = SpectralField::from_grids_dealiased(
        res,
        &[(EvenInZ, &bq), (OddInZ, &bh), (EvenInZ, &b1), (EvenInZ, &b2), (OddInZ, &bw), (EvenInZ, &hw)],
    )
    .into_iter();
    let (q, mut h, v1, v2, w, hw) =
        (s.next().unwrap(), s.next().unwrap(), s.next().unwrap(), s.next().unwrap(), s.next().unwrap(), s.next().unwrap());
    h.axpy(-1.0, &model.gtilde.mul_field(&hw, true));
    Ok(State { q, h, v1, v2, w })
}

/// Soundproof counterpart of [`bilinear_b`] on reduced states.
pub fn bilinear_sp(s1: &ReducedState, s2: &ReducedState, model: &Model) -> Result<ReducedState> {
    check_same(s1.resolution(), s2.resolution())?;
    let res = s1.resolution();
    let first = SpectralField::dealiased_grids(&[&s1.v1, &s1.v2, &s1.w, &s1.h]);
    let g = masked_with_gradients(&[&s2.h, &s2.v1, &s2.v2, &s2.w]);
    let vel = [first[0].as_slice(), first[1].as_slice(), first[2].as_slice()];
    let bh = advect(vel, &g[0]);
    let b1 = advect(vel, &g[1]);
    let b2 = advect(vel, &g[2]);
    let bw = advect(vel, &g[3]);
    let hw = pointwise(&first[3], &g[3].val, 1.0);
    let mut s = SpectralField::from_grids_dealiased(res, &[(OddInZ, &bh), (EvenInZ, &b1), (EvenInZ, &b2), (OddInZ, &bw), (EvenInZ, &hw)])
        .into_iter();
    let (mut h, v1, v2, w, hw) = (s.next().unwrap(), s.next().unwrap(), s.next().unwrap(), s.next().unwrap(), s.next().unwrap());
    h.axpy(-1.0, &model.gtilde.mul_field(&hw, true));
    Ok(ReducedState { h, v1, v2, w })
}

/// Order-one linear source `(C G w + (gamma - 1) C IG div u, 0, 0, 0)`.
pub fn linear_source(u: &State, model: &Model) -> State {
    let c = model.params.c;
    let d = divergence(&u.v1, &u.v2, &u.w);
    let mut q = model.g.scaled(c).mul_field(&u.w, true);
    q.axpy(model.q_div_coeff(), &model.ig.scaled(c).mul_field(&d, true));
    let mut out = State::zeros(u.resolution());
    out.q = q;
    out
}

/// `A |q|^2 + B |H|^2 + int theta |u|^2`.
pub fn energy(u: &State, model: &Model) -> Result<f64> {
    let res = u.resolution();
    let p = &model.params;
    let (gh, gv1) = SpectralField::to_physical_pair(&u.h, &u.v1)?;
    let (gv2, gw) = SpectralField::to_physical_pair(&u.v2, &u.w)?;
    let (theta, _) = theta_values(&gh, res, model)?;
    let kinetic: f64 = (0..res.n_points()).map(|j| theta[j] * (gv1[j] * gv1[j] + gv2[j] * gv2[j] + gw[j] * gw[j])).sum::<f64>()
        / res.n_points() as f64;
    Ok(p.a * u.q.inner(&u.q)? + p.b * u.h.inner(&u.h)? + kinetic)
}

/// `B |H|^2 + C |u|^2` for reduced states.
pub fn energy_soundproof(s: &ReducedState, model: &Model) -> f64 {
    let p = &model.params;
    let vel = s.v1.inner(&s.v1).unwrap() + s.v2.inner(&s.v2).unwrap() + s.w.inner(&s.w).unwrap();
    p.b * s.h.inner(&s.h).unwrap() + p.c * vel
}
