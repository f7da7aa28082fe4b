use num_traits::Float;
use serde::Serialize;

use super::sphere::require_sphere;
use super::SphereMap;
use crate::error::{invalid, Error, Result};
use crate::norms::sobolev_seminorm_sq;
use crate::spectral::ops::{derivative, half_laplacian};
use crate::spectral::Field;
use crate::Scalar;

/// `L(u) = 2π Σ_n |n| |û_n|²`.
pub fn energy<T: Scalar>(u: &SphereMap<T>) -> T {
    sobolev_seminorm_sq(u.field(), T::lit(0.5)).expect("order 1/2 is valid")
}

/// `u ∧ (-Δ)^{1/2} u` (a scalar for two components, the cross product for three)
/// and its sup norm.
pub fn el_residual<T: Scalar>(u: &SphereMap<T>) -> Result<(Field<T>, T)> {
    require_sphere(u.field())?;
    let h = half_laplacian(u.field());
    let w = wedge_samples(u.field(), &h);
    let field = Field::from_components(u.grid(), w)?;
    let sup = field.sup_norm();
    Ok((field, sup))
}

/// Pointwise `a ∧ b` of two fields with 2 or 3 components.
pub(crate) fn wedge_samples<T: Scalar>(a: &Field<T>, b: &Field<T>) -> Vec<Vec<T>> {
    let n = a.len();
    let c = |f: &Field<T>, i: usize| f.component(i).to_vec();
    match a.n_components() {
        2 => {
            let (a1, a2, b1, b2) = (c(a, 0), c(a, 1), c(b, 0), c(b, 1));
            vec![(0..n).map(|k| a1[k] * b2[k] - a2[k] * b1[k]).collect()]
        }
        3 => {
            let (a1, a2, a3) = (a.component(0), a.component(1), a.component(2));
            let (b1, b2, b3) = (b.component(0), b.component(1), b.component(2));
            vec![
                (0..n).map(|k| a2[k] * b3[k] - a3[k] * b2[k]).collect(),
                (0..n).map(|k| a3[k] * b1[k] - a1[k] * b3[k]).collect(),
                (0..n).map(|k| a1[k] * b2[k] - a2[k] * b1[k]).collect(),
            ]
        }
        m => panic!("wedge of {m}-component fields"),
    }
}

/// Winding number of a map into `S¹`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Degree {
    pub value: i64,
    /// The winding integral before rounding.
    pub raw: f64,
    /// Whether `raw` is within 1e-6 of `value`.
    pub exact: bool,
}

/// `(1/2π) ∮ (u₁ u₂' - u₂ u₁') dθ`, rounded.
pub fn degree<T: Scalar>(u: &SphereMap<T>) -> Result<Degree> {
    if u.n_components() != 2 {
        return Err(invalid("degree is defined for maps into S¹ only"));
    }
    let du = derivative(u.field());
    let (u1, u2) = (u.field().component(0), u.field().component(1));
    let (d1, d2) = (du.component(0), du.component(1));
    let s: T = (0..u.len()).map(|k| u1[k] * d2[k] - u2[k] * d1[k]).sum();
    let raw = (s * u.grid().spacing() / T::TAU()).to_f64_lossy();
    let value = raw.round();
    let distance = (raw - value).abs();
    if !(distance <= 0.1) {
        return Err(Error::DegreeUndetermined { value: raw, distance });
    }
    Ok(Degree {
        value: value as i64,
        raw,
        exact: distance <= 1e-6,
    })
}

/// `(-Δ)^{1/2} u - ⟨(-Δ)^{1/2} u, u⟩ u`.
pub fn tangential_gradient<T: Scalar>(u: &SphereMap<T>) -> Result<Field<T>> {
    require_sphere(u.field())?;
    Ok(tangential_part(u.field(), &half_laplacian(u.field())))
}

/// Pointwise projection of `v` onto the tangent space at `u`.
pub fn tangential_part<T: Scalar>(u: &Field<T>, v: &Field<T>) -> Field<T> {
    let n = u.len();
    let m = u.n_components();
    let mut comps = v.components().to_vec();
    for k in 0..n {
        let d: T = (0..m).map(|i| u.component(i)[k] * v.component(i)[k]).sum();
        for (i, c) in comps.iter_mut().enumerate() {
            c[k] = c[k] - d * u.component(i)[k];
        }
    }
    Field::from_components(u.grid(), comps).expect("same shape")
}

/// Outcome of comparing the analytic first variation with a central difference.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GradientCheck {
    pub analytic: f64,
    pub finite_difference: f64,
    pub relative_error: f64,
}

/// Largest `|⟨φ, u⟩|` accepted for a tangential direction.
pub const TANGENCY_TOL: f64 = 1e-10;

pub fn gradient_check<T: Scalar>(u: &SphereMap<T>, phi: &Field<T>, h: T) -> Result<GradientCheck> {
    u.field().ensure_conformable(phi)?;
    if !(h > T::zero()) {
        return Err(invalid(format!("finite-difference step {h} must be positive")));
    }
    let m = u.n_components();
    let normal = (0..u.len())
        .map(|k| {
            Float::abs(
                (0..m)
                    .map(|i| u.field().component(i)[k] * phi.component(i)[k])
                    .sum::<T>(),
            )
        })
        .fold(T::zero(), Float::max);
    if !(normal <= T::lit(TANGENCY_TOL)) {
        return Err(invalid(format!(
            "direction is not tangential: max |<phi, u>| = {:e}",
            normal.to_f64_lossy()
        )));
    }
    let g = tangential_gradient(u)?;
    let analytic = T::lit(2.0) * g.inner(phi);
    let plus = energy(&u.perturb(phi, h)?);
    let minus = energy(&u.perturb(phi, -h)?);
    let fd = (plus - minus) / (h + h);
    let (a, b) = (analytic.to_f64_lossy(), fd.to_f64_lossy());
    let scale = a.abs().max(b.abs());
    let relative_error = if scale == 0.0 { 0.0 } else { (a - b).abs() / scale };
    Ok(GradientCheck {
        analytic: a,
        finite_difference: b,
        relative_error,
    })
}
