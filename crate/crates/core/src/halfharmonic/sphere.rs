use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::spectral::{Field, PeriodicGrid};
use crate::Scalar;

/// Largest pointwise `||u| - 1|` accepted for a map into the sphere.
pub const DEFAULT_SPHERE_TOL: f64 = 1e-6;

/// A field with 2 or 3 components taking values in the unit sphere.
#[derive(Clone, Debug)]
pub struct SphereMap<T: Scalar> {
    field: Field<T>,
    sphere_tol: T,
}

impl<T: Scalar> SphereMap<T> {
    pub fn new(field: Field<T>) -> Result<Self> {
        Self::with_tolerance(field, T::lit(DEFAULT_SPHERE_TOL))
    }

    pub fn with_tolerance(field: Field<T>, sphere_tol: T) -> Result<Self> {
        let m = field.n_components();
        if !(2..=3).contains(&m) {
            return Err(invalid(format!("sphere maps have 2 or 3 components, got {m}")));
        }
        let deviation = sphere_deviation(&field);
        if !(deviation <= sphere_tol) {
            return Err(Error::NotOnSphere {
                deviation: deviation.to_f64_lossy(),
                tolerance: sphere_tol.to_f64_lossy(),
            });
        }
        Ok(Self { field, sphere_tol })
    }

    /// Pointwise radial projection `u / |u|`.
    pub fn project(field: &Field<T>) -> Result<Self> {
        let mag = field.magnitude();
        if mag.iter().any(|&r| !(r > T::epsilon().sqrt())) {
            return Err(Error::DegenerateParameter(
                "cannot project a field that vanishes (or is not finite) at a node".into(),
            ));
        }
        let comps = field
            .components()
            .iter()
            .map(|c| c.iter().zip(&mag).map(|(&v, &r)| v / r).collect())
            .collect();
        Self::new(Field::from_components(field.grid(), comps)?)
    }

    pub fn constant(grid: &PeriodicGrid<T>, value: &[T]) -> Result<Self> {
        Self::new(Field::constant(grid, value))
    }

    /// `θ ↦ (cos θ, sin θ)`.
    pub fn identity(grid: &PeriodicGrid<T>) -> Self {
        Self::new(Field::from_fn(grid, 2, |t, out| {
            out[0] = t.cos();
            out[1] = t.sin();
        }))
        .expect("unit circle")
    }

    /// `π(u + ε φ)`.
    pub fn perturb(&self, phi: &Field<T>, eps: T) -> Result<Self> {
        Self::project(&self.field.lin_comb(T::one(), phi, eps)?)
    }

    pub fn field(&self) -> &Field<T> {
        &self.field
    }

    pub fn into_field(self) -> Field<T> {
        self.field
    }

    pub fn grid(&self) -> &PeriodicGrid<T> {
        self.field.grid()
    }

    pub fn n_components(&self) -> usize {
        self.field.n_components()
    }

    pub fn len(&self) -> usize {
        self.field.len()
    }

    pub fn is_empty(&self) -> bool {
        self.field.is_empty()
    }

    pub fn sphere_tol(&self) -> T {
        self.sphere_tol
    }

    /// `max_k ||u(θ_k)| - 1|`.
    pub fn deviation(&self) -> T {
        sphere_deviation(&self.field)
    }
}

pub(crate) fn sphere_deviation<T: Scalar>(field: &Field<T>) -> T {
    field
        .magnitude()
        .into_iter()
        .map(|r| Float::abs(r - T::one()))
        .fold(T::zero(), |a, b| if b > a || b.is_nan() { b } else { a })
}

/// Checks that `field` is sphere-valued within `DEFAULT_SPHERE_TOL`.
pub(crate) fn require_sphere<T: Scalar>(field: &Field<T>) -> Result<()> {
    let tol = T::lit(DEFAULT_SPHERE_TOL);
    let d = sphere_deviation(field);
    if !(d <= tol) {
        return Err(Error::NotOnSphere {
            deviation: d.to_f64_lossy(),
            tolerance: DEFAULT_SPHERE_TOL,
        });
    }
    Ok(())
}
