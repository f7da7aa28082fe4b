use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::SphereMap;
use crate::error::{invalid, Error, Result};
use crate::spectral::{Field, PeriodicGrid};
use crate::Scalar;

/// A finite Blaschke product, optionally composed into `S²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlaschkeSpec {
    pub zeros: Vec<Complex<f64>>,
    pub rotation: Complex<f64>,
    /// Orthogonal map applied after embedding `S¹` as the equator of `S²`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s2_isometry: Option<[[f64; 3]; 3]>,
}

impl Default for BlaschkeSpec {
    fn default() -> Self {
        Self {
            zeros: Vec::new(),
            rotation: Complex::new(1.0, 0.0),
            s2_isometry: None,
        }
    }
}

impl BlaschkeSpec {
    pub fn new(zeros: Vec<Complex<f64>>) -> Self {
        Self {
            zeros,
            ..Self::default()
        }
    }

    /// Zeros on the real axis.
    pub fn real(zeros: &[f64]) -> Self {
        Self::new(zeros.iter().map(|&a| Complex::new(a, 0.0)).collect())
    }

    pub fn with_rotation(mut self, angle: f64) -> Self {
        self.rotation = Complex::from_polar(1.0, angle);
        self
    }

    pub fn with_isometry(mut self, m: [[f64; 3]; 3]) -> Self {
        self.s2_isometry = Some(m);
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (i, a) in self.zeros.iter().enumerate() {
            if !(a.norm() < 1.0) {
                return Err(Error::DegenerateParameter(format!(
                    "zero {i} = {a} has modulus {} >= 1; the factor degenerates to a constant",
                    a.norm()
                )));
            }
        }
        if !((self.rotation.norm() - 1.0).abs() < 1e-12) {
            return Err(invalid(format!("rotation {} is not unimodular", self.rotation)));
        }
        if let Some(m) = &self.s2_isometry {
            for i in 0..3 {
                for j in 0..3 {
                    let dot: f64 = (0..3).map(|k| m[k][i] * m[k][j]).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    if (dot - want).abs() > 1e-12 {
                        return Err(invalid("s2_isometry is not orthogonal to 1e-12"));
                    }
                }
            }
        }
        Ok(())
    }

    /// `rotation · Π (z - a_i) / (1 - conj(a_i) z)` at `z`.
    pub fn eval<T: Scalar>(&self, z: Complex<T>) -> Complex<T> {
        let c = |w: Complex<f64>| Complex::new(T::lit(w.re), T::lit(w.im));
        let mut b = c(self.rotation);
        for &a in &self.zeros {
            let a = c(a);
            b = b * (z - a) / (Complex::new(T::one(), T::zero()) - a.conj() * z);
        }
        b
    }
}

/// Boundary trace of the Blaschke product on `grid`.
pub fn blaschke_trace<T: Scalar>(spec: &BlaschkeSpec, grid: &PeriodicGrid<T>) -> Result<SphereMap<T>> {
    spec.validate()?;
    let planar: Vec<Complex<T>> = grid
        .nodes()
        .into_iter()
        .map(|t| {
            let b = spec.eval(Complex::new(t.cos(), t.sin()));
            // remove the O(ε) modulus drift of the rational evaluation
            b / b.norm()
        })
        .collect();
    let field = match &spec.s2_isometry {
        None => Field::from_components(
            grid,
            vec![
                planar.iter().map(|b| b.re).collect(),
                planar.iter().map(|b| b.im).collect(),
            ],
        )?,
        Some(m) => {
            let mut comps: Vec<Vec<T>> = (0..3).map(|_| Vec::with_capacity(grid.len())).collect();
            for b in &planar {
                for (i, c) in comps.iter_mut().enumerate() {
                    c.push(T::lit(m[i][0]) * b.re + T::lit(m[i][1]) * b.im);
                }
            }
            Field::from_components(grid, comps)?
        }
    };
    SphereMap::new(field)
}

/// Rotation of `R³` by `angle` about the unit `axis`.
pub fn rotation_matrix(axis: [f64; 3], angle: f64) -> [[f64; 3]; 3] {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let [x, y, z] = [axis[0] / n, axis[1] / n, axis[2] / n];
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    [
        [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
        [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
        [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
    ]
}
