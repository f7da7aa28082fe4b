use num_complex::Complex;
use num_traits::Float;
use rayon::prelude::*;

use super::energy::LocalEnergy;
use crate::error::{invalid, Error, Result};
use crate::halfharmonic::SphereMap;
use crate::spectral::{Field, PeriodicGrid};
use crate::Scalar;

/// A rescaled copy of `u` about a concentration point.
#[derive(Clone, Debug)]
pub struct Extraction<T: Scalar> {
    pub map: SphereMap<T>,
    pub center: f64,
    pub rho: f64,
    /// Largest `| |ũ| - 1 |` before renormalization.
    pub shift: f64,
    source: LocalEnergy<T>,
}

impl<T: Scalar> Extraction<T> {
    /// Energy carried by the window `|y| ≤ window` of the rescaled line
    /// coordinate `y = tan(φ/2)`, measured on the source density (the density
    /// `|(-Δ)^{1/4}u|²` follows dilations but not Möbius maps pointwise).
    pub fn window_energy(&self, window: f64) -> Result<f64> {
        if !(window > 0.0) {
            return Err(invalid(format!("window {window} must be positive")));
        }
        let half = chart_angle(0.0, self.rho, 2.0 * window.atan()).min(std::f64::consts::PI);
        Ok(self
            .source
            .local_energy(T::lit(self.center), T::lit(half))?
            .to_f64_lossy())
    }
}

/// Line chart about `center`: `θ(φ) = c + 2 arctan(tan(ρ/2) tan(φ/2))`, which is
/// `c + ρ·y` to leading order in `y = tan(φ/2)` and conformal on the whole circle.
pub fn chart_angle(center: f64, rho: f64, phi: f64) -> f64 {
    center + 2.0 * ((rho / 2.0).tan() * (phi / 2.0).tan()).atan()
}

/// Trigonometric interpolant of every component at `theta`.
fn interpolate<T: Scalar>(field: &Field<T>, theta: T) -> Vec<T> {
    let n = field.len();
    let z = Complex::new(Float::cos(theta), Float::sin(theta));
    let two = T::lit(2.0);
    (0..field.n_components())
        .map(|i| {
            let s = field.spectrum(i);
            let mut acc = s[0].re;
            let mut w = z;
            for c in &s[1..n / 2] {
                acc = acc + two * (c * w).re;
                w = w * z;
            }
            // cos(Nθ/2) carries the Nyquist coefficient.
            acc + s[n / 2].re * Float::cos(theta * T::from_usize_lossy(n / 2))
        })
        .collect()
}

/// Resamples `u` through the chart onto `target` and renormalizes to the sphere.
pub fn rescale_extract<T: Scalar>(
    u: &SphereMap<T>,
    center: f64,
    rho: f64,
    target: &PeriodicGrid<T>,
) -> Result<Extraction<T>> {
    if !(rho > 0.0 && rho <= std::f64::consts::FRAC_PI_4) {
        return Err(invalid(format!("rescaling radius {rho} outside (0, π/4]")));
    }
    let m = u.n_components();
    let samples: Vec<Vec<T>> = (0..target.len())
        .into_par_iter()
        .map(|k| {
            let phi = target.node(k).to_f64_lossy();
            interpolate(u.field(), T::lit(chart_angle(center, rho, phi)))
        })
        .collect();
    let mut shift = 0.0_f64;
    let mut comps = vec![Vec::with_capacity(target.len()); m];
    for v in &samples {
        let r = Float::sqrt(v.iter().map(|&x| x * x).sum::<T>());
        shift = shift.max(Float::abs(r - T::one()).to_f64_lossy());
        for (c, &x) in comps.iter_mut().zip(v) {
            c.push(x / r);
        }
    }
    if !(shift <= 1e-3) {
        return Err(Error::ExtractionUnreliable { shift, limit: 1e-3 });
    }
    let map = SphereMap::with_tolerance(Field::from_components(target, comps)?, u.sphere_tol())?;
    Ok(Extraction {
        map,
        center,
        rho,
        shift,
        source: LocalEnergy::new(u),
    })
}
