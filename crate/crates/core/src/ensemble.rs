//! Seeded random fields: the critical-regularity ensemble and random tangent
//! directions.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::halfharmonic::{tangential_part, SphereMap};
use crate::norms::sobolev_seminorm;
use crate::spectral::{Field, PeriodicGrid};
use crate::Scalar;

/// Which member of an ensemble pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Q = 0,
    U = 1,
}

fn rng_for(seed: u64, n_peak: usize, index: usize, role: Role) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n_peak as u64) << 32) | ((2 * index as u64) + role as u64));
    rng
}

/// Scalar field with coefficients `(g₁ + i g₂)/√2 · |n|^{-1/2}` for
/// `1 ≤ |n| ≤ n_peak` (`g` standard normal), scaled to unit `Ḣ^{1/2}` norm.
pub fn critical_sample<T: Scalar>(
    grid: &PeriodicGrid<T>,
    seed: u64,
    n_peak: usize,
    index: usize,
    role: Role,
) -> Result<Field<T>> {
    if n_peak == 0 || n_peak >= grid.len() / 2 {
        return Err(Error::InsufficientResolution(format!(
            "peak frequency {n_peak} needs 1 <= n_peak < N/2 = {}",
            grid.len() / 2
        )));
    }
    let mut rng = rng_for(seed, n_peak, index, role);
    let mut spec = vec![Complex::new(T::zero(), T::zero()); grid.len()];
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    for n in 1..=n_peak {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let damp = inv_sqrt2 / (n as f64).sqrt();
        let z = Complex::new(T::lit(re * damp), T::lit(im * damp));
        spec[n] = z;
        spec[grid.len() - n] = z.conj();
    }
    let f = Field::from_spectrum(grid, vec![spec])?;
    let norm = sobolev_seminorm(&f, T::lit(0.5))?;
    Ok(f.scale(norm.recip()))
}

/// The `(Q, u)` pair with the given index.
pub fn critical_pair<T: Scalar>(
    grid: &PeriodicGrid<T>,
    seed: u64,
    n_peak: usize,
    index: usize,
) -> Result<(Field<T>, Field<T>)> {
    Ok((
        critical_sample(grid, seed, n_peak, index, Role::Q)?,
        critical_sample(grid, seed, n_peak, index, Role::U)?,
    ))
}

/// Random smooth field with `band` modes per component, uniform coefficients.
pub fn band_limited<T: Scalar>(grid: &PeriodicGrid<T>, m: usize, band: usize, rng: &mut impl Rng) -> Result<Field<T>> {
    if band >= grid.len() / 2 {
        return Err(Error::InsufficientResolution(format!(
            "band {band} does not fit below N/2 = {}",
            grid.len() / 2
        )));
    }
    let n = grid.len();
    let spectra = (0..m)
        .map(|_| {
            let mut s = vec![Complex::new(T::zero(), T::zero()); n];
            for k in 0..=band {
                let z = Complex::new(T::lit(rng.random_range(-1.0..1.0)), T::lit(rng.random_range(-1.0..1.0)));
                if k == 0 {
                    s[0] = Complex::new(z.re, T::zero());
                } else {
                    s[k] = z;
                    s[n - k] = z.conj();
                }
            }
            s
        })
        .collect();
    Field::from_spectrum(grid, spectra)
}

/// Band-limited random field projected pointwise onto the tangent spaces of `u`.
pub fn tangent_direction<T: Scalar>(u: &SphereMap<T>, band: usize, rng: &mut impl Rng) -> Result<Field<T>> {
    let raw = band_limited(u.grid(), u.n_components(), band, rng)?;
    Ok(tangential_part(u.field(), &raw))
}
