//! Fourier multipliers on the circle and alias-free products.

use num_complex::Complex;
use num_traits::{Float, One, Zero};

use super::{Field, PeriodicGrid};
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Largest zero-mode modulus accepted by negative-order operators.
pub fn zero_mode_tolerance<T: Scalar>() -> T {
    Float::max(T::lit(1e-10), T::epsilon() * T::lit(100.0))
}

/// Sign convention of the Riesz (Hilbert) transform on the circle.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RieszSign {
    /// Symbol `-i·sign(n)`; composed with `d/dθ` it is `(-Δ)^{1/2}`.
    #[default]
    Standard,
    /// Symbol `+i·sign(n)`. Only used to exercise the invariant checks.
    Flipped,
}

impl RieszSign {
    #[inline]
    pub fn symbol<T: Scalar>(self, freq: i64) -> Complex<T> {
        let s = match freq.signum() {
            0 => return Complex::zero(),
            1 => -T::one(),
            _ => T::one(),
        };
        let s = if self == RieszSign::Flipped { -s } else { s };
        Complex::new(T::zero(), s)
    }
}

/// Per-index multiplier table. The Nyquist slot holds the average of the
/// symbol at `±N/2`, so even symbols act on it and odd ones annihilate it.
fn symbol_table<T: Scalar>(grid: &PeriodicGrid<T>, symbol: impl Fn(i64) -> Complex<T>) -> Vec<Complex<T>> {
    let n = grid.len();
    let ny = grid.nyquist_index();
    let half = (n / 2) as i64;
    (0..n)
        .map(|k| {
            if k == ny {
                (symbol(-half) + symbol(half)) * T::lit(0.5)
            } else {
                symbol(grid.frequency(k))
            }
        })
        .collect()
}

fn apply_table<T: Scalar>(field: &Field<T>, table: &[Complex<T>]) -> Vec<Vec<Complex<T>>> {
    field
        .spectra()
        .iter()
        .map(|s| s.iter().zip(table).map(|(&c, &m)| c * m).collect())
        .collect()
}

/// Applies `symbol(n)` to every coefficient of every component.
pub fn fourier_multiplier<T: Scalar>(field: &Field<T>, symbol: impl Fn(i64) -> Complex<T>) -> Field<T> {
    let table = symbol_table(field.grid(), symbol);
    Field::from_spectrum(field.grid(), apply_table(field, &table)).expect("shape preserved")
}

/// Multiplier known to satisfy `symbol(-n) = conj(symbol(n))`.
pub(crate) fn hermitian_multiplier<T: Scalar>(field: &Field<T>, symbol: impl Fn(i64) -> Complex<T>) -> Field<T> {
    let table = symbol_table(field.grid(), symbol);
    Field::from_symmetric_spectrum(field.grid(), apply_table(field, &table))
}

/// `|n|^{2s}` with the zero mode sent to zero (or dropped for `s < 0`).
fn frac_symbol<T: Scalar>(s: T) -> impl Fn(i64) -> Complex<T> {
    move |freq| {
        if freq == 0 {
            if s == T::zero() {
                Complex::one()
            } else {
                Complex::zero()
            }
        } else {
            let n = T::lit(freq.unsigned_abs() as f64);
            Complex::new(n.powf(s + s), T::zero())
        }
    }
}

/// `(-Δ)^s`, i.e. the multiplier `|n|^{2s}`, for `s ∈ [-1, 1]`.
///
/// Negative orders require a negligible zero mode (see
/// [`zero_mode_tolerance`]); the mode is dropped.
pub fn frac_laplacian<T: Scalar>(field: &Field<T>, s: T) -> Result<Field<T>> {
    if !(s >= -T::one() && s <= T::one()) {
        return Err(invalid(format!("fractional order {s} outside [-1, 1]")));
    }
    if s < T::zero() {
        check_mean_zero(field)?;
    }
    Ok(hermitian_multiplier(field, frac_symbol(s)))
}

pub(crate) fn check_mean_zero<T: Scalar>(field: &Field<T>) -> Result<()> {
    let tol = zero_mode_tolerance::<T>();
    let m = field.max_zero_mode();
    if m > tol {
        return Err(Error::MeanNotZero {
            modulus: m.to_f64_lossy(),
            tolerance: tol.to_f64_lossy(),
        });
    }
    Ok(())
}

/// `(-Δ)^{1/4}`.
pub fn quarter_laplacian<T: Scalar>(field: &Field<T>) -> Field<T> {
    hermitian_multiplier(field, frac_symbol(T::lit(0.25)))
}

/// `(-Δ)^{1/2}`.
pub fn half_laplacian<T: Scalar>(field: &Field<T>) -> Field<T> {
    hermitian_multiplier(field, frac_symbol(T::lit(0.5)))
}

/// Riesz transform with symbol `-i·sign(n)`.
pub fn riesz<T: Scalar>(field: &Field<T>) -> Field<T> {
    riesz_with(field, RieszSign::Standard)
}

pub fn riesz_with<T: Scalar>(field: &Field<T>, sign: RieszSign) -> Field<T> {
    hermitian_multiplier(field, |n| sign.symbol(n))
}

/// Spectral derivative `d/dθ` (multiplier `in`).
pub fn derivative<T: Scalar>(field: &Field<T>) -> Field<T> {
    hermitian_multiplier(field, |n| Complex::new(T::zero(), T::lit(n as f64)))
}

/// Samples of every component on the doubled grid (zero-padded spectrum).
pub(crate) fn padded_samples<T: Scalar>(field: &Field<T>) -> Vec<Vec<T>> {
    let grid = field.grid();
    let fine = grid.padded();
    let n = grid.len();
    let m = fine.len();
    let ny = grid.nyquist_index();
    let half = T::lit(0.5);
    field
        .spectra()
        .iter()
        .map(|s| {
            let mut buf = vec![Complex::zero(); m];
            for (k, &c) in s.iter().enumerate() {
                if k == ny {
                    buf[n / 2] = c * half;
                    buf[m - n / 2] = c * half;
                } else {
                    let f = grid.frequency(k);
                    let idx = fine.index_of(f).expect("coarse band fits in fine grid");
                    buf[idx] = c;
                }
            }
            fine.synthesize(&buf)
        })
        .collect()
}

/// Projects doubled-grid samples back onto the coarse band `|n| ≤ N/2`.
pub(crate) fn from_padded<T: Scalar>(grid: &PeriodicGrid<T>, fine_samples: Vec<Vec<T>>) -> Field<T> {
    let fine = grid.padded();
    let n = grid.len();
    let m = fine.len();
    let ny = grid.nyquist_index();
    let spectra = fine_samples
        .iter()
        .map(|x| {
            let c = fine.analyze(x);
            (0..n)
                .map(|k| {
                    if k == ny {
                        let v = c[n / 2] + c[m - n / 2];
                        Complex::new(v.re, T::zero())
                    } else {
                        c[fine.index_of(grid.frequency(k)).expect("in band")]
                    }
                })
                .collect()
        })
        .collect();
    Field::from_symmetric_spectrum(grid, spectra)
}

/// Alias-free product of a scalar field with every component of `v`, or the
/// componentwise product when both have the same number of components.
pub fn product<T: Scalar>(a: &Field<T>, v: &Field<T>) -> Result<Field<T>> {
    a.ensure_same_grid(v)?;
    let pa = padded_samples(a);
    let pv = padded_samples(v);
    let out: Vec<Vec<T>> = if a.n_components() == 1 {
        pv.iter()
            .map(|c| c.iter().zip(&pa[0]).map(|(&x, &y)| x * y).collect())
            .collect()
    } else if a.n_components() == v.n_components() {
        pa.iter()
            .zip(&pv)
            .map(|(p, q)| p.iter().zip(q).map(|(&x, &y)| x * y).collect())
            .collect()
    } else {
        return Err(invalid(format!(
            "cannot multiply {}-component and {}-component fields",
            a.n_components(),
            v.n_components()
        )));
    };
    Ok(from_padded(a.grid(), out))
}

/// Alias-free pointwise dot product, a scalar field.
pub fn dot<T: Scalar>(a: &Field<T>, b: &Field<T>) -> Result<Field<T>> {
    a.ensure_conformable(b)?;
    let pa = padded_samples(a);
    let pb = padded_samples(b);
    let m = pa[0].len();
    let mut acc = vec![T::zero(); m];
    for (p, q) in pa.iter().zip(&pb) {
        for ((s, &x), &y) in acc.iter_mut().zip(p).zip(q) {
            *s = *s + x * y;
        }
    }
    Ok(from_padded(a.grid(), vec![acc]))
}
