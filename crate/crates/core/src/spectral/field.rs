use num_complex::Complex;
use num_traits::{Float, Zero};

use super::PeriodicGrid;
use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Vector-valued samples on a [`PeriodicGrid`] with their Fourier coefficients.
///
/// The spectrum is kept in FFT order (see [`PeriodicGrid::frequency`]) with the
/// convention `û_n = (1/N) Σ_k u(θ_k) e^{-inθ_k}`, so that
/// `∫|u|² dθ = 2π Σ_n |û_n|²`.
#[derive(Clone, Debug)]
pub struct Field<T: Scalar> {
    grid: PeriodicGrid<T>,
    samples: Vec<Vec<T>>,
    spectrum: Vec<Vec<Complex<T>>>,
}

impl<T: Scalar> Field<T> {
    pub fn from_components(grid: &PeriodicGrid<T>, components: Vec<Vec<T>>) -> Result<Self> {
        if components.is_empty() {
            return Err(invalid("a field needs at least one component"));
        }
        for (i, c) in components.iter().enumerate() {
            if c.len() != grid.len() {
                return Err(invalid(format!(
                    "component {i} has {} samples, grid has {}",
                    c.len(),
                    grid.len()
                )));
            }
        }
        let spectrum = components.iter().map(|c| grid.analyze(c)).collect();
        Ok(Self {
            grid: grid.clone(),
            samples: components,
            spectrum,
        })
    }

    /// Builds a field from per-node values `f(θ, out)` with `m` components.
    pub fn from_fn(grid: &PeriodicGrid<T>, m: usize, f: impl Fn(T, &mut [T])) -> Self {
        let mut comps = vec![vec![T::zero(); grid.len()]; m];
        let mut buf = vec![T::zero(); m];
        for k in 0..grid.len() {
            f(grid.node(k), &mut buf);
            for (c, &v) in comps.iter_mut().zip(&buf) {
                c[k] = v;
            }
        }
        Self::from_components(grid, comps).expect("shapes match by construction")
    }

    pub fn scalar_fn(grid: &PeriodicGrid<T>, f: impl Fn(T) -> T) -> Self {
        Self::from_fn(grid, 1, |t, out| out[0] = f(t))
    }

    pub fn constant(grid: &PeriodicGrid<T>, value: &[T]) -> Self {
        let comps = value.iter().map(|&v| vec![v; grid.len()]).collect();
        Self::from_components(grid, comps).expect("non-empty constant")
    }

    pub fn zeros(grid: &PeriodicGrid<T>, m: usize) -> Self {
        Self {
            grid: grid.clone(),
            samples: vec![vec![T::zero(); grid.len()]; m],
            spectrum: vec![vec![Complex::zero(); grid.len()]; m],
        }
    }

    /// Builds a real field from coefficients. Any part of the spectrum that is
    /// not conjugate-symmetric is discarded (the samples are the real part).
    pub fn from_spectrum(grid: &PeriodicGrid<T>, spectra: Vec<Vec<Complex<T>>>) -> Result<Self> {
        if spectra.is_empty() {
            return Err(invalid("a field needs at least one component"));
        }
        let n = grid.len();
        let mut spectrum = Vec::with_capacity(spectra.len());
        let mut samples = Vec::with_capacity(spectra.len());
        let half = T::lit(0.5);
        for (i, s) in spectra.into_iter().enumerate() {
            if s.len() != n {
                return Err(invalid(format!(
                    "spectrum {i} has {} coefficients, grid has {n}",
                    s.len()
                )));
            }
            let sym: Vec<Complex<T>> = (0..n)
                .map(|k| {
                    let mirror = (n - k) % n;
                    (s[k] + s[mirror].conj()) * half
                })
                .collect();
            samples.push(grid.synthesize(&sym));
            spectrum.push(sym);
        }
        Ok(Self {
            grid: grid.clone(),
            samples,
            spectrum,
        })
    }

    /// Adopts a spectrum already known to be conjugate-symmetric.
    pub(crate) fn from_symmetric_spectrum(grid: &PeriodicGrid<T>, spectra: Vec<Vec<Complex<T>>>) -> Self {
        let samples = spectra.iter().map(|s| grid.synthesize(s)).collect();
        Self {
            grid: grid.clone(),
            samples,
            spectrum: spectra,
        }
    }

    #[inline]
    pub fn grid(&self) -> &PeriodicGrid<T> {
        &self.grid
    }

    #[inline]
    pub fn n_components(&self) -> usize {
        self.samples.len()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn component(&self, i: usize) -> &[T] {
        &self.samples[i]
    }

    pub fn components(&self) -> &[Vec<T>] {
        &self.samples
    }

    #[inline]
    pub fn spectrum(&self, i: usize) -> &[Complex<T>] {
        &self.spectrum[i]
    }

    pub fn spectra(&self) -> &[Vec<Complex<T>>] {
        &self.spectrum
    }

    /// `û_n` of component `i`; zero outside the representable band.
    pub fn coefficient(&self, i: usize, freq: i64) -> Complex<T> {
        self.grid
            .index_of(freq)
            .map(|k| self.spectrum[i][k])
            .unwrap_or_else(Complex::zero)
    }

    /// Sample vector at node `k`.
    pub fn at(&self, k: usize) -> Vec<T> {
        self.samples.iter().map(|c| c[k]).collect()
    }

    pub fn mean(&self, i: usize) -> T {
        self.spectrum[i][0].re
    }

    /// Largest `|û_0|` over components.
    pub fn max_zero_mode(&self) -> T {
        self.spectrum.iter().map(|s| s[0].norm()).fold(T::zero(), Float::max)
    }

    /// Pointwise Euclidean magnitude across components.
    pub fn magnitude(&self) -> Vec<T> {
        (0..self.len())
            .map(|k| {
                self.samples
                    .iter()
                    .map(|c| c[k] * c[k])
                    .fold(T::zero(), |a, b| a + b)
                    .sqrt()
            })
            .collect()
    }

    pub fn sup_norm(&self) -> T {
        self.magnitude().into_iter().fold(T::zero(), Float::max)
    }

    /// `∫ f·g dθ` by the trapezoid rule (exact for band-limited products).
    pub fn inner(&self, other: &Self) -> T {
        let h = self.grid.spacing();
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| x * y).sum::<T>())
            .sum::<T>()
            * h
    }

    /// Keeps only the listed components.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            grid: self.grid.clone(),
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
            spectrum: indices.iter().map(|&i| self.spectrum[i].clone()).collect(),
        }
    }

    /// Concatenates the components of several fields on the same grid.
    pub fn stack(parts: &[&Field<T>]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| invalid("nothing to stack"))?;
        let mut out = Field {
            grid: first.grid.clone(),
            samples: Vec::new(),
            spectrum: Vec::new(),
        };
        for p in parts {
            out.ensure_same_grid(p)?;
            out.samples.extend(p.samples.iter().cloned());
            out.spectrum.extend(p.spectrum.iter().cloned());
        }
        Ok(out)
    }

    /// `a·self + b·other`, computed on samples and coefficients alike.
    pub fn lin_comb(&self, a: T, other: &Self, b: T) -> Result<Self> {
        self.ensure_conformable(other)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(x, y)| x.iter().zip(y).map(|(&p, &q)| a * p + b * q).collect())
            .collect();
        let spectrum = self
            .spectrum
            .iter()
            .zip(&other.spectrum)
            .map(|(x, y)| x.iter().zip(y).map(|(&p, &q)| p * a + q * b).collect())
            .collect();
        Ok(Self {
            grid: self.grid.clone(),
            samples,
            spectrum,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.lin_comb(T::one(), other, T::one())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.lin_comb(T::one(), other, -T::one())
    }

    pub fn scale(&self, a: T) -> Self {
        Self {
            grid: self.grid.clone(),
            samples: self
                .samples
                .iter()
                .map(|c| c.iter().map(|&x| a * x).collect())
                .collect(),
            spectrum: self
                .spectrum
                .iter()
                .map(|c| c.iter().map(|&x| x * a).collect())
                .collect(),
        }
    }

    /// Removes the zero mode of every component.
    pub fn without_mean(&self) -> Self {
        let mut spectra = self.spectrum.clone();
        for s in &mut spectra {
            s[0] = Complex::zero();
        }
        Self::from_symmetric_spectrum(&self.grid, spectra)
    }

    pub(crate) fn ensure_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(invalid(format!(
                "grid mismatch: {} vs {} points",
                self.grid.len(),
                other.grid.len()
            )));
        }
        Ok(())
    }

    pub(crate) fn ensure_conformable(&self, other: &Self) -> Result<()> {
        self.ensure_same_grid(other)?;
        if self.n_components() != other.n_components() {
            return Err(invalid(format!(
                "component count mismatch: {} vs {}",
                self.n_components(),
                other.n_components()
            )));
        }
        Ok(())
    }
}

/// Coefficients of every component, in FFT order.
pub fn transform<T: Scalar>(field: &Field<T>) -> Vec<Vec<Complex<T>>> {
    field.spectra().to_vec()
}

/// Rebuilds a field from coefficients; the inverse of [`transform`].
pub fn inverse_transform<T: Scalar>(spectrum: Vec<Vec<Complex<T>>>, grid: &PeriodicGrid<T>) -> Result<Field<T>> {
    Field::from_spectrum(grid, spectrum)
}
