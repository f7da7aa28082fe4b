use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Uniform `N`-point discretization of the circle with cached FFT plans.
///
/// Nodes are `θ_k = 2πk/N`; each node carries the measure `2π/N`. Cloning is
/// cheap (the plans are shared).
#[derive(Clone)]
pub struct PeriodicGrid<T: Scalar> {
    inner: Arc<GridInner<T>>,
}

struct GridInner<T: Scalar> {
    n: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    padded: OnceLock<PeriodicGrid<T>>,
}

impl<T: Scalar> PeriodicGrid<T> {
    pub const MIN_POINTS: usize = 8;

    pub fn new(n: usize) -> Result<Self> {
        if n < Self::MIN_POINTS || !n.is_power_of_two() {
            return Err(invalid(format!(
                "grid size must be a power of two >= {}, got {n}",
                Self::MIN_POINTS
            )));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        Ok(Self {
            inner: Arc::new(GridInner {
                n,
                forward,
                inverse,
                padded: OnceLock::new(),
            }),
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.inner.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Node spacing, which is also the quadrature weight of every node.
    #[inline]
    pub fn spacing(&self) -> T {
        T::lit(2.0 * PI / self.inner.n as f64)
    }

    #[inline]
    pub fn node(&self, k: usize) -> T {
        T::lit(2.0 * PI * k as f64 / self.inner.n as f64)
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.len()).map(|k| self.node(k)).collect()
    }

    /// Signed frequency stored at FFT index `k`, in `[-N/2, N/2)`.
    #[inline]
    pub fn frequency(&self, k: usize) -> i64 {
        let n = self.inner.n;
        if k < n / 2 {
            k as i64
        } else {
            k as i64 - n as i64
        }
    }

    /// FFT index of signed frequency `freq`; `None` outside `[-N/2, N/2)`.
    #[inline]
    pub fn index_of(&self, freq: i64) -> Option<usize> {
        let half = (self.inner.n / 2) as i64;
        if freq < -half || freq >= half {
            None
        } else if freq >= 0 {
            Some(freq as usize)
        } else {
            Some((self.inner.n as i64 + freq) as usize)
        }
    }

    /// Index of the Nyquist mode `-N/2`.
    #[inline]
    pub fn nyquist_index(&self) -> usize {
        self.inner.n / 2
    }

    /// The grid with twice as many nodes, used for alias-free products.
    pub fn padded(&self) -> &PeriodicGrid<T> {
        self.inner
            .padded
            .get_or_init(|| PeriodicGrid::new(2 * self.inner.n).expect("doubled grid is valid"))
    }

    /// Unnormalized forward DFT in place: `X_k = Σ x_j e^{-2πijk/N}`.
    pub(crate) fn fft_forward(&self, buf: &mut [Complex<T>]) {
        self.inner.forward.process(buf);
    }

    /// Unnormalized inverse DFT in place.
    pub(crate) fn fft_inverse(&self, buf: &mut [Complex<T>]) {
        self.inner.inverse.process(buf);
    }

    /// Coefficients `û_n = (1/N) Σ u(θ_k) e^{-inθ_k}` of real samples.
    pub(crate) fn analyze(&self, samples: &[T]) -> Vec<Complex<T>> {
        let mut buf: Vec<Complex<T>> = samples.iter().map(|&x| Complex::new(x, T::zero())).collect();
        self.fft_forward(&mut buf);
        let scale = T::one() / T::from_usize_lossy(self.len());
        for c in &mut buf {
            *c = *c * scale;
        }
        buf
    }

    /// Real part of `Σ_n û_n e^{inθ_k}`.
    pub(crate) fn synthesize(&self, spectrum: &[Complex<T>]) -> Vec<T> {
        let mut buf = spectrum.to_vec();
        self.fft_inverse(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }
}

impl<T: Scalar> PartialEq for PeriodicGrid<T> {
    fn eq(&self, other: &Self) -> bool {
        self.inner.n == other.inner.n
    }
}

impl<T: Scalar> fmt::Debug for PeriodicGrid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicGrid").field("n_points", &self.inner.n).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(PeriodicGrid::<f64>::new(4).is_err());
        assert!(PeriodicGrid::<f64>::new(12).is_err());
        assert!(PeriodicGrid::<f64>::new(0).is_err());
        assert!(PeriodicGrid::<f64>::new(8).is_ok());
    }

    #[test]
    fn nodes_are_equispaced_and_cover_the_circle() {
        let g = PeriodicGrid::<f64>::new(64).unwrap();
        let nodes = g.nodes();
        assert_eq!(nodes[0], 0.0);
        for w in nodes.windows(2) {
            assert!((w[1] - w[0] - g.spacing()).abs() < 1e-14);
        }
        assert!(*nodes.last().unwrap() < 2.0 * PI);
    }

    #[test]
    fn frequency_index_roundtrip() {
        let g = PeriodicGrid::<f64>::new(16).unwrap();
        for k in 0..16 {
            assert_eq!(g.index_of(g.frequency(k)), Some(k));
        }
        assert_eq!(g.frequency(8), -8);
        assert_eq!(g.index_of(8), None);
    }
}
