//! Harmonic extension to the unit disk and its Dirichlet energy.

use num_complex::Complex;
use num_traits::Zero;

use super::{Field, PeriodicGrid};
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// How the radial quadrature weights were obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RadialRule {
    /// Composite trapezoid over the given nodes plus the implicit node `r = 0`.
    Trapezoid,
    /// Gauss–Legendre nodes on `(0, 1)` plus the boundary ring with weight 0.
    GaussLegendre,
}

/// Radial nodes in `(0, 1]` (always including `1`) with quadrature weights.
#[derive(Clone, Debug)]
pub struct RadialNodes<T: Scalar> {
    nodes: Vec<T>,
    weights: Vec<T>,
    rule: RadialRule,
}

impl<T: Scalar> RadialNodes<T> {
    /// Caller-chosen nodes with composite-trapezoid weights.
    pub fn from_nodes(nodes: Vec<T>) -> Result<Self> {
        validate_nodes(&nodes)?;
        if nodes.last() != Some(&T::one()) {
            return Err(invalid("radial nodes must include the boundary r = 1"));
        }
        let half = T::lit(0.5);
        let mut weights = vec![T::zero(); nodes.len()];
        let mut prev = T::zero();
        for i in 0..nodes.len() {
            let h = nodes[i] - prev;
            weights[i] = weights[i] + h * half;
            if i > 0 {
                weights[i - 1] = weights[i - 1] + h * half;
            }
            prev = nodes[i];
        }
        Ok(Self {
            nodes,
            weights,
            rule: RadialRule::Trapezoid,
        })
    }

    /// `m` equispaced nodes `1/m, 2/m, …, 1`.
    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(invalid("need at least one radial node"));
        }
        let mf = T::from_usize_lossy(m);
        Self::from_nodes((1..=m).map(|i| T::from_usize_lossy(i) / mf).collect())
    }

    /// `m - 1` Gauss–Legendre nodes on `(0, 1)` and the boundary ring.
    ///
    /// Exact for the integrand `r^{2|n|-1}` of every mode with `|n| < m - 1`.
    pub fn gauss_legendre(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(invalid("Gauss–Legendre radial rule needs at least 2 nodes"));
        }
        let (x, w) = gauss_legendre_unit(m - 1);
        let mut nodes: Vec<T> = x.iter().map(|&v| T::lit(v)).collect();
        let mut weights: Vec<T> = w.iter().map(|&v| T::lit(v)).collect();
        nodes.push(T::one());
        weights.push(T::zero());
        Ok(Self {
            nodes,
            weights,
            rule: RadialRule::GaussLegendre,
        })
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn rule(&self) -> RadialRule {
        self.rule
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn validate_nodes<T: Scalar>(nodes: &[T]) -> Result<()> {
    if nodes.is_empty() {
        return Err(invalid("need at least one radial node"));
    }
    for (i, &r) in nodes.iter().enumerate() {
        if !(r > T::zero() && r <= T::one()) {
            return Err(invalid(format!("radial node {i} = {r} outside (0, 1]")));
        }
        if i > 0 && r <= nodes[i - 1] {
            return Err(invalid("radial nodes must be strictly increasing"));
        }
    }
    Ok(())
}

/// Gauss–Legendre nodes and weights mapped to `(0, 1)`, ascending.
fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        // map [-1, 1] -> [0, 1]
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * wi;
        w[n - 1 - i] = 0.5 * wi;
    }
    (x, w)
}

/// Values of the harmonic extension on a polar product grid.
#[derive(Clone, Debug)]
pub struct DiskField<T: Scalar> {
    grid: PeriodicGrid<T>,
    radial: RadialNodes<T>,
    /// `values[ring][component][node]`
    values: Vec<Vec<Vec<T>>>,
    boundary: Vec<Vec<Complex<T>>>,
}

impl<T: Scalar> DiskField<T> {
    pub fn grid(&self) -> &PeriodicGrid<T> {
        &self.grid
    }

    pub fn radial(&self) -> &RadialNodes<T> {
        &self.radial
    }

    pub fn n_components(&self) -> usize {
        self.boundary.len()
    }

    /// Samples of component `comp` on ring `ring`.
    pub fn ring(&self, ring: usize, comp: usize) -> &[T] {
        &self.values[ring][comp]
    }

    /// Samples on the outermost ring (`r = 1`).
    pub fn boundary_ring(&self, comp: usize) -> &[T] {
        &self.values[self.values.len() - 1][comp]
    }
}

/// Harmonic extension `Σ_n û_n r^{|n|} e^{inθ}` sampled on `radial × grid`.
pub fn poisson_extend<T: Scalar>(field: &Field<T>, radial: &RadialNodes<T>) -> Result<DiskField<T>> {
    validate_nodes(radial.nodes())?;
    let grid = field.grid();
    let values = radial
        .nodes()
        .iter()
        .map(|&r| {
            field
                .spectra()
                .iter()
                .map(|s| grid.synthesize(&radial_scaled(grid, s, r, 0)))
                .collect()
        })
        .collect();
    Ok(DiskField {
        grid: grid.clone(),
        radial: radial.clone(),
        values,
        boundary: field.spectra().to_vec(),
    })
}

/// Coefficients `|n|^p · r^{|n| - p} · û_n` (the `p`-th radial factor).
fn radial_scaled<T: Scalar>(grid: &PeriodicGrid<T>, s: &[Complex<T>], r: T, p: i32) -> Vec<Complex<T>> {
    // r^m for m = 0..=N/2 by repeated multiplication; relative error stays O(N ε).
    let mut powers = Vec::with_capacity(grid.len() / 2 + 1);
    let mut acc = T::one();
    for _ in 0..=grid.len() / 2 {
        powers.push(acc);
        acc = acc * r;
    }
    s.iter()
        .enumerate()
        .map(|(k, &c)| {
            let n = grid.frequency(k).unsigned_abs() as i32;
            if n < p {
                return Complex::zero();
            }
            let factor = T::lit(f64::from(n)).powi(p) * powers[(n - p) as usize];
            c * factor
        })
        .collect()
}

/// `∫_D |∇ũ|²` by the stored radial rule and the periodic trapezoid in `θ`.
pub fn dirichlet_energy<T: Scalar>(disk: &DiskField<T>) -> Result<T> {
    if disk.radial.len() < 4 {
        return Err(Error::InsufficientResolution(format!(
            "{} radial nodes, need at least 4",
            disk.radial.len()
        )));
    }
    let grid = &disk.grid;
    let h = grid.spacing();
    let ny = grid.nyquist_index();
    let mut total = T::zero();
    for (&r, &w) in disk.radial.nodes().iter().zip(disk.radial.weights()) {
        if w == T::zero() {
            continue;
        }
        let mut ring = T::zero();
        for s in &disk.boundary {
            // ∂_r ũ and r^{-1} ∂_θ ũ share the factor |n| r^{|n|-1}.
            let radial_part = radial_scaled(grid, s, r, 1);
            let angular_part: Vec<Complex<T>> = radial_part
                .iter()
                .enumerate()
                .map(|(k, &c)| {
                    if k == ny {
                        return Complex::zero();
                    }
                    let sign = T::lit(grid.frequency(k).signum() as f64);
                    c * Complex::new(T::zero(), sign)
                })
                .collect();
            let dr = grid.synthesize(&radial_part);
            let dt = grid.synthesize(&angular_part);
            ring = ring + dr.iter().zip(&dt).map(|(&a, &b)| a * a + b * b).sum::<T>();
        }
        total = total + w * r * ring * h;
    }
    Ok(total)
}

/// `2π Σ_n |n| |û_n|²`, the closed form the quadrature converges to.
pub fn boundary_energy<T: Scalar>(field: &Field<T>) -> T {
    let grid = field.grid();
    let two_pi = T::lit(2.0 * std::f64::consts::PI);
    field
        .spectra()
        .iter()
        .map(|s| {
            s.iter()
                .enumerate()
                .map(|(k, c)| T::lit(grid.frequency(k).unsigned_abs() as f64) * c.norm_sqr())
                .sum::<T>()
        })
        .sum::<T>()
        * two_pi
}
