use num_traits::Float;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::halfharmonic::SphereMap;
use crate::spectral::ops::quarter_laplacian;
use crate::Scalar;

/// `|(-Δ)^{1/4} u|²` at every node.
pub fn energy_density<T: Scalar>(u: &SphereMap<T>) -> Vec<T> {
    let a = quarter_laplacian(u.field());
    a.magnitude().into_iter().map(|r| r * r).collect()
}

/// Wrapped distance between two angles, in `[0, π]`.
pub fn circle_distance<T: Scalar>(a: T, b: T) -> T {
    let tau = T::TAU();
    let d = (a - b) % tau;
    let d = if d < T::zero() { d + tau } else { d };
    Float::min(d, tau - d)
}

/// An arc `{θ : dist(θ, center) ≤ radius}`; radius `≥ π` is the whole circle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ArcRegion {
    pub center: f64,
    pub radius: f64,
}

impl ArcRegion {
    pub fn whole() -> Self {
        Self {
            center: 0.0,
            radius: std::f64::consts::PI,
        }
    }

    pub fn contains<T: Scalar>(&self, theta: T) -> bool {
        circle_distance(theta, T::lit(self.center)) <= T::lit(self.radius)
    }
}

/// A step density on the circle (node `k` owns the cell `[θ_k - h/2, θ_k + h/2]`)
/// with prefix sums for exact arc integrals.
#[derive(Clone, Debug)]
pub struct LocalEnergy<T: Scalar> {
    density: Vec<T>,
    prefix: Vec<T>,
    cell: T,
}

/// A detected concentration scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Concentration {
    pub node: usize,
    pub center: f64,
    pub rho: f64,
    pub gamma: f64,
}

impl<T: Scalar> LocalEnergy<T> {
    pub fn new(u: &SphereMap<T>) -> Self {
        Self::from_density(energy_density(u)).expect("grid has nodes")
    }

    /// From node values of a non-negative density on an equispaced grid.
    pub fn from_density(density: Vec<T>) -> Result<Self> {
        if density.is_empty() {
            return Err(invalid("empty density"));
        }
        if density.iter().any(|&d| !(d >= T::zero())) {
            return Err(invalid("density must be non-negative and finite"));
        }
        let cell = T::TAU() / T::from_usize_lossy(density.len());
        let mut prefix = Vec::with_capacity(density.len() + 1);
        prefix.push(T::zero());
        let mut acc = T::zero();
        for &d in &density {
            acc = acc + d * cell;
            prefix.push(acc);
        }
        Ok(Self { density, prefix, cell })
    }

    pub fn len(&self) -> usize {
        self.density.len()
    }

    pub fn is_empty(&self) -> bool {
        self.density.is_empty()
    }

    pub fn density(&self) -> &[T] {
        &self.density
    }

    pub fn cell(&self) -> T {
        self.cell
    }

    pub fn node(&self, k: usize) -> T {
        self.cell * T::from_usize_lossy(k)
    }

    pub fn total(&self) -> T {
        self.prefix[self.len()]
    }

    /// `∫_{-h/2}^{x}` of the periodic step density.
    fn cumulative(&self, x: T) -> T {
        let n = self.len() as i64;
        let s = (x + self.cell * T::lit(0.5)) / self.cell;
        let i = Float::floor(s);
        let frac = s - i;
        let i = i.to_i64().expect("finite position");
        let periods = i.div_euclid(n);
        let k = i.rem_euclid(n) as usize;
        self.total() * T::lit(periods as f64) + self.prefix[k] + frac * self.density[k] * self.cell
    }

    /// Energy in the arc of radius `rho` about `center`, `0 < rho ≤ π`.
    pub fn local_energy(&self, center: T, rho: T) -> Result<T> {
        if !(rho > T::zero() && rho <= T::PI()) {
            return Err(invalid(format!("arc radius {rho} outside (0, π]")));
        }
        if rho >= T::PI() {
            return Ok(self.total());
        }
        Ok(self.cumulative(center + rho) - self.cumulative(center - rho))
    }

    /// Density zeroed outside `keep`.
    pub fn masked(&self, keep: impl Fn(usize) -> bool) -> Self {
        let d = self
            .density
            .iter()
            .enumerate()
            .map(|(k, &v)| if keep(k) { v } else { T::zero() })
            .collect();
        Self::from_density(d).expect("masking keeps the density valid")
    }

    /// Smallest `ρ` at which an arc centred at a node of `region` holds `gamma`
    /// of the density restricted to `region`. Ties go to the smallest node index.
    pub fn concentration(&self, gamma: T, region: ArcRegion) -> Result<Option<Concentration>> {
        if !(gamma > T::zero()) {
            return Err(invalid(format!("threshold {gamma} must be positive")));
        }
        let local = self.masked(|k| region.contains(self.node(k)));
        if local.total() < gamma {
            return Ok(None);
        }
        let n = self.len();
        let h = self.cell;
        let half = h * T::lit(0.5);
        let mut best: Option<(usize, T)> = None;
        for k in (0..n).filter(|&k| region.contains(self.node(k))) {
            let bound = best.map(|b| b.1).unwrap_or(T::infinity());
            if let Some(rho) = local.radius_at(k, gamma, bound, half) {
                // Relative slack so rounding noise cannot beat the smallest index.
                if best.is_none_or(|b| rho < b.1 * (T::one() - T::lit(1e-9))) {
                    best = Some((k, rho));
                }
            }
        }
        Ok(best.map(|(k, rho)| Concentration {
            node: k,
            center: self.node(k).to_f64_lossy(),
            rho: rho.to_f64_lossy(),
            gamma: gamma.to_f64_lossy(),
        }))
    }

    /// Inverts `ρ ↦ E(θ_k, ρ)` at `gamma`, giving up once `ρ` would exceed `bound`.
    fn radius_at(&self, k: usize, gamma: T, bound: T, half: T) -> Option<T> {
        let n = self.len();
        let h = self.cell;
        let d = &self.density;
        let dk = d[k];
        if dk * h >= gamma {
            return Some(gamma / (dk + dk));
        }
        let mut cum = dk * h;
        for j in 1..=n / 2 {
            let start = half + h * T::from_usize_lossy(j - 1);
            if start > bound {
                return None;
            }
            let (lo, hi) = ((k + n - j) % n, (k + j) % n);
            let (slope, len) = if lo == hi {
                (d[lo] + d[lo], half)
            } else {
                (d[lo] + d[hi], h)
            };
            let next = cum + slope * len;
            if next >= gamma && slope > T::zero() {
                return Some(Float::min(start + (gamma - cum) / slope, T::PI()));
            }
            cum = next;
        }
        None
    }
}

/// Energy of `u` in the arc of radius `rho` about `center`.
pub fn local_energy<T: Scalar>(u: &SphereMap<T>, center: T, rho: T) -> Result<T> {
    LocalEnergy::new(u).local_energy(center, rho)
}

pub fn concentration_radius<T: Scalar>(u: &SphereMap<T>, gamma: T, region: ArcRegion) -> Result<Option<Concentration>> {
    LocalEnergy::new(u).concentration(gamma, region)
}

/// Energy of one dyadic annulus `B(c, 2ρ) \ B(c, ρ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DyadicAnnulus {
    pub rho: f64,
    pub energy: f64,
}

/// Dyadic annulus energies and cumulative arc energies about a center.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyProfile {
    pub center: f64,
    pub lambda: f64,
    pub big_lambda: f64,
    /// `ρ = λ, 2λ, 4λ, …` with `2ρ ≤ Λ^{-1}`.
    pub annuli: Vec<DyadicAnnulus>,
    /// `(ρ, E(B(c, ρ)))` at every annulus boundary.
    pub arcs: Vec<(f64, f64)>,
    pub total: f64,
}

impl EnergyProfile {
    pub fn build<T: Scalar>(density: &LocalEnergy<T>, center: f64, lambda: f64, big_lambda: f64) -> Result<Self> {
        let outer = 1.0 / big_lambda;
        if !(lambda > 0.0 && big_lambda > 0.0 && outer <= std::f64::consts::PI && 2.0 * lambda <= outer * (1.0 + 1e-12))
        {
            return Err(invalid(format!(
                "need 0 < λ < (2Λ)^-1 ≤ π, got λ = {lambda}, Λ = {big_lambda}"
            )));
        }
        let c = T::lit(center);
        let arc = |r: f64| {
            density
                .local_energy(c, T::lit(r.min(std::f64::consts::PI)))
                .map(|e| e.to_f64_lossy())
        };
        let mut annuli = Vec::new();
        let mut arcs = vec![(lambda, arc(lambda)?)];
        let mut rho = lambda;
        while 2.0 * rho <= outer * (1.0 + 1e-12) {
            let inner = arcs.last().expect("seeded").1;
            let e2 = arc(2.0 * rho)?;
            annuli.push(DyadicAnnulus {
                rho,
                energy: (e2 - inner).max(0.0),
            });
            arcs.push((2.0 * rho, e2));
            rho *= 2.0;
        }
        Ok(Self {
            center,
            lambda,
            big_lambda,
            annuli,
            arcs,
            total: density.total().to_f64_lossy(),
        })
    }

    /// Profile of a raw node density (for synthetic fixtures).
    pub fn from_density(density: &[f64], center: f64, lambda: f64, big_lambda: f64) -> Result<Self> {
        Self::build(
            &LocalEnergy::from_density(density.to_vec())?,
            center,
            lambda,
            big_lambda,
        )
    }
}

pub fn annulus_profile<T: Scalar>(
    u: &SphereMap<T>,
    center: f64,
    lambda: f64,
    big_lambda: f64,
) -> Result<EnergyProfile> {
    EnergyProfile::build(&LocalEnergy::new(u), center, lambda, big_lambda)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GapKind {
    /// Bounded radius ratio carrying at least `γ`.
    I0,
    /// Every dyadic sub-annulus holds at most `2γ`.
    I1,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Gap {
    pub outer: f64,
    pub inner: f64,
    pub kind: GapKind,
    pub energy: f64,
    pub max_dyadic: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnnulusClassification {
    /// `R⁰ > R¹ > …`
    pub boundaries: Vec<f64>,
    pub gaps: Vec<Gap>,
    pub gamma: f64,
    /// Post-hoc check that every `I1` gap respects the `2γ` bound.
    pub verified: bool,
}

/// Outside-in scan: maximal runs of dyadic annuli with energy `≤ 2γ` are `I1`
/// gaps, the runs between them `I0` gaps.
pub fn classify_annuli(profile: &EnergyProfile, gamma: f64) -> Result<AnnulusClassification> {
    if !(gamma > 0.0) {
        return Err(invalid(format!("threshold {gamma} must be positive")));
    }
    let mut gaps: Vec<Gap> = Vec::new();
    for a in profile.annuli.iter().rev() {
        let kind = if a.energy <= 2.0 * gamma {
            GapKind::I1
        } else {
            GapKind::I0
        };
        match gaps.last_mut() {
            Some(g) if g.kind == kind => {
                g.inner = a.rho;
                g.energy += a.energy;
                g.max_dyadic = g.max_dyadic.max(a.energy);
            }
            _ => gaps.push(Gap {
                outer: 2.0 * a.rho,
                inner: a.rho,
                kind,
                energy: a.energy,
                max_dyadic: a.energy,
            }),
        }
    }
    let mut boundaries: Vec<f64> = gaps.iter().map(|g| g.outer).collect();
    if let Some(g) = gaps.last() {
        boundaries.push(g.inner);
    }
    let verified = gaps
        .iter()
        .all(|g| g.kind == GapKind::I0 || g.max_dyadic <= 2.0 * gamma);
    Ok(AnnulusClassification {
        boundaries,
        gaps,
        gamma,
        verified,
    })
}
