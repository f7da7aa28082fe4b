use serde::Serialize;

use super::energy::{circle_distance, LocalEnergy};
use crate::error::{invalid, Error, Result};
use crate::norms::{lorentz_of_magnitudes, Lorentz};
use crate::Scalar;

/// Annulus `λ ≤ |θ - c| < Λ^{-1}` and its dyadic sub-annuli `[ρ, 2ρ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NeckParams {
    pub center: f64,
    pub lambda: f64,
    pub big_lambda: f64,
    /// Geometric samples of `ρ` per octave.
    pub steps_per_octave: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NeckReport {
    pub params: NeckParams,
    /// `∫_annulus |(-Δ)^{1/4}u|²`.
    pub annulus_energy: f64,
    /// `sup_ρ ∫_{ρ ≤ |θ-c| < 2ρ} |(-Δ)^{1/4}u|²`.
    pub sup_dyadic: f64,
    /// `annulus_energy / sup_dyadic^{1/2}`.
    pub energy_ratio: f64,
    /// `annulus_energy^{1/2} / sup_dyadic^{1/2}`.
    pub l2_ratio: f64,
    /// `L^{2,∞}` of `|(-Δ)^{1/4}u|` restricted to the annulus.
    pub lorentz_2inf: f64,
    /// `L^{2,1}` of `|(-Δ)^{1/4}u|` on the whole circle.
    pub lorentz_21_global: f64,
    /// `annulus_energy ≤ L^{2,1}·L^{2,∞}` (with rounding slack).
    pub duality_holds: bool,
}

impl NeckParams {
    pub fn new(center: f64, lambda: f64, big_lambda: f64) -> Self {
        Self {
            center,
            lambda,
            big_lambda,
            steps_per_octave: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        let outer = 1.0 / self.big_lambda;
        if !(self.lambda > 0.0 && self.big_lambda > 0.0 && 2.0 * self.lambda <= outer && outer <= std::f64::consts::PI)
        {
            return Err(invalid(format!(
                "need 0 < 2λ ≤ Λ^-1 ≤ π, got λ = {}, Λ = {}",
                self.lambda, self.big_lambda
            )));
        }
        if self.steps_per_octave == 0 {
            return Err(invalid("steps per octave must be positive"));
        }
        Ok(())
    }
}

/// Neck estimate on node masks of a cached density.
pub fn neck_check<T: Scalar>(density: &LocalEnergy<T>, params: NeckParams) -> Result<NeckReport> {
    params.validate()?;
    let c = T::lit(params.center);
    let dist: Vec<f64> = (0..density.len())
        .map(|k| circle_distance(density.node(k), c).to_f64_lossy())
        .collect();
    let d: Vec<f64> = density.density().iter().map(|v| v.to_f64_lossy()).collect();
    let h = density.cell().to_f64_lossy();
    let band = |lo: f64, hi: f64| -> f64 {
        dist.iter()
            .zip(&d)
            .filter(|(&r, _)| r >= lo && r < hi)
            .map(|(_, &v)| v * h)
            .sum()
    };
    let outer = 1.0 / params.big_lambda;
    let annulus_energy = band(params.lambda, outer);

    let mut sup_dyadic = 0.0_f64;
    let step = 2f64.powf(1.0 / params.steps_per_octave as f64);
    let mut rho = params.lambda;
    while 2.0 * rho <= outer * (1.0 + 1e-12) {
        sup_dyadic = sup_dyadic.max(band(rho, 2.0 * rho));
        rho *= step;
    }
    if sup_dyadic <= 0.0 && annulus_energy > 0.0 {
        return Err(Error::InconsistentProfile(format!(
            "annulus carries energy {annulus_energy:e} but every dyadic piece is empty"
        )));
    }
    let (energy_ratio, l2_ratio) = if annulus_energy > 0.0 {
        (annulus_energy / sup_dyadic.sqrt(), (annulus_energy / sup_dyadic).sqrt())
    } else {
        (0.0, 0.0)
    };

    let amp: Vec<f64> = d.iter().map(|v| v.sqrt()).collect();
    let masked: Vec<f64> = amp
        .iter()
        .zip(&dist)
        .map(|(&a, &r)| if r >= params.lambda && r < outer { a } else { 0.0 })
        .collect();
    let lorentz_2inf = lorentz_of_magnitudes(&masked, h, Lorentz::TwoInf);
    let lorentz_21_global = lorentz_of_magnitudes(&amp, h, Lorentz::TwoOne);
    let duality_holds = annulus_energy <= lorentz_21_global * lorentz_2inf * (1.0 + 1e-10) + 1e-300;

    Ok(NeckReport {
        params,
        annulus_energy,
        sup_dyadic,
        energy_ratio,
        l2_ratio,
        lorentz_2inf,
        lorentz_21_global,
        duality_holds,
    })
}
