//! A fast invariant suite over every module, with a hook that corrupts the
//! Riesz transform to show which checks notice.

use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bubbling::LocalEnergy;
use crate::commutators::{op_s_with, structure_identity_residual_with, MatrixField};
use crate::ensemble::{band_limited, tangent_direction};
use crate::error::{Error, Result};
use crate::halfharmonic::{blaschke_trace, degree, el_residual, energy, gradient_check, BlaschkeSpec, SphereMap};
use crate::lp::{paraproduct, DyadicFamily, Paraproduct};
use crate::norms::{gagliardo_half, lorentz, sobolev_seminorm_sq, Lorentz};
use crate::spectral::disk::{dirichlet_energy, poisson_extend, RadialNodes};
use crate::spectral::ops::{derivative, half_laplacian, riesz_with, RieszSign};
use crate::spectral::{Field, PeriodicGrid};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SelfTestConfig {
    pub n: usize,
    pub seed: u64,
    #[serde(skip)]
    pub riesz: RieszSign,
}

impl Default for SelfTestConfig {
    fn default() -> Self {
        Self {
            n: 1024,
            seed: 1,
            riesz: RieszSign::Standard,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantResult {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelfTestReport {
    pub n: usize,
    pub seed: u64,
    pub results: Vec<InvariantResult>,
}

impl SelfTestReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.results.iter().filter(|r| !r.passed).map(|r| r.name).collect()
    }
}

fn check(name: &'static str, value: f64, tolerance: f64) -> InvariantResult {
    InvariantResult {
        name,
        value,
        tolerance,
        passed: value <= tolerance,
    }
}

pub fn run_selftest(cfg: &SelfTestConfig) -> Result<SelfTestReport> {
    let g = PeriodicGrid::<f64>::new(cfg.n)?;
    if g.len() < 64 {
        return Err(Error::InsufficientResolution(format!(
            "self-test needs N >= 64, got {}",
            g.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let band = g.len() / 8;
    let f = band_limited(&g, 1, band, &mut rng)?;
    let h = band_limited(&g, 1, band, &mut rng)?;
    let b = blaschke_trace(&BlaschkeSpec::real(&[0.0, 0.5]), &g)?;
    let mut out = Vec::new();

    let l2: f64 = f.component(0).iter().map(|x| x * x).sum::<f64>() * g.spacing();
    let parseval = TAU * f.spectrum(0).iter().map(|c| c.norm_sqr()).sum::<f64>();
    out.push(check("parseval", (l2 - parseval).abs() / parseval, 1e-12));

    let rd = riesz_with(&derivative(&f), cfg.riesz).sub(&half_laplacian(&f))?;
    out.push(check(
        "riesz_derivative",
        rd.sup_norm() / half_laplacian(&f).sup_norm(),
        1e-12,
    ));

    let e = energy(&b);
    out.push(check("energy_quantization", (e / (2.0 * TAU) - 1.0).abs(), 1e-6));
    out.push(check("degree", (degree(&b)?.raw - 2.0).abs(), 1e-6));
    out.push(check("euler_lagrange", el_residual(&b)?.1, 1e-8));

    let disk = poisson_extend(b.field(), &RadialNodes::gauss_legendre(64)?)?;
    out.push(check("extension_identity", (dirichlet_energy(&disk)? - e).abs(), 1e-4));

    let fam = DyadicFamily::for_grid(&g);
    let sum = Paraproduct::ALL
        .iter()
        .map(|&w| paraproduct(&f, &h, &fam, w))
        .try_fold(Field::zeros(&g, 1), |acc, p| acc.add(&p?))?;
    let prod = Field::from_components(
        &g,
        vec![f.component(0).iter().zip(h.component(0)).map(|(a, b)| a * b).collect()],
    )?;
    let scale = f.sup_norm() * h.sup_norm();
    out.push(check(
        "paraproduct_reconstruction",
        prod.sub(&sum)?.sup_norm() / scale,
        1e-10,
    ));

    let one = MatrixField::scalar(Field::constant(&g, &[1.0]))?;
    let s = op_s_with(&one, &f, cfg.riesz)?;
    out.push(check(
        "s_cancellation",
        s.sup_norm() / half_laplacian(&f).sup_norm(),
        1e-10,
    ));

    let st = structure_identity_residual_with(&b, cfg.riesz)?;
    out.push(check("structure_identity", st.residual, 1e-8));

    let smooth = band_limited(&g, 1, 8, &mut rng)?.without_mean();
    let ratio = gagliardo_half(&smooth).powi(2) / sobolev_seminorm_sq(&smooth, 0.5)?;
    out.push(check("gagliardo_fourier", (ratio / TAU - 1.0).abs(), 1e-2));

    let l21 = lorentz(&f, Lorentz::TwoOne);
    let l2inf = lorentz(&f, Lorentz::TwoInf);
    out.push(check("lorentz_order", (l2inf - l21).max(0.0), 0.0));

    let le = LocalEnergy::new(&b);
    out.push(check("local_energy_total", (le.total() - e).abs(), 1e-10));

    let id = SphereMap::identity(&g);
    let phi = tangent_direction(&id, 8, &mut rng)?;
    let base = id.perturb(&phi, 0.05)?;
    let gc = gradient_check(&base, &tangent_direction(&base, 8, &mut rng)?, 1e-5)?;
    out.push(check("gradient", gc.relative_error, 1e-5));

    Ok(SelfTestReport {
        n: g.len(),
        seed: cfg.seed,
        results: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_suite_passes() {
        let r = run_selftest(&SelfTestConfig::default()).unwrap();
        assert!(r.passed(), "{:?}", r.results);
        assert_eq!(r.results.len(), 13);
    }

    #[test]
    fn flipped_riesz_is_caught() {
        let cfg = SelfTestConfig {
            riesz: RieszSign::Flipped,
            ..SelfTestConfig::default()
        };
        let r = run_selftest(&cfg).unwrap();
        let fails = r.failures();
        assert!(fails.contains(&"s_cancellation"));
        assert!(fails.contains(&"riesz_derivative"));
        // The structure identity is algebraic in R and survives the flip.
        assert!(!fails.contains(&"structure_identity"));
    }

    #[test]
    fn bad_sizes() {
        for n in [1000, 32] {
            let cfg = SelfTestConfig {
                n,
                ..SelfTestConfig::default()
            };
            assert!(run_selftest(&cfg).is_err());
        }
    }
}
