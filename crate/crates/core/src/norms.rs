//! Scalar functionals of fields: Sobolev, Lebesgue, Lorentz, Hardy and Besov
//! quantities, the dyadic maximal function and the interpolation ratio.

use num_complex::Complex;
use num_traits::Float;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::lp::{project, project_low, DyadicFamily};
use crate::spectral::ops::{check_mean_zero, frac_laplacian, hermitian_multiplier};
use crate::spectral::Field;
use crate::Scalar;

/// A norm or seminorm that can be evaluated on a field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormSpec {
    Lebesgue { p: f64 },
    Sobolev { s: f64 },
    GagliardoHalf,
    Lorentz2Inf,
    Lorentz21,
    HardyProxy,
    Besov0InfInf,
}

impl NormSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NormSpec::Lebesgue { p } if !(p >= 1.0) => Err(invalid(format!("Lebesgue exponent {p} < 1"))),
            NormSpec::Sobolev { s } if !(-1.0..=1.0).contains(&s) => {
                Err(invalid(format!("Sobolev order {s} outside [-1, 1]")))
            }
            _ => Ok(()),
        }
    }

    /// Evaluates with default auxiliary data (dyadic family and scale set of the grid).
    pub fn evaluate<T: Scalar>(&self, field: &Field<T>) -> Result<T> {
        self.validate()?;
        match *self {
            NormSpec::Lebesgue { p } => lebesgue_norm(field, T::lit(p)),
            NormSpec::Sobolev { s } => sobolev_seminorm(field, T::lit(s)),
            NormSpec::GagliardoHalf => Ok(gagliardo_half(field)),
            NormSpec::Lorentz2Inf => Ok(lorentz(field, Lorentz::TwoInf)),
            NormSpec::Lorentz21 => Ok(lorentz(field, Lorentz::TwoOne)),
            NormSpec::HardyProxy => hardy_proxy(field, &default_hardy_scales(field.len())),
            NormSpec::Besov0InfInf => besov_0_inf_inf(field, &DyadicFamily::for_grid(field.grid())),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            NormSpec::Lebesgue { p } => format!("L^{p}"),
            NormSpec::Sobolev { s } => format!("H^{s}"),
            NormSpec::GagliardoHalf => "gagliardo_half".into(),
            NormSpec::Lorentz2Inf => "L^(2,inf)".into(),
            NormSpec::Lorentz21 => "L^(2,1)".into(),
            NormSpec::HardyProxy => "hardy_proxy".into(),
            NormSpec::Besov0InfInf => "B^0_(inf,inf)".into(),
        }
    }
}

fn two_pi<T: Scalar>() -> T {
    T::TAU()
}

/// `2π Σ_n |n|^{2s} |û_n|²` over all components.
///
/// For `s = 1/2` this is the energy `L(u)`; the zero mode counts only at `s = 0`.
pub fn sobolev_seminorm_sq<T: Scalar>(field: &Field<T>, s: T) -> Result<T> {
    if !(s >= -T::one() && s <= T::one()) {
        return Err(invalid(format!("Sobolev order {s} outside [-1, 1]")));
    }
    if s < T::zero() {
        check_mean_zero(field)?;
    }
    let grid = field.grid();
    let weights: Vec<T> = (0..grid.len())
        .map(|k| {
            let n = grid.frequency(k).unsigned_abs();
            if n == 0 {
                if s == T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            } else {
                T::lit(n as f64).powf(s + s)
            }
        })
        .collect();
    let total: T = field
        .spectra()
        .iter()
        .map(|sp| sp.iter().zip(&weights).map(|(c, &w)| w * c.norm_sqr()).sum::<T>())
        .sum();
    Ok(two_pi::<T>() * total)
}

/// `‖u‖_{Ḣ^s}`.
pub fn sobolev_seminorm<T: Scalar>(field: &Field<T>, s: T) -> Result<T> {
    sobolev_seminorm_sq(field, s).map(Float::sqrt)
}

/// `(∫ |u|^p)^{1/p}` of the pointwise magnitude; `p = ∞` gives the sup norm.
pub fn lebesgue_norm<T: Scalar>(field: &Field<T>, p: T) -> Result<T> {
    if !(p >= T::one()) {
        return Err(invalid(format!("Lebesgue exponent {p} < 1")));
    }
    let mag = field.magnitude();
    if p.is_infinite() {
        return Ok(mag.iter().copied().fold(T::zero(), Float::max));
    }
    let h = field.grid().spacing();
    let s: T = mag.iter().map(|&v| v.powf(p)).sum();
    Ok((s * h).powf(p.recip()))
}

/// Square root of `∬ |u(θ)-u(φ)|² / (2 sin((θ-φ)/2))² dθ dφ` by the
/// off-diagonal double sum.
pub fn gagliardo_half<T: Scalar>(field: &Field<T>) -> T {
    let n = field.len();
    let h = field.grid().spacing();
    let kernel: Vec<T> = (0..n)
        .map(|k| {
            if k == 0 {
                T::zero()
            } else {
                let d = T::lit(2.0) * (T::PI() * T::from_usize_lossy(k) / T::from_usize_lossy(n)).sin();
                (d * d).recip()
            }
        })
        .collect();
    let comps = field.components();
    let rows: Vec<T> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = T::zero();
            for (k, &w) in kernel.iter().enumerate().take(n).skip(1) {
                let j = (i + k) % n;
                let diff: T = comps.iter().map(|c| (c[i] - c[j]) * (c[i] - c[j])).sum();
                row = row + diff * w;
            }
            row
        })
        .collect();
    let total: T = rows.into_iter().sum();
    (total * h * h).sqrt()
}

/// The two Lorentz norms computed here.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lorentz {
    /// `sup_λ λ |{|f| ≥ λ}|^{1/2}`
    TwoInf,
    /// `∫_0^∞ |{|f| ≥ λ}|^{1/2} dλ`
    TwoOne,
}

/// Lorentz norm of the pointwise magnitude of `field`.
pub fn lorentz<T: Scalar>(field: &Field<T>, kind: Lorentz) -> T {
    lorentz_of_magnitudes(&field.magnitude(), field.grid().spacing(), kind)
}

/// Lorentz norm of a step function taking value `|values[k]|` on cells of
/// measure `cell`.
pub fn lorentz_of_magnitudes<T: Scalar>(values: &[T], cell: T, kind: Lorentz) -> T {
    let mut v: Vec<T> = values.iter().map(|x| Float::abs(*x)).collect();
    v.sort_by(|a, b| b.partial_cmp(a).expect("finite magnitudes"));
    let mut acc = T::zero();
    for k in 0..v.len() {
        let mu = (cell * T::from_usize_lossy(k + 1)).sqrt();
        match kind {
            Lorentz::TwoInf => acc = Float::max(acc, v[k] * mu),
            Lorentz::TwoOne => {
                let next = v.get(k + 1).copied().unwrap_or(T::zero());
                acc = acc + (v[k] - next) * mu;
            }
        }
    }
    acc
}

/// Scales `π 2^{-j}`, `j = 0..=log₂N - 2`.
pub fn default_hardy_scales<T: Scalar>(n: usize) -> Vec<T> {
    let top = n.trailing_zeros().saturating_sub(2) as i32;
    (0..=top).map(|j| T::PI() * T::lit(2f64.powi(-j))).collect()
}

/// `∫ max_t |φ_t * f|` over the given scales, with `φ_t` the periodized
/// Gaussian of width `t` (unit mass).
pub fn hardy_proxy<T: Scalar>(field: &Field<T>, scales: &[T]) -> Result<T> {
    if scales.is_empty() {
        return Err(invalid("hardy proxy needs at least one scale"));
    }
    if let Some(t) = scales.iter().find(|&&t| !(t > T::zero() && t <= T::PI())) {
        return Err(invalid(format!("hardy scale {t} outside (0, π]")));
    }
    let mut envelope = vec![T::zero(); field.len()];
    for &t in scales {
        let smooth = hermitian_multiplier(field, |n| {
            let x = T::lit(n as f64) * t;
            Complex::new((-(x * x) * T::lit(0.5)).exp(), T::zero())
        });
        for (e, m) in envelope.iter_mut().zip(smooth.magnitude()) {
            *e = Float::max(*e, m);
        }
    }
    Ok(envelope.into_iter().sum::<T>() * field.grid().spacing())
}

/// `max_j ‖P_j f‖_∞`.
pub fn besov_0_inf_inf<T: Scalar>(field: &Field<T>, family: &DyadicFamily) -> Result<T> {
    if !family.covers(field.grid()) {
        return Err(invalid("dyadic family does not cover the grid's frequency band"));
    }
    let mut best = T::zero();
    for j in family.range() {
        best = Float::max(best, project(field, family, j)?.sup_norm());
    }
    Ok(best)
}

/// Arc averages of `|f|` over radii `2π 2^{-j}` (plus the point value),
/// maximized at every node.
pub fn maximal_function<T: Scalar>(field: &Field<T>) -> Field<T> {
    let n = field.len();
    let mag = field.magnitude();
    // prefix sums over three periods so every arc is one contiguous range
    let mut prefix = vec![T::zero(); 3 * n + 1];
    for i in 0..3 * n {
        prefix[i + 1] = prefix[i] + mag[i % n];
    }
    let mut half_widths = vec![0usize];
    let mut j = 1;
    loop {
        let w = (n >> j).min(n / 2);
        if w == 0 {
            break;
        }
        half_widths.push(w);
        j += 1;
    }
    let out: Vec<T> = (0..n)
        .map(|k| {
            half_widths
                .iter()
                .map(|&w| {
                    let count = (2 * w + 1).min(n);
                    let lo = n + k - w;
                    let sum = prefix[lo + count] - prefix[lo];
                    sum / T::from_usize_lossy(count)
                })
                .fold(T::zero(), Float::max)
        })
        .collect();
    Field::from_components(field.grid(), vec![out]).expect("grid-length samples")
}

/// `max_j |P_{≤j} f|` at every node.
pub fn low_pass_envelope<T: Scalar>(field: &Field<T>, family: &DyadicFamily) -> Result<Vec<T>> {
    let mut env = vec![T::zero(); field.len()];
    for j in family.range() {
        for (e, m) in env.iter_mut().zip(project_low(field, family, j)?.magnitude()) {
            *e = Float::max(*e, m);
        }
    }
    Ok(env)
}

/// Parameters of the interpolation ratio
/// `‖(-Δ)^{-αθ/2} f‖_r / (‖(-Δ)^{-α/2} f‖_s^θ ‖f‖_p^{1-θ})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interpolation {
    pub alpha: f64,
    pub theta: f64,
    pub p: f64,
    pub s_exp: f64,
}

impl Default for Interpolation {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            theta: 0.5,
            p: 4.0,
            s_exp: 2.0,
        }
    }
}

impl Interpolation {
    /// The target exponent `r` with `1/r = θ/s + (1-θ)/p`.
    pub fn r(&self) -> f64 {
        (self.theta / self.s_exp + (1.0 - self.theta) / self.p).recip()
    }

    fn validate(&self) -> Result<()> {
        let ok = self.alpha > 0.0
            && self.alpha < 1.0
            && self.theta > 0.0
            && self.theta < 1.0
            && self.p > 1.0
            && self.s_exp >= 1.0
            && self.r().is_finite();
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("invalid interpolation parameters {self:?}")))
        }
    }
}

pub fn interpolation_check<T: Scalar>(field: &Field<T>, params: &Interpolation) -> Result<T> {
    params.validate()?;
    check_mean_zero(field)?;
    let a = T::lit(params.alpha);
    let th = T::lit(params.theta);
    let half = T::lit(0.5);
    let num = lebesgue_norm(&frac_laplacian(field, -a * th * half)?, T::lit(params.r()))?;
    let strong = lebesgue_norm(&frac_laplacian(field, -a * half)?, T::lit(params.s_exp))?;
    let base = lebesgue_norm(field, T::lit(params.p))?;
    let den = strong.powf(th) * base.powf(T::one() - th);
    if den == T::zero() {
        return Ok(T::zero());
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::PeriodicGrid;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{PI, TAU};

    fn grid(n: usize) -> PeriodicGrid<f64> {
        PeriodicGrid::new(n).unwrap()
    }

    fn circle(g: &PeriodicGrid<f64>, n: f64) -> Field<f64> {
        Field::from_fn(g, 2, |t, out| {
            out[0] = (n * t).cos();
            out[1] = (n * t).sin();
        })
    }

    fn band_limited(g: &PeriodicGrid<f64>, band: usize, seed: u64) -> Field<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c: Vec<(f64, f64)> = (1..=band)
            .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        Field::scalar_fn(g, |t| {
            c.iter()
                .enumerate()
                .map(|(k, (a, b))| {
                    let n = (k + 1) as f64;
                    a * (n * t).cos() + b * (n * t).sin()
                })
                .sum()
        })
    }

    #[test]
    fn sobolev_examples() {
        let g = grid(64);
        let s = sobolev_seminorm(&circle(&g, 1.0), 0.5).unwrap();
        assert!((s - TAU.sqrt()).abs() < 1e-13);
        let s3 = sobolev_seminorm(&circle(&g, 3.0), 0.5).unwrap();
        assert!((s3 - (6.0 * PI).sqrt()).abs() < 1e-13);
        let c = Field::constant(&g, &[2.0]);
        assert_eq!(sobolev_seminorm(&c, 0.3).unwrap(), 0.0);
        assert!(sobolev_seminorm(&c, -0.5).is_err());
        assert!(sobolev_seminorm(&c, 1.5).is_err());
        // s = 0 is Parseval
        let l2 = sobolev_seminorm(&c, 0.0).unwrap();
        assert!((l2 - (4.0 * TAU).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn gagliardo_single_mode_and_constant() {
        let g = grid(512);
        // the integrand is identically 1, so only the excluded diagonal is missing
        let v = gagliardo_half(&circle(&g, 1.0));
        assert!((v - TAU * (1.0 - 1.0 / 512.0f64).sqrt()).abs() < 1e-10, "{v}");
        let fine = gagliardo_half(&circle(&grid(2048), 1.0));
        assert!((fine - TAU).abs() < (v - TAU).abs() && (fine - TAU).abs() < 2e-3);
        assert_eq!(gagliardo_half(&Field::constant(&g, &[1.0, 3.0])), 0.0);
    }

    #[test]
    fn gagliardo_to_fourier_ratio() {
        let g = grid(1024);
        for seed in 0..3 {
            let u = band_limited(&g, 8, seed);
            let ratio = gagliardo_half(&u).powi(2) / sobolev_seminorm_sq(&u, 0.5).unwrap();
            assert!((ratio / TAU - 1.0).abs() < 0.01, "{ratio}");
        }
    }

    /// Integrates `λ ↦ |{|f| ≥ λ}|^{1/2}` interval by interval, counting the
    /// level set at each interval midpoint.
    fn layer_cake(values: &[f64], cell: f64) -> (f64, f64) {
        let mut levels: Vec<f64> = values.iter().map(|v| v.abs()).collect();
        levels.push(0.0);
        levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
        levels.dedup();
        let measure = |lam: f64| values.iter().filter(|v| v.abs() >= lam).count() as f64 * cell;
        let mut l21 = 0.0;
        let mut l2inf: f64 = 0.0;
        for w in levels.windows(2) {
            l21 += (w[1] - w[0]) * measure(0.5 * (w[0] + w[1])).sqrt();
            l2inf = l2inf.max(w[1] * measure(w[1]).sqrt());
        }
        (l2inf, l21)
    }

    #[test]
    fn lorentz_examples() {
        let g = grid(64);
        let h = g.spacing();
        let ind: Vec<f64> = (0..64).map(|k| if k < 10 { 3.0 } else { 0.0 }).collect();
        let f = Field::from_components(&g, vec![ind]).unwrap();
        let want = 3.0 * (10.0 * h).sqrt();
        assert!((lorentz(&f, Lorentz::TwoInf) - want).abs() < 1e-13);
        assert!((lorentz(&f, Lorentz::TwoOne) - want).abs() < 1e-13);
        let one = circle(&g, 2.0);
        assert!((lorentz(&one, Lorentz::TwoInf) - TAU.sqrt()).abs() < 1e-12);
        assert!((lorentz(&one, Lorentz::TwoOne) - TAU.sqrt()).abs() < 1e-12);
        let two: Vec<f64> = (0..64).map(|k| if k < 5 { 2.0 } else { 0.5 }).collect();
        let l21 = lorentz_of_magnitudes(&two, h, Lorentz::TwoOne);
        assert!((l21 - (0.5 * TAU.sqrt() + 1.5 * (5.0 * h).sqrt())).abs() < 1e-12);
    }

    #[test]
    fn lorentz_matches_layer_cake() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let n = rng.random_range(1..200);
            let cell = rng.random_range(0.001..0.1);
            let v: Vec<f64> = (0..n)
                .map(|_| (rng.random_range(0..6) as f64) * rng.random_range(-1.0..1.0))
                .collect();
            let (a, b) = layer_cake(&v, cell);
            assert!((lorentz_of_magnitudes(&v, cell, Lorentz::TwoInf) - a).abs() < 1e-10);
            assert!((lorentz_of_magnitudes(&v, cell, Lorentz::TwoOne) - b).abs() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn lorentz_order_and_homogeneity(v in proptest::collection::vec(-5.0f64..5.0, 1..64), c in 0.1f64..10.0) {
            let cell = 0.1;
            let inf = lorentz_of_magnitudes(&v, cell, Lorentz::TwoInf);
            let one = lorentz_of_magnitudes(&v, cell, Lorentz::TwoOne);
            prop_assert!(inf <= one + 1e-12);
            let scaled: Vec<f64> = v.iter().map(|x| c * x).collect();
            prop_assert!((lorentz_of_magnitudes(&scaled, cell, Lorentz::TwoOne) - c * one).abs() < 1e-9 * (1.0 + one));
            let l2: f64 = v.iter().map(|x| x * x).sum::<f64>() * cell;
            // the sharp constant for a general step function is 2
            prop_assert!(l2 <= 2.0 * inf * one + 1e-10);
        }
    }

    #[test]
    fn hardy_proxy_contrast() {
        let g = grid(1024);
        let scales = default_hardy_scales::<f64>(1024);
        assert_eq!(scales.len(), 9);
        assert_eq!(hardy_proxy(&Field::zeros(&g, 1), &scales).unwrap(), 0.0);
        assert!(hardy_proxy(&Field::zeros(&g, 1), &[]).is_err());
        assert!(hardy_proxy(&Field::zeros(&g, 1), &[4.0]).is_err());
        let ratios = |w: f64| {
            let wrap = |t: f64| if t > PI { t - TAU } else { t };
            let b = Field::scalar_fn(&g, |t| (-0.5 * (wrap(t) / w).powi(2)).exp());
            let b = b.scale(1.0 / lebesgue_norm(&b, 1.0).unwrap());
            let db = Field::scalar_fn(&g, |t| -wrap(t) / (w * w) * (-0.5 * (wrap(t) / w).powi(2)).exp());
            let pb = hardy_proxy(&b, &scales).unwrap() / lebesgue_norm(&b, 1.0).unwrap();
            let pd = hardy_proxy(&db, &scales).unwrap() / lebesgue_norm(&db, 1.0).unwrap();
            (pb, pd)
        };
        let (b1, d1) = ratios(0.05);
        let (b2, d2) = ratios(0.02);
        assert!(b1 >= 1.0 && b2 > b1, "{b1} {b2}");
        assert!(d1 < b1 && d2 < b2, "{d1} {d2}");
    }

    #[test]
    fn besov_examples() {
        let g = grid(256);
        let fam = DyadicFamily::for_grid(&g);
        let m8 = circle(&g, 8.0);
        assert!((besov_0_inf_inf(&m8, &fam).unwrap() - 1.0).abs() < 1e-12);
        let c = Field::constant(&g, &[-2.5]);
        assert!((besov_0_inf_inf(&c, &fam).unwrap() - 2.5).abs() < 1e-12);
        let two = circle(&g, 4.0).add(&circle(&g, 64.0)).unwrap();
        assert!((besov_0_inf_inf(&two, &fam).unwrap() - 1.0).abs() < 1e-12);
        let small = DyadicFamily::new(0, 3, 4).unwrap();
        assert!(besov_0_inf_inf(&two, &small).is_err());
    }

    #[test]
    fn maximal_function_examples() {
        let g = grid(128);
        let c = Field::constant(&g, &[-1.5]);
        assert!(maximal_function(&c)
            .component(0)
            .iter()
            .all(|&v| (v - 1.5).abs() < 1e-14));
        let ind: Vec<f64> = (0..128)
            .map(|k| if (20..40).contains(&k) { 1.0 } else { 0.0 })
            .collect();
        let f = Field::from_components(&g, vec![ind.clone()]).unwrap();
        let m = maximal_function(&f);
        assert!(m.component(0).iter().zip(&ind).all(|(a, b)| a >= b));
    }

    #[test]
    fn maximal_function_dominates_low_pass() {
        let g = grid(512);
        let fam = DyadicFamily::for_grid(&g);
        for seed in 0..5 {
            let f = band_limited(&g, 40, seed);
            let m = maximal_function(&f);
            let env = low_pass_envelope(&f, &fam).unwrap();
            let worst = env.iter().zip(m.component(0)).map(|(e, m)| e / m).fold(0.0, f64::max);
            // L¹ mass of the radial decreasing majorant of the cos² kernel
            assert!(worst <= 1.62, "{worst}");
        }
    }

    #[test]
    fn interpolation_ratio() {
        let g = grid(256);
        let p = Interpolation::default();
        let u = circle(&g, 5.0);
        assert!((interpolation_check(&u, &p).unwrap() - 1.0).abs() < 1e-12);
        let f = band_limited(&g, 20, 4);
        let a = interpolation_check(&f, &p).unwrap();
        let b = interpolation_check(&f.scale(-7.0), &p).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
        assert!(interpolation_check(&Field::constant(&g, &[1.0]), &p).is_err());
        let bad = Interpolation { theta: 1.5, ..p };
        assert!(interpolation_check(&u, &bad).is_err());
    }

    #[test]
    fn spec_evaluation() {
        let g = grid(64);
        let u = circle(&g, 1.0);
        assert!((NormSpec::Sobolev { s: 0.5 }.evaluate(&u).unwrap() - TAU.sqrt()).abs() < 1e-13);
        assert!((NormSpec::Lebesgue { p: 2.0 }.evaluate(&u).unwrap() - TAU.sqrt()).abs() < 1e-12);
        assert!(NormSpec::Lebesgue { p: 0.5 }.evaluate(&u).is_err());
        assert!((NormSpec::Lebesgue { p: f64::INFINITY }.evaluate(&u).unwrap() - 1.0).abs() < 1e-14);
        let json = serde_json::to_string(&NormSpec::Sobolev { s: -0.5 }).unwrap();
        assert_eq!(json, r#"{"kind":"sobolev","s":-0.5}"#);
    }
}
