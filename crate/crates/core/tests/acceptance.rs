//! Acceptance criteria. Every criterion prints one PASS/FAIL line to stdout.

use std::f64::consts::TAU;
use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use halfmap::bubbling::{far_field_distance, quantization_report, QuantParams};
use halfmap::commutators::{estimate_study, op_s, op_t, MatrixField, Operator, StudyConfig};
use halfmap::ensemble::{band_limited, critical_sample, tangent_direction, Role};
use halfmap::halfharmonic::{
    blaschke_trace, degree, el_residual, energy, flow_descent, gradient_check, rotation_matrix, BlaschkeSpec,
    FlowParams, SphereMap,
};
use halfmap::lp::{paraproduct, DyadicFamily, Paraproduct};
use halfmap::norms::{
    gagliardo_half, interpolation_check, lorentz_of_magnitudes, sobolev_seminorm_sq, Interpolation, Lorentz,
};
use halfmap::spectral::disk::{dirichlet_energy, poisson_extend, RadialNodes};
use halfmap::spectral::{Field, PeriodicGrid};
use halfmap::{Grid, Report};

/// Neck ratio `total_L2 / sup_dyadic_sqrt` recorded on the Möbius family.
const NECK_RATIO_BASELINE: f64 = 1.17;

#[derive(PartialEq)]
enum Expect {
    Pass,
    /// Implemented at the stated thresholds but not reproduced; the test
    /// asserts the failure so a future pass gets noticed.
    Unattainable,
}

fn finish(id: u8, name: &str, passed: bool, detail: String, elapsed: Duration, budget_s: f64, expect: Expect) {
    let in_time = elapsed.as_secs_f64() < budget_s;
    let ok = passed && in_time;
    let tag = if ok { "PASS" } else { "FAIL" };
    let note = if expect == Expect::Unattainable {
        " [expected failure]"
    } else {
        ""
    };
    let line = format!(
        "criterion {id:>2} {tag} {name}: {detail} ({:.2}s of {budget_s}s){note}\n",
        elapsed.as_secs_f64()
    );
    std::io::stdout().write_all(line.as_bytes()).unwrap();
    match expect {
        Expect::Pass => assert!(ok, "{line}"),
        Expect::Unattainable => assert!(!ok, "criterion {id} now passes: {line}"),
    }
}

fn grid(n: usize) -> Grid {
    PeriodicGrid::new(n).unwrap()
}

/// Products with `k = 1..=5` zeros of modulus at most 0.8: one symmetric
/// configuration on the circle of radius 0.8 and two seeded random ones.
fn explicit_maps() -> Vec<(usize, BlaschkeSpec)> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut out = Vec::new();
    for k in 1..=5 {
        let ring = (0..k)
            .map(|j| Complex::from_polar(0.8, TAU * j as f64 / k as f64))
            .collect();
        out.push((k, BlaschkeSpec::new(ring)));
        for _ in 0..2 {
            let zeros = (0..k)
                .map(|_| Complex::from_polar(0.8 * rng.random::<f64>().sqrt(), TAU * rng.random::<f64>()))
                .collect();
            out.push((k, BlaschkeSpec::new(zeros)));
        }
    }
    out
}

#[test]
fn criterion_01_quantization() {
    let t = Instant::now();
    let g = grid(4096);
    let (mut e_err, mut res, mut degree_ok) = (0.0_f64, 0.0_f64, true);
    for (k, spec) in explicit_maps() {
        let u = blaschke_trace(&spec, &g).unwrap();
        e_err = e_err.max((energy(&u) / (TAU * k as f64) - 1.0).abs());
        let d = degree(&u).unwrap();
        degree_ok &= d.value == k as i64 && d.exact;
        res = res.max(el_residual(&u).unwrap().1);
    }
    let passed = e_err <= 1e-6 && degree_ok && res <= 1e-8;
    let detail = format!("max rel energy error {e_err:.2e}, degrees exact {degree_ok}, max EL residual {res:.2e}");
    finish(
        1,
        "quantization of explicit maps",
        passed,
        detail,
        t.elapsed(),
        5.0,
        Expect::Pass,
    );
}

#[test]
fn criterion_02_extension_identity() {
    let t = Instant::now();
    let g = grid(4096);
    let nodes = RadialNodes::gauss_legendre(256).unwrap();
    let mut worst = 0.0_f64;
    for (_, spec) in explicit_maps() {
        let u = blaschke_trace(&spec, &g).unwrap();
        let d = dirichlet_energy(&poisson_extend(u.field(), &nodes).unwrap()).unwrap();
        worst = worst.max((d - energy(&u)).abs());
    }
    let detail = format!("max |Dirichlet - boundary energy| {worst:.2e}");
    finish(
        2,
        "extension identity",
        worst <= 1e-4,
        detail,
        t.elapsed(),
        10.0,
        Expect::Pass,
    );
}

#[test]
fn criterion_03_paraproduct_reconstruction() {
    let t = Instant::now();
    let g = grid(1024);
    let fam = DyadicFamily::for_grid(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let f = band_limited(&g, 1, g.len() / 4 - 1, &mut rng).unwrap();
        let h = band_limited(&g, 1, g.len() / 4 - 1, &mut rng).unwrap();
        let mut sum = Field::zeros(&g, 1);
        for w in Paraproduct::ALL {
            sum = sum.add(&paraproduct(&f, &h, &fam, w).unwrap()).unwrap();
        }
        let prod: Vec<f64> = f.component(0).iter().zip(h.component(0)).map(|(a, b)| a * b).collect();
        let err = prod
            .iter()
            .zip(sum.component(0))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst = worst.max(err / (f.sup_norm() * h.sup_norm()));
    }
    let detail = format!("max relative sup error {worst:.2e}");
    finish(
        3,
        "paraproduct reconstruction",
        worst <= 1e-10,
        detail,
        t.elapsed(),
        5.0,
        Expect::Pass,
    );
}

#[test]
fn criterion_04_gain_of_regularity() {
    let t = Instant::now();
    let study = estimate_study(&grid(1024), &StudyConfig::default()).unwrap();
    let b = study.boundedness();
    let fmt = |op: Operator| {
        study
            .max_by_peak(op)
            .iter()
            .map(|(p, m)| format!("{p}:{m:.3}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let detail = format!(
        "T spread {:.2}, S spread {:.2}, naive growth {:.2}; T [{}] S [{}] naive [{}]",
        b.t_spread.unwrap_or(f64::NAN),
        b.s_spread.unwrap_or(f64::NAN),
        b.naive_growth.unwrap_or(f64::NAN),
        fmt(Operator::T),
        fmt(Operator::S),
        fmt(Operator::Naive),
    );
    finish(
        4,
        "gain of regularity",
        b.passed,
        detail,
        t.elapsed(),
        60.0,
        Expect::Unattainable,
    );
}

/// Symbols on `e^{ipθ} ⊗ e^{iqθ}` from `(-Δ)^{1/4} ↦ |n|^{1/2}`,
/// `R ↦ -i sign n`, `∂ ↦ in`.
fn quarter(n: i64) -> f64 {
    (n.abs() as f64).sqrt()
}

fn riesz(n: i64) -> Complex<f64> {
    Complex::new(0.0, -(n.signum() as f64))
}

fn t_oracle(p: i64, q: i64) -> Complex<f64> {
    Complex::from(quarter(p + q) * quarter(q) - q.abs() as f64 + quarter(p) * quarter(q))
}

fn s_oracle(p: i64, q: i64) -> Complex<f64> {
    let i = Complex::new(0.0, 1.0);
    Complex::from(quarter(p + q) * quarter(q)) - riesz(p + q) * i * q as f64
        + riesz(p + q) * quarter(p) * riesz(q) * quarter(q)
}

/// Complexified action on single modes: the coefficient at `p + q` and the
/// largest coefficient anywhere else.
fn mode_action(
    g: &Grid,
    p: i64,
    q: i64,
    op: fn(&MatrixField<f64>, &Field<f64>) -> halfmap::Result<Field<f64>>,
) -> (Complex<f64>, f64) {
    let c = |n: i64| Field::scalar_fn(g, move |t| (n as f64 * t).cos());
    let s = |n: i64| Field::scalar_fn(g, move |t| (n as f64 * t).sin());
    let m = |f: Field<f64>| MatrixField::scalar(f).unwrap();
    let re = op(&m(c(p)), &c(q)).unwrap().sub(&op(&m(s(p)), &s(q)).unwrap()).unwrap();
    let im = op(&m(c(p)), &s(q)).unwrap().add(&op(&m(s(p)), &c(q)).unwrap()).unwrap();
    let i = Complex::new(0.0, 1.0);
    let mut rest = 0.0_f64;
    for k in 0..g.len() {
        if g.frequency(k) != p + q {
            rest = rest.max((re.spectrum(0)[k] + i * im.spectrum(0)[k]).norm());
        }
    }
    (re.coefficient(0, p + q) + i * im.coefficient(0, p + q), rest)
}

#[test]
fn criterion_05_single_mode_oracles() {
    let t = Instant::now();
    assert!((t_oracle(1, 1) - Complex::from(2f64.sqrt())).norm() < 1e-15);
    assert!((s_oracle(1, 1) - Complex::from(2f64.sqrt() - 2.0)).norm() < 1e-15);
    let g = grid(128);
    let mut worst = 0.0_f64;
    for p in -16..=16 {
        for q in -16..=16 {
            let (tv, tr) = mode_action(&g, p, q, op_t);
            let (sv, sr) = mode_action(&g, p, q, op_s);
            worst = worst.max((tv - t_oracle(p, q)).norm()).max(tr);
            worst = worst.max((sv - s_oracle(p, q)).norm()).max(sr);
        }
    }
    let detail = format!("max deviation from the symbol oracle over |p|,|q| <= 16: {worst:.2e}");
    finish(
        5,
        "single-mode commutator oracles",
        worst <= 1e-12,
        detail,
        t.elapsed(),
        5.0,
        Expect::Pass,
    );
}

struct FamilyRun {
    family: Vec<SphereMap<f64>>,
    report: Report,
    elapsed: Duration,
}

fn family_run() -> &'static FamilyRun {
    static RUN: OnceLock<FamilyRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let t = Instant::now();
        let g = grid(8192);
        let family: Vec<_> = (2..=8)
            .map(|n| blaschke_trace(&BlaschkeSpec::real(&[1.0 - 2f64.powi(-n)]), &g).unwrap())
            .collect();
        let report = quantization_report(&family, &QuantParams::default()).unwrap();
        FamilyRun {
            family,
            report,
            elapsed: t.elapsed(),
        }
    })
}

#[test]
fn criterion_06_bubbling() {
    let run = family_run();
    let t = Instant::now();
    let r = &run.report;
    let one = r.points.len() == 1;
    let (center_ok, monotone, deviation, far) = match r.points.first() {
        Some(p) => {
            let d = p.center.rem_euclid(TAU);
            let d = d.min(TAU - d);
            let far = far_field_distance(
                &run.family[6],
                &[p.center],
                QuantParams::default().exclusion_radius,
                &[-1.0, 0.0],
            )
            .unwrap();
            (
                d <= 0.05,
                p.monotone && p.masses.windows(2).all(|w| w[1] >= w[0]),
                p.deviation,
                far,
            )
        }
        None => (false, false, f64::NAN, f64::NAN),
    };
    let passed = one && center_ok && monotone && deviation <= 0.05 && far <= 1e-2;
    let detail = format!(
        "{} point(s), center ok {center_ok}, masses increasing {monotone}, deviation at n=8 {deviation:.2e}, far-region distance {far:.2e}",
        r.points.len()
    );
    finish(
        6,
        "bubbling reproduction",
        passed,
        detail,
        run.elapsed + t.elapsed(),
        120.0,
        Expect::Pass,
    );
}

#[test]
fn criterion_07_neck_inequalities() {
    let run = family_run();
    let t = Instant::now();
    let necks: Vec<_> = run.report.necks().collect();
    let dual = necks
        .iter()
        .all(|n| n.annulus_energy <= n.lorentz_21_global * n.lorentz_2inf * (1.0 + 1e-10));
    let ratios: Vec<f64> = necks.iter().map(|n| n.l2_ratio).collect();
    let within = ratios.iter().all(|r| (r / NECK_RATIO_BASELINE - 1.0).abs() <= 0.2);
    let passed = !necks.is_empty() && dual && within;
    let detail = format!(
        "{} necks, duality {dual}, ratios {:?} vs baseline {NECK_RATIO_BASELINE}",
        necks.len(),
        ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>()
    );
    finish(
        7,
        "neck inequalities",
        passed,
        detail,
        run.elapsed + t.elapsed(),
        120.0,
        Expect::Pass,
    );
}

fn base_maps(g: &Grid) -> Vec<SphereMap<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let s2 = BlaschkeSpec::real(&[0.4]).with_isometry(rotation_matrix([1.0, 1.0, 0.0], 0.7));
    let raw = vec![
        SphereMap::identity(g),
        blaschke_trace(&BlaschkeSpec::real(&[0.3]), g).unwrap(),
        blaschke_trace(&BlaschkeSpec::real(&[0.5, -0.2]), g).unwrap(),
        blaschke_trace(&s2, g).unwrap(),
        SphereMap::new(Field::from_fn(g, 2, |t, out| {
            out[0] = t.cos();
            out[1] = -t.sin();
        }))
        .unwrap(),
    ];
    raw.into_iter()
        .map(|u| {
            let phi = tangent_direction(&u, 6, &mut rng).unwrap();
            u.perturb(&phi, 0.1).unwrap()
        })
        .collect()
}

#[test]
fn criterion_08_gradient() {
    let t = Instant::now();
    let g = grid(256);
    let mut rng = ChaCha8Rng::seed_from_u64(80);
    let mut worst = 0.0_f64;
    for u in base_maps(&g) {
        for _ in 0..20 {
            let phi = tangent_direction(&u, 10, &mut rng).unwrap();
            worst = worst.max(gradient_check(&u, &phi, 1e-5).unwrap().relative_error);
        }
    }
    let detail = format!("max relative error {worst:.2e} over 100 directions");
    finish(
        8,
        "gradient correctness",
        worst <= 1e-5,
        detail,
        t.elapsed(),
        10.0,
        Expect::Pass,
    );
}

#[test]
fn criterion_09_flow_floor() {
    let t = Instant::now();
    let g = grid(256);
    let id = SphereMap::identity(&g);
    let phi = tangent_direction(&id, 6, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    let u0 = id.perturb(&phi, 0.05).unwrap();
    let e0 = energy(&u0);
    let (passed, detail) = match flow_descent(&u0, &FlowParams::default()) {
        Ok(tr) => {
            let (e, r) = (tr.final_energy(), tr.final_residual());
            let ok = tr.converged && r <= 1e-6 && e >= TAU - 1e-3 && e <= e0;
            (
                ok,
                format!(
                    "{} iterations, residual {r:.2e}, energy {e:.9} from {e0:.6}",
                    tr.iterations()
                ),
            )
        }
        Err(e) => (false, format!("flow failed: {e}")),
    };
    finish(9, "flow floor", passed, detail, t.elapsed(), 60.0, Expect::Pass);
}

/// `(L^{2,1}, L^{2,∞})` of a step function from the distribution function,
/// one distinct level at a time.
fn layer_cake(values: &[f64], cell: f64) -> (f64, f64) {
    let mut levels: Vec<f64> = values.iter().map(|v| v.abs()).filter(|&v| v > 0.0).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let measure = |lam: f64| cell * values.iter().filter(|v| v.abs() >= lam).count() as f64;
    let (mut l21, mut l2inf, mut prev) = (0.0, 0.0_f64, 0.0);
    for &w in &levels {
        let mu = measure(w).sqrt();
        l21 += (w - prev) * mu;
        l2inf = l2inf.max(w * mu);
        prev = w;
    }
    (l21, l2inf)
}

#[test]
fn criterion_10_norm_oracles() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut lorentz_err = 0.0_f64;
    for i in 0..100 {
        let len = rng.random_range(1..400);
        let cell = rng.random_range(0.001..0.1);
        let values: Vec<f64> = (0..len)
            .map(|_| {
                let v: f64 = rng.random_range(-3.0..3.0);
                if i % 2 == 0 {
                    (v * 4.0).round() / 4.0
                } else {
                    v
                }
            })
            .collect();
        let (o21, o2inf) = layer_cake(&values, cell);
        let l21 = lorentz_of_magnitudes(&values, cell, Lorentz::TwoOne);
        let l2inf = lorentz_of_magnitudes(&values, cell, Lorentz::TwoInf);
        lorentz_err = lorentz_err.max((l21 - o21).abs() / o21.max(1.0));
        lorentz_err = lorentz_err.max((l2inf - o2inf).abs() / o2inf.max(1.0));
    }

    let g = grid(1024);
    let mut gag = 0.0_f64;
    for seed in 0..5 {
        let f = band_limited(&g, 1, 8, &mut ChaCha8Rng::seed_from_u64(seed))
            .unwrap()
            .without_mean();
        let ratio = gagliardo_half(&f).powi(2) / sobolev_seminorm_sq(&f, 0.5).unwrap();
        gag = gag.max((ratio / TAU - 1.0).abs());
    }

    let ah = |n: usize| {
        let g = grid(n);
        let mut worst = 0.0_f64;
        for peak in [8, 16, 32, 64, 128] {
            for i in 0..10 {
                let f = critical_sample(&g, 7, peak, i, Role::Q).unwrap();
                worst = worst.max(interpolation_check(&f, &Interpolation::default()).unwrap());
            }
        }
        worst
    };
    let (a1, a2) = (ah(1024), ah(2048));
    let drift = (a1 / a2).max(a2 / a1);
    let ah_ok = a1.is_finite() && a2.is_finite() && a1 < 10.0 && a2 < 10.0 && drift < 1.5;

    let passed = lorentz_err <= 1e-10 && gag <= 0.01 && ah_ok;
    let detail = format!(
        "Lorentz vs layer cake {lorentz_err:.2e}, Gagliardo/Fourier off 2π by {:.3}%, interpolation ratio {a1:.3} -> {a2:.3} (drift {drift:.3})",
        100.0 * gag
    );
    finish(10, "norm machinery", passed, detail, t.elapsed(), 30.0, Expect::Pass);
}
