use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use halfmap::commutators::{estimate_study, Operator, StudyConfig};
use halfmap::ensemble::band_limited;
use halfmap::lp::{paraproduct_terms, project, DyadicFamily, Paraproduct};
use halfmap::norms::NormSpec;
use halfmap::spectral::ops::{frac_laplacian, half_laplacian, quarter_laplacian};
use halfmap::Grid;

#[test]
fn f32_and_f64_agree_on_fractional_powers() {
    let g64 = Grid::new(256).unwrap();
    let g32 = halfmap::spectral::PeriodicGrid::<f32>::new(256).unwrap();
    let f64_field = band_limited(&g64, 1, 20, &mut ChaCha8Rng::seed_from_u64(4))
        .unwrap()
        .without_mean();
    let samples: Vec<f32> = f64_field.component(0).iter().map(|&x| x as f32).collect();
    let f32_field = halfmap::spectral::Field::from_components(&g32, vec![samples]).unwrap();
    let a = quarter_laplacian(&quarter_laplacian(&f64_field));
    let b = half_laplacian(&f32_field);
    let err = a
        .component(0)
        .iter()
        .zip(b.component(0))
        .map(|(x, y)| (x - f64::from(*y)).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-4 * a.sup_norm(), "{err}");
    let back = frac_laplacian(&frac_laplacian(&f64_field, -0.25).unwrap(), 0.25).unwrap();
    assert!(back.sub(&f64_field).unwrap().sup_norm() < 1e-12);
}

#[test]
fn paraproduct_summands_live_in_their_bands() {
    let g = Grid::new(512).unwrap();
    let fam = DyadicFamily::for_grid(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let f = band_limited(&g, 1, 200, &mut rng).unwrap();
    let h = band_limited(&g, 1, 200, &mut rng).unwrap();
    let terms = paraproduct_terms(&f, &h, &fam, Paraproduct::HighLow).unwrap();
    assert!(!terms.is_empty());
    for (j, t) in &terms {
        let fj = project(&f, &fam, *j).unwrap();
        for k in 0..g.len() {
            let n = g.frequency(k).unsigned_abs();
            if n > 3 * (1u64 << *j) && fj.sup_norm() > 0.0 {
                assert!(t.spectrum(0)[k].norm() < 1e-12, "j={j} n={n}");
            }
        }
    }
}

#[test]
fn study_is_deterministic_and_serializable() {
    let g = Grid::new(256).unwrap();
    let cfg = StudyConfig {
        samples: 4,
        peaks: vec![8, 16],
        operators: vec![Operator::T, Operator::Naive],
        ..StudyConfig::default()
    };
    let a = estimate_study(&g, &cfg).unwrap();
    let b = estimate_study(&g, &cfg).unwrap();
    assert_eq!(
        serde_json::to_string(&a.reports).unwrap(),
        serde_json::to_string(&b.reports).unwrap()
    );
    assert_eq!(a.reports.len(), 2 * 2 * 4);
    let spec: NormSpec = serde_json::from_str(r#"{"kind":"sobolev","s":-0.5}"#).unwrap();
    assert_eq!(spec, cfg.numerator);
    let empty = StudyConfig { samples: 0, ..cfg };
    assert!(estimate_study(&g, &empty).is_err());
}
