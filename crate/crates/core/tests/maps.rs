use std::f64::consts::TAU;

use halfmap::halfharmonic::{blaschke_trace, degree, energy, flow_descent, BlaschkeSpec, FlowParams, SphereMap};
use halfmap::selftest::{run_selftest, SelfTestConfig};
use halfmap::spectral::ops::RieszSign;
use halfmap::{mapfile, Error, Field64, Grid, Map};

#[test]
fn sampled_maps_survive_a_file_round_trip() {
    let g = Grid::new(512).unwrap();
    let u = blaschke_trace(&BlaschkeSpec::real(&[0.2, -0.7]), &g).unwrap();
    let text = mapfile::to_string(u.field());
    let back = Map::new(mapfile::read::<f64>(text.as_bytes()).unwrap()).unwrap();
    assert_eq!(energy(&back), energy(&u));
    assert_eq!(degree(&back).unwrap().value, 2);
    assert_eq!(mapfile::to_string(back.field()), text);
}

#[test]
fn flow_terminal_map_is_writable() {
    let g = Grid::new(128).unwrap();
    let phi = Field64::from_fn(&g, 2, |t, out| {
        out[0] = -t.sin() * (3.0 * t).cos();
        out[1] = t.cos() * (3.0 * t).cos();
    });
    let u0 = SphereMap::identity(&g).perturb(&phi, 0.05).unwrap();
    let tr = flow_descent(&u0, &FlowParams::default()).unwrap();
    assert!(tr.converged);
    assert!((tr.final_energy() - TAU).abs() < 1e-3);
    let mut buf = Vec::new();
    mapfile::write(tr.terminal.field(), &mut buf).unwrap();
    let back: Field64 = mapfile::read(buf.as_slice()).unwrap();
    assert_eq!(back.components(), tr.terminal.field().components());
}

#[test]
fn truncated_file_reports_its_line() {
    let err = mapfile::read::<f64>("halfmap-v1 8 2\n1 0\n0 1\n".as_bytes()).unwrap_err();
    assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
    assert!(err.to_string().contains("line 4"));
}

#[test]
fn selftest_gates_on_the_riesz_hook() {
    assert!(run_selftest(&SelfTestConfig::default()).unwrap().passed());
    let bad = SelfTestConfig {
        riesz: RieszSign::Flipped,
        ..SelfTestConfig::default()
    };
    let r = run_selftest(&bad).unwrap();
    assert!(!r.passed());
    assert!(r.failures().contains(&"s_cancellation"));
}
