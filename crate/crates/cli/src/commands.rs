//! The subcommands. Each returns an [`Outcome`]; writing it out is left to
//! the caller.

use std::f64::consts::TAU;

use anyhow::{Context, Result};
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use halfmap::bubbling::{quantization_report, LocalEnergy, QuantParams};
use halfmap::commutators::{estimate_study, structure_identity_residual, Operator, StudyConfig};
use halfmap::ensemble::{band_limited, tangent_direction};
use halfmap::halfharmonic::{
    blaschke_trace, degree, el_residual, energy, flow_descent, BlaschkeSpec, FlowError, FlowParams, FlowTrace, MIN_STEP,
};
use halfmap::lp::{paraproduct, project, DyadicFamily, Paraproduct};
use halfmap::mapfile;
use halfmap::selftest::{run_selftest, SelfTestConfig};
use halfmap::spectral::disk::{dirichlet_energy, poisson_extend, RadialNodes};
use halfmap::spectral::ops::{product, RieszSign};
use halfmap::{Field64, Grid, Map};

use crate::config::{ConfigError, RunConfig};

pub enum Verdict {
    Pass,
    Fail(String),
}

pub struct Outcome {
    pub result: Value,
    /// Command-specific constants for the report header.
    pub constants: Value,
    /// Main table, CSV-encoded.
    pub table: Vec<u8>,
    /// Artifacts written under `--out`, by file name.
    pub files: Vec<(String, Vec<u8>)>,
    pub verdict: Verdict,
}

fn csv_bytes<S: Serialize>(rows: impl IntoIterator<Item = S>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

fn grid(n: usize) -> Result<Grid> {
    Ok(Grid::new(n)?)
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Source {
    Blaschke { zeros: Vec<[f64; 2]> },
    Constant,
    File { path: String },
}

fn blaschke(zeros: &[[f64; 2]]) -> BlaschkeSpec {
    BlaschkeSpec::new(zeros.iter().map(|z| Complex::new(z[0], z[1])).collect())
}

/// The input map: `--map` file, else `--constant`, else the Blaschke product of `--zeros`.
fn load_map(cfg: &RunConfig, default_n: usize) -> Result<(Map, Source)> {
    if let Some(path) = &cfg.map {
        let field: Field64 = mapfile::load(path).with_context(|| format!("reading map file {}", path.display()))?;
        if let Some(n) = cfg.n {
            if n != field.len() {
                return Err(
                    ConfigError::Invalid(format!("--n {n} disagrees with the map file's N = {}", field.len())).into(),
                );
            }
        }
        let u = Map::with_tolerance(field, cfg.sphere_tol)?;
        return Ok((
            u,
            Source::File {
                path: path.display().to_string(),
            },
        ));
    }
    let g = grid(cfg.n_or(default_n))?;
    if cfg.constant {
        return Ok((Map::constant(&g, &[1.0, 0.0])?, Source::Constant));
    }
    if cfg.zeros.is_empty() {
        return Err(ConfigError::Invalid("no input map: give --zeros, --constant or --map".into()).into());
    }
    let u = blaschke_trace(&blaschke(&cfg.zeros), &g)?;
    Ok((
        u,
        Source::Blaschke {
            zeros: cfg.zeros.clone(),
        },
    ))
}

#[derive(Serialize)]
struct EnergyRecord {
    n: usize,
    components: usize,
    energy: f64,
    degree: Option<i64>,
    degree_raw: Option<f64>,
    residual_sup: f64,
    /// `2πk` for the degree `k`, or the nearest multiple of `2π` off `S¹`.
    quantum: f64,
    deviation: f64,
}

pub fn energy_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let (u, source) = load_map(cfg, 1024)?;
    let e = energy(&u);
    let deg = if u.n_components() == 2 { Some(degree(&u)?) } else { None };
    let k = deg.map_or((e / TAU).round(), |d| d.value.unsigned_abs() as f64);
    let (_, residual_sup) = el_residual(&u)?;
    let rec = EnergyRecord {
        n: u.len(),
        components: u.n_components(),
        energy: e,
        degree: deg.map(|d| d.value),
        degree_raw: deg.map(|d| d.raw),
        residual_sup,
        quantum: TAU * k,
        deviation: (e - TAU * k).abs(),
    };
    Ok(Outcome {
        result: json!({ "source": source, "energy": rec }),
        constants: json!({}),
        table: csv_bytes([&rec])?,
        files: Vec::new(),
        verdict: Verdict::Pass,
    })
}

#[derive(Serialize)]
struct ResidualRecord {
    n: usize,
    sphere_deviation: f64,
    el_residual: f64,
    structure_residual: f64,
    tangency: f64,
}

pub fn residual_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let (u, source) = load_map(cfg, 1024)?;
    let (_, el) = el_residual(&u)?;
    let st = structure_identity_residual(&u)?;
    let rec = ResidualRecord {
        n: u.len(),
        sphere_deviation: u.deviation(),
        el_residual: el,
        structure_residual: st.residual,
        tangency: st.tangency,
    };
    let verdict = if el <= cfg.residual_target {
        Verdict::Pass
    } else {
        Verdict::Fail(format!("residual {el:e} above target {:e}", cfg.residual_target))
    };
    Ok(Outcome {
        result: json!({ "source": source, "residual": rec }),
        constants: json!({}),
        table: csv_bytes([&rec])?,
        files: Vec::new(),
        verdict,
    })
}

#[derive(Serialize)]
struct ExtensionRecord {
    n: usize,
    radial_nodes: usize,
    dirichlet_energy: f64,
    map_energy: f64,
    relative_error: f64,
}

pub fn extend_check_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let (u, source) = load_map(cfg, 1024)?;
    let radial = RadialNodes::gauss_legendre(cfg.radial_nodes)?;
    let disk = poisson_extend(u.field(), &radial)?;
    let d = dirichlet_energy(&disk)?;
    let e = energy(&u);
    let relative_error = (d - e).abs() / e.max(1.0);
    let rec = ExtensionRecord {
        n: u.len(),
        radial_nodes: cfg.radial_nodes,
        dirichlet_energy: d,
        map_energy: e,
        relative_error,
    };
    let verdict = if relative_error <= cfg.extension_tol {
        Verdict::Pass
    } else {
        Verdict::Fail(format!(
            "extension mismatch {relative_error:e} above {:e}",
            cfg.extension_tol
        ))
    };
    Ok(Outcome {
        result: json!({ "source": source, "extension": rec }),
        constants: json!({ "radial_rule": "gauss_legendre" }),
        table: csv_bytes([&rec])?,
        files: Vec::new(),
        verdict,
    })
}

#[derive(Serialize)]
struct BandRecord {
    j: i32,
    l2: f64,
    sup: f64,
}

fn l2(f: &Field64) -> f64 {
    f.inner(f).sqrt()
}

/// Blocks of `f`, the first component of the input (or of a seeded random
/// field), plus the block and paraproduct reconstruction errors against `g`,
/// the second component.
pub fn lp_decompose_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let (field, source) = if cfg.map.is_some() || cfg.constant || !cfg.zeros.is_empty() {
        let (u, s) = load_map(cfg, 1024)?;
        (u.into_field(), json!(s))
    } else {
        let g = grid(cfg.n_or(1024))?;
        let band = g.len() / 4;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let f = band_limited(&g, 2, band, &mut rng)?;
        (f, json!({ "kind": "random", "seed": cfg.seed, "band": band }))
    };
    let f = field.select(&[0]);
    let g = field.select(&[field.n_components().min(2) - 1]);
    let family = DyadicFamily::for_grid(f.grid());

    let mut rows = Vec::new();
    let mut sum = Field64::zeros(f.grid(), 1);
    for j in family.range() {
        let b = project(&f, &family, j)?;
        rows.push(BandRecord {
            j,
            l2: l2(&b),
            sup: b.sup_norm(),
        });
        sum = sum.add(&b)?;
    }
    let scale = f.sup_norm().max(f64::MIN_POSITIVE);
    let block_error = f.sub(&sum)?.sup_norm() / scale;

    let prod = product(&f, &g)?;
    let mut para = Field64::zeros(f.grid(), 1);
    let mut parts = Vec::new();
    for which in Paraproduct::ALL {
        let p = paraproduct(&f, &g, &family, which)?;
        parts.push(json!({ "kind": format!("{which:?}"), "l2": l2(&p) }));
        para = para.add(&p)?;
    }
    let paraproduct_error = prod.sub(&para)?.sup_norm() / prod.sup_norm().max(f64::MIN_POSITIVE);

    let worst = block_error.max(paraproduct_error);
    let verdict = if worst <= cfg.reconstruction_tol {
        Verdict::Pass
    } else {
        Verdict::Fail(format!(
            "reconstruction error {worst:e} above {:e}",
            cfg.reconstruction_tol
        ))
    };
    Ok(Outcome {
        result: json!({
            "source": source,
            "bands": rows,
            "block_error": block_error,
            "paraproducts": parts,
            "paraproduct_error": paraproduct_error,
        }),
        constants: json!({ "j_min": family.j_min(), "j_max": family.j_max(), "offset": family.offset() }),
        table: csv_bytes(&rows)?,
        files: Vec::new(),
        verdict,
    })
}

#[derive(Serialize)]
struct SampleRow {
    operator: &'static str,
    peak: usize,
    index: usize,
    numerator: f64,
    denominator: f64,
    ratio: f64,
    mean_removed: bool,
}

#[derive(Serialize)]
struct SummaryRow {
    operator: &'static str,
    peak: usize,
    count: usize,
    max: f64,
    median: f64,
}

pub fn commutator_study_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let g = grid(cfg.n_or(1024))?;
    let study = StudyConfig {
        seed: cfg.seed,
        samples: cfg.samples,
        peaks: cfg.peaks.clone(),
        ..StudyConfig::default()
    };
    let result = estimate_study(&g, &study)?;
    let samples: Vec<SampleRow> = result
        .reports
        .iter()
        .map(|r| SampleRow {
            operator: r.operator.name(),
            peak: r.peak_frequency,
            index: r.index,
            numerator: r.numerator_value,
            denominator: r.denominator,
            ratio: r.ratio,
            mean_removed: r.mean_removed,
        })
        .collect();
    let summaries: Vec<SummaryRow> = result
        .summaries()
        .into_iter()
        .map(|s| SummaryRow {
            operator: s.operator.name(),
            peak: s.peak_frequency,
            count: s.count,
            max: s.max,
            median: s.median,
        })
        .collect();
    let b = result.boundedness();
    let verdict = if b.passed {
        Verdict::Pass
    } else {
        let show = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.3}"));
        Verdict::Fail(format!(
            "boundedness criteria not met: T spread {}, S spread {}, naive growth {}",
            show(b.t_spread),
            show(b.s_spread),
            show(b.naive_growth)
        ))
    };
    let table = csv_bytes(&samples)?;
    Ok(Outcome {
        result: json!({
            "samples": samples.len(),
            "skipped": result.skipped,
            "summary": summaries,
            "boundedness": b,
        }),
        constants: json!({
            "numerator": study.numerator,
            "operators": Operator::ALL.map(|o| o.name()),
            "spread_limit": 2.0,
            "growth_min": 2.0,
        }),
        files: vec![
            ("samples.csv".into(), table.clone()),
            ("summary.csv".into(), csv_bytes(&summaries)?),
        ],
        table,
        verdict,
    })
}

#[derive(Serialize)]
struct DensityRow {
    member: usize,
    theta: f64,
    density: f64,
}

pub fn bubble_run_cmd(cfg: &RunConfig) -> Result<Outcome> {
    // every parameter is checked before any trace is built
    let specs: Vec<BlaschkeSpec> = cfg.schedule.iter().map(|&a| BlaschkeSpec::real(&[a])).collect();
    for s in &specs {
        s.validate()?;
    }
    let g = grid(cfg.n_or(8192))?;
    let family = if cfg.constant {
        (0..specs.len())
            .map(|_| Map::constant(&g, &[1.0, 0.0]))
            .collect::<halfmap::Result<Vec<_>>>()?
    } else {
        specs
            .iter()
            .map(|s| blaschke_trace(s, &g))
            .collect::<halfmap::Result<Vec<_>>>()?
    };
    let params = QuantParams {
        gamma: cfg.gamma,
        c0: cfg.c0,
        ..QuantParams::default()
    };
    let report = quantization_report(&family, &params)?;
    let deviation = report.max_deviation();

    let mut rows = Vec::new();
    for (i, u) in family.iter().enumerate() {
        let le = LocalEnergy::new(u);
        rows.extend(le.density().iter().enumerate().map(|(k, &d)| DensityRow {
            member: i,
            theta: g.node(k),
            density: d,
        }));
    }
    let verdict = if deviation <= cfg.deviation_bound {
        Verdict::Pass
    } else {
        Verdict::Fail(format!(
            "quantization deviation {deviation:e} above {:e}",
            cfg.deviation_bound
        ))
    };
    let table = csv_bytes(&rows)?;
    Ok(Outcome {
        result: json!({
            "schedule": cfg.schedule,
            "constant": cfg.constant,
            "max_deviation": deviation,
            "report": report,
        }),
        constants: serde_json::to_value(&params)?,
        files: vec![("density.csv".into(), table.clone())],
        table,
        verdict,
    })
}

#[derive(Serialize)]
struct TraceRow {
    iter: usize,
    energy: f64,
    residual: f64,
    step: Option<f64>,
}

fn trace_rows(t: &FlowTrace<f64>) -> Vec<TraceRow> {
    (0..t.energies.len())
        .map(|i| TraceRow {
            iter: i,
            energy: t.energies[i],
            residual: t.residuals[i],
            step: i.checked_sub(1).map(|j| t.steps[j]),
        })
        .collect()
}

pub fn flow_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let (mut u, source) = load_map(cfg, 256)?;
    if cfg.perturb != 0.0 {
        let phi = tangent_direction(&u, cfg.band, &mut ChaCha8Rng::seed_from_u64(cfg.seed))?;
        u = u.perturb(&phi, cfg.perturb)?;
    }
    let params = FlowParams {
        max_iters: cfg.max_iters,
        residual_target: cfg.residual_target,
        initial_step: None,
    };
    let (trace, verdict) = match flow_descent(&u, &params) {
        Ok(t) if t.converged => (t, Verdict::Pass),
        Ok(t) => {
            let msg = format!("no convergence after {} iterations", t.iterations());
            (t, Verdict::Fail(msg))
        }
        Err(FlowError::Stagnation(t)) => {
            let msg = format!(
                "stagnation: step fell below {MIN_STEP:e} after {} iterations",
                t.iterations()
            );
            (*t, Verdict::Fail(msg))
        }
        Err(FlowError::Core(e)) => return Err(e.into()),
    };
    let rows = trace_rows(&trace);
    let table = csv_bytes(&rows)?;
    Ok(Outcome {
        result: json!({
            "source": source,
            "perturb": cfg.perturb,
            "iterations": trace.iterations(),
            "converged": trace.converged,
            "initial_energy": trace.energies[0],
            "final_energy": trace.final_energy(),
            "final_residual": trace.final_residual(),
        }),
        constants: json!({ "min_step": MIN_STEP, "initial_step": 1.0 / (1.0 + (u.len() / 2) as f64) }),
        files: vec![
            ("trace.csv".into(), table.clone()),
            (
                "terminal.map".into(),
                mapfile::to_string(trace.terminal.field()).into_bytes(),
            ),
        ],
        table,
        verdict,
    })
}

pub fn selftest_cmd(cfg: &RunConfig, corrupt_riesz: bool) -> Result<Outcome> {
    let st = SelfTestConfig {
        n: cfg.n_or(1024),
        seed: cfg.seed,
        riesz: if corrupt_riesz {
            RieszSign::Flipped
        } else {
            RieszSign::Standard
        },
    };
    let report = run_selftest(&st)?;
    let verdict = if report.passed() {
        Verdict::Pass
    } else {
        Verdict::Fail(format!("failing invariants: {}", report.failures().join(", ")))
    };
    Ok(Outcome {
        result: json!({ "passed": report.passed(), "corrupt_riesz": corrupt_riesz, "selftest": report }),
        constants: json!({}),
        table: csv_bytes(&report.results)?,
        files: Vec::new(),
        verdict,
    })
}
