//! Three-term commutators, their two-term variants, and the empirical
//! estimate harness over the critical ensemble.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::critical_pair;
use crate::error::{invalid, Result};
use crate::halfharmonic::{require_sphere, SphereMap};
use crate::norms::{default_hardy_scales, sobolev_seminorm, NormSpec};
use crate::spectral::ops::{
    derivative, dot, from_padded, half_laplacian, padded_samples, quarter_laplacian, riesz_with, zero_mode_tolerance,
    RieszSign,
};
use crate::spectral::{Field, PeriodicGrid};
use crate::Scalar;

/// A scalar or `rows × cols` matrix-valued field acting on vector fields.
#[derive(Clone, Debug)]
pub struct MatrixField<T: Scalar> {
    shape: Shape,
    entries: Field<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Shape {
    /// Multiplies every component.
    Scalar,
    Matrix {
        rows: usize,
        cols: usize,
    },
}

impl<T: Scalar> MatrixField<T> {
    /// A scalar field acting by multiplication.
    pub fn scalar(f: Field<T>) -> Result<Self> {
        if f.n_components() != 1 {
            return Err(invalid("a scalar multiplier has exactly one component"));
        }
        Ok(Self {
            shape: Shape::Scalar,
            entries: f,
        })
    }

    /// Row-major entries, one component per entry.
    pub fn matrix(rows: usize, cols: usize, entries: Field<T>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.n_components() != rows * cols {
            return Err(invalid(format!(
                "{rows}x{cols} matrix field needs {} components, got {}",
                rows * cols,
                entries.n_components()
            )));
        }
        Ok(Self {
            shape: Shape::Matrix { rows, cols },
            entries,
        })
    }

    /// `v ↦ u·v`, a `1 × m` row.
    pub fn dot(u: &Field<T>) -> Self {
        Self::matrix(1, u.n_components(), u.clone()).expect("row shape")
    }

    /// `v ↦ u ∧ v`: `[-u₂, u₁]` for two components, the cross-product matrix for three.
    pub fn wedge(u: &Field<T>) -> Result<Self> {
        let g = u.grid();
        let neg = |i: usize| u.select(&[i]).scale(-T::one());
        let pos = |i: usize| u.select(&[i]);
        match u.n_components() {
            2 => Self::matrix(1, 2, Field::stack(&[&neg(1), &pos(0)])?),
            3 => {
                let z = Field::zeros(g, 1);
                Self::matrix(
                    3,
                    3,
                    Field::stack(&[&z, &neg(2), &pos(1), &pos(2), &z, &neg(0), &neg(1), &pos(0), &z])?,
                )
            }
            m => Err(invalid(format!("wedge needs 2 or 3 components, got {m}"))),
        }
    }

    pub fn entries(&self) -> &Field<T> {
        &self.entries
    }

    pub fn grid(&self) -> &PeriodicGrid<T> {
        self.entries.grid()
    }

    /// Number of components of the image of an `m`-component field.
    pub fn output_components(&self, m: usize) -> usize {
        match self.shape {
            Shape::Scalar => m,
            Shape::Matrix { rows, .. } => rows,
        }
    }

    /// Same shape, entries transformed.
    fn map(&self, f: impl Fn(&Field<T>) -> Field<T>) -> Self {
        Self {
            shape: self.shape,
            entries: f(&self.entries),
        }
    }

    fn check(&self, v: &Field<T>) -> Result<()> {
        self.entries.ensure_same_grid(v)?;
        if let Shape::Matrix { cols, .. } = self.shape {
            if cols != v.n_components() {
                return Err(invalid(format!(
                    "matrix field with {cols} columns cannot act on a {}-component field",
                    v.n_components()
                )));
            }
        }
        Ok(())
    }

    /// Alias-free `Q v`.
    pub fn apply(&self, v: &Field<T>) -> Result<Field<T>> {
        self.check(v)?;
        let pq = padded_samples(&self.entries);
        let pv = padded_samples(v);
        let len = pv[0].len();
        let out: Vec<Vec<T>> = match self.shape {
            Shape::Scalar => pv
                .iter()
                .map(|c| c.iter().zip(&pq[0]).map(|(&x, &q)| x * q).collect())
                .collect(),
            Shape::Matrix { rows, cols } => (0..rows)
                .map(|i| {
                    let mut acc = vec![T::zero(); len];
                    for (j, vj) in pv.iter().enumerate() {
                        for ((a, &q), &x) in acc.iter_mut().zip(&pq[i * cols + j]).zip(vj) {
                            *a = *a + q * x;
                        }
                    }
                    acc
                })
                .collect(),
        };
        Ok(from_padded(self.grid(), out))
    }
}

impl<T: Scalar> TryFrom<Field<T>> for MatrixField<T> {
    type Error = crate::Error;

    fn try_from(f: Field<T>) -> Result<Self> {
        Self::scalar(f)
    }
}

/// `(-Δ)^{1/4}[Q (-Δ)^{1/4} u]`, the first term shared by every commutator.
pub fn naive_term<T: Scalar>(q: &MatrixField<T>, u: &Field<T>) -> Result<Field<T>> {
    Ok(quarter_laplacian(&q.apply(&quarter_laplacian(u))?))
}

/// `T(Q,u) = (-Δ)^{1/4}[Q (-Δ)^{1/4}u] - Q (-Δ)^{1/2}u + (-Δ)^{1/4}Q (-Δ)^{1/4}u`.
pub fn op_t<T: Scalar>(q: &MatrixField<T>, u: &Field<T>) -> Result<Field<T>> {
    let third = q.map(quarter_laplacian).apply(&quarter_laplacian(u))?;
    op_t_tilde(q, u)?.add(&third)
}

/// `T(Q,u)` without its third term.
pub fn op_t_tilde<T: Scalar>(q: &MatrixField<T>, u: &Field<T>) -> Result<Field<T>> {
    naive_term(q, u)?.sub(&q.apply(&half_laplacian(u))?)
}

/// `S(Q,u) = (-Δ)^{1/4}[Q (-Δ)^{1/4}u] - R(Q ∂u) + R[(-Δ)^{1/4}Q R(-Δ)^{1/4}u]`.
pub fn op_s<T: Scalar>(q: &MatrixField<T>, u: &Field<T>) -> Result<Field<T>> {
    op_s_with(q, u, RieszSign::Standard)
}

pub fn op_s_with<T: Scalar>(q: &MatrixField<T>, u: &Field<T>, sign: RieszSign) -> Result<Field<T>> {
    let inner = q
        .map(quarter_laplacian)
        .apply(&riesz_with(&quarter_laplacian(u), sign))?;
    op_s_tilde_with(q, u, sign)?.add(&riesz_with(&inner, sign))
}

/// `S(Q,u)` without its third term.
pub fn op_s_tilde<T: Scalar>(q: &MatrixField<T>, u: &Field<T>) -> Result<Field<T>> {
    op_s_tilde_with(q, u, RieszSign::Standard)
}

pub fn op_s_tilde_with<T: Scalar>(q: &MatrixField<T>, u: &Field<T>, sign: RieszSign) -> Result<Field<T>> {
    naive_term(q, u)?.sub(&riesz_with(&q.apply(&derivative(u))?, sign))
}

/// `R((-Δ)^{1/4}u · R(-Δ)^{1/4}u)`.
pub fn anticommutator<T: Scalar>(u: &Field<T>) -> Field<T> {
    anticommutator_with(u, RieszSign::Standard)
}

pub fn anticommutator_with<T: Scalar>(u: &Field<T>, sign: RieszSign) -> Field<T> {
    let a = quarter_laplacian(u);
    riesz_with(&dot(&a, &riesz_with(&a, sign)).expect("conformable"), sign)
}

/// Residual of `(-Δ)^{1/4}(u·(-Δ)^{1/4}u) = S(u·, u) - R((-Δ)^{1/4}u · R(-Δ)^{1/4}u)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StructureResidual {
    /// Sup norm of left minus right side.
    pub residual: f64,
    /// `sup |u · ∂u|`, which vanishes for exactly sphere-valued maps.
    pub tangency: f64,
}

pub fn structure_identity_residual<T: Scalar>(u: &SphereMap<T>) -> Result<StructureResidual> {
    structure_identity_residual_with(u, RieszSign::Standard)
}

pub fn structure_identity_residual_with<T: Scalar>(u: &SphereMap<T>, sign: RieszSign) -> Result<StructureResidual> {
    require_sphere(u.field())?;
    let q = MatrixField::dot(u.field());
    let lhs = naive_term(&q, u.field())?;
    let rhs = op_s_with(&q, u.field(), sign)?.sub(&anticommutator_with(u.field(), sign))?;
    let tangency = q.apply(&derivative(u.field()))?.sup_norm();
    Ok(StructureResidual {
        residual: lhs.sub(&rhs)?.sup_norm().to_f64_lossy(),
        tangency: tangency.to_f64_lossy(),
    })
}

/// Operators covered by the estimate study.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operator {
    T,
    S,
    TTilde,
    STilde,
    Anticommutator,
    /// `(-Δ)^{1/4}[Q (-Δ)^{1/4} u]` alone.
    Naive,
}

impl Operator {
    pub const ALL: [Operator; 6] = [
        Operator::T,
        Operator::S,
        Operator::TTilde,
        Operator::STilde,
        Operator::Anticommutator,
        Operator::Naive,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Operator::T => "T",
            Operator::S => "S",
            Operator::TTilde => "T_tilde",
            Operator::STilde => "S_tilde",
            Operator::Anticommutator => "anticommutator",
            Operator::Naive => "naive",
        }
    }

    pub fn apply<T: Scalar>(&self, q: &MatrixField<T>, u: &Field<T>) -> Result<Field<T>> {
        match self {
            Operator::T => op_t(q, u),
            Operator::S => op_s(q, u),
            Operator::TTilde => op_t_tilde(q, u),
            Operator::STilde => op_s_tilde(q, u),
            Operator::Anticommutator => Ok(anticommutator(u)),
            Operator::Naive => naive_term(q, u),
        }
    }
}

impl std::str::FromStr for Operator {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Operator::ALL
            .into_iter()
            .find(|o| o.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| invalid(format!("unknown operator {s:?}")))
    }
}

/// One sample of the estimate study.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommutatorReport {
    pub operator: Operator,
    pub numerator: NormSpec,
    pub numerator_value: f64,
    /// `‖Q‖_{Ḣ^{1/2}} ‖u‖_{Ḣ^{1/2}}` (`‖u‖²` for the anticommutator).
    pub denominator: f64,
    pub ratio: f64,
    pub peak_frequency: usize,
    pub seed: u64,
    pub index: usize,
    /// Set when the numerator norm needed the output's mean removed first.
    pub mean_removed: bool,
}

/// A sample excluded from the statistics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SkippedSample {
    pub peak_frequency: usize,
    pub index: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub seed: u64,
    pub samples: usize,
    pub peaks: Vec<usize>,
    pub operators: Vec<Operator>,
    pub numerator: NormSpec,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            samples: 100,
            peaks: vec![8, 16, 32, 64, 128],
            operators: Operator::ALL.to_vec(),
            numerator: NormSpec::Sobolev { s: -0.5 },
        }
    }
}

/// Max and median ratio of one operator at one peak frequency.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrequencySummary {
    pub operator: Operator,
    pub peak_frequency: usize,
    pub count: usize,
    pub max: f64,
    pub median: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StudyResult {
    pub reports: Vec<CommutatorReport>,
    pub skipped: Vec<SkippedSample>,
    /// Number of smoothing scales when the numerator is the Hardy proxy.
    pub hardy_scales: Option<usize>,
}

impl StudyResult {
    pub fn summaries(&self) -> Vec<FrequencySummary> {
        let mut keys: Vec<(Operator, usize)> = self.reports.iter().map(|r| (r.operator, r.peak_frequency)).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .map(|(op, peak)| {
                let mut v: Vec<f64> = self
                    .reports
                    .iter()
                    .filter(|r| r.operator == op && r.peak_frequency == peak)
                    .map(|r| r.ratio)
                    .collect();
                v.sort_by(f64::total_cmp);
                let median = if v.len() % 2 == 1 {
                    v[v.len() / 2]
                } else {
                    0.5 * (v[v.len() / 2 - 1] + v[v.len() / 2])
                };
                FrequencySummary {
                    operator: op,
                    peak_frequency: peak,
                    count: v.len(),
                    max: *v.last().expect("non-empty group"),
                    median,
                }
            })
            .collect()
    }

    /// Max ratio per peak frequency, in increasing frequency order.
    pub fn max_by_peak(&self, op: Operator) -> Vec<(usize, f64)> {
        self.summaries()
            .into_iter()
            .filter(|s| s.operator == op)
            .map(|s| (s.peak_frequency, s.max))
            .collect()
    }

    /// Largest over smallest per-frequency max ratio.
    pub fn spread(&self, op: Operator) -> Option<f64> {
        let m = self.max_by_peak(op);
        let hi = m.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let lo = m.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        (!m.is_empty() && lo > 0.0).then(|| hi / lo)
    }

    /// Max ratio at the highest frequency over that at the lowest.
    pub fn growth(&self, op: Operator) -> Option<f64> {
        let m = self.max_by_peak(op);
        match (m.first(), m.last()) {
            (Some(a), Some(b)) if a.1 > 0.0 => Some(b.1 / a.1),
            _ => None,
        }
    }

    /// T and S spreads below 2 and naive-term growth of at least 2.
    pub fn boundedness(&self) -> Boundedness {
        let t_spread = self.spread(Operator::T);
        let s_spread = self.spread(Operator::S);
        let naive_growth = self.growth(Operator::Naive);
        let passed =
            matches!((t_spread, s_spread, naive_growth), (Some(t), Some(s), Some(g)) if t < 2.0 && s < 2.0 && g >= 2.0);
        Boundedness {
            t_spread,
            s_spread,
            naive_growth,
            passed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Boundedness {
    pub t_spread: Option<f64>,
    pub s_spread: Option<f64>,
    pub naive_growth: Option<f64>,
    pub passed: bool,
}

/// Evaluates the configured operators on explicit `(Q, u)` pairs.
///
/// Pairs with a constant member (vanishing `Ḣ^{1/2}` norm) are skipped.
pub fn study_pairs<T: Scalar>(
    pairs: &[(Field<T>, Field<T>)],
    operators: &[Operator],
    numerator: NormSpec,
    peak_frequency: usize,
    seed: u64,
) -> Result<StudyResult> {
    numerator.validate()?;
    let per_sample: Vec<Result<std::result::Result<Vec<CommutatorReport>, SkippedSample>>> = pairs
        .par_iter()
        .enumerate()
        .map(|(index, (q, u))| evaluate_pair(q, u, operators, numerator, peak_frequency, seed, index))
        .collect();
    let mut out = StudyResult {
        hardy_scales: hardy_disclosure(numerator, pairs.first().map(|p| p.0.len())),
        ..StudyResult::default()
    };
    for r in per_sample {
        match r? {
            Ok(reports) => out.reports.extend(reports),
            Err(skip) => out.skipped.push(skip),
        }
    }
    Ok(out)
}

fn hardy_disclosure(numerator: NormSpec, n: Option<usize>) -> Option<usize> {
    match (numerator, n) {
        (NormSpec::HardyProxy, Some(n)) => Some(default_hardy_scales::<f64>(n).len()),
        _ => None,
    }
}

fn evaluate_pair<T: Scalar>(
    q: &Field<T>,
    u: &Field<T>,
    operators: &[Operator],
    numerator: NormSpec,
    peak_frequency: usize,
    seed: u64,
    index: usize,
) -> Result<std::result::Result<Vec<CommutatorReport>, SkippedSample>> {
    let nq = sobolev_seminorm(q, T::lit(0.5))?;
    let nu = sobolev_seminorm(u, T::lit(0.5))?;
    let tiny = T::lit(1e-12);
    if nq <= tiny || nu <= tiny {
        return Ok(Err(SkippedSample {
            peak_frequency,
            index,
            reason: "degenerate denominator: constant Q or u".into(),
        }));
    }
    let qm = MatrixField::scalar(q.clone())?;
    let mut reports = Vec::with_capacity(operators.len());
    for &op in operators {
        let mut out = op.apply(&qm, u)?;
        let mut mean_removed = false;
        if let NormSpec::Sobolev { s } = numerator {
            if s < 0.0 && out.max_zero_mode() > zero_mode_tolerance::<T>() {
                out = out.without_mean();
                mean_removed = true;
            }
        }
        let value = numerator.evaluate(&out)?;
        let den = if op == Operator::Anticommutator {
            nu * nu
        } else {
            nq * nu
        };
        reports.push(CommutatorReport {
            operator: op,
            numerator,
            numerator_value: value.to_f64_lossy(),
            denominator: den.to_f64_lossy(),
            ratio: (value / den).to_f64_lossy(),
            peak_frequency,
            seed,
            index,
            mean_removed,
        });
    }
    Ok(Ok(reports))
}

/// Runs the study over the seeded critical ensemble at every peak frequency.
pub fn estimate_study<T: Scalar>(grid: &PeriodicGrid<T>, config: &StudyConfig) -> Result<StudyResult> {
    if config.samples == 0 {
        return Err(invalid("ensemble size must be at least 1"));
    }
    if config.peaks.is_empty() || config.operators.is_empty() {
        return Err(invalid("need at least one peak frequency and one operator"));
    }
    let mut out = StudyResult::default();
    for &peak in &config.peaks {
        let pairs = (0..config.samples)
            .into_par_iter()
            .map(|i| critical_pair(grid, config.seed, peak, i))
            .collect::<Result<Vec<_>>>()?;
        let r = study_pairs(&pairs, &config.operators, config.numerator, peak, config.seed)?;
        out.reports.extend(r.reports);
        out.skipped.extend(r.skipped);
        out.hardy_scales = r.hardy_scales;
    }
    Ok(out)
}
