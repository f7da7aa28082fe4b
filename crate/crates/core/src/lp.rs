//! Littlewood–Paley blocks and the three paraproducts.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::spectral::ops::{hermitian_multiplier, product};
use crate::spectral::{Field, PeriodicGrid};
use crate::Scalar;

/// Default gap between the high and low indices in `Π₁`/`Π₂`.
pub const DEFAULT_OFFSET: i32 = 4;

/// Raised-cosine cutoff: 1 on `[0, 1]`, 0 on `[2, ∞)`.
fn taper(x: f64) -> f64 {
    if x <= 1.0 {
        1.0
    } else if x >= 2.0 {
        0.0
    } else {
        let c = (0.5 * std::f64::consts::PI * (x - 1.0)).cos();
        c * c
    }
}

/// Dyadic cutoffs `φ_j(n) = φ(n / 2^j)` and bands `ψ_j = φ_j - φ_{j-1}`.
///
/// The lowest block is `φ_{j_min}` itself, so the blocks `j_min..=j_max`
/// sum to `φ_{j_max}`, which is 1 on the whole representable band.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicFamily {
    j_min: i32,
    j_max: i32,
    offset: i32,
}

impl DyadicFamily {
    /// Family with `j_min = 0` and `2^{j_max} = N/2`.
    pub fn for_grid<T: Scalar>(grid: &PeriodicGrid<T>) -> Self {
        let j_max = (grid.len() / 2).trailing_zeros() as i32;
        Self {
            j_min: 0,
            j_max,
            offset: DEFAULT_OFFSET,
        }
    }

    pub fn new(j_min: i32, j_max: i32, offset: i32) -> Result<Self> {
        if j_min < 0 || j_min >= j_max {
            return Err(invalid(format!("need 0 <= j_min < j_max, got {j_min}..{j_max}")));
        }
        if offset < 1 {
            return Err(invalid(format!("paraproduct offset must be >= 1, got {offset}")));
        }
        Ok(Self { j_min, j_max, offset })
    }

    pub fn with_offset(self, offset: i32) -> Result<Self> {
        Self::new(self.j_min, self.j_max, offset)
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn offset(&self) -> i32 {
        self.offset
    }

    pub fn range(&self) -> std::ops::RangeInclusive<i32> {
        self.j_min..=self.j_max
    }

    /// Whether the family resolves every frequency of `grid`.
    pub fn covers<T: Scalar>(&self, grid: &PeriodicGrid<T>) -> bool {
        (1usize << self.j_max) >= grid.len() / 2
    }

    /// `φ_j(n)`; zero for `j < j_min` (no blocks below the floor).
    pub fn low_weight(&self, j: i32, n: i64) -> f64 {
        if j < self.j_min {
            return 0.0;
        }
        taper(n.unsigned_abs() as f64 / f64::powi(2.0, j))
    }

    /// Weight of block `j` at frequency `n`.
    pub fn band_weight(&self, j: i32, n: i64) -> f64 {
        if j == self.j_min {
            self.low_weight(j, n)
        } else {
            self.low_weight(j, n) - self.low_weight(j - 1, n)
        }
    }

    fn check(&self, j: i32) -> Result<()> {
        if !self.range().contains(&j) {
            return Err(invalid(format!(
                "block {j} outside the family range {}..={}",
                self.j_min, self.j_max
            )));
        }
        Ok(())
    }
}

/// `P_j f`.
pub fn project<T: Scalar>(field: &Field<T>, family: &DyadicFamily, j: i32) -> Result<Field<T>> {
    family.check(j)?;
    Ok(weighted(field, |n| family.band_weight(j, n)))
}

/// `P_{≤j} f`.
pub fn project_low<T: Scalar>(field: &Field<T>, family: &DyadicFamily, j: i32) -> Result<Field<T>> {
    family.check(j)?;
    Ok(weighted(field, |n| family.low_weight(j, n)))
}

fn weighted<T: Scalar>(field: &Field<T>, w: impl Fn(i64) -> f64) -> Field<T> {
    hermitian_multiplier(field, |n| Complex::new(T::lit(w(n)), T::zero()))
}

/// Which of the three interaction regimes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Paraproduct {
    /// `Σ_j f_j g^{j-s}`: high frequencies of `f` against low ones of `g`.
    HighLow,
    /// `Σ_j g_j f^{j-s}`.
    LowHigh,
    /// `Σ_j Σ_{|k-j| < s} f_j g_k`.
    Diagonal,
}

impl Paraproduct {
    pub const ALL: [Paraproduct; 3] = [Paraproduct::HighLow, Paraproduct::LowHigh, Paraproduct::Diagonal];

    /// 1-based index as used in the `Π₁, Π₂, Π₃` naming.
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Self::HighLow),
            2 => Ok(Self::LowHigh),
            3 => Ok(Self::Diagonal),
            _ => Err(invalid(format!("paraproduct index must be 1, 2 or 3, got {i}"))),
        }
    }
}

/// Sum of blocks `k` with `lo <= k <= hi`, clipped to the family range.
fn block_sum<T: Scalar>(field: &Field<T>, family: &DyadicFamily, lo: i32, hi: i32) -> Option<Field<T>> {
    let lo = lo.max(family.j_min);
    let hi = hi.min(family.j_max);
    if lo > hi {
        return None;
    }
    Some(weighted(field, |n| {
        family.low_weight(hi, n)
            - if lo > family.j_min {
                family.low_weight(lo - 1, n)
            } else {
                0.0
            }
    }))
}

/// The nonzero summands of a paraproduct, tagged by the high index `j`.
pub fn paraproduct_terms<T: Scalar>(
    f: &Field<T>,
    g: &Field<T>,
    family: &DyadicFamily,
    which: Paraproduct,
) -> Result<Vec<(i32, Field<T>)>> {
    f.ensure_same_grid(g)?;
    if !family.covers(f.grid()) {
        return Err(invalid("dyadic family does not cover the grid's frequency band"));
    }
    let s = family.offset;
    let mut terms = Vec::new();
    for j in family.range() {
        let fj = project(f, family, j)?;
        let gj = project(g, family, j)?;
        let partner = match which {
            Paraproduct::HighLow => block_sum(g, family, family.j_min, j - s).map(|gl| (fj, gl)),
            Paraproduct::LowHigh => block_sum(f, family, family.j_min, j - s).map(|fl| (fl, gj)),
            Paraproduct::Diagonal => block_sum(g, family, j - s + 1, j + s - 1).map(|gn| (fj, gn)),
        };
        if let Some((a, b)) = partner {
            terms.push((j, product(&a, &b)?));
        }
    }
    Ok(terms)
}

/// `Π₁`, `Π₂` or `Π₃` of `f` and `g`; the three add up to the alias-free `f·g`.
pub fn paraproduct<T: Scalar>(
    f: &Field<T>,
    g: &Field<T>,
    family: &DyadicFamily,
    which: Paraproduct,
) -> Result<Field<T>> {
    let terms = paraproduct_terms(f, g, family, which)?;
    let m = if f.n_components() == 1 {
        g.n_components()
    } else {
        f.n_components()
    };
    let mut acc = Field::zeros(f.grid(), m);
    for (_, t) in &terms {
        acc = acc.add(t)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::ops::product;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(n: usize) -> PeriodicGrid<f64> {
        PeriodicGrid::new(n).unwrap()
    }

    fn mode(g: &PeriodicGrid<f64>, n: f64) -> Field<f64> {
        Field::scalar_fn(g, |t| (n * t).cos())
    }

    fn random_band_limited(g: &PeriodicGrid<f64>, band: usize, rng: &mut ChaCha8Rng) -> Field<f64> {
        let coeffs: Vec<(f64, f64)> = (0..=band)
            .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        Field::scalar_fn(g, |t| {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, (a, b))| a * (k as f64 * t).cos() + b * (k as f64 * t).sin())
                .sum()
        })
    }

    #[test]
    fn partition_of_unity() {
        let g = grid(256);
        let fam = DyadicFamily::for_grid(&g);
        for n in -128..=128i64 {
            let total: f64 = fam.range().map(|j| fam.band_weight(j, n)).sum();
            assert!((total - 1.0).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn band_supports() {
        let fam = DyadicFamily::new(0, 10, 4).unwrap();
        for j in 1..=10 {
            for n in 0..3000i64 {
                if fam.band_weight(j, n).abs() > 0.0 {
                    let lo = 1i64 << (j - 1);
                    let hi = 1i64 << (j + 1);
                    assert!(n >= lo && n <= hi, "psi_{j}({n}) nonzero");
                }
            }
        }
    }

    #[test]
    fn projection_examples() {
        let g = grid(256);
        let fam = DyadicFamily::for_grid(&g);
        let u = mode(&g, 16.0);
        let p = project(&u, &fam, 4).unwrap();
        assert!(p.sub(&u).unwrap().sup_norm() < 1e-13);
        for j in [2, 6, 7] {
            assert!(project(&u, &fam, j).unwrap().sup_norm() < 1e-13);
        }
        assert!(project_low(&u, &fam, fam.j_max()).unwrap().sub(&u).unwrap().sup_norm() < 1e-13);
        assert!(project(&u, &fam, fam.j_max() + 1).is_err());
        assert!(project_low(&u, &fam, -1).is_err());
    }

    #[test]
    fn blocks_reassemble_the_field() {
        let g = grid(256);
        let fam = DyadicFamily::for_grid(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let samples: Vec<f64> = (0..256).map(|_| rng.random_range(-1.0..1.0)).collect();
        let u = Field::from_components(&g, vec![samples]).unwrap();
        let mut acc = Field::zeros(&g, 1);
        for j in fam.range() {
            acc = acc.add(&project(&u, &fam, j).unwrap()).unwrap();
        }
        assert!(acc.sub(&u).unwrap().sup_norm() < 1e-12);
    }

    #[test]
    fn high_low_single_modes() {
        let g = grid(512);
        let fam = DyadicFamily::for_grid(&g);
        let f = mode(&g, 64.0);
        let h = mode(&g, 2.0);
        let fg = product(&f, &h).unwrap();
        let p1 = paraproduct(&f, &h, &fam, Paraproduct::HighLow).unwrap();
        assert!(p1.sub(&fg).unwrap().sup_norm() < 1e-12);
        assert!(paraproduct(&f, &h, &fam, Paraproduct::LowHigh).unwrap().sup_norm() < 1e-12);
        assert!(paraproduct(&f, &h, &fam, Paraproduct::Diagonal).unwrap().sup_norm() < 1e-12);
    }

    #[test]
    fn diagonal_single_modes() {
        let g = grid(512);
        let fam = DyadicFamily::for_grid(&g);
        let f = mode(&g, 16.0);
        let fg = product(&f, &f).unwrap();
        let p3 = paraproduct(&f, &f, &fam, Paraproduct::Diagonal).unwrap();
        assert!(p3.sub(&fg).unwrap().sup_norm() < 1e-12);
        assert!(paraproduct(&f, &f, &fam, Paraproduct::HighLow).unwrap().sup_norm() < 1e-12);
        assert!(paraproduct(&f, &f, &fam, Paraproduct::LowHigh).unwrap().sup_norm() < 1e-12);
    }

    #[test]
    fn high_low_summands_respect_their_annulus() {
        let g = grid(1024);
        let fam = DyadicFamily::for_grid(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = random_band_limited(&g, 200, &mut rng);
        let h = random_band_limited(&g, 200, &mut rng);
        for (j, term) in paraproduct_terms(&f, &h, &fam, Paraproduct::HighLow).unwrap() {
            let lo = 2f64.powi(j - 2);
            let hi = 2f64.powi(j + 2);
            for k in 0..g.len() {
                let n = g.frequency(k).unsigned_abs() as f64;
                if n < lo || n > hi {
                    assert!(term.spectrum(0)[k].norm() < 1e-13, "j = {j}, n = {n}");
                }
            }
        }
    }

    #[test]
    fn reconstruction_and_linearity() {
        let g = grid(1024);
        let fam = DyadicFamily::for_grid(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = random_band_limited(&g, 250, &mut rng);
        let f2 = random_band_limited(&g, 250, &mut rng);
        let h = random_band_limited(&g, 250, &mut rng);
        let pointwise: Vec<f64> = f.component(0).iter().zip(h.component(0)).map(|(a, b)| a * b).collect();
        let mut total = Field::zeros(&g, 1);
        for which in Paraproduct::ALL {
            total = total.add(&paraproduct(&f, &h, &fam, which).unwrap()).unwrap();
            let lhs = paraproduct(&f.lin_comb(2.0, &f2, -0.5).unwrap(), &h, &fam, which).unwrap();
            let rhs = paraproduct(&f, &h, &fam, which)
                .unwrap()
                .lin_comb(2.0, &paraproduct(&f2, &h, &fam, which).unwrap(), -0.5)
                .unwrap();
            assert!(lhs.sub(&rhs).unwrap().sup_norm() < 1e-12);
        }
        let err = total
            .component(0)
            .iter()
            .zip(&pointwise)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-10 * f.sup_norm() * h.sup_norm(), "{err}");
    }

    #[test]
    fn offset_knob_and_bad_inputs() {
        let g = grid(64);
        let fam = DyadicFamily::for_grid(&g).with_offset(2).unwrap();
        assert_eq!(fam.offset(), 2);
        assert!(DyadicFamily::new(3, 3, 4).is_err());
        assert!(fam.with_offset(0).is_err());
        assert!(Paraproduct::from_index(4).is_err());
        let other = Field::scalar_fn(&grid(128), f64::cos);
        let u = Field::scalar_fn(&g, f64::cos);
        assert!(paraproduct(&u, &other, &fam, Paraproduct::HighLow).is_err());
    }
}
