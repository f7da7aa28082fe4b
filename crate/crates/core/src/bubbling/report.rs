use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::energy::{circle_distance, ArcRegion, Concentration, LocalEnergy};
use super::extract::{rescale_extract, Extraction};
use super::neck::{neck_check, NeckParams, NeckReport};
use crate::error::{invalid, Error, Result};
use crate::halfharmonic::{energy, SphereMap};
use crate::spectral::PeriodicGrid;
use crate::Scalar;

/// Detector and extraction knobs for [`quantization_report`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuantParams {
    /// Energy threshold defining the concentration radius.
    pub gamma: f64,
    /// Smallest window energy for an extracted bubble to count.
    pub c0: f64,
    /// A point's atomic mass is `2E(B(c, r)) - E(B(c, 2r))` at this `r`, which
    /// cancels the part of a smooth background that is linear in `r`.
    pub mass_radius: f64,
    /// Neighborhood removed when searching for further points; its complement
    /// in the last member is the far region.
    pub exclusion_radius: f64,
    pub max_points: usize,
    /// A point concentrates if `ρ_last ≤ shrink_ratio·ρ_first`.
    pub shrink_ratio: f64,
    /// Centers closer than this in consecutive members belong to one point.
    pub match_tol: f64,
    /// Inner neck radius as a multiple of `ρ`.
    pub neck_factor: f64,
    /// Outer neck radius `Λ^{-1}`.
    pub neck_outer: f64,
    /// Extraction window in rescaled line units.
    pub window: f64,
    /// Grid size for extracted bubbles.
    pub extract_n: usize,
}

impl Default for QuantParams {
    fn default() -> Self {
        Self {
            gamma: std::f64::consts::FRAC_PI_4,
            c0: std::f64::consts::PI,
            mass_radius: 0.1,
            exclusion_radius: 1.0,
            max_points: 8,
            shrink_ratio: 0.5,
            match_tol: 0.1,
            neck_factor: 16.0,
            neck_outer: 0.5,
            window: 64.0,
            extract_n: 2048,
        }
    }
}

impl QuantParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gamma", self.gamma),
            ("c0", self.c0),
            ("mass_radius", self.mass_radius),
            ("exclusion_radius", self.exclusion_radius),
            ("shrink_ratio", self.shrink_ratio),
            ("match_tol", self.match_tol),
            ("neck_factor", self.neck_factor),
            ("neck_outer", self.neck_outer),
            ("window", self.window),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_points == 0 {
            return Err(invalid("max_points must be positive"));
        }
        if 2.0 * self.mass_radius > std::f64::consts::PI {
            return Err(invalid("mass_radius must not exceed π/2"));
        }
        PeriodicGrid::<f64>::new(self.extract_n)?;
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BubbleReport {
    pub center: f64,
    pub rho: f64,
    /// Energy of the rescaled map on the extraction window.
    pub energy: f64,
    pub total_energy: f64,
    pub shift: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MemberReport<T: Scalar> {
    pub index: usize,
    pub total_energy: f64,
    /// Every candidate the detector found, concentrating or not.
    pub candidates: Vec<Concentration>,
    pub necks: Vec<NeckReport>,
    pub bubbles: Vec<BubbleReport>,
    #[serde(skip)]
    pub extractions: Vec<Extraction<T>>,
}

/// A point whose concentration radius shrinks along the family.
#[derive(Clone, Debug, Serialize)]
pub struct FamilyPoint {
    pub center: f64,
    /// `(member, ρ)` for every member where the point was detected.
    pub radii: Vec<(usize, f64)>,
    /// Atomic mass estimate in every member, clamped at zero.
    pub masses: Vec<f64>,
    /// Energy within `exclusion_radius` in every member.
    pub arc_masses: Vec<f64>,
    pub final_mass: f64,
    /// Nearest positive multiple `k` of `2π`.
    pub multiple: u32,
    /// `|mass - 2πk| / 2πk` at the last member.
    pub deviation: f64,
    pub monotone: bool,
}

/// Last member's values away from the concentration points.
#[derive(Clone, Debug, Serialize)]
pub struct FarField {
    pub radius: f64,
    pub nodes: usize,
    pub mean: Vec<f64>,
    /// Largest distance from a far-region value to `mean`.
    pub spread: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConcentrationReport<T: Scalar> {
    pub params: QuantParams,
    pub members: Vec<MemberReport<T>>,
    pub points: Vec<FamilyPoint>,
    pub far_field: FarField,
}

impl<T: Scalar> ConcentrationReport<T> {
    /// Largest deviation from the nearest `2π` multiple over the family points.
    pub fn max_deviation(&self) -> f64 {
        self.points.iter().map(|p| p.deviation).fold(0.0, f64::max)
    }

    pub fn necks(&self) -> impl Iterator<Item = &NeckReport> {
        self.members.iter().flat_map(|m| &m.necks)
    }
}

/// Successive concentration points, each found with the previous
/// neighborhoods of radius `exclusion` removed from the density.
pub fn detect_points<T: Scalar>(
    density: &LocalEnergy<T>,
    gamma: f64,
    exclusion: f64,
    max_points: usize,
) -> Result<Vec<Concentration>> {
    let mut found: Vec<Concentration> = Vec::new();
    while found.len() < max_points {
        let masked = density.masked(|k| {
            let t = density.node(k);
            found
                .iter()
                .all(|c| circle_distance(t, T::lit(c.center)).to_f64_lossy() > exclusion)
        });
        match masked.concentration(T::lit(gamma), ArcRegion::whole())? {
            Some(c) => found.push(c),
            None => break,
        }
    }
    Ok(found)
}

/// Sup distance from `target` of the values of `u` farther than `radius`
/// from every center.
pub fn far_field_distance<T: Scalar>(u: &SphereMap<T>, centers: &[f64], radius: f64, target: &[f64]) -> Result<f64> {
    if target.len() != u.n_components() {
        return Err(invalid("target has the wrong number of components"));
    }
    Ok(far_nodes(u, centers, radius)
        .map(|k| {
            u.field()
                .at(k)
                .iter()
                .zip(target)
                .map(|(a, b)| (a.to_f64_lossy() - b).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max))
}

fn far_nodes<'a, T: Scalar>(u: &'a SphereMap<T>, centers: &'a [f64], radius: f64) -> impl Iterator<Item = usize> + 'a {
    (0..u.len()).filter(move |&k| {
        let t = u.grid().node(k);
        centers
            .iter()
            .all(|&c| circle_distance(t, T::lit(c)).to_f64_lossy() > radius)
    })
}

fn far_field<T: Scalar>(u: &SphereMap<T>, centers: &[f64], radius: f64) -> FarField {
    let nodes: Vec<usize> = far_nodes(u, centers, radius).collect();
    let m = u.n_components();
    let mut mean = vec![0.0; m];
    for &k in &nodes {
        for (acc, v) in mean.iter_mut().zip(u.field().at(k)) {
            *acc += v.to_f64_lossy();
        }
    }
    if !nodes.is_empty() {
        mean.iter_mut().for_each(|v| *v /= nodes.len() as f64);
    }
    let spread = far_field_distance(u, centers, radius, &mean).expect("matching components");
    FarField {
        radius,
        nodes: nodes.len(),
        mean,
        spread,
    }
}

struct Chain {
    hits: Vec<(usize, Concentration)>,
}

fn chain_points(detections: &[Vec<Concentration>], tol: f64) -> Vec<Chain> {
    let mut chains: Vec<Chain> = Vec::new();
    for (i, found) in detections.iter().enumerate() {
        let mut taken = vec![false; chains.len()];
        for c in found {
            let nearest = chains
                .iter()
                .enumerate()
                .filter(|(j, ch)| taken.get(*j) == Some(&false) && ch.hits.last().is_some_and(|h| h.0 + 1 == i))
                .map(|(j, ch)| {
                    (
                        j,
                        circle_distance(ch.hits.last().expect("non-empty").1.center, c.center),
                    )
                })
                .filter(|&(_, d)| d <= tol)
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match nearest {
                Some((j, _)) => {
                    taken[j] = true;
                    chains[j].hits.push((i, *c));
                }
                None => chains.push(Chain { hits: vec![(i, *c)] }),
            }
        }
    }
    chains
}

/// Detection, neck checks, bubble extraction and mass quantization along a
/// family of maps on a common grid.
pub fn quantization_report<T: Scalar>(family: &[SphereMap<T>], params: &QuantParams) -> Result<ConcentrationReport<T>> {
    if family.len() < 2 {
        return Err(Error::InsufficientFamily(family.len()));
    }
    params.validate()?;
    for u in &family[1..] {
        family[0].field().ensure_conformable(u.field())?;
    }
    let densities: Vec<LocalEnergy<T>> = family.par_iter().map(LocalEnergy::new).collect();
    let detections = densities
        .par_iter()
        .map(|d| detect_points(d, params.gamma, params.exclusion_radius, params.max_points))
        .collect::<Result<Vec<_>>>()?;

    let last = family.len() - 1;
    let chains: Vec<Chain> = chain_points(&detections, params.match_tol)
        .into_iter()
        .filter(|ch| {
            let (first, end) = (ch.hits[0], ch.hits[ch.hits.len() - 1]);
            ch.hits.len() >= 2 && end.0 == last && end.1.rho <= params.shrink_ratio * first.1.rho
        })
        .collect();

    let final_centers: Vec<f64> = chains.iter().map(|ch| ch.hits[ch.hits.len() - 1].1.center).collect();
    let points = chains
        .iter()
        .map(|ch| {
            let center = ch.hits[ch.hits.len() - 1].1.center;
            let arc = |i: usize, r: f64| {
                let c = ch.hits.iter().find(|h| h.0 == i).map_or(center, |h| h.1.center);
                densities[i]
                    .local_energy(T::lit(c), T::lit(r.min(std::f64::consts::PI)))
                    .map(|e| e.to_f64_lossy())
            };
            let r = params.mass_radius;
            let masses = (0..family.len())
                .map(|i| Ok((2.0 * arc(i, r)? - arc(i, 2.0 * r)?).max(0.0)))
                .collect::<Result<Vec<f64>>>()?;
            let arc_masses = (0..family.len())
                .map(|i| arc(i, params.exclusion_radius))
                .collect::<Result<Vec<f64>>>()?;
            let final_mass = masses[last];
            let quantum = std::f64::consts::TAU;
            let multiple = ((final_mass / quantum).round() as u32).max(1);
            let target = quantum * multiple as f64;
            let monotone = masses.windows(2).all(|w| w[1] >= w[0]) || masses.windows(2).all(|w| w[1] <= w[0]);
            Ok(FamilyPoint {
                center,
                radii: ch.hits.iter().map(|h| (h.0, h.1.rho)).collect(),
                final_mass,
                multiple,
                deviation: (final_mass - target).abs() / target,
                monotone,
                masses,
                arc_masses,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let target = PeriodicGrid::new(params.extract_n)?;
    let members = (0..family.len())
        .into_par_iter()
        .map(|i| {
            let hits: Vec<Concentration> = chains
                .iter()
                .filter_map(|ch| ch.hits.iter().find(|h| h.0 == i).map(|h| h.1))
                .collect();
            let mut necks = Vec::new();
            let mut bubbles = Vec::new();
            let mut extractions = Vec::new();
            for c in &hits {
                let lambda = params.neck_factor * c.rho;
                if 2.0 * lambda <= params.neck_outer {
                    let np = NeckParams::new(c.center, lambda, 1.0 / params.neck_outer);
                    necks.push(neck_check(&densities[i], np)?);
                }
                if c.rho <= std::f64::consts::FRAC_PI_4 {
                    let ex = rescale_extract(&family[i], c.center, c.rho, &target)?;
                    let e = ex.window_energy(params.window)?;
                    if e >= params.c0 {
                        bubbles.push(BubbleReport {
                            center: c.center,
                            rho: c.rho,
                            energy: e,
                            total_energy: energy(&ex.map).to_f64_lossy(),
                            shift: ex.shift,
                        });
                        extractions.push(ex);
                    }
                }
            }
            Ok(MemberReport {
                index: i,
                total_energy: densities[i].total().to_f64_lossy(),
                candidates: detections[i].clone(),
                necks,
                bubbles,
                extractions,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ConcentrationReport {
        params: params.clone(),
        members,
        points,
        far_field: far_field(&family[last], &final_centers, params.exclusion_radius),
    })
}
