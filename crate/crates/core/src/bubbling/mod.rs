//! Energy concentration along sequences of maps: local energies, concentration
//! radii, annulus classification, neck estimates and bubble extraction.

mod energy;
mod extract;
mod neck;
mod report;

pub use energy::{
    annulus_profile, circle_distance, classify_annuli, concentration_radius, energy_density, local_energy,
    AnnulusClassification, ArcRegion, Concentration, DyadicAnnulus, EnergyProfile, Gap, GapKind, LocalEnergy,
};
pub use extract::{chart_angle, rescale_extract, Extraction};
pub use neck::{neck_check, NeckParams, NeckReport};
pub use report::{
    detect_points, far_field_distance, quantization_report, BubbleReport, ConcentrationReport, FamilyPoint, FarField,
    MemberReport, QuantParams,
};
