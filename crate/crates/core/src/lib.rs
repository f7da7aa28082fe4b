//! Numerics for half-harmonic maps from the circle into spheres.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bubbling;
pub mod commutators;
pub mod ensemble;
pub mod error;
pub mod halfharmonic;
pub mod lp;
pub mod mapfile;
pub mod norms;
pub mod scalar;
pub mod selftest;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Grid = spectral::PeriodicGrid<f64>;
pub type Field64 = spectral::Field<f64>;
pub type Map = halfharmonic::SphereMap<f64>;
pub type Disk = spectral::disk::DiskField<f64>;
pub type Matrix = commutators::MatrixField<f64>;
pub type Trace = halfharmonic::FlowTrace<f64>;
pub type Report = bubbling::ConcentrationReport<f64>;
