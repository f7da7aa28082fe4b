//! Periodic grids, sampled fields and Fourier multipliers on the circle.

mod field;
mod grid;

pub mod disk;
pub mod ops;

pub use field::{inverse_transform, transform, Field};
pub use grid::PeriodicGrid;
