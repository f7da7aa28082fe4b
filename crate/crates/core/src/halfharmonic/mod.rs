//! Half-harmonic maps into spheres: explicit critical points, the energy,
//! its first variation and a projected-gradient descent.

mod analysis;
mod blaschke;
mod flow;
mod sphere;

pub use analysis::{
    degree, el_residual, energy, gradient_check, tangential_gradient, tangential_part, Degree, GradientCheck,
    TANGENCY_TOL,
};
pub use blaschke::{blaschke_trace, rotation_matrix, BlaschkeSpec};
pub use flow::{flow_descent, FlowError, FlowParams, FlowTrace, MIN_STEP};
pub(crate) use sphere::require_sphere;
pub use sphere::{SphereMap, DEFAULT_SPHERE_TOL};
