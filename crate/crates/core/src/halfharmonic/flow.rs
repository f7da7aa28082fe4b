use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{energy, tangential_gradient, SphereMap};
use crate::error::Error as CoreError;
use crate::Scalar;

/// Smallest step before the descent gives up.
pub const MIN_STEP: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowParams {
    pub max_iters: usize,
    /// Stop once `sup |tangential_gradient|` is at or below this.
    pub residual_target: f64,
    /// Initial step; `None` means `1 / (1 + N/2)`.
    pub initial_step: Option<f64>,
}

impl Default for FlowParams {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            residual_target: 1e-6,
            initial_step: None,
        }
    }
}

/// History of a projected-gradient descent of the energy.
#[derive(Clone, Debug)]
pub struct FlowTrace<T: Scalar> {
    /// Energy of the start and of every accepted iterate.
    pub energies: Vec<T>,
    /// Sup norm of the tangential gradient at each of those maps.
    pub residuals: Vec<T>,
    /// Step size used for each accepted iterate.
    pub steps: Vec<T>,
    pub terminal: SphereMap<T>,
    pub converged: bool,
}

impl<T: Scalar> FlowTrace<T> {
    pub fn iterations(&self) -> usize {
        self.steps.len()
    }

    pub fn final_energy(&self) -> T {
        *self.energies.last().expect("trace starts with the initial energy")
    }

    pub fn final_residual(&self) -> T {
        *self.residuals.last().expect("trace starts with the initial residual")
    }
}

#[derive(Debug, Error)]
pub enum FlowError<T: Scalar> {
    #[error("step size fell below {MIN_STEP:e} after {} iterations", .0.iterations())]
    Stagnation(Box<FlowTrace<T>>),
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// Iterates `u ← π(u - τ g)` with `τ` halved whenever the energy would rise.
pub fn flow_descent<T: Scalar>(u0: &SphereMap<T>, params: &FlowParams) -> Result<FlowTrace<T>, FlowError<T>> {
    let target = T::lit(params.residual_target);
    let mut tau = T::lit(
        params
            .initial_step
            .unwrap_or_else(|| 1.0 / (1.0 + (u0.len() / 2) as f64)),
    );
    let mut u = u0.clone();
    let mut e = energy(&u);
    let mut g = tangential_gradient(&u)?;
    let mut trace = FlowTrace {
        energies: vec![e],
        residuals: vec![g.sup_norm()],
        steps: Vec::new(),
        terminal: u.clone(),
        converged: false,
    };
    let min_step = T::lit(MIN_STEP);
    while trace.steps.len() < params.max_iters {
        if trace.final_residual() <= target {
            trace.converged = true;
            break;
        }
        let candidate = u.perturb(&g, -tau)?;
        let ec = energy(&candidate);
        if ec > e {
            tau = tau * T::lit(0.5);
            if tau < min_step {
                trace.terminal = u;
                return Err(FlowError::Stagnation(Box::new(trace)));
            }
            continue;
        }
        u = candidate;
        e = ec;
        g = tangential_gradient(&u)?;
        trace.energies.push(e);
        trace.residuals.push(g.sup_norm());
        trace.steps.push(tau);
    }
    if trace.final_residual() <= target {
        trace.converged = true;
    }
    trace.terminal = u;
    Ok(trace)
}
