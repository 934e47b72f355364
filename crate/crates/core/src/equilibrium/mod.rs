//! Limit laws and numerical equilibrium measures.
//!
//! [`closed_form`] returns the known minimizers for the Cauchy and spherical
//! models. [`grid_minimize`] minimizes the discretized weighted energy over
//! weight vectors on a fixed grid, [`fekete_descent`] maximizes the Gibbs
//! log-density over configurations, and [`el_residual`] evaluates the
//! effective potential whose constancy characterizes the minimizer.

mod descent;
mod grid;
mod laws;
mod residual;
mod solver;

pub use descent::{fekete_descent, log_density_gradient, DescentOptions, DescentResult};
pub use grid::{Cell, Grid, GridSpec, Spacing};
pub use laws::{closed_form, ClosedFormLaw};
pub use residual::{el_residual, Candidate};
pub use solver::{
    grid_minimize, minimize_on_grid, EquilibriumResult, Init, Method, SolverOptions, SolverReport,
};
