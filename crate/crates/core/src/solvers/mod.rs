//! Inner iterations, dense solves, spectral norms and finite-difference
//! ground truth.

mod descent;
mod ground_truth;
mod linear;
mod newton;
mod spectral;

pub use descent::{gradient_descent, StepRule, Trajectory};
pub use ground_truth::{default_hypergrad_eps, fd_hypergradient, fd_jac_xstar, ROOT_TOL};
pub use linear::{
    linear_solve, linear_solve_transposed, solve_transposed_vec, solve_vec, Lu,
    SINGULAR_PIVOT_RATIO,
};
pub use newton::{damped_newton, NewtonOptions};
pub use spectral::{
    op_norm, spectral_norm, top_singular, TopSingular, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
