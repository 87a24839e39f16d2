//! Positive solutions of `-Delta_p v = lambda h(x, v)`: mountain pass,
//! monotone iteration and continuation in `lambda`.

mod continuation;
mod monotone;
mod mountain_pass;
mod newton;

pub use continuation::{
    check_sublinear_at_zero, continuation_lambda, mountain_pass_above, solve_minimal, solve_pair, BifurcationDiagram,
    BranchPoint, BranchTag, ContinuationParams, LambdaBracket, SolutionPair,
};
pub use monotone::{probe_sign, solve_sub_super, MonotoneSolution, SubSuperOptions};
pub use mountain_pass::{solve_mountain_pass, Endpoint, MPParams, MountainPassSolution, MountainPassSummary};

/// Damped Newton polish on the discrete equation; returns the field and
/// its residual.
pub fn newton_polish(
    prob: &crate::pde::DiscreteProblem,
    v0: &crate::pde::Field,
    tol: f64,
    max_iter: usize,
) -> Result<(crate::pde::Field, f64), crate::error::SolverError> {
    newton::newton(prob, v0, tol, max_iter)
}
