//! Positive solutions of `-Delta_p u = g(u)|grad u|^p + f(x, u)` through the
//! change of variable `v = A(u)` that removes the gradient term.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod document;
pub mod error;
pub mod hypotheses;
pub mod pde;
pub mod problems;
pub mod quadrature;
pub mod solvers;
pub mod transform;

pub use error::{CatalogError, Error, HypothesisError, PdeError, QuadratureError, SolverError, TransformError};
pub use hypotheses::{Condition, HypothesisReport, RegimeTag, TrendOptions, Verdict};
pub use pde::{DiscreteProblem, Domain, Field, Mesh, Reaction};
pub use transform::{FSpec, GSpec, NonlinearityG, SourceF, TransformTable, TransformedProblem};
