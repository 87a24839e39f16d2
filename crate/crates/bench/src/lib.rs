//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use natgrad::pde::{ClosureReaction, Mesh};
use natgrad::{DiscreteProblem, Field, GSpec, NonlinearityG};

/// `-v'' = v^3` on (0, 1).
pub fn cubic(nodes: usize) -> DiscreteProblem {
    let mesh = Arc::new(Mesh::interval(1.0, nodes, 2.0).expect("valid mesh"));
    DiscreteProblem::new(mesh, Arc::new(ClosureReaction::power(3.0)))
}

/// A smooth positive field vanishing at both ends.
pub fn bump(prob: &DiscreteProblem) -> Field {
    Field::from_fn(prob.mesh(), |x| 4.0 * x * (1.0 - x)).expect("finite values")
}

/// `g = (p - 1)/(1 + s)`, whose transform is `s + s^2/2`.
pub fn decaying_g(p: f64) -> NonlinearityG {
    GSpec::PowerDecay { c: p - 1.0, alpha: 1.0 }.build(p).expect("valid g")
}
