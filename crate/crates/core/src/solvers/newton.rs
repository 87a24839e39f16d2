use crate::error::{PdeError, SolverError};
use crate::pde::{
    differences, functional_gradient, stiffness_hessian, weak_norm, DiscreteProblem, Field, Tridiagonal, FLUX_DELTA,
};

/// Flux regularisation for Jacobians and preconditioners at `v`.
pub(crate) fn jacobian_delta(prob: &DiscreteProblem, v: &[f64]) -> f64 {
    if prob.p() == 2.0 {
        return FLUX_DELTA;
    }
    let dmax = differences(prob.mesh(), v).iter().fold(0.0f64, |m, d| m.max(d.abs()));
    (1e-6 * dmax).max(FLUX_DELTA)
}

/// Jacobian of the discrete gradient of `J` on the free nodes.
pub(crate) fn jacobian(prob: &DiscreteProblem, v: &[f64]) -> Result<Tridiagonal, PdeError> {
    let mesh = prob.mesh();
    let free = mesh.free_range();
    let w = mesh.node_weights();
    let mut k = stiffness_hessian(mesh, v, jacobian_delta(prob, v));
    for j in free.clone() {
        k.diag[j - free.start] -= w[j] * prob.node_dh(j, v[j])?;
    }
    Ok(k)
}

/// Restricts a nodal vector to the free nodes.
pub(crate) fn free_part(prob: &DiscreteProblem, v: &[f64]) -> Vec<f64> {
    prob.mesh().free_range().map(|j| v[j]).collect()
}

/// Adds `t * step` (free nodes only) to `v`.
pub(crate) fn add_free(prob: &DiscreteProblem, v: &[f64], step: &[f64], t: f64) -> Vec<f64> {
    let mut out = v.to_vec();
    for (i, j) in prob.mesh().free_range().enumerate() {
        out[j] += t * step[i];
    }
    out
}

/// Damped Newton on the gradient of `J`, with the gradient norm as merit.
/// Returns the field and its residual.
pub(crate) fn newton(
    prob: &DiscreteProblem,
    v0: &Field,
    tol: f64,
    max_iter: usize,
) -> Result<(Field, f64), SolverError> {
    let mesh = prob.mesh();
    let mut v = v0.values().to_vec();
    let mut g = functional_gradient(prob, v0)?.into_values();
    let mut r = weak_norm(mesh, &g);
    for _ in 0..max_iter {
        if r <= tol {
            break;
        }
        let jac = jacobian(prob, &v)?;
        let rhs: Vec<f64> = free_part(prob, &g).into_iter().map(|x| -x).collect();
        let Some(step) = jac.solve(&rhs) else {
            break;
        };
        if step.iter().any(|s| !s.is_finite()) {
            break;
        }
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let trial = add_free(prob, &v, &step, t);
            let field = v0.with_values_unchecked(trial);
            if let Ok(gt) = functional_gradient(prob, &field) {
                let rt = weak_norm(mesh, gt.values());
                if rt.is_finite() && rt < (1.0 - 1e-4 * t) * r {
                    v = field.into_values();
                    g = gt.into_values();
                    r = rt;
                    improved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    if r <= tol {
        Ok((v0.with_values_unchecked(v), r))
    } else {
        Err(SolverError::NotConverged {
            iterations: max_iter,
            residual: r,
        })
    }
}
