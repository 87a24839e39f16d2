use std::sync::Arc;

use super::gradient_energy;
use super::mesh::{Domain, Field, Mesh};
use super::solve::{solve_shifted, ShiftedOptions};
use crate::error::PdeError;

/// Controls for the inverse iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    pub max_iter: usize,
    /// Relative change of the Rayleigh quotient accepted as converged.
    pub tol: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            tol: 1e-12,
        }
    }
}

/// `sum c_i |D_i v|^p / sum w_j |v_j|^p`.
pub fn rayleigh_quotient(mesh: &Mesh, v: &[f64]) -> f64 {
    let p = mesh.p();
    let num = p * gradient_energy(mesh, v);
    let den: f64 = mesh
        .node_weights()
        .iter()
        .zip(v)
        .map(|(w, x)| w * x.abs().powf(p))
        .sum();
    num / den
}

/// First Dirichlet eigenvalue of `-Delta_p` and its positive eigenfunction,
/// normalised to unit sup norm.
pub fn lambda1_estimate(mesh: &Arc<Mesh>) -> Result<(f64, Field), PdeError> {
    lambda1_estimate_with(mesh, EigenOptions::default())
}

/// Inverse iteration: solve `-Delta_p w = |u|^(p-2) u`, normalise, repeat.
pub fn lambda1_estimate_with(mesh: &Arc<Mesh>, opts: EigenOptions) -> Result<(f64, Field), PdeError> {
    let p = mesh.p();
    let ext = mesh.domain().extent();
    let shape = |x: f64| match mesh.domain() {
        Domain::Interval { .. } => (std::f64::consts::PI * x / ext).sin(),
        Domain::Ball { .. } => (0.5 * std::f64::consts::PI * x / ext).cos(),
    };
    let mut u = Field::from_fn(mesh, shape)?.into_values();
    let mut w = vec![0.0; u.len()];
    let mut lambda = rayleigh_quotient(mesh, &u);
    let solve_opts = ShiftedOptions {
        tol: 1e-13,
        max_iter: 400,
    };
    for _ in 0..opts.max_iter {
        let load: Vec<f64> = mesh
            .node_weights()
            .iter()
            .zip(&u)
            .map(|(wt, x)| wt * x.abs().powf(p - 1.0) * x.signum())
            .collect();
        w = solve_shifted(mesh, 0.0, &load, &w, solve_opts)?;
        let sup = w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if !(sup > 0.0) {
            return Err(PdeError::EigenNotConverged {
                iterations: 0,
                last_rayleigh: lambda,
            });
        }
        let next: Vec<f64> = w.iter().map(|x| x / sup).collect();
        let next_lambda = rayleigh_quotient(mesh, &next);
        let change = next.iter().zip(&u).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        // Keep the linear solve warm: w scales like u / lambda^(1/(p-1)).
        w = next.iter().map(|x| x * next_lambda.powf(-1.0 / (p - 1.0))).collect();
        u = next;
        let done = (next_lambda - lambda).abs() <= opts.tol * next_lambda && change <= 1e-9;
        lambda = next_lambda;
        if done {
            return Ok((lambda, Field::new(mesh, u)?));
        }
    }
    Err(PdeError::EigenNotConverged {
        iterations: opts.max_iter,
        last_rayleigh: lambda,
    })
}
