//! Finite-difference p-Laplacian on intervals and radial balls.
//!
//! The discrete energy is
//! `J(v) = (1/p) sum_i c_i |D_i v|^p - sum_j w_j H(x_j, v_j)`
//! with cell weights `c_i`, difference quotients `D_i` and lumped nodal
//! weights `w_j`. The gradient is assembled from cell fluxes, so it is the
//! exact first variation of `J`.

mod eigen;
mod linalg;
mod mesh;
mod reaction;
mod solve;

pub use eigen::{lambda1_estimate, lambda1_estimate_with, rayleigh_quotient, EigenOptions};
pub use linalg::Tridiagonal;
pub use mesh::{Domain, Field, Mesh};
pub use reaction::{ClosureReaction, Reaction};
pub use solve::{solve_shifted, stiffness_hessian, ShiftedOptions};

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{PdeError, TransformError};
use crate::transform::SourceF;

/// Regularisation of `|Dv|^(p-2)` inside linear solves.
pub const FLUX_DELTA: f64 = 1e-10;

#[derive(Debug, Clone)]
struct Floor {
    values: Vec<f64>,
    h: Vec<f64>,
    big_h: Vec<f64>,
}

/// `-Delta_p v = lambda h(x, v)` on a mesh.
///
/// An optional floor `m` replaces `h(x, s)` by `h(x, max(s, m(x)))`; the
/// critical points of the truncated energy lie above `m`.
#[derive(Debug, Clone)]
pub struct DiscreteProblem {
    mesh: Arc<Mesh>,
    reaction: Arc<dyn Reaction>,
    lambda: f64,
    floor: Option<Floor>,
}

impl DiscreteProblem {
    pub fn new(mesh: Arc<Mesh>, reaction: Arc<dyn Reaction>) -> Self {
        Self {
            mesh,
            reaction,
            lambda: 1.0,
            floor: None,
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Result<Self, PdeError> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(PdeError::InvalidProblem(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        self.lambda = lambda;
        Ok(self)
    }

    /// Truncates the nonlinearity below `floor` (nodewise).
    pub fn with_floor(mut self, floor: &Field) -> Result<Self, PdeError> {
        check_field(&self.mesh, floor)?;
        let x = self.mesh.nodes();
        let mut h = Vec::with_capacity(x.len());
        let mut big_h = Vec::with_capacity(x.len());
        for (j, &m) in floor.values().iter().enumerate() {
            h.push(self.eval(j, |r| r.h(x[j], m))?);
            big_h.push(self.eval(j, |r| r.big_h(x[j], m))?);
        }
        self.floor = Some(Floor {
            values: floor.values().to_vec(),
            h,
            big_h,
        });
        Ok(self)
    }

    pub fn without_floor(&self) -> Self {
        Self {
            floor: None,
            ..self.clone()
        }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn reaction(&self) -> &Arc<dyn Reaction> {
        &self.reaction
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn p(&self) -> f64 {
        self.mesh.p()
    }

    pub fn floor(&self) -> Option<&[f64]> {
        self.floor.as_ref().map(|f| f.values.as_slice())
    }

    fn eval(&self, node: usize, f: impl FnOnce(&dyn Reaction) -> Result<f64, TransformError>) -> Result<f64, PdeError> {
        f(self.reaction.as_ref()).map_err(|source| PdeError::Evaluation { node, source })
    }

    /// `lambda h(x_j, s)` including any truncation.
    pub fn node_h(&self, j: usize, s: f64) -> Result<f64, PdeError> {
        let x = self.mesh.nodes()[j];
        let raw = match &self.floor {
            Some(fl) if s <= fl.values[j] => fl.h[j],
            _ => self.eval(j, |r| r.h(x, s))?,
        };
        Ok(self.lambda * raw)
    }

    /// `lambda H(x_j, s)` including any truncation.
    pub fn node_big_h(&self, j: usize, s: f64) -> Result<f64, PdeError> {
        let x = self.mesh.nodes()[j];
        let raw = match &self.floor {
            Some(fl) => {
                let m = fl.values[j];
                if s <= m {
                    fl.h[j] * s
                } else {
                    self.eval(j, |r| r.big_h(x, s))? - fl.big_h[j] + fl.h[j] * m
                }
            }
            None => self.eval(j, |r| r.big_h(x, s))?,
        };
        Ok(self.lambda * raw)
    }

    /// `lambda dh/ds (x_j, s)` including any truncation.
    pub fn node_dh(&self, j: usize, s: f64) -> Result<f64, PdeError> {
        let x = self.mesh.nodes()[j];
        let raw = match &self.floor {
            Some(fl) if s <= fl.values[j] => 0.0,
            _ => self.eval(j, |r| r.dh(x, s))?,
        };
        Ok(self.lambda * raw)
    }
}

pub(crate) fn check_field(mesh: &Arc<Mesh>, v: &Field) -> Result<(), PdeError> {
    if v.values().len() != mesh.len() {
        return Err(PdeError::FieldSize {
            expected: mesh.len(),
            got: v.values().len(),
        });
    }
    Ok(())
}

/// Difference quotients `D_i v` on every cell.
pub fn differences(mesh: &Mesh, v: &[f64]) -> Vec<f64> {
    v.windows(2)
        .zip(mesh.widths())
        .map(|(w, h)| (w[1] - w[0]) / h)
        .collect()
}

/// Cell fluxes `rho_i |D_i|^(p-2) D_i`.
pub fn fluxes(mesh: &Mesh, v: &[f64]) -> Vec<f64> {
    let p = mesh.p();
    differences(mesh, v)
        .into_iter()
        .zip(mesh.cell_weights())
        .map(|(d, rho)| rho * signed_pow(d, p - 1.0))
        .collect()
}

/// `|d|^e sign(d)`.
#[inline]
pub fn signed_pow(d: f64, e: f64) -> f64 {
    if d == 0.0 {
        0.0
    } else {
        d.signum() * d.abs().powf(e)
    }
}

/// `(1/p) sum_i c_i |D_i|^p`.
pub fn gradient_energy(mesh: &Mesh, v: &[f64]) -> f64 {
    let p = mesh.p();
    differences(mesh, v)
        .iter()
        .zip(mesh.cell_weights().iter().zip(mesh.widths()))
        .map(|(d, (rho, h))| rho * h * d.abs().powf(p))
        .sum::<f64>()
        / p
}

/// Discrete energy `J(v)`.
pub fn functional_eval(prob: &DiscreteProblem, v: &Field) -> Result<f64, PdeError> {
    check_field(&prob.mesh, v)?;
    let w = prob.mesh.node_weights();
    let mut potential = 0.0;
    for (j, &s) in v.values().iter().enumerate() {
        if prob.mesh.is_free(j) {
            potential += w[j] * prob.node_big_h(j, s)?;
        }
    }
    Ok(gradient_energy(&prob.mesh, v.values()) - potential)
}

/// Nodal gradient of `J`; zero at Dirichlet nodes.
pub fn functional_gradient(prob: &DiscreteProblem, v: &Field) -> Result<Field, PdeError> {
    check_field(&prob.mesh, v)?;
    let flux = fluxes(&prob.mesh, v.values());
    let w = prob.mesh.node_weights();
    let n = prob.mesh.len();
    let mut g = vec![0.0; n];
    for j in prob.mesh.free_range() {
        let left = if j > 0 { flux[j - 1] } else { 0.0 };
        g[j] = left - flux[j] - w[j] * prob.node_h(j, v.values()[j])?;
    }
    Ok(v.with_values_unchecked(g))
}

/// Weighted norm `sqrt(sum_j r_j^2 / w_j)` of a nodal weak residual over the
/// free nodes: the discrete L2 norm of the strong residual density.
pub fn weak_norm(mesh: &Mesh, r: &[f64]) -> f64 {
    let w = mesh.node_weights();
    mesh.free_range().map(|j| r[j] * r[j] / w[j]).sum::<f64>().sqrt()
}

/// Discrete weak residual of `-Delta_p v = lambda h(x, v)`.
pub fn residual(prob: &DiscreteProblem, v: &Field) -> Result<f64, PdeError> {
    let g = functional_gradient(prob, v)?;
    Ok(weak_norm(&prob.mesh, g.values()))
}

/// Residual of the original equation
/// `-div(e^{G(u)} |u'|^(p-2) u') = lambda e^{G(u)} f(x, u)`,
/// which is `-Delta_p u - g(u)|u'|^p - lambda f(x, u)` multiplied by
/// `e^{G(u)}`. Fluxes use `G` at cell-midpoint averages of `u`; each nodal
/// residual is divided by `e^{G(u_j)}` before taking the weighted norm.
pub fn p_residual(
    mesh: &Arc<Mesh>,
    u: &Field,
    big_g: &dyn Fn(f64) -> f64,
    f: &SourceF,
    lambda: f64,
) -> Result<f64, PdeError> {
    check_field(mesh, u)?;
    let uv = u.values();
    let p = mesh.p();
    let d = differences(mesh, uv);
    let flux: Vec<f64> = (0..d.len())
        .map(|i| {
            let mid = 0.5 * (uv[i] + uv[i + 1]);
            mesh.cell_weights()[i] * big_g(mid).exp() * signed_pow(d[i], p - 1.0)
        })
        .collect();
    let w = mesh.node_weights();
    let x = mesh.nodes();
    let mut r = vec![0.0; uv.len()];
    for j in mesh.free_range() {
        let left = if j > 0 { flux[j - 1] } else { 0.0 };
        let eg = big_g(uv[j]).exp();
        let val = (left - flux[j] - w[j] * lambda * eg * f.value(x[j], uv[j])) / eg;
        if !val.is_finite() {
            return Err(PdeError::InvalidProblem(format!(
                "residual of the original equation is not finite at node {j}"
            )));
        }
        r[j] = val;
    }
    Ok(weak_norm(mesh, &r))
}

/// Outcome of comparing the gradient with central differences of `J`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientCheck {
    /// `(epsilon, max relative error over directions)`.
    pub errors: Vec<(f64, f64)>,
    pub directions: usize,
}

impl GradientCheck {
    pub fn max_error(&self) -> f64 {
        self.errors.iter().fold(0.0f64, |m, e| m.max(e.1))
    }
}

/// Compares `<grad J(v), w>` with `(J(v + eps w) - J(v - eps w)) / (2 eps)`
/// over `directions` random admissible directions drawn from `seed`.
pub fn gradient_check(
    prob: &DiscreteProblem,
    v: &Field,
    eps: &[f64],
    directions: usize,
    seed: u64,
) -> Result<GradientCheck, PdeError> {
    let grad = functional_gradient(prob, v)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs: Vec<Vec<f64>> = (0..directions)
        .map(|_| {
            (0..v.values().len())
                .map(|j| {
                    if prob.mesh.is_free(j) {
                        rng.gen_range(-1.0..1.0)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let mut errors = Vec::with_capacity(eps.len());
    for &e in eps {
        let mut worst = 0.0f64;
        for w in &dirs {
            let plus: Vec<f64> = v.values().iter().zip(w).map(|(a, b)| a + e * b).collect();
            let minus: Vec<f64> = v.values().iter().zip(w).map(|(a, b)| a - e * b).collect();
            let jp = functional_eval(prob, &v.with_values_unchecked(plus))?;
            let jm = functional_eval(prob, &v.with_values_unchecked(minus))?;
            let fd = (jp - jm) / (2.0 * e);
            let an: f64 = grad.values().iter().zip(w).map(|(a, b)| a * b).sum();
            let scale = an.abs().max(fd.abs()).max(f64::MIN_POSITIVE);
            worst = worst.max((fd - an).abs() / scale);
        }
        errors.push((e, worst));
    }
    Ok(GradientCheck { errors, directions })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval(n: usize, p: f64) -> Arc<Mesh> {
        Arc::new(Mesh::interval(1.0, n, p).unwrap())
    }

    #[test]
    fn zero_field_has_zero_energy_and_gradient() {
        let m = interval(21, 2.0);
        let prob = DiscreteProblem::new(Arc::clone(&m), Arc::new(ClosureReaction::power(3.0)));
        let z = Field::zeros(&m);
        assert_eq!(functional_eval(&prob, &z).unwrap(), 0.0);
        assert!(functional_gradient(&prob, &z)
            .unwrap()
            .values()
            .iter()
            .all(|&g| g == 0.0));
    }

    #[test]
    fn hat_function_energy() {
        let m = interval(3, 2.0);
        let prob = DiscreteProblem::new(Arc::clone(&m), Arc::new(ClosureReaction::zero()));
        let v = Field::new(&m, vec![0.0, 1.0, 0.0]).unwrap();
        assert!((functional_eval(&prob, &v).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn potential_lowers_energy() {
        let m = interval(21, 2.0);
        let v = Field::from_fn(&m, |x| x * (1.0 - x)).unwrap();
        let zero = DiscreteProblem::new(Arc::clone(&m), Arc::new(ClosureReaction::zero()));
        let cubic = DiscreteProblem::new(Arc::clone(&m), Arc::new(ClosureReaction::power(3.0)));
        assert!(functional_eval(&cubic, &v).unwrap() < functional_eval(&zero, &v).unwrap());
    }

    #[test]
    fn gradient_is_three_point_laplacian() {
        let n = 11;
        let m = interval(n, 2.0);
        let prob = DiscreteProblem::new(Arc::clone(&m), Arc::new(ClosureReaction::zero()));
        let v = Field::from_fn(&m, |x| (3.0 * x).sin() + x * x).unwrap();
        let g = functional_gradient(&prob, &v).unwrap();
        let h = 0.1;
        let vv = v.values();
        for j in 1..n - 1 {
            let lap = (2.0 * vv[j] - vv[j - 1] - vv[j + 1]) / h;
            assert!((g.values()[j] - lap).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_matches_differences() {
        for p in [2.0, 3.0, 1.5] {
            let m = Arc::new(Mesh::ball(1.0, 3, 41, p).unwrap());
            let prob = DiscreteProblem::new(Arc::clone(&m), Arc::new(ClosureReaction::power(3.0)));
            let v = Field::from_fn(&m, |r| (1.0 - r * r) * (1.0 - 0.3 * r)).unwrap();
            let rep = gradient_check(&prob, &v, &[1e-5], 5, 7).unwrap();
            assert!(rep.max_error() < 1e-5, "p = {p}: {rep:?}");
        }
    }

    #[test]
    fn eigenfunction_residual_is_second_order() {
        let pi2 = std::f64::consts::PI.powi(2);
        let lin = Arc::new(ClosureReaction::new(
            "pi^2 s",
            move |_, s| pi2 * s,
            move |_, s| 0.5 * pi2 * s * s,
        ));
        let mut prev = None;
        for n in [51, 101, 201] {
            let m = interval(n, 2.0);
            let prob = DiscreteProblem::new(Arc::clone(&m), lin.clone());
            let v = Field::from_fn(&m, |x| (std::f64::consts::PI * x).sin()).unwrap();
            let r = residual(&prob, &v).unwrap();
            if let Some(pr) = prev {
                let rate: f64 = f64::log2(pr / r);
                assert!(rate > 1.8, "rate {rate}");
            }
            prev = Some(r);
        }
    }

    #[test]
    fn floor_truncation_is_consistent() {
        let m = interval(21, 2.0);
        let floor = Field::from_fn(&m, |x| 0.5 * x * (1.0 - x)).unwrap();
        let prob = DiscreteProblem::new(Arc::clone(&m), Arc::new(ClosureReaction::power(3.0)))
            .with_floor(&floor)
            .unwrap();
        let v = Field::from_fn(&m, |x| (3.0 * x).sin() * (1.0 - x)).unwrap();
        let rep = gradient_check(&prob, &v, &[1e-5], 4, 1).unwrap();
        assert!(rep.max_error() < 1e-6, "{rep:?}");
    }
}
