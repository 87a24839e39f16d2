use serde::{Deserialize, Serialize};

use super::newton::{add_free, free_part, jacobian_delta, newton};
use crate::error::SolverError;
use crate::pde::{
    functional_eval, functional_gradient, lambda1_estimate, stiffness_hessian, weak_norm, DiscreteProblem, Field,
};

/// How the far end of the initial path is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum Endpoint {
    /// A fixed field; `J(e) < J(base)` is checked.
    Field(Field),
    /// `base + t phi1` with `t = t0, t0*growth, ...` until the energy drops
    /// below the base level, giving up past `max_scale`.
    ScaledEigenfunction { t0: f64, growth: f64, max_scale: f64 },
}

/// Controls for [`solve_mountain_pass`].
#[derive(Debug, Clone, PartialEq)]
pub struct MPParams {
    /// Points on the initial path, endpoints included (at least 3).
    pub path_points: usize,
    /// Initial step along the preconditioned descent direction.
    pub descent_step: f64,
    pub max_outer: usize,
    /// Residual tolerance (weighted dual norm of the discrete gradient).
    pub tol: f64,
    pub endpoint: Endpoint,
    /// Finish with a damped Newton solve once the path maximum is close.
    pub polish: bool,
}

impl Default for MPParams {
    fn default() -> Self {
        Self {
            path_points: 24,
            descent_step: 0.5,
            max_outer: 20_000,
            tol: 1e-8,
            endpoint: Endpoint::ScaledEigenfunction {
                t0: 1.0,
                growth: 2.0,
                max_scale: 1e8,
            },
            polish: true,
        }
    }
}

/// Output of [`solve_mountain_pass`].
#[derive(Debug, Clone, PartialEq)]
pub struct MountainPassSolution {
    pub field: Field,
    pub energy: f64,
    pub residual: f64,
    /// Energy at the path endpoint.
    pub endpoint_energy: f64,
    /// Largest energy on the final path.
    pub path_max: f64,
    pub iterations: usize,
}

/// Summary used by serialisers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MountainPassSummary {
    pub sup_norm: f64,
    pub energy: f64,
    pub residual: f64,
    pub iterations: usize,
}

impl MountainPassSolution {
    pub fn summary(&self) -> MountainPassSummary {
        MountainPassSummary {
            sup_norm: self.field.sup_norm(),
            energy: self.energy,
            residual: self.residual,
            iterations: self.iterations,
        }
    }
}

/// Mountain pass between `0` (or the problem floor) and a point of lower
/// energy by deforming a discrete path (climbing-image string method): the
/// interior points descend along the preconditioned gradient and are
/// redistributed by arc length, while the highest point climbs along the
/// path tangent. Returns the highest point once its residual is below `tol`.
pub fn solve_mountain_pass(prob: &DiscreteProblem, params: &MPParams) -> Result<MountainPassSolution, SolverError> {
    if params.path_points < 3 {
        return Err(SolverError::InvalidParameter(format!(
            "path_points must be at least 3, got {}",
            params.path_points
        )));
    }
    if !(params.tol > 0.0) || !(params.descent_step > 0.0) {
        return Err(SolverError::InvalidParameter(
            "tol and descent_step must be positive".into(),
        ));
    }
    let mesh = prob.mesh();
    let plain = prob.without_floor();
    for j in 0..mesh.len() {
        let h0 = plain.node_h(j, 0.0)?;
        if h0.abs() > 1e-12 {
            return Err(SolverError::Precondition(format!(
                "h(x, 0) = {h0} at node {j}; must vanish"
            )));
        }
    }
    let base = match prob.floor() {
        Some(m) => Field::new(mesh, m.to_vec())?,
        None => Field::zeros(mesh),
    };
    let e_base = functional_eval(prob, &base)?;
    let end = find_endpoint(prob, &base, e_base, &params.endpoint)?;
    let e_end = functional_eval(prob, &end)?;

    let m = params.path_points - 1;
    let mut path: Vec<Vec<f64>> = (0..=m)
        .map(|k| {
            let t = k as f64 / m as f64;
            base.values()
                .iter()
                .zip(end.values())
                .map(|(b, e)| b + t * (e - b))
                .collect()
        })
        .collect();
    let mut energy = energies(prob, &base, &path)?;
    let mut step = params.descent_step;
    let mut polish_at = 1e-3;
    let mut last_res = f64::INFINITY;
    for iter in 0..params.max_outer {
        let k = (1..m).max_by(|&a, &b| energy[a].total_cmp(&energy[b])).unwrap_or(1);
        let v = base.with_values_unchecked(path[k].clone());
        let res = weak_norm(mesh, functional_gradient(prob, &v)?.values());
        let scale = 1.0 + v.sup_norm();
        if res <= params.tol && is_positive(&v) {
            // the critical value must also be the maximum along the path
            let top = energy.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if top <= energy[k] + params.tol {
                return finish(v, energy[k], res, e_end, &energy, iter);
            }
        } else if params.polish && res <= polish_at * scale {
            if let Ok((w, _)) = newton(prob, &v, params.tol, 60) {
                let ew = functional_eval(prob, &w)?;
                let moved = sup_dist(w.values(), v.values());
                if is_positive(&w) && ew > e_base && moved <= 0.1 * scale {
                    path[k] = w.into_values();
                    energy[k] = ew;
                    continue;
                }
            }
            polish_at *= 0.1;
        }
        if res > last_res {
            step *= 0.7;
        } else {
            step = (step * 1.05).min(params.descent_step);
        }
        last_res = res;

        let mut accepted = None;
        while step > 1e-12 {
            match string_step(prob, &base, &path, k, step) {
                Ok(next) => {
                    if let Ok(e) = energies(prob, &base, &next) {
                        accepted = Some((next, e));
                        break;
                    }
                }
                Err(SolverError::Pde(_)) => {}
                Err(e) => return Err(e),
            }
            step *= 0.5;
        }
        let Some((next, e)) = accepted else {
            break;
        };
        path = next;
        energy = e;
    }
    Err(SolverError::NotConverged {
        iterations: params.max_outer,
        residual: last_res,
    })
}

fn energies(prob: &DiscreteProblem, base: &Field, path: &[Vec<f64>]) -> Result<Vec<f64>, SolverError> {
    path.iter()
        .map(|v| Ok(functional_eval(prob, &base.with_values_unchecked(v.clone()))?))
        .collect()
}

/// One string update with climbing image `k`, followed by redistribution
/// of the points on either side of `k`.
fn string_step(
    prob: &DiscreteProblem,
    base: &Field,
    path: &[Vec<f64>],
    k: usize,
    step: f64,
) -> Result<Vec<Vec<f64>>, SolverError> {
    let mesh = prob.mesh();
    let m = path.len() - 1;
    let mut next = path.to_vec();
    for i in 1..m {
        let v = base.with_values_unchecked(path[i].clone());
        let g = functional_gradient(prob, &v)?.into_values();
        let kmat = stiffness_hessian(mesh, &path[i], jacobian_delta(prob, &path[i]));
        let gf = free_part(prob, &g);
        let mut d = kmat.solve(&gf).ok_or(SolverError::NotConverged {
            iterations: 0,
            residual: f64::NAN,
        })?;
        if i == k {
            // reverse the component along the tangent, measured in the K-metric
            let tan: Vec<f64> = free_part(prob, &path[i + 1])
                .iter()
                .zip(free_part(prob, &path[i - 1]))
                .map(|(a, b)| a - b)
                .collect();
            let kt = kmat.mul(&tan);
            let tkt: f64 = tan.iter().zip(&kt).map(|(a, b)| a * b).sum();
            if tkt > 0.0 {
                let c: f64 = tan.iter().zip(&gf).map(|(a, b)| a * b).sum::<f64>() / tkt;
                for (di, ti) in d.iter_mut().zip(&tan) {
                    *di -= 2.0 * c * ti;
                }
            }
        }
        // beyond the saddle J is unbounded below; cap the displacement
        let dmax = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let cap = 0.1 * (1.0 + sup_dist(&path[i], base.values()));
        let t = if step * dmax > cap { cap / dmax } else { step };
        next[i] = add_free(prob, &path[i], &d, -t);
    }
    redistribute(mesh.node_weights(), &mut next, 0, k);
    redistribute(mesh.node_weights(), &mut next, k, m);
    Ok(next)
}

/// Equal arc-length spacing of `path[a..=b]` (weighted l2), ends fixed.
fn redistribute(w: &[f64], path: &mut [Vec<f64>], a: usize, b: usize) {
    if b <= a + 1 {
        return;
    }
    let dist = |x: &[f64], y: &[f64]| -> f64 {
        x.iter()
            .zip(y)
            .zip(w)
            .map(|((p, q), wt)| wt * (p - q) * (p - q))
            .sum::<f64>()
            .sqrt()
    };
    let mut cum = vec![0.0];
    for i in a + 1..=b {
        let d = dist(&path[i - 1], &path[i]);
        cum.push(cum.last().unwrap() + d);
    }
    let total = *cum.last().unwrap();
    if !(total > 0.0) {
        return;
    }
    let old: Vec<Vec<f64>> = path[a..=b].to_vec();
    let n = b - a;
    let mut seg = 0;
    for i in 1..n {
        let target = total * i as f64 / n as f64;
        while seg + 1 < n && cum[seg + 1] < target {
            seg += 1;
        }
        let span = cum[seg + 1] - cum[seg];
        let t = if span > 0.0 { (target - cum[seg]) / span } else { 0.0 };
        path[a + i] = old[seg]
            .iter()
            .zip(&old[seg + 1])
            .map(|(x, y)| x + t * (y - x))
            .collect();
    }
}

fn finish(
    field: Field,
    energy: f64,
    residual: f64,
    endpoint_energy: f64,
    path_energy: &[f64],
    iterations: usize,
) -> Result<MountainPassSolution, SolverError> {
    let path_max = path_energy.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(MountainPassSolution {
        field,
        energy,
        residual,
        endpoint_energy,
        path_max,
        iterations,
    })
}

fn find_endpoint(prob: &DiscreteProblem, base: &Field, e_base: f64, endpoint: &Endpoint) -> Result<Field, SolverError> {
    match endpoint {
        Endpoint::Field(e) => {
            let ee = functional_eval(prob, e)?;
            if ee < e_base {
                Ok(e.clone())
            } else {
                Err(SolverError::Precondition(format!(
                    "endpoint energy {ee} is not below the base level {e_base}"
                )))
            }
        }
        Endpoint::ScaledEigenfunction { t0, growth, max_scale } => {
            if !(*t0 > 0.0 && *growth > 1.0) {
                return Err(SolverError::InvalidParameter(
                    "endpoint scaling needs t0 > 0, growth > 1".into(),
                ));
            }
            let (_, phi) = lambda1_estimate(prob.mesh())?;
            let v_max = prob.reaction().v_max();
            let mut t = *t0;
            while t <= *max_scale {
                let cand: Vec<f64> = base.values().iter().zip(phi.values()).map(|(b, f)| b + t * f).collect();
                if cand.iter().any(|&x| x > v_max) {
                    break;
                }
                let field = base.with_values_unchecked(cand);
                match functional_eval(prob, &field) {
                    Ok(e) if e < e_base => return Ok(field),
                    Ok(_) => {}
                    Err(_) => break,
                }
                t *= growth;
            }
            Err(SolverError::NoDescentDirection {
                max_scale: t.min(*max_scale),
            })
        }
    }
}

pub(crate) fn is_positive(v: &Field) -> bool {
    v.interior_min() > 0.0
}

pub(crate) fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::pde::{gradient_check, residual, ClosureReaction, Mesh};

    fn cubic(n: usize) -> DiscreteProblem {
        let mesh = Arc::new(Mesh::interval(1.0, n, 2.0).unwrap());
        DiscreteProblem::new(mesh, Arc::new(ClosureReaction::power(3.0)))
    }

    #[test]
    fn cubic_interval_saddle() {
        let prob = cubic(201);
        let sol = solve_mountain_pass(&prob, &MPParams::default()).unwrap();
        // -u'' = u^3 on (0,1): sup = 2 sqrt(2) K(1/sqrt 2) = 3.70815...
        assert!((sol.field.sup_norm() - 3.70815).abs() / 3.70815 < 5e-3);
        assert!(sol.residual <= 1e-8);
        assert!(residual(&prob, &sol.field).unwrap() <= 1e-8);
        assert!(sol.energy > 0.0 && sol.endpoint_energy < 0.0);
        assert!(sol.energy >= sol.path_max - 1e-8);
        let half = sol
            .field
            .with_values_unchecked(sol.field.values().iter().map(|x| 0.5 * x).collect());
        assert!(gradient_check(&prob, &half, &[1e-5], 4, 3).unwrap().max_error() < 1e-4);
    }

    #[test]
    fn zero_reaction_has_no_descent_direction() {
        let mesh = Arc::new(Mesh::interval(1.0, 41, 2.0).unwrap());
        let prob = DiscreteProblem::new(mesh, Arc::new(ClosureReaction::zero()));
        let err = solve_mountain_pass(&prob, &MPParams::default()).unwrap_err();
        assert!(matches!(err, SolverError::NoDescentDirection { .. }));
    }

    #[test]
    fn too_short_path_is_rejected() {
        let params = MPParams {
            path_points: 2,
            ..MPParams::default()
        };
        assert!(matches!(
            solve_mountain_pass(&cubic(21), &params),
            Err(SolverError::InvalidParameter(_))
        ));
    }

    #[test]
    fn pure_descent_without_polish() {
        let params = MPParams {
            polish: false,
            tol: 1e-6,
            ..MPParams::default()
        };
        let prob = cubic(41);
        let sol = solve_mountain_pass(&prob, &params).unwrap();
        assert!(sol.residual <= 1e-6);
        assert!(sol.field.interior_min() > 0.0);
    }
}
