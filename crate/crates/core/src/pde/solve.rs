use super::linalg::Tridiagonal;
use super::mesh::Mesh;
use super::{differences, fluxes, gradient_energy, signed_pow, weak_norm, FLUX_DELTA};
use crate::error::PdeError;

/// Hessian of `(1/p) sum c_i (D_i^2 + delta^2)^(p/2)` restricted to the free
/// nodes.
pub fn stiffness_hessian(mesh: &Mesh, v: &[f64], delta: f64) -> Tridiagonal {
    let p = mesh.p();
    let free = mesh.free_range();
    let start = free.start;
    let mut t = Tridiagonal::zeros(free.len());
    let d = differences(mesh, v);
    for (i, di) in d.iter().enumerate() {
        let d2 = di * di;
        let e2 = delta * delta;
        let k = mesh.cell_weights()[i] * (d2 + e2).powf(0.5 * (p - 4.0)) * ((p - 1.0) * d2 + e2) / mesh.widths()[i];
        let a = free.contains(&i);
        let b = free.contains(&(i + 1));
        if a {
            t.diag[i - start] += k;
        }
        if b {
            t.diag[i + 1 - start] += k;
        }
        if a && b {
            t.off[i - start] -= k;
        }
    }
    t
}

/// Controls for [`solve_shifted`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftedOptions {
    /// Relative tolerance on the weighted gradient norm.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ShiftedOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 200,
        }
    }
}

fn objective(mesh: &Mesh, shift: f64, load: &[f64], w: &[f64], eps: f64) -> f64 {
    let p = mesh.p();
    let wt = mesh.node_weights();
    let mut val = if eps == 0.0 {
        gradient_energy(mesh, w)
    } else {
        let e2 = eps * eps;
        differences(mesh, w)
            .iter()
            .zip(mesh.cell_weights().iter().zip(mesh.widths()))
            .map(|(d, (rho, h))| rho * h * ((d * d + e2).powf(0.5 * p) - eps.powf(p)))
            .sum::<f64>()
            / p
    };
    for j in mesh.free_range() {
        val += shift / p * wt[j] * w[j].abs().powf(p) - load[j] * w[j];
    }
    val
}

fn gradient(mesh: &Mesh, shift: f64, load: &[f64], w: &[f64], eps: f64) -> Vec<f64> {
    let p = mesh.p();
    let wt = mesh.node_weights();
    let flux: Vec<f64> = if eps == 0.0 {
        fluxes(mesh, w)
    } else {
        differences(mesh, w)
            .into_iter()
            .zip(mesh.cell_weights())
            .map(|(d, rho)| rho * (d * d + eps * eps).powf(0.5 * (p - 2.0)) * d)
            .collect()
    };
    let mut g = vec![0.0; w.len()];
    for j in mesh.free_range() {
        let left = if j > 0 { flux[j - 1] } else { 0.0 };
        g[j] = left - flux[j] + shift * wt[j] * signed_pow(w[j], p - 1.0) - load[j];
    }
    g
}

/// Damped Newton on the energy with flux regularisation `eps` and Hessian
/// regularisation `hess_delta`; returns the final weighted gradient norm.
#[allow(clippy::too_many_arguments)]
fn newton_stage(
    mesh: &Mesh,
    shift: f64,
    load: &[f64],
    w: &mut Vec<f64>,
    eps: f64,
    hess_delta: f64,
    target: f64,
    max_iter: usize,
) -> f64 {
    let p = mesh.p();
    let free = mesh.free_range();
    let start = free.start;
    let wt = mesh.node_weights();
    let mut phi = objective(mesh, shift, load, w, eps);
    let mut trial = w.clone();
    let mut g = gradient(mesh, shift, load, w, eps);
    let mut gn = weak_norm(mesh, &g);
    let mut stalled = 0;
    for _ in 0..max_iter {
        if gn <= target || stalled >= 4 {
            break;
        }
        let mut hess = stiffness_hessian(mesh, w, hess_delta);
        for j in free.clone() {
            let r = (w[j] * w[j] + hess_delta * hess_delta).powf(0.5 * (p - 2.0));
            hess.diag[j - start] += shift * wt[j] * (p - 1.0) * r;
        }
        let rhs: Vec<f64> = free.clone().map(|j| -g[j]).collect();
        let step = hess.solve(&rhs).unwrap_or_else(|| rhs.clone());
        let slope: f64 = step.iter().zip(&rhs).map(|(s, r)| -s * r).sum();
        let mut t = 1.0;
        let mut accepted = false;
        for k in 0..60 {
            for (i, j) in free.clone().enumerate() {
                trial[j] = w[j] + t * step[i];
            }
            let pt = objective(mesh, shift, load, &trial, eps);
            if pt.is_finite() && pt <= phi + 1e-4 * t * slope {
                accepted = true;
            } else if k == 0 {
                // Close to the minimiser the energy is flat to rounding; a
                // full step that halves the residual is taken instead.
                let gt = weak_norm(mesh, &gradient(mesh, shift, load, &trial, eps));
                accepted = gt < 0.5 * gn;
            }
            if accepted {
                phi = pt;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        std::mem::swap(w, &mut trial);
        g = gradient(mesh, shift, load, w, eps);
        let next = weak_norm(mesh, &g);
        stalled = if next < 0.9 * gn { 0 } else { stalled + 1 };
        gn = next;
    }
    gn
}

/// Solves `-Delta_p w + B |w|^(p-2) w = load` (weak form, nodal load vector)
/// with zero Dirichlet data by damped Newton on the convex energy
/// `(1/p) sum c |D w|^p + (B/p) sum w_j |w_j|^p - <load, w>`.
///
/// For `p != 2` the flux is first regularised as `(D^2 + eps^2)^((p-2)/2) D`
/// and `eps` is driven to zero.
pub fn solve_shifted(
    mesh: &Mesh,
    shift: f64,
    load: &[f64],
    initial: &[f64],
    opts: ShiftedOptions,
) -> Result<Vec<f64>, PdeError> {
    let n = mesh.len();
    if load.len() != n || initial.len() != n {
        return Err(PdeError::FieldSize {
            expected: n,
            got: load.len().min(initial.len()),
        });
    }
    if shift < 0.0 {
        return Err(PdeError::InvalidProblem(format!(
            "shift must be non-negative, got {shift}"
        )));
    }
    let p = mesh.p();
    let free = mesh.free_range();
    let start = free.start;
    let wt = mesh.node_weights();
    let mut w: Vec<f64> = initial.to_vec();
    for (j, x) in w.iter_mut().enumerate() {
        if !free.contains(&j) {
            *x = 0.0;
        }
    }
    let load_norm = weak_norm(mesh, load).max(f64::MIN_POSITIVE);
    if w.iter().all(|&x| x == 0.0) && p != 2.0 {
        // A linear solve gives a starting point of the right shape.
        let mut k = stiffness_hessian(mesh, &w, 1.0);
        for j in free.clone() {
            k.diag[j - start] += shift * wt[j];
        }
        let rhs: Vec<f64> = free.clone().map(|j| load[j]).collect();
        if let Some(x) = k.solve(&rhs) {
            // Rescale so that the p-homogeneous energy balances the load.
            let mut trial = vec![0.0; n];
            for (k, j) in free.clone().enumerate() {
                trial[j] = x[k];
            }
            let e = p * gradient_energy(mesh, &trial)
                + shift * free.clone().map(|j| wt[j] * trial[j].abs().powf(p)).sum::<f64>();
            let l: f64 = free.clone().map(|j| load[j] * trial[j]).sum();
            if e > 0.0 && l > 0.0 {
                let c = (l / e).powf(1.0 / (p - 1.0));
                w = trial.into_iter().map(|t| c * t).collect();
            } else {
                w = trial;
            }
        }
    }
    let target = opts.tol * load_norm;
    let mut eps = FLUX_DELTA;
    if p != 2.0 {
        let dmax = differences(mesh, &w).iter().fold(0.0f64, |m, d| m.max(d.abs()));
        eps = 0.1 * dmax;
        while eps > 1e-6 * dmax.max(FLUX_DELTA) {
            newton_stage(mesh, shift, load, &mut w, eps, eps, target.max(1e-8 * load_norm), 40);
            eps *= 0.1;
        }
    }
    // For p > 2 the exact Hessian degenerates where D = 0.
    let hess_delta = if p > 2.0 { eps } else { FLUX_DELTA };
    let gn = newton_stage(mesh, shift, load, &mut w, 0.0, hess_delta, target, opts.max_iter);
    if gn <= target {
        return Ok(w);
    }
    let g = gradient(mesh, shift, load, &w, 0.0);
    let gn = weak_norm(mesh, &g);
    if gn <= 1e3 * target {
        // No representable decrease is left at this accuracy.
        return Ok(w);
    }
    Err(PdeError::SolveNotConverged {
        iterations: opts.max_iter,
        gradient: gn,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_constant_load() {
        let m = Mesh::interval(1.0, 101, 2.0).unwrap();
        let load: Vec<f64> = m.node_weights().to_vec();
        let w = solve_shifted(&m, 0.0, &load, &vec![0.0; 101], ShiftedOptions::default()).unwrap();
        for (x, v) in m.nodes().iter().zip(&w) {
            let exact = 0.5 * x * (1.0 - x);
            assert!((v - exact).abs() < 1e-12, "{x}: {v} vs {exact}");
        }
    }

    #[test]
    fn p_laplacian_constant_load_closed_form() {
        // -(|u'|^(p-2) u')' = 1 on (0,1): u(x) = c (1/2^q - |x - 1/2|^q), q = p/(p-1).
        for p in [1.5, 3.0] {
            let m = Mesh::interval(1.0, 401, p).unwrap();
            let load: Vec<f64> = m.node_weights().to_vec();
            let w = solve_shifted(&m, 0.0, &load, &vec![0.0; 401], ShiftedOptions::default()).unwrap();
            let q = p / (p - 1.0);
            let exact = |x: f64| (0.5f64.powf(q) - (x - 0.5).abs().powf(q)) / q;
            let err = m
                .nodes()
                .iter()
                .zip(&w)
                .fold(0.0f64, |e, (x, v)| e.max((v - exact(*x)).abs()));
            assert!(err < 2e-4 * exact(0.5), "p = {p}: {err}");
        }
    }

    #[test]
    fn shifted_problem_on_ball() {
        let m = Mesh::ball(1.0, 3, 201, 2.0).unwrap();
        let load: Vec<f64> = m.node_weights().iter().map(|w| 2.0 * w).collect();
        let w = solve_shifted(&m, 1.0, &load, &vec![0.0; 201], ShiftedOptions::default()).unwrap();
        // -Delta u + u = 2 on the unit ball, u(1) = 0: u = 2 - 2 sinh(r)/(r sinh 1).
        let exact = |r: f64| {
            if r == 0.0 {
                2.0 - 2.0 / 1f64.sinh()
            } else {
                2.0 - 2.0 * r.sinh() / (r * 1f64.sinh())
            }
        };
        for (r, v) in m.nodes().iter().zip(&w) {
            assert!((v - exact(*r)).abs() < 1e-4, "{r}");
        }
    }
}
