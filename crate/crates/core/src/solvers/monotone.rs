use super::newton::newton;
use crate::error::SolverError;
use crate::pde::{functional_gradient, residual, solve_shifted, DiscreteProblem, Field, ShiftedOptions};

/// Controls for [`solve_sub_super`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubSuperOptions {
    pub max_iter: usize,
    pub tol: f64,
    /// Monotonicity shift `B`; sampled from `dh/ds` when `None`.
    pub shift: Option<f64>,
    /// Finish with Newton once the iterates are close to a solution.
    pub polish: bool,
    /// Iterates with a larger sup norm are reported as blow-up.
    pub blowup: f64,
}

impl Default for SubSuperOptions {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            tol: 1e-8,
            shift: None,
            polish: true,
            blowup: 1e6,
        }
    }
}

/// Output of the monotone iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneSolution {
    pub field: Field,
    pub iterations: usize,
    pub residual: f64,
    pub shift: f64,
}

/// Monotone iteration between a subsolution and a supersolution.
///
/// Each step solves `-Delta_p w + B |w|^(p-2) w = lambda h(x, v) + B v^(p-1)`;
/// the iterates increase from `sub` and stay below `sup`.
pub fn solve_sub_super(
    prob: &DiscreteProblem,
    sub: &Field,
    sup: &Field,
    opts: &SubSuperOptions,
) -> Result<MonotoneSolution, SolverError> {
    let tol_o = order_tol(sup);
    if let Some((j, _)) = sub
        .values()
        .iter()
        .zip(sup.values())
        .enumerate()
        .find(|(_, (a, b))| **a > **b + tol_o)
    {
        return Err(SolverError::InvalidBracket(format!("sub exceeds super at node {j}")));
    }
    probe_sign(prob, sub, true)?;
    probe_sign(prob, sup, false)?;
    monotone_iteration(prob, sub, Some(sup), opts)
}

/// Checks that `v` is a discrete sub- (`sub = true`) or supersolution:
/// the gradient of `J` is `<= 0` (resp. `>= 0`) at every free node.
pub fn probe_sign(prob: &DiscreteProblem, v: &Field, sub: bool) -> Result<(), SolverError> {
    let g = functional_gradient(prob, v)?;
    let slack = 1e-10 * (1.0 + v.sup_norm());
    let w = prob.mesh().node_weights();
    for j in prob.mesh().free_range() {
        let s = g.values()[j] / w[j];
        let bad = if sub { s > slack } else { s < -slack };
        if bad {
            let kind = if sub { "subsolution" } else { "supersolution" };
            return Err(SolverError::InvalidBracket(format!(
                "not a discrete {kind}: residual sign violated at node {j}"
            )));
        }
    }
    Ok(())
}

fn order_tol(v: &Field) -> f64 {
    1e-9 * (1.0 + v.sup_norm())
}

/// `2 max(0, max_s -lambda h'(s) / ((p-1) s^(p-2)))` over `s` in `[0, hi]`.
pub(crate) fn monotonicity_shift(prob: &DiscreteProblem, hi: f64) -> Result<f64, SolverError> {
    let p = prob.p();
    let mesh = prob.mesh();
    let samples = 48;
    let mut worst = 0.0f64;
    for j in mesh.free_range() {
        for i in 1..=samples {
            let s = hi * i as f64 / samples as f64;
            let d = prob.node_dh(j, s)?;
            if d < 0.0 {
                worst = worst.max(-d / ((p - 1.0) * s.powf(p - 2.0)));
            }
        }
    }
    Ok(2.0 * worst)
}

/// Monotone iteration from a subsolution, bounded by `sup` when given and by
/// `opts.blowup` otherwise.
pub(crate) fn monotone_iteration(
    prob: &DiscreteProblem,
    sub: &Field,
    sup: Option<&Field>,
    opts: &SubSuperOptions,
) -> Result<MonotoneSolution, SolverError> {
    if !(opts.tol > 0.0) {
        return Err(SolverError::InvalidParameter("tol must be positive".into()));
    }
    let mesh = prob.mesh();
    let p = prob.p();
    let w = mesh.node_weights();
    let v_max = prob.reaction().v_max();
    let mut v = sub.clone();
    let r0 = residual(prob, &v)?;
    let mut hi = match sup {
        Some(s) => s.sup_norm(),
        None => 4.0 * v.sup_norm() + 1.0,
    };
    let mut shift = match opts.shift {
        Some(b) => b,
        None => monotonicity_shift(prob, hi)?,
    };
    if r0 <= opts.tol {
        return Ok(MonotoneSolution {
            field: v,
            iterations: 0,
            residual: r0,
            shift,
        });
    }
    let shifted = ShiftedOptions {
        tol: 1e-13,
        max_iter: 200,
    };
    let mut polish_at = 1e-4;
    let mut res = r0;
    for iter in 1..=opts.max_iter {
        let sn = v.sup_norm();
        if sup.is_none() && sn > hi && opts.shift.is_none() {
            hi = 4.0 * sn;
            shift = shift.max(monotonicity_shift(prob, hi)?);
        }
        let mut load = vec![0.0; mesh.len()];
        for j in mesh.free_range() {
            let s = v.values()[j];
            load[j] = w[j] * (prob.node_h(j, s)? + shift * s.abs().powf(p - 2.0) * s);
        }
        let next = solve_shifted(mesh, shift, &load, v.values(), shifted)?;
        let tol_o = order_tol(&v);
        for j in mesh.free_range() {
            if next[j] < v.values()[j] - tol_o {
                return Err(SolverError::OrderingViolated {
                    node: j,
                    iteration: iter,
                });
            }
            if let Some(s) = sup {
                if next[j] > s.values()[j] + order_tol(s) {
                    return Err(SolverError::OrderingViolated {
                        node: j,
                        iteration: iter,
                    });
                }
            }
        }
        let change = next
            .iter()
            .zip(v.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        v = v.with_values_unchecked(next);
        let sn = v.sup_norm();
        if !sn.is_finite() || sn > opts.blowup || sn > v_max {
            return Err(SolverError::BlowUp { sup_norm: sn });
        }
        res = residual(prob, &v)?;
        if res <= opts.tol {
            return Ok(MonotoneSolution {
                field: v,
                iterations: iter,
                residual: res,
                shift,
            });
        }
        if opts.polish && (res <= polish_at * (1.0 + sn) || change <= 1e-12 * (1.0 + sn)) {
            if let Ok((u, r)) = newton(prob, &v, opts.tol, 40) {
                let below = sup.map_or(true, |s| {
                    u.values().iter().zip(s.values()).all(|(a, b)| *a <= b + order_tol(s))
                });
                let above = u
                    .values()
                    .iter()
                    .zip(v.values())
                    .all(|(a, b)| *a >= b - 1e-6 * (1.0 + sn));
                if below && above {
                    return Ok(MonotoneSolution {
                        field: u,
                        iterations: iter,
                        residual: r,
                        shift,
                    });
                }
            }
            polish_at *= 0.1;
        }
        if change <= 1e-15 * (1.0 + sn) {
            break;
        }
    }
    Err(SolverError::NotConverged {
        iterations: opts.max_iter,
        residual: res,
    })
}
