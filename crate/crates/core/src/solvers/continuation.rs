use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::monotone::{monotone_iteration, probe_sign, MonotoneSolution, SubSuperOptions};
use super::mountain_pass::{solve_mountain_pass, sup_dist, MPParams, MountainPassSolution};
use crate::error::SolverError;
use crate::hypotheses::{check_behavior_at_zero, TrendOptions, Verdict};
use crate::pde::{functional_eval, lambda1_estimate, DiscreteProblem, Field, Reaction};
use crate::transform::SourceF;

/// Controls for [`continuation_lambda`].
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationParams {
    pub mp: MPParams,
    pub sub_super: SubSuperOptions,
    pub seed: u64,
    /// Distinct initial data tried before a value of `lambda` counts as failed.
    pub restarts: usize,
    /// Bisection stops once the bracket is this fraction of the sweep range.
    pub min_step_fraction: f64,
    /// Also trace the mountain-pass branch above the minimal one.
    pub second_branch: bool,
    /// Skip the sublinearity-at-zero precondition.
    pub skip_precondition: bool,
}

impl Default for ContinuationParams {
    fn default() -> Self {
        Self {
            mp: MPParams::default(),
            sub_super: SubSuperOptions {
                max_iter: 4000,
                ..SubSuperOptions::default()
            },
            seed: 0,
            restarts: 3,
            min_step_fraction: 1e-4,
            second_branch: true,
            skip_precondition: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchTag {
    Minimal,
    MountainPass,
}

impl BranchTag {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Minimal => "minimal",
            Self::MountainPass => "mountain_pass",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub lambda: f64,
    pub branch: BranchTag,
    pub sup_norm: f64,
    pub energy: f64,
    pub residual: f64,
}

/// `(last success, first persistent failure)`; `upper = None` reads
/// "at least `lower`" and `lower = None` means no success at all.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaBracket {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl LambdaBracket {
    /// Width relative to the midpoint, when both ends are known.
    pub fn relative_width(&self) -> Option<f64> {
        match (self.lower, self.upper) {
            (Some(a), Some(b)) => Some((b - a) / (0.5 * (a + b))),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationDiagram {
    pub lambda_grid: Vec<f64>,
    pub points: Vec<BranchPoint>,
    /// Grid values at which every attempt failed.
    pub failures: Vec<f64>,
    pub lambda_estimate: LambdaBracket,
}

impl BifurcationDiagram {
    pub fn branch(&self, tag: BranchTag) -> impl Iterator<Item = &BranchPoint> {
        self.points.iter().filter(move |p| p.branch == tag)
    }

    /// `lambda,branch,sup_norm,energy` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,branch,sup_norm,energy\n");
        for p in &self.points {
            let _ = writeln!(
                out,
                "{:.16e},{},{:.16e},{:.16e}",
                p.lambda,
                p.branch.as_str(),
                p.sup_norm,
                p.energy
            );
        }
        out
    }
}

/// Two ordered solutions at a fixed `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionPair {
    pub minimal: MonotoneSolution,
    pub mountain_pass: MountainPassSolution,
}

/// Rejects families that are not sublinear at zero, using the reaction at
/// the middle node.
pub fn check_sublinear_at_zero(prob: &DiscreteProblem) -> Result<(), SolverError> {
    let reaction: Arc<dyn Reaction> = Arc::clone(prob.reaction());
    let x = prob.mesh().nodes()[prob.mesh().middle_node()];
    let f = SourceF::uniform(format!("h(x={x}, .)"), move |s| reaction.h(x, s).unwrap_or(f64::MAX))
        .map_err(|e| SolverError::Precondition(e.to_string()))?;
    let (lambda1, _) = lambda1_estimate(prob.mesh())?;
    let zb = check_behavior_at_zero(&f, prob.p(), lambda1, &TrendOptions::default())?;
    if zb.sublinear.verdict == Verdict::Holds {
        Ok(())
    } else {
        Err(SolverError::Precondition(format!(
            "reaction is not p-sublinear at zero (verdict {})",
            zb.sublinear.verdict
        )))
    }
}

/// Smallest `eps * phi1` (from `1e-2` down) that is a discrete subsolution.
fn small_subsolution(prob: &DiscreteProblem, phi: &Field) -> Result<Field, SolverError> {
    let mut eps = 1e-2;
    for _ in 0..40 {
        let v = phi.with_values_unchecked(phi.values().iter().map(|x| eps * x).collect());
        if probe_sign(prob, &v, true).is_ok() {
            return Ok(v);
        }
        eps *= 0.25;
    }
    Err(SolverError::Precondition(
        "no subsolution of the form eps * phi1 found".into(),
    ))
}

fn nodewise_max(a: &Field, b: &Field) -> Field {
    a.with_values_unchecked(a.values().iter().zip(b.values()).map(|(x, y)| x.max(*y)).collect())
}

/// Minimal solution at `prob.lambda()`, trying up to `restarts` subsolutions.
fn minimal_solution(
    prob: &DiscreteProblem,
    phi: &Field,
    previous: Option<&Field>,
    params: &ContinuationParams,
    rng: &mut ChaCha8Rng,
) -> Result<MonotoneSolution, SolverError> {
    let eps_phi = small_subsolution(prob, phi)?;
    let mut starts = Vec::new();
    if let Some(prev) = previous {
        starts.push(nodewise_max(prev, &eps_phi));
    }
    starts.push(eps_phi.clone());
    while starts.len() < params.restarts.max(1) {
        let c: f64 = rng.gen_range(0.3..0.9);
        let seed = match previous {
            Some(prev) => prev.with_values_unchecked(prev.values().iter().map(|x| c * x).collect()),
            None => eps_phi.with_values_unchecked(eps_phi.values().iter().map(|x| c * x).collect()),
        };
        starts.push(nodewise_max(&seed, &eps_phi));
    }
    starts.truncate(params.restarts.max(1));
    let mut last = SolverError::NotConverged {
        iterations: 0,
        residual: f64::INFINITY,
    };
    for s in &starts {
        match monotone_iteration(prob, s, None, &params.sub_super) {
            Ok(sol) if sol.field.interior_min() > 0.0 => return Ok(sol),
            Ok(_) => {}
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// Mountain pass for the problem truncated below `u`.
pub fn mountain_pass_above(
    prob: &DiscreteProblem,
    u: &Field,
    params: &MPParams,
) -> Result<MountainPassSolution, SolverError> {
    let truncated = prob.clone().with_floor(u)?;
    let mut sol = solve_mountain_pass(&truncated, params)?;
    let gap = sup_dist(sol.field.values(), u.values());
    if gap <= 1e-6 * (1.0 + u.sup_norm()) {
        return Err(SolverError::Precondition(
            "mountain pass returned the minimal solution".into(),
        ));
    }
    sol.energy = functional_eval(prob, &sol.field)?;
    sol.residual = crate::pde::residual(prob, &sol.field)?;
    Ok(sol)
}

/// Minimal positive solution by monotone iteration from small multiples
/// of the first eigenfunction.
pub fn solve_minimal(prob: &DiscreteProblem, params: &ContinuationParams) -> Result<MonotoneSolution, SolverError> {
    let (_, phi) = lambda1_estimate(prob.mesh())?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    minimal_solution(prob, &phi, None, params, &mut rng)
}

/// Minimal solution plus a second solution above it, at `prob.lambda()`.
pub fn solve_pair(prob: &DiscreteProblem, params: &ContinuationParams) -> Result<SolutionPair, SolverError> {
    let (_, phi) = lambda1_estimate(prob.mesh())?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let minimal = minimal_solution(prob, &phi, None, params, &mut rng)?;
    let mountain_pass = mountain_pass_above(prob, &minimal.field, &params.mp)?;
    Ok(SolutionPair { minimal, mountain_pass })
}

/// Sweeps `lambda` over `steps` equally spaced values in `[lambda_min,
/// lambda_max]`, following the minimal branch by warm-started monotone
/// iteration and, optionally, a mountain-pass branch above it. The first
/// failure is refined by bisection.
pub fn continuation_lambda(
    prob: &DiscreteProblem,
    lambda_min: f64,
    lambda_max: f64,
    steps: usize,
    params: &ContinuationParams,
) -> Result<BifurcationDiagram, SolverError> {
    if !(lambda_min > 0.0 && lambda_max > lambda_min) || steps < 2 {
        return Err(SolverError::InvalidParameter(format!(
            "need 0 < lambda_min < lambda_max and steps >= 2, got [{lambda_min}, {lambda_max}], {steps}"
        )));
    }
    if !params.skip_precondition {
        check_sublinear_at_zero(prob)?;
    }
    let (_, phi) = lambda1_estimate(prob.mesh())?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let grid: Vec<f64> = (0..steps)
        .map(|i| lambda_min + (lambda_max - lambda_min) * i as f64 / (steps - 1) as f64)
        .collect();
    let min_step = params.min_step_fraction * (lambda_max - lambda_min);

    let mut points = Vec::new();
    let mut failures = Vec::new();
    let mut last_ok: Option<(f64, Field)> = None;
    let mut first_fail: Option<f64> = None;
    for &lambda in &grid {
        let pl = prob.clone().with_lambda(lambda)?;
        let prev = last_ok.as_ref().map(|(_, f)| f);
        match minimal_solution(&pl, &phi, prev, params, &mut rng) {
            Ok(sol) if first_fail.is_none() => {
                points.push(BranchPoint {
                    lambda,
                    branch: BranchTag::Minimal,
                    sup_norm: sol.field.sup_norm(),
                    energy: functional_eval(&pl, &sol.field)?,
                    residual: sol.residual,
                });
                if params.second_branch {
                    if let Ok(mp) = mountain_pass_above(&pl, &sol.field, &params.mp) {
                        points.push(BranchPoint {
                            lambda,
                            branch: BranchTag::MountainPass,
                            sup_norm: mp.field.sup_norm(),
                            energy: mp.energy,
                            residual: mp.residual,
                        });
                    }
                }
                last_ok = Some((lambda, sol.field));
            }
            Ok(_) => {}
            Err(_) => {
                failures.push(lambda);
                if first_fail.is_none() {
                    first_fail = Some(lambda);
                }
            }
        }
    }

    // Refine (last success, first failure) by bisection.
    if let (Some((mut lo, mut u_lo)), Some(mut hi)) = (last_ok.clone(), first_fail) {
        while hi - lo > min_step {
            let mid = 0.5 * (lo + hi);
            let pl = prob.clone().with_lambda(mid)?;
            match minimal_solution(&pl, &phi, Some(&u_lo), params, &mut rng) {
                Ok(sol) => {
                    lo = mid;
                    u_lo = sol.field;
                }
                Err(_) => hi = mid,
            }
        }
        last_ok = Some((lo, u_lo));
        first_fail = Some(hi);
    }

    Ok(BifurcationDiagram {
        lambda_grid: grid,
        points,
        failures,
        lambda_estimate: LambdaBracket {
            lower: last_ok.map(|(l, _)| l),
            upper: first_fail,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::{ClosureReaction, Mesh};

    fn concave_convex(n: usize) -> DiscreteProblem {
        let mesh = Arc::new(Mesh::interval(1.0, n, 2.0).unwrap());
        let r = ClosureReaction::new(
            "s^0.5 + s^3",
            |_, s| s.sqrt() + s.powi(3),
            |_, s| s.powf(1.5) / 1.5 + s.powi(4) / 4.0,
        )
        .with_derivative(|_, s| if s > 0.0 { 0.5 / s.sqrt() + 3.0 * s * s } else { 0.0 });
        DiscreteProblem::new(mesh, Arc::new(r))
    }

    #[test]
    fn pure_power_fails_precondition() {
        let mesh = Arc::new(Mesh::interval(1.0, 41, 2.0).unwrap());
        let prob = DiscreteProblem::new(mesh, Arc::new(ClosureReaction::power(3.0)));
        let err = continuation_lambda(&prob, 0.5, 5.0, 4, &ContinuationParams::default()).unwrap_err();
        assert!(matches!(err, SolverError::Precondition(_)));
    }

    #[test]
    fn concave_convex_has_a_fold() {
        let prob = concave_convex(101);
        let params = ContinuationParams {
            second_branch: false,
            ..ContinuationParams::default()
        };
        let d = continuation_lambda(&prob, 0.5, 8.0, 6, &params).unwrap();
        let (lo, hi) = (d.lambda_estimate.lower.unwrap(), d.lambda_estimate.upper.unwrap());
        assert!(lo < 5.823 * 1.01 && hi > 5.823 * 0.99, "[{lo}, {hi}]");
        let sups: Vec<f64> = d.branch(BranchTag::Minimal).map(|p| p.sup_norm).collect();
        assert!(sups.windows(2).all(|w| w[0] <= w[1]));
        assert!(d.to_csv().starts_with("lambda,branch,sup_norm,energy\n"));
    }

    #[test]
    fn pair_is_ordered() {
        let prob = concave_convex(81).with_lambda(2.9).unwrap();
        let pair = solve_pair(&prob, &ContinuationParams::default()).unwrap();
        let u = pair.minimal.field.values();
        let v = pair.mountain_pass.field.values();
        assert!(u.iter().zip(v).all(|(a, b)| a <= &(b + 1e-9)));
        let mid = prob.mesh().middle_node();
        assert!(v[mid] - u[mid] > 1e-2);
    }

    #[test]
    fn diagram_is_deterministic() {
        let prob = concave_convex(41);
        let params = ContinuationParams::default();
        let a = continuation_lambda(&prob, 1.0, 7.0, 4, &params).unwrap();
        let b = continuation_lambda(&prob, 1.0, 7.0, 4, &params).unwrap();
        assert_eq!(a, b);
    }
}
