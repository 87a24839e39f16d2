use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;

use natgrad::document::{ProblemDocument, TABLE_TOL};
use natgrad::hypotheses::{check_conditions, CheckContext};
use natgrad::pde::{functional_eval, lambda1_estimate, lambda1_estimate_with, p_residual, EigenOptions, Field, Mesh};
use natgrad::problems::{entries, entry, instantiate};
use natgrad::solvers::{continuation_lambda, solve_minimal, solve_mountain_pass, ContinuationParams, MPParams};
use natgrad::transform::pull_back;
use natgrad::{Condition, TransformTable, TrendOptions, Verdict};

use crate::{Branch, Cli, Command, RunConfig, EXIT_FAILS, EXIT_INCONCLUSIVE, EXIT_OK};

pub fn run(cli: &Cli) -> Result<u8> {
    let cfg = &cli.config;
    match &cli.command {
        Command::Transform { problem, s_max } => transform(cfg, problem, *s_max),
        Command::Check { problem, conditions } => check(cfg, problem, conditions),
        Command::Eigen { problem } => eigen(cfg, problem),
        Command::Solve {
            problem,
            branch,
            lambda,
        } => solve(cfg, problem, *branch, *lambda),
        Command::Bifurcate {
            problem,
            lambda_min,
            lambda_max,
            lambda_steps,
        } => bifurcate(cfg, problem, *lambda_min, *lambda_max, *lambda_steps),
        Command::Catalog { id, params } => catalog(cfg, id.as_deref(), params),
    }
}

fn progress(cfg: &RunConfig, msg: impl AsRef<str>) {
    if cfg.verbose > 0 {
        eprintln!("natgrad: {}", msg.as_ref());
    }
}

fn load(cfg: &RunConfig, path: &Path) -> Result<ProblemDocument> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut doc = ProblemDocument::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
    if let Some(n) = cfg.nodes {
        doc.nodes = n;
        doc.validate()?;
    }
    progress(
        cfg,
        format!("loaded {} (p = {}, {} nodes)", path.display(), doc.p, doc.nodes),
    );
    Ok(doc)
}

/// Writes the main output to `--out` or standard output.
fn emit(cfg: &RunConfig, text: &str) -> Result<()> {
    match &cfg.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Emits a CSV together with a JSON summary: the summary goes to standard
/// output when the CSV goes to a file, and to standard error otherwise.
fn emit_with_summary<S: Serialize>(cfg: &RunConfig, csv: &str, summary: &S) -> Result<()> {
    let json = serde_json::to_string_pretty(summary)?;
    emit(cfg, csv)?;
    if cfg.out.is_some() {
        println!("{json}");
    } else {
        eprintln!("{json}");
    }
    Ok(())
}

fn transform(cfg: &RunConfig, path: &Path, s_max: Option<f64>) -> Result<u8> {
    let doc = load(cfg, path)?;
    let g = doc.build_g()?;
    let table = match s_max {
        Some(s) => TransformTable::build(&g, doc.p, s, TABLE_TOL)?,
        None => doc.build_table(&g)?,
    };
    progress(cfg, format!("{} rows up to s = {}", table.len(), table.s_max()));
    let mut csv = String::from("s,G,A,A_prime\n");
    for r in table.rows() {
        writeln!(csv, "{:.16e},{:.16e},{:.16e},{:.16e}", r.s, r.big_g, r.a, r.a_prime)?;
    }
    emit(cfg, &csv)?;
    Ok(EXIT_OK)
}

fn check(cfg: &RunConfig, path: &Path, names: &[String]) -> Result<u8> {
    let doc = load(cfg, path)?;
    let conditions: Vec<Condition> = if names.is_empty() {
        doc.conditions.clone().unwrap_or_else(|| Condition::ALL.to_vec())
    } else {
        names
            .iter()
            .map(|n| Condition::from_str(n.trim()).map_err(|e| anyhow!("{e}")))
            .collect::<Result<_>>()?
    };
    let g = doc.build_g()?;
    let f = doc.build_f()?;
    let (lambda1, _) = lambda1_estimate(&doc.mesh()?)?;
    progress(
        cfg,
        format!("lambda_1 = {lambda1:.10e}; checking {} conditions", conditions.len()),
    );
    let ctx = CheckContext {
        g: &g,
        f: &f,
        p: doc.p,
        n: doc.dimension(),
        lambda1: Some(lambda1),
        r: doc.r,
        theta: doc.theta,
        opts: TrendOptions::default(),
    };
    let reports = check_conditions(&ctx, &conditions)?;
    let mut json = serde_json::to_string_pretty(&reports)?;
    json.push('\n');
    emit(cfg, &json)?;
    Ok(match Verdict::all(reports.iter().map(|r| r.verdict)) {
        Verdict::Holds => EXIT_OK,
        Verdict::Fails => EXIT_FAILS,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    })
}

#[derive(Serialize)]
struct EigenSummary {
    p: f64,
    nodes: usize,
    /// First eigenvalue of `-Delta_p`.
    lambda1: f64,
    /// First eigenvalue of `-Delta` on the same mesh.
    lambda1_laplacian: f64,
}

fn eigen(cfg: &RunConfig, path: &Path) -> Result<u8> {
    let doc = load(cfg, path)?;
    let mut opts = EigenOptions::default();
    if let Some(t) = cfg.tol {
        opts.tol = t;
    }
    let mesh = doc.mesh()?;
    let (lambda1, phi) = lambda1_estimate_with(&mesh, opts)?;
    let lambda1_laplacian = if doc.p == 2.0 {
        lambda1
    } else {
        let lin = Arc::new(Mesh::uniform(doc.domain.to_domain(), doc.nodes, 2.0)?);
        lambda1_estimate_with(&lin, opts)?.0
    };
    let summary = EigenSummary {
        p: doc.p,
        nodes: doc.nodes,
        lambda1,
        lambda1_laplacian,
    };
    emit_with_summary(cfg, &phi.to_csv(), &summary)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct SolveSummary {
    branch: &'static str,
    lambda: f64,
    /// Residual of the original equation for the pulled-back `u`.
    residual: f64,
    /// Residual of the transformed equation for `v`.
    residual_q: f64,
    sup_norm: f64,
    sup_norm_v: f64,
    energy: f64,
    iterations: usize,
}

fn solve(cfg: &RunConfig, path: &Path, branch: Branch, lambda: Option<f64>) -> Result<u8> {
    let doc = load(cfg, path)?;
    let res = doc.resolve()?;
    let prob = match lambda {
        Some(l) => res.discrete.clone().with_lambda(l)?,
        None => res.discrete.clone(),
    };
    let (v, residual_q, energy, iterations, name) = match branch {
        Branch::MountainPass => {
            let mut params = MPParams::default();
            if let Some(t) = cfg.tol {
                params.tol = t;
            }
            let sol = solve_mountain_pass(&prob, &params)?;
            (sol.field, sol.residual, sol.energy, sol.iterations, "mountain_pass")
        }
        Branch::Minimal => {
            let mut params = ContinuationParams {
                seed: cfg.seed,
                ..ContinuationParams::default()
            };
            if let Some(t) = cfg.tol {
                params.sub_super.tol = t;
            }
            let sol = solve_minimal(&prob, &params)?;
            let energy = functional_eval(&prob, &sol.field)?;
            (sol.field, sol.residual, energy, sol.iterations, "minimal")
        }
    };
    progress(cfg, format!("{name} solution after {iterations} iterations"));
    let u = pull_back(&res.table, &v)?;
    let table = Arc::clone(&res.table);
    let big_g = move |s: f64| table.big_g_at(s).unwrap_or(f64::NAN);
    let residual = p_residual(&res.mesh, &u, &big_g, &res.f, prob.lambda())?;
    let summary = SolveSummary {
        branch: name,
        lambda: prob.lambda(),
        residual,
        residual_q,
        sup_norm: u.sup_norm(),
        sup_norm_v: v.sup_norm(),
        energy,
        iterations,
    };
    emit_with_summary(cfg, &solution_csv(&u, &v)?, &summary)?;
    Ok(EXIT_OK)
}

fn solution_csv(u: &Field, v: &Field) -> Result<String> {
    let mut csv = String::from("x,u,v\n");
    for ((x, a), b) in u.mesh().nodes().iter().zip(u.values()).zip(v.values()) {
        writeln!(csv, "{x:.16e},{a:.16e},{b:.16e}")?;
    }
    Ok(csv)
}

#[derive(Serialize)]
struct DiagramSummary {
    lambda_lower: Option<f64>,
    lambda_upper: Option<f64>,
    failures: Vec<f64>,
    points: usize,
}

fn bifurcate(
    cfg: &RunConfig,
    path: &Path,
    lambda_min: Option<f64>,
    lambda_max: Option<f64>,
    steps: usize,
) -> Result<u8> {
    let doc = load(cfg, path)?;
    let range = match doc.id.as_deref() {
        Some(id) => entry(id).ok().and_then(|e| e.lambda_range),
        None => None,
    };
    let (lo, hi) = match (lambda_min.or(range.map(|r| r.0)), lambda_max.or(range.map(|r| r.1))) {
        (Some(a), Some(b)) => (a, b),
        _ => bail!("--lambda-min and --lambda-max are required for documents without a catalogue range"),
    };
    let res = doc.resolve()?;
    let mut params = ContinuationParams {
        seed: cfg.seed,
        ..ContinuationParams::default()
    };
    if let Some(t) = cfg.tol {
        params.mp.tol = t;
        params.sub_super.tol = t;
    }
    progress(cfg, format!("sweeping lambda over [{lo}, {hi}] in {steps} steps"));
    let d = continuation_lambda(&res.discrete, lo, hi, steps, &params)?;
    let summary = DiagramSummary {
        lambda_lower: d.lambda_estimate.lower,
        lambda_upper: d.lambda_estimate.upper,
        failures: d.failures.clone(),
        points: d.points.len(),
    };
    emit_with_summary(cfg, &d.to_csv(), &summary)?;
    Ok(EXIT_OK)
}

fn catalog(cfg: &RunConfig, id: Option<&str>, params: &[(String, f64)]) -> Result<u8> {
    let mut text = match id {
        None => {
            if !params.is_empty() {
                bail!("--param needs --id");
            }
            serde_json::to_string_pretty(&entries())?
        }
        Some(id) => {
            let map: BTreeMap<String, f64> = params.iter().cloned().collect();
            instantiate(id, &map)?.document.to_json()
        }
    };
    text.push('\n');
    emit(cfg, &text)?;
    Ok(EXIT_OK)
}
