//! Acceptance criteria 1-8, one PASS/FAIL line each.

mod common;

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use natgrad::document::TABLE_TOL;
use natgrad::pde::{gradient_check, lambda1_estimate, ClosureReaction, Mesh};
use natgrad::problems::{instantiate, run_catalog, solve_instance, IDS};
use natgrad::solvers::{continuation_lambda, solve_mountain_pass, solve_pair, BranchTag, ContinuationParams, MPParams};
use natgrad::{DiscreteProblem, FSpec, GSpec, TransformTable, TransformedProblem, TrendOptions};

struct Outcome {
    pass: bool,
    detail: String,
    /// Numerical output compared across runs for determinism.
    transcript: String,
}

fn within(budget: Duration, t: Instant, pass: bool, detail: String, transcript: String) -> Outcome {
    let el = t.elapsed();
    let pass = pass && el <= budget;
    Outcome {
        pass,
        detail: format!("{detail}; {:.2}s of {}s", el.as_secs_f64(), budget.as_secs()),
        transcript,
    }
}

/// Writes past the test harness capture so the lines show in every run.
fn report(line: String) {
    let _ = writeln!(std::io::stderr().lock(), "{line}");
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let mut worst_trip = 0.0f64;
    let mut worst_closed = 0.0f64;
    for p in [1.5, 2.0, 3.0] {
        let gs = [
            GSpec::Zero,
            GSpec::Constant { c: 1.0 },
            GSpec::PowerDecay { c: p - 1.0, alpha: 1.0 },
            GSpec::Power { q: 0.5, c: 1.0 },
        ];
        for (k, spec) in gs.iter().enumerate() {
            let g = spec.build(p).unwrap();
            let table = TransformTable::build(&g, p, 10.0, TABLE_TOL).unwrap();
            let grid = table.s_grid();
            let mids = grid.windows(2).map(|w| 0.5 * (w[0] + w[1]));
            for s in grid.iter().copied().chain(mids) {
                let back = table.invert_a(table.eval_a(s).unwrap()).unwrap();
                worst_trip = worst_trip.max((back - s).abs());
                let closed = match k {
                    1 if p == 2.0 => Some(s.exp_m1()),
                    2 => Some(s + 0.5 * s * s),
                    _ => None,
                };
                if let Some(a) = closed.filter(|a| *a > 0.0) {
                    worst_closed = worst_closed.max(rel(table.eval_a(s).unwrap(), a));
                }
            }
        }
    }
    let pass = worst_trip <= 1e-8 && worst_closed <= 1e-8;
    within(
        Duration::from_secs(1),
        t,
        pass,
        format!("round trip {worst_trip:.2e}, closed forms {worst_closed:.2e}"),
        String::new(),
    )
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let mut worst = 0.0f64;
    for id in IDS {
        let inst = instantiate(id, &BTreeMap::new()).unwrap();
        let p = inst.params.get("p");
        let f = FSpec::Power { r: p, mu: 1.0 }.build(p).unwrap();
        let table = Arc::new(TransformTable::build(&inst.g, p, 1.0, TABLE_TOL).unwrap());
        let tp = TransformedProblem::new(&inst.g, &f, Arc::clone(&table)).unwrap();
        let s = 1e-6;
        let v = table.eval_a(s).unwrap();
        // f(s) / s^(p-1) = 1
        let q = tp.h(0.0, v).unwrap() / v.powf(p - 1.0);
        worst = worst.max((q - 1.0).abs());
    }
    within(
        Duration::from_secs(1),
        t,
        worst < 1e-3,
        format!("worst relative gap {worst:.2e} over {} entries", IDS.len()),
        String::new(),
    )
}

fn criterion_3() -> Outcome {
    let t = Instant::now();
    let summary = run_catalog(&TrendOptions::default(), false).unwrap();
    let numbered = ["i", "ii", "iii", "iv", "v", "vi", "vii", "viii", "ix"];
    let mut bad = Vec::new();
    let mut disagreements = 0;
    for e in summary.entries.iter().filter(|e| numbered.contains(&e.id.as_str())) {
        if !e.claim_holds || !e.mismatches.is_empty() {
            bad.push(format!("{} {:?}", e.id, e.mismatches));
        }
        disagreements += e.cross_validation.len();
    }
    let pass = bad.is_empty() && disagreements == 0;
    within(
        Duration::from_secs(10),
        t,
        pass,
        format!(
            "{} entries off pattern {bad:?}, {disagreements} cross-validation disagreements",
            bad.len()
        ),
        serde_json::to_string(&summary).unwrap(),
    )
}

fn criterion_4() -> Outcome {
    let t = Instant::now();
    let eig = |p: f64, l: f64| {
        lambda1_estimate(&Arc::new(Mesh::interval(l, 401, p).unwrap()))
            .unwrap()
            .0
    };
    let pi2 = std::f64::consts::PI.powi(2);
    let l2 = eig(2.0, 1.0);
    let e2 = rel(l2, pi2);
    let mut worst_p = 0.0f64;
    let mut worst_scale = 0.0f64;
    let mut transcript = format!("{l2:e}");
    for p in [1.5, 3.0] {
        let l = eig(p, 1.0);
        worst_p = worst_p.max(rel(l, common::eigen_shooting(p)));
        let l_half = eig(p, 2.0);
        worst_scale = worst_scale.max(rel(l_half, l / 2f64.powf(p)));
        transcript += &format!(",{l:e},{l_half:e}");
    }
    let pass = e2 <= 1e-3 && worst_p <= 5e-3 && worst_scale <= 1e-6;
    within(
        Duration::from_secs(5),
        t,
        pass,
        format!("p=2 {e2:.2e}, p=1.5/3 vs shooting {worst_p:.2e}, scaling {worst_scale:.2e}"),
        transcript,
    )
}

fn criterion_5() -> Outcome {
    let t = Instant::now();
    let mesh = Arc::new(Mesh::interval(1.0, 401, 2.0).unwrap());
    let prob = DiscreteProblem::new(mesh, Arc::new(ClosureReaction::power(3.0)));
    let sol = solve_mountain_pass(&prob, &MPParams::default()).unwrap();
    let oracle = common::cubic_shooting();
    let err = rel(sol.field.sup_norm(), oracle);
    // relative gradient errors are only meaningful away from critical points
    let probe = sol
        .field
        .with_values_unchecked(sol.field.values().iter().map(|x| 0.5 * x).collect());
    let gc = gradient_check(&prob, &probe, &[1e-5], 8, 1).unwrap().max_error();
    let pass = err <= 5e-3 && sol.residual <= 1e-6 && gc <= 1e-4;
    within(
        Duration::from_secs(30),
        t,
        pass,
        format!(
            "sup {:.6} vs {oracle:.6} ({err:.2e}), residual {:.2e}, gradient {gc:.2e}",
            sol.field.sup_norm(),
            sol.residual
        ),
        format!("{:e},{:e},{:e},{gc:e}", sol.field.sup_norm(), sol.energy, sol.residual),
    )
}

fn criterion_6() -> Outcome {
    let t = Instant::now();
    let inst = instantiate("i", &BTreeMap::new()).unwrap();
    let (out, _) = solve_instance(&inst, &MPParams::default()).unwrap();
    let pass = inst.document.nodes == 401 && out.residual_p <= 1e-5 && out.interior_min > 0.0 && out.outer_slope < 0.0;
    within(
        Duration::from_secs(60),
        t,
        pass,
        format!(
            "(P) residual {:.2e}, interior min {:.3e}, outer slope {:.3e}",
            out.residual_p, out.interior_min, out.outer_slope
        ),
        serde_json::to_string(&out).unwrap(),
    )
}

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

fn criterion_7() -> Outcome {
    let t = Instant::now();
    let map = common::concave_convex_map();
    let (lo_m, hi_m) = (1e-6, 1e3);
    let (_, big_lambda) = map.fold(lo_m, hi_m);
    let prob = concave_convex(401);
    let params = ContinuationParams::default();
    let d = continuation_lambda(&prob, 0.5, 8.0, 16, &params).unwrap();
    let mut notes = Vec::new();
    let br = d.lambda_estimate;
    let width = br.relative_width().unwrap_or(f64::INFINITY);
    let (lo, hi) = (br.lower.unwrap_or(0.0), br.upper.unwrap_or(f64::INFINITY));
    // the discrete fold sits within mesh error of the continuous one
    let contains = lo <= big_lambda * 1.005 && hi >= big_lambda * 0.995;
    if width > 0.02 || !contains {
        notes.push(format!("bracket [{lo}, {hi}] vs {big_lambda:.6}"));
    }
    // existence on every grid value, away from the mesh-error band at the fold
    for &l in &d.lambda_grid {
        if rel(l, big_lambda) < 5e-3 {
            continue;
        }
        let exists = l < big_lambda;
        let found = d.branch(BranchTag::Minimal).any(|p| p.lambda == l);
        let found_mp = d.branch(BranchTag::MountainPass).any(|p| p.lambda == l);
        if found != exists || found_mp != exists {
            notes.push(format!(
                "lambda {l}: oracle {exists}, minimal {found}, mountain pass {found_mp}"
            ));
        }
    }
    let half = 0.5 * big_lambda;
    let pair = solve_pair(&prob.clone().with_lambda(half).unwrap(), &params).unwrap();
    let (a, b) = (&pair.minimal.field, &pair.mountain_pass.field);
    let ordered = a.values().iter().zip(b.values()).all(|(x, y)| x <= y);
    let gap = b.sup_norm() - a.sup_norm();
    let (m1, m2) = map.roots(half, lo_m, hi_m);
    if !ordered || gap <= 1e-2 {
        notes.push(format!("pair at {half}: ordered {ordered}, gap {gap}"));
    }
    if rel(a.sup_norm(), m1) > 1e-2 || rel(b.sup_norm(), m2) > 1e-2 {
        notes.push(format!(
            "pair sups {} / {} vs oracle {m1} / {m2}",
            a.sup_norm(),
            b.sup_norm()
        ));
    }
    let transcript = format!("{}{:e},{:e},{:e},{:e}", d.to_csv(), lo, hi, a.sup_norm(), b.sup_norm());
    within(
        Duration::from_secs(300),
        t,
        notes.is_empty(),
        format!(
            "Lambda in [{lo:.6}, {hi:.6}] ({:.2}%), oracle {big_lambda:.6}; pair sups {:.5} / {:.5} vs {m1:.5} / {m2:.5}{}",
            100.0 * width,
            a.sup_norm(),
            b.sup_norm(),
            if notes.is_empty() { String::new() } else { format!("; {}", notes.join("; ")) }
        ),
        transcript,
    )
}

#[test]
fn acceptance_criteria() {
    let criteria: [fn() -> Outcome; 7] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
    ];
    let mut all = true;
    let mut transcripts = Vec::new();
    for (k, c) in criteria.iter().enumerate() {
        let o = c();
        report(format!(
            "criterion {}: {} ({})",
            k + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        ));
        all &= o.pass;
        transcripts.push(o.transcript);
    }
    let t = Instant::now();
    let differing: Vec<usize> = (2..7)
        .filter(|&k| criteria[k]().transcript != transcripts[k])
        .map(|k| k + 1)
        .collect();
    let pass = differing.is_empty();
    report(format!(
        "criterion 8: {} (criteria 3-7 repeated, differing: {differing:?}; {:.2}s)",
        if pass { "PASS" } else { "FAIL" },
        t.elapsed().as_secs_f64()
    ));
    all &= pass;
    assert!(all, "some acceptance criteria failed");
}
