//! Catalogue of model equations with parameter validation and expected
//! hypothesis verdicts.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::document::{DomainSpec, ProblemDocument, DEFAULT_NODES};
use crate::error::{CatalogError, Error};
use crate::hypotheses::{
    check_conditions, check_monotone_and_superlinear, compute_pstar, cross_validate, CheckContext, Condition,
    HypothesisReport, TrendOptions, Verdict,
};
use crate::pde::{lambda1_estimate, p_residual, Mesh};
use crate::solvers::{solve_mountain_pass, MPParams};
use crate::transform::{pull_back, FSpec, GSpec, NonlinearityG, SourceF};

/// Which qualitative claim an entry illustrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    /// Superlinear at zero with the Ambrosetti-Rabinowitz condition.
    AmbrosettiRabinowitz,
    /// Superlinear at zero, AR fails, monotonicity route applies.
    Monotone,
    /// Sublinear at zero (concave-convex), parameter `lambda`.
    ConcaveConvex,
}

/// A machine-checked parameter constraint with its source.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Constraint {
    pub text: &'static str,
    pub source_ref: &'static str,
    #[serde(skip)]
    check: fn(&Resolved) -> bool,
}

/// A named parameter; `default = None` means derived from the others.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Parameter {
    pub name: &'static str,
    pub default: Option<f64>,
    pub note: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub equation: &'static str,
    pub group: Group,
    pub parameters: Vec<Parameter>,
    pub constraints: Vec<Constraint>,
    pub expected: Vec<(Condition, Verdict)>,
    /// `lambda` sweep range for the sublinear entries.
    pub lambda_range: Option<(f64, f64)>,
}

/// Parameter values after defaults, plus derived quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub values: BTreeMap<String, f64>,
    pub pstar: f64,
    pub lambda1: f64,
}

impl Resolved {
    pub fn get(&self, name: &str) -> f64 {
        self.values.get(name).copied().unwrap_or(f64::NAN)
    }
}

/// A validated catalogue entry ready to check or solve.
#[derive(Debug, Clone)]
pub struct Instance {
    pub id: &'static str,
    pub group: Group,
    pub params: Resolved,
    pub g: NonlinearityG,
    pub f: SourceF,
    pub document: ProblemDocument,
    pub expected: Vec<(Condition, Verdict)>,
}

const P_DEFAULT: f64 = 2.0;
const N_DEFAULT: f64 = 3.0;

const COMMON: [Parameter; 3] = [
    Parameter {
        name: "p",
        default: Some(P_DEFAULT),
        note: "p-Laplacian exponent",
    },
    Parameter {
        name: "N",
        default: Some(N_DEFAULT),
        note: "dimension of the unit ball",
    },
    Parameter {
        name: "nodes",
        default: Some(DEFAULT_NODES as f64),
        note: "radial mesh nodes",
    },
];

fn par(name: &'static str, default: f64) -> Parameter {
    Parameter {
        name,
        default: Some(default),
        note: "",
    }
}

fn derived(name: &'static str, note: &'static str) -> Parameter {
    Parameter {
        name,
        default: None,
        note,
    }
}

fn c(text: &'static str, source_ref: &'static str, check: fn(&Resolved) -> bool) -> Constraint {
    Constraint {
        text,
        source_ref,
        check,
    }
}

fn holds(conds: &[Condition]) -> Vec<(Condition, Verdict)> {
    conds.iter().map(|&c| (c, Verdict::Holds)).collect()
}

fn ar_expected() -> Vec<(Condition, Verdict)> {
    holds(&[Condition::HSc, Condition::HAr1, Condition::HAr2, Condition::HLambda1])
}

fn monotone_expected(prime: Verdict) -> Vec<(Condition, Verdict)> {
    let mut v = vec![(Condition::HAr1, Verdict::Fails)];
    v.extend(holds(&[Condition::HM, Condition::HInf]));
    v.push((Condition::HMPrime, prime));
    v.extend(holds(&[Condition::HSc, Condition::HLambda1]));
    v
}

fn cc_expected() -> Vec<(Condition, Verdict)> {
    holds(&[
        Condition::H1,
        Condition::HSc,
        Condition::HAr1,
        Condition::H2,
        Condition::H3,
        Condition::H4,
    ])
}

/// `C2 < C1 (p* - p)/(p - 1)`, infinite bound when `p >= N`.
fn exp_rate_ok(r: &Resolved, c1: f64, c2: f64) -> bool {
    c2 > 0.0 && c2 < c1 * (r.pstar - r.get("p")) / (r.get("p") - 1.0)
}

fn alpha_one_bound(r: &Resolved) -> bool {
    (r.get("alpha") - 1.0).abs() > 1e-12 || r.get("C") < r.get("r") - r.get("p")
}

/// All catalogue ids in display order.
pub const IDS: [&str; 13] = [
    "i",
    "ii",
    "iii",
    "iv",
    "v",
    "vi",
    "vii",
    "viii",
    "ix",
    "ratio-log",
    "const-linear",
    "shifted-ratio",
    "power-g",
];

/// Catalogue entry by id.
pub fn entry(id: &str) -> Result<CatalogEntry, CatalogError> {
    let e = match id {
        "i" => CatalogEntry {
            id: "i",
            equation: "-Delta_p u = C1 |grad u|^p + u^q e^(C2 u)",
            group: Group::AmbrosettiRabinowitz,
            parameters: vec![par("C1", 1.0), par("C2", 2.0), par("q", 2.0)],
            constraints: vec![
                c("C1 > 0", "entry (i)", |r| r.get("C1") > 0.0),
                c("0 < C2 < C1 (p* - p)/(p - 1)", "entry (i)", |r| {
                    exp_rate_ok(r, r.get("C1"), r.get("C2"))
                }),
                c("q > p - 1", "entry (i)", |r| r.get("q") > r.get("p") - 1.0),
            ],
            expected: ar_expected(),
            lambda_range: None,
        },
        "ii" => CatalogEntry {
            id: "ii",
            equation: "-Delta_p u = C (1+u)^(-alpha) |grad u|^p + mu u^(p-1) e^(beta u^(1-alpha))",
            group: Group::AmbrosettiRabinowitz,
            parameters: vec![
                par("C", 1.0),
                par("alpha", 0.5),
                par("beta", 4.0),
                derived("mu", "lambda1 / 2"),
            ],
            constraints: vec![
                c("C > 0", "entry (ii)", |r| r.get("C") > 0.0),
                c("0 < alpha < 1", "entry (ii)", |r| {
                    r.get("alpha") > 0.0 && r.get("alpha") < 1.0
                }),
                c(
                    "0 < beta < C (p* - p)/((p - 1)(1 - alpha))",
                    "entry (ii), growth condition with the factor C",
                    |r| {
                        let b = r.get("beta");
                        b > 0.0
                            && b < r.get("C") * (r.pstar - r.get("p")) / ((r.get("p") - 1.0) * (1.0 - r.get("alpha")))
                    },
                ),
                c("0 < mu < lambda1", "entry (ii)", |r| {
                    r.get("mu") > 0.0 && r.get("mu") < r.lambda1
                }),
            ],
            expected: ar_expected(),
            lambda_range: None,
        },
        "iii" => CatalogEntry {
            id: "iii",
            equation: "-Delta_p u = C (1+u)^(-alpha) |grad u|^p + u^(r-1)",
            group: Group::AmbrosettiRabinowitz,
            parameters: vec![par("C", 1.0), par("alpha", 1.0), par("r", 4.0)],
            constraints: vec![
                c("C > 0", "entry (iii)", |r| r.get("C") > 0.0),
                c("alpha >= 1", "entry (iii)", |r| r.get("alpha") >= 1.0),
                c("p < r < p*", "entry (iii)", |r| {
                    r.get("r") > r.get("p") && r.get("r") < r.pstar
                }),
                c("C < r - p if alpha = 1", "entry (iii)", alpha_one_bound),
            ],
            expected: ar_expected(),
            lambda_range: None,
        },
        "iv" => CatalogEntry {
            id: "iv",
            equation: "-Delta_p u = u^q |grad u|^p + mu u^(p-1) e^(beta u^(q+1))",
            group: Group::AmbrosettiRabinowitz,
            parameters: vec![par("q", 1.0), par("beta", 1.0), derived("mu", "lambda1 e^(-beta) / 2")],
            constraints: vec![
                c("q > 0", "entry (iv)", |r| r.get("q") > 0.0),
                c("0 < beta < (p* - p)/((p - 1)(q + 1))", "entry (iv)", |r| {
                    let b = r.get("beta");
                    b > 0.0 && b < (r.pstar - r.get("p")) / ((r.get("p") - 1.0) * (r.get("q") + 1.0))
                }),
                c(
                    "0 < mu < lambda1 e^(-beta)",
                    "entry (iv), sharpened multiplier bound",
                    |r| r.get("mu") > 0.0 && r.get("mu") < r.lambda1 * (-r.get("beta")).exp(),
                ),
            ],
            expected: ar_expected(),
            lambda_range: None,
        },
        "v" | "ratio-log" => CatalogEntry {
            id: if id == "v" { "v" } else { "ratio-log" },
            equation: "-Delta_p u = (p-1)/(u+1) |grad u|^p + u^(p-1) ln(u+1)^q",
            group: Group::Monotone,
            parameters: vec![par("q", 2.0)],
            constraints: vec![c("q > 0", "entry (v)", |r| r.get("q") > 0.0)],
            // the derivative criterion sits exactly at its threshold here
            expected: monotone_expected(Verdict::Fails),
            lambda_range: None,
        },
        "vi" => CatalogEntry {
            id: "vi",
            equation: "-Delta_p u = C |grad u|^p + u^(r-1)",
            group: Group::Monotone,
            parameters: vec![par("C", 1.0), par("r", 4.0)],
            constraints: vec![
                c("C > 0", "entry (vi)", |r| r.get("C") > 0.0),
                c("r > p", "entry (vi)", |r| r.get("r") > r.get("p")),
            ],
            expected: monotone_expected(Verdict::Holds),
            lambda_range: None,
        },
        "vii" => CatalogEntry {
            id: "vii",
            equation: "-Delta_p u = C |grad u|^p + ln(u+1)^(r-1)",
            group: Group::Monotone,
            parameters: vec![par("C", 1.0), par("r", 4.0)],
            constraints: vec![
                c("C > 0", "entry (vii)", |r| r.get("C") > 0.0),
                c("r > p", "entry (vii)", |r| r.get("r") > r.get("p")),
            ],
            expected: monotone_expected(Verdict::Holds),
            lambda_range: None,
        },
        "viii" => CatalogEntry {
            id: "viii",
            equation: "-Delta_p u = C1 |grad u|^p + lambda u^q e^(C2 u)",
            group: Group::ConcaveConvex,
            parameters: vec![par("C1", 1.0), par("C2", 2.0), par("q", 0.5), par("lambda", 0.1)],
            constraints: vec![
                c("C1 > 0", "entry (viii)", |r| r.get("C1") > 0.0),
                c("0 < C2 < C1 (p* - p)/(p - 1)", "entry (viii)", |r| {
                    exp_rate_ok(r, r.get("C1"), r.get("C2"))
                }),
                c("0 <= q < p - 1", "entry (viii)", |r| {
                    r.get("q") >= 0.0 && r.get("q") < r.get("p") - 1.0
                }),
                c("lambda > 0", "entry (viii)", |r| r.get("lambda") > 0.0),
            ],
            expected: cc_expected(),
            lambda_range: Some((0.02, 2.0)),
        },
        "ix" => CatalogEntry {
            id: "ix",
            equation: "-Delta_p u = C (1+u)^(-alpha) |grad u|^p + lambda (u^(r-1) + u^(q-1))",
            group: Group::ConcaveConvex,
            parameters: vec![
                par("C", 1.0),
                par("alpha", 1.0),
                par("q", 1.5),
                par("r", 4.0),
                par("lambda", 1.0),
            ],
            constraints: vec![
                c("C > 0", "entry (ix)", |r| r.get("C") > 0.0),
                c("alpha >= 1", "entry (ix)", |r| r.get("alpha") >= 1.0),
                c("1 < q < p < r < p*", "entry (ix)", |r| {
                    let (q, p, rr) = (r.get("q"), r.get("p"), r.get("r"));
                    1.0 < q && q < p && p < rr && rr < r.pstar
                }),
                c("C < r - p if alpha = 1", "entry (ix)", alpha_one_bound),
                c("lambda > 0", "entry (ix)", |r| r.get("lambda") > 0.0),
            ],
            expected: cc_expected(),
            lambda_range: Some((0.5, 20.0)),
        },
        "const-linear" => CatalogEntry {
            id: "const-linear",
            equation: "-Delta_p u = C |grad u|^p + mu u^(p-1)",
            group: Group::Monotone,
            parameters: vec![par("C", 1.0), derived("mu", "lambda1 / 2")],
            constraints: vec![
                c("C > 0", "constant-g variant", |r| r.get("C") > 0.0),
                c("0 < mu < lambda1", "constant-g variant", |r| {
                    r.get("mu") > 0.0 && r.get("mu") < r.lambda1
                }),
            ],
            expected: vec![
                (Condition::HAr1, Verdict::Fails),
                (Condition::HM, Verdict::Holds),
                (Condition::HInf, Verdict::Holds),
                (Condition::HMPrime, Verdict::Holds),
                (Condition::HLambda1, Verdict::Holds),
            ],
            lambda_range: None,
        },
        "shifted-ratio" => CatalogEntry {
            id: "shifted-ratio",
            equation: "-Delta_p u = (p-1)(u+2)/(u+1) |grad u|^p + u^(r-1)",
            group: Group::Monotone,
            parameters: vec![par("r", 4.0)],
            constraints: vec![c("r > p", "shifted-ratio variant", |r| r.get("r") > r.get("p"))],
            expected: vec![
                (Condition::HM, Verdict::Holds),
                (Condition::HInf, Verdict::Holds),
                (Condition::HMPrime, Verdict::Holds),
            ],
            lambda_range: None,
        },
        "power-g" => CatalogEntry {
            id: "power-g",
            equation: "-Delta_p u = u^q |grad u|^p + u^(r-1)",
            group: Group::Monotone,
            parameters: vec![par("q", 1.0), par("r", 4.0)],
            constraints: vec![
                c("q > 0", "power-g variant", |r| r.get("q") > 0.0),
                c("r > p", "power-g variant", |r| r.get("r") > r.get("p")),
            ],
            // the derivative criterion has a negative denominator for g = s^q
            expected: vec![
                (Condition::HM, Verdict::Holds),
                (Condition::HInf, Verdict::Holds),
                (Condition::HMPrime, Verdict::Fails),
            ],
            lambda_range: None,
        },
        other => return Err(CatalogError::UnknownId(other.to_string())),
    };
    Ok(e)
}

pub fn entries() -> Vec<CatalogEntry> {
    IDS.iter().map(|id| entry(id).expect("ids are listed")).collect()
}

impl CatalogEntry {
    pub fn all_parameters(&self) -> Vec<Parameter> {
        let mut v = COMMON.to_vec();
        v.extend(self.parameters.iter().copied());
        v
    }

    /// Applies defaults, computes `p*` and `lambda1` and checks every
    /// constraint.
    pub fn resolve(&self, overrides: &BTreeMap<String, f64>) -> Result<Resolved, CatalogError> {
        let known = self.all_parameters();
        for name in overrides.keys() {
            if !known.iter().any(|p| p.name == name) {
                return Err(CatalogError::UnknownParameter {
                    id: self.id.to_string(),
                    name: name.clone(),
                });
            }
        }
        let mut values = BTreeMap::new();
        for prm in &known {
            if let Some(v) = overrides.get(prm.name).copied().or(prm.default) {
                values.insert(prm.name.to_string(), v);
            }
        }
        let p = values["p"];
        let n = values["N"];
        let nodes = values["nodes"];
        let violated = |text: &str| CatalogError::ConstraintViolated {
            constraint: text.to_string(),
            source_ref: "problem setup".to_string(),
        };
        if !(p > 1.0 && p.is_finite()) {
            return Err(violated("p > 1"));
        }
        if !(n >= 1.0 && n.fract() == 0.0) {
            return Err(violated("N is a positive integer"));
        }
        if !(nodes >= 3.0 && nodes.fract() == 0.0) {
            return Err(violated("nodes is an integer >= 3"));
        }
        let mesh = Arc::new(Mesh::ball(1.0, n as u32, nodes as usize, p)?);
        let (lambda1, _) = lambda1_estimate(&mesh)?;
        let pstar = compute_pstar(p, n as u32);
        let beta = values.get("beta").copied().unwrap_or(0.0);
        if !values.contains_key("mu") && self.parameters.iter().any(|q| q.name == "mu") {
            let mu = match self.id {
                "iv" => 0.5 * lambda1 * (-beta).exp(),
                _ => 0.5 * lambda1,
            };
            values.insert("mu".into(), mu);
        }
        let r = Resolved { values, pstar, lambda1 };
        for con in &self.constraints {
            if !(con.check)(&r) {
                return Err(CatalogError::ConstraintViolated {
                    constraint: con.text.to_string(),
                    source_ref: con.source_ref.to_string(),
                });
            }
        }
        Ok(r)
    }

    fn specs(&self, r: &Resolved) -> (GSpec, FSpec, Option<f64>) {
        let p = r.get("p");
        let get = |n: &str| r.get(n);
        match self.id {
            "i" | "viii" => (
                GSpec::Constant { c: get("C1") },
                FSpec::PowerExp {
                    q: get("q"),
                    c2: get("C2"),
                    mu: 1.0,
                },
                r.values.get("lambda").copied(),
            ),
            "ii" => (
                GSpec::PowerDecay {
                    c: get("C"),
                    alpha: get("alpha"),
                },
                FSpec::StretchedExp {
                    a: p - 1.0,
                    beta: get("beta"),
                    gamma: 1.0 - get("alpha"),
                    mu: get("mu"),
                },
                None,
            ),
            "iii" => (
                GSpec::PowerDecay {
                    c: get("C"),
                    alpha: get("alpha"),
                },
                FSpec::Power { r: get("r"), mu: 1.0 },
                None,
            ),
            "iv" => (
                GSpec::Power { q: get("q"), c: 1.0 },
                FSpec::StretchedExp {
                    a: p - 1.0,
                    beta: get("beta"),
                    gamma: get("q") + 1.0,
                    mu: get("mu"),
                },
                None,
            ),
            "v" | "ratio-log" => (
                GSpec::PowerDecay { c: p - 1.0, alpha: 1.0 },
                FSpec::PowerLog {
                    a: None,
                    q: get("q"),
                    mu: 1.0,
                },
                None,
            ),
            "vi" => (
                GSpec::Constant { c: get("C") },
                FSpec::Power { r: get("r"), mu: 1.0 },
                None,
            ),
            "vii" => (
                GSpec::Constant { c: get("C") },
                FSpec::LogPower { r: get("r"), mu: 1.0 },
                None,
            ),
            "ix" => (
                GSpec::PowerDecay {
                    c: get("C"),
                    alpha: get("alpha"),
                },
                FSpec::PowerSum {
                    q: get("q"),
                    r: get("r"),
                    mu: 1.0,
                },
                r.values.get("lambda").copied(),
            ),
            "const-linear" => (
                GSpec::Constant { c: get("C") },
                FSpec::Power { r: p, mu: get("mu") },
                None,
            ),
            "shifted-ratio" => (
                GSpec::ShiftedRatio { scale: None },
                FSpec::Power { r: get("r"), mu: 1.0 },
                None,
            ),
            "power-g" => (
                GSpec::Power { q: get("q"), c: 1.0 },
                FSpec::Power { r: get("r"), mu: 1.0 },
                None,
            ),
            _ => unreachable!("ids are matched in entry()"),
        }
    }
}

/// Validates `params` against entry `id` and builds `g`, `f` and the
/// problem document.
pub fn instantiate(id: &str, params: &BTreeMap<String, f64>) -> Result<Instance, CatalogError> {
    let e = entry(id)?;
    let r = e.resolve(params)?;
    let (gs, fs, lambda) = e.specs(&r);
    let p = r.get("p");
    let g = gs.build(p)?;
    let f = fs.build(p)?;
    let document = ProblemDocument {
        id: Some(e.id.to_string()),
        p,
        g: gs,
        f: fs,
        lambda,
        domain: DomainSpec::Ball {
            radius: 1.0,
            dim: r.get("N") as u32,
        },
        nodes: r.get("nodes") as usize,
        conditions: Some(e.expected.iter().map(|(c, _)| *c).collect()),
        r: None,
        theta: None,
        s_max: None,
    };
    Ok(Instance {
        id: e.id,
        group: e.group,
        params: r,
        g,
        f,
        document,
        expected: e.expected,
    })
}

impl Instance {
    /// Runs the expected conditions.
    pub fn check(&self, opts: &TrendOptions) -> Result<Vec<HypothesisReport>, Error> {
        let ctx = CheckContext {
            g: &self.g,
            f: &self.f,
            p: self.params.get("p"),
            n: self.params.get("N") as u32,
            lambda1: Some(self.params.lambda1),
            r: None,
            theta: None,
            opts: *opts,
        };
        let conds: Vec<Condition> = self.expected.iter().map(|(c, _)| *c).collect();
        Ok(check_conditions(&ctx, &conds)?)
    }
}

/// Result of a catalogue solve on `(Q)` with the pull-back certified on `(P)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub sup_norm_v: f64,
    pub sup_norm_u: f64,
    pub residual_q: f64,
    pub residual_p: f64,
    pub energy: f64,
    pub interior_min: f64,
    pub outer_slope: f64,
}

/// Mountain-pass solve of the transformed problem, pulled back and
/// certified by the residual of the original equation.
pub fn solve_instance(inst: &Instance, params: &MPParams) -> Result<(SolveOutcome, crate::pde::Field), Error> {
    let res = inst.document.resolve()?;
    let sol = solve_mountain_pass(&res.discrete, params)?;
    let u = pull_back(&res.table, &sol.field)?;
    let table = Arc::clone(&res.table);
    let big_g = move |s: f64| table.big_g_at(s).unwrap_or(f64::NAN);
    let rp = p_residual(&res.mesh, &u, &big_g, &res.f, res.discrete.lambda())?;
    Ok((
        SolveOutcome {
            sup_norm_v: sol.field.sup_norm(),
            sup_norm_u: u.sup_norm(),
            residual_q: sol.residual,
            residual_p: rp,
            energy: sol.energy,
            interior_min: u.interior_min(),
            outer_slope: u.outer_slope(),
        },
        u,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryOutcome {
    pub id: String,
    pub group: Group,
    pub reports: Vec<HypothesisReport>,
    /// Conditions whose verdict differs from the expected one.
    pub mismatches: Vec<String>,
    /// Group claim: AR for the first group, AR failing with the monotone
    /// route holding for the second, sublinearity at zero for the third.
    pub claim_holds: bool,
    pub cross_validation: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveOutcome>,
}

impl EntryOutcome {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && self.claim_holds && self.cross_validation.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogSummary {
    pub entries: Vec<EntryOutcome>,
    pub failing: Vec<String>,
}

impl CatalogSummary {
    pub fn passed(&self) -> bool {
        self.failing.is_empty()
    }
}

/// Entries solved by [`run_catalog`] when solving is requested.
pub const SOLVED_ENTRIES: [&str; 1] = ["i"];

/// Checks every entry at default parameters against its expected verdicts,
/// cross-validates the regime corollaries and optionally solves the
/// designated entries.
pub fn run_catalog(opts: &TrendOptions, solve: bool) -> Result<CatalogSummary, Error> {
    let mut out = Vec::new();
    for id in IDS {
        out.push(run_entry(id, opts, solve)?);
    }
    let failing = out.iter().filter(|e| !e.passed()).map(|e| e.id.clone()).collect();
    Ok(CatalogSummary { entries: out, failing })
}

pub fn run_entry(id: &str, opts: &TrendOptions, solve: bool) -> Result<EntryOutcome, Error> {
    let inst = instantiate(id, &BTreeMap::new())?;
    let reports = inst.check(opts)?;
    let mut mismatches = Vec::new();
    for ((cond, want), rep) in inst.expected.iter().zip(&reports) {
        if rep.verdict != *want {
            mismatches.push(format!("{cond}: expected {want}, got {}", rep.verdict));
        }
    }
    let verdict_of = |c: Condition| reports.iter().find(|r| r.condition == c).map(|r| r.verdict);
    let p = inst.params.get("p");
    let claim_holds = match inst.group {
        Group::AmbrosettiRabinowitz => {
            verdict_of(Condition::HAr1) == Some(Verdict::Holds) && verdict_of(Condition::HAr2) == Some(Verdict::Holds)
        }
        Group::Monotone => {
            let ar_fails = verdict_of(Condition::HAr1).map_or(true, |v| v == Verdict::Fails);
            let route = check_monotone_and_superlinear(&inst.g, &inst.f, p, opts)?;
            ar_fails && route.verdict == Verdict::Holds
        }
        Group::ConcaveConvex => verdict_of(Condition::H1) == Some(Verdict::Holds),
    };
    let cross_validation = match cross_validate(&inst.g, &inst.f, p, inst.params.get("N") as u32, opts) {
        Ok(cv) => cv.disagreements,
        Err(e) => vec![format!("cross-validation unavailable: {e}")],
    };
    let solve = if solve && SOLVED_ENTRIES.contains(&id) {
        Some(solve_instance(&inst, &MPParams::default())?.0)
    } else {
        None
    };
    Ok(EntryOutcome {
        id: id.to_string(),
        group: inst.group,
        reports,
        mismatches,
        claim_holds,
        cross_validation,
        solve,
    })
}
