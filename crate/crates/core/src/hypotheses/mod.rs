//! Numerical checks of the growth hypotheses on `g` and `f`.
//!
//! Limit-type conditions are decided by the trend test in [`trend`]: the
//! relevant quotient is sampled on a geometric grid and its tail is
//! classified. Every quotient involving `e^G` or `A` is formed in log
//! space. Uniformity in `x` is approximated by the worst case over the
//! source's sample points.

pub mod profile;
pub mod regime;
pub mod trend;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::HypothesisError;
use crate::transform::{NonlinearityG, SourceF};

pub use profile::GrowthProfile;
pub use regime::{check_regime_conditions, classify_regime, cross_validate, CrossValidation, RegimeTag};
pub use trend::{Trend, TrendOptions};

/// Three-valued outcome of a numerical check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl Verdict {
    /// Conjunction: fails if any fails, holds if all hold.
    pub fn all(vs: impl IntoIterator<Item = Verdict>) -> Verdict {
        let mut out = Verdict::Holds;
        for v in vs {
            match v {
                Verdict::Fails => return Verdict::Fails,
                Verdict::Inconclusive => out = Verdict::Inconclusive,
                Verdict::Holds => {}
            }
        }
        out
    }

    /// Disjunction: holds if any holds, fails if all fail.
    pub fn any(vs: impl IntoIterator<Item = Verdict>) -> Verdict {
        let mut out = Verdict::Fails;
        for v in vs {
            match v {
                Verdict::Holds => return Verdict::Holds,
                Verdict::Inconclusive => out = Verdict::Inconclusive,
                Verdict::Fails => {}
            }
        }
        out
    }

    fn severity(self) -> u8 {
        match self {
            Verdict::Holds => 0,
            Verdict::Inconclusive => 1,
            Verdict::Fails => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Named hypotheses and derived conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Condition {
    #[serde(rename = "H_g")]
    HG,
    #[serde(rename = "H_f")]
    HF,
    #[serde(rename = "H_f_prime")]
    HFPrime,
    #[serde(rename = "H_SC")]
    HSc,
    #[serde(rename = "H_AR1")]
    HAr1,
    #[serde(rename = "H_AR2")]
    HAr2,
    #[serde(rename = "H_AR_prime")]
    HArPrime,
    #[serde(rename = "H_lambda1")]
    HLambda1,
    #[serde(rename = "H_1")]
    H1,
    #[serde(rename = "H_2")]
    H2,
    #[serde(rename = "H_3")]
    H3,
    #[serde(rename = "H_4")]
    H4,
    #[serde(rename = "H_m")]
    HM,
    #[serde(rename = "H_inf")]
    HInf,
    #[serde(rename = "H_m_prime")]
    HMPrime,
    #[serde(rename = "regime_sc")]
    RegimeSc,
    #[serde(rename = "regime_ar")]
    RegimeAr,
    #[serde(rename = "regime_ar_sufficient")]
    RegimeArSufficient,
}

impl Condition {
    pub const ALL: [Condition; 18] = [
        Condition::HG,
        Condition::HF,
        Condition::HFPrime,
        Condition::HSc,
        Condition::HAr1,
        Condition::HAr2,
        Condition::HArPrime,
        Condition::HLambda1,
        Condition::H1,
        Condition::H2,
        Condition::H3,
        Condition::H4,
        Condition::HM,
        Condition::HInf,
        Condition::HMPrime,
        Condition::RegimeSc,
        Condition::RegimeAr,
        Condition::RegimeArSufficient,
    ];

    /// Default set for a problem check: subcriticality, the two
    /// Ambrosetti-Rabinowitz conditions and superlinearity at zero.
    pub const DEFAULT_SET: [Condition; 4] = [Condition::HSc, Condition::HAr1, Condition::HAr2, Condition::HLambda1];

    pub fn name(self) -> &'static str {
        match self {
            Condition::HG => "H_g",
            Condition::HF => "H_f",
            Condition::HFPrime => "H_f_prime",
            Condition::HSc => "H_SC",
            Condition::HAr1 => "H_AR1",
            Condition::HAr2 => "H_AR2",
            Condition::HArPrime => "H_AR_prime",
            Condition::HLambda1 => "H_lambda1",
            Condition::H1 => "H_1",
            Condition::H2 => "H_2",
            Condition::H3 => "H_3",
            Condition::H4 => "H_4",
            Condition::HM => "H_m",
            Condition::HInf => "H_inf",
            Condition::HMPrime => "H_m_prime",
            Condition::RegimeSc => "regime_sc",
            Condition::RegimeAr => "regime_ar",
            Condition::RegimeArSufficient => "regime_ar_sufficient",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Condition {
    type Err = HypothesisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim();
        Condition::ALL
            .iter()
            .copied()
            .find(|c| c.name().eq_ignore_ascii_case(key))
            .ok_or_else(|| {
                let names: Vec<&str> = Condition::ALL.iter().map(|c| c.name()).collect();
                HypothesisError::InvalidParameter(format!(
                    "unknown condition {key:?}; expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

/// Parameters a check was run with or discovered.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportParameters {
    pub p: f64,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

/// Outcome of one check with the samples that support it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub condition: Condition,
    pub verdict: Verdict,
    /// `(s, Q(s))` pairs, ordered along the grid.
    pub witness: Vec<(f64, f64)>,
    /// Whether witness values are `ln Q` rather than `Q`.
    #[serde(default)]
    pub log_witness: bool,
    pub parameters: ReportParameters,
    /// Extrapolated limit of the quotient; `None` when unknown or infinite.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit_estimate: Option<f64>,
    #[serde(default)]
    pub notes: String,
}

impl HypothesisReport {
    pub fn new(condition: Condition, p: f64) -> Self {
        Self {
            condition,
            verdict: Verdict::Inconclusive,
            witness: Vec::new(),
            log_witness: false,
            parameters: ReportParameters {
                p,
                ..Default::default()
            },
            limit_estimate: None,
            notes: String::new(),
        }
    }

    pub fn note(&mut self, text: impl AsRef<str>) {
        if !self.notes.is_empty() {
            self.notes.push_str("; ");
        }
        self.notes.push_str(text.as_ref());
    }

    fn set_limit(&mut self, limit: Option<f64>) {
        match limit {
            Some(l) if l.is_finite() => self.limit_estimate = Some(l),
            Some(l) if l > 0.0 => self.note("quotient diverges to +inf"),
            Some(l) if l < 0.0 => self.note("quotient diverges to -inf"),
            _ => {}
        }
    }
}

/// `N p / (N - p)` for `p < N`, infinity otherwise.
pub fn compute_pstar(p: f64, n: u32) -> f64 {
    let nf = f64::from(n);
    if p < nf {
        nf * p / (nf - p)
    } else {
        f64::INFINITY
    }
}

fn validate(p: f64, n: Option<u32>) -> Result<(), HypothesisError> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(HypothesisError::InvalidParameter(format!("p must exceed 1, got {p}")));
    }
    if n == Some(0) {
        return Err(HypothesisError::InvalidParameter("N must be at least 1".into()));
    }
    Ok(())
}

/// Stand-in for `ln 0` so that vanishing sources keep a finite log quotient.
const LN_ZERO: f64 = -1e3;

fn ln_f(f: &SourceF, x: f64, s: f64) -> f64 {
    let l = f.ln_value(x, s);
    if l == f64::NEG_INFINITY {
        LN_ZERO
    } else {
        l
    }
}

/// Runs the trend test on `y` over the leading finite samples and fills a
/// report.
fn trend_report<D>(
    condition: Condition,
    p: f64,
    s: &[f64],
    y: &[f64],
    log: bool,
    opts: &TrendOptions,
    decide: D,
) -> HypothesisReport
where
    D: FnOnce(Trend, f64) -> (Verdict, Option<f64>),
{
    let n = s.iter().zip(y).take_while(|(_, v)| v.is_finite()).count();
    let mut rep = HypothesisReport::new(condition, p);
    rep.log_witness = log;
    rep.witness = s[..n].iter().copied().zip(y[..n].iter().copied()).collect();
    if n < s.len() {
        rep.note(format!(
            "samples stop at s = {:e} (not finite beyond)",
            s[n.saturating_sub(1)]
        ));
    }
    let xs: Vec<f64> = s[..n].iter().map(|v| v.ln().abs()).collect();
    let t = trend::classify(&xs, &y[..n], opts.tail);
    rep.note(trend::describe(t));
    let last = if n > 0 { y[n - 1] } else { f64::NAN };
    let (v, lim) = decide(t, last);
    rep.verdict = v;
    rep.set_limit(lim);
    rep
}

/// Keeps the worst of per-`x` reports, with the conjunction as verdict.
fn worst_case(mut reports: Vec<HypothesisReport>) -> HypothesisReport {
    let count = reports.len();
    let verdict = Verdict::all(reports.iter().map(|r| r.verdict));
    let idx = reports
        .iter()
        .enumerate()
        .max_by_key(|(i, r)| (r.verdict.severity(), std::cmp::Reverse(*i)))
        .map(|(i, _)| i)
        .expect("at least one sample point");
    let mut rep = reports.swap_remove(idx);
    rep.verdict = verdict;
    if count > 1 {
        rep.note(format!("worst case over {count} x samples"));
    }
    rep
}

fn note_truncation(rep: &mut HypothesisReport, prof: &GrowthProfile) {
    if let Some(t) = &prof.truncated {
        rep.note(t);
    }
}

fn profile(g: &NonlinearityG, p: f64, opts: &TrendOptions) -> Result<GrowthProfile, HypothesisError> {
    GrowthProfile::new(g, p, &opts.grid_to_infinity())
}

fn subcritical_with(prof: &GrowthProfile, f: &SourceF, r: f64, opts: &TrendOptions) -> HypothesisReport {
    let p = prof.p();
    let reports = f
        .sample_points()
        .into_iter()
        .map(|x| {
            let y: Vec<f64> = (0..prof.len())
                .map(|k| ln_f(f, x, prof.s()[k]) + prof.big_g()[k] * (p - r) / (p - 1.0) - (r - 1.0) * prof.ln_r(k))
                .collect();
            trend_report(Condition::HSc, p, prof.s(), &y, true, opts, |t, _| {
                trend::vanishes(t, opts)
            })
        })
        .collect();
    let mut rep = worst_case(reports);
    rep.parameters.r = Some(r);
    note_truncation(&mut rep, prof);
    rep
}

/// Subcritical growth for a fixed exponent `p < r < p*`: the quotient
/// `f e^G / A^(r-1)` tends to zero.
pub fn check_subcritical(
    g: &NonlinearityG,
    f: &SourceF,
    p: f64,
    n: u32,
    r: f64,
    opts: &TrendOptions,
) -> Result<HypothesisReport, HypothesisError> {
    validate(p, Some(n))?;
    let pstar = compute_pstar(p, n);
    if !(r > p && r < pstar) {
        return Err(HypothesisError::InvalidParameter(format!(
            "r must lie in (p, p*) = ({p}, {pstar}), got {r}"
        )));
    }
    let prof = profile(g, p, opts)?;
    let mut rep = subcritical_with(&prof, f, r, opts);
    rep.parameters.n = Some(n);
    Ok(rep)
}

/// Exponents scanned when `r` is not given.
pub fn candidate_exponents(p: f64, n: u32) -> Vec<f64> {
    let pstar = compute_pstar(p, n);
    (1..=7)
        .map(|j| {
            if pstar.is_finite() {
                p + (pstar - p) * f64::from(j) / 8.0
            } else {
                p + 2f64.powi(j)
            }
        })
        .collect()
}

/// Subcritical growth for some `p < r < p*`, scanning [`candidate_exponents`].
pub fn check_subcritical_exists(
    g: &NonlinearityG,
    f: &SourceF,
    p: f64,
    n: u32,
    opts: &TrendOptions,
) -> Result<HypothesisReport, HypothesisError> {
    validate(p, Some(n))?;
    let prof = profile(g, p, opts)?;
    let reports: Vec<HypothesisReport> = candidate_exponents(p, n)
        .into_iter()
        .map(|r| subcritical_with(&prof, f, r, opts))
        .collect();
    let verdict = Verdict::any(reports.iter().map(|r| r.verdict));
    let summary: Vec<String> = reports
        .iter()
        .map(|r| format!("r={:.4}: {}", r.parameters.r.unwrap_or(f64::NAN), r.verdict))
        .collect();
    let mut rep = reports
        .iter()
        .find(|r| r.verdict == verdict)
        .or_else(|| reports.last())
        .cloned()
        .expect("candidate list is non-empty");
    rep.verdict = verdict;
    rep.parameters.n = Some(n);
    rep.note(format!("scanned {}", summary.join(", ")));
    Ok(rep)
}

/// The reformulated Ambrosetti-Rabinowitz condition:
/// `lim A e^(-G/(p-1)) (g + f'/f) > p - 1`.
pub fn check_ar_prime(
    g: &NonlinearityG,
    f: &SourceF,
    p: f64,
    opts: &TrendOptions,
) -> Result<HypothesisReport, HypothesisError> {
    validate(p, None)?;
    let prof = profile(g, p, opts)?;
    Ok(ar_prime_with(&prof, f, opts))
}

fn ar_prime_with(prof: &GrowthProfile, f: &SourceF, opts: &TrendOptions) -> HypothesisReport {
    let p = prof.p();
    if !f.has_derivative() {
        let mut rep = HypothesisReport::new(Condition::HArPrime, p);
        rep.note("f has no s-derivative");
        return rep;
    }
    let reports = f
        .sample_points()
        .into_iter()
        .map(|x| {
            let y: Vec<f64> = (0..prof.len())
                .map(|k| {
                    let s = prof.s()[k];
                    if f.ln_value(x, s) == f64::NEG_INFINITY {
                        return f64::NAN;
                    }
                    let ld = f.log_derivative(x, s).unwrap_or(f64::NAN);
                    prof.ln_r(k).exp() * (prof.g().value(s) + ld)
                })
                .collect();
            let mut rep = trend_report(Condition::HArPrime, p, prof.s(), &y, false, opts, |t, last| {
                trend::exceeds(t, last, p - 1.0, opts)
            });
            if y.last().is_some_and(|v| v.is_nan()) {
                rep.note("f vanishes at large s, so the positivity part of the precondition fails");
            }
            rep
        })
        .collect();
    let mut rep = worst_case(reports);
    note_truncation(&mut rep, prof);
    rep
}

/// Samples of `R/J` where `R = A e^(-phi)` and `J = I e^(-p phi) / f`, with
/// `I(s) = int_0^s e^(pG/(p-1)) f`; the first AR inequality reads
/// `theta <= R/J`. Also returns `ln J`.
fn ar_ratio(prof: &GrowthProfile, f: &SourceF, x: f64) -> Result<(Vec<f64>, Vec<f64>), HypothesisError> {
    let lnj = prof.ar_integrals(f, x)?;
    let q = (0..prof.len()).map(|k| (prof.ln_r(k) - lnj[k]).exp()).collect();
    Ok((q, lnj))
}

/// Both Ambrosetti-Rabinowitz integral conditions at a fixed `theta > p`,
/// evaluated by quadrature at every grid point.
pub fn check_ar_integral(
    g: &NonlinearityG,
    f: &SourceF,
    p: f64,
    theta: f64,
    opts: &TrendOptions,
) -> Result<(HypothesisReport, HypothesisReport), HypothesisError> {
    validate(p, None)?;
    if !(theta > p) {
        return Err(HypothesisError::InvalidParameter(format!(
            "theta must exceed p = {p}, got {theta}"
        )));
    }
    let prof = profile(g, p, opts)?;
    ar_integral_with(&prof, f, theta, opts)
}

fn ar_integral_with(
    prof: &GrowthProfile,
    f: &SourceF,
    theta: f64,
    opts: &TrendOptions,
) -> Result<(HypothesisReport, HypothesisReport), HypothesisError> {
    let p = prof.p();
    let mut first = Vec::new();
    let mut second = Vec::new();
    for x in f.sample_points() {
        let (q, lnj) = ar_ratio(prof, f, x)?;
        let n = q.iter().take_while(|v| v.is_finite()).count();
        let s = &prof.s()[..n];
        let mut rep = HypothesisReport::new(Condition::HAr1, p);
        rep.parameters.theta = Some(theta);
        rep.witness = s.iter().copied().zip(q[..n].iter().copied()).collect();
        let xs: Vec<f64> = s.iter().map(|v| v.ln().abs()).collect();
        let t = trend::classify(&xs, &q[..n], opts.tail);
        rep.note(format!("R/J {}", trend::describe(t)));
        if let Trend::Converges { limit } = t {
            rep.limit_estimate = Some(limit);
        }
        let ok: Vec<bool> = q[..n].iter().map(|v| theta <= v * (1.0 + 1e-9)).collect();
        let tail = opts.tail.min(n);
        let mut s0_index = None;
        if n < opts.tail.max(4) {
            rep.note("too few finite probes");
        } else if ok[n - tail..].iter().all(|&b| b) {
            let i0 = ok.iter().rposition(|&b| !b).map_or(0, |i| i + 1);
            rep.verdict = Verdict::Holds;
            rep.parameters.s0 = Some(s[i0]);
            s0_index = Some(i0);
        } else if ok[n - tail..].iter().all(|&b| !b) {
            rep.verdict = Verdict::Fails;
        } else {
            rep.note("inequality alternates over the last probes");
        }
        first.push(rep);

        let mut rep2 = HypothesisReport::new(Condition::HAr2, p);
        rep2.note("checked on the whole domain, which is stronger than a subdomain");
        let i0 = s0_index.unwrap_or(0);
        if i0 < lnj.len() {
            let sv = prof.s()[i0];
            let ln_delta = lnj[i0] + p * prof.phi(i0) + f.ln_value(x, sv);
            rep2.parameters.s0 = Some(sv);
            rep2.witness = (0..lnj.len())
                .map(|k| (prof.s()[k], lnj[k] + p * prof.phi(k) + f.ln_value(x, prof.s()[k])))
                .take_while(|(_, v)| v.is_finite())
                .collect();
            rep2.log_witness = true;
            if ln_delta.is_finite() {
                rep2.verdict = Verdict::Holds;
                rep2.parameters.delta = Some(ln_delta.exp());
                rep2.note(format!("ln delta = {ln_delta:.6e}"));
            } else if ln_delta == f64::NEG_INFINITY || ln_delta.is_nan() {
                rep2.verdict = Verdict::Fails;
                rep2.note("the weighted integral of f vanishes");
            }
        }
        second.push(rep2);
    }
    let mut a = worst_case(first);
    let mut b = worst_case(second);
    note_truncation(&mut a, prof);
    note_truncation(&mut b, prof);
    Ok((a, b))
}

/// Chooses `theta > p` from the tail of `R/J` (worst case over `x`).
pub fn auto_theta(prof: &GrowthProfile, f: &SourceF, opts: &TrendOptions) -> Result<f64, HypothesisError> {
    let p = prof.p();
    let floor = p * (1.0 + opts.margin);
    let mut theta = f64::INFINITY;
    for x in f.sample_points() {
        let (q, _) = ar_ratio(prof, f, x)?;
        let n = q.iter().take_while(|v| v.is_finite()).count();
        let xs: Vec<f64> = prof.s()[..n].iter().map(|v| v.ln().abs()).collect();
        let l = match trend::classify(&xs, &q[..n], opts.tail) {
            Trend::Converges { limit } => limit,
            Trend::Diverges { upward: true } => f64::INFINITY,
            _ => f64::NAN,
        };
        let th = if l > floor {
            if l.is_finite() {
                0.5 * (p + l)
            } else {
                p + 1.0
            }
        } else {
            floor
        };
        theta = theta.min(th);
    }
    Ok(theta)
}

/// Both AR integral conditions with `theta` chosen by [`auto_theta`].
pub fn check_ar(
    g: &NonlinearityG,
    f: &SourceF,
    p: f64,
    opts: &TrendOptions,
) -> Result<(HypothesisReport, HypothesisReport), HypothesisError> {
    validate(p, None)?;
    let prof = profile(g, p, opts)?;
    let theta = auto_theta(&prof, f, opts)?;
    let (mut a, b) = ar_integral_with(&prof, f, theta, opts)?;
    a.note(format!("theta = {theta:.6} chosen from the tail of R/J"));
    Ok((a, b))
}

/// Behaviour of `f(x,s)/s^(p-1)` as `s -> 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroClass {
    /// Below the first eigenvalue (superlinear at zero).
    SubLambda1,
    /// Unbounded (sublinear at zero).
    Sublinear,
    Neither,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroBehavior {
    pub class: ZeroClass,
    pub lambda1: HypothesisReport,
    pub sublinear: HypothesisReport,
}

/// Classifies `f` at zero against `lambda1` via the trend of
/// `ln(f/s^(p-1))` on `s_k = s_base ratio^(-k)`.
pub fn check_behavior_at_zero(
    f: &SourceF,
    p: f64,
    lambda1: f64,
    opts: &TrendOptions,
) -> Result<ZeroBehavior, HypothesisError> {
    validate(p, None)?;
    if !(lambda1 > 0.0 && lambda1.is_finite()) {
        return Err(HypothesisError::InvalidParameter(format!(
            "lambda1 must be positive, got {lambda1}"
        )));
    }
    let s = opts.grid_to_zero();
    let mut below = Vec::new();
    let mut above = Vec::new();
    for x in f.sample_points() {
        let y: Vec<f64> = s.iter().map(|&v| ln_f(f, x, v) - (p - 1.0) * v.ln()).collect();
        let mut a = trend_report(Condition::HLambda1, p, &s, &y, true, opts, |t, last| {
            let lin = match t {
                Trend::Converges { limit } => Trend::Converges { limit: limit.exp() },
                other => other,
            };
            trend::below(lin, last.exp(), lambda1, opts)
        });
        a.parameters.lambda1 = Some(lambda1);
        below.push(a);
        above.push(trend_report(Condition::H1, p, &s, &y, true, opts, |t, _| {
            trend::blows_up(t)
        }));
    }
    let lambda1_rep = worst_case(below);
    let sublinear = worst_case(above);
    let class = match (lambda1_rep.verdict, sublinear.verdict) {
        (Verdict::Holds, _) => ZeroClass::SubLambda1,
        (_, Verdict::Holds) => ZeroClass::Sublinear,
        (Verdict::Fails, Verdict::Fails) => ZeroClass::Neither,
        _ => ZeroClass::Inconclusive,
    };
    Ok(ZeroBehavior {
        class,
        lambda1: lambda1_rep,
        sublinear,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneReport {
    /// Holds when the monotone quotient diverges and is eventually
    /// nondecreasing, either directly or through the derivative criterion.
    pub verdict: Verdict,
    pub h_m: HypothesisReport,
    pub h_inf: HypothesisReport,
    pub h_m_prime: HypothesisReport,
}

/// Monotonicity and divergence of `e^G f / A^(p-1)`, and the derivative
/// criterion for its monotonicity.
pub fn check_monotone_and_superlinear(
    g: &NonlinearityG,
    f: &SourceF,
    p: f64,
    opts: &TrendOptions,
) -> Result<MonotoneReport, HypothesisError> {
    validate(p, None)?;
    let prof = profile(g, p, opts)?;
    let mut hm = Vec::new();
    let mut hinf = Vec::new();
    let mut hmp = Vec::new();
    for x in f.sample_points() {
        let y: Vec<f64> = (0..prof.len())
            // G - (p-1) ln A = -(p-1) ln R exactly
            .map(|k| ln_f(f, x, prof.s()[k]) - (p - 1.0) * prof.ln_r(k))
            .collect();
        hm.push(nondecreasing_report(prof.s(), &y, p, opts));
        hinf.push(trend_report(Condition::HInf, p, prof.s(), &y, true, opts, |t, _| {
            trend::blows_up(t)
        }));
        hmp.push(monotone_prime(&prof, f, x, opts)?);
    }
    let mut h_m = worst_case(hm);
    let mut h_inf = worst_case(hinf);
    let mut h_m_prime = worst_case(hmp);
    for r in [&mut h_m, &mut h_inf, &mut h_m_prime] {
        note_truncation(r, &prof);
    }
    let verdict = Verdict::any([
        Verdict::all([h_m.verdict, h_inf.verdict]),
        Verdict::all([h_m_prime.verdict, h_inf.verdict]),
    ]);
    Ok(MonotoneReport {
        verdict,
        h_m,
        h_inf,
        h_m_prime,
    })
}

/// Eventual monotonicity of samples `y = ln Q`, up to rounding.
fn nondecreasing_report(s: &[f64], y: &[f64], p: f64, opts: &TrendOptions) -> HypothesisReport {
    let n = y.iter().take_while(|v| v.is_finite()).count();
    let mut rep = HypothesisReport::new(Condition::HM, p);
    rep.log_witness = true;
    rep.witness = s[..n].iter().copied().zip(y[..n].iter().copied()).collect();
    let tol = |a: f64, b: f64| 1e-9 * a.abs().max(b.abs()).max(1.0);
    let drops: Vec<bool> = y[..n].windows(2).map(|w| w[1] < w[0] - tol(w[0], w[1])).collect();
    let tail = opts.tail.max(4);
    if n < tail {
        rep.note("too few finite samples");
        return rep;
    }
    let i0 = drops.iter().rposition(|&d| d).map_or(0, |i| i + 1);
    if n - i0 >= tail {
        rep.verdict = Verdict::Holds;
        rep.parameters.s0 = Some(s[i0]);
    } else if drops[n - tail..].iter().all(|&d| d) {
        rep.verdict = Verdict::Fails;
        rep.note("quotient decreases over the whole tail");
    } else {
        rep.note("quotient is not monotone over the tail");
    }
    rep
}

/// `(f'/f) A / ((p-1) e^phi - g A) = (f'/f) R / ((p-1) e^(-phi) + M)`.
fn monotone_prime(
    prof: &GrowthProfile,
    f: &SourceF,
    x: f64,
    opts: &TrendOptions,
) -> Result<HypothesisReport, HypothesisError> {
    let p = prof.p();
    if !f.has_derivative() {
        let mut rep = HypothesisReport::new(Condition::HMPrime, p);
        rep.note("f has no s-derivative");
        return Ok(rep);
    }
    // ln Q while Q > 0, which keeps exponentially growing quotients finite.
    let mut y = Vec::with_capacity(prof.len());
    let mut negative = false;
    let mut cut = None;
    for k in 0..prof.len() {
        let s = prof.s()[k];
        let ld = f.log_derivative(x, s).unwrap_or(f64::NAN);
        let m = match prof.curvature_integral(k) {
            Ok(m) => m,
            Err(e) => {
                cut = Some(format!(
                    "quotient not computable beyond s = {}: {e}",
                    prof.s()[k.max(1) - 1]
                ));
                break;
            }
        };
        let ln_d = if m == 0.0 {
            (p - 1.0).ln() - prof.phi(k)
        } else {
            let d = (p - 1.0) * (-prof.phi(k)).exp() + m;
            negative |= d <= 0.0;
            d.ln()
        };
        y.push(if ld > 0.0 {
            ld.ln() + prof.ln_r(k) - ln_d
        } else {
            f64::NAN
        });
    }
    let mut rep = trend_report(
        Condition::HMPrime,
        p,
        &prof.s()[..y.len()],
        &y,
        true,
        opts,
        |t, last| {
            let lin = match t {
                Trend::Converges { limit } => Trend::Converges { limit: limit.exp() },
                other => other,
            };
            trend::exceeds(lin, last.exp(), 1.0, opts)
        },
    );
    if y.last().is_some_and(|v| v.is_nan()) {
        rep.verdict = Verdict::Fails;
        rep.note("quotient is not positive at large s");
    }
    if negative {
        rep.note("denominator (p-1)e^(G/(p-1)) - g A is negative at large s");
    }
    if let Some(c) = cut {
        rep.note(c);
    }
    Ok(rep)
}

/// Sampled `s` values for the global probes.
fn probe_points() -> Vec<f64> {
    (-40..=40).map(|k| 2f64.powi(k)).collect()
}

/// `g >= 0` and finite at the probe points.
pub fn check_hg(g: &NonlinearityG, p: f64) -> HypothesisReport {
    let mut rep = HypothesisReport::new(Condition::HG, p);
    let pts: Vec<f64> = std::iter::once(0.0).chain(probe_points()).collect();
    rep.witness = pts.iter().map(|&s| (s, g.value(s))).collect();
    let bad = rep.witness.iter().find(|(_, v)| !(v.is_finite() && *v >= 0.0)).copied();
    match bad {
        Some((s, v)) => {
            rep.verdict = Verdict::Fails;
            rep.note(format!("g({s:e}) = {v}"));
        }
        None => {
            rep.verdict = Verdict::Holds;
            rep.note("sampled check on [0, 2^40]");
        }
    }
    rep
}

/// `f >= 0` and finite at the probe points.
pub fn check_hf(f: &SourceF, p: f64) -> HypothesisReport {
    let mut rep = HypothesisReport::new(Condition::HF, p);
    let pts: Vec<f64> = std::iter::once(0.0).chain(probe_points()).collect();
    rep.verdict = Verdict::Holds;
    for x in f.sample_points() {
        for &s in &pts {
            let v = f.value(x, s);
            if !(v.is_finite() && v >= 0.0) {
                rep.verdict = Verdict::Fails;
                rep.witness.push((s, v));
                rep.note(format!("f({x}, {s:e}) = {v}"));
                return rep;
            }
        }
    }
    rep.note("sampled check on [0, 2^40]");
    rep
}

/// `f` has an `s`-derivative and stays bounded away from zero at large `s`.
pub fn check_hf_prime(f: &SourceF, p: f64, opts: &TrendOptions) -> HypothesisReport {
    if !f.has_derivative() {
        let mut rep = HypothesisReport::new(Condition::HFPrime, p);
        rep.verdict = Verdict::Fails;
        rep.note("f has no s-derivative");
        return rep;
    }
    let s = opts.grid_to_infinity();
    let reports = f
        .sample_points()
        .into_iter()
        .map(|x| {
            let y: Vec<f64> = s.iter().map(|&v| ln_f(f, x, v)).collect();
            trend_report(Condition::HFPrime, p, &s, &y, true, opts, |t, _| match t {
                Trend::Diverges { upward: true } => (Verdict::Holds, Some(f64::INFINITY)),
                Trend::Converges { limit } if limit > LN_ZERO + 1.0 => (Verdict::Holds, Some(limit.exp())),
                Trend::Inconclusive(_) => (Verdict::Inconclusive, None),
                _ => (Verdict::Fails, Some(0.0)),
            })
        })
        .collect();
    worst_case(reports)
}

/// `f(x,s) >= n s^(p-1)` with `n > 0`: sampled infimum of `f/s^(p-1)` on
/// `[2^-40, 2^40]`, which must also not drift to zero at either end.
pub fn check_h2(f: &SourceF, p: f64, opts: &TrendOptions) -> HypothesisReport {
    let pts = probe_points();
    let mut rep = HypothesisReport::new(Condition::H2, p);
    rep.log_witness = true;
    let mut inf = f64::INFINITY;
    let mut verdict = Verdict::Holds;
    for x in f.sample_points() {
        let y: Vec<f64> = pts.iter().map(|&s| f.ln_value(x, s) - (p - 1.0) * s.ln()).collect();
        let lo = y.iter().copied().fold(f64::INFINITY, f64::min);
        if lo < inf {
            inf = lo;
            rep.witness = pts.iter().copied().zip(y.iter().copied()).collect();
        }
        // Trend at both ends.
        let zero: Vec<f64> = opts
            .grid_to_zero()
            .iter()
            .map(|&s| f.ln_value(x, s) - (p - 1.0) * s.ln())
            .collect();
        let big: Vec<f64> = opts
            .grid_to_infinity()
            .iter()
            .map(|&s| f.ln_value(x, s) - (p - 1.0) * s.ln())
            .collect();
        for (grid, ys) in [(opts.grid_to_zero(), zero), (opts.grid_to_infinity(), big)] {
            let xs: Vec<f64> = grid.iter().map(|v| v.ln().abs()).collect();
            let n = ys.iter().take_while(|v| v.is_finite()).count();
            if n < ys.len() && ys[n] == f64::NEG_INFINITY {
                verdict = Verdict::Fails;
            } else if let Trend::Diverges { upward: false } = trend::classify(&xs[..n], &ys[..n], opts.tail) {
                verdict = Verdict::Fails;
            }
        }
    }
    if !(inf > f64::NEG_INFINITY) {
        verdict = Verdict::Fails;
    }
    rep.verdict = verdict;
    if inf.is_finite() {
        rep.note(format!("sampled inf of f/s^(p-1) = {:.6e}", inf.exp()));
    }
    rep.note("sampled assertion");
    rep
}

/// `f + B s^(p-1)` nondecreasing on `[0, s0]`: the smallest admissible `B`
/// is estimated from consecutive samples for `s0 = 2^k`, `k <= 10`.
pub fn check_h3(f: &SourceF, p: f64) -> HypothesisReport {
    let mut rep = HypothesisReport::new(Condition::H3, p);
    let pts: Vec<f64> = (-400..=100).map(|k| 2f64.powf(f64::from(k) / 10.0)).collect();
    let mut verdict = Verdict::Holds;
    for x in f.sample_points() {
        let mut b = 0.0f64;
        let mut k = 0;
        let mut overflow = None;
        for s0 in (0..=10).map(|j| 2f64.powi(j)) {
            while overflow.is_none() && k + 1 < pts.len() && pts[k + 1] <= s0 {
                let (a, c) = (pts[k], pts[k + 1]);
                if !f.value(x, c).is_finite() {
                    overflow = Some(c);
                    break;
                }
                let need = (f.value(x, a) - f.value(x, c)) / (c.powf(p - 1.0) - a.powf(p - 1.0));
                if need.is_nan() || need == f64::INFINITY {
                    verdict = Verdict::Fails;
                } else {
                    b = b.max(need);
                }
                k += 1;
            }
            if overflow.is_some() {
                break;
            }
            rep.witness.push((s0, b));
        }
        if let Some(c) = overflow {
            rep.note(format!("f overflows at s = {c:e}; sampling stopped there"));
        }
    }
    rep.verdict = verdict;
    rep.note("witness pairs are (s0, sampled B)");
    rep.note("sampled assertion");
    rep
}

/// `f(x,s) > 0` for sampled `s > 0`.
pub fn check_h4(f: &SourceF, p: f64) -> HypothesisReport {
    let mut rep = HypothesisReport::new(Condition::H4, p);
    rep.verdict = Verdict::Holds;
    for x in f.sample_points() {
        for s in probe_points() {
            let v = f.value(x, s);
            if !(v > 0.0) {
                rep.verdict = Verdict::Fails;
                rep.witness.push((s, v));
                rep.note(format!("f({x}, {s:e}) = {v}"));
                return rep;
            }
        }
    }
    rep.note("sampled assertion on [2^-40, 2^40]");
    rep
}

/// Everything a batch of checks may need.
#[derive(Debug, Clone)]
pub struct CheckContext<'a> {
    pub g: &'a NonlinearityG,
    pub f: &'a SourceF,
    pub p: f64,
    pub n: u32,
    /// First eigenvalue of `-Delta_p`; needed for the condition at zero.
    pub lambda1: Option<f64>,
    /// Fixed subcritical exponent; scanned when absent.
    pub r: Option<f64>,
    /// Fixed AR exponent; chosen automatically when absent.
    pub theta: Option<f64>,
    pub opts: TrendOptions,
}

/// Runs the requested conditions in order.
pub fn check_conditions(
    ctx: &CheckContext<'_>,
    conditions: &[Condition],
) -> Result<Vec<HypothesisReport>, HypothesisError> {
    let CheckContext { g, f, p, n, .. } = *ctx;
    let opts = &ctx.opts;
    let mut ar: Option<(HypothesisReport, HypothesisReport)> = None;
    let mut zero: Option<ZeroBehavior> = None;
    let mut mono: Option<MonotoneReport> = None;
    let mut regime: Option<Vec<HypothesisReport>> = None;
    let mut out = Vec::with_capacity(conditions.len());
    for &c in conditions {
        let rep = match c {
            Condition::HG => check_hg(g, p),
            Condition::HF => check_hf(f, p),
            Condition::HFPrime => check_hf_prime(f, p, opts),
            Condition::HSc => match ctx.r {
                Some(r) => check_subcritical(g, f, p, n, r, opts)?,
                None => check_subcritical_exists(g, f, p, n, opts)?,
            },
            Condition::HAr1 | Condition::HAr2 => {
                if ar.is_none() {
                    ar = Some(match ctx.theta {
                        Some(t) => check_ar_integral(g, f, p, t, opts)?,
                        None => check_ar(g, f, p, opts)?,
                    });
                }
                let pair = ar.as_ref().expect("computed above");
                if c == Condition::HAr1 {
                    pair.0.clone()
                } else {
                    pair.1.clone()
                }
            }
            Condition::HArPrime => check_ar_prime(g, f, p, opts)?,
            Condition::HLambda1 | Condition::H1 => {
                let l1 = ctx
                    .lambda1
                    .ok_or_else(|| HypothesisError::InvalidParameter(format!("{c} needs the first eigenvalue")))?;
                if zero.is_none() {
                    zero = Some(check_behavior_at_zero(f, p, l1, opts)?);
                }
                let z = zero.as_ref().expect("computed above");
                if c == Condition::HLambda1 {
                    z.lambda1.clone()
                } else {
                    z.sublinear.clone()
                }
            }
            Condition::H2 => check_h2(f, p, opts),
            Condition::H3 => check_h3(f, p),
            Condition::H4 => check_h4(f, p),
            Condition::HM | Condition::HInf | Condition::HMPrime => {
                if mono.is_none() {
                    mono = Some(check_monotone_and_superlinear(g, f, p, opts)?);
                }
                let m = mono.as_ref().expect("computed above");
                match c {
                    Condition::HM => m.h_m.clone(),
                    Condition::HInf => m.h_inf.clone(),
                    _ => m.h_m_prime.clone(),
                }
            }
            Condition::RegimeSc | Condition::RegimeAr | Condition::RegimeArSufficient => {
                if regime.is_none() {
                    let tag = classify_regime(g, opts);
                    regime = Some(check_regime_conditions(g, f, p, n, &tag, ctx.r, opts)?);
                }
                match regime
                    .as_ref()
                    .expect("computed above")
                    .iter()
                    .find(|r| r.condition == c)
                {
                    Some(r) => r.clone(),
                    None => {
                        let mut r = HypothesisReport::new(c, p);
                        r.note("not defined for this regime of g");
                        r
                    }
                }
            }
        };
        out.push(rep);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::{FSpec, GSpec};

    fn opts() -> TrendOptions {
        TrendOptions::default()
    }

    fn gc(c: f64) -> NonlinearityG {
        GSpec::Constant { c }.build(2.0).unwrap()
    }

    fn power(r: f64) -> SourceF {
        FSpec::Power { r, mu: 1.0 }.build(2.0).unwrap()
    }

    #[test]
    fn pstar_values() {
        assert_eq!(compute_pstar(2.0, 3), 6.0);
        assert_eq!(compute_pstar(2.0, 2), f64::INFINITY);
        assert!((compute_pstar(1.5, 3) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn verdict_serialises_lowercase() {
        assert_eq!(
            serde_json::to_string(&Verdict::Inconclusive).unwrap(),
            "\"inconclusive\""
        );
        assert_eq!(serde_json::to_string(&Condition::HAr1).unwrap(), "\"H_AR1\"");
        assert_eq!("h_sc".parse::<Condition>().unwrap(), Condition::HSc);
        assert!("H_9".parse::<Condition>().is_err());
    }

    #[test]
    fn subcritical_exponential_example() {
        let g = gc(1.0);
        let ok = FSpec::PowerExp {
            q: 2.0,
            c2: 2.0,
            mu: 1.0,
        }
        .build(2.0)
        .unwrap();
        let rep = check_subcritical(&g, &ok, 2.0, 3, 5.0, &opts()).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds, "{}", rep.notes);
        let bad = FSpec::PowerExp {
            q: 2.0,
            c2: 5.0,
            mu: 1.0,
        }
        .build(2.0)
        .unwrap();
        let rep = check_subcritical(&g, &bad, 2.0, 3, 5.0, &opts()).unwrap();
        assert_eq!(rep.verdict, Verdict::Fails, "{}", rep.notes);
        // Growth of ln Q matches (C2 - C1 (r-p)/(p-1)) s = 2 s.
        let w = &rep.witness;
        let (s1, y1) = w[w.len() - 2];
        let (s2, y2) = w[w.len() - 1];
        assert!(((y2 - y1) / (s2 - s1) - 2.0).abs() < 1e-6);
    }

    #[test]
    fn subcritical_rejects_bad_r() {
        let g = gc(1.0);
        assert!(check_subcritical(&g, &power(3.0), 2.0, 3, 6.0, &opts()).is_err());
        assert!(check_subcritical(&g, &power(3.0), 2.0, 3, 2.0, &opts()).is_err());
    }

    #[test]
    fn subcritical_plain_power() {
        let g = NonlinearityG::zero();
        let rep = check_subcritical(&g, &power(3.0), 2.0, 3, 4.0, &opts()).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);
        let rep = check_subcritical(&g, &power(5.0), 2.0, 3, 4.0, &opts()).unwrap();
        assert_eq!(rep.verdict, Verdict::Fails);
        let rep = check_subcritical_exists(&g, &power(5.0), 2.0, 3, &opts()).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);
        assert!(rep.parameters.r.unwrap() > 5.0);
    }

    #[test]
    fn ar_prime_needs_exponential_growth() {
        let g = gc(1.0);
        for r in [3.0, 4.0, 6.0] {
            let rep = check_ar_prime(&g, &power(r), 2.0, &opts()).unwrap();
            assert_eq!(rep.verdict, Verdict::Fails, "r = {r}: {}", rep.notes);
        }
        let f = FSpec::PowerExp {
            q: 2.0,
            c2: 1.0,
            mu: 1.0,
        }
        .build(2.0)
        .unwrap();
        let rep = check_ar_prime(&g, &f, 2.0, &opts()).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds, "{}", rep.notes);
        assert!((rep.limit_estimate.unwrap() - 2.0).abs() < 1e-3);
    }

    #[test]
    fn ar_prime_plain_power() {
        let rep = check_ar_prime(&NonlinearityG::zero(), &power(4.0), 2.0, &opts()).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);
        assert!((rep.limit_estimate.unwrap() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn ar_integral_equality_case() {
        let (a, b) = check_ar_integral(&NonlinearityG::zero(), &power(4.0), 2.0, 4.0, &opts()).unwrap();
        assert_eq!(a.verdict, Verdict::Holds, "{}", a.notes);
        assert_eq!(a.parameters.s0, Some(1.0));
        assert_eq!(b.verdict, Verdict::Holds);
        // delta = int_0^1 t^3 dt.
        assert!((b.parameters.delta.unwrap() - 0.25).abs() < 1e-9);
    }

    #[test]
    fn ar_integral_polynomial_fails() {
        let (a, _) = check_ar_integral(&gc(1.0), &power(3.0), 2.0, 2.5, &opts()).unwrap();
        assert_eq!(a.verdict, Verdict::Fails, "{}", a.notes);
        let (a, _) = check_ar(&gc(1.0), &power(3.0), 2.0, &opts()).unwrap();
        assert_eq!(a.verdict, Verdict::Fails, "{}", a.notes);
    }

    #[test]
    fn behaviour_at_zero() {
        let o = opts();
        let z = check_behavior_at_zero(&power(4.0), 2.0, 9.87, &o).unwrap();
        assert_eq!(z.class, ZeroClass::SubLambda1);
        assert_eq!(z.sublinear.verdict, Verdict::Fails);
        let z = check_behavior_at_zero(&power(1.5), 2.0, 9.87, &o).unwrap();
        assert_eq!(z.class, ZeroClass::Sublinear);
        assert_eq!(z.lambda1.verdict, Verdict::Fails);
        let lin = FSpec::Power { r: 2.0, mu: 5.0 }.build(2.0).unwrap();
        let z = check_behavior_at_zero(&lin, 2.0, 9.87, &o).unwrap();
        assert_eq!(z.class, ZeroClass::SubLambda1);
        assert!((z.lambda1.limit_estimate.unwrap() - 5.0).abs() < 1e-12);
        let lin = FSpec::Power { r: 2.0, mu: 20.0 }.build(2.0).unwrap();
        let z = check_behavior_at_zero(&lin, 2.0, 9.87, &o).unwrap();
        assert_eq!(z.class, ZeroClass::Neither);
        assert!(z.lambda1.witness.windows(2).all(|w| w[1].0 < w[0].0));
    }

    #[test]
    fn monotone_quotient_for_linear_source() {
        let m = check_monotone_and_superlinear(&NonlinearityG::zero(), &power(2.0), 2.0, &opts()).unwrap();
        assert_eq!(m.h_m.verdict, Verdict::Holds);
        assert_eq!(m.h_inf.verdict, Verdict::Fails);
        assert_eq!(m.verdict, Verdict::Fails);
    }

    #[test]
    fn monotone_criterion_constant_g() {
        let m = check_monotone_and_superlinear(&gc(1.0), &power(4.0), 2.0, &opts()).unwrap();
        assert_eq!(m.h_m_prime.verdict, Verdict::Holds, "{}", m.h_m_prime.notes);
        assert_eq!(m.h_m.verdict, Verdict::Holds);
        assert_eq!(m.h_inf.verdict, Verdict::Holds);
        assert_eq!(m.verdict, Verdict::Holds);
    }

    #[test]
    fn global_probes() {
        let f = power(1.5);
        assert_eq!(check_h4(&f, 2.0).verdict, Verdict::Holds);
        assert_eq!(check_h3(&f, 2.0).verdict, Verdict::Holds);
        assert_eq!(check_h2(&f, 2.0, &opts()).verdict, Verdict::Fails);
        let f = FSpec::PowerSum {
            q: 1.5,
            r: 2.0,
            mu: 1.0,
        }
        .build(2.0)
        .unwrap();
        assert_eq!(check_h2(&f, 2.0, &opts()).verdict, Verdict::Holds);
        assert_eq!(check_hg(&gc(1.0), 2.0).verdict, Verdict::Holds);
        assert_eq!(check_hf(&f, 2.0).verdict, Verdict::Holds);
        assert_eq!(check_hf_prime(&f, 2.0, &opts()).verdict, Verdict::Holds);
    }

    #[test]
    fn decreasing_source_needs_shift() {
        // f = s (2 - s)^2 on [0, 2] decreases on (2/3, 2): B = sup -f'(s) = 4/3 there.
        let f = SourceF::uniform("s(2-s)^2", |s| s * (2.0 - s).powi(2)).unwrap();
        let rep = check_h3(&f, 2.0);
        assert_eq!(rep.verdict, Verdict::Holds);
        let b = rep.witness.iter().find(|(s0, _)| *s0 == 2.0).unwrap().1;
        assert!((b - 4.0 / 3.0).abs() < 1e-2, "{b}");
    }

    #[test]
    fn batch_runner_and_determinism() {
        let g = gc(1.0);
        let f = FSpec::PowerExp {
            q: 2.0,
            c2: 2.0,
            mu: 1.0,
        }
        .build(2.0)
        .unwrap();
        let ctx = CheckContext {
            g: &g,
            f: &f,
            p: 2.0,
            n: 3,
            lambda1: Some(9.8696),
            r: None,
            theta: None,
            opts: opts(),
        };
        let a = check_conditions(&ctx, &Condition::DEFAULT_SET).unwrap();
        let b = check_conditions(&ctx, &Condition::DEFAULT_SET).unwrap();
        assert_eq!(a, b);
        for r in &a {
            assert_eq!(r.verdict, Verdict::Holds, "{}: {}", r.condition, r.notes);
        }
    }
}
