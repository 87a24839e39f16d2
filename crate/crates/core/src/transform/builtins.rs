//! Parameterised families of `g` and `f` that can be named in a problem
//! document. Every family carries analytic derivatives, and `g` families
//! carry closed-form primitives.

use serde::{Deserialize, Serialize};

use super::functions::{NonlinearityG, SourceF};
use crate::error::TransformError;

fn one() -> f64 {
    1.0
}

/// `e * ln(s)` with the convention `0 * ln(0) = 0`.
fn e_ln(e: f64, s: f64) -> f64 {
    if e == 0.0 {
        0.0
    } else {
        e * s.ln()
    }
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<(), TransformError> {
    if cond {
        Ok(())
    } else {
        Err(TransformError::InvalidParameter(msg()))
    }
}

fn finite(name: &str, v: f64) -> Result<(), TransformError> {
    require(v.is_finite(), || format!("{name} must be finite, got {v}"))
}

/// Named gradient coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GSpec {
    /// `g = 0`.
    Zero,
    /// `g = C`.
    Constant {
        #[serde(rename = "C")]
        c: f64,
    },
    /// `g = C (1 + s)^(-alpha)`.
    PowerDecay {
        #[serde(rename = "C")]
        c: f64,
        alpha: f64,
    },
    /// `g = C s^q`.
    Power {
        q: f64,
        #[serde(rename = "C", default = "one")]
        c: f64,
    },
    /// `g = k (s + 2) / (s + 1)` with `k = p - 1` unless given.
    ShiftedRatio {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<f64>,
    },
}

impl GSpec {
    pub fn build(&self, p: f64) -> Result<NonlinearityG, TransformError> {
        require(p > 1.0 && p.is_finite(), || format!("p must exceed 1, got {p}"))?;
        match *self {
            GSpec::Zero => Ok(NonlinearityG::zero()),
            GSpec::Constant { c } => {
                finite("C", c)?;
                require(c >= 0.0, || format!("constant g needs C >= 0, got {c}"))?;
                NonlinearityG::new(format!("{c}"), move |_| c)?
                    .with_derivative(|_| 0.0)?
                    .with_primitive(move |s| c * s)
            }
            GSpec::PowerDecay { c, alpha } => {
                finite("C", c)?;
                finite("alpha", alpha)?;
                require(c >= 0.0, || format!("power_decay needs C >= 0, got {c}"))?;
                require(alpha > 0.0, || format!("power_decay needs alpha > 0, got {alpha}"))?;
                let g = NonlinearityG::new(format!("{c}(1+s)^(-{alpha})"), move |s| c * (-alpha * s.ln_1p()).exp())?
                    .with_derivative(move |s| -alpha * c * (-(alpha + 1.0) * s.ln_1p()).exp())?;
                if (alpha - 1.0).abs() < 1e-12 {
                    g.with_primitive(move |s| c * s.ln_1p())
                } else {
                    let k = 1.0 - alpha;
                    g.with_primitive(move |s| c * (k * s.ln_1p()).exp_m1() / k)
                }
            }
            GSpec::Power { q, c } => {
                finite("q", q)?;
                finite("C", c)?;
                require(q >= 0.0, || format!("power g needs q >= 0, got {q}"))?;
                require(c >= 0.0, || format!("power g needs C >= 0, got {c}"))?;
                NonlinearityG::new(format!("{c}s^{q}"), move |s| c * s.powf(q))?
                    .with_derivative(move |s| if q == 0.0 { 0.0 } else { c * q * s.powf(q - 1.0) })?
                    .with_primitive(move |s| c * s.powf(q + 1.0) / (q + 1.0))
            }
            GSpec::ShiftedRatio { scale } => {
                let k = scale.unwrap_or(p - 1.0);
                finite("scale", k)?;
                require(k >= 0.0, || format!("shifted_ratio needs scale >= 0, got {k}"))?;
                NonlinearityG::new(format!("{k}(s+2)/(s+1)"), move |s| k * (1.0 + 1.0 / (1.0 + s)))?
                    .with_derivative(move |s| -k / ((1.0 + s) * (1.0 + s)))?
                    .with_primitive(move |s| k * (s + s.ln_1p()))
            }
        }
    }
}

/// Named source terms (all x-independent).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FSpec {
    /// `f = 0`.
    Zero,
    /// `f = mu`.
    Constant { mu: f64 },
    /// `f = mu s^(r-1)`.
    Power {
        r: f64,
        #[serde(default = "one")]
        mu: f64,
    },
    /// `f = mu s^q e^(C2 s)`.
    PowerExp {
        q: f64,
        #[serde(rename = "C2")]
        c2: f64,
        #[serde(default = "one")]
        mu: f64,
    },
    /// `f = mu s^a e^(beta s^gamma)`.
    StretchedExp {
        a: f64,
        beta: f64,
        gamma: f64,
        #[serde(default = "one")]
        mu: f64,
    },
    /// `f = mu ln(1+s)^(r-1)`.
    LogPower {
        r: f64,
        #[serde(default = "one")]
        mu: f64,
    },
    /// `f = mu s^a ln(1+s)^q`, with `a = p - 1` unless given.
    PowerLog {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a: Option<f64>,
        q: f64,
        #[serde(default = "one")]
        mu: f64,
    },
    /// `f = mu (s^(q-1) + s^(r-1))`.
    PowerSum {
        q: f64,
        r: f64,
        #[serde(default = "one")]
        mu: f64,
    },
}

impl FSpec {
    pub fn build(&self, p: f64) -> Result<SourceF, TransformError> {
        require(p > 1.0 && p.is_finite(), || format!("p must exceed 1, got {p}"))?;
        match *self {
            FSpec::Zero => SourceF::uniform("0", |_| 0.0)?
                .with_derivative(|_, _| 0.0)?
                .with_log_forms(|_, _| f64::NEG_INFINITY, |_, _| 0.0),
            FSpec::Constant { mu } => {
                finite("mu", mu)?;
                require(mu > 0.0, || format!("constant f needs mu > 0, got {mu}"))?;
                SourceF::uniform(format!("{mu}"), move |_| mu)?
                    .with_derivative(|_, _| 0.0)?
                    .with_log_forms(move |_, _| mu.ln(), |_, _| 0.0)
            }
            FSpec::Power { r, mu } => {
                finite("r", r)?;
                finite("mu", mu)?;
                require(r >= 1.0, || format!("power f needs r >= 1, got {r}"))?;
                require(mu > 0.0, || format!("power f needs mu > 0, got {mu}"))?;
                let e = r - 1.0;
                SourceF::uniform(format!("{mu}s^{e}"), move |s| mu * s.powf(e))?
                    .with_derivative(move |_, s| if e == 0.0 { 0.0 } else { mu * e * s.powf(e - 1.0) })?
                    .with_log_forms(move |_, s| mu.ln() + e_ln(e, s), move |_, s| e / s)
            }
            FSpec::PowerExp { q, c2, mu } => {
                finite("q", q)?;
                finite("C2", c2)?;
                finite("mu", mu)?;
                require(q >= 0.0, || format!("power_exp needs q >= 0, got {q}"))?;
                require(mu > 0.0, || format!("power_exp needs mu > 0, got {mu}"))?;
                SourceF::uniform(format!("{mu}s^{q}e^({c2}s)"), move |s| mu * s.powf(q) * (c2 * s).exp())?
                    .with_derivative(move |_, s| {
                        let lead = if q == 0.0 { 0.0 } else { q * s.powf(q - 1.0) };
                        mu * (c2 * s).exp() * (lead + c2 * s.powf(q))
                    })?
                    .with_log_forms(move |_, s| mu.ln() + e_ln(q, s) + c2 * s, move |_, s| q / s + c2)
            }
            FSpec::StretchedExp { a, beta, gamma, mu } => {
                finite("a", a)?;
                finite("beta", beta)?;
                finite("gamma", gamma)?;
                finite("mu", mu)?;
                require(a >= 0.0, || format!("stretched_exp needs a >= 0, got {a}"))?;
                require(gamma > 0.0, || format!("stretched_exp needs gamma > 0, got {gamma}"))?;
                require(mu > 0.0, || format!("stretched_exp needs mu > 0, got {mu}"))?;
                SourceF::uniform(format!("{mu}s^{a}e^({beta}s^{gamma})"), move |s| {
                    mu * s.powf(a) * (beta * s.powf(gamma)).exp()
                })?
                .with_derivative(move |_, s| {
                    let e = (beta * s.powf(gamma)).exp();
                    let lead = if a == 0.0 { 0.0 } else { a * s.powf(a - 1.0) };
                    mu * e * (lead + s.powf(a) * beta * gamma * s.powf(gamma - 1.0))
                })?
                .with_log_forms(
                    move |_, s| mu.ln() + e_ln(a, s) + beta * s.powf(gamma),
                    move |_, s| a / s + beta * gamma * s.powf(gamma - 1.0),
                )
            }
            FSpec::LogPower { r, mu } => {
                finite("r", r)?;
                finite("mu", mu)?;
                require(r >= 1.0, || format!("log_power needs r >= 1, got {r}"))?;
                require(mu > 0.0, || format!("log_power needs mu > 0, got {mu}"))?;
                let e = r - 1.0;
                SourceF::uniform(format!("{mu}ln(1+s)^{e}"), move |s| mu * s.ln_1p().powf(e))?
                    .with_derivative(move |_, s| {
                        if e == 0.0 {
                            0.0
                        } else {
                            mu * e * s.ln_1p().powf(e - 1.0) / (1.0 + s)
                        }
                    })?
                    .with_log_forms(
                        move |_, s| mu.ln() + e_ln(e, s.ln_1p()),
                        move |_, s| e / ((1.0 + s) * s.ln_1p()),
                    )
            }
            FSpec::PowerLog { a, q, mu } => {
                let a = a.unwrap_or(p - 1.0);
                finite("a", a)?;
                finite("q", q)?;
                finite("mu", mu)?;
                require(a >= 0.0, || format!("power_log needs a >= 0, got {a}"))?;
                require(q >= 0.0, || format!("power_log needs q >= 0, got {q}"))?;
                require(mu > 0.0, || format!("power_log needs mu > 0, got {mu}"))?;
                SourceF::uniform(format!("{mu}s^{a}ln(1+s)^{q}"), move |s| {
                    mu * s.powf(a) * s.ln_1p().powf(q)
                })?
                .with_derivative(move |_, s| {
                    let l = s.ln_1p();
                    let da = if a == 0.0 { 0.0 } else { a * s.powf(a - 1.0) * l.powf(q) };
                    let dq = if q == 0.0 {
                        0.0
                    } else {
                        s.powf(a) * q * l.powf(q - 1.0) / (1.0 + s)
                    };
                    mu * (da + dq)
                })?
                .with_log_forms(
                    move |_, s| mu.ln() + e_ln(a, s) + e_ln(q, s.ln_1p()),
                    move |_, s| a / s + q / ((1.0 + s) * s.ln_1p()),
                )
            }
            FSpec::PowerSum { q, r, mu } => {
                finite("q", q)?;
                finite("r", r)?;
                finite("mu", mu)?;
                require(q >= 1.0 && r >= 1.0, || {
                    format!("power_sum needs q, r >= 1, got q = {q}, r = {r}")
                })?;
                require(mu > 0.0, || format!("power_sum needs mu > 0, got {mu}"))?;
                let (e1, e2) = (q - 1.0, r - 1.0);
                let d = move |e: f64, s: f64| if e == 0.0 { 0.0 } else { e * s.powf(e - 1.0) };
                SourceF::uniform(format!("{mu}(s^{e1}+s^{e2})"), move |s| mu * (s.powf(e1) + s.powf(e2)))?
                    .with_derivative(move |_, s| mu * (d(e1, s) + d(e2, s)))?
                    .with_log_forms(
                        move |_, s| {
                            let (l1, l2) = (e_ln(e1, s), e_ln(e2, s));
                            mu.ln() + crate::quadrature::log_add_exp(l1, l2)
                        },
                        move |_, s| {
                            // Divide through by the dominant power to avoid overflow.
                            let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
                            let w = (e_ln(lo - hi, s)).exp();
                            (hi + lo * w) / (s * (1.0 + w))
                        },
                    )
            }
        }
    }

    /// `lim_{s->0} f(s)/s^(p-1)` where it is finite, for the families where
    /// it is known in closed form.
    pub fn small_s_ratio(&self, p: f64) -> Option<f64> {
        let lead = |e: f64, mu: f64| {
            if (e - (p - 1.0)).abs() < 1e-12 {
                Some(mu)
            } else if e > p - 1.0 {
                Some(0.0)
            } else {
                None
            }
        };
        match *self {
            FSpec::Zero => Some(0.0),
            FSpec::Constant { .. } => None,
            FSpec::Power { r, mu } => lead(r - 1.0, mu),
            FSpec::PowerExp { q, mu, .. } => lead(q, mu),
            FSpec::StretchedExp { a, mu, .. } => lead(a, mu),
            FSpec::LogPower { r, mu } => lead(r - 1.0, mu),
            FSpec::PowerLog { a, q, mu } => lead(a.unwrap_or(p - 1.0) + q, mu),
            FSpec::PowerSum { q, r, mu } => lead((q - 1.0).min(r - 1.0), mu),
        }
    }
}
