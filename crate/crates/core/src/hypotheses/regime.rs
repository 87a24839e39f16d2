//! Classification of `g` by its behaviour at infinity, and the simplified
//! growth conditions that are equivalent to the general ones in each regime.

use serde::{Deserialize, Serialize};

use super::trend::{self, Trend, TrendOptions};
use super::{
    candidate_exponents, check_ar_prime, check_subcritical_exists, ln_f, trend_report, validate, worst_case, Condition,
    GrowthProfile, HypothesisReport, Verdict,
};
use crate::error::HypothesisError;
use crate::transform::{NonlinearityG, SourceF};

/// Behaviour of `g(s)` as `s -> inf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum RegimeTag {
    /// `g -> g_inf` with `0 < g_inf < inf`.
    GInfPositive {
        g_inf: f64,
    },
    /// `g -> 0`, `s g -> inf` and `g'/g^2 -> 0`.
    GToZeroSgToInf,
    /// `g -> 0` and `s g -> c`.
    GToZeroSgToC {
        c: f64,
    },
    /// `g -> inf` with `|g'/g|` bounded.
    GToInfLogDerivBounded,
    Unclassified {
        note: String,
    },
}

impl RegimeTag {
    pub fn name(&self) -> &'static str {
        match self {
            RegimeTag::GInfPositive { .. } => "g_inf_positive",
            RegimeTag::GToZeroSgToInf => "g_to_zero_sg_to_inf",
            RegimeTag::GToZeroSgToC { .. } => "g_to_zero_sg_to_c",
            RegimeTag::GToInfLogDerivBounded => "g_to_inf_log_deriv_bounded",
            RegimeTag::Unclassified { .. } => "unclassified",
        }
    }
}

fn tail_trend(s: &[f64], y: &[f64], opts: &TrendOptions) -> Trend {
    let n = y.iter().take_while(|v| v.is_finite()).count();
    let xs: Vec<f64> = s[..n].iter().map(|v| v.ln().abs()).collect();
    trend::classify(&xs, &y[..n], opts.tail)
}

fn unclassified(note: impl Into<String>) -> RegimeTag {
    RegimeTag::Unclassified { note: note.into() }
}

/// Classifies `g` from trend tests on `g`, `s g`, `g'/g^2` and `g'/g`.
pub fn classify_regime(g: &NonlinearityG, opts: &TrendOptions) -> RegimeTag {
    let s = opts.grid_to_infinity();
    let gv: Vec<f64> = s.iter().map(|&v| g.value(v)).collect();
    let tail_start = gv.len().saturating_sub(opts.tail.max(4));
    if gv[tail_start..].iter().all(|&v| v == 0.0) {
        return RegimeTag::GToZeroSgToC { c: 0.0 };
    }
    if gv[tail_start..].iter().any(|&v| !(v > 0.0)) {
        return unclassified("g is not positive at large s");
    }
    let ln_g: Vec<f64> = gv.iter().map(|v| v.ln()).collect();
    let deriv = |v: f64| g.derivative(v);
    match tail_trend(&s, &ln_g, opts) {
        Trend::Converges { limit } => RegimeTag::GInfPositive { g_inf: limit.exp() },
        Trend::Diverges { upward: true } => {
            if !g.has_derivative() {
                return unclassified("g' is needed to bound g'/g");
            }
            let ld: Vec<f64> = s
                .iter()
                .zip(&gv)
                .map(|(&v, &gi)| deriv(v).map_or(f64::NAN, |d| (d / gi).abs()))
                .collect();
            match tail_trend(&s, &ld, opts) {
                Trend::Converges { .. } | Trend::Diverges { upward: false } => RegimeTag::GToInfLogDerivBounded,
                Trend::Diverges { upward: true } => unclassified("g'/g is unbounded"),
                Trend::Inconclusive(why) => unclassified(format!("g'/g: {why}")),
            }
        }
        Trend::Diverges { upward: false } => {
            let ln_sg: Vec<f64> = s.iter().zip(&ln_g).map(|(v, l)| v.ln() + l).collect();
            match tail_trend(&s, &ln_sg, opts) {
                Trend::Converges { limit } => RegimeTag::GToZeroSgToC { c: limit.exp() },
                Trend::Diverges { upward: false } => RegimeTag::GToZeroSgToC { c: 0.0 },
                Trend::Diverges { upward: true } => {
                    if !g.has_derivative() {
                        return unclassified("g' is needed to test g'/g^2 -> 0");
                    }
                    let q: Vec<f64> = s
                        .iter()
                        .zip(&gv)
                        .map(|(&v, &gi)| deriv(v).map_or(f64::NAN, |d| d / (gi * gi)))
                        .collect();
                    match tail_trend(&s, &q, opts) {
                        Trend::Converges { limit } if limit.abs() <= opts.eps_zero.sqrt() => RegimeTag::GToZeroSgToInf,
                        t => unclassified(format!("g'/g^2 does not tend to zero ({})", trend::describe(t))),
                    }
                }
                Trend::Inconclusive(why) => unclassified(format!("s g: {why}")),
            }
        }
        Trend::Inconclusive(why) => unclassified(format!("g: {why}")),
    }
}

/// Regime-specific subcritical and AR conditions.
///
/// For `g_inf` finite and for `g -> inf`: `f / e^((r-p) G/(p-1)) -> 0` and
/// `lim f'/f > 0` (resp. `f'/(f g) > 0`). For `s g -> inf`:
/// `f g^(r-1) / e^((r-p) G/(p-1)) -> 0` and `f'/(f g) > 0`. For `s g -> c`:
/// `f / s^(r-1) -> 0` and `s f'/f > p - 1`, plus the sufficient bound
/// `s f'/f > p - 1 + c`. Without `r` the subcritical part scans
/// [`candidate_exponents`].
pub fn check_regime_conditions(
    g: &NonlinearityG,
    f: &SourceF,
    p: f64,
    n: u32,
    tag: &RegimeTag,
    r: Option<f64>,
    opts: &TrendOptions,
) -> Result<Vec<HypothesisReport>, HypothesisError> {
    validate(p, Some(n))?;
    if let RegimeTag::Unclassified { note } = tag {
        return Err(HypothesisError::InvalidParameter(format!(
            "regime conditions need a classified g ({note})"
        )));
    }
    let prof = GrowthProfile::new(g, p, &opts.grid_to_infinity())?;
    let s = prof.s();
    let rs = match r {
        Some(r) => vec![r],
        None => candidate_exponents(p, n),
    };

    let sc_series = |x: f64, r: f64| -> Vec<f64> {
        (0..prof.len())
            .map(|k| {
                let sv = s[k];
                let lf = ln_f(f, x, sv);
                match tag {
                    RegimeTag::GToZeroSgToC { .. } => lf - (r - 1.0) * sv.ln(),
                    RegimeTag::GToZeroSgToInf => lf + (r - 1.0) * g.value(sv).ln() - (r - p) * prof.phi(k),
                    _ => lf - (r - p) * prof.phi(k),
                }
            })
            .collect()
    };
    let mut by_r = Vec::new();
    for &rv in &rs {
        let reps = f
            .sample_points()
            .into_iter()
            .map(|x| {
                trend_report(Condition::RegimeSc, p, s, &sc_series(x, rv), true, opts, |t, _| {
                    trend::vanishes(t, opts)
                })
            })
            .collect();
        let mut rep = worst_case(reps);
        rep.parameters.r = Some(rv);
        rep.parameters.n = Some(n);
        by_r.push(rep);
    }
    let verdict = Verdict::any(by_r.iter().map(|r| r.verdict));
    let mut sc = by_r
        .iter()
        .find(|r| r.verdict == verdict)
        .unwrap_or(&by_r[by_r.len() - 1])
        .clone();
    sc.verdict = verdict;
    sc.note(format!("regime {}", tag.name()));

    let mut out = vec![sc];
    if !f.has_derivative() {
        let mut rep = HypothesisReport::new(Condition::RegimeAr, p);
        rep.note("f has no s-derivative");
        out.push(rep);
        return Ok(out);
    }
    let ar_series = |x: f64| -> Vec<f64> {
        s.iter()
            .map(|&sv| {
                let ld = f.log_derivative(x, sv).unwrap_or(f64::NAN);
                match tag {
                    RegimeTag::GInfPositive { .. } => ld,
                    RegimeTag::GToZeroSgToC { .. } => sv * ld,
                    _ => ld / g.value(sv),
                }
            })
            .collect()
    };
    let (threshold, band) = match tag {
        RegimeTag::GInfPositive { g_inf } => (0.0, opts.margin * g_inf),
        RegimeTag::GToZeroSgToC { .. } => (p - 1.0, opts.band(p - 1.0)),
        _ => (0.0, opts.margin),
    };
    let reps: Vec<HypothesisReport> = f
        .sample_points()
        .into_iter()
        .map(|x| {
            trend_report(Condition::RegimeAr, p, s, &ar_series(x), false, opts, |t, last| {
                trend::exceeds_with_band(t, last, threshold, band)
            })
        })
        .collect();
    let mut ar = worst_case(reps);
    ar.note(format!("regime {}", tag.name()));
    out.push(ar);

    if let RegimeTag::GToZeroSgToC { c } = *tag {
        let l = p - 1.0 + c;
        let reps = f
            .sample_points()
            .into_iter()
            .map(|x| {
                trend_report(
                    Condition::RegimeArSufficient,
                    p,
                    s,
                    &ar_series(x),
                    false,
                    opts,
                    |t, last| trend::exceeds(t, last, l, opts),
                )
            })
            .collect();
        let mut rep = worst_case(reps);
        rep.note(format!("threshold p - 1 + c = {l:.6}"));
        out.push(rep);
    }
    for rep in &mut out {
        if let Some(t) = &prof.truncated {
            rep.note(t);
        }
    }
    Ok(out)
}

/// General and regime-specific verdicts side by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub regime: RegimeTag,
    pub general: Vec<HypothesisReport>,
    pub specific: Vec<HypothesisReport>,
    /// One entry per holds-versus-fails disagreement.
    pub disagreements: Vec<String>,
}

impl CrossValidation {
    pub fn agrees(&self) -> bool {
        self.disagreements.is_empty()
    }
}

/// Runs the general subcritical and AR' checks and the regime checks, and
/// lists conflicting verdicts. Inconclusive results never conflict.
pub fn cross_validate(
    g: &NonlinearityG,
    f: &SourceF,
    p: f64,
    n: u32,
    opts: &TrendOptions,
) -> Result<CrossValidation, HypothesisError> {
    let tag = classify_regime(g, opts);
    if let RegimeTag::Unclassified { note } = &tag {
        return Err(HypothesisError::InvalidParameter(format!(
            "g could not be classified: {note}"
        )));
    }
    let general = vec![
        check_subcritical_exists(g, f, p, n, opts)?,
        check_ar_prime(g, f, p, opts)?,
    ];
    let specific = check_regime_conditions(g, f, p, n, &tag, None, opts)?;
    let mut disagreements = Vec::new();
    for (gen, cond) in general.iter().zip([Condition::RegimeSc, Condition::RegimeAr]) {
        if let Some(spec) = specific.iter().find(|r| r.condition == cond) {
            let conflict = matches!(
                (gen.verdict, spec.verdict),
                (Verdict::Holds, Verdict::Fails) | (Verdict::Fails, Verdict::Holds)
            );
            if conflict {
                disagreements.push(format!(
                    "{} {} but {} {}",
                    gen.condition, gen.verdict, spec.condition, spec.verdict
                ));
            }
        }
    }
    Ok(CrossValidation {
        regime: tag,
        general,
        specific,
        disagreements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::{FSpec, GSpec};

    fn o() -> TrendOptions {
        TrendOptions::default()
    }

    #[test]
    fn classifies_builtin_families() {
        let g = GSpec::Constant { c: 2.0 }.build(2.0).unwrap();
        assert_eq!(classify_regime(&g, &o()), RegimeTag::GInfPositive { g_inf: 2.0 });
        let g = GSpec::PowerDecay { c: 1.0, alpha: 0.5 }.build(2.0).unwrap();
        assert_eq!(classify_regime(&g, &o()), RegimeTag::GToZeroSgToInf);
        let g = GSpec::Power { q: 1.0, c: 1.0 }.build(2.0).unwrap();
        assert_eq!(classify_regime(&g, &o()), RegimeTag::GToInfLogDerivBounded);
        let g = GSpec::PowerDecay { c: 3.0, alpha: 1.0 }.build(2.0).unwrap();
        match classify_regime(&g, &o()) {
            RegimeTag::GToZeroSgToC { c } => assert!((c - 3.0).abs() < 1e-6, "{c}"),
            t => panic!("{t:?}"),
        }
        let g = GSpec::PowerDecay { c: 1.0, alpha: 2.0 }.build(2.0).unwrap();
        assert_eq!(classify_regime(&g, &o()), RegimeTag::GToZeroSgToC { c: 0.0 });
        assert_eq!(
            classify_regime(&NonlinearityG::zero(), &o()),
            RegimeTag::GToZeroSgToC { c: 0.0 }
        );
        let g = GSpec::ShiftedRatio { scale: None }.build(3.0).unwrap();
        match classify_regime(&g, &o()) {
            RegimeTag::GInfPositive { g_inf } => assert!((g_inf - 2.0).abs() < 1e-6),
            t => panic!("{t:?}"),
        }
        let g = NonlinearityG::new("e^sqrt(s)", |s| s.sqrt().exp()).unwrap();
        assert!(matches!(classify_regime(&g, &o()), RegimeTag::Unclassified { .. }));
    }

    #[test]
    fn regime_tag_serialisation() {
        let t = RegimeTag::GToZeroSgToC { c: 1.0 };
        let js = serde_json::to_string(&t).unwrap();
        assert_eq!(js, r#"{"regime":"g_to_zero_sg_to_c","c":1.0}"#);
    }

    #[test]
    fn sg_to_c_conditions() {
        // g = C/(1+s), f = s^3, p = 2: s f'/f = 3 against p - 1 + C.
        let f = FSpec::Power { r: 4.0, mu: 1.0 }.build(2.0).unwrap();
        for (c, expect) in [(1.0, Verdict::Holds), (2.5, Verdict::Fails)] {
            let g = GSpec::PowerDecay { c, alpha: 1.0 }.build(2.0).unwrap();
            let tag = classify_regime(&g, &o());
            let reps = check_regime_conditions(&g, &f, 2.0, 3, &tag, None, &o()).unwrap();
            assert_eq!(reps[0].verdict, Verdict::Holds, "{}", reps[0].notes);
            assert_eq!(reps[1].verdict, Verdict::Holds, "{}", reps[1].notes);
            assert_eq!(reps[2].condition, Condition::RegimeArSufficient);
            assert_eq!(reps[2].verdict, expect, "C = {c}: {}", reps[2].notes);
        }
    }

    #[test]
    fn cross_validation_agrees() {
        let cases = [
            (
                GSpec::Constant { c: 1.0 },
                FSpec::PowerExp {
                    q: 2.0,
                    c2: 2.0,
                    mu: 1.0,
                },
            ),
            (GSpec::Constant { c: 1.0 }, FSpec::Power { r: 3.0, mu: 1.0 }),
            (GSpec::Zero, FSpec::Power { r: 4.0, mu: 1.0 }),
        ];
        let mut verdicts = Vec::new();
        for (g, f) in cases {
            let g = g.build(2.0).unwrap();
            let f = f.build(2.0).unwrap();
            let cv = cross_validate(&g, &f, 2.0, 3, &o()).unwrap();
            assert!(cv.agrees(), "{:?}", cv.disagreements);
            verdicts.push((cv.general[1].verdict, cv.specific[1].verdict));
        }
        assert_eq!(verdicts[0], (Verdict::Holds, Verdict::Holds));
        assert_eq!(verdicts[1], (Verdict::Fails, Verdict::Fails));
        assert_eq!(verdicts[2], (Verdict::Holds, Verdict::Holds));
    }
}
