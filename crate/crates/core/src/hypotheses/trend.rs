//! Tail analysis of sampled sequences `y_k = Q(s_k)` on geometric grids.
//!
//! The tail (last few samples) is classified as converging, diverging or
//! inconclusive. Geometric contraction of the increments is extrapolated
//! directly; slowly varying tails are fitted to increments `c x^(-a)` in
//! the log-variable `x = |ln s|`, where `a <= 1` means divergence.

use serde::{Deserialize, Serialize};

use super::Verdict;

/// Grid and threshold controls shared by all limit checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrendOptions {
    pub s_base: f64,
    pub ratio: f64,
    pub k_max: usize,
    pub tail: usize,
    pub margin: f64,
    pub eps_zero: f64,
}

impl Default for TrendOptions {
    fn default() -> Self {
        Self {
            s_base: 1.0,
            ratio: 2.0,
            k_max: 40,
            tail: 8,
            margin: 0.05,
            eps_zero: 1e-6,
        }
    }
}

impl TrendOptions {
    /// `s_base * ratio^k`, `k = 0..=k_max`.
    pub fn grid_to_infinity(&self) -> Vec<f64> {
        (0..=self.k_max)
            .map(|k| self.s_base * self.ratio.powi(k as i32))
            .collect()
    }

    /// `s_base * ratio^(-k)`, `k = 0..=k_max`.
    pub fn grid_to_zero(&self) -> Vec<f64> {
        (0..=self.k_max)
            .map(|k| self.s_base * self.ratio.powi(-(k as i32)))
            .collect()
    }

    /// `margin * max(|l|, 1)`.
    pub fn band(&self, l: f64) -> f64 {
        self.margin * l.abs().max(1.0)
    }
}

/// Classification of a tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Trend {
    Converges { limit: f64 },
    Diverges { upward: bool },
    Inconclusive(&'static str),
}

const CONTRACTION: f64 = 0.85;
const DIVERGENT_POWER: f64 = 1.2;
const CONVERGENT_POWER: f64 = 1.5;

/// Classifies the tail of `ys` sampled at progress variables `xs`
/// (`|ln s|`, increasing along the sequence).
pub fn classify(xs: &[f64], ys: &[f64], tail: usize) -> Trend {
    let n = ys.len().min(xs.len());
    let tail = tail.max(4);
    if n < tail {
        return Trend::Inconclusive("too few finite samples");
    }
    let y = &ys[n - tail..n];
    let x = &xs[n - tail..n];
    if y.iter().any(|v| !v.is_finite()) {
        return Trend::Inconclusive("non-finite sample in the tail");
    }
    let scale = y.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let noise = 1e-9 * scale;
    let d: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let last = y[tail - 1];
    if d.iter().rev().take(3).all(|v| v.abs() <= noise) {
        return Trend::Converges { limit: last };
    }
    let ups = d.iter().filter(|&&v| v > noise).count();
    let downs = d.iter().filter(|&&v| v < -noise).count();
    if ups > 0 && downs > 0 {
        let amp = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if amp <= 1e-6 * scale {
            return Trend::Converges {
                limit: y.iter().sum::<f64>() / tail as f64,
            };
        }
        return Trend::Inconclusive("oscillating tail");
    }
    let upward = ups > 0;
    let sign = if upward { 1.0 } else { -1.0 };
    let ratios: Vec<f64> = d
        .windows(2)
        .filter(|w| w[0].abs() > noise)
        .map(|w| w[1].abs() / w[0].abs())
        .collect();
    let recent = &ratios[ratios.len().saturating_sub(4)..];
    if !recent.is_empty() && recent.iter().all(|&r| r <= CONTRACTION) {
        let rho = recent.iter().sum::<f64>() / recent.len() as f64;
        let dl = *d.last().unwrap();
        return Trend::Converges {
            limit: last + dl * rho / (1.0 - rho),
        };
    }
    // Increments c x^(-a): least squares on (ln x_mid, ln |d|).
    let pts: Vec<(f64, f64)> = d
        .iter()
        .zip(x.windows(2))
        .filter(|(v, _)| v.abs() > noise)
        .map(|(v, w)| (0.5 * (w[0] + w[1]), v.abs()))
        .collect();
    if pts.len() < 3 || pts.iter().any(|(xm, _)| *xm <= 0.0) {
        return Trend::Inconclusive("tail increments cannot be fitted");
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (xm, v)| (a + xm.ln(), b + v.ln()));
    let (mx, my) = (sx / m, sy / m);
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), (xm, v)| {
        let dx = xm.ln() - mx;
        (a + dx * (v.ln() - my), b + dx * dx)
    });
    if !(sxx > 0.0) {
        return Trend::Inconclusive("degenerate tail spacing");
    }
    let a = -sxy / sxx;
    if a <= DIVERGENT_POWER {
        return Trend::Diverges { upward };
    }
    if a >= CONVERGENT_POWER {
        let c = (my + a * mx).exp();
        let step = x[tail - 1] - x[tail - 2];
        let rest = c / step * x[tail - 1].powf(1.0 - a) / (a - 1.0);
        return Trend::Converges {
            limit: last + sign * rest,
        };
    }
    Trend::Inconclusive("slowly varying tail")
}

/// Verdict for `lim Q > l` given a linear-scale trend and the last sample.
pub fn exceeds(trend: Trend, last: f64, l: f64, opts: &TrendOptions) -> (Verdict, Option<f64>) {
    exceeds_with_band(trend, last, l, opts.band(l))
}

/// [`exceeds`] with an explicit decision band. A limit within a fifth of
/// the band of `l` is taken to equal `l`, which fails the strict inequality.
pub fn exceeds_with_band(trend: Trend, last: f64, l: f64, band: f64) -> (Verdict, Option<f64>) {
    match trend {
        Trend::Diverges { upward: true } => (Verdict::Holds, Some(f64::INFINITY)),
        Trend::Diverges { upward: false } => (Verdict::Fails, Some(f64::NEG_INFINITY)),
        Trend::Converges { limit } => {
            let v = if limit > l + band && last > l + band {
                Verdict::Holds
            } else if limit < l + 0.2 * band {
                Verdict::Fails
            } else {
                Verdict::Inconclusive
            };
            (v, Some(limit))
        }
        Trend::Inconclusive(_) => (Verdict::Inconclusive, None),
    }
}

/// Verdict for `lim Q < l` given a linear-scale trend and the last sample.
pub fn below(trend: Trend, last: f64, l: f64, opts: &TrendOptions) -> (Verdict, Option<f64>) {
    let flipped = match trend {
        Trend::Converges { limit } => Trend::Converges { limit: -limit },
        Trend::Diverges { upward } => Trend::Diverges { upward: !upward },
        t => t,
    };
    let (v, lim) = exceeds_with_band(flipped, -last, -l, opts.band(l));
    (v, lim.map(|x| -x))
}

/// Verdict for `lim Q = 0` given a trend of `ln Q`.
pub fn vanishes(trend: Trend, opts: &TrendOptions) -> (Verdict, Option<f64>) {
    let cut = opts.eps_zero.ln();
    match trend {
        Trend::Diverges { upward: false } => (Verdict::Holds, Some(0.0)),
        Trend::Diverges { upward: true } => (Verdict::Fails, Some(f64::INFINITY)),
        Trend::Converges { limit } if limit < cut => (Verdict::Holds, Some(limit.exp())),
        Trend::Converges { limit } => (Verdict::Fails, Some(limit.exp())),
        Trend::Inconclusive(_) => (Verdict::Inconclusive, None),
    }
}

/// Verdict for `lim Q = +inf` given a trend of `ln Q`.
pub fn blows_up(trend: Trend) -> (Verdict, Option<f64>) {
    match trend {
        Trend::Diverges { upward: true } => (Verdict::Holds, Some(f64::INFINITY)),
        Trend::Diverges { upward: false } => (Verdict::Fails, Some(0.0)),
        Trend::Converges { limit } => (Verdict::Fails, Some(limit.exp())),
        Trend::Inconclusive(_) => (Verdict::Inconclusive, None),
    }
}

/// Describes a trend for report notes.
pub fn describe(trend: Trend) -> String {
    match trend {
        Trend::Converges { limit } => format!("tail converges (extrapolated {limit:.6e})"),
        Trend::Diverges { upward: true } => "tail diverges upward".to_string(),
        Trend::Diverges { upward: false } => "tail diverges downward".to_string(),
        Trend::Inconclusive(why) => format!("inconclusive: {why}"),
    }
}
