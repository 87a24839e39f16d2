//! One-dimensional quadrature used throughout the crate.
//!
//! The workhorse is an adaptive Simpson rule driven by an explicit, bounded
//! interval stack. A fixed 5-point Gauss-Legendre rule covers short
//! sub-cells where the integrand is known to be smooth.

use crate::error::QuadratureError;

/// Deepest bisection level the adaptive rule will attempt.
pub const MAX_DEPTH: u32 = 60;
/// Upper bound on the number of pending intervals.
pub const MAX_STACK: usize = 4096;
/// Upper bound on accepted + rejected intervals for a single integral.
pub const MAX_INTERVALS: usize = 2_000_000;

struct Interval {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn checked<F: Fn(f64) -> f64>(f: &F, t: f64) -> Result<f64, QuadratureError> {
    let v = f(t);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(QuadratureError::NonFinite { at: t })
    }
}

/// Adaptive Simpson integral of `f` over `[a, b]` with absolute tolerance `tol`.
///
/// Intervals are accepted once the two-panel and one-panel estimates agree
/// within `15 * tol_local`, and the Richardson-corrected value is used.
/// Reversed limits give the negated integral.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64, QuadratureError> {
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return adaptive_simpson(f, b, a, tol).map(|v| -v);
    }
    let tol = tol.max(f64::MIN_POSITIVE);
    let fa = checked(&f, a)?;
    let fb = checked(&f, b)?;
    let m = 0.5 * (a + b);
    let fm = checked(&f, m)?;
    let mut stack = vec![Interval {
        a,
        b,
        fa,
        fm,
        fb,
        whole: simpson(a, b, fa, fm, fb),
        tol,
        depth: 0,
    }];
    let mut total = 0.0;
    // Kahan compensation keeps sums of many tiny accepted panels honest.
    let mut comp = 0.0;
    let mut visited = 0usize;
    while let Some(iv) = stack.pop() {
        visited += 1;
        if visited > MAX_INTERVALS {
            return Err(QuadratureError::NotConverged { a: iv.a, b: iv.b });
        }
        let m = 0.5 * (iv.a + iv.b);
        let lm = 0.5 * (iv.a + m);
        let rm = 0.5 * (m + iv.b);
        let flm = checked(&f, lm)?;
        let frm = checked(&f, rm)?;
        let left = simpson(iv.a, m, iv.fa, flm, iv.fm);
        let right = simpson(m, iv.b, iv.fm, frm, iv.fb);
        let delta = left + right - iv.whole;
        if delta.abs() <= 15.0 * iv.tol || (m - iv.a) <= 16.0 * f64::EPSILON * iv.a.abs().max(1.0) {
            let y = left + right + delta / 15.0 - comp;
            let t = total + y;
            comp = (t - total) - y;
            total = t;
            continue;
        }
        if iv.depth + 1 >= MAX_DEPTH || stack.len() + 2 > MAX_STACK {
            return Err(QuadratureError::NotConverged { a: iv.a, b: iv.b });
        }
        let half = 0.5 * iv.tol;
        stack.push(Interval {
            a: m,
            b: iv.b,
            fa: iv.fm,
            fm: frm,
            fb: iv.fb,
            whole: right,
            tol: half,
            depth: iv.depth + 1,
        });
        stack.push(Interval {
            a: iv.a,
            b: m,
            fa: iv.fa,
            fm: flm,
            fb: iv.fm,
            whole: left,
            tol: half,
            depth: iv.depth + 1,
        });
    }
    Ok(total)
}

const GL5_NODES: [f64; 5] = [
    0.0,
    0.538_469_310_105_683_1,
    -0.538_469_310_105_683_1,
    0.906_179_845_938_664,
    -0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_08,
    0.236_926_885_056_189_08,
];

/// Fixed 5-point Gauss-Legendre rule on `[a, b]` (exact for degree 9).
pub fn gauss_legendre5<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    GL5_NODES
        .iter()
        .zip(GL5_WEIGHTS.iter())
        .map(|(x, w)| w * f(c + h * x))
        .sum::<f64>()
        * h
}

/// `ln(e^a + e^b)` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}
