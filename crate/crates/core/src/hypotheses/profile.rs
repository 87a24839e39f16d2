//! Log-space evaluation of `A(s) = int_0^s e^(G/(p-1))` and of related
//! integrals at large `s`.
//!
//! With `phi = G/(p-1)` every integral is carried relative to its integrand
//! at the right end, `R(s) = A(s) e^(-phi(s)) = int_0^s e^(phi(t) - phi(s)) dt`,
//! which stays representable long after `A` itself overflows.

use crate::error::{HypothesisError, QuadratureError};
use crate::quadrature::{adaptive_simpson, gauss_legendre5};
use crate::transform::{NonlinearityG, SourceF};

/// Peak widths below this fraction of `s` use the Laplace expansion.
const LAPLACE_WIDTH: f64 = 1e-7;

/// Rounding noise of a difference of two quantities of magnitude `scale`.
fn noise(scale: f64) -> f64 {
    64.0 * f64::EPSILON * scale.abs()
}

/// `int_a^b f`, for an integrand concentrated at `b` with decay envelope
/// `env` (`env(b) = 1`), integrated in pieces of doubling width leftwards.
///
/// `rel_noise` and `abs_noise` bound the evaluation error of `f` (relative,
/// and absolute per unit length); tolerances never go below them.
pub(crate) fn backward_integral<F, E>(
    f: F,
    env: E,
    a: f64,
    b: f64,
    width: f64,
    rel_noise: f64,
    abs_noise: f64,
) -> Result<f64, QuadratureError>
where
    F: Fn(f64) -> f64,
    E: Fn(f64) -> f64,
{
    if b <= a {
        return Ok(0.0);
    }
    let floor = 64.0 * f64::EPSILON * b.abs();
    let mut w = if width.is_finite() && width > 0.0 {
        width.max(floor).min(b - a)
    } else {
        b - a
    };
    let mut total = 0.0f64;
    let mut hi = b;
    loop {
        let lo = (hi - w).max(a);
        let est = gauss_legendre5(&f, lo, hi);
        let tol = (1e-12f64.max(rel_noise) * est.abs())
            .max(1e-14 * total.abs())
            .max(abs_noise * (hi - lo))
            .max(1e-300);
        let piece = adaptive_simpson(&f, lo, hi, tol)?;
        total += piece;
        if lo <= a {
            break;
        }
        if env(lo) < 1e-20 && piece.abs() <= 1e-16 * total.abs().max(1e-300) {
            break;
        }
        hi = lo;
        w *= 2.0;
    }
    Ok(total)
}

/// Samples of `G`, `phi` and `ln R` on an increasing grid, truncated at the
/// first point where they stop being finite.
#[derive(Debug, Clone)]
pub struct GrowthProfile {
    p: f64,
    s: Vec<f64>,
    big_g: Vec<f64>,
    ln_r: Vec<f64>,
    g: NonlinearityG,
    /// Why the grid was truncated, if it was.
    pub(crate) truncated: Option<String>,
}

impl GrowthProfile {
    pub fn new(g: &NonlinearityG, p: f64, grid: &[f64]) -> Result<Self, HypothesisError> {
        if !(p > 1.0) {
            return Err(HypothesisError::InvalidParameter(format!("p must exceed 1, got {p}")));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.first().map_or(true, |&s| !(s > 0.0)) {
            return Err(HypothesisError::InvalidParameter(
                "grid must be positive and strictly increasing".into(),
            ));
        }
        let mut prof = Self {
            p,
            s: Vec::with_capacity(grid.len()),
            big_g: Vec::with_capacity(grid.len()),
            ln_r: Vec::with_capacity(grid.len()),
            g: g.clone(),
            truncated: None,
        };
        let k = p - 1.0;
        let (mut prev_s, mut prev_g, mut prev_r) = (0.0f64, 0.0f64, 0.0f64);
        for &s in grid {
            let step = match g.increment(prev_s, s) {
                Ok(v) => v,
                Err(e) => {
                    prof.truncated = Some(format!("G not computable beyond s = {prev_s}: {e}"));
                    break;
                }
            };
            let big_g = prev_g + step;
            let piece = prof.tail_of_a(prev_s, s);
            let r = match piece {
                Ok(piece) => prev_r * (-step / k).exp() + piece,
                Err(e) => {
                    prof.truncated = Some(format!("A not computable beyond s = {prev_s}: {e}"));
                    break;
                }
            };
            if !(big_g.is_finite() && r.is_finite() && r > 0.0) {
                prof.truncated = Some(format!("growth profile leaves the representable range at s = {s}"));
                break;
            }
            prof.s.push(s);
            prof.big_g.push(big_g);
            prof.ln_r.push(r.ln());
            prev_s = s;
            prev_g = big_g;
            prev_r = r;
        }
        Ok(prof)
    }

    /// `int_a^b e^(phi(t) - phi(b)) dt`.
    fn tail_of_a(&self, a: f64, b: f64) -> Result<f64, QuadratureError> {
        let k = self.p - 1.0;
        let rate = self.g.value(b) / k;
        if rate * b > 1.0 / LAPLACE_WIDTH && rate * (b - a) > 60.0 {
            let curv = self.g_prime(b) / k;
            if (curv / (rate * rate)).abs() < 1e-3 {
                return Ok(1.0 / rate + curv / rate.powi(3));
            }
        }
        let rel = |t: f64| self.phi_gap(t, b).map(|d| (-d).exp()).unwrap_or(0.0);
        backward_integral(rel, rel, a, b, 1.0 / rate, 0.0, 0.0)
    }

    /// `phi(b) - phi(t)` for `t <= b`.
    fn phi_gap(&self, t: f64, b: f64) -> Result<f64, QuadratureError> {
        Ok(self.g.increment(t, b)? / (self.p - 1.0))
    }

    fn g_prime(&self, s: f64) -> f64 {
        self.g.derivative(s).unwrap_or_else(|| {
            let h = 1e-6 * s.max(1.0);
            (self.g.value(s + h) - self.g.value((s - h).max(0.0))) / (s + h - (s - h).max(0.0))
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn big_g(&self) -> &[f64] {
        &self.big_g
    }

    pub fn phi(&self, k: usize) -> f64 {
        self.big_g[k] / (self.p - 1.0)
    }

    /// `ln R(s_k)` with `R = A e^(-phi)`.
    pub fn ln_r(&self, k: usize) -> f64 {
        self.ln_r[k]
    }

    /// `ln A(s_k)`.
    pub fn ln_a(&self, k: usize) -> f64 {
        self.phi(k) + self.ln_r[k]
    }

    pub fn g(&self) -> &NonlinearityG {
        &self.g
    }

    /// `ln |s_k|` progress variables for the trend classifier.
    pub fn progress(&self) -> Vec<f64> {
        self.s.iter().map(|s| s.ln().abs()).collect()
    }

    /// `M(s_k) = int_0^s (g(t) - g(s)) e^(phi(t) - phi(s)) dt`, so that
    /// `((p-1) e^phi - g A) e^(-phi) = (p-1) e^(-phi) + M`.
    pub fn curvature_integral(&self, k: usize) -> Result<f64, QuadratureError> {
        let b = self.s[k];
        let kk = self.p - 1.0;
        let gb = self.g.value(b);
        let rate = gb / kk;
        if rate * b > 1.0 / LAPLACE_WIDTH {
            let gp = self.g_prime(b);
            return Ok(-gp / (rate * rate));
        }
        let env = |t: f64| self.phi_gap(t, b).map(|d| (-d).exp()).unwrap_or(0.0);
        let f = |t: f64| (self.g.value(t) - gb) * env(t);
        backward_integral(f, env, 0.0, b, 1.0 / rate, 0.0, noise(gb))
    }

    /// `ln J(s_k)` for every grid point, where
    /// `J(s) = e^(-psi(s)) int_0^s e^(psi)` and `psi = p phi + ln f(x, .)`.
    pub fn ar_integrals(&self, f: &SourceF, x: f64) -> Result<Vec<f64>, QuadratureError> {
        let p = self.p;
        let kk = p - 1.0;
        let mut out = Vec::with_capacity(self.len());
        let (mut prev_s, mut prev_j, mut prev_lf) = (0.0f64, 0.0f64, f.ln_value(x, 0.0));
        for (k, &b) in self.s.iter().enumerate() {
            let lfb = f.ln_value(x, b);
            if !lfb.is_finite() {
                // f vanishes here: the relative integral is undefined.
                out.push(f64::NAN);
                prev_s = b;
                prev_j = 0.0;
                prev_lf = lfb;
                continue;
            }
            let step = self.big_g[k] - if k == 0 { 0.0 } else { self.big_g[k - 1] };
            let carry = if prev_j > 0.0 && prev_lf.is_finite() {
                prev_j * (-p * step / kk + prev_lf - lfb).exp()
            } else {
                0.0
            };
            let ld = f.log_derivative(x, b).unwrap_or(0.0);
            let rate = p * self.g.value(b) / kk + ld;
            let piece = if rate * b > 1.0 / LAPLACE_WIDTH && rate * (b - prev_s) > 60.0 {
                let h = 1e-4 * b;
                let ldd = match (f.log_derivative(x, b + h), f.log_derivative(x, b - h)) {
                    (Some(u), Some(l)) => (u - l) / (2.0 * h),
                    _ => 0.0,
                };
                let curv = p * self.g_prime(b) / kk + ldd;
                1.0 / rate + curv / rate.powi(3)
            } else {
                let rel = |t: f64| {
                    let lt = f.ln_value(x, t);
                    if !lt.is_finite() {
                        return 0.0;
                    }
                    match self.g.increment(t, b) {
                        Ok(d) => (-p * d / kk + lt - lfb).exp(),
                        Err(_) => 0.0,
                    }
                };
                let env = |t: f64| match self.g.increment(t, b) {
                    Ok(d) => (-p * d / kk).exp(),
                    Err(_) => 0.0,
                };
                let width = if rate > 0.0 { 1.0 / rate } else { b - prev_s };
                let rel_noise = noise(lfb);
                match backward_integral(rel, env, prev_s, b, width, rel_noise, 0.0) {
                    Ok(v) => v,
                    Err(_) => {
                        // Beyond the reach of the quadrature: leave the tail undefined.
                        out.resize(self.len(), f64::NAN);
                        return Ok(out);
                    }
                }
            };
            let j = carry + piece;
            out.push(j.ln());
            prev_s = b;
            prev_j = j;
            prev_lf = lfb;
        }
        Ok(out)
    }
}
