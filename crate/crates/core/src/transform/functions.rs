use std::fmt;
use std::sync::Arc;

use crate::error::{QuadratureError, TransformError};
use crate::quadrature::{adaptive_simpson, gauss_legendre5};

pub(crate) type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub(crate) type SourceFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Points at which construction-time invariants are probed.
const PROBE_S: [f64; 16] = [
    0.0, 1e-6, 1e-3, 0.01, 0.1, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.5, 8.0, 10.0,
];

fn fd_agrees(fd: f64, exact: f64) -> bool {
    (fd - exact).abs() <= 1e-4 * (1.0 + fd.abs().max(exact.abs()))
}

/// Gradient coefficient `g : [0, inf) -> [0, inf)`.
#[derive(Clone)]
pub struct NonlinearityG {
    eval: ScalarFn,
    deriv: Option<ScalarFn>,
    primitive: Option<ScalarFn>,
    label: String,
}

impl fmt::Debug for NonlinearityG {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonlinearityG")
            .field("label", &self.label)
            .field("has_derivative", &self.deriv.is_some())
            .finish()
    }
}

impl NonlinearityG {
    /// Wraps `eval`, rejecting functions that are negative or non-finite at
    /// any probe point.
    pub fn new<F>(label: impl Into<String>, eval: F) -> Result<Self, TransformError>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let label = label.into();
        for &s in &PROBE_S {
            let v = eval(s);
            if !v.is_finite() || v < 0.0 {
                return Err(TransformError::InvalidFunction(format!(
                    "g = {label} must be finite and non-negative, g({s}) = {v}"
                )));
            }
        }
        Ok(Self {
            eval: Arc::new(eval),
            deriv: None,
            primitive: None,
            label,
        })
    }

    /// The identically zero coefficient (no gradient term).
    pub fn zero() -> Self {
        Self {
            eval: Arc::new(|_| 0.0),
            deriv: Some(Arc::new(|_| 0.0)),
            primitive: Some(Arc::new(|_| 0.0)),
            label: "0".into(),
        }
    }

    /// Attaches `g'`, checked against central differences of `g`.
    pub fn with_derivative<F>(mut self, deriv: F) -> Result<Self, TransformError>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        for &s in PROBE_S.iter().filter(|&&s| s >= 1e-3) {
            let h = 1e-5 * (1.0 + s);
            let fd = ((self.eval)(s + h) - (self.eval)(s - h)) / (2.0 * h);
            let d = deriv(s);
            if !fd_agrees(fd, d) {
                return Err(TransformError::InvalidFunction(format!(
                    "derivative of g = {} disagrees with finite differences at s = {s}: {d} vs {fd}",
                    self.label
                )));
            }
        }
        self.deriv = Some(Arc::new(deriv));
        Ok(self)
    }

    /// Attaches a closed-form antiderivative with `G(0) = 0`, checked
    /// against adaptive quadrature of `g`.
    pub fn with_primitive<F>(mut self, primitive: F) -> Result<Self, TransformError>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if primitive(0.0).abs() > 1e-14 {
            return Err(TransformError::InvalidFunction(format!(
                "primitive of g = {} must vanish at 0",
                self.label
            )));
        }
        for s in [0.5, 2.0, 7.0] {
            let q = adaptive_simpson(|t| (self.eval)(t), 0.0, s, 1e-12)?;
            let c = primitive(s);
            if (q - c).abs() > 1e-7 * (1.0 + q.abs()) {
                return Err(TransformError::InvalidFunction(format!(
                    "primitive of g = {} disagrees with quadrature at s = {s}: {c} vs {q}",
                    self.label
                )));
            }
        }
        self.primitive = Some(Arc::new(primitive));
        Ok(self)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn value(&self, s: f64) -> f64 {
        (self.eval)(s)
    }

    pub fn derivative(&self, s: f64) -> Option<f64> {
        self.deriv.as_ref().map(|d| d(s))
    }

    pub fn has_derivative(&self) -> bool {
        self.deriv.is_some()
    }

    /// Closed-form `G(s)` when one was attached.
    pub fn closed_primitive(&self, s: f64) -> Option<f64> {
        self.primitive.as_ref().map(|p| p(s))
    }

    /// `int_a^b g`, from the closed form when it is numerically safe and by
    /// adaptive quadrature otherwise.
    pub fn increment(&self, a: f64, b: f64) -> Result<f64, QuadratureError> {
        if a == b {
            return Ok(0.0);
        }
        if let Some(p) = &self.primitive {
            let (ga, gb) = (p(a), p(b));
            let diff = gb - ga;
            // Subtracting two huge primitives loses the increment's digits.
            if diff.is_finite() && gb.abs().max(ga.abs()) <= 1e3 * diff.abs().max(1e-300) {
                return Ok(diff);
            }
        }
        let value = |t: f64| self.value(t);
        let one = gauss_legendre5(value, a, b);
        let m = 0.5 * (a + b);
        let two = gauss_legendre5(value, a, m) + gauss_legendre5(value, m, b);
        if (one - two).abs() <= 1e-14 * two.abs() {
            return Ok(two);
        }
        let ga = self.value(a);
        let gb = self.value(b);
        let scale = (b - a).abs() * 0.5 * (ga + gb);
        adaptive_simpson(|t| self.value(t), a, b, 1e-13 * scale.max(1e-3))
    }
}

/// Source term `f(x, s) >= 0`.
///
/// `x` is the spatial coordinate (the abscissa on an interval, the radius on
/// a ball). An empty `x_samples` list marks the source as x-independent.
#[derive(Clone)]
pub struct SourceF {
    eval: SourceFn,
    deriv_s: Option<SourceFn>,
    ln_eval: Option<SourceFn>,
    log_deriv: Option<SourceFn>,
    x_samples: Vec<f64>,
    label: String,
}

impl fmt::Debug for SourceF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SourceF")
            .field("label", &self.label)
            .field("x_samples", &self.x_samples)
            .field("has_derivative", &self.deriv_s.is_some())
            .finish()
    }
}

impl SourceF {
    /// An x-dependent source sampled at `x_samples` by the hypothesis checks.
    pub fn new<F>(label: impl Into<String>, eval: F, x_samples: Vec<f64>) -> Result<Self, TransformError>
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        let label = label.into();
        let xs: Vec<f64> = if x_samples.is_empty() {
            vec![0.0]
        } else {
            x_samples.clone()
        };
        for &x in &xs {
            for &s in &PROBE_S {
                let v = eval(x, s);
                if !v.is_finite() || v < 0.0 {
                    return Err(TransformError::InvalidFunction(format!(
                        "f = {label} must be finite and non-negative, f({x}, {s}) = {v}"
                    )));
                }
            }
        }
        Ok(Self {
            eval: Arc::new(eval),
            deriv_s: None,
            ln_eval: None,
            log_deriv: None,
            x_samples,
            label,
        })
    }

    /// An x-independent source `f(s)`.
    pub fn uniform<F>(label: impl Into<String>, eval: F) -> Result<Self, TransformError>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(label, move |_, s| eval(s), Vec::new())
    }

    /// Attaches `df/ds`, checked against central differences.
    pub fn with_derivative<F>(mut self, deriv: F) -> Result<Self, TransformError>
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        for x in self.sample_points() {
            for &s in PROBE_S.iter().filter(|&&s| s >= 1e-3) {
                let h = 1e-5 * (1.0 + s);
                let fd = ((self.eval)(x, s + h) - (self.eval)(x, s - h)) / (2.0 * h);
                let d = deriv(x, s);
                if !fd_agrees(fd, d) {
                    return Err(TransformError::InvalidFunction(format!(
                        "s-derivative of f = {} disagrees with finite differences at ({x}, {s}): {d} vs {fd}",
                        self.label
                    )));
                }
            }
        }
        self.deriv_s = Some(Arc::new(deriv));
        Ok(self)
    }

    /// Attaches overflow-free forms: `ln f` and the logarithmic derivative
    /// `f'/f`, used wherever `f` enters a quotient at large `s`.
    pub fn with_log_forms<L, D>(mut self, ln_eval: L, log_deriv: D) -> Result<Self, TransformError>
    where
        L: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        for x in self.sample_points() {
            for &s in PROBE_S.iter().filter(|&&s| s >= 1e-3) {
                let v = (self.eval)(x, s);
                if v > 0.0 {
                    let l = ln_eval(x, s);
                    if (l - v.ln()).abs() > 1e-9 * (1.0 + l.abs()) {
                        return Err(TransformError::InvalidFunction(format!(
                            "ln f for {} disagrees at ({x}, {s}): {l} vs {}",
                            self.label,
                            v.ln()
                        )));
                    }
                    if let Some(d) = &self.deriv_s {
                        let ld = log_deriv(x, s);
                        let want = d(x, s) / v;
                        if (ld - want).abs() > 1e-9 * (1.0 + want.abs()) {
                            return Err(TransformError::InvalidFunction(format!(
                                "f'/f for {} disagrees at ({x}, {s}): {ld} vs {want}",
                                self.label
                            )));
                        }
                    }
                }
            }
        }
        self.ln_eval = Some(Arc::new(ln_eval));
        self.log_deriv = Some(Arc::new(log_deriv));
        Ok(self)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn value(&self, x: f64, s: f64) -> f64 {
        (self.eval)(x, s)
    }

    pub fn derivative(&self, x: f64, s: f64) -> Option<f64> {
        self.deriv_s.as_ref().map(|d| d(x, s))
    }

    pub fn has_derivative(&self) -> bool {
        self.deriv_s.is_some()
    }

    /// `ln f(x, s)`; `-inf` where `f` vanishes.
    pub fn ln_value(&self, x: f64, s: f64) -> f64 {
        match &self.ln_eval {
            Some(l) => l(x, s),
            None => (self.eval)(x, s).ln(),
        }
    }

    /// `f'/f` when a derivative is known.
    pub fn log_derivative(&self, x: f64, s: f64) -> Option<f64> {
        match (&self.log_deriv, &self.deriv_s) {
            (Some(ld), _) => Some(ld(x, s)),
            (None, Some(d)) => Some(d(x, s) / (self.eval)(x, s)),
            (None, None) => None,
        }
    }

    pub fn is_x_independent(&self) -> bool {
        self.x_samples.is_empty()
    }

    pub fn x_samples(&self) -> &[f64] {
        &self.x_samples
    }

    /// Spatial points used for worst-case checks (a single dummy point for
    /// x-independent sources).
    pub fn sample_points(&self) -> Vec<f64> {
        if self.x_samples.is_empty() {
            vec![0.0]
        } else {
            self.x_samples.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_negative_g() {
        let e = NonlinearityG::new("-1", |_| -1.0).unwrap_err();
        assert!(matches!(e, TransformError::InvalidFunction(_)));
    }

    #[test]
    fn rejects_wrong_derivative() {
        let g = NonlinearityG::new("s^2", |s| s * s).unwrap();
        assert!(g.clone().with_derivative(|s| 2.0 * s).is_ok());
        assert!(g.with_derivative(|s| 3.0 * s).is_err());
    }

    #[test]
    fn rejects_negative_source() {
        assert!(SourceF::uniform("s-1", |s| s - 1.0).is_err());
        assert!(SourceF::new("x s", |x, s| x * s, vec![-1.0, 1.0]).is_err());
    }

    #[test]
    fn increment_uses_quadrature_when_primitive_cancels() {
        let g = NonlinearityG::new("s", |s| s)
            .unwrap()
            .with_primitive(|s| 0.5 * s * s)
            .unwrap();
        let a = 1.0e9;
        let b = a + 1e-3;
        let d = b - a;
        let inc = g.increment(a, b).unwrap();
        let exact = a * d + 0.5 * d * d;
        assert!((inc - exact).abs() <= 1e-12 * exact, "{inc} vs {exact}");
    }

    #[test]
    fn log_forms_default_to_plain_evaluation() {
        let f = SourceF::uniform("s^2", |s| s * s)
            .unwrap()
            .with_derivative(|_, s| 2.0 * s)
            .unwrap();
        assert!((f.ln_value(0.0, 3.0) - 9f64.ln()).abs() < 1e-14);
        assert!((f.log_derivative(0.0, 2.0).unwrap() - 1.0).abs() < 1e-14);
    }
}
