use std::fmt;
use std::sync::Arc;

use crate::error::TransformError;
use crate::transform::TransformedProblem;

/// Right-hand side `h(x, s)` of `-Delta_p v = lambda h(x, v)` and its
/// primitive `H(x, s) = int_0^s h(x, t) dt`.
///
/// Implementations must extend `h` by zero for `s < 0`.
pub trait Reaction: Send + Sync + fmt::Debug {
    fn h(&self, x: f64, s: f64) -> Result<f64, TransformError>;

    fn big_h(&self, x: f64, s: f64) -> Result<f64, TransformError>;

    /// `dh/ds`; central differences unless overridden.
    fn dh(&self, x: f64, s: f64) -> Result<f64, TransformError> {
        let eps = 1e-6 * (1.0 + s.abs());
        if s > eps {
            Ok((self.h(x, s + eps)? - self.h(x, s - eps)?) / (2.0 * eps))
        } else if s >= 0.0 {
            Ok((self.h(x, s + eps)? - self.h(x, s)?) / eps)
        } else {
            Ok(0.0)
        }
    }

    /// Largest argument at which `h` and `H` can be evaluated.
    fn v_max(&self) -> f64 {
        f64::INFINITY
    }
}

type Scalar2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A reaction given directly by closures for `h` and `H`.
#[derive(Clone)]
pub struct ClosureReaction {
    label: String,
    h: Scalar2,
    big_h: Scalar2,
    dh: Option<Scalar2>,
}

impl fmt::Debug for ClosureReaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClosureReaction").field("label", &self.label).finish()
    }
}

impl ClosureReaction {
    /// `h` and `H` are only called with `s >= 0`.
    pub fn new<H, P>(label: impl Into<String>, h: H, big_h: P) -> Self
    where
        H: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        P: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            h: Arc::new(h),
            big_h: Arc::new(big_h),
            dh: None,
        }
    }

    pub fn with_derivative<D>(mut self, dh: D) -> Self
    where
        D: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        self.dh = Some(Arc::new(dh));
        self
    }

    /// `h(s) = s^a` for `a >= 1` (or `a > 0` away from zero).
    pub fn power(a: f64) -> Self {
        Self::new(
            format!("s^{a}"),
            move |_, s| s.powf(a),
            move |_, s| s.powf(a + 1.0) / (a + 1.0),
        )
        .with_derivative(move |_, s| if s > 0.0 { a * s.powf(a - 1.0) } else { 0.0 })
    }

    /// `h = 0`.
    pub fn zero() -> Self {
        Self::new("0", |_, _| 0.0, |_, _| 0.0).with_derivative(|_, _| 0.0)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

fn checked(v: f64, s: f64) -> Result<f64, TransformError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(TransformError::Overflow {
            at: s,
            usable: f64::NAN,
        })
    }
}

impl Reaction for ClosureReaction {
    fn h(&self, x: f64, s: f64) -> Result<f64, TransformError> {
        if s < 0.0 {
            return Ok(0.0);
        }
        checked((self.h)(x, s), s)
    }

    fn big_h(&self, x: f64, s: f64) -> Result<f64, TransformError> {
        if s <= 0.0 {
            return Ok(0.0);
        }
        checked((self.big_h)(x, s), s)
    }

    fn dh(&self, x: f64, s: f64) -> Result<f64, TransformError> {
        match &self.dh {
            Some(d) if s >= 0.0 => checked(d(x, s), s),
            Some(_) => Ok(0.0),
            None => {
                let eps = 1e-6 * (1.0 + s.abs());
                if s > eps {
                    Ok((self.h(x, s + eps)? - self.h(x, s - eps)?) / (2.0 * eps))
                } else if s >= 0.0 {
                    Ok((self.h(x, s + eps)? - self.h(x, s)?) / eps)
                } else {
                    Ok(0.0)
                }
            }
        }
    }
}

impl Reaction for TransformedProblem {
    fn h(&self, x: f64, s: f64) -> Result<f64, TransformError> {
        TransformedProblem::h(self, x, s)
    }

    fn big_h(&self, x: f64, s: f64) -> Result<f64, TransformError> {
        TransformedProblem::big_h(self, x, s)
    }

    /// `dh/dv = e^{G(t)} (g f + f') / A'(t)` at `t = A^{-1}(v)`.
    fn dh(&self, x: f64, v: f64) -> Result<f64, TransformError> {
        if v < 0.0 {
            return Ok(0.0);
        }
        let f = self.source();
        if !f.has_derivative() {
            let eps = 1e-6 * (1.0 + v);
            let lo = (v - eps).max(0.0);
            return Ok((self.h(x, v + eps)? - self.h(x, lo)?) / (v + eps - lo));
        }
        let t = self.table().invert_a(v)?;
        let big_g = self.table().big_g_at(t)?;
        let pm1 = self.p() - 1.0;
        let df = f.derivative(x, t).unwrap_or(0.0);
        let val = (big_g * (1.0 - 1.0 / pm1)).exp() * (self.g().value(t) * f.value(x, t) + df);
        checked(val, t)
    }

    fn v_max(&self) -> f64 {
        TransformedProblem::v_max(self)
    }
}
