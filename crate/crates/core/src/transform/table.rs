use serde::Serialize;

use super::functions::NonlinearityG;
use crate::error::TransformError;
use crate::quadrature::adaptive_simpson;

/// First positive node of every table.
pub const FIRST_NODE: f64 = 1e-9;
/// Geometric growth of the base grid.
pub const GRID_RATIO: f64 = 1.05;
/// Largest allowed ratio `A'(s_{i+1}) / A'(s_i)` on one cell.
pub const MAX_CELL_RATIO: f64 = 1.01;
/// Largest `G/(p-1)` the table accepts before declaring overflow.
pub const MAX_EXPONENT: f64 = 700.0;
const MAX_CELLS: usize = 4_000_000;

/// Tabulated change of variable `A(s) = int_0^s exp(G/(p-1))` on `[0, s_max]`.
///
/// Between nodes `A` is a monotone cubic Hermite interpolant built from the
/// exact nodal derivatives `A' = exp(G/(p-1))`.
#[derive(Debug, Clone)]
pub struct TransformTable {
    p: f64,
    s: Vec<f64>,
    big_g: Vec<f64>,
    a: Vec<f64>,
    ap: Vec<f64>,
    quad_tol: f64,
    g: NonlinearityG,
}

/// Plain-data view of a table, used for output.
#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub s: f64,
    pub big_g: f64,
    pub a: f64,
    pub a_prime: f64,
}

enum Stop {
    Argument(f64),
    Value(f64),
}

impl TransformTable {
    /// Tabulates `A` on `[0, s_max]`. Fails with [`TransformError::Overflow`]
    /// if `exp(G/(p-1))` leaves the representable range first.
    pub fn build(g: &NonlinearityG, p: f64, s_max: f64, tol: f64) -> Result<Self, TransformError> {
        if !(s_max > 0.0 && s_max.is_finite()) {
            return Err(TransformError::InvalidParameter(format!(
                "s_max must be positive and finite, got {s_max}"
            )));
        }
        let (table, overflow) = Self::build_inner(g, p, Stop::Argument(s_max), tol)?;
        match overflow {
            Some(at) => Err(TransformError::Overflow {
                at,
                usable: table.s_max(),
            }),
            None => Ok(table),
        }
    }

    /// Tabulates `A` until `A(s) >= v_target`. When the exponent overflows
    /// first, the truncated table is returned; check [`Self::a_max`].
    pub fn build_to_value(g: &NonlinearityG, p: f64, v_target: f64, tol: f64) -> Result<Self, TransformError> {
        if !(v_target > 0.0 && v_target.is_finite()) {
            return Err(TransformError::InvalidParameter(format!(
                "target value must be positive and finite, got {v_target}"
            )));
        }
        Self::build_inner(g, p, Stop::Value(v_target), tol).map(|(t, _)| t)
    }

    fn build_inner(g: &NonlinearityG, p: f64, stop: Stop, tol: f64) -> Result<(Self, Option<f64>), TransformError> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(TransformError::InvalidParameter(format!("p must exceed 1, got {p}")));
        }
        if !(tol > 0.0) {
            return Err(TransformError::InvalidParameter(format!(
                "tol must be positive, got {tol}"
            )));
        }
        let pm1 = p - 1.0;
        let max_cell_log = MAX_CELL_RATIO.ln();
        let mut s = vec![0.0];
        let mut big_g = vec![0.0];
        let mut a = vec![0.0];
        let mut ap = vec![1.0];
        let mut overflow = None;
        loop {
            let i = s.len() - 1;
            let (si, gi, ai) = (s[i], big_g[i], a[i]);
            match stop {
                Stop::Argument(m) if si >= m => break,
                Stop::Value(v) if ai >= v => break,
                _ => {}
            }
            if s.len() > MAX_CELLS {
                return Err(TransformError::InvalidFunction(format!(
                    "transform table exceeded {MAX_CELLS} cells before s = {si}"
                )));
            }
            let mut next = if si == 0.0 { FIRST_NODE } else { si * GRID_RATIO };
            if let Stop::Argument(m) = stop {
                next = next.min(m);
            }
            // Shrink the cell until the exponent changes by at most ln(MAX_CELL_RATIO).
            let mut inc = g.increment(si, next)?;
            while inc / pm1 > max_cell_log {
                next = si + (next - si) * 0.9 * max_cell_log * pm1 / inc;
                inc = g.increment(si, next)?;
            }
            let g_next = gi + inc;
            if g_next / pm1 > MAX_EXPONENT || !g_next.is_finite() {
                overflow = Some(next);
                break;
            }
            let ap_i = ap[i];
            let cell = adaptive_simpson(
                |t| {
                    let e = g.increment(si, t).unwrap_or(f64::NAN);
                    ap_i * (e / pm1).exp()
                },
                si,
                next,
                tol * (next - si) * ap_i,
            )?;
            s.push(next);
            big_g.push(g_next);
            a.push(ai + cell);
            ap.push((g_next / pm1).exp());
        }
        Ok((
            Self {
                p,
                s,
                big_g,
                a,
                ap,
                quad_tol: tol,
                g: g.clone(),
            },
            overflow,
        ))
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn quad_tol(&self) -> f64 {
        self.quad_tol
    }

    pub fn g(&self) -> &NonlinearityG {
        &self.g
    }

    pub fn s_grid(&self) -> &[f64] {
        &self.s
    }

    pub fn a_values(&self) -> &[f64] {
        &self.a
    }

    pub fn aprime_values(&self) -> &[f64] {
        &self.ap
    }

    pub fn g_values(&self) -> &[f64] {
        &self.big_g
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn s_max(&self) -> f64 {
        *self.s.last().expect("table has a node at 0")
    }

    pub fn a_max(&self) -> f64 {
        *self.a.last().expect("table has a node at 0")
    }

    pub fn rows(&self) -> Vec<TableRow> {
        (0..self.len())
            .map(|i| TableRow {
                s: self.s[i],
                big_g: self.big_g[i],
                a: self.a[i],
                a_prime: self.ap[i],
            })
            .collect()
    }

    /// Index `i` with `xs[i] <= x <= xs[i+1]`.
    fn cell(xs: &[f64], x: f64) -> usize {
        let k = xs.partition_point(|&v| v <= x);
        k.saturating_sub(1).min(xs.len() - 2)
    }

    /// Hermite slopes in the unit parameter, limited to keep the cubic monotone.
    fn slopes(&self, i: usize) -> (f64, f64) {
        let h = self.s[i + 1] - self.s[i];
        let delta = self.a[i + 1] - self.a[i];
        let (mut d0, mut d1) = (self.ap[i] * h, self.ap[i + 1] * h);
        if delta > 0.0 {
            let (al, be) = (d0 / delta, d1 / delta);
            let r2 = al * al + be * be;
            if r2 > 9.0 {
                let t = 3.0 / r2.sqrt();
                d0 *= t;
                d1 *= t;
            }
        }
        (d0, d1)
    }

    fn hermite(&self, i: usize, u: f64) -> (f64, f64) {
        let (d0, d1) = self.slopes(i);
        let (a0, a1) = (self.a[i], self.a[i + 1]);
        let u2 = u * u;
        let u3 = u2 * u;
        let val =
            (2.0 * u3 - 3.0 * u2 + 1.0) * a0 + (u3 - 2.0 * u2 + u) * d0 + (-2.0 * u3 + 3.0 * u2) * a1 + (u3 - u2) * d1;
        let der = (6.0 * u2 - 6.0 * u) * a0
            + (3.0 * u2 - 4.0 * u + 1.0) * d0
            + (6.0 * u - 6.0 * u2) * a1
            + (3.0 * u2 - 2.0 * u) * d1;
        (val, der)
    }

    /// `A(s)` for `0 <= s <= s_max`.
    pub fn eval_a(&self, s: f64) -> Result<f64, TransformError> {
        if s.is_nan() || s < 0.0 {
            return Err(TransformError::NegativeArgument(s));
        }
        if s > self.s_max() {
            return Err(TransformError::OutOfRange {
                what: "s",
                value: s,
                upper: self.s_max(),
            });
        }
        let i = Self::cell(&self.s, s);
        let h = self.s[i + 1] - self.s[i];
        let u = ((s - self.s[i]) / h).clamp(0.0, 1.0);
        Ok(self.hermite(i, u).0)
    }

    /// `A^{-1}(v)` for `0 <= v <= A(s_max)`.
    pub fn invert_a(&self, v: f64) -> Result<f64, TransformError> {
        if v.is_nan() || v < 0.0 {
            return Err(TransformError::NegativeArgument(v));
        }
        if v > self.a_max() {
            return Err(TransformError::OutOfRange {
                what: "v",
                value: v,
                upper: self.a_max(),
            });
        }
        let i = Self::cell(&self.a, v);
        let (a0, a1) = (self.a[i], self.a[i + 1]);
        let (s0, s1) = (self.s[i], self.s[i + 1]);
        if v == a0 {
            return Ok(s0);
        }
        if v == a1 {
            return Ok(s1);
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut u = (v - a0) / (a1 - a0);
        for _ in 0..100 {
            let (c, dc) = self.hermite(i, u);
            let r = c - v;
            if r == 0.0 {
                break;
            }
            if r > 0.0 {
                hi = u;
            } else {
                lo = u;
            }
            let mut next = u - r / dc;
            if !(dc > 0.0) || next <= lo || next >= hi {
                next = 0.5 * (lo + hi);
            }
            if (next - u).abs() <= 4.0 * f64::EPSILON * u.max(f64::MIN_POSITIVE) || hi - lo <= f64::EPSILON {
                u = next;
                break;
            }
            u = next;
        }
        Ok(s0 + u * (s1 - s0))
    }

    /// `G(t)` for `t` inside the table, from the nearest node below.
    pub fn big_g_at(&self, t: f64) -> Result<f64, TransformError> {
        if t.is_nan() || t < 0.0 {
            return Err(TransformError::NegativeArgument(t));
        }
        if t > self.s_max() {
            return Err(TransformError::OutOfRange {
                what: "s",
                value: t,
                upper: self.s_max(),
            });
        }
        let i = Self::cell(&self.s, t);
        Ok(self.big_g[i] + self.g.increment(self.s[i], t)?)
    }

    /// Node index of the cell containing `t`.
    pub(crate) fn cell_of(&self, t: f64) -> usize {
        Self::cell(&self.s, t)
    }
}
