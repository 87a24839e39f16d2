use std::sync::Arc;

use super::functions::{NonlinearityG, SourceF};
use super::table::TransformTable;
use crate::error::TransformError;
use crate::quadrature::{adaptive_simpson, gauss_legendre5};

/// The gradient-free nonlinearity `h(x, v) = e^{G(t)} f(x, t)`, `t = A^{-1}(v)`,
/// together with its primitive `H(x, v) = int_0^v h(x, w) dw`.
///
/// Both are extended by zero for `v < 0`.
#[derive(Debug, Clone)]
pub struct TransformedProblem {
    p: f64,
    table: Arc<TransformTable>,
    g: NonlinearityG,
    f: SourceF,
    /// Cumulative `H` at the table nodes, for x-independent sources. Only a
    /// finite prefix is stored.
    cumulative: Option<Vec<f64>>,
}

impl TransformedProblem {
    pub fn new(g: &NonlinearityG, f: &SourceF, table: Arc<TransformTable>) -> Result<Self, TransformError> {
        if table.g().label() != g.label() {
            return Err(TransformError::InvalidParameter(format!(
                "table was built for g = {} but the problem uses g = {}",
                table.g().label(),
                g.label()
            )));
        }
        let p = table.p();
        let mut out = Self {
            p,
            table,
            g: g.clone(),
            f: f.clone(),
            cumulative: None,
        };
        if f.is_x_independent() {
            out.cumulative = Some(out.build_cumulative()?);
        }
        Ok(out)
    }

    /// `e^{pG(t)/(p-1)} f(x, t)` on the cell starting at node `i`.
    fn mass_density(&self, x: f64, i: usize, t: f64) -> f64 {
        let s = self.table.s_grid();
        let gi = self.table.g_values()[i];
        let big_g = gi + self.g.increment(s[i], t).unwrap_or(f64::NAN);
        (self.p / (self.p - 1.0) * big_g).exp() * self.f.value(x, t)
    }

    fn build_cumulative(&self) -> Result<Vec<f64>, TransformError> {
        let s = self.table.s_grid();
        let tol = self.table.quad_tol();
        let mut k = Vec::with_capacity(s.len());
        k.push(0.0);
        for i in 0..s.len() - 1 {
            let lo = self.mass_density(0.0, i, s[i]);
            let hi = self.mass_density(0.0, i, s[i + 1]);
            if !(lo.is_finite() && hi.is_finite()) {
                break;
            }
            let scale = (s[i + 1] - s[i]) * lo.max(hi);
            let cell = match adaptive_simpson(
                |t| self.mass_density(0.0, i, t),
                s[i],
                s[i + 1],
                tol * scale.max(f64::MIN_POSITIVE),
            ) {
                Ok(c) => c,
                Err(_) => break,
            };
            let next = k[i] + cell;
            if !next.is_finite() {
                break;
            }
            k.push(next);
        }
        Ok(k)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn table(&self) -> &TransformTable {
        &self.table
    }

    pub fn shared_table(&self) -> Arc<TransformTable> {
        Arc::clone(&self.table)
    }

    pub fn g(&self) -> &NonlinearityG {
        &self.g
    }

    pub fn source(&self) -> &SourceF {
        &self.f
    }

    /// Largest `v` at which both `h` and `H` can be evaluated.
    pub fn v_max(&self) -> f64 {
        match &self.cumulative {
            Some(k) => self.table.a_values()[k.len() - 1],
            None => self.table.a_max(),
        }
    }

    /// `h(x, v)`; zero for `v <= 0`.
    pub fn h(&self, x: f64, v: f64) -> Result<f64, TransformError> {
        if v.is_nan() {
            return Err(TransformError::NegativeArgument(v));
        }
        if v <= 0.0 {
            return Ok(if v == 0.0 { self.f.value(x, 0.0) } else { 0.0 });
        }
        let t = self.table.invert_a(v)?;
        let val = self.table.big_g_at(t)?.exp() * self.f.value(x, t);
        if val.is_finite() {
            Ok(val)
        } else {
            Err(TransformError::Overflow {
                at: t,
                usable: self.table.s_max(),
            })
        }
    }

    /// `H(x, v) = int_0^v h(x, w) dw`; zero for `v <= 0`.
    pub fn big_h(&self, x: f64, v: f64) -> Result<f64, TransformError> {
        if v.is_nan() {
            return Err(TransformError::NegativeArgument(v));
        }
        if v <= 0.0 {
            return Ok(0.0);
        }
        let t = self.table.invert_a(v)?;
        let i = self.table.cell_of(t);
        let s = self.table.s_grid();
        let base = match &self.cumulative {
            Some(k) => {
                if i + 1 >= k.len() && t > s[k.len() - 1] {
                    return Err(TransformError::OutOfRange {
                        what: "v",
                        value: v,
                        upper: self.v_max(),
                    });
                }
                k[i]
            }
            None => {
                let mut acc = 0.0;
                for j in 0..i {
                    acc += gauss_legendre5(|u| self.mass_density(x, j, u), s[j], s[j + 1]);
                }
                acc
            }
        };
        let partial = gauss_legendre5(|u| self.mass_density(x, i, u), s[i], t);
        let val = base + partial;
        if val.is_finite() {
            Ok(val)
        } else {
            Err(TransformError::Overflow {
                at: t,
                usable: self.table.s_max(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::builtins::{FSpec, GSpec};

    fn problem(g: GSpec, f: FSpec, p: f64, v_max: f64) -> TransformedProblem {
        let g = g.build(p).unwrap();
        let f = f.build(p).unwrap();
        let t = TransformTable::build_to_value(&g, p, v_max, 1e-12).unwrap();
        TransformedProblem::new(&g, &f, Arc::new(t)).unwrap()
    }

    #[test]
    fn identity_transform_keeps_f() {
        let tp = problem(GSpec::Zero, FSpec::Power { r: 3.0, mu: 1.0 }, 2.0, 10.0);
        for v in [0.0, 0.5, 2.0, 7.5] {
            assert!((tp.h(0.0, v).unwrap() - v * v).abs() < 1e-10 * (1.0 + v * v));
            assert!((tp.big_h(0.0, v).unwrap() - v.powi(3) / 3.0).abs() < 1e-9 * (1.0 + v.powi(3)));
        }
    }

    #[test]
    fn exponential_transform() {
        let tp = problem(GSpec::Constant { c: 1.0 }, FSpec::Power { r: 3.0, mu: 1.0 }, 2.0, 50.0);
        for v in [0.3, 1.0, 10.0, 40.0] {
            let l = f64::ln_1p(v);
            let want = (1.0 + v) * l * l;
            assert!((tp.h(0.0, v).unwrap() - want).abs() < 1e-9 * want, "{v}");
        }
    }

    #[test]
    fn cumulative_matches_direct_quadrature() {
        let tp = problem(GSpec::Constant { c: 1.0 }, FSpec::Power { r: 3.0, mu: 1.0 }, 2.0, 50.0);
        let v = 17.0;
        let direct = adaptive_simpson(|w| tp.h(0.0, w).unwrap(), 0.0, v, 1e-10).unwrap();
        assert!((tp.big_h(0.0, v).unwrap() - direct).abs() < 1e-8 * direct);
    }

    #[test]
    fn negative_arguments_extend_by_zero() {
        let tp = problem(GSpec::Zero, FSpec::Constant { mu: 2.0 }, 2.0, 1.0);
        assert_eq!(tp.h(0.0, -1.0).unwrap(), 0.0);
        assert_eq!(tp.big_h(0.0, -1.0).unwrap(), 0.0);
        assert_eq!(tp.h(0.0, 0.0).unwrap(), 2.0);
    }
}
