//! The change of variable `v = A(u)`, `A(s) = int_0^s exp(G(t)/(p-1)) dt`,
//! which removes the `g(u)|grad u|^p` term and turns the equation for `u`
//! into `-Delta_p v = h(x, v)`.

mod builtins;
mod functions;
mod problem;
mod table;

pub use builtins::{FSpec, GSpec};
pub use functions::{NonlinearityG, SourceF};
pub use problem::TransformedProblem;
pub use table::{TableRow, TransformTable, FIRST_NODE, GRID_RATIO, MAX_CELL_RATIO, MAX_EXPONENT};

use std::sync::Arc;

use crate::error::TransformError;
use crate::pde::Field;
use crate::quadrature::adaptive_simpson;

/// `G(s) = int_0^s g` by adaptive quadrature with absolute error `tol`.
pub fn big_g(g: &NonlinearityG, s: f64, tol: f64) -> Result<f64, TransformError> {
    if s.is_nan() || s < 0.0 {
        return Err(TransformError::NegativeArgument(s));
    }
    if !(tol > 0.0) {
        return Err(TransformError::InvalidParameter(format!(
            "tol must be positive, got {tol}"
        )));
    }
    Ok(adaptive_simpson(|t| g.value(t), 0.0, s, tol)?)
}

/// Builds `h` and `H` from `(g, f)` on a table built for the same `g`.
pub fn transformed_nonlinearity(
    g: &NonlinearityG,
    f: &SourceF,
    table: Arc<TransformTable>,
) -> Result<TransformedProblem, TransformError> {
    TransformedProblem::new(g, f, table)
}

/// Nodewise `v = A(u)`.
pub fn push_forward(table: &TransformTable, u: &Field) -> Result<Field, TransformError> {
    let values = u
        .values()
        .iter()
        .map(|&x| table.eval_a(x))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(u.with_values_unchecked(values))
}

/// Nodewise `u = A^{-1}(v)`.
pub fn pull_back(table: &TransformTable, v: &Field) -> Result<Field, TransformError> {
    let values = v
        .values()
        .iter()
        .map(|&x| table.invert_a(x))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(v.with_values_unchecked(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::Mesh;

    #[test]
    fn big_g_examples() {
        assert_eq!(big_g(&NonlinearityG::zero(), 5.0, 1e-10).unwrap(), 0.0);
        let two = GSpec::Constant { c: 2.0 }.build(2.0).unwrap();
        assert!((big_g(&two, 3.0, 1e-10).unwrap() - 6.0).abs() < 1e-12);
        let recip = NonlinearityG::new("1/(1+t)", |t| 1.0 / (1.0 + t)).unwrap();
        assert!((big_g(&recip, 1.0, 1e-12).unwrap() - 2f64.ln()).abs() < 1e-11);
        assert!(matches!(
            big_g(&recip, -1.0, 1e-8),
            Err(TransformError::NegativeArgument(_))
        ));
    }

    #[test]
    fn push_pull_round_trip() {
        let p = 2.0;
        let g = GSpec::Constant { c: 1.0 }.build(p).unwrap();
        let table = TransformTable::build(&g, p, 5.0, 1e-12).unwrap();
        let mesh = Arc::new(Mesh::interval(1.0, 11, p).unwrap());
        let u = Field::from_fn(&mesh, |x| 2.0 * x * (1.0 - x)).unwrap();
        let v = push_forward(&table, &u).unwrap();
        let back = pull_back(&table, &v).unwrap();
        for (a, b) in u.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(v.values()[0], 0.0);
        let ones = u.with_values_unchecked(vec![1.0; 11]);
        let e = push_forward(&table, &ones).unwrap();
        assert!(e.values().iter().all(|&x| (x - (1f64.exp() - 1.0)).abs() < 1e-10));
    }
}
