//! The JSON problem document shared by the CLI, the catalogue and the tests.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::hypotheses::Condition;
use crate::pde::{DiscreteProblem, Domain, Mesh};
use crate::transform::{FSpec, GSpec, NonlinearityG, SourceF, TransformTable, TransformedProblem};

/// Largest `v = A(s)` tabulated when no `s_max` is given.
pub const DEFAULT_V_MAX: f64 = 1e8;
/// Quadrature tolerance for the transform table.
pub const TABLE_TOL: f64 = 1e-12;
pub const DEFAULT_NODES: usize = 401;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Interval {
        #[serde(rename = "L")]
        length: f64,
    },
    Ball {
        #[serde(rename = "R")]
        radius: f64,
        #[serde(rename = "N")]
        dim: u32,
    },
}

impl Default for DomainSpec {
    fn default() -> Self {
        DomainSpec::Interval { length: 1.0 }
    }
}

impl DomainSpec {
    /// Space dimension used for the Sobolev exponent.
    pub fn dimension(&self) -> u32 {
        match *self {
            DomainSpec::Interval { .. } => 1,
            DomainSpec::Ball { dim, .. } => dim,
        }
    }

    pub fn to_domain(&self) -> Domain {
        match *self {
            DomainSpec::Interval { length } => Domain::Interval { length },
            DomainSpec::Ball { radius, dim } => Domain::Ball { radius, dim },
        }
    }
}

fn default_nodes() -> usize {
    DEFAULT_NODES
}

fn default_g() -> GSpec {
    GSpec::Zero
}

/// `-Delta_p u = g(u)|grad u|^p + lambda f(x, u)` on an interval or ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    /// Catalogue id this document was produced from, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub p: f64,
    #[serde(default = "default_g")]
    pub g: GSpec,
    pub f: FSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub domain: DomainSpec,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditions: Option<Vec<Condition>>,
    /// Subcritical exponent for the growth check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    /// Exponent for the AR check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    /// Tabulate the transform on `[0, s_max]` instead of up to `v = 1e8`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_max: Option<f64>,
}

/// Everything needed to run checks and solvers on a document.
#[derive(Debug, Clone)]
pub struct ResolvedProblem {
    pub g: NonlinearityG,
    pub f: SourceF,
    pub table: Arc<TransformTable>,
    pub transformed: Arc<TransformedProblem>,
    pub mesh: Arc<Mesh>,
    pub discrete: DiscreteProblem,
}

impl ProblemDocument {
    /// Parses a document; errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self, Error> {
        let doc: Self = serde_json::from_str(text)
            .map_err(|e| Error::Document(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialise")
    }

    pub fn validate(&self) -> Result<(), Error> {
        let bad = |m: String| Err(Error::Document(m));
        if !(self.p > 1.0 && self.p.is_finite()) {
            return bad(format!("p must exceed 1, got {}", self.p));
        }
        if let Some(l) = self.lambda {
            if !(l > 0.0 && l.is_finite()) {
                return bad(format!("lambda must be positive, got {l}"));
            }
        }
        if self.nodes < 3 {
            return bad(format!("nodes must be at least 3, got {}", self.nodes));
        }
        match self.domain {
            DomainSpec::Interval { length } if !(length > 0.0 && length.is_finite()) => {
                bad(format!("interval length must be positive, got {length}"))
            }
            DomainSpec::Ball { radius, dim } if !(radius > 0.0 && radius.is_finite()) || dim == 0 => {
                bad(format!("ball needs R > 0 and N >= 1, got R = {radius}, N = {dim}"))
            }
            _ => Ok(()),
        }
    }

    pub fn dimension(&self) -> u32 {
        self.domain.dimension()
    }

    pub fn lambda_or_one(&self) -> f64 {
        self.lambda.unwrap_or(1.0)
    }

    pub fn mesh(&self) -> Result<Arc<Mesh>, Error> {
        Ok(Arc::new(Mesh::uniform(self.domain.to_domain(), self.nodes, self.p)?))
    }

    pub fn build_g(&self) -> Result<NonlinearityG, Error> {
        Ok(self.g.build(self.p)?)
    }

    pub fn build_f(&self) -> Result<SourceF, Error> {
        Ok(self.f.build(self.p)?)
    }

    pub fn build_table(&self, g: &NonlinearityG) -> Result<TransformTable, Error> {
        Ok(match self.s_max {
            Some(s) => TransformTable::build(g, self.p, s, TABLE_TOL)?,
            None => TransformTable::build_to_value(g, self.p, DEFAULT_V_MAX, TABLE_TOL)?,
        })
    }

    /// Builds `g`, `f`, the transform table, the mesh and the discrete
    /// problem `-Delta_p v = lambda h(x, v)`.
    pub fn resolve(&self) -> Result<ResolvedProblem, Error> {
        self.validate()?;
        let g = self.build_g()?;
        let f = self.build_f()?;
        let table = Arc::new(self.build_table(&g)?);
        let transformed = Arc::new(TransformedProblem::new(&g, &f, Arc::clone(&table))?);
        let mesh = self.mesh()?;
        let discrete =
            DiscreteProblem::new(Arc::clone(&mesh), transformed.clone()).with_lambda(self.lambda_or_one())?;
        Ok(ResolvedProblem {
            g,
            f,
            table,
            transformed,
            mesh,
            discrete,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_document_with_defaults() {
        let doc = ProblemDocument::from_json(r#"{"p": 2, "f": {"kind": "power", "r": 4}}"#).unwrap();
        assert_eq!(doc.g, GSpec::Zero);
        assert_eq!(doc.nodes, DEFAULT_NODES);
        assert_eq!(doc.domain, DomainSpec::Interval { length: 1.0 });
        assert_eq!(doc.dimension(), 1);
    }

    #[test]
    fn round_trips_through_json() {
        let doc = ProblemDocument {
            id: Some("i".into()),
            p: 2.0,
            g: GSpec::Constant { c: 1.0 },
            f: FSpec::PowerExp {
                q: 2.0,
                c2: 2.0,
                mu: 1.0,
            },
            lambda: None,
            domain: DomainSpec::Ball { radius: 1.0, dim: 3 },
            nodes: 101,
            conditions: Some(vec![Condition::HSc, Condition::HAr1]),
            r: None,
            theta: None,
            s_max: None,
        };
        let back = ProblemDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
        assert!(doc.to_json().contains(r#""kind": "ball""#));
    }

    #[test]
    fn syntax_errors_report_position() {
        let err = ProblemDocument::from_json("{\n  \"p\": 2,\n  \"f\": }").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn rejects_unknown_fields_and_bad_values() {
        assert!(ProblemDocument::from_json(r#"{"p": 2, "f": {"kind": "zero"}, "foo": 1}"#).is_err());
        assert!(ProblemDocument::from_json(r#"{"p": 1, "f": {"kind": "zero"}}"#).is_err());
        assert!(ProblemDocument::from_json(r#"{"p": 2, "f": {"kind": "zero"}, "lambda": -1}"#).is_err());
    }

    #[test]
    fn resolves_to_a_discrete_problem() {
        let doc = ProblemDocument::from_json(
            r#"{"p": 2, "g": {"kind": "constant", "C": 1}, "f": {"kind": "power", "r": 3},
                "domain": {"kind": "ball", "R": 1, "N": 3}, "nodes": 21, "lambda": 2}"#,
        )
        .unwrap();
        let r = doc.resolve().unwrap();
        assert_eq!(r.mesh.len(), 21);
        assert_eq!(r.discrete.lambda(), 2.0);
        // A = e^s - 1, so h(A(1)) = e * 1^2
        let v = 1f64.exp() - 1.0;
        let h = crate::pde::Reaction::h(r.transformed.as_ref(), 0.0, v).unwrap();
        assert!((h - 1f64.exp()).abs() < 1e-8);
    }
}
