use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::PdeError;
use crate::quadrature::{adaptive_simpson, gauss_legendre5};

/// Computational domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    /// The interval `(0, L)` with Dirichlet data at both ends.
    Interval {
        #[serde(rename = "L")]
        length: f64,
    },
    /// Radial functions on the ball of radius `R` in `R^N`.
    Ball {
        #[serde(rename = "R")]
        radius: f64,
        #[serde(rename = "N")]
        dim: u32,
    },
}

impl Domain {
    /// Spatial dimension entering `p*`.
    pub fn dimension(&self) -> u32 {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Ball { dim, .. } => *dim,
        }
    }

    pub fn extent(&self) -> f64 {
        match self {
            Domain::Interval { length } => *length,
            Domain::Ball { radius, .. } => *radius,
        }
    }

    pub fn is_radial(&self) -> bool {
        matches!(self, Domain::Ball { .. })
    }
}

/// One-dimensional grid on an interval or on the radial coordinate of a ball.
///
/// Cell `i` joins nodes `i` and `i + 1`; its weight is `m_i^(N-1)` at the cell
/// midpoint for a ball and `1` for an interval. Nodal weights are the exact
/// integrals of the hat functions against `r^(N-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    domain: Domain,
    nodes: Vec<f64>,
    p: f64,
    widths: Vec<f64>,
    cell_weights: Vec<f64>,
    node_weights: Vec<f64>,
}

impl Mesh {
    pub fn new(domain: Domain, nodes: Vec<f64>, p: f64) -> Result<Self, PdeError> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(PdeError::InvalidMesh(format!("p must exceed 1, got {p}")));
        }
        if nodes.len() < 3 {
            return Err(PdeError::InvalidMesh(format!(
                "need at least 3 nodes, got {}",
                nodes.len()
            )));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) || nodes.iter().any(|x| !x.is_finite()) {
            return Err(PdeError::InvalidMesh(
                "nodes must be finite and strictly increasing".into(),
            ));
        }
        let ext = domain.extent();
        if !(ext > 0.0 && ext.is_finite()) {
            return Err(PdeError::InvalidMesh(format!(
                "domain size must be positive, got {ext}"
            )));
        }
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * ext;
        if !close(nodes[0], 0.0) || !close(*nodes.last().unwrap(), ext) {
            return Err(PdeError::InvalidMesh(format!(
                "nodes must run from 0 to {ext}, got [{}, {}]",
                nodes[0],
                nodes.last().unwrap()
            )));
        }
        let expo = match domain {
            Domain::Interval { .. } => 0,
            Domain::Ball { dim, .. } => {
                if dim < 1 {
                    return Err(PdeError::InvalidMesh("ball dimension must be at least 1".into()));
                }
                dim - 1
            }
        };
        let n = nodes.len();
        let widths: Vec<f64> = nodes.windows(2).map(|w| w[1] - w[0]).collect();
        let cell_weights = nodes
            .windows(2)
            .map(|w| (0.5 * (w[0] + w[1])).powi(expo as i32))
            .collect();
        let radial = |r: f64| r.powi(expo as i32);
        let integrate = |f: &dyn Fn(f64) -> f64, a: f64, b: f64| {
            if expo < 9 {
                gauss_legendre5(f, a, b)
            } else {
                adaptive_simpson(f, a, b, 1e-15 * (b - a)).unwrap_or_else(|_| gauss_legendre5(f, a, b))
            }
        };
        let mut node_weights = vec![0.0; n];
        for i in 0..n - 1 {
            let (a, b) = (nodes[i], nodes[i + 1]);
            let h = b - a;
            node_weights[i] += integrate(&|r| (b - r) / h * radial(r), a, b);
            node_weights[i + 1] += integrate(&|r| (r - a) / h * radial(r), a, b);
        }
        Ok(Self {
            domain,
            nodes,
            p,
            widths,
            cell_weights,
            node_weights,
        })
    }

    pub fn uniform(domain: Domain, n: usize, p: f64) -> Result<Self, PdeError> {
        if n < 3 {
            return Err(PdeError::InvalidMesh(format!("need at least 3 nodes, got {n}")));
        }
        let ext = domain.extent();
        let nodes = (0..n)
            .map(|i| {
                if i == n - 1 {
                    ext
                } else {
                    ext * i as f64 / (n - 1) as f64
                }
            })
            .collect();
        Self::new(domain, nodes, p)
    }

    pub fn interval(length: f64, n: usize, p: f64) -> Result<Self, PdeError> {
        Self::uniform(Domain::Interval { length }, n, p)
    }

    pub fn ball(radius: f64, dim: u32, n: usize, p: f64) -> Result<Self, PdeError> {
        Self::uniform(Domain::Ball { radius, dim }, n, p)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn cell_weights(&self) -> &[f64] {
        &self.cell_weights
    }

    pub fn node_weights(&self) -> &[f64] {
        &self.node_weights
    }

    /// Range of unknowns: the center is free on a ball, only the outer node
    /// is fixed.
    pub fn free_range(&self) -> std::ops::Range<usize> {
        let n = self.nodes.len();
        match self.domain {
            Domain::Interval { .. } => 1..n - 1,
            Domain::Ball { .. } => 0..n - 1,
        }
    }

    pub fn is_free(&self, j: usize) -> bool {
        self.free_range().contains(&j)
    }

    /// Node closest to the middle of the domain (the center for a ball).
    pub fn middle_node(&self) -> usize {
        match self.domain {
            Domain::Interval { .. } => {
                let half = 0.5 * self.domain.extent();
                let k = self.nodes.partition_point(|&x| x < half);
                if k > 0 && (self.nodes[k - 1] - half).abs() <= (self.nodes[k] - half).abs() {
                    k - 1
                } else {
                    k
                }
            }
            Domain::Ball { .. } => 0,
        }
    }
}

/// Nodal values on a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    mesh: Arc<Mesh>,
    values: Vec<f64>,
}

impl Field {
    pub fn new(mesh: &Arc<Mesh>, values: Vec<f64>) -> Result<Self, PdeError> {
        if values.len() != mesh.len() {
            return Err(PdeError::FieldSize {
                expected: mesh.len(),
                got: values.len(),
            });
        }
        Ok(Self {
            mesh: Arc::clone(mesh),
            values,
        })
    }

    pub fn zeros(mesh: &Arc<Mesh>) -> Self {
        Self {
            mesh: Arc::clone(mesh),
            values: vec![0.0; mesh.len()],
        }
    }

    /// Samples `f` at the nodes and zeroes the Dirichlet nodes.
    pub fn from_fn(mesh: &Arc<Mesh>, f: impl Fn(f64) -> f64) -> Result<Self, PdeError> {
        let mut v: Vec<f64> = mesh.nodes().iter().map(|&x| f(x)).collect();
        for (j, x) in v.iter_mut().enumerate() {
            if !mesh.is_free(j) {
                *x = 0.0;
            }
        }
        Self::new(mesh, v)
    }

    /// Same mesh, new values (length is the caller's responsibility).
    pub fn with_values_unchecked(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.mesh.len());
        Self {
            mesh: Arc::clone(&self.mesh),
            values,
        }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// True when all Dirichlet nodes are zero.
    pub fn is_admissible(&self) -> bool {
        self.values
            .iter()
            .enumerate()
            .all(|(j, &v)| self.mesh.is_free(j) || v == 0.0)
    }

    /// Minimum over the free nodes that are not on the boundary.
    pub fn interior_min(&self) -> f64 {
        self.mesh
            .free_range()
            .map(|j| self.values[j])
            .fold(f64::INFINITY, f64::min)
    }

    /// One-sided difference quotient at the outer boundary.
    pub fn outer_slope(&self) -> f64 {
        let n = self.values.len();
        let x = self.mesh.nodes();
        (self.values[n - 1] - self.values[n - 2]) / (x[n - 1] - x[n - 2])
    }

    /// `x,value` rows with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,value\n");
        for (x, v) in self.mesh.nodes().iter().zip(&self.values) {
            let _ = writeln!(out, "{x:.16e},{v:.16e}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_weights_sum_to_length() {
        let m = Mesh::interval(2.0, 11, 2.0).unwrap();
        let s: f64 = m.node_weights().iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        assert_eq!(m.free_range(), 1..10);
        assert_eq!(m.middle_node(), 5);
    }

    #[test]
    fn ball_weights_integrate_radial_measure() {
        let m = Mesh::ball(1.0, 3, 21, 2.0).unwrap();
        let s: f64 = m.node_weights().iter().sum();
        assert!((s - 1.0 / 3.0).abs() < 1e-14);
        assert_eq!(m.free_range(), 0..20);
    }

    #[test]
    fn rejects_bad_meshes() {
        assert!(Mesh::interval(1.0, 2, 2.0).is_err());
        assert!(Mesh::interval(1.0, 10, 1.0).is_err());
        assert!(Mesh::new(Domain::Interval { length: 1.0 }, vec![0.0, 0.6, 0.5, 1.0], 2.0).is_err());
        assert!(Mesh::new(Domain::Interval { length: 1.0 }, vec![0.1, 0.5, 1.0], 2.0).is_err());
    }

    #[test]
    fn field_csv_and_admissibility() {
        let m = Arc::new(Mesh::interval(1.0, 3, 2.0).unwrap());
        let f = Field::from_fn(&m, |_| 1.0).unwrap();
        assert_eq!(f.values(), &[0.0, 1.0, 0.0]);
        assert!(f.is_admissible());
        let csv = f.to_csv();
        assert!(csv.starts_with("x,value\n0.0000000000000000e0,"));
        assert!(Field::new(&m, vec![1.0]).is_err());
    }
}
