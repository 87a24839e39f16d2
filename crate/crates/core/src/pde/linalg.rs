/// Symmetric tridiagonal matrix stored by diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    /// Main diagonal, length `n`.
    pub diag: Vec<f64>,
    /// Off-diagonal, length `n - 1`; entry `k` couples rows `k` and `k + 1`.
    pub off: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self {
            diag: vec![0.0; n],
            off: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    v += self.off[i] * x[i + 1];
                }
                v
            })
            .collect()
    }

    /// Thomas algorithm. Returns `None` on a vanishing or non-finite pivot.
    pub fn solve(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        let n = self.len();
        if n == 0 {
            return Some(Vec::new());
        }
        let scale = self
            .diag
            .iter()
            .fold(0.0f64, |m, d| m.max(d.abs()))
            .max(f64::MIN_POSITIVE);
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut pivot = self.diag[0];
        if !(pivot.abs() > 1e-300 * scale) || !pivot.is_finite() {
            return None;
        }
        if n > 1 {
            c[0] = self.off[0] / pivot;
        }
        d[0] = rhs[0] / pivot;
        for i in 1..n {
            pivot = self.diag[i] - self.off[i - 1] * c[i - 1];
            if !(pivot.abs() > 1e-14 * scale) || !pivot.is_finite() {
                return None;
            }
            if i + 1 < n {
                c[i] = self.off[i] / pivot;
            }
            d[i] = (rhs[i] - self.off[i - 1] * d[i - 1]) / pivot;
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        if d.iter().all(|v| v.is_finite()) {
            Some(d)
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn solves_laplacian() {
        let n = 5;
        let t = Tridiagonal {
            diag: vec![2.0; n],
            off: vec![-1.0; n - 1],
        };
        let x = t.solve(&[1.0; 5]).unwrap();
        let back = t.mul(&x);
        for v in back {
            assert!((v - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn singular_is_reported() {
        let t = Tridiagonal {
            diag: vec![1.0, 1.0],
            off: vec![1.0],
        };
        assert!(t.solve(&[1.0, 1.0]).is_none());
    }

    proptest! {
        #[test]
        fn diagonally_dominant_round_trip(
            off in proptest::collection::vec(-1.0f64..1.0, 1..40),
            rhs_seed in -5.0f64..5.0,
        ) {
            let n = off.len() + 1;
            let diag: Vec<f64> = (0..n).map(|i| 2.5 + (i as f64 * 0.37).sin()).collect();
            let t = Tridiagonal { diag, off };
            let rhs: Vec<f64> = (0..n).map(|i| rhs_seed + i as f64).collect();
            let x = t.solve(&rhs).unwrap();
            let back = t.mul(&x);
            for (a, b) in back.iter().zip(&rhs) {
                prop_assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()));
            }
        }
    }
}
