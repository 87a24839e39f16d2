//! Independent one-dimensional oracles on (0, 1): shooting and time maps.
#![allow(dead_code)]

fn spow(x: f64, e: f64) -> f64 {
    x.signum() * x.abs().powf(e)
}

/// RK4 for `u' = |w|^(1/(p-1)) sgn w`, `w' = -lambda |u|^(p-2) u` from
/// `u = 0, w = 1`; true when the flux `w` stays positive up to `x_end`.
fn eigen_shot(p: f64, lambda: f64, x_end: f64, steps: usize) -> bool {
    let rhs = |u: f64, w: f64| (spow(w, 1.0 / (p - 1.0)), -lambda * spow(u, p - 1.0));
    let h = x_end / steps as f64;
    let (mut u, mut w) = (0.0f64, 1.0f64);
    for _ in 0..steps {
        let k1 = rhs(u, w);
        let k2 = rhs(u + 0.5 * h * k1.0, w + 0.5 * h * k1.1);
        let k3 = rhs(u + 0.5 * h * k2.0, w + 0.5 * h * k2.1);
        let k4 = rhs(u + h * k3.0, w + h * k3.1);
        u += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        w += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        if w <= 0.0 {
            return false;
        }
    }
    true
}

/// First Dirichlet eigenvalue of `-Delta_p` on (0, 1) by shooting to the
/// symmetry point: the flux vanishes at `x = 1/2` exactly for `lambda_1`.
pub fn eigen_shooting(p: f64) -> f64 {
    let (mut lo, mut hi) = (1e-3f64, 1e4f64);
    for _ in 0..80 {
        let mid = (lo * hi).sqrt();
        if eigen_shot(p, mid, 0.5, 40_000) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo * hi).sqrt()
}

/// `(p - 1) pi_p^p` with `pi_p = 2 pi / (p sin(pi / p))`.
pub fn eigen_closed_form(p: f64) -> f64 {
    let pi_p = 2.0 * std::f64::consts::PI / (p * (std::f64::consts::PI / p).sin());
    (p - 1.0) * pi_p.powf(p)
}

/// Sup norm of the positive solution of `-u'' = u^3` on (0, 1).
///
/// Shoots `U'' = -U^3`, `U(0) = 0`, `U'(0) = 1` to the first zero `T` of
/// `U'`; then `u(x) = 2T U(2T x)`.
pub fn cubic_shooting() -> f64 {
    let rhs = |u: f64, v: f64| (v, -u * u * u);
    let step = |u: f64, v: f64, h: f64| {
        let k1 = rhs(u, v);
        let k2 = rhs(u + 0.5 * h * k1.0, v + 0.5 * h * k1.1);
        let k3 = rhs(u + 0.5 * h * k2.0, v + 0.5 * h * k2.1);
        let k4 = rhs(u + h * k3.0, v + h * k3.1);
        (
            u + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
            v + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        )
    };
    let h = 1e-5;
    let (mut x, mut u, mut v) = (0.0f64, 0.0f64, 1.0f64);
    loop {
        let (un, vn) = step(u, v, h);
        if vn <= 0.0 {
            // bisect the final step for the zero of U'
            let (mut a, mut b) = (0.0, h);
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                if step(u, v, m).1 > 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            let t = x + 0.5 * (a + b);
            let umax = step(u, v, 0.5 * (a + b)).0;
            return 2.0 * t * umax;
        }
        x += h;
        u = un;
        v = vn;
    }
}

/// Time map of `-u'' = lambda f(u)` on (0, 1) for positive symmetric
/// solutions: a solution with `sup u = M` exists iff `lambda = 4 tau(M)^2`,
/// `tau(M) = int_0^M du / sqrt(2 (F(M) - F(u)))`.
pub struct TimeMap<F: Fn(f64) -> f64> {
    pub big_f: F,
}

impl<F: Fn(f64) -> f64> TimeMap<F> {
    pub fn tau(&self, m: f64) -> f64 {
        // u = M (1 - z^2) removes the square-root endpoint singularity
        let n = 4000;
        let fm = (self.big_f)(m);
        let mut sum = 0.0;
        for i in 0..n {
            let z = (i as f64 + 0.5) / n as f64;
            let u = m * (1.0 - z * z);
            let gap = fm - (self.big_f)(u);
            sum += 2.0 * m * z / (2.0 * gap).sqrt();
        }
        sum / n as f64
    }

    pub fn lambda(&self, m: f64) -> f64 {
        4.0 * self.tau(m).powi(2)
    }

    /// Dense sweep of `ln M` over `[ln lo, ln hi]`; returns `(M, lambda(M))`.
    pub fn sweep(&self, lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
        (0..n)
            .map(|i| {
                let m = (lo.ln() + (hi / lo).ln() * i as f64 / (n - 1) as f64).exp();
                (m, self.lambda(m))
            })
            .collect()
    }

    /// Largest `lambda` with a solution, refined by golden section around
    /// the sweep maximum.
    pub fn fold(&self, lo: f64, hi: f64) -> (f64, f64) {
        let s = self.sweep(lo, hi, 400);
        let k = (0..s.len()).max_by(|&a, &b| s[a].1.total_cmp(&s[b].1)).unwrap();
        let (mut a, mut b) = (s[k.saturating_sub(1)].0.ln(), s[(k + 1).min(s.len() - 1)].0.ln());
        let r = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..100 {
            let c = b - r * (b - a);
            let d = a + r * (b - a);
            if self.lambda(c.exp()) > self.lambda(d.exp()) {
                b = d;
            } else {
                a = c;
            }
        }
        let m = (0.5 * (a + b)).exp();
        (m, self.lambda(m))
    }

    /// The sup norm on each side of the fold with `lambda(M) = lambda`.
    pub fn roots(&self, lambda: f64, lo: f64, hi: f64) -> (f64, f64) {
        let (m_fold, _) = self.fold(lo, hi);
        let solve = |mut a: f64, mut b: f64, rising: bool| {
            for _ in 0..200 {
                let m = (a * b).sqrt();
                if (self.lambda(m) < lambda) == rising {
                    a = m;
                } else {
                    b = m;
                }
            }
            (a * b).sqrt()
        };
        (solve(lo, m_fold, true), solve(m_fold, hi, false))
    }
}

/// `F(u) = u^1.5 / 1.5 + u^4 / 4` for `f(u) = u^0.5 + u^3`.
pub fn concave_convex_map() -> TimeMap<fn(f64) -> f64> {
    TimeMap {
        big_f: |u| u.powf(1.5) / 1.5 + u.powi(4) / 4.0,
    }
}
