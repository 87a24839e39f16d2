//! The test oracles agree with closed forms where those exist.

mod common;

#[test]
fn eigen_shooting_matches_closed_form() {
    for p in [1.5, 2.0, 3.0] {
        let (s, c) = (common::eigen_shooting(p), common::eigen_closed_form(p));
        assert!((s - c).abs() / c < 1e-6, "p = {p}: {s} vs {c}");
    }
    assert!((common::eigen_closed_form(2.0) - std::f64::consts::PI.powi(2)).abs() < 1e-12);
}

#[test]
fn cubic_shooting_matches_time_map() {
    let map = common::TimeMap {
        big_f: |u: f64| u.powi(4) / 4.0,
    };
    let m = common::cubic_shooting();
    assert!((map.lambda(m) - 1.0).abs() < 1e-5, "{}", map.lambda(m));
}

#[test]
fn linear_time_map_is_constant() {
    // -u'' = lambda u has positive solutions only at lambda = pi^2
    let map = common::TimeMap {
        big_f: |u: f64| 0.5 * u * u,
    };
    for m in [1e-3, 1.0, 1e3] {
        assert!((map.lambda(m) - std::f64::consts::PI.powi(2)).abs() < 1e-3);
    }
}

#[test]
fn concave_convex_fold() {
    let map = common::concave_convex_map();
    let (m, l) = map.fold(1e-6, 1e3);
    assert!(m > 0.1 && m < 2.0);
    let (a, b) = map.roots(0.5 * l, 1e-6, 1e3);
    assert!(a < m && m < b);
    assert!((map.lambda(a) - 0.5 * l).abs() < 1e-9 && (map.lambda(b) - 0.5 * l).abs() < 1e-9);
}
